//! On-disk JSON formats shared with the command line tool.
//!
//! Every document carries a `schema` tag. Scalars are a plain number over
//! the reals and a two-element `[re, im]` array over the complex numbers
//! (parsers accept either form for either field, but a real-field document
//! must carry zero imaginary parts); matrices are row-major nested arrays.
//! Floats are emitted with 17 significant digits, which round-trips `f64`
//! exactly. Parse errors name the offending path, `$.pairs[3].m[1][0]`
//! style, so a broken file can be fixed without bisecting it.

use num_complex::Complex64;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::ensemble::{
    Block, ConstructionMeta, Ensemble, FieldTag, MeasurementPair, Signal, TightLayout,
};
use crate::forward::MeasurementVector;
use crate::injectivity::{Certificate, CollisionWitness, InjectivityReport, Verdict};
use crate::linalg::CMat;

pub const ENSEMBLE_SCHEMA: &str = "affine-pr-1";
pub const SIGNAL_SCHEMA: &str = "affine-pr-sig-1";
pub const MEASUREMENT_SCHEMA: &str = "affine-pr-meas-1";
pub const WITNESS_SCHEMA: &str = "affine-pr-wit-1";
pub const CERTIFICATE_SCHEMA: &str = "affine-pr-cert-1";
pub const REPORT_SCHEMA: &str = "affine-pr-report-1";

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("missing key {path}")]
    MissingKey { path: String },
    #[error("{path} must be {expected}")]
    WrongType { path: String, expected: &'static str },
    #[error("expected schema \"{expected}\", found \"{got}\"")]
    BadSchema { expected: &'static str, got: String },
    #[error("{path}: {reason}")]
    BadValue { path: String, reason: String },
}

// ---------------------------------------------------------------- emission

/// 17 significant digits: enough to reproduce any f64 bit-exactly.
pub fn fmt_f64(x: f64) -> String {
    debug_assert!(x.is_finite(), "formats only finite values");
    format!("{x:.16e}")
}

fn scalar_json(field: FieldTag, z: Complex64) -> String {
    match field {
        FieldTag::Real => fmt_f64(z.re),
        FieldTag::Complex => format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im)),
    }
}

fn cvec_json(field: FieldTag, v: &[Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|&z| scalar_json(field, z)).collect();
    format!("[{}]", parts.join(", "))
}

fn fvec_json(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", parts.join(", "))
}

/// Re-indents a nested document so it sits inside a parent object.
fn indent_tail(s: &str, pad: usize) -> String {
    s.replace('\n', &format!("\n{}", " ".repeat(pad)))
}

fn layout_fields(field: FieldTag, layout: &TightLayout) -> String {
    let blocks: Vec<String> =
        layout.blocks.iter().map(|b| format!("[{}, {}]", b.start, b.len)).collect();
    let mut out = String::new();
    out.push_str(&format!("    \"epsilon\": {},\n", layout.epsilon));
    out.push_str(&format!("    \"blocks\": [{}],\n", blocks.join(", ")));
    out.push_str("    \"offsets\": [\n");
    for (t, family) in layout.offsets.iter().enumerate() {
        let vecs: Vec<String> = family.iter().map(|v| cvec_json(field, v)).collect();
        let comma = if t + 1 < layout.offsets.len() { "," } else { "" };
        out.push_str(&format!("      [{}]{}\n", vecs.join(", "), comma));
    }
    out.push_str("    ]");
    out
}

fn meta_json(field: FieldTag, meta: &ConstructionMeta) -> String {
    match meta {
        ConstructionMeta::Tight(layout) => {
            format!("{{\n    \"kind\": \"tight\",\n{}\n  }}", layout_fields(field, layout))
        }
        ConstructionMeta::Perturbed { layout, delta } => format!(
            "{{\n    \"kind\": \"perturbed\",\n    \"delta\": {},\n{}\n  }}",
            fmt_f64(*delta),
            layout_fields(field, layout)
        ),
        ConstructionMeta::Random { seed } => {
            format!("{{ \"kind\": \"random\", \"seed\": {seed} }}")
        }
        ConstructionMeta::Custom => "{ \"kind\": \"custom\" }".to_string(),
    }
}

pub fn ensemble_to_json(e: &Ensemble) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"schema\": \"{ENSEMBLE_SCHEMA}\",\n"));
    out.push_str(&format!("  \"field\": \"{}\",\n", e.field.name()));
    out.push_str(&format!("  \"d\": {},\n", e.d));
    out.push_str(&format!("  \"r\": {},\n", e.r));
    out.push_str("  \"pairs\": [\n");
    for (j, pair) in e.pairs.iter().enumerate() {
        out.push_str("    {\n");
        out.push_str("      \"m\": [\n");
        for i in 0..pair.d() {
            let row: Vec<String> =
                pair.m.row(i).iter().map(|&z| scalar_json(e.field, z)).collect();
            let comma = if i + 1 < pair.d() { "," } else { "" };
            out.push_str(&format!("        [{}]{comma}\n", row.join(", ")));
        }
        out.push_str("      ],\n");
        out.push_str(&format!("      \"b\": {}\n", cvec_json(e.field, &pair.b)));
        let comma = if j + 1 < e.pairs.len() { "," } else { "" };
        out.push_str(&format!("    }}{comma}\n"));
    }
    out.push_str("  ]");
    if let Some(meta) = &e.meta {
        out.push_str(",\n  \"meta\": ");
        out.push_str(&meta_json(e.field, meta));
    }
    out.push_str("\n}");
    out
}

pub fn signal_to_json(s: &Signal) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"schema\": \"{SIGNAL_SCHEMA}\",\n"));
    out.push_str(&format!("  \"field\": \"{}\",\n", s.field().name()));
    out.push_str(&format!("  \"x\": {}\n", cvec_json(s.field(), s.entries())));
    out.push('}');
    out
}

pub fn measurements_to_json(m: &MeasurementVector) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"schema\": \"{MEASUREMENT_SCHEMA}\",\n"));
    out.push_str(&format!("  \"y\": {}\n", fvec_json(m.values())));
    out.push('}');
    out
}

pub fn witness_to_json(field: FieldTag, w: &CollisionWitness) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"schema\": \"{WITNESS_SCHEMA}\",\n"));
    out.push_str(&format!("  \"field\": \"{}\",\n", field.name()));
    out.push_str(&format!("  \"x\": {},\n", cvec_json(field, w.x.entries())));
    out.push_str(&format!("  \"y\": {},\n", cvec_json(field, w.y.entries())));
    out.push_str(&format!("  \"gap\": {},\n", fmt_f64(w.gap)));
    out.push_str(&format!("  \"separation\": {}\n", fmt_f64(w.separation)));
    out.push('}');
    out
}

pub fn certificate_to_json(cert: &Certificate) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"schema\": \"{CERTIFICATE_SCHEMA}\",\n"));
    out.push_str(&format!("  \"field\": \"{}\",\n", cert.field.name()));
    out.push_str("  \"q\": [\n");
    for i in 0..cert.q.rows() {
        let row: Vec<String> =
            cert.q.row(i).iter().map(|&z| scalar_json(cert.field, z)).collect();
        let comma = if i + 1 < cert.q.rows() { "," } else { "" };
        out.push_str(&format!("    [{}]{comma}\n", row.join(", ")));
    }
    out.push_str("  ]\n}");
    out
}

pub fn report_to_json(field: FieldTag, report: &InjectivityReport) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"schema\": \"{REPORT_SCHEMA}\",\n"));
    out.push_str(&format!("  \"field\": \"{}\",\n", field.name()));
    let verdict = match &report.verdict {
        Verdict::NonInjective(_) => "non-injective",
        Verdict::NoCollisionFound => "no-collision-found",
    };
    out.push_str(&format!("  \"verdict\": \"{verdict}\",\n"));
    out.push_str(&format!("  \"min_margin\": {},\n", fmt_f64(report.min_margin)));
    out.push_str(&format!("  \"argmin\": {},\n", fvec_json(&report.argmin)));
    out.push_str(&format!("  \"restarts\": {},\n", report.restarts));
    out.push_str(&format!("  \"tol\": {}", fmt_f64(report.tol)));
    if let Verdict::NonInjective(w) = &report.verdict {
        out.push_str(",\n  \"witness\": ");
        out.push_str(&indent_tail(&witness_to_json(field, w), 2));
    }
    if let Some(cert) = &report.certificate {
        out.push_str(",\n  \"certificate\": ");
        out.push_str(&indent_tail(&certificate_to_json(cert), 2));
    }
    out.push_str("\n}");
    out
}

// ----------------------------------------------------------------- parsing

type JMap = Map<String, Value>;

fn root_object(text: &str) -> Result<JMap, JsonError> {
    let value: Value = serde_json::from_str(text)?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(JsonError::WrongType { path: "$".into(), expected: "an object" }),
    }
}

fn get<'a>(map: &'a JMap, key: &str, parent: &str) -> Result<&'a Value, JsonError> {
    map.get(key).ok_or_else(|| JsonError::MissingKey { path: format!("{parent}.{key}") })
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a JMap, JsonError> {
    v.as_object().ok_or_else(|| JsonError::WrongType { path: path.into(), expected: "an object" })
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, JsonError> {
    v.as_array().ok_or_else(|| JsonError::WrongType { path: path.into(), expected: "an array" })
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, JsonError> {
    v.as_str().ok_or_else(|| JsonError::WrongType { path: path.into(), expected: "a string" })
}

fn as_f64(v: &Value, path: &str) -> Result<f64, JsonError> {
    let x = v
        .as_f64()
        .ok_or_else(|| JsonError::WrongType { path: path.into(), expected: "a number" })?;
    if !x.is_finite() {
        return Err(JsonError::BadValue { path: path.into(), reason: "value is not finite".into() });
    }
    Ok(x)
}

fn as_u64(v: &Value, path: &str) -> Result<u64, JsonError> {
    v.as_u64().ok_or_else(|| JsonError::WrongType {
        path: path.into(),
        expected: "a nonnegative integer",
    })
}

fn as_usize(v: &Value, path: &str) -> Result<usize, JsonError> {
    Ok(as_u64(v, path)? as usize)
}

fn check_schema(map: &JMap, expected: &'static str) -> Result<(), JsonError> {
    let got = as_str(get(map, "schema", "$")?, "$.schema")?;
    if got != expected {
        return Err(JsonError::BadSchema { expected, got: got.to_string() });
    }
    Ok(())
}

fn parse_field(map: &JMap) -> Result<FieldTag, JsonError> {
    match as_str(get(map, "field", "$")?, "$.field")? {
        "real" => Ok(FieldTag::Real),
        "complex" => Ok(FieldTag::Complex),
        other => Err(JsonError::BadValue {
            path: "$.field".into(),
            reason: format!("unknown field \"{other}\""),
        }),
    }
}

fn parse_scalar(v: &Value, field: FieldTag, path: &str) -> Result<Complex64, JsonError> {
    match v {
        Value::Number(_) => Ok(Complex64::new(as_f64(v, path)?, 0.0)),
        Value::Array(parts) if parts.len() == 2 => {
            let re = as_f64(&parts[0], &format!("{path}[0]"))?;
            let im = as_f64(&parts[1], &format!("{path}[1]"))?;
            if field == FieldTag::Real && im != 0.0 {
                return Err(JsonError::BadValue {
                    path: path.into(),
                    reason: "imaginary part must be zero for the real field".into(),
                });
            }
            Ok(Complex64::new(re, im))
        }
        _ => Err(JsonError::WrongType { path: path.into(), expected: "a number or [re, im]" }),
    }
}

fn parse_cvec(v: &Value, field: FieldTag, path: &str) -> Result<Vec<Complex64>, JsonError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, s)| parse_scalar(s, field, &format!("{path}[{i}]")))
        .collect()
}

fn parse_fvec(v: &Value, path: &str) -> Result<Vec<f64>, JsonError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, s)| as_f64(s, &format!("{path}[{i}]")))
        .collect()
}

fn parse_cmat(v: &Value, field: FieldTag, path: &str) -> Result<CMat, JsonError> {
    let rows_v = as_array(v, path)?;
    let mut rows = Vec::with_capacity(rows_v.len());
    for (i, rv) in rows_v.iter().enumerate() {
        rows.push(parse_cvec(rv, field, &format!("{path}[{i}]"))?);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(JsonError::BadValue {
            path: path.into(),
            reason: "rows have unequal lengths".into(),
        });
    }
    Ok(CMat::from_rows(&rows))
}

fn parse_layout(map: &JMap, field: FieldTag, parent: &str) -> Result<TightLayout, JsonError> {
    let eps_path = format!("{parent}.epsilon");
    let epsilon = as_u64(get(map, "epsilon", parent)?, &eps_path)?;
    if epsilon > 1 {
        return Err(JsonError::BadValue { path: eps_path, reason: "epsilon must be 0 or 1".into() });
    }
    let blocks_path = format!("{parent}.blocks");
    let mut blocks = Vec::new();
    for (t, bv) in as_array(get(map, "blocks", parent)?, &blocks_path)?.iter().enumerate() {
        let bpath = format!("{blocks_path}[{t}]");
        let parts = as_array(bv, &bpath)?;
        if parts.len() != 2 {
            return Err(JsonError::WrongType { path: bpath, expected: "a [start, len] pair" });
        }
        blocks.push(Block {
            start: as_usize(&parts[0], &format!("{bpath}[0]"))?,
            len: as_usize(&parts[1], &format!("{bpath}[1]"))?,
        });
    }
    let offsets_path = format!("{parent}.offsets");
    let mut offsets = Vec::new();
    for (t, fv) in as_array(get(map, "offsets", parent)?, &offsets_path)?.iter().enumerate() {
        let fpath = format!("{offsets_path}[{t}]");
        let mut family = Vec::new();
        for (k, vv) in as_array(fv, &fpath)?.iter().enumerate() {
            family.push(parse_cvec(vv, field, &format!("{fpath}[{k}]"))?);
        }
        offsets.push(family);
    }
    Ok(TightLayout { blocks, offsets, epsilon: epsilon as u8 })
}

fn parse_meta(v: &Value, field: FieldTag) -> Result<ConstructionMeta, JsonError> {
    let map = as_object(v, "$.meta")?;
    match as_str(get(map, "kind", "$.meta")?, "$.meta.kind")? {
        "tight" => Ok(ConstructionMeta::Tight(parse_layout(map, field, "$.meta")?)),
        "perturbed" => Ok(ConstructionMeta::Perturbed {
            delta: as_f64(get(map, "delta", "$.meta")?, "$.meta.delta")?,
            layout: parse_layout(map, field, "$.meta")?,
        }),
        "random" => Ok(ConstructionMeta::Random {
            seed: as_u64(get(map, "seed", "$.meta")?, "$.meta.seed")?,
        }),
        "custom" => Ok(ConstructionMeta::Custom),
        other => Err(JsonError::BadValue {
            path: "$.meta.kind".into(),
            reason: format!("unknown construction kind \"{other}\""),
        }),
    }
}

fn signal_from_entries(field: FieldTag, entries: Vec<Complex64>) -> Signal {
    match field {
        FieldTag::Real => Signal::real(&entries.iter().map(|z| z.re).collect::<Vec<_>>()),
        FieldTag::Complex => Signal::complex(entries),
    }
}

pub fn ensemble_from_json(text: &str) -> Result<Ensemble, JsonError> {
    let map = root_object(text)?;
    check_schema(&map, ENSEMBLE_SCHEMA)?;
    let field = parse_field(&map)?;
    let d = as_usize(get(&map, "d", "$")?, "$.d")?;
    let r = as_usize(get(&map, "r", "$")?, "$.r")?;
    let pairs_v = as_array(get(&map, "pairs", "$")?, "$.pairs")?;
    let mut pairs = Vec::with_capacity(pairs_v.len());
    for (j, pv) in pairs_v.iter().enumerate() {
        let path = format!("$.pairs[{j}]");
        let pmap = as_object(pv, &path)?;
        let m = parse_cmat(get(pmap, "m", &path)?, field, &format!("{path}.m"))?;
        let b = parse_cvec(get(pmap, "b", &path)?, field, &format!("{path}.b"))?;
        pairs.push(MeasurementPair::new(m, b));
    }
    let mut e = Ensemble::new(field, d, r, pairs);
    if let Some(meta_v) = map.get("meta") {
        e.meta = Some(parse_meta(meta_v, field)?);
    }
    Ok(e)
}

pub fn signal_from_json(text: &str) -> Result<Signal, JsonError> {
    let map = root_object(text)?;
    check_schema(&map, SIGNAL_SCHEMA)?;
    let field = parse_field(&map)?;
    let entries = parse_cvec(get(&map, "x", "$")?, field, "$.x")?;
    Ok(signal_from_entries(field, entries))
}

pub fn measurements_from_json(text: &str) -> Result<MeasurementVector, JsonError> {
    let map = root_object(text)?;
    check_schema(&map, MEASUREMENT_SCHEMA)?;
    let values = parse_fvec(get(&map, "y", "$")?, "$.y")?;
    MeasurementVector::new(values)
        .map_err(|err| JsonError::BadValue { path: "$.y".into(), reason: err.to_string() })
}

pub fn witness_from_json(text: &str) -> Result<(FieldTag, CollisionWitness), JsonError> {
    let map = root_object(text)?;
    check_schema(&map, WITNESS_SCHEMA)?;
    let field = parse_field(&map)?;
    let x = parse_cvec(get(&map, "x", "$")?, field, "$.x")?;
    let y = parse_cvec(get(&map, "y", "$")?, field, "$.y")?;
    let gap = as_f64(get(&map, "gap", "$")?, "$.gap")?;
    let separation = as_f64(get(&map, "separation", "$")?, "$.separation")?;
    Ok((
        field,
        CollisionWitness {
            x: signal_from_entries(field, x),
            y: signal_from_entries(field, y),
            gap,
            separation,
        },
    ))
}

pub fn certificate_from_json(text: &str) -> Result<Certificate, JsonError> {
    let map = root_object(text)?;
    check_schema(&map, CERTIFICATE_SCHEMA)?;
    let field = parse_field(&map)?;
    let q = parse_cmat(get(&map, "q", "$")?, field, "$.q")?;
    Ok(Certificate { field, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{perturbed_ensemble, random_ensemble, tight_ensemble};
    use crate::forward::measure;
    use crate::injectivity::{certificate_from_collision, deficiency_collision};

    #[test]
    fn floats_round_trip_exactly() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0, -0.0] {
            let text = fmt_f64(x);
            let back: f64 = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{text}");
        }
    }

    #[test]
    fn ensemble_round_trips_with_tight_meta() {
        // Leftover block present: 2 does not divide 3.
        let e = tight_ensemble(FieldTag::Real, 3, 2, None).unwrap();
        let text = ensemble_to_json(&e);
        let back = ensemble_from_json(&text).unwrap();
        assert_eq!(back, e);
        assert!(text.contains("\"epsilon\": 1"));
    }

    #[test]
    fn ensemble_round_trips_complex_and_random_meta() {
        let e = random_ensemble(FieldTag::Complex, 2, 2, 5, 99).unwrap();
        let back = ensemble_from_json(&ensemble_to_json(&e)).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn ensemble_round_trips_perturbed_meta() {
        let e = perturbed_ensemble(FieldTag::Complex, 3, 2, 1e-3).unwrap().perturbed;
        let back = ensemble_from_json(&ensemble_to_json(&e)).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn frozen_document_parses() {
        let text = r#"{
            "schema": "affine-pr-1",
            "field": "real",
            "d": 1, "r": 1,
            "pairs": [{"m": [[2.0]], "b": [3.0]}]
        }"#;
        let e = ensemble_from_json(text).unwrap();
        assert_eq!(e.d, 1);
        assert_eq!(e.pairs[0].m[(0, 0)], Complex64::new(2.0, 0.0));
        assert_eq!(e.pairs[0].b[0], Complex64::new(3.0, 0.0));
        let y = measure(&e, &Signal::real(&[1.0])).unwrap();
        assert_eq!(y.values(), &[25.0]);
    }

    #[test]
    fn signal_and_measurement_round_trip() {
        let s = Signal::complex(vec![Complex64::new(0.1, -0.2), Complex64::new(3.0, 4.0)]);
        assert_eq!(signal_from_json(&signal_to_json(&s)).unwrap(), s);

        let s = Signal::real(&[1.5, -2.5]);
        assert_eq!(signal_from_json(&signal_to_json(&s)).unwrap(), s);

        let m = MeasurementVector::new(vec![1.0, 0.25, 1e-300]).unwrap();
        let back = measurements_from_json(&measurements_to_json(&m)).unwrap();
        assert_eq!(back.values(), m.values());
    }

    #[test]
    fn witness_and_certificate_round_trip() {
        let e = Ensemble::new(
            FieldTag::Real,
            1,
            1,
            vec![MeasurementPair::from_real(
                &crate::linalg::RMat::from_rows(&[vec![2.0]]),
                &[3.0],
            )],
        );
        let w = deficiency_collision(&e).unwrap();
        let (field, back) = witness_from_json(&witness_to_json(e.field, &w)).unwrap();
        assert_eq!(field, FieldTag::Real);
        assert_eq!(back.x, w.x);
        assert_eq!(back.y, w.y);
        assert_eq!(back.gap, w.gap);

        let cert = certificate_from_collision(&e, &w).unwrap();
        let back = certificate_from_json(&certificate_to_json(&cert)).unwrap();
        assert_eq!(back.q, cert.q);
        assert_eq!(back.field, cert.field);
    }

    #[test]
    fn errors_name_the_offending_path() {
        let missing = ensemble_from_json(r#"{"schema": "affine-pr-1", "field": "real", "d": 1, "r": 1}"#);
        assert!(matches!(missing, Err(JsonError::MissingKey { path }) if path == "$.pairs"));

        let schema = ensemble_from_json(r#"{"schema": "nope"}"#);
        assert!(matches!(schema, Err(JsonError::BadSchema { got, .. }) if got == "nope"));

        let imag = ensemble_from_json(
            r#"{"schema": "affine-pr-1", "field": "real", "d": 1, "r": 1,
                "pairs": [{"m": [[[1.0, 0.5]]], "b": [0.0]}]}"#,
        );
        assert!(
            matches!(imag, Err(JsonError::BadValue { path, .. }) if path == "$.pairs[0].m[0][0]")
        );

        let ragged = ensemble_from_json(
            r#"{"schema": "affine-pr-1", "field": "real", "d": 2, "r": 2,
                "pairs": [{"m": [[1.0, 0.0], [1.0]], "b": [0.0, 0.0]}]}"#,
        );
        assert!(
            matches!(ragged, Err(JsonError::BadValue { path, .. }) if path == "$.pairs[0].m")
        );

        let syntax = ensemble_from_json("{not json");
        assert!(matches!(syntax, Err(JsonError::Syntax(_))));

        let wrong = signal_from_json(
            r#"{"schema": "affine-pr-sig-1", "field": "real", "x": ["oops"]}"#,
        );
        assert!(matches!(wrong, Err(JsonError::WrongType { path, .. }) if path == "$.x[0]"));
    }

    #[test]
    fn emission_uses_17_significant_digits() {
        let e = Ensemble::new(
            FieldTag::Real,
            1,
            1,
            vec![MeasurementPair::from_real(
                &crate::linalg::RMat::from_rows(&[vec![2.0]]),
                &[0.1],
            )],
        );
        let text = ensemble_to_json(&e);
        assert!(text.contains("2.0000000000000000e0"), "{text}");
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
    }

    #[test]
    fn report_json_carries_witness_and_certificate() {
        let e = Ensemble::new(
            FieldTag::Real,
            1,
            1,
            vec![MeasurementPair::from_real(
                &crate::linalg::RMat::from_rows(&[vec![2.0]]),
                &[3.0],
            )],
        );
        let report =
            crate::injectivity::injectivity_report(&e, &crate::injectivity::SearchOptions::default())
                .unwrap();
        let text = report_to_json(e.field, &report);
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["schema"], REPORT_SCHEMA);
        assert_eq!(value["verdict"], "non-injective");
        assert_eq!(value["witness"]["schema"], WITNESS_SCHEMA);
        assert_eq!(value["certificate"]["schema"], CERTIFICATE_SCHEMA);
    }
}
