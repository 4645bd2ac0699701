//! Reproducible experiment sweeps over ensemble grids.
//!
//! A sweep turns an [`ExperimentConfig`] into a sorted list of
//! [`ExperimentRow`]s. Per-trial seeds derive as
//! `mix(master_seed, cell, trial)`, so rows never depend on execution order
//! and identical configs reproduce identical rows byte for byte; the
//! `wall_ms` column is the one exception and is excluded from comparisons.
//! Rows that demonstrate a collision carry the witness document, which the
//! JSON output embeds (CSV keeps the fixed columns only).

use std::time::Instant;

use affine_pr::json::{fmt_f64, witness_to_json};
use affine_pr::rng::{mix, normal_vec, stream};
use affine_pr::{
    collision_search, deficiency_collision, measure, perturbation_base, perturbed_ensemble,
    random_ensemble, tight_ensemble, tight_pair_count, tight_recover, witness_scale,
    CollisionWitness, Ensemble, FieldTag, SearchOptions, Signal, Verdict,
};
use serde::Serialize;
use thiserror::Error;

/// Which sweep to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Tight constructions: counts, recovery round trips, and leave-one-out
    /// collisions below the bound.
    Tightness,
    /// Random ensembles at the generic thresholds, plus deficient controls.
    Generic,
    /// Perturbed tight ensembles: injectivity fails arbitrarily nearby.
    Openness,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Tightness => "tightness",
            ExperimentKind::Generic => "generic",
            ExperimentKind::Openness => "openness",
        }
    }
}

/// Fields a sweep covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldChoice {
    Real,
    Complex,
    Both,
}

impl FieldChoice {
    fn fields(self) -> &'static [FieldTag] {
        match self {
            FieldChoice::Real => &[FieldTag::Real],
            FieldChoice::Complex => &[FieldTag::Complex],
            FieldChoice::Both => &[FieldTag::Real, FieldTag::Complex],
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("dimension grid is empty")]
    EmptyDims,
    #[error("dimensions must be at least 1")]
    ZeroDim,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("restarts must be at least 1")]
    NoRestarts,
    #[error("the openness demo needs every dimension >= 2, got {0}")]
    OpennessDim(usize),
    #[error("delta grid is empty")]
    EmptyDeltas,
    #[error("deltas must be positive and finite, got {0}")]
    BadDelta(f64),
}

/// Full description of a sweep: every row is a pure function of this struct
/// (wall clock aside), so a config plus its output is a complete record.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub field: FieldChoice,
    pub dims: Vec<usize>,
    /// Ranks paired with each dimension; values above `d` are skipped.
    /// Empty means every rank `1..=d` (tightness) or rank 1 (generic).
    /// The openness demo fixes its own ranks (1 real, 2 complex).
    pub ranks: Vec<usize>,
    pub trials: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Perturbation sizes for the openness demo.
    pub deltas: Vec<f64>,
}

impl ExperimentConfig {
    /// Defaults that finish in seconds at desk scale.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let dims = match kind {
            ExperimentKind::Tightness => vec![2, 4, 6],
            ExperimentKind::Generic => vec![2, 3],
            ExperimentKind::Openness => vec![2, 3, 4],
        };
        Self {
            kind,
            field: FieldChoice::Both,
            dims,
            ranks: Vec::new(),
            trials: 20,
            restarts: 50,
            seed: 0,
            deltas: vec![1e-1, 1e-3, 1e-6],
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dims.is_empty() {
            return Err(ConfigError::EmptyDims);
        }
        if self.dims.contains(&0) {
            return Err(ConfigError::ZeroDim);
        }
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        if self.restarts == 0 {
            return Err(ConfigError::NoRestarts);
        }
        if self.kind == ExperimentKind::Openness {
            if let Some(&d) = self.dims.iter().find(|&&d| d < 2) {
                return Err(ConfigError::OpennessDim(d));
            }
            if self.deltas.is_empty() {
                return Err(ConfigError::EmptyDeltas);
            }
            if let Some(&x) = self.deltas.iter().find(|&&x| !(x.is_finite() && x > 0.0)) {
                return Err(ConfigError::BadDelta(x));
            }
        }
        Ok(())
    }

    fn ranks_for(&self, d: usize) -> Vec<usize> {
        if self.ranks.is_empty() {
            match self.kind {
                ExperimentKind::Tightness => (1..=d).collect(),
                _ => vec![1],
            }
        } else {
            self.ranks.iter().copied().filter(|&r| r >= 1 && r <= d).collect()
        }
    }
}

/// One observation. Everything except `wall_ms` reproduces exactly from the
/// config; [`ExperimentRow::key`] is the part comparisons should use.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRow {
    pub experiment: &'static str,
    pub cell: usize,
    pub trial: usize,
    pub field: String,
    pub d: usize,
    pub r: usize,
    pub m: usize,
    /// Which property this row checks.
    pub check: &'static str,
    pub verdict: String,
    pub ok: bool,
    /// The measured quantity: count, residual, gap, margin, or distance.
    pub value: f64,
    pub wall_ms: f64,
    /// Witness document for rows that demonstrate a collision; embedded in
    /// JSON output, omitted from CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl ExperimentRow {
    /// Every reproducible column, i.e. everything but `wall_ms`.
    #[cfg_attr(not(test), allow(dead_code))]
    #[allow(clippy::type_complexity)]
    pub fn key(&self) -> (&str, usize, usize, &str, usize, usize, usize, &str, &str, bool, u64, Option<String>) {
        (
            self.experiment,
            self.cell,
            self.trial,
            &self.field,
            self.d,
            self.r,
            self.m,
            self.check,
            &self.verdict,
            self.ok,
            self.value.to_bits(),
            self.witness.as_ref().map(|w| w.to_string()),
        )
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass".into() } else { "fail".into() }
}

fn gaussian_signal(field: FieldTag, d: usize, seed: u64) -> Signal {
    let len = match field {
        FieldTag::Real => d,
        FieldTag::Complex => 2 * d,
    };
    Signal::from_coords(field, &normal_vec(&mut stream(seed), len))
}

fn witness_doc(field: FieldTag, w: &CollisionWitness) -> Option<serde_json::Value> {
    Some(serde_json::from_str(&witness_to_json(field, w)).expect("witness document parses"))
}

/// Peak absolute measurement difference between two signals, plus the
/// `1 + peak magnitude` scale.
fn measurement_gap(e: &Ensemble, x: &Signal, y: &Signal) -> (f64, f64) {
    let yx = measure(e, x).expect("witness matches its ensemble");
    let yy = measure(e, y).expect("witness matches its ensemble");
    let gap = yx
        .values()
        .iter()
        .zip(yy.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let peak = yx
        .values()
        .iter()
        .chain(yy.values())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    (gap, 1.0 + peak)
}

/// Dispatches on `cfg.kind` and returns the sorted rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, ConfigError> {
    match cfg.kind {
        ExperimentKind::Tightness => run_tightness_experiment(cfg),
        ExperimentKind::Generic => run_generic_experiment(cfg),
        ExperimentKind::Openness => run_openness_demo(cfg),
    }
}

fn finish(mut rows: Vec<ExperimentRow>) -> Vec<ExperimentRow> {
    // Stable, so rows sharing (cell, trial) keep their emission order.
    rows.sort_by_key(|row| (row.cell, row.trial));
    rows
}

/// Tight construction sweep. Per `(field, d, r)` cell: one `count` row
/// checking the measurement total against the bound formula, `trials`
/// recovery round trips, and, when `r | d`, one `leave-one-out` row per
/// dropped pair confirming the sub-ensemble collides (these use trial
/// numbers starting at `trials`).
pub fn run_tightness_experiment(
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentRow>, ConfigError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut cell = 0usize;
    for &field in cfg.field.fields() {
        for &d in &cfg.dims {
            for r in cfg.ranks_for(d) {
                let start = Instant::now();
                let e = tight_ensemble(field, d, r, None).expect("validated grid");
                let want = tight_pair_count(field, d, r);
                let ok = e.m() == want;
                rows.push(ExperimentRow {
                    experiment: "tightness",
                    cell,
                    trial: 0,
                    field: field.to_string(),
                    d,
                    r,
                    m: e.m(),
                    check: "count",
                    verdict: pass_fail(ok),
                    ok,
                    value: want as f64,
                    wall_ms: ms(start),
                    witness: None,
                });

                for trial in 0..cfg.trials {
                    let start = Instant::now();
                    let x = gaussian_signal(field, d, mix(cfg.seed, cell as u64, trial as u64));
                    let y = measure(&e, &x).expect("signal matches ensemble");
                    let (verdict, ok, value) = match tight_recover(&e, &y) {
                        Ok(back) => {
                            let err = back.distance(&x);
                            let ok = err <= 1e-8 * (1.0 + x.norm());
                            (pass_fail(ok), ok, err)
                        }
                        Err(err) => (format!("error: {err}"), false, 0.0),
                    };
                    rows.push(ExperimentRow {
                        experiment: "tightness",
                        cell,
                        trial,
                        field: field.to_string(),
                        d,
                        r,
                        m: e.m(),
                        check: "recovery",
                        verdict,
                        ok,
                        value,
                        wall_ms: ms(start),
                        witness: None,
                    });
                }

                if d % r == 0 {
                    for j in 0..e.m() {
                        let start = Instant::now();
                        let mut pairs = e.pairs.clone();
                        pairs.remove(j);
                        let sub = Ensemble::new(field, d, r, pairs);
                        let (verdict, ok, value, witness) = match deficiency_collision(&sub) {
                            Ok(w) => {
                                let scale =
                                    witness_scale(&sub, &w.x, &w.y).expect("witness matches");
                                let ok = w.gap <= 1e-8 * scale && w.separation >= 1e-4;
                                let doc = witness_doc(field, &w);
                                ("non-injective".into(), ok, w.gap, doc)
                            }
                            Err(err) => (format!("error: {err}"), false, 0.0, None),
                        };
                        rows.push(ExperimentRow {
                            experiment: "tightness",
                            cell,
                            trial: cfg.trials + j,
                            field: field.to_string(),
                            d,
                            r,
                            m: sub.m(),
                            check: "leave-one-out",
                            verdict,
                            ok,
                            value,
                            wall_ms: ms(start),
                            witness,
                        });
                    }
                }
                cell += 1;
            }
        }
    }
    Ok(finish(rows))
}

/// Random ensembles at the generic thresholds, `m = 2d` (real) and
/// `m = 4d - 1` (complex). Per `(field, d)` cell: `trials` collision
/// searches (rank cycles through the configured ranks), one `summary` row
/// counting non-injective verdicts (its `r` column is 0: the cell mixes
/// ranks), and, over the reals, `trials` deficient controls at
/// `m = d + floor(d/r) - 1` that must collide.
pub fn run_generic_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, ConfigError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut cell = 0usize;
    for &field in cfg.field.fields() {
        for &d in &cfg.dims {
            let ranks = cfg.ranks_for(d);
            if ranks.is_empty() {
                cell += 1;
                continue;
            }
            let m = match field {
                FieldTag::Real => 2 * d,
                FieldTag::Complex => 4 * d - 1,
            };
            let mut hits = 0usize;
            for trial in 0..cfg.trials {
                let r = ranks[trial % ranks.len()];
                let seed = mix(cfg.seed, cell as u64, trial as u64);
                let start = Instant::now();
                let e = random_ensemble(field, d, r, m, seed).expect("validated grid");
                let opts = SearchOptions { restarts: cfg.restarts, seed, ..SearchOptions::default() };
                let (verdict, ok, value, witness) = match collision_search(&e, &opts) {
                    Ok(report) => match report.verdict {
                        Verdict::NoCollisionFound => {
                            ("no-collision-found".into(), true, report.min_margin, None)
                        }
                        Verdict::NonInjective(w) => {
                            hits += 1;
                            let doc = witness_doc(field, &w);
                            ("non-injective".into(), false, w.gap, doc)
                        }
                    },
                    Err(err) => {
                        hits += 1;
                        (format!("error: {err}"), false, 0.0, None)
                    }
                };
                rows.push(ExperimentRow {
                    experiment: "generic",
                    cell,
                    trial,
                    field: field.to_string(),
                    d,
                    r,
                    m,
                    check: "search",
                    verdict,
                    ok,
                    value,
                    wall_ms: ms(start),
                    witness,
                });
            }
            rows.push(ExperimentRow {
                experiment: "generic",
                cell,
                trial: cfg.trials,
                field: field.to_string(),
                d,
                r: 0,
                m,
                check: "summary",
                verdict: format!("{hits} non-injective of {}", cfg.trials),
                ok: hits == 0,
                value: hits as f64,
                wall_ms: 0.0,
                witness: None,
            });

            if field == FieldTag::Real {
                for trial in 0..cfg.trials {
                    let r = ranks[trial % ranks.len()];
                    let m_ctl = d + d / r - 1;
                    let seed = mix(cfg.seed, cell as u64, (cfg.trials + 1 + trial) as u64);
                    let start = Instant::now();
                    let e = random_ensemble(field, d, r, m_ctl, seed).expect("validated grid");
                    let (verdict, ok, value, witness) = match deficiency_collision(&e) {
                        Ok(w) => {
                            let scale = witness_scale(&e, &w.x, &w.y).expect("witness matches");
                            let ok = w.gap <= 1e-8 * scale && w.separation > 1e-6;
                            let doc = witness_doc(field, &w);
                            ("non-injective".into(), ok, w.gap, doc)
                        }
                        Err(err) => (format!("error: {err}"), false, 0.0, None),
                    };
                    rows.push(ExperimentRow {
                        experiment: "generic",
                        cell,
                        trial: cfg.trials + 1 + trial,
                        field: field.to_string(),
                        d,
                        r,
                        m: m_ctl,
                        check: "control",
                        verdict,
                        ok,
                        value,
                        wall_ms: ms(start),
                        witness,
                    });
                }
            }
            cell += 1;
        }
    }
    Ok(finish(rows))
}

/// Perturbed tight ensembles. Per `(field, d)` cell and per delta (the trial
/// index runs over the delta list): the perturbed ensemble must measure the
/// witness pair identically, sit within `sqrt(2) * delta` of its base in
/// Frobenius norm, while the base still separates the pair; the witness
/// itself stays at least unit-separated.
pub fn run_openness_demo(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, ConfigError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut cell = 0usize;
    for &field in cfg.field.fields() {
        for &d in &cfg.dims {
            let r = match field {
                FieldTag::Real => 1,
                FieldTag::Complex => 2,
            };
            for (trial, &delta) in cfg.deltas.iter().enumerate() {
                let start = Instant::now();
                let push = |check: &'static str,
                                m: usize,
                                ok: bool,
                                verdict: String,
                                value: f64,
                                witness: Option<serde_json::Value>,
                                rows: &mut Vec<ExperimentRow>| {
                    rows.push(ExperimentRow {
                        experiment: "openness",
                        cell,
                        trial,
                        field: field.to_string(),
                        d,
                        r,
                        m,
                        check,
                        verdict,
                        ok,
                        value,
                        wall_ms: ms(start),
                        witness,
                    });
                };
                match perturbed_ensemble(field, d, r, delta) {
                    Ok(w) => {
                        let m = w.perturbed.m();
                        let (gap, scale) = measurement_gap(&w.perturbed, &w.x, &w.y);
                        let separation = w.x.distance(&w.y);
                        let ok = gap <= 1e-10 * scale;
                        let doc = witness_doc(
                            field,
                            &CollisionWitness {
                                x: w.x.clone(),
                                y: w.y.clone(),
                                gap,
                                separation,
                            },
                        );
                        push("witness-gap", m, ok, pass_fail(ok), gap, doc, &mut rows);

                        let base = perturbation_base(field, d, r).expect("validated grid");
                        let moved = w.perturbed.pairs[0].m.sub(&base.pairs[0].m).frobenius();
                        let bound =
                            2.0f64.sqrt() * delta * base.pairs[0].b[0].norm().max(1.0);
                        let ok = moved <= bound * (1.0 + 1e-9);
                        push("perturbation-distance", m, ok, pass_fail(ok), moved, None, &mut rows);

                        let (base_gap, _) = measurement_gap(&base, &w.x, &w.y);
                        let ok = base_gap > 1e-6;
                        push("base-separation", m, ok, pass_fail(ok), base_gap, None, &mut rows);

                        let ok = separation >= 1.0;
                        push("witness-separation", m, ok, pass_fail(ok), separation, None, &mut rows);
                    }
                    Err(err) => {
                        push("witness-gap", 0, false, format!("error: {err}"), 0.0, None, &mut rows);
                    }
                }
            }
            cell += 1;
        }
    }
    Ok(finish(rows))
}

// ------------------------------------------------------------------ output

/// Fixed CSV column order; `wall_ms` sits last so reproducibility
/// comparisons can strip one trailing column.
pub const CSV_HEADER: &str = "experiment,cell,trial,field,d,r,m,check,verdict,ok,value,wall_ms";

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Header plus one line per row; floats carry 17 significant digits.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::with_capacity(80 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.experiment,
            row.cell,
            row.trial,
            row.field,
            row.d,
            row.r,
            row.m,
            row.check,
            csv_field(&row.verdict),
            row.ok,
            fmt_f64(row.value),
            fmt_f64(row.wall_ms),
        ));
    }
    out
}

/// The same rows as a JSON array, witnesses included.
pub fn rows_to_json(rows: &[ExperimentRow]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use affine_pr::json::witness_from_json;

    fn keys(rows: &[ExperimentRow]) -> Vec<String> {
        rows.iter().map(|r| format!("{:?}", r.key())).collect()
    }

    #[test]
    fn tightness_grid_rows_all_pass() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Tightness);
        cfg.dims = vec![2, 3];
        cfg.trials = 3;
        let rows = run_tightness_experiment(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.ok), "{:?}", rows.iter().find(|r| !r.ok));
        // One count row per (field, d, r) cell.
        let counts = rows.iter().filter(|r| r.check == "count").count();
        assert_eq!(counts, 2 * (2 + 3));

        // Leave-one-out witnesses reload and still collide on the rebuilt
        // sub-ensemble.
        let mut checked = 0;
        for row in rows.iter().filter(|r| r.check == "leave-one-out") {
            let doc = row.witness.as_ref().expect("collision row embeds witness");
            let (field, w) = witness_from_json(&doc.to_string()).unwrap();
            let e = tight_ensemble(field, row.d, row.r, None).unwrap();
            let mut pairs = e.pairs.clone();
            pairs.remove(row.trial - cfg.trials);
            let sub = Ensemble::new(field, row.d, row.r, pairs);
            let scale = witness_scale(&sub, &w.x, &w.y).unwrap();
            let (gap, _) = measurement_gap(&sub, &w.x, &w.y);
            assert!(gap <= 1e-8 * scale);
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn generic_controls_collide_and_summaries_count() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Generic);
        cfg.field = FieldChoice::Real;
        cfg.dims = vec![2];
        cfg.trials = 3;
        cfg.restarts = 2;
        let rows = run_generic_experiment(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.ok), "{:?}", rows.iter().find(|r| !r.ok));
        assert_eq!(rows.iter().filter(|r| r.check == "search").count(), 3);
        assert_eq!(rows.iter().filter(|r| r.check == "control").count(), 3);
        let summary = rows.iter().find(|r| r.check == "summary").unwrap();
        assert_eq!(summary.value, 0.0);
        for row in rows.iter().filter(|r| r.check == "control") {
            let doc = row.witness.as_ref().expect("control rows embed witnesses");
            let (_, w) = witness_from_json(&doc.to_string()).unwrap();
            assert!(w.separation > 1e-6);
        }
    }

    #[test]
    fn openness_rows_pass_for_both_fields() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Openness);
        cfg.dims = vec![2, 3];
        let rows = run_openness_demo(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.ok), "{:?}", rows.iter().find(|r| !r.ok));
        // Four checks per (field, d, delta).
        assert_eq!(rows.len(), 2 * 2 * 3 * 4);
    }

    #[test]
    fn rows_reproduce_exactly_modulo_wall_time() {
        for kind in [ExperimentKind::Tightness, ExperimentKind::Generic, ExperimentKind::Openness] {
            let mut cfg = ExperimentConfig::for_kind(kind);
            cfg.dims = vec![2];
            cfg.trials = 2;
            cfg.restarts = 2;
            cfg.seed = 7;
            let a = run_experiment(&cfg).unwrap();
            let b = run_experiment(&cfg).unwrap();
            assert_eq!(keys(&a), keys(&b), "{} rows drifted", kind.name());
        }
    }

    #[test]
    fn rows_are_sorted_by_cell_then_trial() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Tightness);
        cfg.dims = vec![2];
        cfg.trials = 2;
        let rows = run_tightness_experiment(&cfg).unwrap();
        let order: Vec<(usize, usize)> = rows.iter().map(|r| (r.cell, r.trial)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }

    #[test]
    fn config_validation_rejects_bad_grids() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Tightness);
        cfg.dims.clear();
        assert!(matches!(cfg.validate(), Err(ConfigError::EmptyDims)));

        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Generic);
        cfg.trials = 0;
        assert!(matches!(cfg.validate(), Err(ConfigError::NoTrials)));

        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Openness);
        cfg.dims = vec![1];
        assert!(matches!(cfg.validate(), Err(ConfigError::OpennessDim(1))));

        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Openness);
        cfg.deltas = vec![-0.5];
        assert!(matches!(cfg.validate(), Err(ConfigError::BadDelta(_))));
    }

    #[test]
    fn csv_quotes_fields_that_need_it() {
        let row = ExperimentRow {
            experiment: "generic",
            cell: 0,
            trial: 0,
            field: "real".into(),
            d: 2,
            r: 1,
            m: 4,
            check: "search",
            verdict: "error: a, b \"c\"".into(),
            ok: false,
            value: 0.5,
            wall_ms: 1.0,
            witness: None,
        };
        let csv = rows_to_csv(&[row]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let line = lines.next().unwrap();
        assert!(line.contains("\"error: a, b \"\"c\"\"\""), "{line}");
        assert!(line.contains("5.0000000000000000e-1"));
    }
}
