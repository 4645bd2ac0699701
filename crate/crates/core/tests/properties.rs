//! Randomized invariants of the public API. Each property holds exactly in
//! real arithmetic; tolerances only absorb floating point roundoff, scaled
//! by the magnitudes involved.

use affine_pr::forward::polarization_gap;
use affine_pr::json::{
    ensemble_from_json, ensemble_to_json, signal_from_json, signal_to_json,
};
use affine_pr::{
    deficiency_collision, lift_measurement, measure, random_ensemble, realify_pair,
    tight_ensemble, tight_recover, validate_ensemble, witness_scale, Complex64, Ensemble,
    FieldTag, Signal,
};
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = FieldTag> {
    prop_oneof![Just(FieldTag::Real), Just(FieldTag::Complex)]
}

fn coords_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-5.0f64..5.0, len)
}

fn coord_len(field: FieldTag, d: usize) -> usize {
    match field {
        FieldTag::Real => d,
        FieldTag::Complex => 2 * d,
    }
}

/// (field, d, r, ensemble) with 1 <= r <= d <= 4 and a few measurements.
fn ensemble_strategy() -> impl Strategy<Value = Ensemble> {
    (field_strategy(), 1usize..=4, 1usize..=6, any::<u64>()).prop_flat_map(|(field, d, m, seed)| {
        (1..=d).prop_map(move |r| random_ensemble(field, d, r, m, seed).unwrap())
    })
}

proptest! {
    #[test]
    fn measurements_match_the_lifted_quadratic(
        e in ensemble_strategy(),
        raw in coords_strategy(8),
    ) {
        let x = Signal::from_coords(e.field, &raw[..coord_len(e.field, e.d)]);
        let y = measure(&e, &x).unwrap();
        let mut xt: Vec<Complex64> = x.entries().to_vec();
        xt.push(Complex64::ONE);
        for (j, pair) in e.pairs.iter().enumerate() {
            let lifted = lift_measurement(pair);
            let q = lifted.quadratic(&xt);
            let scale = 1.0 + y.values()[j].abs();
            prop_assert!((q - y.values()[j]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn measurements_match_the_realified_quadratic(
        e in ensemble_strategy(),
        raw in coords_strategy(8),
    ) {
        let x = Signal::from_coords(e.field, &raw[..coord_len(e.field, e.d)]);
        let y = measure(&e, &x).unwrap();
        // Realified evaluation always works on stacked [Re; Im] coordinates.
        let mut stacked = vec![0.0; 2 * e.d];
        for (i, z) in x.entries().iter().enumerate() {
            stacked[i] = z.re;
            stacked[i + e.d] = z.im;
        }
        for (j, pair) in e.pairs.iter().enumerate() {
            let q = realify_pair(pair).eval(&stacked);
            let scale = 1.0 + y.values()[j].abs();
            prop_assert!((q - y.values()[j]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn polarization_matches_measurement_differences(
        e in ensemble_strategy(),
        raw_x in coords_strategy(8),
        raw_y in coords_strategy(8),
    ) {
        let n = coord_len(e.field, e.d);
        let x = Signal::from_coords(e.field, &raw_x[..n]);
        let y = Signal::from_coords(e.field, &raw_y[..n]);
        let yx = measure(&e, &x).unwrap();
        let yy = measure(&e, &y).unwrap();
        for (j, pair) in e.pairs.iter().enumerate() {
            let gap = polarization_gap(pair, &x, &y).unwrap();
            let want = yx.values()[j] - yy.values()[j];
            let scale = 1.0 + yx.values()[j].abs().max(yy.values()[j].abs());
            prop_assert!((gap - want).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn tight_recovery_round_trips(
        field in field_strategy(),
        d in 1usize..=5,
        r_raw in 1usize..=5,
        raw in coords_strategy(10),
    ) {
        let r = r_raw.min(d);
        let e = tight_ensemble(field, d, r, None).unwrap();
        prop_assert!(validate_ensemble(&e).is_valid());
        let x = Signal::from_coords(field, &raw[..coord_len(field, d)]);
        let y = measure(&e, &x).unwrap();
        let back = tight_recover(&e, &y).unwrap();
        prop_assert!(back.distance(&x) <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn dropping_any_pair_from_a_tight_ensemble_breaks_injectivity(
        field in field_strategy(),
        dr in prop_oneof![Just((2usize, 1usize)), Just((3, 3)), Just((4, 2))],
        j in any::<proptest::sample::Index>(),
    ) {
        // r divides d here, so the tight count is minimal: one pair fewer
        // admits an exact collision.
        let (d, r) = dr;
        let e = tight_ensemble(field, d, r, None).unwrap();
        let mut pairs = e.pairs.clone();
        pairs.remove(j.index(pairs.len()));
        let sub = Ensemble::new(field, d, r, pairs);
        let w = deficiency_collision(&sub).unwrap();
        let scale = witness_scale(&sub, &w.x, &w.y).unwrap();
        prop_assert!(w.gap <= 1e-9 * scale);
        prop_assert!(w.separation >= 1e-4);
    }

    #[test]
    fn ensemble_json_round_trips(e in ensemble_strategy()) {
        let back = ensemble_from_json(&ensemble_to_json(&e)).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn signal_json_round_trips(
        field in field_strategy(),
        raw in coords_strategy(8),
    ) {
        let x = Signal::from_coords(field, &raw[..coord_len(field, 4)]);
        let back = signal_from_json(&signal_to_json(&x)).unwrap();
        prop_assert_eq!(back, x);
    }
}
