//! Ensemble constructions.
//!
//! The tight construction tiles the `d` coordinates with blocks of width `r`
//! (plus one short leftover block when `r` does not divide `d`), puts the
//! identity on each block, and cycles each block through a small offset
//! family whose differences span the block. That yields
//! `m = d + floor(d/r) + eps` measurements over the reals and
//! `m = 2d + floor(d/r) + eps` over the complex numbers, with `eps = 1`
//! exactly when `r` does not divide `d`; no ensemble with fewer measurements
//! separates all signals, so these counts are minimal.
//!
//! The perturbed construction nudges one entry region of `M_1` by `delta`
//! and returns two far-apart signals the perturbed ensemble cannot tell
//! apart, while the unperturbed ensemble still separates them. Arbitrarily
//! small `delta` works, which is the sense in which the set of separating
//! ensembles is not open.
//!
//! Random ensembles draw every entry i.i.d. standard normal from a seeded
//! stream, for the regimes where generic ensembles separate.

use num_complex::Complex64;
use thiserror::Error;

use crate::ensemble::{
    Block, ConstructionMeta, Ensemble, FieldTag, MeasurementPair, OffsetFamily, Signal,
    TightLayout,
};
use crate::linalg::{lu_solve, CMat, LinalgError};
use crate::recover::recovery_matrix;
use crate::rng;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("d and r must be >= 1 (got d={d}, r={r})")]
    BadShape { d: usize, r: usize },
    #[error("m must be >= 1")]
    EmptyEnsemble,
    #[error("custom offsets: expected {expected} vectors of length {width}, got {got}")]
    OffsetCount { expected: usize, got: usize, width: usize },
    #[error("custom offset {index} has length {got}, expected {width}")]
    OffsetWidth { index: usize, got: usize, width: usize },
    #[error("custom offsets must be finite")]
    OffsetNotFinite,
    #[error("custom offsets must be real for the real field")]
    OffsetNotReal,
    #[error("custom offsets do not span: the block recovery matrix is singular")]
    OffsetsNotSpanning,
    #[error("delta must be a positive finite number, got {0}")]
    BadDelta(f64),
    #[error("perturbation needs d >= 2")]
    PerturbationNeedsWidth,
    #[error("perturbation needs r >= 2 for the complex field")]
    PerturbationNeedsRank,
    #[error("perturbation needs r <= d")]
    PerturbationNeedsBlock,
}

/// Minimal number of measurements that separates all of `F^d` with rank-`r`
/// maps: `d + floor(d/r) + eps` (real) or `2d + floor(d/r) + eps` (complex),
/// `eps = 1` unless `r | d`. The tight construction attains it.
pub fn tight_pair_count(field: FieldTag, d: usize, r: usize) -> usize {
    let full = d / r;
    let eps = usize::from(d % r != 0);
    match field {
        FieldTag::Real => d + full + eps,
        FieldTag::Complex => 2 * d + full + eps,
    }
}

fn real_vec(width: usize, hot: Option<usize>) -> Vec<Complex64> {
    let mut v = vec![Complex64::ZERO; width];
    if let Some(i) = hot {
        v[i] = Complex64::ONE;
    }
    v
}

fn imag_vec(width: usize, hot: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::ZERO; width];
    v[hot] = Complex64::I;
    v
}

/// The default offset family for one block of the given width: differences
/// of its members span `R^w` (real: `0, e_1, ..., e_w`) or all of `C^w` over
/// the reals (complex: `i e_1, ..., i e_w, e_1, ..., e_w, 0`), which is what
/// per-block recovery needs.
pub fn default_spanning_offsets(field: FieldTag, width: usize) -> OffsetFamily {
    match field {
        FieldTag::Real => {
            let mut family = vec![real_vec(width, None)];
            family.extend((0..width).map(|k| real_vec(width, Some(k))));
            family
        }
        FieldTag::Complex => {
            let mut family: OffsetFamily = (0..width).map(|k| imag_vec(width, k)).collect();
            family.extend((0..width).map(|k| real_vec(width, Some(k))));
            family.push(real_vec(width, None));
            family
        }
    }
}

/// Offset family used by the perturbed construction over the reals:
/// `e_1, 0, e_2, ..., e_w`. The leading offset must have a nonzero first
/// entry (it scales the perturbation) and every other member must have first
/// entry zero so that the colliding pair below stays indistinguishable.
fn perturbation_offsets_real(width: usize) -> OffsetFamily {
    let mut family = vec![real_vec(width, Some(0)), real_vec(width, None)];
    family.extend((1..width).map(|k| real_vec(width, Some(k))));
    family
}

fn family_spans(field: FieldTag, family: &[Vec<Complex64>]) -> bool {
    let mat = recovery_matrix(field, family);
    let zeros = vec![0.0; mat.rows()];
    !matches!(lu_solve(&mat, &zeros), Err(LinalgError::Singular { .. }))
}

fn expected_family_len(field: FieldTag, width: usize) -> usize {
    match field {
        FieldTag::Real => width + 1,
        FieldTag::Complex => 2 * width + 1,
    }
}

fn check_custom_offsets(
    field: FieldTag,
    r: usize,
    offsets: &[Vec<Complex64>],
) -> Result<(), ConstructError> {
    let expected = expected_family_len(field, r);
    if offsets.len() != expected {
        return Err(ConstructError::OffsetCount {
            expected,
            got: offsets.len(),
            width: r,
        });
    }
    for (index, offset) in offsets.iter().enumerate() {
        if offset.len() != r {
            return Err(ConstructError::OffsetWidth {
                index: index + 1,
                got: offset.len(),
                width: r,
            });
        }
        if !offset.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(ConstructError::OffsetNotFinite);
        }
        if field == FieldTag::Real && offset.iter().any(|z| z.im != 0.0) {
            return Err(ConstructError::OffsetNotReal);
        }
    }
    if !family_spans(field, offsets) {
        return Err(ConstructError::OffsetsNotSpanning);
    }
    Ok(())
}

fn block_layout(d: usize, r: usize) -> Vec<Block> {
    let full = d / r;
    let leftover = d - full * r;
    let mut blocks: Vec<Block> =
        (0..full).map(|t| Block { start: t * r, len: r }).collect();
    if leftover != 0 {
        blocks.push(Block { start: full * r, len: leftover });
    }
    blocks
}

/// `d x r` matrix whose rows on `block` form `[I_w | 0]` and vanish
/// elsewhere, so `M^* x` reads off the block coordinates (zero-padded to
/// length `r` when the block is short).
fn block_matrix(d: usize, r: usize, block: Block) -> CMat {
    let mut m = CMat::zeros(d, r);
    for i in 0..block.len {
        m[(block.start + i, i)] = Complex64::ONE;
    }
    m
}

fn pad_offset(offset: &[Complex64], r: usize) -> Vec<Complex64> {
    let mut b = offset.to_vec();
    b.resize(r, Complex64::ZERO);
    b
}

fn build_block_ensemble(
    field: FieldTag,
    d: usize,
    r: usize,
    family_for: impl Fn(usize) -> OffsetFamily,
) -> Ensemble {
    let blocks = block_layout(d, r);
    let mut pairs = Vec::new();
    let mut offsets = Vec::with_capacity(blocks.len());
    for &block in &blocks {
        let family = family_for(block.len);
        debug_assert!(family_spans(field, &family), "construction offsets must span");
        for offset in &family {
            pairs.push(MeasurementPair::new(
                block_matrix(d, r, block),
                pad_offset(offset, r),
            ));
        }
        offsets.push(family);
    }
    let epsilon = u8::from(d % r != 0);
    let mut e = Ensemble::new(field, d, r, pairs);
    e.meta = Some(ConstructionMeta::Tight(TightLayout { blocks, offsets, epsilon }));
    e
}

/// Builds the minimal-count block ensemble for `(field, d, r)`.
///
/// Pairs appear block by block, each block cycling through its offset family
/// in order. With `offsets = None` every width-`r` block uses
/// [`default_spanning_offsets`]; a custom family replaces it after passing
/// the same spanning check. A short leftover block always uses the default
/// family of its own width, zero-padded into `F^r`.
pub fn tight_ensemble(
    field: FieldTag,
    d: usize,
    r: usize,
    offsets: Option<&[Vec<Complex64>]>,
) -> Result<Ensemble, ConstructError> {
    if d < 1 || r < 1 {
        return Err(ConstructError::BadShape { d, r });
    }
    if let Some(custom) = offsets {
        check_custom_offsets(field, r, custom)?;
    }
    let e = build_block_ensemble(field, d, r, |width| match offsets {
        Some(custom) if width == r => custom.to_vec(),
        _ => default_spanning_offsets(field, width),
    });
    debug_assert_eq!(e.m(), tight_pair_count(field, d, r));
    Ok(e)
}

/// Certifies that a small perturbation of a separating ensemble can stop
/// separating: the perturbed ensemble measures `x` and `y` identically even
/// though they are far apart.
#[derive(Clone, Debug)]
pub struct PerturbationWitness {
    pub perturbed: Ensemble,
    pub x: Signal,
    pub y: Signal,
    pub delta: f64,
}

fn check_perturbation_shape(field: FieldTag, d: usize, r: usize) -> Result<(), ConstructError> {
    if d < 1 || r < 1 {
        return Err(ConstructError::BadShape { d, r });
    }
    if r > d {
        return Err(ConstructError::PerturbationNeedsBlock);
    }
    if d < 2 {
        return Err(ConstructError::PerturbationNeedsWidth);
    }
    if field == FieldTag::Complex && r < 2 {
        return Err(ConstructError::PerturbationNeedsRank);
    }
    Ok(())
}

/// The unperturbed ensemble the perturbed construction starts from: the
/// tight construction, with the real field swapping in
/// [`perturbation_offsets_real`] on full blocks. It separates the witness
/// pair that the perturbed ensemble cannot.
pub fn perturbation_base(
    field: FieldTag,
    d: usize,
    r: usize,
) -> Result<Ensemble, ConstructError> {
    check_perturbation_shape(field, d, r)?;
    Ok(build_block_ensemble(field, d, r, |width| match field {
        FieldTag::Real if width == r => perturbation_offsets_real(width),
        _ => default_spanning_offsets(field, width),
    }))
}

/// Perturbs the first measurement of [`perturbation_base`] by `delta` and
/// returns the signal pair the perturbed ensemble cannot distinguish.
///
/// Over the reals the `(2,1)` entry of `M_1` moves by `delta` and the
/// witness is `x = (1, -1/delta, 0, ...)`, `y = x` with the first sign
/// flipped; over the complex numbers the `(1,2)` and `(2,1)` entries move by
/// `+i delta` and `-i delta` and the witness is `x = (i, -1/(2 delta), 0,
/// ...)`, again with the first sign flipped. Either way
/// `||M_1 - M_1'||_F <= sqrt(2) * delta`, so the failure survives
/// arbitrarily small perturbations.
pub fn perturbed_ensemble(
    field: FieldTag,
    d: usize,
    r: usize,
    delta: f64,
) -> Result<PerturbationWitness, ConstructError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(ConstructError::BadDelta(delta));
    }
    let mut perturbed = perturbation_base(field, d, r)?;
    let layout = match &mut perturbed.meta {
        Some(ConstructionMeta::Tight(layout)) => std::mem::replace(
            layout,
            TightLayout { blocks: Vec::new(), offsets: Vec::new(), epsilon: 0 },
        ),
        _ => unreachable!("perturbation_base always attaches a tight layout"),
    };
    perturbed.meta = Some(ConstructionMeta::Perturbed { layout, delta });

    let m1 = &mut perturbed.pairs[0].m;
    let (x, y) = match field {
        FieldTag::Real => {
            m1[(1, 0)] += Complex64::new(delta, 0.0);
            let mut x = vec![0.0; d];
            x[0] = 1.0;
            x[1] = -1.0 / delta;
            let mut y = x.clone();
            y[0] = -1.0;
            (Signal::real(&x), Signal::real(&y))
        }
        FieldTag::Complex => {
            m1[(0, 1)] += Complex64::new(0.0, delta);
            m1[(1, 0)] -= Complex64::new(0.0, delta);
            let mut x = vec![Complex64::ZERO; d];
            x[0] = Complex64::I;
            x[1] = Complex64::new(-1.0 / (2.0 * delta), 0.0);
            let mut y = x.clone();
            y[0] = -Complex64::I;
            (Signal::complex(x), Signal::complex(y))
        }
    };
    Ok(PerturbationWitness { perturbed, x, y, delta })
}

/// Ensemble with every entry of every `M_j` and `b_j` drawn i.i.d. standard
/// normal (independent real and imaginary parts over the complex field) from
/// the ChaCha8 stream for `seed`. Draw order is fixed: per pair, `M` in
/// row-major order, then `b`.
pub fn random_ensemble(
    field: FieldTag,
    d: usize,
    r: usize,
    m: usize,
    seed: u64,
) -> Result<Ensemble, ConstructError> {
    if d < 1 || r < 1 {
        return Err(ConstructError::BadShape { d, r });
    }
    if m < 1 {
        return Err(ConstructError::EmptyEnsemble);
    }
    let mut rng = rng::stream(seed);
    let per_scalar = match field {
        FieldTag::Real => 1,
        FieldTag::Complex => 2,
    };
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Complex64 {
        let v = rng::normal_vec(rng, per_scalar);
        Complex64::new(v[0], if per_scalar == 2 { v[1] } else { 0.0 })
    };
    let pairs = (0..m)
        .map(|_| {
            let mut mat = CMat::zeros(d, r);
            for i in 0..d {
                for j in 0..r {
                    mat[(i, j)] = draw(&mut rng);
                }
            }
            let b = (0..r).map(|_| draw(&mut rng)).collect();
            MeasurementPair::new(mat, b)
        })
        .collect();
    let mut e = Ensemble::new(field, d, r, pairs);
    e.meta = Some(ConstructionMeta::Random { seed });
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::validate_ensemble;
    use crate::forward::measure;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tight_counts_match_formula() {
        for (field, d, r, want) in [
            (FieldTag::Real, 2, 1, 4),
            (FieldTag::Real, 5, 2, 8),
            (FieldTag::Real, 6, 3, 8),
            (FieldTag::Complex, 1, 1, 3),
            (FieldTag::Complex, 5, 2, 13),
            (FieldTag::Complex, 6, 3, 14),
        ] {
            assert_eq!(tight_pair_count(field, d, r), want, "{field} d={d} r={r}");
            let e = tight_ensemble(field, d, r, None).unwrap();
            assert_eq!(e.m(), want);
            assert!(validate_ensemble(&e).is_valid(), "{}", validate_ensemble(&e));
        }
    }

    #[test]
    fn tight_real_2_1_measures_example() {
        let e = tight_ensemble(FieldTag::Real, 2, 1, None).unwrap();
        let y = measure(&e, &Signal::real(&[1.0, 2.0])).unwrap();
        assert_eq!(y.values(), &[1.0, 4.0, 4.0, 9.0]);
    }

    #[test]
    fn tight_complex_1_1_measures_example() {
        let e = tight_ensemble(FieldTag::Complex, 1, 1, None).unwrap();
        let y = measure(&e, &Signal::complex(vec![c(1.0, 2.0)])).unwrap();
        assert_eq!(y.values(), &[10.0, 8.0, 5.0]);
    }

    #[test]
    fn tight_handles_leftover_block() {
        // d = 5, r = 2: blocks of width 2, 2, 1; the short block contributes
        // r' + 1 = 2 pairs whose offsets are zero-padded.
        let e = tight_ensemble(FieldTag::Real, 5, 2, None).unwrap();
        assert_eq!(e.m(), 8);
        let layout = e.meta.as_ref().unwrap().tight_layout().unwrap();
        assert_eq!(layout.blocks.len(), 3);
        assert_eq!(layout.blocks[2], Block { start: 4, len: 1 });
        assert_eq!(layout.epsilon, 1);
        let last = &e.pairs[7];
        assert_eq!(last.m[(4, 0)], c(1.0, 0.0));
        assert_eq!(last.b, vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(validate_ensemble(&e).is_valid());
    }

    #[test]
    fn tight_handles_r_larger_than_d() {
        let e = tight_ensemble(FieldTag::Real, 2, 3, None).unwrap();
        assert_eq!(e.m(), 3);
        let layout = e.meta.as_ref().unwrap().tight_layout().unwrap();
        assert_eq!(layout.blocks, vec![Block { start: 0, len: 2 }]);
        assert!(validate_ensemble(&e).is_valid());
    }

    #[test]
    fn custom_offsets_must_span() {
        // Two identical offsets cannot span R^1.
        let bad = vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]];
        assert!(matches!(
            tight_ensemble(FieldTag::Real, 2, 1, Some(&bad)),
            Err(ConstructError::OffsetsNotSpanning)
        ));
        let good = vec![vec![c(0.5, 0.0)], vec![c(-0.5, 0.0)]];
        let e = tight_ensemble(FieldTag::Real, 2, 1, Some(&good)).unwrap();
        assert_eq!(e.pairs[0].b, vec![c(0.5, 0.0)]);
    }

    #[test]
    fn custom_offsets_shape_errors() {
        let short = vec![vec![c(0.0, 0.0)]];
        assert!(matches!(
            tight_ensemble(FieldTag::Real, 2, 1, Some(&short)),
            Err(ConstructError::OffsetCount { expected: 2, got: 1, .. })
        ));
        let imaginary = vec![vec![c(0.0, 0.0)], vec![c(0.0, 1.0)]];
        assert!(matches!(
            tight_ensemble(FieldTag::Real, 2, 1, Some(&imaginary)),
            Err(ConstructError::OffsetNotReal)
        ));
    }

    #[test]
    fn perturbed_real_example() {
        let w = perturbed_ensemble(FieldTag::Real, 2, 2, 0.5).unwrap();
        let m1 = &w.perturbed.pairs[0].m;
        assert_eq!(m1[(0, 0)], c(1.0, 0.0));
        assert_eq!(m1[(1, 0)], c(0.5, 0.0));
        assert_eq!(m1[(0, 1)], c(0.0, 0.0));
        assert_eq!(m1[(1, 1)], c(1.0, 0.0));
        assert_eq!(w.x, Signal::real(&[1.0, -2.0]));
        assert_eq!(w.y, Signal::real(&[-1.0, -2.0]));
        let yx = measure(&w.perturbed, &w.x).unwrap();
        let yy = measure(&w.perturbed, &w.y).unwrap();
        assert_eq!(yx.values(), &[5.0, 5.0, 2.0]);
        assert_eq!(yy.values(), &[5.0, 5.0, 2.0]);
    }

    #[test]
    fn perturbed_collides_and_base_separates() {
        for field in [FieldTag::Real, FieldTag::Complex] {
            for (d, r) in [(2, 2), (3, 2), (4, 3), (5, 5)] {
                for delta in [1e-1, 1e-3, 1e-6] {
                    let w = perturbed_ensemble(field, d, r, delta).unwrap();
                    let yx = measure(&w.perturbed, &w.x).unwrap();
                    let yy = measure(&w.perturbed, &w.y).unwrap();
                    let scale = yx.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
                    for (a, b) in yx.values().iter().zip(yy.values()) {
                        assert!((a - b).abs() <= 1e-10 * scale, "{field} d={d} r={r} delta={delta}");
                    }
                    assert!(w.x.distance(&w.y) >= 1.0);

                    let base = perturbation_base(field, d, r).unwrap();
                    let bx = measure(&base, &w.x).unwrap();
                    let by = measure(&base, &w.y).unwrap();
                    // The unperturbed ensemble separates the pair by exactly
                    // 4 on the first measurement, independent of delta.
                    let gap: f64 = bx
                        .values()
                        .iter()
                        .zip(by.values())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    assert!(gap >= 1.0, "base must separate: {field} d={d} r={r}");

                    let dist: f64 = w.perturbed.pairs[0]
                        .m
                        .sub(&base.pairs[0].m)
                        .frobenius();
                    assert!(dist <= 2.0f64.sqrt() * delta * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn perturbed_real_rank_one_blocks() {
        // r = 1 < d over the reals: the nudge lands on the (2,1) entry of
        // M_1, outside the first block, and the witness still collides.
        let w = perturbed_ensemble(FieldTag::Real, 3, 1, 0.25).unwrap();
        let yx = measure(&w.perturbed, &w.x).unwrap();
        let yy = measure(&w.perturbed, &w.y).unwrap();
        let scale = yx.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in yx.values().iter().zip(yy.values()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn perturbation_shape_errors() {
        assert!(matches!(
            perturbed_ensemble(FieldTag::Real, 1, 1, 0.5),
            Err(ConstructError::PerturbationNeedsWidth)
        ));
        assert!(matches!(
            perturbed_ensemble(FieldTag::Complex, 1, 1, 0.5),
            Err(ConstructError::PerturbationNeedsWidth)
        ));
        assert!(matches!(
            perturbed_ensemble(FieldTag::Complex, 3, 1, 0.5),
            Err(ConstructError::PerturbationNeedsRank)
        ));
        assert!(matches!(
            perturbed_ensemble(FieldTag::Real, 2, 3, 0.5),
            Err(ConstructError::PerturbationNeedsBlock)
        ));
        assert!(matches!(
            perturbed_ensemble(FieldTag::Real, 2, 2, 0.0),
            Err(ConstructError::BadDelta(_))
        ));
    }

    #[test]
    fn random_ensembles_replay_by_seed() {
        let a = random_ensemble(FieldTag::Complex, 3, 2, 5, 11).unwrap();
        let b = random_ensemble(FieldTag::Complex, 3, 2, 5, 11).unwrap();
        let c = random_ensemble(FieldTag::Complex, 3, 2, 5, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(validate_ensemble(&a).is_valid());
        assert!(matches!(a.meta, Some(ConstructionMeta::Random { seed: 11 })));

        let real = random_ensemble(FieldTag::Real, 3, 2, 5, 11).unwrap();
        assert!(validate_ensemble(&real).is_valid());
        assert!(real.pairs[0].m.entries().iter().all(|z| z.im == 0.0));
    }
}
