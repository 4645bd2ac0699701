//! Measurement ensembles and their derived views.
//!
//! An [`Ensemble`] over `F in {R, C}` is a family of pairs `(M_j, b_j)` with
//! `M_j` a `d x r` matrix and `b_j in F^r`; it measures a signal `x in F^d`
//! as `y_j = ||M_j^* x + b_j||^2`. Real-field data uses the same complex
//! storage with imaginary parts pinned to zero, so one code path serves both
//! fields and the field tag records which interpretation is meant.
//!
//! Two derived views matter downstream. [`lift_measurement`] packs a pair
//! into the Hermitian `(d+1) x (d+1)` matrix `A_j` with
//! `y_j = (x,1)^* A_j (x,1)`, the form the certificate machinery consumes.
//! [`realify_pair`] rewrites a complex pair as a real quadratic on stacked
//! `[Re; Im]` coordinates, which is how the complex case reaches the real
//! eigensolver.
//!
//! Construction is permissive; [`validate_ensemble`] reports every problem
//! it finds instead of panicking, so file input can be checked wholesale.

use num_complex::Complex64;

use crate::linalg::{cnorm_sqr, realify_vec, CMat, RMat};

/// Scalar field of an ensemble or signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldTag {
    Real,
    Complex,
}

impl FieldTag {
    pub fn name(self) -> &'static str {
        match self {
            FieldTag::Real => "real",
            FieldTag::Complex => "complex",
        }
    }
}

impl std::fmt::Display for FieldTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A signal in `F^d`. Real signals keep imaginary parts exactly zero; the
/// constructors enforce that, so the tag can be trusted.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    field: FieldTag,
    entries: Vec<Complex64>,
}

impl Signal {
    pub fn real(entries: &[f64]) -> Self {
        Self {
            field: FieldTag::Real,
            entries: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn complex(entries: Vec<Complex64>) -> Self {
        Self { field: FieldTag::Complex, entries }
    }

    /// Rebuilds a signal from the real coordinate vector used by the
    /// optimization routines: the entries themselves for `Real` (length
    /// `d`), stacked `[Re; Im]` halves for `Complex` (length `2d`).
    pub fn from_coords(field: FieldTag, coords: &[f64]) -> Self {
        match field {
            FieldTag::Real => Self::real(coords),
            FieldTag::Complex => {
                assert!(coords.len() % 2 == 0, "complex coords must stack [Re; Im]");
                let d = coords.len() / 2;
                Self::complex(
                    (0..d).map(|i| Complex64::new(coords[i], coords[i + d])).collect(),
                )
            }
        }
    }

    /// Inverse of [`Signal::from_coords`].
    pub fn coords(&self) -> Vec<f64> {
        match self.field {
            FieldTag::Real => self.entries.iter().map(|z| z.re).collect(),
            FieldTag::Complex => realify_vec(&self.entries),
        }
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        cnorm_sqr(&self.entries).sqrt()
    }

    pub fn distance(&self, other: &Signal) -> f64 {
        assert_eq!(self.dim(), other.dim(), "signal dimensions differ");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// One measurement: `x -> ||M^* x + b||^2` with `M` of shape `d x r` and
/// `b` of length `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPair {
    pub m: CMat,
    pub b: Vec<Complex64>,
}

impl MeasurementPair {
    pub fn new(m: CMat, b: Vec<Complex64>) -> Self {
        Self { m, b }
    }

    pub fn from_real(m: &RMat, b: &[f64]) -> Self {
        Self {
            m: CMat::from_real(m),
            b: b.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.m.rows()
    }

    pub fn r(&self) -> usize {
        self.m.cols()
    }
}

/// One block of consecutive signal coordinates, zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

impl Block {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Offset family of one block: for a block of width `w` it holds `w + 1`
/// (real) or `2w + 1` (complex) vectors in `F^w`.
pub type OffsetFamily = Vec<Vec<Complex64>>;

/// Block structure of an ensemble built by the tight construction: which
/// coordinates each block covers, the offset family each block cycles
/// through, and whether a short leftover block was needed (`epsilon = 1`
/// exactly when `r` does not divide `d`).
#[derive(Clone, Debug, PartialEq)]
pub struct TightLayout {
    pub blocks: Vec<Block>,
    pub offsets: Vec<OffsetFamily>,
    pub epsilon: u8,
}

/// How an ensemble was built. Only the tight construction carries enough
/// structure for exact per-block recovery.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstructionMeta {
    Tight(TightLayout),
    Perturbed { layout: TightLayout, delta: f64 },
    Random { seed: u64 },
    Custom,
}

impl ConstructionMeta {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ConstructionMeta::Tight(_) => "tight",
            ConstructionMeta::Perturbed { .. } => "perturbed",
            ConstructionMeta::Random { .. } => "random",
            ConstructionMeta::Custom => "custom",
        }
    }

    /// The block layout when (and only when) per-block recovery applies.
    pub fn tight_layout(&self) -> Option<&TightLayout> {
        match self {
            ConstructionMeta::Tight(layout) => Some(layout),
            _ => None,
        }
    }

    fn any_layout(&self) -> Option<&TightLayout> {
        match self {
            ConstructionMeta::Tight(layout) => Some(layout),
            ConstructionMeta::Perturbed { layout, .. } => Some(layout),
            _ => None,
        }
    }
}

/// A measurement ensemble plus optional construction metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub field: FieldTag,
    pub d: usize,
    pub r: usize,
    pub pairs: Vec<MeasurementPair>,
    pub meta: Option<ConstructionMeta>,
}

impl Ensemble {
    pub fn new(field: FieldTag, d: usize, r: usize, pairs: Vec<MeasurementPair>) -> Self {
        Self { field, d, r, pairs, meta: None }
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }
}

/// Outcome of [`validate_ensemble`]: the full list of problems found.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_valid() {
            f.write_str("ok")
        } else {
            f.write_str(&self.issues.join("; "))
        }
    }
}

fn offset_count(field: FieldTag, width: usize) -> usize {
    match field {
        FieldTag::Real => width + 1,
        FieldTag::Complex => 2 * width + 1,
    }
}

/// Checks shapes, finiteness, the real-field zero-imaginary rule, and (when
/// block metadata is present) that the blocks tile `1..=d` consecutively
/// with matching offset families. Pair and block indices in messages are
/// one-based.
pub fn validate_ensemble(e: &Ensemble) -> ValidationReport {
    let mut issues = Vec::new();
    if e.d < 1 {
        issues.push("d must be >= 1".to_string());
    }
    if e.r < 1 {
        issues.push("r must be >= 1".to_string());
    }
    if e.pairs.is_empty() {
        issues.push("m must be >= 1".to_string());
    }
    for (idx, pair) in e.pairs.iter().enumerate() {
        let j = idx + 1;
        if pair.d() != e.d {
            issues.push(format!("pair {j} has d={}, ensemble d={}", pair.d(), e.d));
        }
        if pair.r() != e.r {
            issues.push(format!("pair {j} has r={}, ensemble r={}", pair.r(), e.r));
        }
        if pair.b.len() != e.r {
            issues.push(format!("pair {j} has |b|={}, ensemble r={}", pair.b.len(), e.r));
        }
        let finite = pair.m.entries().iter().chain(&pair.b);
        if !finite.clone().all(|z| z.re.is_finite() && z.im.is_finite()) {
            issues.push(format!("pair {j} has a non-finite entry"));
        }
        if e.field == FieldTag::Real && finite.clone().any(|z| z.im != 0.0) {
            issues.push(format!("pair {j} has a nonzero imaginary part (field is real)"));
        }
    }
    if let Some(meta) = &e.meta {
        if let ConstructionMeta::Perturbed { delta, .. } = meta {
            if !(delta.is_finite() && *delta > 0.0) {
                issues.push(format!("delta must be a positive finite number, got {delta}"));
            }
        }
        if let Some(layout) = meta.any_layout() {
            validate_layout(e, layout, &mut issues);
        }
    }
    ValidationReport { issues }
}

fn validate_layout(e: &Ensemble, layout: &TightLayout, issues: &mut Vec<String>) {
    let full = e.d / e.r;
    let leftover = e.d - e.r * full;
    if layout.epsilon != u8::from(leftover != 0) {
        issues.push(format!(
            "epsilon must be {} for d={}, r={}, got {}",
            u8::from(leftover != 0),
            e.d,
            e.r,
            layout.epsilon
        ));
    }
    let mut next = 0usize;
    for (idx, block) in layout.blocks.iter().enumerate() {
        let t = idx + 1;
        if block.start != next {
            issues.push(format!("block {t} starts at coordinate {}, expected {}", block.start + 1, next + 1));
        }
        let last = idx + 1 == layout.blocks.len();
        let want = if last && leftover != 0 { leftover } else { e.r };
        if block.len != want {
            issues.push(format!("block {t} has width {}, expected {want}", block.len));
        }
        next = block.start + block.len;
    }
    if next != e.d {
        issues.push(format!("blocks cover coordinates 1..={next}, ensemble has d={}", e.d));
    }
    if layout.offsets.len() != layout.blocks.len() {
        issues.push(format!(
            "{} offset families for {} blocks",
            layout.offsets.len(),
            layout.blocks.len()
        ));
    }
    let mut implied_m = 0usize;
    for (idx, (block, family)) in layout.blocks.iter().zip(&layout.offsets).enumerate() {
        let t = idx + 1;
        let want = offset_count(e.field, block.len);
        if family.len() != want {
            issues.push(format!("block {t} has {} offsets, expected {want}", family.len()));
        }
        for (k, offset) in family.iter().enumerate() {
            if offset.len() != block.len {
                issues.push(format!(
                    "block {t} offset {} has length {}, block width is {}",
                    k + 1,
                    offset.len(),
                    block.len
                ));
            }
        }
        implied_m += family.len();
    }
    if implied_m != e.m() && layout.offsets.len() == layout.blocks.len() {
        issues.push(format!("block layout implies m={implied_m}, ensemble has m={}", e.m()));
    }
}

/// The Hermitian `(d+1) x (d+1)` matrix of the lifted quadratic form:
/// `||M^* x + b||^2 = (x, 1)^* A (x, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedMatrix {
    pub a: CMat,
}

impl LiftedMatrix {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// Evaluates `xt^* A xt`; exactly real for Hermitian `A`, so only the
    /// real part is returned.
    pub fn quadratic(&self, xt: &[Complex64]) -> f64 {
        let ax = self.a.matvec(xt);
        crate::linalg::cdot(xt, &ax).re
    }
}

fn gram_mm_star(m: &CMat) -> CMat {
    let d = m.rows();
    let mut h = CMat::zeros(d, d);
    for j in 0..d {
        for k in j..d {
            let s: Complex64 = m.row(j).iter().zip(m.row(k)).map(|(a, b)| a * b.conj()).sum();
            if j == k {
                h[(j, j)] = Complex64::new(s.re, 0.0);
            } else {
                h[(j, k)] = s;
                h[(k, j)] = s.conj();
            }
        }
    }
    h
}

/// Builds `A = [[M M^*, M b], [(M b)^*, b^* b]]`. Hermiticity is exact by
/// construction: the mirror entries are written as conjugates and the
/// diagonal as real numbers, with no tolerance involved.
pub fn lift_measurement(pair: &MeasurementPair) -> LiftedMatrix {
    let d = pair.d();
    let h = gram_mm_star(&pair.m);
    let mb = pair.m.matvec(&pair.b);
    let mut a = CMat::zeros(d + 1, d + 1);
    for j in 0..d {
        for k in 0..d {
            a[(j, k)] = h[(j, k)];
        }
        a[(j, d)] = mb[j];
        a[(d, j)] = mb[j].conj();
    }
    a[(d, d)] = Complex64::new(cnorm_sqr(&pair.b), 0.0);
    LiftedMatrix { a }
}

/// A measurement as a real quadratic on stacked `[Re; Im]` coordinates:
/// `||M^* u + b||^2 = ut^T F ut + 2 c^T ut + constant`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealifiedPair {
    /// Symmetric `2d x 2d` image of `M M^*`.
    pub f: RMat,
    /// Stacked `[Re; Im]` image of `M b`.
    pub c: Vec<f64>,
    /// `||b||^2`.
    pub constant: f64,
}

impl RealifiedPair {
    pub fn eval(&self, ut: &[f64]) -> f64 {
        let fu = self.f.matvec(ut);
        crate::linalg::dot(ut, &fu) + 2.0 * crate::linalg::dot(&self.c, ut) + self.constant
    }
}

/// Realifies a pair. Real-field pairs realify too (the imaginary half is
/// then inert), but the real code paths work in dimension `d` directly.
pub fn realify_pair(pair: &MeasurementPair) -> RealifiedPair {
    let h = gram_mm_star(&pair.m);
    let mb = pair.m.matvec(&pair.b);
    RealifiedPair {
        f: h.realify(),
        c: realify_vec(&mb),
        constant: cnorm_sqr(&pair.b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_pair_e1_offset_one() -> MeasurementPair {
        // d = 2, r = 1: M = e_1, b = (1).
        MeasurementPair::from_real(&RMat::from_rows(&[vec![1.0], vec![0.0]]), &[1.0])
    }

    #[test]
    fn lift_real_example_is_exact() {
        let lifted = lift_measurement(&real_pair_e1_offset_one());
        let want = [
            [1.0, 0.0, 1.0],
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(lifted.a[(i, j)], c(want[i][j], 0.0));
            }
        }
        assert_eq!(lifted.a.hermitian_defect(), 0.0);
    }

    #[test]
    fn lift_complex_example_matches_measurement() {
        // d = 1, r = 1: M = (1), b = (i).
        let pair = MeasurementPair::new(CMat::from_rows(&[vec![c(1.0, 0.0)]]), vec![c(0.0, 1.0)]);
        let lifted = lift_measurement(&pair);
        assert_eq!(lifted.a[(0, 0)], c(1.0, 0.0));
        assert_eq!(lifted.a[(0, 1)], c(0.0, 1.0));
        assert_eq!(lifted.a[(1, 0)], c(0.0, -1.0));
        assert_eq!(lifted.a[(1, 1)], c(1.0, 0.0));
        // x = 1 + 2i: ||x + i||^2 = |1 + 3i|^2 = 10.
        let q = lifted.quadratic(&[c(1.0, 2.0), c(1.0, 0.0)]);
        assert!((q - 10.0).abs() <= 1e-12);
    }

    #[test]
    fn lift_matches_direct_measurement_on_random_pairs() {
        let mut rng = crate::rng::stream(5);
        for _ in 0..50 {
            let d = 3;
            let r = 2;
            let mut m = CMat::zeros(d, r);
            for i in 0..d {
                for j in 0..r {
                    let re = crate::rng::normal_vec(&mut rng, 2);
                    m[(i, j)] = c(re[0], re[1]);
                }
            }
            let b: Vec<Complex64> = (0..r)
                .map(|_| {
                    let v = crate::rng::normal_vec(&mut rng, 2);
                    c(v[0], v[1])
                })
                .collect();
            let pair = MeasurementPair::new(m, b);
            let lifted = lift_measurement(&pair);
            assert_eq!(lifted.a.hermitian_defect(), 0.0);

            let xv = crate::rng::normal_vec(&mut rng, 2 * d);
            let x: Vec<Complex64> = (0..d).map(|i| c(xv[i], xv[i + d])).collect();
            let mut xt = x.clone();
            xt.push(c(1.0, 0.0));
            let direct = {
                let mut img = pair.m.conj_tr_matvec(&x);
                for (a, b) in img.iter_mut().zip(&pair.b) {
                    *a += b;
                }
                cnorm_sqr(&img)
            };
            let lifted_val = lifted.quadratic(&xt);
            assert!(
                (direct - lifted_val).abs() <= 1e-10 * direct.abs().max(1.0),
                "{direct} vs {lifted_val}"
            );
        }
    }

    #[test]
    fn realify_example_identity_block() {
        // d = 1, r = 1: M = (1), b = (i) gives F = I_2, c = (0, 1), constant 1.
        let pair = MeasurementPair::new(CMat::from_rows(&[vec![c(1.0, 0.0)]]), vec![c(0.0, 1.0)]);
        let rp = realify_pair(&pair);
        assert_eq!(rp.f, RMat::identity(2));
        assert_eq!(rp.c, vec![0.0, 1.0]);
        assert_eq!(rp.constant, 1.0);
        // u = 1 + 2i in coordinates (1, 2): ||u + i||^2 = 10.
        assert!((rp.eval(&[1.0, 2.0]) - 10.0).abs() <= 1e-12);
    }

    #[test]
    fn realified_quadratic_matches_complex_norm() {
        let mut rng = crate::rng::stream(6);
        for _ in 0..50 {
            let d = 4;
            let r = 3;
            let mut m = CMat::zeros(d, r);
            for i in 0..d {
                for j in 0..r {
                    let v = crate::rng::normal_vec(&mut rng, 2);
                    m[(i, j)] = c(v[0], v[1]);
                }
            }
            let b: Vec<Complex64> = (0..r)
                .map(|_| {
                    let v = crate::rng::normal_vec(&mut rng, 2);
                    c(v[0], v[1])
                })
                .collect();
            let pair = MeasurementPair::new(m, b);
            let rp = realify_pair(&pair);
            assert!(rp.f.symmetry_defect() == 0.0);

            let ut = crate::rng::normal_vec(&mut rng, 2 * d);
            let u: Vec<Complex64> = (0..d).map(|i| c(ut[i], ut[i + d])).collect();
            let mut img = pair.m.conj_tr_matvec(&u);
            for (a, b) in img.iter_mut().zip(&pair.b) {
                *a += b;
            }
            let direct = cnorm_sqr(&img);
            let quad = rp.eval(&ut);
            assert!((direct - quad).abs() <= 1e-10 * direct.max(1.0), "{direct} vs {quad}");
        }
    }

    #[test]
    fn validation_reports_dimension_problems() {
        let good = real_pair_e1_offset_one();
        let bad = MeasurementPair::from_real(
            &RMat::from_rows(&[vec![1.0], vec![0.0], vec![0.0]]),
            &[0.0],
        );
        let e = Ensemble::new(FieldTag::Real, 2, 1, vec![good, bad]);
        let report = validate_ensemble(&e);
        assert!(!report.is_valid());
        assert_eq!(report.issues, vec!["pair 2 has d=3, ensemble d=2".to_string()]);
    }

    #[test]
    fn validation_requires_pairs() {
        let e = Ensemble::new(FieldTag::Real, 2, 1, Vec::new());
        let report = validate_ensemble(&e);
        assert_eq!(report.issues, vec!["m must be >= 1".to_string()]);
    }

    #[test]
    fn validation_rejects_complex_data_in_real_field() {
        let mut pair = real_pair_e1_offset_one();
        pair.b[0] = c(1.0, 0.5);
        let e = Ensemble::new(FieldTag::Real, 2, 1, vec![pair]);
        let report = validate_ensemble(&e);
        assert_eq!(
            report.issues,
            vec!["pair 1 has a nonzero imaginary part (field is real)".to_string()]
        );
    }

    #[test]
    fn signal_coords_round_trip() {
        let s = Signal::real(&[1.5, -2.0]);
        assert_eq!(Signal::from_coords(FieldTag::Real, &s.coords()), s);
        let z = Signal::complex(vec![c(1.0, 2.0), c(-0.5, 0.25)]);
        assert_eq!(z.coords(), vec![1.0, -0.5, 2.0, 0.25]);
        assert_eq!(Signal::from_coords(FieldTag::Complex, &z.coords()), z);
    }

    #[test]
    fn validation_checks_block_layout() {
        let pairs = vec![
            MeasurementPair::from_real(&RMat::from_rows(&[vec![1.0], vec![0.0]]), &[0.0]),
            MeasurementPair::from_real(&RMat::from_rows(&[vec![1.0], vec![0.0]]), &[1.0]),
            MeasurementPair::from_real(&RMat::from_rows(&[vec![0.0], vec![1.0]]), &[0.0]),
            MeasurementPair::from_real(&RMat::from_rows(&[vec![0.0], vec![1.0]]), &[1.0]),
        ];
        let zero = vec![c(0.0, 0.0)];
        let one = vec![c(1.0, 0.0)];
        let layout = TightLayout {
            blocks: vec![Block { start: 0, len: 1 }, Block { start: 1, len: 1 }],
            offsets: vec![vec![zero.clone(), one.clone()], vec![zero.clone(), one.clone()]],
            epsilon: 0,
        };
        let mut e = Ensemble::new(FieldTag::Real, 2, 1, pairs);
        e.meta = Some(ConstructionMeta::Tight(layout.clone()));
        assert!(validate_ensemble(&e).is_valid());

        let mut broken = layout;
        broken.blocks[1].start = 0;
        e.meta = Some(ConstructionMeta::Tight(broken));
        let report = validate_ensemble(&e);
        assert!(report.issues.iter().any(|s| s.contains("block 2 starts")), "{report}");
    }
}
