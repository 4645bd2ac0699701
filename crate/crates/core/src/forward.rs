//! Evaluating an ensemble and its first-order structure.
//!
//! The forward map sends `x` to `(||M_j^* x + b_j||^2)_j`. Everything
//! first-order about it is carried by the vectors
//! `w_j(u) = M_j (M_j^* u + b_j)` in the real coordinates of the field
//! (length `d` over the reals, stacked `[Re; Im]` of length `2d` over the
//! complex numbers):
//!
//! * the Jacobian column for measurement `j` at `x` is `2 w_j(x)`;
//! * differences polarize: with midpoint `u = (x + y) / 2` and half
//!   difference `v = (x - y) / 2`, measurement `j` differs by
//!   `4 <w_j(u), v>`;
//! * the margin of a base point `u` is the smallest eigenvalue of
//!   `G(u) = sum_j w_j w_j^T`, and its eigenvector is the direction in which
//!   the ensemble separates pairs through `u` most weakly. A zero margin is
//!   exactly a collision direction.

use num_complex::Complex64;
use thiserror::Error;

use crate::ensemble::{Ensemble, FieldTag, MeasurementPair, Signal};
use crate::linalg::{cnorm_sqr, dot, jacobi_eigen, realify_vec, LinalgError, RMat};

#[derive(Debug, Error)]
pub enum ForwardError {
    #[error("field mismatch: ensemble is {ensemble}, signal is {signal}")]
    FieldMismatch { ensemble: FieldTag, signal: FieldTag },
    #[error("dimension mismatch: ensemble has d={expected}, signal has d={got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("measurement vector entry {index} is {value}, below the -1e-12 floor")]
    NegativeEntry { index: usize, value: f64 },
    #[error("measurement vector entry {index} is not finite")]
    NonFiniteEntry { index: usize },
    #[error("margin eigensolve failed: {0}")]
    Eigen(#[from] LinalgError),
}

/// A vector of squared-norm measurements. Entries are finite and
/// nonnegative up to a `-1e-12` floor for roundoff.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVector {
    values: Vec<f64>,
}

impl MeasurementVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ForwardError> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(ForwardError::NonFiniteEntry { index });
            }
            if value < -1e-12 {
                return Err(ForwardError::NegativeEntry { index, value });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }
}

fn check_signal(e: &Ensemble, x: &Signal) -> Result<(), ForwardError> {
    if e.field != x.field() {
        return Err(ForwardError::FieldMismatch { ensemble: e.field, signal: x.field() });
    }
    if e.d != x.dim() {
        return Err(ForwardError::DimensionMismatch { expected: e.d, got: x.dim() });
    }
    Ok(())
}

/// `M^* x + b` for one pair.
fn affine_image(pair: &MeasurementPair, x: &[Complex64]) -> Vec<Complex64> {
    let mut img = pair.m.conj_tr_matvec(x);
    for (a, b) in img.iter_mut().zip(&pair.b) {
        *a += b;
    }
    img
}

/// Evaluates the forward map: `y_j = ||M_j^* x + b_j||^2`.
pub fn measure(e: &Ensemble, x: &Signal) -> Result<MeasurementVector, ForwardError> {
    check_signal(e, x)?;
    let values = e
        .pairs
        .iter()
        .map(|pair| cnorm_sqr(&affine_image(pair, x.entries())))
        .collect();
    MeasurementVector::new(values)
}

/// The polarized measurement difference for one pair:
/// `||M^* x + b||^2 - ||M^* y + b||^2`, evaluated as `4 Re <M^* u + b, M^* v>`
/// with `u = (x + y) / 2` and `v = (x - y) / 2`. The two sides agree
/// identically; the polarized form is what the collision machinery controls.
pub fn polarization_gap(
    pair: &MeasurementPair,
    x: &Signal,
    y: &Signal,
) -> Result<f64, ForwardError> {
    if x.field() != y.field() {
        return Err(ForwardError::FieldMismatch { ensemble: x.field(), signal: y.field() });
    }
    if x.dim() != y.dim() || x.dim() != pair.d() {
        return Err(ForwardError::DimensionMismatch { expected: pair.d(), got: x.dim() });
    }
    let u: Vec<Complex64> =
        x.entries().iter().zip(y.entries()).map(|(a, b)| (a + b) * 0.5).collect();
    let v: Vec<Complex64> =
        x.entries().iter().zip(y.entries()).map(|(a, b)| (a - b) * 0.5).collect();
    let mid = affine_image(pair, &u);
    let dir = pair.m.conj_tr_matvec(&v);
    Ok(4.0 * crate::linalg::cdot(&mid, &dir).re)
}

/// Number of real coordinates the Jacobian and margin work in.
pub(crate) fn coord_dim(e: &Ensemble) -> usize {
    match e.field {
        FieldTag::Real => e.d,
        FieldTag::Complex => 2 * e.d,
    }
}

/// `w(u) = M (M^* u + b)` in real coordinates; `with_offset = false` drops
/// `b`, giving the action of the realified `M M^*` instead.
pub(crate) fn w_vector(
    pair: &MeasurementPair,
    field: FieldTag,
    coords: &[f64],
    with_offset: bool,
) -> Vec<f64> {
    let u = Signal::from_coords(field, coords);
    let mut img = pair.m.conj_tr_matvec(u.entries());
    if with_offset {
        for (a, b) in img.iter_mut().zip(&pair.b) {
            *a += b;
        }
    }
    let w = pair.m.matvec(&img);
    match field {
        FieldTag::Real => w.iter().map(|z| z.re).collect(),
        FieldTag::Complex => realify_vec(&w),
    }
}

pub(crate) fn w_vectors(e: &Ensemble, coords: &[f64]) -> Vec<Vec<f64>> {
    e.pairs.iter().map(|pair| w_vector(pair, e.field, coords, true)).collect()
}

/// Jacobian of the forward map at `x` in real coordinates: a `n x m` matrix
/// whose column `j` is the gradient `2 w_j(x)` of measurement `j`, with
/// `n = d` (real) or `n = 2d` (complex, stacked `[Re; Im]`).
pub fn jacobian(e: &Ensemble, x: &Signal) -> Result<RMat, ForwardError> {
    check_signal(e, x)?;
    let n = coord_dim(e);
    let coords = x.coords();
    let mut jac = RMat::zeros(n, e.m());
    for (j, pair) in e.pairs.iter().enumerate() {
        let w = w_vector(pair, e.field, &coords, true);
        for i in 0..n {
            jac[(i, j)] = 2.0 * w[i];
        }
    }
    Ok(jac)
}

/// Smallest eigenvalue of `G(u)` with its unit eigenvector.
#[derive(Clone, Debug)]
pub struct MarginResult {
    pub value: f64,
    /// Unit vector in real coordinates (length `d` real, `2d` complex).
    pub direction: Vec<f64>,
}

pub(crate) struct CoordMargin {
    pub value: f64,
    pub direction: Vec<f64>,
    pub lambda_max: f64,
}

pub(crate) fn gram(e: &Ensemble, coords: &[f64]) -> RMat {
    let n = coord_dim(e);
    let mut g = RMat::zeros(n, n);
    for pair in &e.pairs {
        let w = w_vector(pair, e.field, coords, true);
        g.add_scaled_outer(&w, 1.0);
    }
    g
}

pub(crate) fn coord_margin(e: &Ensemble, coords: &[f64]) -> Result<CoordMargin, LinalgError> {
    let g = gram(e, coords);
    let eig = jacobi_eigen(&g)?;
    let n = g.rows();
    Ok(CoordMargin {
        value: eig.values[0],
        direction: eig.eigenvector(0),
        lambda_max: eig.values[n - 1],
    })
}

/// Injectivity margin of a base point: the smallest eigenvalue of
/// `G(u) = sum_j w_j(u) w_j(u)^T` together with its eigenvector. `G` equals
/// `J J^T / 4` for the Jacobian at `u`; a zero margin means measurements
/// cannot distinguish `u + t v` from `u - t v` to first order along the
/// returned direction `v`.
pub fn margin(e: &Ensemble, u: &Signal) -> Result<MarginResult, ForwardError> {
    check_signal(e, u)?;
    let cm = coord_margin(e, &u.coords())?;
    Ok(MarginResult { value: cm.value, direction: cm.direction })
}
