//! Signal recovery.
//!
//! For block ensembles recovery is exact and linear. On one block with
//! offsets `b_1, ..., b_K` the measurements are `y_k = ||z + b_k||^2`, which
//! expands to the linear system
//!
//! ```text
//! [ 2 Re(b_k)^T  2 Im(b_k)^T  1 ] (Re z, Im z, s)^T = y_k - ||b_k||^2
//! ```
//!
//! with the substitution `s = ||z||^2` (the imaginary columns drop out over
//! the reals). Solving it treats `s` as a free unknown; `|s - ||z||^2|` then
//! certifies whether the input was realizable at all, since a true
//! measurement vector reproduces `s` exactly and a tampered one does not.
//!
//! Ensembles without block structure go through damped least squares on
//! `sum_j (||M_j^* x + b_j||^2 - y_j)^2` with seeded multistart; the restart
//! schedule is deterministic and the best restart is selected by
//! `(success, residual, restart index)`, so reports do not depend on
//! evaluation order.

use num_complex::Complex64;
use thiserror::Error;

use crate::ensemble::{Ensemble, FieldTag, Signal};
use crate::forward::{coord_dim, measure, w_vectors, ForwardError, MeasurementVector};
use crate::linalg::{cnorm_sqr, dot, lu_solve, norm, LinalgError, RMat};
use crate::rng;

/// A block solution is consistent when the free unknown `s` reproduces
/// `||z||^2` to this tolerance (relative to `1 + |s|`).
pub const BLOCK_CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("block solve needs {expected} offsets, got {got}")]
    OffsetCount { expected: usize, got: usize },
    #[error("offset vectors must share one width (offset {index} has length {got}, expected {width})")]
    OffsetWidth { index: usize, got: usize, width: usize },
    #[error("measurement vector has length {got}, expected {expected}")]
    MeasurementLength { expected: usize, got: usize },
    #[error("recovery system is singular ({rank} of {n} pivots usable)")]
    SingularSystem { rank: usize, n: usize },
    #[error("block {block}: {source}")]
    Block { block: usize, source: Box<RecoveryError> },
    #[error("block {block} is inconsistent: residual {residual:.3e} exceeds {tol:.3e}, measurements are not realizable")]
    Inconsistent { block: usize, residual: f64, tol: f64 },
    #[error("ensemble was not built by the tight construction (meta kind: {kind})")]
    NotTight { kind: &'static str },
    #[error("restarts must be >= 1")]
    NoRestarts,
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

/// The square system matrix of one block solve: row `k` is
/// `[2 Re(b_k)^T, 1]` (real) or `[2 Re(b_k)^T, 2 Im(b_k)^T, 1]` (complex).
/// The offsets span exactly when this matrix is nonsingular.
pub(crate) fn recovery_matrix(field: FieldTag, offsets: &[Vec<Complex64>]) -> RMat {
    let width = offsets.first().map_or(0, Vec::len);
    let cols = match field {
        FieldTag::Real => width + 1,
        FieldTag::Complex => 2 * width + 1,
    };
    let mut mat = RMat::zeros(offsets.len(), cols);
    for (k, b) in offsets.iter().enumerate() {
        for (i, z) in b.iter().enumerate() {
            mat[(k, i)] = 2.0 * z.re;
            if field == FieldTag::Complex {
                mat[(k, width + i)] = 2.0 * z.im;
            }
        }
        mat[(k, cols - 1)] = 1.0;
    }
    mat
}

/// Solution of one block solve.
#[derive(Clone, Debug)]
pub struct BlockSolution {
    /// Recovered block coordinates.
    pub z: Vec<Complex64>,
    /// The free unknown standing in for `||z||^2`.
    pub s: f64,
    /// `|s - ||z||^2|`, the realizability certificate of this block.
    pub residual: f64,
}

impl BlockSolution {
    pub fn is_consistent(&self) -> bool {
        self.residual <= BLOCK_CONSISTENCY_TOL * (1.0 + self.s.abs())
    }
}

/// Recovers one block from `y_k = ||z + b_k||^2`. Needs `width + 1` (real)
/// or `2 width + 1` (complex) offsets whose recovery matrix is nonsingular.
pub fn block_recover(
    field: FieldTag,
    offsets: &[Vec<Complex64>],
    y_block: &[f64],
) -> Result<BlockSolution, RecoveryError> {
    let width = offsets.first().map_or(0, Vec::len);
    let expected = match field {
        FieldTag::Real => width + 1,
        FieldTag::Complex => 2 * width + 1,
    };
    if offsets.len() != expected {
        return Err(RecoveryError::OffsetCount { expected, got: offsets.len() });
    }
    for (index, b) in offsets.iter().enumerate() {
        if b.len() != width {
            return Err(RecoveryError::OffsetWidth { index: index + 1, got: b.len(), width });
        }
    }
    if y_block.len() != expected {
        return Err(RecoveryError::MeasurementLength { expected, got: y_block.len() });
    }

    let mat = recovery_matrix(field, offsets);
    let rhs: Vec<f64> =
        y_block.iter().zip(offsets).map(|(y, b)| y - cnorm_sqr(b)).collect();
    let sol = lu_solve(&mat, &rhs).map_err(|err| match err {
        LinalgError::Singular { rank, n } => RecoveryError::SingularSystem { rank, n },
        other => panic!("recovery matrix solve: {other}"),
    })?;

    let z: Vec<Complex64> = match field {
        FieldTag::Real => sol[..width].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        FieldTag::Complex => {
            (0..width).map(|i| Complex64::new(sol[i], sol[width + i])).collect()
        }
    };
    let s = sol[expected - 1];
    let residual = (s - cnorm_sqr(&z)).abs();
    Ok(BlockSolution { z, s, residual })
}

/// Exact recovery for ensembles built by the tight construction: solve each
/// block, check its realizability certificate, and assemble the signal.
pub fn tight_recover(e: &Ensemble, y: &MeasurementVector) -> Result<Signal, RecoveryError> {
    let layout = match &e.meta {
        Some(meta) => match meta.tight_layout() {
            Some(layout) => layout,
            None => return Err(RecoveryError::NotTight { kind: meta.kind_name() }),
        },
        None => return Err(RecoveryError::NotTight { kind: "none" }),
    };
    if y.len() != e.m() {
        return Err(RecoveryError::MeasurementLength { expected: e.m(), got: y.len() });
    }

    let mut entries = vec![Complex64::ZERO; e.d];
    let mut taken = 0usize;
    for (idx, (block, family)) in layout.blocks.iter().zip(&layout.offsets).enumerate() {
        let t = idx + 1;
        let y_block = &y.values()[taken..taken + family.len()];
        taken += family.len();
        let sol = block_recover(e.field, family, y_block)
            .map_err(|source| RecoveryError::Block { block: t, source: Box::new(source) })?;
        if !sol.is_consistent() {
            return Err(RecoveryError::Inconsistent {
                block: t,
                residual: sol.residual,
                tol: BLOCK_CONSISTENCY_TOL * (1.0 + sol.s.abs()),
            });
        }
        for (i, z) in block.indices().zip(&sol.z) {
            entries[i] = *z;
        }
    }
    Ok(match e.field {
        FieldTag::Real => Signal::real(&entries.iter().map(|z| z.re).collect::<Vec<_>>()),
        FieldTag::Complex => Signal::complex(entries),
    })
}

/// Options for [`lsq_recover`]. `tol` is relative: a restart succeeds when
/// its final residual is at most `tol * (1 + ||y||)`.
#[derive(Clone, Copy, Debug)]
pub struct LsqOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self { restarts: 20, max_iter: 200, tol: 1e-8, seed: 0 }
    }
}

/// Outcome of [`lsq_recover`]: the best restart's signal and residual.
#[derive(Clone, Debug)]
pub struct RecoveryReport {
    pub signal: Signal,
    /// `||measure(E, signal) - y||_2`.
    pub residual: f64,
    /// Whether `residual <= tol * (1 + ||y||)`.
    pub success: bool,
    pub restarts: usize,
    /// Index of the selected restart (deterministic given the seed).
    pub best_restart: usize,
    /// Damped least squares iterations the selected restart used.
    pub iterations: usize,
}

/// One damped least squares descent on `sum_j (y_j(x) - y_j)^2` from `coords`.
/// Returns the final coordinates, iteration count, and residual 2-norm.
fn lm_descent(
    e: &Ensemble,
    target: &[f64],
    mut coords: Vec<f64>,
    max_iter: usize,
    tol_abs: f64,
) -> (Vec<f64>, usize, f64) {
    let n = coords.len();
    let eval = |coords: &[f64]| -> (Vec<f64>, f64) {
        let y = measure(e, &Signal::from_coords(e.field, coords))
            .expect("coords generated with matching field and dimension");
        let res: Vec<f64> = y.values().iter().zip(target).map(|(a, b)| a - b).collect();
        let cost = dot(&res, &res);
        (res, cost)
    };
    let normal_system = |coords: &[f64], res: &[f64]| -> (RMat, Vec<f64>) {
        let ws = w_vectors(e, coords);
        let mut nmat = RMat::zeros(n, n);
        let mut g = vec![0.0; n];
        for (w, r) in ws.iter().zip(res) {
            nmat.add_scaled_outer(w, 4.0);
            for (gi, wi) in g.iter_mut().zip(w) {
                *gi += 2.0 * r * wi;
            }
        }
        (nmat, g)
    };

    let (mut res, mut cost) = eval(&coords);
    let (mut nmat, mut g) = normal_system(&coords, &res);
    let trace: f64 = (0..n).map(|i| nmat[(i, i)]).sum();
    let mut mu = (1e-3 * trace / n as f64).max(1e-12);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        if cost.sqrt() <= tol_abs {
            break;
        }
        let mut damped = nmat.clone();
        damped.add_diagonal(mu);
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let step = match lu_solve(&damped, &rhs) {
            Ok(step) => step,
            Err(_) => {
                mu *= 10.0;
                continue;
            }
        };
        let trial: Vec<f64> = coords.iter().zip(&step).map(|(c, s)| c + s).collect();
        let (trial_res, trial_cost) = eval(&trial);
        if trial_cost < cost {
            coords = trial;
            res = trial_res;
            cost = trial_cost;
            mu = (mu / 10.0).max(1e-300);
            let stalled = norm(&step) <= 1e-15 * (1.0 + norm(&coords));
            (nmat, g) = normal_system(&coords, &res);
            if stalled {
                break;
            }
        } else {
            mu *= 10.0;
            if mu > 1e30 {
                break;
            }
        }
    }
    (coords, iterations, cost.sqrt())
}

/// Least squares recovery with seeded Gaussian multistart. Restart `i` draws
/// its initial point from the stream seeded with `mix(seed, i, 0)`.
pub fn lsq_recover(
    e: &Ensemble,
    y: &MeasurementVector,
    opts: &LsqOptions,
) -> Result<RecoveryReport, RecoveryError> {
    if opts.restarts < 1 {
        return Err(RecoveryError::NoRestarts);
    }
    if y.len() != e.m() {
        return Err(RecoveryError::MeasurementLength { expected: e.m(), got: y.len() });
    }
    let n = coord_dim(e);
    let tol_abs = opts.tol * (1.0 + y.norm());

    let mut best: Option<(bool, f64, usize, Vec<f64>, usize)> = None;
    for restart in 0..opts.restarts {
        let mut stream = rng::stream(rng::mix(opts.seed, restart as u64, 0));
        let init = rng::normal_vec(&mut stream, n);
        let (coords, iterations, residual) = lm_descent(e, y.values(), init, opts.max_iter, tol_abs);
        let success = residual <= tol_abs;
        let better = match &best {
            None => true,
            Some((best_success, best_residual, _, _, _)) => {
                (success && !best_success) || (success == *best_success && residual < *best_residual)
            }
        };
        if better {
            best = Some((success, residual, restart, coords, iterations));
        }
    }
    let (success, residual, best_restart, coords, iterations) =
        best.expect("at least one restart ran");
    Ok(RecoveryReport {
        signal: Signal::from_coords(e.field, &coords),
        residual,
        success,
        restarts: opts.restarts,
        best_restart,
        iterations,
    })
}
