//! Small dense matrices and the two factorizations the rest of the crate
//! rests on: a cyclic Jacobi eigensolver for real symmetric matrices and a
//! partially pivoted LU solver.
//!
//! Every matrix in this crate is desk-scale (at most `2(d+1)` on a side for
//! signal dimension `d`), so the implementations favor reproducibility and
//! transparency over asymptotics: plain row-major storage, no blocking, and
//! explicit tolerances.

use num_complex::Complex64;
use thiserror::Error;

/// Jacobi sweeps stop once the off-diagonal Frobenius mass drops below this
/// fraction of the input's Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-13;

/// Hard cap on Jacobi sweeps. Convergence is ordinarily quadratic; hitting
/// the cap is reported as an error rather than returning a stale result.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// A pivot whose magnitude falls below this fraction of the matrix Frobenius
/// norm is treated as a singularity.
pub const LU_PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("eigensolver did not converge: off-diagonal mass {off:.3e} after {sweeps} sweeps")]
    NoConvergence { off: f64, sweeps: usize },
    #[error("matrix is singular to working precision ({rank} of {n} pivots usable)")]
    Singular { rank: usize, n: usize },
    #[error("matrix must be symmetric (asymmetry {asym:.3e})")]
    NotSymmetric { asym: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Dense real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from explicit rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Self { rows: nrows, cols: ncols, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec shape");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T x` without forming the transpose.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "tr_matvec shape");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &RMat) -> RMat {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = RMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> RMat {
        let mut out = RMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// `self += scale * w w^T`; `w` must match the (square) dimension.
    pub fn add_scaled_outer(&mut self, w: &[f64], scale: f64) {
        assert_eq!(self.rows, self.cols, "outer update needs square");
        assert_eq!(w.len(), self.rows, "outer update shape");
        for i in 0..self.rows {
            let wi = scale * w[i];
            for j in 0..self.cols {
                self[(i, j)] += wi * w[j];
            }
        }
    }

    pub fn add_diagonal(&mut self, mu: f64) {
        assert_eq!(self.rows, self.cols, "diagonal update needs square");
        for i in 0..self.rows {
            self[(i, i)] += mu;
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Largest entrywise deviation from symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "symmetry defect needs square");
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for RMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense complex matrix, row-major. Real-field data lives here too, with
/// imaginary parts pinned to zero, so every algorithm has one storage type.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Self { rows: nrows, cols: ncols, data: rows.concat() }
    }

    /// Real matrix embedded with zero imaginary parts.
    pub fn from_real(m: &RMat) -> Self {
        let mut out = Self::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out[(i, j)] = Complex64::new(m[(i, j)], 0.0);
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "matvec shape");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^* x` (conjugate transpose times vector) without forming `A^*`.
    pub fn conj_tr_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows, "conj_tr_matvec shape");
        let mut out = vec![Complex64::ZERO; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> CMat {
        let mut out = self.clone();
        for a in &mut out.data {
            *a *= s;
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub shape");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.im.abs()))
    }

    /// Largest entrywise deviation from `A = A^*`.
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "hermitian defect needs square");
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Real `2n x 2n` image `[[X, -Y], [Y, X]]` of `A = X + iY`, acting on
    /// stacked `[Re; Im]` vectors exactly as `A` acts on complex vectors.
    /// For Hermitian `A` the image is symmetric with each eigenvalue doubled.
    pub fn realify(&self) -> RMat {
        let (n, m) = (self.rows, self.cols);
        let mut out = RMat::zeros(2 * n, 2 * m);
        for i in 0..n {
            for j in 0..m {
                let a = self[(i, j)];
                out[(i, j)] = a.re;
                out[(i, j + m)] = -a.im;
                out[(i + n, j)] = a.im;
                out[(i + n, j + m)] = a.re;
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugating inner product `sum conj(a_i) b_i`.
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Stacks a complex vector as `[Re; Im]`.
pub fn realify_vec(a: &[Complex64]) -> Vec<f64> {
    a.iter().map(|x| x.re).chain(a.iter().map(|x| x.im)).collect()
}

/// Inverse of [`realify_vec`]; the input length must be even.
pub fn complexify_vec(a: &[f64]) -> Vec<Complex64> {
    assert!(a.len() % 2 == 0, "realified vector must have even length");
    let n = a.len() / 2;
    (0..n).map(|i| Complex64::new(a[i], a[i + n])).collect()
}

/// Eigen-decomposition of a real symmetric matrix. `values` ascend and
/// `vectors.col(k)` is the unit eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: RMat,
}

impl Eigen {
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.vectors.col(k)
    }
}

fn off_diag_norm(a: &RMat) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += 2.0 * a[(p, q)] * a[(p, q)];
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi eigensolver for real symmetric matrices.
///
/// Sweeps rotate every off-diagonal pair in row order until the off-diagonal
/// Frobenius mass falls below [`JACOBI_TOL`] times the input norm, erroring
/// after [`JACOBI_MAX_SWEEPS`]. Asymmetric input is rejected rather than
/// silently symmetrized.
pub fn jacobi_eigen(a: &RMat) -> Result<Eigen, LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::Shape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let scale = a.frobenius();
    let asym = if n == 0 { 0.0 } else { a.symmetry_defect() };
    if asym > 1e-12 * scale.max(1.0) {
        return Err(LinalgError::NotSymmetric { asym });
    }

    let mut a = a.clone();
    let mut v = RMat::identity(n);
    let tol = JACOBI_TOL * scale;
    let mut converged = false;
    let mut off = off_diag_norm(&a);
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let diff = a[(q, q)] - a[(p, p)];
                // tan of the annihilating rotation; the first branch is the
                // small-angle limit where theta = diff / (2 apq) would
                // overflow.
                let t = if apq.abs() * 1e15 < diff.abs() {
                    apq / diff
                } else {
                    let theta = diff / (2.0 * apq);
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(p, i)] = a[(i, p)];
                    a[(i, q)] = s * aip + c * aiq;
                    a[(q, i)] = a[(i, q)];
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        off = off_diag_norm(&a);
    }
    if !converged && off > tol {
        return Err(LinalgError::NoConvergence { off, sweeps: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = RMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, k)] = v[(row, i)];
        }
    }
    Ok(Eigen { values, vectors })
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot below [`LU_PIVOT_TOL`] times the Frobenius norm of `A` aborts
/// with [`LinalgError::Singular`] carrying the number of usable pivots.
pub fn lu_solve(a: &RMat, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::Shape(format!(
            "solver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if b.len() != n {
        return Err(LinalgError::Shape(format!(
            "right-hand side has length {}, matrix is {n}x{n}",
            b.len()
        )));
    }
    let mut a = a.clone();
    let mut b = b.to_vec();
    let floor = LU_PIVOT_TOL * a.frobenius().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .expect("nonempty pivot range");
        if a[(pivot_row, k)].abs() <= floor {
            return Err(LinalgError::Singular { rank: k, n });
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = tmp;
            }
            b.swap(k, pivot_row);
        }
        for i in (k + 1)..n {
            let factor = a[(i, k)] / a[(k, k)];
            if factor == 0.0 {
                continue;
            }
            a[(i, k)] = 0.0;
            for j in (k + 1)..n {
                a[(i, j)] -= factor * a[(k, j)];
            }
            b[i] -= factor * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in (k + 1)..n {
            acc -= a[(k, j)] * b[j];
        }
        b[k] = acc / a[(k, k)];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn jacobi_2x2_known_spectrum() {
        let a = RMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let eig = jacobi_eigen(&a).unwrap();
        assert_close(eig.values[0], 1.0, 1e-14);
        assert_close(eig.values[1], 3.0, 1e-14);
        let v0 = eig.eigenvector(0);
        // (1, -1)/sqrt(2) up to sign.
        assert_close(v0[0].abs(), std::f64::consts::FRAC_1_SQRT_2, 1e-14);
        assert_close(v0[0] + v0[1], 0.0, 1e-14);
    }

    #[test]
    fn jacobi_3x3_known_spectrum() {
        // Block diagonal: eigenvalues of [[3,4],[4,9]] are 1 and 11.
        let a = RMat::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 3.0, 4.0],
            vec![0.0, 4.0, 9.0],
        ]);
        let eig = jacobi_eigen(&a).unwrap();
        assert_close(eig.values[0], 1.0, 1e-13);
        assert_close(eig.values[1], 2.0, 1e-13);
        assert_close(eig.values[2], 11.0, 1e-13);
    }

    #[test]
    fn jacobi_random_residuals_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [1usize, 2, 3, 5, 8, 13, 26] {
            let mut a = RMat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let x: f64 = rng.random_range(-1.0..1.0);
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                }
            }
            let eig = jacobi_eigen(&a).unwrap();
            let scale = a.frobenius().max(1.0);
            for k in 0..n {
                let v = eig.eigenvector(k);
                let av = a.matvec(&v);
                for i in 0..n {
                    assert_close(av[i], eig.values[k] * v[i], 1e-11 * scale);
                }
                assert_close(norm(&v), 1.0, 1e-12);
                for l in (k + 1)..n {
                    assert_close(dot(&v, &eig.eigenvector(l)), 0.0, 1e-11);
                }
            }
            for k in 1..n {
                assert!(eig.values[k] >= eig.values[k - 1]);
            }
        }
    }

    #[test]
    fn jacobi_zero_matrix() {
        let eig = jacobi_eigen(&RMat::zeros(4, 4)).unwrap();
        assert_eq!(eig.values, vec![0.0; 4]);
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let a = RMat::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(jacobi_eigen(&a), Err(LinalgError::NotSymmetric { .. })));
    }

    #[test]
    fn realified_hermitian_doubles_spectrum() {
        // A = [[2, i], [-i, 3]] has eigenvalues (5 +- sqrt(5)) / 2.
        let a = CMat::from_rows(&[
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)],
            vec![Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.0)],
        ]);
        let eig = jacobi_eigen(&a.realify()).unwrap();
        let lo = (5.0 - 5.0f64.sqrt()) / 2.0;
        let hi = (5.0 + 5.0f64.sqrt()) / 2.0;
        for (got, want) in eig.values.iter().zip([lo, lo, hi, hi]) {
            assert_close(*got, want, 1e-12);
        }
    }

    #[test]
    fn lu_solves_known_system() {
        let a = RMat::from_rows(&[
            vec![2.0, 1.0, -1.0],
            vec![-3.0, -1.0, 2.0],
            vec![-2.0, 1.0, 2.0],
        ]);
        let x = lu_solve(&a, &[8.0, -11.0, -3.0]).unwrap();
        // Classic system with solution (2, 3, -1).
        assert_close(x[0], 2.0, 1e-12);
        assert_close(x[1], 3.0, 1e-12);
        assert_close(x[2], -1.0, 1e-12);
    }

    #[test]
    fn lu_random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for n in [1usize, 2, 4, 9, 25] {
            let mut a = RMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = rng.random_range(-1.0..1.0);
                }
                a[(i, i)] += 3.0; // keep comfortably nonsingular
            }
            let x_true: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = a.matvec(&x_true);
            let x = lu_solve(&a, &b).unwrap();
            for i in 0..n {
                assert_close(x[i], x_true[i], 1e-10);
            }
        }
    }

    #[test]
    fn lu_reports_rank_on_singular_input() {
        let a = RMat::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![1.0, 0.0, 1.0],
        ]);
        match lu_solve(&a, &[1.0, 2.0, 3.0]) {
            Err(LinalgError::Singular { rank, n }) => {
                assert_eq!(n, 3);
                assert!(rank < 3);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn realify_vec_round_trip() {
        let v = vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 3.0)];
        assert_eq!(complexify_vec(&realify_vec(&v)), v);
    }
}
