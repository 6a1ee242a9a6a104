//! Small dense complex matrix kernel shared by every other module.
//!
//! Everything in here targets square matrices of side at most 8 (plus one
//! dedicated symmetric tridiagonal path used by the 1D eigensolver), so the
//! implementations favour robustness and zero external dependencies over
//! asymptotic cleverness.

mod eig;
mod expm;
mod tridiag;

pub use eig::{eig_small, EigenDecomposition, EigenPair};
pub use expm::mat_exp;
pub use tridiag::{tridiag_eigen_lowest, TridiagEigen};

use num_complex::Complex64;
use thiserror::Error;

/// Largest square size the dense eigen path supports.
pub const MAX_EIG_SIZE: usize = 8;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entry at ({row},{col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("size {0} outside supported range 2..={MAX_EIG_SIZE}")]
    UnsupportedSize(usize),
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("eigenvalue iteration failed to converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },
    #[error("degenerate spectrum: |E_i - E_j| = {gap:.3e} below 1e-10")]
    Degenerate { gap: f64 },
    #[error("invalid time interval: t1 = {t1} < t0 = {t0}")]
    Interval { t0: f64, t1: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Matrix::from_rows(&complex)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn check_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data: (0..self.cols * self.rows)
                .map(|k| self[(k % self.rows, k / self.rows)])
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Matrix {
        let mut t = self.transpose();
        for z in &mut t.data {
            *z = z.conj();
        }
        t
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max absolute column sum), used to pick the exp scaling.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// max |A - A^dagger| entry, the Hermitian defect.
    pub fn hermitian_defect(&self) -> f64 {
        let adj = self.adjoint();
        self.sub(&adj).max_abs()
    }

    /// Hermitian within 1e-12 relative to the largest entry.
    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermitian_defect() <= 1e-12 * self.max_abs().max(1.0)
    }

    pub fn scale(&self, s: Complex64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Kronecker product, row-major block layout.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] =
                            self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Solve A x = b by LU with partial pivoting. A is consumed as a copy.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.check_square()?;
        assert_eq!(b.len(), n);
        let mut lu = self.clone();
        let mut x: Vec<Complex64> = b.to_vec();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (pivot, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if pmag <= 1e-300 * scale {
                return Err(LinalgError::Singular);
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
                x.swap(k, pivot);
            }
            for i in k + 1..n {
                let factor = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
                let sub = factor * x[k];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.check_square()?;
        let mut out = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e)?;
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    pub fn determinant(&self) -> Result<Complex64> {
        let n = self.check_square()?;
        let mut lu = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let (pivot, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if pmag == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
                det = -det;
            }
            det *= lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / lu[(k, k)];
                for j in k + 1..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(det)
    }

    /// Real part of every entry; largest imaginary magnitude is reported back.
    pub fn real_parts(&self) -> (Vec<Vec<f64>>, f64) {
        let mut max_im: f64 = 0.0;
        let rows = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        max_im = max_im.max(self[(i, j)].im.abs());
                        self[(i, j)].re
                    })
                    .collect()
            })
            .collect();
        (rows, max_im)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Time-ordered propagator over [t0, t1] as a product of per-step midpoint
/// exponentials exp(S(t_mid) dt). For a commuting family this reproduces
/// exp(integral of S) to O(dt^2) per step.
pub fn propagate(
    generator: impl Fn(f64) -> Matrix,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Matrix> {
    if t1 < t0 {
        return Err(LinalgError::Interval { t0, t1 });
    }
    assert!(steps >= 1, "steps must be >= 1");
    let dt = (t1 - t0) / steps as f64;
    let n = generator(t0).check_square()?;
    let mut u = Matrix::identity(n);
    for k in 0..steps {
        let t_mid = t0 + (k as f64 + 0.5) * dt;
        let s = generator(t_mid);
        s.check_finite()?;
        let step = mat_exp(&s.scale(Complex64::new(dt, 0.0)))?;
        u = step.mul(&u);
    }
    Ok(u)
}
