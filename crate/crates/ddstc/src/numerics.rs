//! Complex linear algebra and special functions shared by the whole crate.
//!
//! Everything here is sized for this artifact (matrices up to a few tens of
//! rows); no attempt is made at general-purpose performance.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Numerical tolerances used across the crate, collected in one place.
pub mod tol {
    /// Absolute accuracy of [`super::bessel_j0`].
    pub const J0_ABS: f64 = 1e-10;
    /// Relative tolerance for Hermitian symmetry checks.
    pub const HERMITIAN_REL: f64 = 1e-12;
    /// Relative Frobenius tolerance for `U^H U = C^{-1}`.
    pub const CHOLESKY_REL: f64 = 1e-10;
    /// Unitarity tolerance for codewords and combining matrices.
    pub const UNITARY_ABS: f64 = 1e-12;
    /// Minimum pairwise Frobenius distance between distinct codewords.
    pub const CODEWORD_DISTINCT: f64 = 1e-9;
}

/// Zeroth-order Bessel function of the first kind.
///
/// Power series for |x| < 12, Hankel asymptotic expansion beyond; absolute
/// error stays below [`tol::J0_ABS`] for |x| <= 50.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j0: non-finite input {x}")));
    }
    let x = x.abs();
    if x < 12.0 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0u32;
        loop {
            k += 1;
            term *= -q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) || k > 200 {
                break;
            }
        }
        Ok(sum)
    } else {
        // Hankel coefficients c_m = ((2m-1)!!)^2 / (m! 8^m).
        let mut c = [0.0f64; 40];
        c[0] = 1.0;
        for m in 1..40 {
            let tm = (2 * m - 1) as f64;
            c[m] = c[m - 1] * tm * tm / (m as f64 * 8.0);
        }
        let mut p = 0.0;
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let t = neg_pow(k) * c[2 * k] / x.powi(2 * k as i32);
            if t.abs() > prev {
                break;
            }
            prev = t.abs();
            p += t;
        }
        let mut q = 0.0;
        prev = f64::INFINITY;
        for k in 0..19 {
            let t = neg_pow(k) * c[2 * k + 1] / x.powi(2 * k as i32 + 1);
            if t.abs() > prev {
                break;
            }
            prev = t.abs();
            q += t;
        }
        let chi = x - std::f64::consts::FRAC_PI_4;
        // Note the + sign: the odd Hankel coefficients carry (-1)^(2k+1).
        Ok((2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() + q * chi.sin()))
    }
}

fn neg_pow(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Length-2 complex vector, the per-block signal unit for R = 2 networks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2(pub [Complex64; 2]);

impl Vec2 {
    pub fn zero() -> Self {
        Vec2([ZERO; 2])
    }

    pub fn norm_sq(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn conj(&self) -> Self {
        Vec2([self.0[0].conj(), self.0[1].conj()])
    }

    pub fn add(&self, o: &Vec2) -> Self {
        Vec2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }

    pub fn sub(&self, o: &Vec2) -> Self {
        Vec2([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Vec2([self.0[0] * s, self.0[1] * s])
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Vec2([self.0[0] * s, self.0[1] * s])
    }

    /// Inner product `self^H other`.
    pub fn dot_h(&self, o: &Vec2) -> Complex64 {
        self.0[0].conj() * o.0[0] + self.0[1].conj() * o.0[1]
    }
}

/// 2x2 complex matrix, row-major. Codewords, combining matrices and the
/// accumulated space-time matrices all live here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [Complex64; 4]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([ONE, ZERO, ZERO, ONE])
    }

    pub fn zero() -> Self {
        Mat2([ZERO; 4])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        let a = &self.0;
        Vec2([a[0] * v.0[0] + a[1] * v.0[1], a[2] * v.0[0] + a[3] * v.0[1]])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()])
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        Mat2([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2([
            self.0[0] - o.0[0],
            self.0[1] - o.0[1],
            self.0[2] - o.0[2],
            self.0[3] - o.0[3],
        ])
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint().mul(self).sub(&Mat2::identity()).frobenius() <= tol
            && self.mul(&self.adjoint()).sub(&Mat2::identity()).frobenius() <= tol
    }
}

/// Dense complex matrix, row-major. Used by the exact-covariance oracle and
/// by tests; not on the per-block hot path.
#[derive(Clone, Debug)]
pub struct ComplexMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ONE);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, o: &ComplexMat) -> ComplexMat {
        assert_eq!(self.cols, o.rows);
        let mut out = ComplexMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..o.cols {
                    let v = out.get(i, j) + a * o.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> ComplexMat {
        let mut out = ComplexMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self
            .data
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// In-place lower Cholesky factor of a Hermitian positive-definite matrix.
/// Returns the factor `L` (with `A = L L^H`) and `log det A`.
pub struct CholeskyC {
    l: ComplexMat,
    log_det: f64,
}

impl CholeskyC {
    pub fn factor(a: &ComplexMat) -> Result<CholeskyC> {
        let n = a.rows;
        if a.cols != n {
            return Err(Error::Domain("cholesky: matrix not square".into()));
        }
        let mut l = ComplexMat::zeros(n, n);
        let mut log_det = 0.0;
        for j in 0..n {
            let mut d = a.get(j, j).re;
            for k in 0..j {
                d -= l.get(j, k).norm_sqr();
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let dj = d.sqrt();
            l.set(j, j, Complex64::new(dj, 0.0));
            log_det += d.ln();
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, s / dj);
            }
        }
        Ok(CholeskyC { l, log_det })
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.l.rows;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lk = self.l.get(i, k);
                y[i] = y[i] - lk * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let lk = self.l.get(k, i).conj();
                y[i] = y[i] - lk * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        y
    }
}

/// Real symmetric Toeplitz matrix given by its first row.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianToeplitz {
    lags: Vec<f64>,
}

/// Builds a symmetric Toeplitz matrix whose (i, j) entry is `lags[|i-j|]`.
pub fn toeplitz_from_lags(lags: &[f64]) -> Result<HermitianToeplitz> {
    if lags.is_empty() {
        return Err(Error::Domain("toeplitz_from_lags: empty lag sequence".into()));
    }
    if !(lags[0] > 0.0) {
        return Err(Error::Domain(format!(
            "toeplitz_from_lags: lag 0 must be positive, got {}",
            lags[0]
        )));
    }
    Ok(HermitianToeplitz {
        lags: lags.to_vec(),
    })
}

impl HermitianToeplitz {
    pub fn dim(&self) -> usize {
        self.lags.len()
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lags[i.abs_diff(j)]
    }

    /// Dense row-major expansion.
    pub fn expand(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.get(i, j);
            }
        }
        out
    }
}

/// Real upper-triangular matrix, dense row-major storage.
#[derive(Clone, Debug)]
pub struct UpperTriangular {
    n: usize,
    data: Vec<f64>,
}

impl UpperTriangular {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Lower Cholesky factor `L` (with `A = L L^T`) of a dense real SPD matrix.
pub fn cholesky_lower_dense(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let dj = d.sqrt();
        l[j * n + j] = dj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / dj;
        }
    }
    Ok(l)
}

/// Upper-triangular `U` with `U^T U = C^{-1}` and positive diagonal.
///
/// `C` itself is factored (via its index-reversed lower Cholesky) and the
/// triangular factor inverted; the ill-conditioned inverse of `C` is never
/// formed.
pub fn cholesky_upper_of_inverse(c: &HermitianToeplitz) -> Result<UpperTriangular> {
    let n = c.dim();
    // Flip rows and columns: J C J = Lt Lt^T, then W = J Lt J is upper
    // triangular with C = W W^T, and U = W^{-1}.
    let mut flipped = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            flipped[i * n + j] = c.get(n - 1 - i, n - 1 - j);
        }
    }
    let lt = cholesky_lower_dense(n, &flipped).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot } => Error::NotPositiveDefinite {
            pivot: n - 1 - pivot,
        },
        other => other,
    })?;
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = lt[(n - 1 - i) * n + (n - 1 - j)];
        }
    }
    // Invert upper triangular W by back substitution, column by column.
    let mut u = vec![0.0; n * n];
    for col in 0..n {
        for i in (0..=col).rev() {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in (i + 1)..=col {
                s -= w[i * n + k] * u[k * n + col];
            }
            u[i * n + col] = s / w[i * n + i];
        }
    }
    Ok(UpperTriangular { n, data: u })
}
