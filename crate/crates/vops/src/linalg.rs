//! Small dense complex-matrix kernel.
//!
//! Everything downstream works on matrices of dimension at most 8 (two-qubit
//! states, Stokes matrices, spin-1 operators), except the phase-space module's
//! private Fock-space helpers. Robustness beats asymptotic speed at these
//! sizes, so the Hermitian eigensolver is a cyclic complex Jacobi iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds an `n x n` matrix from an entry function.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from rows of `(re, im)` pairs; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = self.clone();
        for (o, v) in out.data.iter_mut().zip(other.data.iter()) {
            *o += v;
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = self.clone();
        for (o, v) in out.data.iter_mut().zip(other.data.iter()) {
            *o -= v;
        }
        out
    }

    pub fn scale(&self, k: C64) -> CMat {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= k;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(i, j)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product; the left factor addresses the most significant index.
    pub fn kron(&self, other: &CMat) -> CMat {
        let (a, b) = (self.n, other.n);
        CMat::from_fn(a * b, |i, j| self[(i / b, j / b)] * other[(i % b, j % b)])
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from Hermiticity, `max |m_ij - conj(m_ji)|`.
    pub fn herm_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// (m + m^dag)/2; cheap symmetrization before eigensolves.
    pub fn hermitize(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Which tensor factor of a two-qubit matrix an operation addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Eigendecomposition of a Hermitian matrix (dimension at most 8).
///
/// Returns eigenvalues sorted ascending and the matching orthonormal
/// eigenvectors as matrix columns. Rejects matrices whose Hermiticity
/// deviation exceeds 1e-8.
pub fn eig_hermitian(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.dim() > 8 {
        return Err(Error::Domain(format!(
            "eig_hermitian supports dimension <= 8, got {}",
            m.dim()
        )));
    }
    let dev = m.herm_deviation();
    if dev > 1e-8 {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (max |m - m^dag| entry = {dev:.3e})"
        )));
    }
    Ok(jacobi_hermitian(m))
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices (any dimension).
///
/// Internal entry point without the dimension cap; callers must pass a matrix
/// that is Hermitian up to roundoff (it is symmetrized on entry).
pub(crate) fn jacobi_hermitian(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.dim();
    let mut a = m.hermitize();
    let mut v = CMat::identity(n);
    let scale = a.max_abs().max(1.0);
    let tol = 1e-15 * scale;

    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let abs = apq.norm();
                if abs <= tol * 1e-2 {
                    continue;
                }
                let phase = apq / abs;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Rotation angle from the 2x2 block; the smaller root keeps
                // the iteration stable.
                let tau = (app - aqq) / (2.0 * abs);
                let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U is identity except U[p][p]=c, U[p][q]=-s*phase,
                // U[q][p]=s*conj(phase), U[q][q]=c; apply A <- U^dag A U.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * s * phase.conj();
                    a[(k, q)] = akq * c - akp * s * phase;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * s * phase;
                    a[(q, k)] = aqk * c - apk * s * phase.conj();
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * s * phase.conj();
                    v[(k, q)] = vkq * c - vkp * s * phase;
                }
                // Re-symmetrize the rotated pair against roundoff drift.
                a[(p, q)] = (a[(p, q)] + a[(q, p)].conj()) * 0.5;
                a[(q, p)] = a[(p, q)].conj();
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let sorted_vecs = CMat::from_fn(n, |i, j| v[(i, order[j])]);
    (sorted_vals, sorted_vecs)
}

/// Square root of a positive-semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-1e-10, 0)` are treated as roundoff and clamped to zero;
/// anything more negative is rejected as genuinely non-PSD.
pub fn mat_sqrt_psd(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = eig_hermitian(m)?;
    let mut clamped = Vec::with_capacity(vals.len());
    for &l in &vals {
        if l < -1e-10 {
            return Err(Error::Domain(format!(
                "matrix is not positive semidefinite (eigenvalue {l:.3e})"
            )));
        }
        clamped.push(l.max(0.0).sqrt());
    }
    let n = m.dim();
    let mut out = CMat::zeros(n);
    for k in 0..n {
        let s = clamped[k];
        if s == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = vecs[(i, k)] * s;
            for j in 0..n {
                out[(i, j)] += vik * vecs[(j, k)].conj();
            }
        }
    }
    Ok(out.hermitize())
}

/// Partial transpose of a two-qubit (4x4) matrix over the chosen factor.
///
/// Basis ordering `{|00>, |01>, |10>, |11>}` with index `2*n1 + n2`.
pub fn partial_transpose(rho: &CMat, subsystem: Subsystem) -> Result<CMat> {
    if rho.dim() != 4 {
        return Err(Error::Domain(format!(
            "partial transpose expects a 4x4 matrix, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    let out = CMat::from_fn(4, |i, j| {
        let (i1, i2) = (i / 2, i % 2);
        let (j1, j2) = (j / 2, j % 2);
        match subsystem {
            Subsystem::First => rho[(2 * j1 + i2, 2 * i1 + j2)],
            Subsystem::Second => rho[(2 * i1 + j2, 2 * j1 + i2)],
        }
    });
    Ok(out)
}

/// Determinant of a Hermitian matrix via its eigenvalue product.
pub(crate) fn det_hermitian(m: &CMat) -> f64 {
    let (vals, _) = jacobi_hermitian(m);
    vals.iter().product()
}

/// Validates Hermiticity, unit trace, and positivity within `tol`.
///
/// Returns the worst violation found (largest of Hermiticity deviation,
/// |trace - 1|, and negative-eigenvalue magnitude) on success.
pub fn validate_density(m: &CMat, tol: f64) -> Result<f64> {
    let herm = m.herm_deviation();
    if herm > tol {
        return Err(Error::Domain(format!(
            "not a density matrix: Hermiticity deviation {herm:.3e} exceeds {tol:.1e}"
        )));
    }
    let tr = m.trace();
    let tr_dev = (tr - C64::new(1.0, 0.0)).norm();
    if tr_dev > tol {
        return Err(Error::Domain(format!(
            "not a density matrix: |trace - 1| = {tr_dev:.3e} exceeds {tol:.1e}"
        )));
    }
    let (vals, _) = jacobi_hermitian(&m.hermitize());
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(Error::Domain(format!(
            "not a density matrix: eigenvalue {min:.3e} below -{tol:.1e}"
        )));
    }
    Ok(herm.max(tr_dev).max((-min).max(0.0)))
}
