//! Dense complex linear algebra.
//!
//! Everything in this crate runs on small (at most a few thousand
//! dimensional) dense operators, so the kernel favours exactness and
//! determinism over asymptotic speed. Matrices are stored row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest matrix dimension `kron` will build unless told otherwise (12 qubits).
pub const DEFAULT_DIM_CAP: usize = 1 << 12;

/// Tolerance used for Hermiticity checks on inputs (absolute, max-norm).
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidConfig("matrix entries must be finite".into()));
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = z;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.data[i * self.dim + j]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &ComplexMatrix, s: Complex64) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add_scaled");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(ComplexMatrix { dim: n, data: out })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest entrywise modulus of `A - A†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Largest entrywise modulus of `U†U - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    s += self.data[k * n + i].conj() * self.data[k * n + j];
                }
                if i == j {
                    s -= ONE;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in max_abs_diff");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `A·v` for a plain amplitude slice.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch in mul_vec");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub(crate) fn ensure_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { deviation });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Panics on dimension mismatch; use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, ONE);
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, -ONE);
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Pure state amplitudes in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidConfig("state must have at least one amplitude".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidConfig("state amplitudes must be finite".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    /// `|0…0>` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(1 << n_qubits, 0)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in inner product");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V·diag(λ)·V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    s += v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj();
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// Matrix elements `<E_i|A|E_j>`.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let v = &self.eigenvectors;
        v.adjoint().matmul(&a.matmul(v)?)
    }

    /// Components `<E_n|ψ>` of a state in the eigenbasis.
    pub fn project(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if psi.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: psi.dim(),
            });
        }
        let v = &self.eigenvectors;
        let amps = psi.amplitudes();
        Ok((0..n)
            .map(|k| (0..n).map(|i| v[(i, k)].conj() * amps[i]).sum())
            .collect())
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The matrix is reduced to real symmetric tridiagonal form by complex
/// Householder reflections followed by a diagonal phase gauge, and the
/// tridiagonal problem is solved by implicit QL with Wilkinson-style shifts.
/// Eigenvalues are returned ascending; ties keep the solver's index order.
pub fn hermitian_eigendecompose(a: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    a.ensure_hermitian()?;
    let n = a.dim();
    let (diag, sub, q) = tridiagonalize(a, true);
    let q = q.expect("basis requested");
    let mut z = identity_columns(n);
    let d = tridiagonal_ql(diag, sub, Some(&mut z))?;

    let order = ascending_order(&d);
    let eigenvalues: Vec<f64> = order.iter().map(|&k| d[k]).collect();

    // V = Q·Z, with Z real and stored column-major.
    let mut v = ComplexMatrix::zeros(n);
    for (col_out, &k) in order.iter().enumerate() {
        let zcol = &z[k * n..(k + 1) * n];
        for i in 0..n {
            let qrow = q.row(i);
            let mut s = ZERO;
            for (qv, &zv) in qrow.iter().zip(zcol) {
                s += qv * zv;
            }
            v.data[i * n + col_out] = s;
        }
    }
    Ok(HermitianEigenSystem {
        eigenvalues,
        eigenvectors: v,
    })
}

/// Eigenvalues only (ascending); cheaper than a full decomposition.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    a.ensure_hermitian()?;
    let (diag, sub, _) = tridiagonalize(a, false);
    let mut d = tridiagonal_ql(diag, sub, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn ascending_order(d: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    order
}

fn identity_columns(n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    z
}

/// Reduces `a` to a real tridiagonal matrix `T = B† A B`. Returns the diagonal,
/// the sub-diagonal (length `n`, last entry zero) and optionally `B`.
fn tridiagonalize(a: &ComplexMatrix, want_basis: bool) -> (Vec<f64>, Vec<f64>, Option<ComplexMatrix>) {
    let n = a.dim();
    // Work on the exactly Hermitian part of the input.
    let mut w = a.clone();
    for i in 0..n {
        w.data[i * n + i] = Complex64::new(w.data[i * n + i].re, 0.0);
        for j in (i + 1)..n {
            let h = (w.data[i * n + j] + w.data[j * n + i].conj()) * 0.5;
            w.data[i * n + j] = h;
            w.data[j * n + i] = h.conj();
        }
    }
    let mut q = want_basis.then(|| ComplexMatrix::identity(n));

    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let m = n - lo;
        let xnorm = (lo..n).map(|i| w.data[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = w.data[lo * n + k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;

        let v = &mut v[..m];
        for (t, i) in (lo..n).enumerate() {
            v[t] = w.data[i * n + k];
        }
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // B <- (I - 2vv†) B (I - 2vv†) on the trailing block.
        let p = &mut p[..m];
        for (t, i) in (lo..n).enumerate() {
            let row = &w.data[i * n + lo..i * n + n];
            p[t] = row.iter().zip(v.iter()).map(|(b, vv)| b * vv).sum();
        }
        let kappa: f64 = v.iter().zip(p.iter()).map(|(vv, pp)| (vv.conj() * pp).re).sum();
        for t in 0..m {
            p[t] -= v[t] * kappa;
        }
        for (s, i) in (lo..n).enumerate() {
            let vs = v[s];
            let ps = p[s];
            let row = &mut w.data[i * n + lo..i * n + n];
            for t in 0..m {
                row[t] -= 2.0 * (vs * p[t].conj() + ps * v[t].conj());
            }
        }
        w.data[lo * n + k] = alpha;
        w.data[k * n + lo] = alpha.conj();
        for i in (lo + 1)..n {
            w.data[i * n + k] = ZERO;
            w.data[k * n + i] = ZERO;
        }

        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let row = &mut q.data[r * n + lo..r * n + n];
                let s: Complex64 = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                for (t, z) in row.iter_mut().enumerate() {
                    *z -= 2.0 * s * v[t].conj();
                }
            }
        }
    }

    // Diagonal phase gauge making the sub-diagonal real and non-negative.
    let diag: Vec<f64> = (0..n).map(|i| w.data[i * n + i].re).collect();
    let mut sub = vec![0.0; n];
    let mut gauge = vec![ONE; n];
    for j in 0..n.saturating_sub(1) {
        let e = w.data[(j + 1) * n + j];
        let mag = e.norm();
        sub[j] = mag;
        gauge[j + 1] = if mag > 0.0 { gauge[j] * (e / mag) } else { gauge[j] };
    }
    if let Some(q) = q.as_mut() {
        for r in 0..n {
            for (j, g) in gauge.iter().enumerate() {
                q.data[r * n + j] *= g;
            }
        }
    }
    (diag, sub, q)
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[i]` couples `d[i]` and
/// `d[i+1]`; `z`, when given, is a column-major basis rotated alongside.
fn tridiagonal_ql(mut d: Vec<f64>, mut e: Vec<f64>, mut z: Option<&mut Vec<f64>>) -> Result<Vec<f64>> {
    const MAX_ITER: usize = 60;
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_ITER {
                    return Err(Error::ConvergenceFailure { iterations: MAX_ITER });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (left, right) = z.split_at_mut((i + 1) * n);
                        let col_i = &mut left[i * n..];
                        let col_next = &mut right[..n];
                        for (zi, zn) in col_i.iter_mut().zip(col_next.iter_mut()) {
                            let hk = *zn;
                            *zn = s * *zi + c * hk;
                            *zi = c * *zi - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(d)
}

/// `e^{-isH} = V·diag(e^{-isE_n})·V†` from a precomputed eigensystem.
pub fn unitary_exp(eig: &HermitianEigenSystem, s: f64) -> ComplexMatrix {
    let n = eig.dim();
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -s * e))
        .collect();
    let mut scaled = v.clone();
    for row in scaled.data.chunks_mut(n) {
        for (z, p) in row.iter_mut().zip(&phases) {
            *z *= p;
        }
    }
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        let a = scaled.row(i);
        for j in 0..n {
            let b = v.row(j);
            out.data[i * n + j] = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
        }
    }
    out
}

/// Kronecker product with the default dimension cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn kron_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.saturating_mul(db);
    if dim > cap {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.data[(i * db + k) * dim + j * db + l] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// `U·ψ`. `U` is expected to be unitary; the result is not renormalised.
pub fn apply(u: &ComplexMatrix, psi: &StateVector) -> Result<StateVector> {
    if u.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: psi.dim(),
        });
    }
    Ok(StateVector {
        amplitudes: u.mul_vec(psi.amplitudes()),
    })
}

/// `<ψ|A|ψ>` for Hermitian `A`.
pub fn expectation(psi: &StateVector, a: &ComplexMatrix) -> Result<f64> {
    if a.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: psi.dim(),
        });
    }
    a.ensure_hermitian()?;
    Ok(quadratic_form(psi.amplitudes(), a).re)
}

/// Raw `Σ ψ_i* A_ij ψ_j` without checks.
pub(crate) fn quadratic_form(psi: &[Complex64], a: &ComplexMatrix) -> Complex64 {
    psi.iter()
        .enumerate()
        .map(|(i, pi)| {
            let row: Complex64 = a.row(i).iter().zip(psi).map(|(aij, pj)| aij * pj).sum();
            pi.conj() * row
        })
        .sum()
}
