//! Dense complex linear algebra for 2- and 4-dimensional operators.
//!
//! Basis convention used throughout the crate: `|↑⟩ = (1, 0)` and qubit 1 is
//! the left Kronecker factor, so the two-qubit basis order is
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.
//!
//! Every tolerance in this module is relative to the largest entry modulus of
//! the input, because operator entries span several decades in rad/ns.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

const MAX_DIM: usize = 4;

/// Relative Hermiticity tolerance accepted by [`herm_eig`] and [`expm_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Residual bound per eigenpair accepted by [`general_eigvals`].
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("invalid dimension: expected {expected}, got {got}")]
    InvalidDimension { expected: String, got: usize },
    #[error("operator is not Hermitian (relative Hermiticity error {0:.3e})")]
    NotHermitian(f64),
    #[error("eigenvalue iteration did not converge (residual {0:.3e})")]
    NoConvergence(f64),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense square complex matrix of dimension 2 or 4, stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Operator {
    dim: usize,
    data: [Complex64; MAX_DIM * MAX_DIM],
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(LinalgError::InvalidDimension { expected: "2 or 4".into(), got: dim })
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "operator dimension must be 2 or 4, got {dim}");
        Operator { dim, data: [Complex64::new(0.0, 0.0); MAX_DIM * MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds an operator from `dim²` row-major entries.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(LinalgError::InvalidDimension {
                expected: format!("{} entries", dim * dim),
                got: entries.len(),
            });
        }
        let mut m = Self::zeros(dim);
        m.data[..dim * dim].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        check_dim(N)?;
        let mut m = Self::zeros(N);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        Ok(m)
    }

    pub fn diag_real(values: &[f64]) -> Result<Self> {
        check_dim(values.len())?;
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    pub fn diag(values: &[Complex64]) -> Result<Self> {
        check_dim(values.len())?;
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        Ok(m)
    }

    /// Projector `|ψ⟩⟨ψ|` onto a (not necessarily normalized) state vector.
    pub fn projector(psi: &[Complex64]) -> Result<Self> {
        check_dim(psi.len())?;
        let mut m = Self::zeros(psi.len());
        for i in 0..psi.len() {
            for j in 0..psi.len() {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries, `dim²` of them.
    pub fn entries(&self) -> &[Complex64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    /// Element-wise complex conjugate (in the standard basis).
    pub fn conj(&self) -> Self {
        let mut m = *self;
        for z in m.data.iter_mut() {
            *z = z.conj();
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        for z in m.data.iter_mut() {
            *z *= s;
        }
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Element-wise product.
    pub fn hadamard(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for (a, b) in m.data.iter_mut().zip(other.data.iter()) {
            *a *= *b;
        }
        m
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        *self * *other - *other * *self
    }

    /// `max |M − M†|` element-wise, absolute.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Hermiticity error divided by `max |entry|` (zero for the zero matrix).
    pub fn relative_hermiticity_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            self.hermiticity_error() / scale
        }
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Operator {
        (*self + self.adjoint()).scale_real(0.5)
    }

    /// Largest element-wise modulus of `self − other`.
    pub fn max_diff(&self, other: &Operator) -> f64 {
        (*self - *other).max_abs()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `M v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for Operator {
    type Output = Operator;
    #[inline]
    fn mul(self, rhs: Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for Operator {
    type Output = Operator;
    #[inline]
    fn add(self, rhs: Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let mut out = self;
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += *b;
        }
        out
    }
}

impl Sub for Operator {
    type Output = Operator;
    #[inline]
    fn sub(self, rhs: Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let mut out = self;
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a -= *b;
        }
        out
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})[", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn sigma_x() -> Operator {
    Operator::from_real_rows([[0.0, 1.0], [1.0, 0.0]]).unwrap()
}

pub fn sigma_y() -> Operator {
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    Operator::from_row_major(2, &[z, -i, i, z]).unwrap()
}

pub fn sigma_z() -> Operator {
    Operator::from_real_rows([[1.0, 0.0], [0.0, -1.0]]).unwrap()
}

/// Kronecker product of two single-qubit operators; `a` acts on qubit 1.
pub fn kron(a: &Operator, b: &Operator) -> Result<Operator> {
    for d in [a.dim, b.dim] {
        if d != 2 {
            return Err(LinalgError::InvalidDimension { expected: "2".into(), got: d });
        }
    }
    let mut m = Operator::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(m)
}

/// Eigendecomposition `m = V diag(values) V†` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Real eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: Operator,
}

impl HermEig {
    pub fn reconstruct(&self) -> Operator {
        let d = Operator::diag_real(&self.values).unwrap();
        self.vectors * d * self.vectors.adjoint()
    }
}

fn require_hermitian(m: &Operator) -> Result<()> {
    let rel = m.relative_hermiticity_error();
    if rel > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian(rel));
    }
    Ok(())
}

/// Cyclic complex Jacobi diagonalization of a Hermitian operator.
pub fn herm_eig(m: &Operator) -> Result<HermEig> {
    require_hermitian(m)?;
    let n = m.dim;
    let mut a = m.hermitian_part();
    let mut v = Operator::identity(n);
    let scale = a.max_abs();

    if scale > 0.0 {
        let mut converged = false;
        for _sweep in 0..64 {
            let off: f64 = (0..n)
                .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-17 * scale {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let g = apq.norm();
                    if g <= 1e-300 {
                        continue;
                    }
                    // Phase-align a_pq to a real value, then apply a real rotation.
                    let phase = apq / g;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * g);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let t = if tau == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    let mut w = Operator::identity(n);
                    w[(p, p)] = Complex64::new(c, 0.0);
                    w[(p, q)] = Complex64::new(s, 0.0);
                    w[(q, p)] = -phase.conj() * s;
                    w[(q, q)] = phase.conj() * c;

                    a = w.adjoint() * a * w;
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    v = v * w;
                }
            }
        }
        if !converged {
            let off =
                (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a[(p, q)].norm()).fold(0.0, f64::max);
            return Err(LinalgError::NoConvergence(off / scale));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = Operator::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    Ok(HermEig { values, vectors })
}

/// `exp(−i·s·h)` for Hermitian `h`.
pub fn expm_hermitian(h: &Operator, s: f64) -> Result<Operator> {
    let eig = herm_eig(h)?;
    Ok(unitary_from_eig(&eig, s))
}

/// `V diag(e^{−i s λ}) V†` from a precomputed decomposition.
pub fn unitary_from_eig(eig: &HermEig, s: f64) -> Operator {
    let phases: Vec<Complex64> = eig.values.iter().map(|&l| Complex64::from_polar(1.0, -s * l)).collect();
    let d = Operator::diag(&phases).unwrap();
    eig.vectors * d * eig.vectors.adjoint()
}

/// `max |U†U − I|`.
pub fn unitarity_error(u: &Operator) -> f64 {
    (u.adjoint() * *u).max_diff(&Operator::identity(u.dim))
}

/// All eigenvalues of a general (non-Hermitian) operator, unsorted.
///
/// Householder reduction to Hessenberg form followed by complex shifted QR
/// with deflation. Each eigenvalue is certified by inverse iteration: the
/// returned pairs satisfy `‖Mv − λv‖ ≤ EIG_RESIDUAL_TOL · max|m|`.
pub fn general_eigvals(m: &Operator) -> Result<Vec<Complex64>> {
    let n = m.dim;
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let mut h = hessenberg(m);
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let eps = f64::EPSILON;

    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    loop {
        if hi == 0 {
            values[0] = h[(0, 0)];
            break;
        }
        // Locate the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let threshold = if diag > 0.0 { eps * diag } else { eps * scale };
            if sub <= threshold {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total_iter += 1;
        if total_iter > 200 * n {
            return Err(LinalgError::NoConvergence(h[(hi, hi - 1)].norm() / scale));
        }

        let mu = if iter % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, lo, hi, mu);
    }

    for &lambda in &values {
        let residual = inverse_iteration_residual(m, lambda);
        if residual > EIG_RESIDUAL_TOL * scale {
            return Err(LinalgError::NoConvergence(residual / scale));
        }
    }
    Ok(values)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR step `H − μI = QR, H ← RQ + μI` on rows/cols `lo..=hi`.
fn qr_step(h: &mut Operator, lo: usize, hi: usize, mu: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)) } else { (x / r, y / r) };
        for j in k..=hi {
            let hk = h[(k, j)];
            let hk1 = h[(k + 1, j)];
            h[(k, j)] = c.conj() * hk + s.conj() * hk1;
            h[(k + 1, j)] = -s * hk + c * hk1;
        }
        rotations.push((k, c, s));
    }
    for (k, c, s) in rotations {
        for i in lo..=hi {
            let hk = h[(i, k)];
            let hk1 = h[(i, k + 1)];
            h[(i, k)] = hk * c + hk1 * s;
            h[(i, k + 1)] = -hk * s.conj() + hk1 * c.conj();
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}

fn hessenberg(m: &Operator) -> Operator {
    let n = m.dim;
    let mut h = *m;
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha_norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let mut v = x.clone();
        v[0] += phase * alpha_norm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← P H P with P = I − 2 v v†, acting on indices k+1..n.
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= dot * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Residual `‖Mv − λv‖` of the vector found by two steps of inverse iteration.
fn inverse_iteration_residual(m: &Operator, lambda: Complex64) -> f64 {
    let n = m.dim;
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut shifted = *m;
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64)).collect();
    let mut best = f64::INFINITY;
    for _ in 0..3 {
        let x = solve_perturbed(&shifted, &v, scale * f64::EPSILON);
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        v = x.iter().map(|z| z / norm).collect();
        let mv = m.apply(&v);
        let res = mv.iter().zip(v.iter()).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt();
        best = best.min(res);
    }
    best
}

/// Gaussian elimination with partial pivoting; zero pivots are replaced by `tiny`.
fn solve_perturbed(a: &Operator, b: &[Complex64], tiny: f64) -> Vec<Complex64> {
    let n = a.dim;
    let mut m = *a;
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm())).unwrap();
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            x.swap(k, p);
        }
        if m[(k, k)].norm() < tiny {
            m[(k, k)] = Complex64::new(tiny.max(f64::MIN_POSITIVE), 0.0);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[(k, j)] * x[j];
        }
        x[k] = s / m[(k, k)];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_examples() {
        let i2 = Operator::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), Operator::identity(4));
        let zz = kron(&sigma_z(), &sigma_z()).unwrap();
        assert_eq!(zz, Operator::diag_real(&[1.0, -1.0, -1.0, 1.0]).unwrap());

        let xi = kron(&sigma_x(), &i2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = matches!((i, j), (0, 2) | (2, 0) | (1, 3) | (3, 1));
                assert_eq!(xi[(i, j)], c(if expected { 1.0 } else { 0.0 }, 0.0), "({i},{j})");
            }
        }
    }

    #[test]
    fn kron_rejects_wrong_dimension() {
        let err = kron(&Operator::identity(4), &sigma_x()).unwrap_err();
        assert!(matches!(err, LinalgError::InvalidDimension { got: 4, .. }));
        assert!(Operator::from_row_major(3, &[c(0.0, 0.0); 9]).is_err());
        assert!(Operator::from_row_major(2, &[c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn herm_eig_examples() {
        let e = herm_eig(&sigma_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!(e.vectors.max_diff(&Operator::identity(2)) < 1e-15);

        let e = herm_eig(&sigma_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] + 1.0).abs() < 1e-15);

        let e = herm_eig(&Operator::diag_real(&[3.0, 1.0, 2.0, 0.0]).unwrap()).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = Operator::from_real_rows([[1.0, 2.0], [0.0, 1.0]]).unwrap();
        match herm_eig(&m) {
            Err(LinalgError::NotHermitian(e)) => assert!((e - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(expm_hermitian(&m, 1.0).is_err());
    }

    #[test]
    fn expm_examples() {
        let h = kron(&sigma_x(), &sigma_z()).unwrap() + Operator::diag_real(&[0.3, 0.1, -2.0, 5.0]).unwrap();
        assert!(expm_hermitian(&h, 0.0).unwrap().max_diff(&Operator::identity(4)) < 1e-14);

        let u = expm_hermitian(&sigma_z(), PI / 2.0).unwrap();
        let expected = Operator::diag(&[c(0.0, -1.0), c(0.0, 1.0)]).unwrap();
        assert!(u.max_diff(&expected) < 1e-15);

        let u = expm_hermitian(&sigma_x(), PI / 2.0).unwrap();
        assert!(u.max_diff(&sigma_x().scale(c(0.0, -1.0))) < 1e-15);
        assert!(unitarity_error(&u) < 1e-12);
    }

    #[test]
    fn general_eigvals_examples() {
        let ev = general_eigvals(&Operator::identity(4)).unwrap();
        assert!(ev.iter().all(|z| (z - 1.0).norm() < 1e-14));

        let d = [c(2.0, 1.0), c(-1.0, 0.0), c(0.5, -3.0), c(7.0, 0.0)];
        let mut ev = general_eigvals(&Operator::diag(&d).unwrap()).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        let mut want = d.to_vec();
        want.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (a, b) in ev.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn general_eigvals_jordan_and_rotation() {
        // Non-normal upper-triangular and a real rotation with complex spectrum.
        let m = Operator::from_real_rows([
            [2.0, 1.0, 0.0, 0.0],
            [0.0, 2.0, 1.0, 0.0],
            [0.0, 0.0, 3.0, 5.0],
            [0.0, 0.0, 0.0, -1.0],
        ])
        .unwrap();
        let mut ev: Vec<f64> = general_eigvals(&m).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        let want = [-1.0, 2.0, 2.0, 3.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-6, "{ev:?}");
        }

        let r = Operator::from_real_rows([[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let mut ev = general_eigvals(&r).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn hermiticity_predicate() {
        let mut m = sigma_y();
        assert_eq!(m.hermiticity_error(), 0.0);
        m[(0, 1)] += c(0.0, 0.5);
        assert!((m.hermiticity_error() - 0.5).abs() < 1e-15);
    }
}
