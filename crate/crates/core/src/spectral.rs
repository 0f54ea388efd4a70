//! Real symmetric matrices, cyclic Jacobi eigendecomposition, functional
//! calculus and Loewner-order comparison.
//!
//! Every matrix-valued operation in the crate funnels through [`eig_sym`]:
//! `f(A)` is `V · diag(f(λ)) · Vᵀ` for the decomposition `A = V · diag(λ) · Vᵀ`.
//! Results of products are symmetrized before being wrapped back into a
//! [`HermMatrix`], so rounding never breaks the symmetry invariant.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};

/// Maximum number of full Jacobi sweeps before giving up.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Off-diagonal convergence threshold, relative to the Frobenius norm.
pub const JACOBI_OFF_DIAG_REL: f64 = 1e-13;
/// Relative symmetry tolerance applied on construction.
pub const SYMMETRY_REL_TOL: f64 = 1e-12;
/// Default positive-definiteness threshold.
pub const PD_ABS_TOL: f64 = 1e-10;

/// An `n × n` real symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixLiteral", into = "MatrixLiteral")]
pub struct HermMatrix {
    m: DMatrix<f64>,
}

/// Row-major fixture representation: `{"dim": n, "entries": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub dim: usize,
    pub entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixLiteral> for HermMatrix {
    type Error = Error;

    fn try_from(lit: MatrixLiteral) -> Result<Self> {
        if lit.entries.len() != lit.dim {
            return Err(Error::DimMismatch { left: lit.dim, right: lit.entries.len() });
        }
        HermMatrix::from_rows(&lit.entries)
    }
}

impl From<HermMatrix> for MatrixLiteral {
    fn from(h: HermMatrix) -> Self {
        MatrixLiteral { dim: h.dim(), entries: h.to_rows() }
    }
}

impl HermMatrix {
    /// Wraps a dense matrix after checking squareness, finiteness and symmetry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut max_abs = 0.0f64;
        for j in 0..cols {
            for i in 0..rows {
                let x = m[(i, j)];
                if !x.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                max_abs = max_abs.max(x.abs());
            }
        }
        let allowed = SYMMETRY_REL_TOL * max_abs.max(1.0);
        let mut asymmetry = 0.0f64;
        for i in 0..rows {
            for j in (i + 1)..cols {
                asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asymmetry > allowed {
            return Err(Error::NonSymmetric { asymmetry, allowed });
        }
        Ok(HermMatrix { m })
    }

    /// Symmetrizes `(M + Mᵀ)/2` and wraps the result without further checks.
    /// Used for the outputs of products of symmetric matrices.
    pub(crate) fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        HermMatrix { m: (m + t) * 0.5 }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, cols: r.len() });
            }
        }
        HermMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        HermMatrix { m: DMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        HermMatrix { m: DMatrix::zeros(n, n) }
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        HermMatrix::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.m.row(i).iter().copied().collect()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.m.norm()
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// Diagonal entries, in order.
    pub fn diagonal(&self) -> Vec<f64> {
        self.m.diagonal().iter().copied().collect()
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.m[(i, j)] == 0.0))
    }

    fn check_dims(&self, other: &HermMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn add(&self, other: &HermMatrix) -> Result<HermMatrix> {
        self.check_dims(other)?;
        Ok(HermMatrix { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &HermMatrix) -> Result<HermMatrix> {
        self.check_dims(other)?;
        Ok(HermMatrix { m: &self.m - &other.m })
    }

    pub fn scale(&self, c: f64) -> HermMatrix {
        HermMatrix { m: &self.m * c }
    }

    /// `(1 - w)·self + w·other`.
    pub fn lerp(&self, other: &HermMatrix, w: f64) -> Result<HermMatrix> {
        self.check_dims(other)?;
        Ok(HermMatrix { m: &self.m * (1.0 - w) + &other.m * w })
    }

    /// `X · self · X` for symmetric `X`.
    pub fn sandwich(&self, x: &HermMatrix) -> Result<HermMatrix> {
        self.check_dims(x)?;
        Ok(HermMatrix::symmetrize(&x.m * &self.m * &x.m))
    }

    /// `T · self · Tᵀ` for an arbitrary square `T`.
    pub fn congruence(&self, t: &DMatrix<f64>) -> Result<HermMatrix> {
        if t.nrows() != self.dim() || t.ncols() != self.dim() {
            return Err(Error::DimMismatch { left: self.dim(), right: t.nrows() });
        }
        Ok(HermMatrix::symmetrize(t * &self.m * t.transpose()))
    }

    /// Plain matrix product (not symmetric in general).
    pub fn matmul(&self, other: &HermMatrix) -> Result<DMatrix<f64>> {
        self.check_dims(other)?;
        Ok(&self.m * &other.m)
    }

    /// `⟨self·x, x⟩`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch { left: self.dim(), right: x.len() });
        }
        let v = DVector::from_column_slice(x);
        Ok(v.dot(&(&self.m * &v)))
    }

    /// Max-entry of the commutator `self·other − other·self`.
    pub fn commutator_norm(&self, other: &HermMatrix) -> Result<f64> {
        self.check_dims(other)?;
        let c = &self.m * &other.m - &other.m * &self.m;
        Ok(c.iter().fold(0.0, |acc, x| acc.max(x.abs())))
    }

    pub fn eig(&self) -> Result<Spectrum> {
        eig_sym(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_sym(self)?.eigenvalues)
    }

    /// Spectral norm `max |λᵢ|`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.iter().fold(0.0, |acc, x| acc.max(x.abs())))
    }

    pub fn inverse(&self) -> Result<HermMatrix> {
        mat_pow(self, -1.0)
    }

    pub fn sqrt(&self) -> Result<HermMatrix> {
        mat_pow(self, 0.5)
    }

    /// `f(self)` without any domain check.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<HermMatrix> {
        Ok(eig_sym(self)?.map(f))
    }
}

/// Eigenvalues in non-increasing order with orthonormal eigenvectors
/// (column `j` pairs with `eigenvalues[j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fd: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for (k, fk) in fd.iter().enumerate() {
                    acc += v[(i, k)] * fk * v[(j, k)];
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
        HermMatrix { m: out }
    }

    pub fn reconstruct(&self) -> HermMatrix {
        self.map(|l| l)
    }
}

/// Relative/absolute slack used by order comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9, abs: PD_ABS_TOL }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel >= 0.0 && abs >= 0.0) {
            return Err(Error::ArgumentOutOfRange(format!("tolerance rel={rel} abs={abs}")));
        }
        Ok(Tolerance { rel, abs })
    }

    /// Slack for a quantity whose natural scale is `scale`.
    pub fn slack(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs().max(1.0)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Pivots are visited row by row, `(0,1), (0,2), …, (n-2,n-1)`, so the result
/// is a deterministic function of the input bits. Eigenvalues are sorted
/// descending (stable on ties) and each eigenvector is signed so that its
/// first non-negligible component is positive.
pub fn eig_sym(a: &HermMatrix) -> Result<Spectrum> {
    let n = a.dim();
    let mut m = a.m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let frob = m.norm();
    let threshold = JACOBI_OFF_DIAG_REL * frob;

    let off_norm = |m: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&m) <= threshold;
    let mut sweep = 0;
    while !converged {
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS });
        }
        sweep += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                m[(p, p)] -= t * apq;
                m[(q, q)] += t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = m[(r, p)];
                        let arq = m[(r, q)];
                        let np = c * arp - s * arq;
                        let nq = s * arp + c * arq;
                        m[(r, p)] = np;
                        m[(p, r)] = np;
                        m[(r, q)] = nq;
                        m[(q, r)] = nq;
                    }
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
        converged = off_norm(&m) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut vec: Vec<f64> = v.column(src).iter().copied().collect();
        let flip = vec.iter().find(|x| x.abs() > 1e-10).is_some_and(|x| *x < 0.0);
        if flip {
            vec.iter_mut().for_each(|x| *x = -*x);
        }
        for (r, x) in vec.into_iter().enumerate() {
            eigenvectors[(r, col)] = x;
        }
    }
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// `f(A)` through the functional calculus, rejecting spectra outside the
/// open domain of `f`.
pub fn apply_fn(a: &HermMatrix, f: &FunctionSpec) -> Result<HermMatrix> {
    let spec = eig_sym(a)?;
    let bad: Vec<f64> =
        spec.eigenvalues.iter().copied().filter(|&l| !f.domain.contains(l)).collect();
    if !bad.is_empty() {
        return Err(Error::DomainViolation { eigenvalues: bad, lo: f.domain.lo, hi: f.domain.hi });
    }
    Ok(spec.map(|l| f.eval(l)))
}

fn require_pd(spec: &Spectrum) -> Result<()> {
    let min = spec.min();
    if !(min > PD_ABS_TOL) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(())
}

/// `A^p`. Nonnegative integer powers work for any symmetric `A`; every other
/// exponent requires `A` positive definite.
pub fn mat_pow(a: &HermMatrix, p: f64) -> Result<HermMatrix> {
    if p == 0.0 {
        return Ok(HermMatrix::identity(a.dim()));
    }
    if p == 1.0 {
        return Ok(a.clone());
    }
    let spec = eig_sym(a)?;
    if p > 0.0 && p.fract() == 0.0 && p <= i32::MAX as f64 {
        let k = p as i32;
        return Ok(spec.map(|l| l.powi(k)));
    }
    require_pd(&spec)?;
    if p == 0.5 {
        Ok(spec.map(f64::sqrt))
    } else if p == -1.0 {
        Ok(spec.map(f64::recip))
    } else {
        Ok(spec.map(|l| l.powf(p)))
    }
}

pub fn mat_log(a: &HermMatrix) -> Result<HermMatrix> {
    let spec = eig_sym(a)?;
    require_pd(&spec)?;
    Ok(spec.map(f64::ln))
}

pub fn mat_exp(h: &HermMatrix) -> Result<HermMatrix> {
    Ok(eig_sym(h)?.map(f64::exp))
}

/// Result of comparing two symmetric matrices in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Order {
    Le,
    Ge,
    Eq,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoewnerCmp {
    pub order: Order,
    /// `λ_min(B − A) / max(1, ‖A‖₂, ‖B‖₂)`; nonnegative iff `A ≤ B`.
    pub margin: f64,
    /// `λ_min(A − B)` with the same normalization.
    pub reverse_margin: f64,
}

impl LoewnerCmp {
    pub fn is_le(&self) -> bool {
        matches!(self.order, Order::Le | Order::Eq)
    }

    pub fn is_ge(&self) -> bool {
        matches!(self.order, Order::Ge | Order::Eq)
    }
}

/// Normalization shared by all Loewner margins.
pub fn loewner_scale(a: &HermMatrix, b: &HermMatrix) -> Result<f64> {
    Ok(1f64.max(a.spectral_norm()?).max(b.spectral_norm()?))
}

/// Compares `A` against `B`. `A ≤ B` is accepted when the normalized margin
/// is at least `-(tol.rel + tol.abs / scale)`.
pub fn loewner_cmp(a: &HermMatrix, b: &HermMatrix, tol: Tolerance) -> Result<LoewnerCmp> {
    let diff = b.sub(a)?;
    let ev = diff.eigenvalues()?;
    let scale = loewner_scale(a, b)?;
    let margin = ev[ev.len() - 1] / scale;
    let reverse_margin = -ev[0] / scale;
    let slack = tol.rel + tol.abs / scale;
    let le = margin >= -slack;
    let ge = reverse_margin >= -slack;
    let order = match (le, ge) {
        (true, true) => Order::Eq,
        (true, false) => Order::Le,
        (false, true) => Order::Ge,
        (false, false) => Order::Incomparable,
    };
    Ok(LoewnerCmp { order, margin, reverse_margin })
}

/// Normalized margin of `A ≤ B` (negative when violated).
pub fn loewner_margin(a: &HermMatrix, b: &HermMatrix) -> Result<f64> {
    Ok(loewner_cmp(a, b, Tolerance::default())?.margin)
}

pub fn is_pd(a: &HermMatrix, tol: Tolerance) -> bool {
    match eig_sym(a) {
        Ok(spec) => spec.min() > tol.abs,
        Err(_) => false,
    }
}
