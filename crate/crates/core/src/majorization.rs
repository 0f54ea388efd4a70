//! Eigenvalue-vector comparators: weak majorization, majorization,
//! top/bottom-k eigenvalue products, the grid Olson order and the
//! log-majorization gap of the geometric mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::means::{arith_mean, geo_mean, Weight};
use crate::spectral::{eig_sym, loewner_cmp, mat_log, mat_pow, HermMatrix, Tolerance, PD_ABS_TOL};

/// Default exponent grid for the Olson-order filter.
pub const DEFAULT_OLSON_GRID: [f64; 7] = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];

/// Real values sorted in non-increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigVector(Vec<f64>);

impl EigVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.windows(2).any(|w| !(w[0] >= w[1])) {
            return Err(Error::NotSorted);
        }
        Ok(EigVector(values))
    }

    /// Sorts descending first.
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        EigVector(values)
    }

    pub fn of(a: &HermMatrix) -> Result<Self> {
        Ok(EigVector(eig_sym(a)?.eigenvalues))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Compensated (Neumaier) prefix sums.
    pub fn prefix_sums(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for &x in &self.0 {
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            out.push(sum + comp);
        }
        out
    }
}

/// Outcome of a (weak) majorization test `x ≺_w y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizationReport {
    pub holds: bool,
    /// 1-based `k` attaining the minimum prefix margin (smallest on ties).
    pub worst_k: usize,
    /// `min_k (Σ_{j≤k} y_j − Σ_{j≤k} x_j)`.
    pub margin: f64,
    pub prefix_margins: Vec<f64>,
    /// `Σ y − Σ x`.
    pub total_gap: f64,
}

fn prefix_compare(x: &EigVector, y: &EigVector, tol: Tolerance) -> Result<(MajorizationReport, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 0 });
    }
    let px = x.prefix_sums();
    let py = y.prefix_sums();
    let mut holds = true;
    let mut worst_k = 1;
    let mut margin = f64::INFINITY;
    let mut prefix_margins = Vec::with_capacity(px.len());
    let mut last_slack = 0.0;
    for (k, (a, b)) in px.iter().zip(&py).enumerate() {
        let d = b - a;
        let slack = tol.slack(a.abs().max(b.abs()));
        if d < -slack {
            holds = false;
        }
        if d < margin {
            margin = d;
            worst_k = k + 1;
        }
        prefix_margins.push(d);
        last_slack = slack;
    }
    let total_gap = *prefix_margins.last().unwrap();
    Ok((MajorizationReport { holds, worst_k, margin, prefix_margins, total_gap }, last_slack))
}

/// `x ≺_w y`: every prefix sum of `x` is at most the one of `y` (up to slack).
pub fn weak_majorize(x: &EigVector, y: &EigVector, tol: Tolerance) -> Result<MajorizationReport> {
    Ok(prefix_compare(x, y, tol)?.0)
}

/// `x ≺ y`: weak majorization plus equal totals.
pub fn majorize(x: &EigVector, y: &EigVector, tol: Tolerance) -> Result<MajorizationReport> {
    let (mut rep, slack) = prefix_compare(x, y, tol)?;
    rep.holds = rep.holds && rep.total_gap.abs() <= slack;
    Ok(rep)
}

fn log_eigenvalues(a: &HermMatrix) -> Result<Vec<f64>> {
    let ev = eig_sym(a)?.eigenvalues;
    let min = ev[ev.len() - 1];
    if !(min > PD_ABS_TOL) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(ev.into_iter().map(f64::ln).collect())
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    Ok(())
}

/// `Σ_{j≤k} log λ_j(A)`.
pub fn topk_log_prod(a: &HermMatrix, k: usize) -> Result<f64> {
    check_k(k, a.dim())?;
    Ok(log_eigenvalues(a)?[..k].iter().sum())
}

/// `Σ_{j>n−k} log λ_j(A)`.
pub fn bottomk_log_prod(a: &HermMatrix, k: usize) -> Result<f64> {
    check_k(k, a.dim())?;
    let l = log_eigenvalues(a)?;
    Ok(l[l.len() - k..].iter().sum())
}

/// `∏_{j≤k} λ_j(A)`.
pub fn topk_prod(a: &HermMatrix, k: usize) -> Result<f64> {
    Ok(topk_log_prod(a, k)?.exp())
}

/// `∏_{j>n−k} λ_j(A)`.
pub fn bottomk_prod(a: &HermMatrix, k: usize) -> Result<f64> {
    Ok(bottomk_log_prod(a, k)?.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsonReport {
    pub holds: bool,
    /// First grid exponent at which `A^r ≤ B^r` fails.
    pub failing_r: Option<f64>,
    /// Smallest normalized Loewner margin over the grid.
    pub worst_margin: f64,
    pub grid: Vec<f64>,
}

/// Necessary-condition test of `A ⪯_ols B`: `A^r ≤ B^r` for each grid `r`.
pub fn olson_leq(a: &HermMatrix, b: &HermMatrix, grid: &[f64], tol: Tolerance) -> Result<OlsonReport> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(r) = grid.iter().find(|r| !(**r >= 1.0) || !r.is_finite()) {
        return Err(Error::ArgumentOutOfRange(format!("Olson exponent {r} < 1")));
    }
    for m in [a, b] {
        let min = eig_sym(m)?.min();
        if !(min > PD_ABS_TOL) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
    }
    let mut failing_r = None;
    let mut worst_margin = f64::INFINITY;
    for &r in grid {
        let c = loewner_cmp(&mat_pow(a, r)?, &mat_pow(b, r)?, tol)?;
        worst_margin = worst_margin.min(c.margin);
        if failing_r.is_none() && !c.is_le() {
            failing_r = Some(r);
        }
    }
    Ok(OlsonReport { holds: failing_r.is_none(), failing_r, worst_margin, grid: grid.to_vec() })
}

/// Prefix-sum gaps between `λ((1−v)log A + v log B)` and `λ(log(A ♯_v B))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMajorizationGap {
    /// `k = 1..n`; nonnegative when the log-majorization holds.
    pub prefix_margins: Vec<f64>,
    /// The `k = n` entry: zero by determinant multiplicativity of `♯_v`.
    pub trace_gap: f64,
    pub geo_log_eigenvalues: Vec<f64>,
    pub arith_log_eigenvalues: Vec<f64>,
}

pub fn log_majorization_gap(a: &HermMatrix, b: &HermMatrix, v: Weight) -> Result<LogMajorizationGap> {
    let g = geo_mean(a, b, v)?;
    let x = EigVector::of(&mat_log(&g)?)?;
    let y = EigVector::of(&arith_mean(&mat_log(a)?, &mat_log(b)?, v)?)?;
    let rep = weak_majorize(&x, &y, Tolerance::default())?;
    Ok(LogMajorizationGap {
        trace_gap: rep.total_gap,
        prefix_margins: rep.prefix_margins,
        geo_log_eigenvalues: x.0,
        arith_log_eigenvalues: y.0,
    })
}
