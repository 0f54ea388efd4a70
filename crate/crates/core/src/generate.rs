//! Seeded random instance generators: positive definite matrices with a
//! prescribed spectral range, plain and Olson sandwich pairs, commuting and
//! Loewner-ordered pairs.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::rng_from_seed;
use crate::spectral::{eig_sym, mat_pow, HermMatrix};

/// Spectral range of the `A` matrix in plain sandwich pairs.
pub const PLAIN_A_INTERVAL: (f64, f64) = (0.2, 5.0);
/// Retry cap for rejection steps.
pub const GENERATOR_RETRIES: usize = 100;

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::BadInterval { lo, hi });
    }
    Ok(())
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn conjugate_diag(q: &DMatrix<f64>, d: &[f64]) -> HermMatrix {
    let n = d.len();
    let mut scaled = q.clone();
    for j in 0..n {
        scaled.column_mut(j).scale_mut(d[j]);
    }
    HermMatrix::symmetrize(scaled * q.transpose())
}

pub(crate) fn gen_pd_rng(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Result<HermMatrix> {
    gen_spd(n, lo, hi, rng, false)
}

/// Log-uniform spectrum in `[lo, hi]`; diagonal when `diagonal` is set,
/// otherwise conjugated by a Haar orthogonal matrix.
pub(crate) fn gen_spd(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng, diagonal: bool) -> Result<HermMatrix> {
    check_interval(lo, hi)?;
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let d: Vec<f64> = (0..n).map(|_| log_uniform(rng, lo, hi)).collect();
    if diagonal {
        return HermMatrix::diag(&d);
    }
    let q = random_orthogonal(n, rng);
    Ok(conjugate_diag(&q, &d))
}

/// Random orthogonal conjugation of a diagonal with log-uniform entries in
/// `[lo, hi]`. Deterministic per seed.
pub fn gen_pd(n: usize, interval: (f64, f64), seed: u64) -> Result<HermMatrix> {
    gen_pd_rng(n, interval.0, interval.1, &mut rng_from_seed(seed))
}

/// Two matrices sharing a random eigenbasis, spectra in `[lo, hi]`.
pub fn gen_commuting(n: usize, interval: (f64, f64), seed: u64) -> Result<(HermMatrix, HermMatrix)> {
    gen_commuting_in(n, interval, seed, false)
}

/// [`gen_commuting`]; with `diagonal` set the shared basis is the identity.
pub fn gen_commuting_in(
    n: usize,
    interval: (f64, f64),
    seed: u64,
    diagonal: bool,
) -> Result<(HermMatrix, HermMatrix)> {
    let (lo, hi) = interval;
    check_interval(lo, hi)?;
    let mut rng = rng_from_seed(seed);
    let da: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, lo, hi)).collect();
    let db: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, lo, hi)).collect();
    if diagonal {
        return Ok((HermMatrix::diag(&da)?, HermMatrix::diag(&db)?));
    }
    let q = random_orthogonal(n, &mut rng);
    Ok((conjugate_diag(&q, &da), conjugate_diag(&q, &db)))
}

/// `A ≤ B` with both spectra in `[lo, hi]`: `A` in the lower half (log scale),
/// `B = A + P` with `P` positive semidefinite of norm at most the remaining room.
pub fn gen_monotone_pair(n: usize, interval: (f64, f64), seed: u64) -> Result<(HermMatrix, HermMatrix)> {
    let (lo, hi) = interval;
    check_interval(lo, hi)?;
    let mut rng = rng_from_seed(seed);
    let mid = (lo * hi).sqrt();
    let a = gen_pd_rng(n, lo, mid, &mut rng)?;
    let room = hi - eig_sym(&a)?.max();
    let d: Vec<f64> =
        (0..n).map(|_| if rng.random::<f64>() < 0.25 { 0.0 } else { room * rng.random::<f64>() }).collect();
    let q = random_orthogonal(n, &mut rng);
    let b = a.add(&conjugate_diag(&q, &d))?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichFlavor {
    /// `sA ≤ B ≤ tA`.
    Plain,
    /// `e^s A ⪯_ols B ⪯_ols e^t A`.
    Olson,
    /// Olson sandwich with additionally `A > I` (so `B > I`).
    OlsonAboveIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OlsonMode {
    /// `B = cA` with `e^s ≤ c ≤ e^t`.
    Scalar,
    /// Non-commuting pair with spectrally separated `e^s A` and `B`.
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichPair {
    pub a: HermMatrix,
    pub b: HermMatrix,
    pub s: f64,
    pub t: f64,
    pub flavor: SandwichFlavor,
    pub mode: Option<OlsonMode>,
    /// Tightest `(s, t)` observed on the Olson grid (search mode only).
    pub grid_bounds: Option<(f64, f64)>,
}

/// Plain sandwich by congruence: `B = A^{1/2} C A^{1/2}` with `spec(C) ⊂ [s, t]`.
/// When `s = t` the pair is `B = sA` exactly.
pub fn gen_sandwich(n: usize, s: f64, t: f64, seed: u64) -> Result<SandwichPair> {
    gen_sandwich_in(n, s, t, seed, false)
}

/// [`gen_sandwich`] with an optional diagonal (commuting) basis.
pub fn gen_sandwich_in(n: usize, s: f64, t: f64, seed: u64, diagonal: bool) -> Result<SandwichPair> {
    check_interval(s, t)?;
    let mut rng = rng_from_seed(seed);
    let a = gen_spd(n, PLAIN_A_INTERVAL.0, PLAIN_A_INTERVAL.1, &mut rng, diagonal)?;
    let b = if s == t {
        a.scale(s)
    } else {
        let c = gen_spd(n, s, t, &mut rng, diagonal)?;
        c.sandwich(&a.sqrt()?)?
    };
    Ok(SandwichPair { a, b, s, t, flavor: SandwichFlavor::Plain, mode: None, grid_bounds: None })
}

/// `min_r (1/r) log λ_min(A^{-r/2} B^r A^{-r/2})` and the matching max over the grid.
pub fn effective_olson_bounds(a: &HermMatrix, b: &HermMatrix, grid: &[f64]) -> Result<(f64, f64)> {
    let mut s = f64::INFINITY;
    let mut t = f64::NEG_INFINITY;
    for &r in grid {
        let ar = mat_pow(a, -r / 2.0)?;
        let br = mat_pow(b, r)?;
        let spec = eig_sym(&br.sandwich(&ar)?)?;
        s = s.min(spec.min().ln() / r);
        t = t.max(spec.max().ln() / r);
    }
    Ok((s, t))
}

/// Olson sandwich `e^s A ⪯ B ⪯ e^t A`.
///
/// Scalar mode draws `m ∈ [s, t]` and sets `B = e^m A`. Search mode needs
/// `s < t`: `A` gets a spectrum of log-width `(t − s)/2` and `B` an independent
/// eigenbasis with spectrum inside `[e^s λ_max(A), e^t λ_min(A)]`, so
/// `(e^s A)^r ≤ λ_min(B)^r ≤ B^r` (and symmetrically above) for every `r ≥ 1`.
/// Nearly commuting draws are rejected.
pub fn gen_olson_sandwich(
    n: usize,
    s: f64,
    t: f64,
    seed: u64,
    mode: OlsonMode,
    above_identity: bool,
    grid: &[f64],
) -> Result<SandwichPair> {
    gen_olson_sandwich_in(n, s, t, seed, mode, above_identity, grid, false)
}

/// [`gen_olson_sandwich`] with an optional diagonal (commuting) basis. In the
/// diagonal basis search mode skips the non-commuting rejection.
#[allow(clippy::too_many_arguments)]
pub fn gen_olson_sandwich_in(
    n: usize,
    s: f64,
    t: f64,
    seed: u64,
    mode: OlsonMode,
    above_identity: bool,
    grid: &[f64],
    diagonal: bool,
) -> Result<SandwichPair> {
    if !(s <= t) || !s.is_finite() || !t.is_finite() {
        return Err(Error::BadInterval { lo: s, hi: t });
    }
    if above_identity && !(s > 0.0) {
        return Err(Error::HypothesisViolation(format!("A > I sandwich needs s > 0, got {s}")));
    }
    let flavor = if above_identity { SandwichFlavor::OlsonAboveIdentity } else { SandwichFlavor::Olson };
    let a_lo = if above_identity { 1.05 } else { 0.5 };
    let mut rng = rng_from_seed(seed);
    match mode {
        OlsonMode::Scalar => {
            let a = gen_spd(n, a_lo, 4.0, &mut rng, diagonal)?;
            let m = s + (t - s) * rng.random::<f64>();
            let b = a.scale(m.exp());
            Ok(SandwichPair { a, b, s, t, flavor, mode: Some(mode), grid_bounds: None })
        }
        OlsonMode::Search => {
            if !(s < t) {
                return Err(Error::BadInterval { lo: s, hi: t });
            }
            let width = ((t - s) / 2.0).exp();
            for _ in 0..GENERATOR_RETRIES {
                let a = gen_spd(n, a_lo, a_lo * width, &mut rng, diagonal)?;
                let sa = eig_sym(&a)?;
                let (b_lo, b_hi) = (s.exp() * sa.max(), t.exp() * sa.min());
                let b = gen_spd(n, b_lo, b_hi, &mut rng, diagonal)?;
                if !diagonal && n > 1 && a.commutator_norm(&b)? < 1e-6 * a.max_abs() * b.max_abs() {
                    continue;
                }
                let grid_bounds = Some(effective_olson_bounds(&a, &b, grid)?);
                return Ok(SandwichPair { a, b, s, t, flavor, mode: Some(mode), grid_bounds });
            }
            Err(Error::GeneratorExhausted {
                attempts: GENERATOR_RETRIES,
                reason: "no non-commuting Olson pair found".into(),
            })
        }
    }
}
