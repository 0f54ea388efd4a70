//! Weighted operator means and the scalar constants of the reverse
//! inequalities (Specht ratio, Kantorovich constant and their combinations).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{eig_sym, mat_pow, HermMatrix, PD_ABS_TOL};

/// Below this distance from 1 the Specht ratio is evaluated by series.
pub const SPECHT_SERIES_CROSSOVER: f64 = 1e-4;

/// A weight `v ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Weight(f64);

impl Weight {
    pub fn new(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidWeight(v));
        }
        Ok(Weight(v))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 − v`.
    pub fn complement(self) -> Weight {
        Weight(1.0 - self.0)
    }

    /// `max(v, 1 − v)`.
    pub fn r_exponent(self) -> f64 {
        self.0.max(1.0 - self.0)
    }
}

impl TryFrom<f64> for Weight {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Weight::new(v)
    }
}

impl From<Weight> for f64 {
    fn from(w: Weight) -> f64 {
        w.0
    }
}

fn same_dim(a: &HermMatrix, b: &HermMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// `A ∇_v B = (1 − v)A + vB`.
pub fn arith_mean(a: &HermMatrix, b: &HermMatrix, v: Weight) -> Result<HermMatrix> {
    same_dim(a, b)?;
    match v.0 {
        0.0 => Ok(a.clone()),
        1.0 => Ok(b.clone()),
        w => a.lerp(b, w),
    }
}

/// `A !_v B = ((1 − v)A⁻¹ + vB⁻¹)⁻¹`.
pub fn harm_mean(a: &HermMatrix, b: &HermMatrix, v: Weight) -> Result<HermMatrix> {
    same_dim(a, b)?;
    let ai = a.inverse()?;
    let bi = b.inverse()?;
    match v.0 {
        0.0 => Ok(a.clone()),
        1.0 => Ok(b.clone()),
        w => ai.lerp(&bi, w)?.inverse(),
    }
}

/// `A ♯_v B = A^{1/2} (A^{-1/2} B A^{-1/2})^v A^{1/2}`.
pub fn geo_mean(a: &HermMatrix, b: &HermMatrix, v: Weight) -> Result<HermMatrix> {
    same_dim(a, b)?;
    let spec = eig_sym(a)?;
    if !(spec.min() > PD_ABS_TOL) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: spec.min() });
    }
    let bmin = eig_sym(b)?.min();
    if !(bmin > PD_ABS_TOL) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: bmin });
    }
    match v.0 {
        0.0 => Ok(a.clone()),
        1.0 => Ok(b.clone()),
        w => {
            let half = spec.map(f64::sqrt);
            let inv_half = spec.map(|l| 1.0 / l.sqrt());
            let inner = b.sandwich(&inv_half)?;
            mat_pow(&inner, w)?.sandwich(&half)
        }
    }
}

/// Specht's ratio `S(t) = t^{1/(t−1)} / (e · log t^{1/(t−1)})`, with `S(1) = 1`.
///
/// Evaluated as `exp(L − 1 − log L)` with `L = log t / (t − 1)` on
/// `max(t, 1/t)`; near `t = 1` both `L − 1` and `L − 1 − log L` come from
/// their Taylor series.
pub fn specht(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveArgument(t));
    }
    Ok(log_specht(t).exp())
}

fn log_specht(t: f64) -> f64 {
    let h = if t < 1.0 { 1.0 / t } else { t };
    let x = h - 1.0;
    if x.abs() < SPECHT_SERIES_CROSSOVER {
        // L − 1 = −x/2 + x²/3 − x³/4 + x⁴/5 − x⁵/6
        let d = x * (-1.0 / 2.0 + x * (1.0 / 3.0 + x * (-1.0 / 4.0 + x * (1.0 / 5.0 - x / 6.0))));
        // d − log(1 + d) = d²/2 − d³/3 + d⁴/4 − d⁵/5
        d * d * (1.0 / 2.0 + d * (-1.0 / 3.0 + d * (1.0 / 4.0 - d / 5.0)))
    } else {
        let l = x.ln_1p() / x;
        let d = l - 1.0;
        d - d.ln_1p()
    }
}

/// Kantorovich constant `K(h) = (h + 1)² / 4h`.
pub fn kantorovich(h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonPositiveArgument(h));
    }
    Ok((h + 1.0) * (h + 1.0) / (4.0 * h))
}

/// `μ(s, t) = max{S(s), S(t)}`.
pub fn mu(s: f64, t: f64) -> Result<f64> {
    Ok(specht(s)?.max(specht(t)?))
}

/// `S(e^{rt})^{1/r} · S(e^t)`, the constant for concave-log eigenvalue bounds
/// under an Olson sandwich with `0 < s ≤ t`.
pub fn mu_combined(r: f64, s: f64, t: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::ArgumentOutOfRange(format!("r = {r} not in (0, 1]")));
    }
    if !(s > 0.0 && s <= t) {
        return Err(Error::ArgumentOutOfRange(format!("need 0 < s <= t, got s = {s}, t = {t}")));
    }
    Ok(specht((r * t).exp())?.powf(1.0 / r) * specht(t.exp())?)
}

/// `(M, N)` with `M = μ(e^{rs}, e^{rt})^{1/r}` and `N = μ(e^s, e^t)` for an
/// Olson sandwich `e^s A ⪯ B ⪯ e^t A` (any `s ≤ t`).
pub fn olson_constants(r: f64, s: f64, t: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::ArgumentOutOfRange(format!("r = {r} not in (0, 1]")));
    }
    if !(s <= t) {
        return Err(Error::ArgumentOutOfRange(format!("need s <= t, got s = {s}, t = {t}")));
    }
    let m = mu((r * s).exp(), (r * t).exp())?.powf(1.0 / r);
    let n = mu(s.exp(), t.exp())?;
    Ok((m, n))
}

/// `max{K(s)^R, K(t)^R}` with `R = max{v, 1 − v}`.
pub fn mu_alt(s: f64, t: f64, v: Weight) -> Result<f64> {
    let r = v.r_exponent();
    Ok(kantorovich(s)?.powf(r).max(kantorovich(t)?.powf(r)))
}

/// Which reverse-inequality constant a check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantsVariant {
    Specht,
    Kantorovich,
    #[default]
    Both,
}

impl ConstantsVariant {
    pub fn uses_specht(self) -> bool {
        matches!(self, ConstantsVariant::Specht | ConstantsVariant::Both)
    }

    pub fn uses_kantorovich(self) -> bool {
        matches!(self, ConstantsVariant::Kantorovich | ConstantsVariant::Both)
    }
}

/// Sandwich scalars and every derived constant for one check instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantBundle {
    pub s: f64,
    pub t: f64,
    pub r: Option<f64>,
    pub v: f64,
    pub specht_s: f64,
    pub specht_t: f64,
    pub kantorovich_s: f64,
    pub kantorovich_t: f64,
    /// Specht-based `μ` of the multiplicative sandwich.
    pub mu: f64,
    /// Kantorovich alternative `max{K(s)^R, K(t)^R}`.
    pub mu_alt: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<f64>,
}

impl ConstantBundle {
    /// Constants for a plain sandwich `sA ≤ B ≤ tA`.
    pub fn plain(s: f64, t: f64, v: Weight) -> Result<Self> {
        check_sandwich(s, t)?;
        Ok(ConstantBundle {
            s,
            t,
            r: None,
            v: v.value(),
            specht_s: specht(s)?,
            specht_t: specht(t)?,
            kantorovich_s: kantorovich(s)?,
            kantorovich_t: kantorovich(t)?,
            mu: mu(s, t)?,
            mu_alt: mu_alt(s, t, v)?,
            big_r: v.r_exponent(),
            m: None,
            n: None,
        })
    }

    /// Constants for an Olson sandwich `e^s A ⪯ B ⪯ e^t A` with exponent `r`.
    pub fn olson(s: f64, t: f64, v: Weight, r: f64) -> Result<Self> {
        if !(s <= t) {
            return Err(Error::ArgumentOutOfRange(format!("need s <= t, got s = {s}, t = {t}")));
        }
        let (es, et) = (s.exp(), t.exp());
        let (m, n) = olson_constants(r, s, t)?;
        Ok(ConstantBundle {
            s,
            t,
            r: Some(r),
            v: v.value(),
            specht_s: specht(es)?,
            specht_t: specht(et)?,
            kantorovich_s: kantorovich(es)?,
            kantorovich_t: kantorovich(et)?,
            mu: n,
            mu_alt: mu_alt(es, et, v)?,
            big_r: v.r_exponent(),
            m: Some(m),
            n: Some(n),
        })
    }

    /// `M · N`.
    pub fn mn(&self) -> Option<f64> {
        Some(self.m? * self.n?)
    }
}

fn check_sandwich(s: f64, t: f64) -> Result<()> {
    if !(s > 0.0 && s <= t && t.is_finite()) {
        return Err(Error::ArgumentOutOfRange(format!("need 0 < s <= t, got s = {s}, t = {t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{loewner_cmp, Tolerance};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn w(v: f64) -> Weight {
        Weight::new(v).unwrap()
    }

    fn d(x: &[f64]) -> HermMatrix {
        HermMatrix::diag(x).unwrap()
    }

    #[test]
    fn weight_bounds() {
        assert!(Weight::new(-0.1).is_err());
        assert!(Weight::new(1.5).is_err());
        assert!(Weight::new(f64::NAN).is_err());
        assert_eq!(w(0.3).r_exponent(), 0.7);
        assert!(serde_json::from_str::<Weight>("2.0").is_err());
    }

    #[test]
    fn scalar_means() {
        let a = d(&[1.0, 1.0]);
        let b = d(&[3.0, 3.0]);
        assert_eq!(arith_mean(&a, &b, w(0.5)).unwrap(), d(&[2.0, 2.0]));
        let h = harm_mean(&a, &b, w(0.5)).unwrap();
        assert_abs_diff_eq!(h.get(0, 0), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h.get(1, 1), 1.5, epsilon = 1e-15);
        assert_eq!(arith_mean(&a, &b, w(0.0)).unwrap(), a);
        assert_eq!(geo_mean(&a, &b, w(0.0)).unwrap(), a);
        assert_eq!(geo_mean(&a, &b, w(1.0)).unwrap(), b);
    }

    #[test]
    fn geo_mean_commuting_and_identity() {
        let g = geo_mean(&d(&[4.0, 1.0]), &d(&[9.0, 1.0]), w(0.5)).unwrap();
        assert_abs_diff_eq!(g.get(0, 0), 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.get(1, 1), 1.0, epsilon = 1e-14);
        let a = HermMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let g = geo_mean(&a, &HermMatrix::identity(2), w(0.5)).unwrap();
        assert_abs_diff_eq!(g.get(0, 0), 1.3660254037844386, epsilon = 1e-14);
        assert_abs_diff_eq!(g.get(0, 1), 0.3660254037844386, epsilon = 1e-14);
    }

    #[test]
    fn means_reject_bad_input() {
        let a = d(&[1.0, 1.0]);
        assert!(matches!(
            arith_mean(&a, &HermMatrix::identity(3), w(0.5)),
            Err(Error::DimMismatch { .. })
        ));
        let singular = d(&[1.0, 0.0]);
        assert!(matches!(
            geo_mean(&a, &singular, w(0.5)),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            harm_mean(&singular, &a, w(0.5)),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn specht_values() {
        assert_eq!(specht(1.0).unwrap(), 1.0);
        // 40-digit mpmath evaluation of the closed formula.
        assert_relative_eq!(specht(2.0).unwrap(), 1.061475690846085977, max_relative = 1e-14);
        assert_relative_eq!(specht(10.0).unwrap(), 1.857134893345984611, max_relative = 1e-14);
        assert_relative_eq!(specht(1.5).unwrap(), 1.020715131935514388, max_relative = 1e-14);
        assert_relative_eq!(specht(0.3).unwrap(), 1.194418488252459763, max_relative = 1e-14);
        assert_eq!(specht(0.5).unwrap(), specht(2.0).unwrap());
        assert!(matches!(specht(0.0), Err(Error::NonPositiveArgument(_))));
        assert!(specht(-1.0).is_err());
    }

    #[test]
    fn specht_near_one_uses_series_continuously() {
        assert_relative_eq!(specht(1.0001).unwrap(), 1.000000001249875012, max_relative = 1e-15);
        assert_relative_eq!(specht(0.9999).unwrap(), 1.000000001250125012, max_relative = 1e-15);
        assert_relative_eq!(specht(1.00009).unwrap(), 1.000000001012408883, max_relative = 1e-15);
        let lo = specht(1.0 + SPECHT_SERIES_CROSSOVER * (1.0 - 1e-12)).unwrap();
        let hi = specht(1.0 + SPECHT_SERIES_CROSSOVER * (1.0 + 1e-12)).unwrap();
        assert!((hi - lo).abs() < 1e-10);
    }

    #[test]
    fn kantorovich_values() {
        assert_eq!(kantorovich(1.0).unwrap(), 1.0);
        assert_eq!(kantorovich(2.0).unwrap(), 1.125);
        assert_eq!(kantorovich(0.5).unwrap(), 1.125);
        assert!(kantorovich(0.0).is_err());
    }

    #[test]
    fn mu_family() {
        assert_eq!(mu(1.0, 1.0).unwrap(), 1.0);
        let c = mu_combined(1.0, 0.1, 2f64.ln()).unwrap();
        assert_relative_eq!(c, 1.126730642257175493, max_relative = 1e-12);
        assert_eq!(mu_alt(1.0, 1.0, w(0.3)).unwrap(), 1.0);
        assert!(mu_combined(0.0, 0.1, 1.0).is_err());
        assert!(mu_combined(1.5, 0.1, 1.0).is_err());
        assert!(mu_combined(0.5, 0.0, 1.0).is_err());
        let (m, n) = olson_constants(0.5, 0.2, 0.9).unwrap();
        assert_relative_eq!(m * n, mu_combined(0.5, 0.2, 0.9).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn bundle_invariants() {
        let b = ConstantBundle::plain(0.5, 3.0, w(0.25)).unwrap();
        assert!(b.mu >= 1.0);
        assert_eq!(b.big_r, 0.75);
        assert!(ConstantBundle::plain(2.0, 1.0, w(0.5)).is_err());
        let o = ConstantBundle::olson(0.1, 0.5, w(0.5), 0.5).unwrap();
        assert_eq!(o.mu, o.n.unwrap());
        assert!(o.mn().unwrap() >= 1.0);
    }

    #[test]
    fn young_chain_on_a_fixed_pair() {
        let a = HermMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let b = HermMatrix::from_rows(&[vec![1.0, -0.3], vec![-0.3, 3.0]]).unwrap();
        let tol = Tolerance::default();
        for v in [0.1, 0.5, 0.9] {
            let h = harm_mean(&a, &b, w(v)).unwrap();
            let g = geo_mean(&a, &b, w(v)).unwrap();
            let m = arith_mean(&a, &b, w(v)).unwrap();
            assert!(loewner_cmp(&h, &g, tol).unwrap().is_le());
            assert!(loewner_cmp(&g, &m, tol).unwrap().is_le());
        }
    }
}
