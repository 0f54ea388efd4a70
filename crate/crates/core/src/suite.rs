//! Executable inequality checks, their instance generators, the suite runner
//! and report replay.
//!
//! Every check is a pure function of an [`Instance`]. The runner only draws
//! instances and calls [`run_check`]; replay calls it again on a deserialized
//! instance, so a report line is reproducible bit-for-bit under the same build.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::catalog::{
    builtin_catalog, class_margin, lookup, sample_class, FunctionClass, FunctionSpec, Interval, SamplerConfig,
    DEFAULT_V_GRID,
};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, label_salt, map_trials, rng_from_seed, Execution};
use crate::generate::{
    gen_commuting_in, gen_olson_sandwich_in, gen_sandwich_in, gen_spd, OlsonMode, SandwichFlavor, SandwichPair,
    PLAIN_A_INTERVAL,
};
use crate::majorization::{
    bottomk_log_prod, log_majorization_gap, majorize, olson_leq, topk_log_prod, EigVector, DEFAULT_OLSON_GRID,
};
use crate::means::{arith_mean, geo_mean, harm_mean, mu, mu_combined, ConstantBundle, ConstantsVariant, Weight};
use crate::spectral::{apply_fn, eig_sym, loewner_cmp, loewner_margin, mat_log, mat_pow, HermMatrix, Tolerance};

/// Relative size of the determinant equality gap above which a finding is recorded.
pub const TRACE_GAP_FINDING: f64 = 1e-8;
/// Replay agreement threshold on margins.
pub const REPLAY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckId {
    YoungChain,
    ReverseYoung,
    LogMajorization,
    BourinHiai,
    ConvexlogWeakMajor,
    LogMeanReverse,
    ConcavelogEigenBound,
    AczelConcavelog,
    AczelGeodesic,
    AczelCommuting,
    GeodesicSumEig,
    MonotoneDecMu,
    TopkBound,
    BottomkReverse,
    DetCorollaries,
    /// Sampled operator-class check of a single function.
    Class(FunctionClass),
}

impl CheckId {
    /// Every inequality check run by default, in report order.
    pub const INEQUALITIES: [CheckId; 15] = [
        CheckId::YoungChain,
        CheckId::ReverseYoung,
        CheckId::LogMajorization,
        CheckId::BourinHiai,
        CheckId::ConvexlogWeakMajor,
        CheckId::LogMeanReverse,
        CheckId::ConcavelogEigenBound,
        CheckId::AczelConcavelog,
        CheckId::AczelGeodesic,
        CheckId::AczelCommuting,
        CheckId::GeodesicSumEig,
        CheckId::MonotoneDecMu,
        CheckId::TopkBound,
        CheckId::BottomkReverse,
        CheckId::DetCorollaries,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::YoungChain => "young_chain",
            CheckId::ReverseYoung => "reverse_young",
            CheckId::LogMajorization => "log_majorization",
            CheckId::BourinHiai => "bourin_hiai",
            CheckId::ConvexlogWeakMajor => "convexlog_weak_major",
            CheckId::LogMeanReverse => "log_mean_reverse",
            CheckId::ConcavelogEigenBound => "concavelog_eigen_bound",
            CheckId::AczelConcavelog => "aczel_concavelog",
            CheckId::AczelGeodesic => "aczel_geodesic",
            CheckId::AczelCommuting => "aczel_commuting",
            CheckId::GeodesicSumEig => "geodesic_sum_eig",
            CheckId::MonotoneDecMu => "monotone_dec_mu",
            CheckId::TopkBound => "topk_bound",
            CheckId::BottomkReverse => "bottomk_reverse",
            CheckId::DetCorollaries => "det_corollaries",
            CheckId::Class(c) => c.as_str(),
        }
    }

    pub fn parse(s: &str) -> Result<CheckId> {
        if let Some(c) = CheckId::INEQUALITIES.iter().find(|c| c.as_str() == s) {
            return Ok(*c);
        }
        let class = FunctionClass::parse(s).map_err(|_| Error::UnknownCheck(s.to_string()))?;
        if !class.is_operator_class() {
            return Err(Error::UnknownCheck(s.to_string()));
        }
        Ok(CheckId::Class(class))
    }

    /// Checks whose inequality carries a reverse constant.
    pub fn has_constants(&self) -> bool {
        matches!(
            self,
            CheckId::ReverseYoung
                | CheckId::LogMeanReverse
                | CheckId::ConcavelogEigenBound
                | CheckId::AczelConcavelog
                | CheckId::MonotoneDecMu
                | CheckId::TopkBound
                | CheckId::BottomkReverse
                | CheckId::DetCorollaries
        )
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for CheckId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CheckId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CheckId::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// Deliberate hypothesis or constant violations that must make a check fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    /// Reverse constants replaced by 1, as if the sandwich were degenerate.
    UnitConstants,
    /// Constant placed on the larger side of a reverse product inequality.
    PrintedForm,
    /// A function outside the required class on a commuting pair.
    WrongFunctionClass,
}

/// Everything needed to recompute a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub seed: u64,
    pub trial: usize,
    pub dim: usize,
    pub a: HermMatrix,
    pub b: HermMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function2: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flavor: Option<SandwichFlavor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<OlsonMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub olson_grid: Option<Vec<f64>>,
    /// Tightest Olson bounds observed on the grid (search-mode pairs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_bounds: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<Control>,
    #[serde(default)]
    pub expect_fail: bool,
    pub tol: Tolerance,
    pub variant: ConstantsVariant,
}

impl Instance {
    pub fn new(seed: u64, trial: usize, a: HermMatrix, b: HermMatrix, tol: Tolerance, variant: ConstantsVariant) -> Self {
        Instance {
            seed,
            trial,
            dim: a.dim(),
            a,
            b,
            v: None,
            r: None,
            p: None,
            q: None,
            k: None,
            s: None,
            t: None,
            x: None,
            function: None,
            function2: None,
            flavor: None,
            mode: None,
            olson_grid: None,
            grid_bounds: None,
            control: None,
            expect_fail: false,
            tol,
            variant,
        }
    }

    fn with_pair(mut self, pair: &SandwichPair) -> Self {
        self.s = Some(pair.s);
        self.t = Some(pair.t);
        self.flavor = Some(pair.flavor);
        self.mode = pair.mode;
        self.grid_bounds = pair.grid_bounds;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: CheckId,
    pub instance: Instance,
    pub verdict: Verdict,
    /// Minimum over the sub-inequalities; negative means violated.
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantBundle>,
    #[serde(default)]
    pub notes: String,
    /// Sub-inequality margins and auxiliary quantities.
    #[serde(default)]
    pub details: BTreeMap<String, f64>,
    /// Statement-level observations that are not failures.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<String>,
    #[serde(default)]
    pub expected_fail: bool,
}

impl CheckReport {
    /// A failure that was not expected, or an expected failure that did not happen.
    pub fn is_unexpected(&self) -> bool {
        match self.verdict {
            Verdict::Fail => !self.expected_fail,
            Verdict::Pass | Verdict::Skipped => self.expected_fail,
        }
    }
}

/// Margin accumulator for one evaluation.
#[derive(Default)]
struct Acc {
    margin: Option<f64>,
    details: BTreeMap<String, f64>,
    findings: Vec<String>,
    notes: Vec<String>,
    constants: Option<ConstantBundle>,
}

impl Acc {
    fn sub(&mut self, key: impl Into<String>, m: f64) {
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        self.margin = Some(self.margin.map_or(m, |x| x.min(m)));
        self.details.insert(key.into(), m);
    }

    fn info(&mut self, key: impl Into<String>, value: f64) {
        self.details.insert(key.into(), value);
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn need<T: Clone>(x: &Option<T>, name: &'static str) -> Result<T> {
    x.clone().ok_or(Error::MissingField(name))
}

fn need_fn<'a>(x: &'a Option<FunctionSpec>, name: &'static str) -> Result<&'a FunctionSpec> {
    x.as_ref().ok_or(Error::MissingField(name))
}

fn weight(v: f64) -> Result<Weight> {
    Weight::new(v)
}

fn rel_gap(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / 1f64.max(lhs.abs()).max(rhs.abs())
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0f64, |m, x| m.max(x.abs()))
}

/// Per-k normalized margins of `lhs_k ≤ rhs_k` (both sorted descending).
fn eig_margins(lhs: &[f64], rhs: &[f64]) -> Vec<f64> {
    let scale = 1f64.max(max_abs(lhs)).max(max_abs(rhs));
    lhs.iter().zip(rhs).map(|(l, r)| (r - l) / scale).collect()
}

/// Per-k normalized prefix-sum margins of `x ≺_w y`.
fn prefix_margins(x: &[f64], y: &[f64]) -> Vec<f64> {
    let px = EigVector::from_unsorted(x.to_vec()).prefix_sums();
    let py = EigVector::from_unsorted(y.to_vec()).prefix_sums();
    let scale = 1f64.max(max_abs(&px)).max(max_abs(&py));
    px.iter().zip(&py).map(|(a, b)| (b - a) / scale).collect()
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn eigs(a: &HermMatrix) -> Result<Vec<f64>> {
    Ok(eig_sym(a)?.eigenvalues)
}

fn verify_plain(a: &HermMatrix, b: &HermMatrix, s: f64, t: f64, tol: Tolerance) -> Result<()> {
    if !(s > 0.0 && s <= t) {
        return Err(Error::HypothesisViolation(format!("sandwich needs 0 < s <= t, got {s}, {t}")));
    }
    let lo = loewner_cmp(&a.scale(s), b, tol)?;
    let hi = loewner_cmp(b, &a.scale(t), tol)?;
    if !lo.is_le() || !hi.is_le() {
        return Err(Error::HypothesisViolation(format!(
            "sA <= B <= tA fails (margins {:e}, {:e})",
            lo.margin, hi.margin
        )));
    }
    Ok(())
}

fn verify_olson(
    a: &HermMatrix,
    b: &HermMatrix,
    s: f64,
    t: f64,
    grid: &[f64],
    above_identity: bool,
    tol: Tolerance,
) -> Result<()> {
    if !(s <= t) {
        return Err(Error::HypothesisViolation(format!("Olson sandwich needs s <= t, got {s}, {t}")));
    }
    if above_identity {
        if !(s > 0.0) {
            return Err(Error::HypothesisViolation(format!("need s > 0, got {s}")));
        }
        let m = eig_sym(a)?.min();
        if !(m > 1.0) {
            return Err(Error::HypothesisViolation(format!("A > I fails, λ_min(A) = {m}")));
        }
    }
    let lo = olson_leq(&a.scale(s.exp()), b, grid, tol)?;
    let hi = olson_leq(b, &a.scale(t.exp()), grid, tol)?;
    if !lo.holds || !hi.holds {
        return Err(Error::HypothesisViolation(format!(
            "Olson sandwich fails on the grid (margins {:e}, {:e})",
            lo.worst_margin, hi.worst_margin
        )));
    }
    Ok(())
}

fn grid_of(inst: &Instance) -> Vec<f64> {
    inst.olson_grid.clone().unwrap_or_else(|| DEFAULT_OLSON_GRID.to_vec())
}

fn unit(inst: &Instance) -> bool {
    inst.control == Some(Control::UnitConstants)
}

fn eval_young_chain(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let w = weight(need(&inst.v, "v")?)?;
    let h = harm_mean(&inst.a, &inst.b, w)?;
    let g = geo_mean(&inst.a, &inst.b, w)?;
    let ar = arith_mean(&inst.a, &inst.b, w)?;
    acc.sub("harm_le_geo", loewner_margin(&h, &g)?);
    acc.sub("geo_le_arith", loewner_margin(&g, &ar)?);
    Ok(())
}

fn eval_reverse_young(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let (a, b) = (&inst.a, &inst.b);
    let (s, t) = (need(&inst.s, "s")?, need(&inst.t, "t")?);
    let w = weight(need(&inst.v, "v")?)?;
    verify_plain(a, b, s, t, inst.tol)?;
    let cb = ConstantBundle::plain(s, t, w)?;
    let (mu_s, mu_k) = if unit(inst) { (1.0, 1.0) } else { (cb.mu, cb.mu_alt) };
    let g = geo_mean(a, b, w)?;
    let ar = arith_mean(a, b, w)?;
    if inst.variant.uses_specht() {
        acc.sub("specht", loewner_margin(&ar, &g.scale(mu_s))?);
    }
    if inst.variant.uses_kantorovich() {
        acc.sub("kantorovich", loewner_margin(&ar, &g.scale(mu_k))?);
    }
    acc.constants = Some(cb);
    Ok(())
}

fn eval_log_majorization(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let w = weight(need(&inst.v, "v")?)?;
    let gap = log_majorization_gap(&inst.a, &inst.b, w)?;
    let x = &gap.geo_log_eigenvalues;
    let y = &gap.arith_log_eigenvalues;
    let pm = prefix_margins(x, y);
    let n = pm.len();
    for (k, m) in pm[..n - 1].iter().enumerate() {
        acc.sub(format!("prefix_k{}", k + 1), *m);
    }
    if n == 1 {
        acc.sub("prefix_k1", 0.0);
    }
    let rel = pm[n - 1];
    acc.info("trace_gap", gap.trace_gap);
    acc.info("trace_gap_rel", rel);
    let full = majorize(&EigVector::from_unsorted(x.clone()), &EigVector::from_unsorted(y.clone()), inst.tol)?;
    acc.info("majorize_holds", if full.holds { 1.0 } else { 0.0 });
    if rel.abs() > TRACE_GAP_FINDING {
        acc.findings.push(format!("trace equality gap {rel:e} exceeds {TRACE_GAP_FINDING:e}"));
    }
    Ok(())
}

fn eval_bourin_hiai(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let v = need(&inst.v, "v")?;
    let g = geo_mean(&inst.a, &inst.b, weight(v)?)?;
    let n = inst.dim;
    for k in 1..=n {
        let bound = (1.0 - v) * topk_log_prod(&inst.a, k)? + v * topk_log_prod(&inst.b, k)?;
        acc.sub(format!("top_k{k}"), bound - topk_log_prod(&g, k)?);
        let bound = (1.0 - v) * bottomk_log_prod(&inst.a, k)? + v * bottomk_log_prod(&inst.b, k)?;
        acc.sub(format!("bottom_k{k}"), bottomk_log_prod(&g, k)? - bound);
    }
    let det_gap = acc.details[&format!("bottom_k{n}")];
    acc.info("det_log_gap", det_gap);
    if det_gap.abs() > TRACE_GAP_FINDING {
        acc.sub("det_equality", TRACE_GAP_FINDING - det_gap.abs());
    }
    Ok(())
}

fn eval_convexlog_weak_major(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let f = need_fn(&inst.function, "function")?;
    let w = weight(need(&inst.v, "v")?)?;
    for (name, m) in [("A", &inst.a), ("B", &inst.b)] {
        let lo = eig_sym(m)?.min();
        if !(lo > 1.0 + 1e-6) {
            return Err(Error::HypothesisViolation(format!("{name} > I fails, λ_min = {lo}")));
        }
    }
    let lhs = eigs(&apply_fn(&geo_mean(&inst.a, &inst.b, w)?, f)?)?;
    let rhs = eigs(&arith_mean(&apply_fn(&inst.a, f)?, &apply_fn(&inst.b, f)?, w)?)?;
    for (k, m) in prefix_margins(&lhs, &rhs).into_iter().enumerate() {
        acc.sub(format!("prefix_k{}", k + 1), m);
    }
    Ok(())
}

fn record_grid_bounds(inst: &Instance, acc: &mut Acc) {
    if let Some((gs, gt)) = inst.grid_bounds {
        acc.info("grid_s", gs);
        acc.info("grid_t", gt);
    }
}

fn eval_log_mean_reverse(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let (a, b) = (&inst.a, &inst.b);
    let (s, t) = (need(&inst.s, "s")?, need(&inst.t, "t")?);
    let (v, r) = (need(&inst.v, "v")?, need(&inst.r, "r")?);
    let w = weight(v)?;
    verify_olson(a, b, s, t, &grid_of(inst), false, inst.tol)?;
    let cb = ConstantBundle::olson(s, t, w, r)?;
    let mn = if unit(inst) { 1.0 } else { cb.mn().unwrap_or(1.0) };
    let lhs = eigs(&arith_mean(&mat_log(a)?, &mat_log(b)?, w)?)?;
    let rhs: Vec<f64> = eigs(&mat_log(&geo_mean(a, b, w)?)?)?.into_iter().map(|l| l + mn.ln()).collect();
    for (k, m) in eig_margins(&lhs, &rhs).into_iter().enumerate() {
        acc.sub(format!("eig_k{}", k + 1), m);
    }
    acc.info("weak_margin", min_of(&prefix_margins(&lhs, &rhs)));
    acc.info("MN", mn);
    record_grid_bounds(inst, acc);
    acc.constants = Some(cb);
    Ok(())
}

fn eval_concavelog_eigen_bound(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let (a, b) = (&inst.a, &inst.b);
    let g = need_fn(&inst.function, "function")?;
    let (s, t) = (need(&inst.s, "s")?, need(&inst.t, "t")?);
    let (v, r) = (need(&inst.v, "v")?, need(&inst.r, "r")?);
    let w = weight(v)?;
    verify_olson(a, b, s, t, &grid_of(inst), true, inst.tol)?;
    let cb = ConstantBundle::olson(s, t, w, r)?;
    let c = if unit(inst) { 1.0 } else { mu_combined(r, s, t)? };
    let lhs = eigs(&arith_mean(&apply_fn(a, g)?, &apply_fn(b, g)?, w)?)?;
    let rhs: Vec<f64> = eigs(&apply_fn(&geo_mean(a, b, w)?, g)?)?.into_iter().map(|l| c * l).collect();
    for (k, m) in eig_margins(&lhs, &rhs).into_iter().enumerate() {
        acc.sub(format!("eig_k{}", k + 1), m);
    }
    acc.info("weak_margin", min_of(&prefix_margins(&lhs, &rhs)));
    acc.info("mu_combined", c);
    record_grid_bounds(inst, acc);
    acc.constants = Some(cb);
    Ok(())
}

fn eval_aczel_concavelog(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let g = need_fn(&inst.function, "function")?;
    let (p, q) = (need(&inst.p, "p")?, need(&inst.q, "q")?);
    let (s, t, r) = (need(&inst.s, "s")?, need(&inst.t, "t")?, need(&inst.r, "r")?);
    check_conjugate(p, q)?;
    let w = weight(1.0 / q)?;
    let x = mat_pow(&inst.a, p)?;
    let y = mat_pow(&inst.b, q)?;
    verify_olson(&x, &y, s, t, &grid_of(inst), true, inst.tol)?;
    let cb = ConstantBundle::olson(s, t, w, r)?;
    let (c, n) = if unit(inst) { (1.0, 1.0) } else { (mu_combined(r, s, t)?, mu(s.exp(), t.exp())?) };
    let lhs = eigs(&geo_mean(&apply_fn(&x, g)?, &apply_fn(&y, g)?, w)?)?;
    let rhs: Vec<f64> = eigs(&apply_fn(&geo_mean(&x, &y, w)?, g)?)?.into_iter().map(|l| c * l).collect();
    for (k, m) in eig_margins(&lhs, &rhs).into_iter().enumerate() {
        acc.sub(format!("eig_k{}", k + 1), m);
    }
    acc.sub("chain_reverse_young", loewner_margin(&arith_mean(&x, &y, w)?, &geo_mean(&x, &y, w)?.scale(n))?);
    acc.sub("chain_constant", rel_gap(n, c));
    acc.info("mu_combined", c);
    acc.note("intermediate reverse Young step uses A^p ♯ B^q");
    record_grid_bounds(inst, acc);
    acc.constants = Some(cb);
    Ok(())
}

fn check_conjugate(p: f64, q: f64) -> Result<()> {
    if !(p > 1.0 && q > 1.0 && (1.0 / p + 1.0 / q - 1.0).abs() < 1e-12) {
        return Err(Error::HypothesisViolation(format!("need 1/p + 1/q = 1 with p, q > 1, got {p}, {q}")));
    }
    Ok(())
}

fn unit_vector(x: &[f64]) -> Result<DVector<f64>> {
    let v = DVector::from_column_slice(x);
    let n = v.norm();
    if !(n > 0.0) {
        return Err(Error::ArgumentOutOfRange("x must be nonzero".into()));
    }
    Ok(v / n)
}

fn eval_aczel_geodesic(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let g = need_fn(&inst.function, "function")?;
    require_class(g, FunctionClass::OpGeodesicallyConcave)?;
    let (p, q) = (need(&inst.p, "p")?, need(&inst.q, "q")?);
    check_conjugate(p, q)?;
    let xv = need(&inst.x, "x")?;
    if xv.len() != inst.dim {
        return Err(Error::LengthMismatch { left: xv.len(), right: inst.dim });
    }
    let w = weight(1.0 / q)?;
    let x = mat_pow(&inst.a, p)?;
    let y = mat_pow(&inst.b, q)?;
    let gx = apply_fn(&x, g)?;
    let gy = apply_fn(&y, g)?;
    let gm = apply_fn(&geo_mean(&x, &y, w)?, g)?;
    acc.sub("operator", loewner_margin(&geo_mean(&gx, &gy, w)?, &gm)?);
    let u: Vec<f64> = unit_vector(&xv)?.iter().copied().collect();
    let lhs = gm.quad_form(&u)?;
    let rhs = gx.quad_form(&u)?.powf(1.0 / p) * gy.quad_form(&u)?.powf(1.0 / q);
    acc.sub("vector", rel_gap(rhs, lhs));
    acc.info("geodesic_step", loewner_margin(&arith_mean(&gx, &gy, w)?, &gm)?);
    acc.note("vector form compares against <g(B^q)x, x>^(1/q); an intermediate line with g(A^q) is read as g(B^q)");
    Ok(())
}

/// Common eigenbasis of two commuting matrices: eigenvectors of `A + φB`
/// for an irrational `φ`, which separates joint eigenspaces generically.
fn joint_diagonal(a: &HermMatrix, b: &HermMatrix) -> Result<(Vec<f64>, Vec<f64>, nalgebra::DMatrix<f64>)> {
    let mix = a.add(&b.scale(0.618_033_988_749_894_9))?;
    let v = eig_sym(&mix)?.eigenvectors;
    let da = (v.transpose() * a.as_matrix() * &v).diagonal().iter().copied().collect();
    let db = (v.transpose() * b.as_matrix() * &v).diagonal().iter().copied().collect();
    Ok((da, db, v))
}

fn eval_aczel_commuting(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let (a, b) = (&inst.a, &inst.b);
    let (p, q) = (need(&inst.p, "p")?, need(&inst.q, "q")?);
    check_conjugate(p, q)?;
    let comm = a.commutator_norm(b)?;
    if comm > 1e-8 * 1f64.max(a.max_abs() * b.max_abs()) {
        return Err(Error::NotCommuting(comm));
    }
    let xv = need(&inst.x, "x")?;
    if xv.len() != inst.dim {
        return Err(Error::LengthMismatch { left: xv.len(), right: inst.dim });
    }
    let (da, db, v) = joint_diagonal(a, b)?;
    if let Some(l) = da.iter().chain(&db).find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::DomainViolation { eigenvalues: vec![*l], lo: 0.0, hi: 1.0 });
    }
    let y = v.transpose() * unit_vector(&xv)?;
    let quad = |f: &dyn Fn(usize) -> f64| -> f64 { (0..inst.dim).map(|i| f(i) * y[i] * y[i]).sum() };
    let lhs = 1.0 - quad(&|i| da[i] * db[i]);
    let ra = 1.0 - quad(&|i| da[i].powf(p));
    let rb = 1.0 - quad(&|i| db[i].powf(q));
    acc.sub("scalar", rel_gap(ra.powf(1.0 / p) * rb.powf(1.0 / q), lhs));
    acc.info("commutator", comm);
    Ok(())
}

fn eval_geodesic_sum_eig(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let g = need_fn(&inst.function, "function")?;
    if !(g.claims(FunctionClass::Increasing) && g.claims(FunctionClass::GeometricallyConvex)) {
        return Err(Error::HypothesisViolation(format!("{} is not flagged increasing and geometrically convex", g.id())));
    }
    let v = need(&inst.v, "v")?;
    let k = need(&inst.k, "k")?;
    if k == 0 || k > inst.dim {
        return Err(Error::IndexOutOfRange { index: k, len: inst.dim });
    }
    let la = eigs(&inst.a)?;
    let lb = eigs(&inst.b)?;
    let lg = eigs(&geo_mean(&inst.a, &inst.b, weight(v)?)?)?;
    for l in la.iter().chain(&lb).chain(&lg) {
        if !g.domain.contains(*l) {
            return Err(Error::DomainViolation { eigenvalues: vec![*l], lo: g.domain.lo, hi: g.domain.hi });
        }
    }
    let sum = |xs: &[f64]| -> f64 { xs[..k].iter().map(|&x| g.eval(x)).sum() };
    let (fa, fb, fg) = (sum(&la), sum(&lb), sum(&lg));
    let l1: f64 = (0..k).map(|j| g.eval(la[j].powf(1.0 - v) * lb[j].powf(v))).sum();
    let l2: f64 = (0..k).map(|j| g.eval(la[j]).powf(1.0 - v) * g.eval(lb[j]).powf(v)).sum();
    let l3 = fa.powf(1.0 - v) * fb.powf(v);
    let l4 = (1.0 - v) * fa + v * fb;
    acc.sub("geodesic", rel_gap(fg, l4));
    acc.sub("link_log_majorization", rel_gap(fg, l1));
    acc.sub("link_geometric_convexity", rel_gap(l1, l2));
    acc.sub("link_holder", rel_gap(l2, l3));
    acc.sub("link_am_gm", rel_gap(l3, l4));
    Ok(())
}

fn require_class(f: &FunctionSpec, class: FunctionClass) -> Result<()> {
    if !f.claims(class) {
        return Err(Error::HypothesisViolation(format!("{} is not flagged {class}", f.id())));
    }
    Ok(())
}

/// Specht and Kantorovich constants for a plain sandwich, or 1 for controls.
fn plain_constants(inst: &Instance, acc: &mut Acc) -> Result<(f64, f64)> {
    let (s, t) = (need(&inst.s, "s")?, need(&inst.t, "t")?);
    let w = weight(need(&inst.v, "v")?)?;
    verify_plain(&inst.a, &inst.b, s, t, inst.tol)?;
    let cb = ConstantBundle::plain(s, t, w)?;
    let c = if unit(inst) { (1.0, 1.0) } else { (cb.mu, cb.mu_alt) };
    acc.constants = Some(cb);
    Ok(c)
}

fn variants(inst: &Instance, mu_s: f64, mu_k: f64) -> Vec<(&'static str, f64)> {
    let mut out = Vec::new();
    if inst.variant.uses_specht() {
        out.push(("specht", mu_s));
    }
    if inst.variant.uses_kantorovich() {
        out.push(("kantorovich", mu_k));
    }
    out
}

fn eval_monotone_dec_mu(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let g = need_fn(&inst.function, "function")?;
    require_class(g, FunctionClass::OpMonotoneDecreasing)?;
    let (mu_s, mu_k) = plain_constants(inst, acc)?;
    let w = weight(need(&inst.v, "v")?)?;
    let lhs = apply_fn(&geo_mean(&inst.a, &inst.b, w)?, g)?;
    let gm = geo_mean(&apply_fn(&inst.a, g)?, &apply_fn(&inst.b, g)?, w)?;
    for (name, c) in variants(inst, mu_s, mu_k) {
        acc.sub(name, loewner_margin(&lhs, &gm.scale(c))?);
    }
    Ok(())
}

/// `(log ∏ λ(f(A♯B)), (1−v) log ∏ λ(f(A)) + v log ∏ λ(f(B)))` over the top or bottom `k`.
fn log_products(inst: &Instance, f: &FunctionSpec, k: usize, top: bool) -> Result<(f64, f64)> {
    let v = need(&inst.v, "v")?;
    let prod = |m: &HermMatrix| if top { topk_log_prod(m, k) } else { bottomk_log_prod(m, k) };
    let lhs = prod(&apply_fn(&geo_mean(&inst.a, &inst.b, weight(v)?)?, f)?)?;
    let rhs = (1.0 - v) * prod(&apply_fn(&inst.a, f)?)? + v * prod(&apply_fn(&inst.b, f)?)?;
    Ok((lhs, rhs))
}

fn eval_topk_bound(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let g = need_fn(&inst.function, "function")?;
    require_class(g, FunctionClass::OpMonotoneDecreasing)?;
    let k = need(&inst.k, "k")?;
    let (mu_s, mu_k) = plain_constants(inst, acc)?;
    let (lhs, base) = log_products(inst, g, k, true)?;
    for (name, c) in variants(inst, mu_s, mu_k) {
        acc.sub(name, base + k as f64 * c.ln() - lhs);
    }
    Ok(())
}

/// Reverse product bound for an operator monotone `f`: the verdict uses the
/// constant on the smaller side (`μ^{-k}`); the placement on the larger side
/// (`μ^k`) is reported alongside and recorded as a finding when it fails.
fn reverse_products(inst: &Instance, acc: &mut Acc, f: &FunctionSpec, k: usize, mu_s: f64, mu_k: f64, prefix: &str) -> Result<()> {
    let (lhs, base) = log_products(inst, f, k, false)?;
    let printed_only = inst.control == Some(Control::PrintedForm);
    for (name, c) in variants(inst, mu_s, mu_k) {
        let derived = lhs - (base - k as f64 * c.ln());
        let printed = lhs - (base + k as f64 * c.ln());
        if printed_only {
            acc.sub(format!("{prefix}printed_{name}"), printed);
        } else {
            acc.sub(format!("{prefix}{name}"), derived);
            acc.info(format!("{prefix}printed_{name}"), printed);
            if printed < -(inst.tol.rel + inst.tol.abs) {
                acc.findings.push(format!(
                    "{prefix}{name}: bound with the constant on the larger side fails (log margin {printed:e}); \
                     with the constant on the smaller side it holds"
                ));
            }
        }
    }
    Ok(())
}

fn eval_bottomk_reverse(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let f = need_fn(&inst.function, "function")?;
    require_class(f, FunctionClass::OpMonotone)?;
    let k = need(&inst.k, "k")?;
    let (mu_s, mu_k) = plain_constants(inst, acc)?;
    reverse_products(inst, acc, f, k, mu_s, mu_k, "")
}

fn eval_det_corollaries(inst: &Instance, acc: &mut Acc) -> Result<()> {
    let g = need_fn(&inst.function, "function")?;
    let f = need_fn(&inst.function2, "function2")?;
    require_class(g, FunctionClass::OpMonotoneDecreasing)?;
    require_class(f, FunctionClass::OpMonotone)?;
    let n = inst.dim;
    let (mu_s, mu_k) = plain_constants(inst, acc)?;
    if inst.control != Some(Control::PrintedForm) {
        let (lhs, base) = log_products(inst, g, n, true)?;
        for (name, c) in variants(inst, mu_s, mu_k) {
            acc.sub(format!("dec_{name}"), base + n as f64 * c.ln() - lhs);
        }
    }
    reverse_products(inst, acc, f, n, mu_s, mu_k, "inc_")
}

fn eval_class(inst: &Instance, class: FunctionClass, acc: &mut Acc) -> Result<()> {
    let f = need_fn(&inst.function, "function")?;
    acc.sub(class.as_str(), class_margin(f, class, &inst.a, &inst.b, inst.v)?);
    Ok(())
}

fn sanitize(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        f64::MIN
    } else if x == f64::INFINITY {
        f64::MAX
    } else {
        x
    }
}

/// Evaluates `check` on `inst`. Hypothesis and domain errors yield a
/// `skipped` report carrying the error message.
pub fn run_check(check: CheckId, inst: &Instance) -> CheckReport {
    let mut acc = Acc::default();
    let res = match check {
        CheckId::YoungChain => eval_young_chain(inst, &mut acc),
        CheckId::ReverseYoung => eval_reverse_young(inst, &mut acc),
        CheckId::LogMajorization => eval_log_majorization(inst, &mut acc),
        CheckId::BourinHiai => eval_bourin_hiai(inst, &mut acc),
        CheckId::ConvexlogWeakMajor => eval_convexlog_weak_major(inst, &mut acc),
        CheckId::LogMeanReverse => eval_log_mean_reverse(inst, &mut acc),
        CheckId::ConcavelogEigenBound => eval_concavelog_eigen_bound(inst, &mut acc),
        CheckId::AczelConcavelog => eval_aczel_concavelog(inst, &mut acc),
        CheckId::AczelGeodesic => eval_aczel_geodesic(inst, &mut acc),
        CheckId::AczelCommuting => eval_aczel_commuting(inst, &mut acc),
        CheckId::GeodesicSumEig => eval_geodesic_sum_eig(inst, &mut acc),
        CheckId::MonotoneDecMu => eval_monotone_dec_mu(inst, &mut acc),
        CheckId::TopkBound => eval_topk_bound(inst, &mut acc),
        CheckId::BottomkReverse => eval_bottomk_reverse(inst, &mut acc),
        CheckId::DetCorollaries => eval_det_corollaries(inst, &mut acc),
        CheckId::Class(c) => eval_class(inst, c, &mut acc),
    };
    let expected_fail = inst.expect_fail || inst.control.is_some();
    if let Some(c) = inst.control {
        acc.note(match c {
            Control::UnitConstants => "negative control: constants replaced by 1",
            Control::PrintedForm => "negative control: constant on the larger side",
            Control::WrongFunctionClass => "negative control: function outside the hypothesis class",
        });
    }
    let (verdict, margin) = match (res, acc.margin) {
        (Err(e), _) => {
            acc.note(format!("skipped: {e}"));
            (Verdict::Skipped, 0.0)
        }
        (Ok(()), None) => {
            acc.note("skipped: no sub-inequality evaluated");
            (Verdict::Skipped, 0.0)
        }
        (Ok(()), Some(m)) => {
            let m = sanitize(m);
            let pass = m >= -(inst.tol.rel + inst.tol.abs);
            (if pass { Verdict::Pass } else { Verdict::Fail }, m)
        }
    };
    let details = acc.details.into_iter().map(|(k, v)| (k, sanitize(v))).collect();
    CheckReport {
        check_id: check,
        instance: inst.clone(),
        verdict,
        margin,
        constants: acc.constants,
        notes: acc.notes.join("; "),
        details,
        findings: acc.findings,
        expected_fail,
    }
}

/// A sampled operator-class check requested in the suite config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassCheckSpec {
    /// Catalog id or name, or an inline formula in `t`.
    pub function: String,
    /// Domain for inline formulas; defaults to `(0, ∞)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Interval>,
    pub class: FunctionClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default)]
    pub expect_fail: bool,
}

/// Resolves a catalog key or an inline formula.
pub fn resolve_function(catalog: &[FunctionSpec], key: &str, domain: Option<Interval>) -> Result<FunctionSpec> {
    match lookup(catalog, key) {
        Ok(f) if domain.is_none() => Ok(f),
        Ok(f) => FunctionSpec::new(f.name.clone(), f.params.clone(), domain.unwrap(), f.formula.clone(), f.flags.clone()),
        Err(_) => match crate::expr::Expr::parse(key) {
            Ok(_) => FunctionSpec::inline(key, domain.unwrap_or_else(Interval::positive)),
            Err(Error::Parse { .. }) if key.chars().all(|c| c.is_alphanumeric() || "_[]=.,-".contains(c)) => {
                Err(Error::UnknownFunction(key.to_string()))
            }
            Err(e) => Err(e),
        },
    }
}

fn default_trials() -> usize {
    1000
}

fn default_dims() -> Vec<usize> {
    vec![2, 3, 4, 6]
}

fn default_v_grid() -> Vec<f64> {
    DEFAULT_V_GRID.to_vec()
}

fn default_r_grid() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

fn default_pq() -> Vec<(f64, f64)> {
    vec![(2.0, 2.0), (3.0, 1.5), (4.0, 4.0 / 3.0)]
}

fn default_tol_rel() -> f64 {
    Tolerance::default().rel
}

fn default_tol_abs() -> f64 {
    Tolerance::default().abs
}

fn default_olson_grid() -> Vec<f64> {
    DEFAULT_OLSON_GRID.to_vec()
}

fn default_true() -> bool {
    true
}

fn default_controls() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Checks to run; all inequality checks when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckId>>,
    /// Trials per check, spread round-robin over `dims`.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Per-check trial overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub trials_per_check: BTreeMap<CheckId, usize>,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_v_grid")]
    pub v_grid: Vec<f64>,
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
    #[serde(default = "default_pq")]
    pub pq_pairs: Vec<(f64, f64)>,
    #[serde(default = "default_olson_grid")]
    pub olson_grid: Vec<f64>,
    #[serde(default = "default_tol_rel")]
    pub tol_rel: f64,
    #[serde(default = "default_tol_abs")]
    pub tol_abs: f64,
    #[serde(default)]
    pub constants_variant: ConstantsVariant,
    /// Per-check function list overrides (catalog ids).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<CheckId, Vec<String>>,
    /// Negative controls per constant-bearing check.
    #[serde(default = "default_controls")]
    pub controls: usize,
    /// Draw simultaneously diagonal instances only (no controls).
    #[serde(default)]
    pub commuting: bool,
    /// Include the sampled operator-class checks in `classify`.
    #[serde(default = "default_true")]
    pub run_classify: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classify: Vec<ClassCheckSpec>,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

impl SuiteConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: SuiteConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be nonempty positive integers".into());
        }
        if self.v_grid.is_empty() || self.v_grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return bad("v_grid entries must lie in [0, 1]".into());
        }
        if self.r_grid.is_empty() || self.r_grid.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return bad("r_grid entries must lie in (0, 1]".into());
        }
        if self.olson_grid.is_empty() || self.olson_grid.iter().any(|r| !(*r >= 1.0)) || !self.olson_grid.contains(&1.0) {
            return bad("olson_grid must contain 1 and only exponents >= 1".into());
        }
        if self.pq_pairs.is_empty() || self.pq_pairs.iter().any(|&(p, q)| check_conjugate(p, q).is_err()) {
            return bad("pq_pairs must satisfy 1/p + 1/q = 1 with p, q > 1".into());
        }
        Tolerance::new(self.tol_rel, self.tol_abs).map_err(|e| Error::Config(e.to_string()))?;
        let catalog = builtin_catalog();
        for (check, names) in &self.functions {
            for name in names {
                let f = lookup(&catalog, name).map_err(|e| Error::Config(format!("{check}: {e}")))?;
                let _ = f;
            }
        }
        for c in &self.classify {
            resolve_function(&catalog, &c.function, c.domain).map_err(|e| Error::Config(e.to_string()))?;
            if !c.class.is_operator_class() {
                return bad(format!("{} is a scalar class; use classify instead", c.class));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance { rel: self.tol_rel, abs: self.tol_abs }
    }

    pub fn enabled(&self) -> Vec<CheckId> {
        self.checks.clone().unwrap_or_else(|| CheckId::INEQUALITIES.to_vec())
    }

    pub fn trials_for(&self, check: CheckId) -> usize {
        self.trials_per_check.get(&check).copied().unwrap_or(self.trials)
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.random_range(0..xs.len())]
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    crate::generate::log_uniform(rng, lo, hi)
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Default catalog ids used by each function-parameterized check.
pub fn default_functions(check: CheckId) -> Vec<String> {
    let ids: &[&str] = match check {
        CheckId::ConvexlogWeakMajor => &["log_pow[p=-1]", "log_pow[p=-0.5]", "log_pow[p=1]", "log_pow[p=1.5]", "log_pow[p=2]"],
        CheckId::ConcavelogEigenBound | CheckId::AczelConcavelog => &["log_pow[p=1]", "log_pow[p=0.5]", "log_pow[p=0.7]"],
        CheckId::AczelGeodesic => &[
            "one_minus_t",
            "a_minus_t[a=2]",
            "a_minus_t[a=5]",
            "a_minus_inv_t[a=2]",
            "a_minus_inv_t[a=5]",
        ],
        CheckId::GeodesicSumEig => &["t", "power[p=0.5]", "power[p=2]", "power[p=3]", "exp"],
        CheckId::MonotoneDecMu | CheckId::TopkBound | CheckId::DetCorollaries => {
            &["reciprocal", "inv_a_plus_t[a=1]", "inv_a_plus_t[a=2]", "inv_a_plus_t[a=5]"]
        }
        CheckId::BottomkReverse => &["t", "power[p=0.3]", "power[p=0.5]", "log_one_plus_t", "t_over_one_plus_t"],
        _ => &[],
    };
    ids.iter().map(|s| s.to_string()).collect()
}

/// Functions paired with `function` in the two-function determinant check.
pub fn default_functions2() -> Vec<String> {
    default_functions(CheckId::BottomkReverse)
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    catalog: &'a [FunctionSpec],
}

impl Ctx<'_> {
    fn functions(&self, check: CheckId) -> Result<Vec<FunctionSpec>> {
        let ids = self.cfg.functions.get(&check).cloned().unwrap_or_else(|| default_functions(check));
        ids.iter().map(|id| lookup(self.catalog, id)).collect()
    }

    fn base(&self, seed: u64, trial: usize, a: HermMatrix, b: HermMatrix) -> Instance {
        Instance::new(seed, trial, a, b, self.cfg.tolerance(), self.cfg.constants_variant)
    }

    fn plain_pair(&self, rng: &mut ChaCha8Rng, n: usize, seed: u64) -> Result<SandwichPair> {
        let s = log_uniform(rng, 0.2, 1.0);
        let t = if rng.random_bool(0.1) { s } else { s * log_uniform(rng, 1.0, 8.0) };
        gen_sandwich_in(n, s, t, seed, self.cfg.commuting)
    }

    fn olson_pair(&self, rng: &mut ChaCha8Rng, n: usize, seed: u64, above: bool, force_search: bool) -> Result<SandwichPair> {
        let s = if above { log_uniform(rng, 1e-3, 0.5) } else { rng.random_range(-0.5..0.5) };
        let search = force_search || rng.random_bool(0.5);
        let t = if !search && rng.random_bool(0.2) { s } else { s + rng.random_range(0.05..1.5) };
        let mode = if search { OlsonMode::Search } else { OlsonMode::Scalar };
        gen_olson_sandwich_in(n, s, t, seed, mode, above, &self.cfg.olson_grid, self.cfg.commuting)
    }

    fn pd(&self, rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Result<HermMatrix> {
        gen_spd(n, lo, hi, rng, self.cfg.commuting)
    }

    /// Draws the instance for trial `trial` (or control `trial` when `control` is set).
    fn instance(&self, check: CheckId, trial: usize, control: Option<Control>) -> Result<Instance> {
        let dims = &self.cfg.dims;
        let n = dims[trial % dims.len()];
        let path: Vec<u64> = match control {
            None => vec![label_salt(check.as_str()), trial as u64],
            Some(_) => vec![label_salt(check.as_str()), label_salt("control"), trial as u64],
        };
        let seed = derive_seed(self.cfg.seed, &path);
        let mut rng = rng_from_seed(seed);
        let sub = derive_seed(seed, &[1]);
        let v = if control.is_some() { 0.5 } else { *pick(&mut rng, &self.cfg.v_grid) };
        let r = *pick(&mut rng, &self.cfg.r_grid);
        let (p, q) = *pick(&mut rng, &self.cfg.pq_pairs);
        let k = rng.random_range(1..=n);
        let fns = self.functions(check)?;
        let f = if fns.is_empty() { None } else { Some(pick(&mut rng, &fns).clone()) };
        let wide = (0.1, 10.0);
        let mut inst = match check {
            CheckId::YoungChain | CheckId::LogMajorization | CheckId::BourinHiai => {
                let a = self.pd(&mut rng, n, wide.0, wide.1)?;
                let b = self.pd(&mut rng, n, wide.0, wide.1)?;
                self.base(seed, trial, a, b)
            }
            CheckId::ConvexlogWeakMajor => {
                let a = self.pd(&mut rng, n, 1.01, 50.0)?;
                let b = self.pd(&mut rng, n, 1.01, 50.0)?;
                self.base(seed, trial, a, b)
            }
            CheckId::GeodesicSumEig => {
                let a = self.pd(&mut rng, n, PLAIN_A_INTERVAL.0, PLAIN_A_INTERVAL.1)?;
                let b = self.pd(&mut rng, n, PLAIN_A_INTERVAL.0, PLAIN_A_INTERVAL.1)?;
                let mut i = self.base(seed, trial, a, b);
                i.k = Some(k);
                i
            }
            CheckId::ReverseYoung
            | CheckId::MonotoneDecMu
            | CheckId::TopkBound
            | CheckId::BottomkReverse
            | CheckId::DetCorollaries => {
                let pair = match control {
                    // Commuting pair B = 4A: every constant-free version is strict.
                    Some(_) if check != CheckId::ReverseYoung => gen_sandwich_in(n, 4.0, 4.0, sub, false)?,
                    Some(_) => gen_sandwich_in(n, 0.5, 4.0, sub, false)?,
                    None => self.plain_pair(&mut rng, n, sub)?,
                };
                let mut i = self.base(seed, trial, pair.a.clone(), pair.b.clone()).with_pair(&pair);
                if matches!(check, CheckId::TopkBound | CheckId::BottomkReverse) {
                    i.k = Some(k);
                }
                if check == CheckId::DetCorollaries {
                    let f2 = default_functions2();
                    i.function2 = Some(lookup(self.catalog, pick(&mut rng, &f2))?);
                }
                i
            }
            CheckId::LogMeanReverse | CheckId::ConcavelogEigenBound => {
                let above = check == CheckId::ConcavelogEigenBound;
                let pair = if control == Some(Control::WrongFunctionClass) {
                    // Spectrum close to 1 keeps the (log t)^2 violation above what μ_combined absorbs.
                    let a = gen_spd(n, 1.05, 1.6, &mut rng_from_seed(sub), true)?;
                    let b = a.scale(0.5f64.exp());
                    SandwichPair {
                        a,
                        b,
                        s: 0.5,
                        t: 0.5,
                        flavor: SandwichFlavor::OlsonAboveIdentity,
                        mode: Some(OlsonMode::Scalar),
                        grid_bounds: None,
                    }
                } else {
                    self.olson_pair(&mut rng, n, sub, above, control.is_some())?
                };
                let mut i = self.base(seed, trial, pair.a.clone(), pair.b.clone()).with_pair(&pair);
                i.r = Some(r);
                i.olson_grid = Some(self.cfg.olson_grid.clone());
                i
            }
            CheckId::AczelConcavelog => {
                let pair = self.olson_pair(&mut rng, n, sub, true, control.is_some())?;
                let a = mat_pow(&pair.a, 1.0 / p)?;
                let b = mat_pow(&pair.b, 1.0 / q)?;
                let mut i = self.base(seed, trial, a, b).with_pair(&pair);
                i.r = Some(r);
                i.olson_grid = Some(self.cfg.olson_grid.clone());
                i
            }
            CheckId::AczelGeodesic => {
                let g = f.clone().ok_or(Error::MissingField("function"))?;
                let (lo, hi) = g.domain.sampling_range();
                let x = self.pd(&mut rng, n, lo, hi)?;
                let y = self.pd(&mut rng, n, lo, hi)?;
                let mut i = self.base(seed, trial, mat_pow(&x, 1.0 / p)?, mat_pow(&y, 1.0 / q)?);
                i.x = Some(gaussian_vector(&mut rng, n));
                i
            }
            CheckId::AczelCommuting => {
                let (a, b) = gen_commuting_in(n, (0.05, 0.95), sub, self.cfg.commuting)?;
                let mut i = self.base(seed, trial, a, b);
                i.x = Some(gaussian_vector(&mut rng, n));
                i
            }
            CheckId::Class(_) => return Err(Error::UnknownCheck(check.to_string())),
        };
        inst.dim = n;
        inst.function = match (check, control) {
            (CheckId::MonotoneDecMu | CheckId::TopkBound, Some(_)) => Some(lookup(self.catalog, "inv_a_plus_t[a=1]")?),
            (CheckId::BottomkReverse, Some(_)) => Some(lookup(self.catalog, "t")?),
            (CheckId::ConcavelogEigenBound, Some(_)) => Some(lookup(self.catalog, "log_pow[p=2]")?),
            _ => f,
        };
        if check == CheckId::DetCorollaries && control.is_some() {
            inst.function2 = Some(lookup(self.catalog, "t")?);
        }
        if matches!(check, CheckId::AczelGeodesic | CheckId::AczelCommuting | CheckId::AczelConcavelog) {
            inst.p = Some(p);
            inst.q = Some(q);
        } else {
            inst.v = Some(v);
        }
        inst.control = control;
        Ok(inst)
    }
}

/// Control kind used for a constant-bearing check.
pub fn control_for(check: CheckId) -> Option<Control> {
    match check {
        CheckId::BottomkReverse | CheckId::DetCorollaries => Some(Control::PrintedForm),
        CheckId::ConcavelogEigenBound => Some(Control::WrongFunctionClass),
        c if c.has_constants() => Some(Control::UnitConstants),
        _ => None,
    }
}

fn skipped(check: CheckId, seed: u64, trial: usize, tol: Tolerance, variant: ConstantsVariant, e: Error) -> CheckReport {
    let z = HermMatrix::identity(1);
    let inst = Instance::new(seed, trial, z.clone(), z, tol, variant);
    CheckReport {
        check_id: check,
        instance: inst,
        verdict: Verdict::Skipped,
        margin: 0.0,
        constants: None,
        notes: format!("generation failed: {e}"),
        details: BTreeMap::new(),
        findings: Vec::new(),
        expected_fail: false,
    }
}

/// Aggregate of all reports of one check id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check_id: CheckId,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub controls: usize,
    pub controls_fired: usize,
    pub unexpected: usize,
    /// Worst margin over non-control reports.
    pub worst_margin: Option<f64>,
    pub worst_seed: Option<u64>,
    pub worst_trial: Option<usize>,
    pub findings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckSummary>,
    pub total: usize,
    pub unexpected: usize,
    pub expected_failures: usize,
    pub skipped: usize,
    pub findings: usize,
}

impl SuiteReport {
    pub fn from_reports(config: &SuiteConfig, reports: &[CheckReport]) -> SuiteReport {
        let mut by: BTreeMap<CheckId, CheckSummary> = BTreeMap::new();
        for r in reports {
            let s = by.entry(r.check_id).or_insert(CheckSummary {
                check_id: r.check_id,
                trials: 0,
                passed: 0,
                failed: 0,
                skipped: 0,
                controls: 0,
                controls_fired: 0,
                unexpected: 0,
                worst_margin: None,
                worst_seed: None,
                worst_trial: None,
                findings: 0,
            });
            if r.expected_fail {
                s.controls += 1;
                if r.verdict == Verdict::Fail {
                    s.controls_fired += 1;
                }
            } else {
                s.trials += 1;
                match r.verdict {
                    Verdict::Pass => s.passed += 1,
                    Verdict::Fail => s.failed += 1,
                    Verdict::Skipped => s.skipped += 1,
                }
                if r.verdict != Verdict::Skipped && s.worst_margin.is_none_or(|w| r.margin < w) {
                    s.worst_margin = Some(r.margin);
                    s.worst_seed = Some(r.instance.seed);
                    s.worst_trial = Some(r.instance.trial);
                }
            }
            if r.is_unexpected() {
                s.unexpected += 1;
            }
            s.findings += r.findings.len();
        }
        let mut checks: Vec<CheckSummary> = by.into_values().collect();
        checks.sort_by(|a, b| a.check_id.as_str().cmp(b.check_id.as_str()));
        SuiteReport {
            config: config.clone(),
            total: reports.len(),
            unexpected: checks.iter().map(|c| c.unexpected).sum(),
            expected_failures: checks.iter().map(|c| c.controls_fired).sum(),
            skipped: checks.iter().map(|c| c.skipped).sum(),
            findings: checks.iter().map(|c| c.findings).sum(),
            checks,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub reports: Vec<CheckReport>,
    pub summary: SuiteReport,
}

/// Runs one sampled class check from the config.
pub fn run_class_check(cfg: &SuiteConfig, catalog: &[FunctionSpec], spec: &ClassCheckSpec) -> Result<CheckReport> {
    let f = resolve_function(catalog, &spec.function, spec.domain)?;
    let scfg = SamplerConfig {
        n: spec.n.unwrap_or(2),
        trials: spec.trials.unwrap_or(cfg.trials),
        seed: derive_seed(cfg.seed, &[label_salt("classify"), label_salt(&f.id())]),
        v_grid: cfg.v_grid.clone(),
        tol: cfg.tolerance(),
        exec: cfg.execution,
        commuting: cfg.commuting,
    };
    let verdict = sample_class(&f, spec.class, &scfg)?;
    let w = verdict.worst.clone().ok_or(Error::MissingField("worst"))?;
    let mut inst = Instance::new(w.seed, w.trial, w.a, w.b, cfg.tolerance(), cfg.constants_variant);
    inst.v = w.v;
    inst.function = Some(f);
    inst.expect_fail = spec.expect_fail;
    let mut rep = run_check(CheckId::Class(spec.class), &inst);
    rep.details.insert("trials".into(), verdict.trials as f64);
    if let Some(i) = verdict.first_failure {
        rep.details.insert("first_failure".into(), i as f64);
    }
    Ok(rep)
}

/// Runs every enabled check. Reports are sorted by check id, then seed.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteRun> {
    cfg.validate()?;
    let catalog = builtin_catalog();
    let ctx = Ctx { cfg, catalog: &catalog };
    let mut jobs: Vec<(CheckId, usize, Option<Control>)> = Vec::new();
    for check in cfg.enabled() {
        if let CheckId::Class(_) = check {
            continue;
        }
        for i in 0..cfg.trials_for(check) {
            jobs.push((check, i, None));
        }
        if !cfg.commuting {
            if let Some(c) = control_for(check) {
                for i in 0..cfg.controls {
                    jobs.push((check, i, Some(c)));
                }
            }
        }
    }
    let tol = cfg.tolerance();
    let mut reports = map_trials(jobs.len(), cfg.execution, |j| {
        let (check, trial, control) = jobs[j];
        match ctx.instance(check, trial, control) {
            Ok(inst) => run_check(check, &inst),
            Err(e) => skipped(check, cfg.seed, trial, tol, cfg.constants_variant, e),
        }
    });
    if cfg.run_classify {
        for spec in &cfg.classify {
            reports.push(run_class_check(cfg, &catalog, spec)?);
        }
    }
    reports.sort_by(|a, b| {
        (a.check_id.as_str(), a.instance.seed, a.instance.trial).cmp(&(b.check_id.as_str(), b.instance.seed, b.instance.trial))
    });
    let summary = SuiteReport::from_reports(cfg, &reports);
    Ok(SuiteRun { reports, summary })
}

/// Outcome of replaying one report line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub check_id: CheckId,
    pub original_verdict: Verdict,
    pub replayed_verdict: Verdict,
    pub original_margin: f64,
    pub replayed_margin: f64,
    pub matches: bool,
}

pub fn replay(report: &CheckReport) -> ReplayOutcome {
    let again = run_check(report.check_id, &report.instance);
    let diff = (again.margin - report.margin).abs();
    ReplayOutcome {
        check_id: report.check_id,
        original_verdict: report.verdict,
        replayed_verdict: again.verdict,
        original_margin: report.margin,
        replayed_margin: again.margin,
        matches: again.verdict == report.verdict && diff <= REPLAY_TOL,
    }
}

/// Parses a JSON report line and replays it.
pub fn replay_line(line: &str) -> Result<ReplayOutcome> {
    let report: CheckReport = serde_json::from_str(line).map_err(|e| Error::Config(format!("bad report line: {e}")))?;
    Ok(replay(&report))
}
