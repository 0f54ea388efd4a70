//! Named scalar functions with domains and operator-class claims, the
//! adjoint / reciprocal / reflection transforms, and sampled classifiers for
//! each class.
//!
//! Claims and sampled verdicts are kept apart: a claim records what is known
//! about a function, a [`SampleVerdict`] records what randomized testing
//! observed. [`audit_catalog`] compares the two.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{derive_seed, label_salt, map_trials, rng_from_seed, Execution};
use crate::expr::Expr;
use crate::generate::gen_spd;
use crate::means::{arith_mean, geo_mean, harm_mean, Weight};
use crate::spectral::{apply_fn, eig_sym, loewner_margin, mat_exp, mat_log, HermMatrix, Tolerance};

/// Weights used by the sampled classifiers.
pub const DEFAULT_V_GRID: [f64; 7] = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0];
/// Values of the shift parameter `a` instantiated in the catalog.
pub const DEFAULT_A_VALUES: [f64; 3] = [1.0, 2.0, 5.0];
pub const LOG_POW_EXPONENTS: [f64; 7] = [-1.0, -0.5, 0.5, 0.7, 1.0, 1.5, 2.0];
pub const POWER_EXPONENTS: [f64; 4] = [0.3, 0.5, 2.0, 3.0];
/// Fraction of a finite domain trimmed from each end before sampling.
pub const DOMAIN_SHRINK: f64 = 0.05;
/// Upper end of the sampling range on unbounded domains.
pub const UNBOUNDED_SPAN: f64 = 20.0;

/// An open interval `(lo, hi)` with `0 ≤ lo < hi ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntervalRepr", into = "IntervalRepr")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    lo: f64,
    hi: Option<f64>,
}

impl TryFrom<IntervalRepr> for Interval {
    type Error = Error;

    fn try_from(r: IntervalRepr) -> Result<Self> {
        Interval::new(r.lo, r.hi.unwrap_or(f64::INFINITY))
    }
}

impl From<Interval> for IntervalRepr {
    fn from(i: Interval) -> Self {
        IntervalRepr { lo: i.lo, hi: i.hi.is_finite().then_some(i.hi) }
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo < hi && lo.is_finite() && !hi.is_nan()) {
            return Err(Error::EmptyDomain { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn positive() -> Self {
        Interval { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Image under `x ↦ 1/x`.
    pub fn reflect(&self) -> Interval {
        let lo = if self.hi.is_infinite() { 0.0 } else { 1.0 / self.hi };
        let hi = if self.lo == 0.0 { f64::INFINITY } else { 1.0 / self.lo };
        Interval { lo, hi }
    }

    pub fn intersect(&self, other: &Interval) -> Result<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Closed range used for drawing eigenvalues: finite domains lose 5% of
    /// their width at each end, `(0, ∞)` becomes `[0.05, 20]` and `(lo, ∞)`
    /// becomes `[1.05·lo, max(20, 20·lo)]`.
    pub fn sampling_range(&self) -> (f64, f64) {
        if self.hi.is_finite() {
            let w = self.hi - self.lo;
            (self.lo + DOMAIN_SHRINK * w, self.hi - DOMAIN_SHRINK * w)
        } else if self.lo == 0.0 {
            (DOMAIN_SHRINK, UNBOUNDED_SPAN)
        } else {
            ((1.0 + DOMAIN_SHRINK) * self.lo, UNBOUNDED_SPAN.max(UNBOUNDED_SPAN * self.lo))
        }
    }

    /// `count` log-spaced points covering the sampling range.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.sampling_range();
        if count <= 1 {
            return vec![(lo * hi).sqrt()];
        }
        let (a, b) = (lo.ln(), hi.ln());
        (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.hi.is_infinite() {
            write!(f, "({}, inf)", self.lo)
        } else {
            write!(f, "({}, {})", self.lo, self.hi)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionClass {
    OpMonotone,
    OpMonotoneDecreasing,
    OpConvex,
    OpConcave,
    OpGeodesicallyConvex,
    OpGeodesicallyConcave,
    /// `f(t) = h(log t)` with `h` operator convex.
    ConvexLog,
    /// `f(t) = φ(log t)` with `φ` operator concave.
    ConcaveLog,
    /// `f(t) = h(log t)` with `h` convex (scalar sense).
    ScalarConvexLog,
    /// `f(a^{1−v} b^v) ≤ f(a)^{1−v} f(b)^v`.
    GeometricallyConvex,
    Increasing,
    Decreasing,
}

impl FunctionClass {
    pub const ALL: [FunctionClass; 12] = [
        FunctionClass::OpMonotone,
        FunctionClass::OpMonotoneDecreasing,
        FunctionClass::OpConvex,
        FunctionClass::OpConcave,
        FunctionClass::OpGeodesicallyConvex,
        FunctionClass::OpGeodesicallyConcave,
        FunctionClass::ConvexLog,
        FunctionClass::ConcaveLog,
        FunctionClass::ScalarConvexLog,
        FunctionClass::GeometricallyConvex,
        FunctionClass::Increasing,
        FunctionClass::Decreasing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FunctionClass::OpMonotone => "op_monotone",
            FunctionClass::OpMonotoneDecreasing => "op_monotone_decreasing",
            FunctionClass::OpConvex => "op_convex",
            FunctionClass::OpConcave => "op_concave",
            FunctionClass::OpGeodesicallyConvex => "op_geodesically_convex",
            FunctionClass::OpGeodesicallyConcave => "op_geodesically_concave",
            FunctionClass::ConvexLog => "convex_log",
            FunctionClass::ConcaveLog => "concave_log",
            FunctionClass::ScalarConvexLog => "scalar_convex_log",
            FunctionClass::GeometricallyConvex => "geometrically_convex",
            FunctionClass::Increasing => "increasing",
            FunctionClass::Decreasing => "decreasing",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        FunctionClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCheck(s.to_string()))
    }

    /// Classes decided on matrices rather than on a scalar grid.
    pub fn is_operator_class(self) -> bool {
        !matches!(
            self,
            FunctionClass::ScalarConvexLog
                | FunctionClass::GeometricallyConvex
                | FunctionClass::Increasing
                | FunctionClass::Decreasing
        )
    }

    fn uses_weight(self) -> bool {
        self.is_operator_class()
            && !matches!(self, FunctionClass::OpMonotone | FunctionClass::OpMonotoneDecreasing)
    }
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    ClaimedTrue,
    ClaimedFalse,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub status: ClaimStatus,
    /// Why the claim holds; required for `claimed_true`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
}

impl Claim {
    pub fn yes(citation: &str) -> Claim {
        Claim { status: ClaimStatus::ClaimedTrue, citation: Some(citation.to_string()) }
    }

    pub fn no(citation: &str) -> Claim {
        Claim { status: ClaimStatus::ClaimedFalse, citation: Some(citation.to_string()) }
    }
}

pub type Flags = BTreeMap<FunctionClass, Claim>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    pub domain: Interval,
    pub formula: Expr,
    #[serde(default)]
    pub flags: Flags,
}

impl FunctionSpec {
    /// Validates that the formula is finite on a 100-point grid inside the
    /// domain and that every `claimed_true` flag carries a citation.
    pub fn new(
        name: impl Into<String>,
        params: BTreeMap<String, f64>,
        domain: Interval,
        formula: Expr,
        flags: Flags,
    ) -> Result<Self> {
        let f = FunctionSpec { name: name.into(), params, domain, formula, flags };
        f.validate()?;
        Ok(f)
    }

    /// A function given only by a formula, with no claims.
    pub fn inline(formula: &str, domain: Interval) -> Result<Self> {
        let expr = Expr::parse(formula)?;
        FunctionSpec::new(expr.to_string(), BTreeMap::new(), domain, expr, Flags::new())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(x) = self.domain.grid(100).into_iter().find(|&x| !self.eval(x).is_finite()) {
            return Err(Error::ZeroDivision { name: self.id(), at: x });
        }
        for claim in self.flags.values() {
            if claim.status == ClaimStatus::ClaimedTrue && claim.citation.as_deref().is_none_or(str::is_empty) {
                return Err(Error::MissingField("citation"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.formula.eval(t)
    }

    /// Name plus parameter values, unique within the builtin catalog.
    pub fn id(&self) -> String {
        if self.params.is_empty() {
            return self.name.clone();
        }
        let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}]", self.name, ps.join(","))
    }

    pub fn claim(&self, class: FunctionClass) -> ClaimStatus {
        self.flags.get(&class).map_or(ClaimStatus::Unknown, |c| c.status)
    }

    pub fn claims(&self, class: FunctionClass) -> bool {
        self.claim(class) == ClaimStatus::ClaimedTrue
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    fn min_on_grid(&self) -> f64 {
        self.domain.grid(100).into_iter().map(|x| self.eval(x)).fold(f64::INFINITY, f64::min)
    }

    /// Errors with `ZeroDivision` if `f` vanishes or changes sign on the
    /// sampling grid.
    fn require_nonvanishing(&self) -> Result<()> {
        let grid = self.domain.grid(100);
        let mut prev: Option<(f64, f64)> = None;
        for x in grid {
            let y = self.eval(x);
            if y == 0.0 {
                return Err(Error::ZeroDivision { name: self.id(), at: x });
            }
            if let Some((px, py)) = prev {
                if py.signum() != y.signum() {
                    return Err(Error::ZeroDivision { name: self.id(), at: 0.5 * (px + x) });
                }
            }
            prev = Some((x, y));
        }
        Ok(())
    }
}

fn flags(entries: &[(FunctionClass, Claim)]) -> Flags {
    entries.iter().cloned().collect()
}

fn params(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

const YOUNG: &str = "Young inequality for the weighted geometric mean";
const MONO_CONVEX: &str = "nonnegative, operator monotone and operator convex";
const MONO_DEC_CONCAVE: &str = "operator monotone decreasing and operator concave";
const INVERSE_MEAN: &str = "inverse of the geometric mean is the geometric mean of the inverses";
const RECIP_OF_CONCAVE: &str = "reciprocal of a positive geodesically concave function";
const ADJOINT_OF_CONCAVE: &str = "adjoint of a positive geodesically concave function";
const LOEWNER_HEINZ: &str = "t^p is operator monotone and concave for 0 ≤ p ≤ 1";
const AFFINE: &str = "affine function";

fn entry(name: &str, ps: &[(&str, f64)], domain: Interval, formula: Expr, fl: &[(FunctionClass, Claim)]) -> FunctionSpec {
    FunctionSpec::new(name, params(ps), domain, formula, flags(fl)).expect("builtin catalog entry is valid")
}

/// The builtin function catalog.
pub fn builtin_catalog() -> Vec<FunctionSpec> {
    use FunctionClass::*;
    let t = Expr::t;
    let c = Expr::c;
    let pos = Interval::positive();
    let unit = Interval { lo: 0.0, hi: 1.0 };
    let above_one = Interval { lo: 1.0, hi: f64::INFINITY };
    let mut out = Vec::new();

    out.push(entry(
        "t",
        &[],
        pos,
        t(),
        &[
            (OpMonotone, Claim::yes(AFFINE)),
            (OpMonotoneDecreasing, Claim::no("strictly increasing")),
            (OpConvex, Claim::yes(AFFINE)),
            (OpConcave, Claim::yes(AFFINE)),
            (OpGeodesicallyConvex, Claim::yes(YOUNG)),
            (OpGeodesicallyConcave, Claim::no("Young inequality is strict for non-commuting pairs")),
            (ScalarConvexLog, Claim::yes("h(u) = e^u is convex")),
            (GeometricallyConvex, Claim::yes("multiplicative")),
            (Increasing, Claim::yes(AFFINE)),
        ],
    ));
    for a in DEFAULT_A_VALUES {
        out.push(entry(
            "t_minus_a",
            &[("a", a)],
            Interval { lo: a, hi: f64::INFINITY },
            t().sub(c(a)),
            &[
                (OpMonotone, Claim::yes(AFFINE)),
                (OpConvex, Claim::yes(AFFINE)),
                (OpGeodesicallyConvex, Claim::yes(MONO_CONVEX)),
                (Increasing, Claim::yes(AFFINE)),
            ],
        ));
    }
    out.push(entry(
        "inv_one_minus_t",
        &[],
        unit,
        c(1.0).sub(t()).recip(),
        &[
            (OpMonotone, Claim::yes("operator monotone on (0, 1)")),
            (OpConvex, Claim::yes("operator convex on (0, 1)")),
            (OpGeodesicallyConvex, Claim::yes(MONO_CONVEX)),
            (Increasing, Claim::yes("increasing on (0, 1)")),
        ],
    ));
    out.push(entry(
        "t_over_one_minus_t",
        &[],
        unit,
        t().div(c(1.0).sub(t())),
        &[
            (OpMonotone, Claim::yes("1/(1 − t) − 1 is operator monotone")),
            (OpConvex, Claim::yes("1/(1 − t) − 1 is operator convex")),
            (OpGeodesicallyConvex, Claim::yes(MONO_CONVEX)),
            (Increasing, Claim::yes("increasing on (0, 1)")),
        ],
    ));
    out.push(entry(
        "t_over_t_minus_one",
        &[],
        above_one,
        t().div(t().sub(c(1.0))),
        &[
            (OpMonotoneDecreasing, Claim::yes("1 + 1/(t − 1) on (1, ∞)")),
            (OpConvex, Claim::yes("1 + 1/(t − 1) on (1, ∞)")),
            (OpGeodesicallyConvex, Claim::yes("reflection x ↦ 1/x of the geodesically convex 1/(1 − t)")),
            (Decreasing, Claim::yes("decreasing on (1, ∞)")),
        ],
    ));
    out.push(entry(
        "reciprocal",
        &[],
        pos,
        t().recip(),
        &[
            (OpMonotone, Claim::no("inversion reverses the Loewner order")),
            (OpMonotoneDecreasing, Claim::yes("inversion reverses the Loewner order")),
            (OpConvex, Claim::yes("inversion is operator convex")),
            (OpGeodesicallyConvex, Claim::yes(INVERSE_MEAN)),
            (ScalarConvexLog, Claim::yes("h(u) = e^{-u} is convex")),
            (GeometricallyConvex, Claim::yes("multiplicative")),
            (Decreasing, Claim::yes("strictly decreasing")),
        ],
    ));
    out.push(entry(
        "one_minus_t",
        &[],
        unit,
        c(1.0).sub(t()),
        &[
            (OpMonotoneDecreasing, Claim::yes(AFFINE)),
            (OpConvex, Claim::yes(AFFINE)),
            (OpConcave, Claim::yes(AFFINE)),
            (OpGeodesicallyConcave, Claim::yes("equivalent to the Young inequality")),
            (Decreasing, Claim::yes(AFFINE)),
        ],
    ));
    for a in DEFAULT_A_VALUES {
        let dom = Interval { lo: 0.0, hi: a };
        out.push(entry(
            "a_minus_t",
            &[("a", a)],
            dom,
            c(a).sub(t()),
            &[
                (OpMonotoneDecreasing, Claim::yes(AFFINE)),
                (OpConcave, Claim::yes(AFFINE)),
                (OpGeodesicallyConcave, Claim::yes(MONO_DEC_CONCAVE)),
                (Decreasing, Claim::yes(AFFINE)),
            ],
        ));
        out.push(entry(
            "inv_a_minus_t",
            &[("a", a)],
            dom,
            c(a).sub(t()).recip(),
            &[
                (OpMonotone, Claim::yes("operator monotone on (0, a)")),
                (OpConvex, Claim::yes("operator convex on (0, a)")),
                (OpGeodesicallyConvex, Claim::yes(RECIP_OF_CONCAVE)),
                (Increasing, Claim::yes("increasing on (0, a)")),
            ],
        ));
        out.push(entry(
            "adjoint_a_minus_t",
            &[("a", a)],
            Interval { lo: 1.0 / a, hi: f64::INFINITY },
            t().div(c(a).mul(t()).sub(c(1.0))),
            &[
                (OpGeodesicallyConvex, Claim::yes(ADJOINT_OF_CONCAVE)),
                (OpMonotoneDecreasing, Claim::yes("1/a + (1/a²)/(t − 1/a)")),
                (Decreasing, Claim::yes("decreasing on (1/a, ∞)")),
            ],
        ));
        out.push(entry(
            "a_minus_inv_t",
            &[("a", a)],
            Interval { lo: 1.0 / a, hi: f64::INFINITY },
            c(a).sub(t().recip()),
            &[
                (OpGeodesicallyConcave, Claim::yes(INVERSE_MEAN)),
                (OpMonotoneDecreasing, Claim::no("increasing")),
                (OpMonotone, Claim::yes("negated inversion is operator monotone")),
                (OpConcave, Claim::yes("negated inversion is operator concave")),
                (Increasing, Claim::yes("increasing")),
            ],
        ));
        out.push(entry(
            "inv_a_plus_t",
            &[("a", a)],
            pos,
            c(a).add(t()).recip(),
            &[
                (OpMonotoneDecreasing, Claim::yes("inversion of an operator monotone shift")),
                (OpConvex, Claim::yes("inversion is operator convex")),
                (Decreasing, Claim::yes("decreasing")),
            ],
        ));
    }
    for p in LOG_POW_EXPONENTS {
        let mut fl = vec![];
        if (-1.0..=0.0).contains(&p) || (1.0..=2.0).contains(&p) {
            fl.push((ConvexLog, Claim::yes("u^p is operator convex on (0, ∞) for p in [-1, 0] ∪ [1, 2]")));
        }
        if (0.0..=1.0).contains(&p) {
            fl.push((ConcaveLog, Claim::yes("u^p is operator concave on (0, ∞) for p in [0, 1]")));
            fl.push((OpConcave, Claim::yes("operator concave-log functions into (0, ∞) are operator concave")));
            fl.push((OpMonotone, Claim::yes("composition of operator monotone log and u^p")));
        }
        if p > 0.0 {
            fl.push((Increasing, Claim::yes("increasing on (1, ∞)")));
        } else {
            fl.push((Decreasing, Claim::yes("decreasing on (1, ∞)")));
        }
        out.push(entry("log_pow", &[("p", p)], above_one, t().ln().pow(c(p)), &fl));
    }
    out.push(entry(
        "log",
        &[],
        pos,
        t().ln(),
        &[
            (OpMonotone, Claim::yes("logarithm is operator monotone")),
            (OpConcave, Claim::yes("logarithm is operator concave")),
            (ConvexLog, Claim::yes("h(u) = u is affine")),
            (ConcaveLog, Claim::yes("φ(u) = u is affine")),
            (ScalarConvexLog, Claim::yes("h(u) = u is affine")),
            (Increasing, Claim::yes("increasing")),
        ],
    ));
    for p in POWER_EXPONENTS {
        let mut fl = vec![
            (ScalarConvexLog, Claim::yes("h(u) = e^{pu} is convex")),
            (GeometricallyConvex, Claim::yes("multiplicative")),
            (Increasing, Claim::yes("increasing for p > 0")),
        ];
        if p <= 1.0 {
            fl.push((OpMonotone, Claim::yes(LOEWNER_HEINZ)));
            fl.push((OpConcave, Claim::yes(LOEWNER_HEINZ)));
        } else if p <= 2.0 {
            fl.push((OpConvex, Claim::yes("t^p is operator convex for 1 ≤ p ≤ 2")));
            fl.push((OpMonotone, Claim::no("t^p is not operator monotone for p > 1")));
        } else {
            fl.push((OpConvex, Claim::no("t^p is not operator convex for p > 2")));
            fl.push((OpMonotone, Claim::no("t^p is not operator monotone for p > 1")));
        }
        out.push(entry("power", &[("p", p)], pos, t().pow(c(p)), &fl));
    }
    out.push(entry(
        "exp",
        &[],
        pos,
        t().exp(),
        &[
            (GeometricallyConvex, Claim::yes("exp(√(ab)) ≤ exp((a + b)/2)")),
            (Increasing, Claim::yes("increasing")),
            (OpMonotone, Claim::no("exponential is not operator monotone")),
        ],
    ));
    out.push(entry(
        "log_one_plus_t",
        &[],
        pos,
        c(1.0).add(t()).ln(),
        &[
            (OpMonotone, Claim::yes("logarithm of an operator monotone shift")),
            (OpConcave, Claim::yes("logarithm of an affine map")),
            (Increasing, Claim::yes("increasing")),
        ],
    ));
    out.push(entry(
        "t_over_one_plus_t",
        &[],
        pos,
        t().div(c(1.0).add(t())),
        &[
            (OpMonotone, Claim::yes("1 − 1/(1 + t)")),
            (OpConcave, Claim::yes("1 − 1/(1 + t)")),
            (Increasing, Claim::yes("increasing")),
        ],
    ));
    out
}

/// Looks up a catalog entry by id (`a_minus_t[a=2]`) or by name (first match).
pub fn lookup(catalog: &[FunctionSpec], key: &str) -> Result<FunctionSpec> {
    catalog
        .iter()
        .find(|f| f.id() == key)
        .or_else(|| catalog.iter().find(|f| f.name == key))
        .cloned()
        .ok_or_else(|| Error::UnknownFunction(key.to_string()))
}

/// Catalog lookup with an optional parameter override, e.g. `("log_pow", p=0.5)`.
pub fn lookup_with(catalog: &[FunctionSpec], name: &str, key: &str, value: f64) -> Result<FunctionSpec> {
    catalog
        .iter()
        .find(|f| f.name == name && f.param(key) == Some(value))
        .cloned()
        .ok_or_else(|| Error::UnknownFunction(format!("{name}[{key}={value}]")))
}

fn carry(
    src: &FunctionSpec,
    out: &mut Flags,
    from: FunctionClass,
    to: FunctionClass,
    why: &str,
) {
    if src.claims(from) {
        out.insert(to, Claim::yes(why));
    }
}

/// `g*(x) = 1/g(1/x)` on the reflected domain.
pub fn adjoint(g: &FunctionSpec) -> Result<FunctionSpec> {
    g.require_nonvanishing()?;
    let domain = g.domain.reflect();
    let formula = g.formula.substitute(&Expr::t().recip()).recip();
    let mut fl = Flags::new();
    if g.min_on_grid() > 0.0 {
        carry(g, &mut fl, FunctionClass::OpGeodesicallyConcave, FunctionClass::OpGeodesicallyConvex, ADJOINT_OF_CONCAVE);
    }
    FunctionSpec::new(format!("adjoint({})", g.id()), BTreeMap::new(), domain, formula, fl)
}

/// `1/g` on the same domain.
pub fn reciprocal(g: &FunctionSpec) -> Result<FunctionSpec> {
    g.require_nonvanishing()?;
    let mut fl = Flags::new();
    if g.min_on_grid() > 0.0 {
        carry(g, &mut fl, FunctionClass::OpGeodesicallyConcave, FunctionClass::OpGeodesicallyConvex, RECIP_OF_CONCAVE);
    }
    FunctionSpec::new(format!("reciprocal({})", g.id()), BTreeMap::new(), g.domain, g.formula.clone().recip(), fl)
}

/// `x ↦ f(1/x)` on the reflected domain.
pub fn precompose_inverse(f: &FunctionSpec) -> Result<FunctionSpec> {
    use FunctionClass::*;
    let domain = f.domain.reflect();
    let formula = f.formula.substitute(&Expr::t().recip());
    let why = "reflection x ↦ 1/x preserves geodesic convexity and concavity";
    let mut fl = Flags::new();
    carry(f, &mut fl, OpGeodesicallyConvex, OpGeodesicallyConvex, why);
    carry(f, &mut fl, OpGeodesicallyConcave, OpGeodesicallyConcave, why);
    carry(f, &mut fl, OpMonotone, OpMonotoneDecreasing, "composition with inversion reverses monotonicity");
    carry(f, &mut fl, OpMonotoneDecreasing, OpMonotone, "composition with inversion reverses monotonicity");
    carry(f, &mut fl, Increasing, Decreasing, "composition with inversion reverses monotonicity");
    carry(f, &mut fl, Decreasing, Increasing, "composition with inversion reverses monotonicity");
    FunctionSpec::new(format!("reflect({})", f.id()), BTreeMap::new(), domain, formula, fl)
}

/// `f₁ ∘ f₂` on the domain of `f₂`. Fails with `DomainViolation` when the
/// values of `f₂` over its sampling range leave the domain of `f₁`.
pub fn compose(f1: &FunctionSpec, f2: &FunctionSpec) -> Result<FunctionSpec> {
    let bad: Vec<f64> =
        f2.domain.grid(100).into_iter().map(|x| f2.eval(x)).filter(|&y| !f1.domain.contains(y)).collect();
    if !bad.is_empty() {
        return Err(Error::DomainViolation { eigenvalues: bad, lo: f1.domain.lo, hi: f1.domain.hi });
    }
    let mut fl = Flags::new();
    if f1.claims(FunctionClass::OpMonotone)
        && f1.claims(FunctionClass::OpConvex)
        && f2.claims(FunctionClass::OpGeodesicallyConvex)
    {
        fl.insert(
            FunctionClass::OpGeodesicallyConvex,
            Claim::yes("monotone convex outer function of a geodesically convex inner function"),
        );
    }
    FunctionSpec::new(
        format!("compose({},{})", f1.id(), f2.id()),
        BTreeMap::new(),
        f2.domain,
        f1.formula.substitute(&f2.formula),
        fl,
    )
}

/// `α·f₁ + f₂` on the intersection of the domains, `α > 0`.
pub fn linear_combination(alpha: f64, f1: &FunctionSpec, f2: &FunctionSpec) -> Result<FunctionSpec> {
    use FunctionClass::*;
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveArgument(alpha));
    }
    let domain = f1.domain.intersect(&f2.domain)?;
    let mut fl = Flags::new();
    for (class, why) in [
        (OpGeodesicallyConvex, "positive combination of geodesically convex functions"),
        (OpGeodesicallyConcave, "positive combination of geodesically concave functions"),
        (OpConvex, "positive combination of operator convex functions"),
        (OpConcave, "positive combination of operator concave functions"),
    ] {
        if f1.claims(class) && f2.claims(class) {
            fl.insert(class, Claim::yes(why));
        }
    }
    let formula = Expr::c(alpha).mul(f1.formula.clone()).add(f2.formula.clone());
    FunctionSpec::new(format!("lincomb({alpha},{},{})", f1.id(), f2.id()), BTreeMap::new(), domain, formula, fl)
}

/// Outcome of a scalar grid test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarVerdict {
    pub holds: bool,
    pub worst_margin: f64,
    /// `(x, y, v)` of the worst violation.
    pub witness: Option<(f64, f64, f64)>,
}

fn rel_gap(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / 1f64.max(lhs.abs()).max(rhs.abs())
}

fn scalar_verdict(points: impl Iterator<Item = ((f64, f64, f64), f64)>, tol: Tolerance) -> ScalarVerdict {
    let mut worst = f64::INFINITY;
    let mut at = None;
    for (w, m) in points {
        if m < worst || m.is_nan() {
            worst = m;
            at = Some(w);
        }
    }
    let holds = worst >= -(tol.rel + tol.abs);
    ScalarVerdict { holds, worst_margin: worst, witness: if holds { None } else { at } }
}

/// Midpoint convexity of `h(u) = f(e^u)` on a `grid`-point u-grid spanning the
/// log of the sampling range.
pub fn is_convexlog_scalar(f: &FunctionSpec, grid: usize) -> Result<ScalarVerdict> {
    if f.domain.lo < 0.0 {
        return Err(Error::DomainViolation { eigenvalues: vec![f.domain.lo], lo: 0.0, hi: f64::INFINITY });
    }
    let xs = f.domain.grid(grid.max(2));
    let us: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let h = |u: f64| f.eval(u.exp());
    let pts = us.iter().enumerate().flat_map(|(i, &a)| {
        us[i + 1..].iter().map(move |&b| {
            let lhs = h(0.5 * (a + b));
            let rhs = 0.5 * (h(a) + h(b));
            ((a.exp(), b.exp(), 0.5), rel_gap(lhs, rhs))
        })
    });
    Ok(scalar_verdict(pts, Tolerance::default()))
}

/// `f(a^{1−v} b^v) ≤ f(a)^{1−v} f(b)^v` over grid pairs and interior weights.
pub fn check_geom_convex_scalar(f: &FunctionSpec, grid: usize) -> Result<ScalarVerdict> {
    let xs = f.domain.grid(grid.max(2));
    if let Some(&x) = xs.iter().find(|&&x| !(f.eval(x) > 0.0)) {
        return Err(Error::HypothesisViolation(format!("{} is not positive at {x}", f.id())));
    }
    let mut pts = Vec::new();
    for &a in &xs {
        for &b in &xs {
            for &v in &DEFAULT_V_GRID[1..DEFAULT_V_GRID.len() - 1] {
                let lhs = f.eval(a.powf(1.0 - v) * b.powf(v));
                let rhs = f.eval(a).powf(1.0 - v) * f.eval(b).powf(v);
                pts.push(((a, b, v), rel_gap(lhs, rhs)));
            }
        }
    }
    Ok(scalar_verdict(pts.into_iter(), Tolerance::default()))
}

fn monotone_scalar(f: &FunctionSpec, grid: usize, increasing: bool) -> ScalarVerdict {
    let xs = f.domain.grid(grid.max(2));
    let pts = xs.windows(2).map(|w| {
        let (lo, hi) = if increasing { (f.eval(w[0]), f.eval(w[1])) } else { (f.eval(w[1]), f.eval(w[0])) };
        ((w[0], w[1], 0.0), rel_gap(lo, hi))
    });
    scalar_verdict(pts, Tolerance::default())
}

/// Settings for the randomized class samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub v_grid: Vec<f64>,
    pub tol: Tolerance,
    #[serde(default)]
    pub exec: Execution,
    /// Draw simultaneously diagonal pairs.
    #[serde(default)]
    pub commuting: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n: 3,
            trials: 1000,
            seed: 0,
            v_grid: DEFAULT_V_GRID.to_vec(),
            tol: Tolerance::default(),
            exec: Execution::Parallel,
            commuting: false,
        }
    }
}

/// A falsifying (or worst) instance of a sampled check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub a: HermMatrix,
    pub b: HermMatrix,
    pub v: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleVerdict {
    pub function: String,
    pub class: FunctionClass,
    pub holds: bool,
    pub trials: usize,
    pub worst_margin: f64,
    /// Index of the first failing trial.
    pub first_failure: Option<usize>,
    /// Worst failing instance; present iff `holds` is false.
    pub witness: Option<Witness>,
    /// Instance attaining `worst_margin`, failing or not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst: Option<Witness>,
}

fn passes(margin: f64, tol: Tolerance) -> bool {
    margin >= -(tol.rel + tol.abs)
}

fn fn_of(f: &FunctionSpec, a: &HermMatrix) -> Result<HermMatrix> {
    apply_fn(a, f)
}

/// Normalized margin of one class inequality at one weight, given `f(A)`, `f(B)`.
fn weighted_margin(
    f: &FunctionSpec,
    class: FunctionClass,
    a: &HermMatrix,
    b: &HermMatrix,
    fa: &HermMatrix,
    fb: &HermMatrix,
    v: f64,
) -> Result<f64> {
    use FunctionClass::*;
    let w = Weight::new(v)?;
    let rhs = arith_mean(fa, fb, w)?;
    let lhs = match class {
        OpConvex | OpConcave => fn_of(f, &arith_mean(a, b, w)?)?,
        OpGeodesicallyConvex | OpGeodesicallyConcave => fn_of(f, &geo_mean(a, b, w)?)?,
        ConvexLog | ConcaveLog => {
            let u = arith_mean(&mat_log(a)?, &mat_log(b)?, w)?;
            fn_of(f, &mat_exp(&u)?)?
        }
        _ => unreachable!("weighted class"),
    };
    match class {
        OpConvex | OpGeodesicallyConvex | ConvexLog => loewner_margin(&lhs, &rhs),
        _ => loewner_margin(&rhs, &lhs),
    }
}

/// Margin of `class` for `f` on one instance. `v` is required for the
/// weighted classes and ignored by the monotonicity classes.
pub fn class_margin(
    f: &FunctionSpec,
    class: FunctionClass,
    a: &HermMatrix,
    b: &HermMatrix,
    v: Option<f64>,
) -> Result<f64> {
    let fa = fn_of(f, a)?;
    let fb = fn_of(f, b)?;
    match class {
        FunctionClass::OpMonotone => loewner_margin(&fa, &fb),
        FunctionClass::OpMonotoneDecreasing => loewner_margin(&fb, &fa),
        c if c.uses_weight() => {
            let v = v.ok_or(Error::MissingField("v"))?;
            weighted_margin(f, c, a, b, &fa, &fb, v)
        }
        c => Err(Error::UnknownCheck(format!("{c} is a scalar class"))),
    }
}

/// Minimum margin over the weight grid and the weight attaining it.
fn trial_margin(
    f: &FunctionSpec,
    class: FunctionClass,
    a: &HermMatrix,
    b: &HermMatrix,
    v_grid: &[f64],
) -> Result<(f64, Option<f64>)> {
    if !class.uses_weight() {
        return Ok((class_margin(f, class, a, b, None)?, None));
    }
    let fa = fn_of(f, a)?;
    let fb = fn_of(f, b)?;
    let mut worst = (f64::INFINITY, None);
    for &v in v_grid {
        let m = weighted_margin(f, class, a, b, &fa, &fb, v)?;
        if m < worst.0 || m.is_nan() {
            worst = (m, Some(v));
        }
    }
    Ok(worst)
}

/// Draws the pair used by a trial: independent spectra in `range`, or an
/// ordered pair `A ≤ B` for the monotonicity classes.
pub fn sample_pair(
    class: FunctionClass,
    n: usize,
    range: (f64, f64),
    seed: u64,
    commuting: bool,
) -> Result<(HermMatrix, HermMatrix)> {
    let mut rng = rng_from_seed(seed);
    match class {
        FunctionClass::OpMonotone | FunctionClass::OpMonotoneDecreasing => {
            let mid = (range.0 * range.1).sqrt();
            let a = gen_spd(n, range.0, mid, &mut rng, commuting)?;
            let room = 0.999 * (range.1 - eig_sym(&a)?.max());
            let step = gen_spd(n, 1e-3 * room, room, &mut rng, commuting)?;
            let b = a.add(&step)?;
            Ok((a, b))
        }
        _ => {
            let a = gen_spd(n, range.0, range.1, &mut rng, commuting)?;
            let b = gen_spd(n, range.0, range.1, &mut rng, commuting)?;
            Ok((a, b))
        }
    }
}

/// Seed of trial `i` of a sampler run for `(function, class)`.
pub fn trial_seed(base: u64, function: &str, class: FunctionClass, trial: usize) -> u64 {
    derive_seed(base, &[label_salt(function), label_salt(class.as_str()), trial as u64])
}

/// Generic sampler over a pair-level margin function.
pub fn sample_custom<M>(
    function: &str,
    class: FunctionClass,
    range: (f64, f64),
    cfg: &SamplerConfig,
    margin: M,
) -> Result<SampleVerdict>
where
    M: Fn(&HermMatrix, &HermMatrix) -> Result<(f64, Option<f64>)> + Sync + Send,
{
    let results = map_trials(cfg.trials, cfg.exec, |i| -> Result<(f64, Option<f64>, u64)> {
        let seed = trial_seed(cfg.seed, function, class, i);
        let (a, b) = sample_pair(class, cfg.n, range, seed, cfg.commuting)?;
        let (m, v) = margin(&a, &b)?;
        Ok((m, v, seed))
    });
    let mut worst = f64::INFINITY;
    let mut worst_at = None;
    let mut first_failure = None;
    for (i, r) in results.into_iter().enumerate() {
        let (m, v, seed) = r?;
        if !passes(m, cfg.tol) && first_failure.is_none() {
            first_failure = Some(i);
        }
        if m < worst || m.is_nan() {
            worst = m;
            worst_at = Some((i, v, seed));
        }
    }
    let holds = first_failure.is_none();
    let worst_instance = match worst_at {
        Some((trial, v, seed)) => {
            let (a, b) = sample_pair(class, cfg.n, range, seed, cfg.commuting)?;
            Some(Witness { a, b, v, trial, seed, margin: worst })
        }
        None => None,
    };
    let witness = if holds { None } else { worst_instance.clone() };
    Ok(SampleVerdict {
        function: function.to_string(),
        class,
        holds,
        trials: cfg.trials,
        worst_margin: worst,
        first_failure,
        witness,
        worst: worst_instance,
    })
}

fn scalar_to_sample(f: &FunctionSpec, class: FunctionClass, sv: ScalarVerdict, trials: usize) -> Result<SampleVerdict> {
    let witness = match sv.witness {
        Some((x, y, v)) => Some(Witness {
            a: HermMatrix::diag(&[x])?,
            b: HermMatrix::diag(&[y])?,
            v: Some(v),
            trial: 0,
            seed: 0,
            margin: sv.worst_margin,
        }),
        None => None,
    };
    Ok(SampleVerdict {
        function: f.id(),
        class,
        holds: sv.holds,
        trials,
        worst_margin: sv.worst_margin,
        first_failure: (!sv.holds).then_some(0),
        worst: witness.clone(),
        witness,
    })
}

/// Scalar grid size used when a scalar class is requested through [`sample_class`].
pub const SCALAR_GRID: usize = 40;

/// Sampled verdict of `class` for `f`.
pub fn sample_class(f: &FunctionSpec, class: FunctionClass, cfg: &SamplerConfig) -> Result<SampleVerdict> {
    match class {
        FunctionClass::ScalarConvexLog => {
            scalar_to_sample(f, class, is_convexlog_scalar(f, SCALAR_GRID)?, SCALAR_GRID)
        }
        FunctionClass::GeometricallyConvex => {
            scalar_to_sample(f, class, check_geom_convex_scalar(f, SCALAR_GRID)?, SCALAR_GRID)
        }
        FunctionClass::Increasing => scalar_to_sample(f, class, monotone_scalar(f, 100, true), 100),
        FunctionClass::Decreasing => scalar_to_sample(f, class, monotone_scalar(f, 100, false), 100),
        _ => {
            let grid = cfg.v_grid.clone();
            sample_custom(&f.id(), class, f.domain.sampling_range(), cfg, |a, b| {
                trial_margin(f, class, a, b, &grid)
            })
        }
    }
}

fn sampler(n: usize, trials: usize, seed: u64) -> SamplerConfig {
    SamplerConfig { n, trials, seed, ..SamplerConfig::default() }
}

pub fn check_op_geodesic_convex(f: &FunctionSpec, n: usize, trials: usize, seed: u64) -> Result<SampleVerdict> {
    sample_class(f, FunctionClass::OpGeodesicallyConvex, &sampler(n, trials, seed))
}

pub fn check_op_geodesic_concave(f: &FunctionSpec, n: usize, trials: usize, seed: u64) -> Result<SampleVerdict> {
    sample_class(f, FunctionClass::OpGeodesicallyConcave, &sampler(n, trials, seed))
}

pub fn check_op_convex(f: &FunctionSpec, n: usize, trials: usize, seed: u64) -> Result<SampleVerdict> {
    sample_class(f, FunctionClass::OpConvex, &sampler(n, trials, seed))
}

pub fn check_op_concave(f: &FunctionSpec, n: usize, trials: usize, seed: u64) -> Result<SampleVerdict> {
    sample_class(f, FunctionClass::OpConcave, &sampler(n, trials, seed))
}

pub fn check_op_monotone(f: &FunctionSpec, n: usize, trials: usize, seed: u64) -> Result<SampleVerdict> {
    sample_class(f, FunctionClass::OpMonotone, &sampler(n, trials, seed))
}

/// Recomputes a witness margin for `class`.
pub fn replay_witness(f: &FunctionSpec, class: FunctionClass, w: &Witness) -> Result<f64> {
    class_margin(f, class, &w.a, &w.b, w.v)
}

/// Margin of the refinement chain `g*(A♯B) ≤ g*(A) !_v g*(B) ≤ g*(A) ∇_v g*(B)`
/// for the adjoint `g*` of `g`, minimized over both links.
pub fn adjoint_chain_margin(gstar: &FunctionSpec, a: &HermMatrix, b: &HermMatrix, v: f64) -> Result<f64> {
    let w = Weight::new(v)?;
    let fa = apply_fn(a, gstar)?;
    let fb = apply_fn(b, gstar)?;
    let lhs = apply_fn(&geo_mean(a, b, w)?, gstar)?;
    let harm = harm_mean(&fa, &fb, w)?;
    let arith = arith_mean(&fa, &fb, w)?;
    Ok(loewner_margin(&lhs, &harm)?.min(loewner_margin(&harm, &arith)?))
}

/// One claim compared with its sampled verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub function: String,
    pub class: FunctionClass,
    pub claim: ClaimStatus,
    pub verdict: SampleVerdict,
    /// A `claimed_true` flag whose sampled verdict failed.
    pub disagreement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogAudit {
    pub checks: Vec<ClaimCheck>,
    pub disagreements: usize,
    /// `claimed_false` flags for which sampling found no counterexample.
    pub unrefuted_false: usize,
}

/// Samples every flagged class of every function.
pub fn audit_catalog(catalog: &[FunctionSpec], cfg: &SamplerConfig) -> Result<CatalogAudit> {
    let mut checks = Vec::new();
    for f in catalog {
        for (&class, claim) in &f.flags {
            if claim.status == ClaimStatus::Unknown {
                continue;
            }
            let verdict = sample_class(f, class, cfg)?;
            let disagreement = claim.status == ClaimStatus::ClaimedTrue && !verdict.holds;
            checks.push(ClaimCheck { function: f.id(), class, claim: claim.status, verdict, disagreement });
        }
    }
    let disagreements = checks.iter().filter(|c| c.disagreement).count();
    let unrefuted_false =
        checks.iter().filter(|c| c.claim == ClaimStatus::ClaimedFalse && c.verdict.holds).count();
    Ok(CatalogAudit { checks, disagreements, unrefuted_false })
}

/// A closure rule applied to catalog entries and the sampled check of its conclusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureCheck {
    pub rule: String,
    pub inputs: Vec<String>,
    pub derived: FunctionSpec,
    pub verdict: SampleVerdict,
}

fn nonnegative(f: &FunctionSpec) -> bool {
    f.min_on_grid() >= 0.0
}

/// Closure rules for geodesic convexity, each instantiated on every
/// applicable catalog entry (or pair of entries) and checked by sampling.
///
/// Rules: monotone convex ⇒ geodesically convex; monotone decreasing concave
/// ⇒ geodesically concave; positive combinations; monotone convex outer
/// composition; reflection `f(1/x)`; reciprocal and adjoint of geodesically
/// concave functions (plus the harmonic-mean refinement for the adjoint);
/// concave-log ⇒ operator concave.
pub fn closure_checks(catalog: &[FunctionSpec], cfg: &SamplerConfig) -> Result<Vec<ClosureCheck>> {
    use FunctionClass::*;
    let mut out = Vec::new();
    let mut push = |rule: &str, inputs: Vec<String>, derived: FunctionSpec, class: FunctionClass| -> Result<()> {
        let verdict = sample_class(&derived, class, cfg)?;
        out.push(ClosureCheck { rule: rule.to_string(), inputs, derived, verdict });
        Ok(())
    };
    for f in catalog {
        if f.claims(OpMonotone) && f.claims(OpConvex) && nonnegative(f) {
            push("monotone_convex_is_geodesically_convex", vec![f.id()], f.clone(), OpGeodesicallyConvex)?;
        }
        if f.claims(OpMonotoneDecreasing) && f.claims(OpConcave) {
            push("monotone_decreasing_concave_is_geodesically_concave", vec![f.id()], f.clone(), OpGeodesicallyConcave)?;
        }
        if f.claims(ConcaveLog) && f.domain.lo >= 1.0 {
            push("concave_log_is_operator_concave", vec![f.id()], f.clone(), OpConcave)?;
        }
        for class in [OpGeodesicallyConvex, OpGeodesicallyConcave] {
            if f.claims(class) {
                push("reflection", vec![f.id()], precompose_inverse(f)?, class)?;
            }
        }
        if f.claims(OpGeodesicallyConcave) && f.min_on_grid() > 0.0 {
            push("reciprocal_of_geodesically_concave", vec![f.id()], reciprocal(f)?, OpGeodesicallyConvex)?;
            push("adjoint_of_geodesically_concave", vec![f.id()], adjoint(f)?, OpGeodesicallyConvex)?;
        }
    }
    for class in [OpGeodesicallyConvex, OpGeodesicallyConcave] {
        let members: Vec<&FunctionSpec> = catalog.iter().filter(|f| f.claims(class)).collect();
        for (i, f1) in members.iter().enumerate() {
            for f2 in &members[i + 1..] {
                for alpha in [0.5, 2.0] {
                    match linear_combination(alpha, f1, f2) {
                        Ok(g) => push("positive_combination", vec![f1.id(), f2.id()], g, class)?,
                        Err(Error::EmptyDomain { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    let outers: Vec<&FunctionSpec> =
        catalog.iter().filter(|f| f.claims(OpMonotone) && f.claims(OpConvex) && nonnegative(f)).collect();
    let inners: Vec<&FunctionSpec> = catalog.iter().filter(|f| f.claims(OpGeodesicallyConvex)).collect();
    for f1 in &outers {
        for f2 in &inners {
            match compose(f1, f2) {
                Ok(g) => push("monotone_convex_composition", vec![f1.id(), f2.id()], g, OpGeodesicallyConvex)?,
                Err(Error::DomainViolation { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let refinements: Vec<&FunctionSpec> =
        catalog.iter().filter(|f| f.claims(OpGeodesicallyConcave) && f.min_on_grid() > 0.0).collect();
    for g in refinements {
        let gstar = adjoint(g)?;
        let grid = cfg.v_grid.clone();
        let verdict = sample_custom(
            &format!("chain:{}", gstar.id()),
            OpGeodesicallyConvex,
            gstar.domain.sampling_range(),
            cfg,
            |a, b| {
                let mut worst = (f64::INFINITY, None);
                for &v in &grid {
                    let m = adjoint_chain_margin(&gstar, a, b, v)?;
                    if m < worst.0 {
                        worst = (m, Some(v));
                    }
                }
                Ok(worst)
            },
        )?;
        out.push(ClosureCheck { rule: "adjoint_harmonic_refinement".into(), inputs: vec![g.id()], derived: gstar, verdict });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cat() -> Vec<FunctionSpec> {
        builtin_catalog()
    }

    fn small(trials: usize) -> SamplerConfig {
        SamplerConfig { n: 2, trials, seed: 7, ..SamplerConfig::default() }
    }

    #[test]
    fn catalog_is_large_and_unique() {
        let c = cat();
        assert!(c.len() >= 12);
        let mut ids: Vec<String> = c.iter().map(FunctionSpec::id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), c.len());
        for f in &c {
            f.validate().unwrap();
        }
    }

    #[test]
    fn lookup_examples() {
        let c = cat();
        let g = lookup(&c, "one_minus_t").unwrap();
        assert_eq!(g.domain, Interval::new(0.0, 1.0).unwrap());
        assert!(g.claims(FunctionClass::OpGeodesicallyConcave));
        let r = lookup(&c, "reciprocal").unwrap();
        assert!(r.claims(FunctionClass::OpGeodesicallyConvex));
        assert_eq!(r.claim(FunctionClass::OpMonotone), ClaimStatus::ClaimedFalse);
        let lp = lookup_with(&c, "log_pow", "p", 1.0).unwrap();
        assert!(lp.claims(FunctionClass::ConvexLog) && lp.claims(FunctionClass::ConcaveLog));
        assert_eq!(lookup(&c, "a_minus_t[a=2]").unwrap().param("a"), Some(2.0));
        assert!(matches!(lookup(&c, "nope"), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn interval_serde_uses_null_for_infinity() {
        let s = serde_json::to_string(&Interval::positive()).unwrap();
        assert_eq!(s, r#"{"lo":0.0,"hi":null}"#);
        let back: Interval = serde_json::from_str(&s).unwrap();
        assert_eq!(back, Interval::positive());
        assert!(serde_json::from_str::<Interval>(r#"{"lo":2.0,"hi":1.0}"#).is_err());
    }

    #[test]
    fn sampling_ranges() {
        assert_eq!(Interval::positive().sampling_range(), (0.05, 20.0));
        let (lo, hi) = Interval::new(0.0, 1.0).unwrap().sampling_range();
        assert_relative_eq!(lo, 0.05);
        assert_relative_eq!(hi, 0.95);
        assert_eq!(Interval::new(2.0, f64::INFINITY).unwrap().sampling_range(), (2.1, 40.0));
        assert_eq!(Interval::new(0.5, 2.0).unwrap().reflect(), Interval::new(0.5, 2.0).unwrap());
        assert_eq!(Interval::new(0.0, 2.0).unwrap().reflect(), Interval::new(0.5, f64::INFINITY).unwrap());
    }

    #[test]
    fn spec_round_trips_through_json() {
        for f in cat() {
            let s = serde_json::to_string(&f).unwrap();
            let back: FunctionSpec = serde_json::from_str(&s).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn adjoint_of_a_minus_t() {
        let g = lookup(&cat(), "a_minus_t[a=2]").unwrap();
        let gs = adjoint(&g).unwrap();
        assert_eq!(gs.domain, Interval::new(0.5, f64::INFINITY).unwrap());
        for x in [0.6, 1.0, 3.0, 10.0] {
            assert_relative_eq!(gs.eval(x), x / (2.0 * x - 1.0), max_relative = 1e-14);
        }
        assert!(gs.claims(FunctionClass::OpGeodesicallyConvex));
    }

    #[test]
    fn reciprocal_of_a_minus_t() {
        let g = lookup(&cat(), "a_minus_t[a=2]").unwrap();
        let r = reciprocal(&g).unwrap();
        assert_eq!(r.domain, g.domain);
        assert_relative_eq!(r.eval(0.5), 1.0 / 1.5);
        assert!(r.claims(FunctionClass::OpGeodesicallyConvex));
    }

    #[test]
    fn precompose_inverse_maps_domain() {
        let f = lookup(&cat(), "inv_one_minus_t").unwrap();
        let g = precompose_inverse(&f).unwrap();
        assert_eq!(g.domain, Interval::new(1.0, f64::INFINITY).unwrap());
        assert_relative_eq!(g.eval(3.0), 3.0 / 2.0, max_relative = 1e-15);
        assert!(g.claims(FunctionClass::OpGeodesicallyConvex));
    }

    #[test]
    fn reciprocal_rejects_sign_change() {
        let f = FunctionSpec::inline("t - 1", Interval::new(0.0, 3.0).unwrap()).unwrap();
        assert!(matches!(reciprocal(&f), Err(Error::ZeroDivision { .. })));
        assert!(matches!(adjoint(&f), Err(Error::ZeroDivision { .. })));
    }

    #[test]
    fn convexlog_scalar_examples() {
        for p in [-2.0, -0.5, 0.3, 1.0, 3.0] {
            let f = FunctionSpec::inline(&format!("t^{p}"), Interval::positive()).unwrap();
            assert!(is_convexlog_scalar(&f, 30).unwrap().holds, "p = {p}");
        }
        let log = lookup(&cat(), "log").unwrap();
        assert!(is_convexlog_scalar(&log, 30).unwrap().holds);
        let bad = FunctionSpec::inline("log(t)^0.5", Interval::new(1.0, f64::INFINITY).unwrap()).unwrap();
        let v = is_convexlog_scalar(&bad, 30).unwrap();
        assert!(!v.holds && v.witness.is_some());
    }

    #[test]
    fn geom_convex_scalar_powers_are_tight() {
        let f = FunctionSpec::inline("t^2", Interval::positive()).unwrap();
        let v = check_geom_convex_scalar(&f, 15).unwrap();
        assert!(v.holds);
        assert!(v.worst_margin.abs() < 1e-12);
    }

    #[test]
    fn identity_is_geodesically_convex() {
        let t = lookup(&cat(), "t").unwrap();
        assert!(check_op_geodesic_convex(&t, 3, 100, 1).unwrap().holds);
        let r = lookup(&cat(), "reciprocal").unwrap();
        assert!(check_op_geodesic_convex(&r, 2, 200, 1).unwrap().holds);
        let g = lookup(&cat(), "a_minus_inv_t[a=2]").unwrap();
        assert!(check_op_geodesic_concave(&g, 2, 200, 1).unwrap().holds);
    }

    #[test]
    fn square_is_operator_convex_cube_is_not() {
        let sq = FunctionSpec::inline("t^2", Interval::positive()).unwrap();
        assert!(check_op_convex(&sq, 2, 300, 3).unwrap().holds);
        let cube = FunctionSpec::inline("t^3", Interval::positive()).unwrap();
        let v = check_op_convex(&cube, 2, 2000, 3).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        let m = replay_witness(&cube, FunctionClass::OpConvex, &w).unwrap();
        assert_eq!(m, w.margin);
        assert!(m < -1e-6);
    }

    #[test]
    fn reciprocal_is_not_monotone() {
        let r = lookup(&cat(), "reciprocal").unwrap();
        let v = check_op_monotone(&r, 2, 50, 0).unwrap();
        assert!(!v.holds);
        assert!(sample_class(&r, FunctionClass::OpMonotoneDecreasing, &small(100)).unwrap().holds);
    }

    #[test]
    fn sampler_is_deterministic_across_execution_modes() {
        let f = lookup(&cat(), "power[p=3]").unwrap();
        let seq = SamplerConfig { exec: Execution::Sequential, ..small(300) };
        let par = SamplerConfig { exec: Execution::Parallel, ..small(300) };
        assert_eq!(
            sample_class(&f, FunctionClass::OpConvex, &seq).unwrap(),
            sample_class(&f, FunctionClass::OpConvex, &par).unwrap()
        );
    }

    #[test]
    fn monotone_pairs_are_ordered() {
        for seed in 0..20 {
            let (a, b) = sample_pair(FunctionClass::OpMonotone, 3, (0.05, 20.0), seed, false).unwrap();
            assert!(loewner_margin(&a, &b).unwrap() >= -1e-12);
            assert!(eig_sym(&b).unwrap().max() <= 20.0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn compose_checks_range() {
        let c = cat();
        let outer = lookup(&c, "t_minus_a[a=1]").unwrap();
        let inner = lookup(&c, "reciprocal").unwrap();
        assert!(matches!(compose(&outer, &inner), Err(Error::DomainViolation { .. })));
        let inner = lookup(&c, "t_minus_a[a=2]").unwrap();
        let outer = lookup(&c, "t").unwrap();
        let g = compose(&outer, &inner).unwrap();
        assert!(g.claims(FunctionClass::OpGeodesicallyConvex));
    }

    #[test]
    fn adjoint_chain_holds_for_one_minus_t() {
        let g = lookup(&cat(), "one_minus_t").unwrap();
        let gs = adjoint(&g).unwrap();
        for seed in 0..20 {
            let (a, b) = sample_pair(FunctionClass::OpConvex, 3, gs.domain.sampling_range(), seed, false).unwrap();
            assert!(adjoint_chain_margin(&gs, &a, &b, 0.3).unwrap() >= -1e-10);
        }
    }
}
