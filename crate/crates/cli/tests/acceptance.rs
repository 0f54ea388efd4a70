//! Acceptance run: one pass/fail line per criterion, non-zero exit on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Instant;

use opineq::catalog::{
    audit_catalog, check_op_convex, closure_checks, lookup, replay_witness, FunctionClass, FunctionSpec, Interval,
    SamplerConfig, Witness,
};
use opineq::exec::derive_seed;
use opineq::generate::{gen_commuting_in, gen_pd, OlsonMode};
use opineq::means::{kantorovich, mu, mu_combined, specht, ConstantBundle, ConstantsVariant, Weight};
use opineq::spectral::{HermMatrix, Tolerance};
use opineq::suite::{run_check, run_suite, CheckId, CheckReport, Instance, SuiteConfig, SuiteRun, Verdict};
use opineq::builtin_catalog;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn suite(cfg: SuiteConfig) -> Result<SuiteRun, String> {
    run_suite(&cfg).map_err(|e| e.to_string())
}

fn config(checks: &[CheckId], trials: usize) -> SuiteConfig {
    SuiteConfig { checks: Some(checks.to_vec()), trials, seed: 2026, ..SuiteConfig::default() }
}

/// Zero unexpected outcomes, zero skips, and every control fired.
fn clean(run: &SuiteRun) -> Result<(), String> {
    for s in &run.summary.checks {
        ensure(s.failed == 0 && s.skipped == 0 && s.unexpected == 0, || {
            format!("{}: {} failed, {} skipped, {} unexpected", s.check_id, s.failed, s.skipped, s.unexpected)
        })?;
        ensure(s.controls_fired == s.controls, || format!("{}: only {}/{} controls fired", s.check_id, s.controls_fired, s.controls))?;
    }
    Ok(())
}

fn worst(run: &SuiteRun, check: CheckId) -> f64 {
    run.summary.checks.iter().find(|c| c.check_id == check).and_then(|c| c.worst_margin).unwrap_or(f64::NAN)
}

fn young_chain() -> Outcome {
    let v_grid = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0];
    let dims = [2, 3, 4, 6];
    let mut worst = f64::INFINITY;
    for i in 0..1000u64 {
        let n = dims[i as usize % dims.len()];
        let a = gen_pd(n, (0.1, 10.0), derive_seed(1, &[i, 0])).map_err(|e| e.to_string())?;
        let b = gen_pd(n, (0.1, 10.0), derive_seed(1, &[i, 1])).map_err(|e| e.to_string())?;
        for v in v_grid {
            let mut inst = Instance::new(i, i as usize, a.clone(), b.clone(), Tolerance::default(), ConstantsVariant::Both);
            inst.v = Some(v);
            let r = run_check(CheckId::YoungChain, &inst);
            worst = worst.min(r.margin);
        }
    }
    ensure(worst >= -1e-9, || format!("worst margin {worst:e}"))?;
    Ok(format!("7000 instances, worst normalized margin {worst:e}"))
}

// Scalar oracle for simultaneously diagonal instances.

fn gm(a: f64, b: f64, v: f64) -> f64 {
    a.powf(1.0 - v) * b.powf(v)
}

fn desc(mut x: Vec<f64>) -> Vec<f64> {
    x.sort_by(|a, b| b.total_cmp(a));
    x
}

fn amax(x: &[f64]) -> f64 {
    x.iter().fold(0f64, |m, v| m.max(v.abs()))
}

/// Loewner margin of `diag(x) ≤ diag(y)`.
fn lm(x: &[f64], y: &[f64]) -> f64 {
    let scale = 1f64.max(amax(x)).max(amax(y));
    x.iter().zip(y).map(|(a, b)| (b - a) / scale).fold(f64::INFINITY, f64::min)
}

fn eigm(lhs: Vec<f64>, rhs: Vec<f64>) -> f64 {
    lm(&desc(lhs), &desc(rhs))
}

fn prefix(x: &[f64]) -> Vec<f64> {
    x.iter().scan(0.0, |s, v| {
        *s += v;
        Some(*s)
    }).collect()
}

fn prefm(x: Vec<f64>, y: Vec<f64>) -> Vec<f64> {
    let px = prefix(&desc(x));
    let py = prefix(&desc(y));
    let scale = 1f64.max(amax(&px)).max(amax(&py));
    px.iter().zip(&py).map(|(a, b)| (b - a) / scale).collect()
}

fn minv(x: impl IntoIterator<Item = f64>) -> f64 {
    x.into_iter().fold(f64::INFINITY, f64::min)
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / 1f64.max(lhs.abs()).max(rhs.abs())
}

fn top(x: &[f64], k: usize) -> f64 {
    desc(x.to_vec())[..k].iter().map(|v| v.ln()).sum()
}

fn bottom(x: &[f64], k: usize) -> f64 {
    let d = desc(x.to_vec());
    d[d.len() - k..].iter().map(|v| v.ln()).sum()
}

fn map(f: &FunctionSpec, x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| f.eval(v)).collect()
}

fn plain_mus(i: &Instance) -> Vec<f64> {
    let (s, t, v) = (i.s.unwrap(), i.t.unwrap(), i.v.unwrap());
    let cb = ConstantBundle::plain(s, t, Weight::new(v).unwrap()).unwrap();
    let mut out = Vec::new();
    if i.variant.uses_specht() {
        out.push(mu(s, t).unwrap());
    }
    if i.variant.uses_kantorovich() {
        out.push(cb.mu_alt);
    }
    out
}

fn scalar_margin(check: CheckId, i: &Instance) -> f64 {
    let (a, b) = (i.a.diagonal(), i.b.diagonal());
    let n = a.len();
    let v = i.v.unwrap_or(0.0);
    let g: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| gm(x, y, v)).collect();
    let ar: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| (1.0 - v) * x + v * y).collect();
    let f = || i.function.as_ref().unwrap();
    match check {
        CheckId::YoungChain => {
            let h: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| 1.0 / ((1.0 - v) / x + v / y)).collect();
            lm(&h, &g).min(lm(&g, &ar))
        }
        CheckId::ReverseYoung => minv(plain_mus(i).into_iter().map(|c| lm(&ar, &g.iter().map(|x| c * x).collect::<Vec<_>>()))),
        CheckId::LogMajorization => {
            let lm: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (1.0 - v) * x.ln() + v * y.ln()).collect();
            let pm = prefm(g.iter().map(|x| x.ln()).collect(), lm);
            if n == 1 { 0.0 } else { minv(pm[..n - 1].iter().copied()) }
        }
        CheckId::BourinHiai => minv((1..=n).flat_map(|k| {
            [
                (1.0 - v) * top(&a, k) + v * top(&b, k) - top(&g, k),
                bottom(&g, k) - ((1.0 - v) * bottom(&a, k) + v * bottom(&b, k)),
            ]
        })),
        CheckId::ConvexlogWeakMajor => {
            let rhs = map(f(), &a).iter().zip(map(f(), &b)).map(|(x, y)| (1.0 - v) * x + v * y).collect();
            minv(prefm(map(f(), &g), rhs))
        }
        CheckId::LogMeanReverse => {
            let (s, t, r) = (i.s.unwrap(), i.t.unwrap(), i.r.unwrap());
            let mn = ConstantBundle::olson(s, t, Weight::new(v).unwrap(), r).unwrap().mn().unwrap();
            let lhs = a.iter().zip(&b).map(|(x, y)| (1.0 - v) * x.ln() + v * y.ln()).collect();
            eigm(lhs, g.iter().map(|x| x.ln() + mn.ln()).collect())
        }
        CheckId::ConcavelogEigenBound => {
            let c = mu_combined(i.r.unwrap(), i.s.unwrap(), i.t.unwrap()).unwrap();
            let lhs = map(f(), &a).iter().zip(map(f(), &b)).map(|(x, y)| (1.0 - v) * x + v * y).collect();
            eigm(lhs, map(f(), &g).iter().map(|x| c * x).collect())
        }
        CheckId::AczelConcavelog => {
            let (p, q, s, t) = (i.p.unwrap(), i.q.unwrap(), i.s.unwrap(), i.t.unwrap());
            let w = 1.0 / q;
            let c = mu_combined(i.r.unwrap(), s, t).unwrap();
            let nn = mu(s.exp(), t.exp()).unwrap();
            let x: Vec<f64> = a.iter().map(|v| v.powf(p)).collect();
            let y: Vec<f64> = b.iter().map(|v| v.powf(q)).collect();
            let gx = map(f(), &x);
            let gy = map(f(), &y);
            let lhs = gx.iter().zip(&gy).map(|(&u, &z)| gm(u, z, w)).collect();
            let xy: Vec<f64> = x.iter().zip(&y).map(|(&u, &z)| gm(u, z, w)).collect();
            let e = eigm(lhs, map(f(), &xy).iter().map(|z| c * z).collect());
            let am: Vec<f64> = x.iter().zip(&y).map(|(u, z)| (1.0 - w) * u + w * z).collect();
            e.min(lm(&am, &xy.iter().map(|z| nn * z).collect::<Vec<_>>())).min(rel(nn, c))
        }
        CheckId::AczelGeodesic => {
            let (p, q) = (i.p.unwrap(), i.q.unwrap());
            let w = 1.0 / q;
            let x: Vec<f64> = a.iter().map(|v| v.powf(p)).collect();
            let y: Vec<f64> = b.iter().map(|v| v.powf(q)).collect();
            let (gx, gy) = (map(f(), &x), map(f(), &y));
            let gg = map(f(), &x.iter().zip(&y).map(|(&u, &z)| gm(u, z, w)).collect::<Vec<_>>());
            let op = lm(&gx.iter().zip(&gy).map(|(&u, &z)| gm(u, z, w)).collect::<Vec<_>>(), &gg);
            let xs = i.x.as_ref().unwrap();
            let norm = xs.iter().map(|z| z * z).sum::<f64>().sqrt();
            let u2: Vec<f64> = xs.iter().map(|z| (z / norm) * (z / norm)).collect();
            let dot = |h: &[f64]| h.iter().zip(&u2).map(|(a, b)| a * b).sum::<f64>();
            op.min(rel(dot(&gx).powf(1.0 / p) * dot(&gy).powf(1.0 / q), dot(&gg)))
        }
        CheckId::AczelCommuting => {
            let (p, q) = (i.p.unwrap(), i.q.unwrap());
            let xs = i.x.as_ref().unwrap();
            let norm2 = xs.iter().map(|z| z * z).sum::<f64>();
            let dot = |h: &dyn Fn(usize) -> f64| (0..n).map(|j| h(j) * xs[j] * xs[j] / norm2).sum::<f64>();
            let lhs = 1.0 - dot(&|j| a[j] * b[j]);
            let rhs = (1.0 - dot(&|j| a[j].powf(p))).powf(1.0 / p) * (1.0 - dot(&|j| b[j].powf(q))).powf(1.0 / q);
            rel(rhs, lhs)
        }
        CheckId::GeodesicSumEig => {
            let k = i.k.unwrap();
            let (la, lb, lg) = (desc(a.clone()), desc(b.clone()), desc(g.clone()));
            let s = |x: &[f64]| x[..k].iter().map(|&z| f().eval(z)).sum::<f64>();
            let (fa, fb, fg) = (s(&la), s(&lb), s(&lg));
            let l1: f64 = (0..k).map(|j| f().eval(gm(la[j], lb[j], v))).sum();
            let l2: f64 = (0..k).map(|j| gm(f().eval(la[j]), f().eval(lb[j]), v)).sum();
            let l3 = gm(fa, fb, v);
            let l4 = (1.0 - v) * fa + v * fb;
            minv([rel(fg, l4), rel(fg, l1), rel(l1, l2), rel(l2, l3), rel(l3, l4)])
        }
        CheckId::MonotoneDecMu => {
            let lhs = map(f(), &g);
            let rhs: Vec<f64> = map(f(), &a).iter().zip(map(f(), &b)).map(|(&x, y)| gm(x, y, v)).collect();
            minv(plain_mus(i).into_iter().map(|c| lm(&lhs, &rhs.iter().map(|z| c * z).collect::<Vec<_>>())))
        }
        CheckId::TopkBound => {
            let k = i.k.unwrap();
            let base = (1.0 - v) * top(&map(f(), &a), k) + v * top(&map(f(), &b), k);
            let lhs = top(&map(f(), &g), k);
            minv(plain_mus(i).into_iter().map(|c| base + k as f64 * c.ln() - lhs))
        }
        CheckId::BottomkReverse => {
            let k = i.k.unwrap();
            let base = (1.0 - v) * bottom(&map(f(), &a), k) + v * bottom(&map(f(), &b), k);
            let lhs = bottom(&map(f(), &g), k);
            minv(plain_mus(i).into_iter().map(|c| lhs - (base - k as f64 * c.ln())))
        }
        CheckId::DetCorollaries => {
            let f2 = i.function2.as_ref().unwrap();
            let det = |h: &FunctionSpec, x: &[f64]| x.iter().map(|&z| h.eval(z).ln()).sum::<f64>();
            let dec_base = (1.0 - v) * det(f(), &a) + v * det(f(), &b);
            let inc_base = (1.0 - v) * det(f2, &a) + v * det(f2, &b);
            let (dl, il) = (det(f(), &g), det(f2, &g));
            minv(plain_mus(i).into_iter().flat_map(|c| {
                let nl = n as f64 * c.ln();
                [dec_base + nl - dl, il - (inc_base - nl)]
            }))
        }
        CheckId::Class(class) => {
            let (fa, fb) = (map(f(), &a), map(f(), &b));
            let mix: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| (1.0 - v) * x + v * y).collect();
            match class {
                FunctionClass::OpMonotone => lm(&fa, &fb),
                FunctionClass::OpMonotoneDecreasing => lm(&fb, &fa),
                FunctionClass::OpConvex => lm(&map(f(), &ar), &mix),
                FunctionClass::OpConcave => lm(&mix, &map(f(), &ar)),
                FunctionClass::OpGeodesicallyConvex | FunctionClass::ConvexLog => lm(&map(f(), &g), &mix),
                FunctionClass::OpGeodesicallyConcave | FunctionClass::ConcaveLog => lm(&mix, &map(f(), &g)),
                _ => f64::NAN,
            }
        }
    }
}

fn commuting_oracle() -> Outcome {
    let mut cfg = config(&CheckId::INEQUALITIES, 250);
    cfg.commuting = true;
    let run = suite(cfg)?;
    clean(&run)?;
    let mut reports: Vec<CheckReport> = run.reports;
    let catalog = builtin_catalog();
    let classes = [
        ("reciprocal", FunctionClass::OpGeodesicallyConvex),
        ("one_minus_t", FunctionClass::OpGeodesicallyConcave),
        ("power[p=2]", FunctionClass::OpConvex),
        ("power[p=0.5]", FunctionClass::OpConcave),
        ("power[p=0.5]", FunctionClass::OpMonotone),
        ("reciprocal", FunctionClass::OpMonotoneDecreasing),
        ("log_pow[p=2]", FunctionClass::ConvexLog),
        ("log_pow[p=0.5]", FunctionClass::ConcaveLog),
    ];
    for (key, class) in classes {
        let f = lookup(&catalog, key).map_err(|e| e.to_string())?;
        let range = f.domain.sampling_range();
        for j in 0..50u64 {
            let n = 2 + j as usize % 4;
            let (a, mut b) = gen_commuting_in(n, range, derive_seed(3, &[j]), true).map_err(|e| e.to_string())?;
            if matches!(class, FunctionClass::OpMonotone | FunctionClass::OpMonotoneDecreasing) {
                let d: Vec<f64> = a.diagonal().iter().zip(b.diagonal()).map(|(x, y)| x.max(y)).collect();
                b = HermMatrix::diag(&d).unwrap();
            }
            let mut inst = Instance::new(j, j as usize, a, b, Tolerance::default(), ConstantsVariant::Both);
            inst.v = Some([0.1, 0.25, 0.5, 0.75, 0.9][j as usize % 5]);
            inst.function = Some(f.clone());
            reports.push(run_check(CheckId::Class(class), &inst));
        }
    }
    let mut worst = 0f64;
    let mut per: BTreeMap<String, usize> = BTreeMap::new();
    for r in &reports {
        ensure(r.instance.a.is_diagonal() && r.instance.b.is_diagonal(), || format!("{}: non-diagonal instance", r.check_id))?;
        ensure(r.verdict != Verdict::Skipped, || format!("{} skipped: {}", r.check_id, r.notes))?;
        let s = scalar_margin(r.check_id, &r.instance);
        let diff = (s - r.margin).abs() / 1f64.max(s.abs());
        ensure(diff <= 1e-10, || format!("{} trial {}: matrix {:e} vs scalar {:e}", r.check_id, r.instance.trial, r.margin, s))?;
        worst = worst.max(diff);
        *per.entry(r.check_id.to_string()).or_default() += 1;
    }
    Ok(format!("{} diagonal instances over {} checks, max relative disagreement {worst:e}", reports.len(), per.len()))
}

fn constants(extra: &[SuiteRun]) -> Outcome {
    ensure(specht(1.0).unwrap() == 1.0, || "specht(1) != 1".into())?;
    let mut worst = 0f64;
    for j in 1..=100 {
        let t = j as f64 / 10.0;
        let (x, y) = (specht(t).unwrap(), specht(1.0 / t).unwrap());
        worst = worst.max((x - y).abs() / x);
    }
    ensure(worst <= 1e-12, || format!("specht symmetry gap {worst:e}"))?;
    ensure(kantorovich(1.0).unwrap() == 1.0, || "K(1) != 1".into())?;
    ensure(kantorovich(2.0).unwrap() == 1.125, || "K(2) != 1.125".into())?;
    let mut sampled = 0;
    for i in 1..=40 {
        for j in i..=40 {
            let (s, t) = (0.05 * i as f64, 0.05 * j as f64 * 2.0);
            for v in [0.0, 0.3, 0.5, 1.0] {
                let cb = ConstantBundle::plain(s, t.max(s), Weight::new(v).unwrap()).unwrap();
                ensure(cb.mu >= 1.0 && cb.mu_alt >= 1.0, || format!("mu < 1 at ({s}, {t}, {v})"))?;
                sampled += 1;
            }
            for r in [0.25, 0.5, 1.0] {
                let m = mu_combined(r, s, t.max(s)).unwrap();
                ensure(m >= 1.0, || format!("mu_combined < 1 at ({r}, {s}, {t})"))?;
                sampled += 1;
            }
        }
    }
    for run in extra {
        for r in &run.reports {
            if let Some(cb) = &r.constants {
                ensure(cb.mu >= 1.0 && cb.mu_alt >= 1.0, || format!("{}: constant below 1", r.check_id))?;
                sampled += 1;
            }
        }
    }
    Ok(format!("specht symmetry gap {worst:e}, K(2) = 1.125, {sampled} sampled constants all >= 1"))
}

fn log_majorization() -> Outcome {
    let mut cfg = config(&[CheckId::LogMajorization], 1000);
    cfg.dims = vec![1, 2, 3, 4, 5, 6];
    let run = suite(cfg)?;
    clean(&run)?;
    let mut gap = 0f64;
    for r in &run.reports {
        ensure(r.details["majorize_holds"] == 1.0, || format!("majorize fails at trial {}", r.instance.trial))?;
        ensure(r.margin >= -1e-8, || format!("prefix margin {:e}", r.margin))?;
        gap = gap.max(r.details["trace_gap_rel"].abs());
    }
    ensure(gap <= 1e-8, || format!("k = n gap {gap:e}"))?;
    Ok(format!("1000 pairs, worst prefix margin {:e}, max k = n gap {gap:e}", worst(&run, CheckId::LogMajorization)))
}

fn convexlog_weak_major() -> Outcome {
    let mut cfg = config(&[CheckId::ConvexlogWeakMajor], 500);
    cfg.functions.insert(
        CheckId::ConvexlogWeakMajor,
        vec!["log_pow[p=-1]".into(), "log_pow[p=1]".into(), "log_pow[p=2]".into()],
    );
    let run = suite(cfg)?;
    clean(&run)?;
    let used: BTreeSet<String> = run.reports.iter().filter_map(|r| r.instance.function.as_ref().map(|f| f.id())).collect();
    ensure(used.len() == 3, || format!("functions used: {used:?}"))?;
    Ok(format!("500 pairs, worst normalized prefix margin {:e}", worst(&run, CheckId::ConvexlogWeakMajor)))
}

fn olson_bounds(runs: &mut Vec<SuiteRun>) -> Outcome {
    let checks = [CheckId::LogMeanReverse, CheckId::ConcavelogEigenBound, CheckId::AczelConcavelog];
    let gs: Vec<String> = ["log_pow[p=1]", "log_pow[p=0.5]", "log_pow[p=0.7]"].map(String::from).to_vec();
    let mut lines = Vec::new();
    for r in [0.25, 0.5, 1.0] {
        let mut cfg = config(&checks, 500);
        cfg.r_grid = vec![r];
        cfg.functions.insert(CheckId::ConcavelogEigenBound, gs.clone());
        cfg.functions.insert(CheckId::AczelConcavelog, gs.clone());
        let run = suite(cfg)?;
        clean(&run)?;
        for c in checks {
            let reps: Vec<&CheckReport> = run.reports.iter().filter(|x| x.check_id == c && !x.expected_fail).collect();
            for mode in [OlsonMode::Scalar, OlsonMode::Search] {
                ensure(reps.iter().any(|x| x.instance.mode == Some(mode)), || format!("{c}: no {mode:?} pairs"))?;
            }
            if c != CheckId::LogMeanReverse {
                let used: BTreeSet<String> = reps.iter().filter_map(|x| x.instance.function.as_ref().map(|f| f.id())).collect();
                ensure(used.len() == 3, || format!("{c}: functions used {used:?}"))?;
            }
        }
        lines.push(format!(
            "r={r}: worst {:e}/{:e}/{:e}",
            worst(&run, checks[0]),
            worst(&run, checks[1]),
            worst(&run, checks[2])
        ));
        runs.push(run);
    }
    Ok(format!("500 pairs per check and r, scalar and search modes; {}", lines.join("; ")))
}

fn product_bounds(runs: &mut Vec<SuiteRun>) -> Outcome {
    let mut cfg = config(
        &[CheckId::BourinHiai, CheckId::TopkBound, CheckId::BottomkReverse, CheckId::DetCorollaries, CheckId::MonotoneDecMu, CheckId::GeodesicSumEig],
        500,
    );
    cfg.trials_per_check.insert(CheckId::BourinHiai, 1000);
    cfg.constants_variant = ConstantsVariant::Both;
    let run = suite(cfg)?;
    clean(&run)?;
    for r in run.reports.iter().filter(|r| !r.expected_fail && r.check_id != CheckId::BourinHiai && r.check_id != CheckId::GeodesicSumEig) {
        let keys: Vec<&String> = r.details.keys().collect();
        ensure(keys.iter().any(|k| k.ends_with("specht")) && keys.iter().any(|k| k.ends_with("kantorovich")), || {
            format!("{} trial {} lacks a constant variant", r.check_id, r.instance.trial)
        })?;
    }
    let findings = run.summary.findings;
    let out = format!(
        "bourin_hiai 1000, top/bottom/det 500 each with both constants; worst {:e}/{:e}/{:e}/{:e}; {findings} findings on the larger-side constant placement",
        worst(&run, CheckId::BourinHiai),
        worst(&run, CheckId::TopkBound),
        worst(&run, CheckId::BottomkReverse),
        worst(&run, CheckId::DetCorollaries)
    );
    runs.push(run);
    Ok(out)
}

fn aczel() -> Outcome {
    let mut cfg = config(&[CheckId::AczelGeodesic, CheckId::AczelCommuting], 500);
    cfg.functions.insert(
        CheckId::AczelGeodesic,
        vec!["one_minus_t".into(), "a_minus_t[a=2]".into(), "a_minus_t[a=5]".into()],
    );
    let run = suite(cfg)?;
    clean(&run)?;
    for r in run.reports.iter().filter(|r| r.check_id == CheckId::AczelGeodesic) {
        ensure(r.details.contains_key("operator") && r.details.contains_key("vector"), || "missing display".into())?;
    }
    Ok(format!(
        "500 + 500 instances; worst operator/vector {:e}, commuting {:e}",
        worst(&run, CheckId::AczelGeodesic),
        worst(&run, CheckId::AczelCommuting)
    ))
}

fn discriminative() -> Outcome {
    let f = FunctionSpec::inline("t^3", Interval::positive()).map_err(|e| e.to_string())?;
    let v = check_op_convex(&f, 2, 10_000, 2026).map_err(|e| e.to_string())?;
    ensure(!v.holds, || "no witness in 10000 trials".into())?;
    let frozen: Witness = serde_json::from_str(include_str!("../../core/tests/fixtures/cube_op_convex_witness.json"))
        .map_err(|e| e.to_string())?;
    let m = replay_witness(&f, FunctionClass::OpConvex, &frozen).map_err(|e| e.to_string())?;
    ensure(m < -1e-6 && m.to_bits() == frozen.margin.to_bits(), || format!("frozen witness replays to {m:e}"))?;
    Ok(format!("first failure at trial {}, frozen witness margin {m:e}", v.first_failure.unwrap()))
}

fn catalog_claims() -> Outcome {
    let catalog = builtin_catalog();
    let cfg = SamplerConfig { n: 3, trials: 1000, seed: 2026, ..SamplerConfig::default() };
    let audit = audit_catalog(&catalog, &cfg).map_err(|e| e.to_string())?;
    let bad: Vec<String> = audit.checks.iter().filter(|c| c.disagreement).map(|c| format!("{} {}", c.function, c.class)).collect();
    ensure(bad.is_empty(), || format!("disagreements: {bad:?}"))?;
    let closures = closure_checks(&catalog, &cfg).map_err(|e| e.to_string())?;
    let failed: Vec<String> =
        closures.iter().filter(|c| !c.verdict.holds).map(|c| format!("{} {:?}", c.rule, c.inputs)).collect();
    ensure(failed.is_empty(), || format!("closure failures: {failed:?}"))?;
    let rules: BTreeSet<&str> = closures.iter().map(|c| c.rule.as_str()).collect();
    let refuted = audit.checks.iter().filter(|c| !c.verdict.holds).count();
    Ok(format!(
        "{} claims, 0 disagreements, {refuted} negative claims refuted; {} closure instances over {} rules hold",
        audit.checks.len(),
        closures.len(),
        rules.len()
    ))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_opineq");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("run.jsonl");
    let status = Command::new(bin)
        .args(["run", "--out"])
        .arg(&path)
        .stderr(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.code() == Some(0), || format!("default run exited {status}"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with("{\"summary\"")).collect();
    let mut picked = BTreeSet::new();
    let mut j = 0u64;
    while picked.len() < 100.min(lines.len()) {
        picked.insert((derive_seed(11, &[j]) % lines.len() as u64) as usize);
        j += 1;
    }
    for &i in &picked {
        let mut child = Command::new(bin)
            .arg("replay")
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| e.to_string())?;
        child.stdin.take().unwrap().write_all(lines[i].as_bytes()).map_err(|e| e.to_string())?;
        let st = child.wait().map_err(|e| e.to_string())?;
        ensure(st.code() == Some(0), || format!("replay of line {i} exited {st}"))?;
    }
    Ok(format!("default run exit 0 with {} report lines; {} replays exit 0", lines.len(), picked.len()))
}

fn main() {
    let start = Instant::now();
    let mut runs = Vec::new();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 young chain", young_chain()),
        ("2 commuting reduction oracle", commuting_oracle()),
        ("4 log-majorization", log_majorization()),
        ("5 convex-log weak majorization", convexlog_weak_major()),
        ("6 Olson-sandwich eigenvalue bounds", olson_bounds(&mut runs)),
        ("7 eigenvalue products and determinants", product_bounds(&mut runs)),
        ("3 constants", constants(&runs)),
        ("8 Aczel-type inequalities", aczel()),
        ("9 discriminative power", discriminative()),
        ("10 catalog claims and closure rules", catalog_claims()),
        ("11 replay determinism", determinism()),
    ];
    results.sort_by_key(|(name, _)| name.split(' ').next().unwrap().parse::<u32>().unwrap());
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed in {:.1?}", results.len() - failed, results.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
