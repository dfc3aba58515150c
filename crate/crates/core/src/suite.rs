//! The ten reproduction criteria and per-metric verification, shared by the
//! `paper-suite` command and the acceptance tests.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, default_shift, sample_points, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    max_abs, spray_coefficients, FinslerMetric, FlatSpray, SamplePoint, ScalarField, Spray, SprayJets, TensorBundle,
};
use crate::projective::{
    beltrami_verdict, drdj_identities, hamel_check, hamel_forms, jacobi_transform_checks,
    pm_checks, weyl_transform_check, BaseSpray, ProjectivePair,
};
use crate::reference;
use crate::report::{CheckResult, ResidualTracker};
use crate::weyl::{
    classical_weyl, constant_curvature_verdict, curvature_sample, fiber_variation_of_metric,
    riemann_projective_weyl, weyl_type, Classification, CurvatureVerdict,
};

/// First-layer tensors (`g`, `G`, homogeneity).
pub const TOL_FIRST: f64 = 1e-9;
/// Second-layer tensors (curvature and form identities).
pub const TOL_SECOND: f64 = 1e-8;
/// Third-layer quantities (Weyl tensors, `κ`) and the verdict default.
pub const TOL_THIRD: f64 = 1e-6;

/// Finite-difference step and comparison for derivative integrity.
pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-5;
pub const FD_FLOOR: f64 = 1e-8;

/// Lower bound separating "clearly nonzero" from rounding.
pub const NONZERO_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub dim: usize,
    pub seed: u64,
    /// Samples per check; criteria 1 and 10 use `2 · samples`.
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dim: 3,
            seed: 42,
            samples: 50,
        }
    }
}

impl SuiteConfig {
    fn sampler(&self, count: usize) -> SamplerConfig {
        SamplerConfig::with_count(self.seed, count)
    }

    fn metric(&self, id: &str) -> Result<Arc<dyn FinslerMetric>> {
        catalog::build(id, self.dim)
    }

    fn samples_of(&self, m: &dyn FinslerMetric, count: usize) -> Result<Vec<SamplePoint>> {
        sample_points(m, &self.sampler(count))
    }

    fn pair(&self, base: &str, target: &str) -> Result<ProjectivePair> {
        let base = match base {
            "flat" => BaseSpray::Flat(self.dim),
            id => BaseSpray::Metric(self.metric(id)?),
        };
        ProjectivePair::new(base, self.metric(target)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub number: usize,
    pub title: &'static str,
    pub checks: Vec<CheckResult>,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const CRITERIA: [&str; 10] = [
    "flat sanity",
    "numata scalar curvature",
    "funk on the half ball",
    "funk on the unit ball",
    "shifted funk",
    "projective metrizability conditions",
    "weyl and jacobi transformation",
    "curvature form identities",
    "riemannian projective weyl bridge",
    "derivative integrity",
];

pub fn run_criterion(number: usize, cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let checks = match number {
        1 => flat_sanity(cfg)?,
        2 => numata(cfg)?,
        3 => funk_half(cfg)?,
        4 => funk_unit(cfg)?,
        5 => funk_shifted(cfg)?,
        6 => pm_suite(cfg)?,
        7 => transformation_suite(cfg)?,
        8 => drdj_suite(cfg)?,
        9 => weyl_bridge(cfg)?,
        10 => derivative_integrity(cfg)?,
        _ => return Err(Error::Argument(format!("no criterion {number}"))),
    };
    Ok(CriterionOutcome {
        number,
        title: CRITERIA[number - 1],
        checks,
    })
}

pub fn paper_suite(cfg: &SuiteConfig) -> Result<Vec<CriterionOutcome>> {
    (1..=CRITERIA.len()).map(|k| run_criterion(k, cfg)).collect()
}

fn related_pairs(cfg: &SuiteConfig) -> Result<Vec<ProjectivePair>> {
    Ok(vec![
        cfg.pair("flat", "funk_half")?,
        cfg.pair("flat", "funk_unit")?,
        cfg.pair("funk_unit", "funk_shifted")?,
    ])
}

fn worst_of(label: &str, pts: &[SamplePoint], rows: &[(f64, f64)], id: &str, seed: u64, tol: f64) -> CheckResult {
    let mut t = ResidualTracker::new();
    for (p, (r, s)) in pts.iter().zip(rows) {
        t.observe(*r, *s, p);
    }
    t.finish(id, label, seed, tol)
}

/// `verdict=<classification>`: passes when the metric is constant with the
/// expected `κ`. The residual is the largest of the `W₀` ratio, the `κ`
/// spread and the `κ` offset.
pub fn constant_verdict_check(v: &CurvatureVerdict, subject: &str, expected_kappa: f64, seed: u64) -> CheckResult {
    let worst = v.worst_w0();
    let residual = v
        .max_w0_ratio()
        .max(v.kappa_spread())
        .max((v.kappa_mean - expected_kappa).abs());
    CheckResult::new(
        format!("verdict={} expect constant({expected_kappa})", v.classification),
        subject,
        v.samples.len(),
        seed,
        residual,
        1.0,
        v.tolerance,
        worst.point.clone(),
    )
}

fn verdict_kind_check(v: &CurvatureVerdict, subject: &str, expected: Classification, seed: u64) -> CheckResult {
    let ok = match expected {
        Classification::Constant { .. } => v.classification.is_constant(),
        other => v.classification == other,
    };
    CheckResult::new(
        format!("verdict={} expect {expected}", v.classification),
        subject,
        v.samples.len(),
        seed,
        if ok { 0.0 } else { 1.0 },
        1.0,
        0.0,
        v.worst_w0().point.clone(),
    )
}

fn flat_sanity(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let m = cfg.metric("euclidean")?;
    let pts = cfg.samples_of(m.as_ref(), 2 * cfg.samples)?;
    let rows: Vec<[f64; 4]> = pts
        .par_iter()
        .map(|p| {
            let b = TensorBundle::from_metric(&m, p, 1)?;
            Ok([
                max_abs(b.jacobi_matrix().iter()),
                b.curvature.iter().map(|r| r.value().abs()).fold(0.0, f64::max),
                max_abs(weyl_type(&b)?.w0.iter()),
                max_abs(classical_weyl(&b)?.w.iter()),
            ])
        })
        .collect::<Result<_>>()?;
    let ids = ["flat_phi", "flat_curvature", "flat_w0", "flat_weyl"];
    Ok(ids
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let r: Vec<(f64, f64)> = rows.iter().map(|row| (row[k], 1.0)).collect();
            worst_of("euclidean", &pts, &r, id, cfg.seed, 1e-12)
        })
        .collect())
}

/// `κ = (3/4)|y|⁴/(|y| + ⟨x,y⟩)⁴`.
pub fn numata_kappa(p: &SamplePoint) -> f64 {
    let ny = p.fiber_norm();
    let xy: f64 = p.x.iter().zip(&p.y).map(|(a, b)| a * b).sum();
    0.75 * ny.powi(4) / (ny + xy).powi(4)
}

fn numata(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let m = cfg.metric("numata")?;
    let pts = cfg.samples_of(m.as_ref(), cfg.samples)?;
    let verdict = constant_curvature_verdict(&m, &pts, TOL_THIRD)?;
    let kappa: Vec<(f64, f64)> = verdict
        .samples
        .iter()
        .map(|s| {
            let k = numata_kappa(&s.point);
            ((s.kappa - k).abs(), k.abs())
        })
        .collect();
    let weyl: Vec<(f64, f64)> = verdict.samples.iter().map(|s| (s.w_max, s.scale)).collect();
    let mut w0 = ResidualTracker::new();
    for s in &verdict.samples {
        w0.observe(s.w0_max, s.scale, &s.point);
    }

    let flat: Arc<dyn Spray> = Arc::new(FlatSpray { dim: cfg.dim });
    let pair = ProjectivePair::new(BaseSpray::Flat(cfg.dim), m.clone())?;
    let factor = pair.factor();
    let hamel = hamel_check(&flat, &factor, &pts, TOL_SECOND)?;
    let hamel_fails = CheckResult::lower_bound(
        "hamel_fails",
        pair.label(),
        pts.len(),
        cfg.seed,
        hamel.delta_sp.min(hamel.dhdjp),
        NONZERO_THRESHOLD,
        hamel.worst_delta.clone().expect("samples"),
    );

    let mut x = vec![0.0; cfg.dim];
    x[0] = 0.1;
    let mut y = vec![0.0; cfg.dim];
    y[1] = 1.0;
    let pinned = SamplePoint::new(x, y)?;
    let (delta, _) = hamel_forms(flat.as_ref(), &factor, &pinned)?;
    let mut expected = vec![0.0; cfg.dim];
    expected[0] = 0.1;
    let err = delta
        .values()
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(vec![
        worst_of("numata", &pts, &kappa, "kappa_closed_form", cfg.seed, 1e-7),
        worst_of("numata", &pts, &weyl, "classical_weyl_vanishes", cfg.seed, 1e-7),
        w0.finish_exceeds("w0_nonzero", "numata", cfg.seed, NONZERO_THRESHOLD),
        verdict_kind_check(&verdict, "numata", Classification::ScalarNonconstant, cfg.seed),
        hamel_fails,
        CheckResult::new("delta_p_pinned", pair.label(), 1, cfg.seed, err, 1.0, 1e-9, pinned),
    ])
}

fn hamel_passes(pair: &ProjectivePair, pts: &[SamplePoint], seed: u64) -> Result<CheckResult> {
    let spray = pair.base.spray();
    let h = hamel_check(&spray, &pair.factor(), pts, TOL_SECOND)?;
    let point = if h.delta_sp >= h.dhdjp { &h.worst_delta } else { &h.worst_dhdj };
    Ok(CheckResult::new(
        "hamel_passes",
        pair.label(),
        pts.len(),
        seed,
        h.delta_sp.max(h.dhdjp),
        1.0,
        TOL_SECOND,
        point.clone().expect("samples"),
    ))
}

fn funk_half(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let m = cfg.metric("funk_half")?;
    let pts = cfg.samples_of(m.as_ref(), cfg.samples)?;
    let verdict = constant_curvature_verdict(&m, &pts, 1e-7)?;
    let w0: Vec<(f64, f64)> = verdict.samples.iter().map(|s| (s.w0_max, s.scale)).collect();
    let pair = ProjectivePair::new(BaseSpray::Flat(cfg.dim), m.clone())?;
    let factor = pair.factor();
    let p_rows: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|p| {
            let f = m.jet(p, 0)?.value();
            Ok(((factor.value_at(p)? - f).abs(), f.abs().max(1.0)))
        })
        .collect::<Result<_>>()?;
    Ok(vec![
        constant_verdict_check(&verdict, "funk_half", -1.0, cfg.seed),
        worst_of("funk_half", &pts, &w0, "w0_vanishes", cfg.seed, TOL_SECOND),
        worst_of(&pair.label(), &pts, &p_rows, "factor_equals_metric", cfg.seed, 1e-10),
        hamel_passes(&pair, &pts, cfg.seed)?,
    ])
}

fn funk_unit(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let m = cfg.metric("funk_unit")?;
    let pts = cfg.samples_of(m.as_ref(), cfg.samples)?;
    let verdict = constant_curvature_verdict(&m, &pts, 1e-7)?;
    let spray: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|p| {
            let g = spray_coefficients(m.as_ref(), p)?;
            let f = m.jet(p, 0)?.value();
            let err = (0..p.dim()).map(|i| (2.0 * g[i] - f * p.y[i]).abs()).fold(0.0, f64::max);
            let scale = p.y.iter().map(|v| (f * v).abs()).fold(0.0, f64::max);
            Ok((err, scale))
        })
        .collect::<Result<_>>()?;
    Ok(vec![
        constant_verdict_check(&verdict, "funk_unit", -0.25, cfg.seed),
        worst_of("funk_unit", &pts, &spray, "spray_deviation", cfg.seed, TOL_SECOND),
    ])
}

fn funk_shifted(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let pair = cfg.pair("funk_unit", "funk_shifted")?;
    let pts = pair.samples(&cfg.sampler(cfg.samples))?;
    let a = default_shift(cfg.dim);
    let factor = pair.factor();
    let rows: Vec<((f64, f64), (f64, f64))> = pts
        .par_iter()
        .map(|p| {
            let ax = 1.0 + a.iter().zip(&p.x).map(|(u, v)| u * v).sum::<f64>();
            let ay: f64 = a.iter().zip(&p.y).map(|(u, v)| u * v).sum();
            let expected = -0.5 * ay / ax;
            let pj = factor.jet_at(p, 1)?;
            let n = p.dim();
            let dj_err = (0..n)
                .map(|i| (pj.partial_wrt(&[n + i]).expect("order 1") + 0.5 * a[i] / ax).abs())
                .fold(0.0, f64::max);
            Ok((
                ((pj.value() - expected).abs(), expected.abs().max(1.0)),
                (dj_err, 1.0),
            ))
        })
        .collect::<Result<_>>()?;
    let p_rows: Vec<(f64, f64)> = rows.iter().map(|r| r.0).collect();
    let dj_rows: Vec<(f64, f64)> = rows.iter().map(|r| r.1).collect();
    let verdict = constant_curvature_verdict(&pair.target, &pts, TOL_THIRD)?;
    let beltrami = beltrami_verdict(&pair, &pts, TOL_THIRD)?;
    let label = pair.label();
    Ok(vec![
        worst_of(&label, &pts, &p_rows, "factor_closed_form", cfg.seed, 1e-10),
        worst_of(&label, &pts, &dj_rows, "dj_factor_closed_form", cfg.seed, 1e-10),
        hamel_passes(&pair, &pts, cfg.seed)?,
        constant_verdict_check(&verdict, "funk_shifted", -1.0, cfg.seed),
        beltrami_check(&beltrami, pts.len(), cfg.seed),
    ])
}

pub fn beltrami_check(v: &crate::projective::BeltramiVerdict, samples: usize, seed: u64) -> CheckResult {
    let ok = v.ensure_consistent().is_ok();
    CheckResult::new(
        format!(
            "beltrami base={} target={} hamel={}",
            v.base, v.target.classification, v.hamel.is_hamel
        ),
        v.pair.clone(),
        samples,
        seed,
        if ok { 0.0 } else { 1.0 },
        1.0,
        0.0,
        v.target.worst_w0().point.clone(),
    )
}

fn pm_suite(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for pair in related_pairs(cfg)? {
        let pts = pair.samples(&cfg.sampler(cfg.samples))?;
        out.extend(pm_checks(&pair, &pts, cfg.seed, TOL_SECOND)?);
    }
    let pair = cfg.pair("funk_unit", "numata")?;
    let pts = pair.samples(&cfg.sampler(cfg.samples))?;
    for c in pm_checks(&pair, &pts, cfg.seed, TOL_SECOND)? {
        out.push(CheckResult::lower_bound(
            format!("{}_fails", c.check_id),
            c.metric_or_pair,
            c.samples_used,
            c.seed,
            c.max_residual / c.scale,
            NONZERO_THRESHOLD,
            c.worst_point,
        ));
    }
    Ok(out)
}

fn transformation_suite(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for pair in related_pairs(cfg)? {
        let pts = pair.samples(&cfg.sampler(cfg.samples))?;
        out.push(weyl_transform_check(&pair, &pts, cfg.seed, TOL_SECOND)?);
        let mut jt = jacobi_transform_checks(&pair, &pts, cfg.seed, TOL_SECOND)?;
        if let Some(trace) = jt.iter_mut().find(|c| c.check_id == "jacobi_trace") {
            *trace = CheckResult::new(
                trace.check_id.clone(),
                trace.metric_or_pair.clone(),
                trace.samples_used,
                trace.seed,
                trace.max_residual,
                trace.scale,
                TOL_FIRST,
                trace.worst_point.clone(),
            );
        }
        out.extend(jt);
    }
    Ok(out)
}

fn drdj_suite(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut pairs = related_pairs(cfg)?;
    pairs.push(cfg.pair("euclidean", "klein")?);
    let mut out = Vec::new();
    for pair in &pairs {
        let pts = pair.samples(&cfg.sampler(cfg.samples))?;
        for outcome in drdj_identities(pair, &pts, cfg.seed, TOL_SECOND)? {
            let required = match outcome.id {
                "drdj1" => true,
                "drdj2" => !matches!(&pair.base, BaseSpray::Metric(m) if m.id() == "numata"),
                _ => pair.target.id() == "klein",
            };
            match outcome.result {
                Some(c) => out.push(c),
                None if required => out.push(CheckResult::new(
                    format!("{} skipped: {}", outcome.id, outcome.skipped.unwrap_or_default()),
                    pair.label(),
                    0,
                    cfg.seed,
                    1.0,
                    1.0,
                    0.0,
                    pts[0].clone(),
                )),
                None => {}
            }
        }
    }
    let klein = cfg.metric("klein")?;
    let pts = cfg.samples_of(klein.as_ref(), cfg.samples)?;
    let var = fiber_variation_of_metric(klein.as_ref(), &pts)?;
    out.push(CheckResult::new(
        "riemannian_certified",
        "klein",
        pts.len(),
        cfg.seed,
        var,
        1.0,
        1e-10,
        pts[0].clone(),
    ));
    Ok(out)
}

/// Base points and fibers for the Riemannian bridge checks.
fn bridge_points(cfg: &SuiteConfig, m: &dyn FinslerMetric) -> Result<(Vec<SamplePoint>, Vec<Vec<f64>>)> {
    let pts = cfg.samples_of(m, 10)?;
    let fibers = pts.iter().map(|p| p.y.clone()).collect();
    Ok((pts.into_iter().take(5).collect(), fibers))
}

fn weyl_bridge(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let klein = cfg.metric("klein")?;
    let (bases, fibers) = bridge_points(cfg, klein.as_ref())?;
    let mut w4 = ResidualTracker::new();
    let mut bridge = ResidualTracker::new();
    for b in &bases {
        let rw = riemann_projective_weyl(&klein, &b.x)?;
        w4.observe(rw.max_abs_weyl(), 1.0, b);
        for y in &fibers {
            let p = b.with_fiber(y.clone())?;
            let bundle = TensorBundle::from_metric(&klein, &p, 1)?;
            let w0 = weyl_type(&bundle)?.w0;
            let scale = crate::weyl::curvature_scale(&bundle);
            bridge.observe(max_abs((&w0 - rw.contract_fiber(y)).iter()), scale, &p);
        }
    }
    out.push(w4.finish("projective_weyl_vanishes", "klein", cfg.seed, TOL_SECOND));
    out.push(bridge.finish("w0_equals_contracted_weyl", "klein", cfg.seed, TOL_SECOND));

    for id in ["euclidean", "funk_half", "funk_unit", "funk_shifted", "klein"] {
        let m = cfg.metric(id)?;
        let pts = cfg.samples_of(m.as_ref(), cfg.samples)?;
        let rows: Vec<(f64, f64)> = pts
            .par_iter()
            .map(|p| {
                let s = curvature_sample(&m, p)?;
                Ok((s.gap_max, s.scale))
            })
            .collect::<Result<_>>()?;
        out.push(worst_of(id, &pts, &rows, "weyl_gap_vanishes", cfg.seed, TOL_SECOND));
    }
    let numata = cfg.metric("numata")?;
    let pts = cfg.samples_of(numata.as_ref(), cfg.samples)?;
    let mut gap = ResidualTracker::new();
    for p in &pts {
        let s = curvature_sample(&numata, p)?;
        gap.observe(s.gap_max, s.scale, p);
    }
    out.push(gap.finish_exceeds("weyl_gap_nonzero", "numata", cfg.seed, NONZERO_THRESHOLD));

    let verdict = constant_curvature_verdict(&klein, &cfg.samples_of(klein.as_ref(), cfg.samples)?, TOL_THIRD)?;
    out.push(constant_verdict_check(&verdict, "klein", -1.0, cfg.seed));

    let conformal = cfg.metric("klein_conformal")?;
    let (bases, _) = bridge_points(cfg, conformal.as_ref())?;
    let mut w4 = ResidualTracker::new();
    for b in &bases {
        w4.observe(riemann_projective_weyl(&conformal, &b.x)?.max_abs_weyl(), 1.0, b);
    }
    out.push(w4.finish_exceeds("projective_weyl_nonzero", "klein_conformal", cfg.seed, NONZERO_THRESHOLD));
    let pts = cfg.samples_of(conformal.as_ref(), cfg.samples)?;
    let verdict = constant_curvature_verdict(&conformal, &pts, TOL_THIRD)?;
    let mut w0 = ResidualTracker::new();
    for s in &verdict.samples {
        w0.observe(s.w0_max, s.scale, &s.point);
    }
    out.push(w0.finish_exceeds(
        format!("verdict={} w0_nonzero", verdict.classification),
        "klein_conformal",
        cfg.seed,
        NONZERO_THRESHOLD,
    ));
    Ok(out)
}

fn relative_fd_error(jet: f64, fd: f64) -> f64 {
    (jet - fd).abs() / fd.abs().max(FD_FLOOR)
}

/// Euler residuals for `F`, `F²`, `G`, `N` and `Φ` at one point.
pub fn homogeneity_residuals(m: &Arc<dyn FinslerMetric>, p: &SamplePoint) -> Result<f64> {
    let n = p.dim();
    let euler = |j: &crate::autodiff::Jet, degree: f64| -> f64 {
        let e: f64 = (0..n).map(|i| p.y[i] * j.partial_wrt(&[n + i]).expect("order 1")).sum();
        (e - degree * j.value()).abs() / j.value().abs().max(1.0)
    };
    let f = m.jet(p, 1)?;
    let mut worst = euler(&f, 1.0).max(euler(&(&f * &f), 2.0));
    let b = TensorBundle::from_metric(m, p, 1)?;
    for i in 0..n {
        worst = worst.max(euler(&b.spray[i], 2.0));
        for j in 0..n {
            worst = worst.max(euler(&b.connection[i][j], 1.0));
            worst = worst.max(euler(&b.jacobi[i][j], 2.0));
        }
    }
    Ok(worst)
}

fn derivative_integrity(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for id in catalog::ids() {
        let m = cfg.metric(id)?;
        let pts = cfg.samples_of(m.as_ref(), 2 * cfg.samples)?;
        let rows: Vec<(f64, f64, f64)> = pts
            .par_iter()
            .map(|p| {
                let n = p.dim();
                let f = m.jet(p, 2)?;
                let e = &f * &f;
                let (grad, hess) = reference::energy_derivatives(m.as_ref(), p, FD_STEP)
                    .ok_or_else(|| Error::Argument(format!("no reference form for {}", m.id())))?;
                let mut first = 0.0f64;
                let mut second = 0.0f64;
                for a in 0..2 * n {
                    first = first.max(relative_fd_error(e.partial_wrt(&[a]).expect("order 2"), grad[a]));
                    for b in 0..=a {
                        second = second.max(relative_fd_error(e.partial_wrt(&[a, b]).expect("order 2"), hess[a][b]));
                    }
                }
                Ok((first, second, homogeneity_residuals(&m, p)?))
            })
            .collect::<Result<_>>()?;
        let first: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, 1.0)).collect();
        let second: Vec<(f64, f64)> = rows.iter().map(|r| (r.1, 1.0)).collect();
        let euler: Vec<(f64, f64)> = rows.iter().map(|r| (r.2, 1.0)).collect();
        out.push(worst_of(id, &pts, &first, "fd_first_derivatives", cfg.seed, FD_REL_TOL));
        out.push(worst_of(id, &pts, &second, "fd_second_derivatives", cfg.seed, FD_REL_TOL));
        out.push(worst_of(id, &pts, &euler, "euler_homogeneity", cfg.seed, TOL_FIRST));
    }
    Ok(out)
}

/// Curvature verdict plus invariant checks for one metric.
pub fn verify_metric(
    metric: &Arc<dyn FinslerMetric>,
    samples: &[SamplePoint],
    seed: u64,
    tol: f64,
) -> Result<(CurvatureVerdict, Vec<CheckResult>)> {
    let id = metric.id().to_string();
    let verdict = constant_curvature_verdict(metric, samples, tol)?;
    let rows: Vec<[(f64, f64); 5]> = samples
        .par_iter()
        .map(|p| {
            let b = TensorBundle::from_metric(metric, p, 1)?;
            let md = b.metric.as_ref().expect("metric bundle");
            let n = p.dim();
            let gyy: f64 = (0..n)
                .map(|i| (0..n).map(|j| md.g[(i, j)] * p.y[i] * p.y[j]).sum::<f64>())
                .sum();
            let f2 = md.f * md.f;
            let sj = SprayJets::new(&crate::geometry::GeodesicSpray::new(metric.clone()), p, 1)?;
            let e = metric.jet(p, 2)?;
            let el = sj.euler_lagrange(&(&e * &e)).map_err(Error::from)?;
            let el_scale = (0..n)
                .map(|i| (&e * &e).partial_wrt(&[i]).expect("order 2").abs())
                .fold(1.0, f64::max);
            let annihilate = (0..n)
                .map(|i| (0..n).map(|j| b.jacobi[i][j].value() * p.y[j]).sum::<f64>().abs())
                .fold(0.0, f64::max);
            let mut antisym = 0.0f64;
            let mut contraction = 0.0f64;
            for i in 0..n {
                for k in 0..n {
                    let c: f64 = (0..n).map(|j| b.curvature_value(i, j, k) * p.y[j]).sum();
                    contraction = contraction.max((c * crate::geometry::PHI_FROM_CURVATURE - b.jacobi[i][k].value()).abs());
                    for j in 0..n {
                        antisym = antisym.max((b.curvature_value(i, j, k) + b.curvature_value(i, k, j)).abs());
                    }
                }
            }
            let scale = crate::weyl::curvature_scale(&b);
            Ok([
                ((gyy - f2).abs(), f2),
                (el.iter().map(|j| j.value().abs()).fold(0.0, f64::max), el_scale),
                (annihilate, scale),
                (contraction, scale),
                (homogeneity_residuals(metric, p)?.max(antisym / scale), 1.0),
            ])
        })
        .collect::<Result<_>>()?;
    let ids = [
        ("energy_from_metric_tensor", 1e-10),
        ("geodesic_spray_residual", TOL_FIRST),
        ("jacobi_annihilates_fiber", TOL_FIRST),
        ("jacobi_is_contracted_curvature", TOL_FIRST),
        ("homogeneity_and_antisymmetry", TOL_FIRST),
    ];
    let mut checks: Vec<CheckResult> = ids
        .iter()
        .enumerate()
        .map(|(k, (cid, tol))| {
            let r: Vec<(f64, f64)> = rows.iter().map(|row| row[k]).collect();
            worst_of(&id, samples, &r, cid, seed, *tol)
        })
        .collect();
    if let Some(expected) = catalog::entry(&id).ok().and_then(|e| e.expected) {
        checks.push(match expected {
            Classification::Constant { kappa } => constant_verdict_check(&verdict, &id, kappa, seed),
            other => verdict_kind_check(&verdict, &id, other, seed),
        });
    } else {
        checks.push(CheckResult::new(
            format!("verdict={}", verdict.classification),
            id.clone(),
            samples.len(),
            seed,
            0.0,
            1.0,
            tol,
            verdict.worst_w0().point.clone(),
        ));
    }
    Ok((verdict, checks))
}
