//! Projectively related pairs: projective factor, Hamel conditions, the
//! four equivalent projective-metrizability conditions, the transformation
//! of `Φ` and `W₀` under `S̃ = S − 2P𝒞`, and the Beltrami verdict.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::autodiff::Jet;
use crate::catalog::{sample_points, SamplerConfig};
use crate::error::{AtPoint, Error, Result};
use crate::forms::SemiBasicForm;
use crate::geometry::{
    max_abs, DeformedSpray, FinslerMetric, FlatSpray, GeodesicSpray, SamplePoint, ScalarField, Spray, SprayJets,
    TensorBundle,
};
use crate::report::{CheckResult, ResidualTracker};
use crate::weyl::{
    constant_curvature_verdict, curvature_scale, fiber_variation_of_metric, weyl_type, Classification,
    CurvatureVerdict, RIEMANNIAN_TOL,
};

/// Tolerance for the exact identities of this module (relative to scale).
pub const IDENTITY_TOL: f64 = 1e-8;

/// Relative tolerance for positive 1-homogeneity of a projective factor.
pub const HOMOGENEITY_TOL: f64 = 1e-9;

/// The first member of a projective pair: the flat spray or a metric.
#[derive(Debug, Clone)]
pub enum BaseSpray {
    Flat(usize),
    Metric(Arc<dyn FinslerMetric>),
}

impl BaseSpray {
    pub fn dim(&self) -> usize {
        match self {
            BaseSpray::Flat(n) => *n,
            BaseSpray::Metric(m) => m.dim(),
        }
    }

    pub fn spray(&self) -> Arc<dyn Spray> {
        match self {
            BaseSpray::Flat(n) => Arc::new(FlatSpray { dim: *n }),
            BaseSpray::Metric(m) => Arc::new(GeodesicSpray::new(m.clone())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            BaseSpray::Flat(_) => "flat".into(),
            BaseSpray::Metric(m) => m.id().into(),
        }
    }

    fn admits(&self, p: &SamplePoint) -> bool {
        match self {
            BaseSpray::Flat(_) => true,
            BaseSpray::Metric(m) => m.jet(p, 0).is_ok(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectivePair {
    pub base: BaseSpray,
    pub target: Arc<dyn FinslerMetric>,
}

impl ProjectivePair {
    pub fn new(base: BaseSpray, target: Arc<dyn FinslerMetric>) -> Result<Self> {
        if base.dim() != target.dim() {
            return Err(Error::Argument(format!(
                "pair dimensions differ: {} vs {}",
                base.dim(),
                target.dim()
            )));
        }
        Ok(ProjectivePair { base, target })
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn label(&self) -> String {
        format!("({}, {})", self.base.label(), self.target.id())
    }

    pub fn factor(&self) -> ProjectiveFactor {
        ProjectiveFactor {
            base: self.base.spray(),
            target: self.target.clone(),
        }
    }

    /// Samples from the target's domain that the base also accepts.
    pub fn samples(&self, cfg: &SamplerConfig) -> Result<Vec<SamplePoint>> {
        let pts: Vec<SamplePoint> = sample_points(self.target.as_ref(), cfg)?
            .into_iter()
            .filter(|p| self.base.admits(p))
            .collect();
        if pts.is_empty() {
            return Err(Error::Sampling(format!("no common sample points for {}", self.label())));
        }
        Ok(pts)
    }
}

/// `P = S(F̃) / (2F̃)`.
#[derive(Clone)]
pub struct ProjectiveFactor {
    pub base: Arc<dyn Spray>,
    pub target: Arc<dyn FinslerMetric>,
}

impl fmt::Debug for ProjectiveFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProjectiveFactor({}, {})", self.base.label(), self.target.id())
    }
}

impl ScalarField for ProjectiveFactor {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn jet_at(&self, p: &SamplePoint, order: usize) -> Result<Jet> {
        let sj = SprayJets::new(self.base.as_ref(), p, order)?;
        let f = self.target.jet(p, order + 1)?;
        let sf = sj.apply(&f).at(p)?;
        sf.try_div(&f.scale(2.0)).at(p)
    }
}

/// Value of the projective factor of `target` relative to `base` at `p`.
pub fn projective_factor(base: &Arc<dyn Spray>, target: &Arc<dyn FinslerMetric>, p: &SamplePoint) -> Result<f64> {
    ProjectiveFactor {
        base: base.clone(),
        target: target.clone(),
    }
    .value_at(p)
}

/// `|yⁱ ∂P/∂yⁱ − P| / max(1, |P|)`.
pub fn homogeneity_residual(field: &dyn ScalarField, p: &SamplePoint) -> Result<f64> {
    let n = p.dim();
    let j = field.jet_at(p, 1)?;
    let euler: f64 = (0..n).map(|i| p.y[i] * j.partial_wrt(&[n + i]).expect("order 1")).sum();
    Ok((euler - j.value()).abs() / j.value().abs().max(1.0))
}

/// `δ_S P` and `d_h d_J P` at one point.
pub fn hamel_forms(spray: &dyn Spray, factor: &dyn ScalarField, p: &SamplePoint) -> Result<(SemiBasicForm, SemiBasicForm)> {
    let sj = SprayJets::new(spray, p, 1)?;
    let pj = factor.jet_at(p, 2)?;
    let delta = SemiBasicForm::one_form(sj.euler_lagrange(&pj).at(p)?);
    let dhdj = SemiBasicForm::scalar(pj).d_j().at(p)?.d_h(&sj).at(p)?;
    Ok((delta, dhdj))
}

#[derive(Debug, Clone)]
pub struct HamelReport {
    /// Largest `‖δ_S P‖ / scale` over the samples.
    pub delta_sp: f64,
    /// Largest `‖d_h d_J P‖ / scale` over the samples.
    pub dhdjp: f64,
    pub tolerance: f64,
    pub is_hamel: bool,
    /// One residual passes while the other exceeds ten times the tolerance.
    pub equivalence_violation: bool,
    pub worst_delta: Option<SamplePoint>,
    pub worst_dhdj: Option<SamplePoint>,
}

/// Residual scale for a projective factor: `max(1, |P|)`.
fn factor_scale(pj: f64) -> f64 {
    1f64.max(pj.abs())
}

pub fn hamel_check(
    spray: &Arc<dyn Spray>,
    factor: &dyn ScalarField,
    samples: &[SamplePoint],
    tol: f64,
) -> Result<HamelReport> {
    if samples.is_empty() {
        return Err(Error::Argument("no samples for Hamel check".into()));
    }
    let rows: Vec<(f64, f64, f64, f64)> = samples
        .par_iter()
        .map(|p| {
            let h = homogeneity_residual(factor, p)?;
            if h > HOMOGENEITY_TOL {
                return Err(Error::Precondition(format!(
                    "projective factor is not 1-homogeneous at {p}: residual {h:e}"
                )));
            }
            let (delta, dhdj) = hamel_forms(spray.as_ref(), factor, p)?;
            Ok((delta.max_abs(), dhdj.max_abs(), factor_scale(factor.value_at(p)?), h))
        })
        .collect::<Result<_>>()?;
    let mut delta_t = ResidualTracker::new();
    let mut dhdj_t = ResidualTracker::new();
    for (p, (d, dh, scale, _)) in samples.iter().zip(&rows) {
        delta_t.observe(*d, *scale, p);
        dhdj_t.observe(*dh, *scale, p);
    }
    let delta_sp = delta_t.max_ratio();
    let dhdjp = dhdj_t.max_ratio();
    let equivalence_violation = (delta_sp <= tol && dhdjp > 10.0 * tol) || (dhdjp <= tol && delta_sp > 10.0 * tol);
    Ok(HamelReport {
        delta_sp,
        dhdjp,
        tolerance: tol,
        is_hamel: delta_sp <= tol && dhdjp <= tol,
        equivalence_violation,
        worst_delta: delta_t.worst_point().cloned(),
        worst_dhdj: dhdj_t.worst_point().cloned(),
    })
}

/// Residual of one form identity and the magnitude it is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    fn between(lhs: &SemiBasicForm, rhs: &SemiBasicForm) -> Self {
        Residual {
            value: lhs.sub(rhs).max_abs(),
            scale: 1f64.max(lhs.max_abs()).max(rhs.max_abs()),
        }
    }

    pub fn ratio(&self) -> f64 {
        self.value / self.scale
    }

    fn max(self, other: Residual) -> Residual {
        if other.ratio() > self.ratio() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmResiduals {
    /// `δ_S F̃ = 0`
    pub pm1: Residual,
    /// `d_h F̃ = d_J(P F̃)`
    pub pm2: Residual,
    /// `δ_S F̃² = 2P d_J F̃²`
    pub pm3: Residual,
    /// `d_h d_J F̃² = d_J P ∧ d_J F̃²` together with `S F̃ = 2P F̃`
    pub pm4: Residual,
    pub factor: f64,
}

impl PmResiduals {
    pub fn all(&self) -> [Residual; 4] {
        [self.pm1, self.pm2, self.pm3, self.pm4]
    }

    pub fn max_ratio(&self) -> f64 {
        self.all().iter().map(Residual::ratio).fold(0.0, f64::max)
    }
}

pub fn pm_conditions(spray: &Arc<dyn Spray>, target: &Arc<dyn FinslerMetric>, p: &SamplePoint) -> Result<PmResiduals> {
    let sj = SprayJets::new(spray.as_ref(), p, 1)?;
    let f = target.jet(p, 3)?;
    let f2 = &f * &f;
    let factor = ProjectiveFactor {
        base: spray.clone(),
        target: target.clone(),
    };
    let pj = factor.jet_at(p, 1)?;

    // PM₁: S(∂F̃/∂yⁱ) and ∂F̃/∂xⁱ are compared term by term
    let n = p.dim();
    let mut s_terms = Vec::with_capacity(n);
    let mut x_terms = Vec::with_capacity(n);
    for i in 0..n {
        s_terms.push(sj.apply(&sj.vertical(&f, i).at(p)?).at(p)?);
        x_terms.push(f.derivative(i).at(p)?);
    }
    let pm1 = Residual::between(&SemiBasicForm::one_form(s_terms), &SemiBasicForm::one_form(x_terms));

    let df = SemiBasicForm::scalar(f.clone());
    let pm2 = Residual::between(&df.d_h(&sj).at(p)?, &SemiBasicForm::scalar(&pj * &f).d_j().at(p)?);

    let djf2 = SemiBasicForm::scalar(f2.clone()).d_j().at(p)?;
    let el = SemiBasicForm::one_form(sj.euler_lagrange(&f2).at(p)?);
    let pm3 = Residual::between(&el, &djf2.mul_scalar(&pj).scale(2.0));

    let lhs = djf2.d_h(&sj).at(p)?;
    let djp = SemiBasicForm::scalar(pj.clone()).d_j().at(p)?;
    let wedge = Residual::between(&lhs, &djp.wedge(&djf2));
    let sf = sj.apply(&f).at(p)?;
    let scalar = Residual::between(
        &SemiBasicForm::scalar(sf),
        &SemiBasicForm::scalar((&pj * &f).scale(2.0)),
    );
    Ok(PmResiduals {
        pm1,
        pm2,
        pm3,
        pm4: wedge.max(scalar),
        factor: pj.value(),
    })
}

/// Worst PM residuals over the samples, one check per condition.
pub fn pm_checks(pair: &ProjectivePair, samples: &[SamplePoint], seed: u64, tol: f64) -> Result<Vec<CheckResult>> {
    let spray = pair.base.spray();
    let rows: Vec<PmResiduals> = samples
        .par_iter()
        .map(|p| pm_conditions(&spray, &pair.target, p))
        .collect::<Result<_>>()?;
    let mut trackers = vec![ResidualTracker::new(); 4];
    for (p, r) in samples.iter().zip(&rows) {
        for (t, res) in trackers.iter_mut().zip(r.all()) {
            t.observe(res.value, res.scale, p);
        }
    }
    Ok(trackers
        .into_iter()
        .enumerate()
        .map(|(k, t)| t.finish(format!("pm{}", k + 1), pair.label(), seed, tol))
        .collect())
}

fn ensure_related(pair: &ProjectivePair, samples: &[SamplePoint]) -> Result<()> {
    let checks = pm_checks(pair, samples, 0, IDENTITY_TOL)?;
    if checks.iter().all(|c| c.passed) {
        return Ok(());
    }
    let detail: Vec<String> = checks
        .iter()
        .map(|c| format!("{}={:.3e}/{:.3e}", c.check_id, c.max_residual, c.scale))
        .collect();
    Err(Error::Precondition(format!(
        "{} is not projectively related: {}",
        pair.label(),
        detail.join(", ")
    )))
}

/// Predicted Jacobi endomorphism of `S̃ = S − 2P𝒞` from the base data:
/// `Φ̃ = Φ + (P² − SP) J − (P d_J P + d_J(SP) − 3 d_h P) ⊗ 𝒞`.
pub fn jacobi_transform(base: &TensorBundle, factor: &dyn ScalarField) -> Result<DMatrix<f64>> {
    let p = &base.point;
    let n = p.dim();
    let sj = SprayJets::from_coefficients(p, base.spray.iter().map(|g| g.truncate(1)).collect())?;
    let pj = factor.jet_at(p, 2)?;
    let sp = sj.apply(&pj).at(p)?;
    let phi = base.jacobi_matrix();
    let shift = pj.value() * pj.value() - sp.value();
    let mut covector = Vec::with_capacity(n);
    for j in 0..n {
        let djp = sj.vertical(&pj, j).at(p)?.value();
        let djsp = sj.vertical(&sp, j).at(p)?.value();
        let dhp = sj.horizontal(&pj, j).at(p)?.value();
        covector.push(pj.value() * djp + djsp - 3.0 * dhp);
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        phi[(i, j)] + shift * delta - covector[j] * p.y[i]
    }))
}

/// `P² − S P` at the bundle point.
pub fn trace_shift(base: &TensorBundle, factor: &dyn ScalarField) -> Result<f64> {
    let p = &base.point;
    let sj = SprayJets::from_coefficients(p, base.spray.iter().map(|g| g.truncate(1)).collect())?;
    let pj = factor.jet_at(p, 1)?;
    let sp = sj.apply(&pj).at(p)?;
    Ok(pj.value() * pj.value() - sp.value())
}

/// Direct Jacobi endomorphism of the deformed spray `S − 2P𝒞`.
pub fn deformed_jacobi(base: &Arc<dyn Spray>, factor: Arc<dyn ScalarField>, p: &SamplePoint) -> Result<DMatrix<f64>> {
    let spray = DeformedSpray {
        base: base.clone(),
        factor,
    };
    Ok(TensorBundle::from_spray(&spray, p, 0)?.jacobi_matrix())
}

/// Residuals of the Jacobi transformation law and its trace over samples.
pub fn jacobi_transform_checks(pair: &ProjectivePair, samples: &[SamplePoint], seed: u64, tol: f64) -> Result<Vec<CheckResult>> {
    let spray = pair.base.spray();
    let factor = Arc::new(pair.factor());
    let rows: Vec<(f64, f64, f64, f64)> = samples
        .par_iter()
        .map(|p| {
            let base = TensorBundle::from_spray(spray.as_ref(), p, 0)?;
            let predicted = jacobi_transform(&base, factor.as_ref())?;
            let target = TensorBundle::from_metric(&pair.target, p, 0)?;
            let direct = target.jacobi_matrix();
            let via_deformation = deformed_jacobi(&spray, factor.clone(), p)?;
            let scale = curvature_scale(&target).max(curvature_scale(&base));
            let residual = max_abs((&predicted - &direct).iter()).max(max_abs((&predicted - &via_deformation).iter()));
            let n1 = (p.dim() - 1) as f64;
            let trace_residual = (direct.trace() - base.jacobi_matrix().trace() - n1 * trace_shift(&base, factor.as_ref())?).abs();
            Ok((residual, scale, trace_residual, scale))
        })
        .collect::<Result<_>>()?;
    let mut law = ResidualTracker::new();
    let mut trace = ResidualTracker::new();
    for (p, (r, s, tr, ts)) in samples.iter().zip(&rows) {
        law.observe(*r, *s, p);
        trace.observe(*tr, *ts, p);
    }
    Ok(vec![
        law.finish("jacobi_transform", pair.label(), seed, tol),
        trace.finish("jacobi_trace", pair.label(), seed, tol),
    ])
}

/// Residual of `W̃₀ = W₀ − (3/2) δ_S P ⊗ 𝒞` over the samples. The pair must
/// pass the projective-relatedness guard.
pub fn weyl_transform_check(pair: &ProjectivePair, samples: &[SamplePoint], seed: u64, tol: f64) -> Result<CheckResult> {
    if samples.is_empty() {
        return Err(Error::Argument("no samples for the Weyl transformation check".into()));
    }
    ensure_related(pair, samples)?;
    let spray = pair.base.spray();
    let factor = pair.factor();
    let rows: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|p| {
            let base = TensorBundle::from_spray(spray.as_ref(), p, 1)?;
            let target = TensorBundle::from_metric(&pair.target, p, 1)?;
            let w0 = weyl_type(&base)?.w0;
            let w0t = weyl_type(&target)?.w0;
            let (delta, _) = hamel_forms(spray.as_ref(), &factor, p)?;
            let dsp = delta.values();
            let n = p.dim();
            let predicted = DMatrix::from_fn(n, n, |i, j| w0[(i, j)] - 1.5 * dsp[j] * p.y[i]);
            let scale = curvature_scale(&base).max(curvature_scale(&target));
            Ok((max_abs((&w0t - &predicted).iter()), scale))
        })
        .collect::<Result<_>>()?;
    let mut t = ResidualTracker::new();
    for (p, (r, s)) in samples.iter().zip(&rows) {
        t.observe(*r, *s, p);
    }
    Ok(t.finish("weyl_transform", pair.label(), seed, tol))
}

/// Outcome of one of the three curvature identities; `None` when its
/// hypotheses are not certified.
#[derive(Debug, Clone)]
pub struct IdentityOutcome {
    pub id: &'static str,
    pub result: Option<CheckResult>,
    pub skipped: Option<String>,
}

/// `d_h d_h d_J F̃²`, `d_h d_J P ∧ d_J F̃²` and `d_h d_J P` at one point.
pub fn drdj_forms(
    spray: &dyn Spray,
    factor: &dyn ScalarField,
    target: &dyn FinslerMetric,
    p: &SamplePoint,
) -> Result<(SemiBasicForm, SemiBasicForm, SemiBasicForm)> {
    let sj = SprayJets::new(spray, p, 2)?;
    let f = target.jet(p, 3)?;
    let djf2 = SemiBasicForm::scalar(&f * &f).d_j().at(p)?;
    let ddd = djf2.d_h(&sj).at(p)?.d_h(&sj).at(p)?;
    let pj = factor.jet_at(p, 2)?;
    let dhdjp = SemiBasicForm::scalar(pj).d_j().at(p)?.d_h(&sj).at(p)?;
    let wedge = dhdjp.wedge(&djf2);
    Ok((ddd, wedge, dhdjp))
}

fn base_classification(pair: &ProjectivePair, samples: &[SamplePoint], tol: f64) -> Result<Classification> {
    match &pair.base {
        BaseSpray::Flat(_) => Ok(Classification::Constant { kappa: 0.0 }),
        BaseSpray::Metric(m) => Ok(constant_curvature_verdict(m, samples, tol)?.classification),
    }
}

fn is_riemannian(metric: &dyn FinslerMetric, samples: &[SamplePoint]) -> Result<bool> {
    Ok(fiber_variation_of_metric(metric, samples)? <= RIEMANNIAN_TOL)
}

pub fn drdj_identities(pair: &ProjectivePair, samples: &[SamplePoint], seed: u64, tol: f64) -> Result<Vec<IdentityOutcome>> {
    ensure_related(pair, samples)?;
    let spray = pair.base.spray();
    let factor = pair.factor();
    let rows: Vec<(SemiBasicForm, SemiBasicForm, SemiBasicForm)> = samples
        .par_iter()
        .map(|p| drdj_forms(spray.as_ref(), &factor, pair.target.as_ref(), p))
        .collect::<Result<_>>()?;

    let base_constant = base_classification(pair, samples, crate::weyl::DEFAULT_VERDICT_TOL)?.is_constant();
    let base_riemannian = match &pair.base {
        BaseSpray::Flat(_) => true,
        BaseSpray::Metric(m) => is_riemannian(m.as_ref(), samples)?,
    };
    let target_riemannian = is_riemannian(pair.target.as_ref(), samples)?;

    let mut d1 = ResidualTracker::new();
    let mut d2 = ResidualTracker::new();
    let mut d3 = ResidualTracker::new();
    for (p, (ddd, wedge, dhdjp)) in samples.iter().zip(&rows) {
        let r = Residual::between(ddd, wedge);
        d1.observe(r.value, r.scale, p);
        d2.observe(wedge.max_abs(), 1f64.max(ddd.max_abs()), p);
        d3.observe(dhdjp.max_abs(), 1.0, p);
    }
    let label = pair.label();
    let mut out = vec![IdentityOutcome {
        id: "drdj1",
        result: Some(d1.finish("drdj1", label.clone(), seed, tol)),
        skipped: None,
    }];
    out.push(if base_constant {
        IdentityOutcome {
            id: "drdj2",
            result: Some(d2.finish("drdj2", label.clone(), seed, tol)),
            skipped: None,
        }
    } else {
        IdentityOutcome {
            id: "drdj2",
            result: None,
            skipped: Some("base curvature is not constant".into()),
        }
    });
    out.push(if base_constant && base_riemannian && target_riemannian {
        IdentityOutcome {
            id: "drdj3",
            result: Some(d3.finish("drdj3", label, seed, tol)),
            skipped: None,
        }
    } else {
        IdentityOutcome {
            id: "drdj3",
            result: None,
            skipped: Some("pair is not certified bi-Riemannian with constant-curvature base".into()),
        }
    });
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BeltramiVerdict {
    pub pair: String,
    pub base: Classification,
    pub target: CurvatureVerdict,
    pub hamel: HamelReport,
    /// The biconditional held on this instance.
    pub consistent: bool,
}

impl BeltramiVerdict {
    pub fn ensure_consistent(&self) -> Result<()> {
        if self.consistent && !self.hamel.equivalence_violation {
            Ok(())
        } else {
            Err(Error::Integrity(format!(
                "{}: base {}, target {}, hamel {} (delta {:.3e}, dhdj {:.3e})",
                self.pair,
                self.base,
                self.target.classification,
                self.hamel.is_hamel,
                self.hamel.delta_sp,
                self.hamel.dhdjp
            )))
        }
    }
}

/// Given one member of constant curvature, the other has constant
/// curvature exactly when the projective factor is a Hamel function.
pub fn beltrami_verdict(pair: &ProjectivePair, samples: &[SamplePoint], tol: f64) -> Result<BeltramiVerdict> {
    ensure_related(pair, samples)?;
    let base = base_classification(pair, samples, tol)?;
    let target = constant_curvature_verdict(&pair.target, samples, tol)?;
    let spray = pair.base.spray();
    let hamel = hamel_check(&spray, &pair.factor(), samples, tol)?;
    let base_c = base.is_constant();
    let target_c = target.classification.is_constant();
    let consistent = if base_c || target_c {
        (base_c && target_c) == hamel.is_hamel
    } else {
        true
    };
    Ok(BeltramiVerdict {
        pair: pair.label(),
        base,
        target,
        hamel,
        consistent,
    })
}
