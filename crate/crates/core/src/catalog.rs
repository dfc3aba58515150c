//! Built-in example metrics and deterministic sample-point generation.
//!
//! Sampling uses xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). Uniform reals are formed from the
//! top 53 bits of each output, `(u >> 11) · 2⁻⁵³`, so a seed reproduces the
//! same point set on every platform.

use std::sync::Arc;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::autodiff::{dot, Jet, JetError};
use crate::error::{Error, Result};
use crate::geometry::{FinslerMetric, SamplePoint, MIN_FIBER_NORM};
use crate::weyl::Classification;

fn ball_domain(x: &[f64], radius: f64) -> bool {
    x.iter().map(|v| v * v).sum::<f64>() < radius * radius
}

/// `F = |y|`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    pub dim: usize,
}

impl FinslerMetric for Euclidean {
    fn id(&self) -> &str {
        "euclidean"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
    }
    fn eval(&self, _x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
        Jet::norm(y, MIN_FIBER_NORM)
    }
}

/// `F = |y| + ⟨x, y⟩` on the unit ball.
#[derive(Debug, Clone)]
pub struct Numata {
    pub dim: usize,
}

impl FinslerMetric for Numata {
    fn id(&self) -> &str {
        "numata"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        ball_domain(x, 1.0)
    }
    fn domain_radius(&self) -> f64 {
        1.0
    }
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
        Ok(Jet::norm(y, MIN_FIBER_NORM)? + dot(x, y))
    }
}

/// `√((1−4|x|²)|y|² + 4⟨x,y⟩²)/(1−4|x|²) + 2⟨x,y⟩/(1−4|x|²)` on the ball of radius ½.
#[derive(Debug, Clone)]
pub struct FunkHalf {
    pub dim: usize,
}

impl FinslerMetric for FunkHalf {
    fn id(&self) -> &str {
        "funk_half"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        ball_domain(x, 0.5)
    }
    fn domain_radius(&self) -> f64 {
        0.5
    }
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
        let xx = dot(x, x);
        let yy = dot(y, y);
        let xy = dot(x, y);
        let denom = (xx.scale(-4.0)).add_scalar(1.0);
        let radicand = &denom * &yy + (&xy * &xy).scale(4.0);
        (radicand.sqrt()? + xy.scale(2.0)).try_div(&denom)
    }
}

fn funk_unit(x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
    Ok(klein(x, y)? + dot(x, y).try_div(&dot(x, x).scale(-1.0).add_scalar(1.0))?)
}

fn klein(x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
    let xx = dot(x, x);
    let yy = dot(y, y);
    let xy = dot(x, y);
    let radicand = &yy - (&xx * &yy - &xy * &xy);
    radicand.sqrt()?.try_div(&xx.scale(-1.0).add_scalar(1.0))
}

/// The Funk metric of the unit ball,
/// `(√(|y|² − (|x|²|y|² − ⟨x,y⟩²)) + ⟨x,y⟩)/(1−|x|²)`.
#[derive(Debug, Clone)]
pub struct FunkUnit {
    pub dim: usize,
}

impl FinslerMetric for FunkUnit {
    fn id(&self) -> &str {
        "funk_unit"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        ball_domain(x, 1.0)
    }
    fn domain_radius(&self) -> f64 {
        1.0
    }
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
        funk_unit(x, y)
    }
}

/// Unit-ball Funk metric plus the exact 1-form `⟨a,y⟩/(1+⟨a,x⟩)`, `|a| < 1`.
#[derive(Debug, Clone)]
pub struct FunkShifted {
    shift: Vec<f64>,
}

impl FunkShifted {
    pub fn new(shift: Vec<f64>) -> Result<Self> {
        let norm = shift.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm < 1.0) {
            return Err(Error::Parameter(format!(
                "funk_shifted needs |a| < 1, got |a| = {norm}"
            )));
        }
        Ok(FunkShifted { shift })
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }
}

impl FinslerMetric for FunkShifted {
    fn id(&self) -> &str {
        "funk_shifted"
    }
    fn dim(&self) -> usize {
        self.shift.len()
    }
    fn params(&self) -> Vec<(String, f64)> {
        self.shift
            .iter()
            .enumerate()
            .map(|(i, &v)| (format!("a{i}"), v))
            .collect()
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        let ax: f64 = self.shift.iter().zip(x).map(|(a, b)| a * b).sum();
        ball_domain(x, 1.0) && 1.0 + ax > 0.0
    }
    fn domain_radius(&self) -> f64 {
        1.0
    }
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
        let a: Vec<Jet> = self.shift.iter().map(|&v| x[0].constant_like(v)).collect();
        let shift = dot(&a, y).try_div(&dot(&a, x).add_scalar(1.0))?;
        Ok(funk_unit(x, y)? + shift)
    }
}

/// The Klein model of hyperbolic space on the unit ball,
/// `√(|y|² − (|x|²|y|² − ⟨x,y⟩²))/(1−|x|²)`.
#[derive(Debug, Clone)]
pub struct Klein {
    pub dim: usize,
}

impl FinslerMetric for Klein {
    fn id(&self) -> &str {
        "klein"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        ball_domain(x, 1.0)
    }
    fn domain_radius(&self) -> f64 {
        1.0
    }
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
        klein(x, y)
    }
}

/// `exp(c·x¹) · klein`: a Riemannian metric that is neither projectively
/// flat nor of constant curvature for `c ≠ 0`.
#[derive(Debug, Clone)]
pub struct KleinConformal {
    pub dim: usize,
    pub c: f64,
}

impl FinslerMetric for KleinConformal {
    fn id(&self) -> &str {
        "klein_conformal"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("c".into(), self.c)]
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        ball_domain(x, 1.0)
    }
    fn domain_radius(&self) -> f64 {
        1.0
    }
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
        Ok(x[0].scale(self.c).exp() * klein(x, y)?)
    }
}

/// Default shift vector `a = (0.2, 0, …, 0)` for `funk_shifted`.
pub fn default_shift(dim: usize) -> Vec<f64> {
    let mut a = vec![0.0; dim];
    a[0] = 0.2;
    a
}

pub const KLEIN_CONFORMAL_C: f64 = 0.5;

/// One catalog metric with its known classification.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub domain_description: &'static str,
    pub expected: Option<Classification>,
    /// Metric at dimension `n` with default parameters.
    pub constructor: fn(usize) -> Result<Arc<dyn FinslerMetric>>,
}

impl CatalogEntry {
    pub fn build(&self, dim: usize) -> Result<Arc<dyn FinslerMetric>> {
        if dim < 3 {
            return Err(Error::Dimension(dim));
        }
        (self.constructor)(dim)
    }
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            id: "euclidean",
            domain_description: "R^n",
            expected: Some(Classification::Constant { kappa: 0.0 }),
            constructor: |n| Ok(Arc::new(Euclidean { dim: n })),
        },
        CatalogEntry {
            id: "numata",
            domain_description: "unit ball B^n(1)",
            expected: Some(Classification::ScalarNonconstant),
            constructor: |n| Ok(Arc::new(Numata { dim: n })),
        },
        CatalogEntry {
            id: "funk_half",
            domain_description: "ball B^n(1/2)",
            expected: Some(Classification::Constant { kappa: -1.0 }),
            constructor: |n| Ok(Arc::new(FunkHalf { dim: n })),
        },
        CatalogEntry {
            id: "funk_unit",
            domain_description: "unit ball B^n(1)",
            expected: Some(Classification::Constant { kappa: -0.25 }),
            constructor: |n| Ok(Arc::new(FunkUnit { dim: n })),
        },
        CatalogEntry {
            id: "funk_shifted",
            domain_description: "unit ball B^n(1), shift a = (0.2, 0, ..., 0)",
            expected: None,
            constructor: |n| Ok(Arc::new(FunkShifted::new(default_shift(n))?)),
        },
        CatalogEntry {
            id: "klein",
            domain_description: "unit ball B^n(1)",
            expected: Some(Classification::Constant { kappa: -1.0 }),
            constructor: |n| Ok(Arc::new(Klein { dim: n })),
        },
        CatalogEntry {
            id: "klein_conformal",
            domain_description: "unit ball B^n(1), factor exp(0.5 x^1)",
            expected: Some(Classification::NotScalar),
            constructor: |n| {
                Ok(Arc::new(KleinConformal {
                    dim: n,
                    c: KLEIN_CONFORMAL_C,
                }))
            },
        },
    ]
}

pub fn entry(id: &str) -> Result<CatalogEntry> {
    catalog()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownMetric(id.to_string()))
}

/// Build a catalog metric by id at dimension `dim` with default parameters.
pub fn build(id: &str, dim: usize) -> Result<Arc<dyn FinslerMetric>> {
    entry(id)?.build(dim)
}

pub fn ids() -> Vec<&'static str> {
    catalog().iter().map(|e| e.id).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub count: usize,
    /// Fraction of the domain radius excluded at the boundary.
    pub boundary_margin: f64,
    /// Componentwise range for fiber directions.
    pub y_box: (f64, f64),
    pub y_min_norm: f64,
    /// Reject points where `F` falls below this value.
    pub f_floor: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 42,
            count: 100,
            boundary_margin: 0.15,
            y_box: (-1.0, 1.0),
            y_min_norm: 0.1,
            f_floor: 0.05,
        }
    }
}

impl SamplerConfig {
    pub fn with_count(seed: u64, count: usize) -> Self {
        SamplerConfig {
            seed,
            count,
            ..Self::default()
        }
    }
}

struct Uniform(Xoshiro256StarStar);

impl Uniform {
    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

/// Deterministic sample points strictly inside the metric's domain.
pub fn sample_points(metric: &dyn FinslerMetric, cfg: &SamplerConfig) -> Result<Vec<SamplePoint>> {
    if cfg.count == 0 {
        return Err(Error::Argument("sample count must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.boundary_margin) {
        return Err(Error::Argument(format!(
            "boundary margin {} outside [0, 1)",
            cfg.boundary_margin
        )));
    }
    let n = metric.dim();
    let radius = metric.domain_radius().min(1.0) * (1.0 - cfg.boundary_margin);
    let mut rng = Uniform(Xoshiro256StarStar::seed_from_u64(cfg.seed));
    let budget = 10_000usize.saturating_mul(cfg.count);
    let mut points = Vec::with_capacity(cfg.count);
    let mut attempts = 0usize;
    while points.len() < cfg.count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Sampling(format!(
                "{} of {} points after {budget} attempts for {}",
                points.len(),
                cfg.count,
                metric.id()
            )));
        }
        let x: Vec<f64> = (0..n).map(|_| rng.range(-radius, radius)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.range(cfg.y_box.0, cfg.y_box.1)).collect();
        if !ball_domain(&x, radius) || !metric.in_domain(&x) {
            continue;
        }
        if y.iter().map(|v| v * v).sum::<f64>().sqrt() < cfg.y_min_norm {
            continue;
        }
        let p = SamplePoint::new(x, y)?;
        match metric.jet(&p, 0) {
            Ok(f) if f.value() >= cfg.f_floor => points.push(p),
            _ => continue,
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_required_entries() {
        let ids = ids();
        for id in ["euclidean", "numata", "funk_half", "funk_unit", "funk_shifted", "klein"] {
            assert!(ids.contains(&id), "{id} missing");
        }
        assert_eq!(entry("numata").unwrap().expected, Some(Classification::ScalarNonconstant));
        assert_eq!(
            entry("funk_half").unwrap().expected,
            Some(Classification::Constant { kappa: -1.0 })
        );
        assert_eq!(
            entry("funk_unit").unwrap().expected,
            Some(Classification::Constant { kappa: -0.25 })
        );
        for e in catalog() {
            for n in [3, 4] {
                assert_eq!(e.build(n).unwrap().dim(), n);
            }
        }
        assert!(matches!(build("nope", 3), Err(Error::UnknownMetric(_))));
        assert!(matches!(build("numata", 2), Err(Error::Dimension(2))));
    }

    #[test]
    fn shifted_funk_rejects_long_shift() {
        assert!(matches!(FunkShifted::new(vec![1.0, 0.0, 0.0]), Err(Error::Parameter(_))));
        assert!(matches!(FunkShifted::new(vec![0.8, 0.7, 0.0]), Err(Error::Parameter(_))));
        assert!(FunkShifted::new(vec![0.5, 0.5, 0.5]).is_ok());
    }

    #[test]
    fn sampler_contract() {
        let m = Numata { dim: 3 };
        let cfg = SamplerConfig::with_count(42, 3);
        let pts = sample_points(&m, &cfg).unwrap();
        assert_eq!(pts.len(), 3);
        for p in &pts {
            let r = p.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r < 1.0 - cfg.boundary_margin);
            assert!(p.fiber_norm() >= cfg.y_min_norm);
        }
        assert_eq!(pts, sample_points(&m, &cfg).unwrap());
        assert_ne!(pts, sample_points(&m, &SamplerConfig::with_count(43, 3)).unwrap());
    }

    #[test]
    fn sampler_tight_margin_still_succeeds() {
        let m = FunkHalf { dim: 3 };
        let cfg = SamplerConfig {
            boundary_margin: 0.999,
            count: 5,
            ..SamplerConfig::default()
        };
        let pts = sample_points(&m, &cfg).unwrap();
        assert!(pts.iter().all(|p| p.x.iter().map(|v| v * v).sum::<f64>().sqrt() < 0.5 * 0.001));
    }

    #[test]
    fn sampler_rejects_bad_config() {
        let m = Euclidean { dim: 3 };
        assert!(sample_points(&m, &SamplerConfig::with_count(1, 0)).is_err());
        let impossible = SamplerConfig {
            y_min_norm: 10.0,
            count: 1,
            ..SamplerConfig::default()
        };
        assert!(matches!(sample_points(&m, &impossible), Err(Error::Sampling(_))));
    }
}
