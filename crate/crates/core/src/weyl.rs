//! Weyl-type tensors, flag-curvature recovery and the constant-curvature
//! verdict.
//!
//! * `W₀ⁱⱼ = Rⁱⱼ − Rˡₗ δⁱⱼ/(n−1) + ∂Rˡₗ/∂yʲ · yⁱ / (2(n−1))`
//! * `Wⁱⱼ = Rⁱⱼ − Rˡₗ δⁱⱼ/(n−1) − ∂/∂yᵐ(Rᵐⱼ − Rˡₗ δᵐⱼ/(n−1)) · yⁱ/(n+1)`
//! * `κ = Tr Φ / ((n−1) F²)`
//!
//! `W₀` vanishes exactly for constant flag curvature; `W` vanishes exactly
//! for scalar flag curvature.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AtPoint, Error, Result};
use crate::geometry::{max_abs, FinslerMetric, SamplePoint, TensorBundle};

fn require_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Dimension(n));
    }
    Ok(())
}

/// Residual scale for curvature quantities: `max(1, F², ‖Φ‖)`.
pub fn curvature_scale(bundle: &TensorBundle) -> f64 {
    let f2 = bundle.f_value().map_or(0.0, |f| f * f);
    1f64.max(f2).max(max_abs(bundle.jacobi_matrix().iter()))
}

#[derive(Debug, Clone)]
pub struct WeylTypeTensor {
    /// `W₀ⁱⱼ` with `i` the row.
    pub w0: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct ClassicalWeylTensor {
    pub w: DMatrix<f64>,
}

fn trace_gradient(bundle: &TensorBundle) -> Result<Vec<f64>> {
    let n = bundle.dim();
    let tr = bundle.trace_jacobi();
    (0..n)
        .map(|j| Ok(tr.derivative(n + j).at(&bundle.point)?.value()))
        .collect()
}

pub fn weyl_type(bundle: &TensorBundle) -> Result<WeylTypeTensor> {
    let n = bundle.dim();
    require_dim(n)?;
    let phi = bundle.jacobi_matrix();
    let tr = phi.trace();
    let dtr = trace_gradient(bundle)?;
    let y = &bundle.point.y;
    let m = (n - 1) as f64;
    let w0 = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        phi[(i, j)] - tr * delta / m + dtr[j] * y[i] / (2.0 * m)
    });
    Ok(WeylTypeTensor { w0 })
}

pub fn classical_weyl(bundle: &TensorBundle) -> Result<ClassicalWeylTensor> {
    let n = bundle.dim();
    require_dim(n)?;
    let phi = bundle.jacobi_matrix();
    let tr = phi.trace();
    let dtr = trace_gradient(bundle)?;
    let y = &bundle.point.y;
    let m = (n - 1) as f64;
    // divergence term ∂Rᵐⱼ/∂yᵐ − ∂Rˡₗ/∂yʲ /(n−1)
    let mut div = vec![0.0; n];
    for (j, d) in div.iter_mut().enumerate() {
        for k in 0..n {
            *d += bundle.jacobi_vertical(k, j, k)?;
        }
        *d -= dtr[j] / m;
    }
    let w = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        phi[(i, j)] - tr * delta / m - div[j] * y[i] / (n as f64 + 1.0)
    });
    Ok(ClassicalWeylTensor { w })
}

/// `κ = Tr Φ / ((n−1) F²)`.
pub fn recover_kappa(bundle: &TensorBundle, f_value: f64) -> Result<f64> {
    let n = bundle.dim();
    require_dim(n)?;
    if !(f_value > 0.0) {
        return Err(Error::domain(&bundle.point, format!("F = {f_value} is not positive")));
    }
    Ok(bundle.jacobi_matrix().trace() / ((n - 1) as f64 * f_value * f_value))
}

/// Largest `|∂gᵢⱼ/∂yᵏ|` over the given points; zero for Riemannian metrics.
pub fn fiber_variation_of_metric(metric: &dyn FinslerMetric, points: &[SamplePoint]) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in points {
        let n = p.dim();
        let f = metric.jet(p, 3)?;
        let energy = &f * &f;
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let d = 0.5 * energy.partial_wrt(&[n + i, n + j, n + k]).expect("order 3");
                    worst = worst.max(d.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Threshold below which `∂g/∂y` certifies a Riemannian metric.
pub const RIEMANNIAN_TOL: f64 = 1e-10;

/// Curvature and projective Weyl tensor of an affine spray at a base point.
#[derive(Debug, Clone)]
pub struct RiemannProjectiveWeyl {
    n: usize,
    /// `Rⁱⱼₖₗ` flattened `[i][j][k][l]`.
    pub curvature: Vec<f64>,
    /// `Ricⱼₗ = Rᵐⱼₘₗ`.
    pub ricci: DMatrix<f64>,
    /// `Wⁱⱼₖₗ` flattened `[i][j][k][l]`.
    pub weyl: Vec<f64>,
}

impl RiemannProjectiveWeyl {
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn curvature(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.curvature[self.idx(i, j, k, l)]
    }

    pub fn weyl(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.weyl[self.idx(i, j, k, l)]
    }

    /// `Wⁱⱼₖₗ yʲ yˡ` with `i` the row and `k` the column.
    pub fn contract_fiber(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, k| {
            let mut acc = 0.0;
            for j in 0..n {
                for l in 0..n {
                    acc += self.weyl(i, j, k, l) * y[j] * y[l];
                }
            }
            acc
        })
    }

    pub fn max_abs_weyl(&self) -> f64 {
        max_abs(self.weyl.iter())
    }
}

/// Fiber directions used to certify a metric Riemannian at a base point.
pub fn probe_fibers(n: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    out.push((0..n).map(|i| 0.3 + 0.2 * i as f64).collect());
    out.push((0..n).map(|i| if i % 2 == 0 { -0.7 } else { 0.4 }).collect());
    out
}

/// Projective Weyl tensor of a Riemannian metric at `x`.
///
/// The curvature is recovered from the y-quadratic Jacobi endomorphism as
/// `Rⁱⱼₖₗ = (∂²Rⁱₖ/∂yʲ∂yˡ − ∂²Rⁱₗ/∂yʲ∂yᵏ)/3`, which is antisymmetric in
/// `(k, l)` and satisfies `Rⁱₖ = Rⁱⱼₖₗ yʲ yˡ`.
pub fn riemann_projective_weyl(metric: &Arc<dyn FinslerMetric>, x: &[f64]) -> Result<RiemannProjectiveWeyl> {
    let n = metric.dim();
    require_dim(n)?;
    let probes: Vec<SamplePoint> = probe_fibers(n)
        .into_iter()
        .map(|y| SamplePoint::new(x.to_vec(), y))
        .collect::<Result<_>>()?;
    let variation = fiber_variation_of_metric(metric.as_ref(), &probes)?;
    if variation > RIEMANNIAN_TOL {
        return Err(Error::Precondition(format!(
            "{} is not Riemannian at x={x:?}: |dg/dy| = {variation:e}",
            metric.id()
        )));
    }
    let p = &probes[n];
    let bundle = TensorBundle::from_metric(metric, p, 2)?;
    let second = |i: usize, k: usize, a: usize, b: usize| -> Result<f64> {
        Ok(bundle.jacobi[i][k]
            .partial_wrt(&[n + a, n + b])
            .ok_or_else(|| Error::domain(p, "jacobi jet order too low"))?)
    };
    let mut curvature = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    curvature[((i * n + j) * n + k) * n + l] =
                        (second(i, k, j, l)? - second(i, l, j, k)?) / 3.0;
                }
            }
        }
    }
    let at = |i: usize, j: usize, k: usize, l: usize| curvature[((i * n + j) * n + k) * n + l];
    let ricci = DMatrix::from_fn(n, n, |j, l| (0..n).map(|m| at(m, j, m, l)).sum());
    let m = (n - 1) as f64;
    let mut weyl = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let dik = if i == k { 1.0 } else { 0.0 };
                    let dil = if i == l { 1.0 } else { 0.0 };
                    weyl[((i * n + j) * n + k) * n + l] =
                        at(i, j, k, l) - (ricci[(j, l)] * dik - ricci[(j, k)] * dil) / m;
                }
            }
        }
    }
    Ok(RiemannProjectiveWeyl {
        n,
        curvature,
        ricci,
        weyl,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Constant { kappa: f64 },
    ScalarNonconstant,
    NotScalar,
}

impl Classification {
    pub fn is_constant(&self) -> bool {
        matches!(self, Classification::Constant { .. })
    }

    pub fn kappa(&self) -> Option<f64> {
        match self {
            Classification::Constant { kappa } => Some(*kappa),
            _ => None,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Constant { kappa } => write!(f, "constant({kappa:.9})"),
            Classification::ScalarNonconstant => write!(f, "scalar_nonconstant"),
            Classification::NotScalar => write!(f, "not_scalar"),
        }
    }
}

/// Per-sample curvature quantities.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub point: SamplePoint,
    pub scale: f64,
    pub w0_max: f64,
    pub w_max: f64,
    /// `max |W − W₀|`.
    pub gap_max: f64,
    pub kappa: f64,
}

pub fn curvature_sample(metric: &Arc<dyn FinslerMetric>, p: &SamplePoint) -> Result<CurvatureSample> {
    let bundle = TensorBundle::from_metric(metric, p, 1)?;
    let f = bundle.f_value().expect("metric bundle");
    let w0 = weyl_type(&bundle)?.w0;
    let w = classical_weyl(&bundle)?.w;
    Ok(CurvatureSample {
        point: p.clone(),
        scale: curvature_scale(&bundle),
        w0_max: max_abs(w0.iter()),
        w_max: max_abs(w.iter()),
        gap_max: max_abs((&w - &w0).iter()),
        kappa: recover_kappa(&bundle, f)?,
    })
}

#[derive(Debug, Clone)]
pub struct CurvatureVerdict {
    pub classification: Classification,
    pub samples: Vec<CurvatureSample>,
    pub tolerance: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_mean: f64,
}

impl CurvatureVerdict {
    pub fn kappa_spread(&self) -> f64 {
        self.kappa_max - self.kappa_min
    }

    fn worst(&self, key: impl Fn(&CurvatureSample) -> f64) -> &CurvatureSample {
        self.samples
            .iter()
            .max_by(|a, b| (key(a) / a.scale).total_cmp(&(key(b) / b.scale)))
            .expect("nonempty samples")
    }

    /// Sample with the largest `‖W₀‖/scale`.
    pub fn worst_w0(&self) -> &CurvatureSample {
        self.worst(|s| s.w0_max)
    }

    pub fn worst_w(&self) -> &CurvatureSample {
        self.worst(|s| s.w_max)
    }

    pub fn max_w0_ratio(&self) -> f64 {
        let s = self.worst_w0();
        s.w0_max / s.scale
    }

    pub fn max_w_ratio(&self) -> f64 {
        let s = self.worst_w();
        s.w_max / s.scale
    }
}

/// Minimum number of samples for a verdict.
pub const MIN_VERDICT_SAMPLES: usize = 10;

/// Default verdict tolerance.
pub const DEFAULT_VERDICT_TOL: f64 = 1e-6;

/// Classify a metric as constant, scalar non-constant or non-scalar flag
/// curvature from `W₀`, `κ` spread and `W` over the samples.
pub fn constant_curvature_verdict(
    metric: &Arc<dyn FinslerMetric>,
    samples: &[SamplePoint],
    tol: f64,
) -> Result<CurvatureVerdict> {
    if samples.is_empty() {
        return Err(Error::Argument("no samples for curvature verdict".into()));
    }
    if samples.len() < MIN_VERDICT_SAMPLES {
        return Err(Error::Argument(format!(
            "curvature verdict needs at least {MIN_VERDICT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    require_dim(metric.dim())?;
    let data: Vec<CurvatureSample> = samples
        .par_iter()
        .map(|p| curvature_sample(metric, p))
        .collect::<Result<_>>()?;
    let kappa_min = data.iter().map(|s| s.kappa).fold(f64::INFINITY, f64::min);
    let kappa_max = data.iter().map(|s| s.kappa).fold(f64::NEG_INFINITY, f64::max);
    let kappa_mean = data.iter().map(|s| s.kappa).sum::<f64>() / data.len() as f64;
    let w0_ok = data.iter().all(|s| s.w0_max <= tol * s.scale);
    let w_ok = data.iter().all(|s| s.w_max <= tol * s.scale);
    let classification = if w0_ok && kappa_max - kappa_min <= tol {
        Classification::Constant { kappa: kappa_mean }
    } else if w_ok {
        Classification::ScalarNonconstant
    } else {
        Classification::NotScalar
    };
    Ok(CurvatureVerdict {
        classification,
        samples: data,
        tolerance: tol,
        kappa_min,
        kappa_max,
        kappa_mean,
    })
}
