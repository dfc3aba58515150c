//! Sprays, nonlinear connection and curvature at a point of the slit
//! tangent bundle.
//!
//! Coordinates on `TM` are `(x¹..xⁿ, y¹..yⁿ)`. Every quantity is evaluated
//! as a [`Jet`] in those `2n` variables, rooted at one [`SamplePoint`], so
//! horizontal and vertical derivatives of derived quantities stay exact.
//! Variable `i` is `xⁱ`, variable `n + i` is `yⁱ`.
//!
//! A spray is written `S = yⁱ ∂/∂xⁱ − 2Gⁱ ∂/∂yⁱ`. From the coefficients `Gⁱ`:
//!
//! * `Nⁱⱼ = ∂Gⁱ/∂yʲ`, and `δ/δxʲ = ∂/∂xʲ − Nᵏⱼ ∂/∂yᵏ`;
//! * `Rⁱⱼ = 2∂Gⁱ/∂xʲ − S(Nⁱⱼ) − Nⁱₖ Nᵏⱼ` (Jacobi endomorphism);
//! * `Rⁱⱼₖ = δₖ Nⁱⱼ − δⱼ Nⁱₖ` (curvature of the nonlinear connection).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::autodiff::{self, Jet};
use crate::error::{AtPoint, Error, Result};
use crate::forms::SemiBasicForm;

/// Smallest admissible fiber norm; the zero section is excluded.
pub const MIN_FIBER_NORM: f64 = 1e-12;

/// Contraction constant in `Φ = i_S R`: `Rⁱₖ = PHI_FROM_CURVATURE · Rⁱⱼₖ yʲ`.
///
/// Calibrated on the unit-ball Funk metric, where the constant-curvature
/// form of `R` pins every convention.
pub const PHI_FROM_CURVATURE: f64 = 1.0;

/// Factor in the local form of `3R = [J, Φ]`:
/// `THREE_R_FACTOR · Rⁱⱼₖ = ∂Rⁱₖ/∂yʲ − ∂Rⁱⱼ/∂yᵏ`.
pub const THREE_R_FACTOR: f64 = 3.0;

/// A base point `x` together with a nonzero fiber direction `y`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SamplePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SamplePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::Argument(format!(
                "base and fiber lengths differ ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        let p = SamplePoint { x, y };
        if !p.x.iter().chain(&p.y).all(|v| v.is_finite()) {
            return Err(Error::domain(&p, "non-finite coordinate"));
        }
        if p.fiber_norm() <= MIN_FIBER_NORM {
            return Err(Error::domain(&p, "fiber direction is zero"));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn fiber_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Same base point, different fiber.
    pub fn with_fiber(&self, y: Vec<f64>) -> Result<Self> {
        SamplePoint::new(self.x.clone(), y)
    }

    /// Lift the `2n` coordinates to jets of the given order.
    pub fn lift(&self, order: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
        let n = self.dim();
        let lift = |i: usize, v: f64| Jet::variable(2 * n, order, i, v).at(self);
        let x = (0..n).map(|i| lift(i, self.x[i])).collect::<Result<_>>()?;
        let y = (0..n).map(|i| lift(n + i, self.y[i])).collect::<Result<_>>()?;
        Ok((x, y))
    }
}

impl fmt::Display for SamplePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={:?} y={:?}", self.x, self.y)
    }
}

/// A scalar function on `T₀M` that can be expanded as a jet at any point.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    /// Jet of the function at `p`, carrying derivatives through `order`.
    fn jet_at(&self, p: &SamplePoint, order: usize) -> Result<Jet>;

    fn value_at(&self, p: &SamplePoint) -> Result<f64> {
        Ok(self.jet_at(p, 0)?.value())
    }
}

/// A Finsler metric `F(x, y)` given as a jet-evaluable expression.
pub trait FinslerMetric: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;

    fn dim(&self) -> usize;

    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    /// Strict domain predicate on the base point.
    fn in_domain(&self, x: &[f64]) -> bool;

    /// Radius of the Euclidean ball the metric lives on (infinite for all of ℝⁿ).
    fn domain_radius(&self) -> f64 {
        f64::INFINITY
    }

    /// Evaluate `F` on lifted coordinates.
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Result<Jet, autodiff::JetError>;

    fn jet(&self, p: &SamplePoint, order: usize) -> Result<Jet> {
        if p.dim() != self.dim() {
            return Err(Error::Argument(format!(
                "point of dimension {} for {}-dimensional metric {}",
                p.dim(),
                self.dim(),
                self.id()
            )));
        }
        if !self.in_domain(&p.x) {
            return Err(Error::domain(p, format!("outside the domain of {}", self.id())));
        }
        let (x, y) = p.lift(order)?;
        let f = self.eval(&x, &y).at(p)?;
        if !f.is_finite() {
            return Err(Error::domain(p, "non-finite metric jet"));
        }
        if f.value() <= 0.0 {
            return Err(Error::domain(p, format!("F = {} is not positive", f.value())));
        }
        Ok(f)
    }
}

/// `F` viewed as a scalar field.
pub struct MetricField(pub Arc<dyn FinslerMetric>);

impl ScalarField for MetricField {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn jet_at(&self, p: &SamplePoint, order: usize) -> Result<Jet> {
        self.0.jet(p, order)
    }
}

/// `F²`, the (doubled) energy.
pub struct EnergyField(pub Arc<dyn FinslerMetric>);

impl ScalarField for EnergyField {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn jet_at(&self, p: &SamplePoint, order: usize) -> Result<Jet> {
        let f = self.0.jet(p, order)?;
        Ok(&f * &f)
    }
}

/// A scalar field given by a closure over lifted coordinates.
pub struct ExprField<F> {
    dim: usize,
    expr: F,
}

impl<F> ExprField<F>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet, autodiff::JetError> + Send + Sync,
{
    pub fn new(dim: usize, expr: F) -> Self {
        ExprField { dim, expr }
    }
}

impl<F> ScalarField for ExprField<F>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet, autodiff::JetError> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet_at(&self, p: &SamplePoint, order: usize) -> Result<Jet> {
        let (x, y) = p.lift(order)?;
        (self.expr)(&x, &y).at(p)
    }
}

/// Source of spray coefficients `Gⁱ`.
pub trait Spray: Send + Sync {
    fn dim(&self) -> usize;

    fn label(&self) -> String;

    /// Jets of `G¹..Gⁿ` at `p` through `order`.
    fn coefficients(&self, p: &SamplePoint, order: usize) -> Result<Vec<Jet>>;

    /// The metric this spray is the geodesic spray of, if any.
    fn metric(&self) -> Option<&Arc<dyn FinslerMetric>> {
        None
    }
}

/// `S₀ = yⁱ ∂/∂xⁱ`, the geodesic spray of the Euclidean metric.
#[derive(Debug, Clone, Copy)]
pub struct FlatSpray {
    pub dim: usize,
}

impl Spray for FlatSpray {
    fn dim(&self) -> usize {
        self.dim
    }

    fn label(&self) -> String {
        "flat".into()
    }

    fn coefficients(&self, p: &SamplePoint, order: usize) -> Result<Vec<Jet>> {
        let zero = Jet::constant(2 * p.dim(), order, 0.0).at(p)?;
        Ok(vec![zero; p.dim()])
    }
}

/// The geodesic spray of a Finsler metric.
#[derive(Debug, Clone)]
pub struct GeodesicSpray {
    pub metric: Arc<dyn FinslerMetric>,
}

impl GeodesicSpray {
    pub fn new(metric: Arc<dyn FinslerMetric>) -> Self {
        GeodesicSpray { metric }
    }
}

impl Spray for GeodesicSpray {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn label(&self) -> String {
        self.metric.id().to_string()
    }

    fn coefficients(&self, p: &SamplePoint, order: usize) -> Result<Vec<Jet>> {
        geodesic_coefficients(self.metric.as_ref(), p, order)
    }

    fn metric(&self) -> Option<&Arc<dyn FinslerMetric>> {
        Some(&self.metric)
    }
}

/// `S̃ = S − 2P𝒞`, i.e. `G̃ⁱ = Gⁱ + P yⁱ`.
pub struct DeformedSpray {
    pub base: Arc<dyn Spray>,
    pub factor: Arc<dyn ScalarField>,
}

impl Spray for DeformedSpray {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn label(&self) -> String {
        format!("{} - 2P C", self.base.label())
    }

    fn coefficients(&self, p: &SamplePoint, order: usize) -> Result<Vec<Jet>> {
        let g = self.base.coefficients(p, order)?;
        let pf = self.factor.jet_at(p, order)?;
        let (_, y) = p.lift(order)?;
        Ok(g.into_iter().zip(&y).map(|(gi, yi)| gi + &pf * yi).collect())
    }
}

/// `Gⁱ = ¼ g^{is} (yᵏ ∂²F²/∂yˢ∂xᵏ − ∂F²/∂xˢ)` as jets through `order`.
pub fn geodesic_coefficients(
    metric: &dyn FinslerMetric,
    p: &SamplePoint,
    order: usize,
) -> Result<Vec<Jet>> {
    let n = p.dim();
    let f = metric.jet(p, order + 2)?;
    let energy = &f * &f;
    let (_, y) = p.lift(order)?;

    let dy: Vec<Jet> = (0..n)
        .map(|s| energy.derivative(n + s))
        .collect::<Result<_, _>>()
        .at(p)?;
    let mut hessian = vec![Vec::with_capacity(n); n];
    let mut rhs = Vec::with_capacity(n);
    for s in 0..n {
        for j in 0..n {
            hessian[s].push(dy[s].derivative(n + j).at(p)?.scale(0.5));
        }
        let mut acc = -energy.derivative(s).at(p)?;
        for (k, yk) in y.iter().enumerate() {
            acc += yk * dy[s].derivative(k).at(p)?;
        }
        rhs.push(acc);
    }
    let solved = autodiff::solve(hessian, rhs)
        .ok_or_else(|| Error::degenerate(p, "singular metric tensor"))?;
    Ok(solved.into_iter().map(|v| v.scale(0.25)).collect())
}

/// Spray coefficients at one point with the derived connection, ready for
/// horizontal derivatives and the action of `S` on jets.
pub struct SprayJets {
    n: usize,
    y: Vec<Jet>,
    coeffs: Vec<Jet>,
    connection: Vec<Vec<Jet>>,
}

impl SprayJets {
    /// Coefficients through `order`; the connection is one order lower.
    pub fn new(spray: &dyn Spray, p: &SamplePoint, order: usize) -> Result<Self> {
        if spray.dim() != p.dim() {
            return Err(Error::Argument(format!(
                "point of dimension {} for a {}-dimensional spray",
                p.dim(),
                spray.dim()
            )));
        }
        let coeffs = spray.coefficients(p, order)?;
        Self::from_coefficients(p, coeffs)
    }

    pub fn from_coefficients(p: &SamplePoint, coeffs: Vec<Jet>) -> Result<Self> {
        let n = p.dim();
        let order = coeffs.iter().map(Jet::order).min().unwrap_or(0);
        let (_, y) = p.lift(order)?;
        let connection = if order == 0 {
            Vec::new()
        } else {
            coeffs
                .iter()
                .map(|g| (0..n).map(|j| g.derivative(n + j)).collect::<Result<_, _>>())
                .collect::<Result<_, _>>()
                .at(p)?
        };
        Ok(SprayJets {
            n,
            y,
            coeffs,
            connection,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn fiber(&self) -> &[Jet] {
        &self.y
    }

    pub fn coefficients(&self) -> &[Jet] {
        &self.coeffs
    }

    /// `Nⁱⱼ`.
    pub fn connection(&self, i: usize, j: usize) -> &Jet {
        &self.connection[i][j]
    }

    /// `S(f) = yᵏ ∂f/∂xᵏ − 2Gᵏ ∂f/∂yᵏ`.
    pub fn apply(&self, f: &Jet) -> Result<Jet, autodiff::JetError> {
        let n = self.n;
        let mut acc: Option<Jet> = None;
        for k in 0..n {
            let term = &self.y[k] * f.derivative(k)? - (&self.coeffs[k] * f.derivative(n + k)?).scale(2.0);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        Ok(acc.expect("dimension is positive"))
    }

    /// `δf/δxᵏ = ∂f/∂xᵏ − Nʲₖ ∂f/∂yʲ`.
    pub fn horizontal(&self, f: &Jet, k: usize) -> Result<Jet, autodiff::JetError> {
        let n = self.n;
        let mut acc = f.derivative(k)?;
        for j in 0..n {
            acc -= &self.connection[j][k] * f.derivative(n + j)?;
        }
        Ok(acc)
    }

    /// `∂f/∂yᵏ`.
    pub fn vertical(&self, f: &Jet, k: usize) -> Result<Jet, autodiff::JetError> {
        f.derivative(self.n + k)
    }

    /// Components of the Euler–Lagrange form `(δ_S L)ᵢ = S(∂L/∂yⁱ) − ∂L/∂xⁱ`.
    pub fn euler_lagrange(&self, lagrangian: &Jet) -> Result<Vec<Jet>, autodiff::JetError> {
        (0..self.n)
            .map(|i| {
                let dy = lagrangian.derivative(self.n + i)?;
                Ok(self.apply(&dy)? - lagrangian.derivative(i)?)
            })
            .collect()
    }
}

/// Metric data attached to a bundle built from a Finsler metric.
#[derive(Debug, Clone)]
pub struct MetricData {
    pub f: f64,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
}

/// Per-point package of spray, connection and curvature jets.
#[derive(Debug, Clone)]
pub struct TensorBundle {
    pub point: SamplePoint,
    pub metric: Option<MetricData>,
    /// `Gⁱ`, through order `jacobi_order + 2`.
    pub spray: Vec<Jet>,
    /// `Nⁱⱼ`, through order `jacobi_order + 1`.
    pub connection: Vec<Vec<Jet>>,
    /// `Rⁱⱼ`, through order `jacobi_order`.
    pub jacobi: Vec<Vec<Jet>>,
    /// `Rⁱⱼₖ` flattened as `[i][j][k]`, through order `jacobi_order`.
    pub curvature: Vec<Jet>,
}

impl TensorBundle {
    /// Build from any spray. `jacobi_order` is the number of derivatives of
    /// `Φ` retained (1 for the Weyl tensors, 2 for affine polarisation).
    pub fn from_spray(spray: &dyn Spray, p: &SamplePoint, jacobi_order: usize) -> Result<Self> {
        let sj = SprayJets::new(spray, p, jacobi_order + 2)?;
        let metric = match spray.metric() {
            Some(m) => Some(metric_data(m.as_ref(), p)?),
            None => None,
        };
        Self::assemble(sj, p, metric)
    }

    pub fn from_metric(metric: &Arc<dyn FinslerMetric>, p: &SamplePoint, jacobi_order: usize) -> Result<Self> {
        Self::from_spray(&GeodesicSpray::new(metric.clone()), p, jacobi_order)
    }

    fn assemble(sj: SprayJets, p: &SamplePoint, metric: Option<MetricData>) -> Result<Self> {
        let n = p.dim();
        let mut jacobi = vec![Vec::with_capacity(n); n];
        for (i, row) in jacobi.iter_mut().enumerate() {
            for j in 0..n {
                let mut r = sj.coeffs[i].derivative(j).at(p)?.scale(2.0);
                r -= sj.apply(sj.connection(i, j)).at(p)?;
                for k in 0..n {
                    r -= sj.connection(i, k) * sj.connection(k, j);
                }
                row.push(r);
            }
        }
        let mut curvature = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let a = sj.horizontal(sj.connection(i, j), k).at(p)?;
                    let b = sj.horizontal(sj.connection(i, k), j).at(p)?;
                    curvature.push(a - b);
                }
            }
        }
        let bundle = TensorBundle {
            point: p.clone(),
            metric,
            spray: sj.coeffs,
            connection: sj.connection,
            jacobi,
            curvature,
        };
        if !bundle.all_finite() {
            return Err(Error::domain(p, "non-finite curvature"));
        }
        Ok(bundle)
    }

    fn all_finite(&self) -> bool {
        self.spray.iter().all(Jet::is_finite)
            && self.jacobi.iter().flatten().all(Jet::is_finite)
            && self.curvature.iter().all(Jet::is_finite)
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    pub fn spray_values(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.spray.iter().map(Jet::value))
    }

    pub fn connection_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.connection[i][j].value())
    }

    /// `Rⁱⱼ` with `i` the row.
    pub fn jacobi_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.jacobi[i][j].value())
    }

    pub fn curvature_jet(&self, i: usize, j: usize, k: usize) -> &Jet {
        let n = self.dim();
        &self.curvature[(i * n + j) * n + k]
    }

    pub fn curvature_value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.curvature_jet(i, j, k).value()
    }

    /// `Tr Φ = Rˡₗ` as a jet.
    pub fn trace_jacobi(&self) -> Jet {
        let mut acc = self.jacobi[0][0].clone();
        for l in 1..self.dim() {
            acc += self.jacobi[l][l].clone();
        }
        acc
    }

    /// `∂Rⁱⱼ/∂yᵏ`.
    pub fn jacobi_vertical(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        let n = self.dim();
        Ok(self.jacobi[i][j].derivative(n + k).at(&self.point)?.value())
    }

    pub fn f_value(&self) -> Option<f64> {
        self.metric.as_ref().map(|m| m.f)
    }
}

fn metric_data(metric: &dyn FinslerMetric, p: &SamplePoint) -> Result<MetricData> {
    let f = metric.jet(p, 0)?.value();
    let g = metric_tensor(metric, p)?;
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::degenerate(p, "singular metric tensor"))?;
    Ok(MetricData { f, g, g_inv })
}

/// `gᵢⱼ = ½ ∂²F²/∂yⁱ∂yʲ`, required positive definite.
pub fn metric_tensor(metric: &dyn FinslerMetric, p: &SamplePoint) -> Result<DMatrix<f64>> {
    let n = p.dim();
    let f = metric.jet(p, 2)?;
    let energy = &f * &f;
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = 0.5 * energy.partial_wrt(&[n + i, n + j]).expect("order 2 jet");
        }
    }
    if g.clone().cholesky().is_none() {
        return Err(Error::degenerate(p, "metric tensor is not positive definite"));
    }
    Ok(g)
}

/// Values of the geodesic spray coefficients `Gⁱ` at `p`.
pub fn spray_coefficients(metric: &dyn FinslerMetric, p: &SamplePoint) -> Result<DVector<f64>> {
    metric_tensor(metric, p)?;
    let g = geodesic_coefficients(metric, p, 0)?;
    Ok(DVector::from_iterator(p.dim(), g.iter().map(Jet::value)))
}

/// Geodesic spray bundle of `metric` at `p` with first fiber derivatives of `Φ`.
pub fn connection_and_curvature(metric: &Arc<dyn FinslerMetric>, p: &SamplePoint) -> Result<TensorBundle> {
    TensorBundle::from_metric(metric, p, 1)
}

/// `δ_S L` as a semi-basic 1-form at `p`.
pub fn euler_lagrange_form(spray: &dyn Spray, lagrangian: &dyn ScalarField, p: &SamplePoint) -> Result<SemiBasicForm> {
    let sj = SprayJets::new(spray, p, 0)?;
    let l = lagrangian.jet_at(p, 2)?;
    let comps = sj.euler_lagrange(&l).at(p)?;
    Ok(SemiBasicForm::one_form(comps))
}

/// `d_J L`, the vertical differential of a scalar.
pub fn semibasic_dj(lagrangian: &dyn ScalarField, p: &SamplePoint) -> Result<SemiBasicForm> {
    let l = lagrangian.jet_at(p, 1)?;
    SemiBasicForm::scalar(l).d_j().at(p)
}

/// `d_h ω` for a semi-basic form with jet components.
pub fn semibasic_dh(form: &SemiBasicForm, spray: &dyn Spray, p: &SamplePoint) -> Result<SemiBasicForm> {
    let order = form.order().max(1);
    let sj = SprayJets::new(spray, p, order)?;
    form.d_h(&sj).at(p)
}

/// Largest absolute entry.
pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}
