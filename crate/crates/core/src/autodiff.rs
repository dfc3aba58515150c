//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] carries every mixed partial derivative of a scalar function of
//! `n_vars` independent variables up to a fixed total order, at one point.
//! Coefficients are stored as Taylor coefficients `f_α / α!` on a dense,
//! graded monomial table, so the table for a lower order is always a prefix
//! of the table for a higher order. Truncation is therefore a slice.
//!
//! Binary operations between jets of different orders produce a jet of the
//! smaller order. Differentiation lowers the order by one.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Highest supported total derivative order.
///
/// The curvature pipeline needs five derivatives of F² for the Weyl tensors
/// and six for the polarised Riemann tensor of an affine spray.
pub const MAX_ORDER: usize = 6;

/// Largest supported number of independent variables (2n with n ≤ 6).
pub const MAX_VARS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("variable index {index} out of range for {n_vars} variables")]
    IndexOutOfRange { index: usize, n_vars: usize },
    #[error("jet order {0} outside 1..={MAX_ORDER}")]
    OrderOutOfRange(usize),
    #[error("{0} variables exceeds the supported maximum of {MAX_VARS}")]
    TooManyVariables(usize),
    #[error("jets over {left} and {right} variables cannot be combined")]
    VariableMismatch { left: usize, right: usize },
    #[error("jet orders {left} and {right} differ")]
    OrderMismatch { left: usize, right: usize },
    #[error("cannot differentiate an order-0 jet")]
    OrderExhausted,
    #[error("{op} undefined at value {value}")]
    Domain { op: &'static str, value: f64 },
}

/// Monomial table and precomputed product/derivative maps for one
/// `(n_vars, order)` pair.
pub struct JetLayout {
    n_vars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, u32>,
    /// `(i, j, k)` with `e_i + e_j = e_k` and `|e_k| ≤ order`.
    products: Vec<(u32, u32, u32)>,
    /// Per variable, for each monomial of the order-1 layout: source index
    /// in this layout and the factor `β_v + 1`.
    derivatives: Vec<Vec<(u32, f64)>>,
    lower: Option<Arc<JetLayout>>,
}

impl fmt::Debug for JetLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetLayout")
            .field("n_vars", &self.n_vars)
            .field("order", &self.order)
            .field("len", &self.exponents.len())
            .finish()
    }
}

fn layout_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<JetLayout>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl JetLayout {
    /// Shared layout for `n_vars` variables truncated at `order`.
    pub fn get(n_vars: usize, order: usize) -> Result<Arc<JetLayout>, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderOutOfRange(order));
        }
        if n_vars == 0 || n_vars > MAX_VARS {
            return Err(JetError::TooManyVariables(n_vars));
        }
        let mut cache = layout_cache().lock().expect("jet layout cache poisoned");
        Ok(Self::get_locked(&mut cache, n_vars, order))
    }

    fn get_locked(
        cache: &mut HashMap<(usize, usize), Arc<JetLayout>>,
        n_vars: usize,
        order: usize,
    ) -> Arc<JetLayout> {
        if let Some(l) = cache.get(&(n_vars, order)) {
            return l.clone();
        }
        let lower = if order > 0 {
            Some(Self::get_locked(cache, n_vars, order - 1))
        } else {
            None
        };
        let layout = Arc::new(Self::build(n_vars, order, lower));
        cache.insert((n_vars, order), layout.clone());
        layout
    }

    fn build(n_vars: usize, order: usize, lower: Option<Arc<JetLayout>>) -> JetLayout {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        for degree in 0..=order {
            let mut cur = vec![0u8; n_vars];
            push_degree(&mut exponents, &mut cur, 0, degree);
        }
        let index: HashMap<Vec<u8>, u32> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as u32))
            .collect();

        let degrees: Vec<usize> = exponents
            .iter()
            .map(|e| e.iter().map(|&v| v as usize).sum())
            .collect();
        let mut products = Vec::new();
        let mut buf = vec![0u8; n_vars];
        for (i, ei) in exponents.iter().enumerate() {
            for (j, ej) in exponents.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    // graded order: every later j has at least this degree
                    break;
                }
                for v in 0..n_vars {
                    buf[v] = ei[v] + ej[v];
                }
                products.push((i as u32, j as u32, index[&buf]));
            }
        }

        let derivatives = match &lower {
            None => vec![Vec::new(); n_vars],
            Some(low) => (0..n_vars)
                .map(|v| {
                    low.exponents
                        .iter()
                        .map(|beta| {
                            let mut up = beta.clone();
                            up[v] += 1;
                            (index[&up], (beta[v] as f64) + 1.0)
                        })
                        .collect()
                })
                .collect(),
        };

        JetLayout {
            n_vars,
            order,
            exponents,
            index,
            products,
            derivatives,
            lower,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exponents
    }

    fn at_order(self: &Arc<Self>, order: usize) -> Arc<JetLayout> {
        let mut cur = self.clone();
        while cur.order > order {
            cur = cur.lower.clone().expect("lower layout exists below order");
        }
        cur
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut [u8], pos: usize, remaining: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u8;
        out.push(cur.to_vec());
        cur[pos] = 0;
        return;
    }
    for take in (0..=remaining).rev() {
        cur[pos] = take as u8;
        push_degree(out, cur, pos + 1, remaining - take);
    }
    cur[pos] = 0;
}

/// Truncated Taylor expansion of a scalar function at a point.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("n_vars", &self.layout.n_vars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(n_vars: usize, order: usize, value: f64) -> Result<Jet, JetError> {
        let layout = JetLayout::get(n_vars, order)?;
        Ok(Self::constant_in(&layout, value))
    }

    fn constant_in(layout: &Arc<JetLayout>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet {
            layout: layout.clone(),
            coeffs,
        }
    }

    /// Jet of the coordinate function `t ↦ t_index` evaluated at `value`.
    /// Order 0 is accepted here for internal bookkeeping.
    pub fn variable(n_vars: usize, order: usize, index: usize, value: f64) -> Result<Jet, JetError> {
        if index >= n_vars {
            return Err(JetError::IndexOutOfRange { index, n_vars });
        }
        let layout = JetLayout::get(n_vars, order)?;
        let mut jet = Self::constant_in(&layout, value);
        if order >= 1 {
            // degree-1 monomials follow the constant, ordered by variable
            jet.coeffs[1 + index] = 1.0;
        }
        Ok(jet)
    }

    /// A constant with the same layout as `self`.
    pub fn constant_like(&self, value: f64) -> Jet {
        Self::constant_in(&self.layout, value)
    }

    pub fn zero_like(&self) -> Jet {
        self.constant_like(0.0)
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn n_vars(&self) -> usize {
        self.layout.n_vars
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    /// Raw Taylor coefficients in layout order.
    pub fn taylor_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mixed partial derivative `∂^α f` for the multi-index `exponents`,
    /// or `None` if `|α|` exceeds the jet order.
    pub fn partial(&self, exponents: &[u8]) -> Option<f64> {
        if exponents.len() != self.n_vars() {
            return None;
        }
        let idx = *self.layout.index.get(exponents)?;
        let factorial: f64 = exponents
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product();
        Some(self.coeffs[idx as usize] * factorial)
    }

    /// Partial derivative with respect to the listed variables (repeats allowed).
    pub fn partial_wrt(&self, vars: &[usize]) -> Option<f64> {
        let mut e = vec![0u8; self.n_vars()];
        for &v in vars {
            *e.get_mut(v)? += 1;
        }
        self.partial(&e)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Drop every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = self.layout.at_order(order);
        Jet {
            coeffs: self.coeffs[..layout.len()].to_vec(),
            layout,
        }
    }

    /// Jet of `∂f/∂t_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet, JetError> {
        if var >= self.n_vars() {
            return Err(JetError::IndexOutOfRange {
                index: var,
                n_vars: self.n_vars(),
            });
        }
        let lower = self.layout.lower.clone().ok_or(JetError::OrderExhausted)?;
        let coeffs = self.layout.derivatives[var]
            .iter()
            .map(|&(src, factor)| self.coeffs[src as usize] * factor)
            .collect();
        Ok(Jet {
            layout: lower,
            coeffs,
        })
    }

    fn check_vars(&self, other: &Jet) -> Result<(), JetError> {
        if self.n_vars() != other.n_vars() {
            return Err(JetError::VariableMismatch {
                left: self.n_vars(),
                right: other.n_vars(),
            });
        }
        Ok(())
    }

    fn common_layout(&self, other: &Jet) -> Arc<JetLayout> {
        assert_eq!(
            self.n_vars(),
            other.n_vars(),
            "jets over different variable counts"
        );
        if self.order() <= other.order() {
            self.layout.clone()
        } else {
            other.layout.clone()
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let layout = self.common_layout(other);
        let coeffs = self.coeffs[..layout.len()]
            .iter()
            .zip(&other.coeffs[..layout.len()])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Jet { layout, coeffs }
    }

    fn product(&self, other: &Jet) -> Jet {
        let layout = self.common_layout(other);
        let mut coeffs = vec![0.0; layout.len()];
        let (a, b) = (&self.coeffs, &other.coeffs);
        for &(i, j, k) in &layout.products {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet { layout, coeffs }
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add_scalar(&self, value: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    /// Apply a univariate function given its derivatives at the jet value:
    /// `derivs[k] = f^(k)(a₀)` for `k = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let order = self.order();
        debug_assert!(derivs.len() > order);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut factorial = (1..=order as u64).product::<u64>() as f64;
        let mut acc = self.constant_like(derivs[order] / factorial);
        for k in (0..order).rev() {
            factorial /= (k + 1) as f64;
            acc = acc.product(&h).add_scalar(derivs[k] / factorial);
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v == 0.0 || !v.is_finite() {
            return Err(JetError::Domain {
                op: "reciprocal",
                value: v,
            });
        }
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut d = 1.0 / v;
        for k in 0..=self.order() {
            derivs.push(d);
            d *= -((k + 1) as f64) / v;
        }
        Ok(self.compose(&derivs))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_vars(other)?;
        Ok(self.product(&other.recip()?))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 || !v.is_finite() {
            return Err(JetError::Domain { op: "sqrt", value: v });
        }
        Ok(self.compose(&power_derivatives(v, 0.5, self.order())))
    }

    /// `a^p` for real `p`; requires a positive value unless `p` is a
    /// non-negative integer.
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        let v = self.value();
        let integer = p.fract() == 0.0 && p >= 0.0;
        if !integer && v <= 0.0 {
            return Err(JetError::Domain { op: "powf", value: v });
        }
        if integer {
            let mut acc = self.constant_like(1.0);
            for _ in 0..p as u32 {
                acc = acc.product(self);
            }
            return Ok(acc);
        }
        Ok(self.compose(&power_derivatives(v, p, self.order())))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(JetError::Domain { op: "ln", value: v });
        }
        let mut derivs = vec![v.ln()];
        let mut d = 1.0 / v;
        for k in 1..=self.order() {
            derivs.push(d);
            d *= -(k as f64) / v;
        }
        Ok(self.compose(&derivs))
    }

    /// `|a|`, defined away from zero only.
    pub fn abs(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v == 0.0 {
            return Err(JetError::Domain { op: "abs", value: v });
        }
        Ok(if v < 0.0 { -self } else { self.clone() })
    }

    /// Euclidean norm of a vector of jets, rejecting norms below `guard`.
    pub fn norm(components: &[Jet], guard: f64) -> Result<Jet, JetError> {
        let sq = dot(components, components);
        if sq.value() <= guard * guard {
            return Err(JetError::Domain {
                op: "norm",
                value: sq.value().max(0.0).sqrt(),
            });
        }
        sq.sqrt()
    }

    /// Largest coefficient-wise relative difference, with `floor` guarding
    /// the denominator.
    pub fn max_relative_diff(&self, other: &Jet, floor: f64) -> f64 {
        let layout = self.common_layout(other);
        self.coeffs[..layout.len()]
            .iter()
            .zip(&other.coeffs[..layout.len()])
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
            .fold(0.0, f64::max)
    }
}

fn power_derivatives(v: f64, p: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut coef = 1.0;
    for k in 0..=order {
        out.push(coef * v.powf(p - k as f64));
        coef *= p - k as f64;
    }
    out
}

/// `Σ aᵢ bᵢ`.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    assert_eq!(a.len(), b.len());
    let mut terms = a.iter().zip(b).map(|(x, y)| x * y);
    let first = terms.next().expect("dot of empty slices");
    terms.fold(first, |acc, t| acc + t)
}

/// Solve `A x = b` with jet entries by Gaussian elimination, pivoting on
/// the value part. Returns `None` for a singular value matrix.
pub fn solve(mut a: Vec<Vec<Jet>>, mut b: Vec<Jet>) -> Option<Vec<Jet>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .map(|j| j.value().abs())
        .fold(0.0, f64::max);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .value()
                .abs()
                .total_cmp(&a[j][col].value().abs())
        })?;
        if a[pivot][col].value().abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip().ok()?;
        for row in col + 1..n {
            let factor = &a[row][col] * &inv;
            for k in col..n {
                let t = &factor * &a[col][k];
                a[row][k] -= t;
            }
            let t = &factor * &b[col];
            b[row] -= t;
        }
    }
    let mut x: Vec<Option<Jet>> = vec![None; n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc -= &a[row][k] * x[k].as_ref().expect("back substitution order");
        }
        x[row] = Some(acc.try_div(&a[row][row]).ok()?);
    }
    x.into_iter().collect()
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Jet, b: &Jet| a.zip_with(b, |x, y| x + y));
binop!(Sub, sub, |a: &Jet, b: &Jet| a.zip_with(b, |x, y| x - y));
binop!(Mul, mul, |a: &Jet, b: &Jet| a.product(b));

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = &*self - &rhs;
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Lift the coordinate function `t ↦ t_index` at `value`, carrying
/// derivatives through `order`.
pub fn lift_variable(index: usize, value: f64, order: usize, n_vars: usize) -> Result<Jet, JetError> {
    if order == 0 || order > MAX_ORDER {
        return Err(JetError::OrderOutOfRange(order));
    }
    Jet::variable(n_vars, order, index, value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked binary arithmetic: operands must agree in order and variables.
pub fn jet_arith(a: &Jet, b: &Jet, op: ArithOp) -> Result<Jet, JetError> {
    a.check_vars(b)?;
    if a.order() != b.order() {
        return Err(JetError::OrderMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.try_div(b)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetFunc {
    Sqrt,
    Pow(f64),
    /// `|a|` with a guard band: values within `guard` of zero are rejected.
    AbsGuarded(f64),
}

pub fn jet_func(a: &Jet, f: JetFunc) -> Result<Jet, JetError> {
    match f {
        JetFunc::Sqrt => a.sqrt(),
        JetFunc::Pow(p) => a.powf(p),
        JetFunc::AbsGuarded(guard) => {
            if a.value().abs() <= guard {
                Err(JetError::Domain {
                    op: "abs",
                    value: a.value(),
                })
            } else {
                a.abs()
            }
        }
    }
}
