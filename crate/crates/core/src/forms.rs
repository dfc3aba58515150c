//! Semi-basic forms on `T₀M` with jet-valued components.
//!
//! A degree-`p` form is stored on strictly increasing index tuples
//! `i₁ < … < i_p`. The wedge of basis covectors is the alternating sum of
//! tensor products without a `1/p!` factor, so
//! `dxʲ ∧ dxᵏ = dxʲ⊗dxᵏ − dxᵏ⊗dxʲ` and the stored component of `α ∧ β`
//! on `(j, k)` is `αⱼβₖ − αₖβⱼ`. Both `d_J` and `d_h` follow the same rule:
//! `(dω)_K = Σ_pos (−1)^pos D_{K[pos]} ω_{K∖K[pos]}`.

use crate::autodiff::{Jet, JetError};
use crate::geometry::SprayJets;

#[derive(Debug, Clone)]
pub struct SemiBasicForm {
    n: usize,
    degree: usize,
    indices: Vec<Vec<usize>>,
    components: Vec<Jet>,
}

/// Increasing index tuples of length `degree` from `0..n`, lexicographic.
pub fn index_tuples(n: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, degree: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == degree {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, degree, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, degree, 0, &mut Vec::new(), &mut out);
    out
}

/// Sign of the permutation sorting `seq` (distinct entries), or `None` if
/// an index repeats.
fn sort_sign(seq: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = seq.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

impl SemiBasicForm {
    pub fn scalar(value: Jet) -> Self {
        let n = value.n_vars() / 2;
        SemiBasicForm {
            n,
            degree: 0,
            indices: vec![Vec::new()],
            components: vec![value],
        }
    }

    pub fn one_form(components: Vec<Jet>) -> Self {
        let n = components.len();
        SemiBasicForm {
            n,
            degree: 1,
            indices: (0..n).map(|i| vec![i]).collect(),
            components,
        }
    }

    /// A form from components listed in [`index_tuples`] order.
    pub fn from_components(n: usize, degree: usize, components: Vec<Jet>) -> Self {
        let indices = index_tuples(n, degree);
        assert_eq!(indices.len(), components.len(), "component count");
        SemiBasicForm {
            n,
            degree,
            indices,
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    /// Lowest jet order among the components.
    pub fn order(&self) -> usize {
        self.components.iter().map(Jet::order).min().unwrap_or(0)
    }

    fn position(&self, sorted: &[usize]) -> Option<usize> {
        self.indices.iter().position(|t| t == sorted)
    }

    /// Component on an arbitrary index sequence, using antisymmetry.
    pub fn component(&self, seq: &[usize]) -> Option<Jet> {
        let zero = self.components.first()?.zero_like();
        match sort_sign(seq) {
            None => Some(zero),
            Some((sorted, sign)) => self
                .position(&sorted)
                .map(|k| self.components[k].scale(sign)),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.components.iter().map(Jet::value).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .fold(0.0, |m, c| m.max(c.value().abs()))
    }

    pub fn sub(&self, other: &SemiBasicForm) -> SemiBasicForm {
        assert_eq!((self.n, self.degree), (other.n, other.degree));
        SemiBasicForm {
            n: self.n,
            degree: self.degree,
            indices: self.indices.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> SemiBasicForm {
        self.map(|c| c.scale(factor))
    }

    /// Multiply every component by a scalar jet.
    pub fn mul_scalar(&self, f: &Jet) -> SemiBasicForm {
        self.map(|c| c * f)
    }

    fn map(&self, f: impl Fn(&Jet) -> Jet) -> SemiBasicForm {
        SemiBasicForm {
            n: self.n,
            degree: self.degree,
            indices: self.indices.clone(),
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn wedge(&self, other: &SemiBasicForm) -> SemiBasicForm {
        assert_eq!(self.n, other.n);
        let degree = self.degree + other.degree;
        let indices = index_tuples(self.n, degree);
        let seed = self.components[0].zero_like() * &other.components[0];
        let mut components = vec![seed; indices.len()];
        for (ia, a) in self.indices.iter().zip(&self.components) {
            for (ib, b) in other.indices.iter().zip(&other.components) {
                let seq: Vec<usize> = ia.iter().chain(ib).copied().collect();
                if let Some((sorted, sign)) = sort_sign(&seq) {
                    let k = indices.iter().position(|t| *t == sorted).expect("tuple exists");
                    components[k] += (a * b).scale(sign);
                }
            }
        }
        SemiBasicForm {
            n: self.n,
            degree,
            indices,
            components,
        }
    }

    /// Exterior derivative along the derivation `D_k` supplied by `deriv`.
    pub fn exterior(&self, deriv: impl Fn(&Jet, usize) -> Result<Jet, JetError>) -> Result<SemiBasicForm, JetError> {
        let degree = self.degree + 1;
        let indices = index_tuples(self.n, degree);
        let mut components = Vec::with_capacity(indices.len());
        for tuple in &indices {
            let mut acc: Option<Jet> = None;
            for (pos, &k) in tuple.iter().enumerate() {
                let rest: Vec<usize> = tuple
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != pos)
                    .map(|(_, &v)| v)
                    .collect();
                let idx = self.position(&rest).expect("sub-tuple exists");
                let mut term = deriv(&self.components[idx], k)?;
                if pos % 2 == 1 {
                    term = -term;
                }
                acc = Some(match acc {
                    None => term,
                    Some(a) => a + term,
                });
            }
            components.push(acc.expect("degree is positive"));
        }
        Ok(SemiBasicForm {
            n: self.n,
            degree,
            indices,
            components,
        })
    }

    /// `d_J`: vertical exterior derivative, `D_k = ∂/∂yᵏ`.
    pub fn d_j(&self) -> Result<SemiBasicForm, JetError> {
        let n = self.n;
        self.exterior(|c, k| c.derivative(n + k))
    }

    /// `d_h`: horizontal exterior derivative, `D_k = δ/δxᵏ`.
    pub fn d_h(&self, spray: &SprayJets) -> Result<SemiBasicForm, JetError> {
        self.exterior(|c, k| spray.horizontal(c, k))
    }

    /// Contraction with `yⁱ` in the first slot: `(i_S ω)_J = yᵏ ω_{kJ}`.
    pub fn contract_fiber(&self, y: &[Jet]) -> SemiBasicForm {
        assert!(self.degree >= 1);
        let degree = self.degree - 1;
        let indices = index_tuples(self.n, degree);
        let components = indices
            .iter()
            .map(|tuple| {
                let mut acc = self.components[0].zero_like();
                for (k, yk) in y.iter().enumerate() {
                    let mut seq = vec![k];
                    seq.extend(tuple);
                    if let Some(c) = self.component(&seq) {
                        acc += yk * &c;
                    }
                }
                acc
            })
            .collect();
        SemiBasicForm {
            n: self.n,
            degree,
            indices,
            components,
        }
    }
}
