use finsler_core::autodiff::Jet;
use proptest::prelude::*;

const VARS: usize = 3;
const ORDER: usize = 4;

/// A polynomial jet `c₀ + Σ cᵢ tᵢ + Σ cᵢⱼ tᵢ tⱼ + c t₀t₁t₂` rooted at `at`.
fn poly(c: &[f64], at: &[f64]) -> Jet {
    let t: Vec<Jet> = (0..VARS)
        .map(|i| Jet::variable(VARS, ORDER, i, at[i]).unwrap())
        .collect();
    let mut out = Jet::constant(VARS, ORDER, c[0]).unwrap();
    let mut k = 1;
    for ti in &t {
        out += ti * c[k];
        k += 1;
    }
    for i in 0..VARS {
        for j in i..VARS {
            out += (&t[i] * &t[j]) * c[k];
            k += 1;
        }
    }
    out += (&(&t[0] * &t[1]) * &t[2]) * c[k];
    out
}

const COEFFS: usize = 1 + VARS + VARS * (VARS + 1) / 2 + 1;

fn jet() -> impl Strategy<Value = Jet> {
    (
        prop::collection::vec(-10.0..10.0f64, COEFFS),
        prop::collection::vec(-1.0..1.0f64, VARS),
    )
        .prop_map(|(c, at)| poly(&c, &at))
}

fn rooted_triple() -> impl Strategy<Value = (Jet, Jet, Jet)> {
    (
        prop::collection::vec(-10.0..10.0f64, 3 * COEFFS),
        prop::collection::vec(-1.0..1.0f64, VARS),
    )
        .prop_map(|(c, at)| {
            (
                poly(&c[..COEFFS], &at),
                poly(&c[COEFFS..2 * COEFFS], &at),
                poly(&c[2 * COEFFS..], &at),
            )
        })
}

fn rel(a: &Jet, b: &Jet) -> f64 {
    let scale = a.taylor_coeffs().iter().chain(b.taylor_coeffs()).fold(1.0f64, |m, v| m.max(v.abs()));
    a.taylor_coeffs()
        .iter()
        .zip(b.taylor_coeffs())
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn add_and_mul_commute((a, b, _) in rooted_triple()) {
        prop_assert!(rel(&(&a + &b), &(&b + &a)) <= 1e-12);
        prop_assert!(rel(&(&a * &b), &(&b * &a)) <= 1e-12);
    }

    #[test]
    fn add_and_mul_associate((a, b, c) in rooted_triple()) {
        prop_assert!(rel(&(&(&a + &b) + &c), &(&a + &(&b + &c))) <= 1e-12);
        prop_assert!(rel(&(&(&a * &b) * &c), &(&a * &(&b * &c))) <= 1e-12);
    }

    #[test]
    fn leibniz_rule((a, b, _) in rooted_triple(), var in 0..VARS) {
        let lhs = (&a * &b).derivative(var).unwrap();
        let rhs = &(&a.derivative(var).unwrap() * &b.truncate(ORDER - 1))
            + &(&a.truncate(ORDER - 1) * &b.derivative(var).unwrap());
        prop_assert!(rel(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn division_inverts_product(a in jet(), shift in 20.0..40.0f64) {
        let b = a.scale(0.1).add_scalar(shift);
        let back = (&a * &b).try_div(&b).unwrap();
        prop_assert!(rel(&back, &a) <= 1e-10);
    }
}
