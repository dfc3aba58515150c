use std::sync::Arc;

use finsler_core::autodiff::{Jet, JetError};

use finsler_core::catalog::{self, sample_points, FunkShifted, SamplerConfig};
use finsler_core::geometry::{
    euler_lagrange_form, metric_tensor, semibasic_dh, semibasic_dj, spray_coefficients, EnergyField, ExprField, MetricField,
    FinslerMetric, FlatSpray, GeodesicSpray, SamplePoint, ScalarField, Spray, TensorBundle,
};
use finsler_core::projective::{
    hamel_check, hamel_forms, jacobi_transform, pm_checks, pm_conditions, projective_factor, BaseSpray, ProjectiveFactor,
    ProjectivePair,
};
use finsler_core::weyl::{classical_weyl, constant_curvature_verdict, recover_kappa, weyl_type, Classification};
use finsler_core::forms::SemiBasicForm;
use finsler_core::Error;

fn metric(id: &str) -> Arc<dyn FinslerMetric> {
    catalog::build(id, 3).unwrap()
}

fn pt(x: [f64; 3], y: [f64; 3]) -> SamplePoint {
    SamplePoint::new(x.to_vec(), y.to_vec()).unwrap()
}

fn samples(m: &dyn FinslerMetric, count: usize) -> Vec<SamplePoint> {
    sample_points(m, &SamplerConfig::with_count(7, count)).unwrap()
}

fn flat() -> Arc<dyn Spray> {
    Arc::new(FlatSpray { dim: 3 })
}

fn shifted() -> Arc<dyn FinslerMetric> {
    Arc::new(FunkShifted::new(vec![0.2, 0.0, 0.0]).unwrap())
}

fn fval(m: &Arc<dyn FinslerMetric>, p: &SamplePoint) -> f64 {
    m.jet(p, 0).unwrap().value()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn euclidean_metric_tensor_is_identity() {
    let m = metric("euclidean");
    for p in samples(m.as_ref(), 5) {
        let g = metric_tensor(m.as_ref(), &p).unwrap();
        assert!((g - nalgebra::DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    }
}

#[test]
fn numata_metric_tensor_at_origin() {
    let m = metric("numata");
    let g = metric_tensor(m.as_ref(), &pt([0.0; 3], [1.0, 0.0, 0.0])).unwrap();
    // at x = 0 Numata reduces to |y|
    let h = 1e-4;
    let z = [1.0, 0.0, 0.0];
    let e = |y: [f64; 3]| {
        let f = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        0.5 * f * f
    };
    for i in 0..3 {
        for j in 0..3 {
            let shift = |a: f64, b: f64| {
                let mut y = z;
                y[i] += a;
                y[j] += b;
                e(y)
            };
            let fd = (shift(h, h) - shift(h, -h) - shift(-h, h) + shift(-h, -h)) / (4.0 * h * h);
            assert!((g[(i, j)] - fd).abs() < 1e-6, "g[{i}{j}] = {} vs {fd}", g[(i, j)]);
        }
    }
}

#[test]
fn euler_theorem_on_energy() {
    for id in catalog::ids() {
        let m = metric(id);
        for p in samples(m.as_ref(), 10) {
            let g = metric_tensor(m.as_ref(), &p).unwrap();
            let y = nalgebra::DVector::from_vec(p.y.clone());
            let f = fval(&m, &p);
            assert!(close((y.transpose() * &g * &y)[0], f * f, 1e-10), "{id} at {p}");
        }
    }
}

#[test]
fn flat_and_funk_sprays() {
    let e = metric("euclidean");
    let p = pt([0.1, 0.2, -0.3], [0.4, -0.5, 0.6]);
    assert!(spray_coefficients(e.as_ref(), &p).unwrap().amax() < 1e-14);

    let funk = metric("funk_unit");
    for p in samples(funk.as_ref(), 20) {
        let g = spray_coefficients(funk.as_ref(), &p).unwrap();
        let f = fval(&funk, &p);
        for i in 0..3 {
            assert!(close(g[i], 0.5 * f * p.y[i], 1e-8), "G{i} at {p}");
        }
    }
}

#[test]
fn numata_spray_deviation() {
    let m = metric("numata");
    for p in samples(m.as_ref(), 10) {
        let g = spray_coefficients(m.as_ref(), &p).unwrap();
        let yy: f64 = p.y.iter().map(|v| v * v).sum();
        let pf = 0.5 * yy / fval(&m, &p);
        for i in 0..3 {
            assert!(close(g[i], pf * p.y[i], 1e-9), "G{i} at {p}");
        }
    }
}

#[test]
fn euclidean_curvature_vanishes() {
    let b = TensorBundle::from_metric(&metric("euclidean"), &pt([0.0, 0.0, 0.5], [1.0, 0.0, 0.0]), 1).unwrap();
    assert!(b.connection_matrix().amax() < 1e-14);
    assert!(b.jacobi_matrix().amax() < 1e-14);
    assert!(weyl_type(&b).unwrap().w0.amax() < 1e-14);
    assert!(classical_weyl(&b).unwrap().w.amax() < 1e-14);
}

#[test]
fn kappa_examples() {
    let p = pt([0.1, 0.0, 0.0], [0.0, 1.0, 0.0]);
    let b = TensorBundle::from_metric(&metric("numata"), &p, 1).unwrap();
    assert!(close(recover_kappa(&b, 1.0).unwrap(), 0.75, 1e-9));

    for (id, kappa) in [("funk_half", -1.0), ("funk_unit", -0.25)] {
        let m = metric(id);
        for p in samples(m.as_ref(), 10) {
            let b = TensorBundle::from_metric(&m, &p, 1).unwrap();
            let k = recover_kappa(&b, b.f_value().unwrap()).unwrap();
            assert!(close(k, kappa, 1e-7), "{id}: {k}");
        }
    }
}

#[test]
fn recover_kappa_rejects_nonpositive_f() {
    let b = TensorBundle::from_metric(&metric("euclidean"), &pt([0.0; 3], [1.0, 0.0, 0.0]), 1).unwrap();
    assert!(matches!(recover_kappa(&b, 0.0), Err(Error::Domain { .. })));
}

#[derive(Debug)]
struct Plane;

impl FinslerMetric for Plane {
    fn id(&self) -> &str {
        "plane"
    }
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
    fn eval(&self, _x: &[Jet], y: &[Jet]) -> Result<Jet, JetError> {
        Jet::norm(y, 1e-12)
    }
}

#[test]
fn weyl_needs_dimension_three() {
    assert!(matches!(catalog::build("numata", 2), Err(Error::Dimension(2))));
    let m: Arc<dyn FinslerMetric> = Arc::new(Plane);
    let p = SamplePoint::new(vec![0.1, 0.0], vec![0.0, 1.0]).unwrap();
    let b = TensorBundle::from_metric(&m, &p, 1).unwrap();
    assert!(matches!(weyl_type(&b), Err(Error::Dimension(2))));
    assert!(matches!(classical_weyl(&b), Err(Error::Dimension(2))));
}

#[test]
fn weyl_tensors_are_traceless_and_kill_y() {
    let m = metric("numata");
    for p in samples(m.as_ref(), 10) {
        let b = TensorBundle::from_metric(&m, &p, 1).unwrap();
        let scale = 1f64.max(b.jacobi_matrix().amax());
        let y = nalgebra::DVector::from_vec(p.y.clone());
        for w in [weyl_type(&b).unwrap().w0, classical_weyl(&b).unwrap().w] {
            assert!(w.trace().abs() < 1e-9 * scale);
            assert!((&w * &y).amax() < 1e-9 * scale);
        }
    }
}

#[test]
fn verdicts() {
    let cases = [
        ("euclidean", Some(0.0)),
        ("funk_half", Some(-1.0)),
        ("funk_unit", Some(-0.25)),
        ("numata", None),
    ];
    for (id, kappa) in cases {
        let m = metric(id);
        let v = constant_curvature_verdict(&m, &samples(m.as_ref(), 20), 1e-6).unwrap();
        match kappa {
            Some(k) => assert!(close(v.classification.kappa().expect(id), k, 1e-7), "{id}"),
            None => assert_eq!(v.classification, Classification::ScalarNonconstant),
        }
    }
}

#[test]
fn verdict_sample_count() {
    let m = metric("euclidean");
    assert!(matches!(constant_curvature_verdict(&m, &[], 1e-6), Err(Error::Argument(_))));
    let few = samples(m.as_ref(), 9);
    assert!(matches!(constant_curvature_verdict(&m, &few, 1e-6), Err(Error::Argument(_))));
}

#[test]
fn numata_delta_p_against_flat() {
    let m = metric("numata");
    let factor = ProjectiveFactor {
        base: flat(),
        target: m,
    };
    let p = pt([0.1, 0.0, 0.0], [0.0, 1.0, 0.0]);
    let d = euler_lagrange_form(&FlatSpray { dim: 3 }, &factor, &p).unwrap().values();
    for (a, b) in d.iter().zip([0.1, 0.0, 0.0]) {
        assert!((a - b).abs() < 1e-12, "{d:?}");
    }
}

#[test]
fn geodesic_spray_annihilates_energy() {
    for id in catalog::ids() {
        let m = metric(id);
        let s = GeodesicSpray::new(m.clone());
        let e = EnergyField(m.clone());
        for p in samples(m.as_ref(), 5) {
            let scale = fval(&m, &p).powi(2).max(1.0);
            assert!(euler_lagrange_form(&s, &e, &p).unwrap().max_abs() < 1e-9 * scale, "{id}");
        }
    }
}

#[test]
fn funk_half_is_hamel_for_flat_spray() {
    let m = metric("funk_half");
    for p in samples(m.as_ref(), 5) {
        let scale = fval(&m, &p).max(1.0);
        assert!(euler_lagrange_form(&FlatSpray { dim: 3 }, &MetricField(m.clone()), &p).unwrap().max_abs() < 1e-9 * scale);
    }
}

#[test]
fn vertical_differentials() {
    let e = metric("euclidean");
    let p = pt([0.0; 3], [3.0, 0.0, 4.0]);
    let dj = semibasic_dj(&MetricField(e.clone()), &p).unwrap().values();
    for (a, b) in dj.iter().zip([0.6, 0.0, 0.8]) {
        assert!((a - b).abs() < 1e-14);
    }

    let c = ExprField::new(3, |x: &[Jet], _y: &[_]| Ok(x[0].constant_like(2.5)));
    assert_eq!(semibasic_dj(&c, &p).unwrap().max_abs(), 0.0);
    let scalar = SemiBasicForm::scalar(c.jet_at(&p, 1).unwrap());
    let dh = semibasic_dh(&scalar, &FlatSpray { dim: 3 }, &p).unwrap();
    assert_eq!(dh.max_abs(), 0.0);

    let factor = ProjectiveFactor {
        base: Arc::new(GeodesicSpray::new(metric("funk_unit"))),
        target: shifted(),
    };
    let origin = pt([0.0; 3], [1.0, 0.0, 0.0]);
    let dj = semibasic_dj(&factor, &origin).unwrap();
    for (a, b) in dj.values().iter().zip([-0.1, 0.0, 0.0]) {
        assert!((a - b).abs() < 1e-9, "{:?}", dj.values());
    }
    let spray = GeodesicSpray::new(metric("funk_unit"));
    for p in samples(shifted().as_ref(), 5) {
        let (_, dhdj) = hamel_forms(&spray, &factor, &p).unwrap();
        assert!(dhdj.max_abs() < 1e-8);
    }
}

#[test]
fn projective_factor_examples() {
    let funk: Arc<dyn Spray> = Arc::new(GeodesicSpray::new(metric("funk_unit")));
    let p = pt([0.0; 3], [1.0, 0.0, 0.0]);
    assert!((projective_factor(&funk, &shifted(), &p).unwrap() + 0.1).abs() < 1e-9);

    let half = metric("funk_half");
    for p in samples(half.as_ref(), 5) {
        assert!(close(projective_factor(&flat(), &half, &p).unwrap(), fval(&half, &p), 1e-9));
    }

    for id in catalog::ids() {
        let m = metric(id);
        let own: Arc<dyn Spray> = Arc::new(GeodesicSpray::new(m.clone()));
        for p in samples(m.as_ref(), 3) {
            assert!(projective_factor(&own, &m, &p).unwrap().abs() < 1e-9, "{id}");
        }
    }
}

#[test]
fn hamel_examples() {
    let zero = ExprField::new(3, |_x: &[Jet], y: &[Jet]| {
        Ok(y[0].constant_like(0.0))
    });
    let numata = metric("numata");
    let pts = samples(numata.as_ref(), 10);
    let r = hamel_check(&flat(), &zero, &pts, 1e-8).unwrap();
    assert!(r.is_hamel && r.delta_sp == 0.0 && r.dhdjp == 0.0);

    let factor = ProjectiveFactor {
        base: flat(),
        target: numata,
    };
    let r = hamel_check(&flat(), &factor, &pts, 1e-8).unwrap();
    assert!(!r.is_hamel && !r.equivalence_violation);

    let half = metric("funk_half");
    let r = hamel_check(&flat(), &MetricField(half.clone()), &samples(half.as_ref(), 10), 1e-8).unwrap();
    assert!(r.is_hamel);
}

#[test]
fn hamel_rejects_inhomogeneous_factor() {
    let quad = ExprField::new(3, |_x: &[Jet], y: &[Jet]| {
        Ok(&y[0] * &y[0])
    });
    let pts = samples(metric("euclidean").as_ref(), 3);
    assert!(matches!(hamel_check(&flat(), &quad, &pts, 1e-8), Err(Error::Precondition(_))));
}

#[test]
fn pm_on_flat_euclidean_vanishes() {
    let e = metric("euclidean");
    for p in samples(e.as_ref(), 5) {
        let r = pm_conditions(&flat(), &e, &p).unwrap();
        assert_eq!(r.factor, 0.0);
        assert!(r.all().iter().all(|c| c.value == 0.0));
    }
}

#[test]
fn pm_guard_rejects_unrelated_pair() {
    let pair = ProjectivePair::new(BaseSpray::Flat(3), metric("klein_conformal")).unwrap();
    let pts = pair.samples(&SamplerConfig::with_count(3, 5)).unwrap();
    let r = finsler_core::projective::weyl_transform_check(&pair, &pts, 3, 1e-8);
    assert!(matches!(r, Err(Error::Precondition(_))));
    let pm = pm_checks(&pair, &pts, 3, 1e-8).unwrap();
    assert!(pm.iter().any(|c| !c.passed));
}

#[test]
fn jacobi_transform_with_zero_factor() {
    let zero = ExprField::new(3, |_x: &[Jet], y: &[Jet]| {
        Ok(y[0].constant_like(0.0))
    });
    let m = metric("numata");
    for p in samples(m.as_ref(), 3) {
        let b = TensorBundle::from_metric(&m, &p, 1).unwrap();
        let predicted = jacobi_transform(&b, &zero).unwrap();
        assert!((predicted - b.jacobi_matrix()).amax() < 1e-14);
    }
}

#[test]
fn funk_shifted_without_shift_is_funk_unit() {
    let a: Arc<dyn FinslerMetric> = Arc::new(FunkShifted::new(vec![0.0; 3]).unwrap());
    let b = metric("funk_unit");
    for p in samples(b.as_ref(), 10) {
        assert!(close(fval(&a, &p), fval(&b, &p), 1e-15));
    }
}
