mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use common::{christoffel_fd, lie_by_flow, simpson, sphere_dh};
use kvloc_core::calculus::FormField;
use kvloc_core::characteristic::{gauss_bonnet_integral, verify_characteristic, CharacteristicClass};
use kvloc_core::geometry::{christoffel_at, metric_at, riemann_at, Scenario};
use kvloc_core::localization::integrate;
use kvloc_core::runner::random_forms;
use kvloc_core::scenarios::{builtin, builtin_with, BUILTIN_NAMES};
use kvloc_core::symplectic::verify_dh;
use kvloc_core::zeroset::{find_zero_components, moment_endomorphism, SkewComplexMatrix};
use kvloc_core::{TwistPair, C64};
use nalgebra::DMatrix;

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Sample points at least `margin` away from every non-periodic chart edge.
fn interior_points(s: &Scenario, count: usize, margin: f64, seed: u64) -> Vec<Vec<f64>> {
    let inside = |p: &Vec<f64>| {
        p.iter().zip(&s.chart.domain).all(|(x, (a, b))| x - a > margin && b - x > margin)
    };
    s.chart.sample(count * 4, seed).into_iter().filter(inside).take(count).collect()
}

#[test]
fn cartan_formula_agrees_with_flow_pullback() {
    for name in BUILTIN_NAMES {
        let s = builtin(name).unwrap();
        let forms = random_forms(s.dim(), 1, 11);
        for field in [&s.field_x, &s.field_y] {
            if field.is_zero() {
                continue;
            }
            let lie = forms[0].lie(&field.into());
            for p in interior_points(&s, 6, 0.1, 3) {
                let exact = lie.value(&p).unwrap();
                let oracle = lie_by_flow(&forms[0], field, &p);
                let err = (exact - oracle).max_abs();
                assert!(err < 1e-8, "{name}/{}: {err:e} at {p:?}", field.label);
            }
        }
    }
}

#[test]
fn christoffel_symbols_match_finite_differences() {
    for (name, kv) in [
        ("sphere2_rotation", params(&[("squash", 0.3)])),
        ("product_s2xs2", BTreeMap::new()),
        ("plane_cr", BTreeMap::new()),
    ] {
        let s = builtin_with(name, &kv).unwrap();
        for p in interior_points(&s, 10, 0.05, 5) {
            let exact = christoffel_at(&s, &p).unwrap();
            let fd = christoffel_fd(&s, &p, 1e-5);
            for (a, b) in exact.data.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-8, "{name}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn round_sphere_curvature_is_one() {
    let s = builtin("sphere2_rotation").unwrap();
    for p in interior_points(&s, 20, 0.01, 8) {
        let r = riemann_at(&s, &p).unwrap();
        let sin2 = p[0].sin().powi(2);
        // R_{θφθφ} = sin²θ and Gaussian curvature R_{θφθφ}/det g = 1
        assert!((r.lowered(0, 1, 0, 1) - sin2).abs() < 1e-12);
        assert!((r.lowered(0, 1, 1, 0) + sin2).abs() < 1e-12);
        assert!((r.lowered(0, 1, 0, 1) / metric_at(&s, &p).unwrap().determinant() - 1.0).abs() < 1e-10);
    }
}

/// `μ_ab = −⟨e_a, ∇_{e_b}V⟩` from finite-difference Christoffel symbols and
/// field derivatives in a Gram–Schmidt frame built with nalgebra.
fn moment_fd(s: &Scenario, p: &[f64]) -> DMatrix<f64> {
    let n = p.len();
    let h = 1e-5;
    let g = metric_at(s, p).unwrap();
    let gamma = christoffel_fd(s, p, h);
    let v = s.field_x.at(p);
    let mut nabla = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[j] += h;
        b[j] -= h;
        let (va, vb) = (s.field_x.at(&a), s.field_x.at(&b));
        for i in 0..n {
            let mut acc = (va[i] - vb[i]) / (2.0 * h);
            for k in 0..n {
                acc += gamma[i * n * n + j * n + k] * v[k];
            }
            nabla[(i, j)] = acc;
        }
    }
    // columns of `e` are g-orthonormal, obtained from the Cholesky factor
    let l = g.clone().cholesky().unwrap().l();
    let e = l.transpose().try_inverse().unwrap();
    -(e.transpose() * &g * nabla * e)
}

#[test]
fn moment_matrix_matches_finite_differences() {
    for (name, kv) in [("sphere2_rotation", params(&[("squash", 0.2), ("t", 1.5)])), ("product_s2xs2", BTreeMap::new())] {
        let s = builtin_with(name, &kv).unwrap();
        for p in interior_points(&s, 8, 0.05, 21) {
            let exact = moment_endomorphism(&s, &s.field_x, &p).unwrap();
            let fd = moment_fd(&s, &p);
            assert!((&exact - &fd).amax() < 1e-8, "{name}: {exact} vs {fd}");
        }
    }
}

#[test]
fn zero_sets_match_the_analytic_fixed_points() {
    let s = builtin("product_s2xs2").unwrap();
    let comps = find_zero_components(&s, &TwistPair::of(&s)).unwrap();
    let mut poles: Vec<(f64, f64)> = comps.iter().map(|c| (c.base_point[0], c.base_point[2])).collect();
    poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(poles, vec![(0.0, 0.0), (0.0, PI), (PI, 0.0), (PI, PI)]);

    let s = builtin("product_positive_dim_M0").unwrap();
    let comps = find_zero_components(&s, &TwistPair::of(&s)).unwrap();
    assert_eq!(comps.len(), 2);
    assert!(comps.iter().all(|c| c.codim() == 2 && c.tangent_axes == vec![2, 3]));

    let s = builtin("torus2_translations").unwrap();
    assert!(find_zero_components(&s, &TwistPair::of(&s)).unwrap().is_empty());
}

#[test]
fn four_by_four_pfaffian_expansion() {
    let c = |re: f64, im: f64| C64::new(re, im);
    let mut a = SkewComplexMatrix::zeros(4);
    let vals = [c(1.0, 2.0), c(-0.5, 1.0), c(3.0, 0.0), c(0.2, -1.0), c(1.5, 0.5), c(-2.0, 0.1)];
    let idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    for (v, (i, j)) in vals.iter().zip(idx) {
        a.set(i, j, *v);
    }
    let expect = vals[0] * vals[5] - vals[1] * vals[4] + vals[2] * vals[3];
    assert!((a.pfaffian().unwrap() - expect).norm() < 1e-14);
}

#[test]
fn sphere_dh_integral_against_one_dimensional_quadrature() {
    for (t, c) in [(0.5, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 0.5), (1.0, 2.0)] {
        let s = builtin_with("sphere2_two_rotations", &params(&[("t", t), ("c", c)])).unwrap();
        let data = s.symplectic.clone().unwrap();
        let r = verify_dh(&s, &TwistPair::of(&s), &data).unwrap();
        let a = C64::new(t, c * t);
        let oracle = simpson(|th| (-a * th.cos()).exp() * th.sin(), 0.0, PI, 2000) * (2.0 * PI);
        let closed = sphere_dh(a);
        assert!((oracle - closed).norm() < 1e-9 * closed.norm());
        assert!((r.report.lhs - closed).norm() < 1e-9 * closed.norm(), "t={t} c={c}: {} vs {closed}", r.report.lhs);
        assert!((r.report.rhs - closed).norm() < 1e-9 * closed.norm());
    }
}

#[test]
fn product_dh_integral_factorizes() {
    let (t1, t2) = (0.7, 1.3);
    let s = builtin_with("product_s2xs2", &params(&[("t1", t1), ("t2", t2)])).unwrap();
    let r = verify_dh(&s, &TwistPair::of(&s), s.symplectic.as_ref().unwrap()).unwrap();
    let expect = sphere_dh(C64::new(t1, 0.0)) * sphere_dh(C64::new(0.0, t2));
    assert!((r.report.lhs - expect).norm() < 1e-8 * expect.norm());
    assert!((r.report.rhs - expect).norm() < 1e-8 * expect.norm());
}

#[test]
fn gauss_bonnet_and_euler_localization_ignore_the_metric() {
    let round = builtin("sphere2_rotation").unwrap();
    let base = verify_characteristic(&round, &TwistPair::of(&round), &CharacteristicClass::Pfaffian).unwrap();
    // Pf(−R̃) on the unit sphere with t = 1 integrates to −4π
    assert!((base.lhs - C64::new(-4.0 * PI, 0.0)).norm() < 1e-9);
    for squash in [0.25, 0.6] {
        let s = builtin_with("sphere2_rotation", &params(&[("squash", squash)])).unwrap();
        assert!((gauss_bonnet_integral(&s).unwrap().value - 2.0).norm() < 1e-9);
        let r = verify_characteristic(&s, &TwistPair::of(&s), &CharacteristicClass::Pfaffian).unwrap();
        assert!((r.lhs - base.lhs).norm() < 1e-8, "squash {squash}: {}", r.lhs);
        assert!((r.rhs - base.rhs).norm() < 1e-8);
    }
}

#[test]
fn sphere_area_by_quadrature() {
    let s = builtin("sphere2_rotation").unwrap();
    let omega = s.symplectic.as_ref().unwrap().omega_form(2);
    let area = integrate(&s, &omega).unwrap().value;
    assert!((area.re - 4.0 * PI).abs() < 1e-12);
    let zero = integrate(&s, &FormField::zero(2)).unwrap().value;
    assert_eq!(zero, C64::new(0.0, 0.0));
}
