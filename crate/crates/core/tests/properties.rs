use kvloc_core::equivariant::twisted_square_residual;
use kvloc_core::form::{FormValue, GradedForm};
use kvloc_core::jet::Jet;
use kvloc_core::runner::random_forms;
use kvloc_core::scenarios::builtin;
use kvloc_core::zeroset::SkewComplexMatrix;
use kvloc_core::{TwistPair, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn skew(n: usize) -> impl Strategy<Value = SkewComplexMatrix> {
    prop::collection::vec(complex(), n * (n - 1) / 2).prop_map(move |vals| {
        let mut m = SkewComplexMatrix::zeros(n);
        let mut it = vals.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, it.next().unwrap());
            }
        }
        m
    })
}

fn even_skew() -> impl Strategy<Value = SkewComplexMatrix> {
    (1usize..=4).prop_flat_map(|h| skew(2 * h))
}

fn form(dim: usize) -> impl Strategy<Value = FormValue> {
    prop::collection::vec(complex(), 1 << dim).prop_map(move |c| GradedForm::from_coeffs(dim, c))
}

fn homogeneous(dim: usize, deg: usize) -> impl Strategy<Value = FormValue> {
    form(dim).prop_map(move |f| f.degree_part(deg))
}

fn close(a: &FormValue, b: &FormValue, tol: f64) -> bool {
    (a.clone() - b.clone()).max_abs() <= tol * (1.0 + a.max_abs().max(b.max_abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pfaffian_squares_to_determinant(a in even_skew()) {
        let pf = a.pfaffian().unwrap();
        let det = a.to_dense().lu().determinant();
        prop_assert!((pf * pf - det).norm() <= 1e-10 * det.norm().max(1e-300) + 1e-12, "{} vs {}", pf * pf, det);
    }

    #[test]
    fn pfaffian_congruence(a in skew(4), b in prop::collection::vec(complex(), 16)) {
        let b = DMatrix::from_vec(4, 4, b);
        let dense = a.to_dense();
        let conj = &b * dense * b.transpose();
        let rhs = b.clone().lu().determinant() * a.pfaffian().unwrap();
        let lhs = SkewComplexMatrix::from_upper(&conj).pfaffian().unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn odd_pfaffian_is_rejected(a in skew(3)) {
        prop_assert!(a.pfaffian().is_err());
    }

    #[test]
    fn wedge_is_graded_commutative(p in 0usize..=4, q in 0usize..=4, seed in any::<u64>()) {
        let forms = random_forms(4, 2, seed);
        let pt = [0.3, -0.2, 0.7, 1.1];
        let a = forms[0].value(&pt).unwrap().degree_part(p);
        let b = forms[1].value(&pt).unwrap().degree_part(q);
        let sign = if p * q % 2 == 1 { -1.0 } else { 1.0 };
        prop_assert!(close(&a.wedge(&b), &b.wedge(&a).scale(C64::new(sign, 0.0)), 1e-14));
    }

    #[test]
    fn interior_squares_to_zero(f in form(4), v in prop::collection::vec(complex(), 4)) {
        let twice = f.interior(&v).interior(&v);
        prop_assert!(twice.max_abs() < 1e-12);
    }

    #[test]
    fn interior_is_an_antiderivation(p in 0usize..=4, a in form(4), b in form(4), v in prop::collection::vec(complex(), 4)) {
        let a = a.degree_part(p);
        let sign = if p % 2 == 1 { -1.0 } else { 1.0 };
        let lhs = a.wedge(&b).interior(&v);
        let rhs = a.interior(&v).wedge(&b) + a.wedge(&b.interior(&v)).scale(C64::new(sign, 0.0));
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn exponential_of_even_forms_is_a_homomorphism(a in form(4), b in form(4)) {
        let a = a.degree_part(0) + a.degree_part(2) + a.degree_part(4);
        let b = b.degree_part(2);
        let lhs = (a.clone() + b.clone()).exp();
        let rhs = a.exp().wedge(&b.exp());
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn inverse_is_a_wedge_inverse(a in form(4), c in complex()) {
        prop_assume!(c.norm() > 0.1);
        let mut a = a;
        a.set(0, c);
        let one = FormValue::scalar(4, C64::new(1.0, 0.0));
        prop_assert!(close(&a.wedge(&a.inverse()), &one, 1e-9));
    }

    #[test]
    fn homogeneous_top_wedge_dimension_count(a in homogeneous(4, 3), b in homogeneous(4, 2)) {
        // degree 5 > 4 vanishes identically
        prop_assert!(a.wedge(&b).max_abs() == 0.0);
    }

    #[test]
    fn jet_derivatives_match_finite_differences(x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let f = |x: f64, y: f64| (x * y).sin().exp() / (2.0 + x * x);
        let v = Jet::seed(&[x, y], 2);
        let j = (&v[0] * &v[1]).sin().exp() / (Jet::constant(v[0].layout(), C64::new(2.0, 0.0)) + &v[0] * &v[0]);
        let h = 1e-5;
        let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        prop_assert!((j.value().re - f(x, y)).abs() < 1e-14);
        prop_assert!((j.derivative(&[1, 0]).unwrap().re - fx).abs() < 1e-8);
        prop_assert!((j.derivative(&[1, 1]).unwrap().re - fxy).abs() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn twisted_square_is_the_lie_derivative(seed in any::<u64>(), which in 0usize..3) {
        let name = ["sphere2_two_rotations", "product_s2xs2", "torus2_translations"][which];
        let s = builtin(name).unwrap();
        let pair = TwistPair::of(&s);
        let f = &random_forms(s.dim(), 1, seed)[0];
        let pts = s.chart.sample(8, seed);
        prop_assert!(twisted_square_residual(&pair, f, &pts).unwrap() < 1e-10);
    }

    #[test]
    fn exterior_derivative_squares_to_zero(seed in any::<u64>()) {
        let f = &random_forms(3, 1, seed)[0];
        let dd = f.d().d();
        let p = [0.1, 0.5, -0.3];
        prop_assert!(dd.value(&p).unwrap().max_abs() < 1e-13);
    }
}
