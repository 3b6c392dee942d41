//! Differential-form fields and the Cartan calculus on a chart.
//!
//! A [`FormField`] is a lazily evaluated inhomogeneous form: given a point
//! and a jet order `k` it returns coefficients that are exact to order `k`.
//! The exterior derivative asks its argument for order `k + 1`, so iterated
//! derivatives are exact until the jet order cap is reached, at which point
//! evaluation fails with [`Error::Capability`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::form::{Coeff, FormJet, FormValue, GradedForm};
use crate::geometry::{ComplexVectorField, VectorField};
use crate::jet::{Jet, Layout, MAX_ORDER};

type EvalFn = dyn Fn(&[f64], usize) -> Result<FormJet> + Send + Sync;

#[derive(Clone)]
pub struct FormField {
    dim: usize,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormField(dim = {})", self.dim)
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        Err(Error::Capability { requested: order, max: MAX_ORDER })
    } else {
        Ok(())
    }
}

impl FormField {
    pub fn new<F>(dim: usize, f: F) -> FormField
    where
        F: Fn(&[f64], usize) -> Result<FormJet> + Send + Sync + 'static,
    {
        FormField { dim, eval: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient jets at `p`, exact to `order`.
    pub fn eval(&self, p: &[f64], order: usize) -> Result<FormJet> {
        check_order(order)?;
        if p.len() != self.dim {
            return Err(Error::Argument(format!("point has {} coordinates, form lives in dimension {}", p.len(), self.dim)));
        }
        (self.eval)(p, order)
    }

    pub fn value(&self, p: &[f64]) -> Result<FormValue> {
        Ok(self.eval(p, 0)?.value())
    }

    pub fn zero(dim: usize) -> FormField {
        FormField::new(dim, move |_, k| Ok(GradedForm::zero(dim, Jet::zero(Layout::get(dim, k)))))
    }

    /// A form with constant coefficients.
    pub fn constant(value: FormValue) -> FormField {
        let dim = value.dim();
        FormField::new(dim, move |_, k| {
            let layout = Layout::get(dim, k);
            Ok(value.map(|c| Jet::constant(layout, *c)))
        })
    }

    /// `Σ c · e(x) dx^mask` over the given terms.
    pub fn from_exprs(dim: usize, terms: Vec<(u32, C64, Expr)>) -> FormField {
        let terms = Arc::new(terms);
        FormField::new(dim, move |p, k| {
            let x = Jet::seed(p, k);
            let layout = Layout::get(dim, k);
            let mut out = GradedForm::zero(dim, Jet::zero(layout));
            for (mask, c, e) in terms.iter() {
                let v = e.eval_jet(&x, layout).scale(*c);
                let slot = out.get(*mask).clone();
                out.set(*mask, slot + v);
            }
            Ok(out)
        })
    }

    pub fn scalar(dim: usize, e: Expr) -> FormField {
        FormField::from_exprs(dim, vec![(0, C64::new(1.0, 0.0), e)])
    }

    pub fn d(&self) -> FormField {
        let inner = self.clone();
        FormField::new(self.dim, move |p, k| {
            let f = inner.eval(p, k + 1)?;
            f.d().ok_or(Error::Capability { requested: k + 1, max: MAX_ORDER })
        })
    }

    /// Contraction `i_V` with a complex vector field.
    pub fn interior(&self, v: &ComplexVectorField) -> FormField {
        let inner = self.clone();
        let v = v.clone();
        FormField::new(self.dim, move |p, k| {
            let f = inner.eval(p, k)?;
            let vj = v.eval_jets(&Jet::seed(p, k));
            Ok(f.interior(&vj))
        })
    }

    /// Lie derivative by Cartan's formula `L_V = d i_V + i_V d`.
    pub fn lie(&self, v: &ComplexVectorField) -> FormField {
        self.interior(v).d().add(&self.d().interior(v))
    }

    pub fn add(&self, other: &FormField) -> FormField {
        let (a, b) = (self.clone(), other.clone());
        FormField::new(self.dim, move |p, k| Ok(a.eval(p, k)? + b.eval(p, k)?))
    }

    pub fn sub(&self, other: &FormField) -> FormField {
        let (a, b) = (self.clone(), other.clone());
        FormField::new(self.dim, move |p, k| Ok(a.eval(p, k)? - b.eval(p, k)?))
    }

    pub fn scale(&self, s: C64) -> FormField {
        let a = self.clone();
        FormField::new(self.dim, move |p, k| Ok(a.eval(p, k)?.scale(s)))
    }

    pub fn wedge(&self, other: &FormField) -> FormField {
        let (a, b) = (self.clone(), other.clone());
        FormField::new(self.dim, move |p, k| Ok(a.eval(p, k)?.wedge(&b.eval(p, k)?)))
    }

    /// Multiplication by a scalar function.
    pub fn times(&self, f: &Expr) -> FormField {
        let (a, f) = (self.clone(), f.clone());
        let dim = self.dim;
        FormField::new(dim, move |p, k| {
            let x = Jet::seed(p, k);
            let v = f.eval_jet(&x, Layout::get(dim, k));
            Ok(a.eval(p, k)?.map(|c| c * &v))
        })
    }

    pub fn exp(&self) -> FormField {
        let a = self.clone();
        FormField::new(self.dim, move |p, k| Ok(a.eval(p, k)?.exp()))
    }

    pub fn degree_part(&self, deg: usize) -> FormField {
        let a = self.clone();
        FormField::new(self.dim, move |p, k| Ok(a.eval(p, k)?.degree_part(deg)))
    }

    /// Largest coefficient modulus over the given points.
    pub fn sup_norm(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in points {
            worst = worst.max(self.value(p)?.max_abs());
        }
        Ok(worst)
    }
}

impl<T: Coeff> GradedForm<T> {
    pub fn is_close(&self, other: &Self, tol: f64, norm: impl Fn(&T) -> f64) -> bool {
        self.coeffs().iter().zip(other.coeffs()).all(|(a, b)| norm(&(a.clone() - b.clone())) <= tol)
    }
}

/// Lie derivative `L_V` computed directly from its coordinate formula
/// (`V^k ∂_k ω_I` plus the terms from differentiating the basis
/// covectors), independent of Cartan's formula.
pub fn lie_derivative_coordinates(form: &FormField, v: &VectorField, p: &[f64]) -> Result<FormValue> {
    let n = form.dim();
    let f = form.eval(p, 1)?;
    let x = Jet::seed(p, 1);
    let vj = v.eval_jets(&x);
    let e = |k: usize| crate::geometry::unit(n, k);
    let mut out = FormValue::real_zero(n);
    for (m, c) in f.coeffs().iter().enumerate() {
        let mask = m as u32;
        let mut acc = out.get(mask).to_owned();
        for k in 0..n {
            acc += vj[k].value() * c.derivative(&e(k)).unwrap();
        }
        out.set(mask, acc);
        // L_V dx^i = d V^i = ∂_j V^i dx^j replaces one factor at a time
        for i in 0..n {
            if mask & (1 << i) == 0 {
                continue;
            }
            for j in 0..n {
                let dvij = vj[i].derivative(&e(j)).unwrap();
                if dvij == C64::new(0.0, 0.0) {
                    continue;
                }
                let rest = mask & !(1 << i);
                if j != i && rest & (1 << j) != 0 {
                    continue;
                }
                let target = rest | (1 << j);
                // moving dx^j into the slot of dx^i: signs from position
                let s = crate::form::insertion_sign(rest, i) * crate::form::insertion_sign(rest, j);
                let cur = *out.get(target);
                out.set(target, cur + c.value() * dvij * s);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn vars3() -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    fn e(src: &str) -> Expr {
        crate::expr::parse(src, &vars3(), &BTreeMap::new()).unwrap()
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    fn sample_form() -> FormField {
        FormField::from_exprs(
            3,
            vec![
                (0b000, one(), e("sin(x*y) + z^2")),
                (0b001, one(), e("exp(y) * z")),
                (0b010, C64::new(0.0, 2.0), e("x^3 - cos(z)")),
                (0b110, one(), e("x*y*z")),
                (0b101, one(), e("sin(x + 2*y)")),
            ],
        )
    }

    #[test]
    fn d_squared_vanishes() {
        let dd = sample_form().d().d();
        for p in [[0.1, 0.2, 0.3], [-1.0, 0.7, 2.0]] {
            assert!(dd.value(&p).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn d_of_function_is_gradient() {
        let f = FormField::scalar(3, e("x^2 * y + z"));
        let df = f.d().value(&[1.5, 2.0, 0.0]).unwrap();
        assert!((df.get(0b001).re - 6.0).abs() < 1e-14);
        assert!((df.get(0b010).re - 2.25).abs() < 1e-14);
        assert!((df.get(0b100).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cartan_formula_matches_coordinate_lie_derivative() {
        let v = VectorField::new("V", vec![e("y"), e("-x + z^2"), e("sin(x)")]);
        let w = sample_form();
        let cv: ComplexVectorField = (&v).into();
        for p in [[0.3, -0.4, 0.9], [1.2, 0.5, -0.7]] {
            let a = w.lie(&cv).value(&p).unwrap();
            let b = lie_derivative_coordinates(&w, &v, &p).unwrap();
            assert!(a.is_close(&b, 1e-12, |c| c.norm()), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn iterated_derivatives_hit_capability_limit() {
        let mut f = FormField::scalar(3, e("x"));
        for _ in 0..=MAX_ORDER {
            f = f.d();
        }
        assert!(matches!(f.value(&[0.0, 0.0, 0.0]), Err(Error::Capability { .. })));
        assert!(matches!(sample_form().eval(&[0.0; 3], MAX_ORDER + 1), Err(Error::Capability { .. })));
    }

    #[test]
    fn wrong_point_dimension_is_rejected() {
        assert!(matches!(sample_form().value(&[0.0, 1.0]), Err(Error::Argument(_))));
    }
}
