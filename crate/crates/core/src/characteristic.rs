//! Equivariant curvature `R̃ = R − μ(X) − √−1 μ(Y)` and the characteristic
//! forms built from it.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::calculus::FormField;
use crate::equivariant::{sup_over, TwistPair};
use crate::error::{Error, Result};
use crate::form::{FormJet, GradedForm};
use crate::geometry::{orthonormal_frame_jets, ComplexVectorField, Scenario};
use crate::jet::{Jet, Layout, MAX_ORDER};
use crate::localization::{integrate, verify_localization_with, Integral, LocalizationReport};
use crate::zeroset::{find_zero_components, moment_jets};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Frame {
    /// Components `A^i_j` in the coordinate basis `∂_i`.
    Coordinate,
    /// Components `A_ab = ⟨e_a, A e_b⟩` in the Gram–Schmidt frame of the axes.
    Orthonormal,
}

type MatrixFn = dyn Fn(&[f64], usize) -> Result<Vec<FormJet>> + Send + Sync;

/// An `End(TM)`-valued inhomogeneous form, row-major `n × n`.
#[derive(Clone)]
pub struct EndValuedFormField {
    pub dim: usize,
    pub frame: Frame,
    eval: Arc<MatrixFn>,
}

impl std::fmt::Debug for EndValuedFormField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EndValuedFormField(dim = {}, {:?})", self.dim, self.frame)
    }
}

impl EndValuedFormField {
    pub fn eval(&self, p: &[f64], order: usize) -> Result<Vec<FormJet>> {
        // curvature needs two more derivative orders of the metric
        if order + 2 > MAX_ORDER + 1 {
            return Err(Error::Capability { requested: order + 2, max: MAX_ORDER + 1 });
        }
        (self.eval)(p, order)
    }
}

fn zero_form(n: usize, order: usize) -> FormJet {
    GradedForm::zero(n, Jet::zero(Layout::get(n, order)))
}

/// Curvature 2-form matrix plus the moment part, in the chosen frame.
fn curvature_matrix(
    s: &Scenario,
    pair: &TwistPair,
    p: &[f64],
    k: usize,
    frame: Frame,
    with_moments: bool,
) -> Result<Vec<FormJet>> {
    let n = s.dim();
    let layout = Layout::get(n, k);
    let riem = s.riemann_jets(p, k)?;
    let combined = pair.combined();
    let mut out = vec![zero_form(n, k); n * n];
    match frame {
        Frame::Coordinate => {
            let jac = s.covariant_jacobian_jets(&combined, p, k)?;
            for i in 0..n {
                for j in 0..n {
                    let f = &mut out[i * n + j];
                    for a in 0..n {
                        for b in a + 1..n {
                            f.set((1 << a) | (1 << b), riem[((i * n + j) * n + a) * n + b].clone());
                        }
                    }
                    if with_moments {
                        // −μ(X+iY) = ∇(X+iY)
                        f.set(0, jac[i * n + j].clone());
                    }
                }
            }
        }
        Frame::Orthonormal => {
            let axes: Vec<usize> = (0..n).collect();
            let g = s.metric_jets(p, k);
            let e = orthonormal_frame_jets(&g, n, &axes);
            let mu = if with_moments { Some(moment_jets(s, &combined, p, k, &axes)?) } else { None };
            // lowered frame covectors e_a^♭ = Σ_i e_a^i g_ij
            let mut lowered = vec![Jet::zero(layout); n * n];
            for a in 0..n {
                for j in 0..n {
                    let mut acc = Jet::zero(layout);
                    for i in 0..n {
                        if !e[a][i].is_zero() && !g[i * n + j].is_zero() {
                            acc += &(&e[a][i] * &g[i * n + j]);
                        }
                    }
                    lowered[a * n + j] = acc;
                }
            }
            for u in 0..n {
                for v in u + 1..n {
                    // t[a][m] = e_a^♭(R(∂u, ∂v) ∂m)
                    let mut t = vec![Jet::zero(layout); n * n];
                    for a in 0..n {
                        for m in 0..n {
                            let mut acc = Jet::zero(layout);
                            for j in 0..n {
                                let r = &riem[((j * n + m) * n + u) * n + v];
                                if !r.is_zero() && !lowered[a * n + j].is_zero() {
                                    acc += &(&lowered[a * n + j] * r);
                                }
                            }
                            t[a * n + m] = acc;
                        }
                    }
                    for a in 0..n {
                        for b in 0..n {
                            let mut acc = Jet::zero(layout);
                            for m in 0..n {
                                if !t[a * n + m].is_zero() && !e[b][m].is_zero() {
                                    acc += &(&t[a * n + m] * &e[b][m]);
                                }
                            }
                            out[a * n + b].set((1 << u) | (1 << v), acc);
                        }
                    }
                }
            }
            if let Some(mu) = &mu {
                for ab in 0..n * n {
                    out[ab].set(0, -mu[ab].clone());
                }
            }
        }
    }
    Ok(out)
}

/// `R̃ = R − μ(X) − √−1 μ(Y)` in the requested frame.
pub fn equivariant_curvature(s: &Scenario, pair: &TwistPair, frame: Frame) -> EndValuedFormField {
    let (s, pair) = (Arc::new(s.clone()), pair.clone());
    EndValuedFormField {
        dim: s.dim(),
        frame,
        eval: Arc::new(move |p, k| curvature_matrix(&s, &pair, p, k, frame, true)),
    }
}

/// The Riemannian curvature alone (no moment terms).
pub fn riemannian_curvature(s: &Scenario, frame: Frame) -> EndValuedFormField {
    let s = Arc::new(s.clone());
    let pair = TwistPair::of(&s);
    EndValuedFormField { dim: s.dim(), frame, eval: Arc::new(move |p, k| curvature_matrix(&s, &pair, p, k, frame, false)) }
}

fn mat_mul(a: &[FormJet], b: &[FormJet], n: usize) -> Vec<FormJet> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = a[0].zero_like_form();
            for m in 0..n {
                acc = acc + a[i * n + m].wedge(&b[m * n + j]);
            }
            out.push(acc);
        }
    }
    out
}

impl FormJet {
    fn zero_like_form(&self) -> FormJet {
        GradedForm::zero(self.dim(), Jet::zero(self.coeffs()[0].layout()))
    }
}

/// Sup over `points` of `‖∇̃R̃‖ = ‖dR̃ + [Γ, R̃] + i_{X+√−1Y} R̃‖`, computed in
/// the coordinate frame with connection matrix `Γ^i_j = Γ^i_{kj} dx^k`.
pub fn bianchi_residual(s: &Scenario, pair: &TwistPair, points: &[Vec<f64>]) -> Result<f64> {
    let rt = equivariant_curvature(s, pair, Frame::Coordinate);
    let n = s.dim();
    let combined: ComplexVectorField = pair.combined();
    sup_over(points, |p| {
        let r1 = rt.eval(p, 1)?;
        let r0: Vec<FormJet> = r1.iter().map(|f| f.truncate(0)).collect();
        let gamma = s.christoffel_jets(p, 0)?;
        let conn: Vec<FormJet> = (0..n * n)
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let mut f = zero_form(n, 0);
                for k in 0..n {
                    f.set(1 << k, gamma[i * n * n + k * n + j].clone());
                }
                f
            })
            .collect();
        let v = combined.eval_jets(&Jet::seed(p, 0));
        let left = mat_mul(&conn, &r0, n);
        let right = mat_mul(&r0, &conn, n);
        let mut worst = 0.0f64;
        for idx in 0..n * n {
            let d = r1[idx].d().ok_or(Error::Capability { requested: 1, max: 0 })?;
            let total = d + left[idx].clone() - right[idx].clone() + r0[idx].interior(&v);
            worst = worst.max(total.value().max_abs());
        }
        Ok(worst)
    })
}

/// `Tr f(R̃)` for `f(x) = Σ c_k x^k`, powers taken with the wedge product.
pub fn char_trace_form(f: &[C64], rt: &EndValuedFormField) -> FormField {
    let f = f.to_vec();
    let rt = rt.clone();
    let n = rt.dim;
    FormField::new(n, move |p, k| {
        let m = rt.eval(p, k)?;
        let layout = Layout::get(n, k);
        let mut power: Vec<FormJet> = (0..n * n)
            .map(|ij| GradedForm::scalar(n, Jet::real(layout, if ij / n == ij % n { 1.0 } else { 0.0 })))
            .collect();
        let mut acc = zero_form(n, k);
        for (deg, c) in f.iter().enumerate() {
            if deg > 0 {
                power = mat_mul(&power, &m, n);
            }
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            for i in 0..n {
                acc = acc + power[i * n + i].scale(*c);
            }
        }
        Ok(acc)
    })
}

/// `Pf(−R̃)` in the orthonormal frame.
pub fn char_pfaffian_form(rt: &EndValuedFormField) -> Result<FormField> {
    pfaffian_form(rt, C64::new(-1.0, 0.0))
}

fn pfaffian_form(rt: &EndValuedFormField, factor: C64) -> Result<FormField> {
    let n = rt.dim;
    if n % 2 == 1 {
        return Err(Error::Argument(format!("Pfaffian form needs even dimension, got {n}")));
    }
    if rt.frame != Frame::Orthonormal {
        return Err(Error::Frame("Pfaffian forms need the orthonormal frame".into()));
    }
    let rt = rt.clone();
    Ok(FormField::new(n, move |p, k| {
        let m = rt.eval(p, k)?;
        let one = GradedForm::scalar(n, Jet::real(Layout::get(n, k), 1.0));
        crate::zeroset::pfaffian_with(n, |i, j| m[i * n + j].scale(factor), one)
    }))
}

/// `∫_M Pf(R/2π)`, the Euler characteristic under this curvature convention.
pub fn gauss_bonnet_integral(s: &Scenario) -> Result<Integral> {
    let r = riemannian_curvature(s, Frame::Orthonormal);
    let pf = pfaffian_form(&r, C64::new(1.0 / (2.0 * PI), 0.0))?;
    integrate(s, &pf)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CharacteristicClass {
    /// `Tr f(R̃)` with the given polynomial coefficients (constant first).
    Trace(Vec<C64>),
    /// `Pf(−R̃)`.
    Pfaffian,
}

pub fn characteristic_form(s: &Scenario, pair: &TwistPair, which: &CharacteristicClass) -> Result<FormField> {
    match which {
        CharacteristicClass::Trace(f) => {
            if f.len() > 5 {
                return Err(Error::Argument("trace polynomials are limited to degree 4".into()));
            }
            Ok(char_trace_form(f, &equivariant_curvature(s, pair, Frame::Coordinate)))
        }
        CharacteristicClass::Pfaffian => char_pfaffian_form(&equivariant_curvature(s, pair, Frame::Orthonormal)),
    }
}

pub fn verify_characteristic(s: &Scenario, pair: &TwistPair, which: &CharacteristicClass) -> Result<LocalizationReport> {
    let comps = find_zero_components(s, pair)?;
    if comps.is_empty() {
        return Err(Error::precondition("zero set is empty"));
    }
    let eta = characteristic_form(s, pair, which)?;
    verify_localization_with(s, pair, &eta, &comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant::closedness_residual;
    use crate::scenarios::builtin;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn flat_torus_curvature_vanishes() {
        let s = builtin("torus2_translations").unwrap();
        let rt = equivariant_curvature(&s, &TwistPair::of(&s), Frame::Orthonormal);
        for p in s.chart.sample(5, 1) {
            assert!(rt.eval(&p, 0).unwrap().iter().all(|f| f.value().max_abs() < 1e-14));
        }
    }

    #[test]
    fn trace_of_identity_is_dimension() {
        let s = builtin("sphere2_rotation").unwrap();
        let f = characteristic_form(&s, &TwistPair::of(&s), &CharacteristicClass::Trace(vec![c(1.0)])).unwrap();
        let v = f.value(&[0.7, 0.1]).unwrap();
        assert!((v.degree0() - c(2.0)).norm() < 1e-15 && v.get(0b11).norm() == 0.0);
    }

    #[test]
    fn sphere_pfaffian_form_is_explicit() {
        // Pf(−R̃) = −sinθ dθ∧dφ + cosθ for the unit-speed rotation
        let s = builtin("sphere2_rotation").unwrap();
        let f = characteristic_form(&s, &TwistPair::of(&s), &CharacteristicClass::Pfaffian).unwrap();
        for th in [0.4f64, 1.3, 2.8] {
            let v = f.value(&[th, 2.0]).unwrap();
            assert!((v.degree0() - c(th.cos())).norm() < 1e-13);
            assert!((v.get(0b11) - c(-th.sin())).norm() < 1e-13);
        }
    }

    #[test]
    fn characteristic_forms_are_closed() {
        let s = builtin("sphere2_two_rotations").unwrap();
        let pair = TwistPair::of(&s);
        let pts = s.chart.sample(30, 4);
        for which in [CharacteristicClass::Pfaffian, CharacteristicClass::Trace(vec![c(0.0), c(0.0), c(1.0)])] {
            let f = characteristic_form(&s, &pair, &which).unwrap();
            assert!(closedness_residual(&pair, &f, &pts).unwrap() < 1e-10, "{which:?}");
        }
    }

    #[test]
    fn bianchi_identity_on_sphere() {
        let s = builtin("sphere2_two_rotations").unwrap();
        let pts = s.chart.sample(20, 8);
        assert!(bianchi_residual(&s, &TwistPair::of(&s), &pts).unwrap() < 1e-10);
    }

    #[test]
    fn euler_characteristic_of_sphere() {
        let s = builtin("sphere2_rotation").unwrap();
        assert!((gauss_bonnet_integral(&s).unwrap().value - c(2.0)).norm() < 1e-8);
    }

    #[test]
    fn empty_zero_set_guard() {
        let s = builtin("torus2_translations").unwrap();
        let r = verify_characteristic(&s, &TwistPair::of(&s), &CharacteristicClass::Trace(vec![c(1.0)]));
        assert!(matches!(r, Err(Error::Precondition { .. })));
    }
}
