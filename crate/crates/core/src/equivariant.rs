//! The twisted differential `d + i_X + √−1 i_Y`, metric-dual one-forms, the
//! four special closed forms and pointwise residuals of the identities they
//! satisfy.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::FormField;
use crate::error::{Error, Result};
use crate::form::GradedForm;
use crate::geometry::{commutator_residual, killing_residual, ComplexVectorField, Scenario, VectorField};
use crate::jet::{Jet, Layout};

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Number of random points in every residual sample.
pub const RESIDUAL_SAMPLES: usize = 200;

#[derive(Debug, Clone)]
pub struct TwistPair {
    pub x: VectorField,
    pub y: VectorField,
    pub commuting: bool,
}

impl TwistPair {
    pub fn of(s: &Scenario) -> TwistPair {
        TwistPair { x: s.field_x.clone(), y: s.field_y.clone(), commuting: s.commuting }
    }

    /// `X + √−1 Y`.
    pub fn combined(&self) -> ComplexVectorField {
        ComplexVectorField { terms: vec![(ONE, self.x.clone()), (I, self.y.clone())] }
    }
}

/// `d_{X+√−1Y} = d + i_X + √−1 i_Y`.
pub fn twisted_differential(pair: &TwistPair, form: &FormField) -> FormField {
    form.d().add(&form.interior(&pair.combined()))
}

/// `L_X + √−1 L_Y`, each by Cartan's formula.
pub fn twisted_lie(pair: &TwistPair, form: &FormField) -> FormField {
    form.lie(&pair.combined())
}

/// The one-form `⟨V, ·⟩` for a complex combination of fields.
pub fn dual_one_form(s: &Scenario, v: &ComplexVectorField) -> FormField {
    let metric = s.metric.clone();
    let v = v.clone();
    let n = s.dim();
    FormField::new(n, move |p, k| {
        let x = Jet::seed(p, k);
        let g = metric.eval_jets(&x);
        let vj = v.eval_jets(&x);
        let mut out = GradedForm::zero(n, Jet::zero(Layout::get(n, k)));
        for i in 0..n {
            let mut acc = Jet::zero(Layout::get(n, k));
            for j in 0..n {
                if vj[j].is_zero() {
                    continue;
                }
                acc += &(&g[i * n + j] * &vj[j]);
            }
            out.set(1 << i, acc);
        }
        Ok(out)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GeneratorKind {
    XplusIY,
    YminusIX,
    XminusIY,
    YplusIX,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] =
        [GeneratorKind::XplusIY, GeneratorKind::YminusIX, GeneratorKind::XminusIY, GeneratorKind::YplusIX];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::XplusIY => "X'+iY'",
            GeneratorKind::YminusIX => "Y'-iX'",
            GeneratorKind::XminusIY => "X'-iY'",
            GeneratorKind::YplusIX => "Y'+iX'",
        }
    }

    /// Whether the generator is only twisted-closed for commuting fields.
    pub fn requires_commuting(self) -> bool {
        matches!(self, GeneratorKind::XminusIY | GeneratorKind::YplusIX)
    }

    /// Coefficients `(a, b)` with `β = a X' + b Y'`.
    pub fn coefficients(self) -> (C64, C64) {
        match self {
            GeneratorKind::XplusIY => (ONE, I),
            GeneratorKind::YminusIX => (-I, ONE),
            GeneratorKind::XminusIY => (ONE, -I),
            GeneratorKind::YplusIX => (I, ONE),
        }
    }

    pub fn admissible(commuting: bool) -> Vec<GeneratorKind> {
        GeneratorKind::ALL.into_iter().filter(|k| commuting || !k.requires_commuting()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SpecialForm {
    pub kind: GeneratorKind,
    /// The degree-one generator `β`.
    pub beta: FormField,
    /// Its twisted differential `d_{X+√−1Y} β`.
    pub d_beta: FormField,
}

pub fn special_closed_form(s: &Scenario, pair: &TwistPair, kind: GeneratorKind) -> Result<SpecialForm> {
    if kind.requires_commuting() && !pair.commuting {
        return Err(Error::precondition(format!(
            "generator {} is twisted-closed only for commuting fields, but [X,Y] = 0 is not asserted",
            kind.name()
        )));
    }
    let (a, b) = kind.coefficients();
    let v = ComplexVectorField { terms: vec![(a, pair.x.clone()), (b, pair.y.clone())] };
    let beta = dual_one_form(s, &v);
    let d_beta = twisted_differential(pair, &beta);
    Ok(SpecialForm { kind, beta, d_beta })
}

/// Sup of `f(p)` over `points`, evaluated in parallel and reduced in order.
pub fn sup_over<F>(points: &[Vec<f64>], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let vals: Vec<Result<f64>> = points.par_iter().map(|p| f(p)).collect();
    let mut worst = 0.0f64;
    for v in vals {
        worst = worst.max(v?);
    }
    Ok(worst)
}

/// `sup ‖d_{X+√−1Y} form‖` over the points.
pub fn closedness_residual(pair: &TwistPair, form: &FormField, points: &[Vec<f64>]) -> Result<f64> {
    let dt = twisted_differential(pair, form);
    sup_over(points, |p| Ok(dt.value(p)?.max_abs()))
}

/// `sup ‖(d_{X+√−1Y})² ω − (L_X + √−1 L_Y) ω‖` over the points.
pub fn twisted_square_residual(pair: &TwistPair, form: &FormField, points: &[Vec<f64>]) -> Result<f64> {
    let sq = twisted_differential(pair, &twisted_differential(pair, form));
    let lie = twisted_lie(pair, form);
    let diff = sq.sub(&lie);
    sup_over(points, |p| Ok(diff.value(p)?.max_abs()))
}

/// Pointwise identities satisfied by the twisted calculus.
#[derive(Debug, Clone)]
pub enum Identity {
    /// A pair of equal-degree forms `ξ, η` with `ξ + √−1 η` twisted-closed
    /// splits into `dξ = dη = 0`, `i_X ξ = i_Y η`, `i_X η = −i_Y ξ`.
    CauchyRiemann { xi: FormField, eta: FormField },
    /// `L_X Y' + L_Y X' = 0`.
    DualLieSum,
    /// `[X, Y] = 0`.
    Commutator,
    /// `L_X Y' = 0` and `L_Y X' = 0` for commuting fields.
    DualLieVanishing,
    /// `L_X g = 0` and `L_Y g = 0`.
    Killing,
}

impl Identity {
    pub fn name(&self) -> &'static str {
        match self {
            Identity::CauchyRiemann { .. } => "cauchy-riemann split",
            Identity::DualLieSum => "L_X Y' + L_Y X' = 0",
            Identity::Commutator => "[X,Y] = 0",
            Identity::DualLieVanishing => "L_X Y' = L_Y X' = 0",
            Identity::Killing => "L_X g = L_Y g = 0",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub parts: Vec<(String, f64)>,
    pub residual: f64,
    pub points: usize,
}

pub fn lemma_residual(s: &Scenario, pair: &TwistPair, which: &Identity, seed: u64) -> Result<ResidualReport> {
    let points = s.residual_points(RESIDUAL_SAMPLES, seed);
    let sup_form = |f: &FormField| sup_over(&points, |p| Ok(f.value(p)?.max_abs()));
    let xc: ComplexVectorField = (&pair.x).into();
    let yc: ComplexVectorField = (&pair.y).into();
    let parts: Vec<(String, f64)> = match which {
        Identity::CauchyRiemann { xi, eta } => {
            let ix_xi = xi.interior(&xc);
            let iy_eta = eta.interior(&yc);
            let ix_eta = eta.interior(&xc);
            let iy_xi = xi.interior(&yc);
            vec![
                ("d xi".into(), sup_form(&xi.d())?),
                ("d eta".into(), sup_form(&eta.d())?),
                ("i_X xi - i_Y eta".into(), sup_form(&ix_xi.sub(&iy_eta))?),
                ("i_X eta + i_Y xi".into(), sup_form(&ix_eta.add(&iy_xi))?),
            ]
        }
        Identity::DualLieSum => {
            let xd = dual_one_form(s, &xc);
            let yd = dual_one_form(s, &yc);
            vec![("L_X Y' + L_Y X'".into(), sup_form(&yd.lie(&xc).add(&xd.lie(&yc)))?)]
        }
        Identity::Commutator => {
            vec![("[X,Y]".into(), sup_over(&points, |p| Ok(commutator_residual(&pair.x, &pair.y, p)))?)]
        }
        Identity::DualLieVanishing => {
            if !pair.commuting {
                return Err(Error::precondition("L_X Y' = L_Y X' = 0 requires commuting fields"));
            }
            let xd = dual_one_form(s, &xc);
            let yd = dual_one_form(s, &yc);
            vec![("L_X Y'".into(), sup_form(&yd.lie(&xc))?), ("L_Y X'".into(), sup_form(&xd.lie(&yc))?)]
        }
        Identity::Killing => vec![
            ("L_X g".into(), sup_over(&points, |p| Ok(killing_residual(s, &pair.x, p)))?),
            ("L_Y g".into(), sup_over(&points, |p| Ok(killing_residual(s, &pair.y, p)))?),
        ],
    };
    let residual = parts.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    Ok(ResidualReport { name: which.name().to_string(), parts, residual, points: points.len() })
}
