//! Chart-based compact Riemannian manifolds.
//!
//! Every manifold is a single coordinate box with periodic identifications
//! and a list of coordinate-singular loci (e.g. the poles of spherical
//! coordinates). Metric and vector-field coefficients are closed-form
//! expressions, so the Levi-Civita connection and the curvature tensor are
//! computed from exact jet derivatives.
//!
//! Curvature convention: `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`, with
//! components `R(∂_k, ∂_l)∂_j = R^i_{jkl} ∂_i`. Sectional curvature is
//! `⟨R(e₁,e₂)e₂, e₁⟩`, so the round sphere has `R_{θφθφ} = sin²θ`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Jet, Layout};
use crate::localization::QuadratureSpec;
use crate::scenarios::ScenarioConfig;
use crate::symplectic::SymplecticData;
use crate::zeroset::FixedComponent;

/// Half-width of the band around singular loci excluded from random sampling.
pub const SINGULAR_BAND: f64 = 1e-3;
/// Distance below which a coordinate counts as lying on a singular locus.
pub const ON_LOCUS: f64 = 1e-12;
/// Step used to approach singular loci when evaluating limits.
/// Largest number of quadrature-grid points added to residual samples.
pub const RESIDUAL_GRID_CAP: usize = 256;
pub const LIMIT_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedLocus {
    pub axis: usize,
    pub value: f64,
    /// Axes whose coordinate degenerates on the locus (φ at a pole).
    pub collapses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub id: String,
    pub dim: usize,
    pub domain: Vec<(f64, f64)>,
    pub names: Vec<String>,
    pub periodic: Vec<bool>,
    pub excluded: Vec<ExcludedLocus>,
    pub orientation: f64,
}

impl Chart {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.names.len() != self.dim || self.domain.len() != self.dim || self.periodic.len() != self.dim {
            return Err(Error::ScenarioDefinition(format!(
                "chart '{}': dimension {} disagrees with coordinate names / domain",
                self.id, self.dim
            )));
        }
        if self.dim > crate::jet::MAX_VARS {
            return Err(Error::ScenarioDefinition(format!("chart dimension {} exceeds 4", self.dim)));
        }
        if self.domain.iter().any(|(a, b)| !(b > a)) {
            return Err(Error::ScenarioDefinition(format!("chart '{}': domain has zero volume", self.id)));
        }
        if self.orientation.abs() != 1.0 {
            return Err(Error::ScenarioDefinition("orientation sign must be ±1".into()));
        }
        for l in &self.excluded {
            if l.axis >= self.dim || l.collapses.iter().any(|&a| a >= self.dim) {
                return Err(Error::ScenarioDefinition("excluded locus refers to a missing axis".into()));
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.domain.iter().map(|(a, b)| b - a).product()
    }

    /// Wraps periodic coordinates into the fundamental domain.
    pub fn wrap(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .enumerate()
            .map(|(i, &x)| {
                if self.periodic[i] {
                    let (a, b) = self.domain[i];
                    let w = b - a;
                    a + (x - a).rem_euclid(w)
                } else {
                    x
                }
            })
            .collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim
            && p.iter().zip(&self.domain).enumerate().all(|(i, (&x, &(a, b)))| {
                self.periodic[i] || (x >= a - 1e-12 && x <= b + 1e-12)
            })
    }

    pub fn loci_at(&self, p: &[f64]) -> Vec<&ExcludedLocus> {
        self.excluded.iter().filter(|l| (p[l.axis] - l.value).abs() <= ON_LOCUS).collect()
    }

    pub fn check_regular(&self, p: &[f64]) -> Result<Vec<f64>> {
        if !self.contains(p) {
            return Err(Error::Domain { point: p.to_vec() });
        }
        if let Some(l) = self.loci_at(p).first() {
            return Err(Error::Singularity {
                point: p.to_vec(),
                locus: format!("{} = {}", self.names[l.axis], l.value),
            });
        }
        Ok(self.wrap(p))
    }

    /// Points and weights of a three-point Richardson stencil approaching a
    /// singular locus along its axis (`3 f(δ) − 5/2 f(2δ) + 1/2 f(4δ)`,
    /// exact for quadratics in the offset). `None` for regular points.
    pub fn limit_stencil(&self, p: &[f64]) -> Option<Vec<(Vec<f64>, f64)>> {
        let loci = self.loci_at(p);
        if loci.is_empty() {
            return None;
        }
        let mut dir = vec![0.0; self.dim];
        for l in loci {
            let (a, b) = self.domain[l.axis];
            dir[l.axis] = if (l.value - a).abs() <= (l.value - b).abs() { 1.0 } else { -1.0 };
        }
        let weights = [(1.0, 8.0 / 3.0), (2.0, -2.0), (4.0, 1.0 / 3.0)];
        Some(
            weights
                .iter()
                .map(|&(k, w)| {
                    let q: Vec<f64> = p.iter().zip(&dir).map(|(x, d)| x + k * LIMIT_STEP * d).collect();
                    (q, w)
                })
                .collect(),
        )
    }

    /// Deterministic uniform sample of the chart box avoiding the singular band.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let p: Vec<f64> = self.domain.iter().map(|&(a, b)| rng.gen_range(a..b)).collect();
            if self.excluded.iter().any(|l| (p[l.axis] - l.value).abs() < SINGULAR_BAND) {
                continue;
            }
            out.push(p);
        }
        out
    }

    /// Coordinate distance between two points, treating periodic axes as
    /// circles and ignoring axes that collapse on a shared singular locus.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut ignore = vec![false; self.dim];
        for l in &self.excluded {
            if (p[l.axis] - l.value).abs() < 1e-6 && (q[l.axis] - l.value).abs() < 1e-6 {
                for &c in &l.collapses {
                    ignore[c] = true;
                }
            }
        }
        (0..self.dim)
            .filter(|&i| !ignore[i])
            .map(|i| {
                let mut d = (p[i] - q[i]).abs();
                if self.periodic[i] {
                    let w = self.domain[i].1 - self.domain[i].0;
                    d = d.rem_euclid(w);
                    d = d.min(w - d);
                }
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Limit of a vector-valued function at `p` (Richardson on singular loci,
/// direct evaluation elsewhere).
pub fn limit_vec<F>(chart: &Chart, p: &[f64], f: F) -> Result<Vec<C64>>
where
    F: Fn(&[f64]) -> Result<Vec<C64>>,
{
    match chart.limit_stencil(p) {
        None => f(p),
        Some(stencil) => {
            let mut acc: Option<Vec<C64>> = None;
            for (q, w) in stencil {
                let v = f(&q)?;
                match &mut acc {
                    None => acc = Some(v.iter().map(|z| z * w).collect()),
                    Some(a) => a.iter_mut().zip(&v).for_each(|(x, y)| *x += y * w),
                }
            }
            Ok(acc.unwrap_or_default())
        }
    }
}

pub fn limit_scalar<F>(chart: &Chart, p: &[f64], f: F) -> Result<C64>
where
    F: Fn(&[f64]) -> Result<C64>,
{
    Ok(limit_vec(chart, p, |q| f(q).map(|z| vec![z]))?[0])
}

#[derive(Debug, Clone)]
pub struct MetricField {
    /// Row-major `dim × dim` coefficient expressions.
    pub components: Arc<Vec<Expr>>,
    pub dim: usize,
}

impl MetricField {
    pub fn new(dim: usize, components: Vec<Expr>) -> MetricField {
        assert_eq!(components.len(), dim * dim);
        MetricField { components: Arc::new(components), dim }
    }

    pub fn identity(dim: usize) -> MetricField {
        let comps = (0..dim * dim).map(|k| Expr::Const(if k / dim == k % dim { 1.0 } else { 0.0 })).collect();
        MetricField::new(dim, comps)
    }

    /// Metric coefficients on seeded coordinate jets, symmetrized.
    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        let n = self.dim;
        let layout = x[0].layout();
        let raw: Vec<Jet> = self.components.iter().map(|e| e.eval_jet(x, layout)).collect();
        let mut g = raw.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g[i * n + j] = (&raw[i * n + j] + &raw[j * n + i]).scale_re(0.5);
                }
            }
        }
        g
    }
}

#[derive(Debug, Clone)]
pub struct VectorField {
    pub label: String,
    pub components: Arc<Vec<Expr>>,
}

impl VectorField {
    pub fn new(label: impl Into<String>, components: Vec<Expr>) -> VectorField {
        VectorField { label: label.into(), components: Arc::new(components) }
    }

    pub fn zero(label: impl Into<String>, dim: usize) -> VectorField {
        VectorField::new(label, vec![Expr::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        let layout = x[0].layout();
        self.components.iter().map(|e| e.eval_jet(x, layout)).collect()
    }

    pub fn at(&self, p: &[f64]) -> Vec<f64> {
        self.components.iter().map(|e| e.eval_f64(p)).collect()
    }
}

/// Complex linear combination `Σ c_k V_k` of real vector fields.
#[derive(Debug, Clone)]
pub struct ComplexVectorField {
    pub terms: Vec<(C64, VectorField)>,
}

impl ComplexVectorField {
    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        let layout = x[0].layout();
        let mut out = vec![Jet::zero(layout); x.len()];
        for (c, v) in &self.terms {
            if v.is_zero() || (c.re == 0.0 && c.im == 0.0) {
                continue;
            }
            for (o, j) in out.iter_mut().zip(v.eval_jets(x)) {
                *o += &j.scale(*c);
            }
        }
        out
    }
}

impl From<VectorField> for ComplexVectorField {
    fn from(v: VectorField) -> Self {
        ComplexVectorField { terms: vec![(C64::new(1.0, 0.0), v)] }
    }
}

impl From<&VectorField> for ComplexVectorField {
    fn from(v: &VectorField) -> Self {
        v.clone().into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute tolerance for pointwise operator identities.
    pub identity: f64,
    /// Relative tolerance for integral identities.
    pub integral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-8, integral: 1e-6 }
    }
}

/// A compact oriented Riemannian manifold with a pair of Killing fields.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub chart: Chart,
    pub metric: MetricField,
    pub field_x: VectorField,
    pub field_y: VectorField,
    pub commuting: bool,
    pub compact: bool,
    pub fixed_components: Vec<FixedComponent>,
    pub quadrature: QuadratureSpec,
    pub symplectic: Option<SymplecticData>,
    pub euler_characteristic: Option<f64>,
    pub tolerances: Tolerances,
    pub config: ScenarioConfig,
}

/// Inverse of a symmetric jet matrix by Gauss–Jordan elimination.
pub fn invert_jets(m: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let layout = m[0].layout();
    let mut a: Vec<Jet> = m.to_vec();
    let mut inv: Vec<Jet> =
        (0..n * n).map(|k| Jet::real(layout, if k / n == k % n { 1.0 } else { 0.0 })).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].value().norm().total_cmp(&a[s * n + col].value().norm()))
            .unwrap();
        if a[piv * n + col].value().norm() < 1e-300 {
            return Err(Error::ScenarioDefinition("singular metric".into()));
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let r = a[col * n + col].recip();
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &r;
            inv[col * n + k] = &inv[col * n + k] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col].clone();
            if f.is_zero() {
                continue;
            }
            for k in 0..n {
                let t = &f * &a[col * n + k];
                a[row * n + k] -= &t;
                let t = &f * &inv[col * n + k];
                inv[row * n + k] -= &t;
            }
        }
    }
    Ok(inv)
}

/// Gram–Schmidt orthonormalization of the coordinate vectors in the order
/// `axes`; returns the frame vectors as coordinate component lists.
pub fn orthonormal_frame_jets(g: &[Jet], n: usize, axes: &[usize]) -> Vec<Vec<Jet>> {
    let layout = g[0].layout();
    let inner = |u: &[Jet], v: &[Jet]| {
        let mut s = Jet::zero(layout);
        for i in 0..n {
            for j in 0..n {
                if u[i].is_zero() || v[j].is_zero() {
                    continue;
                }
                s += &(&(&u[i] * &g[i * n + j]) * &v[j]);
            }
        }
        s
    };
    let mut frame: Vec<Vec<Jet>> = Vec::with_capacity(axes.len());
    for &a in axes {
        let mut v: Vec<Jet> = (0..n).map(|i| Jet::real(layout, if i == a { 1.0 } else { 0.0 })).collect();
        for u in &frame {
            let c = inner(&v, u);
            for i in 0..n {
                v[i] -= &(&c * &u[i]);
            }
        }
        let norm = inner(&v, &v).sqrt().recip();
        for vi in v.iter_mut() {
            *vi = &*vi * &norm;
        }
        frame.push(v);
    }
    frame
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    pub fn layout(&self, order: usize) -> &'static Layout {
        Layout::get(self.dim(), order)
    }

    pub fn metric_jets(&self, p: &[f64], order: usize) -> Vec<Jet> {
        let x = Jet::seed(p, order);
        self.metric.eval_jets(&x)
    }

    /// `Γ^k_{ij}` at `[k*n*n + i*n + j]`, as jets of the given order.
    pub fn christoffel_jets(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.dim();
        let g1 = self.metric_jets(p, order + 1);
        let dg: Vec<Vec<Jet>> = (0..n).map(|k| g1.iter().map(|c| c.partial(k).expect("order >= 1")).collect()).collect();
        let g: Vec<Jet> = g1.iter().map(|c| c.truncate(order)).collect();
        let ginv = invert_jets(&g, n)?;
        let layout = self.layout(order);
        let mut gamma = vec![Jet::zero(layout); n * n * n];
        // lowered symbols Γ_{lij} = ½(∂_i g_{lj} + ∂_j g_{li} − ∂_l g_{ij})
        let mut low = vec![Jet::zero(layout); n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let s = &(&dg[i][l * n + j] + &dg[j][l * n + i]) - &dg[l][i * n + j];
                    low[l * n * n + i * n + j] = s.scale_re(0.5);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Jet::zero(layout);
                    for l in 0..n {
                        if low[l * n * n + i * n + j].is_zero() || ginv[k * n + l].is_zero() {
                            continue;
                        }
                        acc += &(&ginv[k * n + l] * &low[l * n * n + i * n + j]);
                    }
                    gamma[k * n * n + i * n + j] = acc;
                }
            }
        }
        Ok(gamma)
    }

    /// `R^i_{jkl}` at `[((i*n + j)*n + k)*n + l]`.
    pub fn riemann_jets(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.dim();
        let gamma1 = self.christoffel_jets(p, order + 1)?;
        let dgamma: Vec<Vec<Jet>> =
            (0..n).map(|k| gamma1.iter().map(|c| c.partial(k).expect("order >= 1")).collect()).collect();
        let gamma: Vec<Jet> = gamma1.iter().map(|c| c.truncate(order)).collect();
        let layout = self.layout(order);
        let gi = |a: usize, b: usize, c: usize| a * n * n + b * n + c;
        let mut r = vec![Jet::zero(layout); n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        if k == l {
                            continue;
                        }
                        let mut acc = &dgamma[k][gi(i, l, j)] - &dgamma[l][gi(i, k, j)];
                        for m in 0..n {
                            acc += &(&gamma[gi(i, k, m)] * &gamma[gi(m, l, j)]);
                            acc -= &(&gamma[gi(i, l, m)] * &gamma[gi(m, k, j)]);
                        }
                        r[((i * n + j) * n + k) * n + l] = acc;
                    }
                }
            }
        }
        Ok(r)
    }

    /// `(∇V)^i_j = ∂_j V^i + Γ^i_{jk} V^k` at `[i*n + j]`.
    pub fn covariant_jacobian_jets(&self, v: &ComplexVectorField, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.dim();
        let x = Jet::seed(p, order + 1);
        let v1 = v.eval_jets(&x);
        let gamma = self.christoffel_jets(p, order)?;
        let vv: Vec<Jet> = v1.iter().map(|c| c.truncate(order)).collect();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = v1[i].partial(j).expect("order >= 1");
                for k in 0..n {
                    acc += &(&gamma[i * n * n + j * n + k] * &vv[k]);
                }
                out.push(acc);
            }
        }
        Ok(out)
    }

    /// Seeded sample for residual checks: `count` random interior points
    /// plus the base quadrature grid on compact scenarios.
    pub fn residual_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut pts = self.chart.sample(count, seed);
        if self.compact {
            pts.extend(self.quadrature.base_grid(&self.chart, RESIDUAL_GRID_CAP));
        }
        pts
    }
}

pub fn metric_at(s: &Scenario, p: &[f64]) -> Result<DMatrix<f64>> {
    let p = s.chart.check_regular(p)?;
    let n = s.dim();
    let g = s.metric_jets(&p, 0);
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (g[i * n + j].value().re + g[j * n + i].value().re));
    if m.clone().cholesky().is_none() {
        return Err(Error::ScenarioDefinition(format!("metric not positive definite at {p:?}")));
    }
    Ok(m)
}

/// Christoffel symbols `Γ^k_{ij}` at a regular point.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[k * self.n * self.n + i * self.n + j]
    }
}

pub fn christoffel_at(s: &Scenario, p: &[f64]) -> Result<Christoffel> {
    let p = s.chart.check_regular(p)?;
    let data = s.christoffel_jets(&p, 0)?.iter().map(|j| j.value().re).collect();
    Ok(Christoffel { n: s.dim(), data })
}

/// Riemann tensor `R^i_{jkl}` together with the metric for lowering.
#[derive(Debug, Clone)]
pub struct Riemann {
    pub n: usize,
    pub data: Vec<f64>,
    pub metric: DMatrix<f64>,
}

impl Riemann {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l]
    }

    /// `R_{ijkl} = g_{im} R^m_{jkl}`.
    pub fn lowered(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        (0..self.n).map(|m| self.metric[(i, m)] * self.get(m, j, k, l)).sum()
    }
}

pub fn riemann_at(s: &Scenario, p: &[f64]) -> Result<Riemann> {
    let metric = metric_at(s, p)?;
    let p = s.chart.wrap(p);
    let data = s.riemann_jets(&p, 0)?.iter().map(|j| j.value().re).collect();
    Ok(Riemann { n: s.dim(), data, metric })
}

/// `∇_dir V` at a regular point.
pub fn covariant_derivative(s: &Scenario, field: &VectorField, dir: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let p = s.chart.check_regular(p)?;
    let n = s.dim();
    if dir.len() != n {
        return Err(Error::Argument(format!("direction has {} components, chart has {n}", dir.len())));
    }
    let jac = s.covariant_jacobian_jets(&field.into(), &p, 0)?;
    Ok((0..n).map(|i| (0..n).map(|j| jac[i * n + j].value().re * dir[j]).sum()).collect())
}

/// Sup-norm of `L_V g` at `p`: `V^k ∂_k g_ij + g_kj ∂_i V^k + g_ik ∂_j V^k`.
pub fn killing_residual(s: &Scenario, field: &VectorField, p: &[f64]) -> f64 {
    let n = s.dim();
    let x = Jet::seed(p, 1);
    let g = s.metric.eval_jets(&x);
    let v = field.eval_jets(&x);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += v[k].value() * g[i * n + j].derivative(&unit(n, k)).unwrap();
                acc += g[k * n + j].value() * v[k].derivative(&unit(n, i)).unwrap();
                acc += g[i * n + k].value() * v[k].derivative(&unit(n, j)).unwrap();
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// Sup-norm of the commutator `[V, W]^i = V^j ∂_j W^i − W^j ∂_j V^i` at `p`.
pub fn commutator_residual(v: &VectorField, w: &VectorField, p: &[f64]) -> f64 {
    let n = p.len();
    let x = Jet::seed(p, 1);
    let vj = v.eval_jets(&x);
    let wj = w.eval_jets(&x);
    (0..n)
        .map(|i| {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += vj[j].value() * wj[i].derivative(&unit(n, j)).unwrap();
                acc -= wj[j].value() * vj[i].derivative(&unit(n, j)).unwrap();
            }
            acc.norm()
        })
        .fold(0.0, f64::max)
}

pub(crate) fn unit(n: usize, k: usize) -> Vec<u8> {
    let mut e = vec![0u8; n];
    e[k] = 1;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::builtin;
    use std::f64::consts::PI;

    #[test]
    fn flat_torus_metric_and_connection() {
        let s = builtin("torus2_translations").unwrap();
        let g = metric_at(&s, &[1.0, 2.0]).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2));
        let ch = christoffel_at(&s, &[1.0, 2.0]).unwrap();
        assert!(ch.data.iter().all(|&c| c == 0.0));
        let r = riemann_at(&s, &[0.3, 4.0]).unwrap();
        assert!(r.data.iter().all(|&c| c.abs() < 1e-12));
    }

    #[test]
    fn sphere_metric_values() {
        let s = builtin("sphere2_rotation").unwrap();
        let g = metric_at(&s, &[PI / 2.0, 1.0]).unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-15 && (g[(1, 1)] - 1.0).abs() < 1e-15);
        let g = metric_at(&s, &[PI / 4.0, 1.0]).unwrap();
        // sin²(π/4) = 0.5
        assert!((g[(1, 1)] - 0.5).abs() < 1e-15 && g[(0, 1)] == 0.0);
    }

    #[test]
    fn sphere_christoffel_and_curvature() {
        let s = builtin("sphere2_rotation").unwrap();
        for &th in &[0.3, 1.1, 2.5] {
            let ch = christoffel_at(&s, &[th, 0.7]).unwrap();
            assert!((ch.get(0, 1, 1) + th.sin() * th.cos()).abs() < 1e-14);
            assert!((ch.get(1, 0, 1) - th.cos() / th.sin()).abs() < 1e-13);
            let r = riemann_at(&s, &[th, 0.7]).unwrap();
            assert!((r.lowered(0, 1, 0, 1) - th.sin().powi(2)).abs() < 1e-13);
            assert!((r.lowered(0, 1, 1, 0) + th.sin().powi(2)).abs() < 1e-13);
        }
    }

    #[test]
    fn pole_is_singular_and_outside_is_domain_error() {
        let s = builtin("sphere2_rotation").unwrap();
        assert!(matches!(christoffel_at(&s, &[0.0, 1.0]), Err(Error::Singularity { .. })));
        assert!(matches!(metric_at(&s, &[4.0, 1.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn covariant_derivative_of_rotation_field() {
        // ∇_{∂θ} ∂φ = cotθ ∂φ ; ∇_{∂φ} ∂φ = −sinθ cosθ ∂θ
        let s = builtin("sphere2_rotation").unwrap();
        let th = PI / 4.0;
        let x = &s.field_x;
        let a = covariant_derivative(&s, x, &[1.0, 0.0], &[th, 0.2]).unwrap();
        assert!(a[0].abs() < 1e-15 && (a[1] - 1.0).abs() < 1e-14);
        let b = covariant_derivative(&s, x, &[0.0, 1.0], &[th, 0.2]).unwrap();
        assert!((b[0] + 0.5).abs() < 1e-14 && b[1].abs() < 1e-15);
    }

    #[test]
    fn limit_stencil_reproduces_quadratics() {
        let s = builtin("sphere2_rotation").unwrap();
        let v = limit_scalar(&s.chart, &[0.0, 0.3], |q| Ok(C64::new(2.0 + q[0] - 3.0 * q[0] * q[0], 0.0))).unwrap();
        assert!((v.re - 2.0).abs() < 1e-14);
        let v = limit_scalar(&s.chart, &[PI, 0.3], |q| Ok(C64::new(q[0].cos(), 0.0))).unwrap();
        assert!((v.re + 1.0).abs() < 1e-13);
    }

    #[test]
    fn distance_ignores_collapsed_axis_at_pole() {
        let s = builtin("sphere2_rotation").unwrap();
        assert!(s.chart.distance(&[1e-9, 0.1], &[0.0, 3.0]) < 1e-8);
        assert!((s.chart.distance(&[1.0, 0.1], &[1.0, 2.0 * PI - 0.1]) - 0.2).abs() < 1e-12);
    }
}
