//! Zero sets of `X − √−1 Y`, moment endomorphisms and Pfaffians.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::Coeff;
use crate::geometry::{limit_vec, orthonormal_frame_jets, ComplexVectorField, Scenario, VectorField};
use crate::jet::Jet;
use crate::equivariant::TwistPair;

/// Zero search acceptance threshold on `|X|² + |Y|²`.
pub const ZERO_TOL: f64 = 1e-14;
/// Chart-coordinate radius for merging Newton limits.
pub const CLUSTER_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComponentKind {
    Point,
    Submanifold,
}

/// One connected component `M₀` of the zero set.
///
/// The component is the coordinate slice `{x[a] = base_point[a], a ∈ normal_axes}`;
/// the remaining `tangent_axes` parametrize it over the chart box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedComponent {
    pub id: String,
    pub kind: ComponentKind,
    pub base_point: Vec<f64>,
    pub normal_axes: Vec<usize>,
    pub tangent_axes: Vec<usize>,
    /// Sign relating (normal frame, tangent coordinates) to the ambient orientation.
    pub orientation_sign: f64,
}

impl FixedComponent {
    pub fn new(id: impl Into<String>, base_point: Vec<f64>, normal_axes: Vec<usize>, chart_orientation: f64) -> FixedComponent {
        let n = base_point.len();
        let tangent_axes: Vec<usize> = (0..n).filter(|a| !normal_axes.contains(a)).collect();
        let kind = if tangent_axes.is_empty() { ComponentKind::Point } else { ComponentKind::Submanifold };
        let order: Vec<usize> = normal_axes.iter().chain(&tangent_axes).copied().collect();
        let orientation_sign = chart_orientation * permutation_sign(&order);
        FixedComponent { id: id.into(), kind, base_point, normal_axes, tangent_axes, orientation_sign }
    }

    pub fn codim(&self) -> usize {
        self.normal_axes.len()
    }

    /// The component point over tangent coordinates `t`.
    pub fn point_at(&self, t: &[f64]) -> Vec<f64> {
        let mut p = self.base_point.clone();
        for (k, &a) in self.tangent_axes.iter().enumerate() {
            p[a] = t[k];
        }
        p
    }

    /// Frame order used for moment matrices: tangent axes, then normal axes.
    pub fn frame_axes(&self) -> Vec<usize> {
        self.tangent_axes.iter().chain(&self.normal_axes).copied().collect()
    }
}

pub fn permutation_sign(order: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i] > order[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Complex skew-symmetric matrix stored by its strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewComplexMatrix {
    n: usize,
    upper: Vec<C64>,
}

impl SkewComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        SkewComplexMatrix { n, upper: vec![C64::new(0.0, 0.0); n * n.saturating_sub(1) / 2] }
    }

    /// Takes the strict upper triangle of `m`; the lower triangle is ignored.
    pub fn from_upper(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut s = SkewComplexMatrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                s.set(i, j, m[(i, j)]);
            }
        }
        s
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        // row-major strict upper triangle
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[self.idx(i, j)],
            std::cmp::Ordering::Greater => -self.upper[self.idx(j, i)],
            std::cmp::Ordering::Equal => C64::new(0.0, 0.0),
        }
    }

    /// Sets `A[i][j] = v` and `A[j][i] = −v`.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(i != j, "diagonal of a skew matrix is fixed at zero");
        if i < j {
            let k = self.idx(i, j);
            self.upper[k] = v;
        } else {
            let k = self.idx(j, i);
            self.upper[k] = -v;
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn pfaffian(&self) -> Result<C64> {
        pfaffian_with(self.n, |i, j| self.get(i, j), C64::new(1.0, 0.0))
    }
}

pub fn pfaffian(a: &SkewComplexMatrix) -> Result<C64> {
    a.pfaffian()
}

/// Pfaffian over any coefficient ring by expansion along the first row:
/// `Pf(A) = Σ_j (−1)^{j+1} a_{0j} Pf(A without rows/cols 0, j)`.
/// `entry(i, j)` is only queried for `i < j`.
pub fn pfaffian_with<T: Coeff>(n: usize, entry: impl Fn(usize, usize) -> T, one: T) -> Result<T> {
    if n % 2 == 1 {
        return Err(Error::Argument(format!("Pfaffian of odd-dimensional ({n}×{n}) matrix")));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(pf_rec(&idx, &entry, &one))
}

fn pf_rec<T: Coeff>(idx: &[usize], entry: &impl Fn(usize, usize) -> T, one: &T) -> T {
    if idx.is_empty() {
        return one.clone();
    }
    if idx.len() == 2 {
        return entry(idx[0], idx[1]);
    }
    let mut acc = one.zero_like();
    for j in 1..idx.len() {
        let a = entry(idx[0], idx[j]);
        if a.is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().enumerate().filter(|&(k, _)| k + 1 != j).map(|(_, &v)| v).collect();
        let term = a * pf_rec(&rest, entry, one);
        acc = if j % 2 == 1 { acc + term } else { acc - term };
    }
    acc
}

/// `|X|² + |Y|²` as a jet (order taken from the seed).
fn zero_objective(s: &Scenario, pair: &TwistPair, x: &[Jet]) -> Jet {
    let n = s.dim();
    let g = s.metric.eval_jets(x);
    let mut f = Jet::zero(x[0].layout());
    for v in [&pair.x, &pair.y] {
        if v.is_zero() {
            continue;
        }
        let vj = v.eval_jets(x);
        for i in 0..n {
            for j in 0..n {
                f += &(&(&vj[i] * &g[i * n + j]) * &vj[j]);
            }
        }
    }
    f
}

fn objective_value(s: &Scenario, pair: &TwistPair, p: &[f64]) -> f64 {
    zero_objective(s, pair, &Jet::seed(p, 0)).value().re
}

fn seeds_per_axis(dim: usize) -> usize {
    match dim {
        0..=2 => 32,
        3 => 16,
        _ => 8,
    }
}

fn clamp_into(s: &Scenario, p: &mut [f64]) {
    for (i, x) in p.iter_mut().enumerate() {
        if !s.chart.periodic[i] {
            let (a, b) = s.chart.domain[i];
            *x = x.clamp(a, b);
        }
    }
    let w = s.chart.wrap(p);
    p.copy_from_slice(&w);
}

/// Levenberg–Marquardt descent on `|X|² + |Y|²`; returns the limit point if
/// the objective drops below [`ZERO_TOL`].
fn descend(s: &Scenario, pair: &TwistPair, start: &[f64]) -> Option<Vec<f64>> {
    let n = s.dim();
    let mut p = start.to_vec();
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let f = zero_objective(s, pair, &Jet::seed(&p, 2));
        let fv = f.value().re;
        if !fv.is_finite() {
            return None;
        }
        if fv < ZERO_TOL {
            return Some(p);
        }
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut a = vec![0u8; n];
            a[i] = 1;
            grad[i] = f.derivative(&a).unwrap().re;
            for j in 0..n {
                let mut b = vec![0u8; n];
                b[i] += 1;
                b[j] += 1;
                hess[(i, j)] = f.derivative(&b).unwrap().re;
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut m = hess.clone();
            for i in 0..n {
                m[(i, i)] += lambda * (1.0 + hess[(i, i)].abs());
            }
            let Some(step) = m.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let mut q: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            clamp_into(s, &mut q);
            let fq = objective_value(s, pair, &q);
            if fq.is_finite() && fq < fv {
                p = q;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (objective_value(s, pair, &p) < ZERO_TOL).then_some(p)
}

fn on_component(s: &Scenario, c: &FixedComponent, p: &[f64]) -> bool {
    let mut q = c.base_point.clone();
    for &a in &c.tangent_axes {
        q[a] = p[a];
    }
    s.chart.distance(p, &q) < CLUSTER_RADIUS
}

/// Numerically located zeros of `X − √−1 Y` (grid seeds refined by damped
/// Newton), cross-checked against the scenario declarations. Returns the
/// declared components.
pub fn find_zero_components(s: &Scenario, pair: &TwistPair) -> Result<Vec<FixedComponent>> {
    let n = s.dim();
    let k = seeds_per_axis(n);
    let total = k.pow(n as u32);
    let seeds: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|ax| {
                    let i = idx % k;
                    idx /= k;
                    let (a, b) = s.chart.domain[ax];
                    a + (i as f64 + 0.5) * (b - a) / k as f64
                })
                .collect()
        })
        .collect();
    let found: Vec<Vec<f64>> = seeds.par_iter().filter_map(|p| descend(s, pair, p)).collect();

    for c in &s.fixed_components {
        let f = objective_value(s, pair, &c.base_point);
        if !(f < ZERO_TOL) {
            return Err(Error::ScenarioInconsistency(format!(
                "declared component {} is not a zero: |X|²+|Y|² = {f:e} at {:?}",
                c.id, c.base_point
            )));
        }
        if !found.iter().any(|p| on_component(s, c, p)) {
            return Err(Error::ScenarioInconsistency(format!("declared component {} was not found by the zero search", c.id)));
        }
    }
    let mut stray: Vec<Vec<f64>> = Vec::new();
    for p in &found {
        if s.fixed_components.iter().any(|c| on_component(s, c, p)) {
            continue;
        }
        if !stray.iter().any(|q| s.chart.distance(p, q) < CLUSTER_RADIUS) {
            stray.push(p.clone());
        }
    }
    if !stray.is_empty() {
        stray.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        return Err(Error::ScenarioInconsistency(format!(
            "zero search found {} undeclared zero(s), first at {:?}",
            stray.len(),
            stray[0]
        )));
    }
    Ok(s.fixed_components.clone())
}

/// Whether `⟨X,Y⟩ = 0` and `|X| = |Y|` hold at `p` to within `tol`.
pub fn jacobowitz_membership(s: &Scenario, pair: &TwistPair, p: &[f64], tol: f64) -> bool {
    let n = s.dim();
    let x = Jet::seed(p, 0);
    let g = s.metric.eval_jets(&x);
    let xv = pair.x.eval_jets(&x);
    let yv = pair.y.eval_jets(&x);
    let ip = |a: &[Jet], b: &[Jet]| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (a[i].value() * g[i * n + j].value() * b[j].value()).re;
            }
        }
        acc
    };
    let xy = ip(&xv, &yv);
    let nx = ip(&xv, &xv).max(0.0).sqrt();
    let ny = ip(&yv, &yv).max(0.0).sqrt();
    xy.abs() <= tol && (nx - ny).abs() <= tol
}

/// Matrix `μ_ab = −⟨e_a, ∇_{e_b} V⟩` in the Gram–Schmidt frame built from
/// the coordinate axes in `axes` order, as jets of the given order.
pub fn moment_jets(s: &Scenario, v: &ComplexVectorField, p: &[f64], order: usize, axes: &[usize]) -> Result<Vec<Jet>> {
    let n = s.dim();
    let jac = s.covariant_jacobian_jets(v, p, order)?;
    let g = s.metric_jets(p, order);
    let frame = orthonormal_frame_jets(&g, n, axes);
    let layout = s.layout(order);
    // lowered: (∇V)_{ik} = g_ij (∇V)^j_k
    let mut low = vec![Jet::zero(layout); n * n];
    for i in 0..n {
        for k in 0..n {
            let mut acc = Jet::zero(layout);
            for j in 0..n {
                acc += &(&g[i * n + j] * &jac[j * n + k]);
            }
            low[i * n + k] = acc;
        }
    }
    let m = axes.len();
    let mut out = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let mut acc = Jet::zero(layout);
            for i in 0..n {
                if frame[a][i].is_zero() {
                    continue;
                }
                for k in 0..n {
                    if frame[b][k].is_zero() {
                        continue;
                    }
                    acc += &(&(&frame[a][i] * &low[i * n + k]) * &frame[b][k]);
                }
            }
            out.push(-acc);
        }
    }
    Ok(out)
}

/// The moment endomorphism `v ↦ −∇_v V` in the orthonormal frame obtained
/// from the coordinate axes by Gram–Schmidt.
pub fn moment_endomorphism(s: &Scenario, v: &VectorField, p: &[f64]) -> Result<DMatrix<f64>> {
    let p = s.chart.check_regular(p)?;
    let n = s.dim();
    let axes: Vec<usize> = (0..n).collect();
    let m = moment_jets(s, &v.into(), &p, 0, &axes)?;
    Ok(DMatrix::from_fn(n, n, |a, b| m[a * n + b].value().re))
}

/// Moment matrices of `X` and `Y` at a component point, split into the
/// normal block (what enters the localization denominator) and the
/// diagnostics that block structure requires.
#[derive(Debug, Clone)]
pub struct NormalMoments {
    pub mu_x: DMatrix<f64>,
    pub mu_y: DMatrix<f64>,
    /// Largest entry of the columns belonging to tangent directions.
    pub tangential_residual: f64,
    pub skew_residual: f64,
    pub commutation_residual: f64,
}

/// Full frame moment matrix of a real field at `p`, with poles handled by
/// the chart limit.
fn frame_moment(s: &Scenario, v: &VectorField, p: &[f64], axes: &[usize]) -> Result<DMatrix<f64>> {
    let m = axes.len();
    let cv: ComplexVectorField = v.into();
    let flat = limit_vec(&s.chart, p, |q| {
        Ok(moment_jets(s, &cv, q, 0, axes)?.iter().map(|j| j.value()).collect())
    })?;
    Ok(DMatrix::from_fn(m, m, |a, b| flat[a * m + b].re))
}

pub fn normal_moments_at(s: &Scenario, pair: &TwistPair, c: &FixedComponent, p: &[f64]) -> Result<NormalMoments> {
    let axes = c.frame_axes();
    let kt = c.tangent_axes.len();
    let kn = c.codim();
    let fx = frame_moment(s, &pair.x, p, &axes)?;
    let fy = frame_moment(s, &pair.y, p, &axes)?;
    let mut tangential: f64 = 0.0;
    let mut skew: f64 = 0.0;
    for f in [&fx, &fy] {
        for a in 0..axes.len() {
            for b in 0..kt {
                tangential = tangential.max(f[(a, b)].abs()).max(f[(b, a)].abs());
            }
        }
        skew = skew.max((f + f.transpose()).amax());
    }
    let mu_x = fx.view((kt, kt), (kn, kn)).into_owned();
    let mu_y = fy.view((kt, kt), (kn, kn)).into_owned();
    let commutation_residual = (&mu_x * &mu_y - &mu_y * &mu_x).amax();
    Ok(NormalMoments { mu_x, mu_y, tangential_residual: tangential, skew_residual: skew, commutation_residual })
}

/// `μ^𝒩(X), μ^𝒩(Y)` at the component's base point, with block-structure checks.
pub fn normal_restriction(c: &FixedComponent, s: &Scenario, pair: &TwistPair) -> Result<NormalMoments> {
    let nm = normal_moments_at(s, pair, c, &c.base_point)?;
    let tol = 1e-8;
    if nm.skew_residual > tol {
        return Err(Error::Frame(format!("moment matrix of {} not skew (residual {:e})", c.id, nm.skew_residual)));
    }
    if nm.tangential_residual > tol {
        return Err(Error::Frame(format!(
            "moment matrix of {} does not annihilate the tangent space (residual {:e})",
            c.id, nm.tangential_residual
        )));
    }
    if pair.commuting && nm.commutation_residual > tol {
        return Err(Error::Frame(format!(
            "normal moments of {} do not commute (residual {:e})",
            c.id, nm.commutation_residual
        )));
    }
    Ok(nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::builtin;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pfaffian_small_cases() {
        let mut a = SkewComplexMatrix::zeros(2);
        a.set(0, 1, c(3.0, -1.0));
        assert_eq!(a.pfaffian().unwrap(), c(3.0, -1.0));
        let mut b = SkewComplexMatrix::zeros(4);
        b.set(0, 1, c(2.0, 0.0));
        b.set(2, 3, c(0.0, 5.0));
        assert_eq!(b.pfaffian().unwrap(), c(0.0, 10.0));
        assert!(matches!(SkewComplexMatrix::zeros(3).pfaffian(), Err(Error::Argument(_))));
        assert_eq!(SkewComplexMatrix::zeros(0).pfaffian().unwrap(), c(1.0, 0.0));
        assert_eq!(SkewComplexMatrix::zeros(4).pfaffian().unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn skew_storage_is_exact() {
        let mut a = SkewComplexMatrix::zeros(4);
        a.set(3, 1, c(1.5, 2.0));
        assert_eq!(a.get(1, 3), c(-1.5, -2.0));
        let d = a.to_dense();
        assert_eq!(&d + d.transpose(), DMatrix::zeros(4, 4));
    }

    #[test]
    fn permutation_signs() {
        assert_eq!(permutation_sign(&[0, 1, 2, 3]), 1.0);
        assert_eq!(permutation_sign(&[2, 3, 0, 1]), 1.0);
        assert_eq!(permutation_sign(&[1, 0]), -1.0);
    }

    #[test]
    fn sphere_zero_search_finds_poles() {
        let s = builtin("sphere2_two_rotations").unwrap();
        let comps = find_zero_components(&s, &TwistPair::of(&s)).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.kind == ComponentKind::Point));
    }

    #[test]
    fn torus_has_no_zeros() {
        let s = builtin("torus2_translations").unwrap();
        assert!(find_zero_components(&s, &TwistPair::of(&s)).unwrap().is_empty());
    }

    #[test]
    fn undeclared_zero_is_inconsistent() {
        let mut s = builtin("sphere2_rotation").unwrap();
        s.fixed_components.pop();
        assert!(matches!(find_zero_components(&s, &TwistPair::of(&s)), Err(Error::ScenarioInconsistency(_))));
    }

    #[test]
    fn rotation_moment_at_poles() {
        let s = builtin("sphere2_rotation").unwrap();
        let pair = TwistPair::of(&s);
        let north = normal_restriction(&s.fixed_components[0], &s, &pair).unwrap();
        let south = normal_restriction(&s.fixed_components[1], &s, &pair).unwrap();
        assert!((north.mu_x[(0, 1)] - 1.0).abs() < 1e-9 && (north.mu_x[(1, 0)] + 1.0).abs() < 1e-9);
        assert!((south.mu_x[(0, 1)] + 1.0).abs() < 1e-9);
        assert!(north.mu_y.amax() == 0.0);
    }

    #[test]
    fn moment_is_skew_for_killing_fields() {
        let s = builtin("sphere2_rotation").unwrap();
        for p in s.chart.sample(20, 9) {
            let m = moment_endomorphism(&s, &s.field_x, &p).unwrap();
            assert!((&m + m.transpose()).amax() < 1e-12);
        }
        assert!(moment_endomorphism(&s, &s.field_x, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn jacobowitz_set_membership() {
        let plane = builtin("plane_cr").unwrap();
        assert!(jacobowitz_membership(&plane, &TwistPair::of(&plane), &[0.3, -1.0], 1e-12));
        let s = builtin("sphere2_two_rotations").unwrap();
        assert!(!jacobowitz_membership(&s, &TwistPair::of(&s), &[PI / 2.0, 0.0], 1e-8));
        assert!(jacobowitz_membership(&s, &TwistPair::of(&s), &[0.0, 0.0], 1e-8));
    }
}
