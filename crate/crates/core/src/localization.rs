//! Integration of forms and both sides of the fixed-point localization
//! formula.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::FormField;
use crate::equivariant::{closedness_residual, special_closed_form, GeneratorKind, TwistPair, RESIDUAL_SAMPLES};
use crate::error::{Error, Result};
use crate::form::{FormValue, GradedForm};
use crate::geometry::{limit_scalar, orthonormal_frame_jets, Chart, Scenario};
use crate::zeroset::{find_zero_components, normal_moments_at, pfaffian_with, ComponentKind, FixedComponent};

/// Relative size below which a Pfaffian counts as vanishing.
pub const DEGENERATE_PF: f64 = 1e-12;
/// Largest node count over all axes of one tensor grid.
pub const MAX_TOTAL_NODES: usize = 1 << 24;
/// Residual points used by closedness preconditions.
const CLOSEDNESS_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Starting Gauss–Legendre node count per chart axis.
    pub nodes: Vec<usize>,
    /// Per-axis cap on refinement.
    #[serde(default = "default_max_nodes")]
    pub max_nodes: usize,
    /// Relative change between successive refinements that ends doubling.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_max_nodes() -> usize {
    512
}

fn default_rel_tol() -> f64 {
    1e-9
}

impl QuadratureSpec {
    pub fn new(nodes: Vec<usize>) -> QuadratureSpec {
        QuadratureSpec { nodes, max_nodes: default_max_nodes(), rel_tol: default_rel_tol() }
    }

    /// Base Gauss–Legendre grid, coarsened if needed to at most 4096 points.
    /// The base tensor grid, coarsened until it has at most `cap` points.
    pub fn base_grid(&self, chart: &Chart, cap: usize) -> Vec<Vec<f64>> {
        let mut counts = self.nodes.clone();
        while counts.iter().product::<usize>() > cap.max(1) {
            let i = (0..counts.len()).max_by_key(|&i| counts[i]).unwrap();
            counts[i] = (counts[i] / 2).max(1);
        }
        let rules: Vec<Arc<Rule>> = counts.iter().map(|&n| gauss_legendre(n)).collect();
        tensor_nodes(&chart.domain, &rules).into_iter().map(|(p, _)| p).collect()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn tensor_nodes(domain: &[(f64, f64)], rules: &[Arc<Rule>]) -> Vec<(Vec<f64>, f64)> {
    let dim = domain.len();
    let total: usize = rules.iter().map(|r| r.nodes.len()).product();
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut p = vec![0.0; dim];
        let mut w = 1.0;
        // last axis varies fastest
        for ax in (0..dim).rev() {
            let r = &rules[ax];
            let k = idx % r.nodes.len();
            idx /= r.nodes.len();
            let (a, b) = domain[ax];
            let h = 0.5 * (b - a);
            p[ax] = a + h * (r.nodes[k] + 1.0);
            w *= h * r.weights[k];
        }
        out.push((p, w));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: C64,
    /// `|I(2n) − I(n)|` at the accepted refinement level.
    pub error_estimate: f64,
    pub nodes_per_axis_max: usize,
}

/// Tensor-product Gauss–Legendre integral of `f` over `domain`.
///
/// Each axis is compared against the rule with that axis halved. Gauss rules
/// on analytic integrands converge geometrically, so a change `Δ` between
/// `N/2` and `N` nodes bounds the error at `N` by roughly `Δ²/‖f‖₁`; axes
/// whose estimate is not negligible are doubled until the sum meets
/// `rel_tol`.
pub fn integrate_box<F>(domain: &[(f64, f64)], spec: &QuadratureSpec, f: F) -> Result<Integral>
where
    F: Fn(&[f64]) -> Result<C64> + Sync,
{
    if domain.is_empty() {
        return Ok(Integral { value: f(&[])?, error_estimate: 0.0, nodes_per_axis_max: 0 });
    }
    let mut cache: HashMap<Vec<usize>, (C64, f64)> = HashMap::new();
    let mut eval = |counts: &[usize]| -> Result<(C64, f64)> {
        if let Some(v) = cache.get(counts) {
            return Ok(*v);
        }
        let rules: Vec<Arc<Rule>> = counts.iter().map(|&n| gauss_legendre(n)).collect();
        let nodes = tensor_nodes(domain, &rules);
        let vals: Vec<Result<C64>> = nodes.par_iter().map(|(p, w)| f(p).map(|v| v * *w)).collect();
        let mut sum = C64::new(0.0, 0.0);
        let mut mass = 0.0;
        for v in vals {
            let v = v?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Integration("non-finite integrand value".into()));
            }
            sum += v;
            mass += v.norm();
        }
        cache.insert(counts.to_vec(), (sum, mass));
        Ok((sum, mass))
    };
    let dim = domain.len();
    // at least two nodes per axis so every axis has a coarser comparison rule
    let mut counts: Vec<usize> = spec.nodes.iter().map(|&n| n.max(2)).collect();
    let mut last_total = f64::INFINITY;
    let mut growth = 0;
    loop {
        if counts.iter().any(|&n| n > spec.max_nodes) || counts.iter().product::<usize>() > MAX_TOTAL_NODES {
            return Err(Error::Integration(format!(
                "no convergence within node cap (last change {last_total:e} at {counts:?} nodes)"
            )));
        }
        let (value, mass) = eval(&counts)?;
        let mut deltas = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut c = counts.clone();
            c[k] = c[k].div_ceil(2);
            let delta = (eval(&c)?.0 - value).norm();
            deltas.push(delta * (delta / mass.max(f64::MIN_POSITIVE)).min(1.0));
        }
        let total: f64 = deltas.iter().sum();
        let scale = value.norm().max(mass);
        if total <= spec.rel_tol * scale {
            return Ok(Integral { value, error_estimate: total, nodes_per_axis_max: *counts.iter().max().unwrap() });
        }
        if total > last_total {
            growth += 1;
            if growth >= 3 {
                return Err(Error::Integration(format!("refinement diverges (change {total:e})")));
            }
        }
        last_total = total;
        let threshold = spec.rel_tol * scale / dim as f64;
        for k in 0..dim {
            if deltas[k] > threshold {
                counts[k] *= 2;
            }
        }
    }
}

fn require_compact(s: &Scenario) -> Result<()> {
    if s.compact {
        Ok(())
    } else {
        Err(Error::precondition(format!("scenario {} is not compact; integrals are undefined", s.name)))
    }
}

/// Integral over a compact scenario of a scalar density `q ↦ top coefficient`.
fn integrate_top<F>(s: &Scenario, top: F) -> Result<Integral>
where
    F: Fn(&[f64]) -> Result<C64> + Sync,
{
    require_compact(s)?;
    let o = s.chart.orientation;
    let mut r = integrate_box(&s.chart.domain, &s.quadrature, |p| Ok(top(p)? * o))?;
    r.error_estimate = r.error_estimate.abs();
    Ok(r)
}

/// `∫_M form`: the top-degree coefficient against the chart volume element.
pub fn integrate(s: &Scenario, form: &FormField) -> Result<Integral> {
    integrate_top(s, |p| Ok(*form.value(p)?.top()))
}

fn check_closed(s: &Scenario, pair: &TwistPair, eta: &FormField) -> Result<()> {
    let pts = s.residual_points(RESIDUAL_SAMPLES, CLOSEDNESS_SEED);
    let r = closedness_residual(pair, eta, &pts)?;
    if r > s.tolerances.identity {
        return Err(Error::precondition_with(format!("form is not twisted-closed (residual {r:e})"), r));
    }
    Ok(())
}

/// `∫_M exp(−s·d_{X+√−1Y}β_kind) ∧ η`.
pub fn s_deformation_integral(
    sc: &Scenario,
    pair: &TwistPair,
    eta: &FormField,
    kind: GeneratorKind,
    s: f64,
) -> Result<Integral> {
    composed_deformation_integral(sc, pair, eta, &[(kind, s)])
}

/// `∫_M exp(−s₁ dβ₁) ∧ … ∧ exp(−s_k dβ_k) ∧ η`, the integrand assembled
/// pointwise inside one quadrature pass.
pub fn composed_deformation_integral(
    sc: &Scenario,
    pair: &TwistPair,
    eta: &FormField,
    steps: &[(GeneratorKind, f64)],
) -> Result<Integral> {
    require_compact(sc)?;
    if steps.iter().any(|&(_, s)| !(s >= 0.0)) {
        return Err(Error::Argument("deformation parameters must be non-negative".into()));
    }
    check_closed(sc, pair, eta)?;
    let gens: Vec<(FormField, f64)> = steps
        .iter()
        .map(|&(k, s)| Ok((special_closed_form(sc, pair, k)?.d_beta, s)))
        .collect::<Result<_>>()?;
    integrate_top(sc, |p| Ok(*deformed_value(&gens, eta, p)?.top()))
}

fn deformed_value(gens: &[(FormField, f64)], eta: &FormField, p: &[f64]) -> Result<FormValue> {
    let mut acc = eta.value(p)?;
    for (db, s) in gens {
        if *s == 0.0 {
            continue;
        }
        let e = db.value(p)?.scale(C64::new(-s, 0.0)).exp();
        acc = e.wedge(&acc);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayPoint {
    pub s: f64,
    /// `∫ exp(−s dβ) ∧ η`.
    pub value: C64,
    /// Largest coefficient of the deformed integrand over the quadrature grid.
    pub magnitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub kind: GeneratorKind,
    pub integral: C64,
    pub points: Vec<DecayPoint>,
    /// Least-squares slope of `ln magnitude` against `s`.
    pub rate: f64,
    pub r_squared: f64,
}

impl DecayProfile {
    pub fn strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].magnitude < w[0].magnitude)
    }
}

/// Deformation profile on a scenario whose zero set is empty.
pub fn decay_profile(sc: &Scenario, pair: &TwistPair, eta: &FormField, s_grid: &[f64]) -> Result<DecayProfile> {
    require_compact(sc)?;
    let comps = find_zero_components(sc, pair)?;
    if !comps.is_empty() {
        return Err(Error::precondition(format!("zero set is not empty ({} components)", comps.len())));
    }
    if !pair.commuting {
        return Err(Error::precondition("decay deformation uses X'-iY', which needs commuting fields"));
    }
    let kind = GeneratorKind::XminusIY;
    check_closed(sc, pair, eta)?;
    let integral = integrate(sc, eta)?.value;
    let db = special_closed_form(sc, pair, kind)?.d_beta;
    let grid = sc.quadrature.base_grid(&sc.chart, 4096);
    let mut points = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let value = s_deformation_integral(sc, pair, eta, kind, s)?.value;
        let gens = [(db.clone(), s)];
        let mags: Vec<Result<f64>> = grid.par_iter().map(|p| Ok(deformed_value(&gens, eta, p)?.max_abs())).collect();
        let mut magnitude = 0.0f64;
        for m in mags {
            magnitude = magnitude.max(m?);
        }
        points.push(DecayPoint { s, value, magnitude });
    }
    let (rate, r_squared) = log_linear_fit(&points);
    Ok(DecayProfile { kind, integral, points, rate, r_squared })
}

fn log_linear_fit(points: &[DecayPoint]) -> (f64, f64) {
    let xs: Vec<f64> = points.iter().map(|p| p.s).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.magnitude.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (0.0, 0.0);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentContribution {
    pub id: String,
    pub value: C64,
    /// Pfaffian of `(−μ^𝒩(X) − √−1 μ^𝒩(Y))/2π` at the base point.
    pub pfaffian: C64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationRhs {
    pub total: C64,
    pub per_component: Vec<ComponentContribution>,
}

/// Degree-zero block `(−μ^𝒩(X) − √−1 μ^𝒩(Y))/2π`.
fn denominator_matrix(mu_x: &DMatrix<f64>, mu_y: &DMatrix<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(mu_x.nrows(), mu_x.ncols(), |a, b| C64::new(-mu_x[(a, b)], -mu_y[(a, b)]) / (2.0 * PI))
}

/// Pulled-back integrand of a positive-dimensional component at a regular
/// point `q` near it: `[ι*η ∧ Pf((−μ − √−1μ + R^𝒩)/2π)^{-1}]_top`.
fn submanifold_density(s: &Scenario, pair: &TwistPair, c: &FixedComponent, eta: &FormField, q: &[f64]) -> Result<C64> {
    let n = s.dim();
    let kt = c.tangent_axes.len();
    let kn = c.codim();
    let axes = c.frame_axes();
    let cx = (&pair.x).into();
    let cy = (&pair.y).into();
    let mx = crate::zeroset::moment_jets(s, &cx, q, 0, &axes)?;
    let my = crate::zeroset::moment_jets(s, &cy, q, 0, &axes)?;
    let g = s.metric_jets(q, 0);
    let frame = orthonormal_frame_jets(&g, n, &axes);
    let riem = s.riemann_jets(q, 0)?;
    // R^𝒩_ab(∂_u, ∂_v) = ⟨e_a, R(∂_u, ∂_v) e_b⟩, tangent coordinates u < v
    let entry = |a: usize, b: usize| -> GradedForm<C64> {
        let (fa, fb) = (a + kt, b + kt);
        let mut form = FormValue::real_zero(kt);
        let m0 = C64::new(-mx[fa * n + fb].value().re, -my[fa * n + fb].value().re);
        form.set(0, m0);
        for u in 0..kt {
            for v in u + 1..kt {
                let (ku, kv) = (c.tangent_axes[u], c.tangent_axes[v]);
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let ea = frame[fa][i].value().re;
                        if ea == 0.0 {
                            continue;
                        }
                        for m in 0..n {
                            let eb = frame[fb][m].value().re;
                            if eb == 0.0 {
                                continue;
                            }
                            acc += ea * g[i * n + j].value().re * riem[((j * n + m) * n + ku) * n + kv].value().re * eb;
                        }
                    }
                }
                form.set((1 << u) | (1 << v), C64::new(acc, 0.0));
            }
        }
        form.scale(C64::new(1.0 / (2.0 * PI), 0.0))
    };
    let one = FormValue::scalar(kt, C64::new(1.0, 0.0));
    let pf = pfaffian_with(kn, entry, one)?;
    let eta_restricted = eta.value(q)?.restrict_to_axes(&c.tangent_axes);
    Ok(*eta_restricted.wedge(&pf.inverse()).top())
}

pub fn localization_rhs(s: &Scenario, pair: &TwistPair, comps: &[FixedComponent], eta: &FormField) -> Result<LocalizationRhs> {
    if !pair.commuting {
        return Err(Error::precondition("localization requires [X,Y] = 0"));
    }
    if comps.is_empty() {
        return Err(Error::precondition("zero set is empty"));
    }
    let mut per_component = Vec::with_capacity(comps.len());
    let mut total = C64::new(0.0, 0.0);
    for c in comps {
        let nm = normal_moments_at(s, pair, c, &c.base_point)?;
        let a = denominator_matrix(&nm.mu_x, &nm.mu_y);
        let kn = c.codim();
        let pf = pfaffian_with(kn, |i, j| a[(i, j)], C64::new(1.0, 0.0))?;
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0).powi(kn as i32 / 2);
        if pf.norm() <= DEGENERATE_PF * scale {
            return Err(Error::DegenerateComponent { id: c.id.clone(), modulus: pf.norm() });
        }
        let value = match c.kind {
            ComponentKind::Point => {
                let eta0 = limit_scalar(&s.chart, &c.base_point, |q| Ok(*eta.value(q)?.degree0()))?;
                eta0 / pf * c.orientation_sign
            }
            ComponentKind::Submanifold => {
                let domain: Vec<(f64, f64)> = c.tangent_axes.iter().map(|&a| s.chart.domain[a]).collect();
                let spec = QuadratureSpec {
                    nodes: c.tangent_axes.iter().map(|&a| s.quadrature.nodes[a]).collect(),
                    ..s.quadrature.clone()
                };
                let r = integrate_box(&domain, &spec, |t| {
                    let p = c.point_at(t);
                    limit_scalar(&s.chart, &p, |q| submanifold_density(s, pair, c, eta, q))
                })?;
                r.value * c.orientation_sign
            }
        };
        total += value;
        per_component.push(ComponentContribution { id: c.id.clone(), value, pfaffian: pf });
    }
    Ok(LocalizationRhs { total, per_component })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportParameters {
    pub s: Option<f64>,
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    pub base_nodes: Vec<usize>,
    pub lhs_nodes_per_axis: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub lhs: C64,
    pub rhs: C64,
    pub per_component: Vec<ComponentContribution>,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub quadrature_error_estimate: f64,
    pub parameters: ReportParameters,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl LocalizationReport {
    pub fn new(s: &Scenario, lhs: Integral, rhs: LocalizationRhs, notes: Vec<String>) -> LocalizationReport {
        let abs_residual = (lhs.value - rhs.total).norm();
        let rel_residual = abs_residual / lhs.value.norm().max(1e-30);
        let rel_tolerance = s.tolerances.integral;
        let abs_tolerance = s.tolerances.identity;
        LocalizationReport {
            lhs: lhs.value,
            rhs: rhs.total,
            per_component: rhs.per_component,
            abs_residual,
            rel_residual,
            quadrature_error_estimate: lhs.error_estimate,
            parameters: ReportParameters {
                s: None,
                rel_tolerance,
                abs_tolerance,
                base_nodes: s.quadrature.nodes.clone(),
                lhs_nodes_per_axis: lhs.nodes_per_axis_max,
            },
            notes,
            passed: rel_residual < rel_tolerance || abs_residual < abs_tolerance,
        }
    }
}

/// Both sides of `∫_M η = Σ_{M₀} ∫_{M₀} η / Pf[(−μ^𝒩(X) − √−1μ^𝒩(Y) + R^𝒩)/2π]`.
pub fn verify_localization(s: &Scenario, pair: &TwistPair, eta: &FormField) -> Result<LocalizationReport> {
    let comps = find_zero_components(s, pair)?;
    verify_localization_with(s, pair, eta, &comps)
}

pub fn verify_localization_with(
    s: &Scenario,
    pair: &TwistPair,
    eta: &FormField,
    comps: &[FixedComponent],
) -> Result<LocalizationReport> {
    require_compact(s)?;
    if comps.is_empty() {
        return Err(Error::precondition("zero set is empty"));
    }
    check_closed(s, pair, eta)?;
    let lhs = integrate(s, eta)?;
    let rhs = localization_rhs(s, pair, comps, eta)?;
    Ok(LocalizationReport::new(s, lhs, rhs, Vec::new()))
}
