//! Batch verification: runs named suites against a scenario and collects
//! every residual into a versioned JSON report.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{lie_derivative_coordinates, FormField};
use crate::characteristic::{gauss_bonnet_integral, verify_characteristic, CharacteristicClass};
use crate::equivariant::{
    closedness_residual, lemma_residual, special_closed_form, sup_over, twisted_square_residual, GeneratorKind, Identity,
    TwistPair, RESIDUAL_SAMPLES,
};
use crate::error::{Error, Result};
use crate::expr::{Expr, Func};
use crate::form::FormValue;
use crate::geometry::Scenario;
use crate::localization::{
    composed_deformation_integral, decay_profile, integrate, verify_localization_with, ComponentContribution,
    LocalizationReport,
};
use crate::scenarios::{builtin_config, build, load_scenario, ManifoldKind};
use crate::symplectic::{equivariant_symplectic, hamiltonian_residual, verify_dh};
use crate::zeroset::{find_zero_components, jacobowitz_membership, FixedComponent};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_S_GRID: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];
pub const DECAY_S_GRID: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
/// Bound on double twisted differentials of the generators.
pub const GENERATOR_TOL: f64 = 1e-9;
/// Bound on `d²` and the Hamiltonian residuals.
pub const STRICT_TOL: f64 = 1e-9;
/// Bound on `|∫η|` on scenarios without zeros.
pub const DECAY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    /// Pointwise operator identities and closedness of the generators.
    Identities,
    /// Fixed-point formula for the built-in twisted-closed forms.
    Localization,
    /// Fixed-point formula for `Tr f(R̃)`.
    TraceClasses,
    /// Fixed-point formula for `Pf(−R̃)` and the Gauss–Bonnet normalization.
    EulerClass,
    /// Exact stationary phase for `exp(−H_X − √−1 H_Y) ω^n/n!`.
    StationaryPhase,
    /// Invariance of `∫ exp(−s dβ) ∧ η` in `s`, single and composed.
    SweepS,
    /// Vanishing and decay on scenarios without zeros.
    Decay,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Identities,
        Suite::Localization,
        Suite::TraceClasses,
        Suite::EulerClass,
        Suite::StationaryPhase,
        Suite::SweepS,
        Suite::Decay,
    ];

    /// Command-line spelling.
    pub fn flag(self) -> &'static str {
        match self {
            Suite::Identities => "lemmas",
            Suite::Localization => "theorem1",
            Suite::TraceClasses => "theorem2",
            Suite::EulerClass => "theorem3",
            Suite::StationaryPhase => "theorem4",
            Suite::SweepS => "sweep-s",
            Suite::Decay => "decay",
            Suite::All => "all",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Suite::Identities => "pointwise identities of the twisted calculus",
            Suite::Localization => "fixed-point localization formula",
            Suite::TraceClasses => "localization of Tr f(R~)",
            Suite::EulerClass => "localization of Pf(-R~) and Gauss-Bonnet",
            Suite::StationaryPhase => "Duistermaat-Heckman identity",
            Suite::SweepS => "s-invariance of deformed integrals",
            Suite::Decay => "vanishing and decay without zeros",
            Suite::All => "every suite",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "lemmas" | "identities" => Suite::Identities,
            "theorem1" | "localization" => Suite::Localization,
            "theorem2" | "trace" => Suite::TraceClasses,
            "theorem3" | "euler" => Suite::EulerClass,
            "theorem4" | "dh" => Suite::StationaryPhase,
            "sweep-s" => Suite::SweepS,
            "decay" => Suite::Decay,
            "all" => Suite::All,
            other => return Err(Error::Argument(format!("unknown suite '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Builtin(String),
    File(PathBuf),
}

impl ScenarioSource {
    /// A path if the string names an existing file or ends in `.json`.
    pub fn parse(s: &str) -> ScenarioSource {
        let p = PathBuf::from(s);
        if s.ends_with(".json") || p.is_file() {
            ScenarioSource::File(p)
        } else {
            ScenarioSource::Builtin(s.to_string())
        }
    }

    fn label(&self) -> String {
        match self {
            ScenarioSource::Builtin(n) => n.clone(),
            ScenarioSource::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scenario: ScenarioSource,
    pub suite: Suite,
    pub s_grid: Option<Vec<f64>>,
    /// Field speed; sets whichever of the parameters `t`, `t1`, `t2` exist.
    pub t: Option<f64>,
    pub params: BTreeMap<String, f64>,
    /// Relative tolerance for integral identities.
    pub tol: Option<f64>,
    /// Base quadrature nodes: one count for every axis or one per axis.
    pub nodes: Option<Vec<usize>>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn new(scenario: &str, suite: Suite) -> RunSpec {
        RunSpec {
            scenario: ScenarioSource::parse(scenario),
            suite,
            s_grid: None,
            t: None,
            params: BTreeMap::new(),
            tol: None,
            nodes: None,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// The identity being checked, written out.
    pub paper_ref: String,
    pub suite: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub lhs: Option<C64>,
    pub rhs: Option<C64>,
    pub components: Vec<ComponentContribution>,
    pub message: Option<String>,
    pub error_kind: Option<String>,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, identity: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            paper_ref: identity.into(),
            suite: suite.flag().to_string(),
            status: Status::Fail,
            residual: None,
            tolerance: None,
            lhs: None,
            rhs: None,
            components: Vec::new(),
            message: None,
            error_kind: None,
        }
    }

    fn bound(mut self, residual: f64, tolerance: f64) -> Check {
        self.status = if residual < tolerance { Status::Pass } else { Status::Fail };
        self.residual = Some(residual);
        self.tolerance = Some(tolerance);
        self
    }

    fn skipped(mut self, reason: impl Into<String>) -> Check {
        self.status = Status::Skipped;
        self.message = Some(reason.into());
        self
    }

    fn failed(mut self, err: &Error) -> Check {
        self.status = Status::Fail;
        self.message = Some(err.to_string());
        self.error_kind = Some(err.kind().to_string());
        self
    }

    fn from_result(self, r: Result<(f64, f64)>) -> Check {
        match r {
            Ok((res, tol)) => self.bound(res, tol),
            Err(e) => self.failed(&e),
        }
    }

    fn from_localization(mut self, r: Result<LocalizationReport>) -> Check {
        match r {
            Ok(rep) => {
                self.status = if rep.passed { Status::Pass } else { Status::Fail };
                // relative error is meaningless when both sides vanish
                let relative = rep.lhs.norm() > rep.parameters.abs_tolerance;
                self.residual = Some(if relative { rep.rel_residual } else { rep.abs_residual });
                self.tolerance = Some(if relative { rep.parameters.rel_tolerance } else { rep.parameters.abs_tolerance });
                self.lhs = Some(rep.lhs);
                self.rhs = Some(rep.rhs);
                self.components = rep.per_component;
                if !rep.notes.is_empty() {
                    self.message = Some(rep.notes.join("; "));
                }
                self
            }
            Err(e) => self.failed(&e),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub timestamp: String,
    pub seconds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub suite: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub timings: Timings,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// The report without its timing block; identical for identical runs.
    pub fn body_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports always serialize");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings");
        }
        serde_json::to_string_pretty(&v).expect("values always serialize")
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let c = |s: Status| self.checks.iter().filter(|k| k.status == s).count();
        (c(Status::Pass), c(Status::Fail), c(Status::Skipped))
    }
}

fn resolve(spec: &RunSpec) -> Result<Scenario> {
    let mut cfg = match &spec.scenario {
        ScenarioSource::Builtin(name) => builtin_config(name)?,
        ScenarioSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            load_scenario(&text)?.config
        }
    };
    for (k, v) in &spec.params {
        if !cfg.params.contains_key(k) {
            return Err(Error::Argument(format!("scenario {} has no parameter '{k}'", cfg.name)));
        }
        cfg.params.insert(k.clone(), *v);
    }
    if let Some(t) = spec.t {
        let keys: Vec<String> = ["t", "t1", "t2"].iter().filter(|k| cfg.params.contains_key(**k)).map(|k| k.to_string()).collect();
        if keys.is_empty() {
            return Err(Error::Argument(format!("scenario {} has no speed parameter for --t", cfg.name)));
        }
        for k in keys {
            cfg.params.insert(k, t);
        }
    }
    let mut scenario = build(cfg)?;
    if let Some(tol) = spec.tol {
        if !(tol > 0.0) {
            return Err(Error::Argument("tolerance must be positive".into()));
        }
        scenario.tolerances.integral = tol;
    }
    if let Some(nodes) = &spec.nodes {
        let n = scenario.dim();
        let counts = match nodes.len() {
            1 => vec![nodes[0]; n],
            k if k == n => nodes.clone(),
            k => return Err(Error::Argument(format!("--nodes takes 1 or {n} counts, got {k}"))),
        };
        if counts.contains(&0) {
            return Err(Error::Argument("node counts must be positive".into()));
        }
        scenario.quadrature.nodes = counts;
    }
    Ok(scenario)
}

/// Executes the suites named by `spec`. Errors become failing checks.
pub fn run(spec: &RunSpec) -> Report {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0).to_string();
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        scenario: spec.scenario.label(),
        suite: spec.suite.flag().to_string(),
        seed: spec.seed,
        parameters: BTreeMap::new(),
        checks: Vec::new(),
        passed: false,
        timings: Timings { timestamp, seconds: BTreeMap::new() },
    };
    let scenario = match resolve(spec) {
        Ok(s) => s,
        Err(e) => {
            report.checks.push(Check::new(spec.suite, "scenario", "scenario resolves and validates").failed(&e));
            return report;
        }
    };
    report.scenario = scenario.name.clone();
    report.parameters = scenario.config.params.clone();
    let suites: Vec<Suite> = if spec.suite == Suite::All { Suite::EACH.to_vec() } else { vec![spec.suite] };
    let mut ctx = Context::new(&scenario, spec);
    for suite in suites {
        let start = Instant::now();
        let checks = ctx.suite(suite);
        report.timings.seconds.insert(suite.flag().to_string(), start.elapsed().as_secs_f64());
        report.checks.extend(checks);
    }
    report.passed = report.checks.iter().all(|c| c.status != Status::Fail);
    if let Some(path) = &spec.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            let err = Error::Io(format!("{}: {e}", path.display()));
            report.checks.push(Check::new(spec.suite, "write report", "report written").failed(&err));
            report.passed = false;
        }
    }
    report
}

/// Deterministic generic test forms: each coefficient is a complex multiple
/// of `sin(b·x + c)` with seeded `a, b, c`.
pub fn random_forms(dim: usize, count: usize, seed: u64) -> Vec<FormField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut terms = Vec::new();
            for mask in 0..(1u32 << dim) {
                let a = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let mut arg = Expr::Const(rng.gen_range(-1.0..1.0));
                for i in 0..dim {
                    let b = rng.gen_range(-1.0..1.0);
                    arg = Expr::Add(Box::new(arg), Box::new(Expr::Mul(Box::new(Expr::Const(b)), Box::new(Expr::Var(i)))));
                }
                let func = if rng.gen_bool(0.5) { Func::Sin } else { Func::Cos };
                terms.push((mask, a, Expr::Call(func, Box::new(arg))));
            }
            FormField::from_exprs(dim, terms)
        })
        .collect()
}

fn constant(dim: usize, mask: u32, c: C64) -> FormValue {
    let mut f = FormValue::real_zero(dim);
    f.set(mask, c);
    f
}

/// Twisted-closed test forms on the flat torus with `X = ∂u`, `Y = ∂v`:
/// `1`, `dv − √−1 du` and `2 + 3(dv − √−1 du)`.
pub fn torus_test_forms() -> Vec<(String, FormField)> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let e = constant(2, 0b10, one) + constant(2, 0b01, -i);
    vec![
        ("1".into(), FormField::constant(FormValue::scalar(2, one))),
        ("dv - i du".into(), FormField::constant(e.clone())),
        ("2 + 3(dv - i du)".into(), FormField::constant(FormValue::scalar(2, one * 2.0) + e.scale(C64::new(3.0, 0.0)))),
    ]
}

/// Closed form of `∫ exp(−H_X − √−1H_Y) ω^n/n!` for the built-in scenarios.
pub fn dh_closed_form(s: &Scenario) -> Option<C64> {
    let p = &s.config.params;
    let f = |a: C64| 2.0 * PI * (a.exp() - (-a).exp()) / a;
    let builtin = builtin_config(&s.name).ok()?;
    if builtin.field_x != s.config.field_x || builtin.field_y != s.config.field_y || builtin.metric != s.config.metric {
        return None;
    }
    match s.name.as_str() {
        "sphere2_rotation" => Some(f(C64::new(p["t"], 0.0))),
        "sphere2_two_rotations" => Some(f(C64::new(p["t"], p["c"] * p["t"]))),
        "product_s2xs2" => Some(f(C64::new(p["t1"], 0.0)) * f(C64::new(0.0, p["t2"]))),
        "product_positive_dim_M0" => Some(f(C64::new(p["t"], p["c"] * p["t"])) * 4.0 * PI),
        _ => None,
    }
}

struct Context<'a> {
    s: &'a Scenario,
    pair: TwistPair,
    spec: &'a RunSpec,
    zeros: Option<Result<Vec<FixedComponent>>>,
}

impl<'a> Context<'a> {
    fn new(s: &'a Scenario, spec: &'a RunSpec) -> Self {
        Context { s, pair: TwistPair::of(s), spec, zeros: None }
    }

    fn zeros(&mut self) -> Result<Vec<FixedComponent>> {
        if self.zeros.is_none() {
            self.zeros = Some(find_zero_components(self.s, &self.pair));
        }
        self.zeros.clone().unwrap()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.s.residual_points(RESIDUAL_SAMPLES, self.spec.seed)
    }

    fn suite(&mut self, suite: Suite) -> Vec<Check> {
        match suite {
            Suite::Identities => self.identities(),
            Suite::Localization => self.localization(),
            Suite::TraceClasses => self.trace_classes(),
            Suite::EulerClass => self.euler_class(),
            Suite::StationaryPhase => self.stationary_phase(),
            Suite::SweepS => self.sweep_s(),
            Suite::Decay => self.decay(),
            Suite::All => unreachable!("expanded by run"),
        }
    }

    /// Reason the integral suites cannot run here, if any.
    fn integral_guard(&mut self, suite: Suite) -> Option<Check> {
        let name = "preconditions";
        if !self.s.compact {
            return Some(Check::new(suite, name, "compact manifold").skipped("scenario is not compact"));
        }
        if !self.s.commuting {
            return Some(Check::new(suite, name, "[X,Y] = 0").skipped("fields are not declared commuting"));
        }
        match self.zeros() {
            Ok(z) if z.is_empty() => Some(
                Check::new(suite, name, "nonempty zero set")
                    .skipped("zero set of X - iY is empty; the decay suite covers this scenario"),
            ),
            Ok(_) => None,
            Err(e) => Some(Check::new(suite, "zero set", "declared zero set matches the numerical search").failed(&e)),
        }
    }

    fn identities(&mut self) -> Vec<Check> {
        let su = Suite::Identities;
        let s = self.s;
        let pair = self.pair.clone();
        let pts = self.points();
        let seed = self.spec.seed;
        let tol = s.tolerances.identity;
        let mut out = Vec::new();
        let forms = random_forms(s.dim(), 3, seed);

        out.push(Check::new(su, "d^2 = 0", "d(dω) = 0").from_result((|| {
            let mut worst: f64 = 0.0;
            for f in &forms {
                let dd = f.d().d();
                worst = worst.max(sup_over(&pts, |p| Ok(dd.value(p)?.max_abs()))?);
            }
            Ok((worst, STRICT_TOL))
        })()));
        out.push(Check::new(su, "cartan formula", "d i_X ω + i_X d ω = L_X ω (coordinate formula)").from_result((|| {
            let mut worst: f64 = 0.0;
            let x = (&pair.x).into();
            for f in &forms {
                let cartan = f.lie(&x);
                worst = worst.max(sup_over(&pts, |p| {
                    let a = cartan.value(p)?;
                    let b = lie_derivative_coordinates(f, &pair.x, p)?;
                    Ok((a - b).max_abs())
                })?);
            }
            Ok((worst, tol))
        })()));
        out.push(Check::new(su, "twisted square", "(d + i_X + i i_Y)^2 = L_X + i L_Y").from_result((|| {
            let mut worst: f64 = 0.0;
            for f in &forms {
                worst = worst.max(twisted_square_residual(&pair, f, &pts)?);
            }
            Ok((worst, tol))
        })()));

        let identity_check = |which: Identity| {
            let name = which.name().to_string();
            Check::new(su, name.clone(), name).from_result(lemma_residual(s, &pair, &which, seed).map(|r| (r.residual, tol)))
        };
        out.push(identity_check(Identity::Killing));
        out.push(identity_check(Identity::DualLieSum));
        if pair.commuting {
            out.push(identity_check(Identity::Commutator));
            out.push(identity_check(Identity::DualLieVanishing));
        } else {
            out.push(Check::new(su, "L_X Y' = L_Y X' = 0", "commuting fields").skipped("fields are not declared commuting"));
        }
        let fixed = |v: &crate::geometry::VectorField| v.components.iter().map(Expr::as_const).collect::<Option<Vec<f64>>>();
        let coordinate_pair = fixed(&s.field_x) == Some(vec![1.0, 0.0]) && fixed(&s.field_y) == Some(vec![0.0, 1.0]);
        if s.config.manifold == ManifoldKind::Plane && coordinate_pair {
            let one = C64::new(1.0, 0.0);
            let xi = FormField::constant(constant(2, 0b01, one));
            let eta = FormField::constant(constant(2, 0b10, one));
            out.push(identity_check(Identity::CauchyRiemann { xi, eta }));
            // f = z², df = ξ + iη with ξ = 2x dx − 2y dy, η = 2y dx + 2x dy
            let two_x = Expr::Mul(Box::new(Expr::Const(2.0)), Box::new(Expr::Var(0)));
            let two_y = Expr::Mul(Box::new(Expr::Const(2.0)), Box::new(Expr::Var(1)));
            let xi = FormField::from_exprs(2, vec![(0b01, one, two_x.clone()), (0b10, -one, two_y.clone())]);
            let eta = FormField::from_exprs(2, vec![(0b01, one, two_y), (0b10, one, two_x)]);
            let holo = xi.add(&eta.scale(C64::new(0.0, 1.0)));
            out.push(identity_check(Identity::CauchyRiemann { xi, eta }));
            out.push(
                Check::new(su, "holomorphic differential closed", "d_{X+iY}(dz^2) = 0")
                    .from_result(closedness_residual(&pair, &holo, &pts).map(|r| (r, tol))),
            );
        }
        for kind in GeneratorKind::ALL {
            let c = Check::new(su, format!("generator {} closed", kind.name()), format!("d_{{X+iY}}(d_{{X+iY}}({})) = 0", kind.name()));
            if kind.requires_commuting() && !pair.commuting {
                out.push(c.skipped("generator requires commuting fields"));
                continue;
            }
            out.push(c.from_result((|| {
                let g = special_closed_form(s, &pair, kind)?;
                Ok((closedness_residual(&pair, &g.d_beta, &pts)?, GENERATOR_TOL))
            })()));
        }
        if let Some(data) = &s.symplectic {
            let h = hamiltonian_residual(s, data, seed);
            let c = Check::new(su, "hamiltonians", "dH_X = i_X ω, dH_Y = i_Y ω");
            out.push(match h {
                Ok(h) if !h.applicable => c.skipped(h.message.unwrap_or_default()),
                Ok(h) => c.bound(h.residual, STRICT_TOL),
                Err(e) => c.failed(&e),
            });
            let c = Check::new(su, "equivariant symplectic closed", "d_{X+iY}(ω - H_X - i H_Y) = 0");
            out.push(if data.hx.is_some() && data.hy.is_some() {
                c.from_result((|| Ok((closedness_residual(&pair, &equivariant_symplectic(s, data)?, &pts)?, STRICT_TOL)))())
            } else {
                c.skipped("no Hamiltonians")
            });
        }
        if s.compact {
            let c = Check::new(su, "zero set inside jacobowitz set", "{|X| = |Y| = 0} ⊂ {<X,Y> = 0, |X| = |Y|}");
            out.push(match self.zeros() {
                Ok(z) => {
                    let bad = z.iter().filter(|c| !jacobowitz_membership(s, &pair, &c.base_point, 1e-7)).count();
                    let mut c = c.bound(bad as f64, 0.5);
                    c.message = Some(format!("{} component(s) checked", z.len()));
                    c
                }
                Err(e) => c.failed(&e),
            });
        }
        out
    }

    fn localization_forms(&self) -> Vec<(String, FormField)> {
        let n = self.s.dim();
        let mut forms = vec![("1".to_string(), FormField::constant(FormValue::scalar(n, C64::new(1.0, 0.0))))];
        if let Some(data) = &self.s.symplectic {
            if let Ok(eq) = equivariant_symplectic(self.s, data) {
                forms.push(("omega - H_X - i H_Y".into(), eq.clone()));
                forms.push(("exp(omega - H_X - i H_Y)".into(), eq.exp()));
            }
        }
        forms
    }

    fn localization(&mut self) -> Vec<Check> {
        let su = Suite::Localization;
        if let Some(c) = self.integral_guard(su) {
            return vec![c];
        }
        let zeros = self.zeros().unwrap_or_default();
        let identity = "∫_M η = Σ ∫_{M0} η / Pf[(-μX - iμY + R^N)/2π]";
        self.localization_forms()
            .into_iter()
            .map(|(label, eta)| {
                let mut c = Check::new(su, format!("localization of {label}"), identity)
                    .from_localization(verify_localization_with(self.s, &self.pair, &eta, &zeros));
                if label == "1" && c.status != Status::Fail {
                    // the constant form has no top part: both sides must vanish
                    let rhs = c.rhs.map(|z| z.norm()).unwrap_or(f64::NAN);
                    c = c.bound(rhs, 1e-10);
                }
                c
            })
            .collect()
    }

    fn trace_classes(&mut self) -> Vec<Check> {
        let su = Suite::TraceClasses;
        if let Some(c) = self.integral_guard(su) {
            return vec![c];
        }
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let polys: Vec<(&str, Vec<C64>)> =
            vec![("1", vec![one]), ("x", vec![zero, one]), ("x^2", vec![zero, zero, one]), ("1 + x + x^2/2", vec![one, one, one * 0.5])];
        polys
            .into_iter()
            .map(|(label, f)| {
                Check::new(su, format!("localization of Tr f(R~), f = {label}"), "∫_M Tr f(R~) = Σ ∫_{M0} Tr f(R~) / Pf[...]")
                    .from_localization(verify_characteristic(self.s, &self.pair, &CharacteristicClass::Trace(f)))
            })
            .collect()
    }

    fn euler_class(&mut self) -> Vec<Check> {
        let su = Suite::EulerClass;
        let mut out = Vec::new();
        if self.s.compact {
            let c = Check::new(su, "gauss-bonnet normalization", "∫_M Pf(R/2π) = χ(M)");
            out.push(match (gauss_bonnet_integral(self.s), self.s.euler_characteristic) {
                (Ok(v), Some(chi)) => {
                    let mut c = c.bound((v.value - C64::new(chi, 0.0)).norm(), self.s.tolerances.integral);
                    c.lhs = Some(v.value);
                    c.rhs = Some(C64::new(chi, 0.0));
                    c
                }
                (Ok(v), None) => {
                    let mut c = c.skipped("no declared Euler characteristic");
                    c.lhs = Some(v.value);
                    c
                }
                (Err(e), _) => c.failed(&e),
            });
        }
        if let Some(c) = self.integral_guard(su) {
            out.push(c);
            return out;
        }
        out.push(
            Check::new(su, "localization of Pf(-R~)", "∫_M Pf(-R~) = Σ ∫_{M0} Pf(-R~) / Pf[...]")
                .from_localization(verify_characteristic(self.s, &self.pair, &CharacteristicClass::Pfaffian)),
        );
        out
    }

    fn stationary_phase(&mut self) -> Vec<Check> {
        let su = Suite::StationaryPhase;
        if let Some(c) = self.integral_guard(su) {
            return vec![c];
        }
        let Some(data) = self.s.symplectic.clone() else {
            return vec![Check::new(su, "preconditions", "symplectic data").skipped("scenario has no symplectic form")];
        };
        let identity = "∫ exp(-H_X - iH_Y) ω^n/n! = Σ ∫_{M0} exp(ω - H_X - iH_Y) / Pf[...]";
        let mut out = Vec::new();
        match verify_dh(self.s, &self.pair, &data) {
            Ok(r) => {
                let lhs = r.report.lhs;
                out.push(Check::new(su, "duistermaat-heckman", identity).from_localization(Ok(r.report.clone())));
                let mut lit = Check::new(su, "literal reading (exp(-H) dropped on M0)", "gauged LHS vs Σ exp(ω)/Pf[...]");
                lit.status = Status::Skipped;
                lit.lhs = Some(r.gauged_lhs);
                lit.rhs = Some(r.literal_rhs);
                lit.residual = Some((r.gauged_lhs - r.literal_rhs).norm() / r.gauged_lhs.norm().max(1e-30));
                lit.message = Some(format!(
                    "informational: gauge constant {}; literal reading {}",
                    r.gauge_constant,
                    if r.literal_matches { "matches" } else { "does not match" }
                ));
                out.push(lit);
                if let Some(exact) = dh_closed_form(self.s) {
                    let mut c = Check::new(su, "closed form", "∫ exp(-H) ω^n/n! against its closed form")
                        .bound((lhs - exact).norm() / exact.norm(), self.s.tolerances.integral);
                    c.lhs = Some(lhs);
                    c.rhs = Some(exact);
                    out.push(c);
                }
            }
            Err(e) => out.push(Check::new(su, "duistermaat-heckman", identity).failed(&e)),
        }
        out
    }

    fn sweep_s(&mut self) -> Vec<Check> {
        let su = Suite::SweepS;
        if !self.s.compact {
            return vec![Check::new(su, "preconditions", "compact manifold").skipped("scenario is not compact")];
        }
        let grid = self.spec.s_grid.clone().unwrap_or_else(|| DEFAULT_S_GRID.to_vec());
        let forms: Vec<(String, FormField)> = if self.s.config.manifold == ManifoldKind::Torus2 {
            torus_test_forms()
        } else {
            self.localization_forms().into_iter().rev().take(1).collect()
        };
        let tol = self.s.tolerances.integral;
        let abs_tol = self.s.tolerances.identity;
        let mut out = Vec::new();
        for (label, eta) in forms {
            let base = match integrate(self.s, &eta) {
                Ok(v) => v.value,
                Err(e) => {
                    out.push(Check::new(su, format!("∫ {label}"), "integral").failed(&e));
                    continue;
                }
            };
            let deviation = |v: C64| {
                let d = (v - base).norm();
                if base.norm() > abs_tol {
                    (d / base.norm(), tol)
                } else {
                    (d, abs_tol)
                }
            };
            for kind in GeneratorKind::admissible(self.pair.commuting) {
                let c = Check::new(
                    su,
                    format!("s-invariance of {label} under {}", kind.name()),
                    format!("∫ exp(-s d_{{X+iY}}({})) η independent of s", kind.name()),
                );
                let r = (|| {
                    let mut worst: (f64, f64) = (0.0, tol);
                    for &sv in &grid {
                        let v = composed_deformation_integral(self.s, &self.pair, &eta, &[(kind, sv)])?.value;
                        let d = deviation(v);
                        worst = (worst.0.max(d.0), d.1);
                    }
                    Ok(worst)
                })();
                let mut c = c.from_result(r);
                c.lhs = Some(base);
                out.push(c);
            }
            let kinds = GeneratorKind::admissible(self.pair.commuting);
            let (k1, k2) = (kinds[0], kinds[kinds.len() - 1]);
            let c = Check::new(
                su,
                format!("composed deformation of {label}"),
                format!("∫ exp(-s1 dβ[{}]) exp(-s2 dβ[{}]) η = ∫ η", k1.name(), k2.name()),
            );
            let r = (|| {
                let mut worst: (f64, f64) = (0.0, tol);
                for (s1, s2) in [(0.5, 1.0), (1.0, 0.5), (2.0, 2.0)] {
                    let v = composed_deformation_integral(self.s, &self.pair, &eta, &[(k1, s1), (k2, s2)])?.value;
                    let d = deviation(v);
                    worst = (worst.0.max(d.0), d.1);
                }
                Ok(worst)
            })();
            out.push(c.from_result(r));
        }
        out
    }

    fn decay(&mut self) -> Vec<Check> {
        let su = Suite::Decay;
        if !self.s.compact {
            return vec![Check::new(su, "preconditions", "compact manifold").skipped("scenario is not compact")];
        }
        match self.zeros() {
            Ok(z) if !z.is_empty() => {
                return vec![Check::new(su, "preconditions", "empty zero set")
                    .skipped(format!("zero set has {} component(s); the localization suite covers this scenario", z.len()))]
            }
            Err(e) => return vec![Check::new(su, "zero set", "declared zero set matches the numerical search").failed(&e)],
            Ok(_) => {}
        }
        let grid = self.spec.s_grid.clone().unwrap_or_else(|| DECAY_S_GRID.to_vec());
        let forms = if self.s.config.manifold == ManifoldKind::Torus2 {
            torus_test_forms()
        } else {
            vec![("1".to_string(), FormField::constant(FormValue::scalar(self.s.dim(), C64::new(1.0, 0.0))))]
        };
        let mut out = Vec::new();
        for (label, eta) in forms {
            match decay_profile(self.s, &self.pair, &eta, &grid) {
                Ok(p) => {
                    let mut c = Check::new(su, format!("∫ {label} vanishes"), "∫_M η = 0 when X - iY has no zeros")
                        .bound(p.integral.norm(), DECAY_TOL);
                    c.lhs = Some(p.integral);
                    out.push(c);
                    let terminal = p.points.last().map(|q| q.value.norm()).unwrap_or(0.0);
                    out.push(
                        Check::new(su, format!("terminal deformed integral of {label}"), "|∫ exp(-s dβ) η| at the largest s")
                            .bound(terminal, DECAY_TOL),
                    );
                    let mut c = Check::new(su, format!("decay of {label}"), "deformed integrand decays exponentially in s");
                    let ok = p.strictly_decreasing() && p.r_squared > 0.99;
                    c.status = if ok { Status::Pass } else { Status::Fail };
                    c.residual = Some(1.0 - p.r_squared);
                    c.tolerance = Some(0.01);
                    c.message = Some(format!(
                        "magnitudes {:?}; rate {:.6}; R^2 {:.12}",
                        p.points.iter().map(|q| q.magnitude).collect::<Vec<_>>(),
                        p.rate,
                        p.r_squared
                    ));
                    out.push(c);
                }
                Err(e) => out.push(Check::new(su, format!("decay of {label}"), "decay profile").failed(&e)),
            }
        }
        out
    }
}
