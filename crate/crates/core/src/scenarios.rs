//! Built-in scenarios and JSON scenario ingestion.
//!
//! A scenario document names a manifold kind (which supplies a default
//! chart, metric and quadrature), parameters, and the coefficient strings of
//! the two fields. Everything else is optional. Example:
//!
//! ```json
//! {
//!   "name": "my_sphere",
//!   "manifold": "sphere2",
//!   "params": { "t": 1.5 },
//!   "field_x": ["0", "t"],
//!   "field_y": ["0", "0"],
//!   "commuting": true,
//!   "symplectic": {
//!     "omega": [{ "axes": [0, 1], "coeff": "sin(theta)" }],
//!     "hx": "t*cos(theta)", "hy": "0"
//!   },
//!   "fixed_components": [
//!     { "id": "north", "point": ["0", "0"], "normal_axes": [0, 1] },
//!     { "id": "south", "point": ["pi", "0"], "normal_axes": [0, 1] }
//!   ]
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::equivariant::RESIDUAL_SAMPLES;
use crate::error::{Error, Result};
use crate::expr::{parse, parse_const};
use crate::form::mask_of;
use crate::geometry::{
    commutator_residual, killing_residual, metric_at, Chart, ExcludedLocus, MetricField, Scenario, Tolerances, VectorField,
};
use crate::localization::QuadratureSpec;
use crate::symplectic::{hamiltonian_residual, SymplecticData};
use crate::zeroset::{FixedComponent, ZERO_TOL};

/// Seed of the construction-time validation sample.
const VALIDATION_SEED: u64 = 0xC0FFEE;
const KILLING_TOL: f64 = 1e-8;
const COMMUTATOR_TOL: f64 = 1e-8;
const CLOSED_OMEGA_TOL: f64 = 1e-10;
const HAMILTONIAN_TOL: f64 = 1e-9;

pub const BUILTIN_NAMES: [&str; 6] = [
    "plane_cr",
    "torus2_translations",
    "sphere2_rotation",
    "sphere2_two_rotations",
    "product_s2xs2",
    "product_positive_dim_M0",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Plane,
    Torus2,
    Sphere2,
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusConfig {
    pub axis: usize,
    pub value: String,
    #[serde(default)]
    pub collapses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartConfig {
    pub names: Vec<String>,
    pub domain: Vec<[String; 2]>,
    pub periodic: Vec<bool>,
    #[serde(default)]
    pub excluded: Vec<LocusConfig>,
    #[serde(default = "plus_one")]
    pub orientation: f64,
}

fn plus_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaTerm {
    /// Strictly increasing coordinate indices of the basis wedge.
    pub axes: Vec<usize>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticConfig {
    pub omega: Vec<OmegaTerm>,
    #[serde(default)]
    pub hx: Option<String>,
    #[serde(default)]
    pub hy: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentConfig {
    pub id: String,
    pub point: Vec<String>,
    pub normal_axes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub manifold: ManifoldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compact: Option<bool>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
    pub field_x: Vec<String>,
    pub field_y: Vec<String>,
    pub commuting: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symplectic: Option<SymplecticConfig>,
    #[serde(default)]
    pub fixed_components: Vec<ComponentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euler_characteristic: Option<f64>,
}

impl Serialize for Tolerances {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("Tolerances", 2)?;
        st.serialize_field("identity", &self.identity)?;
        st.serialize_field("integral", &self.integral)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Tolerances {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            identity: Option<f64>,
            integral: Option<f64>,
        }
        let r = Raw::deserialize(de)?;
        let d = Tolerances::default();
        Ok(Tolerances { identity: r.identity.unwrap_or(d.identity), integral: r.integral.unwrap_or(d.integral) })
    }
}

fn s(v: &str) -> String {
    v.to_string()
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn default_chart(kind: ManifoldKind) -> ChartConfig {
    let pole = |axis: usize, value: &str, collapses: usize| LocusConfig { axis, value: s(value), collapses: vec![collapses] };
    match kind {
        ManifoldKind::Plane => ChartConfig {
            names: strs(&["x", "y"]),
            domain: vec![[s("-2"), s("2")], [s("-2"), s("2")]],
            periodic: vec![false, false],
            excluded: vec![],
            orientation: 1.0,
        },
        ManifoldKind::Torus2 => ChartConfig {
            names: strs(&["u", "v"]),
            domain: vec![[s("0"), s("2*pi")], [s("0"), s("2*pi")]],
            periodic: vec![true, true],
            excluded: vec![],
            orientation: 1.0,
        },
        ManifoldKind::Sphere2 => ChartConfig {
            names: strs(&["theta", "phi"]),
            domain: vec![[s("0"), s("pi")], [s("0"), s("2*pi")]],
            periodic: vec![false, true],
            excluded: vec![pole(0, "0", 1), pole(0, "pi", 1)],
            orientation: 1.0,
        },
        ManifoldKind::Product => ChartConfig {
            names: strs(&["theta1", "phi1", "theta2", "phi2"]),
            domain: vec![[s("0"), s("pi")], [s("0"), s("2*pi")], [s("0"), s("pi")], [s("0"), s("2*pi")]],
            periodic: vec![false, true, false, true],
            excluded: vec![pole(0, "0", 1), pole(0, "pi", 1), pole(2, "0", 3), pole(2, "pi", 3)],
            orientation: 1.0,
        },
    }
}

fn default_metric(kind: ManifoldKind) -> Vec<Vec<String>> {
    match kind {
        ManifoldKind::Plane | ManifoldKind::Torus2 => vec![strs(&["1", "0"]), strs(&["0", "1"])],
        ManifoldKind::Sphere2 => vec![strs(&["1", "0"]), strs(&["0", "sin(theta)^2"])],
        ManifoldKind::Product => vec![
            strs(&["1", "0", "0", "0"]),
            strs(&["0", "sin(theta1)^2", "0", "0"]),
            strs(&["0", "0", "1", "0"]),
            strs(&["0", "0", "0", "sin(theta2)^2"]),
        ],
    }
}

fn default_quadrature(kind: ManifoldKind) -> Vec<usize> {
    match kind {
        ManifoldKind::Plane | ManifoldKind::Torus2 => vec![16, 16],
        ManifoldKind::Sphere2 => vec![24, 8],
        ManifoldKind::Product => vec![20, 4, 20, 4],
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn pole_components(dim: usize, axis: usize, normal: &[usize], prefix: &str) -> Vec<ComponentConfig> {
    [("north", "0"), ("south", "pi")]
        .iter()
        .map(|(name, v)| {
            let mut point = vec![s("0"); dim];
            point[axis] = s(v);
            ComponentConfig { id: format!("{prefix}{name}"), point, normal_axes: normal.to_vec() }
        })
        .collect()
}

fn sphere_config(name: &str, with_y: bool) -> ScenarioConfig {
    let mut p = params(&[("t", 1.0), ("squash", 0.0)]);
    if with_y {
        p.insert(s("c"), 2.0);
    }
    ScenarioConfig {
        name: s(name),
        manifold: ManifoldKind::Sphere2,
        compact: None,
        params: p,
        chart: None,
        metric: Some(vec![strs(&["(1 + squash*sin(theta)^2)^2", "0"]), strs(&["0", "sin(theta)^2"])]),
        field_x: strs(&["0", "t"]),
        field_y: if with_y { strs(&["0", "c*t"]) } else { strs(&["0", "0"]) },
        commuting: true,
        symplectic: Some(SymplecticConfig {
            omega: vec![OmegaTerm { axes: vec![0, 1], coeff: s("sin(theta)") }],
            hx: Some(s("t*cos(theta)")),
            hy: Some(s(if with_y { "c*t*cos(theta)" } else { "0" })),
        }),
        fixed_components: pole_components(2, 0, &[0, 1], ""),
        quadrature: None,
        tolerances: None,
        euler_characteristic: Some(2.0),
    }
}

fn product_omega() -> Vec<OmegaTerm> {
    vec![
        OmegaTerm { axes: vec![0, 1], coeff: s("sin(theta1)") },
        OmegaTerm { axes: vec![2, 3], coeff: s("sin(theta2)") },
    ]
}

/// Configuration document of a built-in scenario.
pub fn builtin_config(name: &str) -> Result<ScenarioConfig> {
    Ok(match name {
        "plane_cr" => ScenarioConfig {
            name: s(name),
            manifold: ManifoldKind::Plane,
            compact: Some(false),
            params: BTreeMap::new(),
            chart: None,
            metric: None,
            field_x: strs(&["1", "0"]),
            field_y: strs(&["0", "1"]),
            commuting: true,
            symplectic: None,
            fixed_components: vec![],
            quadrature: None,
            tolerances: None,
            euler_characteristic: None,
        },
        "torus2_translations" => ScenarioConfig {
            name: s(name),
            manifold: ManifoldKind::Torus2,
            compact: None,
            params: BTreeMap::new(),
            chart: None,
            metric: None,
            field_x: strs(&["1", "0"]),
            field_y: strs(&["0", "1"]),
            commuting: true,
            symplectic: Some(SymplecticConfig {
                omega: vec![OmegaTerm { axes: vec![0, 1], coeff: s("1") }],
                hx: None,
                hy: None,
            }),
            fixed_components: vec![],
            quadrature: None,
            tolerances: None,
            euler_characteristic: Some(0.0),
        },
        "sphere2_rotation" => sphere_config(name, false),
        "sphere2_two_rotations" => sphere_config(name, true),
        "product_s2xs2" => {
            let mut comps = Vec::new();
            for (a, va) in [("n", "0"), ("s", "pi")] {
                for (b, vb) in [("n", "0"), ("s", "pi")] {
                    comps.push(ComponentConfig {
                        id: format!("{a}{b}"),
                        point: vec![s(va), s("0"), s(vb), s("0")],
                        normal_axes: vec![0, 1, 2, 3],
                    });
                }
            }
            ScenarioConfig {
                name: s(name),
                manifold: ManifoldKind::Product,
                compact: None,
                params: params(&[("t1", 1.0), ("t2", 1.0)]),
                chart: None,
                metric: None,
                field_x: strs(&["0", "t1", "0", "0"]),
                field_y: strs(&["0", "0", "0", "t2"]),
                commuting: true,
                symplectic: Some(SymplecticConfig {
                    omega: product_omega(),
                    hx: Some(s("t1*cos(theta1)")),
                    hy: Some(s("t2*cos(theta2)")),
                }),
                fixed_components: comps,
                quadrature: None,
                tolerances: None,
                euler_characteristic: Some(4.0),
            }
        }
        "product_positive_dim_M0" => ScenarioConfig {
            name: s(name),
            manifold: ManifoldKind::Product,
            compact: None,
            params: params(&[("t", 1.0), ("c", 2.0)]),
            chart: None,
            metric: None,
            field_x: strs(&["0", "t", "0", "0"]),
            field_y: strs(&["0", "c*t", "0", "0"]),
            commuting: true,
            symplectic: Some(SymplecticConfig {
                omega: product_omega(),
                hx: Some(s("t*cos(theta1)")),
                hy: Some(s("c*t*cos(theta1)")),
            }),
            fixed_components: pole_components(4, 0, &[0, 1], "s2_"),
            quadrature: None,
            tolerances: None,
            euler_characteristic: Some(4.0),
        },
        _ => return Err(Error::ScenarioNotFound(name.to_string())),
    })
}

pub fn builtin(name: &str) -> Result<Scenario> {
    build(builtin_config(name)?)
}

/// A built-in scenario with some parameters overridden.
pub fn builtin_with(name: &str, overrides: &BTreeMap<String, f64>) -> Result<Scenario> {
    let mut cfg = builtin_config(name)?;
    for (k, v) in overrides {
        if !cfg.params.contains_key(k) {
            return Err(Error::Argument(format!("scenario {name} has no parameter '{k}'")));
        }
        cfg.params.insert(k.clone(), *v);
    }
    build(cfg)
}

/// Parses and validates a JSON scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario document: {e}")))?;
    build(cfg)
}

pub fn serialize(s: &Scenario) -> String {
    serde_json::to_string_pretty(&s.config).expect("scenario configs always serialize")
}

fn build_chart(cfg: &ScenarioConfig) -> Result<Chart> {
    let cc = cfg.chart.clone().unwrap_or_else(|| default_chart(cfg.manifold));
    let domain = cc
        .domain
        .iter()
        .map(|[a, b]| Ok((parse_const(a, &cfg.params)?, parse_const(b, &cfg.params)?)))
        .collect::<Result<Vec<_>>>()?;
    let excluded = cc
        .excluded
        .iter()
        .map(|l| Ok(ExcludedLocus { axis: l.axis, value: parse_const(&l.value, &cfg.params)?, collapses: l.collapses.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let chart = Chart {
        id: format!("{}:chart", cfg.name),
        dim: cc.names.len(),
        domain,
        names: cc.names,
        periodic: cc.periodic,
        excluded,
        orientation: cc.orientation,
    };
    chart.validate()?;
    Ok(chart)
}

fn parse_field(label: &str, src: &[String], chart: &Chart, params: &BTreeMap<String, f64>) -> Result<VectorField> {
    if src.len() != chart.dim {
        return Err(Error::ScenarioDefinition(format!(
            "field {label} has {} components, chart has dimension {}",
            src.len(),
            chart.dim
        )));
    }
    let comps = src.iter().map(|e| parse(e, &chart.names, params)).collect::<Result<Vec<_>>>()?;
    Ok(VectorField::new(label, comps))
}

/// Constructs a scenario from its document and checks every structural
/// invariant, naming the violated one on failure.
pub fn build(cfg: ScenarioConfig) -> Result<Scenario> {
    let chart = build_chart(&cfg)?;
    let n = chart.dim;
    if n % 2 == 1 {
        return Err(Error::ScenarioDefinition(format!("total dimension {n} is odd; an even-dimensional manifold is required")));
    }
    let p = &cfg.params;
    let metric_src = cfg.metric.clone().unwrap_or_else(|| default_metric(cfg.manifold));
    if metric_src.len() != n || metric_src.iter().any(|r| r.len() != n) {
        return Err(Error::ScenarioDefinition(format!("metric must be {n}×{n}")));
    }
    let metric = MetricField::new(
        n,
        metric_src.iter().flatten().map(|e| parse(e, &chart.names, p)).collect::<Result<Vec<_>>>()?,
    );
    let field_x = parse_field("X", &cfg.field_x, &chart, p)?;
    let field_y = parse_field("Y", &cfg.field_y, &chart, p)?;
    let symplectic = match &cfg.symplectic {
        None => None,
        Some(sc) => {
            let mut omega = Vec::new();
            for t in &sc.omega {
                if t.axes.len() != 2 || t.axes[0] >= t.axes[1] || t.axes[1] >= n {
                    return Err(Error::ScenarioDefinition(format!("omega term axes {:?} must be an increasing pair", t.axes)));
                }
                omega.push((mask_of(&t.axes), parse(&t.coeff, &chart.names, p)?));
            }
            let h = |o: &Option<String>| o.as_ref().map(|e| parse(e, &chart.names, p)).transpose();
            Some(SymplecticData { omega, hx: h(&sc.hx)?, hy: h(&sc.hy)?, n: n / 2 })
        }
    };
    let fixed_components = cfg
        .fixed_components
        .iter()
        .map(|c| {
            if c.point.len() != n || c.normal_axes.iter().any(|&a| a >= n) || c.normal_axes.len() % 2 == 1 || c.normal_axes.is_empty() {
                return Err(Error::ScenarioDefinition(format!("fixed component {} is malformed", c.id)));
            }
            let point = c.point.iter().map(|e| parse_const(e, p)).collect::<Result<Vec<_>>>()?;
            Ok(FixedComponent::new(c.id.clone(), point, c.normal_axes.clone(), chart.orientation))
        })
        .collect::<Result<Vec<_>>>()?;
    let quadrature = QuadratureSpec::new(cfg.quadrature.clone().unwrap_or_else(|| default_quadrature(cfg.manifold)));
    if quadrature.nodes.len() != n || quadrature.nodes.contains(&0) {
        return Err(Error::ScenarioDefinition(format!("quadrature needs {n} positive node counts")));
    }
    let scenario = Scenario {
        name: cfg.name.clone(),
        compact: cfg.compact.unwrap_or(cfg.manifold != ManifoldKind::Plane),
        chart,
        metric,
        field_x,
        field_y,
        commuting: cfg.commuting,
        fixed_components,
        quadrature,
        symplectic,
        euler_characteristic: cfg.euler_characteristic,
        tolerances: cfg.tolerances.unwrap_or_default(),
        config: cfg,
    };
    validate(&scenario)?;
    Ok(scenario)
}

fn sup(points: &[Vec<f64>], f: impl Fn(&[f64]) -> f64) -> f64 {
    points.iter().map(|p| f(p)).fold(0.0, f64::max)
}

fn validate(s: &Scenario) -> Result<()> {
    let pts = s.residual_points(RESIDUAL_SAMPLES, VALIDATION_SEED);
    for p in &pts {
        metric_at(s, p)?;
    }
    for v in [&s.field_x, &s.field_y] {
        let r = sup(&pts, |p| killing_residual(s, v, p));
        if !(r < KILLING_TOL) {
            return Err(Error::Validation { invariant: format!("Killing residual |L_{} g|", v.label), residual: r, tolerance: KILLING_TOL });
        }
    }
    if s.commuting {
        let r = sup(&pts, |p| commutator_residual(&s.field_x, &s.field_y, p));
        if !(r < COMMUTATOR_TOL) {
            return Err(Error::Validation {
                invariant: "commutator residual |[X,Y]| (fields declared commuting)".into(),
                residual: r,
                tolerance: COMMUTATOR_TOL,
            });
        }
    }
    if let Some(data) = &s.symplectic {
        let n = s.dim();
        let omega = data.omega_form(n);
        let d = omega.d();
        let r = sup(&pts, |p| d.value(p).map(|v| v.max_abs()).unwrap_or(f64::INFINITY));
        if !(r < CLOSED_OMEGA_TOL) {
            return Err(Error::Validation { invariant: "closedness |dω|".into(), residual: r, tolerance: CLOSED_OMEGA_TOL });
        }
        let vol = data.liouville_form(n);
        let grid = s.quadrature.base_grid(&s.chart, 4096);
        let min_top = grid
            .iter()
            .map(|p| vol.value(p).map(|v| v.top().norm()).unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min);
        if !(min_top > 1e-12) {
            return Err(Error::Validation { invariant: "nondegeneracy of ω^n".into(), residual: min_top, tolerance: 1e-12 });
        }
        let h = hamiltonian_residual(s, data, VALIDATION_SEED)?;
        if h.applicable && !(h.residual < HAMILTONIAN_TOL) {
            return Err(Error::Validation {
                invariant: "Hamiltonian residual |dH - i_V ω|".into(),
                residual: h.residual,
                tolerance: HAMILTONIAN_TOL,
            });
        }
    }
    for c in &s.fixed_components {
        let x = crate::jet::Jet::seed(&c.base_point, 0);
        let g = s.metric.eval_jets(&x);
        let n = s.dim();
        let mut f = 0.0;
        for v in [&s.field_x, &s.field_y] {
            let vj = v.eval_jets(&x);
            for i in 0..n {
                for j in 0..n {
                    f += (vj[i].value() * g[i * n + j].value() * vj[j].value()).re;
                }
            }
        }
        if !(f.abs() < ZERO_TOL) {
            return Err(Error::Validation {
                invariant: format!("declared component {} is a zero of X and Y", c.id),
                residual: f.abs(),
                tolerance: ZERO_TOL,
            });
        }
    }
    Ok(())
}

/// Names and one-line descriptions of the built-in catalog.
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    vec![
        ("plane_cr", "flat plane box, X = ∂x, Y = ∂y; pointwise identities only (non-compact)"),
        ("torus2_translations", "flat torus, X = ∂u, Y = ∂v; empty zero set"),
        ("sphere2_rotation", "round sphere, X = t∂φ, Y = 0; poles are the zeros"),
        ("sphere2_two_rotations", "round sphere, X = t∂φ, Y = c·t∂φ"),
        ("product_s2xs2", "S²×S², X rotates factor 1, Y rotates factor 2; four isolated zeros"),
        ("product_positive_dim_M0", "S²×S², X and Y = c·X rotate factor 1; zero set {N,S}×S²"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_construct() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            assert_eq!(s.name, name);
            assert_eq!(s.dim() % 2, 0);
        }
        assert!(matches!(builtin("klein_bottle"), Err(Error::ScenarioNotFound(_))));
    }

    #[test]
    fn serialization_round_trips() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            let text = serialize(&s);
            let back = load_scenario(&text).unwrap();
            assert_eq!(back.config, s.config);
        }
    }

    #[test]
    fn claimed_commuting_fields_are_checked() {
        let mut cfg = builtin_config("sphere2_rotation").unwrap();
        // ∂φ and the rotation about the x-axis do not commute
        cfg.field_y = vec![s("-sin(phi)"), s("-cos(phi)*cos(theta)/sin(theta)")];
        let err = build(cfg).unwrap_err();
        match err {
            Error::Validation { invariant, residual, .. } => {
                assert!(invariant.contains("commutator"), "{invariant}");
                assert!(residual > 0.1);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn non_killing_field_is_rejected() {
        let mut cfg = builtin_config("sphere2_rotation").unwrap();
        cfg.field_x = vec![s("sin(theta)"), s("0")];
        cfg.symplectic = None;
        assert!(matches!(build(cfg), Err(Error::Validation { invariant, .. }) if invariant.contains("Killing")));
    }

    #[test]
    fn odd_dimension_is_rejected() {
        let mut cfg = builtin_config("plane_cr").unwrap();
        cfg.chart = Some(ChartConfig {
            names: strs(&["x", "y", "z"]),
            domain: vec![[s("0"), s("1")], [s("0"), s("1")], [s("0"), s("1")]],
            periodic: vec![false; 3],
            excluded: vec![],
            orientation: 1.0,
        });
        cfg.metric = Some(vec![strs(&["1", "0", "0"]), strs(&["0", "1", "0"]), strs(&["0", "0", "1"])]);
        cfg.field_x = strs(&["1", "0", "0"]);
        cfg.field_y = strs(&["0", "1", "0"]);
        assert!(matches!(build(cfg), Err(Error::ScenarioDefinition(m)) if m.contains("odd")));
    }

    #[test]
    fn bad_json_is_a_parse_error() {
        assert!(matches!(load_scenario("{ not json"), Err(Error::Parse(_))));
        assert!(matches!(
            load_scenario(r#"{"name":"x","manifold":"sphere2","field_x":["0","q"],"field_y":["0","0"],"commuting":true}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn parameter_overrides() {
        let s = builtin_with("sphere2_two_rotations", &params(&[("c", 0.5)])).unwrap();
        assert_eq!(s.config.params["c"], 0.5);
        assert!(builtin_with("sphere2_rotation", &params(&[("nope", 1.0)])).is_err());
    }
}
