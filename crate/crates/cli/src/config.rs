//! Run configuration: strict JSON, every validation failure collected.

use std::fmt;

use potwalk_core::convex_phase::{check_grid, default_lambda_grid};
use potwalk_core::lattice::{LatticePoint, DEFAULT_ENUMERATION_BUDGET};
use potwalk_core::lyapunov::default_directions;
use potwalk_core::path_measures::{VelocityEvent, DEFAULT_DELTA};
use potwalk_core::potential::{OneSitePotential, SiteDistribution};
use potwalk_core::two_point::Backend;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::Subcommand;

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// One validation failure, located by its JSON path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingKind {
    Annealed,
    Quenched,
}

/// The literal `"default"` or explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Named<T> {
    Name(String),
    Values(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperplaneSpec {
    pub ell: Vec<f64>,
    pub lambda: f64,
    pub u: Vec<f64>,
}

/// Work limits. Every field has a default, echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub horizon: usize,
    pub n_max: usize,
    pub reps: usize,
    pub enumeration_cap: u64,
    pub field_radius: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub width: f64,
    pub delta: f64,
    pub velocity_step: f64,
}

impl Budgets {
    fn defaults(dim: usize) -> Self {
        let (horizon, n_max) = match dim {
            1 => (24, 8),
            2 => (10, 5),
            _ => (6, 3),
        };
        Budgets { horizon, n_max, reps: 16, enumeration_cap: DEFAULT_ENUMERATION_BUDGET as u64, field_radius: 10 }
    }
}

impl Tolerances {
    fn defaults(dim: usize) -> Self {
        Tolerances { width: 1e-6, delta: DEFAULT_DELTA, velocity_step: if dim == 1 { 1e-3 } else { 0.01 } }
    }
}

/// A validated configuration with all defaults filled in. Serializing it
/// gives a config that parses back to the same value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dimension: usize,
    pub setting: SettingKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<OneSitePotential>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site_dist: Option<SiteDistribution>,
    pub lambda_grid: Named<Vec<f64>>,
    pub directions: Named<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drifts: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocities: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ells: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<VelocityEvent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyperplane: Option<HyperplaneSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub backend: Backend,
    pub budgets: Budgets,
    pub tolerances: Tolerances,
    /// Keys filled from defaults, for the report.
    #[serde(skip)]
    pub defaulted: Vec<String>,
}

const TOP_KEYS: &[&str] = &[
    "dimension",
    "setting",
    "phi",
    "site_dist",
    "lambda_grid",
    "directions",
    "points",
    "drifts",
    "velocities",
    "ells",
    "ns",
    "event",
    "hyperplane",
    "seed",
    "backend",
    "budgets",
    "tolerances",
];

struct Collector {
    errors: Vec<ConfigError>,
}

impl Collector {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ConfigError { path: path.into(), message: message.into() });
    }

    fn field<T: DeserializeOwned>(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<T> {
        let v = obj.get(key)?;
        match serde_json::from_value(v.clone()) {
            Ok(t) => Some(t),
            Err(e) => {
                self.push(join(path, key), e.to_string());
                None
            }
        }
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, path: &str, known: &[&str]) {
        for k in obj.keys() {
            if !known.contains(&k.as_str()) {
                self.push(join(path, k), format!("unknown key (expected one of: {})", known.join(", ")));
            }
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Parses and validates a config. Returns all problems found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let root: Value = serde_json::from_str(text).map_err(|e| vec![ConfigError { path: "$".into(), message: format!("not valid JSON: {e}") }])?;
    let Value::Object(obj) = root else {
        return Err(vec![ConfigError { path: "$".into(), message: "config must be a JSON object".into() }]);
    };
    let mut c = Collector { errors: Vec::new() };
    c.unknown_keys(&obj, "", TOP_KEYS);
    let mut defaulted = Vec::new();

    let dimension: Option<usize> = c.field(&obj, "", "dimension");
    let setting: Option<SettingKind> = c.field(&obj, "", "setting");
    let phi: Option<OneSitePotential> = c.field(&obj, "", "phi");
    let site_dist: Option<SiteDistribution> = c.field(&obj, "", "site_dist");
    let lambda_grid: Option<Named<Vec<f64>>> = c.field(&obj, "", "lambda_grid");
    let directions: Option<Named<Vec<Vec<i64>>>> = c.field(&obj, "", "directions");
    let points: Option<Vec<Vec<i64>>> = c.field(&obj, "", "points");
    let drifts: Option<Vec<Vec<f64>>> = c.field(&obj, "", "drifts");
    let velocities: Option<Vec<Vec<f64>>> = c.field(&obj, "", "velocities");
    let ells: Option<Vec<Vec<f64>>> = c.field(&obj, "", "ells");
    let ns: Option<Vec<usize>> = c.field(&obj, "", "ns");
    let event: Option<VelocityEvent> = c.field(&obj, "", "event");
    let hyperplane: Option<HyperplaneSpec> = c.field(&obj, "", "hyperplane");
    let seed: Option<u64> = c.field(&obj, "", "seed");
    let backend: Option<Backend> = c.field(&obj, "", "backend");

    for key in ["dimension", "setting", "lambda_grid"] {
        if !obj.contains_key(key) {
            c.push(key, "required (no default for physical parameters)");
        }
    }
    if let Some(d) = dimension {
        if !(1..=3).contains(&d) {
            c.push("dimension", format!("must be 1, 2 or 3, got {d}"));
        }
    }
    let dim_ok = dimension.filter(|d| (1..=3).contains(d));
    let d = dim_ok.unwrap_or(1);

    let mut budgets = Budgets::defaults(d);
    match obj.get("budgets") {
        Some(Value::Object(b)) => {
            c.unknown_keys(b, "budgets", &["horizon", "n_max", "reps", "enumeration_cap", "field_radius"]);
            macro_rules! take {
                ($key:ident) => {
                    match c.field(b, "budgets", stringify!($key)) {
                        Some(v) => budgets.$key = v,
                        None if !b.contains_key(stringify!($key)) => defaulted.push(format!("budgets.{}", stringify!($key))),
                        None => {}
                    }
                };
            }
            take!(horizon);
            take!(n_max);
            take!(reps);
            take!(enumeration_cap);
            take!(field_radius);
        }
        Some(_) => c.push("budgets", "must be an object"),
        None => defaulted.push("budgets".into()),
    }
    let mut tolerances = Tolerances::defaults(d);
    match obj.get("tolerances") {
        Some(Value::Object(t)) => {
            c.unknown_keys(t, "tolerances", &["width", "delta", "velocity_step"]);
            macro_rules! take {
                ($key:ident) => {
                    match c.field(t, "tolerances", stringify!($key)) {
                        Some(v) => tolerances.$key = v,
                        None if !t.contains_key(stringify!($key)) => defaulted.push(format!("tolerances.{}", stringify!($key))),
                        None => {}
                    }
                };
            }
            take!(width);
            take!(delta);
            take!(velocity_step);
        }
        Some(_) => c.push("tolerances", "must be an object"),
        None => defaulted.push("tolerances".into()),
    }
    if budgets.n_max == 0 {
        c.push("budgets.n_max", "must be at least 1");
    }
    if budgets.horizon == 0 {
        c.push("budgets.horizon", "must be at least 1");
    }
    if budgets.reps < 2 {
        c.push("budgets.reps", "must be at least 2");
    }
    if budgets.enumeration_cap == 0 {
        c.push("budgets.enumeration_cap", "must be positive");
    }
    for (key, v) in [("width", tolerances.width), ("delta", tolerances.delta), ("velocity_step", tolerances.velocity_step)] {
        if !(v > 0.0 && v.is_finite()) {
            c.push(format!("tolerances.{key}"), format!("must be positive and finite, got {v}"));
        }
    }
    if backend.is_none() && !obj.contains_key("backend") {
        defaulted.push("backend".into());
    }

    // potential
    match (setting, &phi, &site_dist) {
        (Some(SettingKind::Annealed), None, None) => c.push("phi", "annealed runs need `phi` or `site_dist`"),
        (Some(SettingKind::Annealed), Some(_), Some(_)) => c.push("site_dist", "give either `phi` or `site_dist`, not both"),
        (Some(SettingKind::Quenched), _, None) if !obj.contains_key("site_dist") => c.push("site_dist", "quenched runs need `site_dist`"),
        (Some(SettingKind::Quenched), Some(_), _) => c.push("phi", "quenched runs are specified by `site_dist` only"),
        _ => {}
    }
    if let Some(p) = &phi {
        if let Err(e) = p.validate() {
            c.push("phi", e.to_string());
        }
    }
    if let Some(s) = &site_dist {
        if let Err(e) = s.validate() {
            c.push("site_dist", e.to_string());
        }
    }

    match &lambda_grid {
        Some(Named::Name(n)) if n != "default" => c.push("lambda_grid", format!("unknown grid name {n:?} (use \"default\" or a list)")),
        Some(Named::Values(g)) => {
            if let Err(e) = check_grid(g) {
                c.push("lambda_grid", e.to_string());
            }
        }
        _ => {}
    }
    let directions = match directions {
        Some(Named::Name(n)) if n != "default" => {
            c.push("directions", format!("unknown direction set {n:?} (use \"default\" or a list)"));
            None
        }
        Some(dirs) => Some(dirs),
        None => {
            if !obj.contains_key("directions") {
                defaulted.push("directions".into());
            }
            Some(Named::Name("default".into()))
        }
    };
    if let (Some(Named::Values(dirs)), Some(d)) = (&directions, dim_ok) {
        let pts: Vec<LatticePoint> = dirs.iter().cloned().map(LatticePoint).collect();
        for (i, x) in pts.iter().enumerate() {
            if x.dim() != d || x.is_origin() {
                c.push(format!("directions[{i}]"), format!("must be a nonzero vector of dimension {d}"));
            } else if !pts.contains(&x.neg()) {
                c.push(format!("directions[{i}]"), format!("direction set is not negation-closed: {} missing", x.neg()));
            }
        }
    }
    if let Some(d) = dim_ok {
        let mut check_dims = |key: &str, lens: Vec<usize>| {
            for (i, l) in lens.into_iter().enumerate() {
                if l != d {
                    c.push(format!("{key}[{i}]"), format!("expected dimension {d}, got {l}"));
                }
            }
        };
        if let Some(p) = &points {
            check_dims("points", p.iter().map(Vec::len).collect());
        }
        if let Some(p) = &drifts {
            check_dims("drifts", p.iter().map(Vec::len).collect());
        }
        if let Some(p) = &velocities {
            check_dims("velocities", p.iter().map(Vec::len).collect());
        }
        if let Some(p) = &ells {
            check_dims("ells", p.iter().map(Vec::len).collect());
        }
        if let Some(h) = &hyperplane {
            check_dims("hyperplane.ell", vec![h.ell.len()]);
        }
        if let Some(e) = &event {
            if let Err(err) = e.validate(d) {
                c.push("event", err.to_string());
            }
        }
    }
    for (key, vs) in [("drifts", &drifts), ("velocities", &velocities), ("ells", &ells)] {
        if let Some(vs) = vs {
            for (i, v) in vs.iter().enumerate() {
                if v.iter().any(|x| !x.is_finite()) {
                    c.push(format!("{key}[{i}]"), "entries must be finite");
                }
            }
        }
    }
    if let Some(ells) = &ells {
        for (i, v) in ells.iter().enumerate() {
            if v.iter().all(|x| *x == 0.0) {
                c.push(format!("ells[{i}]"), "must be nonzero");
            }
        }
    }
    if let Some(ns) = &ns {
        if ns.iter().any(|n| *n == 0) {
            c.push("ns", "path lengths must be at least 1");
        }
    }
    if let Some(h) = &hyperplane {
        if !(h.lambda >= 0.0 && h.lambda.is_finite()) {
            c.push("hyperplane.lambda", "must be finite and >= 0");
        }
        if h.u.iter().any(|u| !(*u > 0.0 && u.is_finite())) {
            c.push("hyperplane.u", "levels must be positive and finite");
        }
        if h.ell.iter().all(|x| *x == 0.0) {
            c.push("hyperplane.ell", "must be nonzero");
        }
    }

    if !c.errors.is_empty() {
        return Err(c.errors);
    }
    Ok(RunConfig {
        dimension: dimension.expect("checked"),
        setting: setting.expect("checked"),
        phi,
        site_dist,
        lambda_grid: lambda_grid.expect("checked"),
        directions: directions.expect("checked"),
        points,
        drifts,
        velocities,
        ells,
        ns,
        event,
        hyperplane,
        seed,
        backend: backend.unwrap_or_default(),
        budgets,
        tolerances,
        defaulted,
    })
}

impl RunConfig {
    pub fn lambdas(&self) -> Vec<f64> {
        match &self.lambda_grid {
            Named::Values(g) => g.clone(),
            Named::Name(_) => default_lambda_grid(),
        }
    }

    pub fn direction_points(&self) -> Vec<LatticePoint> {
        match &self.directions {
            Named::Values(d) => d.iter().cloned().map(LatticePoint).collect(),
            Named::Name(_) => default_directions(self.dimension),
        }
    }

    /// φ of the annealed problem.
    pub fn annealed_phi(&self) -> Option<OneSitePotential> {
        match (self.phi, self.site_dist) {
            (Some(p), _) => Some(p),
            (None, Some(dist)) => Some(OneSitePotential::FromDistribution { dist }),
            _ => None,
        }
    }

    /// Checks the keys a subcommand needs, again collecting every failure.
    pub fn require_for(&self, sub: Subcommand) -> Result<(), Vec<ConfigError>> {
        let mut errors = Vec::new();
        let mut need = |present: bool, key: &str, why: &str| {
            if !present {
                errors.push(ConfigError { path: key.into(), message: format!("required by `{}` ({why})", sub.name()) });
            }
        };
        let quenched = self.setting == SettingKind::Quenched;
        match sub {
            Subcommand::TwoPoint => need(self.points.is_some(), "points", "target sites"),
            Subcommand::Rate => need(self.velocities.is_some(), "velocities", "evaluation points"),
            Subcommand::Dual => need(self.ells.is_some(), "ells", "dual directions"),
            Subcommand::Phase => need(self.drifts.is_some(), "drifts", "drift grid"),
            Subcommand::Hyperplane => need(self.hyperplane.is_some(), "hyperplane", "direction, λ and levels"),
            Subcommand::Partition => {
                need(self.drifts.is_some(), "drifts", "drift grid");
                need(self.ns.is_some(), "ns", "path lengths");
            }
            Subcommand::Scan => {
                need(self.drifts.is_some(), "drifts", "drift grid");
                need(self.ns.is_some(), "ns", "path lengths");
                need(self.event.is_some(), "event", "velocity event");
            }
            Subcommand::Field => need(self.site_dist.is_some(), "site_dist", "site law"),
            Subcommand::Lyapunov | Subcommand::Verify => {}
        }
        let seeded = quenched || sub == Subcommand::Field;
        if seeded && sub != Subcommand::Verify {
            need(self.seed.is_some(), "seed", "random fields need a seed; pass it in the config or with --seed");
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}
