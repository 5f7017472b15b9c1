//! Subcommand execution. Results are assembled in memory, then written
//! together with `report.json`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use potwalk_core::convex_phase::{point_to_hyperplane, Family, RateFunctionModel};
use potwalk_core::exec::Exec;
use potwalk_core::lattice::LatticePoint;
use potwalk_core::lyapunov::{
    bank_points, beta_models, estimate_alpha, AnnealedBank, HorizonSchedule, LyapunovEstimate, NormBrackets,
};
use potwalk_core::path_measures::{
    annealed_endpoint_weights, ballisticity_scan, ldp_scan, quenched_endpoint_weights, EndpointWeights, ScanResult,
    SCAN_FORMAT_VERSION,
};
use potwalk_core::potential::{OneSitePotential, PotentialField, SiteDistribution, FIELD_FORMAT_VERSION};
use potwalk_core::two_point::{
    annealed_profile, bracket_from_profile, quenched_profile, quenched_two_point, Backend, Setting, Target, TwoPointConfig,
    TwoPointResult,
};
use potwalk_core::verify::run_suite;
use potwalk_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig, SettingKind};
use crate::{exit, Subcommand};

pub const REPORT_FORMAT_VERSION: u32 = 1;
/// Seed of the `verify` fixtures when the config gives none.
pub const DEFAULT_VERIFY_SEED: u64 = 42;

#[derive(Debug)]
pub enum CliError {
    Config(Vec<ConfigError>),
    Compute { context: String, error: Error },
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => exit::VALIDATION,
            CliError::Compute { error, .. } => error_code(error),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(errs) => {
                writeln!(f, "invalid config ({} problem{}):", errs.len(), if errs.len() == 1 { "" } else { "s" })?;
                for e in errs {
                    writeln!(f, "  {e}")?;
                }
                Ok(())
            }
            CliError::Compute { context, error } => write!(f, "{context}: {error}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::NeedsRefinement(_) => exit::BUDGET,
        Error::Inconsistent(_) => exit::INCONSISTENT,
        _ => exit::VALIDATION,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "error:invalid_input",
        Error::InvalidPotential { .. } => "error:invalid_potential",
        Error::InvalidDistribution(_) => "error:invalid_distribution",
        Error::BudgetExceeded { .. } => "error:budget_exceeded",
        Error::OutsideBox { .. } => "error:outside_box",
        Error::GridTooShort { .. } => "error:grid_too_short",
        Error::NeedsRefinement(_) => "error:needs_refinement",
        Error::Precondition(_) => "error:precondition",
        Error::Inconsistent(_) => "error:inconsistent",
    }
}

fn at(context: impl Into<String>) -> impl FnOnce(Error) -> CliError {
    let context = context.into();
    move |error| CliError::Compute { context, error }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub exec: Exec,
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Rows that failed, with their config location; their outputs carry an
    /// error flag.
    pub row_errors: Vec<(String, Error)>,
    /// Failed invariants (`verify` only).
    pub failed_checks: Vec<String>,
    pub exit_code: i32,
    pub lines: Vec<String>,
}

struct Output {
    files: Vec<(String, Vec<u8>)>,
    tasks: usize,
    row_errors: Vec<(String, Error)>,
    failed_checks: Vec<String>,
    lines: Vec<String>,
}

impl Output {
    fn new() -> Self {
        Output { files: Vec::new(), tasks: 0, row_errors: Vec::new(), failed_checks: Vec::new(), lines: Vec::new() }
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in &rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.lines.push(format!("{name}: {} rows", rows.len()));
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn vector(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn point(x: &LatticePoint) -> String {
    x.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

fn setting_name(cfg: &RunConfig) -> &'static str {
    match cfg.setting {
        SettingKind::Annealed => "annealed",
        SettingKind::Quenched => "quenched",
    }
}

fn two_point_config(cfg: &RunConfig, exec: Exec) -> TwoPointConfig {
    TwoPointConfig {
        horizon: cfg.budgets.horizon,
        budget: cfg.budgets.enumeration_cap as u128,
        width_tolerance: cfg.tolerances.width,
        backend: cfg.backend,
        exec,
    }
}

fn phi_of(cfg: &RunConfig) -> Result<OneSitePotential, CliError> {
    cfg.annealed_phi().ok_or_else(|| CliError::Config(vec![ConfigError { path: "phi".into(), message: "missing".into() }]))
}

fn dist_of(cfg: &RunConfig) -> Result<SiteDistribution, CliError> {
    cfg.site_dist.ok_or_else(|| CliError::Config(vec![ConfigError { path: "site_dist".into(), message: "missing".into() }]))
}

fn seed_of(cfg: &RunConfig) -> u64 {
    cfg.seed.expect("checked by require_for")
}

fn field_of(cfg: &RunConfig, radius: usize) -> Result<PotentialField, CliError> {
    PotentialField::sample(cfg.dimension, radius, dist_of(cfg)?, seed_of(cfg)).map_err(at("site_dist"))
}

/// Runs one subcommand and writes its outputs under `opts.out`.
pub fn run(sub: Subcommand, cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    cfg.require_for(sub).map_err(CliError::Config)?;
    let mut out = Output::new();
    match sub {
        Subcommand::TwoPoint => two_point_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Lyapunov => lyapunov_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Rate => rate_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Dual => dual_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Phase => phase_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Hyperplane => hyperplane_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Partition => partition_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Scan => scan_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Verify => verify_cmd(cfg, opts.exec, &mut out)?,
        Subcommand::Field => field_cmd(cfg, &mut out)?,
    }
    let exit_code = if let Some((_, e)) = out.row_errors.first() {
        error_code(e)
    } else if !out.failed_checks.is_empty() {
        exit::INCONSISTENT
    } else {
        exit::OK
    };
    let mut defaults = cfg.defaulted.clone();
    if sub == Subcommand::Verify && cfg.seed.is_none() {
        defaults.push("seed".into());
    }
    let report = json!({
        "format_version": REPORT_FORMAT_VERSION,
        "subcommand": sub.name(),
        "config": cfg,
        "defaults_applied": defaults,
        "outputs": out.files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "tasks": out.tasks,
        "row_errors": out.row_errors.iter().map(|(c, e)| json!({ "at": c, "error": e.to_string() })).collect::<Vec<_>>(),
        "failed_checks": out.failed_checks,
        "exit_code": exit_code,
    });
    out.json("report.json", &report)?;
    let files = write_all(&opts.out, &out.files)?;
    Ok(RunSummary { files, row_errors: out.row_errors, failed_checks: out.failed_checks, exit_code, lines: out.lines })
}

fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    files
        .iter()
        .map(|(name, bytes)| {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            Ok(p)
        })
        .collect()
}

fn two_point_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let points: Vec<LatticePoint> = cfg.points.as_ref().expect("checked").iter().cloned().map(LatticePoint).collect();
    let lambdas = cfg.lambdas();
    let tp = two_point_config(cfg, Exec::Sequential);
    // per point: one bracket per λ, or the error that stopped it
    let (spec, per_point): (String, Vec<Result<Vec<TwoPointResult>, Error>>) = match cfg.setting {
        SettingKind::Annealed => {
            let phi = phi_of(cfg)?;
            let setting = Setting::Annealed(phi);
            let res = exec.map(points.clone(), |x| {
                let target = Target::Point(x);
                let profile = annealed_profile(cfg.dimension, &target, &phi, &TwoPointConfig { exec, ..tp })?;
                lambdas.iter().map(|l| bracket_from_profile(&profile, &setting, &target, *l, tp.width_tolerance)).collect()
            });
            (setting.label(), res)
        }
        SettingKind::Quenched => {
            let field = field_of(cfg, cfg.budgets.field_radius)?;
            let setting = Setting::Quenched(&field);
            let res = exec.map(points.clone(), |x| {
                if matches!(tp.backend, Backend::Transfer | Backend::Enumeration) {
                    let target = Target::Point(x.clone());
                    if !field.contains(&x) {
                        return Err(Error::OutsideBox { site: x.to_string(), radius: field.radius() });
                    }
                    let profile = quenched_profile(&field, &target, &tp)?;
                    lambdas.iter().map(|l| bracket_from_profile(&profile, &setting, &target, *l, tp.width_tolerance)).collect()
                } else {
                    lambdas.iter().map(|l| quenched_two_point(&x, *l, &field, &tp)).collect()
                }
            });
            (format!("{}:seed={}", setting.label(), seed_of(cfg)), res)
        }
    };
    out.tasks = points.len() * lambdas.len();
    for (i, r) in per_point.iter().enumerate() {
        if let Err(e) = r {
            out.row_errors.push((format!("points[{i}]"), e.clone()));
        }
    }
    let mut rows = Vec::new();
    for (k, l) in lambdas.iter().enumerate() {
        for (x, r) in points.iter().zip(&per_point) {
            let row = match r {
                Ok(v) => {
                    let b = v[k].bracket;
                    vec![num(b.lower), num(b.upper), num(b.width()), b.flag.as_str().to_string(), v[k].horizon.to_string()]
                }
                Err(e) => vec!["NaN".into(), "NaN".into(), "NaN".into(), error_kind(e).into(), String::new()],
            };
            rows.push(vec![
                cfg.dimension.to_string(),
                num(*l),
                point(x),
                spec.clone(),
                row[4].clone(),
                row[0].clone(),
                row[1].clone(),
                row[2].clone(),
                row[3].clone(),
            ]);
        }
    }
    out.csv("two_point.csv", &["d", "lambda", "x", "potential_spec", "horizon", "lower", "upper", "width", "flag"], rows)
}

/// Per-λ norm brackets over the configured directions.
fn norm_brackets(cfg: &RunConfig, exec: Exec) -> Result<Vec<NormBrackets>, CliError> {
    let dirs = cfg.direction_points();
    let lambdas = cfg.lambdas();
    let n_max = cfg.budgets.n_max;
    match cfg.setting {
        SettingKind::Annealed => {
            let phi = phi_of(cfg)?;
            let tp = two_point_config(cfg, exec);
            let bank = AnnealedBank::build(cfg.dimension, &phi, &bank_points(&dirs, n_max), &HorizonSchedule::default(), &tp)
                .map_err(at("phi"))?;
            beta_models(&bank, &dirs, &lambdas, n_max, cfg.tolerances.width, exec).map_err(at("lambda_grid"))
        }
        SettingKind::Quenched => {
            let dist = dist_of(cfg)?;
            let tp = two_point_config(cfg, exec);
            lambdas
                .iter()
                .enumerate()
                .map(|(k, &l)| {
                    let est = dirs
                        .iter()
                        .map(|x| estimate_alpha(x, l, &dist, n_max, cfg.budgets.reps, seed_of(cfg), &tp))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(at(format!("lambda_grid[{k}]")))?;
                    NormBrackets::from_estimates(l, est).map_err(at("directions"))
                })
                .collect()
        }
    }
}

fn growth(cfg: &RunConfig) -> f64 {
    match cfg.setting {
        SettingKind::Annealed => cfg.annealed_phi().map_or(f64::INFINITY, |p| p.phi1()),
        SettingKind::Quenched => cfg.site_dist.map_or(f64::INFINITY, |d| d.mean()),
    }
}

fn rate_model(cfg: &RunConfig, exec: Exec) -> Result<(Vec<NormBrackets>, RateFunctionModel), CliError> {
    let br = norm_brackets(cfg, exec)?;
    let model = RateFunctionModel::from_brackets(setting_name(cfg), growth(cfg), &br).map_err(at("lambda_grid"))?;
    Ok((br, model))
}

fn estimate_rows(cfg: &RunConfig, e: &LyapunovEstimate, rows: &mut Vec<Vec<String>>) {
    let base = |n: String, lower: f64, upper: f64, mean: f64, se: f64, flag: &str| {
        vec![
            e.setting.to_string(),
            cfg.dimension.to_string(),
            num(e.lambda),
            point(&e.direction),
            n,
            num(lower),
            num(upper),
            num(mean),
            num(se),
            flag.to_string(),
        ]
    };
    for p in &e.per_n {
        rows.push(base(p.n.to_string(), p.bracket.lower, p.bracket.upper, p.mean, p.se, p.bracket.flag.as_str()));
    }
    let se = e.per_n.last().map_or(0.0, |p| p.se);
    rows.push(base("inf".into(), e.bracket.lower, e.bracket.upper, e.bracket.mid(), se, e.bracket.flag.as_str()));
}

fn model_json(m: &potwalk_core::lyapunov::NormModel) -> Value {
    serde_json::from_str(&m.to_json()).expect("norm model JSON")
}

fn lyapunov_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let br = norm_brackets(cfg, exec)?;
    let mut rows = Vec::new();
    for b in &br {
        for e in &b.estimates {
            estimate_rows(cfg, e, &mut rows);
        }
    }
    out.tasks = br.iter().map(|b| b.estimates.len()).sum();
    out.csv("lyapunov.csv", &["setting", "d", "lambda", "direction", "n", "lower", "upper", "mean", "se", "flag"], rows)?;
    let models = json!({
        "format_version": REPORT_FORMAT_VERSION,
        "setting": setting_name(cfg),
        "lower": br.iter().map(|b| model_json(&b.lower)).collect::<Vec<_>>(),
        "upper": br.iter().map(|b| model_json(&b.upper)).collect::<Vec<_>>(),
    });
    out.json("norm_models.json", &models)
}

fn rate_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let (_, model) = rate_model(cfg, exec)?;
    let xs = cfg.velocities.as_ref().expect("checked");
    let res = exec.map(xs.clone(), |x| model.rate_value(&x));
    let mut rows = Vec::new();
    for (i, (x, r)) in xs.iter().zip(res).enumerate() {
        rows.push(match r {
            Ok(v) => vec![
                vector(x),
                num(v.lower),
                num(v.mid),
                num(v.upper),
                num(v.argmax_lambda),
                v.lower_estimate.to_string(),
                "ok".into(),
            ],
            Err(e) => {
                let row = vec![vector(x), "NaN".into(), "NaN".into(), "NaN".into(), "NaN".into(), "false".into(), error_kind(&e).into()];
                out.row_errors.push((format!("velocities[{i}]"), e));
                row
            }
        });
    }
    out.tasks = xs.len();
    out.csv("rate.csv", &["x", "lower", "mid", "upper", "argmax_lambda", "lower_estimate", "flag"], rows)
}

fn dual_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let (_, model) = rate_model(cfg, exec)?;
    let mut rows = Vec::new();
    for (i, ell) in cfg.ells.as_ref().expect("checked").iter().enumerate() {
        for &l in model.lambdas() {
            let d = |f| model.dual_norm(ell, l, f).map_err(at(format!("ells[{i}]")));
            // the larger norm has the smaller dual
            rows.push(vec![vector(ell), num(l), num(d(Family::Upper)?), num(d(Family::Mid)?), num(d(Family::Lower)?)]);
            out.tasks += 1;
        }
    }
    out.csv("dual.csv", &["ell", "lambda", "dual_min", "dual_mid", "dual_max"], rows)
}

fn phase_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let (_, model) = rate_model(cfg, exec)?;
    let hs = cfg.drifts.as_ref().expect("checked");
    let step = cfg.tolerances.velocity_step;
    let res = exec.map(hs.clone(), |h| model.phase_report(&h, Some(step)));
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (i, (h, r)) in hs.iter().zip(res).enumerate() {
        match r {
            Ok(r) => {
                rows.push(vec![
                    vector(h),
                    num(r.dual0),
                    r.regime.as_str().into(),
                    r.lambda_h.map(num).unwrap_or_default(),
                    num(r.free_energy),
                ]);
                reports.push(r);
            }
            Err(e) => {
                rows.push(vec![vector(h), "NaN".into(), error_kind(&e).into(), String::new(), "NaN".into()]);
                out.row_errors.push((format!("drifts[{i}]"), e));
            }
        }
    }
    out.tasks = hs.len();
    out.csv("phase.csv", &["h", "dual0", "regime", "lambda_h", "free_energy"], rows)?;
    out.json("phase.json", &json!({ "format_version": potwalk_core::convex_phase::PHASE_FORMAT_VERSION, "reports": reports }))
}

fn hyperplane_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.hyperplane.as_ref().expect("checked");
    let tp = two_point_config(cfg, exec);
    // the norm model is only needed when λ is a grid node
    let node = cfg.lambdas().iter().position(|l| *l == spec.lambda);
    let model = match node {
        Some(k) => Some(rate_model(cfg, exec)?.1.family(Family::Mid).models()[k].clone()),
        None => None,
    };
    let field;
    let setting = match cfg.setting {
        SettingKind::Annealed => Setting::Annealed(phi_of(cfg)?),
        SettingKind::Quenched => {
            field = field_of(cfg, cfg.budgets.field_radius)?;
            Setting::Quenched(&field)
        }
    };
    let rep = point_to_hyperplane(&spec.ell, spec.lambda, &spec.u, &setting, model.as_ref(), &tp).map_err(at("hyperplane"))?;
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.u),
                num(r.bracket.lower),
                num(r.bracket.upper),
                r.bracket.flag.as_str().into(),
                r.oracle.into(),
                r.horizon.to_string(),
                rep.target.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    out.tasks = rep.rows.len();
    out.csv("hyperplane.csv", &["u", "lower", "upper", "flag", "oracle", "horizon", "target"], rows)?;
    out.json("hyperplane.json", &rep)
}

fn weights_for(cfg: &RunConfig, n: usize, field: Option<&PotentialField>, exec: Exec) -> Result<EndpointWeights, Error> {
    let cap = cfg.budgets.enumeration_cap as u128;
    match (cfg.setting, field) {
        (SettingKind::Quenched, Some(f)) => quenched_endpoint_weights(f, n, cfg.backend, cap, exec),
        _ => annealed_endpoint_weights(cfg.dimension, &cfg.annealed_phi().expect("checked"), n, cfg.backend, cap, exec),
    }
}

fn scan_rows(results: &[ScanResult]) -> Vec<Vec<String>> {
    results
        .iter()
        .flat_map(|r| r.rows.iter())
        .map(|r| {
            vec![
                r.setting.clone(),
                r.d.to_string(),
                r.n.to_string(),
                vector(&r.h),
                num(r.z_log_over_n),
                num(r.mean_speed),
                r.event.clone(),
                num(r.event_log_prob_over_n),
            ]
        })
        .collect()
}

const SCAN_HEADER: [&str; 8] = ["setting", "d", "n", "h", "Z_log_over_n", "mean_speed", "event", "event_log_prob_over_n"];

fn quenched_field(cfg: &RunConfig) -> Result<Option<PotentialField>, CliError> {
    match cfg.setting {
        SettingKind::Quenched => {
            let n = cfg.ns.as_ref().expect("checked").iter().copied().max().unwrap_or(1);
            Ok(Some(field_of(cfg, n.max(cfg.budgets.field_radius))?))
        }
        SettingKind::Annealed => {
            phi_of(cfg)?;
            Ok(None)
        }
    }
}

fn partition_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let field = quenched_field(cfg)?;
    let hs = cfg.drifts.as_ref().expect("checked");
    let mut results = Vec::new();
    for (i, &n) in cfg.ns.as_ref().expect("checked").iter().enumerate() {
        let w = weights_for(cfg, n, field.as_ref(), exec).map_err(at(format!("ns[{i}]")))?;
        results.push(ballisticity_scan(hs, &w, cfg.tolerances.delta, None).map_err(at("tolerances.delta"))?);
        out.tasks += hs.len();
    }
    out.csv("partition.csv", &SCAN_HEADER, scan_rows(&results))?;
    out.json("partition.json", &json!({ "format_version": SCAN_FORMAT_VERSION, "results": results }))
}

fn scan_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let field = quenched_field(cfg)?;
    let event = cfg.event.as_ref().expect("checked");
    let ns = cfg.ns.as_ref().expect("checked");
    // targets need the rate function; quenched scans report the sequence only
    let model = match cfg.setting {
        SettingKind::Annealed => Some(rate_model(cfg, exec)?.1),
        SettingKind::Quenched => None,
    };
    let mut results = Vec::new();
    for (i, h) in cfg.drifts.as_ref().expect("checked").iter().enumerate() {
        let r = ldp_scan(h, ns, event, |n| weights_for(cfg, n, field.as_ref(), Exec::Sequential), model.as_ref(), exec)
            .map_err(at(format!("drifts[{i}]")))?;
        out.tasks += ns.len();
        results.push(r);
    }
    out.csv("scan.csv", &SCAN_HEADER, scan_rows(&results))?;
    out.json("scan.json", &json!({ "format_version": SCAN_FORMAT_VERSION, "results": results }))
}

fn verify_cmd(cfg: &RunConfig, exec: Exec, out: &mut Output) -> Result<(), CliError> {
    let seed = cfg.seed.unwrap_or(DEFAULT_VERIFY_SEED);
    let report = run_suite(seed, exec).map_err(at("verify"))?;
    for v in &report.verdicts {
        out.lines.push(v.line());
        if !v.passed() {
            out.failed_checks.push(format!("{} {}", v.id, v.name));
        }
    }
    out.tasks = report.verdicts.iter().map(|v| v.checks).sum();
    out.json("verify.json", &report)
}

fn field_cmd(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let field = field_of(cfg, cfg.budgets.field_radius)?;
    let header = field.header().expect("sampled field");
    let again = PotentialField::from_header(&header).map_err(at("site_dist"))?;
    let reproducible = again.values() == field.values();
    if !reproducible {
        out.failed_checks.push("field regeneration".into());
    }
    let finite: Vec<f64> = field.values().iter().copied().filter(|v| v.is_finite()).collect();
    let sum: f64 = finite.iter().sum();
    let derived = json!({
        "site_count": field.site_count(),
        "zero_fraction": field.zero_fraction(),
        "infinite_sites": field.site_count() - finite.len(),
        "finite_sum": sum,
        "finite_mean": if finite.is_empty() { Value::Null } else { json!(sum / finite.len() as f64) },
        "origin_value": field.value_at(&vec![0; cfg.dimension]).map_err(at("budgets.field_radius"))?,
        "reproducible": reproducible,
    });
    out.tasks = 1;
    out.lines.push(format!("field: {} sites, zero fraction {}", field.site_count(), field.zero_fraction()));
    out.json("field.json", &json!({ "format_version": FIELD_FORMAT_VERSION, "header": header, "derived": derived }))
}
