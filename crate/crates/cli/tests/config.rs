use potwalk_cli::config::{Named, SettingKind};
use potwalk_cli::{parse_config, Subcommand};

const MINIMAL: &str = r#"{
    "dimension": 1,
    "setting": "annealed",
    "phi": { "kind": "hard_obstacle", "gamma": 1.0 },
    "lambda_grid": "default"
}"#;

fn errors(text: &str) -> Vec<String> {
    parse_config(text).unwrap_err().into_iter().map(|e| e.to_string()).collect()
}

#[test]
fn minimal_annealed_config_is_accepted_with_echoed_defaults() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.setting, SettingKind::Annealed);
    assert_eq!(cfg.lambda_grid, Named::Name("default".into()));
    assert_eq!(cfg.lambdas()[0], 0.0);
    assert_eq!(cfg.budgets.n_max, 8);
    for key in ["budgets", "tolerances", "backend", "directions"] {
        assert!(cfg.defaulted.iter().any(|d| d == key), "{key} not reported as defaulted: {:?}", cfg.defaulted);
    }
}

#[test]
fn echo_round_trips() {
    let cfg = parse_config(MINIMAL).unwrap();
    let again = parse_config(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(again.defaulted, Vec::<String>::new());
    assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&cfg).unwrap());
    let full = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/quenched_2d.json")).unwrap();
    let a = parse_config(&full).unwrap();
    let b = parse_config(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(serde_json::to_value(&a).unwrap(), serde_json::to_value(&b).unwrap());
}

#[test]
fn linear_phi_names_the_sublinearity_test() {
    let text = MINIMAL.replace(r#"{ "kind": "hard_obstacle", "gamma": 1.0 }"#, r#"{ "kind": "power_law", "c": 0.5, "a": 1.0 }"#);
    let e = errors(&text);
    assert_eq!(e.len(), 1);
    assert!(e[0].starts_with("phi:") && e[0].contains("sublinearity"), "{e:?}");
}

#[test]
fn degenerate_bernoulli_is_not_trivially_distributed() {
    let text = r#"{ "dimension": 1, "setting": "quenched", "lambda_grid": "default", "seed": 1,
        "site_dist": { "kind": "bernoulli_zero", "p": 1.0, "v": 2.0 } }"#;
    let e = errors(text);
    assert!(e.iter().any(|m| m.starts_with("site_dist:") && m.contains("not trivially distributed")), "{e:?}");
}

#[test]
fn every_problem_is_reported() {
    let text = r#"{ "dimension": 2, "setting": "annealed", "lambda_grid": [0.0, 1.0, 0.5],
        "phi": { "kind": "hard_obstacle", "gamma": 1.0, "extra": 1 },
        "points": [[1, 0], [1]], "typo": true,
        "budgets": { "reps": 1, "horizon": "long" },
        "tolerances": { "width": -1.0 } }"#;
    let e = errors(text);
    for needle in ["typo: unknown key", "phi:", "lambda_grid:", "points[1]:", "budgets.reps:", "budgets.horizon:", "tolerances.width:"] {
        assert!(e.iter().any(|m| m.starts_with(needle)), "missing {needle}: {e:?}");
    }
}

#[test]
fn physical_parameters_have_no_defaults() {
    let e = errors(r#"{ "setting": "annealed" }"#);
    for key in ["dimension:", "lambda_grid:", "phi:"] {
        assert!(e.iter().any(|m| m.starts_with(key)), "missing {key}: {e:?}");
    }
    assert!(!errors(r#"[1, 2]"#).is_empty());
    assert!(errors("{ not json").iter().any(|m| m.contains("not valid JSON")));
}

#[test]
fn subcommand_requirements_are_collected() {
    let cfg = parse_config(MINIMAL).unwrap();
    let e = cfg.require_for(Subcommand::Scan).unwrap_err();
    let paths: Vec<&str> = e.iter().map(|e| e.path.as_str()).collect();
    assert_eq!(paths, ["drifts", "ns", "event"]);
    assert!(cfg.require_for(Subcommand::Lyapunov).is_ok());
    let q = r#"{ "dimension": 1, "setting": "quenched", "lambda_grid": "default",
        "site_dist": { "kind": "exponential", "rate": 2.0 } }"#;
    let cfg = parse_config(q).unwrap();
    assert_eq!(cfg.require_for(Subcommand::Field).unwrap_err()[0].path, "seed");
}
