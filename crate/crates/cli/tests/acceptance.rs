//! One PASS/FAIL line per acceptance criterion.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use potwalk_core::verify::{self, Fixtures, Verdict};
use potwalk_core::Exec;

const SEED: u64 = 42;

/// Pinned tolerance per criterion; 0 means an exact ordering or zero-violation check.
const PINNED: [(u32, f64); 11] = [
    (1, 1e-12),
    (2, 1e-12),
    (3, 1e-12),
    (4, 1e-12),
    (5, 1e-12),
    (6, 1e-9),
    // gap divided by ten times the combined model tolerance
    (7, 1.0),
    (8, 1e-9),
    (9, 0.0),
    (10, 0.0),
    (11, 0.0),
];

fn report(id: u32, name: &str, ok: bool, detail: &str) -> bool {
    println!("criterion {id:>2} {name:<28} {} {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn judged(v: &Verdict) -> bool {
    let tol = PINNED.iter().find(|(id, _)| *id == v.id).map(|p| p.1).unwrap();
    let pinned = v.tolerance == tol;
    let ok = v.passed() && v.violations == 0 && pinned;
    let detail = if pinned {
        format!("checks={} worst={:.3e} tol={tol:.0e} {}", v.checks, v.worst, v.detail)
    } else {
        format!("tolerance {} differs from pinned {tol}", v.tolerance)
    };
    report(v.id, v.name, ok, &detail)
}

fn outputs_match(a: &Path, b: &Path) -> Result<usize, String> {
    let mut n = 0;
    for entry in fs::read_dir(a).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        let x = fs::read(a.join(&name)).map_err(|e| e.to_string())?;
        let y = fs::read(b.join(&name)).map_err(|e| format!("{name:?}: {e}"))?;
        if x != y {
            return Err(format!("{name:?} differs"));
        }
        n += 1;
    }
    Ok(n)
}

/// Every subcommand on both shipped configs, at 1 and 8 threads.
fn determinism() -> bool {
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let subs = ["two-point", "lyapunov", "rate", "dual", "phase", "hyperplane", "partition", "scan", "field"];
    let mut files = 0;
    for cfg in ["default.json", "quenched_2d.json"] {
        for sub in subs {
            let mut codes = Vec::new();
            for threads in ["1", "8"] {
                let out = tmp.path().join(format!("{cfg}-{sub}-{threads}"));
                let status = Command::new(env!("CARGO_BIN_EXE_potwalk"))
                    .args([sub, "--config"])
                    .arg(configs.join(cfg))
                    .arg("--out")
                    .arg(&out)
                    .args(["--threads", threads, "--seed", "7"])
                    .output()
                    .unwrap()
                    .status;
                codes.push(status.code());
            }
            if codes[0] != codes[1] {
                return report(12, "determinism", false, &format!("{cfg} {sub}: exit codes {codes:?}"));
            }
            let a = tmp.path().join(format!("{cfg}-{sub}-1"));
            let b = tmp.path().join(format!("{cfg}-{sub}-8"));
            if !a.exists() {
                continue;
            }
            match outputs_match(&a, &b) {
                Ok(n) => files += n,
                Err(e) => return report(12, "determinism", false, &format!("{cfg} {sub}: {e}")),
            }
        }
    }
    report(12, "determinism", files > 0, &format!("{files} output files byte-identical at --threads 1 and 8"))
}

#[test]
fn acceptance() {
    let fx = Fixtures::build(SEED, Exec::Parallel).expect("fixtures");
    let checks = verify::checks();
    let mut passed = Vec::new();
    for check in &checks[..11] {
        passed.push(match check(&fx) {
            Ok(v) => judged(&v),
            Err(e) => report(passed.len() as u32 + 1, "error", false, &e.to_string()),
        });
    }
    passed.push(determinism());
    let failed: Vec<usize> = passed.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    println!("{} of {} criteria pass", passed.len() - failed.len(), passed.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
