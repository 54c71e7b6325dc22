//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_FAILURES` still print FAIL but do not fail
//! the binary; any other FAIL does.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use anyhow::{ensure, Result};
use fep_cli::checks::{self, run_check, Outcome};

/// `a₁` with labels fixed at site 0 is an eigenfunction only at
/// `(N, k) = (6, 4)` among `N <= 14`.
const KNOWN_FAILURES: &[u32] = &[6];

const SEED: u64 = 20_240_601;

fn fep(args: &[&str], out: &Path) -> Result<()> {
    let status = Command::new(env!("CARGO_BIN_EXE_fep"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .status()?;
    ensure!(status.success(), "fep {args:?} exited with {status}");
    Ok(())
}

/// Runs each job twice into fresh directories, then once more from the
/// first run's manifest, and compares every CSV byte for byte.
fn determinism() -> Result<(bool, String)> {
    let jobs: [&[&str]; 5] = [
        &["exact", "tv", "--family", "fep-seg", "--n", "6", "--k", "4", "--p", "0.6"],
        &["simulate", "path", "--n", "20", "--k", "13", "--p", "0.7", "--horizon", "50", "--seed", "3"],
        &["simulate", "circle", "--n", "20", "--k", "13", "--horizon", "50", "--seed", "3"],
        &["hit", "--start", "minus", "--n", "16", "--k", "11", "--reps", "40", "--seed", "9"],
        &["sweep", "afep-slope", "--gaps", "3,4,5", "--reps", "40", "--seed", "9"],
    ];
    let root = tempfile::tempdir()?;
    let mut compared = 0;
    let mut differ = Vec::new();
    for (i, job) in jobs.iter().enumerate() {
        let dirs: Vec<_> = (0..3).map(|r| root.path().join(format!("{i}-{r}"))).collect();
        fep(job, &dirs[0])?;
        fep(job, &dirs[1])?;
        let manifest = dirs[0].join("manifest.json");
        let sub: Vec<&str> = job.iter().take_while(|a| !a.starts_with("--")).copied().collect();
        let mut again = sub.clone();
        again.extend(["--config", manifest.to_str().expect("utf-8 path")]);
        fep(&again, &dirs[2])?;
        for entry in std::fs::read_dir(&dirs[0])? {
            let name = entry?.file_name();
            if !name.to_string_lossy().ends_with(".csv") {
                continue;
            }
            let a = std::fs::read(dirs[0].join(&name))?;
            for d in &dirs[1..] {
                compared += 1;
                if std::fs::read(d.join(&name))? != a {
                    differ.push(format!("{} {}", job.join(" "), name.to_string_lossy()));
                }
            }
        }
    }
    Ok((compared > 0 && differ.is_empty(), format!("{compared} CSV comparisons over {} jobs, differing: {differ:?}", jobs.len())))
}

fn main() {
    let criteria: Vec<(u32, &str, Box<dyn FnOnce() -> Result<(bool, String)>>)> = vec![
        (1, "ergodic counts, N <= 16", Box::new(|| checks::counting(16))),
        (2, "bijections, N <= 12", Box::new(|| checks::bijections(12))),
        (3, "monotone coupling at (12, 8)", Box::new(|| checks::monotone_coupling(12, 8, 1000, 100.0, SEED))),
        (4, "generator intertwining, N <= 12", Box::new(|| checks::intertwining(12))),
        (5, "stationary laws", Box::new(|| checks::stationarity(12))),
        (6, "first Fourier mode on G, N <= 14", Box::new(|| checks::eigenfunction(14))),
        (7, "hitting-time identity at (14, 9)", Box::new(|| checks::hitting_identity(14, 9, 10_000, 1_000, SEED))),
        (8, "coupling bound, N <= 10", Box::new(|| checks::coupling_bound(10, 10_000, SEED))),
        (
            9,
            "symmetric coupling-time scaling",
            Box::new(|| checks::sfep_scaling(&[64, 128, 256], &[200, 120, 60], SEED).map(|(p, d, _)| (p, d))),
        ),
        (
            10,
            "asymmetric exponential rate",
            Box::new(|| checks::afep_slope(0.7, &[4, 6, 8, 10], 3, 400, SEED).map(|(p, d, _)| (p, d))),
        ),
        (
            11,
            "circle hitting scaling",
            Box::new(|| checks::circle_scaling(&[32, 64, 128], 0.75, 1000, SEED).map(|(p, d, _)| (p, d))),
        ),
        (12, "rare-set hitting bound", Box::new(|| checks::aldous_brown(6, 6))),
        (13, "equivalence of ensembles", Box::new(checks::equivalence)),
        (14, "byte-identical CLI reruns", Box::new(determinism)),
    ];
    let mut stdout = std::io::stdout();
    let mut outcomes: Vec<Outcome> = Vec::new();
    for (id, name, f) in criteria {
        let o = run_check(id, name, f);
        let mut line = o.line();
        if !o.pass && KNOWN_FAILURES.contains(&id) {
            line.push_str(" [known failure]");
        }
        let _ = writeln!(stdout, "{line}");
        let _ = stdout.flush();
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let unexpected: Vec<u32> = outcomes.iter().filter(|o| !o.pass && !KNOWN_FAILURES.contains(&o.id)).map(|o| o.id).collect();
    let known: Vec<u32> = outcomes.iter().filter(|o| !o.pass && KNOWN_FAILURES.contains(&o.id)).map(|o| o.id).collect();
    let _ = writeln!(stdout, "acceptance: {passed}/{} PASS; known failures {known:?}; unexpected failures {unexpected:?}", outcomes.len());
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
