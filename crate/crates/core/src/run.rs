//! Command layer behind the `nls-lab` binary: run orchestration, output
//! management, manifests, and the exit-code contract.
//!
//! Exit codes: 0 success, 1 configuration or I/O failure, 2 blow-up
//! signal, 3 Picard non-convergence, 4 violated inequality.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::Error;
use crate::field::Field;
use crate::functionals::{hk_norm, lp_norm, mass};
use crate::solver::{evolve, picard_solve, Scheme, SolverConfig};
use crate::trajectory::{snapshot_name, DiagnosticsRecord, Trajectory, TrajectoryManifest};
use crate::verify::{run_check, CheckOutcome, CHECK_NAMES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_NONCONVERGED: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

/// Terminal state recorded in the run manifest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    /// `t` is the last valid time; `norm` the growth ratio that fired.
    Blowup { t: f64, norm: f64 },
    Nonconverged,
}

/// Written atomically at run end next to the run's artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Verbatim configuration text.
    pub config: String,
    pub artifact_version: String,
    pub started_unix: f64,
    pub ended_unix: f64,
    pub exit_status: RunStatus,
    pub files: Vec<String>,
}

fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> std::io::Result<()> {
    let tmp = dir.join("manifest.json.tmp");
    let body = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&tmp, body)?;
    fs::rename(&tmp, dir.join("manifest.json"))
}

/// Exclusive guard on an output directory; concurrent commands writing to
/// the same directory fail fast instead of interleaving.
struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    fn acquire(dir: &Path) -> std::io::Result<Self> {
        let path = dir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(OutputLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(std::io::Error::new(
                e.kind(),
                format!("output directory is locked by {}", path.display()),
            )),
            Err(e) => Err(e),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn fail(context: &str, err: impl std::fmt::Display) -> i32 {
    eprintln!("nls-lab: {context}: {err}");
    EXIT_FAILURE
}

fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    let mut body = String::with_capacity(records.len() * 128 + 64);
    body.push_str(DiagnosticsRecord::csv_header());
    body.push('\n');
    for r in records {
        body.push_str(&r.to_csv_row());
        body.push('\n');
    }
    fs::write(path, body)
}

/// Writes the uniform strided sub-trajectory (every `stride`-th slice;
/// stride 0 keeps the final slice only) plus `trajectory.json`.
fn write_strided_trajectory(
    dir: &Path,
    traj: &Trajectory,
    stride: usize,
) -> crate::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let (indices, dt): (Vec<usize>, f64) = if stride == 0 {
        (vec![traj.len() - 1], traj.dt() * (traj.len() - 1).max(1) as f64)
    } else {
        ((0..traj.len()).step_by(stride).collect(), traj.dt() * stride as f64)
    };
    let t0 = traj.t0() + traj.dt() * indices[0] as f64;
    let manifest = TrajectoryManifest {
        t0,
        dt,
        count: indices.len(),
        grid: traj.grid(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join("trajectory.json"), json)?;
    files.push("trajectory.json".to_string());
    for (out_idx, slice_idx) in indices.iter().enumerate() {
        let name = snapshot_name(out_idx);
        traj.slices()[*slice_idx].write_snapshot(&dir.join(name.clone()))?;
        files.push(name);
    }
    // A final slice that falls off the stride lattice is still persisted.
    if stride > 0 && (traj.len() - 1) % stride != 0 {
        traj.slices()[traj.len() - 1].write_snapshot(&dir.join("final.nlsf"))?;
        files.push("final.nlsf".to_string());
    }
    Ok(files)
}

/// `nls-lab evolve`: integrates the scenario, writing diagnostics CSV,
/// strided snapshots, and the run manifest. Exit 0 on completion, 2 on a
/// blow-up signal, 1 on configuration or I/O failure.
pub fn cmd_evolve(cfg: &ScenarioConfig) -> i32 {
    let started = now_unix();
    if let Err(e) = fs::create_dir_all(&cfg.output_dir) {
        return fail("creating output directory", e);
    }
    let _lock = match OutputLock::acquire(&cfg.output_dir) {
        Ok(l) => l,
        Err(e) => return fail("locking output directory", e),
    };
    let u0 = match cfg.initial.build_field(&cfg.grid) {
        Ok(u) => u,
        Err(e) => return fail("building initial datum", e),
    };
    let mut files = vec!["diagnostics.csv".to_string(), "manifest.json".to_string()];
    match evolve(&u0, &cfg.solver) {
        Ok(run) => {
            if let Err(e) =
                write_diagnostics_csv(&cfg.output_dir.join("diagnostics.csv"), &run.diagnostics)
            {
                return fail("writing diagnostics", e);
            }
            let traj_dir = cfg.output_dir.join("trajectory");
            match write_strided_trajectory(&traj_dir, &run.trajectory, cfg.snapshot_stride) {
                Ok(names) => {
                    files.extend(names.into_iter().map(|n| format!("trajectory/{n}")));
                }
                Err(e) => return fail("writing trajectory snapshots", e),
            }
            let manifest = RunManifest {
                config: cfg.raw_text.clone(),
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix: started,
                ended_unix: now_unix(),
                exit_status: RunStatus::Completed,
                files,
            };
            if let Err(e) = write_manifest(&cfg.output_dir, &manifest) {
                return fail("writing manifest", e);
            }
            println!(
                "completed: {} steps to t = {}",
                run.trajectory.len() - 1,
                run.trajectory.time(run.trajectory.len() - 1)
            );
            EXIT_OK
        }
        Err(Error::Blowup(sig)) => {
            if let Err(e) =
                write_diagnostics_csv(&cfg.output_dir.join("diagnostics.csv"), &sig.history)
            {
                return fail("writing diagnostics", e);
            }
            let manifest = RunManifest {
                config: cfg.raw_text.clone(),
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix: started,
                ended_unix: now_unix(),
                exit_status: RunStatus::Blowup {
                    t: sig.t,
                    norm: sig.sup_ratio.max(sig.h2_ratio),
                },
                files: vec!["diagnostics.csv".to_string(), "manifest.json".to_string()],
            };
            if let Err(e) = write_manifest(&cfg.output_dir, &manifest) {
                return fail("writing manifest", e);
            }
            eprintln!(
                "blow-up signal at t = {} (sup ratio {:.3e}, H2 ratio {:.3e})",
                sig.t, sig.sup_ratio, sig.h2_ratio
            );
            EXIT_BLOWUP
        }
        Err(e) => fail("evolving", e),
    }
}

/// `nls-lab picard`: runs the fixed-point solver, writing the Picard
/// report JSON and the final trajectory. Exit 0 when converged, 3 when
/// the iteration budget is exhausted, 1 on failure.
pub fn cmd_picard(cfg: &ScenarioConfig) -> i32 {
    let started = now_unix();
    if cfg.solver.scheme != Scheme::Picard {
        return fail("configuration", "picard command requires scheme = \"picard\"");
    }
    if let Err(e) = fs::create_dir_all(&cfg.output_dir) {
        return fail("creating output directory", e);
    }
    let _lock = match OutputLock::acquire(&cfg.output_dir) {
        Ok(l) => l,
        Err(e) => return fail("locking output directory", e),
    };
    let u0 = match cfg.initial.build_field(&cfg.grid) {
        Ok(u) => u,
        Err(e) => return fail("building initial datum", e),
    };
    let report = match picard_solve(&u0, &cfg.solver) {
        Ok(r) => r,
        Err(e) => return fail("picard iteration", e),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Err(e) = fs::write(cfg.output_dir.join("picard_report.json"), json) {
        return fail("writing picard report", e);
    }
    let mut files = vec!["picard_report.json".to_string(), "manifest.json".to_string()];
    let traj_dir = cfg.output_dir.join("trajectory");
    match write_strided_trajectory(
        &traj_dir,
        &report.final_trajectory,
        cfg.snapshot_stride.max(1),
    ) {
        Ok(names) => files.extend(names.into_iter().map(|n| format!("trajectory/{n}"))),
        Err(e) => return fail("writing trajectory snapshots", e),
    }
    let manifest = RunManifest {
        config: cfg.raw_text.clone(),
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        ended_unix: now_unix(),
        exit_status: if report.converged {
            RunStatus::Completed
        } else {
            RunStatus::Nonconverged
        },
        files,
    };
    if let Err(e) = write_manifest(&cfg.output_dir, &manifest) {
        return fail("writing manifest", e);
    }
    println!(
        "picard: converged = {}, iterates_used = {}, final diff = {:?}",
        report.converged,
        report.iterates_used,
        report.successive_diffs.last()
    );
    if report.converged {
        EXIT_OK
    } else {
        EXIT_NONCONVERGED
    }
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    check: &'a str,
    seed: u64,
    verdicts: &'a [crate::verify::Verdict],
    all_satisfied: bool,
}

/// `nls-lab verify`: runs one named check (or all of them), printing the
/// machine-readable JSON verdicts and persisting them under the output
/// directory. Exit 0 iff every inequality held, 4 on any violation (the
/// counterexample input field is persisted as a snapshot), 1 on failure.
pub fn cmd_verify(cfg: &ScenarioConfig, which: Option<&str>) -> i32 {
    if let Err(e) = fs::create_dir_all(&cfg.output_dir) {
        return fail("creating output directory", e);
    }
    let names: Vec<&str> = match which {
        Some("all") | None => CHECK_NAMES.to_vec(),
        Some(one) => vec![one],
    };
    let mut all_ok = true;
    for name in names {
        let outcome: CheckOutcome = match run_check(cfg, name) {
            Ok(o) => o,
            Err(e) => return fail(&format!("verify {name}"), e),
        };
        let ok = outcome.all_satisfied();
        all_ok &= ok;
        let doc = VerifyDocument {
            check: name,
            seed: cfg.seed,
            verdicts: &outcome.verdicts,
            all_satisfied: ok,
        };
        let json = serde_json::to_string_pretty(&doc).expect("verdicts serialize");
        println!("{json}");
        if let Err(e) = fs::write(cfg.output_dir.join(format!("verify_{name}.json")), &json) {
            return fail("writing verdicts", e);
        }
        if let Some((verdict_name, field)) = &outcome.counterexample {
            let slug: String = verdict_name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect();
            let path = cfg.output_dir.join(format!("counterexample_{slug}.nlsf"));
            if let Err(e) = field.write_snapshot(&path) {
                return fail("persisting counterexample", e);
            }
            eprintln!("counterexample persisted to {}", path.display());
        }
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

const OBSERVABLES: [&str; 5] = ["mass", "energy", "h1", "h2", "sup"];

fn observable_value(name: &str, field: &Field, solver: &SolverConfig) -> crate::Result<f64> {
    match name {
        "mass" => mass(field),
        "energy" => crate::functionals::energy(field, solver.lambda, solver.p),
        "h1" => hk_norm(field, 1),
        "h2" => hk_norm(field, 2),
        "sup" => lp_norm(field, f64::INFINITY),
        other => Err(Error::invalid(format!(
            "unknown observable {other:?}; valid names: {}",
            OBSERVABLES.join(", ")
        ))),
    }
}

/// `nls-lab export`: reads the trajectory directory written by a previous
/// run and emits one CSV row per snapshot with one column per requested
/// observable. An empty observable list yields a header-only CSV.
pub fn cmd_export(cfg: &ScenarioConfig, observables: Option<&str>) -> i32 {
    let names: Vec<String> = observables
        .map(|s| {
            s.split(',')
                .map(|x| x.trim().to_string())
                .filter(|x| !x.is_empty())
                .collect()
        })
        .unwrap_or_default();
    for n in &names {
        if !OBSERVABLES.contains(&n.as_str()) {
            return fail(
                "export",
                format!(
                    "unknown observable {n:?}; valid names: {}",
                    OBSERVABLES.join(", ")
                ),
            );
        }
    }
    let traj_dir = cfg.output_dir.join("trajectory");
    let manifest_path = traj_dir.join("trajectory.json");
    let manifest: TrajectoryManifest = match fs::read_to_string(&manifest_path)
        .map_err(|e| format!("{}: {e}", manifest_path.display()))
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
    {
        Ok(m) => m,
        Err(e) => return fail("reading trajectory manifest", e),
    };
    let mut body = String::new();
    body.push('t');
    for n in &names {
        body.push(',');
        body.push_str(n);
    }
    body.push('\n');
    if !names.is_empty() {
        for j in 0..manifest.count {
            let path = traj_dir.join(snapshot_name(j));
            let field = match Field::read_snapshot(&path) {
                Ok(f) => f,
                Err(e) => return fail("reading snapshot", e),
            };
            let t = manifest.t0 + j as f64 * manifest.dt;
            body.push_str(&format!("{t:.16e}"));
            for n in &names {
                match observable_value(n, &field, &cfg.solver) {
                    Ok(v) => body.push_str(&format!(",{v:.16e}")),
                    Err(e) => return fail("computing observable", e),
                }
            }
            body.push('\n');
        }
    }
    let out_path = cfg.output_dir.join("export.csv");
    if let Err(e) = fs::write(&out_path, body) {
        return fail("writing export CSV", e);
    }
    println!("wrote {}", out_path.display());
    EXIT_OK
}
