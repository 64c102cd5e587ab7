//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them all). Every tolerance is
//! pinned here, not computed.

mod common;

use common::{dispersed_gaussian, rel_l2_distance, seeded_field};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nls_lab::field::{sample, Field};
use nls_lab::functionals::{
    lp_norm, pointwise_difference_bound_check, validate_pair,
};
use nls_lab::grid::Grid;
use nls_lab::propagator::{decay_estimate_check, free_propagate, kernel_propagate_2d};
use nls_lab::solver::{
    evolve, existence_time, picard_solve, strichartz_verify, Scheme, SolverConfig,
};
use nls_lab::Error;

fn criterion(number: u32, name: &str, pass: bool, details: &str) {
    println!(
        "acceptance {number:02} {name}: {} ({details})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number:02} {name} failed: {details}");
}

fn gaussian_exp_r2(grid: &Grid) -> Field {
    sample(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new((-r2).exp(), 0.0)
    })
    .unwrap()
}

fn base_cfg_2d(lambda: f64, t_final: f64, dt: f64) -> SolverConfig {
    SolverConfig {
        lambda,
        p: 2.0,
        t_final,
        dt,
        scheme: Scheme::Strang,
        picard_max_iters: 30,
        picard_tol: 1e-10,
        strichartz_pair: validate_pair(4.0, 4.0, 2).unwrap(),
        strichartz_constant: 1.0,
        blowup_threshold: 1e3,
    }
}

#[test]
fn criterion_01_propagator_exactness() {
    let grid = Grid::new(1, 512, 40.0).unwrap();
    let a = 0.5;
    let u0 = sample(&grid, |x| Complex64::new((-a * x[0] * x[0]).exp(), 0.0)).unwrap();
    let t = 0.5;
    let evolved = free_propagate(&u0, t).unwrap();
    let closed = dispersed_gaussian(&grid, a, t);
    let rel = rel_l2_distance(&evolved, &closed);
    criterion(
        1,
        "propagator_exactness",
        rel < 1e-8,
        &format!("relative L2 error {rel:.3e} < 1e-8"),
    );
}

#[test]
fn criterion_02_group_law_and_unitarity() {
    let grid = Grid::new(1, 64, 16.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x67726f75);
    let mut worst_group: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    for i in 0..100 {
        let u = seeded_field(&grid, 1000 + i);
        let norm = lp_norm(&u, 2.0).unwrap();
        let s: f64 = rng.random_range(-5.0..5.0);
        let t: f64 = rng.random_range(-5.0..5.0);
        let two = free_propagate(&free_propagate(&u, s).unwrap(), t).unwrap();
        let one = free_propagate(&u, s + t).unwrap();
        worst_group = worst_group.max(lp_norm(&two.sub(&one).unwrap(), 2.0).unwrap() / norm);
        let drift = (lp_norm(&free_propagate(&u, t).unwrap(), 2.0).unwrap() - norm).abs() / norm;
        worst_drift = worst_drift.max(drift);
    }
    criterion(
        2,
        "group_law_and_unitarity",
        worst_group < 1e-12 && worst_drift < 1e-12,
        &format!("composition defect {worst_group:.3e}, norm drift {worst_drift:.3e}, both < 1e-12"),
    );
}

#[test]
fn criterion_03_kernel_spectral_agreement() {
    let grid = Grid::new(2, 256, 30.0).unwrap();
    let u0 = gaussian_exp_r2(&grid);
    let t = 0.3;
    let via_kernel = kernel_propagate_2d(&u0, t).unwrap();
    let via_spectral = free_propagate(&u0, t).unwrap();
    let diff = via_kernel.field.sub(&via_spectral).unwrap();
    let rel = lp_norm(&diff, 2.0).unwrap() / lp_norm(&u0, 2.0).unwrap();
    criterion(
        3,
        "kernel_spectral_agreement",
        rel < 1e-6,
        &format!("relative L2 discrepancy {rel:.3e} < 1e-6 (reported quadrature tolerance {:.3e})",
            via_kernel.quadrature_tolerance),
    );
}

#[test]
fn criterion_04_decay_estimate() {
    let grid = Grid::new(2, 256, 120.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x64656361);
    let mut violations = 0usize;
    let mut equality_defect: f64 = 0.0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..20 {
        let amplitude: f64 = rng.random_range(0.5..2.0);
        let width: f64 = rng.random_range(2.5..4.0);
        let cx: f64 = rng.random_range(-5.0..5.0);
        let cy: f64 = rng.random_range(-5.0..5.0);
        let u = sample(&grid, |x| {
            let r2 = (x[0] - cx).powi(2) + (x[1] - cy).powi(2);
            Complex64::new(amplitude * (-r2 / (width * width)).exp(), 0.0)
        })
        .unwrap();
        for m in [2.0, 4.0, f64::INFINITY] {
            for t in [0.1, 1.0, 10.0] {
                let rep = decay_estimate_check(&u, t, m).unwrap();
                if !rep.satisfied {
                    violations += 1;
                }
                min_slack = min_slack.min(rep.rhs / rep.lhs);
                if m == 2.0 {
                    equality_defect = equality_defect.max((rep.lhs - rep.rhs).abs() / rep.rhs);
                }
            }
        }
    }
    criterion(
        4,
        "decay_estimate",
        violations == 0 && equality_defect <= 1e-12,
        &format!(
            "0 violations in 180 checks (min slack factor {min_slack:.4}), m=2 equality defect {equality_defect:.3e} <= 1e-12"
        ),
    );
}

#[test]
fn criterion_05_mass_conservation() {
    let grid = Grid::new(2, 64, 20.0).unwrap();
    let u0 = gaussian_exp_r2(&grid);
    let mut worst: f64 = 0.0;
    for lambda in [-1.0, 0.0, 1.0] {
        let cfg = base_cfg_2d(lambda, 1.0, 1e-3);
        let run = evolve(&u0, &cfg).unwrap();
        let m0 = run.diagnostics[0].mass;
        for rec in &run.diagnostics {
            worst = worst.max((rec.mass - m0).abs() / m0);
        }
    }
    criterion(
        5,
        "mass_conservation",
        worst < 1e-12,
        &format!("relative mass drift {worst:.3e} < 1e-12 for lambda in {{-1, 0, +1}}"),
    );
}

#[test]
fn criterion_06_energy_conservation_order() {
    let grid = Grid::new(2, 64, 20.0).unwrap();
    let u0 = gaussian_exp_r2(&grid);
    let drift = |dt: f64| -> f64 {
        let cfg = base_cfg_2d(1.0, 1.0, dt);
        let run = evolve(&u0, &cfg).unwrap();
        let e0 = run.diagnostics[0].energy;
        run.diagnostics
            .iter()
            .map(|r| (r.energy - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    };
    let coarse = drift(2e-3);
    let fine = drift(1e-3);
    let ratio = coarse / fine;
    criterion(
        6,
        "energy_conservation_order",
        (3.0..=5.0).contains(&ratio),
        &format!("energy drift ratio dt=2e-3 vs 1e-3 is {ratio:.3}, within [3, 5]"),
    );
}

fn small_data_setup() -> (Field, SolverConfig, f64) {
    let grid = Grid::new(2, 64, 20.0).unwrap();
    let raw = gaussian_exp_r2(&grid);
    let norm = lp_norm(&raw, 2.0).unwrap();
    let u0 = raw.scale(Complex64::new(0.1 / norm, 0.0));
    let probe_cfg = SolverConfig {
        scheme: Scheme::Picard,
        ..base_cfg_2d(1.0, 1.0, 2e-3)
    };
    let report = existence_time(&u0, &probe_cfg).unwrap();
    let t_adaptive = report.t_adaptive;
    (u0, probe_cfg, t_adaptive)
}

#[test]
fn criterion_07_picard_contraction() {
    let (u0, probe_cfg, t_adaptive) = small_data_setup();
    let cfg = SolverConfig {
        t_final: t_adaptive,
        dt: t_adaptive / 400.0,
        ..probe_cfg
    };
    let report = picard_solve(&u0, &cfg).unwrap();
    let max_ratio = report
        .contraction_ratios
        .iter()
        .fold(0.0f64, |a, b| a.max(*b));
    let pass = report.converged
        && report.successive_diffs.len() <= 30
        && report.contraction_ratios.iter().all(|r| *r <= 0.51);
    criterion(
        7,
        "picard_contraction",
        pass,
        &format!(
            "T_adaptive = {t_adaptive}, converged in {} Duhamel applications, max contraction ratio {max_ratio:.4} <= 0.51",
            report.successive_diffs.len()
        ),
    );
}

#[test]
fn criterion_08_solver_cross_validation() {
    let (u0, probe_cfg, t_adaptive) = small_data_setup();
    let cfg = SolverConfig {
        t_final: t_adaptive,
        dt: t_adaptive / 400.0,
        ..probe_cfg
    };
    let picard = picard_solve(&u0, &cfg).unwrap();
    assert!(picard.converged);
    let strang = evolve(
        &u0,
        &SolverConfig {
            scheme: Scheme::Strang,
            ..cfg.clone()
        },
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in picard
        .final_trajectory
        .slices()
        .iter()
        .zip(strang.trajectory.slices())
    {
        worst = worst.max(lp_norm(&a.sub(b).unwrap(), 2.0).unwrap());
    }
    let bound = 1e-6f64.max(10.0 * cfg.picard_tol);
    criterion(
        8,
        "solver_cross_validation",
        worst < bound,
        &format!("max per-slice L2 distance {worst:.3e} < {bound:.1e}"),
    );
}

#[test]
fn criterion_09_homogeneous_strichartz() {
    let grid = Grid::new(2, 256, 60.0).unwrap();
    let u0 = gaussian_exp_r2(&grid);
    let pair = validate_pair(4.0, 4.0, 2).unwrap();
    let at_10 = strichartz_verify(&u0, &pair, 10.0, 0.05).unwrap();
    let at_20 = strichartz_verify(&u0, &pair, 20.0, 0.05).unwrap();
    let growth = at_20.ratio / at_10.ratio - 1.0;

    let endpoint = validate_pair(f64::INFINITY, 2.0, 2).unwrap();
    let ep = strichartz_verify(&u0, &endpoint, 3.0, 0.05).unwrap();
    let ep_defect = (ep.ratio - 1.0).abs();
    criterion(
        9,
        "homogeneous_strichartz",
        growth < 0.05 && ep_defect <= 1e-12,
        &format!(
            "(4,4) ratio grows {:.3}% from T=10 to T=20 (< 5%), endpoint ratio defect {ep_defect:.3e} <= 1e-12",
            100.0 * growth
        ),
    );
}

#[test]
fn criterion_10_pointwise_nonlinearity_bound() {
    let grid = Grid::new(1, 1024, 1.0).unwrap();
    let mut worst = Vec::new();
    for (i, p) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        let u = seeded_field(&grid, 42 + i as u64);
        let v = seeded_field(&grid, 4242 + i as u64);
        let rep = pointwise_difference_bound_check(&u, &v, p).unwrap();
        worst.push((p, rep.max_ratio, rep.nodes_used));
    }
    let pass = worst.iter().all(|(p, r, _)| *r <= p + 1.0 + 1e-9);
    criterion(
        10,
        "pointwise_nonlinearity_bound",
        pass,
        &format!(
            "max ratios {:?} all <= p+1+1e-9 over >= 1000 seeded pairs each",
            worst
                .iter()
                .map(|(p, r, _)| format!("p={p}: {r:.6}"))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_11_defocusing_global_behavior() {
    let grid = Grid::new(2, 64, 20.0).unwrap();
    let u0 = gaussian_exp_r2(&grid);
    let cfg = base_cfg_2d(1.0, 1.0, 1e-3);
    let run = evolve(&u0, &cfg).unwrap();
    let h20 = run.diagnostics[0].h2;
    let max_ratio = run
        .diagnostics
        .iter()
        .map(|r| r.h2 / h20)
        .fold(0.0, f64::max);
    criterion(
        11,
        "defocusing_global_behavior",
        max_ratio < 10.0,
        &format!("run completed, max H2 ratio {max_ratio:.3} < 10"),
    );
}

#[test]
fn criterion_12_focusing_blowup_dichotomy() {
    let grid = Grid::new(2, 128, 10.0).unwrap();
    let make = |amplitude: f64| -> Field {
        sample(&grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new(amplitude * (-r2).exp(), 0.0)
        })
        .unwrap()
    };
    let cfg = SolverConfig {
        blowup_threshold: 100.0,
        ..base_cfg_2d(-1.0, 1.0, 2e-3)
    };
    let blows = |amplitude: f64| -> bool {
        match evolve(&make(amplitude), &cfg) {
            Ok(_) => false,
            Err(Error::Blowup(sig)) => {
                assert!(sig.t < cfg.t_final);
                true
            }
            Err(e) => panic!("unexpected error: {e}"),
        }
    };
    let mut low = 0.5;
    let mut high = 6.0;
    let low_blows = blows(low);
    let high_blows = blows(high);
    assert!(!low_blows, "lower branch must complete");
    assert!(high_blows, "upper branch must raise the signal");
    for _ in 0..6 {
        let mid = 0.5 * (low + high);
        if blows(mid) {
            high = mid;
        } else {
            low = mid;
        }
    }
    criterion(
        12,
        "focusing_blowup_dichotomy",
        low < high && (high - low) < 0.1 * 5.5,
        &format!(
            "completes at amplitude {low:.3}, blow-up signal fires at {high:.3}; threshold bracketed by bisection"
        ),
    );
}

#[test]
fn criterion_13_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg_path = tmp.path().join("scenario.toml");
    std::fs::write(
        &cfg_path,
        "[grid]
dim = 2
points = 32
box_length = 12.0

[initial]
kind = \"gaussian\"

[solver]
lambda = 1.0
p = 2.0
t_final = 0.05
dt = 0.001

[output]
seed = 3
",
    )
    .unwrap();
    for out in [&out_a, &out_b] {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_nls-lab"))
            .arg("evolve")
            .arg("--config")
            .arg(&cfg_path)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(out_a.join("diagnostics.csv")).unwrap();
    let b = std::fs::read(out_b.join("diagnostics.csv")).unwrap();
    criterion(
        13,
        "determinism",
        a == b,
        &format!("repeated cmd_evolve CSVs byte-identical ({} bytes)", a.len()),
    );
}
