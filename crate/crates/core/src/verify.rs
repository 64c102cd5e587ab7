//! Seeded verification batches behind `nls-lab verify`: each check turns
//! one of the proved inequalities into a machine-readable verdict list.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::fft::ifft;
use crate::field::{sample, Field, Space};
use crate::functionals::{
    lipschitz_f_check, pointwise_difference_bound_check, validate_pair, EmpiricalConstant,
};
use crate::grid::Grid;
use crate::propagator::{decay_estimate_report, free_propagate};
use crate::solver::{
    conservation_audit, evolve, free_trajectory, retarded_strichartz_verify, strichartz_verify,
    SolverConfig,
};

/// One machine-readable check outcome; `rhs` carries the bound or the
/// empirical constant, whichever the check produces.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// A batch outcome plus the input field of the first violation, kept so
/// the command layer can persist the counterexample.
#[derive(Debug, Default)]
pub struct CheckOutcome {
    pub verdicts: Vec<Verdict>,
    pub counterexample: Option<(String, Field)>,
}

impl CheckOutcome {
    pub fn all_satisfied(&self) -> bool {
        self.verdicts.iter().all(|v| v.satisfied)
    }

    fn push(&mut self, verdict: Verdict, input: Option<&Field>) {
        if !verdict.satisfied && self.counterexample.is_none() {
            if let Some(field) = input {
                self.counterexample = Some((verdict.name.clone(), field.clone()));
            }
        }
        self.verdicts.push(verdict);
    }
}

/// Test hook: when set, the decay batch routes through a propagator whose
/// output is scaled by 1.05, breaking unitarity so the check must fail.
pub const CORRUPT_PROPAGATOR_ENV: &str = "NLS_LAB_CORRUPT_PROPAGATOR";

fn corrupt_hook_active() -> bool {
    std::env::var(CORRUPT_PROPAGATOR_ENV).map(|v| v == "1").unwrap_or(false)
}

fn instrumented_propagate(u: &Field, t: f64) -> Result<Field> {
    let out = free_propagate(u, t)?;
    if corrupt_hook_active() {
        Ok(out.scale(Complex64::new(1.05, 0.0)))
    } else {
        Ok(out)
    }
}

fn seeded_gaussian(grid: &Grid, rng: &mut ChaCha8Rng) -> Field {
    let amplitude: f64 = rng.random_range(0.5..2.0);
    let width: f64 = rng.random_range(2.5..4.0);
    let center: Vec<f64> = (0..grid.dim()).map(|_| rng.random_range(-5.0..5.0)).collect();
    sample(grid, move |x| {
        let r2: f64 = x
            .iter()
            .zip(&center)
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum();
        Complex64::new(amplitude * (-r2 / (width * width)).exp(), 0.0)
    })
    .expect("gaussian sampling is finite")
}

/// Band-limited random field: coefficients on |m| ≤ N/8 per axis.
fn seeded_band_limited(grid: &Grid, rng: &mut ChaCha8Rng) -> Result<Field> {
    let n = grid.points_per_axis();
    let band = (n / 8).max(1);
    let mut hat = vec![Complex64::ZERO; grid.len()];
    for (flat, slot) in hat.iter_mut().enumerate() {
        let mut rest = flat;
        let mut inside = true;
        for _ in 0..grid.dim() {
            let i = rest % n;
            rest /= n;
            let m = if i < n / 2 { i } else { n - i };
            if m > band {
                inside = false;
                break;
            }
        }
        if inside {
            *slot = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    ifft(&Field::new(*grid, Space::Spectral, hat)?)
}

/// Dispersive-decay batch: 20 seeded compact data, m ∈ {2, 4, ∞},
/// t ∈ {0.1, 1, 10}; the m = 2 rows are equality within 1e-12.
pub fn check_decay(cfg: &ScenarioConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    if cfg.grid.dim() != 2 {
        return Err(crate::Error::invalid("decay check needs a d = 2 grid"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x64_6563_6179);
    for i in 0..20 {
        let u = seeded_gaussian(&cfg.grid, &mut rng);
        for m in [2.0, 4.0, f64::INFINITY] {
            for t in [0.1, 1.0, 10.0] {
                let propagated = instrumented_propagate(&u, t)?;
                let rep = decay_estimate_report(&propagated, &u, t, m)?;
                let mut satisfied = rep.satisfied;
                if m == 2.0 {
                    satisfied &= (rep.lhs - rep.rhs).abs() <= 1e-12 * rep.rhs;
                }
                out.push(
                    Verdict {
                        name: format!("decay[{i}] m={m} t={t}"),
                        lhs: rep.lhs,
                        rhs: rep.rhs,
                        satisfied,
                    },
                    Some(&u),
                );
            }
        }
    }
    Ok(out)
}

/// Homogeneous Strichartz evidence: the endpoint (∞, 2) ratio is exactly
/// 1, and the configured pair's ratio grows by < 5% when T doubles.
pub fn check_strichartz(cfg: &ScenarioConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    let u0 = cfg.initial.build_field(&cfg.grid)?;
    let t = cfg.solver.t_final;
    let dt = cfg.solver.dt.max(t / 400.0);

    let endpoint = validate_pair(f64::INFINITY, 2.0, cfg.grid.dim())?;
    let rep = strichartz_verify(&u0, &endpoint, t, dt)?;
    out.push(
        Verdict {
            name: "strichartz endpoint (inf,2) ratio = 1".to_string(),
            lhs: rep.ratio,
            rhs: 1.0,
            satisfied: (rep.ratio - 1.0).abs() <= 1e-12,
        },
        Some(&u0),
    );

    let pair = cfg.solver.strichartz_pair;
    let at_t = strichartz_verify(&u0, &pair, t, dt)?;
    let at_2t = strichartz_verify(&u0, &pair, 2.0 * t, dt)?;
    out.push(
        Verdict {
            name: format!("strichartz ({}, {}) empirical constant", pair.q(), pair.r()),
            lhs: at_t.lhs,
            rhs: at_t.ratio,
            satisfied: at_t.ratio.is_finite(),
        },
        Some(&u0),
    );
    let growth = at_2t.ratio / at_t.ratio - 1.0;
    out.push(
        Verdict {
            name: "strichartz ratio growth T -> 2T below 5%".to_string(),
            lhs: growth,
            rhs: 0.05,
            satisfied: growth < 0.05,
        },
        Some(&u0),
    );
    Ok(out)
}

/// Retarded Strichartz evidence: finite empirical constant, stable within
/// ±10% under halving the quadrature step.
pub fn check_retarded(cfg: &ScenarioConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    let u0 = cfg.initial.build_field(&cfg.grid)?;
    let t = cfg.solver.t_final.min(1.0);
    let pair = cfg.solver.strichartz_pair;
    let mut ratios = Vec::new();
    for steps in [128usize, 256] {
        let forcing = free_trajectory(&u0, t / steps as f64, steps)?;
        let rep = retarded_strichartz_verify(&forcing, &pair, &pair)?;
        ratios.push(rep.ratio);
        out.push(
            Verdict {
                name: format!("retarded ratio at {} slices", steps + 1),
                lhs: rep.lhs,
                rhs: rep.ratio,
                satisfied: rep.ratio.is_finite(),
            },
            Some(&u0),
        );
    }
    let drift = (ratios[1] - ratios[0]).abs() / ratios[1].abs().max(f64::MIN_POSITIVE);
    out.push(
        Verdict {
            name: "retarded ratio stable under dt halving".to_string(),
            lhs: drift,
            rhs: 0.10,
            satisfied: drift <= 0.10,
        },
        Some(&u0),
    );
    Ok(out)
}

/// H² Lipschitz-quotient batch for F: 100 seeded band-limited pairs plus
/// the v = 0 reduction and a directional ε-limit.
pub fn check_lipschitz(cfg: &ScenarioConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    if cfg.grid.dim() != 2 {
        return Err(crate::Error::invalid("lipschitz check needs a d = 2 grid"));
    }
    let p = cfg.solver.p.max(1.0);
    let lambda = if cfg.solver.lambda == 0.0 { 1.0 } else { cfg.solver.lambda };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6c69_7073);
    let mut batch = EmpiricalConstant::default();
    let mut all_finite = true;
    let mut worst: Option<Field> = None;
    for _ in 0..100 {
        let u = seeded_band_limited(&cfg.grid, &mut rng)?;
        let v = seeded_band_limited(&cfg.grid, &mut rng)?;
        let rep = lipschitz_f_check(&u, &v, lambda, p)?;
        if !rep.ratio.is_finite() {
            all_finite = false;
            worst = Some(u.clone());
        }
        batch.observe(rep.ratio);
    }
    out.push(
        Verdict {
            name: format!("lipschitz batch constant over {} pairs", batch.samples),
            lhs: batch.bound_constant,
            rhs: batch.bound_constant,
            satisfied: all_finite && batch.bound_constant.is_finite(),
        },
        worst.as_ref(),
    );

    let u = seeded_band_limited(&cfg.grid, &mut rng)?;
    let zero = Field::zeros(cfg.grid, Space::Physical);
    let rep = lipschitz_f_check(&u, &zero, lambda, p)?;
    out.push(
        Verdict {
            name: "lipschitz v = 0 reduction".to_string(),
            lhs: rep.ratio,
            rhs: rep.ratio,
            satisfied: rep.ratio.is_finite(),
        },
        Some(&u),
    );

    let base = seeded_band_limited(&cfg.grid, &mut rng)?;
    let mut eps_ratios = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let u = base.scale(Complex64::new(1.0 + eps, 0.0));
        eps_ratios.push(lipschitz_f_check(&u, &base, lambda, p)?.ratio);
    }
    let drift = (eps_ratios[1] - eps_ratios[2]).abs() / eps_ratios[2];
    out.push(
        Verdict {
            name: "lipschitz directional limit stable".to_string(),
            lhs: drift,
            rhs: 0.2,
            satisfied: drift <= 0.2,
        },
        Some(&base),
    );
    Ok(out)
}

/// Pointwise nonlinearity bound: 1000+ seeded complex pairs per
/// p ∈ {1, 2, 3}; the measured constant never exceeds p + 1.
pub fn check_pointwise(cfg: &ScenarioConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7077_6973);
    let grid = Grid::new(1, 1024, 1.0)?;
    for p in [1.0, 2.0, 3.0] {
        let make = |rng: &mut ChaCha8Rng| {
            let vals: Vec<Complex64> = (0..grid.len())
                .map(|_| Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
                .collect();
            Field::new(grid, Space::Physical, vals)
        };
        let u = make(&mut rng)?;
        let v = make(&mut rng)?;
        let rep = pointwise_difference_bound_check(&u, &v, p)?;
        out.push(
            Verdict {
                name: format!("pointwise bound p={p} over {} nodes", rep.nodes_used),
                lhs: rep.max_ratio,
                rhs: p + 1.0,
                satisfied: rep.max_ratio <= p + 1.0 + 1e-9,
            },
            Some(&u),
        );
    }
    Ok(out)
}

/// Conservation evidence from the configured scenario: mass drift at
/// roundoff and second-order energy drift under step halving.
pub fn check_conservation(cfg: &ScenarioConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    let u0 = cfg.initial.build_field(&cfg.grid)?;
    let solver = SolverConfig {
        scheme: crate::solver::Scheme::Strang,
        ..cfg.solver.clone()
    };
    let run = evolve(&u0, &solver)?;
    let audit = conservation_audit(&run.trajectory, &solver)?;
    out.push(
        Verdict {
            name: "mass drift at roundoff".to_string(),
            lhs: audit.mass_drift,
            rhs: 1e-12,
            satisfied: audit.mass_drift <= 1e-12,
        },
        Some(&u0),
    );
    let halved = SolverConfig {
        dt: solver.dt / 2.0,
        ..solver.clone()
    };
    let run2 = evolve(&u0, &halved)?;
    let audit2 = conservation_audit(&run2.trajectory, &halved)?;
    let ratio = audit.energy_drift / audit2.energy_drift;
    out.push(
        Verdict {
            name: "energy drift order two (drift ratio under dt halving)".to_string(),
            lhs: ratio,
            rhs: 4.0,
            satisfied: (2.5..=6.0).contains(&ratio),
        },
        Some(&u0),
    );
    Ok(out)
}

/// Admissibility logic: accepted exactly on the scaling-relation solution
/// set, with the forbidden endpoint correctly rejected.
pub fn check_admissible(cfg: &ScenarioConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    let d = cfg.grid.dim();
    out.push(
        Verdict {
            name: format!("(inf, 2, {d}) accepted"),
            lhs: 0.0,
            rhs: 0.0,
            satisfied: validate_pair(f64::INFINITY, 2.0, d).is_ok(),
        },
        None,
    );
    out.push(
        Verdict {
            name: "(4, 4, 2) accepted".to_string(),
            lhs: 0.0,
            rhs: 0.0,
            satisfied: validate_pair(4.0, 4.0, 2).is_ok(),
        },
        None,
    );
    // The endpoint (2, inf, 2) must come back rejected; the verdict is
    // "correctly rejected", so a rejection satisfies the check.
    out.push(
        Verdict {
            name: "(2, inf, 2) correctly rejected".to_string(),
            lhs: 0.0,
            rhs: 0.0,
            satisfied: validate_pair(2.0, f64::INFINITY, 2).is_err(),
        },
        None,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6164_6d69);
    for i in 0..25 {
        let q: f64 = rng.random_range(2.05..40.0);
        let rhs = d as f64 / 2.0 - 2.0 / q;
        if rhs <= 1e-3 {
            continue;
        }
        let r = d as f64 / rhs;
        if r < 2.0 {
            continue;
        }
        let ok = validate_pair(q, r, d).is_ok();
        let perturbed_rejected = validate_pair(q, r + 1e-3, d).is_err();
        out.push(
            Verdict {
                name: format!("solved pair #{i} (q={q:.3}, r={r:.3}, d={d})"),
                lhs: q,
                rhs: r,
                satisfied: ok && perturbed_rejected,
            },
            None,
        );
    }
    Ok(out)
}

pub const CHECK_NAMES: [&str; 7] = [
    "decay",
    "strichartz",
    "retarded",
    "lipschitz",
    "pointwise",
    "conservation",
    "admissible",
];

/// Dispatches one named check.
pub fn run_check(cfg: &ScenarioConfig, which: &str) -> Result<CheckOutcome> {
    match which {
        "decay" => check_decay(cfg),
        "strichartz" => check_strichartz(cfg),
        "retarded" => check_retarded(cfg),
        "lipschitz" => check_lipschitz(cfg),
        "pointwise" => check_pointwise(cfg),
        "conservation" => check_conservation(cfg),
        "admissible" => check_admissible(cfg),
        other => Err(crate::Error::invalid(format!(
            "unknown check {other:?}; valid names: {}",
            CHECK_NAMES.join(", ")
        ))),
    }
}
