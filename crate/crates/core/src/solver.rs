//! Time evolution of i∂ₜu + Δu = λ|u|ᵖu by two independent routes — a
//! Strang split-step integrator and a Duhamel/Picard fixed-point solver —
//! plus existence-time estimation, contraction measurement, Strichartz
//! inequality verification, conservation auditing, and blow-up detection.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::{lp_norm, mass, nonlinearity, AdmissiblePair};
use crate::propagator::SpectralPropagator;
use crate::trajectory::{mixed_norm, DiagnosticsRecord, Trajectory};

/// Integration scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Strang,
    Picard,
}

/// Solver parameters shared by both evolution routes.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub lambda: f64,
    pub p: f64,
    /// Time horizon T.
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub picard_max_iters: usize,
    pub picard_tol: f64,
    pub strichartz_pair: AdmissiblePair,
    /// Empirical stand-in for the non-constructive Strichartz constant C.
    pub strichartz_constant: f64,
    /// Ratio of sup-norm or H² growth against t = 0 that raises the
    /// blow-up signal.
    pub blowup_threshold: f64,
}

impl SolverConfig {
    /// Defaults: Strang scheme, the endpoint pair (∞, 2), C = 1,
    /// blow-up threshold 10³, Picard tolerance 1e-10 within 30 iterates.
    pub fn new(lambda: f64, p: f64, t_final: f64, dt: f64, dim: usize) -> Result<Self> {
        let cfg = SolverConfig {
            lambda,
            p,
            t_final,
            dt,
            scheme: Scheme::Strang,
            picard_max_iters: 30,
            picard_tol: 1e-10,
            strichartz_pair: crate::functionals::validate_pair(f64::INFINITY, 2.0, dim)?,
            strichartz_constant: 1.0,
            blowup_threshold: 1e3,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::invalid(format!("p must be positive, got {}", self.p)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > self.t_final {
            return Err(Error::invalid("dt exceeds T"));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::invalid("picard_tol must be positive"));
        }
        if self.picard_max_iters == 0 {
            return Err(Error::invalid("picard_max_iters must be at least 1"));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(Error::invalid("blowup_threshold must exceed 1"));
        }
        if !(self.strichartz_constant > 0.0) {
            return Err(Error::invalid("strichartz_constant must be positive"));
        }
        Ok(())
    }

    fn steps(&self) -> Result<usize> {
        let ratio = self.t_final / self.dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-6 * n.max(1.0) {
            return Err(Error::invalid(format!(
                "t_final = {} is not an integer multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Evidence attached to a raised blow-up signal: the last valid time and
/// the norm history up to it.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupSignal {
    pub t: f64,
    pub sup_ratio: f64,
    pub h2_ratio: f64,
    pub history: Vec<DiagnosticsRecord>,
}

/// A completed run: the trajectory and one diagnostics record per node.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub trajectory: Trajectory,
    pub diagnostics: Vec<DiagnosticsRecord>,
}

/// One Strang step N_{dt/2} ∘ L_{dt} ∘ N_{dt/2}: the exact nonlinear phase
/// flow u ↦ e^{-iλ|u|ᵖdt/2}u around the exact spectral free flow. Both
/// factors preserve the discrete mass to roundoff.
pub fn strang_step(u: &Field, cfg: &SolverConfig) -> Result<Field> {
    let free = SpectralPropagator::new(u.grid(), cfg.dt)?;
    strang_step_with(u, cfg, &free)
}

fn nonlinear_half_step(state: &mut Field, lambda: f64, p: f64, dt: f64) {
    for v in state.values_mut() {
        let r = v.norm();
        if r > 0.0 {
            *v *= Complex64::from_polar(1.0, -lambda * r.powf(p) * dt / 2.0);
        }
    }
}

fn strang_step_with(u: &Field, cfg: &SolverConfig, free: &SpectralPropagator) -> Result<Field> {
    let mut state = u.clone();
    nonlinear_half_step(&mut state, cfg.lambda, cfg.p, cfg.dt);
    state = free.apply(&state)?;
    nonlinear_half_step(&mut state, cfg.lambda, cfg.p, cfg.dt);
    if !state.is_finite() {
        return Err(Error::NonFinite {
            node: "strang step".to_string(),
            context: "non-finite intermediate state".to_string(),
        });
    }
    Ok(state)
}

/// Integrates over [0, T] with the Strang scheme, recording diagnostics at
/// every node and raising the blow-up signal when the sup-norm or H² ratio
/// against t = 0 exceeds `blowup_threshold` (or a value turns non-finite).
pub fn evolve(u0: &Field, cfg: &SolverConfig) -> Result<Evolution> {
    cfg.validate()?;
    let steps = cfg.steps()?;
    let m0 = mass(u0)?;
    if !m0.is_finite() {
        return Err(Error::invalid("initial datum has non-finite mass"));
    }
    let free = SpectralPropagator::new(u0.grid(), cfg.dt)?;
    let first = DiagnosticsRecord::compute(u0, 0.0, cfg.lambda, cfg.p)?;
    let sup0 = first.sup;
    let h20 = first.h2;
    let mut diagnostics = vec![first];
    let mut slices = vec![u0.clone()];
    let mut state = u0.clone();
    for j in 1..=steps {
        let t = j as f64 * cfg.dt;
        let blowup = |diags: &[DiagnosticsRecord], sup_ratio: f64, h2_ratio: f64| {
            Error::Blowup(Box::new(BlowupSignal {
                t: diags.last().map(|r| r.t).unwrap_or(0.0),
                sup_ratio,
                h2_ratio,
                history: diags.to_vec(),
            }))
        };
        let next = match strang_step_with(&state, cfg, &free) {
            Ok(f) => f,
            Err(Error::NonFinite { .. }) => {
                return Err(blowup(&diagnostics, f64::INFINITY, f64::INFINITY));
            }
            Err(e) => return Err(e),
        };
        let rec = DiagnosticsRecord::compute(&next, t, cfg.lambda, cfg.p)?;
        let sup_ratio = rec.sup / sup0;
        let h2_ratio = rec.h2 / h20;
        if sup_ratio > cfg.blowup_threshold
            || h2_ratio > cfg.blowup_threshold
            || !rec.sup.is_finite()
            || !rec.h2.is_finite()
        {
            return Err(blowup(&diagnostics, sup_ratio, h2_ratio));
        }
        diagnostics.push(rec);
        slices.push(next.clone());
        state = next;
    }
    Ok(Evolution {
        trajectory: Trajectory::new(0.0, cfg.dt, slices)?,
        diagnostics,
    })
}

/// Builds the free-evolution trajectory t ↦ e^{itΔ}u⁰ on n+1 nodes of
/// spacing dt, reusing the fixed one-step multiplier.
pub fn free_trajectory(u0: &Field, dt: f64, steps: usize) -> Result<Trajectory> {
    let free = SpectralPropagator::new(u0.grid(), dt)?;
    let mut slices = Vec::with_capacity(steps + 1);
    slices.push(u0.clone());
    let mut state = u0.clone();
    for _ in 0..steps {
        state = free.apply(&state)?;
        slices.push(state.clone());
    }
    Trajectory::new(0.0, dt, slices)
}

/// Applies the retarded integral t ↦ ∫₀ᵗ e^{i(t-s)Δ} g(s) ds to the slices
/// of `g` by trapezoid quadrature over the stored nodes. The recurrence
/// I_{k+1} = e^{iΔtΔ}(I_k + Δt/2·g_k) + Δt/2·g_{k+1} reproduces the
/// trapezoid weights at every node with one propagation per step.
fn retarded_integral(g: &Trajectory) -> Result<Vec<Field>> {
    let dt = g.dt();
    let free = SpectralPropagator::new(g.grid(), dt)?;
    let half = Complex64::new(dt / 2.0, 0.0);
    let mut out = Vec::with_capacity(g.len());
    let mut acc = Field::zeros(g.grid(), crate::field::Space::Physical);
    out.push(acc.clone());
    for k in 1..g.len() {
        // Completing g_{k-1} to full weight here and adding g_k at half
        // weight reproduces the trapezoid weights of I_k exactly.
        let mut staged = acc;
        for (a, b) in staged.values_mut().iter_mut().zip(g.slices()[k - 1].values()) {
            *a += half * b;
        }
        let mut propagated = free.apply(&staged)?;
        for (a, b) in propagated.values_mut().iter_mut().zip(g.slices()[k].values()) {
            *a += half * b;
        }
        if !propagated.is_finite() {
            return Err(Error::NonFinite {
                node: format!("(t, s) = ({}, {})", g.time(k), g.time(k - 1)),
                context: "retarded integral accumulation".to_string(),
            });
        }
        out.push(propagated.clone());
        acc = propagated;
    }
    Ok(out)
}

/// The Duhamel map Φ(u)(t) = e^{itΔ}u⁰ - iλ ∫₀ᵗ e^{i(t-s)Δ} |u(s)|ᵖu(s) ds
/// evaluated at the trajectory's own time nodes.
pub fn duhamel_apply(u_traj: &Trajectory, u0: &Field, cfg: &SolverConfig) -> Result<Trajectory> {
    if u_traj.grid() != u0.grid() {
        return Err(Error::GridMismatch);
    }
    let steps = u_traj.len() - 1;
    let free_part = free_trajectory(u0, u_traj.dt(), steps)?;
    let forcing_slices = u_traj
        .slices()
        .iter()
        .map(|s| nonlinearity(s, 1.0, cfg.p))
        .collect::<Result<Vec<_>>>()?;
    let forcing = Trajectory::new(u_traj.t0(), u_traj.dt(), forcing_slices)?;
    let integral = retarded_integral(&forcing)?;
    let coupling = Complex64::new(0.0, -cfg.lambda);
    let slices = free_part
        .slices()
        .iter()
        .zip(&integral)
        .enumerate()
        .map(|(k, (f, i))| {
            let mut v = f.clone();
            for (a, b) in v.values_mut().iter_mut().zip(i.values()) {
                *a += coupling * b;
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    node: format!("(t, s) = ({}, {})", u_traj.time(k), u_traj.time(k)),
                    context: "Duhamel map output".to_string(),
                });
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(u_traj.t0(), u_traj.dt(), slices)
}

/// Contraction evidence from a Picard run.
#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    /// Iterates in the Picard sequence including the free-evolution seed;
    /// `successive_diffs` has length iterates_used - 1 and
    /// `contraction_ratios` length iterates_used - 2.
    pub iterates_used: usize,
    /// ‖u_{n+1} - u_n‖_X for each Duhamel application.
    pub successive_diffs: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
    #[serde(skip)]
    pub final_trajectory: Trajectory,
}

/// The X-norm ‖u‖_X = ‖u‖_{L_t^∞ L_x^2} + ‖u‖_{L_t^q L_x^r} of the
/// contraction argument.
pub fn x_norm(traj: &Trajectory, pair: &AdmissiblePair) -> Result<f64> {
    Ok(mixed_norm(traj, f64::INFINITY, 2.0)? + mixed_norm(traj, pair.q(), pair.r())?)
}

/// Iterates Φ from the free evolution until successive X-norm distances
/// fall below `picard_tol` or `picard_max_iters` applications are spent;
/// non-convergence is reported, not an error.
pub fn picard_solve(u0: &Field, cfg: &SolverConfig) -> Result<PicardReport> {
    cfg.validate()?;
    if cfg.scheme != Scheme::Picard {
        return Err(Error::invalid("picard_solve requires scheme = picard"));
    }
    let steps = cfg.steps()?;
    let mut current = free_trajectory(u0, cfg.dt, steps)?;
    let mut successive_diffs = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.picard_max_iters {
        // A diverged (non-finite) iterate is terminal non-convergence:
        // record an infinite distance and keep the last finite iterate.
        let next = match duhamel_apply(&current, u0, cfg) {
            Ok(next) => next,
            Err(Error::NonFinite { .. }) => {
                successive_diffs.push(f64::INFINITY);
                break;
            }
            Err(e) => return Err(e),
        };
        let diff = x_norm(&next.sub(&current)?, &cfg.strichartz_pair)?;
        successive_diffs.push(diff);
        current = next;
        if diff < cfg.picard_tol {
            converged = true;
            break;
        }
    }
    let contraction_ratios = successive_diffs
        .windows(2)
        .map(|w| w[1] / w[0])
        .collect();
    Ok(PicardReport {
        iterates_used: successive_diffs.len() + 1,
        successive_diffs,
        contraction_ratios,
        converged,
        final_trajectory: current,
    })
}

/// Existence-time report: the contraction radius R = 4C‖u⁰‖₂, the
/// closed-form horizon, the variant with the integrability exponent
/// 1 - (p+1)/q, and the operational horizon from measured contraction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExistenceReport {
    pub radius: f64,
    /// (4C|λ|Rᵖ)^{-1/(1-(p+q)/2)};
    /// `None` when the exponent 1-(p+q)/2 vanishes.
    pub t_formula: Option<f64>,
    /// Same base with exponent 1-(p+1)/q; `None` when that vanishes.
    pub t_formula_alt: Option<f64>,
    /// Largest probed T (halving from the formula value or 1.0) whose
    /// first measured contraction ratio is ≤ 1/2.
    pub t_adaptive: f64,
}

/// Measures the first Picard contraction ratio at horizon `t`, probing
/// with the configured dt clamped to [16, 256] slices.
pub fn contraction_probe(u0: &Field, cfg: &SolverConfig, t: f64) -> Result<f64> {
    let slices = ((t / cfg.dt).round() as usize).clamp(16, 256);
    let dt = t / slices as f64;
    let probe_cfg = SolverConfig {
        t_final: t,
        dt,
        ..cfg.clone()
    };
    let seed = free_trajectory(u0, dt, slices)?;
    let u1 = duhamel_apply(&seed, u0, &probe_cfg)?;
    let d1 = x_norm(&u1.sub(&seed)?, &cfg.strichartz_pair)?;
    if d1 == 0.0 {
        return Ok(0.0);
    }
    let u2 = duhamel_apply(&u1, u0, &probe_cfg)?;
    let d2 = x_norm(&u2.sub(&u1)?, &cfg.strichartz_pair)?;
    Ok(d2 / d1)
}

/// Evaluates the local-existence horizon three ways; λ = 0 returns the
/// ∞ sentinel (the map is its own fixed point at any horizon).
pub fn existence_time(u0: &Field, cfg: &SolverConfig) -> Result<ExistenceReport> {
    let radius = 4.0 * cfg.strichartz_constant * lp_norm(u0, 2.0)?;
    if cfg.lambda == 0.0 {
        return Ok(ExistenceReport {
            radius,
            t_formula: Some(f64::INFINITY),
            t_formula_alt: Some(f64::INFINITY),
            t_adaptive: f64::INFINITY,
        });
    }
    let base = 4.0 * cfg.strichartz_constant * cfg.lambda.abs() * radius.powf(cfg.p);
    let q = cfg.strichartz_pair.q();
    let formula = |exponent: f64| -> Option<f64> {
        if exponent == 0.0 || exponent.is_nan() {
            None
        } else {
            Some(base.powf(-1.0 / exponent))
        }
    };
    let t_formula = formula(1.0 - (cfg.p + q) / 2.0);
    let t_formula_alt = formula(1.0 - (cfg.p + 1.0) / q);

    let mut t = match t_formula {
        Some(v) if v.is_finite() && v > 0.0 => v,
        _ => 1.0,
    };
    let mut t_adaptive = None;
    for _ in 0..200 {
        if contraction_probe(u0, cfg, t)? <= 0.5 {
            t_adaptive = Some(t);
            break;
        }
        t /= 2.0;
    }
    let t_adaptive = t_adaptive.ok_or_else(|| {
        Error::invalid("no horizon with contraction ratio <= 1/2 found after 200 halvings")
    })?;
    Ok(ExistenceReport {
        radius,
        t_formula,
        t_formula_alt,
        t_adaptive,
    })
}

/// Homogeneous Strichartz measurement `‖e^{itΔ}u⁰‖_{L_t^q L_x^r([0,T])}`
/// against ‖u⁰‖₂; the ratio is the empirical constant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrichartzReport {
    pub lhs: f64,
    /// lhs / ‖u⁰‖₂.
    pub ratio: f64,
}

pub fn strichartz_verify(
    u0: &Field,
    pair: &AdmissiblePair,
    t_horizon: f64,
    dt: f64,
) -> Result<StrichartzReport> {
    if pair.dim() != u0.grid().dim() {
        return Err(Error::invalid(
            "admissible pair dimension must match the grid",
        ));
    }
    if !(t_horizon > 0.0 && dt > 0.0 && dt <= t_horizon) {
        return Err(Error::invalid("need 0 < dt <= T"));
    }
    let steps = (t_horizon / dt).round().max(1.0) as usize;
    let step_dt = t_horizon / steps as f64;
    // Stream the free evolution: one live slice, trapezoid accumulation
    // of ‖u(t)‖ᵣ^q in time (max over slices for q = ∞).
    let free = SpectralPropagator::new(u0.grid(), step_dt)?;
    let q = pair.q();
    let r = pair.r();
    let mut state = u0.clone();
    let mut acc = 0.0;
    let mut sup = 0.0f64;
    for j in 0..=steps {
        if j > 0 {
            state = free.apply(&state)?;
        }
        let spatial = lp_norm(&state, r)?;
        if q.is_infinite() {
            sup = sup.max(spatial);
        } else {
            let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
            acc += w * spatial.powf(q);
        }
    }
    let lhs = if q.is_infinite() {
        sup
    } else {
        (acc * step_dt).powf(1.0 / q)
    };
    let denom = lp_norm(u0, 2.0)?;
    Ok(StrichartzReport {
        lhs,
        ratio: lhs / denom,
    })
}

/// Retarded Strichartz measurement
/// ‖∫₀ᵗ e^{i(t-s)Δ}F(s) ds‖_{L_t^q L_x^r} ≤ C‖F‖_{L_t^{q̃'} L_x^{r̃'}}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RetardedReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// ‖∫₀ᵀ e^{i(T-s)Δ}F(s) ds‖₂ — by unitarity equal to the dual
    /// homogeneous estimate's left side ‖∫ e^{-isΔ}F(s) ds‖₂.
    pub dual_lhs: f64,
}

pub fn retarded_strichartz_verify(
    forcing: &Trajectory,
    pair: &AdmissiblePair,
    dual_pair: &AdmissiblePair,
) -> Result<RetardedReport> {
    let (q_conj, r_conj) = dual_pair.holder_conjugates()?;
    let integral = retarded_integral(forcing)?;
    let traj = Trajectory::new(forcing.t0(), forcing.dt(), integral)?;
    let lhs = mixed_norm(&traj, pair.q(), pair.r())?;
    let rhs = mixed_norm(forcing, q_conj, r_conj)?;
    let dual_lhs = lp_norm(traj.slices().last().expect("nonempty"), 2.0)?;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(RetardedReport {
        lhs,
        rhs,
        ratio,
        dual_lhs,
    })
}

/// Relative drift of the conserved quantities over a trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConservationReport {
    pub mass_drift: f64,
    pub energy_drift: f64,
}

pub fn conservation_audit(traj: &Trajectory, cfg: &SolverConfig) -> Result<ConservationReport> {
    if traj.len() < 2 {
        return Err(Error::invalid("conservation audit needs at least 2 slices"));
    }
    let m0 = mass(&traj.slices()[0])?;
    let e0 = crate::functionals::energy(&traj.slices()[0], cfg.lambda, cfg.p)?;
    let mut mass_drift: f64 = 0.0;
    let mut energy_drift: f64 = 0.0;
    for s in traj.slices().iter().skip(1) {
        let dm = (mass(s)? - m0).abs();
        let de = (crate::functionals::energy(s, cfg.lambda, cfg.p)? - e0).abs();
        mass_drift = mass_drift.max(if m0 > 0.0 { dm / m0 } else { dm });
        energy_drift = energy_drift.max(if e0.abs() > 0.0 { de / e0.abs() } else { de });
    }
    Ok(ConservationReport {
        mass_drift,
        energy_drift,
    })
}
