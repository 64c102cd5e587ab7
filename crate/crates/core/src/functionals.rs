//! Norms, conserved quantities, the nonlinearity F(u) = λ|u|ᵖu, and the
//! pointwise/Lipschitz estimates on F, together with Strichartz exponent
//! admissibility.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::{fft, ifft};
use crate::field::{Field, Space};

/// Neumaier compensated sum; deterministic and sturdy for long reductions.
pub(crate) fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

fn require_physical(u: &Field) -> Result<()> {
    if u.space() != Space::Physical {
        return Err(Error::WrongSpace {
            expected: Space::Physical,
            got: u.space(),
        });
    }
    Ok(())
}

/// Discrete Lᵖ norm (Σⱼ|uⱼ|ᵖ·hᵈ)^{1/p}; the grid maximum for p = ∞.
pub fn lp_norm(u: &Field, p: f64) -> Result<f64> {
    require_physical(u)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("Lp exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(u
            .values()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max));
    }
    let w = u.grid().cell_volume();
    let sum = if p == 2.0 {
        compensated_sum(u.values().iter().map(|v| v.norm_sqr()))
    } else if p == 1.0 {
        compensated_sum(u.values().iter().map(|v| v.norm()))
    } else {
        compensated_sum(u.values().iter().map(|v| v.norm().powf(p)))
    };
    Ok((sum * w).powf(1.0 / p))
}

/// Spectral Sobolev norm (Σₘ (1+|kₘ|²)^k |ûₘ|² Δkᵈ)^{1/2}.
///
/// Accepts either representation; physical input is transformed first.
/// hk_norm(u, 0) coincides with lp_norm(u, 2) by Plancherel.
pub fn hk_norm(u: &Field, k: u32) -> Result<f64> {
    let hat;
    let spectral = match u.space() {
        Space::Spectral => u,
        Space::Physical => {
            hat = fft(u)?;
            &hat
        }
    };
    let grid = spectral.grid();
    let k2 = grid.k_squared_natural();
    let sum = compensated_sum(
        spectral
            .values()
            .iter()
            .zip(&k2)
            .map(|(v, kk)| (1.0 + kk).powi(k as i32) * v.norm_sqr()),
    );
    Ok((sum * grid.spectral_cell_volume()).sqrt())
}

/// Mass ‖u‖²_{L²} = Σ|uⱼ|²·hᵈ, the quantity the flow preserves.
pub fn mass(u: &Field) -> Result<f64> {
    require_physical(u)?;
    Ok(compensated_sum(u.values().iter().map(|v| v.norm_sqr())) * u.grid().cell_volume())
}

/// Energy E = ∫|∇u|² dx + (2λ/(p+2)) ∫|u|^{p+2} dx, the combination the
/// flow conserves: multiplying the equation by ∂ₜū gives
/// ½ d/dt ∫|∇u|² + (λ/(p+2)) d/dt ∫|u|^{p+2} = 0.
///
/// The gradient term uses the spectral derivative ikₐû per axis; the
/// potential term is node quadrature. Nonnegative whenever λ ≥ 0.
pub fn energy(u: &Field, lambda: f64, p: f64) -> Result<f64> {
    require_physical(u)?;
    if !(p > 0.0) {
        return Err(Error::invalid(format!(
            "nonlinearity exponent p must be positive, got {p}"
        )));
    }
    let grid = u.grid();
    let w = grid.cell_volume();
    let hat = fft(u)?;
    let axis_k = grid.wavenumbers_natural();
    let n = grid.points_per_axis();
    let mut gradient = 0.0;
    for axis in 0..grid.dim() {
        let axis_stride_pow = (grid.dim() - 1 - axis) as u32;
        let mut deriv_hat = hat.clone();
        for (flat, v) in deriv_hat.values_mut().iter_mut().enumerate() {
            let i = (flat / n.pow(axis_stride_pow)) % n;
            *v *= Complex64::new(0.0, axis_k[i]);
        }
        let deriv = ifft(&deriv_hat)?;
        gradient += compensated_sum(deriv.values().iter().map(|v| v.norm_sqr())) * w;
    }
    let potential = compensated_sum(u.values().iter().map(|v| v.norm().powf(p + 2.0)))
        * w
        * 2.0
        * lambda
        / (p + 2.0);
    Ok(gradient + potential)
}

/// Pointwise nonlinearity F(u) = λ|u|ᵖu (with 0ᵖ·0 = 0 for p > 0).
pub fn nonlinearity(u: &Field, lambda: f64, p: f64) -> Result<Field> {
    require_physical(u)?;
    if !(p > 0.0) {
        return Err(Error::invalid(format!(
            "nonlinearity exponent p must be positive, got {p}"
        )));
    }
    let values = u
        .values()
        .iter()
        .map(|v| {
            let r = v.norm();
            if r == 0.0 {
                Complex64::ZERO
            } else {
                lambda * r.powf(p) * v
            }
        })
        .collect();
    Field::new(u.grid(), Space::Physical, values)
}

/// Zeroes every spectral mode whose index exceeds 2/3 of the Nyquist mode
/// on any axis (the 2/3 dealiasing rule for integer-power nonlinearities).
pub fn dealias_two_thirds(u: &Field) -> Result<Field> {
    let was_physical = u.space() == Space::Physical;
    let hat_owned;
    let hat = if was_physical {
        hat_owned = fft(u)?;
        &hat_owned
    } else {
        u
    };
    let grid = hat.grid();
    let n = grid.points_per_axis();
    let cutoff = n as f64 / 3.0; // keep |m| <= N/3
    let mut values = hat.values().to_vec();
    for (flat, v) in values.iter_mut().enumerate() {
        let mut rest = flat;
        for _ in 0..grid.dim() {
            let i = rest % n;
            rest /= n;
            let m = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            if m.abs() > cutoff {
                *v = Complex64::ZERO;
                break;
            }
        }
    }
    let truncated = Field::new(grid, Space::Spectral, values)?;
    if was_physical {
        ifft(&truncated)
    } else {
        Ok(truncated)
    }
}

/// F(u) for integer p with a 2/3-rule truncation applied to the result.
pub fn nonlinearity_dealiased(u: &Field, lambda: f64, p: u32) -> Result<Field> {
    if p == 0 {
        return Err(Error::invalid("dealiased nonlinearity needs integer p >= 1"));
    }
    let raw = nonlinearity(u, lambda, p as f64)?;
    dealias_two_thirds(&raw)
}

/// Outcome of the pointwise bound ||u|ᵖu − |v|ᵖv| ≤ (|u|ᵖ+|v|ᵖ)|u−v|·C.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointwiseBoundReport {
    /// Max over nodes of the measured quotient (nodes with u = v skipped).
    pub max_ratio: f64,
    /// Nodes that entered the maximum.
    pub nodes_used: usize,
}

/// Measures the elementary inequality constant nodewise; for p ≥ 1 the
/// quotient never exceeds p + 1.
pub fn pointwise_difference_bound_check(
    u: &Field,
    v: &Field,
    p: f64,
) -> Result<PointwiseBoundReport> {
    require_physical(u)?;
    require_physical(v)?;
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    if !(p > 0.0) {
        return Err(Error::invalid(format!("p must be positive, got {p}")));
    }
    let g = |z: &Complex64| {
        let r = z.norm();
        if r == 0.0 {
            Complex64::ZERO
        } else {
            r.powf(p) * z
        }
    };
    let mut max_ratio: f64 = 0.0;
    let mut nodes_used = 0;
    for (a, b) in u.values().iter().zip(v.values()) {
        if a == b {
            continue;
        }
        let num = (g(a) - g(b)).norm();
        let den = (a.norm().powf(p) + b.norm().powf(p)) * (a - b).norm();
        if den == 0.0 {
            continue;
        }
        max_ratio = max_ratio.max(num / den);
        nodes_used += 1;
    }
    Ok(PointwiseBoundReport {
        max_ratio,
        nodes_used,
    })
}

/// Outcome of one H² Lipschitz-quotient measurement for F.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LipschitzReport {
    /// ‖F(u)−F(v)‖_{H²} / [(‖u‖ᵖ_{H²}+‖v‖ᵖ_{H²})·‖u−v‖_{H²}].
    pub ratio: f64,
}

/// Measures the H² Lipschitz quotient of F(u) = λ|u|ᵖu on a d = 2 grid.
///
/// The true constant hides Sobolev-embedding factors, so only finiteness
/// and stability are asserted by callers; batches track the running max
/// with [`EmpiricalConstant`].
pub fn lipschitz_f_check(u: &Field, v: &Field, lambda: f64, p: f64) -> Result<LipschitzReport> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    if u.grid().dim() != 2 {
        return Err(Error::invalid(
            "the H2 Lipschitz estimate is stated on d = 2",
        ));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    let diff = u.sub(v)?;
    let dist = hk_norm(&diff, 2)?;
    if dist == 0.0 {
        return Err(Error::invalid("u = v: Lipschitz quotient undefined"));
    }
    let fu = nonlinearity(u, lambda, p)?;
    let fv = nonlinearity(v, lambda, p)?;
    let num = hk_norm(&fu.sub(&fv)?, 2)?;
    let hu = hk_norm(u, 2)?;
    let hv = hk_norm(v, 2)?;
    Ok(LipschitzReport {
        ratio: num / ((hu.powf(p) + hv.powf(p)) * dist),
    })
}

/// Running maximum of measured quotients over a sample batch.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct EmpiricalConstant {
    pub bound_constant: f64,
    pub samples: usize,
}

impl EmpiricalConstant {
    pub fn observe(&mut self, ratio: f64) {
        self.bound_constant = self.bound_constant.max(ratio);
        self.samples += 1;
    }
}

/// A Strichartz-admissible exponent pair: 2 ≤ q, r ≤ ∞ with
/// 2/q + d/r = d/2 and (q, r, d) ≠ (2, ∞, 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissiblePair {
    q: f64,
    r: f64,
    dim: usize,
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// Validates the scaling relation and endpoint restriction.
pub fn validate_pair(q: f64, r: f64, dim: usize) -> Result<AdmissiblePair> {
    if !(1..=3).contains(&dim) {
        return Err(Error::invalid(format!("dimension must be 1..=3, got {dim}")));
    }
    for (name, v) in [("q", q), ("r", r)] {
        if v.is_nan() || v < 2.0 {
            return Err(Error::invalid(format!(
                "exponent {name} must lie in [2, inf], got {v}"
            )));
        }
    }
    let d = dim as f64;
    let defect = 2.0 * recip(q) + d * recip(r) - d / 2.0;
    if defect.abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "scaling relation 2/q + d/r = d/2 violated by {defect:.3e} for (q, r, d) = ({q}, {r}, {dim})"
        )));
    }
    if q == 2.0 && r.is_infinite() && dim == 2 {
        return Err(Error::invalid(
            "the endpoint (q, r, d) = (2, inf, 2) is excluded",
        ));
    }
    Ok(AdmissiblePair { q, r, dim })
}

impl AdmissiblePair {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Hölder conjugates (q', r') of the pair; errors if a conjugate would
    /// be ∞ (exponent 1), which no admissible pair produces.
    pub fn holder_conjugates(&self) -> Result<(f64, f64)> {
        let conj = |x: f64| -> Result<f64> {
            if x.is_infinite() {
                return Ok(1.0);
            }
            if x <= 1.0 {
                return Err(Error::invalid(format!(
                    "exponent {x} has no finite Hölder conjugate pairing"
                )));
            }
            Ok(x / (x - 1.0))
        };
        Ok((conj(self.q)?, conj(self.r)?))
    }
}
