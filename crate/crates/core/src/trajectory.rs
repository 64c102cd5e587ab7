//! Time-indexed sequences of fields, mixed space-time (Strichartz) norms,
//! and the per-step diagnostics record.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::functionals::{compensated_sum, energy, hk_norm, lp_norm, mass};
use crate::grid::Grid;

/// An ordered sequence of physical-space slices at times t0 + j·dt.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid,
    t0: f64,
    dt: f64,
    slices: Vec<Field>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, slices: Vec<Field>) -> Result<Self> {
        if slices.len() < 2 {
            return Err(Error::invalid("a trajectory needs at least 2 slices"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let grid = slices[0].grid();
        for s in &slices {
            if s.grid() != grid {
                return Err(Error::GridMismatch);
            }
            if s.space() != Space::Physical {
                return Err(Error::WrongSpace {
                    expected: Space::Physical,
                    got: s.space(),
                });
            }
        }
        Ok(Trajectory {
            grid,
            t0,
            dt,
            slices,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    /// Slice-wise difference of two trajectories on the same time grid.
    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return Err(Error::invalid(
                "trajectories must share their time grid to be subtracted",
            ));
        }
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.t0, self.dt, slices)
    }
}

/// Mixed Lebesgue norm ‖·‖_{L_t^q L_x^r}: composite trapezoid in time of
/// lp_norm(·, r)^q, the max over slices for q = ∞.
pub fn mixed_norm(traj: &Trajectory, q: f64, r: f64) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::invalid("mixed norm needs at least 2 slices"));
    }
    if q.is_nan() || q < 1.0 {
        return Err(Error::invalid(format!("time exponent must be >= 1, got {q}")));
    }
    let spatial: Vec<f64> = traj
        .slices()
        .iter()
        .map(|s| lp_norm(s, r))
        .collect::<Result<_>>()?;
    if q.is_infinite() {
        return Ok(spatial.into_iter().fold(0.0, f64::max));
    }
    let n = spatial.len();
    let integral = compensated_sum(spatial.iter().enumerate().map(|(j, s)| {
        let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        w * s.powf(q)
    })) * traj.dt();
    Ok(integral.powf(1.0 / q))
}

/// Per-step scalar observables recorded by the solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub h1: f64,
    pub h2: f64,
    pub sup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_custom: Option<(f64, f64)>,
}

impl DiagnosticsRecord {
    pub fn compute(u: &Field, t: f64, lambda: f64, p: f64) -> Result<Self> {
        Ok(DiagnosticsRecord {
            t,
            mass: mass(u)?,
            energy: energy(u, lambda, p)?,
            h1: hk_norm(u, 1)?,
            h2: hk_norm(u, 2)?,
            sup: lp_norm(u, f64::INFINITY)?,
            lp_custom: None,
        })
    }

    pub fn csv_header() -> &'static str {
        "t,mass,energy,h1,h2,sup"
    }

    /// One CSV row with 17-significant-digit decimal floats.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t, self.mass, self.energy, self.h1, self.h2, self.sup
        )
    }
}

/// On-disk manifest of a trajectory directory (one snapshot per slice).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub t0: f64,
    pub dt: f64,
    pub count: usize,
    pub grid: Grid,
}

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:06}.nlsf")
}

impl Trajectory {
    /// Persists the trajectory as snapshot files plus `trajectory.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let manifest = TrajectoryManifest {
            t0: self.t0,
            dt: self.dt,
            count: self.len(),
            grid: self.grid,
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::invalid(format!("manifest encoding: {e}")))?;
        std::fs::write(dir.join("trajectory.json"), json)?;
        for (j, slice) in self.slices.iter().enumerate() {
            slice.write_snapshot(&dir.join(snapshot_name(j)))?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Trajectory> {
        let manifest_path = dir.join("trajectory.json");
        let text = std::fs::read_to_string(&manifest_path)?;
        let manifest: TrajectoryManifest = serde_json::from_str(&text).map_err(|e| {
            Error::Snapshot {
                path: manifest_path,
                reason: format!("manifest decoding: {e}"),
            }
        })?;
        let mut slices = Vec::with_capacity(manifest.count);
        for j in 0..manifest.count {
            slices.push(Field::read_snapshot(&dir.join(snapshot_name(j)))?);
        }
        Trajectory::new(manifest.t0, manifest.dt, slices)
    }
}
