//! Scenario configuration: a flat TOML-style document with sections
//! `[grid]`, `[initial]`, `[solver]`, `[output]` and snake_case keys,
//! parsed strictly — unknown keys are fatal and come back with a
//! suggestion.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::field::{sample, Field};
use crate::functionals::validate_pair;
use crate::grid::Grid;
use crate::solver::{Scheme, SolverConfig};

#[derive(Debug)]
pub enum ConfigError {
    /// Malformed line, with its 1-based line number.
    Parse { line: usize, message: String },
    /// Structurally fine but semantically invalid, naming the field.
    Validation { field: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, message } => {
                write!(f, "config parse error at line {line}: {message}")
            }
            ConfigError::Validation { field, message } => {
                write!(f, "config validation error at {field}: {message}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// How the initial datum u⁰ is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// amplitude · exp(-|x-center|² / (2·width²)).
    Gaussian {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
    },
    /// e^{ik·x} with every component of k an on-grid wavenumber 2πm/L.
    PlaneWave { k: Vec<f64> },
    /// A field snapshot loaded from disk.
    File { path: PathBuf },
}

impl InitialData {
    pub fn build_field(&self, grid: &Grid) -> crate::Result<Field> {
        match self {
            InitialData::Gaussian {
                amplitude,
                width,
                center,
            } => {
                let c = center.clone();
                let (a, w) = (*amplitude, *width);
                sample(grid, move |x| {
                    let r2: f64 = x
                        .iter()
                        .zip(&c)
                        .map(|(xi, ci)| (xi - ci) * (xi - ci))
                        .sum();
                    Complex64::new(a * (-r2 / (2.0 * w * w)).exp(), 0.0)
                })
            }
            InitialData::PlaneWave { k } => {
                let k = k.clone();
                sample(grid, move |x| {
                    let phase: f64 = x.iter().zip(&k).map(|(xi, ki)| xi * ki).sum();
                    Complex64::from_polar(1.0, phase)
                })
            }
            InitialData::File { path } => {
                let field = Field::read_snapshot(path)?;
                if field.grid() != *grid {
                    return Err(crate::Error::invalid(format!(
                        "snapshot {} grid does not match the configured grid",
                        path.display()
                    )));
                }
                Ok(field)
            }
        }
    }
}

/// A fully validated run scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub grid: Grid,
    pub initial: InitialData,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    /// Snapshot every `stride` steps; 0 keeps the final slice only.
    pub snapshot_stride: usize,
    pub seed: u64,
    /// The verbatim configuration text, echoed into the run manifest.
    pub raw_text: String,
}

struct Entry {
    value: String,
    line: usize,
    consumed: bool,
}

struct Section {
    entries: BTreeMap<String, Entry>,
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line).trim().to_string();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(ConfigError::Parse {
                line: line_no,
                message: "unterminated section header".to_string(),
            })?;
            let name = name.trim().to_string();
            if name.is_empty() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: "empty section name".to_string(),
                });
            }
            sections.entry(name.clone()).or_insert(Section {
                entries: BTreeMap::new(),
            });
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Parse {
            line: line_no,
            message: format!("expected `key = value`, got {line:?}"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                message: "empty key".to_string(),
            });
        }
        let section = current.clone().ok_or(ConfigError::Parse {
            line: line_no,
            message: format!("key {key:?} appears before any [section] header"),
        })?;
        let prev = sections
            .get_mut(&section)
            .expect("section was inserted")
            .entries
            .insert(
                key.clone(),
                Entry {
                    value,
                    line: line_no,
                    consumed: false,
                },
            );
        if prev.is_some() {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("duplicate key {key:?} in [{section}]"),
            });
        }
    }
    Ok(sections)
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(value: &str) -> String {
    let v = value.trim();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        v[1..v.len() - 1].to_string()
    } else {
        v.to_string()
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn suggestion(key: &str, known: &[&str]) -> String {
    known
        .iter()
        .map(|k| (edit_distance(key, k), *k))
        .min()
        .filter(|(d, _)| *d <= 2)
        .map(|(_, k)| format!("; did you mean {k:?}?"))
        .unwrap_or_default()
}

struct SectionReader<'a> {
    name: &'a str,
    section: Option<&'a mut Section>,
}

impl<'a> SectionReader<'a> {
    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        let section = self.section.as_mut()?;
        let entry = section.entries.get_mut(key)?;
        entry.consumed = true;
        Some((entry.value.clone(), entry.line))
    }

    fn field(&self, key: &str) -> String {
        format!("[{}] {}", self.name, key)
    }

    fn required(&mut self, key: &str) -> Result<String, ConfigError> {
        self.raw(key)
            .map(|(v, _)| unquote(&v))
            .ok_or(ConfigError::Validation {
                field: self.field(key),
                message: "missing required key".to_string(),
            })
    }

    fn optional(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|(v, _)| unquote(&v))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<T, ConfigError> {
        value.parse::<T>().map_err(|_| ConfigError::Validation {
            field: self.field(key),
            message: format!(
                "cannot parse {value:?} as {}",
                std::any::type_name::<T>()
            ),
        })
    }

    fn required_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        let v = self.required(key)?;
        self.parse_f64(key, &v)
    }

    fn parse_f64(&self, key: &str, value: &str) -> Result<f64, ConfigError> {
        if value.eq_ignore_ascii_case("inf") || value.eq_ignore_ascii_case("infinity") {
            return Ok(f64::INFINITY);
        }
        self.parse::<f64>(key, value)
    }

    fn optional_f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.optional(key) {
            Some(v) => self.parse_f64(key, &v),
            None => Ok(default),
        }
    }

    fn required_usize(&mut self, key: &str) -> Result<usize, ConfigError> {
        let v = self.required(key)?;
        self.parse(key, &v)
    }

    /// Comma-separated float list, e.g. `center = 0.0, 1.5`.
    fn vector(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.optional(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for part in v.split(',') {
            out.push(self.parse_f64(key, part.trim())?);
        }
        Ok(Some(out))
    }

    /// Rejects keys outside the section's vocabulary before any lookup,
    /// so a typo surfaces as "unknown key" with a suggestion rather than
    /// as a missing required key.
    fn preflight(&self, known: &[&str]) -> Result<(), ConfigError> {
        let Some(section) = self.section.as_ref() else {
            return Ok(());
        };
        for (key, entry) in &section.entries {
            if !known.contains(&key.as_str()) {
                return Err(ConfigError::Parse {
                    line: entry.line,
                    message: format!(
                        "unknown key {key:?} in [{}]{}",
                        self.name,
                        suggestion(key, known)
                    ),
                });
            }
        }
        Ok(())
    }

    fn reject_unknown(&self, known: &[&str]) -> Result<(), ConfigError> {
        let Some(section) = self.section.as_ref() else {
            return Ok(());
        };
        for (key, entry) in &section.entries {
            if !entry.consumed {
                return Err(ConfigError::Parse {
                    line: entry.line,
                    message: format!(
                        "unknown key {key:?} in [{}]{}",
                        self.name,
                        suggestion(key, known)
                    ),
                });
            }
        }
        Ok(())
    }
}

fn validation(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses and fully validates a scenario document; referenced snapshot
/// paths must exist at parse time.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut sections = parse_sections(text)?;
    for name in sections.keys() {
        if !["grid", "initial", "solver", "output"].contains(&name.as_str()) {
            return Err(validation(
                &format!("[{name}]"),
                format!(
                    "unknown section{}",
                    suggestion(name, &["grid", "initial", "solver", "output"])
                ),
            ));
        }
    }

    let mut grid_sec = SectionReader {
        name: "grid",
        section: sections.get_mut("grid"),
    };
    grid_sec.preflight(&["dim", "points", "box_length"])?;
    let dim = grid_sec.required_usize("dim")?;
    let points = grid_sec.required_usize("points")?;
    let box_length = grid_sec.required_f64("box_length")?;
    grid_sec.reject_unknown(&["dim", "points", "box_length"])?;
    let grid = Grid::new(dim, points, box_length)
        .map_err(|e| validation("[grid]", e.to_string()))?;

    let mut init_sec = SectionReader {
        name: "initial",
        section: sections.get_mut("initial"),
    };
    init_sec.preflight(&["kind", "amplitude", "width", "center", "k", "path"])?;
    let kind = init_sec.required("kind")?;
    let initial = match kind.as_str() {
        "gaussian" => {
            let amplitude = init_sec.optional_f64("amplitude", 1.0)?;
            let width = init_sec.optional_f64("width", 1.0)?;
            let center = init_sec.vector("center")?.unwrap_or_else(|| vec![0.0; dim]);
            init_sec.reject_unknown(&["kind", "amplitude", "width", "center"])?;
            if !(width > 0.0 && width.is_finite()) {
                return Err(validation("[initial] width", "width must be positive"));
            }
            if center.len() != dim {
                return Err(validation(
                    "[initial] center",
                    format!("center needs {dim} components, got {}", center.len()),
                ));
            }
            InitialData::Gaussian {
                amplitude,
                width,
                center,
            }
        }
        "plane_wave" => {
            let k = init_sec.vector("k")?.ok_or_else(|| {
                validation("[initial] k", "plane_wave needs a wavenumber vector k")
            })?;
            init_sec.reject_unknown(&["kind", "k"])?;
            if k.len() != dim {
                return Err(validation(
                    "[initial] k",
                    format!("k needs {dim} components, got {}", k.len()),
                ));
            }
            let dk = grid.mode_spacing();
            for ki in &k {
                let m = ki / dk;
                if (m - m.round()).abs() > 1e-9 || m.round() < -(points as f64) / 2.0
                    || m.round() >= points as f64 / 2.0
                {
                    return Err(validation(
                        "[initial] k",
                        format!(
                            "component {ki} is not an on-grid wavenumber (nearest is {})",
                            m.round() * dk
                        ),
                    ));
                }
            }
            InitialData::PlaneWave { k }
        }
        "file" => {
            let path = PathBuf::from(init_sec.required("path")?);
            init_sec.reject_unknown(&["kind", "path"])?;
            if !path.exists() {
                return Err(validation(
                    "[initial] path",
                    format!("snapshot {} does not exist", path.display()),
                ));
            }
            InitialData::File { path }
        }
        other => {
            return Err(validation(
                "[initial] kind",
                format!(
                    "unknown kind {other:?}{}",
                    suggestion(other, &["gaussian", "plane_wave", "file"])
                ),
            ));
        }
    };

    let mut solver_sec = SectionReader {
        name: "solver",
        section: sections.get_mut("solver"),
    };
    solver_sec.preflight(&[
        "lambda",
        "p",
        "t_final",
        "dt",
        "scheme",
        "picard_max_iters",
        "picard_tol",
        "strichartz_q",
        "strichartz_r",
        "strichartz_constant",
        "blowup_threshold",
    ])?;
    let lambda = solver_sec.required_f64("lambda")?;
    let p = solver_sec.required_f64("p")?;
    let t_final = solver_sec.required_f64("t_final")?;
    let dt = solver_sec.required_f64("dt")?;
    let scheme = match solver_sec
        .optional("scheme")
        .unwrap_or_else(|| "strang".to_string())
        .as_str()
    {
        "strang" => Scheme::Strang,
        "picard" => Scheme::Picard,
        other => {
            return Err(validation(
                "[solver] scheme",
                format!(
                    "unknown scheme {other:?}{}",
                    suggestion(other, &["strang", "picard"])
                ),
            ));
        }
    };
    let picard_max_iters = match solver_sec.optional("picard_max_iters") {
        Some(v) => solver_sec.parse(
            "picard_max_iters",
            &v,
        )?,
        None => 30,
    };
    let picard_tol = solver_sec.optional_f64("picard_tol", 1e-10)?;
    let strichartz_q = solver_sec.optional_f64("strichartz_q", f64::INFINITY)?;
    let strichartz_r = solver_sec.optional_f64("strichartz_r", 2.0)?;
    let strichartz_constant = solver_sec.optional_f64("strichartz_constant", 1.0)?;
    let blowup_threshold = solver_sec.optional_f64("blowup_threshold", 1e3)?;
    solver_sec.reject_unknown(&[
        "lambda",
        "p",
        "t_final",
        "dt",
        "scheme",
        "picard_max_iters",
        "picard_tol",
        "strichartz_q",
        "strichartz_r",
        "strichartz_constant",
        "blowup_threshold",
    ])?;

    if dt > t_final {
        return Err(validation("[solver] dt", "dt exceeds T"));
    }
    let strichartz_pair = validate_pair(strichartz_q, strichartz_r, dim)
        .map_err(|e| validation("[solver] strichartz_q/strichartz_r", e.to_string()))?;
    let solver = SolverConfig {
        lambda,
        p,
        t_final,
        dt,
        scheme,
        picard_max_iters,
        picard_tol,
        strichartz_pair,
        strichartz_constant,
        blowup_threshold,
    };
    solver.validate().map_err(|e| validation("[solver]", e.to_string()))?;

    let mut out_sec = SectionReader {
        name: "output",
        section: sections.get_mut("output"),
    };
    out_sec.preflight(&["dir", "snapshot_stride", "seed"])?;
    let output_dir = PathBuf::from(
        out_sec
            .optional("dir")
            .unwrap_or_else(|| "nls-out".to_string()),
    );
    let snapshot_stride = match out_sec.optional("snapshot_stride") {
        Some(v) => out_sec.parse("snapshot_stride", &v)?,
        None => 0,
    };
    let seed = match out_sec.optional("seed") {
        Some(v) => out_sec.parse("seed", &v)?,
        None => 0,
    };
    out_sec.reject_unknown(&["dir", "snapshot_stride", "seed"])?;

    Ok(ScenarioConfig {
        grid,
        initial,
        solver,
        output_dir,
        snapshot_stride,
        seed,
        raw_text: text.to_string(),
    })
}

/// Convenience wrapper reading the document from disk.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Validation {
        field: path.display().to_string(),
        message: format!("cannot read config: {e}"),
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[grid]
dim = 2
points = 64
box_length = 20.0

[initial]
kind = \"gaussian\"

[solver]
lambda = 1.0
p = 2.0
t_final = 1.0
dt = 0.001
";

    #[test]
    fn minimal_config_is_accepted_with_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.grid.dim(), 2);
        assert_eq!(cfg.grid.points_per_axis(), 64);
        assert_eq!(cfg.solver.scheme, Scheme::Strang);
        assert_eq!(cfg.snapshot_stride, 0);
        assert_eq!(cfg.seed, 0);
        assert!(cfg.solver.strichartz_pair.q().is_infinite());
        assert!(matches!(cfg.initial, InitialData::Gaussian { .. }));
    }

    #[test]
    fn dt_exceeding_t_is_a_validation_error() {
        let text = MINIMAL.replace("dt = 0.001", "dt = 2.0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("dt exceeds T"), "{err}");
    }

    #[test]
    fn unknown_key_suggests_the_right_name() {
        let text = MINIMAL.replace("lambda = 1.0", "lamda = 1.0");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lamda"), "{msg}");
        assert!(msg.contains("\"lambda\""), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("[grid\ndim = 2").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }), "{err}");
        let err = parse_config("dim = 2").unwrap_err();
        assert!(err.to_string().contains("before any"), "{err}");
    }

    #[test]
    fn plane_wave_requires_on_grid_wavenumbers() {
        let dk = 2.0 * std::f64::consts::PI / 20.0;
        let good = format!(
            "{}
",
            MINIMAL.replace(
                "kind = \"gaussian\"",
                &format!("kind = \"plane_wave\"\nk = {}, {}", 3.0 * dk, -2.0 * dk)
            )
        );
        let cfg = parse_config(&good).unwrap();
        assert!(matches!(cfg.initial, InitialData::PlaneWave { .. }));
        let bad = MINIMAL.replace("kind = \"gaussian\"", "kind = \"plane_wave\"\nk = 0.1, 0.0");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("on-grid"), "{err}");
    }

    #[test]
    fn file_kind_requires_existing_path() {
        let text = MINIMAL.replace(
            "kind = \"gaussian\"",
            "kind = \"file\"\npath = \"/definitely/not/here.nlsf\"",
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("does not exist"), "{err}");
    }

    #[test]
    fn gaussian_field_matches_formula() {
        let cfg = parse_config(MINIMAL).unwrap();
        let u = cfg.initial.build_field(&cfg.grid).unwrap();
        // amplitude 1, width 1, center 0: value at the origin node is 1.
        let origin_flat = (32 * 64) + 32; // x = (0, 0) at indices (32, 32)
        assert!((u.values()[origin_flat].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn comments_and_bare_strings_are_tolerated() {
        let text = MINIMAL.replace("kind = \"gaussian\"", "kind = gaussian # default datum");
        assert!(parse_config(&text).is_ok());
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[output]\ndir = \"a\"\ndir = \"b\"\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn unknown_section_is_rejected() {
        let text = format!("{MINIMAL}\n[outputs]\ndir = \"a\"\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("\"output\""), "{err}");
    }

    #[test]
    fn keys_for_the_wrong_kind_are_rejected() {
        let text = MINIMAL.replace("kind = \"gaussian\"", "kind = \"gaussian\"\nk = 1.0, 0.0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains('k'), "{err}");
    }
}
