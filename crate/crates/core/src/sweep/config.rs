//! Sweep configuration: TOML schema, unit handling and grid expansion.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constants;
use crate::dynamics::DensityMatrix;
use crate::matprops::{surface_resonance, PermittivityModel, TabulatedPermittivity};
use crate::quadrature::Accuracy;
use crate::rates::DipoleSpec;

use super::SweepError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Rates,
    Steady,
    Dynamics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Steady => "steady",
            Command::Dynamics => "dynamics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    /// Command run by `sweep` and `figure`; the explicit subcommands ignore it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub material: MaterialSpec,
    #[serde(default)]
    pub atom: AtomSpec,
    pub frequency: FrequencySpec,
    pub geometry: GeometrySpec,
    /// (T_W, T_M) pairs.
    pub temperatures: Vec<TemperaturePair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSpec>,
    #[serde(default)]
    pub run: RunSpec,
    /// Destination only; never echoed into the output.
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    /// gaas, gold, vacuum, mirror, drude_lorentz, drude or table.
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_inf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_pl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Two- or three-column file (ω, Re ε, Im ε), relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    #[default]
    TwoLevel,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    #[serde(default)]
    pub scheme: SchemeKind,
    /// parallel, perpendicular or isotropic.
    #[serde(default = "default_orientation")]
    pub dipole: String,
    /// |d| in C·m.
    #[serde(default = "default_dipole_magnitude")]
    pub dipole_magnitude: f64,
}

fn default_orientation() -> String {
    "isotropic".into()
}

fn default_dipole_magnitude() -> f64 {
    1e-29
}

impl Default for AtomSpec {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::TwoLevel,
            dipole: default_orientation(),
            dipole_magnitude: default_dipole_magnitude(),
        }
    }
}

/// A grid: exactly one of `values`, `lin` or `log` (the last two with `num`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lin: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega31: Option<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega32: Option<AxisSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub z: AxisSpec,
    /// `inf` selects the semi-infinite slab.
    pub delta: AxisSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperaturePair {
    pub t_w: f64,
    pub t_m: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub times: AxisSpec,
    /// "ground" or "excited" (the top level).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_populations: Option<Vec<f64>>,
    /// Pure initial state as [re, im] amplitudes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_amplitudes: Option<Vec<[f64; 2]>>,
    /// Added to the bare splittings: Δω for two levels, (Δ₂₁, Δ₃₁, Δ₃₂) for Λ, rad/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lamb_shifts: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// "standard" (default) or "survey".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    /// Worker threads; does not affect output, so it is not echoed.
    #[serde(default, skip_serializing)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| SweepError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(SweepError::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Reads a file; a relative material table path is taken relative to it.
    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SweepError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(t), Some(dir)) = (cfg.material.table.as_mut(), path.parent()) {
            if t.is_relative() {
                *t = dir.join(&*t);
            }
        }
        Ok(cfg)
    }

    /// Normalized TOML text, as echoed into output metadata.
    pub fn echo(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn resolve(&self, command: Command) -> Result<Resolved, SweepError> {
        let cfg = |m: String| SweepError::Config(m);
        let model = self.material.to_model().map_err(cfg)?;
        let units = UnitContext::new(&model);
        let dipole = DipoleSpec::preset(&self.atom.dipole, self.atom.dipole_magnitude)
            .map_err(|e| cfg(format!("atom.dipole: {e}")))?;
        if !(self.atom.dipole_magnitude > 0.0 && self.atom.dipole_magnitude.is_finite()) {
            return Err(cfg("atom.dipole_magnitude must be > 0".into()));
        }

        let z = resolve_axis("geometry.z", &self.geometry.z, AxisKind::Length, &units)?;
        if z.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(cfg("axis geometry.z: distances must be finite and > 0".into()));
        }
        let delta = resolve_axis("geometry.delta", &self.geometry.delta, AxisKind::Thickness, &units)?;
        if delta.iter().any(|&x| !(x > 0.0)) {
            return Err(cfg("axis geometry.delta: thicknesses must be > 0".into()));
        }

        if self.temperatures.is_empty() {
            return Err(cfg("axis temperatures is empty".into()));
        }
        for (i, t) in self.temperatures.iter().enumerate() {
            for (name, v) in [("t_w", t.t_w), ("t_m", t.t_m)] {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(cfg(format!("temperatures[{i}].{name} must be finite and >= 0, got {v}")));
                }
            }
        }

        let f = &self.frequency;
        let need = |name: &str, a: &Option<AxisSpec>| -> Result<Vec<f64>, SweepError> {
            let a = a.as_ref().ok_or_else(|| cfg(format!("axis frequency.{name} is required")))?;
            let v = resolve_axis(&format!("frequency.{name}"), a, AxisKind::Frequency, &units)?;
            if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(cfg(format!("axis frequency.{name}: frequencies must be finite and > 0")));
            }
            Ok(v)
        };
        let unused = |name: &str, a: &Option<AxisSpec>| -> Result<(), SweepError> {
            if a.is_some() {
                return Err(cfg(format!("frequency.{name} is not used by this scheme/command")));
            }
            Ok(())
        };
        let freq = match (command, self.atom.scheme) {
            (Command::Rates, _) | (_, SchemeKind::TwoLevel) => {
                unused("omega31", &f.omega31)?;
                unused("omega32", &f.omega32)?;
                FreqGrid::Single(need("omega", &f.omega)?)
            }
            (_, SchemeKind::Lambda) => {
                unused("omega", &f.omega)?;
                FreqGrid::Lambda {
                    omega31: need("omega31", &f.omega31)?,
                    omega32: need("omega32", &f.omega32)?,
                }
            }
        };

        let dynamics = match (command, &self.dynamics) {
            (Command::Dynamics, None) => return Err(cfg("the dynamics command needs a [dynamics] table".into())),
            (Command::Dynamics, Some(d)) => {
                let dim = match self.atom.scheme {
                    SchemeKind::TwoLevel => 2,
                    SchemeKind::Lambda => 3,
                };
                Some(d.resolve(dim, &units)?)
            }
            _ => None,
        };

        Ok(Resolved {
            command,
            model,
            scheme: self.atom.scheme,
            dipole,
            freq,
            z,
            delta,
            temperatures: self.temperatures.clone(),
            dynamics,
            accuracy: self.run.to_accuracy().map_err(cfg)?,
        })
    }
}

impl MaterialSpec {
    pub fn to_model(&self) -> Result<PermittivityModel, String> {
        let get = |name: &str, v: Option<f64>| v.ok_or_else(|| format!("material.{name} is required for model '{}'", self.model));
        let allowed: &[&str] = match self.model.as_str() {
            "gaas" | "gold" | "vacuum" | "mirror" => &[],
            "drude_lorentz" => &["eps_inf", "omega_l", "omega_r", "gamma"],
            "drude" => &["omega_pl", "gamma"],
            "table" => &["table"],
            other => {
                return Err(format!(
                    "unknown material.model '{other}' (gaas, gold, vacuum, mirror, drude_lorentz, drude, table)"
                ))
            }
        };
        let present = [
            ("eps_inf", self.eps_inf.is_some()),
            ("omega_l", self.omega_l.is_some()),
            ("omega_r", self.omega_r.is_some()),
            ("omega_pl", self.omega_pl.is_some()),
            ("gamma", self.gamma.is_some()),
            ("table", self.table.is_some()),
        ];
        if let Some((name, _)) = present.iter().find(|(n, p)| *p && !allowed.contains(n)) {
            return Err(format!("material.{name} does not apply to model '{}'", self.model));
        }
        let model = match self.model.as_str() {
            "gaas" => PermittivityModel::gaas(),
            "gold" => PermittivityModel::gold(),
            "vacuum" => PermittivityModel::Vacuum,
            "mirror" => PermittivityModel::PerfectMirror,
            "drude_lorentz" => PermittivityModel::DrudeLorentz {
                eps_inf: get("eps_inf", self.eps_inf)?,
                omega_l: get("omega_l", self.omega_l)?,
                omega_r: get("omega_r", self.omega_r)?,
                gamma: get("gamma", self.gamma)?,
            },
            "drude" => PermittivityModel::Drude {
                omega_pl: get("omega_pl", self.omega_pl)?,
                gamma: get("gamma", self.gamma)?,
            },
            _ => {
                let path = self.table.as_ref().ok_or("material.table is required for model 'table'")?;
                PermittivityModel::Tabulated(TabulatedPermittivity::load(path).map_err(|e| format!("material.table: {e}"))?)
            }
        };
        model.validate().map_err(|e| format!("material: {e}"))?;
        Ok(model)
    }
}

impl RunSpec {
    fn to_accuracy(&self) -> Result<Accuracy, String> {
        let base = match self.accuracy.as_deref() {
            None | Some("standard") => Accuracy::Standard,
            Some("survey") => Accuracy::Survey,
            Some(other) => return Err(format!("unknown run.accuracy '{other}' (standard, survey)")),
        };
        match (self.rel_tol, self.abs_tol) {
            (None, None) => Ok(base),
            (rel, abs) => {
                if base != Accuracy::Standard {
                    return Err("run.rel_tol/abs_tol cannot be combined with accuracy = \"survey\"".into());
                }
                let rel = rel.unwrap_or(1e-10);
                let abs = abs.unwrap_or(1e-15);
                if !(rel > 0.0 && rel < 1.0 && abs >= 0.0 && abs.is_finite()) {
                    return Err(format!("run tolerances out of range: rel_tol = {rel}, abs_tol = {abs}"));
                }
                Ok(Accuracy::Custom { rel, abs })
            }
        }
    }
}

impl DynamicsSpec {
    fn resolve(&self, dim: usize, units: &UnitContext) -> Result<ResolvedDynamics, SweepError> {
        let cfg = |m: String| SweepError::Config(m);
        let times = resolve_axis("dynamics.times", &self.times, AxisKind::Time, units)?;
        if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(cfg("axis dynamics.times must be finite, >= 0 and strictly increasing".into()));
        }
        let given = [self.initial.is_some(), self.initial_populations.is_some(), self.initial_amplitudes.is_some()];
        if given.iter().filter(|&&g| g).count() > 1 {
            return Err(cfg("give only one of dynamics.initial, initial_populations, initial_amplitudes".into()));
        }
        let state = |r: crate::Result<DensityMatrix>| r.map_err(|e| cfg(format!("dynamics initial state: {e}")));
        let rho0 = if let Some(p) = &self.initial_populations {
            if p.len() != dim {
                return Err(cfg(format!("dynamics.initial_populations needs {dim} entries")));
            }
            state(DensityMatrix::from_populations(p))?
        } else if let Some(a) = &self.initial_amplitudes {
            if a.len() != dim {
                return Err(cfg(format!("dynamics.initial_amplitudes needs {dim} entries")));
            }
            let psi: Vec<_> = a.iter().map(|x| num_complex::Complex64::new(x[0], x[1])).collect();
            state(DensityMatrix::pure(&psi))?
        } else {
            match self.initial.as_deref().unwrap_or("ground") {
                "ground" => state(DensityMatrix::ground(dim))?,
                "excited" => state(DensityMatrix::basis(dim, dim - 1))?,
                other => return Err(cfg(format!("unknown dynamics.initial '{other}' (ground, excited)"))),
            }
        };
        let n_shifts = if dim == 2 { 1 } else { 3 };
        let shifts = self.lamb_shifts.clone().unwrap_or_else(|| vec![0.0; n_shifts]);
        if shifts.len() != n_shifts || shifts.iter().any(|x| !x.is_finite()) {
            return Err(cfg(format!("dynamics.lamb_shifts needs {n_shifts} finite entries")));
        }
        Ok(ResolvedDynamics { times, rho0, lamb_shifts: shifts })
    }
}

/// Frequency axes of a resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum FreqGrid {
    Single(Vec<f64>),
    Lambda { omega31: Vec<f64>, omega32: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedDynamics {
    pub times: Vec<f64>,
    pub rho0: DensityMatrix,
    pub lamb_shifts: Vec<f64>,
}

/// Configuration in SI units, validated for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub command: Command,
    pub model: PermittivityModel,
    pub scheme: SchemeKind,
    pub dipole: DipoleSpec,
    pub freq: FreqGrid,
    pub z: Vec<f64>,
    /// Thicknesses; `f64::INFINITY` is the semi-infinite slab.
    pub delta: Vec<f64>,
    pub temperatures: Vec<TemperaturePair>,
    pub dynamics: Option<ResolvedDynamics>,
    pub accuracy: Accuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisKind {
    Length,
    Thickness,
    Frequency,
    Time,
}

struct UnitContext {
    omega_r: Option<f64>,
    omega_p: Option<f64>,
    omega_pl: Option<f64>,
}

impl UnitContext {
    fn new(model: &PermittivityModel) -> Self {
        let (omega_r, omega_pl) = match *model {
            PermittivityModel::DrudeLorentz { omega_r, .. } => (Some(omega_r), None),
            PermittivityModel::Drude { omega_pl, .. } => (None, Some(omega_pl)),
            _ => (None, None),
        };
        Self { omega_r, omega_p: surface_resonance(model).ok(), omega_pl }
    }

    fn scale(&self, axis: &str, kind: AxisKind, unit: Option<&str>) -> Result<f64, SweepError> {
        let missing = |u: &str| SweepError::Config(format!("axis {axis}: unit '{u}' is not defined for this material"));
        let s = match (kind, unit) {
            (AxisKind::Length | AxisKind::Thickness, None | Some("m")) => 1.0,
            (AxisKind::Length | AxisKind::Thickness, Some("cm")) => 1e-2,
            (AxisKind::Length | AxisKind::Thickness, Some("mm")) => 1e-3,
            (AxisKind::Length | AxisKind::Thickness, Some("um")) => 1e-6,
            (AxisKind::Length | AxisKind::Thickness, Some("nm")) => 1e-9,
            (AxisKind::Frequency, None | Some("rad_s")) => 1.0,
            (AxisKind::Frequency, Some("omega_room")) => constants::gold::OMEGA_ROOM,
            (AxisKind::Frequency, Some(u @ "omega_r")) => self.omega_r.ok_or_else(|| missing(u))?,
            (AxisKind::Frequency, Some(u @ "omega_p")) => self.omega_p.ok_or_else(|| missing(u))?,
            (AxisKind::Frequency, Some(u @ "omega_pl")) => self.omega_pl.ok_or_else(|| missing(u))?,
            (AxisKind::Time, None | Some("s")) => 1.0,
            (AxisKind::Time, Some("ms")) => 1e-3,
            (AxisKind::Time, Some("us")) => 1e-6,
            (AxisKind::Time, Some("ns")) => 1e-9,
            (AxisKind::Time, Some("ps")) => 1e-12,
            (AxisKind::Time, Some("fs")) => 1e-15,
            (_, Some(u)) => return Err(SweepError::Config(format!("axis {axis}: unknown unit '{u}'"))),
        };
        Ok(s)
    }
}

fn resolve_axis(name: &str, a: &AxisSpec, kind: AxisKind, units: &UnitContext) -> Result<Vec<f64>, SweepError> {
    let err = |m: &str| SweepError::Config(format!("axis {name}: {m}"));
    let scale = units.scale(name, kind, a.unit.as_deref())?;
    let raw = match (&a.values, a.lin, a.log) {
        (Some(v), None, None) => {
            if a.num.is_some() {
                return Err(err("'num' only applies to lin/log grids"));
            }
            v.clone()
        }
        (None, Some([lo, hi]), None) | (None, None, Some([lo, hi])) => {
            let n = a.num.ok_or_else(|| err("lin/log grids need 'num'"))?;
            if n == 0 {
                return Err(err("axis is empty (num = 0)"));
            }
            if !(lo.is_finite() && hi.is_finite()) || (n > 1 && lo == hi) {
                return Err(err("grid ends must be finite and distinct"));
            }
            let frac = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            if a.lin.is_some() {
                (0..n).map(|i| lo + (hi - lo) * frac(i)).collect()
            } else {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(err("log grid ends must be > 0"));
                }
                (0..n).map(|i| lo * (hi / lo).powf(frac(i))).collect()
            }
        }
        (None, None, None) => return Err(err("axis is empty (give values, lin or log)")),
        _ => return Err(err("give exactly one of values, lin, log")),
    };
    if raw.is_empty() {
        return Err(err("axis is empty"));
    }
    if raw.iter().any(|x| x.is_nan()) {
        return Err(err("NaN in grid"));
    }
    if kind != AxisKind::Thickness && raw.iter().any(|x| x.is_infinite()) {
        return Err(err("grid values must be finite"));
    }
    let inc = raw.windows(2).all(|w| w[1] > w[0]);
    let dec = raw.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(err("grid must be strictly monotone"));
    }
    Ok(raw.iter().map(|x| x * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
[material]
model = "gaas"
[frequency]
omega = { values = [1.2], unit = "omega_r" }
[geometry]
z = { log = [0.01, 100.0], num = 5, unit = "um" }
delta = { values = [inf] }
[[temperatures]]
t_w = 600.0
t_m = 100.0
"#;

    #[test]
    fn parses_and_resolves() {
        let c = SweepConfig::from_toml_str(BASE).unwrap();
        let r = c.resolve(Command::Rates).unwrap();
        assert_eq!(r.z.len(), 5);
        assert!((r.z[0] - 1e-8).abs() < 1e-22 && (r.z[4] - 1e-4).abs() < 1e-18);
        assert_eq!(r.delta, vec![f64::INFINITY]);
        assert_eq!(r.freq, FreqGrid::Single(vec![1.2 * constants::gaas::OMEGA_R]));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let t = BASE.replace("model = \"gaas\"", "model = \"gaas\"\ncolour = 3");
        assert!(matches!(SweepConfig::from_toml_str(&t), Err(SweepError::Config(_))));
        let t = BASE.replace("schema_version = 1", "schema_version = 1\nbogus = true");
        assert!(SweepConfig::from_toml_str(&t).is_err());
    }

    #[test]
    fn empty_axis_names_the_axis() {
        let t = BASE.replace("z = { log = [0.01, 100.0], num = 5, unit = \"um\" }", "z = { values = [] }");
        let e = SweepConfig::from_toml_str(&t).unwrap().resolve(Command::Rates).unwrap_err();
        assert!(e.to_string().contains("geometry.z"), "{e}");
    }

    #[test]
    fn monotone_and_schema_checks() {
        let t = BASE.replace("values = [1.2]", "values = [1.2, 1.1, 1.3]");
        assert!(SweepConfig::from_toml_str(&t).unwrap().resolve(Command::Rates).is_err());
        let t = BASE.replace("schema_version = 1", "schema_version = 2");
        assert!(SweepConfig::from_toml_str(&t).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = SweepConfig::from_toml_str(BASE).unwrap();
        let back = SweepConfig::from_toml_str(&c.echo()).unwrap();
        assert_eq!(back, c);
    }
}
