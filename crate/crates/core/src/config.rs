//! Run configuration: TOML files, unit-tagged quantities and presets.
//!
//! Physical inputs may be given as bare numbers in internal units (R, 1/R) or
//! as `{ value = 1.358, unit = "angstrom" }`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{window_bounds, GridSpec};
use crate::target::{AtomSpecies, ProjectileSpec, TargetSpec, UnitSystem, HBAR_C_EV_ANGSTROM};
use crate::xsec::{Route, Setup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Internal(f64),
    Tagged { value: f64, unit: String },
}

impl Quantity {
    pub fn internal(v: f64) -> Quantity {
        Quantity::Internal(v)
    }

    fn tagged(value: f64, unit: &str) -> Quantity {
        Quantity::Tagged {
            value,
            unit: unit.to_string(),
        }
    }

    /// Converts to internal units; `r` is the screening radius in Å and
    /// `kev` the keV per 1/R.
    fn resolve(&self, kind: Kind, r: f64, kev: f64) -> Result<f64> {
        let (value, unit) = match self {
            Quantity::Internal(v) => return Ok(*v),
            Quantity::Tagged { value, unit } => (*value, unit.to_ascii_lowercase()),
        };
        let factor = match (kind, unit.as_str()) {
            (Kind::Length, "r") | (Kind::Momentum, "r_inv" | "1/r" | "internal") => 1.0,
            (Kind::Area, "r2") | (Kind::Density, "per_r2" | "1/r2") => 1.0,
            (Kind::Length, "angstrom" | "a") => 1.0 / r,
            (Kind::Length, "nm") => 10.0 / r,
            (Kind::Area, "angstrom2" | "a2") => 1.0 / (r * r),
            (Kind::Density, "per_angstrom2" | "1/a2") => r * r,
            (Kind::Momentum, "kev") => 1.0 / kev,
            (Kind::Momentum, "ev") => 1e-3 / kev,
            _ => {
                return Err(Error::Config(format!(
                    "unit '{unit}' is not valid for a {}",
                    kind.name()
                )))
            }
        };
        Ok(value * factor)
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Length,
    Area,
    Density,
    Momentum,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Length => "length",
            Kind::Area => "squared length",
            Kind::Density => "areal density",
            Kind::Momentum => "momentum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub z: u32,
    /// Defaults to the Thomas–Fermi radius.
    #[serde(default)]
    pub screening_radius_angstrom: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub n_planes: usize,
    pub spacing: Quantity,
    pub length_y: Quantity,
    /// Either this or `amplitude` must be given.
    #[serde(default)]
    pub length_z: Option<Quantity>,
    pub conc_2d: Quantity,
    /// Peak mean phase; when set, `length_z` is solved from it.
    #[serde(default)]
    pub amplitude: Option<f64>,
    pub species: SpeciesConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QRange {
    pub min: Quantity,
    pub max: Quantity,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_window_tol")]
    pub window: f64,
    #[serde(default = "default_route_agreement")]
    pub route_agreement: f64,
}

fn default_window_tol() -> f64 {
    1e-10
}

fn default_route_agreement() -> f64 {
    0.05
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            window: default_window_tol(),
            route_agreement: default_route_agreement(),
        }
    }
}

/// Optional override of the automatic quadrature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Mean node spacing in R.
    #[serde(default)]
    pub dx: Option<f64>,
    /// Window half-width in R.
    #[serde(default)]
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_stem")]
    pub stem: String,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_stem() -> String {
    "spectrum".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
            stem: default_stem(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_mc_atoms")]
    pub mc_atoms_per_plane: usize,
    #[serde(default = "default_mc_amplitude")]
    pub mc_amplitude: f64,
    /// Probe offsets from the plane, in R.
    #[serde(default = "default_mc_probes")]
    pub mc_probes: Vec<f64>,
    #[serde(default = "default_atom_cap")]
    pub atom_cap: usize,
}

fn default_mc_samples() -> usize {
    100_000
}
fn default_mc_atoms() -> usize {
    100
}
fn default_mc_amplitude() -> f64 {
    1.0
}
fn default_mc_probes() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0, 5.0]
}
fn default_atom_cap() -> usize {
    crate::mc::DEFAULT_ATOM_CAP
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            mc_samples: default_mc_samples(),
            mc_atoms_per_plane: default_mc_atoms(),
            mc_amplitude: default_mc_amplitude(),
            mc_probes: default_mc_probes(),
            atom_cap: default_atom_cap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub routes: Vec<Route>,
    pub target: TargetConfig,
    #[serde(default)]
    pub projectile: ProjectileSpec,
    /// ħc in eV·Å.
    #[serde(default = "default_hbar_c")]
    pub hbar_c: f64,
    pub q_range: QRange,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridConfig,
    /// Mean-square thermal displacement for the Born route.
    #[serde(default)]
    pub u_x_sq: Option<Quantity>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
}

fn default_hbar_c() -> f64 {
    HBAR_C_EV_ANGSTROM
}

/// A configuration with every quantity in internal units.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub setup: Setup,
    pub q_list: Vec<f64>,
    pub routes: Vec<Route>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
    pub validate: ValidateConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn species(&self) -> Result<AtomSpecies> {
        match self.target.species.screening_radius_angstrom {
            Some(r) => AtomSpecies::new(self.target.species.z, r),
            None => AtomSpecies::thomas_fermi(self.target.species.z),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let species = self.species()?;
        let units = UnitSystem {
            r_angstrom: species.screening_radius,
            hbar_c: self.hbar_c,
        };
        units.validate()?;
        self.projectile.validate()?;
        let r = units.r_angstrom;
        let kev = units.kev_per_unit();
        let t = &self.target;
        let mut target = TargetSpec {
            n_planes: t.n_planes,
            spacing: t.spacing.resolve(Kind::Length, r, kev)?,
            length_y: t.length_y.resolve(Kind::Length, r, kev)?,
            length_z: 1.0,
            conc_2d: t.conc_2d.resolve(Kind::Density, r, kev)?,
            species,
        };
        target = match (t.amplitude, &t.length_z) {
            (Some(a), None) => target.with_amplitude(&self.projectile, a)?,
            (None, Some(lz)) => TargetSpec {
                length_z: lz.resolve(Kind::Length, r, kev)?,
                ..target
            },
            _ => {
                return Err(Error::Config(
                    "target needs exactly one of 'amplitude' and 'length_z'".into(),
                ))
            }
        };
        target.validate()?;

        let q = &self.q_range;
        if q.count < 2 {
            return Err(Error::Config(format!(
                "q_range.count must be at least 2, got {}",
                q.count
            )));
        }
        let q_min = q.min.resolve(Kind::Momentum, r, kev)?;
        let q_max = q.max.resolve(Kind::Momentum, r, kev)?;
        if !(q_min >= 0.0 && q_max > q_min && q_max.is_finite()) {
            return Err(Error::Config(format!(
                "q range must satisfy 0 <= min < max, got [{q_min}, {q_max}]"
            )));
        }
        let q_list: Vec<f64> = (0..q.count)
            .map(|i| q_min + (q_max - q_min) * i as f64 / (q.count - 1) as f64)
            .collect();

        if self.routes.is_empty() {
            return Err(Error::Config("at least one route must be selected".into()));
        }
        let mut routes = Vec::new();
        for r in &self.routes {
            if !routes.contains(r) {
                routes.push(*r);
            }
        }
        let tol = self.tolerances.window;
        if !(tol > 0.0 && tol <= 1e-2) {
            return Err(Error::Config(format!(
                "window tolerance must lie in (0, 1e-2], got {tol}"
            )));
        }
        let u_x_sq = match &self.u_x_sq {
            Some(u) => u.resolve(Kind::Area, r, kev)?,
            None => 0.0,
        };
        let mut setup = Setup::new(target, self.projectile, units);
        setup.window_tol = tol;
        setup.u_x_sq = u_x_sq;
        if self.grid.dx.is_some() || self.grid.x_max.is_some() {
            let profile = setup.profile()?;
            let auto = window_bounds(&profile, tol, q_max)?;
            let x_max = self.grid.x_max.unwrap_or(auto.x_max);
            let dx = self.grid.dx.unwrap_or(auto.dx);
            if !(dx > 0.0 && dx.is_finite()) {
                return Err(Error::Config(format!("grid.dx must be positive, got {dx}")));
            }
            let n = ((2.0 * x_max / dx).round() as usize).max(crate::quadrature::PANEL_ORDER);
            setup.grid = Some(GridSpec::new(x_max, n, profile.plane_xs.clone(), tol)?);
        }
        Ok(ResolvedRun {
            setup,
            q_list,
            routes,
            seed: self.seed,
            tolerances: self.tolerances.clone(),
            output: self.output.clone(),
            validate: self.validate.clone(),
        })
    }

    /// Si (100) stack with the given plane count and amplitude, q up to 40.8 keV.
    pub fn si100(n_planes: usize, amplitude: f64, routes: Vec<Route>) -> RunConfig {
        let lattice = 5.431;
        RunConfig {
            seed: 12345,
            routes,
            target: TargetConfig {
                n_planes,
                spacing: Quantity::tagged(1.358, "angstrom"),
                length_y: Quantity::internal(100.0),
                length_z: None,
                conc_2d: Quantity::tagged(2.0 / (lattice * lattice), "per_angstrom2"),
                amplitude: Some(amplitude),
                species: SpeciesConfig {
                    z: 14,
                    screening_radius_angstrom: None,
                },
            },
            projectile: ProjectileSpec::electron(),
            hbar_c: HBAR_C_EV_ANGSTROM,
            q_range: QRange {
                min: Quantity::tagged(0.0, "kev"),
                max: Quantity::tagged(40.8, "kev"),
                count: 401,
            },
            tolerances: Tolerances::default(),
            grid: GridConfig::default(),
            u_x_sq: None,
            output: OutputConfig::default(),
            validate: ValidateConfig::default(),
        }
    }
}

/// A named scenario.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub config: RunConfig,
}

/// All shipped presets.
pub fn presets() -> Vec<Preset> {
    use Route::*;
    let mut out = vec![
        Preset {
            name: "fig_plane1".into(),
            description: "one Si (100) plane, A = 10: quadratic, linear and Born spectra with the coherent/incoherent split".into(),
            config: RunConfig::si100(1, 10.0, vec![StructureFactor, Linear, Born]),
        },
        Preset {
            name: "fig_planes3".into(),
            description: "three Si (100) planes, A = 10: both eikonal routes plus linear and Born references".into(),
            config: RunConfig::si100(3, 10.0, vec![StructureFactor, Direct2d, Linear, Born]),
        },
    ];
    for n in 1..=5 {
        for a in [1.0, 10.0] {
            out.push(Preset {
                name: format!("si100_n{n}_a{a}"),
                description: format!("{n} Si (100) plane(s), A = {a}, all routes"),
                config: RunConfig::si100(n, a, vec![StructureFactor, Direct2d, Linear, Born]),
            });
        }
    }
    out
}

pub fn preset(name: &str) -> Result<RunConfig> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.config)
        .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))
}

/// Parses `VALUE[unit]`, e.g. `40.8kev`, `4.0` or `3.5r_inv`.
pub fn parse_momentum(text: &str) -> Result<Quantity> {
    let t = text.trim();
    let split = t
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse momentum '{text}'")))?;
    let unit = unit.trim();
    Ok(if unit.is_empty() {
        Quantity::Internal(value)
    } else {
        Quantity::tagged(value, unit)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for p in presets() {
            let r = p.config.resolve().unwrap();
            assert_eq!(r.q_list.len(), 401);
            let a = crate::target::amplitude_a(&r.setup.target, &r.setup.projectile);
            assert!((a - p.config.target.amplitude.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn toml_round_trip() {
        let c = preset("fig_planes3").unwrap();
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn units_convert() {
        let c = preset("fig_plane1").unwrap();
        let r = c.resolve().unwrap();
        let kev = r.setup.units.kev_per_unit();
        assert!((r.q_list.last().unwrap() * kev - 40.8).abs() < 1e-12);
        assert!((r.setup.target.spacing * r.setup.units.r_angstrom - 1.358).abs() < 1e-12);
    }

    #[test]
    fn short_q_range_is_rejected() {
        let mut c = preset("fig_plane1").unwrap();
        c.q_range.count = 1;
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn bad_unit_is_rejected() {
        let mut c = preset("fig_plane1").unwrap();
        c.target.spacing = Quantity::tagged(1.0, "kev");
        assert!(c.resolve().is_err());
    }

    #[test]
    fn momentum_flag_parsing() {
        assert_eq!(parse_momentum("4.0").unwrap(), Quantity::Internal(4.0));
        assert_eq!(
            parse_momentum("40.8kev").unwrap(),
            Quantity::tagged(40.8, "kev")
        );
        assert_eq!(
            parse_momentum("1e1 keV").unwrap(),
            Quantity::tagged(10.0, "keV")
        );
        assert!(parse_momentum("kev").is_err());
    }
}
