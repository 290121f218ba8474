//! Target geometry, projectile and units.
//!
//! Internally every length is measured in units of the screening radius R and
//! every momentum in units of 1/R (ħ = 1). Physical values only appear at the
//! edges, through [`UnitSystem`].

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FINE_STRUCTURE: f64 = 1.0 / 137.035_999;
/// ħc in eV·Å.
pub const HBAR_C_EV_ANGSTROM: f64 = 1_973.269_804;
pub const BOHR_RADIUS_ANGSTROM: f64 = 0.529_177_210_903;

/// Planes closer than this (in units of R) are not well isolated.
pub const ISOLATION_THRESHOLD: f64 = 5.0;

/// Atom with a screened Coulomb potential `Ze/r · e^{−r/R}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpecies {
    pub z: u32,
    /// Screening radius in Å.
    pub screening_radius: f64,
}

impl AtomSpecies {
    pub fn new(z: u32, screening_radius: f64) -> Result<Self> {
        let s = AtomSpecies {
            z,
            screening_radius,
        };
        s.validate()?;
        Ok(s)
    }

    /// Thomas–Fermi screening radius `0.8853 a₀ Z^{−1/3}`.
    pub fn thomas_fermi(z: u32) -> Result<Self> {
        if z == 0 {
            return Err(Error::Config("atomic number must be at least 1".into()));
        }
        AtomSpecies::new(
            z,
            0.8853 * BOHR_RADIUS_ANGSTROM * f64::from(z).powf(-1.0 / 3.0),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.z == 0 {
            return Err(Error::Config("atomic number must be at least 1".into()));
        }
        if !(self.screening_radius.is_finite() && self.screening_radius > 0.0) {
            return Err(Error::Config(format!(
                "screening radius must be positive, got {}",
                self.screening_radius
            )));
        }
        Ok(())
    }
}

/// Sign of the mean phase: attractive for electrons on positive nuclei.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChargeSign {
    #[default]
    Attractive,
    Repulsive,
}

impl ChargeSign {
    pub fn factor(self) -> f64 {
        match self {
            ChargeSign::Attractive => 1.0,
            ChargeSign::Repulsive => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectileSpec {
    /// Charge magnitude in units of e.
    pub charge: f64,
    #[serde(default)]
    pub sign: ChargeSign,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    FINE_STRUCTURE
}

impl Default for ProjectileSpec {
    fn default() -> Self {
        ProjectileSpec {
            charge: 1.0,
            sign: ChargeSign::Attractive,
            alpha: FINE_STRUCTURE,
        }
    }
}

impl ProjectileSpec {
    pub fn electron() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        // Zero charge is allowed: it switches the interaction off.
        if !(self.charge.is_finite() && self.charge >= 0.0) {
            return Err(Error::Config(format!(
                "charge must be non-negative, got {}",
                self.charge
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Stack of equidistant atomic planes normal to x. Lengths in units of R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub n_planes: usize,
    pub spacing: f64,
    pub length_y: f64,
    pub length_z: f64,
    /// Atoms per unit area of a plane, in 1/R².
    pub conc_2d: f64,
    pub species: AtomSpecies,
}

impl TargetSpec {
    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        if self.n_planes == 0 {
            return Err(Error::Config("at least one plane is required".into()));
        }
        for (name, v) in [
            ("spacing", self.spacing),
            ("length_y", self.length_y),
            ("length_z", self.length_z),
            ("conc_2d", self.conc_2d),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.atoms_per_plane() < 1.0 {
            return Err(Error::Config(format!(
                "a plane must hold at least one atom, got {}",
                self.atoms_per_plane()
            )));
        }
        if self.n_planes > 1 && !self.planes_isolated() {
            warn!(
                "plane spacing {} R is below {} R; plane overlap is not negligible",
                self.spacing, ISOLATION_THRESHOLD
            );
        }
        Ok(())
    }

    /// `N_p = n_yz L_y L_z`.
    pub fn atoms_per_plane(&self) -> f64 {
        self.conc_2d * self.length_y * self.length_z
    }

    pub fn planes_isolated(&self) -> bool {
        self.spacing >= ISOLATION_THRESHOLD
    }

    /// Centered positions `a (k − (N+1)/2)`, k = 1..N.
    pub fn plane_positions(&self) -> Vec<f64> {
        let center = (self.n_planes as f64 + 1.0) / 2.0;
        (1..=self.n_planes)
            .map(|k| self.spacing * (k as f64 - center))
            .collect()
    }

    /// Chooses `length_z` so that the mean-phase amplitude equals `amplitude`.
    pub fn with_amplitude(mut self, projectile: &ProjectileSpec, amplitude: f64) -> Result<Self> {
        let per_length = amplitude_a(
            &TargetSpec {
                length_z: 1.0,
                ..self.clone()
            },
            projectile,
        );
        if !(amplitude.is_finite() && amplitude > 0.0) || per_length <= 0.0 {
            return Err(Error::Config(format!(
                "cannot reach amplitude {amplitude} with this target and projectile"
            )));
        }
        self.length_z = amplitude / per_length;
        Ok(self)
    }

    /// Si (100) planes: Z = 14, Thomas–Fermi R, a = 1.358 Å, two atoms per
    /// (5.431 Å)² cell face.
    pub fn silicon_100(n_planes: usize) -> (TargetSpec, UnitSystem) {
        let species = AtomSpecies::thomas_fermi(14).expect("valid species");
        let units = UnitSystem::for_species(&species);
        let r = species.screening_radius;
        let lattice = 5.431;
        let target = TargetSpec {
            n_planes,
            spacing: 1.358 / r,
            length_y: 100.0,
            length_z: 100.0,
            conc_2d: 2.0 / (lattice * lattice) * r * r,
            species,
        };
        (target, units)
    }
}

/// Peak value of the plane-averaged phase, `2π Z Q α n_yz L_z R`.
///
/// Equivalently `2π Z Q α N_p R / L_y`. With R = 1 in internal units the last
/// factor drops out.
pub fn amplitude_a(target: &TargetSpec, projectile: &ProjectileSpec) -> f64 {
    2.0 * PI
        * f64::from(target.species.z)
        * projectile.charge
        * projectile.alpha
        * target.conc_2d
        * target.length_z
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Screening radius in Å.
    pub r_angstrom: f64,
    /// ħc in eV·Å.
    #[serde(default = "default_hbar_c")]
    pub hbar_c: f64,
}

fn default_hbar_c() -> f64 {
    HBAR_C_EV_ANGSTROM
}

impl UnitSystem {
    pub fn for_species(species: &AtomSpecies) -> Self {
        UnitSystem {
            r_angstrom: species.screening_radius,
            hbar_c: HBAR_C_EV_ANGSTROM,
        }
    }

    /// keV per internal momentum unit.
    pub fn kev_per_unit(&self) -> f64 {
        self.hbar_c / self.r_angstrom / 1000.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_angstrom.is_finite() && self.r_angstrom > 0.0) {
            return Err(Error::Config(format!(
                "r_angstrom must be positive, got {}",
                self.r_angstrom
            )));
        }
        if !(self.hbar_c.is_finite() && self.hbar_c > 0.0) {
            return Err(Error::Config(format!(
                "hbar_c must be positive, got {}",
                self.hbar_c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToPhysical,
    ToInternal,
}

/// Converts a momentum between 1/R and keV.
pub fn q_convert(q: f64, direction: Direction, units: &UnitSystem) -> f64 {
    match direction {
        Direction::ToPhysical => q * units.kev_per_unit(),
        Direction::ToInternal => q / units.kev_per_unit(),
    }
}
