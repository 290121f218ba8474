//! Plane-averaged eikonal phases.
//!
//! For a single plane at the origin, with A the peak of the mean phase and
//! `c = Z Q α`:
//!
//! ```text
//! ⟨χ⟩(x)      = ±A e^{−|x|}
//! ⟨χ χ'⟩(x,x') = π c A S(|x| + |x'|)
//! ⟨χ²⟩(x)     = π c A S(2|x|)
//! ```
//!
//! A stack of planes adds up plane by plane; the cross terms between planes
//! vanish after averaging over independent planes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{self, KernelArg};
use crate::target::{amplitude_a, ProjectileSpec, TargetSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiProfile {
    /// Peak value of the mean phase of one plane.
    pub amplitude: f64,
    /// `Z Q α`.
    pub coupling: f64,
    /// Plane positions in units of R.
    pub plane_xs: Vec<f64>,
    /// +1 or −1.
    pub sign: f64,
}

/// Phase sums of a stack at a pair of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantPhases {
    pub f: Complex64,
    pub f_prime: Complex64,
    pub g_tilde: f64,
}

impl ChiProfile {
    pub fn new(amplitude: f64, coupling: f64, plane_xs: Vec<f64>, sign: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::Domain(format!(
                "amplitude must be non-negative, got {amplitude}"
            )));
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::Domain(format!(
                "coupling must be non-negative, got {coupling}"
            )));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::Domain(format!("sign must be ±1, got {sign}")));
        }
        if plane_xs.is_empty() || plane_xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(
                "plane positions must be finite and non-empty".into(),
            ));
        }
        Ok(ChiProfile {
            amplitude,
            coupling,
            plane_xs,
            sign,
        })
    }

    pub fn from_target(target: &TargetSpec, projectile: &ProjectileSpec) -> Result<Self> {
        target.validate()?;
        projectile.validate()?;
        ChiProfile::new(
            amplitude_a(target, projectile),
            f64::from(target.species.z) * projectile.charge * projectile.alpha,
            target.plane_positions(),
            projectile.sign.factor(),
        )
    }

    /// Same plane functions, a single plane at the origin.
    pub fn single_plane(&self) -> ChiProfile {
        ChiProfile {
            plane_xs: vec![0.0],
            ..self.clone()
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> ChiProfile {
        ChiProfile {
            amplitude,
            ..self.clone()
        }
    }

    /// Phase of one atom at transverse distance `rho`: `±2 Z Q α K₀(ρ)`.
    pub fn chi_atom(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("chi_atom needs rho > 0, got {rho}")));
        }
        Ok(self.sign * 2.0 * self.coupling * specfun::bessel_k(0, rho)?)
    }

    /// `⟨χ₀⟩` of one plane at distance `x`.
    pub fn plane_mean(&self, x: f64) -> f64 {
        self.sign * self.amplitude * (-x.abs()).exp()
    }

    /// `⟨χ₀²⟩` of one plane at distance `x`.
    pub fn plane_sq(&self, x: f64) -> f64 {
        self.plane_corr(x, x)
    }

    /// `⟨χ₀ χ₀'⟩` at Δy = 0 for offsets `x`, `x'` from one plane.
    pub fn plane_corr(&self, x: f64, x_prime: f64) -> f64 {
        self.corr_scale() * specfun::kernel(x.abs() + x_prime.abs())
    }

    /// Kernel argument form of [`plane_corr`](Self::plane_corr).
    pub fn plane_corr_at(&self, xi: KernelArg) -> f64 {
        self.corr_scale() * specfun::plane_kernel(xi)
    }

    /// `π Z Q α A`, the value of `⟨χ₀²⟩` on the plane.
    pub fn corr_scale(&self) -> f64 {
        PI * self.coupling * self.amplitude
    }

    /// `F(x) = Σ_j [i⟨χ_j⟩ − ½⟨χ_j²⟩]`.
    pub fn phase_f(&self, x: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for &xj in &self.plane_xs {
            let d = x - xj;
            im += self.plane_mean(d);
            re -= 0.5 * self.plane_sq(d);
        }
        Complex64::new(re, im)
    }

    /// Linear part of F only: `i Σ_j ⟨χ_j⟩`.
    pub fn phase_linear(&self, x: f64) -> Complex64 {
        Complex64::new(
            0.0,
            self.plane_xs
                .iter()
                .map(|&xj| self.plane_mean(x - xj))
                .sum(),
        )
    }

    /// `G̃(x, x') = Σ_j ⟨χ_j χ'_j⟩`.
    pub fn g_tilde(&self, x: f64, x_prime: f64) -> f64 {
        self.plane_xs
            .iter()
            .map(|&xj| self.plane_corr(x - xj, x_prime - xj))
            .sum()
    }

    pub fn cumulant_phases(&self, x: f64, x_prime: f64) -> CumulantPhases {
        CumulantPhases {
            f: self.phase_f(x),
            f_prime: self.phase_f(x_prime).conj(),
            g_tilde: self.g_tilde(x, x_prime),
        }
    }

    /// Mean phase and variance of the phase of one plane; for diagnostics.
    pub fn max_phase_scale(&self) -> f64 {
        self.amplitude.max(self.corr_scale())
    }
}

/// `1 − e^z` without cancellation for small `z`.
pub fn one_minus_exp(z: Complex64) -> Complex64 {
    let em1 = z.re.exp_m1();
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    // e^z − 1 = (e^a − 1) cos b + (cos b − 1) + i e^a sin b
    let re = em1 * c - 2.0 * half * half;
    let im = (em1 + 1.0) * s;
    Complex64::new(-re, -im)
}
