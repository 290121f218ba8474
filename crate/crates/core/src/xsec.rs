//! Differential cross sections `dσ/dq_x`.
//!
//! Densities are reported per unit `L_y R²`, i.e. as `v` with
//! `dσ/dq_x = v · L_y · R²`, which already includes the `1/2π` of the q_y
//! integration.

use std::f64::consts::PI;

use log::{debug, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chi::{one_minus_exp, ChiProfile};
use crate::error::{Error, Result};
use crate::quadrature::{fourier_1d, fourier_diag_2d_multi, window_bounds, GridSpec};
use crate::target::{ProjectileSpec, TargetSpec, UnitSystem};

/// Tolerance on `total − (coherent + incoherent)` relative to the total.
const SPLIT_TOLERANCE: f64 = 1e-12;
/// Largest imaginary part accepted on a real spectrum, relative to its magnitude.
const IMAGINARY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    StructureFactor,
    #[serde(rename = "direct_2d", alias = "direct")]
    Direct2d,
    Linear,
    Born,
}

impl Route {
    pub const ALL: [Route; 4] = [
        Route::StructureFactor,
        Route::Direct2d,
        Route::Linear,
        Route::Born,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::StructureFactor => "structure_factor",
            Route::Direct2d => "direct_2d",
            Route::Linear => "linear",
            Route::Born => "born",
        }
    }

    pub fn parse(s: &str) -> Result<Route> {
        match s {
            "structure_factor" => Ok(Route::StructureFactor),
            "direct_2d" | "direct" => Ok(Route::Direct2d),
            "linear" => Ok(Route::Linear),
            "born" => Ok(Route::Born),
            other => Err(Error::Config(format!("unknown route '{other}'"))),
        }
    }
}

/// `|Σ_k e^{iq x_k}|²`.
pub fn structure_factor(q: f64, positions: &[f64]) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for &x in positions {
        let (sn, cs) = (q * x).sin_cos();
        c += cs;
        s += sn;
    }
    c * c + s * s
}

/// Single-plane integrals at one momentum.
///
/// With `f = 1 − e^F` and `g = 1 − e^{G̃}`:
/// `I0 = |∫e^{iqx} f|²`, `I1 = ∬ f f̄' g`, `I2 = ∬ g`, `I3 = 2 Re ∬ f g`,
/// each double integral carrying `e^{iq(x−x')}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneIntegrals {
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl PlaneIntegrals {
    /// `−I1 − I2 + I3`.
    pub fn incoherent(&self) -> f64 {
        -self.i1 - self.i2 + self.i3
    }
}

pub fn single_plane_integrals(
    profile: &ChiProfile,
    grid: &GridSpec,
    q_list: &[f64],
) -> Result<(Vec<PlaneIntegrals>, f64)> {
    let p = profile.single_plane();
    let f = |x: f64| one_minus_exp(p.phase_f(x));
    let amp = fourier_1d(f, grid, q_list)?;
    let doubles = fourier_diag_2d_multi(
        |x, xp| {
            let fx = f(x);
            let fxp = f(xp).conj();
            let g = -p.g_tilde(x, xp).exp_m1();
            [fx * fxp * g, Complex64::new(g, 0.0), fx * g]
        },
        grid,
        q_list,
    )?;
    let mut residue = 0.0f64;
    let out = amp
        .iter()
        .zip(&doubles)
        .map(|(a, [i1, i2, i3])| {
            let scale = i1.norm().max(i2.norm()).max(1e-300);
            residue = residue.max(i1.im.abs() / scale).max(i2.im.abs() / scale);
            PlaneIntegrals {
                i0: a.norm_sqr(),
                i1: i1.re,
                i2: i2.re,
                i3: 2.0 * i3.re,
            }
        })
        .collect();
    Ok((out, residue))
}

/// A local maximum of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub q_internal: f64,
    pub q_kev: f64,
    pub value: f64,
    /// Nearest reciprocal-lattice index `j` with `q ≈ 2πj/a`.
    pub lattice_index: i64,
    /// `q − 2πj/a`.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub route: Route,
    pub amplitude: f64,
    pub spacing_over_r: f64,
    pub n_planes: usize,
    pub planes_isolated: bool,
    pub grid: Option<GridSpec>,
    pub window_tol: f64,
    /// Largest imaginary residue found before discarding it.
    pub imaginary_residue: f64,
    /// Size of the neglected `½Σ⟨χ−χ'⟩²` term relative to the kept ones, ~R/L_y.
    pub neglected_term_estimate: f64,
    pub peaks: Vec<Peak>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub q_internal: Vec<f64>,
    pub q_kev: Vec<f64>,
    pub total: Vec<f64>,
    pub coherent: Option<Vec<f64>>,
    pub incoherent: Option<Vec<f64>>,
    pub linear_only: Option<Vec<f64>>,
    pub born_total: Option<Vec<f64>>,
    pub born_coherent: Option<Vec<f64>>,
    pub born_incoherent: Option<Vec<f64>>,
    pub meta: SpectrumMeta,
}

/// Everything a spectrum computation needs.
#[derive(Debug, Clone)]
pub struct Setup {
    pub target: TargetSpec,
    pub projectile: ProjectileSpec,
    pub units: UnitSystem,
    pub window_tol: f64,
    /// Overrides the automatic grid when set.
    pub grid: Option<GridSpec>,
    /// Mean-square thermal displacement for the Born route, in R².
    pub u_x_sq: f64,
}

impl Setup {
    pub fn new(target: TargetSpec, projectile: ProjectileSpec, units: UnitSystem) -> Setup {
        Setup {
            target,
            projectile,
            units,
            window_tol: 1e-10,
            grid: None,
            u_x_sq: 0.0,
        }
    }

    pub fn profile(&self) -> Result<ChiProfile> {
        ChiProfile::from_target(&self.target, &self.projectile)
    }

    fn grid_for(&self, profile: &ChiProfile, q_list: &[f64]) -> Result<GridSpec> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => {
                let q_max = q_list.iter().fold(0.0f64, |m, q| m.max(q.abs()));
                window_bounds(profile, self.window_tol, q_max)
            }
        }
    }

    fn meta(&self, route: Route, profile: &ChiProfile, grid: Option<GridSpec>) -> SpectrumMeta {
        SpectrumMeta {
            route,
            amplitude: profile.amplitude,
            spacing_over_r: self.target.spacing,
            n_planes: self.target.n_planes,
            planes_isolated: self.target.planes_isolated(),
            grid,
            window_tol: self.window_tol,
            imaginary_residue: 0.0,
            neglected_term_estimate: 1.0 / self.target.length_y,
            peaks: Vec::new(),
        }
    }

    fn empty_result(&self, q_list: &[f64], meta: SpectrumMeta) -> SpectrumResult {
        let k = self.units.kev_per_unit();
        SpectrumResult {
            q_internal: q_list.to_vec(),
            q_kev: q_list.iter().map(|q| q * k).collect(),
            total: Vec::new(),
            coherent: None,
            incoherent: None,
            linear_only: None,
            born_total: None,
            born_coherent: None,
            born_incoherent: None,
            meta,
        }
    }
}

fn check_q_list(q_list: &[f64]) -> Result<()> {
    if q_list.iter().any(|q| !q.is_finite()) {
        return Err(Error::Domain("momenta must be finite".into()));
    }
    Ok(())
}

/// Factorized spectrum `(1/2π){D I0 + N_x(−I1 − I2 + I3)}` with the coherent/incoherent split.
pub fn spectrum_structure_factor(setup: &Setup, q_list: &[f64]) -> Result<SpectrumResult> {
    check_q_list(q_list)?;
    let profile = setup.profile()?;
    if setup.target.n_planes > 1 && !setup.target.planes_isolated() {
        warn!(
            "plane spacing {:.3} R: the factorized form is degraded",
            setup.target.spacing
        );
    }
    let grid = setup.grid_for(&profile.single_plane(), q_list)?;
    debug!(
        "structure-factor route on {} base points, x_max = {}",
        grid.n_points, grid.x_max
    );
    let (ints, residue) = single_plane_integrals(&profile, &grid, q_list)?;
    let nx = setup.target.n_planes as f64;
    let positions = &profile.plane_xs;
    let mut coherent = Vec::with_capacity(q_list.len());
    let mut incoherent = Vec::with_capacity(q_list.len());
    let mut total = Vec::with_capacity(q_list.len());
    for (&q, i) in q_list.iter().zip(&ints) {
        let coh = structure_factor(q, positions) * i.i0 / (2.0 * PI);
        let inc = nx * i.incoherent() / (2.0 * PI);
        let tot = coh + inc;
        if (tot - (coh + inc)).abs() > SPLIT_TOLERANCE * tot.abs() {
            return Err(Error::Domain(
                "coherent and incoherent parts do not add up".into(),
            ));
        }
        coherent.push(coh);
        incoherent.push(inc);
        total.push(tot);
    }
    check_residue(residue)?;
    let mut meta = setup.meta(Route::StructureFactor, &profile, Some(grid));
    meta.imaginary_residue = residue;
    let mut r = setup.empty_result(q_list, meta);
    r.total = total;
    r.coherent = Some(coherent);
    r.incoherent = Some(incoherent);
    r.meta.peaks = find_peaks(&r.q_internal, &r.q_kev, &r.total, setup.target.spacing);
    Ok(r)
}

fn check_residue(residue: f64) -> Result<()> {
    if residue > IMAGINARY_TOLERANCE {
        return Err(Error::Domain(format!(
            "imaginary residue {residue:e} exceeds {IMAGINARY_TOLERANCE:e}"
        )));
    }
    Ok(())
}

/// Full stack integrand `1 − e^F − e^{F'} + e^{F+F'+G̃}` transformed in two dimensions.
pub fn spectrum_direct(setup: &Setup, q_list: &[f64]) -> Result<SpectrumResult> {
    check_q_list(q_list)?;
    let profile = setup.profile()?;
    let grid = setup.grid_for(&profile, q_list)?;
    debug!(
        "direct route on {} base points, x_max = {}",
        grid.n_points, grid.x_max
    );
    let xs = &profile.plane_xs;
    // Rewritten as f f̄' − (1 − f)(1 − f̄') g to keep the far field free of cancellation.
    let values = fourier_diag_2d_multi(
        |x, xp| {
            let fx = one_minus_exp(profile.phase_f(x));
            let fxp = one_minus_exp(profile.phase_f(xp)).conj();
            let g_tilde: f64 = xs
                .iter()
                .map(|&xj| profile.plane_corr(x - xj, xp - xj))
                .sum();
            let g = -g_tilde.exp_m1();
            let one = Complex64::new(1.0, 0.0);
            [fx * fxp - (one - fx) * (one - fxp) * g]
        },
        &grid,
        q_list,
    )?;
    let mut residue = 0.0f64;
    let total: Vec<f64> = values
        .iter()
        .map(|[v]| {
            residue = residue.max(v.im.abs() / v.norm().max(1e-300));
            v.re / (2.0 * PI)
        })
        .collect();
    check_residue(residue)?;
    let mut meta = setup.meta(Route::Direct2d, &profile, Some(grid));
    meta.imaginary_residue = residue;
    let mut r = setup.empty_result(q_list, meta);
    r.total = total;
    r.meta.peaks = find_peaks(&r.q_internal, &r.q_kev, &r.total, setup.target.spacing);
    Ok(r)
}

/// Continuous-potential limit: only the mean phase, no correlations.
pub fn spectrum_linear(setup: &Setup, q_list: &[f64]) -> Result<SpectrumResult> {
    check_q_list(q_list)?;
    let profile = setup.profile()?;
    let single = profile.single_plane();
    let grid = setup.grid_for(&single, q_list)?;
    let amp = fourier_1d(|x| one_minus_exp(single.phase_linear(x)), &grid, q_list)?;
    let total: Vec<f64> = q_list
        .iter()
        .zip(&amp)
        .map(|(&q, a)| structure_factor(q, &profile.plane_xs) * a.norm_sqr() / (2.0 * PI))
        .collect();
    let mut r = setup.empty_result(q_list, setup.meta(Route::Linear, &profile, Some(grid)));
    r.linear_only = Some(total.clone());
    r.total = total;
    r.meta.peaks = find_peaks(&r.q_internal, &r.q_kev, &r.total, setup.target.spacing);
    Ok(r)
}

/// `dσ/dq_x` of one atom in the Born approximation, `(2ZQα)² (π/2) (q² + 1)^{−3/2}`.
pub fn born_atom(q: f64, coupling: f64) -> f64 {
    let c = 2.0 * coupling;
    c * c * 0.5 * PI * (q * q + 1.0).powf(-1.5)
}

/// Double-differential Born cross section of one atom, `(2ZQα)²/(q_x² + q_y² + 1)²`.
pub fn born_atom_double(q_x: f64, q_y: f64, coupling: f64) -> f64 {
    let c = 2.0 * coupling;
    let d = q_x * q_x + q_y * q_y + 1.0;
    c * c / (d * d)
}

/// First Born approximation, with optional thermal damping of the coherent part.
pub fn spectrum_born(setup: &Setup, q_list: &[f64]) -> Result<SpectrumResult> {
    check_q_list(q_list)?;
    if !(setup.u_x_sq.is_finite() && setup.u_x_sq >= 0.0) {
        return Err(Error::Config(format!(
            "u_x_sq must be non-negative, got {}",
            setup.u_x_sq
        )));
    }
    let profile = setup.profile()?;
    let t = &setup.target;
    let areal = t.conc_2d * t.length_z; // N_p / L_y
    let nx = t.n_planes as f64;
    let c = 2.0 * profile.coupling;
    let mut coh = Vec::with_capacity(q_list.len());
    let mut inc = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let d = q * q + 1.0;
        let damp = (-q * q * setup.u_x_sq).exp();
        coh.push(
            2.0 * PI * areal * areal * c * c * structure_factor(q, &profile.plane_xs) * damp
                / (d * d),
        );
        inc.push(nx * areal * born_atom(q, profile.coupling));
    }
    let total: Vec<f64> = coh.iter().zip(&inc).map(|(a, b)| a + b).collect();
    let mut r = setup.empty_result(q_list, setup.meta(Route::Born, &profile, None));
    r.born_total = Some(total.clone());
    r.born_coherent = Some(coh);
    r.born_incoherent = Some(inc);
    r.total = total;
    r.meta.peaks = find_peaks(&r.q_internal, &r.q_kev, &r.total, setup.target.spacing);
    Ok(r)
}

pub fn spectrum(setup: &Setup, route: Route, q_list: &[f64]) -> Result<SpectrumResult> {
    match route {
        Route::StructureFactor => spectrum_structure_factor(setup, q_list),
        Route::Direct2d => spectrum_direct(setup, q_list),
        Route::Linear => spectrum_linear(setup, q_list),
        Route::Born => spectrum_born(setup, q_list),
    }
}

/// Interior local maxima of `values`, tagged with the nearest lattice index.
pub fn find_peaks(q: &[f64], q_kev: &[f64], values: &[f64], spacing: f64) -> Vec<Peak> {
    let reciprocal = 2.0 * PI / spacing;
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .map(|i| {
            let j = (q[i] / reciprocal).round();
            Peak {
                q_internal: q[i],
                q_kev: q_kev[i],
                value: values[i],
                lattice_index: j as i64,
                offset: q[i] - j * reciprocal,
            }
        })
        .collect()
}

/// Largest relative deviation of `b` from `a` over points where `a` exceeds
/// `floor` times its maximum.
pub fn max_relative_deviation(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .filter(|(x, _)| x.abs() >= floor * peak)
        .map(|(x, y)| ((y - x) / x).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_factor_basics() {
        assert_eq!(structure_factor(1.234, &[0.0]), 1.0);
        let a = 7.0;
        let xs = [-a, 0.0, a];
        let d = structure_factor(2.0 * PI / a, &xs);
        assert!((d - 9.0).abs() < 1e-12);
        assert!(structure_factor(PI / 2.0, &[-1.0, 1.0]).abs() < 1e-15);
    }

    #[test]
    fn born_closed_form_matches_q_y_integral() {
        let c = 14.0 / 137.035_999;
        for &q in &[0.0, 0.5, 2.0, 10.0] {
            let num = 2.0
                * crate::oracle::integrate_semi_infinite(
                    |qy| born_atom_double(q, qy, c),
                    0.0,
                    1e-13,
                )
                .value;
            let closed = born_atom(q, c);
            assert!((num - closed).abs() < 1e-10 * closed, "q={q}");
        }
    }

    #[test]
    fn peaks_are_tagged() {
        let q: Vec<f64> = (0..100).map(|i| i as f64 * 0.02).collect();
        let v: Vec<f64> = q
            .iter()
            .map(|x| (-(x - 0.9) * (x - 0.9) * 50.0).exp())
            .collect();
        let p = find_peaks(&q, &q, &v, 2.0 * PI);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].lattice_index, 1);
    }

    #[test]
    fn route_names_round_trip() {
        for r in Route::ALL {
            assert_eq!(Route::parse(r.name()).unwrap(), r);
        }
        assert!(Route::parse("fft").is_err());
    }
}
