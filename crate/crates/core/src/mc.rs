//! Monte Carlo averages over explicit atom configurations.
//!
//! Atoms sit on their planes with y drawn uniformly from `[−L_y/2, L_y/2]`;
//! z does not enter the line-integrated phase. Samples are drawn in fixed-size
//! batches, batch `b` using stream `b` of a ChaCha8 generator seeded with the
//! run seed, so the estimate does not depend on how batches are scheduled.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chi::ChiProfile;
use crate::error::{Error, Result};
use crate::oracle;
use crate::target::TargetSpec;

/// Default limit on the number of atoms in one configuration.
pub const DEFAULT_ATOM_CAP: usize = 20_000;
/// Samples per batch.
pub const BATCH_SIZE: usize = 4096;
/// Samples with an atom closer than this to a probe point are rejected.
pub const MIN_RHO: f64 = 1e-9;

/// A point in the transverse (x, y) plane, in units of R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Complex64,
    pub std_error: f64,
    /// Accepted samples.
    pub n_samples: usize,
    /// Samples rejected because an atom sat on a probe point.
    pub n_rejected: usize,
    pub seed: u64,
}

impl McEstimate {
    /// False when the standard error is above the requested tolerance.
    pub fn sufficient(&self, tol: f64) -> bool {
        self.std_error <= tol
    }
}

/// Integer number of atoms per plane.
pub fn atoms_per_plane(target: &TargetSpec) -> usize {
    target.atoms_per_plane().round().max(1.0) as usize
}

fn check_cap(target: &TargetSpec, cap: usize) -> Result<usize> {
    let n = atoms_per_plane(target);
    let total = n.saturating_mul(target.n_planes);
    if total > cap {
        return Err(Error::CapExceeded {
            requested: total,
            cap,
        });
    }
    Ok(n)
}

fn fill_configuration(
    rng: &mut ChaCha8Rng,
    xs: &[f64],
    per_plane: usize,
    half: f64,
    out: &mut Vec<Point>,
) {
    out.clear();
    for &x in xs {
        for _ in 0..per_plane {
            out.push(Point {
                x,
                y: rng.random_range(-half..half),
            });
        }
    }
}

/// One random configuration: every plane populated with uniform y.
pub fn sample_configuration(target: &TargetSpec, seed: u64, cap: usize) -> Result<Vec<Point>> {
    target.validate()?;
    let n = check_cap(target, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n * target.n_planes);
    fill_configuration(
        &mut rng,
        &target.plane_positions(),
        n,
        0.5 * target.length_y,
        &mut out,
    );
    Ok(out)
}

/// Probe points and whether the difference form is wanted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub rho: Point,
    pub rho_prime: Option<Point>,
}

/// Estimates `⟨e^{iχ(ρ)}⟩`, or `⟨e^{i[χ(ρ) − χ(ρ')]}⟩` when `rho_prime` is set.
pub fn averaged_phase_mc(
    target: &TargetSpec,
    profile: &ChiProfile,
    probe: Probe,
    n_samples: usize,
    seed: u64,
    cap: usize,
) -> Result<McEstimate> {
    Ok(averaged_phase_mc_many(target, profile, &[probe], n_samples, seed, cap)?[0])
}

#[derive(Clone, Copy)]
struct Sums {
    re: f64,
    im: f64,
    sq: f64,
    accepted: usize,
    rejected: usize,
}

/// Several probes evaluated on the same configurations.
pub fn averaged_phase_mc_many(
    target: &TargetSpec,
    profile: &ChiProfile,
    probes: &[Probe],
    n_samples: usize,
    seed: u64,
    cap: usize,
) -> Result<Vec<McEstimate>> {
    target.validate()?;
    let per_plane = check_cap(target, cap)?;
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be positive".into()));
    }
    let xs = target.plane_positions();
    let half = 0.5 * target.length_y;
    let scale = profile.sign * 2.0 * profile.coupling;
    let n_batches = n_samples.div_ceil(BATCH_SIZE);
    let zero = Sums {
        re: 0.0,
        im: 0.0,
        sq: 0.0,
        accepted: 0,
        rejected: 0,
    };

    let per_batch: Vec<Vec<Sums>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = BATCH_SIZE.min(n_samples - b * BATCH_SIZE);
            let mut sums = vec![zero; probes.len()];
            let mut atoms = Vec::with_capacity(per_plane * xs.len());
            for _ in 0..count {
                fill_configuration(&mut rng, &xs, per_plane, half, &mut atoms);
                for (probe, s) in probes.iter().zip(sums.iter_mut()) {
                    match configuration_phase(&atoms, probe, scale) {
                        Some(phase) => {
                            let (sn, cs) = phase.sin_cos();
                            s.re += cs;
                            s.im += sn;
                            s.sq += 1.0;
                            s.accepted += 1;
                        }
                        None => s.rejected += 1,
                    }
                }
            }
            sums
        })
        .collect();

    let mut totals = vec![zero; probes.len()];
    for batch in per_batch {
        for (t, s) in totals.iter_mut().zip(batch) {
            t.re += s.re;
            t.im += s.im;
            t.sq += s.sq;
            t.accepted += s.accepted;
            t.rejected += s.rejected;
        }
    }
    Ok(totals
        .into_iter()
        .map(|t| {
            let n = t.accepted.max(1) as f64;
            let mean = Complex64::new(t.re / n, t.im / n);
            let var = (t.sq / n - mean.norm_sqr()).max(0.0);
            let std_error = if t.accepted > 1 {
                (var / (n - 1.0)).sqrt()
            } else {
                f64::INFINITY
            };
            McEstimate {
                mean,
                std_error,
                n_samples: t.accepted,
                n_rejected: t.rejected,
                seed,
            }
        })
        .collect())
}

/// Total phase of a configuration at a probe, `None` if an atom sits on it.
fn configuration_phase(atoms: &[Point], probe: &Probe, scale: f64) -> Option<f64> {
    let mut phase = 0.0;
    for a in atoms {
        phase += atom_phase(a, &probe.rho)?;
        if let Some(rp) = &probe.rho_prime {
            phase -= atom_phase(a, rp)?;
        }
    }
    Some(scale * phase)
}

fn atom_phase(atom: &Point, at: &Point) -> Option<f64> {
    let rho = (atom.x - at.x).hypot(atom.y - at.y);
    if rho < MIN_RHO {
        return None;
    }
    Some(crate::specfun::bessel_k01(rho).0)
}

/// Second-order cumulant prediction with a truncation allowance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantPrediction {
    /// `exp Σ_j [i⟨χ_j⟩ − ½⟨χ_j²⟩ + ½⟨χ_j⟩²/N_p]` from the plane-averaged functions.
    pub second_order: Complex64,
    /// `e^F`, the same without the `⟨χ_j⟩²/N_p` variance correction.
    pub plane_only: Complex64,
    /// Prediction with the numerically measured third cumulant added.
    pub third_order: Complex64,
    /// `|third_order − second_order|`.
    pub allowance: f64,
}

/// Single-atom cumulants `κ₁..κ₄` of the phase at a probe, for y₀ uniform
/// on the finite plane at `plane_x`.
pub fn single_atom_cumulants(
    target: &TargetSpec,
    profile: &ChiProfile,
    probe: Probe,
    plane_x: f64,
) -> [f64; 4] {
    let half = 0.5 * target.length_y;
    let scale = profile.sign * 2.0 * profile.coupling;
    let k0 = |r: f64| {
        if r < 1e-300 {
            0.0
        } else {
            crate::specfun::bessel_k01(r).0
        }
    };
    let phase = |y0: f64| {
        let mut v = k0((probe.rho.x - plane_x).hypot(probe.rho.y - y0));
        if let Some(rp) = probe.rho_prime {
            v -= k0((rp.x - plane_x).hypot(rp.y - y0));
        }
        scale * v
    };
    let mut breaks = vec![-half, probe.rho.y, half];
    if let Some(rp) = probe.rho_prime {
        breaks.push(rp.y);
    }
    breaks.retain(|y| y.abs() <= half);
    breaks.sort_by(f64::total_cmp);
    let moment = |p: i32| {
        oracle::integrate_with_breaks(|y| phase(y).powi(p), &breaks, 1e-16, 1e-12).value
            / target.length_y
    };
    let (m1, m2, m3, m4) = (moment(1), moment(2), moment(3), moment(4));
    [
        m1,
        m2 - m1 * m1,
        m3 - 3.0 * m2 * m1 + 2.0 * m1.powi(3),
        m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1 * m1 - 6.0 * m1.powi(4),
    ]
}

/// Cumulant prediction for `⟨e^{iχ(x)}⟩` on the line y = 0.
///
/// The second-order part uses the closed-form plane functions; the allowance
/// adds the third cumulant measured by quadrature over the finite plane.
pub fn cumulant_prediction(
    target: &TargetSpec,
    profile: &ChiProfile,
    x: f64,
) -> CumulantPrediction {
    let np = target.atoms_per_plane().round().max(1.0);
    let f = profile.phase_f(x);
    let correction: f64 = profile
        .plane_xs
        .iter()
        .map(|&xj| profile.plane_mean(x - xj).powi(2))
        .sum::<f64>()
        / (2.0 * np);
    let probe = Probe {
        rho: Point::new(x, 0.0),
        rho_prime: None,
    };
    let k3: f64 = profile
        .plane_xs
        .iter()
        .map(|&xj| single_atom_cumulants(target, profile, probe, xj)[2])
        .sum();
    let second = f + correction;
    // i³ κ₃ / 6
    let third = second + Complex64::new(0.0, -np * k3 / 6.0);
    let second_order = second.exp();
    let third_order = third.exp();
    CumulantPrediction {
        second_order,
        plane_only: f.exp(),
        third_order,
        allowance: (third_order - second_order).norm(),
    }
}

/// `π e^{−|x|}`, the y-integral of `K₀(√(x² + y²))`; used as a cross-check of the moments.
pub fn k0_line_integral(x: f64) -> f64 {
    PI * (-x.abs()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{AtomSpecies, ProjectileSpec};

    fn target(np: f64) -> TargetSpec {
        TargetSpec {
            n_planes: 1,
            spacing: 7.0,
            length_y: 40.0,
            length_z: 1.0,
            conc_2d: np / 40.0,
            species: AtomSpecies::new(14, 0.194).unwrap(),
        }
    }

    #[test]
    fn configuration_is_reproducible() {
        let t = target(50.0);
        let a = sample_configuration(&t, 7, DEFAULT_ATOM_CAP).unwrap();
        let b = sample_configuration(&t, 7, DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|p| p.x == 0.0 && p.y.abs() <= 20.0));
    }

    #[test]
    fn cap_is_enforced() {
        let t = target(500.0);
        assert!(matches!(
            sample_configuration(&t, 1, 100),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn zero_charge_gives_unity() {
        let t = target(20.0);
        let p = ProjectileSpec {
            charge: 0.0,
            ..Default::default()
        };
        let prof = ChiProfile::from_target(&t, &p).unwrap();
        let probe = Probe {
            rho: Point::new(0.3, 0.0),
            rho_prime: None,
        };
        let e = averaged_phase_mc(&t, &prof, probe, 1000, 3, DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(e.mean, Complex64::new(1.0, 0.0));
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn identical_points_give_unity_difference() {
        let t = target(20.0);
        let prof = ChiProfile::from_target(&t, &ProjectileSpec::electron()).unwrap();
        let p = Point::new(0.5, 1.0);
        let probe = Probe {
            rho: p,
            rho_prime: Some(p),
        };
        let e = averaged_phase_mc(&t, &prof, probe, 1000, 3, DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(e.mean, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn first_moment_matches_line_integral() {
        let t = target(1.0);
        let prof = ChiProfile::from_target(&t, &ProjectileSpec::electron()).unwrap();
        let probe = Probe {
            rho: Point::new(1.0, 0.0),
            rho_prime: None,
        };
        let k = single_atom_cumulants(&t, &prof, probe, 0.0);
        let expect = 2.0 * prof.coupling * k0_line_integral(1.0) / t.length_y;
        assert!((k[0] - expect).abs() < 1e-8 * expect);
        // The plane sum of first cumulants is the mean phase.
        assert!((k[0] * t.atoms_per_plane() - prof.plane_mean(1.0)).abs() < 1e-8);
    }
}
