//! Self-checks run by the `validate` command.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::chi::ChiProfile;
use crate::config::ResolvedRun;
use crate::error::Result;
use crate::mc::{self, Point, Probe};
use crate::oracle;
use crate::quadrature::{fourier_1d, plancherel_defect, GridSpec};
use crate::specfun::{self, KernelArg};
use crate::target::TargetSpec;
use crate::xsec::{self, max_relative_deviation, spectrum_structure_factor, structure_factor};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn below(name: &str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed: measured <= tolerance && measured.is_finite(),
            measured,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn special_function_deviation() -> f64 {
    let mut worst = 0.0f64;
    for x in log_grid(1e-4, 50.0, 61) {
        for order in [0, 1] {
            let v = specfun::bessel_k(order, x).unwrap_or(f64::NAN);
            worst = worst.max(rel(v, oracle::bessel_k_integral(order, x)));
        }
        for order in [-1, 0] {
            let v = specfun::struve_l(order, x).unwrap_or(f64::NAN);
            worst = worst.max(rel(v, oracle::struve_l_series(order, x)));
        }
        let l0 = specfun::struve_l(0, x).unwrap_or(f64::NAN);
        worst = worst.max(rel(l0, oracle::struve_l0_integral(x)));
    }
    worst
}

pub fn kernel_checks() -> Vec<Check> {
    let s0 = specfun::plane_kernel(KernelArg::new(0.0).expect("valid"));
    let s_far = specfun::plane_kernel(KernelArg::new(1e3).expect("valid"));
    let mut worst = 0.0f64;
    for i in 0..=300 {
        let xi = i as f64 * 0.1;
        let v = specfun::plane_kernel(KernelArg::new(xi).expect("valid"));
        worst = worst.max((v - oracle::plane_kernel_integral(xi)).abs());
    }
    vec![
        Check::below("kernel_at_zero", (s0 - 1.0).abs(), 0.0, "S(0) = 1"),
        Check::below("kernel_at_1e3", s_far, 1e-3, "S(1000) < 1e-3"),
        Check::below(
            "kernel_vs_integral",
            worst,
            1e-13,
            "max |S − Bickley integral| on [0, 30]",
        ),
    ]
}

pub fn correlation_check(profile: &ChiProfile, target: &TargetSpec) -> Check {
    let np_over_ly = target.atoms_per_plane() / target.length_y;
    let reference = oracle::plane_correlation_fourier(1.0, 1.0, profile.coupling, np_over_ly);
    Check::below(
        "plane_correlation_fourier",
        rel(profile.plane_corr(1.0, 1.0), reference),
        1e-4,
        format!("closed form vs nested Fourier quadrature at (R, R), reference {reference:.12e}"),
    )
}

pub fn fourier_pair_checks(grid: &GridSpec, q_list: &[f64]) -> Result<Vec<Check>> {
    let q_max = q_list.iter().fold(0.0f64, |m, q| m.max(*q));
    let qs: Vec<f64> = (0..=8).map(|i| q_max * i as f64 / 8.0).collect();
    // Centered pairs tested on the run grid.
    let g = GridSpec {
        breakpoints: vec![0.0],
        ..grid.clone()
    };
    let exp_vals = fourier_1d(|x| Complex64::new((-x.abs()).exp(), 0.0), &g, &qs)?;
    let gauss_vals = fourier_1d(|x| Complex64::new((-0.5 * x * x).exp(), 0.0), &g, &qs)?;
    let mut e_worst = 0.0f64;
    let mut g_worst = 0.0f64;
    for ((&q, e), gv) in qs.iter().zip(&exp_vals).zip(&gauss_vals) {
        let e_exact = 2.0 / (1.0 + q * q);
        e_worst = e_worst.max((e - e_exact).norm() / e_exact);
        let g_exact = (2.0 * PI).sqrt() * (-0.5 * q * q).exp();
        // The Gaussian transform falls below round-off past q ≈ 8; compare absolutely there.
        g_worst = g_worst.max((gv - g_exact).norm() / g_exact.max(1e-3));
    }
    let plancherel = plancherel_defect(
        |x| Complex64::new(0.0, 0.8 * x).exp() * (-0.5 * x * x).exp(),
        &g,
        12.0,
    )?;
    Ok(vec![
        Check::below(
            "fourier_pair_exponential",
            e_worst,
            1e-6,
            "e^{−|x|} ↔ 2/(1+q²)",
        ),
        Check::below(
            "fourier_pair_gaussian",
            g_worst,
            1e-6,
            "e^{−x²/2} ↔ √(2π) e^{−q²/2}",
        ),
        Check::below("plancherel", plancherel, 1e-8, "∫|f|² dx vs (1/2π)∫|g|² dq"),
    ])
}

/// At least eight nodes per period of `e^{-iqx}` at the largest q.
pub fn resolution_check(grid: &GridSpec, q_list: &[f64]) -> Check {
    let q_max = q_list.iter().fold(0.0f64, |m, q| m.max(*q));
    let per_period = 2.0 * PI / (q_max * grid.dx);
    Check::below(
        "grid_resolves_q_max",
        grid.dx * q_max * 8.0 / PI,
        1.0,
        format!("dx = {:.4} R gives {per_period:.1} nodes per period at q = {q_max:.3}/R (need at least 16)", grid.dx),
    )
}

pub fn convergence_checks(run: &ResolvedRun) -> Result<Vec<Check>> {
    let setup = &run.setup;
    let stride = (run.q_list.len() / 8).max(1);
    let qs: Vec<f64> = run.q_list.iter().step_by(stride).copied().collect();
    let base = spectrum_structure_factor(setup, &qs)?;
    let grid = base.meta.grid.clone().expect("quadrature route has a grid");
    let mut fine = setup.clone();
    fine.grid = Some(grid.refined());
    let mut wide = setup.clone();
    wide.grid = Some(grid.widened());
    let fine_dev = max_relative_deviation(
        &spectrum_structure_factor(&fine, &qs)?.total,
        &base.total,
        0.0,
    );
    let wide_dev = max_relative_deviation(
        &spectrum_structure_factor(&wide, &qs)?.total,
        &base.total,
        0.0,
    );
    Ok(vec![
        Check::below(
            "grid_convergence",
            fine_dev,
            1e-6,
            format!(
                "doubling n_points from {} (dx = {:.4} R)",
                grid.n_points, grid.dx
            ),
        ),
        Check::below(
            "window_convergence",
            wide_dev,
            1e-8,
            format!("doubling x_max from {:.3} R", grid.x_max),
        ),
    ])
}

pub fn born_check(profile: &ChiProfile) -> Check {
    let mut worst = 0.0f64;
    for q in [0.0, 0.5, 2.0, 10.0] {
        let num = 2.0
            * oracle::integrate_semi_infinite(
                |qy| xsec::born_atom_double(q, qy, profile.coupling),
                0.0,
                1e-13,
            )
            .value;
        worst = worst.max(rel(xsec::born_atom(q, profile.coupling), num));
    }
    Check::below(
        "born_q_y_integral",
        worst,
        1e-8,
        "closed form vs q_y quadrature",
    )
}

pub fn structure_factor_checks(positions: &[f64], spacing: f64) -> Vec<Check> {
    let n = positions.len() as f64;
    let recip = 2.0 * PI / spacing;
    let bragg = (1..=4)
        .map(|j| rel(structure_factor(recip * j as f64, positions), n * n))
        .fold(0.0, f64::max);
    let m = 4096;
    let mean: f64 = (0..m)
        .map(|i| structure_factor(recip * i as f64 / m as f64, positions))
        .sum::<f64>()
        / m as f64;
    let shifted: Vec<f64> = positions.iter().map(|x| x + 3.7).collect();
    let shift = (0..50)
        .map(|i| {
            let q = 0.137 * i as f64;
            (structure_factor(q, positions) - structure_factor(q, &shifted)).abs() / (n * n)
        })
        .fold(0.0, f64::max);
    vec![
        Check::below("structure_factor_bragg", bragg, 1e-12, "D(2πj/a) = N_x²"),
        Check::below(
            "structure_factor_mean",
            rel(mean, n),
            1e-10,
            "period average of D = N_x",
        ),
        Check::below("structure_factor_shift", shift, 1e-12, "shift invariance"),
    ]
}

/// Compares sampled `⟨e^{iχ}⟩` with the cumulant prediction on one plane.
pub fn mc_checks(run: &ResolvedRun) -> Result<Vec<Check>> {
    let v = &run.validate;
    let base = &run.setup;
    let mut target = TargetSpec {
        n_planes: 1,
        ..base.target.clone()
    };
    target = target.with_amplitude(&base.projectile, v.mc_amplitude)?;
    target.length_y = v.mc_atoms_per_plane as f64 / (target.conc_2d * target.length_z);
    let profile = ChiProfile::from_target(&target, &base.projectile)?;
    let probes: Vec<Probe> = v
        .mc_probes
        .iter()
        .map(|&x| Probe {
            rho: Point::new(x, 0.0),
            rho_prime: None,
        })
        .collect();
    let est = mc::averaged_phase_mc_many(
        &target,
        &profile,
        &probes,
        v.mc_samples,
        run.seed,
        v.atom_cap,
    )?;
    Ok(probes
        .iter()
        .zip(&est)
        .map(|(p, e)| {
            let pred = mc::cumulant_prediction(&target, &profile, p.rho.x);
            let budget = 3.0 * e.std_error + pred.allowance;
            let dev = (e.mean - pred.second_order).norm();
            Check::below(
                &format!("mc_cumulant_x{}", p.rho.x),
                dev,
                budget,
                format!(
                    "MC {:.6} ± {:.2e} ({} samples, {} rejected) vs cumulant {:.6}; allowance {:.2e}",
                    e.mean, e.std_error, e.n_samples, e.n_rejected, pred.second_order, pred.allowance
                ),
            )
        })
        .collect())
}

pub fn validate(run: &ResolvedRun) -> Result<Report> {
    let profile = run.setup.profile()?;
    let single = profile.single_plane();
    let grid = match &run.setup.grid {
        Some(g) => g.clone(),
        None => {
            let q_max = run.q_list.iter().fold(0.0f64, |m, q| m.max(*q));
            crate::quadrature::window_bounds(&single, run.setup.window_tol, q_max)?
        }
    };
    let mut checks = vec![Check::below(
        "special_functions",
        special_function_deviation(),
        1e-9,
        "K0, K1, L-1, L0 vs integral and series oracles on [1e-4, 50]",
    )];
    checks.extend(kernel_checks());
    checks.push(resolution_check(&grid, &run.q_list));
    checks.push(correlation_check(&profile, &run.setup.target));
    checks.extend(fourier_pair_checks(&grid, &run.q_list)?);
    checks.extend(convergence_checks(run)?);
    checks.push(born_check(&profile));
    checks.extend(structure_factor_checks(
        &profile.plane_xs,
        run.setup.target.spacing,
    ));
    checks.extend(mc_checks(run)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { passed, checks })
}
