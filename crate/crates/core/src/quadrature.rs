//! Fourier integrals `∫ e^{iqx} f(x) dx` and `∫∫ e^{iq(x−x')} K(x,x') dx dx'`
//! over a finite window.
//!
//! The window is covered by composite Gauss–Legendre panels. Panel edges are
//! placed at every plane position (where the integrands have a kink) and are
//! geometrically graded towards it, since the correlation kernel behaves like
//! `ξ ln ξ` there. The transforms are summed directly for each requested q;
//! the q grids used here are short and need not be uniform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chi::ChiProfile;
use crate::error::{Error, Result};

/// Gauss–Legendre points per panel.
pub const PANEL_ORDER: usize = 12;
/// Ratio between successive graded panels next to a breakpoint.
const GRADING_RATIO: f64 = 0.15;
const GRADING_LEVELS: usize = 6;
/// Minimum window half-width beyond the outermost plane, in R.
const MIN_MARGIN: f64 = 20.0;
/// Extra width added to the decay estimate, covering O(1) prefactors of the integrands.
const SAFETY_MARGIN: f64 = 1.0;
/// Largest mean node spacing allowed, in R.
const MAX_DX: f64 = 0.125;
/// Rows of the 2D transform handled per work item. Fixed so that the
/// summation order does not depend on the number of threads.
const ROW_CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Window half-width in R.
    pub x_max: f64,
    /// Number of base nodes across the window (a power of two).
    pub n_points: usize,
    /// Mean node spacing `2 x_max / n_points`.
    pub dx: f64,
    /// Points where panels must break, usually the plane positions.
    pub breakpoints: Vec<f64>,
    /// Largest integrand magnitude tolerated on the window edge.
    pub tol: f64,
}

impl GridSpec {
    pub fn new(x_max: f64, n_points: usize, breakpoints: Vec<f64>, tol: f64) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::Domain(format!(
                "x_max must be positive, got {x_max}"
            )));
        }
        if n_points < PANEL_ORDER {
            return Err(Error::Domain(format!(
                "n_points must be at least {PANEL_ORDER}"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(GridSpec {
            x_max,
            n_points,
            dx: 2.0 * x_max / n_points as f64,
            breakpoints,
            tol,
        })
    }

    /// Same window with twice the node density.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            n_points: 2 * self.n_points,
            dx: 0.5 * self.dx,
            ..self.clone()
        }
    }

    /// Twice the window at the same node spacing.
    pub fn widened(&self) -> GridSpec {
        GridSpec {
            x_max: 2.0 * self.x_max,
            n_points: 2 * self.n_points,
            ..self.clone()
        }
    }

    /// Largest momentum the grid resolves with the design margin.
    pub fn q_limit(&self) -> f64 {
        PI / (8.0 * self.dx)
    }
}

/// Picks a window and node count for a profile and the largest momentum.
///
/// `x_max = max|x_j| + max(20, ln(scale/tol) + 1)` where scale is the larger of
/// the mean-phase amplitude and the on-plane phase variance. The node count is
/// the smallest power of two with `dx ≤ R/8` and `dx ≤ π/(8 q_max)`.
pub fn window_bounds(profile: &ChiProfile, tol: f64, q_max: f64) -> Result<GridSpec> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::Domain(format!(
            "window tolerance must lie in (0, 1e-2], got {tol}"
        )));
    }
    if !(q_max.is_finite() && q_max >= 0.0) {
        return Err(Error::Domain(format!(
            "q_max must be finite and non-negative, got {q_max}"
        )));
    }
    let outer = profile.plane_xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = profile.max_phase_scale().max(1.0);
    let x_max = outer + MIN_MARGIN.max((scale / tol).ln() + SAFETY_MARGIN);
    let dx_limit = if q_max > 0.0 {
        MAX_DX.min(PI / (8.0 * q_max))
    } else {
        MAX_DX
    };
    let n_points = ((2.0 * x_max / dx_limit).ceil() as usize).next_power_of_two();
    GridSpec::new(x_max, n_points, profile.plane_xs.clone(), tol)
}

/// Nodes and weights of the composite rule for a grid.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(grid: &GridSpec) -> PanelRule {
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let n_panels = (grid.n_points / PANEL_ORDER).max(1);
        let h = 2.0 * grid.x_max / n_panels as f64;
        let mut edges: Vec<f64> = (0..=n_panels).map(|k| -grid.x_max + h * k as f64).collect();
        for &p in &grid.breakpoints {
            if p <= -grid.x_max || p >= grid.x_max {
                continue;
            }
            edges.push(p);
            let mut d = h;
            for _ in 0..GRADING_LEVELS {
                d *= GRADING_RATIO;
                for e in [p - d, p + d] {
                    if e > -grid.x_max && e < grid.x_max {
                        edges.push(e);
                    }
                }
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * h);
        let mut nodes = Vec::with_capacity(edges.len() * PANEL_ORDER);
        let mut weights = Vec::with_capacity(edges.len() * PANEL_ORDER);
        for w in edges.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let half = 0.5 * (w[1] - w[0]);
            for (x, wt) in gx.iter().zip(&gw) {
                nodes.push(c + half * x);
                weights.push(half * wt);
            }
        }
        PanelRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f dx` over the window.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 { 1.0 } else { p1 };
            dp = mf * (z * p - p0) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

fn check_edge(x: f64, value: f64, tol: f64) -> Result<()> {
    if value.is_nan() || value > tol {
        return Err(Error::WindowTooSmall { x, value, tol });
    }
    Ok(())
}

/// `g(q) = ∫ e^{iqx} f(x) dx` for each q.
pub fn fourier_1d<F>(f: F, grid: &GridSpec, q_list: &[f64]) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    for x in [-grid.x_max, grid.x_max] {
        check_edge(x, f(x).norm(), grid.tol)?;
    }
    let rule = PanelRule::new(grid);
    let values: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| f(x) * w)
        .collect();
    Ok(q_list
        .par_iter()
        .map(|&q| {
            rule.nodes
                .iter()
                .zip(&values)
                .map(|(&x, &v)| v * Complex64::cis(q * x))
                .sum()
        })
        .collect())
}

/// `∫∫ e^{iq(x−x')} K(x, x') dx dx'` for each q.
pub fn fourier_diag_2d<K>(kernel: K, grid: &GridSpec, q_list: &[f64]) -> Result<Vec<Complex64>>
where
    K: Fn(f64, f64) -> Complex64 + Sync,
{
    let out = fourier_diag_2d_multi(|x, xp| [kernel(x, xp)], grid, q_list)?;
    Ok(out.into_iter().map(|[v]| v).collect())
}

/// [`fourier_diag_2d`] for several kernels sharing one pass over the grid.
pub fn fourier_diag_2d_multi<const N: usize, K>(
    kernel: K,
    grid: &GridSpec,
    q_list: &[f64],
) -> Result<Vec<[Complex64; N]>>
where
    K: Fn(f64, f64) -> [Complex64; N] + Sync,
{
    let rule = PanelRule::new(grid);
    check_edges_2d(&kernel, &rule, grid)?;
    let n = rule.len();
    let nq = q_list.len();
    // phase[k·nq + j] = w_k e^{−i q_j x_k}
    let phase: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .flat_map(|(&x, &w)| q_list.iter().map(move |&q| Complex64::cis(-q * x) * w))
        .collect();
    let zero = [Complex64::new(0.0, 0.0); N];
    let rows: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<[Complex64; N]>> = rows
        .par_chunks(ROW_CHUNK)
        .map(|chunk| {
            let mut acc = vec![zero; nq];
            let mut row = vec![zero; n];
            let mut inner = vec![zero; nq];
            for &i in chunk {
                let xi = rule.nodes[i];
                for (k, slot) in row.iter_mut().enumerate() {
                    *slot = kernel(xi, rule.nodes[k]);
                }
                inner.iter_mut().for_each(|v| *v = zero);
                for (k, kv) in row.iter().enumerate() {
                    let ph = &phase[k * nq..(k + 1) * nq];
                    for (r, p) in inner.iter_mut().zip(ph) {
                        for m in 0..N {
                            r[m] += kv[m] * p;
                        }
                    }
                }
                let ph = &phase[i * nq..(i + 1) * nq];
                for ((a, r), p) in acc.iter_mut().zip(&inner).zip(ph) {
                    let pc = p.conj();
                    for m in 0..N {
                        a[m] += r[m] * pc;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![zero; nq];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            for m in 0..N {
                t[m] += p[m];
            }
        }
    }
    Ok(total)
}

fn check_edges_2d<const N: usize, K>(kernel: &K, rule: &PanelRule, grid: &GridSpec) -> Result<()>
where
    K: Fn(f64, f64) -> [Complex64; N],
{
    for edge in [-grid.x_max, grid.x_max] {
        for &y in &rule.nodes {
            for (x, xp) in [(edge, y), (y, edge)] {
                let worst = kernel(x, xp).iter().fold(0.0f64, |m, v| m.max(v.norm()));
                check_edge(x, worst, grid.tol)?;
            }
        }
    }
    Ok(())
}

/// Relative defect of Plancherel's identity `∫|f|² dx = (1/2π) ∫|g|² dq`.
///
/// The q integral runs over `[−q_cut, q_cut]` on the same kind of composite
/// rule, so `f` must be smooth enough for g to be negligible beyond `q_cut`.
pub fn plancherel_defect<F>(f: F, grid: &GridSpec, q_cut: f64) -> Result<f64>
where
    F: Fn(f64) -> Complex64,
{
    let rule = PanelRule::new(grid);
    let lhs: f64 = rule.integrate(|x| f(x).norm_sqr());
    let q_grid = GridSpec::new(q_cut, grid.n_points.max(256), Vec::new(), 1.0)?;
    let q_rule = PanelRule::new(&q_grid);
    let g = fourier_1d(&f, grid, &q_rule.nodes)?;
    let rhs: f64 = g
        .iter()
        .zip(&q_rule.weights)
        .map(|(v, w)| w * v.norm_sqr())
        .sum::<f64>()
        / (2.0 * PI);
    Ok((lhs - rhs).abs() / lhs)
}
