//! Independent reference computations.
//!
//! Everything here is deliberately built from a different route than the
//! production code: adaptive Gauss–Kronrod integration of integral
//! representations, raw power series with log-gamma coefficients, and nested
//! adaptive quadrature of the Fourier integrals. Nothing in this module calls
//! into `specfun`, `chi` or `quadrature`, so agreement between the two is a
//! meaningful check. The CLI `validate` command and the test suites use it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

// Gauss–Kronrod 7/15 abscissae and weights, quoted to full published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel: `(kronrod estimate, |kronrod − gauss|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)` or the panel budget is spent.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    integrate_with_breaks(f, &[a, b], abs_tol, rel_tol)
}

/// Like [`integrate`], with the initial panels split at the given sorted points.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    const MAX_PANELS: usize = 20_000;
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&f, w[0], w[1]);
        value += v;
        error += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut panels = heap.len();
    while error > abs_tol.max(rel_tol * value.abs()) && panels < MAX_PANELS {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        panels += 1;
    }
    // Re-sum to shed the rounding drift of the running totals.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Integral { value, error }
}

/// Integral over `[0, ∞)` through the map `x = t/(1 − t)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, abs_tol: f64, rel_tol: f64) -> Integral {
    integrate(
        |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let x = t / s;
            let v = f(x) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// `K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt`.
pub fn bessel_k_integral(order: u32, x: f64) -> f64 {
    let nu = f64::from(order);
    let upper = (1.0 + 45.0 / x).acosh().max(1.0);
    // Integrate the rescaled integrand e^{−x(cosh t − 1)} to avoid underflow.
    let r = integrate(
        |t: f64| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh(),
        0.0,
        upper,
        0.0,
        1e-14,
    );
    r.value * (-x).exp()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `ln Γ(k + 1/2) = ln((2k)!) − k ln 4 − ln(k!) + ln √π`
fn ln_gamma_half(k: u64) -> f64 {
    ln_factorial(2 * k) - (k as f64) * 4f64.ln() - ln_factorial(k) + 0.5 * PI.ln()
}

/// Raw power series of `L_ν(x)` for ν ∈ {−1, 0}, every term from log-gamma.
pub fn struve_l_series(order: i32, x: f64) -> f64 {
    assert!(order == -1 || order == 0, "order must be -1 or 0");
    if x == 0.0 {
        return if order == -1 { 2.0 / PI } else { 0.0 };
    }
    let nu = f64::from(order);
    let mut sum = 0.0;
    let mut k = 0u64;
    loop {
        let ln_g1 = ((k as f64) + 0.5).ln() + ln_gamma_half(k); // Γ(k + 3/2)
        let ln_g2 = if order == 0 { ln_g1 } else { ln_gamma_half(k) }; // Γ(k + ν + 3/2)
        let power = 2.0 * (k as f64) + nu + 1.0;
        let term = (power * (0.5 * x).ln() - ln_g1 - ln_g2).exp();
        sum += term;
        if term < 1e-18 * sum && (k as f64) > x {
            break;
        }
        k += 1;
    }
    sum
}

/// `L₀(x) = (2/π) ∫₀^{π/2} sinh(x cos θ) dθ`.
pub fn struve_l0_integral(x: f64) -> f64 {
    2.0 / PI * integrate(|t: f64| (x * t.cos()).sinh(), 0.0, FRAC_PI_2, 0.0, 1e-14).value
}

/// Planar kernel through its integral form `S(ξ) = (2/π) ∫₀^∞ e^{−ξ cosh u}/cosh u du`.
pub fn plane_kernel_integral(xi: f64) -> f64 {
    let upper = if xi > 0.0 {
        (1.0 + 45.0 / xi)
            .acosh()
            .max(45.0_f64.min(60.0 / xi.max(1.0)))
    } else {
        45.0
    };
    let upper = upper.max(1.0);
    2.0 / PI
        * integrate(
            |u: f64| (-xi * u.cosh()).exp() / u.cosh(),
            0.0,
            upper,
            0.0,
            1e-14,
        )
        .value
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
pub fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n < 3 {
        return partial_sums.last().copied().unwrap_or(0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = *partial_sums.last().unwrap();
    let mut col = 0;
    loop {
        if cur.len() < 2 {
            break;
        }
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 {
                return cur[i + 1];
            }
            let base = if col == 0 { 0.0 } else { prev[i + 1] };
            next.push(base + 1.0 / diff);
        }
        col += 1;
        if col % 2 == 0 {
            best = *next.last().unwrap();
        }
        prev = cur;
        cur = next;
    }
    best
}

/// `∫_{−∞}^{∞} cos(μx)/(μ² + κ²) dμ` by half-period panels and epsilon extrapolation.
pub fn lorentzian_cosine_transform(x: f64, kappa: f64) -> f64 {
    let g = |mu: f64| (mu * x).cos() / (mu * mu + kappa * kappa);
    if x == 0.0 {
        return 2.0
            * integrate_semi_infinite(|mu| 1.0 / (mu * mu + kappa * kappa), 0.0, 1e-14).value;
    }
    let half_period = PI / x.abs();
    // Non-oscillatory head up to a few κ, then alternating half-period tails.
    let head_end = half_period * ((4.0 * kappa / half_period).ceil() + 0.5);
    let mut sum = integrate(g, 0.0, head_end, 0.0, 1e-15).value;
    let mut partial = Vec::with_capacity(40);
    let mut a = head_end;
    for _ in 0..40 {
        let b = a + half_period;
        sum += integrate(g, a, b, 0.0, 1e-15).value;
        partial.push(sum);
        a = b;
    }
    2.0 * wynn_epsilon(&partial)
}

/// Plane-averaged phase correlation at Δy = 0 by nested quadrature of its
/// three-dimensional Fourier representation,
///
/// ```text
/// (2 (ZQα)² N_p /(π L_y)) ∫ dμ_y dμ_x dμ'_x e^{i(μ_x x + μ'_x x')}
///     / ((μ_x² + μ_y² + 1)(μ'_x² + μ_y² + 1))
/// ```
///
/// with lengths in units of R and `np_over_ly = N_p / L_y`.
pub fn plane_correlation_fourier(x: f64, x_prime: f64, coupling: f64, np_over_ly: f64) -> f64 {
    let prefactor = 2.0 * coupling * coupling * np_over_ly / PI;
    let inner = |mu_y: f64| {
        let kappa = (mu_y * mu_y + 1.0).sqrt();
        lorentzian_cosine_transform(x, kappa) * lorentzian_cosine_transform(x_prime, kappa)
    };
    prefactor * 2.0 * integrate_semi_infinite(inner, 0.0, 1e-11).value
}

/// Splits `[a, b]` at `breaks` and at spacing no wider than `max_len`.
fn panel_points(a: f64, b: f64, breaks: &[f64], max_len: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut points = vec![a];
    for w in cuts.windows(2) {
        let n = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
        for i in 1..=n {
            points.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
    }
    points
}

/// `∫_a^b e^{iqx} f(x) dx` by adaptive Kronrod panels no longer than a half period.
pub fn fourier_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    q: f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
) -> Complex64 {
    let max_len = if q.abs() > 0.0 {
        (PI / q.abs()).min(1.0)
    } else {
        1.0
    };
    let points = panel_points(a, b, breaks, max_len);
    let scale = integrate_with_breaks(|x| f(x).norm(), &points, 0.0, 1e-6)
        .value
        .max(1e-300);
    let abs_tol = rel_tol * scale;
    let re = integrate_with_breaks(
        |x| (Complex64::new(0.0, q * x).exp() * f(x)).re,
        &points,
        abs_tol,
        0.0,
    );
    let im = integrate_with_breaks(
        |x| (Complex64::new(0.0, q * x).exp() * f(x)).im,
        &points,
        abs_tol,
        0.0,
    );
    Complex64::new(re.value, im.value)
}

/// `∫∫ e^{iq(x − x')} K(x, x') dx dx'` over `[a, b]²` by nested adaptive Kronrod quadrature.
pub fn fourier_diag_adaptive<K: Fn(f64, f64) -> Complex64>(
    kernel: K,
    q: f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
) -> Complex64 {
    // The inner noise must sit well below the outer tolerance or the outer level never settles.
    let inner_tol = (rel_tol * 1e-2).max(1e-14);
    let inner = |x: f64| fourier_adaptive(|xp| kernel(x, xp), -q, a, b, breaks, inner_tol);
    fourier_adaptive(inner, q, a, b, breaks, rel_tol)
}

/// `J₀(z) = (1/π) ∫₀^π cos(z sin θ) dθ`.
pub fn bessel_j0_integral(z: f64) -> f64 {
    let n = ((z.abs() / PI).ceil() as usize).max(1);
    let points: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
    integrate_with_breaks(|t: f64| (z * t.sin()).cos(), &points, 1e-15, 0.0).value / PI
}
