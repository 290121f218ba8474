//! Modified Bessel functions K₀, K₁, modified Struve functions L₋₁, L₀ and
//! the planar correlation kernel built from them.
//!
//! The kernel
//!
//! ```text
//! S(ξ) = 1 − ξ [L₋₁(ξ) K₀(ξ) + L₀(ξ) K₁(ξ)]
//! ```
//!
//! is the normalized second moment of the phase of a uniformly populated
//! atomic plane. It equals `(2/π) ∫₀^∞ e^{−ξ cosh u} / cosh u du`, decreases
//! monotonically from 1 at ξ = 0 and decays like `e^{−ξ}/√ξ`.
//!
//! All functions here are pure.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this argument the Struve functions switch to the `L − I` asymptotic series.
pub const STRUVE_ASYMPTOTIC_FROM: f64 = 18.0;

/// `K₀` and `K₁` underflow to zero past this argument.
const K_UNDERFLOW: f64 = 745.0;

/// From here on the kernel is summed from its integral form.
const KERNEL_QUADRATURE_FROM: f64 = 2.0;

/// Kernel argument below which S is returned as exactly 1.
const KERNEL_ZERO: f64 = 1e-8;
/// Kernel argument above which S is returned as exactly 0.
const KERNEL_INFINITY: f64 = 750.0;

/// Dimensionless kernel argument ξ = (|x| + |x'|)/R.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct KernelArg(f64);

impl KernelArg {
    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() || xi < 0.0 {
            return Err(Error::Domain(format!(
                "kernel argument must be finite and non-negative, got {xi}"
            )));
        }
        Ok(KernelArg(xi))
    }

    /// Builds the argument from two offsets (in units of R).
    pub fn from_offsets(x: f64, x_prime: f64) -> Result<Self> {
        KernelArg::new(x.abs() + x_prime.abs())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Modified Bessel function of the second kind, `K₀(x)` or `K₁(x)`.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("bessel_k requires x > 0, got {x}")));
    }
    let (k0, k1) = bessel_k01(x);
    match order {
        0 => Ok(k0),
        1 => Ok(k1),
        _ => Err(Error::Domain(format!(
            "bessel_k supports orders 0 and 1, got {order}"
        ))),
    }
}

/// Modified Struve function `L₋₁(x)` or `L₀(x)`.
pub fn struve_l(order: i32, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("struve_l requires x >= 0, got {x}")));
    }
    match order {
        -1 => Ok(struve_lm1(x)),
        0 => Ok(struve_l0(x)),
        _ => Err(Error::Domain(format!(
            "struve_l supports orders -1 and 0, got {order}"
        ))),
    }
}

/// Planar correlation kernel `S(ξ) = 1 − ξ[L₋₁(ξ)K₀(ξ) + L₀(ξ)K₁(ξ)]`.
pub fn plane_kernel(xi: KernelArg) -> f64 {
    kernel(xi.0)
}

/// Unchecked kernel evaluation for hot loops. `xi` must be non-negative.
#[inline]
pub(crate) fn kernel(xi: f64) -> f64 {
    debug_assert!(xi >= 0.0, "negative kernel argument {xi}");
    if xi < KERNEL_ZERO {
        return 1.0;
    }
    if xi > KERNEL_INFINITY {
        return 0.0;
    }
    if xi < KERNEL_QUADRATURE_FROM {
        let (k0, k1) = bessel_k01(xi);
        1.0 - xi * (struve_series_m1(xi) * k0 + struve_series_0(xi) * k1)
    } else {
        kernel_trapezoid(xi)
    }
}

/// `(2/π) ∫₀^∞ e^{−ξ cosh u}/cosh u du` by the trapezoid rule, which converges
/// geometrically for this analytic integrand. All terms are positive, so the
/// result keeps full relative accuracy where the Bessel–Struve form cancels.
fn kernel_trapezoid(xi: f64) -> f64 {
    // The step shrinks like 1/√ξ so the error stays below e^{−70} relative.
    let h = (0.5 / xi.sqrt()).min(0.2);
    let u_max = (1.0 + 42.0 / xi).acosh();
    let n = (u_max / h).ceil() as usize;
    // d_k = cosh(kh) − 1 by the three-term recurrence, kept free of cancellation.
    let sh = (0.5 * h).sinh();
    let dc = 2.0 * sh * sh;
    let two_c = 2.0 + 2.0 * dc;
    let (mut prev, mut cur) = (0.0, dc);
    let mut sum = 0.5;
    for _ in 1..=n {
        sum += (-xi * cur).exp() / (1.0 + cur);
        let next = two_c * cur - prev + 2.0 * dc;
        prev = cur;
        cur = next;
    }
    FRAC_2_PI * h * sum * (-xi).exp()
}

/// Returns `(K₀(x), K₁(x))` for `x > 0`.
pub(crate) fn bessel_k01(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        bessel_k01_series(x)
    } else if x > K_UNDERFLOW {
        (0.0, 0.0)
    } else {
        bessel_k01_continued_fraction(x)
    }
}

/// Ascending series with logarithmic terms, accurate for `0 < x ≤ 2`.
fn bessel_k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // term_k = y^k / (k!)², term1_k = y^k / (k! (k+1)!)
    let mut term0 = 1.0;
    let mut term1 = 1.0;
    let mut i0 = 1.0;
    let mut i1_sum = 1.0;
    let mut harmonic = 0.0; // H_k
    let mut k0_sum = 0.0;
    // ψ(k+1) + ψ(k+2) = −2γ + H_k + H_{k+1}
    let mut psi_sum = term1 * (-2.0 * EULER_GAMMA + 1.0);
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        term0 *= y / (k * k);
        term1 *= y / (k * (k + 1.0));
        harmonic += 1.0 / k;
        i0 += term0;
        i1_sum += term1;
        k0_sum += term0 * harmonic;
        psi_sum += term1 * (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (k + 1.0));
        if term0 < 1e-18 * i0 && term1 < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_sum;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * psi_sum;
    (k0, k1)
}

/// Steed's continued fraction (Temme's normalization) for `x > 2`.
fn bessel_k01_continued_fraction(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-17;
    const MAX_ITER: usize = 10_000;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn struve_lm1(x: f64) -> f64 {
    if x < STRUVE_ASYMPTOTIC_FROM {
        struve_series_m1(x)
    } else {
        bessel_i_asymptotic(1, x) + struve_minus_bessel(x).0
    }
}

fn struve_l0(x: f64) -> f64 {
    if x < STRUVE_ASYMPTOTIC_FROM {
        struve_series_0(x)
    } else {
        bessel_i_asymptotic(0, x) + struve_minus_bessel(x).1
    }
}

/// `L₋₁(x) = Σ (x/2)^{2k} / (Γ(k+3/2) Γ(k+1/2))`
fn struve_series_m1(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = FRAC_2_PI;
    let mut sum = term;
    let mut k = 0.0;
    while term > 1e-17 * sum {
        term *= y / ((k + 1.5) * (k + 0.5));
        sum += term;
        k += 1.0;
    }
    sum
}

/// `L₀(x) = Σ (x/2)^{2k+1} / Γ(k+3/2)²`
fn struve_series_0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let y = 0.25 * x * x;
    let mut term = 2.0 * x / PI;
    let mut sum = term;
    let mut k = 0.0;
    while term > 1e-17 * sum {
        term *= y / ((k + 1.5) * (k + 1.5));
        sum += term;
        k += 1.0;
    }
    sum
}

/// Asymptotic series for `(L₋₁ − I₁, L₀ − I₀)` at large argument.
fn struve_minus_bessel(x: f64) -> (f64, f64) {
    let r = 2.0 / x;
    let r2 = r * r;

    // M₋₁ = (1/π²) Σ Γ(k+1/2) Γ(k+3/2) (2/x)^{2k+2}
    let mut term = r2 / (2.0 * PI);
    let mut m_m1 = term;
    let mut k = 0.0;
    loop {
        let next = term * (k + 0.5) * (k + 1.5) * r2;
        if next.abs() >= term.abs() || next.abs() < 1e-17 * m_m1.abs() {
            break;
        }
        term = next;
        m_m1 += term;
        k += 1.0;
    }

    // M₀ = −(1/π²) Σ Γ(k+1/2)² (2/x)^{2k+1}
    let mut term = -r / PI;
    let mut m_0 = term;
    let mut k = 0.0;
    loop {
        let next = term * (k + 0.5) * (k + 0.5) * r2;
        if next.abs() >= term.abs() || next.abs() < 1e-17 * m_0.abs() {
            break;
        }
        term = next;
        m_0 += term;
        k += 1.0;
    }
    (m_m1, m_0)
}

/// Hankel asymptotic expansion of `I_ν(x)`, accurate to machine precision for x ≥ 18.
fn bessel_i_asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let mut term = 1.0;
    let mut sum: f64 = 1.0;
    let mut k = 1.0_f64;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = term * (odd * odd - mu) / (8.0 * k * x);
        if next.abs() >= term.abs() && k > 1.0 || next.abs() < 1e-17 * sum.abs() {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    x.exp() / (2.0 * PI * x).sqrt() * sum
}
