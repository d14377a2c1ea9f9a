//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Finite intervals use global adaptive bisection: the subinterval with the
//! largest Kronrod–Gauss discrepancy is halved until the summed error meets
//! the tolerance. The half line is covered by geometric panels `[s·2^j,
//! s·2^(j+1)]` walked outward from the caller's scale `s` in both
//! directions until the panels stop contributing.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default relative tolerance of the semi-infinite integrator.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
const MAX_SUBDIVISIONS: usize = 4000;
const MAX_PANELS: usize = 600;
const QUIET_PANELS: usize = 3;

/// Values the integrator can accumulate (real or complex).
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// One Kronrod panel: (estimate, error estimate, largest |f| at the nodes).
fn kronrod<T: Integrand, F>(f: &mut F, a: f64, b: f64) -> Result<(T, f64, f64)>
where
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut peak = fc.magnitude();
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        let pair = f1 + f2;
        kron = kron + pair * wk;
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
        peak = peak.max(f1.magnitude()).max(f2.magnitude());
    }
    if !peak.is_finite() {
        return Err(Error::QuadratureNonConvergence(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let est = kron * half;
    let err = ((kron - gauss) * half).magnitude();
    Ok((est, err, peak))
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: f64,
    /// Largest integrand magnitude seen at any node.
    pub peak: f64,
    pub evaluations: usize,
}

/// Adaptive integral of a fallible integrand over `[a, b]`.
///
/// Converged once the summed error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn try_integrate_interval<T: Integrand, F>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature<T>>
where
    F: FnMut(f64) -> Result<T>,
{
    if a == b {
        return Ok(Quadrature { value: T::zero(), error: 0.0, peak: 0.0, evaluations: 0 });
    }
    let (est, err, peak) = kronrod(&mut f, a, b)?;
    let mut pieces = vec![(a, b, est, err)];
    let mut total = est;
    let mut total_err = err;
    let mut peak = peak;
    let mut evaluations = 15;
    loop {
        if total_err <= abs_tol.max(rel_tol * total.magnitude()) {
            return Ok(Quadrature { value: total, error: total_err, peak, evaluations });
        }
        if pieces.len() >= MAX_SUBDIVISIONS {
            return Err(Error::QuadratureNonConvergence(format!(
                "{} subdivisions on [{a}, {b}], error {total_err:e}",
                pieces.len()
            )));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, old, old_err) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at double precision; keep what we have
            pieces.push((lo, hi, old, 0.0));
            total_err -= old_err;
            continue;
        }
        let (e1, r1, p1) = kronrod(&mut f, lo, mid)?;
        let (e2, r2, p2) = kronrod(&mut f, mid, hi)?;
        evaluations += 30;
        peak = peak.max(p1).max(p2);
        total = total - old + e1 + e2;
        total_err = total_err - old_err + r1 + r2;
        pieces.push((lo, mid, e1, r1));
        pieces.push((mid, hi, e2, r2));
        // refresh to limit drift in the running sums
        if pieces.len() % 64 == 0 {
            total = pieces.iter().fold(T::zero(), |acc, p| acc + p.2);
            total_err = pieces.iter().map(|p| p.3).sum();
        }
    }
}

/// Adaptive integral of `f` over `[a, b]` to relative tolerance `rel_tol`.
pub fn integrate_interval<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    try_integrate_interval(|x| Ok(f(x)), a, b, rel_tol, 0.0).map(|q| q.value)
}

/// Integral over `(0, ∞)` of a fallible integrand with characteristic
/// scale `decay_hint` (where most of the mass sits, or the e-folding
/// length of the tail).
pub fn try_integrate_semiinfinite<F>(mut f: F, decay_hint: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(decay_hint > 0.0 && decay_hint.is_finite()) {
        return Err(Error::InvalidArgument(format!("decay_hint must be positive, got {decay_hint}")));
    }
    let mut total = 0.0;
    let mut panel = |lo: f64, hi: f64, total: f64| -> Result<f64> {
        let abs_tol = 1e-3 * rel_tol * total.abs();
        try_integrate_interval(&mut f, lo, hi, rel_tol, abs_tol).map(|q| q.value)
    };

    // upward: [s, 2s], [2s, 4s], ...
    let mut quiet = 0;
    let mut lo = decay_hint;
    for _ in 0..MAX_PANELS {
        let hi = 2.0 * lo;
        let v = panel(lo, hi, total)?;
        total += v;
        if v.abs() <= 1e-3 * rel_tol * total.abs() {
            quiet += 1;
            if quiet >= QUIET_PANELS {
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        if !lo.is_finite() {
            return Err(Error::QuadratureNonConvergence("upper tail does not decay".into()));
        }
    }
    if quiet < QUIET_PANELS {
        return Err(Error::QuadratureNonConvergence("upper tail does not decay".into()));
    }

    // downward: [s/2, s], [s/4, s/2], ...
    quiet = 0;
    let mut hi = decay_hint;
    for _ in 0..MAX_PANELS {
        let lo = 0.5 * hi;
        let v = panel(lo, hi, total)?;
        total += v;
        if v.abs() <= 1e-3 * rel_tol * total.abs() {
            quiet += 1;
            if quiet >= QUIET_PANELS {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        hi = lo;
        if hi < f64::MIN_POSITIVE {
            return Ok(total);
        }
    }
    Err(Error::QuadratureNonConvergence("integrand does not settle near the origin".into()))
}

/// `∫_0^∞ f(x) dx` to relative accuracy [`DEFAULT_REL_TOL`].
pub fn integrate_semiinfinite<F: FnMut(f64) -> f64>(mut f: F, decay_hint: f64) -> Result<f64> {
    try_integrate_semiinfinite(|x| Ok(f(x)), decay_hint, DEFAULT_REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential() {
        let v = integrate_semiinfinite(|x| (-x).exp(), 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gamma_two() {
        let v = integrate_semiinfinite(|x| x * (-x).exp(), 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    /// e·E₁(1) via the convergent series E₁(x) = -γ - ln x - Σ (-x)^k/(k·k!).
    fn e_times_e1_at_one() -> f64 {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..40 {
            term *= -1.0 / k as f64;
            sum += term / k as f64;
        }
        std::f64::consts::E * (-EULER_GAMMA - sum)
    }

    #[test]
    fn exponential_integral_identity() {
        let oracle = e_times_e1_at_one();
        assert!((oracle - 0.596_347_36).abs() < 1e-8);
        let v = integrate_semiinfinite(|x| (-x).exp() / (1.0 + x), 1.0).unwrap();
        assert!((v / oracle - 1.0).abs() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn polynomial_tail_and_integrable_singularity() {
        // ∫ x^{-1/2} / (1 + x) = π
        let v = integrate_semiinfinite(|x| 1.0 / (x.sqrt() * (1.0 + x)), 1.0).unwrap();
        assert!((v / std::f64::consts::PI - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn far_scale_hint() {
        // mass near 1e4 with the hint placed there
        let s = 1e4;
        let v = integrate_semiinfinite(|x| (-x / s).exp() / s, s).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn finite_interval() {
        let v = integrate_interval(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_decaying_errors() {
        assert!(integrate_semiinfinite(|_| 1.0, 1.0).is_err());
    }

    #[test]
    fn complex_integrand() {
        let q = try_integrate_interval(
            |t| Ok(Complex64::new(0.0, t).exp()),
            0.0,
            std::f64::consts::PI,
            1e-12,
            0.0,
        )
        .unwrap();
        assert!((q.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
