//! Log-gamma for complex arguments.
//!
//! Lanczos approximation (g = 7, nine coefficients) on the half-plane
//! `Re z >= 1/2`. Left of that line the value is pulled back with the
//! recurrence `ln Γ(z) = ln Γ(z + n) - Σ ln(z + j)`, which keeps the
//! principal branch (cut along the negative real axis) without the branch
//! bookkeeping the reflection formula needs.

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `0.5 * ln(2π)`
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn lanczos(z: Complex64) -> Complex64 {
    let w = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (w + i as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (w + 0.5) * t.ln() - t + series.ln()
}

/// Principal branch of `ln Γ(z)`.
///
/// Errors with [`Error::Pole`] at the non-positive integers.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidArgument(format!("ln_gamma of non-finite {z}")));
    }
    if is_pole(z) {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    let shift = (0.5 - z.re).ceil() as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..shift {
        acc += (z + j as f64).ln();
    }
    Ok(lanczos(z + shift as f64) - acc)
}

/// `ln |Γ(x)|` for real `x`; poles error as in [`ln_gamma_complex`].
pub fn ln_gamma(x: f64) -> Result<f64> {
    ln_gamma_complex(Complex64::new(x, 0.0)).map(|v| v.re)
}

/// `Γ(z)` for complex `z`, via the exponential of [`ln_gamma_complex`].
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    ln_gamma_complex(z).map(|v| v.exp())
}

/// `1/Γ(z)`, which is entire: zero at the poles of `Γ`.
pub fn recip_gamma_complex(z: Complex64) -> Complex64 {
    match ln_gamma_complex(z) {
        Ok(v) => (-v).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// `sqrt(π)`; used by moment formulas with half-integer gamma arguments.
pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516;
