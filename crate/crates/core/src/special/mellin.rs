//! Direct Mellin–Barnes quadrature of a Meijer G-function.
//!
//! Used as an independent cross-check of [`super::meijer_g`]: it integrates
//! with adaptive Gauss–Kronrod panels instead of the trapezoidal rule, and
//! on a line shifted away from the one the main evaluator would choose.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::meijer::{real_part, saddle_line, MeijerGSpec};
use super::quadrature::try_integrate_interval;
use crate::error::{Error, Result};

const MAX_PANELS: usize = 20_000;

/// `(1/2πi) ∫ Φ(s) z^{-s} ds` along a vertical line, real part returned.
pub fn mellin_barnes_check(spec: &MeijerGSpec) -> Result<f64> {
    spec.validate()?;
    let line = saddle_line(spec)?;
    let target = match (line.lo.is_finite(), line.hi.is_finite()) {
        (true, true) => 0.5 * (line.lo + line.hi),
        (true, false) => line.c + 1.0,
        (false, true) => line.c - 1.0,
        (false, false) => line.c + 1.0,
    };
    let shift = (0.1 * (target - line.c)).abs().min(0.25 * line.pole_distance()).min(0.5);
    let c = line.c + shift * (target - line.c).signum();

    let width = (1.0 / spec.z.ln().abs().max(1.0)).max(0.25);
    let f = |t: f64| spec.integrand(Complex64::new(c, t));

    let half = |sign: f64| -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        let mut peak = 0.0_f64;
        let mut quiet = 0;
        for j in 0..MAX_PANELS {
            let (a, b) = (j as f64 * width, (j + 1) as f64 * width);
            let abs_tol = 1e-16 * peak.max(f(0.0)?.norm()) * width;
            let q = try_integrate_interval(|t| f(sign * t), a, b, 1e-13, abs_tol)?;
            total += q.value;
            peak = peak.max(q.peak);
            if q.peak < 1e-16 * peak {
                quiet += 1;
                if quiet >= 2 {
                    return Ok(total);
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::QuadratureNonConvergence(
            "Mellin–Barnes integrand does not decay along the check contour".into(),
        ))
    };

    let value = if spec.is_conjugate_closed() {
        Complex64::new(2.0 * half(1.0)?.re, 0.0)
    } else {
        half(1.0)? + half(-1.0)?
    };
    real_part(value / (2.0 * PI))
}
