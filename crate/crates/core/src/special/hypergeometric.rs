//! Generalized hypergeometric series `pFq(a; b; z)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative size of the last retained term.
pub const SERIES_TOLERANCE: f64 = 1e-15;
/// Hard cap on the number of terms summed.
pub const MAX_TERMS: usize = 1_000_000;

/// A summed series together with the bookkeeping needed to judge how much
/// cancellation happened inside it.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: Complex64,
    /// Sum of the magnitudes of all terms.
    pub magnitude: f64,
    pub terms: usize,
}

fn is_non_positive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Sums `pFq(a; b; z)` and reports the accumulated term magnitude.
pub fn pfq_series(a: &[Complex64], b: &[Complex64], z: Complex64) -> Result<SeriesSum> {
    if let Some(bad) = b.iter().find(|&&bj| is_non_positive_integer(bj)) {
        return Err(Error::Pole { re: bad.re, im: bad.im });
    }
    let terminating = a.iter().any(|&ai| is_non_positive_integer(ai));
    let (p, q) = (a.len(), b.len());
    if !terminating && (p > q + 1 || (p == q + 1 && z.norm() >= 1.0)) {
        return Err(Error::Divergence { terms: 0 });
    }

    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut magnitude = 1.0;
    let mut quiet = 0;
    for j in 0..MAX_TERMS {
        let jf = j as f64;
        let mut ratio = z / (jf + 1.0);
        for &ai in a {
            ratio *= ai + jf;
        }
        for &bi in b {
            ratio /= bi + jf;
        }
        term *= ratio;
        if term.re == 0.0 && term.im == 0.0 {
            return Ok(SeriesSum { value: sum, magnitude, terms: j + 1 });
        }
        sum += term;
        let size = term.norm();
        magnitude += size;
        if !magnitude.is_finite() {
            return Err(Error::Divergence { terms: j + 1 });
        }
        // the term has to be both small and shrinking; two in a row guards
        // against a single accidentally tiny Pochhammer factor
        if size < SERIES_TOLERANCE * sum.norm() && ratio.norm() < 1.0 {
            quiet += 1;
            if quiet >= 2 {
                return Ok(SeriesSum { value: sum, magnitude, terms: j + 1 });
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Divergence { terms: MAX_TERMS })
}

/// `pFq(a; b; z)` for `p <= q` (any `z`) or `p = q + 1` with `|z| < 1`.
pub fn hypergeometric_pfq(a: &[Complex64], b: &[Complex64], z: Complex64) -> Result<Complex64> {
    pfq_series(a, b, z).map(|s| s.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_f_zero_is_exponential() {
        let v = hypergeometric_pfq(&[], &[], r(1.0)).unwrap();
        assert!((v.re - std::f64::consts::E).abs() < 1e-15);
        let v = hypergeometric_pfq(&[], &[], r(-5.0)).unwrap();
        assert!((v.re / (-5.0_f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_f_zero_is_geometric() {
        let v = hypergeometric_pfq(&[r(1.0)], &[], r(0.5)).unwrap();
        assert!((v.re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_f_one_log_identity() {
        // 2F1(1,1;2;z) = -ln(1-z)/z
        let v = hypergeometric_pfq(&[r(1.0), r(1.0)], &[r(2.0)], r(0.5)).unwrap();
        assert!((v.re - 2.0 * std::f64::consts::LN_2).abs() < 1e-14);
        assert!((v.re - 1.386_294_36).abs() < 1e-8);
        let z = Complex64::new(0.3, 0.4);
        let v = hypergeometric_pfq(&[r(1.0), r(1.0)], &[r(2.0)], z).unwrap();
        let oracle = -(1.0 - z).ln() / z;
        assert!((v - oracle).norm() < 1e-14);
    }

    #[test]
    fn terminating_series_is_a_polynomial() {
        // 2F1(-2, b; c; z) = 1 - 2bz/c + b(b+1)z²/(c(c+1))
        let (b, c, z) = (1.5, 2.5, 3.0);
        let v = hypergeometric_pfq(&[r(-2.0), r(b)], &[r(c)], r(z)).unwrap();
        let oracle = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        assert!((v.re - oracle).abs() < 1e-13);
    }

    #[test]
    fn kummer_with_complex_parameters() {
        // 1F1(a; a; z) = e^z for any a
        let a = Complex64::new(2.3, -1.1);
        let z = Complex64::new(1.5, 0.7);
        let v = hypergeometric_pfq(&[a], &[a], z).unwrap();
        assert!((v - z.exp()).norm() < 1e-14);
    }

    #[test]
    fn divergent_orders_error() {
        assert!(matches!(
            hypergeometric_pfq(&[r(1.0), r(1.0)], &[r(2.0)], r(1.5)),
            Err(Error::Divergence { .. })
        ));
        assert!(matches!(
            hypergeometric_pfq(&[r(1.0), r(1.0), r(1.0)], &[r(2.0)], r(0.1)),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn lower_parameter_pole_errors() {
        assert!(matches!(
            hypergeometric_pfq(&[r(1.0)], &[r(-2.0)], r(0.1)),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn reports_cancellation_magnitude() {
        let s = pfq_series(&[], &[], r(-10.0)).unwrap();
        assert!(s.magnitude > 1e4);
        assert!((s.magnitude / 10.0_f64.exp() - 1.0).abs() < 1e-12);
    }
}
