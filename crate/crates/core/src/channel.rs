//! Cascaded-channel statistics and the squared-K_G fit.
//!
//! `Z = Σ αᵢβᵢ` is a sum of `N` i.i.d. double-Rayleigh products with unit
//! mean-square factors. Its even moments are known exactly, and matching
//! `E[Z²]`, `E[Z⁴]`, `E[Z⁶]` fixes the shaping pair `(k, m)` and the mean
//! power `Ω` of the squared-K_G law that stands in for `Z²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma::{ln_gamma, ln_gamma_complex, SQRT_PI};
use crate::special::quadrature::try_integrate_interval;
use crate::special::ComplexValue;

/// dB to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One link scenario; powers are in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_elements: u32,
    pub n_interferers: u32,
    pub p_s_db: f64,
    pub p_i_db: f64,
    pub gamma_th_db: f64,
}

impl SystemConfig {
    pub fn new(n_elements: u32, n_interferers: u32, p_s_db: f64, p_i_db: f64, gamma_th_db: f64) -> Result<Self> {
        let cfg = Self { n_elements, n_interferers, p_s_db, p_i_db, gamma_th_db };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements < 1 {
            return Err(Error::InvalidArgument("n_elements must be at least 1".into()));
        }
        if self.n_interferers < 1 {
            return Err(Error::InvalidArgument("n_interferers must be at least 1".into()));
        }
        for (name, db) in [("p_s_db", self.p_s_db), ("p_i_db", self.p_i_db), ("gamma_th_db", self.gamma_th_db)] {
            let lin = db_to_linear(db);
            if !(lin > 0.0 && lin.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} = {db} has no positive finite linear value")));
            }
        }
        Ok(())
    }

    pub fn p_s(&self) -> f64 {
        db_to_linear(self.p_s_db)
    }

    pub fn p_i(&self) -> f64 {
        db_to_linear(self.p_i_db)
    }

    pub fn gamma_th(&self) -> f64 {
        db_to_linear(self.gamma_th_db)
    }
}

/// Fitted squared-K_G parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgParams {
    pub k: ComplexValue,
    pub m: ComplexValue,
    /// `Ω = E[Z²]`
    pub omega: f64,
    /// `A = √(km/Ω)`
    pub a_scale: f64,
    pub sum_km: f64,
    pub prod_km: f64,
}

impl KgParams {
    /// `ln[Γ(k)Γ(m)]`, real for a conjugate or real pair.
    pub fn ln_gamma_km(&self) -> Result<f64> {
        Ok((ln_gamma_complex(self.k)? + ln_gamma_complex(self.m)?).re)
    }

    /// `(k - m)/2`
    pub fn half_diff(&self) -> ComplexValue {
        0.5 * (self.k - self.m)
    }
}

/// `E[(αβ)^n] = Γ(1 + n/2)²` for unit mean-square Rayleigh `α`, `β`.
pub fn product_moment(order: u32) -> f64 {
    // Γ(1 + n/2) by upward recurrence from Γ(1) = 1 or Γ(3/2) = √π/2
    let (mut g, mut x) = if order % 2 == 0 { (1.0, 1.0) } else { (0.5 * SQRT_PI, 1.5) };
    while x < 1.0 + order as f64 / 2.0 - 0.25 {
        g *= x;
        x += 1.0;
    }
    g * g
}

/// Integer partitions of `n` in non-increasing order.
fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            rec(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `E[Z^order]` for `Z = Σ_{i=1}^N αᵢβᵢ`, exact, `order` in `1..=6`.
pub fn sum_moment(n_elements: u32, order: u32) -> Result<f64> {
    if n_elements < 1 {
        return Err(Error::InvalidArgument("n_elements must be at least 1".into()));
    }
    if !(1..=6).contains(&order) {
        return Err(Error::InvalidArgument(format!("sum_moment supports orders 1..=6, got {order}")));
    }
    let n = f64::from(n_elements);
    let mut total = 0.0;
    for parts in partitions(order) {
        let len = parts.len() as u32;
        if len > n_elements {
            continue;
        }
        let multinomial = factorial(order) / parts.iter().map(|&p| factorial(p)).product::<f64>();
        // ordered choice of distinct elements, divided by permutations of equal parts
        let falling: f64 = (0..len).map(|j| n - f64::from(j)).product();
        let mut repeats = 1.0;
        let mut i = 0;
        while i < parts.len() {
            let run = parts[i..].iter().take_while(|&&p| p == parts[i]).count() as u32;
            repeats *= factorial(run);
            i += run as usize;
        }
        let moments: f64 = parts.iter().map(|&p| product_moment(p)).product();
        total += multinomial * falling / repeats * moments;
    }
    Ok(total)
}

/// Three-moment fit of the squared-K_G law to `Z²`.
pub fn fit_kg_parameters(n_elements: u32) -> Result<KgParams> {
    let infeasible = |reason: String| Error::InfeasibleFit { n_elements, reason };
    if n_elements < 1 {
        return Err(infeasible("N must be at least 1".into()));
    }
    let m2 = sum_moment(n_elements, 2)?;
    let m4 = sum_moment(n_elements, 4)?;
    let m6 = sum_moment(n_elements, 6)?;
    let mu2 = m4 / (m2 * m2);
    let mu3 = m6 / (m2 * m2 * m2);
    let s = (4.0 * mu2 - 3.0 - mu3 / mu2) / 2.0;
    let p = mu2 - 1.0 - s;
    if !(p > 0.0) {
        return Err(infeasible(format!("p = {p} is not positive")));
    }
    let sum = s / p;
    if !(sum > 0.0) {
        return Err(infeasible(format!("k + m = {sum} is not positive")));
    }
    let prod = 1.0 / p;
    let disc = sum * sum - 4.0 * prod;
    let (k, m) = if disc >= 0.0 {
        let r = disc.sqrt();
        (Complex64::new(0.5 * (sum + r), 0.0), Complex64::new(0.5 * (sum - r), 0.0))
    } else {
        let k = Complex64::new(0.5 * sum, 0.5 * (-disc).sqrt());
        (k, k.conj())
    };
    Ok(KgParams { k, m, omega: m2, a_scale: (prod / m2).sqrt(), sum_km: sum, prod_km: prod })
}

/// `E[Y^n]` of the fitted law with `P_s = 1`:
/// `(Ω/km)^n Γ(k+n)Γ(m+n)/(Γ(k)Γ(m))`.
pub fn kg_moment(params: &KgParams, order: u32) -> Result<f64> {
    let mut poch = Complex64::new(1.0, 0.0);
    for j in 0..order {
        let j = f64::from(j);
        poch *= (params.k + j) * (params.m + j);
    }
    let v = poch * (params.omega / params.prod_km).powi(order as i32);
    if v.im.abs() > 1e-10 * v.re.abs() {
        return Err(Error::NotReal { re: v.re, im: v.im });
    }
    Ok(v.re)
}

/// Density of `X = P_I Σ|h_l|²`: Gamma with shape `L` and scale `P_I`.
pub fn interference_pdf(cfg: &SystemConfig, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let l = f64::from(cfg.n_interferers);
    let p_i = cfg.p_i();
    let ln = (l - 1.0) * x.ln() - x / p_i - l * p_i.ln() - ln_gamma(l).unwrap_or(0.0);
    ln.exp()
}

/// `K_ν(x) = ∫_0^∞ e^{-x cosh t} cosh(νt) dt`, real part, for complex `ν`
/// with `Re ν` or `Im ν` possibly zero.
fn bessel_k_integral(nu: Complex64, x: f64) -> Result<f64> {
    let mut upper = 1.0_f64;
    while x * upper.cosh() - nu.re.abs() * upper < 60.0 {
        upper += 0.5;
    }
    let f = |t: f64| -> Result<f64> {
        let e = -x * t.cosh();
        let v = 0.5 * ((nu * t + e).exp() + (-nu * t + e).exp());
        Ok(v.re)
    };
    Ok(try_integrate_interval(f, 0.0, upper, 1e-11, 0.0)?.value)
}

/// Squared-K_G density of `Z²` (unit `P_s`).
pub fn kg_pdf(params: &KgParams, y: f64) -> Result<f64> {
    if y <= 0.0 {
        return Ok(0.0);
    }
    let s = params.sum_km;
    let a = params.a_scale;
    let ln_pre = 2f64.ln() + s * a.ln() + (0.5 * s - 1.0) * y.ln() - params.ln_gamma_km()?;
    Ok(ln_pre.exp() * bessel_k_integral(params.k - params.m, 2.0 * a * y.sqrt())?)
}

/// Squared-K_G CDF of `Z²` by quadrature of [`kg_pdf`] in `u = √y`.
pub fn kg_cdf(params: &KgParams, y: f64) -> Result<f64> {
    if y <= 0.0 {
        return Ok(0.0);
    }
    let q = try_integrate_interval(|u: f64| Ok(2.0 * u * kg_pdf(params, u * u)?), 0.0, y.sqrt(), 1e-9, 1e-12)?;
    Ok(q.value)
}
