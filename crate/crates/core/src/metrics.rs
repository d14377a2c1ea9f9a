//! SIR distribution and link metrics.
//!
//! Closed forms are Meijer G-functions in `w = A²γP_I/P_s`. Quadrature
//! counterparts integrate the same CDF/PDF numerically and are used both
//! as cross-checks and (for capacity) as the reported value.
//!
//! Values are returned as computed. When `k, m` are a conjugate pair, the
//! closed-form CDF is a fitted model and may dip slightly below zero far in
//! the tail; nothing is clamped here.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{KgParams, SystemConfig};
use crate::error::{Error, Result};
use crate::special::gamma::ln_gamma;
use crate::special::meijer::{meijer_g_with, EvalMethod, MeijerGSpec, MeijerOptions};
use crate::special::quadrature::{try_integrate_semiinfinite, DEFAULT_REL_TOL};

/// `(p, q)` pair of the conditional BER kernel `Γ(p, qγ)/(2Γ(p))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationScheme {
    pub p: f64,
    pub q: f64,
    pub name: String,
}

impl ModulationScheme {
    pub fn dpsk() -> Self {
        Self { p: 1.0, q: 1.0, name: "DPSK".into() }
    }

    pub fn bpsk() -> Self {
        Self { p: 0.5, q: 1.0, name: "BPSK".into() }
    }

    pub fn bfsk() -> Self {
        Self { p: 0.5, q: 0.5, name: "BFSK".into() }
    }

    pub fn custom(name: &str, p: f64, q: f64) -> Result<Self> {
        let m = Self { p, q, name: name.into() };
        m.validate()?;
        Ok(m)
    }

    /// Looks up DPSK, BPSK or BFSK by name (case-insensitive).
    pub fn named(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "DPSK" => Some(Self::dpsk()),
            "BPSK" => Some(Self::bpsk()),
            "BFSK" => Some(Self::bfsk()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p > 0.0 && self.q > 0.0 && self.p.is_finite() && self.q.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("modulation needs p, q > 0, got p = {}, q = {}", self.p, self.q)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResult {
    pub value: f64,
    pub method: Method,
    pub diagnostics: BTreeMap<String, f64>,
}

impl MetricResult {
    fn new(value: f64, method: Method) -> Self {
        Self { value, method, diagnostics: BTreeMap::new() }
    }

    fn note(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.into(), v);
        self
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn lower_pair(params: &KgParams) -> [Complex64; 2] {
    let h = params.half_diff();
    [h, -h]
}

/// `w = A²γP_I/P_s`
fn sir_argument(cfg: &SystemConfig, params: &KgParams, gamma: f64) -> f64 {
    params.a_scale * params.a_scale * gamma * cfg.p_i() / cfg.p_s()
}

/// `ln[Γ(k)Γ(m)Γ(L)]`
fn ln_norm(cfg: &SystemConfig, params: &KgParams) -> Result<f64> {
    Ok(params.ln_gamma_km()? + ln_gamma(f64::from(cfg.n_interferers))?)
}

/// G-function of the SIR density at `γ`.
pub fn pdf_spec(cfg: &SystemConfig, params: &KgParams, gamma: f64) -> Result<MeijerGSpec> {
    let s = params.sum_km;
    let l = f64::from(cfg.n_interferers);
    MeijerGSpec::new(vec![c(1.0 - l - 0.5 * s)], vec![], lower_pair(params).to_vec(), vec![], sir_argument(cfg, params, gamma))
}

/// G-function of the SIR CDF at `γ`.
pub fn cdf_spec(cfg: &SystemConfig, params: &KgParams, gamma: f64) -> Result<MeijerGSpec> {
    let s = params.sum_km;
    let l = f64::from(cfg.n_interferers);
    MeijerGSpec::new(
        vec![c(1.0 - 0.5 * s), c(1.0 - l - 0.5 * s)],
        vec![],
        lower_pair(params).to_vec(),
        vec![c(-0.5 * s)],
        sir_argument(cfg, params, gamma),
    )
}

/// G-function of the average BER.
pub fn ber_spec(cfg: &SystemConfig, params: &KgParams, modulation: &ModulationScheme) -> Result<MeijerGSpec> {
    let s = params.sum_km;
    let l = f64::from(cfg.n_interferers);
    MeijerGSpec::new(
        vec![c(1.0 - modulation.p - 0.5 * s), c(1.0 - 0.5 * s), c(1.0 - l - 0.5 * s)],
        vec![],
        lower_pair(params).to_vec(),
        vec![c(-0.5 * s)],
        sir_argument(cfg, params, 1.0 / modulation.q),
    )
}

/// G-function of the ergodic capacity.
pub fn capacity_spec(cfg: &SystemConfig, params: &KgParams) -> Result<MeijerGSpec> {
    let s = params.sum_km;
    let l = f64::from(cfg.n_interferers);
    let [h0, h1] = lower_pair(params);
    MeijerGSpec::new(
        vec![c(1.0 - l - 0.5 * s), c(-0.5 * s)],
        vec![c(1.0 - 0.5 * s)],
        vec![h0, h1, c(-0.5 * s), c(-0.5 * s)],
        vec![],
        sir_argument(cfg, params, 1.0),
    )
}

fn eval_real(spec: &MeijerGSpec) -> Result<(f64, EvalMethod)> {
    let e = meijer_g_with(spec, &MeijerOptions::default())?;
    let v = crate::special::meijer::real_part(e.value)?;
    Ok((v, e.method))
}

fn route_code(m: EvalMethod) -> f64 {
    match m {
        EvalMethod::ResidueSeries => 0.0,
        EvalMethod::ContourQuadrature => 1.0,
    }
}

/// Closed-form SIR density.
pub fn sir_pdf(cfg: &SystemConfig, params: &KgParams, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("sir_pdf needs γ > 0, got {gamma}")));
    }
    let spec = pdf_spec(cfg, params, gamma)?;
    let w = spec.z;
    let (g, _) = eval_real(&spec)?;
    let ln_pre = (w / gamma).ln() + (0.5 * params.sum_km - 1.0) * w.ln() - ln_norm(cfg, params)?;
    Ok(ln_pre.exp() * g)
}

/// Closed-form SIR CDF.
pub fn sir_cdf(cfg: &SystemConfig, params: &KgParams, gamma: f64) -> Result<f64> {
    sir_cdf_traced(cfg, params, gamma).map(|(v, _, _)| v)
}

fn sir_cdf_traced(cfg: &SystemConfig, params: &KgParams, gamma: f64) -> Result<(f64, f64, EvalMethod)> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("sir_cdf needs γ > 0, got {gamma}")));
    }
    let spec = cdf_spec(cfg, params, gamma)?;
    let (g, route) = eval_real(&spec)?;
    let ln_pre = 0.5 * params.sum_km * spec.z.ln() - ln_norm(cfg, params)?;
    Ok((ln_pre.exp() * g, spec.z, route))
}

/// Exact outage probability: the CDF at `γ_th`.
pub fn outage_probability(cfg: &SystemConfig, params: &KgParams) -> Result<MetricResult> {
    let (v, z, route) = sir_cdf_traced(cfg, params, cfg.gamma_th())?;
    Ok(MetricResult::new(v, Method::ClosedForm).note("meijer_z", z).note("contour_fallback", route_code(route)))
}

/// High-`P_s` power law of the outage probability.
pub fn outage_asymptotic(cfg: &SystemConfig, params: &KgParams) -> Result<MetricResult> {
    let s = params.sum_km;
    let l = f64::from(cfg.n_interferers);
    let ln_v = 4f64.ln() + s * params.a_scale.ln() + ln_gamma(0.5 * s + l)? + 0.5 * s * (cfg.p_i().ln() + cfg.gamma_th().ln())
        - ln_norm(cfg, params)?
        - s.ln()
        - 0.5 * s * cfg.p_s().ln();
    Ok(MetricResult::new(ln_v.exp(), Method::Asymptotic))
}

/// Small-`γ` leading coefficient `c` of `f(γ) ≈ c γ^{(k+m)/2 - 1}`.
pub fn sir_pdf_leading_coefficient(cfg: &SystemConfig, params: &KgParams) -> Result<f64> {
    let s = params.sum_km;
    let l = f64::from(cfg.n_interferers);
    let ln_v = 2f64.ln() + s * params.a_scale.ln() + ln_gamma(0.5 * s + l)? + 0.5 * s * cfg.p_i().ln()
        - ln_norm(cfg, params)?
        - 0.5 * s * cfg.p_s().ln();
    Ok(ln_v.exp())
}

/// `(k + m)/2`
pub fn diversity_order(params: &KgParams) -> f64 {
    0.5 * params.sum_km
}

/// Closed-form average BER, with the quadrature value in the diagnostics.
pub fn average_ber(cfg: &SystemConfig, params: &KgParams, modulation: &ModulationScheme) -> Result<MetricResult> {
    let v = average_ber_closed_form(cfg, params, modulation)?;
    let mut r = MetricResult::new(v, Method::ClosedForm);
    if let Ok(q) = ber_quadrature(cfg, params, modulation) {
        r = r.note("quadrature", q).note("quadrature_rel_dev", (v - q).abs() / q.abs());
    }
    Ok(r)
}

/// Closed-form average BER only.
pub fn average_ber_closed_form(cfg: &SystemConfig, params: &KgParams, modulation: &ModulationScheme) -> Result<f64> {
    modulation.validate()?;
    let spec = ber_spec(cfg, params, modulation)?;
    let (g, _) = eval_real(&spec)?;
    let ln_pre = 0.5 * params.sum_km * spec.z.ln() - 2f64.ln() - ln_gamma(modulation.p)? - ln_norm(cfg, params)?;
    Ok(ln_pre.exp() * g)
}

/// Average BER by quadrature of `q^p/(2Γ(p)) ∫ e^{-qγ} γ^{p-1} F(γ) dγ`.
pub fn ber_quadrature(cfg: &SystemConfig, params: &KgParams, modulation: &ModulationScheme) -> Result<f64> {
    ber_quadrature_with(modulation, |g| sir_cdf(cfg, params, g))
}

/// [`ber_quadrature`] against an arbitrary CDF.
pub fn ber_quadrature_with<F>(modulation: &ModulationScheme, cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    modulation.validate()?;
    let (p, q) = (modulation.p, modulation.q);
    let integral = try_integrate_semiinfinite(
        |g| Ok((-q * g + (p - 1.0) * g.ln()).exp() * cdf(g)?),
        1.0 / q,
        DEFAULT_REL_TOL,
    )?;
    Ok((p * q.ln() - ln_gamma(p)?).exp() / 2.0 * integral)
}

/// Ergodic capacity in bit/s/Hz by quadrature of `E[log₂(1+γ)]`; the
/// Meijer-G closed form is reported in the diagnostics.
pub fn ergodic_capacity(cfg: &SystemConfig, params: &KgParams) -> Result<MetricResult> {
    let scale = sir_scale(cfg, params);
    let v = ergodic_capacity_with(scale, |g| sir_pdf(cfg, params, g))?;
    let mut r = MetricResult::new(v, Method::Quadrature);
    match capacity_closed_form(cfg, params) {
        Ok(cf) => r = r.note("closed_form", cf).note("closed_form_rel_dev", (cf - v).abs() / v.abs()),
        Err(_) => r = r.note("closed_form_failed", 1.0),
    }
    Ok(r)
}

/// Typical SIR magnitude, `P_s Ω / (P_I L)`.
pub fn sir_scale(cfg: &SystemConfig, params: &KgParams) -> f64 {
    cfg.p_s() * params.omega / (cfg.p_i() * f64::from(cfg.n_interferers))
}

/// `(1/ln 2) ∫ ln(1+γ) f(γ) dγ` for an arbitrary density with typical
/// scale `scale`.
pub fn ergodic_capacity_with<F>(scale: f64, pdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let integral = try_integrate_semiinfinite(|g| Ok(g.ln_1p() * pdf(g)?), scale, DEFAULT_REL_TOL)?;
    Ok(integral / std::f64::consts::LN_2)
}

/// Meijer-G closed form of the capacity.
pub fn capacity_closed_form(cfg: &SystemConfig, params: &KgParams) -> Result<f64> {
    let spec = capacity_spec(cfg, params)?;
    let (g, _) = eval_real(&spec)?;
    let ln_pre = 0.5 * params.sum_km * spec.z.ln() - ln_norm(cfg, params)? - std::f64::consts::LN_2.ln();
    Ok(ln_pre.exp() * g)
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::fit_kg_parameters;
    use crate::special::mellin::mellin_barnes_check;
    use crate::special::meijer::meijer_g;
    use crate::special::quadrature::{integrate_semiinfinite, try_integrate_interval};

    fn cfg(n: u32, l: u32, p_s_db: f64) -> SystemConfig {
        SystemConfig::new(n, l, p_s_db, 1.0, 20.0).unwrap()
    }

    #[test]
    fn pdf_normalises() {
        for (n, l) in [(1, 1), (10, 4)] {
            let cfg = cfg(n, l, 20.0);
            let p = fit_kg_parameters(n).unwrap();
            let total = integrate_semiinfinite(|g| sir_pdf(&cfg, &p, g).unwrap(), sir_scale(&cfg, &p)).unwrap();
            assert!((total - 1.0).abs() < 1e-6, "N = {n}, L = {l}: {total}");
        }
    }

    #[test]
    fn cdf_limits() {
        let cfg = cfg(10, 4, 30.0);
        let p = fit_kg_parameters(10).unwrap();
        assert!(sir_cdf(&cfg, &p, 1e-12).unwrap().abs() < 1e-9);
        let big = 1e6 * cfg.p_s() / cfg.p_i();
        assert!(sir_cdf(&cfg, &p, big).unwrap() >= 0.999);
    }

    #[test]
    fn cdf_is_integral_of_pdf() {
        let cfg = cfg(1, 4, 20.0);
        let p = fit_kg_parameters(1).unwrap();
        let g: f64 = 50.0;
        let q = try_integrate_interval(|t: f64| Ok(2.0 * t * sir_pdf(&cfg, &p, t * t)?), 0.0, g.sqrt(), 1e-10, 0.0).unwrap();
        let f = sir_cdf(&cfg, &p, g).unwrap();
        assert!((q.value - f).abs() < 1e-6, "{} vs {f}", q.value);
    }

    #[test]
    fn single_element_cdf_matches_contour() {
        // N = 1 gives a double lower pole; the ε-split must agree with the
        // independent contour integral
        let cfg = SystemConfig::new(1, 1, 0.0, 0.0, 0.0).unwrap();
        let p = fit_kg_parameters(1).unwrap();
        let spec = cdf_spec(&cfg, &p, 1.0).unwrap();
        assert!((spec.z - 1.0).abs() < 1e-12);
        let a = meijer_g(&spec).unwrap();
        let b = mellin_barnes_check(&spec).unwrap();
        assert!((a / b - 1.0).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn capacity_closed_form_with_repeated_lower_parameter() {
        let cfg = SystemConfig::new(1, 4, 20.0, 1.0, 20.0).unwrap();
        let p = fit_kg_parameters(1).unwrap();
        let spec = capacity_spec(&cfg, &p).unwrap();
        let a = meijer_g(&spec).unwrap();
        let b = mellin_barnes_check(&spec).unwrap();
        assert!(a.is_finite());
        assert!((a / b - 1.0).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn ratio_invariance() {
        let p = fit_kg_parameters(10).unwrap();
        let a = SystemConfig::new(10, 4, 20.0, 1.0, 20.0).unwrap();
        let b = SystemConfig::new(10, 4, 27.0, 8.0, 20.0).unwrap();
        let (x, y) = (sir_cdf(&a, &p, 50.0).unwrap(), sir_cdf(&b, &p, 50.0).unwrap());
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300) + 1e-15, "{x} vs {y}");
    }

    #[test]
    fn outage_vanishes_with_threshold() {
        let p = fit_kg_parameters(10).unwrap();
        let c = SystemConfig::new(10, 4, 20.0, 1.0, -200.0).unwrap();
        assert!(outage_probability(&c, &p).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn asymptote_power_laws() {
        let p = fit_kg_parameters(10).unwrap();
        let d = diversity_order(&p);
        let base = SystemConfig::new(10, 4, 20.0, 1.0, 20.0).unwrap();
        let v0 = outage_asymptotic(&base, &p).unwrap().value;
        let mut doubled = base;
        doubled.p_s_db += 10.0 * 2f64.log10();
        let v1 = outage_asymptotic(&doubled, &p).unwrap().value;
        assert!((v1 / v0 / 2f64.powf(-d) - 1.0).abs() < 1e-12);
        let mut more_i = base;
        more_i.p_i_db += 10.0 * 2f64.log10();
        let v2 = outage_asymptotic(&more_i, &p).unwrap().value;
        assert!((v2 / v0 / 2f64.powf(d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diversity_of_single_element() {
        assert!((diversity_order(&fit_kg_parameters(1).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ber_quadrature_stubs() {
        for m in [ModulationScheme::dpsk(), ModulationScheme::bpsk(), ModulationScheme::bfsk()] {
            let one = ber_quadrature_with(&m, |_| Ok(1.0)).unwrap();
            assert!((one - 0.5).abs() < 1e-9, "{}: {one}", m.name);
            assert_eq!(ber_quadrature_with(&m, |_| Ok(0.0)).unwrap(), 0.0);
        }
    }

    #[test]
    fn ber_closed_form_matches_quadrature() {
        let p = fit_kg_parameters(10).unwrap();
        let cfg = cfg(10, 4, 10.0);
        for m in [ModulationScheme::dpsk(), ModulationScheme::bpsk()] {
            let a = average_ber_closed_form(&cfg, &p, &m).unwrap();
            let b = ber_quadrature(&cfg, &p, &m).unwrap();
            assert!((a / b - 1.0).abs() < 1e-6, "{}: {a} vs {b}", m.name);
        }
    }

    #[test]
    fn capacity_of_point_mass_near_zero() {
        let w = 2e-12;
        let v = ergodic_capacity_with(w, |g| Ok(if g < w { 1.0 / w } else { 0.0 })).unwrap();
        assert!(v.abs() < 1e-11);
    }

    #[test]
    fn capacity_quadrature_matches_closed_form() {
        let p = fit_kg_parameters(5).unwrap();
        let cfg = SystemConfig::new(5, 8, 30.0, 1.0, 20.0).unwrap();
        let r = ergodic_capacity(&cfg, &p).unwrap();
        assert!(r.value > 0.0);
        assert!(r.diagnostics["closed_form_rel_dev"] < 1e-6, "{:?}", r.diagnostics);
    }

    #[test]
    fn modulation_table() {
        assert_eq!(ModulationScheme::named("bpsk").unwrap(), ModulationScheme::bpsk());
        assert!(ModulationScheme::named("qam").is_none());
        assert!(ModulationScheme::custom("x", 0.0, 1.0).is_err());
        assert!(ModulationScheme::custom("alt-bpsk", 1.0, 0.5).is_ok());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 10.0, 100.0];
        let y = [1.0, 1e-2, 1e-4];
        assert!((loglog_slope(&x, &y).unwrap() + 2.0).abs() < 1e-12);
        assert!(loglog_slope(&x, &[1.0, -1.0, 1.0]).is_none());
    }
}
