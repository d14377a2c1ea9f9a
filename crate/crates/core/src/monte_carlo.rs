//! Monte Carlo simulation of the instantaneous SIR.
//!
//! Trials are split into fixed chunks of [`CHUNK_SIZE`]. Chunk `c` draws
//! from a ChaCha8 stream seeded with the user seed and stream id `c`, runs
//! sequentially, and chunk partial sums are reduced in chunk order, so the
//! result does not depend on how rayon schedules the chunks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::metrics::ModulationScheme;

pub const CHUNK_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModelKind {
    Ideal,
    Practical,
}

/// Reflection amplitude model `ω(φ) = (1-ϖ)((sin(φ-κ)+1)/2)^ς + ϖ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftModel {
    pub kind: PhaseModelKind,
    /// `ϖ`
    pub min_amplitude: f64,
    /// `κ`, radians
    pub phase_offset: f64,
    /// `ς`
    pub steepness: f64,
}

impl Default for PhaseShiftModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl PhaseShiftModel {
    pub fn ideal() -> Self {
        Self { kind: PhaseModelKind::Ideal, min_amplitude: 1.0, phase_offset: 0.0, steepness: 1.0 }
    }

    /// ϖ = 0.8, κ = 0.43π, ς = 1.6
    pub fn practical_default() -> Self {
        Self { kind: PhaseModelKind::Practical, min_amplitude: 0.8, phase_offset: 0.43 * PI, steepness: 1.6 }
    }

    pub fn practical(min_amplitude: f64, phase_offset: f64, steepness: f64) -> Result<Self> {
        let m = Self { kind: PhaseModelKind::Practical, min_amplitude, phase_offset, steepness };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == PhaseModelKind::Ideal {
            return Ok(());
        }
        let ok = self.min_amplitude > 0.0
            && self.min_amplitude <= 1.0
            && self.phase_offset.is_finite()
            && self.steepness > 0.0
            && self.steepness.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "practical phase model needs min_amplitude in (0, 1], finite offset, positive steepness: {self:?}"
            )))
        }
    }

    /// Amplitude at applied phase `phi`.
    pub fn amplitude(&self, phi: f64) -> f64 {
        match self.kind {
            PhaseModelKind::Ideal => 1.0,
            PhaseModelKind::Practical => {
                let base = 0.5 * ((phi - self.phase_offset).sin() + 1.0);
                (1.0 - self.min_amplitude) * base.powf(self.steepness) + self.min_amplitude
            }
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Source of the random quantities of one SIR draw.
pub trait FadingSource {
    /// Rayleigh amplitude with unit mean square.
    fn rayleigh(&mut self) -> f64;
    /// Phase uniform on `[0, 2π)`.
    fn phase(&mut self) -> f64;
    /// `|h|²` of a unit-power circular complex Gaussian.
    fn gaussian_power(&mut self) -> f64;
}

/// [`FadingSource`] backed by any `rand` generator.
pub struct RngFading<R: Rng>(pub R);

impl<R: Rng> RngFading<R> {
    /// Uniform on `(0, 1]`, safe for `ln`.
    fn open_unit(&mut self) -> f64 {
        1.0 - self.0.random::<f64>()
    }
}

impl<R: Rng> FadingSource for RngFading<R> {
    fn rayleigh(&mut self) -> f64 {
        (-self.open_unit().ln()).sqrt()
    }

    fn phase(&mut self) -> f64 {
        2.0 * PI * self.0.random::<f64>()
    }

    fn gaussian_power(&mut self) -> f64 {
        // Box–Muller pair, each component with variance 1/2
        let r = (-2.0 * self.open_unit().ln()).sqrt();
        let t = 2.0 * PI * self.0.random::<f64>();
        let (re, im) = (r * t.cos(), r * t.sin());
        0.5 * (re * re + im * im)
    }
}

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// The pieces of one SIR draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirDraw {
    /// `Σ ω(φᵢ) αᵢ βᵢ`
    pub amplitude: f64,
    /// `Σ |h_l|²`
    pub interference: f64,
    pub sir: f64,
}

fn wrap_phase(phi: f64) -> f64 {
    phi.rem_euclid(2.0 * PI)
}

/// One draw of the SIR. Phases are drawn for the ideal model too, so both
/// models consume identical streams.
pub fn sample_draw<S: FadingSource>(cfg: &SystemConfig, model: &PhaseShiftModel, src: &mut S) -> SirDraw {
    let mut amplitude = 0.0;
    for _ in 0..cfg.n_elements {
        let alpha = src.rayleigh();
        let beta = src.rayleigh();
        let theta = src.phase();
        let phi = src.phase();
        amplitude += model.amplitude(wrap_phase(theta + phi)) * alpha * beta;
    }
    let interference: f64 = (0..cfg.n_interferers).map(|_| src.gaussian_power()).sum();
    let sir = cfg.p_s() * amplitude * amplitude / (cfg.p_i() * interference);
    SirDraw { amplitude, interference, sir }
}

/// One SIR sample.
pub fn sample_sir<S: FadingSource>(cfg: &SystemConfig, model: &PhaseShiftModel, src: &mut S) -> f64 {
    sample_draw(cfg, model, src).sir
}

/// Conditional BER `Γ(p, qγ)/(2Γ(p))`.
pub fn ber_kernel(modulation: &ModulationScheme, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        0.5
    } else if !gamma.is_finite() {
        0.0
    } else {
        0.5 * gamma_ur(modulation.p, modulation.q * gamma)
    }
}

/// `log₂(1 + γ)`
pub fn capacity_kernel(gamma: f64) -> f64 {
    gamma.ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Sums {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(mut self, o: &Sums) -> Self {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::InvalidArgument("trials must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Runs `trials` draws in chunk-ordered parallel, one `Vec<Sums>` slot per
/// statistic returned by `stats`.
fn run_chunked<F>(trials: u64, seed: u64, width: usize, body: F) -> Vec<Vec<Sums>>
where
    F: Fn(&mut RngFading<ChaCha8Rng>, &mut [Sums]) + Sync,
{
    let chunks = trials.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SIZE.min(trials - c * CHUNK_SIZE);
            let mut src = RngFading(chunk_rng(seed, c));
            let mut sums = vec![Sums::default(); width];
            for _ in 0..count {
                body(&mut src, &mut sums);
            }
            sums
        })
        .collect()
}

fn simulate_kernel<K>(cfg: &SystemConfig, model: &PhaseShiftModel, trials: u64, seed: u64, kernel: K) -> Result<McEstimate>
where
    K: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    model.validate()?;
    check_trials(trials)?;
    let chunks = run_chunked(trials, seed, 1, |src, sums| sums[0].push(kernel(sample_sir(cfg, model, src))));
    let total = chunks.iter().fold(Sums::default(), |acc, c| acc.merge(&c[0]));
    Ok(McEstimate { mean: total.mean(), std_error: total.std_error(), trials, seed })
}

/// Fraction of draws with `γ < γ_th`; standard error `√(p̂(1-p̂)/n)`.
pub fn estimate_outage(cfg: &SystemConfig, model: &PhaseShiftModel, trials: u64, seed: u64) -> Result<McEstimate> {
    let th = cfg.gamma_th();
    let mut e = simulate_kernel(cfg, model, trials, seed, |g| if g < th { 1.0 } else { 0.0 })?;
    e.std_error = (e.mean * (1.0 - e.mean) / trials as f64).sqrt();
    Ok(e)
}

/// Mean conditional BER over SIR draws.
pub fn estimate_ber(
    cfg: &SystemConfig,
    model: &PhaseShiftModel,
    modulation: &ModulationScheme,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    modulation.validate()?;
    simulate_kernel(cfg, model, trials, seed, |g| ber_kernel(modulation, g))
}

/// Mean `log₂(1+γ)` over SIR draws.
pub fn estimate_capacity(cfg: &SystemConfig, model: &PhaseShiftModel, trials: u64, seed: u64) -> Result<McEstimate> {
    simulate_kernel(cfg, model, trials, seed, capacity_kernel)
}

/// Mean of `kernel(γ)` over draws from an explicit source, sequentially.
pub fn estimate_with_source<S, K>(cfg: &SystemConfig, model: &PhaseShiftModel, trials: u64, src: &mut S, kernel: K) -> Result<McEstimate>
where
    S: FadingSource,
    K: Fn(f64) -> f64,
{
    check_trials(trials)?;
    let mut s = Sums::default();
    for _ in 0..trials {
        s.push(kernel(sample_sir(cfg, model, src)));
    }
    Ok(McEstimate { mean: s.mean(), std_error: s.std_error(), trials, seed: 0 })
}

/// Sample moments `E[Z^order]` of `Z = Σ αᵢβᵢ` with chunk-jackknife
/// standard errors.
pub fn estimate_z_moments(n_elements: u32, orders: &[u32], trials: u64, seed: u64) -> Result<Vec<McEstimate>> {
    check_trials(trials)?;
    if n_elements < 1 {
        return Err(Error::InvalidArgument("n_elements must be at least 1".into()));
    }
    if let Some(o) = orders.iter().find(|o| !(1..=6).contains(*o)) {
        return Err(Error::InvalidArgument(format!("moment order {o} outside 1..=6")));
    }
    let chunks = run_chunked(trials, seed, orders.len(), |src, sums| {
        let z: f64 = (0..n_elements).map(|_| src.rayleigh() * src.rayleigh()).sum();
        for (s, &o) in sums.iter_mut().zip(orders) {
            s.push(z.powi(o as i32));
        }
    });
    let estimates = (0..orders.len())
        .map(|j| {
            let total = chunks.iter().fold(Sums::default(), |acc, c| acc.merge(&c[j]));
            let std_error = if chunks.len() < 2 {
                total.std_error()
            } else {
                let g = chunks.len() as f64;
                let loo: Vec<f64> = chunks
                    .iter()
                    .map(|c| (total.sum - c[j].sum) / (total.n - c[j].n) as f64)
                    .collect();
                let mean = loo.iter().sum::<f64>() / g;
                ((g - 1.0) / g * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
            };
            McEstimate { mean: total.mean(), std_error, trials, seed }
        })
        .collect();
    Ok(estimates)
}
