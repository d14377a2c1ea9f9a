//! Scenario files: a base configuration, a sweep, and optional per-curve
//! overrides.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ris_cci::{ModulationScheme, PhaseShiftModel, SystemConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PSDb,
    NElements,
    NInterferers,
    PIDb,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { trials: 100_000, seed: 1 }
    }
}

/// One curve: a label plus fields that replace the base values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesOverride {
    pub label: String,
    pub n_elements: Option<u32>,
    pub n_interferers: Option<u32>,
    pub p_s_db: Option<f64>,
    pub p_i_db: Option<f64>,
    pub gamma_th_db: Option<f64>,
    pub modulation: Option<ModulationScheme>,
    pub phase_model: Option<PhaseShiftModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub system: SystemConfig,
    #[serde(default)]
    pub phase_model: PhaseShiftModel,
    #[serde(default = "ModulationScheme::dpsk")]
    pub modulation: ModulationScheme,
    pub sweep: Sweep,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub series: Vec<SeriesOverride>,
}

/// A fully resolved evaluation point.
#[derive(Debug, Clone)]
pub struct Point {
    pub series: String,
    pub sweep_value: f64,
    pub system: SystemConfig,
    pub modulation: ModulationScheme,
    pub phase_model: PhaseShiftModel,
}

impl Sweep {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            bail!("sweep step must be positive, got {}", self.step);
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            bail!("sweep grid is empty: start {} stop {}", self.start, self.stop);
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            bail!("sweep grid has {count} points; at most 100000 allowed");
        }
        let values: Vec<f64> = (0..count).map(|i| self.start + i as f64 * self.step).collect();
        if matches!(self.variable, SweepVariable::NElements | SweepVariable::NInterferers) {
            if let Some(v) = values.iter().find(|v| v.fract() != 0.0 || **v < 1.0) {
                bail!("{:?} sweep needs positive integers, got {v}", self.variable);
            }
        }
        Ok(values)
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let scenario: Scenario =
            serde_json::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.phase_model.validate()?;
        self.modulation.validate()?;
        self.sweep.grid()?;
        if self.mc.trials == 0 {
            bail!("mc.trials must be at least 1");
        }
        let mut labels = std::collections::BTreeSet::new();
        for s in &self.series {
            if !labels.insert(&s.label) {
                bail!("duplicate series label {:?}", s.label);
            }
        }
        Ok(())
    }

    /// Every (series, sweep value) point in output order.
    pub fn points(&self) -> Result<Vec<Point>> {
        let grid = self.sweep.grid()?;
        let base = SeriesOverride { label: "base".into(), ..Default::default() };
        let series: Vec<&SeriesOverride> = if self.series.is_empty() { vec![&base] } else { self.series.iter().collect() };
        let mut out = Vec::with_capacity(grid.len() * series.len());
        for s in series {
            let mut system = self.system;
            if let Some(v) = s.n_elements {
                system.n_elements = v;
            }
            if let Some(v) = s.n_interferers {
                system.n_interferers = v;
            }
            if let Some(v) = s.p_s_db {
                system.p_s_db = v;
            }
            if let Some(v) = s.p_i_db {
                system.p_i_db = v;
            }
            if let Some(v) = s.gamma_th_db {
                system.gamma_th_db = v;
            }
            let modulation = s.modulation.clone().unwrap_or_else(|| self.modulation.clone());
            let phase_model = s.phase_model.unwrap_or(self.phase_model);
            modulation.validate()?;
            phase_model.validate()?;
            for &x in &grid {
                let mut sys = system;
                match self.sweep.variable {
                    SweepVariable::PSDb => sys.p_s_db = x,
                    SweepVariable::PIDb => sys.p_i_db = x,
                    SweepVariable::NElements => sys.n_elements = x as u32,
                    SweepVariable::NInterferers => sys.n_interferers = x as u32,
                }
                sys.validate().with_context(|| format!("series {:?} at sweep value {x}", s.label))?;
                out.push(Point {
                    series: s.label.clone(),
                    sweep_value: x,
                    system: sys,
                    modulation: modulation.clone(),
                    phase_model,
                });
            }
        }
        Ok(out)
    }
}
