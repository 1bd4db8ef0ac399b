//! Run configuration read from a TOML file.
//!
//! ```toml
//! alpha_plus = 1.55
//! lambda_plus = 133.96
//! alpha_minus = 0.94
//! lambda_minus = 88.92
//! r = 0.0
//! q = 0.0
//! s0 = 5000.0
//! periods_per_year = 252   # optional
//!
//! [solver]    # optional, see SolverSettings
//! [contour]   # optional, see ContourSettings
//! [sim]       # optional, see SimConfig
//! ```
//!
//! Unknown keys are rejected at every level.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::measures::SolverSettings;
use crate::montecarlo::SimConfig;
use crate::pricer::ContourSettings;
use crate::process::{BilateralGamma, Market};

/// Environment variable that overrides `sim.seed`.
pub const SEED_ENV: &str = "BILGAMMA_SEED";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha_plus: f64,
    lambda_plus: f64,
    alpha_minus: f64,
    lambda_minus: f64,
    r: f64,
    q: f64,
    s0: f64,
    #[serde(default = "default_periods")]
    periods_per_year: f64,
    #[serde(default)]
    solver: SolverSettings,
    #[serde(default)]
    contour: ContourSettings,
    #[serde(default)]
    sim: SimConfig,
}

fn default_periods() -> f64 {
    252.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: BilateralGamma,
    pub market: Market,
    /// Model time units per year. Maturities given in years on the command
    /// line are multiplied by this factor.
    pub periods_per_year: f64,
    pub solver: SolverSettings,
    pub contour: ContourSettings,
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let wrap = |e: Error| Error::Config(e.to_string());
        let model =
            BilateralGamma::new(raw.alpha_plus, raw.lambda_plus, raw.alpha_minus, raw.lambda_minus).map_err(wrap)?;
        let market = Market::new(raw.r, raw.q, raw.s0).map_err(wrap)?;
        if !(raw.periods_per_year > 0.0 && raw.periods_per_year.is_finite()) {
            return Err(Error::Config(format!(
                "periods_per_year must be positive, got {}",
                raw.periods_per_year
            )));
        }
        raw.solver.validate().map_err(wrap)?;
        raw.contour.validate().map_err(wrap)?;
        raw.sim.validate().map_err(wrap)?;
        Ok(Self {
            model,
            market,
            periods_per_year: raw.periods_per_year,
            solver: raw.solver,
            contour: raw.contour,
            sim: raw.sim,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Replaces the simulation seed with `value`, decimal or `0x`-prefixed hex.
    pub fn override_seed(&mut self, value: &str) -> Result<()> {
        let v = value.trim();
        let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => v.parse(),
        };
        self.sim.seed = parsed.map_err(|_| Error::Config(format!("{SEED_ENV}='{value}' is not a u64")))?;
        Ok(())
    }

    /// Applies [`SEED_ENV`] if it is set.
    pub fn apply_env(&mut self) -> Result<()> {
        match std::env::var(SEED_ENV) {
            Ok(v) => self.override_seed(&v),
            Err(_) => Ok(()),
        }
    }

    /// Converts a maturity in years to model time.
    pub fn to_model_time(&self, years: f64) -> f64 {
        years * self.periods_per_year
    }
}
