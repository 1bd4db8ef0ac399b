//! Bilateral Gamma stock-price models: martingale measures, Fourier option
//! pricing, implied volatility surfaces, quadratic hedging and a Monte Carlo
//! oracle.
//!
//! ```
//! use bilgamma::{lewis_price, solve, BilateralGamma, ContourSettings, Market, MeasureKind, OptionSpec, SolverSettings};
//!
//! let p = BilateralGamma::new(1.55, 133.96, 0.94, 88.92)?;
//! let m = Market::new(0.0, 0.0, 5000.0)?;
//! let sol = solve(MeasureKind::BilateralEsscher, &p, &m, &SolverSettings::default())?;
//! let call = lewis_price(&sol.law, &m, &OptionSpec::call(5000.0, 126.0)?, &ContourSettings::default())?;
//! assert!(call > 0.0 && call < 5000.0);
//! # Ok::<(), bilgamma::Error>(())
//! ```

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod hedging;
pub mod law;
pub mod measures;
pub mod montecarlo;
pub mod numerics;
pub mod pricer;
pub mod process;
pub mod validate;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use hedging::{hedge_delta, HedgeSettings};
pub use law::{ConvolvedLaw, RiskNeutralLaw};
pub use measures::{solve, MeasureKind, MeasureParams, MeasureSolution, SolverSettings};
pub use montecarlo::{Estimate, SimConfig};
pub use pricer::{implied_vol, lewis_price, vol_surface, ContourSettings, OptionKind, OptionSpec, VolSurface};
pub use process::{cumulant_onesided, BilateralGamma, Market};
