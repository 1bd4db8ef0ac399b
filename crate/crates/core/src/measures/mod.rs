//! Martingale measures for bilateral Gamma stock models.
//!
//! Five constructions are available: the Esscher transform, the minimal
//! entropy measure, the entropy-minimal and p-optimal bilateral Esscher
//! transforms, and the minimal martingale measure.

mod bilateral;
mod entropy;
mod esscher;
mod minimal;

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::law::RiskNeutralLaw;
use crate::numerics::roots;
use crate::process::{BilateralGamma, Market};

pub use bilateral::{
    bilateral_entropy, esscher_via_fixed_point, ln_p_distance, p_distance, p_optimal_domain, phi_domain,
    phi_inverse, phi_map, solve_bilateral_esscher, solve_p_optimal,
};
pub use entropy::{memm_drift, memm_entropy, solve_memm};
pub use esscher::{esscher_equation, solve_esscher};
pub use minimal::{mmm_conditions, mmm_constant, mmm_law, solve_mmm};

/// Residuals below this are treated as an exact martingale.
pub(crate) const MARTINGALE_EPS: f64 = 1e-13;

/// Tolerances shared by the measure solvers.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Absolute tolerance on the solved parameter.
    pub root_tol: f64,
    /// Relative tolerance of the Lévy-measure integrals.
    pub quad_rel_tol: f64,
    /// Bracket growth steps before giving up.
    pub max_bracket_expansions: usize,
    /// Distance kept from open-interval endpoints, relative to the width.
    pub boundary_offset: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            root_tol: 1e-12,
            quad_rel_tol: 1e-10,
            max_bracket_expansions: 200,
            boundary_offset: 1e-9,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("root_tol", self.root_tol),
            ("quad_rel_tol", self.quad_rel_tol),
            ("boundary_offset", self.boundary_offset),
        ] {
            crate::error::require_positive(name, v)?;
        }
        if self.max_bracket_expansions == 0 {
            return Err(domain("max_bracket_expansions must be at least 1"));
        }
        Ok(())
    }
}

/// Which martingale measure to construct.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureKind {
    Esscher,
    Memm,
    BilateralEsscher,
    /// p-optimal bilateral Esscher transform with exponent `p > 1`.
    POptimal(f64),
    MinimalMartingale,
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "esscher" => Ok(Self::Esscher),
            "memm" => Ok(Self::Memm),
            "bilateral" => Ok(Self::BilateralEsscher),
            "mmm" => Ok(Self::MinimalMartingale),
            _ => {
                let Some(p) = s.strip_prefix("p-optimal:") else {
                    return Err(domain(format!(
                        "unknown measure '{s}', expected esscher, memm, bilateral, p-optimal:<p> or mmm"
                    )));
                };
                let p: f64 = p
                    .parse()
                    .map_err(|_| domain(format!("cannot parse exponent in '{s}'")))?;
                if !(p > 1.0 && p.is_finite()) {
                    return Err(domain(format!("p-optimal exponent must exceed 1, got {p}")));
                }
                Ok(Self::POptimal(p))
            }
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Esscher => f.write_str("esscher"),
            Self::Memm => f.write_str("memm"),
            Self::BilateralEsscher => f.write_str("bilateral"),
            Self::POptimal(p) => write!(f, "p-optimal:{p}"),
            Self::MinimalMartingale => f.write_str("mmm"),
        }
    }
}

/// Solved scalar parameters of a measure change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureParams {
    /// Esscher parameter `Θ`.
    Esscher { theta: f64 },
    /// Minimal entropy parameter `ϑ ≤ 0`.
    Memm { theta: f64 },
    /// Bilateral tilt `(θ⁺, θ⁻)` with `θ⁻ = Φ(θ⁺)`.
    Bilateral { theta_plus: f64, theta_minus: f64 },
    /// Minimal martingale constant `c ∈ [−1, 0]`.
    MinimalMartingale { c: f64 },
}

/// Result of a measure solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSolution {
    pub kind: MeasureKind,
    pub params: MeasureParams,
    pub law: RiskNeutralLaw,
    /// Relative entropy, or the p-distance for p-optimal solves. `None` for
    /// the minimal martingale measure.
    pub objective: Option<f64>,
}

/// Dispatches to the solver for `kind`.
pub fn solve(kind: MeasureKind, p: &BilateralGamma, m: &Market, s: &SolverSettings) -> Result<MeasureSolution> {
    s.validate()?;
    match kind {
        MeasureKind::Esscher => solve_esscher(p, m, s),
        MeasureKind::Memm => solve_memm(p, m, s),
        MeasureKind::BilateralEsscher => solve_bilateral_esscher(p, m, s),
        MeasureKind::POptimal(pexp) => solve_p_optimal(p, m, pexp, s),
        MeasureKind::MinimalMartingale => solve_mmm(p, m),
    }
}

/// `g(1 + y) = y − ln(1 + y)`, accurate for small `y`.
pub(crate) fn g_shifted(y: f64) -> f64 {
    if y.abs() < 1e-2 {
        // Alternating series y²/2 − y³/3 + …; 12 terms exceed double precision.
        let mut term = y;
        let mut acc = 0.0;
        for k in 2..=13 {
            term *= -y;
            acc -= term / k as f64;
        }
        acc
    } else {
        y - y.ln_1p()
    }
}

/// Root of a continuous increasing `f` on the open interval `(lo, hi)`,
/// where `f < 0` near `lo` and `f > 0` near `hi`. `lo` may be `−∞`.
///
/// Finite ends are approached by `boundary_offset·width`, shrinking the
/// offset while the sign is wrong; an infinite end is approached by
/// geometric steps.
pub(crate) fn increasing_root<F>(mut f: F, lo: f64, hi: f64, s: &SolverSettings) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let scale = if lo.is_finite() { hi - lo } else { hi.abs().max(1.0) };
    let mut b = hi;
    let mut off = s.boundary_offset;
    let mut fb = f64::NAN;
    for _ in 0..6 {
        b = hi - off * scale;
        fb = f(b);
        if fb > 0.0 || b >= hi {
            break;
        }
        off *= 1e-3;
    }
    if !(fb >= 0.0) {
        return Err(Error::Convergence(format!("no positive value found below {hi}")));
    }
    let mut a = b;
    let mut fa = f64::NAN;
    if lo.is_finite() {
        let mut off = s.boundary_offset;
        for _ in 0..6 {
            a = lo + off * scale;
            fa = f(a);
            if fa < 0.0 || a <= lo {
                break;
            }
            off *= 1e-3;
        }
    } else {
        let mut step = scale;
        for _ in 0..s.max_bracket_expansions {
            a = b - step;
            fa = f(a);
            if fa < 0.0 {
                break;
            }
            step *= 2.0;
        }
    }
    if !(fa <= 0.0) {
        return Err(Error::Convergence(format!(
            "no sign change found on ({lo}, {hi}) within {} expansions",
            s.max_bracket_expansions
        )));
    }
    roots::brent(f, a, b, s.root_tol, 500)
}
