use super::{MeasureKind, MeasureParams, MeasureSolution};
use crate::error::{domain, Error, Result};
use crate::law::{ConvolvedLaw, RiskNeutralLaw};
use crate::process::{BilateralGamma, Market};

/// `c` within this distance of 0 or −1 drops the vanishing component.
const COLLAPSE_EPS: f64 = 1e-13;

fn require_lambda_plus_above_two(p: &BilateralGamma) -> Result<()> {
    if p.lambda_plus() <= 2.0 {
        return Err(domain(format!(
            "the minimal martingale measure requires λ⁺ > 2, got {}",
            p.lambda_plus()
        )));
    }
    Ok(())
}

/// `c = (Ψ(1) − (r − q)) / (Ψ(2) − 2Ψ(1))`.
pub fn mmm_constant(p: &BilateralGamma, m: &Market) -> Result<f64> {
    require_lambda_plus_above_two(p)?;
    let psi1 = p.cumulant(1.0)?;
    let psi2 = p.cumulant(2.0)?;
    Ok((psi1 - m.carry()) / (psi2 - 2.0 * psi1))
}

/// The two existence conditions in log form: `Ψ(1) ≤ r − q` and
/// `Ψ(1) − Ψ(2) ≤ −(r − q)`. Both hold iff `c ∈ [−1, 0]`.
pub fn mmm_conditions(p: &BilateralGamma, m: &Market) -> Result<(bool, bool)> {
    require_lambda_plus_above_two(p)?;
    let psi1 = p.cumulant(1.0)?;
    let psi2 = p.cumulant(2.0)?;
    Ok((psi1 <= m.carry(), psi1 - psi2 <= -m.carry()))
}

/// Law of `X₁` under the minimal martingale measure with constant `c`:
/// `Γ((c+1)α⁺, λ⁺; (c+1)α⁻, λ⁻) * Γ(−cα⁺, λ⁺−1; −cα⁻, λ⁻+1)`.
pub fn mmm_law(p: &BilateralGamma, c: f64) -> Result<RiskNeutralLaw> {
    if !(-1.0..=0.0).contains(&c) {
        return Err(domain(format!("c must lie in [−1, 0], got {c}")));
    }
    require_lambda_plus_above_two(p)?;
    let (ap, lp, am, lm) = p.tuple();
    let shifted = || BilateralGamma::new(ap, lp - 1.0, am, lm + 1.0);
    if c > -COLLAPSE_EPS {
        return Ok((*p).into());
    }
    if c < -1.0 + COLLAPSE_EPS {
        return Ok(shifted()?.into());
    }
    let first = BilateralGamma::new((c + 1.0) * ap, lp, (c + 1.0) * am, lm)?;
    let second = BilateralGamma::new(-c * ap, lp - 1.0, -c * am, lm + 1.0)?;
    Ok(RiskNeutralLaw::Convolved(ConvolvedLaw::new(vec![first, second])?))
}

/// Minimal martingale measure, when it exists as a probability measure.
pub fn solve_mmm(p: &BilateralGamma, m: &Market) -> Result<MeasureSolution> {
    if p.lambda_plus() <= 2.0 {
        return Err(Error::NoSolution(format!(
            "the minimal martingale measure requires λ⁺ > 2 (finite variance of the price), got {}",
            p.lambda_plus()
        )));
    }
    let c = mmm_constant(p, m)?;
    let in_range = (-1.0..=0.0).contains(&c);
    let (cond1, cond2) = mmm_conditions(p, m)?;
    let near_edge = c.abs() < COLLAPSE_EPS || (c + 1.0).abs() < COLLAPSE_EPS;
    if in_range != (cond1 && cond2) && !near_edge {
        return Err(Error::Convergence(format!(
            "inconsistent minimal martingale conditions at c = {c}"
        )));
    }
    if !in_range {
        let reason = if c > 0.0 {
            "c > 0 since Ψ(1) > r − q"
        } else {
            "c < −1 since Ψ(2) − Ψ(1) < r − q"
        };
        return Err(Error::NoSolution(format!(
            "the minimal martingale measure requires −1 ≤ c ≤ 0, got c = {c:.6} ({reason})"
        )));
    }
    Ok(MeasureSolution {
        kind: MeasureKind::MinimalMartingale,
        params: MeasureParams::MinimalMartingale { c },
        law: mmm_law(p, c)?,
        objective: None,
    })
}
