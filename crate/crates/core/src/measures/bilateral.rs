use super::{g_shifted, increasing_root, solve_esscher, MeasureKind, MeasureParams, MeasureSolution, SolverSettings};
use super::MARTINGALE_EPS;
use crate::error::{domain, Error, Result};
use crate::numerics::minimize::minimize_on_interval;
use crate::process::{BilateralGamma, Market};

/// Open interval of `θ⁺` on which `Φ` is defined:
/// `(λ⁺ − 1/(1 − e^{−(r−q)/α⁺}), λ⁺ − 1)`, with lower end `−∞` when `r = q`.
pub fn phi_domain(p: &BilateralGamma, m: &Market) -> (f64, f64) {
    let (ap, lp, _, _) = p.tuple();
    let lo = if m.carry() == 0.0 {
        f64::NEG_INFINITY
    } else {
        lp + 1.0 / (-m.carry() / ap).exp_m1()
    };
    (lo, lp - 1.0)
}

/// `Φ(θ)` and `1/(λ⁻ − Φ(θ))`, the second without cancellation.
fn phi_parts(p: &BilateralGamma, m: &Market, theta: f64) -> Result<(f64, f64)> {
    let (ap, lp, am, lm) = p.tuple();
    let (lo, hi) = phi_domain(p, m);
    if !(theta > lo && theta < hi) {
        return Err(domain(format!("Φ is defined on ({lo}, {hi}), got θ = {theta}")));
    }
    let ln_a = (1.0 / (lp - theta - 1.0)).ln_1p();
    let d_minus_1 = ((ap * ln_a - m.carry()) / am).exp_m1();
    if !(d_minus_1 > 0.0) {
        return Err(domain(format!("Φ undefined at θ = {theta}: rounding at the domain edge")));
    }
    Ok((lm - 1.0 / d_minus_1, d_minus_1))
}

/// The map `θ⁺ ↦ θ⁻` making the bilateral Esscher transform by `(θ⁺, θ⁻)` a
/// martingale measure. Strictly increasing, with `Φ < λ⁻`.
pub fn phi_map(p: &BilateralGamma, m: &Market, theta: f64) -> Result<f64> {
    Ok(phi_parts(p, m, theta)?.0)
}

/// Inverse of [`phi_map`]: the `θ⁺` with `Φ(θ⁺) = target`, for `target < λ⁻`.
pub fn phi_inverse(p: &BilateralGamma, m: &Market, target: f64) -> Result<f64> {
    let (ap, lp, am, lm) = p.tuple();
    if !(target < lm) {
        return Err(domain(format!("Φ takes values below λ⁻ = {lm}, got {target}")));
    }
    let ln_d = (1.0 / (lm - target)).ln_1p();
    let ln_a = (am * ln_d + m.carry()) / ap;
    Ok(lp - 1.0 - 1.0 / ln_a.exp_m1())
}

/// Esscher parameter as the fixed point `Φ(Θ) = −Θ`.
pub fn esscher_via_fixed_point(p: &BilateralGamma, m: &Market, s: &SolverSettings) -> Result<f64> {
    let (_, lp, _, lm) = p.tuple();
    if lp + lm <= 1.0 {
        return Err(Error::NoSolution(format!(
            "the Esscher measure requires λ⁺ + λ⁻ > 1, got {}",
            lp + lm
        )));
    }
    let (lo, hi) = phi_domain(p, m);
    increasing_root(
        |t| phi_map(p, m, t).map(|v| v + t).unwrap_or(f64::NAN),
        lo.max(-lm),
        hi,
        s,
    )
}

/// Relative entropy of the bilateral Esscher transform by `(θ⁺, θ⁻)`:
/// `α⁺g(λ⁺/(λ⁺−θ⁺)) + α⁻g(λ⁻/(λ⁻−θ⁻))` with `g(x) = x − 1 − ln x`.
pub fn bilateral_entropy(p: &BilateralGamma, theta_plus: f64, theta_minus: f64) -> Result<f64> {
    let (ap, lp, am, lm) = p.tuple();
    if !(theta_plus < lp && theta_minus < lm) {
        return Err(domain(format!(
            "entropy needs θ⁺ < {lp} and θ⁻ < {lm}, got ({theta_plus}, {theta_minus})"
        )));
    }
    Ok(ap * g_shifted(theta_plus / (lp - theta_plus)) + am * g_shifted(theta_minus / (lm - theta_minus)))
}

/// Entropy along the martingale curve `θ⁻ = Φ(θ⁺)`.
fn entropy_on_curve(p: &BilateralGamma, m: &Market, theta: f64) -> f64 {
    let (ap, lp, am, _) = p.tuple();
    match phi_parts(p, m, theta) {
        // λ⁻/(λ⁻ − Φ) − 1 = Φ·(D − 1)
        Ok((phi, d_minus_1)) => ap * g_shifted(theta / (lp - theta)) + am * g_shifted(phi * d_minus_1),
        Err(_) => f64::INFINITY,
    }
}

fn bilateral_solution(
    p: &BilateralGamma,
    m: &Market,
    kind: MeasureKind,
    theta_plus: f64,
    objective: f64,
) -> Result<MeasureSolution> {
    let theta_minus = if theta_plus == 0.0 { 0.0 } else { phi_map(p, m, theta_plus)? };
    Ok(MeasureSolution {
        kind,
        params: MeasureParams::Bilateral { theta_plus, theta_minus },
        law: p.tilt(theta_plus, theta_minus)?.into(),
        objective: Some(objective),
    })
}

fn physical_is_martingale(p: &BilateralGamma, m: &Market) -> Result<bool> {
    Ok(p.lambda_plus() > 1.0 && p.martingale_residual(m)?.abs() < MARTINGALE_EPS)
}

/// A point inside `(lo, hi)` to start a bracket search from.
fn interior_start(lo: f64, hi: f64, preferred: Option<f64>) -> f64 {
    match preferred {
        Some(x) if x > lo && x < hi => x,
        _ if lo.is_finite() => 0.5 * (lo + hi),
        _ => hi - hi.abs().max(1.0),
    }
}

/// Entropy-minimal bilateral Esscher transform.
///
/// Minimizes the relative entropy over the martingale curve `θ⁻ = Φ(θ⁺)`.
/// Exists for all parameters.
pub fn solve_bilateral_esscher(p: &BilateralGamma, m: &Market, s: &SolverSettings) -> Result<MeasureSolution> {
    if physical_is_martingale(p, m)? {
        return bilateral_solution(p, m, MeasureKind::BilateralEsscher, 0.0, 0.0);
    }
    let (lo, hi) = phi_domain(p, m);
    let hint = solve_esscher(p, m, s).ok().and_then(|sol| match sol.params {
        MeasureParams::Esscher { theta } => Some(theta),
        _ => None,
    });
    let start = interior_start(lo, hi, hint);
    let (theta, value) = minimize_on_interval(
        |t| entropy_on_curve(p, m, t),
        lo,
        hi,
        start,
        s.root_tol.max(1e-10),
        s.max_bracket_expansions,
    )?;
    bilateral_solution(p, m, MeasureKind::BilateralEsscher, theta, value)
}

/// `ln` of the p-distance of the bilateral Esscher transform by `(θ⁺, θ⁻)`.
pub fn ln_p_distance(p: &BilateralGamma, pexp: f64, theta_plus: f64, theta_minus: f64) -> Result<f64> {
    let (ap, lp, am, lm) = p.tuple();
    if !(pexp > 1.0 && pexp.is_finite()) {
        return Err(domain(format!("p-distance exponent must exceed 1, got {pexp}")));
    }
    if !(theta_plus < lp / pexp && theta_minus < lm / pexp) {
        return Err(domain(format!(
            "p-distance needs θ⁺ < {} and θ⁻ < {}, got ({theta_plus}, {theta_minus})",
            lp / pexp,
            lm / pexp
        )));
    }
    Ok(-ap * (-pexp * theta_plus / lp).ln_1p() - am * (-pexp * theta_minus / lm).ln_1p()
        + pexp * ap * (-theta_plus / lp).ln_1p()
        + pexp * am * (-theta_minus / lm).ln_1p())
}

/// p-distance `E[(dQ/dP)^p]` of the bilateral Esscher transform by
/// `(θ⁺, θ⁻)`, over one unit of time. At least 1.
pub fn p_distance(p: &BilateralGamma, pexp: f64, theta_plus: f64, theta_minus: f64) -> Result<f64> {
    Ok(ln_p_distance(p, pexp, theta_plus, theta_minus)?.exp())
}

/// Interval of `θ⁺` on which the p-distance along the martingale curve is
/// finite: `(lower end of Φ's domain, min(λ⁺/p, Φ⁻¹(λ⁻/p)))`.
pub fn p_optimal_domain(p: &BilateralGamma, m: &Market, pexp: f64) -> Result<(f64, f64)> {
    if !(pexp > 1.0 && pexp.is_finite()) {
        return Err(domain(format!("p-optimal exponent must exceed 1, got {pexp}")));
    }
    let (lo, hi) = phi_domain(p, m);
    let phi_cap = phi_inverse(p, m, p.lambda_minus() / pexp)?;
    Ok((lo, hi.min(p.lambda_plus() / pexp).min(phi_cap)))
}

/// p-optimal bilateral Esscher transform: minimizes the p-distance over the
/// martingale curve `θ⁻ = Φ(θ⁺)`.
pub fn solve_p_optimal(p: &BilateralGamma, m: &Market, pexp: f64, s: &SolverSettings) -> Result<MeasureSolution> {
    let (lo, hi) = p_optimal_domain(p, m, pexp)?;
    if !(lo < hi) {
        return Err(Error::NoSolution(format!(
            "no θ⁺ keeps the {pexp}-distance finite on the martingale curve"
        )));
    }
    let kind = MeasureKind::POptimal(pexp);
    if physical_is_martingale(p, m)? {
        return bilateral_solution(p, m, kind, 0.0, 1.0);
    }
    let objective = |t: f64| match phi_map(p, m, t) {
        Ok(phi) => ln_p_distance(p, pexp, t, phi).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };
    let hint = solve_bilateral_esscher(p, m, s).ok().and_then(|sol| match sol.params {
        MeasureParams::Bilateral { theta_plus, .. } => Some(theta_plus),
        _ => None,
    });
    let start = interior_start(lo, hi, hint);
    let (theta, ln_value) = minimize_on_interval(
        objective,
        lo,
        hi,
        start,
        s.root_tol.max(1e-10),
        s.max_bracket_expansions,
    )?;
    bilateral_solution(p, m, kind, theta, ln_value.exp())
}
