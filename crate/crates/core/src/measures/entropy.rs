use super::{increasing_root, MeasureKind, MeasureParams, MeasureSolution, SolverSettings, MARTINGALE_EPS};
use crate::error::{domain, Error, Result};
use crate::law::RiskNeutralLaw;
use crate::numerics::quad::{half_line, HalfLine, Tolerance};
use crate::process::{BilateralGamma, Market};

/// `ln(eˣ − 1)` for `x > 0` without overflow.
fn ln_expm1(x: f64) -> f64 {
    if x > 1.0 {
        x + (-(-x).exp_m1()).ln()
    } else {
        x.exp_m1().ln()
    }
}

/// `(eˣ − 1)/x` with its limit 1 at the origin.
fn expm1_over_x(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

fn integrate(f: impl FnMut(f64) -> f64, s: &SolverSettings) -> Result<f64> {
    let est = half_line(f, Tolerance::relative(s.quad_rel_tol), HalfLine::default());
    if !est.converged {
        return Err(Error::Convergence(format!(
            "Lévy-measure integral did not reach relative tolerance {}",
            s.quad_rel_tol
        )));
    }
    Ok(est.value)
}

fn check_theta(p: &BilateralGamma, theta: f64) -> Result<()> {
    if !(theta <= 0.0) {
        return Err(domain(format!("minimal entropy parameter must be ≤ 0, got {theta}")));
    }
    if theta == 0.0 && p.lambda_plus() <= 1.0 {
        return Err(domain("ϑ = 0 requires λ⁺ > 1"));
    }
    Ok(())
}

/// Drift of the discounted log-price under the Lévy measure tilted by
/// `exp(ϑ(eˣ − 1))`, minus `r − q`. Strictly increasing in `ϑ`; its root is
/// the minimal entropy parameter.
pub fn memm_drift(p: &BilateralGamma, m: &Market, theta: f64, s: &SolverSettings) -> Result<f64> {
    check_theta(p, theta)?;
    let (ap, lp, am, lm) = p.tuple();
    let right = integrate(
        |x| {
            if x <= 1.0 {
                (-lp * x + theta * x.exp_m1()).exp() * expm1_over_x(x)
            } else {
                let e = -lp * x + theta * x.exp_m1() + ln_expm1(x);
                if e < -745.0 {
                    0.0
                } else {
                    e.exp() / x
                }
            }
        },
        s,
    )?;
    let left = integrate(
        |x| (-lm * x + theta * (-x).exp_m1()).exp() * -expm1_over_x(-x),
        s,
    )?;
    Ok(ap * right + am * left - m.carry())
}

/// Relative entropy of the minimal entropy measure with parameter `ϑ`, per
/// unit of time.
pub fn memm_entropy(p: &BilateralGamma, m: &Market, theta: f64, s: &SolverSettings) -> Result<f64> {
    check_theta(p, theta)?;
    let (ap, lp, am, lm) = p.tuple();
    // x⁻¹(exp(ϑ(e^{±x} − 1)) − 1), with limit ±ϑ at the origin.
    let kernel = |x: f64, sign: f64| {
        let y = theta * (sign * x).exp_m1();
        if x == 0.0 {
            sign * theta
        } else {
            y.exp_m1() / x
        }
    };
    let right = integrate(|x| (-lp * x).exp() * kernel(x, 1.0), s)?;
    let left = integrate(|x| (-lm * x).exp() * kernel(x, -1.0), s)?;
    Ok(-ap * right - am * left + m.carry() * theta)
}

/// Minimal entropy martingale measure.
///
/// Exists when `λ⁺ ≤ 1`, or when `λ⁺ > 1` and `Ψ(1) ≥ r − q`.
pub fn solve_memm(p: &BilateralGamma, m: &Market, s: &SolverSettings) -> Result<MeasureSolution> {
    let lp = p.lambda_plus();
    let solution = |theta: f64, entropy: f64| MeasureSolution {
        kind: MeasureKind::Memm,
        params: MeasureParams::Memm { theta },
        law: RiskNeutralLaw::TiltedLevy { base: *p, theta },
        objective: Some(entropy),
    };
    let hi = if lp > 1.0 {
        let residual = p.martingale_residual(m)?;
        if residual < -MARTINGALE_EPS {
            return Err(Error::NoSolution(format!(
                "the minimal entropy measure requires Ψ(1) ≥ r − q when λ⁺ > 1, got Ψ(1) − (r − q) = {residual:e}"
            )));
        }
        if residual.abs() < MARTINGALE_EPS {
            return Ok(solution(0.0, 0.0));
        }
        0.0
    } else {
        -s.boundary_offset
    };
    let mut failure = None;
    let theta = increasing_root(
        |t| match memm_drift(p, m, t.min(hi), s) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        f64::NEG_INFINITY,
        hi,
        s,
    )
    .map_err(|e| failure.take().unwrap_or(e))?;
    let entropy = memm_entropy(p, m, theta, s)?;
    Ok(solution(theta, entropy))
}
