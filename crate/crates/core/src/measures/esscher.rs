use super::{bilateral_entropy, increasing_root, MeasureKind, MeasureParams, MeasureSolution, SolverSettings};
use super::MARTINGALE_EPS;
use crate::error::{domain, Error, Result};
use crate::process::{BilateralGamma, Market};

/// `Ψ(Θ + 1) − Ψ(Θ) − (r − q)`: zero exactly at the Esscher parameter.
///
/// Defined for `Θ ∈ (−λ⁻, λ⁺ − 1)` and strictly increasing there.
pub fn esscher_equation(p: &BilateralGamma, m: &Market, theta: f64) -> Result<f64> {
    let (ap, lp, am, lm) = p.tuple();
    if !(theta > -lm && theta < lp - 1.0) {
        return Err(domain(format!(
            "Esscher parameter {theta} outside ({}, {})",
            -lm,
            lp - 1.0
        )));
    }
    // ln((λ⁺−Θ)/(λ⁺−1−Θ)) = ln1p(1/(λ⁺−1−Θ)); ln((λ⁻+Θ)/(λ⁻+1+Θ)) = −ln1p(1/(λ⁻+Θ)).
    Ok(ap * (1.0 / (lp - 1.0 - theta)).ln_1p() - am * (1.0 / (lm + theta)).ln_1p() - m.carry())
}

/// Esscher transform making the discounted price a martingale.
///
/// The transformed law is `Γ(α⁺, λ⁺ − Θ; α⁻, λ⁻ + Θ)`.
pub fn solve_esscher(p: &BilateralGamma, m: &Market, s: &SolverSettings) -> Result<MeasureSolution> {
    let (_, lp, _, lm) = p.tuple();
    if lp + lm <= 1.0 {
        return Err(Error::NoSolution(format!(
            "the Esscher measure requires λ⁺ + λ⁻ > 1, got {}",
            lp + lm
        )));
    }
    let already = lp > 1.0 && p.martingale_residual(m)?.abs() < MARTINGALE_EPS;
    let theta = if already {
        0.0
    } else {
        increasing_root(
            |t| esscher_equation(p, m, t).unwrap_or(f64::NAN),
            -lm,
            lp - 1.0,
            s,
        )?
    };
    let law = p.tilt(theta, -theta)?;
    Ok(MeasureSolution {
        kind: MeasureKind::Esscher,
        params: MeasureParams::Esscher { theta },
        law: law.into(),
        objective: Some(bilateral_entropy(p, theta, -theta)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::RiskNeutralLaw;
    use proptest::prelude::*;

    fn dax() -> BilateralGamma {
        BilateralGamma::new(1.55, 133.96, 0.94, 88.92).unwrap()
    }

    fn flat() -> Market {
        Market::new(0.0, 0.0, 5000.0).unwrap()
    }

    fn theta_of(sol: &MeasureSolution) -> f64 {
        match sol.params {
            MeasureParams::Esscher { theta } => theta,
            _ => unreachable!(),
        }
    }

    #[test]
    fn reference_parameters() {
        let sol = solve_esscher(&dax(), &flat(), &SolverSettings::default()).unwrap();
        let theta = theta_of(&sol);
        assert!((theta + 5.28).abs() < 0.005, "Θ = {theta}");
        let RiskNeutralLaw::BilateralGamma(q) = sol.law else { panic!() };
        assert!((q.lambda_plus() - 139.24).abs() < 0.01);
        assert!((q.lambda_minus() - 83.64).abs() < 0.01);
        assert!((sol.objective.unwrap() - 0.00294113).abs() < 5e-6);
        assert!(sol.law.martingale_residual(&flat()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn equal_shapes_without_carry_have_closed_form() {
        let p = BilateralGamma::new(0.8, 40.0, 0.8, 25.0).unwrap();
        let sol = solve_esscher(&p, &flat(), &SolverSettings::default()).unwrap();
        assert!((theta_of(&sol) - 7.0).abs() < 1e-10);
    }

    #[test]
    fn heavy_tails_have_no_esscher_measure() {
        let p = BilateralGamma::new(1.0, 0.4, 1.0, 0.5).unwrap();
        let err = solve_esscher(&p, &flat(), &SolverSettings::default()).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)));
    }

    #[test]
    fn martingale_physical_law_returns_zero() {
        // Choose r so that Ψ(1) = r − q exactly.
        let p = dax();
        let m = Market::new(p.cumulant(1.0).unwrap(), 0.0, 100.0).unwrap();
        let sol = solve_esscher(&p, &m, &SolverSettings::default()).unwrap();
        assert_eq!(theta_of(&sol), 0.0);
        assert_eq!(sol.objective, Some(0.0));
    }

    proptest! {
        #[test]
        fn solved_law_is_a_martingale(
            ap in 0.05f64..5.0, lp in 0.2f64..150.0, am in 0.05f64..5.0, lm in 0.9f64..150.0,
            r in 0.0f64..0.05, qf in 0.0f64..1.0,
        ) {
            let p = BilateralGamma::new(ap, lp, am, lm).unwrap();
            let m = Market::new(r, r * qf, 1.0).unwrap();
            let sol = solve_esscher(&p, &m, &SolverSettings::default()).unwrap();
            let RiskNeutralLaw::BilateralGamma(q) = sol.law else { panic!() };
            prop_assert!(q.lambda_plus() > 1.0);
            let res = q.martingale_residual(&m).unwrap();
            prop_assert!(res.abs() < 1e-10, "residual {}", res);
        }
    }
}
