//! Laws of the log-price driver under a pricing measure.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::process::{BilateralGamma, Market};

/// Law of a sum of independent bilateral Gamma processes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolvedLaw {
    components: Vec<BilateralGamma>,
}

impl ConvolvedLaw {
    pub fn new(components: Vec<BilateralGamma>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("a convolved law needs at least one component"));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[BilateralGamma] {
        &self.components
    }
}

/// The law of `X₁` under a pricing measure.
///
/// `TiltedLevy` describes the minimal entropy measure: the Lévy measure of
/// `base` reweighted by `exp(θ(eˣ − 1))`. It has no closed-form
/// characteristic function, so pricing and sampling reject it.
#[derive(Debug, Clone, PartialEq)]
pub enum RiskNeutralLaw {
    BilateralGamma(BilateralGamma),
    Convolved(ConvolvedLaw),
    TiltedLevy { base: BilateralGamma, theta: f64 },
}

impl From<BilateralGamma> for RiskNeutralLaw {
    fn from(p: BilateralGamma) -> Self {
        RiskNeutralLaw::BilateralGamma(p)
    }
}

impl RiskNeutralLaw {
    /// Independent bilateral Gamma components whose sum has this law.
    pub fn components(&self) -> Result<&[BilateralGamma]> {
        match self {
            RiskNeutralLaw::BilateralGamma(p) => Ok(std::slice::from_ref(p)),
            RiskNeutralLaw::Convolved(c) => Ok(c.components()),
            RiskNeutralLaw::TiltedLevy { .. } => Err(Error::Unsupported(
                "the minimal entropy law has no closed-form characteristic function".into(),
            )),
        }
    }

    /// Smallest right rate `λ⁺` over the components: `E[e^{zX}] < ∞` iff
    /// `z` is below it.
    pub fn right_rate(&self) -> Result<f64> {
        Ok(self
            .components()?
            .iter()
            .map(BilateralGamma::lambda_plus)
            .fold(f64::INFINITY, f64::min))
    }

    /// Smallest left rate `λ⁻` over the components.
    pub fn left_rate(&self) -> Result<f64> {
        Ok(self
            .components()?
            .iter()
            .map(BilateralGamma::lambda_minus)
            .fold(f64::INFINITY, f64::min))
    }

    pub fn char_fn(&self, z: Complex64) -> Result<Complex64> {
        let mut out = Complex64::new(1.0, 0.0);
        for p in self.components()? {
            out *= p.char_fn(z)?;
        }
        Ok(out)
    }

    pub fn cumulant(&self, z: f64) -> Result<f64> {
        self.components()?.iter().map(|p| p.cumulant(z)).sum()
    }

    pub fn cumulant_complex(&self, w: Complex64) -> Result<Complex64> {
        self.components()?.iter().map(|p| p.cumulant_complex(w)).sum()
    }

    pub fn scale_time(&self, t: f64) -> Result<Self> {
        match self {
            RiskNeutralLaw::BilateralGamma(p) => Ok(p.scale_time(t)?.into()),
            RiskNeutralLaw::Convolved(c) => Ok(RiskNeutralLaw::Convolved(ConvolvedLaw::new(
                c.components()
                    .iter()
                    .map(|p| p.scale_time(t))
                    .collect::<Result<_>>()?,
            )?)),
            RiskNeutralLaw::TiltedLevy { .. } => Err(Error::Unsupported(
                "time scaling of the minimal entropy law is not supported".into(),
            )),
        }
    }

    /// `Ψ(1) − (r − q)` summed over components.
    pub fn martingale_residual(&self, market: &Market) -> Result<f64> {
        let lp = self.right_rate()?;
        if lp <= 1.0 {
            return Err(Error::NoMartingaleMeasure(format!(
                "right rate {lp} ≤ 1 gives E[exp(X₁)] = ∞"
            )));
        }
        Ok(self.cumulant(1.0)? - market.carry())
    }

    pub fn mean(&self) -> Result<f64> {
        Ok(self.components()?.iter().map(BilateralGamma::mean).sum())
    }

    pub fn variance(&self) -> Result<f64> {
        Ok(self.components()?.iter().map(BilateralGamma::variance).sum())
    }
}

impl std::fmt::Display for RiskNeutralLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RiskNeutralLaw::BilateralGamma(p) => write!(f, "{p}"),
            RiskNeutralLaw::Convolved(c) => {
                for (i, p) in c.components().iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            RiskNeutralLaw::TiltedLevy { base, theta } => {
                write!(f, "{base} tilted by exp({theta}·(e^x − 1))")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> BilateralGamma {
        BilateralGamma::new(1.55, 133.96, 0.94, 88.92).unwrap()
    }

    #[test]
    fn convolved_char_fn_is_product() {
        let q = BilateralGamma::new(0.3, 20.0, 0.2, 30.0).unwrap();
        let law = RiskNeutralLaw::Convolved(ConvolvedLaw::new(vec![p(), q]).unwrap());
        for u in [-30.0, -1.0, 0.5, 12.0] {
            let z = Complex64::new(u, 0.3);
            let lhs = law.char_fn(z).unwrap();
            let rhs = p().char_fn(z).unwrap() * q.char_fn(z).unwrap();
            assert!((lhs - rhs).norm() < 1e-15);
        }
        assert_eq!(law.right_rate().unwrap(), 20.0);
        assert_eq!(law.left_rate().unwrap(), 30.0);
    }

    #[test]
    fn tilted_law_rejects_transform_queries() {
        let law = RiskNeutralLaw::TiltedLevy { base: p(), theta: -5.3 };
        assert!(matches!(law.char_fn(Complex64::new(1.0, 0.0)), Err(Error::Unsupported(_))));
        assert!(law.scale_time(2.0).is_err());
    }

    #[test]
    fn empty_convolution_is_rejected() {
        assert!(ConvolvedLaw::new(vec![]).is_err());
    }
}
