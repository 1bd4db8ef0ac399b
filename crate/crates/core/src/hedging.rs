//! Quadratic hedging under the minimal martingale measure.
//!
//! The variance-minimizing number of shares at time `t` and spot `S` is
//!
//! ```text
//! Δ = ∫ (eˣ − 1)(π(t, Seˣ) − π(t, S)) F̂(dx) / (S (Ψ̂(2) − 2Ψ̂(1)))
//! ```
//!
//! with `π` the option price under the minimal martingale measure,
//! `F̂(dx) = (c + 1 − c eˣ) F(dx)` its Lévy measure and `Ψ̂` its cumulant.

use std::sync::Mutex;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{domain, require_positive, Error, Result};
use crate::measures::mmm_law;
use crate::numerics::quad::{half_line_batch, HalfLine, Tolerance};
use crate::pricer::{lewis_price, ContourSettings, OptionSpec};
use crate::process::{BilateralGamma, Market};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HedgeSettings {
    /// Relative tolerance of the jump integral.
    pub quad_rel_tol: f64,
    /// Tail panels below this fraction of the accumulated mass end the
    /// integration.
    pub tail_rel: f64,
    /// Contour settings for the option prices inside the integral.
    pub contour: ContourSettings,
}

impl Default for HedgeSettings {
    fn default() -> Self {
        Self {
            quad_rel_tol: 1e-8,
            tail_rel: 1e-14,
            contour: ContourSettings::default(),
        }
    }
}

fn check_c(c: f64) -> Result<()> {
    if !(-1.0..=0.0).contains(&c) {
        return Err(domain(format!("c must lie in [−1, 0], got {c}")));
    }
    Ok(())
}

/// Lévy density under the minimal martingale measure, `(c + 1 − c eˣ)·F(x)`.
pub fn mmm_levy_density(p: &BilateralGamma, c: f64, x: f64) -> Result<f64> {
    check_c(c)?;
    Ok((c + 1.0 - c * x.exp()) * p.levy_density(x)?)
}

/// Cumulant of `X₁` under the minimal martingale measure, for
/// `z ∈ (−λ⁻, λ⁺ − 1)`.
pub fn mmm_cumulant(p: &BilateralGamma, c: f64, z: f64) -> Result<f64> {
    let (ap, lp, am, lm) = p.tuple();
    if !(z > -lm && z < lp - 1.0) {
        return Err(domain(format!("z = {z} outside ({}, {})", -lm, lp - 1.0)));
    }
    let shifted = -ap * (-z / (lp - 1.0)).ln_1p() - am * (z / (lm + 1.0)).ln_1p();
    Ok((c + 1.0) * p.cumulant(z)? - c * shifted)
}

/// Quadratic hedge ratio at time `t ∈ [0, T)` and spot `spot`.
///
/// Needs `λ⁺ > 3` and `c ∈ [−1, 0]`. Prices at the quadrature nodes are
/// computed in parallel; each node's price is independent, so the result
/// does not depend on scheduling.
pub fn hedge_delta(
    p: &BilateralGamma,
    c: f64,
    m: &Market,
    opt: &OptionSpec,
    t: f64,
    spot: f64,
    hs: &HedgeSettings,
) -> Result<f64> {
    check_c(c)?;
    if p.lambda_plus() <= 3.0 {
        return Err(domain(format!(
            "the hedge ratio requires λ⁺ > 3, got {}",
            p.lambda_plus()
        )));
    }
    require_positive("spot", spot)?;
    require_positive("quad_rel_tol", hs.quad_rel_tol)?;
    require_positive("tail_rel", hs.tail_rel)?;
    if !(t >= 0.0 && t < opt.maturity) {
        return Err(domain(format!("t = {t} outside [0, {})", opt.maturity)));
    }
    let law = mmm_law(p, c)?;
    let remaining = OptionSpec::new(opt.strike, opt.maturity - t, opt.kind)?;
    let price_at = |s: f64| lewis_price(&law, &m.with_spot(s)?, &remaining, &hs.contour);
    let base = price_at(spot)?;

    let failure: Mutex<Option<Error>> = Mutex::new(None);
    // Half-line integral of (eʸ−1)(π(Se^{σy}) − π(S))·F̂(σy) with σ = ±1.
    let side = |sign: f64| {
        half_line_batch(
            |ys, out| {
                ys.par_iter()
                    .zip(out.par_iter_mut())
                    .for_each(|(&y, o)| {
                        let x = sign * y;
                        let weight = x.exp_m1() * mmm_levy_density(p, c, x).unwrap_or(0.0);
                        *o = if weight == 0.0 {
                            0.0
                        } else {
                            match price_at(spot * x.exp()) {
                                Ok(v) => weight * (v - base),
                                Err(e) => {
                                    failure.lock().unwrap().get_or_insert(e);
                                    f64::NAN
                                }
                            }
                        };
                    });
            },
            Tolerance::relative(hs.quad_rel_tol),
            HalfLine {
                tail_rel: hs.tail_rel,
                ..HalfLine::default()
            },
        )
    };
    let right = side(1.0);
    let left = side(-1.0);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    if !(right.converged && left.converged) {
        return Err(Error::Convergence(format!(
            "hedge integral did not reach relative tolerance {}",
            hs.quad_rel_tol
        )));
    }
    let denom = spot * (mmm_cumulant(p, c, 2.0)? - 2.0 * mmm_cumulant(p, c, 1.0)?);
    Ok((right.value + left.value) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{mmm_constant, MeasureParams};
    use crate::pricer::OptionKind;
    use approx::assert_relative_eq;

    fn dax() -> BilateralGamma {
        BilateralGamma::new(1.55, 133.96, 0.94, 88.92).unwrap()
    }

    fn market() -> Market {
        Market::new(0.0012, 0.0, 5000.0).unwrap()
    }

    fn c() -> f64 {
        mmm_constant(&dax(), &market()).unwrap()
    }

    #[test]
    fn density_identities() {
        let p = dax();
        let shifted = BilateralGamma::new(1.55, 132.96, 0.94, 89.92).unwrap();
        for i in 0..20 {
            let x = -0.3 + 0.031 * i as f64 + 1e-3;
            assert_eq!(mmm_levy_density(&p, 0.0, x).unwrap(), p.levy_density(x).unwrap());
            let mix = (c() + 1.0) * p.levy_density(x).unwrap() - c() * shifted.levy_density(x).unwrap();
            assert_relative_eq!(mmm_levy_density(&p, c(), x).unwrap(), mix, max_relative = 1e-13);
        }
        let x = 0.05;
        assert_relative_eq!(
            mmm_levy_density(&p, -1.0, x).unwrap(),
            1.55 / x * (-(133.96 - 1.0) * x).exp(),
            max_relative = 1e-13
        );
        assert!(mmm_levy_density(&p, 0.5, x).is_err());
        assert!(mmm_levy_density(&p, -0.5, 0.0).is_err());
    }

    #[test]
    fn cumulant_identities() {
        let p = dax();
        assert_eq!(mmm_cumulant(&p, c(), 0.0).unwrap(), 0.0);
        assert_relative_eq!(mmm_cumulant(&p, 0.0, 1.7).unwrap(), p.cumulant(1.7).unwrap(), max_relative = 1e-15);
        assert!((mmm_cumulant(&p, c(), 1.0).unwrap() - 0.0012).abs() < 1e-12);
        let sol = crate::measures::solve_mmm(&p, &market()).unwrap();
        assert!(matches!(sol.params, MeasureParams::MinimalMartingale { .. }));
        for z in [-20.0, 0.5, 2.0, 60.0] {
            assert_relative_eq!(sol.law.cumulant(z).unwrap(), mmm_cumulant(&p, c(), z).unwrap(), max_relative = 1e-12);
        }
        assert!(mmm_cumulant(&p, c(), 132.96).is_err());
    }

    #[test]
    fn denominator_matches_jump_integral() {
        let p = dax();
        let cc = c();
        let quad = p.levy_integral(|x| x.exp_m1().powi(2) * (cc + 1.0 - cc * x.exp()), 1e-10).unwrap();
        let closed = mmm_cumulant(&p, cc, 2.0).unwrap() - 2.0 * mmm_cumulant(&p, cc, 1.0).unwrap();
        assert_relative_eq!(quad, closed, max_relative = 1e-6);
    }

    #[test]
    fn limits_in_strike() {
        let hs = HedgeSettings::default();
        let m = Market::new(0.0016, 0.0004, 5000.0).unwrap();
        let cc = mmm_constant(&dax(), &m).unwrap();
        let (t, big_t) = (10.0, 126.0);
        let low = hedge_delta(&dax(), cc, &m, &OptionSpec::call(5000.0 * 1e-9, big_t).unwrap(), t, 5000.0, &hs).unwrap();
        assert!((low - (-0.0004f64 * (big_t - t)).exp()).abs() < 1e-4, "Δ = {low}");
        let high = hedge_delta(&dax(), cc, &m, &OptionSpec::call(5000.0 * 1e6, big_t).unwrap(), t, 5000.0, &hs).unwrap();
        assert!(high.abs() < 1e-6, "Δ = {high}");
    }

    #[test]
    fn delta_increases_with_spot_and_stays_bounded() {
        let hs = HedgeSettings::default();
        let opt = OptionSpec::call(5000.0, 0.5).unwrap();
        let mut last = -1.0;
        for i in 0..10 {
            let s = 4950.0 + 10.0 * i as f64;
            let d = hedge_delta(&dax(), c(), &market(), &opt, 0.0, s, &hs).unwrap();
            assert!(d >= last && (0.0..=1.0 + 1e-6).contains(&d), "S = {s}: Δ = {d}");
            last = d;
        }
    }

    #[test]
    fn put_delta_is_call_delta_minus_forward_sensitivity() {
        // Parity: π_call − π_put = S e^{−qτ} − K e^{−rτ}, so Δ_call − Δ_put = e^{−qτ}.
        let hs = HedgeSettings::default();
        let call = hedge_delta(&dax(), c(), &market(), &OptionSpec::call(5000.0, 21.0).unwrap(), 0.0, 5000.0, &hs).unwrap();
        let put = hedge_delta(&dax(), c(), &market(), &OptionSpec::new(5000.0, 21.0, OptionKind::Put).unwrap(), 0.0, 5000.0, &hs).unwrap();
        assert!((call - put - 1.0).abs() < 1e-6, "{call} − {put}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let hs = HedgeSettings::default();
        let opt = OptionSpec::call(5000.0, 1.0).unwrap();
        let light = BilateralGamma::new(1.0, 2.5, 1.0, 3.0).unwrap();
        assert!(hedge_delta(&light, -0.5, &market(), &opt, 0.0, 5000.0, &hs).is_err());
        assert!(hedge_delta(&dax(), 0.3, &market(), &opt, 0.0, 5000.0, &hs).is_err());
        assert!(hedge_delta(&dax(), c(), &market(), &opt, 1.0, 5000.0, &hs).is_err());
    }
}
