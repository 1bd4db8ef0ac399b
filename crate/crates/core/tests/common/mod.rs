use bilgamma::measures::mmm_law;
use bilgamma::pricer::{lewis_price, ContourSettings, OptionSpec};
use bilgamma::{BilateralGamma, Market};
use rayon::prelude::*;

/// Trapezoid rule for the hedge ratio on a uniform grid over [−0.4, 0.4];
/// the jump density is below e⁻³³ beyond that range. Uses the Lévy density
/// and cumulant written out from the model parameters.
pub fn trapezoid_delta(p: &BilateralGamma, c: f64, m: &Market, opt: &OptionSpec, spot: f64, h: f64) -> f64 {
    let law = mmm_law(p, c).unwrap();
    let cs = ContourSettings::default();
    let price = |s: f64| lewis_price(&law, &m.with_spot(s).unwrap(), opt, &cs).unwrap();
    let base = price(spot);
    let (ap, lp, am, lm) = (p.alpha_plus(), p.lambda_plus(), p.alpha_minus(), p.lambda_minus());
    let density = |x: f64| {
        let f = if x > 0.0 {
            ap / x * (-lp * x).exp()
        } else {
            am / -x * (lm * x).exp()
        };
        (c + 1.0 - c * x.exp()) * f
    };
    let n = (0.4 / h).round() as i64;
    let sum: f64 = (-n..=n)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let x = i as f64 * h;
            let w = if i.abs() == n { 0.5 } else { 1.0 };
            w * x.exp_m1() * (price(spot * x.exp()) - base) * density(x)
        })
        .sum();
    let psi = |z: f64| -ap * (1.0 - z / lp).ln() - am * (1.0 + z / lm).ln();
    let psi_shift = |z: f64| -ap * (1.0 - z / (lp - 1.0)).ln() - am * (1.0 + z / (lm + 1.0)).ln();
    let hat = |z: f64| (c + 1.0) * psi(z) - c * psi_shift(z);
    h * sum / (spot * (hat(2.0) - 2.0 * hat(1.0)))
}

