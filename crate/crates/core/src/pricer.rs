//! European option prices by contour integration of the characteristic
//! function, Black-Scholes implied volatilities and volatility surfaces.
//!
//! For a law with right rate `λ⁺ > 1` the call price is
//!
//! ```text
//! C = −(e^{−rT} K / π) · Re ∫₀^∞ (K/S₀)^{iz} φ_T(−z) z'(u) / (z² − iz) du
//! ```
//!
//! along a contour `z(u)` crossing the imaginary axis at `iν` with
//! `ν ∈ (1, λ⁺)`. The same integral with `ν ∈ (−λ⁻, 0)` gives the put.
//! Away from the money the contour follows a hyperbola, flat near `iν` and
//! asymptotically at 45° towards the half-plane where `(K/S₀)^{iz}` decays,
//! so the integrand decays exponentially without losing the Gaussian decay
//! around the saddle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use statrs::function::erf::erfc;

use crate::error::{domain, require_positive, Error, Result};
use crate::law::RiskNeutralLaw;
use crate::numerics::minimize::{golden_section, Bracket};
use crate::numerics::quad::{gauss_kronrod, Tolerance};
use crate::numerics::roots::brent;
use crate::process::Market;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Call,
    Put,
}

/// A European option.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionSpec {
    pub strike: f64,
    pub maturity: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn new(strike: f64, maturity: f64, kind: OptionKind) -> Result<Self> {
        require_positive("strike", strike)?;
        require_positive("maturity", maturity)?;
        Ok(Self { strike, maturity, kind })
    }

    pub fn call(strike: f64, maturity: f64) -> Result<Self> {
        Self::new(strike, maturity, OptionKind::Call)
    }

    pub fn put(strike: f64, maturity: f64) -> Result<Self> {
        Self::new(strike, maturity, OptionKind::Put)
    }
}

/// Integration contour and truncation controls.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSettings {
    /// Height where the contour crosses the imaginary axis. Must lie in
    /// `(1, λ⁺)` (call strip) or `(−λ⁻, 0)` (put strip). By default the
    /// height minimizing the integrand's envelope is used.
    pub nu: Option<f64>,
    /// Absolute tolerance on the integral scaled by its envelope at `u = 0`.
    pub abs_tol: f64,
    /// Largest `u` covered by finite panels; the rest is mapped to `(0, 1]`.
    pub max_truncation: f64,
    /// Ratio of consecutive panel end points.
    pub panel_growth: f64,
}

impl Default for ContourSettings {
    fn default() -> Self {
        Self {
            nu: None,
            abs_tol: 1e-10,
            max_truncation: 1e4,
            panel_growth: 2.0,
        }
    }
}

impl ContourSettings {
    pub fn with_nu(nu: f64) -> Self {
        Self {
            nu: Some(nu),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("abs_tol", self.abs_tol)?;
        require_positive("max_truncation", self.max_truncation)?;
        if !(self.panel_growth > 1.0 && self.panel_growth.is_finite()) {
            return Err(domain(format!("panel_growth must exceed 1, got {}", self.panel_growth)));
        }
        Ok(())
    }
}

/// A price with the diagnostics of its integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceReport {
    pub price: f64,
    /// Contour height used.
    pub nu: f64,
    /// End of the last finite panel.
    pub truncation: f64,
    /// Integrand evaluations.
    pub evaluations: usize,
}

/// Admissible strips `(1, λ⁺)` and `(−λ⁻, 0)` of the maturity-`T` law.
struct Strips {
    right: f64,
    left: f64,
}

impl Strips {
    fn of(law: &RiskNeutralLaw) -> Result<Self> {
        let right = law.right_rate()?;
        let left = law.left_rate()?;
        if right <= 1.0 {
            return Err(domain(format!(
                "pricing needs E[exp(X_T)] < ∞, but the right rate is {right} ≤ 1"
            )));
        }
        Ok(Self { right, left })
    }

    fn contains(&self, nu: f64) -> bool {
        (nu > 1.0 && nu < self.right) || (nu > -self.left && nu < 0.0)
    }
}

/// `ln` of the integrand's modulus bound at `u = 0` on the contour of height `ν`.
fn envelope(law_t: &RiskNeutralLaw, k: f64, nu: f64) -> f64 {
    let psi = law_t.cumulant(nu).unwrap_or(f64::INFINITY);
    -nu * k + psi - (nu * (nu - 1.0)).abs().ln()
}

/// Minimizers of the convex envelope over the inner 98% of each strip,
/// `(call strip, put strip)`.
fn strip_optima(law_t: &RiskNeutralLaw, strips: &Strips, k: f64) -> (f64, f64) {
    let h = |nu: f64| envelope(law_t, k, nu);
    let best_on = |lo: f64, hi: f64| {
        let w = hi - lo;
        let (a, c) = (lo + 0.01 * w, hi - 0.01 * w);
        let b = 0.5 * (a + c);
        let (x, _) = golden_section(h, Bracket { a, b, c, fb: h(b) }, 1e-10, 200);
        let candidates = [a, x, c];
        candidates
            .into_iter()
            .min_by(|p, q| h(*p).total_cmp(&h(*q)))
            .unwrap_or(x)
    };
    (best_on(1.0, strips.right), best_on(-strips.left, 0.0))
}

/// Contour heights that minimize the integrand bound in the call strip
/// `(1, λ⁺)` and the put strip `(−λ⁻, 0)`. Heights far from these lose
/// accuracy to cancellation.
pub fn optimal_heights(law: &RiskNeutralLaw, m: &Market, opt: &OptionSpec) -> Result<(f64, f64)> {
    let law_t = law.scale_time(opt.maturity)?;
    let strips = Strips::of(&law_t)?;
    Ok(strip_optima(&law_t, &strips, (opt.strike / m.s0()).ln()))
}

/// Discounted forward `e^{−rT} S₀ E[e^{X_T}]` under the law itself.
fn discounted_forward(law_t: &RiskNeutralLaw, m: &Market, t: f64) -> Result<f64> {
    // `law_t` is already scaled to maturity `t`; `t` only enters the discount.
    Ok((-m.r() * t + law_t.cumulant(1.0)?).exp() * m.s0())
}

/// Price with contour diagnostics. Puts and calls are both read off the
/// strip-native integral and converted by parity against the law's own
/// forward.
pub fn lewis_price_report(
    law: &RiskNeutralLaw,
    m: &Market,
    opt: &OptionSpec,
    cs: &ContourSettings,
) -> Result<PriceReport> {
    cs.validate()?;
    let t = opt.maturity;
    let law_t = law.scale_time(t)?;
    let strips = Strips::of(&law_t)?;
    let k = (opt.strike / m.s0()).ln();
    let nu = match cs.nu {
        Some(nu) if strips.contains(nu) => nu,
        Some(nu) => {
            return Err(domain(format!(
                "contour height {nu} outside (1, {}) and ({}, 0)",
                strips.right, -strips.left
            )))
        }
        None => {
            let (call, put) = strip_optima(&law_t, &strips, k);
            if envelope(&law_t, k, call) <= envelope(&law_t, k, put) {
                call
            } else {
                put
            }
        }
    };
    let comps = law_t.components()?;
    let log_scale = envelope(&law_t, k, nu);
    if !log_scale.is_finite() {
        return Err(domain(format!("integrand envelope is not finite at ν = {nu}")));
    }
    let bend = if k > 0.0 {
        1.0
    } else if k < 0.0 {
        -1.0
    } else {
        0.0
    };
    // Width of the flat part: the scale on which |φ_T| decays near the saddle.
    let sd = law_t.variance()?.sqrt();
    let width = 1.0 / sd;
    // Rising with slope β brings the contour toward the branch point at the
    // strip edge, which can inflate |φ_T| over its value at u = 0 by up to
    // (1 + β²)^{A/2}, A the total shape on that side. Cap the inflation at 10.
    let shape: f64 = comps
        .iter()
        .map(|c| if bend > 0.0 { c.alpha_plus() } else { c.alpha_minus() })
        .sum();
    let slope = (2.0 * std::f64::consts::LN_10 / shape).exp_m1().sqrt().min(1.0);
    let i = Complex64::i();
    let integrand = |u: f64| -> f64 {
        let root = u.hypot(width);
        let z = Complex64::new(u, nu + bend * slope * (root - width));
        let dz = Complex64::new(1.0, bend * slope * u / root);
        let w = -i * z;
        let mut log_num = i * z * k - log_scale;
        for c in comps {
            log_num += c.cumulant_continued(w);
        }
        (log_num.exp() * dz / (z * z - i * z)).re
    };

    let tol = Tolerance::new(cs.abs_tol, 1e-12);
    let mut evaluations = 0;
    let mut run = |a: f64, b: f64| -> Result<f64> {
        let est = gauss_kronrod(integrand, a, b, tol);
        evaluations += est.evaluations;
        if !est.converged {
            return Err(Error::Convergence(format!(
                "contour integral on [{a}, {b}] missed tolerance {} (error {:e})",
                cs.abs_tol, est.error
            )));
        }
        Ok(est.value)
    };

    let mut end = (4.0 * width).clamp(1.0, cs.max_truncation);
    let mut total = run(0.0, end)?;
    while end < cs.max_truncation {
        let next = (end * cs.panel_growth).min(cs.max_truncation);
        let piece = run(end, next)?;
        total += piece;
        end = next;
        if piece.abs() < cs.abs_tol {
            break;
        }
    }
    // Remaining tail through u = end/s, s ∈ (0, 1].
    let tail = {
        let est = gauss_kronrod(|s| if s == 0.0 { 0.0 } else { integrand(end / s) * end / (s * s) }, 0.0, 1.0, tol);
        evaluations += est.evaluations;
        if !est.converged {
            return Err(Error::Convergence(format!(
                "contour tail beyond u = {end} missed tolerance {}",
                cs.abs_tol
            )));
        }
        est.value
    };
    total += tail;

    let discount_k = (-m.r() * t).exp() * opt.strike;
    let native = -discount_k / std::f64::consts::PI * total * log_scale.exp();
    let parity = discounted_forward(&law_t, m, t)? - discount_k;
    let price = match (nu > 1.0, opt.kind) {
        (true, OptionKind::Call) | (false, OptionKind::Put) => native,
        (true, OptionKind::Put) => native - parity,
        (false, OptionKind::Call) => native + parity,
    };
    Ok(PriceReport {
        price,
        nu,
        truncation: end,
        evaluations,
    })
}

/// European option price under `law` (not the minimal entropy law).
pub fn lewis_price(law: &RiskNeutralLaw, m: &Market, opt: &OptionSpec, cs: &ContourSettings) -> Result<f64> {
    Ok(lewis_price_report(law, m, opt, cs)?.price)
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Black-Scholes price with continuous dividend yield `q`.
pub fn bs_price(kind: OptionKind, s0: f64, strike: f64, maturity: f64, r: f64, q: f64, sigma: f64) -> Result<f64> {
    require_positive("s0", s0)?;
    require_positive("strike", strike)?;
    require_positive("maturity", maturity)?;
    require_positive("sigma", sigma)?;
    if !(r.is_finite() && q.is_finite()) {
        return Err(domain("rates must be finite"));
    }
    let fwd = s0 * (-q * maturity).exp();
    let disc = strike * (-r * maturity).exp();
    let sd = sigma * maturity.sqrt();
    let d1 = (fwd / disc).ln() / sd + 0.5 * sd;
    let d2 = d1 - sd;
    Ok(match kind {
        OptionKind::Call => fwd * norm_cdf(d1) - disc * norm_cdf(d2),
        OptionKind::Put => disc * norm_cdf(-d2) - fwd * norm_cdf(-d1),
    })
}

/// Volatility range searched by [`implied_vol`].
pub const VOL_RANGE: (f64, f64) = (1e-6, 5.0);

/// Black-Scholes implied volatility of a call or put price.
///
/// The price is converted to the out-of-the-money option by parity and the
/// log-price is inverted on [`VOL_RANGE`].
pub fn implied_vol(kind: OptionKind, price: f64, s0: f64, strike: f64, maturity: f64, r: f64, q: f64) -> Result<f64> {
    require_positive("s0", s0)?;
    require_positive("strike", strike)?;
    require_positive("maturity", maturity)?;
    let fwd = s0 * (-q * maturity).exp();
    let disc = strike * (-r * maturity).exp();
    let (lower, upper) = match kind {
        OptionKind::Call => ((fwd - disc).max(0.0), fwd),
        OptionKind::Put => ((disc - fwd).max(0.0), disc),
    };
    if !(price > lower && price < upper) {
        return Err(Error::OutOfBounds { price, lower, upper });
    }
    let otm_kind = otm_kind(s0, strike, maturity, r, q);
    let otm_price = match (kind, otm_kind) {
        (OptionKind::Call, OptionKind::Put) => price - (fwd - disc),
        (OptionKind::Put, OptionKind::Call) => price + (fwd - disc),
        _ => price,
    };
    if !(otm_price > 0.0) {
        return Err(Error::OutOfBounds { price, lower, upper });
    }
    let target = otm_price.ln();
    // An underflowed model price sits far below any positive target.
    let f = |sigma: f64| match bs_price(otm_kind, s0, strike, maturity, r, q, sigma) {
        Ok(p) if p > 0.0 => p.ln() - target,
        _ => f64::NEG_INFINITY,
    };
    let (lo, hi) = VOL_RANGE;
    if f(lo) >= 0.0 {
        return Ok(lo);
    }
    if f(hi) < 0.0 {
        return Err(Error::Convergence(format!(
            "implied volatility exceeds {hi} for price {price}"
        )));
    }
    brent(f, lo, hi, 1e-15, 300)
}

/// The out-of-the-money side at `strike`: calls at or above the forward.
pub fn otm_kind(s0: f64, strike: f64, maturity: f64, r: f64, q: f64) -> OptionKind {
    if strike * (-r * maturity).exp() >= s0 * (-q * maturity).exp() {
        OptionKind::Call
    } else {
        OptionKind::Put
    }
}

/// Implied volatility surface on a strike × maturity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VolSurface {
    pub strikes: Vec<f64>,
    pub maturities: Vec<f64>,
    /// Call prices, `prices[i][j]` at `maturities[i]`, `strikes[j]`.
    pub prices: Vec<Vec<f64>>,
    pub implied_vols: Vec<Vec<f64>>,
}

fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(domain(format!("{name} grid is empty")));
    }
    for v in values {
        require_positive(name, *v)?;
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

/// Prices every grid point and inverts the out-of-the-money price to an
/// implied volatility. Points are independent and computed in parallel;
/// the result does not depend on scheduling.
pub fn vol_surface(
    law: &RiskNeutralLaw,
    m: &Market,
    strikes: &[f64],
    maturities: &[f64],
    cs: &ContourSettings,
) -> Result<VolSurface> {
    check_grid("strikes", strikes)?;
    check_grid("maturities", maturities)?;
    let n = strikes.len();
    let points: Vec<Result<(f64, f64)>> = (0..maturities.len() * n)
        .into_par_iter()
        .map(|idx| {
            let (t, k) = (maturities[idx / n], strikes[idx % n]);
            let point = || -> Result<(f64, f64)> {
                let kind = otm_kind(m.s0(), k, t, m.r(), m.q());
                let report = lewis_price_report(law, m, &OptionSpec::new(k, t, kind)?, cs)?;
                let otm = report.price;
                let parity = discounted_forward(&law.scale_time(t)?, m, t)? - k * (-m.r() * t).exp();
                let call = if kind == OptionKind::Call { otm } else { otm + parity };
                let iv = implied_vol(kind, otm, m.s0(), k, t, m.r(), m.q())?;
                Ok((call, iv))
            };
            point().map_err(|e| Error::GridPoint {
                maturity: t,
                strike: k,
                source: Box::new(e),
            })
        })
        .collect();
    let mut prices = vec![Vec::with_capacity(n); maturities.len()];
    let mut vols = vec![Vec::with_capacity(n); maturities.len()];
    for (idx, point) in points.into_iter().enumerate() {
        let (p, v) = point?;
        prices[idx / n].push(p);
        vols[idx / n].push(v);
    }
    Ok(VolSurface {
        strikes: strikes.to_vec(),
        maturities: maturities.to_vec(),
        prices,
        implied_vols: vols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::ConvolvedLaw;
    use crate::process::BilateralGamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn law() -> RiskNeutralLaw {
        BilateralGamma::new(1.55, 139.303, 0.94, 83.678).unwrap().into()
    }

    fn flat() -> Market {
        Market::new(0.0, 0.0, 5000.0).unwrap()
    }

    /// erf by its Maclaurin series, independent of the library routine.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-20 {
                break;
            }
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn bs_matches_series_oracle() {
        let n = |x: f64| 0.5 * (1.0 + erf_series(x / std::f64::consts::SQRT_2));
        let expect = 100.0 * (n(0.1) - n(-0.1));
        let got = bs_price(OptionKind::Call, 100.0, 100.0, 1.0, 0.0, 0.0, 0.2).unwrap();
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    }

    #[test]
    fn bs_limits_and_monotonicity() {
        let zero_vol = bs_price(OptionKind::Call, 100.0, 90.0, 1.0, 0.03, 0.01, 1e-9).unwrap();
        let intrinsic = 100.0 * (-0.01f64).exp() - 90.0 * (-0.03f64).exp();
        assert!((zero_vol - intrinsic).abs() < 1e-9);
        let mut last = 0.0;
        for i in 1..50 {
            let p = bs_price(OptionKind::Put, 100.0, 105.0, 0.5, 0.02, 0.0, 0.05 * i as f64).unwrap();
            assert!(p > last);
            last = p;
        }
        assert!(bs_price(OptionKind::Call, 100.0, 100.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn implied_vol_round_trips() {
        for (kind, k) in [(OptionKind::Call, 100.0), (OptionKind::Call, 80.0), (OptionKind::Put, 120.0), (OptionKind::Put, 70.0)] {
            for sigma in [0.2, 1.5] {
                let p = bs_price(kind, 100.0, k, 1.0, 0.02, 0.01, sigma).unwrap();
                let iv = implied_vol(kind, p, 100.0, k, 1.0, 0.02, 0.01).unwrap();
                assert!((iv - sigma).abs() < 1e-8, "{kind:?} K={k} σ={sigma}: {iv}");
            }
        }
    }

    #[test]
    fn implied_vol_near_lower_bound_is_small() {
        let intrinsic = 100.0 - 95.0;
        let iv = implied_vol(OptionKind::Call, intrinsic + 1e-12, 100.0, 95.0, 1.0, 0.0, 0.0).unwrap();
        assert!(iv < 0.02, "{iv}");
        let err = implied_vol(OptionKind::Call, 4.0, 100.0, 95.0, 1.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::OutOfBounds { .. }));
        assert!(implied_vol(OptionKind::Call, 100.0, 100.0, 95.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tiny_strike_gives_the_forward() {
        let m = Market::new(0.002, 0.001, 5000.0).unwrap();
        let sol = crate::measures::solve_esscher(
            &BilateralGamma::new(1.55, 133.96, 0.94, 88.92).unwrap(),
            &m,
            &Default::default(),
        )
        .unwrap();
        let t = 20.0;
        let p = lewis_price(&sol.law, &m, &OptionSpec::call(5000.0 * 1e-9, t).unwrap(), &Default::default()).unwrap();
        assert_relative_eq!(p, 5000.0 * (-0.001 * t).exp(), max_relative = 1e-6);
    }

    #[test]
    fn contour_height_does_not_matter() {
        for k in [4500.0, 5000.0, 5200.0] {
            let opt = OptionSpec::call(k, 0.5).unwrap();
            let base = lewis_price(&law(), &flat(), &opt, &Default::default()).unwrap();
            for nu in [1.5, 5.0, 20.0, 50.0, 130.0] {
                let p = lewis_price(&law(), &flat(), &opt, &ContourSettings::with_nu(nu)).unwrap();
                assert!((p - base).abs() <= 1e-8 * base, "K={k} ν={nu}: {p} vs {base}");
            }
        }
    }

    #[test]
    fn put_call_parity_across_strips() {
        let m = Market::new(0.0004, 0.0001, 5000.0).unwrap();
        let sol = crate::measures::solve_bilateral_esscher(
            &BilateralGamma::new(1.55, 133.96, 0.94, 88.92).unwrap(),
            &m,
            &Default::default(),
        )
        .unwrap();
        for k in [4000.0, 4500.0, 5000.0, 5500.0, 6000.0] {
            for t in [5.0, 21.0, 63.0, 126.0, 252.0] {
                let c = lewis_price(&sol.law, &m, &OptionSpec::call(k, t).unwrap(), &ContourSettings::with_nu(10.0)).unwrap();
                let p = lewis_price(&sol.law, &m, &OptionSpec::put(k, t).unwrap(), &ContourSettings::with_nu(-10.0)).unwrap();
                let rhs = 5000.0 * (-0.0001 * t).exp() - k * (-0.0004 * t).exp();
                assert!((c - p - rhs).abs() <= 1e-8 * c.max(p), "K={k} T={t}: {} vs {rhs}", c - p);
            }
        }
    }

    #[test]
    fn large_shapes_near_the_strip_edge() {
        // Shape·T in the hundreds with a narrow call strip: the optimal
        // heights hug the poles and a steep contour would pass close to the
        // branch point at λ⁺.
        let heavy: RiskNeutralLaw = BilateralGamma::new(1.55, 1.78, 0.94, 0.345).unwrap().into();
        let m = flat();
        for t in [126.0, 252.0] {
            for k in [4000.0, 5500.0, 6000.0] {
                let (c, p) = optimal_heights(&heavy, &m, &OptionSpec::call(k, t).unwrap()).unwrap();
                let call = lewis_price(&heavy, &m, &OptionSpec::call(k, t).unwrap(), &ContourSettings::with_nu(c)).unwrap();
                let put = lewis_price(&heavy, &m, &OptionSpec::put(k, t).unwrap(), &ContourSettings::with_nu(p)).unwrap();
                let fwd = 5000.0 * (t * heavy.cumulant(1.0).unwrap()).exp();
                assert!((call - put - (fwd - k)).abs() < 1e-8 * put, "T = {t}, K = {k}: {call} {put}");
            }
        }
    }

    #[test]
    fn reference_prices() {
        let atm = lewis_price(&law(), &flat(), &OptionSpec::call(5000.0, 0.5).unwrap(), &Default::default()).unwrap();
        let otm = lewis_price(&law(), &flat(), &OptionSpec::call(5200.0, 0.5).unwrap(), &Default::default()).unwrap();
        // Values from an independent double-exponential quadrature of the same integral.
        assert_relative_eq!(atm, 16.868787381669, max_relative = 1e-9);
        assert_relative_eq!(otm, 0.0533533109956, max_relative = 1e-8);
    }

    #[test]
    fn split_law_prices_like_the_whole() {
        let p = BilateralGamma::new(1.55, 139.303, 0.94, 83.678).unwrap();
        let half = BilateralGamma::new(0.775, 139.303, 0.47, 83.678).unwrap();
        let split = RiskNeutralLaw::Convolved(ConvolvedLaw::new(vec![half, half]).unwrap());
        let tiny = BilateralGamma::new(1e-300, 50.0, 1e-300, 50.0).unwrap();
        let padded = RiskNeutralLaw::Convolved(ConvolvedLaw::new(vec![p, tiny]).unwrap());
        for k in [4500.0, 5000.0, 5600.0] {
            let opt = OptionSpec::call(k, 10.0).unwrap();
            let cs = ContourSettings::with_nu(20.0);
            let a = lewis_price(&p.into(), &flat(), &opt, &cs).unwrap();
            let b = lewis_price(&split, &flat(), &opt, &cs).unwrap();
            let c = lewis_price(&padded, &flat(), &opt, &cs).unwrap();
            assert!((a - b).abs() <= 1e-10 * a && (a - c).abs() <= 1e-10 * a, "{a} {b} {c}");
        }
    }

    #[test]
    fn prices_fall_in_strike_and_rise_in_maturity() {
        let ks = [4000.0, 4500.0, 5000.0, 5500.0, 6000.0];
        let ts = [63.0, 126.0, 252.0, 504.0];
        let s = vol_surface(&law(), &flat(), &ks, &ts, &Default::default()).unwrap();
        for row in &s.prices {
            assert!(row.windows(2).all(|w| w[1] < w[0]));
        }
        for j in 0..ks.len() {
            assert!((1..ts.len()).all(|i| s.prices[i][j] > s.prices[i - 1][j]));
        }
    }

    #[test]
    fn bad_contour_and_grid_inputs() {
        let opt = OptionSpec::call(5000.0, 1.0).unwrap();
        assert!(lewis_price(&law(), &flat(), &opt, &ContourSettings::with_nu(0.5)).is_err());
        assert!(lewis_price(&law(), &flat(), &opt, &ContourSettings::with_nu(140.0)).is_err());
        let tilted = RiskNeutralLaw::TiltedLevy {
            base: BilateralGamma::new(1.55, 133.96, 0.94, 88.92).unwrap(),
            theta: -5.3,
        };
        assert!(matches!(lewis_price(&tilted, &flat(), &opt, &Default::default()), Err(Error::Unsupported(_))));
        assert!(vol_surface(&law(), &flat(), &[5000.0, 4000.0], &[1.0], &Default::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn prices_respect_no_arbitrage_bounds(k in 3000.0f64..8000.0, t in 1.0f64..500.0) {
            let m = flat();
            let c = lewis_price(&law(), &m, &OptionSpec::call(k, t).unwrap(), &Default::default()).unwrap();
            prop_assert!(c >= (5000.0 - k).max(0.0) - 1e-9 && c <= 5000.0);
        }
    }
}
