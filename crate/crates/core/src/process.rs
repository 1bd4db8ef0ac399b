//! Bilateral Gamma distributions and the processes they generate.
//!
//! A bilateral Gamma law `Γ(α⁺, λ⁺; α⁻, λ⁻)` is the law of `Y − Z` with
//! independent `Y ~ Gamma(α⁺, λ⁺)` and `Z ~ Gamma(α⁻, λ⁻)` (shape, rate).
//! It is infinitely divisible; the Lévy process `X` with `X₁` of this law has
//! increments `X_t − X_s ~ Γ(α⁺(t−s), λ⁺; α⁻(t−s), λ⁻)`.
//!
//! Shapes are per unit of model time. Rates are per unit of log-return.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, require_positive, Error, Result};
use crate::numerics::quad::{self, HalfLine, Tolerance};

/// Parameters `(α⁺, λ⁺; α⁻, λ⁻)` of a bilateral Gamma law, all strictly
/// positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct BilateralGamma {
    alpha_plus: f64,
    lambda_plus: f64,
    alpha_minus: f64,
    lambda_minus: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha_plus: f64,
    lambda_plus: f64,
    alpha_minus: f64,
    lambda_minus: f64,
}

impl TryFrom<RawParams> for BilateralGamma {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Self::new(r.alpha_plus, r.lambda_plus, r.alpha_minus, r.lambda_minus)
    }
}

impl From<BilateralGamma> for RawParams {
    fn from(p: BilateralGamma) -> Self {
        RawParams {
            alpha_plus: p.alpha_plus,
            lambda_plus: p.lambda_plus,
            alpha_minus: p.alpha_minus,
            lambda_minus: p.lambda_minus,
        }
    }
}

impl BilateralGamma {
    pub fn new(alpha_plus: f64, lambda_plus: f64, alpha_minus: f64, lambda_minus: f64) -> Result<Self> {
        require_positive("alpha_plus", alpha_plus)?;
        require_positive("lambda_plus", lambda_plus)?;
        require_positive("alpha_minus", alpha_minus)?;
        require_positive("lambda_minus", lambda_minus)?;
        Ok(Self {
            alpha_plus,
            lambda_plus,
            alpha_minus,
            lambda_minus,
        })
    }

    pub fn alpha_plus(&self) -> f64 {
        self.alpha_plus
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn alpha_minus(&self) -> f64 {
        self.alpha_minus
    }

    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }

    /// Cumulant generating function `Ψ(z) = ln E[e^{zX₁}]` on `(−λ⁻, λ⁺)`.
    pub fn cumulant(&self, z: f64) -> Result<f64> {
        if !(z > -self.lambda_minus && z < self.lambda_plus) {
            return Err(domain(format!(
                "cumulant argument {z} outside ({}, {})",
                -self.lambda_minus, self.lambda_plus
            )));
        }
        Ok(-self.alpha_plus * (-z / self.lambda_plus).ln_1p()
            - self.alpha_minus * (z / self.lambda_minus).ln_1p())
    }

    /// `Ψ` continued to complex `w` with `Re w ∈ (−λ⁻, λ⁺)`, principal logs.
    pub fn cumulant_complex(&self, w: Complex64) -> Result<Complex64> {
        if !(w.re > -self.lambda_minus && w.re < self.lambda_plus) {
            return Err(domain(format!(
                "complex cumulant argument {w} outside the strip Re ∈ ({}, {})",
                -self.lambda_minus, self.lambda_plus
            )));
        }
        let one = Complex64::new(1.0, 0.0);
        Ok(-(one - w / self.lambda_plus).ln() * self.alpha_plus
            - (one + w / self.lambda_minus).ln() * self.alpha_minus)
    }

    /// `Ψ(w)` by principal logs without the strip check. Continuous along any
    /// path that leaves the real axis only through the strip and keeps
    /// `Im w` of one sign.
    pub(crate) fn cumulant_continued(&self, w: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        -(one - w / self.lambda_plus).ln() * self.alpha_plus
            - (one + w / self.lambda_minus).ln() * self.alpha_minus
    }

    /// Characteristic function `E[e^{izX₁}]` for `Im z ∈ (−λ⁺, λ⁻)`.
    pub fn char_fn(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > -self.lambda_plus && z.im < self.lambda_minus) {
            return Err(domain(format!(
                "characteristic function argument {z} outside the strip Im ∈ ({}, {})",
                -self.lambda_plus, self.lambda_minus
            )));
        }
        Ok(self.cumulant_complex(Complex64::i() * z)?.exp())
    }

    /// Density of the Lévy measure `F(dx)/dx`.
    pub fn levy_density(&self, x: f64) -> Result<f64> {
        if x == 0.0 || !x.is_finite() {
            return Err(domain(format!("Lévy density undefined at x = {x}")));
        }
        Ok(if x > 0.0 {
            self.alpha_plus / x * (-self.lambda_plus * x).exp()
        } else {
            self.alpha_minus / -x * (self.lambda_minus * x).exp()
        })
    }

    /// `∫ g(x) F(dx)` by adaptive quadrature, split at 0 and ±1 with
    /// doubling panels in both tails.
    ///
    /// `g` must vanish at the origin fast enough for the integral to exist;
    /// the origin itself is never evaluated.
    pub fn levy_integral<G>(&self, mut g: G, rel_tol: f64) -> Result<f64>
    where
        G: FnMut(f64) -> f64,
    {
        let tol = Tolerance::relative(rel_tol);
        let policy = HalfLine::default();
        let (ap, lp, am, lm) = self.tuple();
        let right = quad::half_line(|y| g(y) * ap * (-lp * y).exp() / y, tol, policy);
        let left = quad::half_line(|y| g(-y) * am * (-lm * y).exp() / y, tol, policy);
        if !(right.converged && left.converged) {
            return Err(Error::Convergence(format!(
                "Lévy-measure integral did not reach relative tolerance {rel_tol}"
            )));
        }
        Ok(right.value + left.value)
    }

    /// Law of the increment over a period of length `t`.
    pub fn scale_time(&self, t: f64) -> Result<Self> {
        require_positive("time", t)?;
        Self::new(
            self.alpha_plus * t,
            self.lambda_plus,
            self.alpha_minus * t,
            self.lambda_minus,
        )
    }

    /// Bilateral Esscher tilt: rates become `(λ⁺ − θ⁺, λ⁻ − θ⁻)`.
    pub fn tilt(&self, theta_plus: f64, theta_minus: f64) -> Result<Self> {
        if !(theta_plus < self.lambda_plus && theta_minus < self.lambda_minus) {
            return Err(domain(format!(
                "tilt ({theta_plus}, {theta_minus}) must satisfy θ⁺ < λ⁺ = {}, θ⁻ < λ⁻ = {}",
                self.lambda_plus, self.lambda_minus
            )));
        }
        Self::new(
            self.alpha_plus,
            self.lambda_plus - theta_plus,
            self.alpha_minus,
            self.lambda_minus - theta_minus,
        )
    }

    /// Log-form martingale residual `Ψ(1) − (r − q)`.
    ///
    /// Zero exactly when the discounted, dividend-adjusted price is a
    /// martingale under this law. Fails with
    /// [`Error::NoMartingaleMeasure`] when `λ⁺ ≤ 1`, since then
    /// `E[e^{X₁}] = ∞`.
    pub fn martingale_residual(&self, market: &Market) -> Result<f64> {
        if self.lambda_plus <= 1.0 {
            return Err(Error::NoMartingaleMeasure(format!(
                "λ⁺ = {} ≤ 1 gives E[exp(X₁)] = ∞",
                self.lambda_plus
            )));
        }
        Ok(self.cumulant(1.0)? - market.carry())
    }

    pub fn mean(&self) -> f64 {
        self.alpha_plus / self.lambda_plus - self.alpha_minus / self.lambda_minus
    }

    pub fn variance(&self) -> f64 {
        self.alpha_plus / (self.lambda_plus * self.lambda_plus)
            + self.alpha_minus / (self.lambda_minus * self.lambda_minus)
    }

    pub(crate) fn tuple(&self) -> (f64, f64, f64, f64) {
        (self.alpha_plus, self.lambda_plus, self.alpha_minus, self.lambda_minus)
    }
}

impl std::fmt::Display for BilateralGamma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Γ({}, {}; {}, {})",
            self.alpha_plus, self.lambda_plus, self.alpha_minus, self.lambda_minus
        )
    }
}

/// One-sided cumulant `α ln(λ/(λ − z))` of a `Gamma(α, λ)` variable, `z < λ`.
pub fn cumulant_onesided(alpha: f64, lambda: f64, z: f64) -> Result<f64> {
    require_positive("alpha", alpha)?;
    require_positive("lambda", lambda)?;
    if !(z < lambda) {
        return Err(domain(format!("one-sided cumulant needs z < λ = {lambda}, got {z}")));
    }
    Ok(-alpha * (-z / lambda).ln_1p())
}

/// Interest rate, dividend yield and spot.
///
/// Rates are continuously compounded per unit of model time and must satisfy
/// `r ≥ q ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Market {
    r: f64,
    q: f64,
    s0: f64,
}

impl Market {
    pub fn new(r: f64, q: f64, s0: f64) -> Result<Self> {
        if !(q.is_finite() && r.is_finite() && q >= 0.0 && r >= q) {
            return Err(domain(format!("rates must satisfy r ≥ q ≥ 0, got r = {r}, q = {q}")));
        }
        require_positive("s0", s0)?;
        Ok(Self { r, q, s0 })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// `r − q`.
    pub fn carry(&self) -> f64 {
        self.r - self.q
    }

    /// Same rates, different spot.
    pub fn with_spot(&self, s0: f64) -> Result<Self> {
        Self::new(self.r, self.q, s0)
    }
}
