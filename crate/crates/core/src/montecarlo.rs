//! Monte Carlo sampling of bilateral Gamma laws as differences of Gamma
//! variates.
//!
//! Samples are generated in fixed-size chunks. Chunk `i` draws from a
//! ChaCha8 stream seeded with `seed` on stream `i`, so the output is
//! identical for any number of worker threads.

use num_complex::Complex64;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{domain, require_positive, Error, Result};
use crate::law::RiskNeutralLaw;
use crate::measures::p_distance;
use crate::numerics::sum::CompensatedSum;
use crate::pricer::{OptionKind, OptionSpec};
use crate::process::{cumulant_onesided, BilateralGamma, Market};

/// Samples per chunk.
pub const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Pair each draw with its mirror image; requires an even sample count.
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_samples: 1_000_000,
            seed: 0x5eed,
            antithetic: false,
        }
    }
}

impl SimConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            antithetic: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(domain("n_samples must be at least 1"));
        }
        if self.antithetic && self.n_samples % 2 == 1 {
            return Err(domain("antithetic sampling needs an even n_samples"));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    /// Mean and `sd/√n` of `values`; antithetic pairs `(v[2i], v[2i+1])`
    /// are averaged first.
    pub fn from_values(values: &[f64], antithetic: bool) -> Self {
        if antithetic {
            let pairs: Vec<f64> = values.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
            return Self::from_values(&pairs, false);
        }
        let n = values.len();
        let mean = values.iter().copied().collect::<CompensatedSum>().value() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).collect::<CompensatedSum>().value() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// One Marsaglia–Tsang proposal for shape `a ≥ 1`, given a normal and a
/// uniform draw. Returns the unit-rate variate on acceptance.
fn mt_attempt(d: f64, c: f64, x: f64, u: f64) -> Option<f64> {
    let v = (1.0 + c * x).powi(3);
    if v <= 0.0 {
        return None;
    }
    let x2 = x * x;
    if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
        Some(d * v)
    } else {
        None
    }
}

/// Gamma(shape, rate) sampler: Marsaglia–Tsang squeeze for shape ≥ 1 and
/// the `U^{1/a}` boost for shape < 1.
#[derive(Debug, Clone, Copy)]
struct GammaSampler {
    d: f64,
    c: f64,
    boost: Option<f64>,
    scale: f64,
}

impl GammaSampler {
    fn new(shape: f64, rate: f64) -> Self {
        let (a, boost) = if shape < 1.0 { (shape + 1.0, Some(1.0 / shape)) } else { (shape, None) };
        let d = a - 1.0 / 3.0;
        Self {
            d,
            c: 1.0 / (9.0 * d).sqrt(),
            boost,
            scale: 1.0 / rate,
        }
    }

    fn fresh<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let x: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.sample(Open01);
            if let Some(g) = mt_attempt(self.d, self.c, x, u) {
                return g;
            }
        }
    }

    fn finish(&self, g: f64, boost_u: f64) -> f64 {
        match self.boost {
            Some(inv) => g * boost_u.powf(inv) * self.scale,
            None => g * self.scale,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let g = self.fresh(rng);
        let u = if self.boost.is_some() { rng.sample(Open01) } else { 1.0 };
        self.finish(g, u)
    }

    /// Antithetic pair: the first proposal uses `x` and `−x` with a shared
    /// uniform; the boost uses `u` and `1 − u`.
    fn sample_pair<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let x: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.sample(Open01);
        let a = mt_attempt(self.d, self.c, x, u);
        let b = mt_attempt(self.d, self.c, -x, u);
        let a = a.unwrap_or_else(|| self.fresh(rng));
        let b = b.unwrap_or_else(|| self.fresh(rng));
        if self.boost.is_some() {
            let w: f64 = rng.sample(Open01);
            (self.finish(a, w), self.finish(b, 1.0 - w))
        } else {
            (self.finish(a, 1.0), self.finish(b, 1.0))
        }
    }
}

/// Fills `n` values chunk by chunk; `fill` receives the chunk's generator
/// and output slice. With `workers = Some(w)` a dedicated pool of `w`
/// threads is used.
fn generate<F>(n: usize, seed: u64, workers: Option<usize>, fill: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let mut out = vec![0.0; n];
    let run = |out: &mut Vec<f64>| {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(i, chunk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            fill(&mut rng, chunk);
        })
    };
    match workers {
        None => run(&mut out),
        Some(w) => {
            if w == 0 {
                return Err(domain("worker count must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Convergence(format!("cannot build thread pool: {e}")))?;
            pool.install(|| run(&mut out));
        }
    }
    Ok(out)
}

fn component_samplers(law: &RiskNeutralLaw, t: f64) -> Result<Vec<(GammaSampler, GammaSampler)>> {
    require_positive("time", t)?;
    Ok(law
        .components()?
        .iter()
        .map(|p| {
            (
                GammaSampler::new(p.alpha_plus() * t, p.lambda_plus()),
                GammaSampler::new(p.alpha_minus() * t, p.lambda_minus()),
            )
        })
        .collect())
}

fn terminal_samples(law: &RiskNeutralLaw, t: f64, cfg: &SimConfig, workers: Option<usize>) -> Result<Vec<f64>> {
    cfg.validate()?;
    let samplers = component_samplers(law, t)?;
    let antithetic = cfg.antithetic;
    generate(cfg.n_samples, cfg.seed, workers, |rng, chunk| {
        if antithetic {
            for pair in chunk.chunks_mut(2) {
                let (mut a, mut b) = (0.0, 0.0);
                for (up, down) in &samplers {
                    let (ua, ub) = up.sample_pair(rng);
                    let (da, db) = down.sample_pair(rng);
                    a += ua - da;
                    b += ub - db;
                }
                pair[0] = a;
                if let Some(slot) = pair.get_mut(1) {
                    *slot = b;
                }
            }
        } else {
            for x in chunk.iter_mut() {
                *x = samplers.iter().map(|(up, down)| up.sample(rng) - down.sample(rng)).sum();
            }
        }
    })
}

/// `n_samples` independent draws of `X_t`.
pub fn sample_terminal(law: &RiskNeutralLaw, t: f64, cfg: &SimConfig) -> Result<Vec<f64>> {
    terminal_samples(law, t, cfg, None)
}

/// As [`sample_terminal`] on a dedicated pool of `workers` threads. The
/// output does not depend on `workers`.
pub fn sample_terminal_with_workers(law: &RiskNeutralLaw, t: f64, cfg: &SimConfig, workers: usize) -> Result<Vec<f64>> {
    terminal_samples(law, t, cfg, Some(workers))
}

/// Discounted payoff average with `S_T = S₀ e^{X_T}`.
pub fn mc_price(law: &RiskNeutralLaw, m: &Market, opt: &OptionSpec, cfg: &SimConfig) -> Result<Estimate> {
    let right = law.right_rate()?;
    if right <= 1.0 {
        return Err(domain(format!("pricing needs E[exp(X_T)] < ∞, right rate is {right}")));
    }
    let xs = sample_terminal(law, opt.maturity, cfg)?;
    let disc = (-m.r() * opt.maturity).exp();
    let payoffs: Vec<f64> = xs
        .iter()
        .map(|x| {
            let s = m.s0() * x.exp();
            disc * match opt.kind {
                OptionKind::Call => (s - opt.strike).max(0.0),
                OptionKind::Put => (opt.strike - s).max(0.0),
            }
        })
        .collect();
    Ok(Estimate::from_values(&payoffs, cfg.antithetic))
}

/// Estimate of `E[e^{zX₁}]`. Requires `2z ∈ (−λ⁻, λ⁺)` so the estimator
/// has finite variance.
pub fn mc_exp_moment(p: &BilateralGamma, z: f64, cfg: &SimConfig) -> Result<Estimate> {
    cfg.validate()?;
    if z == 0.0 {
        return Ok(Estimate {
            mean: 1.0,
            stderr: 0.0,
            n: cfg.n_samples,
        });
    }
    if !(2.0 * z > -p.lambda_minus() && 2.0 * z < p.lambda_plus()) {
        return Err(domain(format!(
            "exponential moment at z = {z} needs 2z in ({}, {})",
            -p.lambda_minus(),
            p.lambda_plus()
        )));
    }
    let xs = sample_terminal(&(*p).into(), 1.0, cfg)?;
    let values: Vec<f64> = xs.iter().map(|x| (z * x).exp()).collect();
    Ok(Estimate::from_values(&values, cfg.antithetic))
}

/// Empirical characteristic function `E[e^{iuX_t}]`: real and imaginary
/// parts with their standard errors.
pub fn mc_char_fn(law: &RiskNeutralLaw, t: f64, u: f64, cfg: &SimConfig) -> Result<(Complex64, Estimate, Estimate)> {
    let xs = sample_terminal(law, t, cfg)?;
    let re: Vec<f64> = xs.iter().map(|x| (u * x).cos()).collect();
    let im: Vec<f64> = xs.iter().map(|x| (u * x).sin()).collect();
    let (re, im) = (Estimate::from_values(&re, cfg.antithetic), Estimate::from_values(&im, cfg.antithetic));
    Ok((Complex64::new(re.mean, im.mean), re, im))
}

/// Estimate of `E[Λ₁^p]` for the density `Λ₁` of the bilateral Esscher
/// transform by `(θ⁺, θ⁻)`. Compare with [`p_distance`].
pub fn mc_likelihood_moment(
    p: &BilateralGamma,
    pexp: f64,
    theta_plus: f64,
    theta_minus: f64,
    cfg: &SimConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    // Finite variance of Λ^p needs the 2p-distance to exist.
    p_distance(p, 2.0 * pexp, theta_plus, theta_minus)?;
    let (ap, lp, am, lm) = p.tuple();
    let log_norm = cumulant_onesided(ap, lp, theta_plus)? + cumulant_onesided(am, lm, theta_minus)?;
    let up = GammaSampler::new(ap, lp);
    let down = GammaSampler::new(am, lm);
    let values = generate(cfg.n_samples, cfg.seed, None, |rng, chunk| {
        for v in chunk.iter_mut() {
            let (y, z) = (up.sample(rng), down.sample(rng));
            *v = (pexp * (theta_plus * y + theta_minus * z - log_norm)).exp();
        }
    })?;
    Ok(Estimate::from_values(&values, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dax() -> BilateralGamma {
        BilateralGamma::new(1.55, 133.96, 0.94, 88.92).unwrap()
    }

    fn moments(xs: &[f64]) -> (Estimate, Estimate) {
        let mean = Estimate::from_values(xs, false);
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean.mean).powi(2)).collect();
        (mean, Estimate::from_values(&sq, false))
    }

    #[test]
    fn gamma_moments_for_small_and_large_shapes() {
        for (shape, rate) in [(0.3, 2.0), (1.0, 1.0), (7.5, 0.5)] {
            let g = GammaSampler::new(shape, rate);
            let xs = generate(200_000, 11, None, |rng, c| c.iter_mut().for_each(|v| *v = g.sample(rng))).unwrap();
            let (m, v) = moments(&xs);
            assert!(m.covers(shape / rate, 4.0), "shape {shape}: mean {}", m.mean);
            assert!(v.covers(shape / (rate * rate), 4.0), "shape {shape}: var {}", v.mean);
        }
    }

    #[test]
    fn terminal_moments() {
        let t = 3.0;
        let law: RiskNeutralLaw = dax().into();
        let xs = sample_terminal(&law, t, &SimConfig::new(400_000, 3)).unwrap();
        let (m, v) = moments(&xs);
        assert!(m.covers(t * dax().mean(), 4.0));
        assert!(v.covers(t * dax().variance(), 4.0));
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let law: RiskNeutralLaw = dax().into();
        let cfg = SimConfig::new(150_000, 99);
        let a = sample_terminal(&law, 1.0, &cfg).unwrap();
        let b = sample_terminal_with_workers(&law, 1.0, &cfg, 1).unwrap();
        let c = sample_terminal_with_workers(&law, 1.0, &cfg, 3).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.iter().zip(&c).all(|(x, y)| x.to_bits() == y.to_bits()));
        let d = sample_terminal(&law, 1.0, &SimConfig::new(150_000, 100)).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn antithetic_pairs_keep_the_mean_and_reduce_error() {
        let law: RiskNeutralLaw = BilateralGamma::new(3.0, 20.0, 2.0, 15.0).unwrap().into();
        let plain = SimConfig::new(200_000, 5);
        let anti = SimConfig {
            antithetic: true,
            ..plain
        };
        let xs = sample_terminal(&law, 1.0, &anti).unwrap();
        let est = Estimate::from_values(&xs, true);
        let base = Estimate::from_values(&sample_terminal(&law, 1.0, &plain).unwrap(), false);
        let mean = 3.0 / 20.0 - 2.0 / 15.0;
        assert!(est.covers(mean, 4.0));
        assert!(est.stderr < base.stderr);
        assert!(SimConfig { n_samples: 3, ..anti }.validate().is_err());
    }

    #[test]
    fn exp_moment_at_zero_is_exact() {
        let e = mc_exp_moment(&dax(), 0.0, &SimConfig::new(10, 1)).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        assert!(mc_exp_moment(&dax(), 70.0, &SimConfig::new(10, 1)).is_err());
    }

    #[test]
    fn deep_strikes() {
        let m = Market::new(0.0, 0.0, 5000.0).unwrap();
        let law = crate::measures::solve_esscher(&dax(), &m, &Default::default()).unwrap().law;
        let cfg = SimConfig::new(200_000, 8);
        let fwd = mc_price(&law, &m, &OptionSpec::call(5000.0 * 1e-9, 1.0).unwrap(), &cfg).unwrap();
        assert!(fwd.covers(5000.0, 3.0), "{fwd:?}");
        let otm = mc_price(&law, &m, &OptionSpec::call(5000.0 * 1e6, 1.0).unwrap(), &cfg).unwrap();
        assert_eq!(otm.mean, 0.0);
    }
}
