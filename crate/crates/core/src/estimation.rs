//! Monte Carlo simulation of entropy and temperature estimation from
//! projective energy measurements.
//!
//! Each trial draws `n` energies from the Gibbs distribution, reduces them
//! to the sample mean (a sufficient statistic for β), inverts `U(β̂) = Ē`
//! for the maximum-likelihood β̂, and reports the plug-in estimates
//! `Ŝ = S(β̂)` and `T̂ = 1/β̂`.
//!
//! # Reproducibility
//!
//! Randomness is fully determined by the master seed:
//!
//! * trial `t` uses seed `splitmix64(master_seed + (t + 1)·0x9E3779B97F4A7C15)`
//!   (see [`trial_seed`]);
//! * that seed initialises xoshiro256** through SplitMix64, as in the
//!   reference implementation's `seed_from_u64`;
//! * a uniform variate is `(x >> 11)·2⁻⁵³` for each 64-bit output `x`, and
//!   selects the first level whose cumulative probability exceeds it.
//!
//! Trials are run in parallel but aggregated in trial order, so the
//! statistics do not depend on the thread schedule.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::ThermalModel;
use crate::thermo::{check_beta, energy_moments, moments};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for trial `t`: the `(t+1)`-th output of a SplitMix64 stream started at
/// `master_seed`.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    let mut z = master_seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform(rng: &mut Xoshiro256StarStar) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exact discrete sampler over the levels of a finite spectrum.
#[derive(Debug, Clone)]
pub struct EnergySampler {
    energies: Vec<f64>,
    cumulative: Vec<f64>,
}

impl EnergySampler {
    pub fn new(model: &ThermalModel, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let levels = model.levels().ok_or_else(|| {
            Error::InvalidArgument(
                "energy sampling needs a finite spectrum; truncate unbounded models first".into(),
            )
        })?;
        let e0 = levels[0].energy;
        let weights: Vec<f64> = levels
            .iter()
            .map(|l| l.degeneracy as f64 * (-beta * (l.energy - e0)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            energies: levels.iter().map(|l| l.energy).collect(),
            cumulative,
        })
    }

    pub fn draw(&self, rng: &mut Xoshiro256StarStar) -> f64 {
        let u = uniform(rng);
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.energies[idx.min(self.energies.len() - 1)]
    }

    fn mean_of(&self, n: u64, seed: u64) -> f64 {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += self.draw(&mut rng);
        }
        sum / n as f64
    }
}

/// `n` i.i.d. outcomes of a projective energy measurement on `ρ(β)`.
pub fn sample_energies(model: &ThermalModel, beta: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = EnergySampler::new(model, beta)?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    Ok((0..n).map(|_| sampler.draw(&mut rng)).collect())
}

const MAX_INVERSION_STEPS: usize = 400;

/// Maximum-likelihood β̂ from a sample-mean energy: the root of `U(β̂) = Ē`.
///
/// Safeguarded Newton on `dU/dβ = −Var(H)`, falling back to bisection
/// inside a maintained bracket.
pub fn invert_mean_energy(model: &ThermalModel, mean_e: f64) -> Result<f64> {
    if !model.has_fluctuations() {
        return Err(Error::Degenerate(
            "single-level spectrum cannot be inverted".into(),
        ));
    }
    let e0 = model.ground_energy();
    let e_inf = model.infinite_temperature_energy();
    if !(mean_e.is_finite() && mean_e > e0 && mean_e < e_inf) {
        return Err(Error::OutOfRange(format!(
            "mean energy {mean_e} outside the attainable open interval ({e0}, {e_inf})"
        )));
    }
    let scale = model.energy_scale();
    let mut lo = 1e-6 / scale;
    let mut hi = 1e6 / scale;
    let mut expanded = 0;
    while energy_moments(model, lo)?.0 <= mean_e {
        lo *= 0.1;
        expanded += 1;
        if expanded > 300 || lo == 0.0 {
            return Err(Error::OutOfRange(format!(
                "mean energy {mean_e} too close to the infinite-temperature limit"
            )));
        }
    }
    expanded = 0;
    while energy_moments(model, hi)?.0 >= mean_e {
        hi *= 10.0;
        expanded += 1;
        if expanded > 300 || !hi.is_finite() {
            return Err(Error::OutOfRange(format!(
                "mean energy {mean_e} too close to the ground energy"
            )));
        }
    }
    let tol = 1e-12 * scale.min(mean_e - e0);
    let mut beta = (lo * hi).sqrt();
    for _ in 0..MAX_INVERSION_STEPS {
        let (u, var) = energy_moments(model, beta)?;
        let resid = u - mean_e;
        if resid.abs() <= tol {
            return Ok(beta);
        }
        if resid > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(beta);
        }
        let newton = beta + resid / var;
        beta = if var > 0.0 && newton > lo && newton < hi {
            newton
        } else if hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::NoConvergence(format!(
        "beta inversion for mean energy {mean_e} did not converge"
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: ThermalModel,
    pub beta_true: f64,
    pub n_copies: u64,
    pub n_trials: u64,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta_true)?;
        if !self.model.is_finite() {
            return Err(Error::InvalidArgument(
                "simulation needs a finite spectrum; truncate unbounded models first".into(),
            ));
        }
        if !self.model.has_fluctuations() {
            return Err(Error::Degenerate(
                "simulation needs at least two distinct levels".into(),
            ));
        }
        if self.n_copies < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 copies per trial, got {}",
                self.n_copies
            )));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidArgument("need at least one trial".into()));
        }
        Ok(())
    }
}

/// Estimator statistics over all trials whose inversion succeeded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStatistics {
    pub beta_true: f64,
    pub n_copies: u64,
    pub n_trials: u64,
    pub n_failed: u64,
    pub s_true: f64,
    pub t_true: f64,
    pub c_v: f64,
    pub mean_s_hat: f64,
    pub var_s_hat: f64,
    pub mean_t_hat: f64,
    pub var_t_hat: f64,
    /// `n·Var(Ŝ)/C_v`; 1 at the Cramér–Rao bound.
    pub ratio_s: f64,
    /// `n·Var(T̂)·C_v/T²`; 1 at the Cramér–Rao bound.
    pub ratio_t: f64,
    /// `Var(Ŝ)·Var(T̂)·n²/T²`.
    pub product_ratio: f64,
    /// Standard errors of the two ratios from the sample fourth moments.
    pub ratio_s_se: f64,
    pub ratio_t_se: f64,
    /// Raw plug-in bias, `E[Ŝ] − S`; it is O(1/n) and left uncorrected.
    pub bias_s: f64,
    pub bias_t: f64,
    /// Fewer than two successful trials: variances are set to zero.
    pub degenerate: bool,
}

struct Spread {
    mean: f64,
    var: f64,
    var_se: f64,
}

fn spread(xs: &[f64]) -> Spread {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Spread {
            mean,
            var: 0.0,
            var_se: 0.0,
        };
    }
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    let var = m2 / (n - 1.0);
    let (c2, c4) = (m2 / n, m4 / n);
    Spread {
        mean,
        var,
        var_se: ((c4 - c2 * c2).max(0.0) / n).sqrt(),
    }
}

pub fn run_trials(config: &SimConfig) -> Result<TrialStatistics> {
    config.validate()?;
    let sampler = EnergySampler::new(&config.model, config.beta_true)?;
    let truth = moments(&config.model, config.beta_true)?;
    let beta = config.beta_true;
    let c_v = beta * beta * truth.var_h;
    let t_true = 1.0 / beta;
    let n = config.n_copies;

    let outcomes: Vec<Option<(f64, f64)>> = (0..config.n_trials)
        .into_par_iter()
        .map(|t| {
            let mean_e = sampler.mean_of(n, trial_seed(config.master_seed, t));
            let beta_hat = invert_mean_energy(&config.model, mean_e).ok()?;
            let s_hat = moments(&config.model, beta_hat).ok()?.s;
            Some((s_hat, 1.0 / beta_hat))
        })
        .collect();

    let (s_hats, t_hats): (Vec<f64>, Vec<f64>) = outcomes.iter().flatten().copied().unzip();
    let n_failed = config.n_trials - s_hats.len() as u64;
    if s_hats.is_empty() {
        return Err(Error::AllTrialsFailed(config.n_trials));
    }
    let s = spread(&s_hats);
    let t = spread(&t_hats);
    let nf = n as f64;
    let t2 = t_true * t_true;
    Ok(TrialStatistics {
        beta_true: beta,
        n_copies: n,
        n_trials: config.n_trials,
        n_failed,
        s_true: truth.s,
        t_true,
        c_v,
        mean_s_hat: s.mean,
        var_s_hat: s.var,
        mean_t_hat: t.mean,
        var_t_hat: t.var,
        ratio_s: nf * s.var / c_v,
        ratio_t: nf * t.var * c_v / t2,
        product_ratio: s.var * t.var * nf * nf / t2,
        ratio_s_se: nf * s.var_se / c_v,
        ratio_t_se: nf * t.var_se * c_v / t2,
        bias_s: s.mean - truth.s,
        bias_t: t.mean - t_true,
        degenerate: s_hats.len() < 2,
    })
}
