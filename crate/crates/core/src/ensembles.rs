//! Multiparameter Gibbs families over commuting charges.
//!
//! A generalised Gibbs ensemble `ρ ∝ e^{-Σ λ_k I_k}` is an exponential family
//! in the multipliers λ, so its Fisher matrix is the covariance matrix of the
//! charges. The entropy gradient is `∇_λ S = −Fλ` and projecting onto it
//! gives `F_S = 1/(λᵀFλ)`. The grand canonical ensemble and the
//! (intensive, extensive) conjugate pairs are special cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermo::check_beta;

/// Relative size below which a variance is treated as exactly zero.
const DEGENERATE_RELATIVE: f64 = 1e-14;

/// A microstate (or degenerate multiplet) with its charge values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeState {
    pub charges: Vec<f64>,
    #[serde(rename = "g", default = "one")]
    pub degeneracy: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointEnsemble {
    pub lambdas: Vec<f64>,
    pub states: Vec<ChargeState>,
}

impl JointEnsemble {
    pub fn new(states: Vec<ChargeState>, lambdas: Vec<f64>) -> Result<Self> {
        let e = Self { lambdas, states };
        e.validate()?;
        Ok(e)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let e: Self = serde_json::from_str(text)?;
        e.validate()?;
        Ok(e)
    }

    pub fn charge_count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.lambdas.len();
        if m == 0 {
            return Err(Error::InvalidArgument(
                "ensemble needs at least one charge".into(),
            ));
        }
        if self.states.is_empty() {
            return Err(Error::InvalidArgument("ensemble has no states".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite multiplier {l}")));
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.charges.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "state {i} carries {} charges, expected {m}",
                    s.charges.len()
                )));
            }
            if s.degeneracy == 0 {
                return Err(Error::InvalidArgument(format!(
                    "state {i} has zero degeneracy"
                )));
            }
            if s.charges.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "state {i} has a non-finite charge"
                )));
            }
        }
        Ok(())
    }

    /// Normalised probabilities and `ln Z`, by log-sum-exp over
    /// `ln g_s − λ·I(s)`.
    fn distribution(&self) -> Result<(Vec<f64>, f64)> {
        let log_weights: Vec<f64> = self
            .states
            .iter()
            .map(|s| {
                (s.degeneracy as f64).ln()
                    - s.charges
                        .iter()
                        .zip(&self.lambdas)
                        .map(|(c, l)| c * l)
                        .sum::<f64>()
            })
            .collect();
        let max = log_weights
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Range("ensemble weights are not normalisable".into()));
        }
        let weights: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let ln_z = max + total.ln();
        Ok((weights.into_iter().map(|w| w / total).collect(), ln_z))
    }

    pub fn log_partition(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.distribution()?.1)
    }

    pub fn mean_charges(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let (p, _) = self.distribution()?;
        Ok(mean_charges(&self.states, &p, self.charge_count()))
    }

    /// `S = Σ_k λ_k ⟨I_k⟩ + ln Z`.
    pub fn entropy(&self) -> Result<f64> {
        self.validate()?;
        let (p, ln_z) = self.distribution()?;
        let means = mean_charges(&self.states, &p, self.charge_count());
        Ok(self
            .lambdas
            .iter()
            .zip(&means)
            .map(|(l, m)| l * m)
            .sum::<f64>()
            + ln_z)
    }
}

fn mean_charges(states: &[ChargeState], p: &[f64], m: usize) -> Vec<f64> {
    let mut means = vec![0.0; m];
    for (s, &ps) in states.iter().zip(p) {
        for (acc, c) in means.iter_mut().zip(&s.charges) {
            *acc += ps * c;
        }
    }
    means
}

fn covariance(states: &[ChargeState], p: &[f64], m: usize) -> Vec<Vec<f64>> {
    let means = mean_charges(states, p, m);
    let mut cov = vec![vec![0.0; m]; m];
    for (s, &ps) in states.iter().zip(p) {
        for k in 0..m {
            let dk = s.charges[k] - means[k];
            for l in k..m {
                cov[k][l] += ps * dk * (s.charges[l] - means[l]);
            }
        }
    }
    for k in 0..m {
        for l in 0..k {
            cov[k][l] = cov[l][k];
        }
    }
    cov
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GgeReport {
    /// `[F]_kl = Cov(I_k, I_l)`.
    pub fisher_matrix: Vec<Vec<f64>>,
    /// `∇_λ S = −Fλ`.
    pub entropy_gradient: Vec<f64>,
    pub f_s: f64,
    /// Effective heat capacity `λᵀFλ`.
    pub c_v_eff: f64,
}

pub fn gge_report(ensemble: &JointEnsemble) -> Result<GgeReport> {
    ensemble.validate()?;
    let m = ensemble.charge_count();
    let (p, _) = ensemble.distribution()?;
    let fisher = covariance(&ensemble.states, &p, m);
    let lambdas = &ensemble.lambdas;
    let f_lambda: Vec<f64> = fisher
        .iter()
        .map(|row| row.iter().zip(lambdas).map(|(f, l)| f * l).sum())
        .collect();
    let c_v_eff: f64 = lambdas.iter().zip(&f_lambda).map(|(l, fl)| l * fl).sum();
    let scale: f64 = (0..m).map(|k| lambdas[k] * lambdas[k] * fisher[k][k]).sum();
    if !(c_v_eff > DEGENERATE_RELATIVE * scale) || !(c_v_eff > 0.0) {
        return Err(Error::Degenerate(
            "lambda^T F lambda vanishes: the charges do not fluctuate along lambda".into(),
        ));
    }
    Ok(GgeReport {
        fisher_matrix: fisher,
        entropy_gradient: f_lambda.iter().map(|v| -v).collect(),
        f_s: 1.0 / c_v_eff,
        c_v_eff,
    })
}

/// A state of the grand canonical ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleState {
    #[serde(rename = "e")]
    pub energy: f64,
    #[serde(rename = "n")]
    pub particles: f64,
    #[serde(rename = "g", default = "one")]
    pub degeneracy: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GceInput {
    pub states: Vec<ParticleState>,
    pub beta: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GceReport {
    /// `Var(H − μN)`.
    pub f_beta_beta: f64,
    /// `β² Var(N)`.
    pub f_mu_mu: f64,
    /// `−β Cov(H − μN, N)`.
    pub f_beta_mu: f64,
    /// `1/(β² Var(H − μN))`.
    pub f_s_gce: f64,
    /// Heat capacity at constant chemical potential, `β² Var(H − μN)`.
    pub c_v_mu: f64,
    /// `β² Var(H)` under the grand canonical weights.
    pub c_v: f64,
    /// `β² (Var(H) − Cov(H,N)²/Var(N))`; absent when N does not fluctuate.
    pub c_v_fixed_n: Option<f64>,
}

impl GceReport {
    /// The same quantity as [`GceReport::c_v_mu`], under its variance name.
    pub fn beta_squared_var_grand_energy(&self) -> f64 {
        self.c_v_mu
    }
}

/// Grand canonical ensemble `ρ ∝ e^{-β(H − μN)}`, evaluated through the
/// natural parameters `(β, ν = βμ)`.
pub fn gce_report(states: &[ParticleState], beta: f64, mu: f64) -> Result<GceReport> {
    check_beta(beta)?;
    if !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite chemical potential {mu}"
        )));
    }
    let nu = beta * mu;
    let ensemble = JointEnsemble::new(
        states
            .iter()
            .map(|s| ChargeState {
                charges: vec![s.energy, s.particles],
                degeneracy: s.degeneracy,
            })
            .collect(),
        vec![beta, -nu],
    )?;
    let (p, _) = ensemble.distribution()?;
    let cov = covariance(&ensemble.states, &p, 2);
    let (var_e, cov_en, var_n) = (cov[0][0], cov[0][1], cov[1][1]);
    // Var(H − μN) and Cov(H − μN, N) from the charge covariance.
    let var_k = var_e - 2.0 * mu * cov_en + mu * mu * var_n;
    let cov_kn = cov_en - mu * var_n;
    let scale = var_e + mu * mu * var_n;
    if !(var_k > DEGENERATE_RELATIVE * scale) || !(var_k > 0.0) {
        return Err(Error::Degenerate("Var(H - mu N) vanishes".into()));
    }
    let mean_n2: f64 = states
        .iter()
        .zip(&p)
        .map(|(s, ps)| ps * s.particles * s.particles)
        .sum();
    let n_fluctuates = var_n > DEGENERATE_RELATIVE * mean_n2 && var_n > 0.0;
    let b2 = beta * beta;
    Ok(GceReport {
        f_beta_beta: var_k,
        f_mu_mu: if n_fluctuates { b2 * var_n } else { 0.0 },
        f_beta_mu: if n_fluctuates { -beta * cov_kn } else { 0.0 },
        f_s_gce: 1.0 / (b2 * var_k),
        c_v_mu: b2 * var_k,
        c_v: b2 * var_e,
        c_v_fixed_n: n_fluctuates.then(|| b2 * (var_e - cov_en * cov_en / var_n)),
    })
}

/// A state of a two-variable family `ρ ∝ e^{-βE − βλA}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateState {
    #[serde(rename = "e")]
    pub energy: f64,
    #[serde(rename = "a")]
    pub extensive: f64,
    #[serde(rename = "g", default = "one")]
    pub degeneracy: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateInput {
    pub states: Vec<ConjugateState>,
    pub beta: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugatePairReport {
    pub beta: f64,
    /// Fisher information about the intensive variable, `β² Var(A)`.
    pub f_lambda: f64,
    /// Fisher information about the extensive variable, `1/Var(A)`.
    pub f_a: f64,
    pub product: f64,
}

impl ConjugatePairReport {
    /// Uncertainty-product floor `T²/n²` for `n` copies.
    pub fn bound_for_n(&self, n: u64) -> f64 {
        let t_over_n = 1.0 / (self.beta * n as f64);
        t_over_n * t_over_n
    }
}

pub fn conjugate_pair_report(
    states: &[ConjugateState],
    beta: f64,
    lambda: f64,
) -> Result<ConjugatePairReport> {
    check_beta(beta)?;
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite intensive parameter {lambda}"
        )));
    }
    let ensemble = JointEnsemble::new(
        states
            .iter()
            .map(|s| ChargeState {
                charges: vec![s.energy, s.extensive],
                degeneracy: s.degeneracy,
            })
            .collect(),
        vec![beta, beta * lambda],
    )?;
    let (p, _) = ensemble.distribution()?;
    let var_a = covariance(&ensemble.states, &p, 2)[1][1];
    let mean_a2: f64 = states
        .iter()
        .zip(&p)
        .map(|(s, ps)| ps * s.extensive * s.extensive)
        .sum();
    if !(var_a > DEGENERATE_RELATIVE * mean_a2) || !(var_a > 0.0) {
        return Err(Error::Degenerate("Var(A) vanishes".into()));
    }
    let f_lambda = beta * beta * var_a;
    let f_a = 1.0 / var_a;
    Ok(ConjugatePairReport {
        beta,
        f_lambda,
        f_a,
        product: f_lambda * f_a,
    })
}

/// Any of the ensemble file formats, distinguished by their keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnsembleInput {
    Gge(JointEnsemble),
    Gce(GceInput),
    Conjugate(ConjugateInput),
}

impl EnsembleInput {
    pub fn from_json(text: &str) -> Result<Self> {
        let input: Self = serde_json::from_str(text)
            .map_err(|_| Error::Parse("not a recognised ensemble document".into()))?;
        if let Self::Gge(e) = &input {
            e.validate()?;
        }
        Ok(input)
    }
}
