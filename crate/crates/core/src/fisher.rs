//! Single-parameter Fisher information of Gibbs states.
//!
//! The energy eigenbasis does not depend on β, so the quantum Fisher
//! information about β is the classical one of the Boltzmann weights,
//! `F_β = Var(H)`. Every other parameter is reached by a reparametrisation
//! `θ(β)`, under which `F_θ = (dβ/dθ)² F_β`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::ThermalModel;
use crate::thermo::{check_beta, moments, RENYI_UNIT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherReport {
    pub beta: f64,
    pub f_beta: f64,
    pub f_t: f64,
    pub f_s: f64,
    pub product_fs_ft: f64,
    /// Cramér–Rao floor on the entropy-estimator variance, `C_v/n`.
    pub cr_var_s: f64,
    /// Cramér–Rao floor on the temperature-estimator variance, `T²/(n C_v)`.
    pub cr_var_t: f64,
    pub cr_product: f64,
    pub n_copies: u64,
}

impl FisherReport {
    fn from_variance(beta: f64, var_h: f64, n_copies: u64) -> Result<Self> {
        if n_copies == 0 {
            return Err(Error::InvalidArgument(
                "number of copies must be at least 1".into(),
            ));
        }
        let c_v = beta * beta * var_h;
        if !(c_v > 0.0) {
            return Err(Error::Degenerate(format!(
                "C_v = 0 at beta = {beta}: no energy fluctuations, entropy Fisher information undefined"
            )));
        }
        let t = 1.0 / beta;
        let n = n_copies as f64;
        let f_beta = var_h;
        // dβ/dT = −β²
        let f_t = f_beta * beta.powi(4);
        // dS/dβ = −C_v/β
        let f_s = 1.0 / c_v;
        let cr_var_s = c_v / n;
        let cr_var_t = t * t / (n * c_v);
        Ok(Self {
            beta,
            f_beta,
            f_t,
            f_s,
            product_fs_ft: f_s * f_t,
            cr_var_s,
            cr_var_t,
            cr_product: cr_var_s * cr_var_t,
            n_copies,
        })
    }

    pub fn t(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn c_v(&self) -> f64 {
        self.beta * self.beta * self.f_beta
    }
}

pub fn fisher_report(model: &ThermalModel, beta: f64, n_copies: u64) -> Result<FisherReport> {
    if !model.has_fluctuations() {
        return Err(Error::Degenerate(
            "single-level spectrum has C_v = 0, entropy Fisher information undefined".into(),
        ));
    }
    let m = moments(model, beta)?;
    FisherReport::from_variance(beta, m.var_h, n_copies)
}

/// Equipartition limit for `f` quadratic degrees of freedom: `C_v = f/2`.
pub fn classical_limit_report(dof: u32, temperature: f64) -> Result<FisherReport> {
    if dof == 0 {
        return Err(Error::InvalidArgument(
            "need at least one degree of freedom".into(),
        ));
    }
    check_beta(temperature)?;
    let beta = 1.0 / temperature;
    let var_h = 0.5 * dof as f64 * temperature * temperature;
    let mut report = FisherReport::from_variance(beta, var_h, 1)?;
    // Exact equipartition values rather than the rounded route through Var(H).
    let c_v = 0.5 * dof as f64;
    report.f_s = 1.0 / c_v;
    report.f_t = c_v / (temperature * temperature);
    report.product_fs_ft = report.f_s * report.f_t;
    report.cr_var_s = c_v;
    report.cr_var_t = temperature * temperature / c_v;
    report.cr_product = report.cr_var_s * report.cr_var_t;
    Ok(report)
}

fn oscillator_heat_capacity(x: f64) -> f64 {
    let em1 = (-x).exp_m1();
    x * x * (-x).exp() / (em1 * em1)
}

/// Temperatures where an oscillator's entropy and temperature Fisher
/// informations coincide, i.e. `C_v(T) = T` with `T` measured in units of
/// `ħω`. Returned ascending and scaled by `omega`.
pub fn oscillator_crossings(omega: f64) -> Result<(f64, f64)> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "frequency must be positive and finite, got {omega}"
        )));
    }
    let g = |tau: f64| oscillator_heat_capacity(1.0 / tau) - tau;
    const GRID: usize = 4000;
    let (lo, hi) = (1e-3f64, 1e2f64);
    let ratio = (hi / lo).ln() / GRID as f64;
    let mut roots = Vec::new();
    let mut prev_tau = lo;
    let mut prev_g = g(lo);
    for i in 1..=GRID {
        let tau = lo * (ratio * i as f64).exp();
        let gt = g(tau);
        if prev_g == 0.0 {
            roots.push(prev_tau);
        } else if prev_g.signum() != gt.signum() && gt != 0.0 {
            roots.push(refine_root(&g, prev_tau, tau)?);
        }
        prev_tau = tau;
        prev_g = gt;
    }
    match roots.as_slice() {
        [t1, t2] => Ok((omega * t1, omega * t2)),
        _ => Err(Error::NoConvergence(format!(
            "expected two crossings of C_v(T) = T, found {}",
            roots.len()
        ))),
    }
}

fn refine_root<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> Result<f64> {
    let mut ga = g(a);
    let mut gb = g(b);
    let mut iterations = 0;
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return Ok(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
        iterations += 1;
        if iterations > 200 {
            return Err(Error::NoConvergence("bisection did not converge".into()));
        }
    }
    // One secant polish inside the final bracket.
    let secant = a - ga * (b - a) / (gb - ga);
    if secant > a && secant < b && g(secant).abs() <= ga.abs().min(gb.abs()) {
        return Ok(secant);
    }
    Ok(if ga.abs() < gb.abs() { a } else { b })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenyiFisherReport {
    pub alpha: f64,
    pub f_s_alpha: f64,
    /// Rényi heat capacity, `1/F_S^α`.
    pub c_v_alpha: f64,
    pub product_with_f_t: f64,
}

/// Fisher information about the Rényi entropy `S_α`,
/// `F_S^α = (α−1)² Var(H) / (α² [U(αβ) − U(β)]²)`.
pub fn renyi_fisher(model: &ThermalModel, beta: f64, alpha: f64) -> Result<RenyiFisherReport> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Renyi order must be positive and finite, got {alpha}"
        )));
    }
    if !model.has_fluctuations() {
        return Err(Error::Degenerate(
            "single-level spectrum has C_v = 0".into(),
        ));
    }
    let at_beta = moments(model, beta)?;
    let c_v = beta * beta * at_beta.var_h;
    if !(c_v > 0.0) {
        return Err(Error::Degenerate(format!("C_v = 0 at beta = {beta}")));
    }
    if (alpha - 1.0).abs() < RENYI_UNIT_THRESHOLD {
        let f_s = 1.0 / c_v;
        return Ok(RenyiFisherReport {
            alpha,
            f_s_alpha: f_s,
            c_v_alpha: c_v,
            product_with_f_t: f_s * c_v * beta * beta,
        });
    }
    let at_alpha_beta = moments(model, alpha * beta)?;
    let du = at_alpha_beta.u_shifted - at_beta.u_shifted;
    if du == 0.0 {
        return Err(Error::Degenerate(format!(
            "U(alpha*beta) = U(beta) numerically at alpha = {alpha}, beta = {beta}"
        )));
    }
    let ratio = (alpha - 1.0) / (alpha * du);
    let f_s_alpha = ratio * ratio * at_beta.var_h;
    Ok(RenyiFisherReport {
        alpha,
        f_s_alpha,
        c_v_alpha: 1.0 / f_s_alpha,
        product_with_f_t: ratio * ratio * c_v * c_v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumCorrection {
    /// `1/C_v` from the exact oscillator heat capacities.
    pub f_s_exact: f64,
    /// Leading-order high-temperature expansion `(2/f)(1 + Σ(βω_i)²/(6f))`.
    pub f_s_series: f64,
    /// Quadratic degrees of freedom; two per oscillator mode.
    pub dof: u32,
}

pub fn quantum_correction_check(omegas: &[f64], beta: f64) -> Result<QuantumCorrection> {
    check_beta(beta)?;
    if omegas.is_empty() {
        return Err(Error::InvalidArgument("need at least one mode".into()));
    }
    if let Some(w) = omegas.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "mode frequency must be positive, got {w}"
        )));
    }
    let c_v: f64 = omegas
        .iter()
        .map(|w| oscillator_heat_capacity(beta * w))
        .sum();
    if !(c_v > 0.0) {
        return Err(Error::Degenerate(format!("C_v = 0 at beta = {beta}")));
    }
    let dof = 2 * omegas.len() as u32;
    let f = dof as f64;
    let square_sum: f64 = omegas.iter().map(|w| (beta * w).powi(2)).sum();
    Ok(QuantumCorrection {
        f_s_exact: 1.0 / c_v,
        f_s_series: 2.0 / f * (1.0 + square_sum / (6.0 * f)),
        dof,
    })
}
