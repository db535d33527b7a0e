//! Equilibrium thermodynamics of a [`ThermalModel`] at inverse temperature β.
//!
//! All sums over a spectrum are taken relative to the ground energy `E₀`,
//! so every Boltzmann factor lies in `(0, 1]` and nothing overflows at
//! large β. Mean energy and entropy are rebuilt from the shifted sums at
//! the end.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::ThermalModel;

/// Below this distance from 1 a Rényi order is treated as von Neumann.
pub const RENYI_UNIT_THRESHOLD: f64 = 1e-8;

/// Equilibrium quantities at one inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub ln_z: f64,
    /// Mean energy ⟨H⟩.
    pub u: f64,
    pub var_h: f64,
    /// Heat capacity, `β²·Var(H)`.
    pub c_v: f64,
    /// Von Neumann entropy.
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenyiPoint {
    pub alpha: f64,
    pub s_alpha: f64,
    pub ds_alpha_dbeta: f64,
    /// Mean energy at inverse temperature `α·β`.
    pub u_at_alpha_beta: f64,
}

/// Ground-shifted moments; additive over independent subsystems.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub ground: f64,
    /// `ln Σ g e^{-β(E-E₀)} = ln Z + β E₀`.
    pub ln_z_shifted: f64,
    /// `U - E₀`.
    pub u_shifted: f64,
    pub var_h: f64,
    pub s: f64,
}

impl Moments {
    fn add(self, other: Moments) -> Moments {
        Moments {
            ground: self.ground + other.ground,
            ln_z_shifted: self.ln_z_shifted + other.ln_z_shifted,
            u_shifted: self.u_shifted + other.u_shifted,
            var_h: self.var_h + other.var_h,
            s: self.s + other.s,
        }
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "inverse temperature must be positive and finite, got {beta}"
        )))
    }
}

fn spectrum_moments(levels: &[crate::spectra::EnergyLevel], beta: f64) -> Moments {
    let e0 = levels[0].energy;
    let mut z = 0.0;
    let mut first = 0.0;
    for l in levels {
        let w = l.degeneracy as f64 * (-beta * (l.energy - e0)).exp();
        z += w;
        first += w * (l.energy - e0);
    }
    let u_shifted = first / z;
    let var_h = levels
        .iter()
        .map(|l| {
            let w = l.degeneracy as f64 * (-beta * (l.energy - e0)).exp();
            let d = l.energy - e0 - u_shifted;
            w * d * d
        })
        .sum::<f64>()
        / z;
    let ln_z_shifted = z.ln();
    Moments {
        ground: e0,
        ln_z_shifted,
        u_shifted,
        var_h,
        s: beta * u_shifted + ln_z_shifted,
    }
}

fn oscillator_moments(omega: f64, beta: f64) -> Moments {
    let x = beta * omega;
    // -ln(1 - e^{-x}), accurate at both ends
    let ln_z_shifted = if x < std::f64::consts::LN_2 {
        -(-(-x).exp_m1()).ln()
    } else {
        -(-(-x).exp()).ln_1p()
    };
    let em1 = (-x).exp_m1();
    let occupation = 1.0 / x.exp_m1();
    Moments {
        ground: 0.5 * omega,
        ln_z_shifted,
        u_shifted: omega * occupation,
        var_h: omega * omega * (-x).exp() / (em1 * em1),
        s: x * occupation + ln_z_shifted,
    }
}

fn classical_moments(dof: u32, beta: f64) -> Moments {
    let half_f = 0.5 * dof as f64;
    let ln_z = -half_f * beta.ln();
    Moments {
        ground: 0.0,
        ln_z_shifted: ln_z,
        u_shifted: half_f / beta,
        var_h: half_f / (beta * beta),
        s: half_f + ln_z,
    }
}

pub(crate) fn moments(model: &ThermalModel, beta: f64) -> Result<Moments> {
    check_beta(beta)?;
    let m = match model {
        ThermalModel::FiniteSpectrum { levels } => spectrum_moments(levels.levels(), beta),
        ThermalModel::TwoLevel { .. } => spectrum_moments(&model.levels().unwrap(), beta),
        ThermalModel::Oscillator { omega } => oscillator_moments(*omega, beta),
        ThermalModel::OscillatorBank { omegas } => omegas
            .iter()
            .map(|&w| oscillator_moments(w, beta))
            .fold(Moments::default(), Moments::add),
        ThermalModel::ClassicalQuadratic { dof } => classical_moments(*dof, beta),
        ThermalModel::DiatomicStaircase { t_rot, t_vib } => classical_moments(3, beta)
            .add(oscillator_moments(*t_rot, beta))
            .add(oscillator_moments(*t_vib, beta)),
    };
    let values = [m.ln_z_shifted, m.u_shifted, m.var_h, m.s];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Range(format!(
            "non-finite thermodynamic moments at beta = {beta}"
        )));
    }
    Ok(m)
}

/// `ln Z(β) = ln Σ_k g_k e^{-βE_k}`, evaluated relative to the ground energy.
pub fn log_partition(model: &ThermalModel, beta: f64) -> Result<f64> {
    let m = moments(model, beta)?;
    let ln_z = m.ln_z_shifted - beta * m.ground;
    if !ln_z.is_finite() {
        return Err(Error::Range(format!("ln Z overflowed at beta = {beta}")));
    }
    Ok(ln_z)
}

pub fn thermo_point(model: &ThermalModel, beta: f64) -> Result<ThermoPoint> {
    let m = moments(model, beta)?;
    let ln_z = m.ln_z_shifted - beta * m.ground;
    if !ln_z.is_finite() {
        return Err(Error::Range(format!("ln Z overflowed at beta = {beta}")));
    }
    Ok(ThermoPoint {
        beta,
        ln_z,
        u: m.ground + m.u_shifted,
        var_h: m.var_h,
        c_v: beta * beta * m.var_h,
        s: m.s,
        t: 1.0 / beta,
    })
}

/// Mean energy `U(β)` and its variance, the pair the β-inversion needs.
pub fn energy_moments(model: &ThermalModel, beta: f64) -> Result<(f64, f64)> {
    let m = moments(model, beta)?;
    Ok((m.ground + m.u_shifted, m.var_h))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Renyi order must be positive and finite, got {alpha}"
        )))
    }
}

/// Rényi entropy `S_α = [ln Z(αβ) − α ln Z(β)]/(1 − α)` and its β-derivative
/// `α/(α−1)·[U(αβ) − U(β)]`.
pub fn renyi_point(model: &ThermalModel, beta: f64, alpha: f64) -> Result<RenyiPoint> {
    check_alpha(alpha)?;
    let at_beta = moments(model, beta)?;
    let at_alpha_beta = moments(model, alpha * beta)?;
    let u_at_alpha_beta = at_alpha_beta.ground + at_alpha_beta.u_shifted;
    if (alpha - 1.0).abs() < RENYI_UNIT_THRESHOLD {
        return Ok(RenyiPoint {
            alpha,
            s_alpha: at_beta.s,
            ds_alpha_dbeta: -beta * at_beta.var_h,
            u_at_alpha_beta,
        });
    }
    let s_alpha = (at_alpha_beta.ln_z_shifted - alpha * at_beta.ln_z_shifted) / (1.0 - alpha);
    let du = at_alpha_beta.u_shifted - at_beta.u_shifted;
    Ok(RenyiPoint {
        alpha,
        s_alpha,
        ds_alpha_dbeta: alpha / (alpha - 1.0) * du,
        u_at_alpha_beta,
    })
}

/// Default absolute tolerance for [`thermo_length`].
pub const DEFAULT_LENGTH_TOLERANCE: f64 = 1e-10;

/// Thermodynamic length `∫ dS/√C_v` between two inverse temperatures.
///
/// With `dS = −(C_v/β) dβ` the integrand becomes `√C_v(β)/β`; it is
/// integrated in `ln β`, where it reads `√C_v`.
pub fn thermo_length(
    model: &ThermalModel,
    beta_1: f64,
    beta_2: f64,
    quadrature_tol: f64,
) -> Result<f64> {
    check_beta(beta_1)?;
    check_beta(beta_2)?;
    if beta_1 > beta_2 {
        return Err(Error::InvalidArgument(format!(
            "path must run from lower to higher beta, got {beta_1} > {beta_2}"
        )));
    }
    if !(quadrature_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quadrature tolerance must be positive, got {quadrature_tol}"
        )));
    }
    if !model.has_fluctuations() {
        return Err(Error::Degenerate(
            "single-level spectrum has C_v = 0 everywhere".into(),
        ));
    }
    if beta_1 == beta_2 {
        return Ok(0.0);
    }
    let integrand = |ln_beta: f64| -> Result<f64> {
        let beta = ln_beta.exp();
        let m = moments(model, beta)?;
        let c_v = beta * beta * m.var_h;
        if c_v <= 0.0 {
            return Err(Error::Degenerate(format!(
                "C_v vanishes at beta = {beta} on the integration path"
            )));
        }
        Ok(c_v.sqrt())
    };
    adaptive_simpson(integrand, beta_1.ln(), beta_2.ln(), quadrature_tol)
}

const MAX_SIMPSON_DEPTH: u32 = 48;

fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    // A few initial panels so narrow features are not skipped on the first look.
    const PANELS: usize = 8;
    let width = (b - a) / PANELS as f64;
    let mut total = 0.0;
    for i in 0..PANELS {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == PANELS { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo)?, f(mid)?, f(hi)?);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += simpson_step(&f, lo, hi, flo, fmid, fhi, whole, tol / PANELS as f64, 0)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_SIMPSON_DEPTH {
        return Err(Error::NoConvergence(format!(
            "adaptive quadrature exceeded depth {MAX_SIMPSON_DEPTH} near {m}"
        )));
    }
    Ok(
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{truncate_oscillator, EnergyLevel};
    use approx::assert_relative_eq;

    fn two_level() -> ThermalModel {
        ThermalModel::two_level(1.0).unwrap()
    }

    #[test]
    fn two_level_log_partition() {
        // ln(1 + e^{-1}), direct two-term sum
        let direct = (1.0 + (-1.0f64).exp()).ln();
        assert_relative_eq!(
            log_partition(&two_level(), 1.0).unwrap(),
            direct,
            max_relative = 1e-15
        );
        assert_relative_eq!(direct, 0.313_261_687_518_222_8, max_relative = 1e-15);
    }

    #[test]
    fn degenerate_single_level() {
        let m = ThermalModel::spectrum(vec![EnergyLevel::new(0.0, 2)]).unwrap();
        for beta in [0.1, 1.0, 50.0] {
            assert_relative_eq!(
                log_partition(&m, beta).unwrap(),
                2f64.ln(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn oscillator_log_partition_matches_truncated_sum() {
        let osc = ThermalModel::oscillator(1.0).unwrap();
        let closed = log_partition(&osc, 1.0).unwrap();
        assert_relative_eq!(closed, -0.041_324_854_612_918_11, max_relative = 1e-13);
        let sum: f64 = (0..200).map(|n| (-(n as f64 + 0.5)).exp()).sum();
        assert_relative_eq!(closed, sum.ln(), max_relative = 1e-13);
    }

    #[test]
    fn two_level_point() {
        let p = thermo_point(&two_level(), 1.0).unwrap();
        assert_relative_eq!(p.u, 0.268_941_421_369_995_1, max_relative = 1e-14);
        assert_relative_eq!(p.var_h, 0.196_611_933_241_481_85, max_relative = 1e-14);
        assert_relative_eq!(p.c_v, 0.196_611_933_241_481_85, max_relative = 1e-14);
        assert_relative_eq!(p.s, 0.582_203_108_888_217_9, max_relative = 1e-14);
        assert_eq!(p.t, 1.0);
    }

    #[test]
    fn high_temperature_two_level_is_maximally_mixed() {
        let p = thermo_point(&two_level(), 1e-8).unwrap();
        assert!((p.s - 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn classical_equipartition() {
        let m = ThermalModel::classical(3).unwrap();
        for t in [0.1, 1.0, 7.5] {
            let p = thermo_point(&m, 1.0 / t).unwrap();
            assert_relative_eq!(p.c_v, 1.5, max_relative = 1e-15);
            assert_relative_eq!(p.u, 1.5 * t, max_relative = 1e-15);
        }
    }

    #[test]
    fn point_invariants() {
        let models = [
            two_level(),
            ThermalModel::oscillator(1.0).unwrap(),
            ThermalModel::oscillator_bank(vec![1.0, 2.0, 3.0]).unwrap(),
            ThermalModel::classical(5).unwrap(),
            ThermalModel::diatomic(1.0, 50.0).unwrap(),
            ThermalModel::spectrum(vec![
                EnergyLevel::new(-3.0, 2),
                EnergyLevel::new(0.5, 1),
                EnergyLevel::new(4.0, 7),
            ])
            .unwrap(),
        ];
        for m in &models {
            for beta in [0.05, 0.3, 1.0, 4.0] {
                let p = thermo_point(m, beta).unwrap();
                assert_eq!(p.c_v, beta * beta * p.var_h);
                assert_relative_eq!(
                    p.s,
                    beta * p.u + p.ln_z,
                    max_relative = 1e-12,
                    epsilon = 1e-14
                );
                if let Some(levels) = m.levels() {
                    let g: f64 = levels.iter().map(|l| l.degeneracy as f64).sum();
                    assert!(p.s >= 0.0 && p.s <= g.ln() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn large_beta_does_not_overflow() {
        let m = ThermalModel::spectrum(vec![EnergyLevel::new(-5.0, 1), EnergyLevel::new(5.0, 1)])
            .unwrap();
        let p = thermo_point(&m, 100.0).unwrap();
        assert_eq!(p.u, -5.0);
        assert_eq!(p.var_h, 0.0);
        assert!(log_partition(&m, 1e308).is_err());
    }

    #[test]
    fn rejects_bad_beta() {
        for beta in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                thermo_point(&two_level(), beta),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn renyi_two_level_order_two() {
        let r = renyi_point(&two_level(), 1.0, 2.0).unwrap();
        let purity = (1.0 + (-2.0f64).exp()) / (1.0 + (-1.0f64).exp()).powi(2);
        assert_relative_eq!(purity, 0.606_776_133_517_036_3, max_relative = 1e-14);
        assert_relative_eq!(r.s_alpha, -purity.ln(), max_relative = 1e-13);
        assert_relative_eq!(r.s_alpha, 0.499_595_363_993_473_2, max_relative = 1e-13);
        let u1 = thermo_point(&two_level(), 1.0).unwrap().u;
        let u2 = thermo_point(&two_level(), 2.0).unwrap().u;
        assert_relative_eq!(r.ds_alpha_dbeta, 2.0 * (u2 - u1), max_relative = 1e-13);
        assert_relative_eq!(
            r.ds_alpha_dbeta,
            -0.299_476_998_695_755_1,
            max_relative = 1e-13
        );
        assert_relative_eq!(r.u_at_alpha_beta, u2, max_relative = 1e-15);
    }

    #[test]
    fn renyi_unit_order_is_von_neumann() {
        let models = [two_level(), ThermalModel::oscillator(1.3).unwrap()];
        for m in &models {
            let p = thermo_point(m, 0.7).unwrap();
            let r = renyi_point(m, 0.7, 1.0).unwrap();
            assert_eq!(r.s_alpha, p.s);
            assert_relative_eq!(r.ds_alpha_dbeta, -p.c_v / 0.7, max_relative = 1e-15);
        }
        assert!(renyi_point(&two_level(), 1.0, 0.0).is_err());
        assert!(renyi_point(&two_level(), 1.0, -2.0).is_err());
    }

    #[test]
    fn renyi_continuity_at_unit_order() {
        let m = two_level();
        let s = thermo_point(&m, 1.0).unwrap().s;
        for alpha in [1.0 - 1e-3, 1.0 + 1e-3] {
            let r = renyi_point(&m, 1.0, alpha).unwrap();
            assert!((r.s_alpha - s).abs() < 1e-3);
        }
    }

    #[test]
    fn thermo_length_classical_closed_form() {
        let m = ThermalModel::classical(2).unwrap();
        let l = thermo_length(&m, (-1.0f64).exp(), 1.0, DEFAULT_LENGTH_TOLERANCE).unwrap();
        assert!((l - 1.0).abs() < 1e-10);
        assert_eq!(thermo_length(&m, 0.5, 0.5, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn thermo_length_matches_trapezoid_oracle() {
        let m = two_level();
        let l = thermo_length(&m, 0.5, 2.0, 1e-12).unwrap();
        // Fixed-grid trapezoid in β on the two-level closed form.
        let cv = |b: f64| {
            let p = 1.0 / (b.exp() + 1.0);
            b * b * p * (1.0 - p)
        };
        let n = 200_000;
        let h = 1.5 / n as f64;
        let g = |b: f64| cv(b).sqrt() / b;
        let mut trap = 0.5 * (g(0.5) + g(2.0));
        for i in 1..n {
            trap += g(0.5 + i as f64 * h);
        }
        trap *= h;
        assert!((l - trap).abs() < 1e-8, "{l} vs {trap}");
        assert_relative_eq!(l, 0.618_333_684_257_227_1, max_relative = 1e-10);
    }

    #[test]
    fn thermo_length_rejects_degenerate_model() {
        let m = ThermalModel::spectrum(vec![EnergyLevel::new(1.0, 3)]).unwrap();
        assert!(matches!(
            thermo_length(&m, 0.5, 1.0, 1e-10),
            Err(Error::Degenerate(_))
        ));
        assert!(thermo_length(&two_level(), 2.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn truncated_oscillator_agrees_with_closed_form() {
        let eps = 1e-12;
        let trunc = truncate_oscillator(1.0, 0.5, eps).unwrap();
        let osc = ThermalModel::oscillator(1.0).unwrap();
        for beta in [0.5, 0.8, 1.0, 3.0, 20.0] {
            let d = log_partition(&trunc, beta).unwrap() - log_partition(&osc, beta).unwrap();
            assert!(d.abs() < 2.0 * eps, "beta {beta}: {d}");
        }
    }
}
