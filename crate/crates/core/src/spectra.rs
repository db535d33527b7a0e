//! Thermal models: explicit finite spectra and closed-form families.
//!
//! Units follow `k_B = 1` with `ħ` absorbed into the oscillator frequency,
//! so every frequency parameter is an energy `ħω`.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One energy eigenvalue together with its degeneracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    #[serde(rename = "e")]
    pub energy: f64,
    #[serde(rename = "g", default = "one")]
    pub degeneracy: u64,
}

fn one() -> u64 {
    1
}

impl EnergyLevel {
    pub fn new(energy: f64, degeneracy: u64) -> Self {
        Self { energy, degeneracy }
    }
}

/// A validated finite spectrum: nonempty, sorted ascending, with equal
/// energies merged into a single level carrying the summed degeneracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<EnergyLevel>);

impl Spectrum {
    pub fn new(mut levels: Vec<EnergyLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidModel("empty spectrum".into()));
        }
        for level in &levels {
            if !level.energy.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "non-finite energy {}",
                    level.energy
                )));
            }
            if level.degeneracy == 0 {
                return Err(Error::InvalidModel(format!(
                    "level at energy {} has zero degeneracy",
                    level.energy
                )));
            }
        }
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        let mut merged: Vec<EnergyLevel> = Vec::with_capacity(levels.len());
        for level in levels {
            match merged.last_mut() {
                Some(last) if last.energy == level.energy => {
                    last.degeneracy =
                        last.degeneracy
                            .checked_add(level.degeneracy)
                            .ok_or_else(|| {
                                Error::InvalidModel("degeneracy overflow while merging".into())
                            })?;
                }
                _ => merged.push(level),
            }
        }
        Ok(Self(merged))
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.0
    }

    pub fn ground_energy(&self) -> f64 {
        self.0[0].energy
    }

    pub fn total_degeneracy(&self) -> f64 {
        self.0.iter().map(|l| l.degeneracy as f64).sum()
    }
}

/// A source of `ln Z(β)` and its derivatives.
///
/// Build through [`build_model`] or the checked constructors; the
/// numerical routines assume the invariants those enforce.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ThermalModel {
    FiniteSpectrum {
        levels: Spectrum,
    },
    TwoLevel {
        gap: f64,
    },
    Oscillator {
        omega: f64,
    },
    OscillatorBank {
        omegas: Vec<f64>,
    },
    /// `f` classical quadratic degrees of freedom, `H = Σ ½κ_i ξ_i²`.
    /// The phase-space normalisation is fixed so that `ln Z = (f/2) ln T`;
    /// the entropy is therefore defined up to an additive constant.
    ClassicalQuadratic {
        dof: u32,
    },
    /// Three translational quadratic degrees of freedom plus a rotational
    /// and a vibrational mode, each activated like an oscillator whose
    /// quantum is the corresponding threshold temperature.
    DiatomicStaircase {
        t_rot: f64,
        t_vib: f64,
    },
}

/// Serialised form of a model, as read from a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    TwoLevel { gap: f64 },
    Oscillator { omega: f64 },
    OscillatorBank { omegas: Vec<f64> },
    Classical { dof: u32 },
    Diatomic { t_rot: f64, t_vib: f64 },
    Spectrum { levels: Vec<EnergyLevel> },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Parses a model file and validates it in one step.
pub fn parse_model(text: &str) -> Result<ThermalModel> {
    build_model(ModelSpec::from_json(text)?)
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

pub fn build_model(spec: ModelSpec) -> Result<ThermalModel> {
    match spec {
        ModelSpec::TwoLevel { gap } => ThermalModel::two_level(gap),
        ModelSpec::Oscillator { omega } => ThermalModel::oscillator(omega),
        ModelSpec::OscillatorBank { omegas } => ThermalModel::oscillator_bank(omegas),
        ModelSpec::Classical { dof } => ThermalModel::classical(dof),
        ModelSpec::Diatomic { t_rot, t_vib } => ThermalModel::diatomic(t_rot, t_vib),
        ModelSpec::Spectrum { levels } => ThermalModel::spectrum(levels),
    }
}

impl ThermalModel {
    pub fn spectrum(levels: Vec<EnergyLevel>) -> Result<Self> {
        Ok(Self::FiniteSpectrum {
            levels: Spectrum::new(levels)?,
        })
    }

    pub fn two_level(gap: f64) -> Result<Self> {
        check_positive("gap", gap)?;
        Ok(Self::TwoLevel { gap })
    }

    pub fn oscillator(omega: f64) -> Result<Self> {
        check_positive("omega", omega)?;
        Ok(Self::Oscillator { omega })
    }

    pub fn oscillator_bank(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidModel("oscillator bank has no modes".into()));
        }
        for &w in &omegas {
            check_positive("omega", w)?;
        }
        Ok(Self::OscillatorBank { omegas })
    }

    pub fn classical(dof: u32) -> Result<Self> {
        if dof == 0 {
            return Err(Error::InvalidModel(
                "classical model needs at least one degree of freedom".into(),
            ));
        }
        Ok(Self::ClassicalQuadratic { dof })
    }

    pub fn diatomic(t_rot: f64, t_vib: f64) -> Result<Self> {
        check_positive("t_rot", t_rot)?;
        check_positive("t_vib", t_vib)?;
        if t_rot >= t_vib {
            return Err(Error::InvalidModel(format!(
                "rotational threshold {t_rot} must lie below vibrational threshold {t_vib}"
            )));
        }
        Ok(Self::DiatomicStaircase { t_rot, t_vib })
    }

    /// The finite level list, if the model has one.
    pub fn levels(&self) -> Option<Cow<'_, [EnergyLevel]>> {
        match self {
            Self::FiniteSpectrum { levels } => Some(Cow::Borrowed(levels.levels())),
            Self::TwoLevel { gap } => Some(Cow::Owned(vec![
                EnergyLevel::new(0.0, 1),
                EnergyLevel::new(*gap, 1),
            ])),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::FiniteSpectrum { .. } | Self::TwoLevel { .. })
    }

    /// Whether the energy can fluctuate at all, i.e. `C_v > 0` for some β.
    pub fn has_fluctuations(&self) -> bool {
        match self {
            Self::FiniteSpectrum { levels } => levels.levels().len() >= 2,
            _ => true,
        }
    }

    /// Lowest energy of the model (the β → ∞ limit of `U`).
    pub fn ground_energy(&self) -> f64 {
        match self {
            Self::FiniteSpectrum { levels } => levels.ground_energy(),
            Self::TwoLevel { .. } | Self::ClassicalQuadratic { .. } => 0.0,
            Self::Oscillator { omega } => 0.5 * omega,
            Self::OscillatorBank { omegas } => 0.5 * omegas.iter().sum::<f64>(),
            Self::DiatomicStaircase { t_rot, t_vib } => 0.5 * (t_rot + t_vib),
        }
    }

    /// Mean energy in the β → 0⁺ limit; infinite for unbounded spectra.
    pub fn infinite_temperature_energy(&self) -> f64 {
        match self {
            Self::FiniteSpectrum { levels } => {
                let e0 = levels.ground_energy();
                let g: f64 = levels.total_degeneracy();
                let shifted: f64 = levels
                    .levels()
                    .iter()
                    .map(|l| l.degeneracy as f64 * (l.energy - e0))
                    .sum();
                e0 + shifted / g
            }
            Self::TwoLevel { gap } => 0.5 * gap,
            _ => f64::INFINITY,
        }
    }

    /// A characteristic energy, used to scale solver brackets and tolerances.
    pub fn energy_scale(&self) -> f64 {
        match self {
            Self::FiniteSpectrum { levels } => {
                let l = levels.levels();
                let span = l[l.len() - 1].energy - l[0].energy;
                if span > 0.0 {
                    span
                } else {
                    1.0
                }
            }
            Self::TwoLevel { gap } => *gap,
            Self::Oscillator { omega } => *omega,
            Self::OscillatorBank { omegas } => omegas.iter().cloned().fold(0.0, f64::max),
            Self::ClassicalQuadratic { .. } => 1.0,
            Self::DiatomicStaircase { t_vib, .. } => *t_vib,
        }
    }
}

/// Finite truncation `{(n + ½)ω : n = 0..=N}` of the oscillator ladder.
///
/// The dropped tail carries Boltzmann weight `e^{-β(N+1)ω}·Z`, so choosing
/// `N + 1 > -ln ε / (β_min ω)` keeps it below `ε·Z` for every `β ≥ β_min`.
pub fn truncate_oscillator(omega: f64, beta_min: f64, eps: f64) -> Result<ThermalModel> {
    check_positive("omega", omega)?;
    if !(beta_min.is_finite() && beta_min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cannot truncate an unbounded spectrum at beta_min = {beta_min}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation tolerance must lie in (0, 1), got {eps}"
        )));
    }
    let top = (-eps.ln() / (beta_min * omega)).ceil() + 1.0;
    if top > 1e7 {
        return Err(Error::InvalidArgument(format!(
            "truncation would need {top} levels; raise beta_min or eps"
        )));
    }
    let top = top as u64;
    let levels = (0..=top)
        .map(|n| EnergyLevel::new((n as f64 + 0.5) * omega, 1))
        .collect();
    ThermalModel::spectrum(levels)
}

/// Number of levels kept by [`truncate_oscillator`] minus one.
pub fn truncation_order(model: &ThermalModel) -> Option<usize> {
    model.levels().map(|l| l.len() - 1)
}
