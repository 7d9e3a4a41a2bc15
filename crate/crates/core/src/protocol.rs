//! Protocol parameters shared by averaging, trajectories and steady states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CouplingForm;

/// How the coupling direction is chosen each iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AxisMode {
    /// Uniform over the sphere, shared by all sites within an iteration.
    RandomHaar,
    FixedAxis { theta: f64, phi: f64 },
    /// One of the qubit coupling forms; no direction is sampled.
    Form { form: CouplingForm },
}

/// How the average over coupling samples is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AveragingScheme {
    /// Product rule: Gauss–Legendre in `cos θ`, uniform `φ`, composite
    /// Gauss–Legendre in `ω_M` with `n_omega` nodes on each of `omega_panels`
    /// panels. `omega_panels = 0` picks panels of width at most `2π/t_M`.
    Quadrature {
        n_cos_theta: usize,
        n_phi: usize,
        n_omega: usize,
        #[serde(default)]
        omega_panels: usize,
    },
    MonteCarlo { n_samples: usize, seed: u64 },
}

impl Default for AveragingScheme {
    fn default() -> Self {
        AveragingScheme::Quadrature { n_cos_theta: 16, n_phi: 16, n_omega: 32, omega_panels: 0 }
    }
}

/// Initial system state for trajectories.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    MaximallyMixed,
    Ground,
    /// Projector onto the highest eigenvalue's eigenspace.
    Excited,
    /// Computational basis state.
    Basis { index: usize },
}

/// The protocol vector: coupling strength, interaction time, sampling of
/// `(axis, ω_M)`, meter temperature and run length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub gamma: f64,
    pub t_m: f64,
    pub omega_window: (f64, f64),
    pub axis_mode: AxisMode,
    #[serde(default = "infinite", with = "beta_serde")]
    pub meter_beta: f64,
    pub n_iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub record_substeps: usize,
    #[serde(default)]
    pub averaging: AveragingScheme,
    #[serde(default)]
    pub initial_state: InitialState,
}

fn infinite() -> f64 {
    f64::INFINITY
}

/// `∞` is written as the string `"inf"`.
pub(crate) mod beta_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Beta {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Beta::deserialize(d)? {
            Beta::Num(x) => Ok(x),
            Beta::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
            Beta::Text(t) => Err(serde::de::Error::custom(format!("bad meter_beta {t:?}"))),
        }
    }
}

impl ProtocolConfig {
    /// Random axes, ground-state meters, default quadrature.
    pub fn new(gamma: f64, t_m: f64, omega_window: (f64, f64)) -> Self {
        Self {
            gamma,
            t_m,
            omega_window,
            axis_mode: AxisMode::RandomHaar,
            meter_beta: f64::INFINITY,
            n_iterations: 1,
            seed: 0,
            record_substeps: 0,
            averaging: AveragingScheme::default(),
            initial_state: InitialState::MaximallyMixed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return bad(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if !(self.t_m > 0.0) || !self.t_m.is_finite() {
            return bad(format!("t_m must be finite and > 0, got {}", self.t_m));
        }
        let (lo, hi) = self.omega_window;
        if !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
            return bad(format!("omega_window must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"));
        }
        if self.meter_beta.is_nan() || self.meter_beta < 0.0 {
            return bad(format!("meter_beta must be >= 0, got {}", self.meter_beta));
        }
        if self.n_iterations == 0 {
            return bad("n_iterations must be >= 1".into());
        }
        match self.averaging {
            AveragingScheme::Quadrature { n_cos_theta, n_phi, n_omega, .. } => {
                if n_cos_theta == 0 || n_phi == 0 || n_omega == 0 {
                    return Err(Error::EmptyScheme);
                }
            }
            AveragingScheme::MonteCarlo { n_samples, .. } => {
                if n_samples == 0 {
                    return Err(Error::EmptyScheme);
                }
            }
        }
        Ok(())
    }
}
