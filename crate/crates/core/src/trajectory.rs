//! Stochastic realizations of the protocol: a fresh coupling sample every
//! iteration.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{kraus_from_spectrum, meter_populations};
use crate::error::{Error, Result};
use crate::model::{build_coupling, build_system, joint_parts_from, occupation, CouplingForm, CouplingSample, SystemSpec};
use crate::operator::{eig_hermitian, expect, DensityMatrix, Operator, Spectrum, C64};
use crate::protocol::{AxisMode, InitialState, ProtocolConfig};
use crate::rng;

pub use crate::protocol::ProtocolConfig as Config;

/// The coupling sample drawn for one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleLog {
    pub theta: f64,
    pub phi: f64,
    pub omega_m: f64,
}

/// Energy and ground-state fidelity along one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub samples_used: Vec<SampleLog>,
    /// Indices into `times` of `t = n·t_M`, starting with `n = 0`.
    pub strobe_indices: Vec<usize>,
}

impl TrajectoryRecord {
    /// Energies at `t = n·t_M`.
    pub fn stroboscopic_energies(&self) -> Vec<f64> {
        self.strobe_indices.iter().map(|&k| self.energies[k]).collect()
    }
}

/// Per-time ensemble statistics of the energy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleRecord {
    pub times: Vec<f64>,
    pub mean_energy: Vec<f64>,
    /// Sample variance (divisor `n − 1`).
    pub variance: Vec<f64>,
    pub mean_fidelity: Vec<f64>,
    pub n_traj: usize,
    pub strobe_indices: Vec<usize>,
}

impl EnsembleRecord {
    /// Standard error of the mean at each time.
    pub fn stderr(&self) -> Vec<f64> {
        self.variance.iter().map(|v| (v / self.n_traj as f64).sqrt()).collect()
    }

    pub fn stroboscopic_mean(&self) -> Vec<f64> {
        self.strobe_indices.iter().map(|&k| self.mean_energy[k]).collect()
    }
}

/// Initial system state requested by a configuration.
pub fn initial_state(h_s: &Operator, which: InitialState) -> Result<DensityMatrix> {
    let dims = h_s.subsystem_dims().to_vec();
    match which {
        InitialState::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(dims)),
        InitialState::Ground => DensityMatrix::ground_state(h_s),
        InitialState::Excited => {
            let rho = DensityMatrix::ground_state(&h_s.scale_real(-1.0))?;
            DensityMatrix::new(rho.operator().clone().with_dims(dims)?)
        }
        InitialState::Basis { index } => DensityMatrix::basis(dims, index),
    }
}

/// Draws the sample of `iteration` in trajectory `traj`.
pub fn draw_sample(cfg: &ProtocolConfig, traj: u64, iteration: u64) -> SampleLog {
    let mut r = rng::stream(cfg.seed, traj, iteration);
    let (theta, phi) = match cfg.axis_mode {
        AxisMode::RandomHaar => rng::haar_axis(&mut r),
        AxisMode::FixedAxis { theta, phi } => (theta, phi),
        AxisMode::Form { .. } => (0.0, 0.0),
    };
    let omega_m = rng::uniform(&mut r, cfg.omega_window.0, cfg.omega_window.1);
    SampleLog { theta, phi, omega_m }
}

fn apply_kraus(kraus: &[Array2<C64>], rho: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::<C64>::zeros(rho.dim());
    for k in kraus {
        let kd = k.t().mapv(|z| z.conj());
        out = out + k.dot(rho).dot(&kd);
    }
    out
}

/// One trajectory with index 0.
pub fn run_trajectory(spec: &SystemSpec, cfg: &ProtocolConfig) -> Result<TrajectoryRecord> {
    run_trajectory_indexed(spec, cfg, 0)
}

/// One trajectory drawing from the streams of trajectory `traj`.
pub fn run_trajectory_indexed(spec: &SystemSpec, cfg: &ProtocolConfig, traj: u64) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let h_s = build_system(spec)?;
    let form = match cfg.axis_mode {
        AxisMode::Form { form } => form,
        _ => CouplingForm::AxisTensorTauX,
    };
    let n = spec.n_sites();
    let d = spec.dim();
    let dims = h_s.subsystem_dims().to_vec();
    let ground = {
        let s = eig_hermitian(&h_s)?;
        s.ground_projector(s.degeneracy_tol())
    };
    let mut rho = initial_state(&h_s, cfg.initial_state)?;
    let substeps = cfg.record_substeps.max(1);

    let mut rec = TrajectoryRecord {
        times: vec![0.0],
        energies: vec![expect(&h_s, &rho)?],
        fidelities: vec![expect(&ground, &rho)?.clamp(0.0, 1.0)],
        samples_used: Vec::with_capacity(cfg.n_iterations),
        strobe_indices: vec![0],
    };
    // reuse the joint parts while the axis does not change
    let mut cached: Option<((u64, u64), crate::model::JointHamiltonian)> = None;
    for it in 0..cfg.n_iterations {
        let s = draw_sample(cfg, traj, it as u64);
        rec.samples_used.push(s);
        let key = (s.theta.to_bits(), s.phi.to_bits());
        if cached.as_ref().map(|c| c.0) != Some(key) {
            let sample = CouplingSample { gamma: cfg.gamma, axes: vec![(s.theta, s.phi)], omega_m: s.omega_m, form };
            cached = Some((key, joint_parts_from(&h_s, build_coupling(spec, &sample)?, n)));
        }
        let parts = &cached.as_ref().expect("just set").1;
        let spectrum: Spectrum = eig_hermitian(&parts.at(s.omega_m))?;
        let pops = meter_populations(n, occupation(cfg.meter_beta, s.omega_m));
        let t0 = it as f64 * cfg.t_m;
        let mut next = None;
        for k in 1..=substeps {
            let tau = cfg.t_m * k as f64 / substeps as f64;
            let kraus = kraus_from_spectrum(&spectrum, tau, d, n, &pops);
            let out = DensityMatrix::from_map_output(Operator::from_parts(apply_kraus(&kraus, rho.matrix()), dims.clone()));
            rec.times.push(t0 + tau);
            rec.energies.push(expect(&h_s, &out)?);
            rec.fidelities.push(expect(&ground, &out)?.clamp(0.0, 1.0));
            if k == substeps {
                next = Some(out);
            }
        }
        rho = next.expect("at least one substep");
        rec.strobe_indices.push(rec.times.len() - 1);
    }
    Ok(rec)
}

/// `n_traj` independent trajectories with keys `(seed, k)`, run concurrently.
pub fn run_ensemble(spec: &SystemSpec, cfg: &ProtocolConfig, n_traj: usize) -> Result<EnsembleRecord> {
    if n_traj < 2 {
        return Err(Error::InvalidParameter(format!("ensemble needs n_traj >= 2, got {n_traj}")));
    }
    let runs: Vec<TrajectoryRecord> = (0..n_traj as u64)
        .into_par_iter()
        .map(|k| run_trajectory_indexed(spec, cfg, k))
        .collect::<Result<_>>()?;
    let len = runs[0].times.len();
    let nf = n_traj as f64;
    let mut mean = vec![0.0; len];
    let mut fid = vec![0.0; len];
    for r in &runs {
        for t in 0..len {
            mean[t] += r.energies[t];
            fid[t] += r.fidelities[t];
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    fid.iter_mut().for_each(|m| *m /= nf);
    let mut var = vec![0.0; len];
    for r in &runs {
        for t in 0..len {
            var[t] += (r.energies[t] - mean[t]).powi(2);
        }
    }
    var.iter_mut().for_each(|v| *v /= nf - 1.0);
    Ok(EnsembleRecord {
        times: runs[0].times.clone(),
        mean_energy: mean,
        variance: var,
        mean_fidelity: fid,
        n_traj,
        strobe_indices: runs[0].strobe_indices.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn co_cfg(omega_m: f64, n: usize) -> ProtocolConfig {
        ProtocolConfig {
            axis_mode: AxisMode::Form { form: CouplingForm::CoRotating },
            n_iterations: n,
            initial_state: InitialState::Excited,
            ..ProtocolConfig::new(0.1, 20.0, (omega_m, omega_m))
        }
    }

    #[test]
    fn co_rotating_cools_monotonically() {
        let rec = run_trajectory(&SystemSpec::qubit(1.0), &co_cfg(1.0, 50)).unwrap();
        let e = rec.stroboscopic_energies();
        assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert_abs_diff_eq!(*e.last().unwrap(), -0.5, epsilon = 1e-6);
    }

    #[test]
    fn co_rotating_heats_inverted_qubit() {
        let mut cfg = co_cfg(1.0, 30);
        cfg.initial_state = InitialState::Ground;
        let e = run_trajectory(&SystemSpec::qubit(-1.0), &cfg).unwrap().stroboscopic_energies();
        assert!(e.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(e.last().unwrap() > e.first().unwrap());
    }

    #[test]
    fn zero_coupling_keeps_energy() {
        let mut cfg = ProtocolConfig::new(0.0, 5.0, (0.1, 3.0));
        cfg.n_iterations = 10;
        cfg.initial_state = InitialState::Basis { index: 0 };
        cfg.record_substeps = 3;
        let rec = run_trajectory(&SystemSpec::Qubit { omega_s: 1.0, axis: (0.7, 0.2) }, &cfg).unwrap();
        assert_eq!(rec.times.len(), 31);
        assert_eq!(rec.strobe_indices.len(), 11);
        for e in &rec.energies {
            assert_abs_diff_eq!(*e, rec.energies[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn trajectories_are_reproducible() {
        let mut cfg = ProtocolConfig::new(0.2, 7.0, (0.1, 3.0));
        cfg.n_iterations = 12;
        cfg.seed = 99;
        let a = run_trajectory(&SystemSpec::qubit(1.0), &cfg).unwrap();
        let b = run_trajectory(&SystemSpec::qubit(1.0), &cfg).unwrap();
        assert_eq!(a, b);
        let c = run_trajectory_indexed(&SystemSpec::qubit(1.0), &cfg, 1).unwrap();
        assert_ne!(a.samples_used, c.samples_used);
    }

    #[test]
    fn fixed_ensemble_has_zero_variance() {
        let mut cfg = ProtocolConfig::new(0.2, 7.0, (0.8, 0.8));
        cfg.axis_mode = AxisMode::FixedAxis { theta: 1.0, phi: 0.3 };
        cfg.n_iterations = 5;
        let ens = run_ensemble(&SystemSpec::qubit(1.0), &cfg, 2).unwrap();
        assert!(ens.variance.iter().all(|v| *v == 0.0));
        assert!(run_ensemble(&SystemSpec::qubit(1.0), &cfg, 1).is_err());
    }
}
