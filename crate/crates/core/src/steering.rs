//! Lindblad evolution for the continuous steering limit, integrated with
//! fixed-step RK4.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::embed;
use crate::operator::{eig_hermitian, expect, sigma_minus, DensityMatrix, Operator, C64};
use crate::trajectory::TrajectoryRecord;

/// Trace drift allowed in a single step before the step is rejected.
pub const MAX_STEP_DRIFT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct LindbladSpec {
    pub h_s: Operator,
    pub jumps: Vec<Operator>,
    pub kappa: f64,
    pub t_final: f64,
    /// Requested step; the integrator uses `t_final / round(t_final / dt)`.
    pub dt: f64,
    /// Record every `record_every` steps (0 or 1 records every step).
    pub record_every: usize,
}

impl LindbladSpec {
    pub fn new(h_s: Operator, jumps: Vec<Operator>, kappa: f64, t_final: f64, dt: f64) -> Self {
        Self { h_s, jumps, kappa, t_final, dt, record_every: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.dt <= self.t_final) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dt <= t_final, got dt = {}, t_final = {}",
                self.dt, self.t_final
            )));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        let d = self.h_s.dim();
        if !self.h_s.is_hermitian(crate::numeric::policy().hermitian_tol) {
            return Err(Error::NotHermitian { deviation: self.h_s.hermitian_deviation() });
        }
        for l in &self.jumps {
            if l.dim() != d {
                return Err(Error::DimMismatch { expected: d, found: l.dim() });
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }
}

/// `σ_−` on every site of an `n`-site register.
pub fn lowering_jumps(n: usize) -> Vec<Operator> {
    (0..n).map(|i| embed(&sigma_minus(), i, n)).collect()
}

#[derive(Clone, Debug)]
pub struct LindbladRun {
    pub record: TrajectoryRecord,
    pub final_state: DensityMatrix,
    /// Largest trace drift removed by renormalization in one step.
    pub max_step_drift: f64,
    /// Sum of per-step drifts.
    pub total_drift: f64,
}

struct Generator {
    h_eff: Array2<C64>,
    jumps: Vec<(Array2<C64>, Array2<C64>)>,
    kappa: f64,
}

impl Generator {
    fn new(spec: &LindbladSpec) -> Self {
        let i = C64::new(0.0, 1.0);
        let mut h_eff = spec.h_s.matrix().clone();
        let mut jumps = Vec::new();
        for l in &spec.jumps {
            let ld = l.matrix().t().mapv(|z| z.conj());
            h_eff = h_eff - ld.dot(l.matrix()).mapv(|z| z * i * (0.5 * spec.kappa));
            jumps.push((l.matrix().clone(), ld));
        }
        Self { h_eff, jumps, kappa: spec.kappa }
    }

    fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let i = C64::new(0.0, 1.0);
        let a = self.h_eff.dot(rho);
        // −i(H_eff ρ − ρ H_eff†) = −i(A − A†) with A = H_eff ρ for Hermitian ρ
        let mut out = (&a - &a.t().mapv(|z| z.conj())).mapv(|z| -i * z);
        for (l, ld) in &self.jumps {
            out = out + l.dot(rho).dot(ld).mapv(|z| z * self.kappa);
        }
        out
    }
}

/// Integrates `dρ/dt = −i[H, ρ] + κ Σ (L ρ L† − ½{L†L, ρ})` from `rho0`.
pub fn lindblad_evolve(spec: &LindbladSpec, rho0: &DensityMatrix) -> Result<TrajectoryRecord> {
    lindblad_run(spec, rho0).map(|r| r.record)
}

/// As [`lindblad_evolve`], also returning the final state and drift report.
pub fn lindblad_run(spec: &LindbladSpec, rho0: &DensityMatrix) -> Result<LindbladRun> {
    spec.validate()?;
    if rho0.dim() != spec.h_s.dim() {
        return Err(Error::DimMismatch { expected: spec.h_s.dim(), found: rho0.dim() });
    }
    let gen = Generator::new(spec);
    let n = spec.n_steps();
    let dt = spec.t_final / n as f64;
    let every = spec.record_every.max(1);
    let dims = rho0.subsystem_dims().to_vec();
    let ground = {
        let s = eig_hermitian(&spec.h_s)?;
        s.ground_projector(s.degeneracy_tol())
    };

    let mut rho = rho0.matrix().clone();
    let mut rec = TrajectoryRecord {
        times: vec![0.0],
        energies: vec![expect(&spec.h_s, rho0)?],
        fidelities: vec![expect(&ground, rho0)?],
        samples_used: Vec::new(),
        strobe_indices: vec![0],
    };
    let (mut max_drift, mut total) = (0.0f64, 0.0);
    let h = C64::new(dt, 0.0);
    for step in 1..=n {
        let k1 = gen.apply(&rho);
        let k2 = gen.apply(&(&rho + &k1.mapv(|z| z * h * 0.5)));
        let k3 = gen.apply(&(&rho + &k2.mapv(|z| z * h * 0.5)));
        let k4 = gen.apply(&(&rho + &k3.mapv(|z| z * h)));
        let inc = (k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * h / 6.0);
        let next = &rho + &inc;
        let tr = next.diag().sum();
        let drift = (tr.re - 1.0).abs().max(tr.im.abs());
        // an unstable step keeps the trace but inflates the state
        let frob = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let blowup = (frob - 1.0).max(0.0);
        if !(drift <= MAX_STEP_DRIFT) || !(blowup <= MAX_STEP_DRIFT) {
            return Err(Error::StepTooLarge { drift: drift.max(blowup) });
        }
        max_drift = max_drift.max(drift);
        total += drift;
        rho = next.mapv(|z| z / tr.re);
        // restore exact Hermiticity lost to rounding
        rho = (&rho + &rho.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        if step % every == 0 || step == n {
            let state = DensityMatrix::from_map_output(Operator::from_parts(rho.clone(), dims.clone()));
            rec.times.push(step as f64 * dt);
            rec.energies.push(expect(&spec.h_s, &state)?);
            rec.fidelities.push(expect(&ground, &state)?.clamp(0.0, 1.0));
            rec.strobe_indices.push(rec.times.len() - 1);
        }
    }
    Ok(LindbladRun {
        record: rec,
        final_state: DensityMatrix::from_map_output(Operator::from_parts(rho, dims)),
        max_step_drift: max_drift,
        total_drift: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{identity2, sigma_x, sigma_z};
    use approx::assert_abs_diff_eq;

    fn excited() -> DensityMatrix {
        DensityMatrix::basis(vec![2], 0).unwrap()
    }

    #[test]
    fn amplitude_damping_decay() {
        let kappa = 0.4;
        let mut spec = LindbladSpec::new(Operator::zeros(2), vec![sigma_minus()], kappa, 5.0 / kappa, 1e-3 / kappa);
        spec.record_every = 500;
        let run = lindblad_run(&spec, &excited()).unwrap();
        let p_up = Operator::diag(&[1.0, 0.0]);
        let p = expect(&p_up, &run.final_state).unwrap();
        assert_abs_diff_eq!(p, (-5.0f64).exp(), epsilon = 1e-6);
        assert!(run.max_step_drift < 1e-12);
    }

    #[test]
    fn identity_jump_is_inert() {
        let h = sigma_x().scale_real(0.5);
        let plus_z = excited();
        let with = LindbladSpec::new(h.clone(), vec![identity2()], 2.0, 3.0, 1e-2);
        let without = LindbladSpec::new(h, vec![], 0.0, 3.0, 1e-2);
        let a = lindblad_run(&with, &plus_z).unwrap().final_state;
        let b = lindblad_run(&without, &plus_z).unwrap().final_state;
        assert!(a.trace_distance(&b).unwrap() < 1e-10);
    }

    #[test]
    fn dark_state_is_reached() {
        let mut spec = LindbladSpec::new(sigma_z().scale_real(0.5), vec![sigma_minus()], 0.1, 200.0, 0.05);
        spec.record_every = 100;
        let run = lindblad_run(&spec, &DensityMatrix::maximally_mixed(vec![2])).unwrap();
        let down = DensityMatrix::basis(vec![2], 1).unwrap();
        assert!(run.final_state.trace_distance(&down).unwrap() < 1e-6);
        assert_abs_diff_eq!(*run.record.energies.last().unwrap(), -0.5, epsilon = 1e-6);
    }

    #[test]
    fn huge_step_is_rejected() {
        let spec = LindbladSpec::new(sigma_z().scale_real(50.0), vec![sigma_minus()], 50.0, 10.0, 1.0);
        assert!(matches!(lindblad_run(&spec, &excited()), Err(Error::StepTooLarge { .. })));
        assert!(LindbladSpec::new(sigma_z(), vec![], 1.0, 1.0, 2.0).validate().is_err());
    }
}
