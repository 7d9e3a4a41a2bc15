//! Fixed points of one-iteration maps and ground-space diagnostics.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, Solve};
use serde::Serialize;

use crate::channel::{average_channel, trace_functional_residual, unvectorize, vectorize, Channel, Normalization};
use crate::error::{Error, Result};
use crate::model::build_system;
use crate::numeric;
use crate::operator::{adjoint_matrix, eig_hermitian, expect, trace_norm, DensityMatrix, Operator, C64, ONE};
use crate::protocol::ProtocolConfig;
use crate::model::SystemSpec;

/// Above this superoperator size the fixed point is found by power iteration.
const DENSE_LIMIT: usize = 4096;

/// Eigenvalues within this distance of one span the fixed space.
const UNIT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    /// `(S − I + vec(I/D) tr)x = vec(I/D)`.
    LinearSolve,
    /// Energy-minimal state in a degenerate fixed space.
    FixedSpaceProjection,
    /// Cesàro-averaged power iteration from `I/D`.
    PowerIteration,
    /// Dominant eigenvector of a renormalized map.
    DominantEigenvector,
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho_inf: DensityMatrix,
    pub energy: f64,
    /// `‖V̄ρ − ρ‖₁`.
    pub residual: f64,
    pub iterations: usize,
    pub fixed_space_dim: usize,
    /// Largest modulus among eigenvalues outside the fixed space; NaN when not computed.
    pub subdominant_modulus: f64,
    /// `fixed_space_dim > 1`.
    pub degenerate: bool,
    pub method: FixedPointMethod,
}

/// Stroboscopic steady state of `ch`, with `h_s` supplying the energy.
pub fn fixed_point(ch: &Channel, h_s: &Operator, tol: f64, max_iter: usize) -> Result<SteadyStateResult> {
    let d = ch.dim();
    if h_s.dim() != d {
        return Err(Error::DimMismatch { expected: d, found: h_s.dim() });
    }
    let s = ch.superop();
    if ch.normalization() == Normalization::Linear {
        let tp = trace_functional_residual(s, d);
        if tp > numeric::policy().tp_tol {
            return Err(Error::NotTracePreserving { residual: tp });
        }
    }
    let (rho, iterations, fixed_space_dim, subdominant, method) = if d * d <= DENSE_LIMIT {
        dense_fixed_point(ch, h_s, tol, max_iter)?
    } else {
        let (rho, it) = power_fixed_point(ch, tol, max_iter)?;
        (rho, it, 1, f64::NAN, FixedPointMethod::PowerIteration)
    };
    let rho = DensityMatrix::from_map_output(rho);
    let residual = residual_of(ch, &rho)?;
    if !(residual <= tol) {
        return Err(Error::NoConvergence { max_iter, residual });
    }
    let energy = expect(h_s, &rho)?;
    Ok(SteadyStateResult {
        rho_inf: rho,
        energy,
        residual,
        iterations,
        fixed_space_dim,
        subdominant_modulus: subdominant,
        degenerate: fixed_space_dim > 1,
        method,
    })
}

/// Default tolerance and iteration cap.
pub fn fixed_point_default(ch: &Channel, h_s: &Operator) -> Result<SteadyStateResult> {
    fixed_point(ch, h_s, 1e-10, 1_000_000)
}

fn residual_of(ch: &Channel, rho: &DensityMatrix) -> Result<f64> {
    let out = ch.apply(rho)?;
    trace_norm(&(out.operator() - rho.operator()))
}

type DenseOutcome = (Operator, usize, usize, f64, FixedPointMethod);

fn dense_fixed_point(ch: &Channel, h_s: &Operator, tol: f64, max_iter: usize) -> Result<DenseOutcome> {
    let d = ch.dim();
    let s = ch.superop();
    let (vals, vecs) = s.eig()?;
    let dims = h_s.subsystem_dims().to_vec();

    if ch.normalization() == Normalization::Renormalized {
        let k = (0..vals.len())
            .max_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re))
            .expect("non-empty spectrum");
        let v = vecs.column(k).to_owned();
        let m = unvectorize(&v, d);
        let tr: C64 = m.diag().sum();
        let rho = Operator::from_parts(m.mapv(|z| z / tr), dims);
        let sub = (0..vals.len()).filter(|&j| j != k).map(|j| vals[j].norm()).fold(0.0, f64::max);
        return Ok((rho, 0, 1, sub / vals[k].norm(), FixedPointMethod::DominantEigenvector));
    }

    let unit: Vec<usize> = (0..vals.len()).filter(|&k| (vals[k] - ONE).norm() <= UNIT_TOL).collect();
    let subdominant = (0..vals.len())
        .filter(|k| !unit.contains(k))
        .map(|k| vals[k].norm())
        .fold(0.0, f64::max);
    let fixed_dim = unit.len().max(1);

    if unit.len() <= 1 {
        let (rho, it) = solve_unique(s, d, tol, max_iter, &dims)?;
        return Ok((rho, it, fixed_dim, subdominant, FixedPointMethod::LinearSolve));
    }

    // P = R_fixed · (V⁻¹)_fixed
    let vinv = vecs.inv()?;
    let n = vals.len();
    let mut p = Array2::<C64>::zeros((n, n));
    for &k in &unit {
        let r = vecs.column(k);
        let l = vinv.row(k);
        for i in 0..n {
            if r[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                p[(i, j)] += r[i] * l[j];
            }
        }
    }
    // ground vector of P†(H_S), pushed back into the fixed space
    let ph = adjoint_matrix(&p).dot(&vectorize(h_s.matrix()));
    let ph = Operator::from_parts(unvectorize(&ph, d), dims.clone()).hermitian_part();
    let spec = eig_hermitian(&ph)?;
    let psi = spec.eigenvectors.matrix().column(0).to_owned();
    let pure = Operator::outer(&psi);
    let rho = unvectorize(&p.dot(&vectorize(pure.matrix())), d);
    Ok((Operator::from_parts(rho, dims), 0, fixed_dim, subdominant, FixedPointMethod::FixedSpaceProjection))
}

fn solve_unique(s: &Array2<C64>, d: usize, tol: f64, max_iter: usize, dims: &[usize]) -> Result<(Operator, usize)> {
    let n = d * d;
    let u = vectorize(&Array2::<C64>::eye(d).mapv(|z| z / d as f64));
    let mut m = s - &Array2::<C64>::eye(n);
    for i in 0..n {
        for a in 0..d {
            m[(i, a + d * a)] += u[i];
        }
    }
    let mut x = m.solve(&u)?;
    let mut iterations = 0;
    // iterative refinement against round-off on ill-conditioned systems
    while iterations < max_iter.min(5) {
        let r: Array1<C64> = &u - &m.dot(&x);
        let rn = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if rn <= tol * 1e-3 {
            break;
        }
        x = &x + &m.solve(&r)?;
        iterations += 1;
    }
    Ok((Operator::from_parts(unvectorize(&x, d), dims.to_vec()), iterations))
}

fn power_fixed_point(ch: &Channel, tol: f64, max_iter: usize) -> Result<(Operator, usize)> {
    let d = ch.dim();
    let dims = ch.subsystem_dims().to_vec();
    let s = ch.superop();
    let mut x = vectorize(&Array2::<C64>::eye(d).mapv(|z| z / d as f64));
    let mut avg = x.clone();
    let check_every = 64;
    let mut residual = f64::INFINITY;
    for k in 1..=max_iter {
        x = s.dot(&x);
        // running Cesàro mean
        let w = 1.0 / (k as f64 + 1.0);
        avg = &avg * C64::new(1.0 - w, 0.0) + &(&x * C64::new(w, 0.0));
        if k % check_every == 0 || k == max_iter {
            for candidate in [&x, &avg] {
                let rho = DensityMatrix::from_map_output(Operator::from_parts(unvectorize(candidate, d), dims.clone()));
                residual = residual_of(ch, &rho)?;
                if residual <= tol {
                    return Ok((rho.operator().clone(), k));
                }
            }
        }
    }
    Err(Error::NoConvergence { max_iter, residual })
}

/// Steady state of the averaged channel for `spec` under `cfg`.
pub fn steady_state(spec: &SystemSpec, cfg: &ProtocolConfig) -> Result<SteadyStateResult> {
    let h_s = build_system(spec)?;
    let ch = average_channel(spec, cfg)?;
    fixed_point_default(&ch, &h_s)
}

/// `tr(P₀ ρ)` with `P₀` the ground-space projector of `h_s`.
pub fn fidelity_ground(rho: &DensityMatrix, h_s: &Operator) -> Result<f64> {
    let spec = eig_hermitian(h_s)?;
    let p0 = spec.ground_projector(spec.degeneracy_tol());
    Ok(expect(&p0, rho)?.clamp(0.0, 1.0))
}

/// Heating out of the ground space by one averaged exact iteration.
#[derive(Clone, Debug, Serialize)]
pub struct GroundInvarianceReport {
    pub ground_energy: f64,
    /// Energy gained at the configured `γ`.
    pub delta_e: f64,
    /// Energy gained at `γ/2`.
    pub delta_e_half: f64,
    /// `ΔE(γ)/ΔE(γ/2)`, NaN when both vanish.
    pub ratio: f64,
    /// `ΔE(γ/2) ≤ ΔE(γ)/3`.
    pub second_order: bool,
}

/// Applies one averaged exact iteration to the normalized ground projector at
/// `γ` and `γ/2`.
pub fn ground_invariance_check(spec: &SystemSpec, cfg: &ProtocolConfig) -> Result<GroundInvarianceReport> {
    let h_s = build_system(spec)?;
    let ground = DensityMatrix::ground_state(&h_s)?;
    let e0 = expect(&h_s, &ground)?;
    let gain = |gamma: f64| -> Result<f64> {
        let c = ProtocolConfig { gamma, ..cfg.clone() };
        let ch = average_channel(spec, &c)?;
        Ok(expect(&h_s, &ch.apply(&ground)?)? - e0)
    };
    let delta_e = gain(cfg.gamma)?;
    let delta_e_half = gain(cfg.gamma / 2.0)?;
    let ratio = if delta_e == 0.0 && delta_e_half == 0.0 { f64::NAN } else { delta_e / delta_e_half };
    Ok(GroundInvarianceReport {
        ground_energy: e0,
        delta_e,
        delta_e_half,
        ratio,
        second_order: delta_e_half <= delta_e / 3.0 + 1e-15,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel_from_joint;
    use crate::model::{CouplingForm, CouplingSample, MeterSpec};
    use crate::operator::sigma_z;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn identity_channel_is_fully_degenerate() {
        let h = sigma_z().scale_real(0.5);
        let r = fixed_point_default(&Channel::identity(vec![2]), &h).unwrap();
        assert_eq!(r.fixed_space_dim, 4);
        assert!(r.degenerate);
        assert_eq!(r.method, FixedPointMethod::FixedSpaceProjection);
        // energy-minimal member of the fixed space
        assert_abs_diff_eq!(r.energy, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn swap_channel_fixes_ground_state() {
        let spec = SystemSpec::qubit(1.0);
        let ch = channel_from_joint(&spec, &CouplingSample::form(0.1, CouplingForm::CoRotating, 1.0), PI / 0.1, &MeterSpec::ground(1.0))
            .unwrap();
        let h = build_system(&spec).unwrap();
        let r = fixed_point_default(&ch, &h).unwrap();
        assert_abs_diff_eq!(r.energy, -0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(r.rho_inf.matrix()[(1, 1)].re, 1.0, epsilon = 1e-10);
        assert_eq!(r.fixed_space_dim, 1);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn depolarizing_fixed_point_is_mixed() {
        let h = sigma_z().scale_real(0.5);
        let r = fixed_point_default(&Channel::depolarizing(2), &h).unwrap();
        assert_abs_diff_eq!(r.energy, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.subdominant_modulus, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let h = sigma_z().scale_real(0.5);
        assert_abs_diff_eq!(fidelity_ground(&DensityMatrix::ground_state(&h).unwrap(), &h).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity_ground(&DensityMatrix::maximally_mixed(vec![2]), &h).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity_ground(&DensityMatrix::basis(vec![2], 0).unwrap(), &h).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_coupling_does_not_heat_ground() {
        let cfg = ProtocolConfig::new(0.0, 10.0, (0.1, 3.0));
        let r = ground_invariance_check(&SystemSpec::qubit(1.0), &cfg).unwrap();
        assert_eq!(r.delta_e, 0.0);
        assert!(r.second_order);
    }

    #[test]
    fn non_tp_input_is_rejected() {
        let mut s = Array2::<C64>::eye(4);
        s[(0, 0)] = C64::new(0.5, 0.0);
        let ch = Channel::from_superop(s, vec![2], Normalization::Linear).unwrap();
        assert!(matches!(
            fixed_point_default(&ch, &sigma_z()),
            Err(Error::NotTracePreserving { .. })
        ));
    }
}
