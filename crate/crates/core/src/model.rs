//! Hamiltonians, meter states and eigenoperator decompositions.
//!
//! The joint space orders system sites first and meters after them, meter `i`
//! paired with site `i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    eig_hermitian, kron_all, pauli_axis, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z,
    DensityMatrix, Operator, Spectrum,
};

/// The system being cooled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    /// `H_S = (ω_S/2) v·σ` with `v` the unit vector at `(θ, φ)`.
    Qubit { omega_s: f64, axis: (f64, f64) },
    /// `H_S = Σ_i J_i S_i·S_{i+1}` with `S = σ/2`; `J_N` closes the ring.
    HeisenbergChain { n_sites: usize, couplings: Vec<f64> },
}

impl SystemSpec {
    pub fn qubit(omega_s: f64) -> Self {
        SystemSpec::Qubit { omega_s, axis: (0.0, 0.0) }
    }

    pub fn chain(couplings: &[f64]) -> Self {
        SystemSpec::HeisenbergChain { n_sites: couplings.len(), couplings: couplings.to_vec() }
    }

    /// Number of system qubits, which is also the number of meters.
    pub fn n_sites(&self) -> usize {
        match self {
            SystemSpec::Qubit { .. } => 1,
            SystemSpec::HeisenbergChain { n_sites, .. } => *n_sites,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SystemSpec::Qubit { omega_s, axis } => {
                if !omega_s.is_finite() || !axis.0.is_finite() || !axis.1.is_finite() {
                    return Err(Error::InvalidParameter("qubit parameters must be finite".into()));
                }
                if omega_s.abs() < 1e-15 {
                    return Err(Error::DegenerateSystem(format!("|omega_s| = {omega_s:e} < 1e-15")));
                }
            }
            SystemSpec::HeisenbergChain { n_sites, couplings } => {
                if *n_sites < 2 {
                    return Err(Error::InvalidParameter(format!("chain needs n_sites >= 2, got {n_sites}")));
                }
                if couplings.len() != *n_sites {
                    return Err(Error::DimMismatch { expected: *n_sites, found: couplings.len() });
                }
                if couplings.iter().any(|j| !j.is_finite()) {
                    return Err(Error::InvalidParameter("couplings must be finite".into()));
                }
                if couplings.iter().all(|j| *j == 0.0) {
                    return Err(Error::DegenerateSystem("all couplings are zero".into()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn is_qubit(&self) -> bool {
        matches!(self, SystemSpec::Qubit { .. })
    }
}

/// Shape of the system–meter interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// Qubit: `γ σ(θ,φ) ⊗ τ_x`. Chain: `(γ/2) Σ_i σ(θ,φ)_i τ_{x,i}`.
    AxisTensorTauX,
    /// `(γ/2)(σ_+τ_− + σ_−τ_+)`.
    CoRotating,
    /// `(γ/2)(σ_+τ_+ + σ_−τ_−)`.
    CounterRotating,
    /// `(γ/2) σ_x τ_x`, the sum of the two above.
    SigmaXTauX,
}

impl CouplingForm {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingForm::AxisTensorTauX => "axis_tensor_tau_x",
            CouplingForm::CoRotating => "co_rotating",
            CouplingForm::CounterRotating => "counter_rotating",
            CouplingForm::SigmaXTauX => "sigma_x_tau_x",
        }
    }
}

/// One draw of the interaction parameters for a single iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSample {
    pub gamma: f64,
    /// One `(θ, φ)` per site, or a single entry shared by all sites.
    pub axes: Vec<(f64, f64)>,
    pub omega_m: f64,
    pub form: CouplingForm,
}

impl CouplingSample {
    pub fn axis(gamma: f64, theta: f64, phi: f64, omega_m: f64) -> Self {
        Self { gamma, axes: vec![(theta, phi)], omega_m, form: CouplingForm::AxisTensorTauX }
    }

    pub fn form(gamma: f64, form: CouplingForm, omega_m: f64) -> Self {
        Self { gamma, axes: vec![(0.0, 0.0)], omega_m, form }
    }

    fn site_axis(&self, site: usize) -> (f64, f64) {
        if self.axes.len() == 1 {
            self.axes[0]
        } else {
            self.axes[site]
        }
    }

    pub(crate) fn validate_for(&self, spec: &SystemSpec) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.omega_m >= 0.0) || !self.omega_m.is_finite() {
            return Err(Error::InvalidParameter(format!("omega_m must be >= 0, got {}", self.omega_m)));
        }
        if self.form != CouplingForm::AxisTensorTauX && !spec.is_qubit() {
            return Err(Error::FormMismatch { form: self.form.name().into() });
        }
        let n = spec.n_sites();
        if self.axes.is_empty() || (self.axes.len() != 1 && self.axes.len() != n) {
            return Err(Error::DimMismatch { expected: n, found: self.axes.len() });
        }
        Ok(())
    }
}

/// Meter splitting and initial inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeterSpec {
    pub omega_m: f64,
    /// `f64::INFINITY` prepares the ground state.
    pub beta_m: f64,
}

impl MeterSpec {
    pub fn ground(omega_m: f64) -> Self {
        Self { omega_m, beta_m: f64::INFINITY }
    }

    /// `n_M = 1/(1 + e^{β_M ω_M})`.
    pub fn occupation(&self) -> f64 {
        occupation(self.beta_m, self.omega_m)
    }
}

pub(crate) fn occupation(beta_m: f64, omega_m: f64) -> f64 {
    let x = beta_m * omega_m;
    if x.is_nan() {
        // ∞·0: a zero splitting is equally populated
        return 0.5;
    }
    1.0 / (1.0 + x.exp())
}

/// `ρ_M = diag(n_M, 1 − n_M)` in the `(|↑⟩, |↓⟩)` basis.
pub fn meter_state(m: &MeterSpec) -> Result<DensityMatrix> {
    if !(m.omega_m > 0.0) {
        return Err(Error::InvalidParameter(format!("meter splitting must be > 0, got {}", m.omega_m)));
    }
    if m.beta_m.is_nan() || m.beta_m < 0.0 {
        return Err(Error::InvalidParameter(format!("meter beta must be >= 0, got {}", m.beta_m)));
    }
    let n = m.occupation();
    DensityMatrix::new(Operator::diag(&[n, 1.0 - n]))
}

/// `op` on `site` of an `n`-qubit register, identity elsewhere.
pub fn embed(op: &Operator, site: usize, n: usize) -> Operator {
    let id = Operator::identity(2);
    let factors: Vec<Operator> = (0..n).map(|k| if k == site { op.clone() } else { id.clone() }).collect();
    kron_all(&factors)
}

/// `op_a` on `a` and `op_b` on `b`.
fn embed_pair(op_a: &Operator, a: usize, op_b: &Operator, b: usize, n: usize) -> Operator {
    let id = Operator::identity(2);
    let factors: Vec<Operator> = (0..n)
        .map(|k| {
            if k == a {
                op_a.clone()
            } else if k == b {
                op_b.clone()
            } else {
                id.clone()
            }
        })
        .collect();
    kron_all(&factors)
}

/// System Hamiltonian.
pub fn build_system(spec: &SystemSpec) -> Result<Operator> {
    spec.validate()?;
    match spec {
        SystemSpec::Qubit { omega_s, axis } => Ok(pauli_axis(axis.0, axis.1).scale_real(omega_s / 2.0)),
        SystemSpec::HeisenbergChain { n_sites, couplings } => {
            let n = *n_sites;
            let d = 1 << n;
            let mut h = Operator::zeros(d).with_dims(vec![2; n])?;
            let paulis = [sigma_x(), sigma_y(), sigma_z()];
            for (i, &j) in couplings.iter().enumerate() {
                if j == 0.0 {
                    continue;
                }
                let k = (i + 1) % n;
                for p in &paulis {
                    h = &h + &embed_pair(p, i, p, k, n).scale_real(j / 4.0);
                }
            }
            Ok(h)
        }
    }
}

/// `Σ_i σ_{z,i}/2` on `n` qubits.
pub fn total_spin_z(n: usize) -> Operator {
    total_spin_component(&sigma_z(), n)
}

/// `(Σ_i σ_i/2)²` on `n` qubits.
pub fn total_spin_squared(n: usize) -> Operator {
    let mut out = Operator::zeros(1 << n).with_dims(vec![2; n]).expect("consistent dims");
    for p in [sigma_x(), sigma_y(), sigma_z()] {
        let s = total_spin_component(&p, n);
        out = &out + &s.dot(&s);
    }
    out
}

fn total_spin_component(p: &Operator, n: usize) -> Operator {
    let mut out = Operator::zeros(1 << n).with_dims(vec![2; n]).expect("consistent dims");
    for i in 0..n {
        out = &out + &embed(p, i, n).scale_real(0.5);
    }
    out
}

/// Joint Hamiltonian split as `H_tot(ω_M) = base + ω_M · meter_unit`.
#[derive(Clone, Debug)]
pub struct JointHamiltonian {
    /// `H_S ⊗ I + H_SM`.
    pub base: Operator,
    /// `Σ_i τ_{z,i}/2` on the meters.
    pub meter_unit: Operator,
    pub system_dim: usize,
    pub n_meters: usize,
}

impl JointHamiltonian {
    pub fn at(&self, omega_m: f64) -> Operator {
        &self.base + &self.meter_unit.scale_real(omega_m)
    }
}

/// The coupling `H_SM` on the joint space.
pub fn build_coupling(spec: &SystemSpec, sample: &CouplingSample) -> Result<Operator> {
    sample.validate_for(spec)?;
    let n = spec.n_sites();
    let g = sample.gamma;
    if spec.is_qubit() {
        let (sp, sm, sx) = (sigma_plus(), sigma_minus(), sigma_x());
        let op = match sample.form {
            CouplingForm::AxisTensorTauX => {
                let (t, p) = sample.site_axis(0);
                kron_all(&[pauli_axis(t, p), sx]).scale_real(g)
            }
            CouplingForm::CoRotating => {
                (&kron_all(&[sp.clone(), sm.clone()]) + &kron_all(&[sm, sp])).scale_real(g / 2.0)
            }
            CouplingForm::CounterRotating => {
                (&kron_all(&[sp.clone(), sp]) + &kron_all(&[sm.clone(), sm])).scale_real(g / 2.0)
            }
            CouplingForm::SigmaXTauX => kron_all(&[sx.clone(), sx]).scale_real(g / 2.0),
        };
        return Ok(op);
    }
    let total = 2 * n;
    let mut h = Operator::zeros(1 << total).with_dims(vec![2; total])?;
    let tx = sigma_x();
    for i in 0..n {
        let (t, p) = sample.site_axis(i);
        h = &h + &embed_pair(&pauli_axis(t, p), i, &tx, n + i, total).scale_real(g / 2.0);
    }
    Ok(h)
}

/// Joint Hamiltonian pieces for a given sample, independent of `ω_M`.
pub fn build_joint_parts(spec: &SystemSpec, sample: &CouplingSample) -> Result<JointHamiltonian> {
    let h_s = build_system(spec)?;
    let h_sm = build_coupling(spec, sample)?;
    Ok(joint_parts_from(&h_s, h_sm, spec.n_sites()))
}

pub(crate) fn joint_parts_from(h_s: &Operator, h_sm: Operator, n: usize) -> JointHamiltonian {
    let total = 2 * n;
    let id_m = Operator::identity(1 << n).with_dims(vec![2; n]).expect("consistent dims");
    let h_s_joint = crate::operator::kron(h_s, &id_m);
    let mut meter_unit = Operator::zeros(1 << total).with_dims(vec![2; total]).expect("consistent dims");
    let tz = sigma_z();
    for i in 0..n {
        meter_unit = &meter_unit + &embed(&tz, n + i, total).scale_real(0.5);
    }
    JointHamiltonian {
        base: &h_s_joint + &h_sm,
        meter_unit,
        system_dim: 1 << n,
        n_meters: n,
    }
}

/// `H_tot = H_S + H_SM + H_M`.
pub fn build_joint(spec: &SystemSpec, sample: &CouplingSample) -> Result<Operator> {
    Ok(build_joint_parts(spec, sample)?.at(sample.omega_m))
}

/// Projector-ordered components `A(g) = Σ_{ε′−ε=g} Π(ε) A Π(ε′)` of a coupling
/// operator, indexed by signed gap `g`.
///
/// Positive `g` lowers the energy by `g`; negative `g` raises it; `g = 0` is
/// block diagonal. For Hermitian `A`, `A(−ω) = A(ω)†`.
#[derive(Clone, Debug)]
pub struct EigenOperatorSet {
    /// Signed gaps, ascending.
    pub gaps: Vec<f64>,
    pub components: Vec<Operator>,
}

impl EigenOperatorSet {
    /// Distinct non-negative frequencies carrying a non-zero component, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .gaps
            .iter()
            .zip(&self.components)
            .filter(|(g, c)| **g >= 0.0 && c.max_abs() > 0.0)
            .map(|(g, _)| *g)
            .collect();
        out.dedup();
        out
    }

    /// `A(ω)` for `ω ≥ 0`, or the raising component for negative arguments.
    pub fn component(&self, gap: f64, tol: f64) -> Option<&Operator> {
        self.gaps
            .iter()
            .position(|g| (g - gap).abs() <= tol)
            .map(|k| &self.components[k])
    }

    /// `Σ_g A(g)`.
    pub fn reconstruct(&self) -> Operator {
        let mut iter = self.components.iter();
        let first = iter.next().expect("at least one component").clone();
        iter.fold(first, |acc, c| &acc + c)
    }
}

/// Eigenoperator decomposition of `a` with respect to `h_s`.
pub fn eigenoperator_decomp(h_s: &Operator, a: &Operator, degeneracy_tol: f64) -> Result<EigenOperatorSet> {
    if h_s.dim() != a.dim() {
        return Err(Error::DimMismatch { expected: h_s.dim(), found: a.dim() });
    }
    let spec = eig_hermitian(h_s)?;
    Ok(eigenoperators_in(&spec, a, degeneracy_tol))
}

pub(crate) fn eigenoperators_in(spec: &Spectrum, a: &Operator, degeneracy_tol: f64) -> EigenOperatorSet {
    let n = spec.dim();
    let levels = cluster_levels(spec.eigenvalues.as_slice().expect("contiguous"), degeneracy_tol);
    let v = spec.eigenvectors.matrix();
    let vdag = crate::operator::adjoint_matrix(v);
    let a_eig = vdag.dot(a.matrix()).dot(v);

    // gap ε_l − ε_k between level of row k and level of column l
    let mut raw: Vec<f64> = Vec::new();
    for &lk in &levels {
        for &ll in &levels {
            raw.push(ll - lk);
        }
    }
    let gaps = cluster_values(&mut raw, degeneracy_tol);
    let level_of: Vec<f64> = {
        let ev = &spec.eigenvalues;
        (0..n).map(|i| nearest(&levels, ev[i])).collect()
    };
    let mut comps: Vec<ndarray::Array2<crate::C64>> =
        (0..gaps.len()).map(|_| ndarray::Array2::zeros((n, n))).collect();
    for i in 0..n {
        for j in 0..n {
            let z = a_eig[(i, j)];
            if z == crate::operator::ZERO {
                continue;
            }
            let g = level_of[j] - level_of[i];
            let slot = nearest_index(&gaps, g);
            comps[slot][(i, j)] = z;
        }
    }
    let dims = a.subsystem_dims().to_vec();
    let components = comps
        .into_iter()
        .map(|c| Operator::from_parts(v.dot(&c).dot(&vdag), dims.clone()))
        .collect();
    EigenOperatorSet { gaps, components }
}

/// Representative value of each cluster of sorted eigenvalues.
fn cluster_levels(sorted: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] > tol {
            let block = &sorted[start..k];
            out.push(block.iter().sum::<f64>() / block.len() as f64);
            start = k;
        }
    }
    out
}

fn cluster_values(values: &mut [f64], tol: f64) -> Vec<f64> {
    values.sort_by(|a, b| a.total_cmp(b));
    let mut out = cluster_levels(values, tol);
    // snap the zero cluster exactly so A(0) is addressable by 0.0
    for g in out.iter_mut() {
        if g.abs() <= tol {
            *g = 0.0;
        }
    }
    out
}

fn nearest(values: &[f64], x: f64) -> f64 {
    values[nearest_index(values, x)]
}

fn nearest_index(values: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if (v - x).abs() < (values[best] - x).abs() {
            best = k;
        }
    }
    best
}

/// Default gap-clustering tolerance, `1e−9 · spectral radius`.
pub fn default_degeneracy_tol(h_s: &Operator) -> Result<f64> {
    Ok(eig_hermitian(h_s)?.degeneracy_tol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{max_abs_diff, ONE};
    use approx::assert_abs_diff_eq;

    fn eigs(op: &Operator) -> Vec<f64> {
        eig_hermitian(op).unwrap().eigenvalues.to_vec()
    }

    #[test]
    fn qubit_system_along_z() {
        let h = build_system(&SystemSpec::qubit(1.0)).unwrap();
        assert!(max_abs_diff(h.matrix(), Operator::diag(&[0.5, -0.5]).matrix()) < 1e-15);
        assert!(matches!(
            build_system(&SystemSpec::qubit(1e-16)),
            Err(Error::DegenerateSystem(_))
        ));
    }

    #[test]
    fn chain_spectra() {
        let e = eigs(&build_system(&SystemSpec::chain(&[1.0, 0.0])).unwrap());
        for (a, b) in e.iter().zip([-0.75, 0.25, 0.25, 0.25]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
        }
        let e = eigs(&build_system(&SystemSpec::chain(&[1.0, 1.0, 0.0])).unwrap());
        let expected = [-1.0, -1.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.5];
        for (a, b) in e.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
        }
        assert!(build_system(&SystemSpec::HeisenbergChain { n_sites: 3, couplings: vec![1.0] }).is_err());
    }

    #[test]
    fn chain_conserves_total_spin() {
        for js in [vec![1.0, 1.0, 0.0], vec![1.0, -0.5, 0.3, 2.0]] {
            let n = js.len();
            let h = build_system(&SystemSpec::chain(&js)).unwrap();
            assert!(h.commutator(&total_spin_z(n)).max_abs() < 1e-12);
            assert!(h.commutator(&total_spin_squared(n)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_joint_is_block_diagonal() {
        let spec = SystemSpec::qubit(1.0);
        let h = build_joint(&spec, &CouplingSample::axis(0.0, 0.3, 0.2, 0.7)).unwrap();
        let e = eigs(&h);
        let expected = [-0.85, -0.15, 0.15, 0.85];
        for (a, b) in e.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn sigma_x_tau_x_matches_printed_spectrum() {
        let (ws, wm, g) = (1.0_f64, 1.0_f64, 0.1_f64);
        let h = build_joint(&SystemSpec::qubit(ws), &CouplingSample::form(g, CouplingForm::SigmaXTauX, wm)).unwrap();
        let mu = (g * g + (ws + wm).powi(2)).sqrt();
        let nu = (g * g + (ws - wm).powi(2)).sqrt();
        assert_abs_diff_eq!(mu, 2.0025, epsilon = 1e-4);
        let e = eigs(&h);
        let expected = [-mu / 2.0, -nu / 2.0, nu / 2.0, mu / 2.0];
        for (a, b) in e.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
        }
        // printed 4×4 layout: anti-diagonal γ/2 couplings
        let m = h.matrix();
        assert_abs_diff_eq!(m[(0, 3)].re, g / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 2)].re, g / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn forms_sum_and_mismatch() {
        let spec = SystemSpec::qubit(1.0);
        let co = build_coupling(&spec, &CouplingSample::form(0.2, CouplingForm::CoRotating, 1.0)).unwrap();
        let counter = build_coupling(&spec, &CouplingSample::form(0.2, CouplingForm::CounterRotating, 1.0)).unwrap();
        let xx = build_coupling(&spec, &CouplingSample::form(0.2, CouplingForm::SigmaXTauX, 1.0)).unwrap();
        assert!(max_abs_diff((&co + &counter).matrix(), xx.matrix()) < 1e-15);
        let chain = SystemSpec::chain(&[1.0, 1.0, 0.0]);
        assert!(matches!(
            build_joint(&chain, &CouplingSample::form(0.1, CouplingForm::CoRotating, 1.0)),
            Err(Error::FormMismatch { .. })
        ));
        let h = build_joint(&chain, &CouplingSample::axis(0.1, 0.4, 0.1, 0.5)).unwrap();
        assert_eq!(h.dim(), 64);
        assert!(h.is_hermitian(1e-12));
        assert_eq!(h.subsystem_dims(), &[2; 6]);
    }

    #[test]
    fn meter_states() {
        let g = meter_state(&MeterSpec::ground(1.0)).unwrap();
        assert_eq!(g.matrix()[(1, 1)], ONE);
        let hot = meter_state(&MeterSpec { omega_m: 1.0, beta_m: 0.0 }).unwrap();
        assert_abs_diff_eq!(hot.matrix()[(0, 0)].re, 0.5);
        let m = MeterSpec { omega_m: 2.0, beta_m: 3.0_f64.ln() / 2.0 };
        assert_abs_diff_eq!(m.occupation(), 0.25, epsilon = 1e-15);
        assert!(meter_state(&MeterSpec::ground(0.0)).is_err());
    }

    #[test]
    fn eigenoperators_two_level() {
        let h = sigma_z().scale_real(0.5);
        let set = eigenoperator_decomp(&h, &sigma_x(), 1e-9).unwrap();
        assert_eq!(set.frequencies(), vec![1.0]);
        // lowering component takes |↑⟩ (excited) to |↓⟩
        let low = set.component(1.0, 1e-12).unwrap();
        assert!(max_abs_diff(low.matrix(), sigma_minus().matrix()) < 1e-15);
        let up = set.component(-1.0, 1e-12).unwrap();
        assert!(max_abs_diff(up.matrix(), sigma_plus().matrix()) < 1e-15);
        assert!(max_abs_diff(set.reconstruct().matrix(), sigma_x().matrix()) < 1e-15);

        let set = eigenoperator_decomp(&h, &sigma_z(), 1e-9).unwrap();
        assert_eq!(set.frequencies(), vec![0.0]);
    }

    #[test]
    fn eigenoperators_three_site_chain() {
        let h = build_system(&SystemSpec::chain(&[1.0, 1.0, 0.0])).unwrap();
        let a = embed(&sigma_x(), 0, 3);
        let set = eigenoperator_decomp(&h, &a, 1e-9).unwrap();
        for w in set.frequencies().into_iter().filter(|w| *w > 0.0) {
            assert!([0.5, 1.0, 1.5].iter().any(|g| (g - w).abs() < 1e-9), "gap {w}");
        }
        assert!(max_abs_diff(set.reconstruct().matrix(), a.matrix()) < 1e-12);
    }
}
