//! One-iteration CPTP maps, their averages over coupling samples, and the
//! first-order (Dyson) map.
//!
//! Vectorization stacks columns: `vec(ρ)[i + D·j] = ρ_ij`. With that
//! convention `ρ ↦ Σ K ρ K†` has superoperator `Σ conj(K) ⊗ K`. The Choi
//! matrix is `C = Σ_{xy} |x⟩⟨y| ⊗ V(|x⟩⟨y|)` (trace `D` for a TP map).

use ndarray::{s, Array2};
use ndarray_linalg::EigVals;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::sinc;
use crate::error::{Error, Result};
use crate::model::{
    build_coupling, build_system, eigenoperators_in, joint_parts_from, occupation, total_spin_squared,
    total_spin_z, CouplingForm, CouplingSample, JointHamiltonian, MeterSpec, SystemSpec,
};
use crate::numeric;
use crate::operator::{
    adjoint_matrix, eig_hermitian, kron_all, max_abs_diff, sigma_x, sigma_y, DensityMatrix, Operator,
    Spectrum, C64, I, ONE, ZERO,
};
use crate::protocol::{AveragingScheme, AxisMode, ProtocolConfig};
use crate::quadrature::{self, Rule};
use crate::rng;

/// Whether the map is applied as is or followed by `ρ ↦ ρ/tr ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Normalization {
    Linear,
    Renormalized,
}

/// A map on density matrices of dimension `dim`.
#[derive(Clone, Debug)]
pub struct Channel {
    dims: Vec<usize>,
    kraus: Option<Vec<Operator>>,
    superop: Array2<C64>,
    normalization: Normalization,
}

impl Channel {
    pub fn from_kraus(kraus: Vec<Operator>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidOperator("empty Kraus set".into()))?;
        let d = first.dim();
        let dims = first.subsystem_dims().to_vec();
        if let Some(k) = kraus.iter().find(|k| k.dim() != d) {
            return Err(Error::DimMismatch { expected: d, found: k.dim() });
        }
        let mats: Vec<&Array2<C64>> = kraus.iter().map(|k| k.matrix()).collect();
        let choi = choi_from_y(&kraus_columns(&mats, d, 1.0));
        Ok(Self {
            dims,
            kraus: Some(kraus),
            superop: choi_to_superop(&choi, d),
            normalization: Normalization::Linear,
        })
    }

    pub fn from_superop(superop: Array2<C64>, dims: Vec<usize>, normalization: Normalization) -> Result<Self> {
        let d: usize = dims.iter().product();
        if superop.dim() != (d * d, d * d) {
            return Err(Error::DimMismatch { expected: d * d, found: superop.nrows() });
        }
        Ok(Self { dims, kraus: None, superop, normalization })
    }

    pub(crate) fn from_choi(choi: &Array2<C64>, dims: Vec<usize>, normalization: Normalization) -> Self {
        let d: usize = dims.iter().product();
        Self { superop: choi_to_superop(choi, d), dims, kraus: None, normalization }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self { superop: Array2::eye(d * d), dims, kraus: None, normalization: Normalization::Linear }
    }

    pub fn unitary(u: &Operator) -> Self {
        Self::from_kraus(vec![u.clone()]).expect("single Kraus operator")
    }

    /// `ρ ↦ tr(ρ) I/D`.
    pub fn depolarizing(d: usize) -> Self {
        let mut s = Array2::zeros((d * d, d * d));
        for i in 0..d {
            for j in 0..d {
                s[(i + d * i, j + d * j)] = C64::new(1.0 / d as f64, 0.0);
            }
        }
        Self { dims: vec![d], kraus: None, superop: s, normalization: Normalization::Linear }
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kraus(&self) -> Option<&[Operator]> {
        self.kraus.as_deref()
    }

    pub fn superop(&self) -> &Array2<C64> {
        &self.superop
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn choi(&self) -> Array2<C64> {
        superop_to_choi(&self.superop, self.dim())
    }

    /// The linear part applied to an arbitrary operator.
    pub fn apply_operator(&self, op: &Operator) -> Result<Operator> {
        let d = self.dim();
        if op.dim() != d {
            return Err(Error::DimMismatch { expected: d, found: op.dim() });
        }
        let v = self.superop.dot(&vectorize(op.matrix()));
        Ok(Operator::from_parts(unvectorize(&v, d), op.subsystem_dims().to_vec()))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho.operator())?;
        Ok(DensityMatrix::from_map_output(out))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if next.dim() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: next.dim() });
        }
        let normalization = if self.normalization == Normalization::Linear && next.normalization == Normalization::Linear {
            Normalization::Linear
        } else {
            Normalization::Renormalized
        };
        Ok(Channel {
            dims: self.dims.clone(),
            kraus: None,
            superop: next.superop.dot(&self.superop),
            normalization,
        })
    }

    /// The same map seen in the interaction picture of `h_s`: followed by
    /// conjugation with `e^{+iH_S t}`.
    pub fn interaction_picture(&self, h_s: &Operator, t: f64) -> Result<Channel> {
        let back = eig_hermitian(h_s)?.propagator(-t);
        self.then(&Channel::unitary(&back))
    }
}

/// Column-stacked vector of a matrix.
pub fn vectorize(m: &Array2<C64>) -> ndarray::Array1<C64> {
    let d = m.nrows();
    ndarray::Array1::from_shape_fn(d * m.ncols(), |k| m[(k % d, k / d)])
}

pub fn unvectorize(v: &ndarray::Array1<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d, v.len() / d), |(i, j)| v[i + d * j])
}

/// `S[p + D q, x + D y] = C[x D + p, y D + q]`.
pub fn choi_to_superop(c: &Array2<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d * d, d * d), |(r, col)| {
        let (p, q) = (r % d, r / d);
        let (x, y) = (col % d, col / d);
        c[(x * d + p, y * d + q)]
    })
}

pub fn superop_to_choi(s: &Array2<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d * d, d * d), |(r, col)| {
        let (x, p) = (r / d, r % d);
        let (y, q) = (col / d, col % d);
        s[(p + d * q, x + d * y)]
    })
}

/// Columns `Y[(x, p), k] = c·K_k[p, x]` so that the Choi matrix is `Y Y†`.
fn kraus_columns(kraus: &[&Array2<C64>], d: usize, c: f64) -> Array2<C64> {
    let mut y = Array2::zeros((d * d, kraus.len()));
    for (k, m) in kraus.iter().enumerate() {
        for x in 0..d {
            for p in 0..d {
                y[(x * d + p, k)] = m[(p, x)] * c;
            }
        }
    }
    y
}

fn choi_from_y(y: &Array2<C64>) -> Array2<C64> {
    y.dot(&adjoint_matrix(y))
}

// ---------------------------------------------------------------------------
// Exact single-sample channels

/// Populations of the product meter state, as `(joint meter index, p)` pairs
/// with `p > 0`. Bit 0 of each meter is `|↑⟩`.
pub(crate) fn meter_populations(n_meters: usize, n_m: f64) -> Vec<(usize, f64)> {
    let m = 1usize << n_meters;
    (0..m)
        .filter_map(|idx| {
            let mut p = 1.0;
            for k in 0..n_meters {
                let bit = (idx >> (n_meters - 1 - k)) & 1;
                p *= if bit == 0 { n_m } else { 1.0 - n_m };
            }
            (p > 0.0).then_some((idx, p))
        })
        .collect()
}

/// Kraus operators `√p_j ⟨i|U(t)|j⟩` for the joint spectrum.
pub(crate) fn kraus_from_spectrum(
    spec: &Spectrum,
    t: f64,
    d_sys: usize,
    n_meters: usize,
    pops: &[(usize, f64)],
) -> Vec<Array2<C64>> {
    let m = 1usize << n_meters;
    let cols: Vec<usize> = pops.iter().flat_map(|&(j, _)| (0..d_sys).map(move |s| s * m + j)).collect();
    let u = spec.propagator_columns(t, &cols);
    let mut out = Vec::with_capacity(m * pops.len());
    for (c, &(_, p)) in pops.iter().enumerate() {
        let sp = p.sqrt();
        for i in 0..m {
            let k = Array2::from_shape_fn((d_sys, d_sys), |(so, si)| u[(so * m + i, c * d_sys + si)] * sp);
            out.push(k);
        }
    }
    out
}

/// Exact map of one iteration: joint evolution for `t_m` from `ρ_S ⊗ ρ_M`,
/// meters traced out.
pub fn channel_from_joint(spec: &SystemSpec, sample: &CouplingSample, t_m: f64, meter: &MeterSpec) -> Result<Channel> {
    if !(t_m > 0.0) {
        return Err(Error::InvalidParameter(format!("t_m must be > 0, got {t_m}")));
    }
    crate::model::meter_state(meter)?;
    let sample = CouplingSample { omega_m: meter.omega_m, ..sample.clone() };
    let h_s = build_system(spec)?;
    let parts = joint_parts_from(&h_s, build_coupling(spec, &sample)?, spec.n_sites());
    let h = parts.at(sample.omega_m);
    let pops = meter_populations(parts.n_meters, meter.occupation());
    let kraus = kraus_from_spectrum(&eig_hermitian(&h)?, t_m, parts.system_dim, parts.n_meters, &pops);
    let dims = h_s.subsystem_dims().to_vec();
    Channel::from_kraus(kraus.into_iter().map(|k| Operator::from_parts(k, dims.clone())).collect())
}

// ---------------------------------------------------------------------------
// Averaging

/// Evaluation strategy for the average over coupling directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AveragingPath {
    /// Use rotational symmetry of `H_S` when present.
    Auto,
    /// Evaluate every quadrature node explicitly.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    None,
    /// `[H_S, Σ_z] = 0`.
    Axial,
    /// `[H_S, Σ_a] = 0` for all `a`.
    Full,
}

fn detect_symmetry(h_s: &Operator, n: usize) -> Symmetry {
    let tol = 1e-12 * h_s.max_abs().max(1.0);
    let comm = |p: &Operator| {
        let mut s = Operator::zeros(1 << n).with_dims(vec![2; n]).expect("consistent dims");
        for i in 0..n {
            s = &s + &crate::model::embed(p, i, n);
        }
        h_s.commutator(&s).max_abs()
    };
    if h_s.commutator(&total_spin_z(n)).max_abs() > tol {
        return Symmetry::None;
    }
    if comm(&sigma_x()) <= tol && comm(&sigma_y()) <= tol {
        debug_assert!(h_s.commutator(&total_spin_squared(n)).max_abs() <= 10.0 * tol);
        Symmetry::Full
    } else {
        Symmetry::Axial
    }
}

/// Panel count used when `omega_panels = 0`: width at most `2π/t_M`.
pub fn auto_panels(lo: f64, hi: f64, t_m: f64) -> usize {
    (((hi - lo) * t_m) / std::f64::consts::TAU).ceil().max(1.0) as usize
}

/// The `ω_M` rule implied by a configuration.
pub fn omega_rule(cfg: &ProtocolConfig) -> Rule {
    let (lo, hi) = cfg.omega_window;
    match cfg.averaging {
        AveragingScheme::Quadrature { n_omega, omega_panels, .. } => {
            let panels = if omega_panels == 0 { auto_panels(lo, hi, cfg.t_m) } else { omega_panels };
            quadrature::uniform_interval(lo, hi, n_omega, panels)
        }
        AveragingScheme::MonteCarlo { .. } => Rule::single(0.5 * (lo + hi)),
    }
}

/// Shared inputs for evaluating member channels.
struct Context<'a> {
    spec: &'a SystemSpec,
    h_s: Operator,
    cfg: &'a ProtocolConfig,
    form: CouplingForm,
    d: usize,
    n: usize,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    axis: (f64, f64),
    omega: f64,
    weight: f64,
}

impl Context<'_> {
    fn parts(&self, axis: (f64, f64)) -> Result<JointHamiltonian> {
        let sample = CouplingSample { gamma: self.cfg.gamma, axes: vec![axis], omega_m: 0.0, form: self.form };
        Ok(joint_parts_from(&self.h_s, build_coupling(self.spec, &sample)?, self.n))
    }

    /// Kraus columns of one node, scaled by `√weight`.
    fn node_columns(&self, parts: &JointHamiltonian, node: &Node) -> Result<Array2<C64>> {
        let h = parts.at(node.omega);
        let spec = eig_hermitian(&h)?;
        let pops = meter_populations(self.n, occupation(self.cfg.meter_beta, node.omega));
        let kraus = kraus_from_spectrum(&spec, self.cfg.t_m, self.d, self.n, &pops);
        let refs: Vec<&Array2<C64>> = kraus.iter().collect();
        Ok(kraus_columns(&refs, self.d, node.weight.sqrt()))
    }

    fn chunk_len(&self) -> usize {
        if self.d <= 8 {
            64
        } else {
            16
        }
    }

    /// `Σ_nodes weight · Choi(node)` with a reduction tree fixed by the node list.
    fn accumulate(&self, nodes: &[Node]) -> Result<Array2<C64>> {
        let mut tree = TreeSum::default();
        for chunk in nodes.chunks(self.chunk_len()) {
            let mut axes: Vec<(f64, f64)> = Vec::new();
            for n in chunk {
                if !axes.iter().any(|a| a.0.to_bits() == n.axis.0.to_bits() && a.1.to_bits() == n.axis.1.to_bits()) {
                    axes.push(n.axis);
                }
            }
            let parts: Vec<JointHamiltonian> = axes.par_iter().map(|a| self.parts(*a)).collect::<Result<_>>()?;
            let blocks: Vec<Array2<C64>> = chunk
                .par_iter()
                .map(|node| {
                    let k = axes
                        .iter()
                        .position(|a| a.0.to_bits() == node.axis.0.to_bits() && a.1.to_bits() == node.axis.1.to_bits())
                        .expect("axis registered");
                    self.node_columns(&parts[k], node)
                })
                .collect::<Result<_>>()?;
            let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
            let y = ndarray::concatenate(ndarray::Axis(1), &views).map_err(|e| Error::Linalg(e.to_string()))?;
            tree.push(choi_from_y(&y));
        }
        tree.finish().ok_or(Error::EmptyScheme)
    }
}

/// Pairwise summation whose tree depends only on the number of pushes.
#[derive(Default)]
struct TreeSum {
    stack: Vec<(u32, Array2<C64>)>,
}

impl TreeSum {
    fn push(&mut self, m: Array2<C64>) {
        let mut item = (0u32, m);
        while let Some((level, _)) = self.stack.last() {
            if *level != item.0 {
                break;
            }
            let (level, prev) = self.stack.pop().expect("non-empty");
            item = (level + 1, prev + &item.1);
        }
        self.stack.push(item);
    }

    fn finish(mut self) -> Option<Array2<C64>> {
        let mut acc = self.stack.pop()?.1;
        while let Some((_, prev)) = self.stack.pop() {
            acc = prev + &acc;
        }
        Some(acc)
    }
}

/// Per-site rotation taking `σ_z` to `σ(θ, φ)`: `e^{−iφσ_z/2} e^{−iθσ_y/2}`.
pub fn axis_rotation(theta: f64, phi: f64) -> Operator {
    let (s, c) = (theta / 2.0).sin_cos();
    let ep = C64::from_polar(1.0, -phi / 2.0);
    let em = C64::from_polar(1.0, phi / 2.0);
    let m = ndarray::arr2(&[[ep * c, -ep * s], [em * s, em * c]]);
    Operator::from_parts(m, vec![2])
}

/// `(a ⊗ b) · x` for `x` with `dim(a)·dim(b)` rows, without forming `a ⊗ b`.
fn kron_left_mul(a: &Array2<C64>, b: &Array2<C64>, x: &Array2<C64>) -> Array2<C64> {
    let (da, db, m) = (a.nrows(), b.nrows(), x.ncols());
    let mut y = Array2::<C64>::zeros((da * db, m));
    for i in 0..da {
        let rows = s![i * db..(i + 1) * db, ..];
        y.slice_mut(rows).assign(&b.dot(&x.slice(rows)));
    }
    let y = y.into_shape_with_order((da, db * m)).expect("contiguous");
    a.dot(&y).into_shape_with_order((da * db, m)).expect("contiguous")
}

/// Choi matrix of `Ad_R ∘ V ∘ Ad_R†` from that of `V`.
fn conjugate_choi(c: &Array2<C64>, r: &Array2<C64>) -> Array2<C64> {
    let rc = r.mapv(|z| z.conj());
    let left = kron_left_mul(&rc, r, c);
    adjoint_matrix(&kron_left_mul(&rc, r, &adjoint_matrix(&left)))
}

fn rotation_register(theta: f64, phi: f64, n: usize) -> Array2<C64> {
    let r = axis_rotation(theta, phi);
    kron_all(&vec![r; n]).into_matrix()
}

/// Configuration average of the exact one-iteration map.
pub fn average_channel(spec: &SystemSpec, cfg: &ProtocolConfig) -> Result<Channel> {
    average_channel_via(spec, cfg, AveragingPath::Auto)
}

pub fn average_channel_via(spec: &SystemSpec, cfg: &ProtocolConfig, path: AveragingPath) -> Result<Channel> {
    cfg.validate()?;
    let h_s = build_system(spec)?;
    let form = match cfg.axis_mode {
        AxisMode::Form { form } => form,
        _ => CouplingForm::AxisTensorTauX,
    };
    if form != CouplingForm::AxisTensorTauX && !spec.is_qubit() {
        return Err(Error::FormMismatch { form: form.name().into() });
    }
    let ctx = Context { spec, cfg, form, d: spec.dim(), n: spec.n_sites(), h_s };
    let dims = ctx.h_s.subsystem_dims().to_vec();

    let choi = match cfg.averaging {
        AveragingScheme::MonteCarlo { n_samples, seed } => {
            let (lo, hi) = cfg.omega_window;
            let w = 1.0 / n_samples as f64;
            let nodes: Vec<Node> = (0..n_samples as u64)
                .map(|k| {
                    let mut r = rng::stream(seed, 0, k);
                    let axis = match cfg.axis_mode {
                        AxisMode::RandomHaar => rng::haar_axis(&mut r),
                        AxisMode::FixedAxis { theta, phi } => (theta, phi),
                        AxisMode::Form { .. } => (0.0, 0.0),
                    };
                    Node { axis, omega: rng::uniform(&mut r, lo, hi), weight: w }
                })
                .collect();
            ctx.accumulate(&nodes)?
        }
        AveragingScheme::Quadrature { n_cos_theta, n_phi, .. } => {
            let omega = omega_rule(cfg);
            let along = |axis: (f64, f64), scale: f64| -> Vec<Node> {
                omega
                    .nodes
                    .iter()
                    .zip(&omega.weights)
                    .map(|(&o, &w)| Node { axis, omega: o, weight: w * scale })
                    .collect()
            };
            match cfg.axis_mode {
                AxisMode::FixedAxis { theta, phi } => ctx.accumulate(&along((theta, phi), 1.0))?,
                AxisMode::Form { .. } => ctx.accumulate(&along((0.0, 0.0), 1.0))?,
                AxisMode::RandomHaar => {
                    let symmetry = match path {
                        AveragingPath::Direct => Symmetry::None,
                        AveragingPath::Auto => detect_symmetry(&ctx.h_s, ctx.n),
                    };
                    match symmetry {
                        Symmetry::None => {
                            let nodes: Vec<Node> = quadrature::sphere(n_cos_theta, n_phi)
                                .into_iter()
                                .flat_map(|(t, p, w)| along((t, p), w))
                                .collect();
                            ctx.accumulate(&nodes)?
                        }
                        Symmetry::Full => {
                            let cz = ctx.accumulate(&along((0.0, 0.0), 1.0))?;
                            let pts = quadrature::sphere(n_cos_theta, n_phi);
                            twirl(&cz, &pts, ctx.n)
                        }
                        Symmetry::Axial => {
                            let polar = quadrature::polar_rule(n_cos_theta);
                            let az = quadrature::azimuth_rule(n_phi);
                            let mut tree = TreeSum::default();
                            for (&t, &wt) in polar.nodes.iter().zip(&polar.weights) {
                                let c_theta = ctx.accumulate(&along((t, 0.0), 1.0))?;
                                let pts: Vec<(f64, f64, f64)> =
                                    az.nodes.iter().zip(&az.weights).map(|(&p, &wp)| (0.0, p, wt * wp)).collect();
                                tree.push(twirl(&c_theta, &pts, ctx.n));
                            }
                            tree.finish().ok_or(Error::EmptyScheme)?
                        }
                    }
                }
            }
        }
    };
    Ok(Channel::from_choi(&choi, dims, Normalization::Linear))
}

/// `Σ_k w_k Choi(Ad_{R_k} ∘ V ∘ Ad_{R_k}†)` over rotations `R_k = R(θ_k, φ_k)^{⊗n}`.
fn twirl(c: &Array2<C64>, pts: &[(f64, f64, f64)], n: usize) -> Array2<C64> {
    let mut tree = TreeSum::default();
    for chunk in pts.chunks(16) {
        let parts: Vec<Array2<C64>> = chunk
            .par_iter()
            .map(|&(t, p, w)| conjugate_choi(c, &rotation_register(t, p, n)).mapv(|z| z * w))
            .collect();
        let mut it = parts.into_iter();
        let first = it.next().expect("non-empty chunk");
        tree.push(it.fold(first, |acc, m| acc + &m));
    }
    tree.finish().expect("non-empty")
}

// ---------------------------------------------------------------------------
// First-order maps

/// Configuration-averaged first-order map `I + ⟨U_10 • U_10†⟩` in the
/// interaction picture of `H_S`, for `H_SM = γ A ⊗ τ_x`. The default `ω_M`
/// rule is 16 Gauss–Legendre nodes per panel of width at most `2π/t_M`.
pub fn dyson_channel(spec: &SystemSpec, a: &Operator, gamma: f64, t_m: f64, omega_window: (f64, f64)) -> Result<Channel> {
    let (lo, hi) = omega_window;
    let rule = quadrature::uniform_interval(lo, hi, 16, auto_panels(lo, hi, t_m));
    dyson_channel_with_rule(spec, a, gamma, t_m, &rule)
}

pub fn dyson_channel_with_rule(spec: &SystemSpec, a: &Operator, gamma: f64, t_m: f64, rule: &Rule) -> Result<Channel> {
    let h_s = build_system(spec)?;
    let d = h_s.dim();
    if a.dim() != d {
        return Err(Error::DimMismatch { expected: d, found: a.dim() });
    }
    if rule.is_empty() {
        return Err(Error::EmptyScheme);
    }
    let spectrum = eig_hermitian(&h_s)?;
    if gamma > 0.1 * spectrum.spectral_radius() {
        log::warn!("first-order map used with gamma = {gamma} above 0.1 x spectral radius");
    }
    let set = eigenoperators_in(&spectrum, a, spectrum.degeneracy_tol());
    let jumps: Vec<Array2<C64>> = rule
        .nodes
        .iter()
        .map(|&om| {
            let mut u = Array2::<C64>::zeros((d, d));
            for (&g, comp) in set.gaps.iter().zip(&set.components) {
                let x = (g - om) * t_m / 2.0;
                let c = -I * gamma * t_m * C64::from_polar(1.0, -x) * sinc(x);
                u.scaled_add(c, comp.matrix());
            }
            u
        })
        .collect();
    Ok(first_order_channel(&jumps, &rule.weights, h_s.subsystem_dims().to_vec()))
}

fn first_order_channel(jumps: &[Array2<C64>], weights: &[f64], dims: Vec<usize>) -> Channel {
    let d: usize = dims.iter().product();
    let mut tree = TreeSum::default();
    for (chunk_j, chunk_w) in jumps.chunks(64).zip(weights.chunks(64)) {
        let blocks: Vec<Array2<C64>> = chunk_j
            .iter()
            .zip(chunk_w)
            .map(|(u, w)| kraus_columns(&[u], d, w.sqrt()))
            .collect();
        let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
        let y = ndarray::concatenate(ndarray::Axis(1), &views).expect("equal row counts");
        tree.push(choi_from_y(&y));
    }
    let jump = choi_to_superop(&tree.finish().expect("non-empty rule"), d);
    let superop = Array2::<C64>::eye(d * d) + &jump;
    Channel { dims, kraus: None, superop, normalization: Normalization::Renormalized }
}

/// The first-order map of the system coupled at once to every meter of the
/// rule, mode `j` with coupling `γ √w_j A ⊗ τ_{x,j}`.
///
/// Built in the zero- and one-excitation sector of the meter bank from matrix
/// elements of `H_SM` in the eigenbasis of `H_S + H_M`, independently of the
/// eigenoperator decomposition used by [`dyson_channel_with_rule`].
pub fn bath_channel(spec: &SystemSpec, a: &Operator, gamma: f64, t_m: f64, rule: &Rule) -> Result<Channel> {
    let h_s = build_system(spec)?;
    let d = h_s.dim();
    if a.dim() != d {
        return Err(Error::DimMismatch { expected: d, found: a.dim() });
    }
    let modes = rule.len();
    if modes == 0 {
        return Err(Error::EmptyScheme);
    }
    // block 0: all meters down; block 1 + j: meter j up
    let big = d * (modes + 1);
    let mut h0 = Array2::<C64>::zeros((big, big));
    let mut hsm = Array2::<C64>::zeros((big, big));
    for blk in 0..=modes {
        let shift = if blk == 0 { 0.0 } else { rule.nodes[blk - 1] };
        for i in 0..d {
            for j in 0..d {
                h0[(blk * d + i, blk * d + j)] = h_s.matrix()[(i, j)];
            }
            h0[(blk * d + i, blk * d + i)] += C64::new(shift, 0.0);
        }
    }
    for (jm, &w) in rule.weights.iter().enumerate() {
        let g = C64::new(gamma * w.sqrt(), 0.0);
        let off = (jm + 1) * d;
        for i in 0..d {
            for j in 0..d {
                hsm[(off + i, j)] = g * a.matrix()[(i, j)];
            }
        }
    }
    // ⟨vac|H_SM|ê_j⟩ blocks
    let upper = adjoint_matrix(&hsm);
    let hsm = &hsm + &upper;

    let spec0 = eig_hermitian(&Operator::from_matrix(h0)?)?;
    let v = spec0.eigenvectors.matrix();
    let e = &spec0.eigenvalues;
    let mut m = adjoint_matrix(v).dot(&hsm).dot(v);
    for alpha in 0..big {
        for beta in 0..big {
            let x = (e[alpha] - e[beta]) * t_m / 2.0;
            m[(alpha, beta)] *= -I * t_m * C64::from_polar(1.0, x) * sinc(x);
        }
    }
    let u1 = v.dot(&m).dot(&adjoint_matrix(v));
    let jumps: Vec<Array2<C64>> = (0..modes)
        .map(|jm| u1.slice(s![(jm + 1) * d..(jm + 2) * d, 0..d]).to_owned())
        .collect();
    Ok(first_order_channel(&jumps, &vec![1.0; modes], h_s.subsystem_dims().to_vec()))
}

// ---------------------------------------------------------------------------
// Validation

/// Validity diagnostics of a channel.
#[derive(Clone, Debug, Serialize)]
pub struct ChannelDiagnostics {
    /// `max |Σ K†K − I|` when Kraus operators are present, otherwise the
    /// deviation of the trace functional `tr ∘ V` from `tr`.
    pub tp_residual: f64,
    pub choi_min_eigenvalue: f64,
    pub choi_max_eigenvalue: f64,
    pub choi_trace: f64,
    pub spectral_radius: f64,
    pub is_tp: bool,
    pub is_cp: bool,
}

/// TP residual, Choi spectrum bounds and spectral radius. Never fails;
/// numerical failures show up as NaN entries.
pub fn validate_channel(ch: &Channel) -> ChannelDiagnostics {
    let pol = numeric::policy();
    let d = ch.dim();
    let functional = trace_functional_residual(&ch.superop, d);
    let tp_residual = match &ch.kraus {
        Some(ks) => {
            let mut sum = Array2::<C64>::zeros((d, d));
            for k in ks {
                sum = sum + adjoint_matrix(k.matrix()).dot(k.matrix());
            }
            max_abs_diff(&sum, &Array2::eye(d)).max(functional)
        }
        None => functional,
    };
    let choi = Operator::from_parts(ch.choi(), vec![d * d]).hermitian_part();
    let choi_trace = choi.trace().re;
    let (cmin, cmax) = match eig_hermitian(&choi) {
        Ok(s) => (s.eigenvalues[0], s.eigenvalues[s.dim() - 1]),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let spectral_radius = match ch.superop.eigvals() {
        Ok(ev) => ev.iter().fold(0.0_f64, |m, z| m.max(z.norm())),
        Err(_) => f64::NAN,
    };
    ChannelDiagnostics {
        tp_residual,
        choi_min_eigenvalue: cmin,
        choi_max_eigenvalue: cmax,
        choi_trace,
        spectral_radius,
        is_tp: tp_residual <= pol.tp_tol,
        is_cp: cmin >= -pol.cp_slack,
    }
}

/// `max_c |Σ_i S[i + D i, c] − vec(I)_c|`.
pub(crate) fn trace_functional_residual(s: &Array2<C64>, d: usize) -> f64 {
    let mut worst = 0.0_f64;
    for c in 0..d * d {
        let mut acc = ZERO;
        for i in 0..d {
            acc += s[(i + d * i, c)];
        }
        let target = if c % d == c / d { ONE } else { ZERO };
        worst = worst.max((acc - target).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{expect, sigma_minus, sigma_z};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn qubit_cfg(gamma: f64, t_m: f64, window: (f64, f64), scheme: AveragingScheme) -> ProtocolConfig {
        ProtocolConfig { averaging: scheme, ..ProtocolConfig::new(gamma, t_m, window) }
    }

    #[test]
    fn vectorization_round_trip_and_superop_action() {
        let k1 = Operator::from_real(2, &[0.6, 0.1, -0.2, 0.5]).unwrap();
        let k2 = sigma_minus().scale(C64::new(0.3, 0.4));
        let ch = Channel::from_kraus(vec![k1.clone(), k2.clone()]).unwrap();
        let rho = Operator::from_real(2, &[0.7, 0.2, 0.2, 0.3]).unwrap();
        let direct = &k1.dot(&rho).dot(&k1.adjoint()) + &k2.dot(&rho).dot(&k2.adjoint());
        let via = ch.apply_operator(&rho).unwrap();
        assert!(max_abs_diff(direct.matrix(), via.matrix()) < 1e-15);
        // Σ conj(K) ⊗ K
        let s: Array2<C64> = [&k1, &k2]
            .iter()
            .map(|k| crate::operator::kron(&Operator::from_parts(k.matrix().mapv(|z| z.conj()), vec![2]), k).into_matrix())
            .fold(Array2::zeros((4, 4)), |a, b| a + b);
        assert!(max_abs_diff(&s, ch.superop()) < 1e-15);
        let c = ch.choi();
        assert!(max_abs_diff(&choi_to_superop(&c, 2), ch.superop()) < 1e-15);
    }

    #[test]
    fn identity_and_depolarizing_diagnostics() {
        let id = validate_channel(&Channel::identity(vec![3]));
        assert_eq!(id.tp_residual, 0.0);
        assert_abs_diff_eq!(id.choi_max_eigenvalue, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(id.choi_min_eigenvalue, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(id.spectral_radius, 1.0, epsilon = 1e-12);
        let dep = validate_channel(&Channel::depolarizing(2));
        assert!(dep.is_cp && dep.is_tp);
        assert_abs_diff_eq!(dep.choi_min_eigenvalue, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn broken_kraus_set_is_reported() {
        let ch = channel_from_joint(
            &SystemSpec::qubit(1.0),
            &CouplingSample::axis(0.5, 1.0, 0.3, 1.0),
            3.0,
            &MeterSpec::ground(1.0),
        )
        .unwrap();
        let mut ks = ch.kraus().unwrap().to_vec();
        ks.pop();
        let diag = validate_channel(&Channel::from_kraus(ks).unwrap());
        assert!(diag.tp_residual > 1e-3);
        assert!(!diag.is_tp);
    }

    #[test]
    fn decoupled_channel_is_unitary() {
        let spec = SystemSpec::qubit(1.3);
        let t = 2.7;
        let ch = channel_from_joint(&spec, &CouplingSample::axis(0.0, 0.4, 0.2, 0.9), t, &MeterSpec::ground(0.9)).unwrap();
        let u = eig_hermitian(&build_system(&spec).unwrap()).unwrap().propagator(t);
        assert!(max_abs_diff(ch.superop(), Channel::unitary(&u).superop()) < 1e-13);
        let diag = validate_channel(&ch);
        assert!(diag.is_tp && diag.is_cp);
    }

    #[test]
    fn resonant_swap_reaches_ground_state() {
        // co-rotating coupling (γ/2)(σ+τ− + h.c.) at resonance swaps |↑↓⟩ ↔ |↓↑⟩ in t = π/γ
        let (ws, g) = (1.0, 0.1);
        let spec = SystemSpec::qubit(ws);
        let ch = channel_from_joint(&spec, &CouplingSample::form(g, CouplingForm::CoRotating, ws), PI / g, &MeterSpec::ground(ws))
            .unwrap();
        let h = build_system(&spec).unwrap();
        for rho in [
            DensityMatrix::basis(vec![2], 0).unwrap(),
            DensityMatrix::maximally_mixed(vec![2]),
            DensityMatrix::new(Operator::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap()).unwrap(),
        ] {
            let out = ch.apply(&rho).unwrap();
            assert_abs_diff_eq!(expect(&h, &out).unwrap(), -ws / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn thermal_kraus_set_is_valid() {
        let ch = channel_from_joint(
            &SystemSpec::chain(&[1.0, 0.5]),
            &CouplingSample { gamma: 0.3, axes: vec![(0.3, 0.1), (1.2, 2.0)], omega_m: 0.8, form: CouplingForm::AxisTensorTauX },
            4.0,
            &MeterSpec { omega_m: 0.8, beta_m: 1.5 },
        )
        .unwrap();
        assert_eq!(ch.kraus().unwrap().len(), 16);
        let diag = validate_channel(&ch);
        assert!(diag.tp_residual < 1e-12, "{diag:?}");
        assert!(diag.is_cp);
    }

    #[test]
    fn single_point_average_equals_member() {
        let spec = SystemSpec::qubit(1.0);
        let mut cfg = qubit_cfg(
            0.2,
            5.0,
            (0.7, 0.7),
            AveragingScheme::Quadrature { n_cos_theta: 1, n_phi: 1, n_omega: 1, omega_panels: 1 },
        );
        cfg.axis_mode = AxisMode::FixedAxis { theta: 0.8, phi: 0.4 };
        let avg = average_channel(&spec, &cfg).unwrap();
        let one = channel_from_joint(&spec, &CouplingSample::axis(0.2, 0.8, 0.4, 0.7), 5.0, &MeterSpec::ground(0.7)).unwrap();
        assert!(max_abs_diff(avg.superop(), one.superop()) < 1e-14);
    }

    #[test]
    fn zero_coupling_average_is_free_evolution() {
        let spec = SystemSpec::chain(&[1.0, 1.0, 0.0]);
        let cfg = qubit_cfg(
            0.0,
            3.0,
            (0.0, 1.1),
            AveragingScheme::Quadrature { n_cos_theta: 2, n_phi: 2, n_omega: 2, omega_panels: 1 },
        );
        let avg = average_channel(&spec, &cfg).unwrap();
        let u = eig_hermitian(&build_system(&spec).unwrap()).unwrap().propagator(3.0);
        assert!(max_abs_diff(avg.superop(), Channel::unitary(&u).superop()) < 1e-12);
    }

    #[test]
    fn axis_rotation_maps_z_to_axis() {
        for (t, p) in [(0.3, 0.0), (1.2, 2.5), (PI, -0.7)] {
            let r = axis_rotation(t, p);
            let rot = r.dot(&sigma_z()).dot(&r.adjoint());
            assert!(max_abs_diff(rot.matrix(), crate::operator::pauli_axis(t, p).matrix()) < 1e-15);
        }
    }

    #[test]
    fn symmetric_paths_match_direct_evaluation() {
        let scheme = AveragingScheme::Quadrature { n_cos_theta: 3, n_phi: 4, n_omega: 3, omega_panels: 2 };
        for spec in [SystemSpec::qubit(1.0), SystemSpec::chain(&[1.0, 0.7])] {
            let mut cfg = qubit_cfg(0.3, 4.0, (0.2, 2.0), scheme);
            cfg.meter_beta = 1.0;
            let fast = average_channel_via(&spec, &cfg, AveragingPath::Auto).unwrap();
            let slow = average_channel_via(&spec, &cfg, AveragingPath::Direct).unwrap();
            assert!(max_abs_diff(fast.superop(), slow.superop()) < 1e-13);
        }
        assert_eq!(detect_symmetry(&build_system(&SystemSpec::qubit(1.0)).unwrap(), 1), Symmetry::Axial);
        assert_eq!(detect_symmetry(&build_system(&SystemSpec::chain(&[1.0, 1.0, 0.0])).unwrap(), 3), Symmetry::Full);
        let tilted = SystemSpec::Qubit { omega_s: 1.0, axis: (0.4, 0.0) };
        assert_eq!(detect_symmetry(&build_system(&tilted).unwrap(), 1), Symmetry::None);
    }

    #[test]
    fn averaged_channels_are_valid() {
        let spec = SystemSpec::qubit(1.0);
        let cfg = qubit_cfg(0.05, 40.0, (0.1, 3.0), AveragingScheme::Quadrature {
            n_cos_theta: 4,
            n_phi: 4,
            n_omega: 8,
            omega_panels: 0,
        });
        let diag = validate_channel(&average_channel(&spec, &cfg).unwrap());
        assert!(diag.is_tp && diag.is_cp, "{diag:?}");
        assert!(diag.spectral_radius <= 1.0 + 1e-9);
        assert_abs_diff_eq!(diag.choi_trace, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn monte_carlo_average_is_deterministic() {
        let spec = SystemSpec::qubit(1.0);
        let cfg = qubit_cfg(0.1, 10.0, (0.1, 3.0), AveragingScheme::MonteCarlo { n_samples: 50, seed: 11 });
        let a = average_channel(&spec, &cfg).unwrap();
        let b = average_channel(&spec, &cfg).unwrap();
        assert_eq!(a.superop(), b.superop());
    }

    #[test]
    fn tree_sum_is_order_fixed() {
        let mats: Vec<Array2<C64>> = (0..7).map(|k| Array2::from_elem((1, 1), C64::new(0.1 * k as f64, 0.0))).collect();
        let mut t = TreeSum::default();
        for m in &mats {
            t.push(m.clone());
        }
        // ((0+1)+(2+3)) + ((4+5)+6)
        let expected = ((mats[0][(0, 0)] + mats[1][(0, 0)]) + (mats[2][(0, 0)] + mats[3][(0, 0)]))
            + ((mats[4][(0, 0)] + mats[5][(0, 0)]) + mats[6][(0, 0)]);
        assert_eq!(t.finish().unwrap()[(0, 0)], expected);
    }

    #[test]
    fn dyson_and_bath_paths_coincide() {
        let spec = SystemSpec::qubit(1.0);
        let rule = quadrature::uniform_interval(0.5, 1.5, 6, 3);
        let a = sigma_x();
        let dy = dyson_channel_with_rule(&spec, &a, 0.01, 20.0, &rule).unwrap();
        let bath = bath_channel(&spec, &a, 0.01, 20.0, &rule).unwrap();
        assert!(max_abs_diff(dy.superop(), bath.superop()) < 1e-12);
        assert_eq!(dy.normalization(), Normalization::Renormalized);
    }

    #[test]
    fn dyson_zero_coupling_is_identity() {
        let ch = dyson_channel(&SystemSpec::qubit(1.0), &sigma_x(), 0.0, 10.0, (0.5, 1.5)).unwrap();
        assert!(max_abs_diff(ch.superop(), &Array2::eye(4)) == 0.0);
    }
}
