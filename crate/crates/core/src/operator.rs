//! Dense complex operator algebra.
//!
//! Basis convention for every two-level factor: index 0 is `|↑⟩`, index 1 is
//! `|↓⟩`, so `σ_z = diag(1, −1)` and `σ_+ = |↑⟩⟨↓|`. Composite spaces order
//! factors left to right, the first factor being the slowest index.

use std::ops::{Add, Mul, Sub};

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A dense square complex matrix together with its tensor-factor layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: Array2<C64>,
    dims: Vec<usize>,
}

impl Operator {
    /// Wraps a square matrix whose dimension equals the product of `dims`.
    pub fn new(mat: Array2<C64>, dims: Vec<usize>) -> Result<Self> {
        let (rows, cols) = mat.dim();
        if rows != cols {
            return Err(Error::InvalidOperator(format!("matrix is {rows}x{cols}, not square")));
        }
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadSubsystemSpec(format!("subsystem dims {dims:?}")));
        }
        let prod: usize = dims.iter().product();
        if prod != rows {
            return Err(Error::BadSubsystemSpec(format!(
                "subsystem dims {dims:?} multiply to {prod}, matrix has dim {rows}"
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        Ok(Self { mat, dims })
    }

    /// Wraps a square matrix as a single subsystem.
    pub fn from_matrix(mat: Array2<C64>) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, vec![n])
    }

    /// Row-major real entries, convenient for small literals.
    pub fn from_real(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimMismatch { expected: n * n, found: entries.len() });
        }
        let mat = Array2::from_shape_fn((n, n), |(i, j)| C64::new(entries[i * n + j], 0.0));
        Self::from_matrix(mat)
    }

    pub(crate) fn from_parts(mat: Array2<C64>, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.nrows());
        Self { mat, dims }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(Array2::eye(n), vec![n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_parts(Array2::zeros((n, n)), vec![n])
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut mat = Array2::zeros((n, n));
        for (k, &v) in values.iter().enumerate() {
            mat[(k, k)] = C64::new(v, 0.0);
        }
        Self::from_parts(mat, vec![n])
    }

    /// Rank-one projector `|ψ⟩⟨ψ|` (not normalized).
    pub fn outer(psi: &Array1<C64>) -> Self {
        let n = psi.len();
        let mat = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Self::from_parts(mat, vec![n])
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    /// Same matrix with a different factor layout.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        let prod: usize = dims.iter().product();
        if dims.is_empty() || prod != self.dim() {
            return Err(Error::BadSubsystemSpec(format!(
                "dims {dims:?} do not factor dimension {}",
                self.dim()
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.mat.t().mapv(|z| z.conj()), self.dims.clone())
    }

    pub fn dot(&self, other: &Operator) -> Self {
        Self::from_parts(self.mat.dot(&other.mat), self.dims.clone())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_parts(self.mat.mapv(|z| z * c), self.dims.clone())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self::from_parts(self.mat.mapv(|z| z * c), self.dims.clone())
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self::from_parts(
            self.mat.dot(&other.mat) - other.mat.dot(&self.mat),
            self.dims.clone(),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.mat)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// `max |A − A†|` over entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermiticity relative to the larger of one and the largest entry.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.max_abs().max(1.0)
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let h = (&self.mat + &self.mat.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        Self::from_parts(h, self.dims.clone())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.dim();
        let prod = self.mat.dot(&self.mat.t().mapv(|z| z.conj()));
        let eye = Array2::<C64>::eye(n);
        max_abs_diff(&prod, &eye) <= tol
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator::from_parts(&self.mat + &rhs.mat, self.dims.clone())
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator::from_parts(&self.mat - &rhs.mat, self.dims.clone())
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.dot(rhs)
    }
}

pub(crate) fn frobenius(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

pub(crate) fn adjoint_matrix(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

// ---------------------------------------------------------------------------
// Pauli algebra

pub fn identity2() -> Operator {
    Operator::identity(2)
}

pub fn sigma_x() -> Operator {
    Operator::from_parts(
        ndarray::arr2(&[[ZERO, ONE], [ONE, ZERO]]),
        vec![2],
    )
}

pub fn sigma_y() -> Operator {
    Operator::from_parts(ndarray::arr2(&[[ZERO, -I], [I, ZERO]]), vec![2])
}

pub fn sigma_z() -> Operator {
    Operator::diag(&[1.0, -1.0])
}

/// `σ_+ = |↑⟩⟨↓|`.
pub fn sigma_plus() -> Operator {
    Operator::from_parts(ndarray::arr2(&[[ZERO, ONE], [ZERO, ZERO]]), vec![2])
}

/// `σ_− = |↓⟩⟨↑|`.
pub fn sigma_minus() -> Operator {
    Operator::from_parts(ndarray::arr2(&[[ZERO, ZERO], [ONE, ZERO]]), vec![2])
}

/// Pauli matrix along the Bloch direction `(θ, φ)`.
pub fn pauli_axis(theta: f64, phi: f64) -> Operator {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let mat = ndarray::arr2(&[
        [C64::new(ct, 0.0), C64::new(st * cp, -st * sp)],
        [C64::new(st * cp, st * sp), C64::new(-ct, 0.0)],
    ]);
    Operator::from_parts(mat, vec![2])
}

/// Kronecker product; subsystem layouts are concatenated.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.dim(), b.dim());
    let mut mat = Array2::<C64>::zeros((na * nb, na * nb));
    for i in 0..na {
        for j in 0..na {
            let aij = a.mat[(i, j)];
            if aij == ZERO {
                continue;
            }
            let mut block = mat.slice_mut(s![i * nb..(i + 1) * nb, j * nb..(j + 1) * nb]);
            block.zip_mut_with(&b.mat, |x, &y| *x = aij * y);
        }
    }
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Operator::from_parts(mat, dims)
}

/// Kronecker product of a list, left to right.
pub fn kron_all(ops: &[Operator]) -> Operator {
    let mut iter = ops.iter();
    let first = iter.next().expect("kron_all needs at least one operator").clone();
    iter.fold(first, |acc, op| kron(&acc, op))
}

// ---------------------------------------------------------------------------
// Spectra

/// Eigendecomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Array1<f64>,
    /// Eigenvectors in columns, matching `eigenvalues`.
    pub eigenvectors: Operator,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> Operator {
        let v = self.eigenvectors.matrix();
        let mut scaled = v.clone();
        for (mut col, &lam) in scaled.columns_mut().into_iter().zip(self.eigenvalues.iter()) {
            col.mapv_inplace(|z| z * lam);
        }
        Operator::from_parts(scaled.dot(&adjoint_matrix(v)), self.eigenvectors.dims.clone())
    }

    /// `e^{−iHt} = V e^{−iΛt} V†`.
    pub fn propagator(&self, t: f64) -> Operator {
        let v = self.eigenvectors.matrix();
        let w = self.phased_vectors(t);
        Operator::from_parts(w.dot(&adjoint_matrix(v)), self.eigenvectors.dims.clone())
    }

    /// Selected columns of `e^{−iHt}`.
    pub fn propagator_columns(&self, t: f64, cols: &[usize]) -> Array2<C64> {
        let v = self.eigenvectors.matrix();
        let w = self.phased_vectors(t);
        let mut vdag_cols = Array2::<C64>::zeros((self.dim(), cols.len()));
        for (k, &c) in cols.iter().enumerate() {
            for r in 0..self.dim() {
                vdag_cols[(r, k)] = v[(c, r)].conj();
            }
        }
        w.dot(&vdag_cols)
    }

    fn phased_vectors(&self, t: f64) -> Array2<C64> {
        let mut w = self.eigenvectors.matrix().clone();
        for (mut col, &lam) in w.columns_mut().into_iter().zip(self.eigenvalues.iter()) {
            let phase = C64::from_polar(1.0, -lam * t);
            col.mapv_inplace(|z| z * phase);
        }
        w
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    /// Degeneracy tolerance scaled by the spectral radius.
    pub fn degeneracy_tol(&self) -> f64 {
        1e-9 * self.spectral_radius().max(f64::MIN_POSITIVE)
    }

    /// Projector onto the eigenspace of the lowest eigenvalue.
    pub fn ground_projector(&self, tol: f64) -> Operator {
        let e0 = self.eigenvalues[0];
        let cols: Vec<usize> = (0..self.dim())
            .filter(|&k| self.eigenvalues[k] - e0 <= tol)
            .collect();
        self.projector(&cols)
    }

    /// Projector onto the span of the given eigenvector columns.
    pub fn projector(&self, cols: &[usize]) -> Operator {
        let v = self.eigenvectors.matrix();
        let sub = v.select(ndarray::Axis(1), cols);
        Operator::from_parts(sub.dot(&adjoint_matrix(&sub)), self.eigenvectors.dims.clone())
    }
}

/// Hermitian eigendecomposition, ascending eigenvalues.
///
/// The matrix is split into the connected components of its non-zero
/// pattern first, so conserved-charge sectors are diagonalized separately.
pub fn eig_hermitian(h: &Operator) -> Result<Spectrum> {
    let tol = numeric::policy().hermitian_tol;
    if !h.is_hermitian(tol) {
        return Err(Error::NotHermitian { deviation: h.hermitian_deviation() });
    }
    let n = h.dim();
    let herm = h.hermitian_part();
    let blocks = sparsity_blocks(herm.matrix());
    let mut values = Vec::with_capacity(n);
    let mut vectors = Array2::<C64>::zeros((n, n));
    let mut col = 0;
    for block in &blocks {
        let sub = herm.matrix().select(ndarray::Axis(0), block).select(ndarray::Axis(1), block);
        let (w, v) = if block.len() == 1 {
            (Array1::from_elem(1, sub[(0, 0)].re), Array2::eye(1))
        } else {
            sub.eigh(UPLO::Upper)?
        };
        for k in 0..block.len() {
            values.push((w[k], col));
            for (r, &row) in block.iter().enumerate() {
                vectors[(row, col)] = v[(r, k)];
            }
            col += 1;
        }
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let order: Vec<usize> = values.iter().map(|&(_, c)| c).collect();
    let eigenvalues = Array1::from_iter(values.iter().map(|&(w, _)| w));
    let eigenvectors = vectors.select(ndarray::Axis(1), &order);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Operator::from_parts(eigenvectors, h.dims.clone()),
    })
}

/// Connected components of the graph with an edge wherever `m[i][j] ≠ 0`.
fn sparsity_blocks(m: &Array2<C64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

/// `e^{−iHt}` via the Hermitian eigendecomposition.
pub fn expm_hermitian_prop(h: &Operator, t: f64) -> Result<Operator> {
    Ok(eig_hermitian(h)?.propagator(t))
}

// ---------------------------------------------------------------------------
// Density matrices

/// A Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity against the numeric policy.
    pub fn new(op: Operator) -> Result<Self> {
        let pol = numeric::policy();
        let dev = op.hermitian_deviation();
        if dev > pol.state_hermitian_tol {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > pol.trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let op = op.hermitian_part();
        let spec = eig_hermitian(&op)?;
        if spec.eigenvalues[0] < -pol.psd_slack {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                spec.eigenvalues[0]
            )));
        }
        Ok(Self { op })
    }

    /// Hermitizes and renormalizes without the positivity check; for outputs of
    /// maps already known to be positive.
    pub(crate) fn from_map_output(op: Operator) -> Self {
        let herm = op.hermitian_part();
        let tr = herm.trace().re;
        let op = if tr != 0.0 { herm.scale_real(1.0 / tr) } else { herm };
        Self { op }
    }

    pub fn from_pure(psi: &Array1<C64>, dims: Vec<usize>) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let op = Operator::outer(psi).scale_real(1.0 / norm2).with_dims(dims)?;
        Ok(Self::from_map_output(op))
    }

    /// Projector onto basis state `index`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n: usize = dims.iter().product();
        if index >= n {
            return Err(Error::InvalidState(format!("basis index {index} out of range {n}")));
        }
        let mut mat = Array2::zeros((n, n));
        mat[(index, index)] = ONE;
        Ok(Self { op: Operator::new(mat, dims)? })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        let mat = Array2::<C64>::eye(n).mapv(|z| z / n as f64);
        Self { op: Operator::from_parts(mat, dims) }
    }

    /// Normalized projector onto the ground eigenspace of `h`.
    pub fn ground_state(h: &Operator) -> Result<Self> {
        let spec = eig_hermitian(h)?;
        let p = spec.ground_projector(spec.degeneracy_tol());
        Ok(Self::from_map_output(p))
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &Array2<C64> {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        self.op.subsystem_dims()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eig_hermitian(&self.op)?.eigenvalues[0])
    }

    /// `‖A − B‖₁` via the eigenvalues of the Hermitian difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        trace_norm(&(&self.op - &other.op))
    }
}

/// Trace norm of a Hermitian operator.
pub fn trace_norm(h: &Operator) -> Result<f64> {
    let spec = eig_hermitian(&h.hermitian_part())?;
    Ok(spec.eigenvalues.iter().map(|x| x.abs()).sum())
}

/// Product state of two density matrices.
pub fn kron_state(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix { op: kron(&a.op, &b.op) }
}

/// Reduced state on the subsystems listed in `keep` (ascending, distinct).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix { op: partial_trace_op(rho.operator(), keep)? })
}

pub(crate) fn partial_trace_op(op: &Operator, keep: &[usize]) -> Result<Operator> {
    let dims = op.subsystem_dims();
    if keep.is_empty() {
        return Err(Error::BadSubsystemSpec("keep set is empty".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || *keep.last().unwrap() >= dims.len() {
        return Err(Error::BadSubsystemSpec(format!(
            "keep {keep:?} is not an ascending subset of {} subsystems",
            dims.len()
        )));
    }
    if keep.len() == dims.len() {
        return Ok(op.clone());
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();

    // full index of (kept multi-index, traced multi-index)
    let strides: Vec<usize> = (0..dims.len())
        .map(|k| dims[k + 1..].iter().product())
        .collect();
    let index_of = |flat: usize, subs: &[usize]| -> Vec<usize> {
        let mut out = vec![0; subs.len()];
        let mut rem = flat;
        for (pos, &k) in subs.iter().enumerate().rev() {
            out[pos] = rem % dims[k];
            rem /= dims[k];
        }
        out
    };
    let mut full = vec![0usize; dk * dt];
    for a in 0..dk {
        let ka = index_of(a, keep);
        for b in 0..dt {
            let tb = index_of(b, &traced);
            let mut f = 0;
            for (pos, &k) in keep.iter().enumerate() {
                f += ka[pos] * strides[k];
            }
            for (pos, &k) in traced.iter().enumerate() {
                f += tb[pos] * strides[k];
            }
            full[a * dt + b] = f;
        }
    }
    let m = op.matrix();
    let mut out = Array2::<C64>::zeros((dk, dk));
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(full[i * dt + t], full[j * dt + t])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(Operator::from_parts(out, kept_dims))
}

/// `Re tr(O ρ)`.
pub fn expect(obs: &Operator, rho: &DensityMatrix) -> Result<f64> {
    Ok(expect_with_residual(obs, rho)?.0)
}

/// `tr(O ρ)` split into the real value and the magnitude of its imaginary part.
pub fn expect_with_residual(obs: &Operator, rho: &DensityMatrix) -> Result<(f64, f64)> {
    if obs.dim() != rho.dim() {
        return Err(Error::DimMismatch { expected: obs.dim(), found: rho.dim() });
    }
    let v = trace_of_product(obs.matrix(), rho.matrix());
    Ok((v.re, v.im.abs()))
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: &Operator, b: &Operator, tol: f64) -> bool {
        max_abs_diff(a.matrix(), b.matrix()) <= tol
    }

    #[test]
    fn pauli_axis_poles_and_equator() {
        assert!(close(&pauli_axis(0.0, 0.0), &sigma_z(), 1e-15));
        assert!(close(&pauli_axis(FRAC_PI_2, 0.0), &sigma_x(), 1e-15));
        assert!(close(&pauli_axis(FRAC_PI_2, FRAC_PI_2), &sigma_y(), 1e-15));
        let s = pauli_axis(1.1, -0.4);
        assert!(s.is_hermitian(1e-14));
        assert!(close(&s.dot(&s), &identity2(), 1e-14));
        assert!(s.trace().norm() < 1e-15);
    }

    #[test]
    fn kron_examples() {
        assert!(close(&kron(&identity2(), &identity2()), &Operator::identity(4), 0.0));
        assert!(close(&kron(&sigma_z(), &identity2()), &Operator::diag(&[1.0, 1.0, -1.0, -1.0]), 0.0));
        let xx = kron(&sigma_x(), &sigma_x());
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i + j == 3 { ONE } else { ZERO };
                assert_eq!(xx.matrix()[(i, j)], expect);
            }
        }
        assert_eq!(xx.subsystem_dims(), &[2, 2]);
    }

    #[test]
    fn eig_of_paulis() {
        let s = eig_hermitian(&sigma_z()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-15);
        let s = eig_hermitian(&sigma_x()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-14);
        // ground vector ∝ |↑⟩ − |↓⟩
        let v = s.eigenvectors.matrix();
        let ratio = v[(1, 0)] / v[(0, 0)];
        assert_abs_diff_eq!(ratio.re, -1.0, epsilon = 1e-12);
        assert!(close(&s.reconstruct(), &sigma_x(), 1e-14));
    }

    #[test]
    fn eig_two_spin_heisenberg() {
        // J S1·S2 with J = 1: singlet −3/4, triplet 1/4
        let ops = [sigma_x(), sigma_y(), sigma_z()];
        let mut h = Operator::zeros(4);
        for p in &ops {
            h = &h + &kron(p, p).scale_real(0.25);
        }
        let s = eig_hermitian(&h).unwrap();
        let expected = [-0.75, 0.25, 0.25, 0.25];
        for (a, b) in s.eigenvalues.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let err = eig_hermitian(&sigma_plus()).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn propagator_examples() {
        let t = 0.7;
        let u = expm_hermitian_prop(&sigma_z(), t).unwrap();
        assert_abs_diff_eq!((u.matrix()[(0, 0)] - C64::from_polar(1.0, -t)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((u.matrix()[(1, 1)] - C64::from_polar(1.0, t)).norm(), 0.0, epsilon = 1e-15);
        let h = &sigma_x() + &sigma_z().scale_real(0.3);
        assert!(close(&expm_hermitian_prop(&h, 0.0).unwrap(), &identity2(), 1e-15));
        let u = expm_hermitian_prop(&sigma_x(), FRAC_PI_2).unwrap();
        assert!(close(&u, &sigma_x().scale(-I), 1e-15));
        assert!(u.is_unitary(1e-12));
    }

    #[test]
    fn partial_trace_examples() {
        let rho_s = DensityMatrix::new(Operator::from_real(2, &[0.7, 0.1, 0.1, 0.3]).unwrap()).unwrap();
        let down = DensityMatrix::basis(vec![2], 1).unwrap();
        let joint = kron_state(&rho_s, &down);
        let red = partial_trace(&joint, &[0]).unwrap();
        assert!(close(red.operator(), rho_s.operator(), 1e-15));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = Array1::from(vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]);
        let bell = DensityMatrix::from_pure(&bell, vec![2, 2]).unwrap();
        let red = partial_trace(&bell, &[0]).unwrap();
        assert!(close(red.operator(), &Operator::identity(2).scale_real(0.5), 1e-15));

        let all = partial_trace(&bell, &[0, 1]).unwrap();
        assert!(close(all.operator(), bell.operator(), 0.0));
        assert!(matches!(partial_trace(&bell, &[]), Err(Error::BadSubsystemSpec(_))));
        assert!(matches!(partial_trace(&bell, &[2]), Err(Error::BadSubsystemSpec(_))));
    }

    #[test]
    fn partial_trace_middle_factor() {
        // ρ_A ⊗ ρ_B ⊗ ρ_C, keep A and C
        let a = DensityMatrix::new(Operator::from_real(2, &[0.6, 0.2, 0.2, 0.4]).unwrap()).unwrap();
        let b = DensityMatrix::maximally_mixed(vec![3]);
        let c = DensityMatrix::new(Operator::from_real(2, &[0.9, 0.0, 0.0, 0.1]).unwrap()).unwrap();
        let abc = kron_state(&kron_state(&a, &b), &c);
        let ac = partial_trace(&abc, &[0, 2]).unwrap();
        assert!(close(ac.operator(), kron_state(&a, &c).operator(), 1e-15));
        assert_eq!(ac.subsystem_dims(), &[2, 2]);
    }

    #[test]
    fn expectation_examples() {
        let down = DensityMatrix::basis(vec![2], 1).unwrap();
        assert_abs_diff_eq!(expect(&sigma_z(), &down).unwrap(), -1.0);
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        assert_abs_diff_eq!(expect(&sigma_z(), &mixed).unwrap(), 0.0);
        let h = sigma_z().scale_real(0.5);
        let g = DensityMatrix::ground_state(&h).unwrap();
        assert_abs_diff_eq!(expect(&h, &g).unwrap(), -0.5, epsilon = 1e-15);
        assert!(matches!(
            expect(&Operator::identity(4), &g),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Operator::from_real(2, &[1.2, 0.0, 0.0, -0.2]).unwrap()).is_err());
        assert!(DensityMatrix::new(Operator::from_real(2, &[0.5, 0.0, 0.0, 0.6]).unwrap()).is_err());
        assert!(DensityMatrix::new(sigma_plus()).is_err());
        assert!(Operator::new(Array2::eye(4), vec![2, 3]).is_err());
        let mut bad = Array2::<C64>::eye(2);
        bad[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(Operator::from_matrix(bad).is_err());
    }

    #[test]
    fn blocked_eig_matches_dense_structure() {
        // block-diagonal with a permutation: {0,2} coupled, {1,3} coupled
        let h = Operator::from_real(4, &[
            1.0, 0.0, 0.5, 0.0,
            0.0, -1.0, 0.0, 0.2,
            0.5, 0.0, 2.0, 0.0,
            0.0, 0.2, 0.0, 0.3,
        ]).unwrap();
        let s = eig_hermitian(&h).unwrap();
        assert!(close(&s.reconstruct(), &h, 1e-14));
        assert!(s.eigenvectors.is_unitary(1e-13));
        assert!(s.eigenvalues.windows(2).into_iter().all(|w| w[0] <= w[1]));
        let _ = PI;
    }
}
