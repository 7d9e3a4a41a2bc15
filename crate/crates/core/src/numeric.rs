//! Process-wide numeric tolerances.

use std::sync::RwLock;

/// Tolerances shared by every validity check in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericPolicy {
    /// Hermiticity check for generators and observables (relative to the largest entry).
    pub hermitian_tol: f64,
    /// Hermiticity check for density matrices (absolute).
    pub state_hermitian_tol: f64,
    /// Unitarity check `U U† = I`.
    pub unitary_tol: f64,
    /// Allowed negative eigenvalue of a density matrix.
    pub psd_slack: f64,
    /// Allowed deviation of a density matrix trace from one.
    pub trace_tol: f64,
    /// Trace preservation of channels.
    pub tp_tol: f64,
    /// Allowed negative Choi eigenvalue.
    pub cp_slack: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-10,
            state_hermitian_tol: 1e-12,
            unitary_tol: 1e-10,
            psd_slack: 1e-10,
            trace_tol: 1e-10,
            tp_tol: 1e-9,
            cp_slack: 1e-9,
        }
    }
}

static POLICY: RwLock<Option<NumericPolicy>> = RwLock::new(None);

/// The active policy.
pub fn policy() -> NumericPolicy {
    POLICY
        .read()
        .map(|p| p.unwrap_or_default())
        .unwrap_or_default()
}

/// Replace the active policy for the whole process.
pub fn set_policy(policy: NumericPolicy) {
    if let Ok(mut slot) = POLICY.write() {
        *slot = Some(policy);
    }
}
