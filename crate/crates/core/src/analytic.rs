//! Closed forms for a single qubit coupled through `(γ/2) σ_x τ_x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sin(x)/x` with the value 1 at zero.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Parameters of one qubit interaction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub omega_s: f64,
    pub omega_m: f64,
    pub gamma: f64,
    pub t_m: f64,
    /// Excited-state population of the meter, in `[0, 1/2]`.
    #[serde(default)]
    pub n_m: f64,
}

impl QubitParams {
    pub fn new(omega_s: f64, omega_m: f64, gamma: f64, t_m: f64) -> Self {
        Self { omega_s, omega_m, gamma, t_m, n_m: 0.0 }
    }

    pub fn with_occupation(mut self, n_m: f64) -> Self {
        self.n_m = n_m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega_m > 0.0
            && self.gamma >= 0.0
            && self.t_m >= 0.0
            && (0.0..=0.5).contains(&self.n_m)
            && self.omega_s.is_finite()
            && self.omega_m.is_finite()
            && self.gamma.is_finite()
            && self.t_m.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad qubit parameters {self:?}")))
        }
    }

    /// `ω̃_S = ω_S (1 − 2 n_M)`.
    pub fn omega_tilde(&self) -> f64 {
        self.omega_s * (1.0 - 2.0 * self.n_m)
    }

    pub fn mu(&self) -> f64 {
        self.gamma.hypot(self.omega_s + self.omega_m)
    }

    pub fn nu(&self) -> f64 {
        self.gamma.hypot(self.omega_s - self.omega_m)
    }

    /// `(sin²(μ t_M/2), sin²(ν t_M/2))`.
    fn sines(&self) -> (f64, f64) {
        let s = |w: f64| (0.5 * w * self.t_m).sin().powi(2);
        (s(self.mu()), s(self.nu()))
    }

    /// Per-step transition weights `(γ²/μ²) sin²(μt/2)` and `(γ²/ν²) sin²(νt/2)`.
    fn weights(&self) -> (f64, f64) {
        let (s_mu, s_nu) = self.sines();
        let g2 = self.gamma * self.gamma;
        let w = |f: f64, s: f64| if g2 == 0.0 { 0.0 } else { g2 / (f * f) * s };
        (w(self.mu(), s_mu), w(self.nu(), s_nu))
    }

    /// The factor `1 − (γ²/μ²) sin²(μt/2) − (γ²/ν²) sin²(νt/2)` by which the
    /// distance to the steady energy shrinks per iteration.
    pub fn contraction_factor(&self) -> f64 {
        let (a, b) = self.weights();
        1.0 - a - b
    }
}

/// `√((γ/2)² + 1/t_M²)`.
pub fn energy_estimate(gamma: f64, t_m: f64) -> f64 {
    (0.5 * gamma).hypot(1.0 / t_m)
}

/// One iteration of the energy recursion: `(E(n+1), E_μ, E_ν)`.
pub fn recursion_step(p: &QubitParams, e_n: f64) -> (f64, f64, f64) {
    let (a, b) = p.weights();
    let half = 0.5 * p.omega_tilde();
    let e_mu = a * (half - e_n);
    let e_nu = -b * (half + e_n);
    (e_n + e_mu + e_nu, e_mu, e_nu)
}

/// Energy after `n` iterations from `e_0`.
pub fn closed_form_energy(p: &QubitParams, e_0: f64, n: u64) -> f64 {
    let (a, b) = p.weights();
    if a + b == 0.0 {
        return e_0;
    }
    let e_inf = 0.5 * p.omega_tilde() * (a - b) / (a + b);
    let c = 1.0 - a - b;
    e_inf + c.powf(n as f64) * (e_0 - e_inf)
}

/// `n → ∞` limit; `Undefined` when both transition terms vanish.
pub fn steady_energy(p: &QubitParams) -> Result<f64> {
    let (s_mu, s_nu) = p.sines();
    let (mu2, nu2) = (p.mu().powi(2), p.nu().powi(2));
    let den = mu2 * s_nu + nu2 * s_mu;
    if !(den > 1e-300) {
        return Err(Error::Undefined);
    }
    Ok(-0.5 * p.omega_tilde() * (mu2 * s_nu - nu2 * s_mu) / den)
}

/// `β_S = β_M ω_M / ω_S`.
pub fn effective_beta(p: &QubitParams, beta_m: f64) -> Result<f64> {
    if !(p.omega_s > 0.0) {
        return Err(Error::InvalidParameter(format!("effective temperature needs omega_s > 0, got {}", p.omega_s)));
    }
    Ok(beta_m * p.omega_m / p.omega_s)
}

/// Counter-rotating over co-rotating amplitude ratio at time `t`.
/// Returns `f64::INFINITY` at its poles.
pub fn rwa_amplitude_ratio(p: &QubitParams, t: f64) -> f64 {
    let dp = p.omega_s + p.omega_m;
    let dm = p.omega_s - p.omega_m;
    if dm == 0.0 {
        return 0.0;
    }
    if dp == 0.0 {
        return f64::INFINITY;
    }
    let x = 0.5 * dm * t;
    if x != 0.0 && x.sin().abs() < 1e-12 {
        return f64::INFINITY;
    }
    (dm / dp * sinc(0.5 * dp * t) / sinc(x)).abs()
}

/// `|E_counter / E_co|` for one iteration starting at energy 0.
pub fn co_counter_ratio(p: &QubitParams) -> f64 {
    co_counter_ratio_at(p, 0.0)
}

/// `|E_counter / E_co|` for one iteration starting at energy `e_n`.
///
/// For `ω_S > 0` the co-rotating part is `E_ν`, otherwise `E_μ`. Returns
/// `f64::INFINITY` where the co-rotating part vanishes and 0 where both do.
pub fn co_counter_ratio_at(p: &QubitParams, e_n: f64) -> f64 {
    if p.gamma == 0.0 {
        return 0.0;
    }
    let (s_mu, s_nu) = p.sines();
    let half = 0.5 * p.omega_tilde();
    let (_, e_mu, e_nu) = recursion_step(p, e_n);
    // vanishing factors of each term, tested separately so float noise in
    // sin(nπ) is not mistaken for a finite contribution
    let scale = p.omega_s.abs().max(f64::MIN_POSITIVE);
    let mu_zero = s_mu < 1e-24 || (half - e_n).abs() < 1e-12 * scale;
    let nu_zero = s_nu < 1e-24 || (half + e_n).abs() < 1e-12 * scale;
    let ((co, co_zero), (counter, counter_zero)) =
        if p.omega_s > 0.0 { ((e_nu, nu_zero), (e_mu, mu_zero)) } else { ((e_mu, mu_zero), (e_nu, nu_zero)) };
    match (co_zero, counter_zero) {
        (true, true) => 0.0,
        (true, false) => f64::INFINITY,
        (false, true) => 0.0,
        (false, false) => (counter / co).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel_from_joint;
    use crate::model::{build_system, CouplingForm, CouplingSample, MeterSpec, SystemSpec};
    use crate::operator::{expect, DensityMatrix};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn estimate_values() {
        assert_abs_diff_eq!(energy_estimate(0.2, 10.0), 0.02f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(energy_estimate(0.0, 4.0), 0.25, epsilon = 1e-15);
        let g = 0.3;
        assert!((energy_estimate(g, 1e12) / (g / 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recursion_edge_cases() {
        let p = QubitParams::new(1.0, 0.7, 0.2, 13.0);
        let (_, e_mu, e_nu) = recursion_step(&p, -p.omega_tilde() / 2.0);
        assert_eq!(e_nu, 0.0);
        assert!(e_mu >= 0.0);
        let q = QubitParams { gamma: 0.0, ..p };
        assert_eq!(recursion_step(&q, 0.3).0, 0.3);
    }

    fn exact_step(p: &QubitParams, e_n: f64) -> f64 {
        let spec = SystemSpec::qubit(p.omega_s);
        let h = build_system(&spec).unwrap();
        // diagonal state with energy e_n
        let up = 0.5 + e_n / p.omega_s;
        let rho = DensityMatrix::new(crate::operator::Operator::diag(&[up, 1.0 - up])).unwrap();
        let beta = if p.n_m == 0.0 { f64::INFINITY } else { ((1.0 - p.n_m) / p.n_m).ln() / p.omega_m };
        let sample = CouplingSample::form(p.gamma, CouplingForm::SigmaXTauX, p.omega_m);
        let ch = channel_from_joint(&spec, &sample, p.t_m, &MeterSpec { omega_m: p.omega_m, beta_m: beta }).unwrap();
        expect(&h, &ch.apply(&rho).unwrap()).unwrap()
    }

    #[test]
    fn recursion_matches_exact_step() {
        let p = QubitParams::new(1.0, 1.0, 0.1, 20.0);
        assert_abs_diff_eq!(recursion_step(&p, 0.5).0, exact_step(&p, 0.5), epsilon = 1e-10);
        let q = QubitParams::new(-1.3, 0.4, 0.25, 7.0).with_occupation(0.2);
        assert_abs_diff_eq!(recursion_step(&q, 0.1).0, exact_step(&q, 0.1), epsilon = 1e-10);
    }

    #[test]
    fn closed_form_matches_iteration() {
        let p = QubitParams::new(1.0, 1.0, 0.1, 20.0);
        assert_eq!(closed_form_energy(&p, 0.5, 0), 0.5);
        let mut e = 0.5;
        for _ in 0..50 {
            e = recursion_step(&p, e).0;
        }
        assert_abs_diff_eq!(closed_form_energy(&p, 0.5, 50), e, epsilon = 1e-12);
        let e_inf = steady_energy(&p).unwrap();
        assert_abs_diff_eq!(closed_form_energy(&p, 0.5, 1_000_000), e_inf, epsilon = 1e-12);
        assert_abs_diff_eq!(recursion_step(&p, e_inf).0, e_inf, epsilon = 1e-12);
    }

    #[test]
    fn steady_energy_cases() {
        let p = QubitParams::new(1.0, 1.0, 0.1, 20.0);
        assert_abs_diff_eq!(steady_energy(&p.with_occupation(0.5)).unwrap(), 0.0, epsilon = 1e-15);
        // μ t ≫ 1 and sin(νt/2) of order one: close to the ground energy
        let e = steady_energy(&QubitParams { t_m: 15.0, ..p }).unwrap();
        assert!(e < -0.49, "{e}");
        // sin(νt/2) = 0: the heating term alone survives
        let nu = p.nu();
        let q = QubitParams { t_m: 2.0 * PI / nu, ..p };
        assert_abs_diff_eq!(steady_energy(&q).unwrap(), 0.5, epsilon = 1e-12);
        assert!(matches!(steady_energy(&QubitParams { gamma: 0.0, t_m: 0.0, ..p }), Err(Error::Undefined)));
    }

    #[test]
    fn effective_temperature() {
        let p = QubitParams::new(1.0, 2.0, 0.1, 1.0);
        assert_eq!(effective_beta(&p, 1.0).unwrap(), 2.0);
        assert_eq!(effective_beta(&p, f64::INFINITY).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(effective_beta(&QubitParams::new(1.5, 1.5, 0.1, 1.0), 0.7).unwrap(), 0.7, epsilon = 1e-15);
        assert!(effective_beta(&QubitParams::new(-1.0, 1.0, 0.1, 1.0), 1.0).is_err());
    }

    #[test]
    fn rwa_ratio() {
        let res = QubitParams::new(1.0, 1.0, 0.1, 1.0);
        for t in [0.5, 3.0, 100.0] {
            assert_eq!(rwa_amplitude_ratio(&res, t), 0.0);
        }
        let p = QubitParams::new(1.0, 0.9, 0.1, 1.0);
        assert_abs_diff_eq!(rwa_amplitude_ratio(&p, 0.0), 0.1 / 1.9, epsilon = 1e-15);
        assert_eq!(rwa_amplitude_ratio(&p, 4.0 * PI / 0.1), f64::INFINITY);
        // envelope 1/t while (ω_S − ω_M) t stays small
        let q = QubitParams::new(1.0, 0.999, 0.1, 1.0);
        let env = |t: f64| (0..64).map(|k| rwa_amplitude_ratio(&q, t + 0.05 * k as f64)).fold(0.0, f64::max);
        let ratio = env(50.0) / env(100.0);
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn co_counter_cases() {
        let p = QubitParams::new(1.0, 1.0, 0.1, 17.3);
        assert!(co_counter_ratio(&p) < 0.1);
        let rev = QubitParams { t_m: 2.0 * PI / p.nu(), ..p };
        assert_eq!(co_counter_ratio(&rev), f64::INFINITY);
        assert_eq!(co_counter_ratio(&QubitParams { gamma: 0.0, ..p }), 0.0);
        // at the steady energy the two parts cancel
        let e = steady_energy(&p).unwrap();
        assert_abs_diff_eq!(co_counter_ratio_at(&p, e), 1.0, epsilon = 1e-9);
    }
}
