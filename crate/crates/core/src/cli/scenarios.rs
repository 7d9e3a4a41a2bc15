//! The scenario registry: each scenario turns its parameters into tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Grid, RunConfig};
use super::output::Table;
use crate::analytic::{closed_form_energy, co_counter_ratio, energy_estimate, steady_energy, QubitParams};
use crate::channel::channel_from_joint;
use crate::error::{Error, Result};
use crate::model::{build_system, CouplingForm, CouplingSample, MeterSpec, SystemSpec};
use crate::operator::{eig_hermitian, expect, DensityMatrix, Operator};
use crate::protocol::beta_serde as beta;
use crate::protocol::{AveragingScheme, AxisMode, InitialState, ProtocolConfig};
use crate::steady::steady_state;
use crate::trajectory::{run_ensemble, run_trajectory};

/// Name and one-line description of every scenario.
pub const SCENARIOS: [(&str, &str); 6] = [
    ("fig2-qubit-sweep", "qubit steady-state energy over (gamma, t_M) with cuts along t_M and gamma"),
    ("fig3a-coupling-compare", "qubit energy versus time for co-rotating, sigma_x tau_x and random couplings"),
    ("fig3b-rwa-ratio", "steady energy and counter/co-rotating ratio versus nu t_M / 2 pi"),
    ("fig4-heisenberg-sweep", "Heisenberg chain steady-state energy over (gamma, t_M) with cuts"),
    ("fig4d-scaling", "Heisenberg chain steady-state energy versus t_M for several sizes"),
    ("oracle-crosscheck", "closed-form recursion versus exact qubit evolution over a (gamma, t_M) grid"),
];

/// What a scenario produced. Failed grid points are listed in `errors` and
/// left out of the tables.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub params: Value,
    pub tables: Vec<Table>,
    pub errors: Vec<String>,
    pub checks: Value,
}

pub fn is_known(name: &str) -> bool {
    SCENARIOS.iter().any(|(n, _)| *n == name)
}

/// Default parameters of a scenario as JSON.
pub fn defaults(name: &str) -> Option<Value> {
    let v = match name {
        "fig2-qubit-sweep" => serde_json::to_value(Fig2::default()),
        "fig3a-coupling-compare" => serde_json::to_value(Fig3a::default()),
        "fig3b-rwa-ratio" => serde_json::to_value(Fig3b::default()),
        "fig4-heisenberg-sweep" => serde_json::to_value(Fig4::default()),
        "fig4d-scaling" => serde_json::to_value(Fig4d::default()),
        "oracle-crosscheck" => serde_json::to_value(Oracle::default()),
        _ => return None,
    };
    Some(v.expect("parameters serialize"))
}

/// Runs the scenario named in `cfg`.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.scenario.as_str() {
        "fig2-qubit-sweep" => fig2(cfg.params()?),
        "fig3a-coupling-compare" => fig3a(cfg.params()?, cfg.seed),
        "fig3b-rwa-ratio" => fig3b(cfg.params()?),
        "fig4-heisenberg-sweep" => fig4(cfg.params()?),
        "fig4d-scaling" => fig4d(cfg.params()?),
        "oracle-crosscheck" => oracle(cfg.params()?),
        other => Err(Error::Config(format!("unknown scenario {other:?}"))),
    }
}

/// Quadrature settings shared by the sweep scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    pub n_cos_theta: usize,
    pub n_phi: usize,
    /// Nodes per `ω_M` panel.
    pub n_omega: usize,
    /// 0 picks panels of width at most `2π/t_M`.
    pub omega_panels: usize,
}

impl Quadrature {
    fn scheme(&self) -> AveragingScheme {
        AveragingScheme::Quadrature {
            n_cos_theta: self.n_cos_theta,
            n_phi: self.n_phi,
            n_omega: self.n_omega,
            omega_panels: self.omega_panels,
        }
    }
}

const SWEEP_HEADER: [&str; 6] = ["gamma", "t_m", "energy", "excess", "e_est", "fixed_space_dim"];

/// Heatmap over `gammas × t_ms` and cuts along each axis.
struct Sweep<'a> {
    prefix: &'a str,
    spec: SystemSpec,
    window: (f64, f64),
    quad: Quadrature,
    meter_beta: f64,
}

impl Sweep<'_> {
    fn rows(&self, points: &[(f64, f64)], name: &str, errors: &mut Vec<String>) -> Result<Table> {
        let h = build_system(&self.spec)?;
        let e0 = eig_hermitian(&h)?.eigenvalues[0];
        let results: Vec<Result<(f64, usize)>> = points
            .par_iter()
            .map(|&(gamma, t_m)| {
                let mut cfg = ProtocolConfig::new(gamma, t_m, self.window);
                cfg.averaging = self.quad.scheme();
                cfg.meter_beta = self.meter_beta;
                steady_state(&self.spec, &cfg).map(|r| (r.energy, r.fixed_space_dim))
            })
            .collect();
        let mut table = Table::new(name, &SWEEP_HEADER);
        for (&(gamma, t_m), r) in points.iter().zip(results) {
            match r {
                Ok((e, dim)) => table.push(vec![gamma, t_m, e, e - e0, energy_estimate(gamma, t_m), dim as f64]),
                Err(err) => errors.push(format!("{name}: gamma={gamma:?} t_m={t_m:?}: {err}")),
            }
        }
        Ok(table)
    }

    fn run(&self, gammas: &[f64], t_ms: &[f64], cut_gammas: &[f64], cut_t_ms: &[f64]) -> Result<(Vec<Table>, Vec<String>)> {
        let mut errors = Vec::new();
        let grid: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| t_ms.iter().map(move |&t| (g, t))).collect();
        let heat = self.rows(&grid, &format!("{}_heatmap", self.prefix), &mut errors)?;
        let along_t: Vec<(f64, f64)> = cut_gammas.iter().flat_map(|&g| t_ms.iter().map(move |&t| (g, t))).collect();
        let cut_t = self.rows(&along_t, &format!("{}_cut_t", self.prefix), &mut errors)?;
        let along_g: Vec<(f64, f64)> = cut_t_ms.iter().flat_map(|&t| gammas.iter().map(move |&g| (g, t))).collect();
        let cut_g = self.rows(&along_g, &format!("{}_cut_gamma", self.prefix), &mut errors)?;
        Ok((vec![heat, cut_t, cut_g], errors))
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2 {
    pub omega_s: f64,
    /// Defaults to `[0.1|ω_S|, 3|ω_S|]`.
    pub omega_window: Option<(f64, f64)>,
    pub gamma: Grid,
    pub t_m: Grid,
    /// Fixed `γ` values of the cut along `t_M`.
    pub cut_gammas: Vec<f64>,
    /// Fixed `t_M` values of the cut along `γ`.
    pub cut_t_ms: Vec<f64>,
    pub quadrature: Quadrature,
    #[serde(with = "beta")]
    pub meter_beta: f64,
}

impl Default for Fig2 {
    fn default() -> Self {
        Self {
            omega_s: 1.0,
            omega_window: None,
            gamma: Grid::log(1e-4, 1.0, 16),
            t_m: Grid::log(1.0, 1e4, 16),
            cut_gammas: vec![1e-3, 1e-2, 1e-1],
            cut_t_ms: vec![1e1, 1e2, 1e3],
            quadrature: Quadrature { n_cos_theta: 16, n_phi: 16, n_omega: 8, omega_panels: 0 },
            meter_beta: f64::INFINITY,
        }
    }
}

fn fig2(mut p: Fig2) -> Result<Outcome> {
    let w = p.omega_s.abs();
    let window = *p.omega_window.get_or_insert((0.1 * w, 3.0 * w));
    let sweep = Sweep { prefix: "fig2", spec: SystemSpec::qubit(p.omega_s), window, quad: p.quadrature, meter_beta: p.meter_beta };
    let (tables, errors) = sweep.run(&p.gamma.points()?, &p.t_m.points()?, &p.cut_gammas, &p.cut_t_ms)?;
    Ok(Outcome { params: to_value(&p), tables, errors, checks: Value::Null })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3a {
    pub omega_s: f64,
    /// Defaults to `0.1|ω_S|`.
    pub gamma: Option<f64>,
    /// Defaults to `|ω_S|`.
    pub omega_m: Option<f64>,
    pub t_m: f64,
    pub n_iterations: usize,
    /// Recorded points per interaction.
    pub substeps: usize,
    pub n_traj: usize,
    pub initial_state: InitialState,
}

impl Default for Fig3a {
    fn default() -> Self {
        Self {
            omega_s: 1.0,
            gamma: None,
            omega_m: None,
            t_m: 20.0,
            n_iterations: 50,
            substeps: 8,
            n_traj: 64,
            initial_state: InitialState::MaximallyMixed,
        }
    }
}

fn fig3a(mut p: Fig3a, seed: u64) -> Result<Outcome> {
    let gamma = *p.gamma.get_or_insert(0.1 * p.omega_s.abs());
    let omega_m = *p.omega_m.get_or_insert(p.omega_s.abs());
    let spec = SystemSpec::qubit(p.omega_s);
    let mut cfg = ProtocolConfig::new(gamma, p.t_m, (omega_m, omega_m));
    cfg.n_iterations = p.n_iterations;
    cfg.record_substeps = p.substeps;
    cfg.initial_state = p.initial_state;
    cfg.seed = seed;
    let form = |f: CouplingForm| ProtocolConfig { axis_mode: AxisMode::Form { form: f }, ..cfg.clone() };
    let co = run_trajectory(&spec, &form(CouplingForm::CoRotating))?;
    let xx = run_trajectory(&spec, &form(CouplingForm::SigmaXTauX))?;
    let ens = run_ensemble(&spec, &cfg, p.n_traj)?;
    let stderr = ens.stderr();

    let mut energy = Table::new("fig3a_energy", &["t", "E_co_rotating", "E_sigmaxx", "E_random"]);
    let mut stats = Table::new("fig3a_random_stats", &["t", "mean", "stderr"]);
    for k in 0..co.times.len() {
        energy.push(vec![co.times[k], co.energies[k], xx.energies[k], ens.mean_energy[k]]);
        stats.push(vec![ens.times[k], ens.mean_energy[k], stderr[k]]);
    }
    let last = co.times.len() - 1;
    let (e_co, e_xx, e_r, se) = (co.energies[last], xx.energies[last], ens.mean_energy[last], stderr[last]);
    let checks = json!({
        "final_co_rotating": e_co,
        "final_sigmaxx": e_xx,
        "final_random_mean": e_r,
        "final_random_stderr": se,
        "ordered": e_co <= e_xx && e_xx <= e_r + 3.0 * se,
    });
    Ok(Outcome { params: to_value(&p), tables: vec![energy, stats], errors: vec![], checks })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3b {
    pub omega_s: f64,
    pub gamma: Option<f64>,
    pub omega_m: Option<f64>,
    /// Largest `ν t_M / 2π`.
    pub nu_t_max: f64,
    /// Points per unit of `ν t_M / 2π`; integers fall on the grid.
    pub points_per_unit: usize,
}

impl Default for Fig3b {
    fn default() -> Self {
        Self { omega_s: 1.0, gamma: None, omega_m: None, nu_t_max: 3.5, points_per_unit: 100 }
    }
}

fn fig3b(mut p: Fig3b) -> Result<Outcome> {
    let gamma = *p.gamma.get_or_insert(0.1 * p.omega_s.abs());
    let omega_m = *p.omega_m.get_or_insert(p.omega_s.abs());
    if p.points_per_unit == 0 || !(p.nu_t_max > 0.0) {
        return Err(Error::Config("fig3b needs points_per_unit >= 1 and nu_t_max > 0".into()));
    }
    let base = QubitParams::new(p.omega_s, omega_m, gamma, 0.0);
    base.validate()?;
    let nu = base.nu();
    let n = (p.nu_t_max * p.points_per_unit as f64).floor() as usize;
    let mut table = Table::new("fig3b_ratio", &["nu_t_over_2pi", "t_m", "steady_energy", "co_counter_ratio"]);
    for k in 1..=n {
        let x = k as f64 / p.points_per_unit as f64;
        let q = QubitParams { t_m: x * std::f64::consts::TAU / nu, ..base };
        table.push(vec![x, q.t_m, steady_energy(&q).unwrap_or(f64::NAN), co_counter_ratio(&q)]);
    }
    Ok(Outcome { params: to_value(&p), tables: vec![table], errors: vec![], checks: Value::Null })
}

// ---------------------------------------------------------------------------

fn chain_window(spec: &SystemSpec, factor: f64) -> Result<(f64, f64)> {
    let h = build_system(spec)?;
    Ok((0.0, factor * eig_hermitian(&h)?.spectral_radius()))
}

/// Open chain of `n` sites with unit couplings.
pub fn open_chain(n: usize) -> SystemSpec {
    let mut j = vec![1.0; n];
    j[n - 1] = 0.0;
    SystemSpec::chain(&j)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4 {
    /// Bond couplings `J_i` between sites `i` and `i+1 mod N`.
    pub couplings: Vec<f64>,
    /// `ω_M ∈ [0, window_factor · ‖H_S‖]`.
    pub window_factor: f64,
    pub gamma: Grid,
    pub t_m: Grid,
    pub cut_gammas: Vec<f64>,
    pub cut_t_ms: Vec<f64>,
    pub quadrature: Quadrature,
    #[serde(with = "beta")]
    pub meter_beta: f64,
}

impl Default for Fig4 {
    fn default() -> Self {
        Self {
            couplings: vec![1.0, 1.0, 0.0],
            window_factor: 1.1,
            gamma: Grid::log(1e-4, 1e-1, 16),
            t_m: Grid::log(1.0, 1e3, 16),
            cut_gammas: vec![1e-3, 1e-2],
            cut_t_ms: vec![1e1, 1e2, 1e3],
            quadrature: Quadrature { n_cos_theta: 8, n_phi: 8, n_omega: 8, omega_panels: 0 },
            meter_beta: f64::INFINITY,
        }
    }
}

fn fig4(p: Fig4) -> Result<Outcome> {
    let spec = SystemSpec::chain(&p.couplings);
    spec.validate()?;
    let window = chain_window(&spec, p.window_factor)?;
    let sweep = Sweep { prefix: "fig4", spec, window, quad: p.quadrature, meter_beta: p.meter_beta };
    let (tables, errors) = sweep.run(&p.gamma.points()?, &p.t_m.points()?, &p.cut_gammas, &p.cut_t_ms)?;
    let checks = json!({ "omega_window": [window.0, window.1] });
    Ok(Outcome { params: to_value(&p), tables, errors, checks })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4d {
    /// Open chains with unit couplings.
    pub n_sites: Vec<usize>,
    pub gamma: f64,
    pub t_m: Grid,
    pub window_factor: f64,
    pub quadrature: Quadrature,
    /// Reference energies per size, copied to `fig4d_reference.csv`.
    pub surrogate_bounds: Vec<(usize, f64)>,
}

impl Default for Fig4d {
    fn default() -> Self {
        Self {
            n_sites: vec![3, 4, 5],
            gamma: 1e-3,
            t_m: Grid::Values(vec![1e2, 3e2, 1e3]),
            window_factor: 1.1,
            quadrature: Quadrature { n_cos_theta: 8, n_phi: 8, n_omega: 4, omega_panels: 0 },
            surrogate_bounds: vec![],
        }
    }
}

fn fig4d(p: Fig4d) -> Result<Outcome> {
    let t_ms = p.t_m.points()?;
    let mut table =
        Table::new("fig4d_scaling", &["n_sites", "t_m", "gamma", "energy", "ground_energy", "excess", "e_est"]);
    let mut errors = Vec::new();
    let mut slopes = serde_json::Map::new();
    for &n in &p.n_sites {
        if !(2..=5).contains(&n) {
            return Err(Error::Config(format!("fig4d supports 2 <= N <= 5, got {n}")));
        }
        let spec = open_chain(n);
        let h = build_system(&spec)?;
        let e0 = eig_hermitian(&h)?.eigenvalues[0];
        let window = chain_window(&spec, p.window_factor)?;
        let results: Vec<Result<f64>> = t_ms
            .par_iter()
            .map(|&t| {
                let mut cfg = ProtocolConfig::new(p.gamma, t, window);
                cfg.averaging = p.quadrature.scheme();
                steady_state(&spec, &cfg).map(|r| r.energy)
            })
            .collect();
        let mut pts = Vec::new();
        for (&t, r) in t_ms.iter().zip(results) {
            match r {
                Ok(e) => {
                    table.push(vec![n as f64, t, p.gamma, e, e0, e - e0, energy_estimate(p.gamma, t)]);
                    pts.push((t.ln(), (e - e0).ln()));
                }
                Err(err) => errors.push(format!("N={n} t_m={t:?}: {err}")),
            }
        }
        if pts.len() >= 2 {
            slopes.insert(n.to_string(), json!(least_squares_slope(&pts)));
        }
    }
    let mut tables = vec![table];
    if !p.surrogate_bounds.is_empty() {
        let mut r = Table::new("fig4d_reference", &["n_sites", "surrogate_bound"]);
        for &(n, e) in &p.surrogate_bounds {
            r.push(vec![n as f64, e]);
        }
        tables.push(r);
    }
    Ok(Outcome { params: to_value(&p), tables, errors, checks: json!({ "log_log_slope": slopes }) })
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Oracle {
    pub omega_s: f64,
    pub omega_m: f64,
    pub n_m: f64,
    pub gamma: Grid,
    pub t_m: Grid,
    pub n_max: u64,
    /// Initial energy, within `±|ω_S|/2`.
    pub e_0: f64,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            omega_s: 1.0,
            omega_m: 0.8,
            n_m: 0.0,
            gamma: Grid::log(1e-3, 0.3, 8),
            t_m: Grid::log(1.0, 100.0, 8),
            n_max: 100,
            e_0: 0.5,
        }
    }
}

/// Largest `|closed form − exact|` over `n ≤ n_max`, and both final energies.
pub fn oracle_point(q: &QubitParams, e_0: f64, n_max: u64) -> Result<(f64, f64, f64)> {
    q.validate()?;
    let spec = SystemSpec::qubit(q.omega_s);
    let h = build_system(&spec)?;
    let beta = if q.n_m == 0.0 { f64::INFINITY } else { ((1.0 - q.n_m) / q.n_m).ln() / q.omega_m };
    let sample = CouplingSample::form(q.gamma, CouplingForm::SigmaXTauX, q.omega_m);
    let ch = channel_from_joint(&spec, &sample, q.t_m, &MeterSpec { omega_m: q.omega_m, beta_m: beta })?;
    let up = 0.5 + e_0 / q.omega_s;
    if !(0.0..=1.0).contains(&up) {
        return Err(Error::InvalidParameter(format!("e_0 = {e_0} outside the spectrum")));
    }
    let mut rho = DensityMatrix::new(Operator::diag(&[up, 1.0 - up]))?;
    let mut worst = 0.0f64;
    let mut e = e_0;
    for n in 1..=n_max {
        rho = ch.apply(&rho)?;
        e = expect(&h, &rho)?;
        worst = worst.max((e - closed_form_energy(q, e_0, n)).abs());
    }
    Ok((worst, closed_form_energy(q, e_0, n_max), e))
}

fn oracle(p: Oracle) -> Result<Outcome> {
    let gammas = p.gamma.points()?;
    let t_ms = p.t_m.points()?;
    let grid: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| t_ms.iter().map(move |&t| (g, t))).collect();
    let results: Vec<Result<(f64, f64, f64)>> = grid
        .par_iter()
        .map(|&(g, t)| {
            let q = QubitParams::new(p.omega_s, p.omega_m, g, t).with_occupation(p.n_m);
            oracle_point(&q, p.e_0, p.n_max)
        })
        .collect();
    let mut table =
        Table::new("oracle_crosscheck", &["gamma", "t_m", "max_abs_diff", "closed_form_final", "numeric_final"]);
    let mut errors = Vec::new();
    let mut worst = 0.0f64;
    for (&(g, t), r) in grid.iter().zip(results) {
        match r {
            Ok((d, cf, num)) => {
                worst = worst.max(d);
                table.push(vec![g, t, d, cf, num]);
            }
            Err(err) => errors.push(format!("gamma={g:?} t_m={t:?}: {err}")),
        }
    }
    let checks = json!({ "max_abs_diff": worst, "within_1e-9": worst <= 1e-9 });
    Ok(Outcome { params: to_value(&p), tables: vec![table], errors, checks })
}

fn to_value<T: Serialize>(p: &T) -> Value {
    serde_json::to_value(p).expect("parameters serialize")
}
