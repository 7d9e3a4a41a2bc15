//! Steady-state energy of a qubit cooled by meters with random axes and
//! random frequencies in [0.1, 3].

use coolsim::analytic::energy_estimate;
use coolsim::model::SystemSpec;
use coolsim::protocol::{AveragingScheme, ProtocolConfig};
use coolsim::steady::steady_state;

fn main() -> coolsim::Result<()> {
    let spec = SystemSpec::qubit(1.0);
    let gamma = 1e-3;
    println!("{:>8} {:>14} {:>12} {:>12}", "t_M", "E_inf", "E_inf+1/2", "E_est");
    for t_m in [10.0, 30.0, 100.0, 300.0, 1000.0] {
        let mut cfg = ProtocolConfig::new(gamma, t_m, (0.1, 3.0));
        cfg.averaging = AveragingScheme::Quadrature { n_cos_theta: 8, n_phi: 8, n_omega: 8, omega_panels: 0 };
        let r = steady_state(&spec, &cfg)?;
        println!("{t_m:>8} {:>14.9} {:>12.3e} {:>12.3e}", r.energy, r.energy + 0.5, energy_estimate(gamma, t_m));
    }
    Ok(())
}
