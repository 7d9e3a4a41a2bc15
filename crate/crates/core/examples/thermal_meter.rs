//! A resonant meter at inverse temperature beta_M leaves the qubit thermal
//! at beta_S = beta_M omega_M / omega_S.

use coolsim::analytic::{effective_beta, QubitParams};
use coolsim::channel::average_channel;
use coolsim::model::{build_system, SystemSpec};
use coolsim::protocol::{AveragingScheme, ProtocolConfig};
use coolsim::steady::fixed_point_default;

fn main() -> coolsim::Result<()> {
    let spec = SystemSpec::qubit(1.0);
    let h = build_system(&spec)?;
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let mut cfg = ProtocolConfig::new(0.01, 100.0, (1.0, 1.0));
        cfg.meter_beta = beta;
        cfg.averaging = AveragingScheme::Quadrature { n_cos_theta: 8, n_phi: 8, n_omega: 1, omega_panels: 0 };
        let rho = fixed_point_default(&average_channel(&spec, &cfg)?, &h)?.rho_inf;
        let (up, down) = (rho.matrix()[(0, 0)].re, rho.matrix()[(1, 1)].re);
        let closed = effective_beta(&QubitParams::new(1.0, 1.0, 0.01, 100.0), beta)?;
        println!("beta_M = {beta}: beta_S numeric {:.6}, closed form {closed:.6}", (down / up).ln());
    }
    Ok(())
}
