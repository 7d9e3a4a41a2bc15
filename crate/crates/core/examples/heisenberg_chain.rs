//! Cooling an open Heisenberg chain: steady-state energy above the ground
//! energy for a few interaction times.

use coolsim::cli::scenarios::open_chain;
use coolsim::model::build_system;
use coolsim::operator::eig_hermitian;
use coolsim::protocol::{AveragingScheme, ProtocolConfig};
use coolsim::steady::steady_state;

fn main() -> coolsim::Result<()> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().expect("site count")).unwrap_or(3);
    let spec = open_chain(n);
    let spectrum = eig_hermitian(&build_system(&spec)?)?;
    let e0 = spectrum.eigenvalues[0];
    let window = (0.0, 1.1 * spectrum.spectral_radius());
    println!("N = {n}, ground energy {e0:.6}, omega_M in [0, {:.4}]", window.1);
    for t_m in [30.0, 100.0, 300.0] {
        let mut cfg = ProtocolConfig::new(1e-3, t_m, window);
        cfg.averaging = AveragingScheme::Quadrature { n_cos_theta: 8, n_phi: 8, n_omega: 4, omega_panels: 0 };
        let r = steady_state(&spec, &cfg)?;
        println!("t_M = {t_m:>6}: E_inf = {:.8}, excess {:.3e}, fixed space {}", r.energy, r.energy - e0, r.fixed_space_dim);
    }
    Ok(())
}
