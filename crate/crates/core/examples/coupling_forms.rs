//! Stroboscopic energy after repeated interactions for the co-rotating,
//! sigma_x tau_x and random-axis couplings.

use coolsim::model::{CouplingForm, SystemSpec};
use coolsim::protocol::{AxisMode, ProtocolConfig};
use coolsim::trajectory::{run_ensemble, run_trajectory};

fn main() -> coolsim::Result<()> {
    let spec = SystemSpec::qubit(1.0);
    let mut cfg = ProtocolConfig::new(0.1, 20.0, (1.0, 1.0));
    cfg.n_iterations = 50;
    cfg.seed = 7;
    let with = |form| ProtocolConfig { axis_mode: AxisMode::Form { form }, ..cfg.clone() };
    let co = run_trajectory(&spec, &with(CouplingForm::CoRotating))?;
    let xx = run_trajectory(&spec, &with(CouplingForm::SigmaXTauX))?;
    let ens = run_ensemble(&spec, &cfg, 32)?;
    let se = ens.stderr();
    println!("{:>4} {:>12} {:>12} {:>12} {:>10}", "n", "co", "sx tx", "random", "stderr");
    for n in (0..=50).step_by(5) {
        println!("{n:>4} {:>12.8} {:>12.8} {:>12.8} {:>10.2e}", co.energies[n], xx.energies[n], ens.mean_energy[n], se[n]);
    }
    Ok(())
}
