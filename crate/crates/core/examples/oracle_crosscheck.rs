//! Exact qubit evolution against the closed-form energy recursion.

use coolsim::analytic::{steady_energy, QubitParams};
use coolsim::cli::scenarios::oracle_point;

fn main() -> coolsim::Result<()> {
    for (omega_m, gamma, t_m, n_m) in [(0.8, 0.05, 12.0, 0.0), (1.0, 0.1, 30.0, 0.1), (2.5, 0.2, 3.0, 0.25)] {
        let q = QubitParams::new(1.0, omega_m, gamma, t_m).with_occupation(n_m);
        let (worst, closed, exact) = oracle_point(&q, 0.5, 100)?;
        println!(
            "omega_M {omega_m}, gamma {gamma}, t_M {t_m}, n_M {n_m}: E_100 = {exact:.12} (closed {closed:.12}), max diff {worst:.1e}, E_inf {:.6}",
            steady_energy(&q)?
        );
    }
    Ok(())
}
