//! Continuous steering limit with local lowering jumps. On the two-site
//! antiferromagnetic chain they pump into |dd> (E = 1/4) instead of the
//! singlet (E = -3/4); the random-meter protocol has no such bias.

use coolsim::cli::scenarios::open_chain;
use coolsim::model::build_system;
use coolsim::operator::DensityMatrix;
use coolsim::steering::{lindblad_run, lowering_jumps, LindbladSpec};

fn main() -> coolsim::Result<()> {
    let h = build_system(&open_chain(2))?;
    println!("ground energy {:.4}", coolsim::operator::eig_hermitian(&h)?.eigenvalues[0]);
    let mut spec = LindbladSpec::new(h, lowering_jumps(2), 0.2, 40.0, 0.01);
    spec.record_every = 400;
    let run = lindblad_run(&spec, &DensityMatrix::maximally_mixed(vec![2, 2]))?;
    for (t, e) in run.record.times.iter().zip(&run.record.energies) {
        println!("t = {t:>5.1}: E = {e:.8}");
    }
    println!("largest per-step trace drift {:.2e}", run.max_step_drift);
    Ok(())
}
