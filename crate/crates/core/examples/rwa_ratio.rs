//! Closed-form steady energy and the ratio of counter- to co-rotating energy
//! changes against nu t_M / 2 pi. The ratio diverges where the co-rotating
//! term revives. The last column is the amplitude ratio for a meter detuned
//! to omega_M = 0.8.

use coolsim::analytic::{co_counter_ratio, rwa_amplitude_ratio, steady_energy, QubitParams};

fn main() {
    let base = QubitParams::new(1.0, 1.0, 0.1, 0.0);
    let nu = base.nu();
    println!("{:>6} {:>10} {:>12} {:>12} {:>12}", "x", "t_M", "E_inf", "ratio", "amplitude");
    for k in 1..=14 {
        let x = k as f64 * 0.25;
        let q = QubitParams { t_m: x * std::f64::consts::TAU / nu, ..base };
        let e = steady_energy(&q).unwrap_or(f64::NAN);
        let detuned = QubitParams { omega_m: 0.8, ..q };
        println!("{x:>6} {:>10.4} {e:>12.6} {:>12.4e} {:>12.4e}", q.t_m, co_counter_ratio(&q), rwa_amplitude_ratio(&detuned, q.t_m));
    }
}
