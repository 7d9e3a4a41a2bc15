//! The first-order (Dyson) map against the exact averaged map in the
//! interaction picture. The error falls as gamma squared.

use coolsim::channel::{average_channel, bath_channel, dyson_channel_with_rule, omega_rule};
use coolsim::model::{build_system, SystemSpec};
use coolsim::operator::sigma_x;
use coolsim::protocol::{AveragingScheme, AxisMode, ProtocolConfig};

fn main() -> coolsim::Result<()> {
    let spec = SystemSpec::qubit(1.0);
    let h = build_system(&spec)?;
    let t = 10.0;
    let mut prev: Option<f64> = None;
    for gamma in [0.04, 0.02, 0.01, 0.005] {
        let cfg = ProtocolConfig {
            axis_mode: AxisMode::FixedAxis { theta: std::f64::consts::FRAC_PI_2, phi: 0.0 },
            averaging: AveragingScheme::Quadrature { n_cos_theta: 1, n_phi: 1, n_omega: 16, omega_panels: 0 },
            ..ProtocolConfig::new(gamma, t, (0.1, 3.0))
        };
        let rule = omega_rule(&cfg);
        let exact = average_channel(&spec, &cfg)?.interaction_picture(&h, t)?;
        let first = dyson_channel_with_rule(&spec, &sigma_x(), gamma, t, &rule)?;
        let bath = bath_channel(&spec, &sigma_x(), gamma, t, &rule)?;
        let err = (exact.superop() - first.superop()).mapv(|z| z.norm_sqr()).sum().sqrt();
        let routes = (bath.superop() - first.superop()).mapv(|z| z.norm()).fold(0.0f64, |m, &x| m.max(x));
        let ratio = prev.map(|p| p / err).unwrap_or(f64::NAN);
        println!("gamma {gamma:>6}: |V - V1|_F = {err:.4e}, halving ratio {ratio:.4}, two routes differ by {routes:.1e}");
        prev = Some(err);
    }
    Ok(())
}
