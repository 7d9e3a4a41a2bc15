//! Runs a scenario through the library entry point of the command-line tool
//! and prints the manifest.

use coolsim::cli::config::RunConfig;
use coolsim::cli::run_config;

fn main() -> coolsim::Result<()> {
    let cfg = RunConfig::parse(
        r#"
scenario = "oracle-crosscheck"
seed = 1
[params]
gamma = [0.01, 0.1]
t_m = [5.0, 50.0]
"#,
    )?;
    let out = std::env::temp_dir().join("coolsim-example");
    let report = run_config(&cfg, &out, 0)?;
    println!("{}", std::fs::read_to_string(&report.manifest_path)?);
    Ok(())
}
