//! The full command-line pipeline on a configuration held in memory.

use daseinkit::cli::{run_config, Command, RunConfig, REPORT_FILE};

fn main() -> daseinkit::Result<()> {
    let config = RunConfig::from_json(r#"{"system":{"builtin":"oscillator","N":3}}"#)?;
    let out = std::env::temp_dir().join("daseinkit-pipeline-example");
    let outcome = run_config(Command::All, &config, &out)?;
    println!("status {:?}, exit code {}", outcome.status, outcome.exit_code);
    println!("report at {}", out.join(REPORT_FILE).display());
    Ok(())
}
