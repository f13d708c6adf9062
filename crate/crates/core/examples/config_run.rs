// A config-driven sweep run, as the `wtransfer` binary does it.

use weighted_transfer::config::LoadedConfig;
use weighted_transfer::runner::{run as run_command, Command};

const CONFIG: &str = r#"
flow = "circle golden"
operator = "maximal -3 1"

[sampling]
step = 0.0078125
base_points = 32
threads = 2

[sweep]
p = 2.0
weight_w = "const 1"
weight_v = "const 1"
functions = ["arc 0 1/8", "cosine 3"]
reach_multiples = [0, 1, 2, 4]
"#;

pub fn run() -> weighted_transfer::Result<()> {
    let cfg = LoadedConfig::parse("inline.toml", CONFIG)?;
    let out = run_command(Command::Sweep, &cfg)?;
    print!("{}", out.summary);
    print!("{}", out.csv);
    Ok(())
}

#[allow(dead_code)]
fn main() -> weighted_transfer::Result<()> {
    run()
}
