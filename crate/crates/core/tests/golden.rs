//! Shipped configs reproduce their stored outputs bit for bit, at any thread
//! count. `UPDATE_GOLDEN=1` rewrites the stored files.

use std::path::{Path, PathBuf};

use weighted_transfer::config::LoadedConfig;
use weighted_transfer::runner::{run, Command, RunOutput};

pub const SHIPPED: &[(&str, Command)] = &[
    ("check_weight", Command::CheckWeight),
    ("apply_line", Command::Apply),
    ("apply_orbit", Command::Apply),
    ("verify_maximal", Command::Verify),
    ("sweep_square", Command::Sweep),
];

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn run_shipped(name: &str, cmd: Command, threads: usize) -> RunOutput {
    let mut cfg = LoadedConfig::load(&root().join("configs").join(format!("{name}.toml"))).unwrap();
    cfg.config.sampling.threads = Some(threads);
    run(cmd, &cfg).unwrap()
}

fn check(path: &Path, actual: &str) {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert!(expected == actual, "{} differs from the stored output", path.display());
}

#[test]
fn shipped_configs_match_golden_outputs() {
    for &(name, cmd) in SHIPPED {
        let out = run_shipped(name, cmd, 1);
        assert_eq!(out.exit_code, 0, "{name}");
        check(&root().join("golden").join(format!("{name}.json")), &out.json);
        check(&root().join("golden").join(format!("{name}.csv")), &out.csv);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    for &(name, cmd) in SHIPPED {
        let one = run_shipped(name, cmd, 1);
        let three = run_shipped(name, cmd, 3);
        assert_eq!(one, three, "{name}");
    }
}
