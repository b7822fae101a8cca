//! Build a run configuration in code, print it as TOML and run the
//! `spectrum` and `simulate` commands into a temporary directory.
//!
//! ```bash
//! cargo run --release --example run_config
//! ```

use anisowalk::cli::{run, Command};
use anisowalk::config::RunConfig;

fn main() -> anisowalk::error::Result<()> {
    let mut cfg = RunConfig::hadamard();
    cfg.simulate.times = vec![10, 100];
    let text = cfg.to_toml();
    println!("{text}");
    let parsed = RunConfig::from_toml(&text)?;
    assert_eq!(parsed, cfg);

    let out = std::env::temp_dir().join("anisowalk-run-config");
    for command in [Command::Spectrum, Command::Simulate] {
        let outcome = run(command, &parsed, &out)?;
        for p in outcome.artifacts {
            println!("{command}: wrote {}", p.display());
        }
    }
    Ok(())
}
