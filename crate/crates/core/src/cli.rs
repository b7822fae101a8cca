//! Command dispatch behind the `anisowalk` binary.
//!
//! | command      | artifacts                                      |
//! |--------------|------------------------------------------------|
//! | `simulate`   | `simulate.csv`: `n,x,probability`              |
//! | `spectrum`   | `spectrum.json`                                |
//! | `scatter`    | `scatter.json`                                 |
//! | `limit-dist` | `limit.json`, `density.csv`                    |
//! | `compare`    | `compare.csv`: `n,kolmogorov_distance,mean_n,mean_limit` |
//! | `density`    | `density.csv`: `v,density_l,density_r`         |
//!
//! Floats in CSV files carry 17 significant digits.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::coin::{CoinField, CoinMatrix, Side};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::lattice::Walk;
use crate::momentum::{FreeModel, BRANCHES};
use crate::scattering::pure_point_mass_with;
use crate::weaklimit::{compare_empirical, default_v_grid, limit_distribution, LimitDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Spectrum,
    Scatter,
    LimitDist,
    Compare,
    Density,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Simulate,
        Command::Spectrum,
        Command::Scatter,
        Command::LimitDist,
        Command::Compare,
        Command::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Spectrum => "spectrum",
            Command::Scatter => "scatter",
            Command::LimitDist => "limit-dist",
            Command::Compare => "compare",
            Command::Density => "density",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse {
                path: "command".into(),
                message: format!("unknown command `{s}`"),
            })
    }
}

/// Process exit status for an error: 2 for unreadable input, 3 for domain
/// and validation failures, 4 for convergence gates.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) => 2,
        Error::Domain(_)
        | Error::Validation { .. }
        | Error::WindowLimit { .. }
        | Error::Aliasing { .. }
        | Error::Unsupported(_)
        | Error::Singularity(_) => 3,
        Error::NonConvergence { .. } | Error::Inconsistency { .. } | Error::MassDefect { .. } => 4,
    }
}

/// `{code, message, path}`.
pub fn error_json(e: &Error) -> String {
    let code = match e {
        Error::Parse { .. } => "parse",
        Error::Io(_) => "io",
        Error::Domain(_) => "domain",
        Error::Validation { .. } => "validation",
        Error::WindowLimit { .. } => "window_limit",
        Error::Aliasing { .. } => "aliasing",
        Error::Unsupported(_) => "unsupported",
        Error::Singularity(_) => "singularity",
        Error::NonConvergence { .. } => "non_convergence",
        Error::Inconsistency { .. } => "inconsistency",
        Error::MassDefect { .. } => "mass_defect",
    };
    let path = match e {
        Error::Parse { path, .. } | Error::Validation { path, .. } => path.clone(),
        _ => String::new(),
    };
    json!({ "code": code, "message": e.to_string(), "path": path }).to_string()
}

/// Read and validate a configuration file; `seed` overrides the file's seed.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Output of one run.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

struct Writer<'a> {
    dir: &'a Path,
    outcome: RunOutcome,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.outcome.artifacts.push(path);
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }
}

/// Run `command` and write its artifacts into `out`.
pub fn run(command: Command, config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let field = config.coin_field()?;
    let loaded = config.initial_state()?;
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let mut w = Writer {
        dir: out,
        outcome: RunOutcome::default(),
    };
    w.outcome.warnings.extend(loaded.warning.clone());
    let psi = &loaded.state;
    match command {
        Command::Simulate => {
            let mut walk = Walk::new(&field);
            let mut s = psi.clone();
            let mut now = 0;
            let mut csv = String::from("n,x,probability\n");
            for &n in &config.simulate.times {
                walk.evolve_in_place(&mut s, (n - now) as i64)?;
                now = n;
                for (x, p) in s.position_distribution().iter().filter(|(_, p)| *p > 0.0) {
                    csv.push_str(&format!("{n},{x},{p:.16e}\n"));
                }
            }
            w.write("simulate.csv", &csv)?;
        }
        Command::Spectrum => {
            let sides: Vec<_> = Side::BOTH
                .iter()
                .map(|&side| spectrum_json(side, field.side(side), config.spectrum.grid))
                .collect();
            w.write_json("spectrum.json", &json!({ "sides": sides }))?;
        }
        Command::Scatter => {
            let s = &config.scatter;
            let report = pure_point_mass_with(psi, &field, &config.schedule()?, s.horizon, s.radius, s.gate)?;
            w.write_json(
                "scatter.json",
                &json!({
                    "kappa0": report.kappa0,
                    "deficit": report.deficit,
                    "time_average": report.time_average,
                    "radius": report.radius,
                    "horizon": report.horizon,
                    "gate": report.gate,
                    "norms": { "left": report.norm_left, "right": report.norm_right },
                    "convergence": { "left": report.left, "right": report.right },
                }),
            )?;
        }
        Command::LimitDist | Command::Compare | Command::Density => {
            let dist = limit_distribution(psi, &field, &config.limit_config()?)?;
            match command {
                Command::LimitDist => {
                    w.write_json("limit.json", &limit_json(&dist, &field)?)?;
                    w.write("density.csv", &dist.density_csv())?;
                }
                Command::Density => w.write("density.csv", &dist.density_csv())?,
                _ => {
                    let c = &config.compare;
                    let report =
                        compare_empirical(psi, &field, &dist, &c.times, &default_v_grid(c.v_points), c.guard)?;
                    w.write("compare.csv", &report.to_csv())?;
                }
            }
        }
    }
    Ok(w.outcome)
}

fn spectrum_json(side: Side, coin: &CoinMatrix, grid: usize) -> serde_json::Value {
    let model = FreeModel::new(*coin, grid);
    let spec = model.spectrum();
    let pair = |z: num_complex::Complex64| [z.re, z.im];
    let samples: Vec<_> = model
        .samples()
        .iter()
        .map(|e| {
            let mut row = serde_json::Map::new();
            row.insert("k".into(), json!(e.k));
            for j in BRANCHES {
                row.insert(format!("lambda{j}"), json!(pair(e.lambda(j))));
                row.insert(format!("v{j}"), json!(e.velocity(j)));
            }
            serde_json::Value::Object(row)
        })
        .collect();
    json!({
        "side": side.label(),
        "coin": { "a": coin.a(), "alpha": coin.alpha(), "beta": coin.beta(), "delta": coin.delta() },
        "regime": format!("{:?}", coin.regime()).to_lowercase(),
        "arcs": spec.arcs.iter().map(|a| [a.start, a.end]).collect::<Vec<_>>(),
        "thresholds": spec.thresholds.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
        "full_circle": spec.full_circle,
        "samples": samples,
    })
}

fn limit_json(dist: &LimitDistribution, field: &CoinField) -> Result<serde_json::Value> {
    let moments: Vec<f64> = (1..=4).map(|p| dist.moment(p)).collect::<Result<_>>()?;
    let meta = dist.meta.as_ref();
    Ok(json!({
        "kappa0": dist.kappa0,
        "kappa_l": dist.kappa_l,
        "kappa_r": dist.kappa_r,
        "density_mass_l": dist.density_l.as_ref().map(|d| d.mass()),
        "density_mass_r": dist.density_r.as_ref().map(|d| d.mass()),
        "total_mass": dist.total_mass(),
        "moments": moments,
        "a_l": field.left().a(),
        "a_r": field.right().a(),
        "meta": meta,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("plot".parse::<Command>().is_err());
    }

    #[test]
    fn error_schema() {
        let e = Error::validation("field.left", "not unitary");
        let v: serde_json::Value = serde_json::from_str(&error_json(&e)).unwrap();
        assert_eq!(v["code"], "validation");
        assert_eq!(v["path"], "field.left");
        assert_eq!(exit_code(&e), 3);
        assert_eq!(exit_code(&Error::Parse { path: String::new(), message: String::new() }), 2);
        assert_eq!(
            exit_code(&Error::MassDefect {
                total: 0.9,
                tolerance: 1e-3
            }),
            4
        );
    }
}
