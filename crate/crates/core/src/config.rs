//! TOML run configuration.
//!
//! Angles are in radians; complex numbers are `[re, im]` pairs; matrices
//! are row-major `[[m00, m01], [m10, m11]]`.
//!
//! ```toml
//! seed = 7
//!
//! [field.left]
//! a = 0.7071067811865476
//! alpha = 0.0
//! beta = 0.0
//! delta = 3.141592653589793
//!
//! [field.right]
//! matrix = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
//!
//! [[field.overrides]]
//! x = 0
//! matrix = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]
//!
//! [[state.entries]]
//! x = 0
//! amplitude = [[1.0, 0.0], [0.0, 0.0]]
//!
//! [simulate]
//! times = [100, 1000]
//! ```
//!
//! All command sections are optional and default to the values below.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coin::{CoinField, CoinMatrix, TailRule, TailSide};
use crate::error::{Error, Result};
use crate::lattice::LatticeState;
use crate::linalg::{Mat2, Spinor};
use crate::scattering::{Criterion, Schedule};
use crate::weaklimit::LimitConfig;

pub type ComplexPair = [f64; 2];
pub type MatrixSpec = [[ComplexPair; 2]; 2];

/// Norm deviation above which loading an initial state emits a warning.
pub const RENORMALIZATION_WARNING: f64 = 1e-8;

fn c(p: ComplexPair) -> num_complex::Complex64 {
    num_complex::Complex64::new(p[0], p[1])
}

/// Attach a config path; domain errors in config values become validation
/// errors at that path.
fn located(e: Error, path: &str) -> Error {
    match e {
        Error::Domain(message) | Error::Unsupported(message) => Error::Validation {
            path: path.to_string(),
            message,
        },
        other => other.at(path),
    }
}

fn matrix(m: &MatrixSpec) -> Mat2 {
    Mat2::new(c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum CoinSpec {
    Params { a: f64, alpha: f64, beta: f64, delta: f64 },
    Matrix { matrix: MatrixSpec },
}

impl CoinSpec {
    pub fn build(&self) -> Result<CoinMatrix> {
        match self {
            CoinSpec::Params { a, alpha, beta, delta } => CoinMatrix::from_params(*a, *alpha, *beta, *delta),
            CoinSpec::Matrix { matrix: m } => CoinMatrix::from_matrix(matrix(m)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideSpec {
    pub x: i64,
    pub matrix: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSideSpec {
    pub epsilon: f64,
    pub kappa: f64,
    pub perturbation: MatrixSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<TailSideSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<TailSideSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub left: CoinSpec,
    pub right: CoinSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<OverrideSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailSpec>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<CoinField> {
        let left = self.left.build().map_err(|e| located(e, "field.left"))?;
        let right = self.right.build().map_err(|e| located(e, "field.right"))?;
        let mut field = CoinField::two_phase(left, right);
        for (i, o) in self.overrides.iter().enumerate() {
            field = field
                .with_override(o.x, matrix(&o.matrix))
                .map_err(|e| located(e, &format!("field.overrides[{i}]")))?;
        }
        if let Some(t) = &self.tail {
            let side = |s: &Option<TailSideSpec>| {
                s.as_ref().map(|s| TailSide {
                    epsilon: s.epsilon,
                    kappa: s.kappa,
                    perturbation: matrix(&s.perturbation),
                })
            };
            field = field
                .with_tail(TailRule {
                    left: side(&t.left),
                    right: side(&t.right),
                })
                .map_err(|e| located(e, "field"))?;
        }
        Ok(field)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub x: i64,
    pub amplitude: [ComplexPair; 2],
}

/// Random amplitudes on `lo..=hi`, drawn from the run seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStateSpec {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<EntrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomStateSpec>,
}

/// A normalized initial state and how far it was from normalized.
#[derive(Clone, Debug)]
pub struct LoadedState {
    pub state: LatticeState,
    pub original_norm: f64,
    pub warning: Option<String>,
}

impl StateSpec {
    pub fn build(&self, seed: u64) -> Result<LoadedState> {
        let state = match (&self.random, self.entries.is_empty()) {
            (Some(_), false) => return Err(Error::validation("state", "give either `entries` or `random`, not both")),
            (None, true) => return Err(Error::validation("state", "initial state is empty")),
            (None, false) => {
                let mut seen = std::collections::BTreeSet::new();
                for (i, e) in self.entries.iter().enumerate() {
                    if !seen.insert(e.x) {
                        return Err(Error::validation(format!("state.entries[{i}].x"), format!("site {} repeated", e.x)));
                    }
                    if e.amplitude.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(Error::validation(format!("state.entries[{i}].amplitude"), "amplitude is not finite"));
                    }
                }
                LatticeState::from_entries(self.entries.iter().map(|e| (e.x, [c(e.amplitude[0]), c(e.amplitude[1])])))
            }
            (Some(r), true) => {
                if r.hi < r.lo {
                    return Err(Error::validation("state.random", "need lo ≤ hi"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut pair = || num_complex::Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                let amps: Vec<Spinor> = (r.lo..=r.hi).map(|_| [pair(), pair()]).collect();
                LatticeState::from_amplitudes(r.lo, &amps)
            }
        };
        let norm = state.norm();
        if !(norm > 0.0) {
            return Err(Error::validation("state", "initial state has zero norm"));
        }
        let warning = ((norm - 1.0).abs() > RENORMALIZATION_WARNING && self.random.is_none())
            .then(|| format!("initial state renormalized from norm {norm:.12}"));
        Ok(LoadedState {
            state: state.normalized(),
            original_norm: norm,
            warning,
        })
    }
}

fn default_times() -> Vec<u64> {
    vec![100, 1000]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    #[serde(default = "default_times")]
    pub times: Vec<u64>,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        SimulateSpec { times: default_times() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub grid: usize,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec { grid: 256 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterSpec {
    pub n_start: u64,
    pub n_max: u64,
    pub tol: f64,
    pub criterion: Criterion,
    pub horizon: u64,
    pub radius: i64,
    pub gate: f64,
}

impl Default for ScatterSpec {
    fn default() -> Self {
        let s = Schedule::default();
        let l = LimitConfig::default();
        ScatterSpec {
            n_start: s.n_start,
            n_max: s.n_max,
            tol: s.tol,
            criterion: s.criterion,
            horizon: l.horizon,
            radius: l.radius,
            gate: l.gate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    pub grid_half: usize,
    pub mass_tol: f64,
    pub extrapolate: bool,
}

impl Default for LimitSpec {
    fn default() -> Self {
        let l = LimitConfig::default();
        LimitSpec {
            grid_half: l.grid_half,
            mass_tol: l.mass_tol,
            extrapolate: l.extrapolate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub times: Vec<u64>,
    pub v_points: usize,
    pub guard: f64,
}

impl Default for CompareSpec {
    fn default() -> Self {
        CompareSpec {
            times: vec![250, 500, 1000, 2000],
            v_points: 2201,
            guard: crate::weaklimit::DEFAULT_GUARD_BAND,
        }
    }
}

/// Everything a run needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub field: FieldSpec,
    pub state: StateSpec,
    #[serde(default)]
    pub simulate: SimulateSpec,
    #[serde(default)]
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub scatter: ScatterSpec,
    #[serde(default)]
    pub limit: LimitSpec,
    #[serde(default)]
    pub compare: CompareSpec,
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(path, format!("tolerance must be positive, got {v}")))
    }
}

fn increasing(path: &str, times: &[u64]) -> Result<()> {
    if times.is_empty() || times[0] == 0 || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation(path, "times must be positive and strictly increasing"));
    }
    Ok(())
}

impl RunConfig {
    /// Parse and validate.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Parse {
                path: format!("line {line}"),
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.field.build()?;
        increasing("simulate.times", &self.simulate.times)?;
        if self.spectrum.grid == 0 {
            return Err(Error::validation("spectrum.grid", "grid must be nonempty"));
        }
        let s = &self.scatter;
        positive("scatter.tol", s.tol)?;
        positive("scatter.gate", s.gate)?;
        Schedule::new(s.n_start, s.n_max, s.tol, s.criterion).map_err(|e| located(e, "scatter"))?;
        if s.radius < 0 || s.horizon == 0 {
            return Err(Error::validation("scatter", "need radius ≥ 0 and horizon ≥ 1"));
        }
        positive("limit.mass_tol", self.limit.mass_tol)?;
        let g = self.limit.grid_half;
        if g < 3 || !(g - 1).is_power_of_two() {
            return Err(Error::validation("limit.grid_half", format!("Gauss grid size must be 2^k + 1, got {g}")));
        }
        increasing("compare.times", &self.compare.times)?;
        positive("compare.guard", self.compare.guard)?;
        if self.compare.v_points < 2 {
            return Err(Error::validation("compare.v_points", "need at least two points"));
        }
        Ok(())
    }

    pub fn coin_field(&self) -> Result<CoinField> {
        self.field.build()
    }

    pub fn initial_state(&self) -> Result<LoadedState> {
        self.state.build(self.seed)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let s = &self.scatter;
        Schedule::new(s.n_start, s.n_max, s.tol, s.criterion)
    }

    pub fn limit_config(&self) -> Result<LimitConfig> {
        Ok(LimitConfig {
            schedule: self.schedule()?,
            grid_half: self.limit.grid_half,
            horizon: self.scatter.horizon,
            radius: self.scatter.radius,
            gate: self.scatter.gate,
            mass_tol: self.limit.mass_tol,
            extrapolate: self.limit.extrapolate,
        })
    }

    /// A Hadamard walk from `δ₀ ⊗ (1, 0)`.
    pub fn hadamard() -> Self {
        let h = CoinMatrix::hadamard();
        let spec = CoinSpec::Params {
            a: h.a(),
            alpha: h.alpha(),
            beta: h.beta(),
            delta: h.delta(),
        };
        RunConfig {
            seed: 0,
            field: FieldSpec {
                left: spec.clone(),
                right: spec,
                overrides: Vec::new(),
                tail: None,
            },
            state: StateSpec {
                entries: vec![EntrySpec {
                    x: 0,
                    amplitude: [[1.0, 0.0], [0.0, 0.0]],
                }],
                random: None,
            },
            simulate: SimulateSpec::default(),
            spectrum: SpectrumSpec::default(),
            scatter: ScatterSpec::default(),
            limit: LimitSpec::default(),
            compare: CompareSpec::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_round_trip() {
        let cfg = RunConfig::hadamard();
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
        assert_eq!(back.coin_field().unwrap().left().matrix(), CoinMatrix::hadamard().matrix());
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let text = r#"
            [field.left]
            a = 0.5
            alpha = 0.1
            beta = 0.2
            delta = 0.3
            [field.right]
            matrix = [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]
            [[state.entries]]
            x = 0
            amplitude = [[3.0, 0.0], [0.0, 4.0]]
        "#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.scatter, ScatterSpec::default());
        let s = cfg.initial_state().unwrap();
        assert!((s.state.norm() - 1.0).abs() < 1e-15);
        assert!((s.original_norm - 5.0).abs() < 1e-15);
        assert!(s.warning.is_some());
        assert_eq!(cfg.coin_field().unwrap().right().a(), 0.0);
    }

    #[test]
    fn non_unitary_override_reports_its_path() {
        let mut cfg = RunConfig::hadamard();
        cfg.field.overrides.push(OverrideSpec {
            x: 3,
            matrix: [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
        });
        match RunConfig::from_toml(&cfg.to_toml()) {
            Err(Error::Validation { path, .. }) => assert!(path.starts_with("field.overrides[0]"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_numbers() {
        let mut cfg = RunConfig::hadamard();
        cfg.scatter.tol = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::Validation { path, .. }) if path == "scatter.tol"));
        let mut cfg = RunConfig::hadamard();
        cfg.limit.grid_half = 512;
        assert!(matches!(cfg.validate(), Err(Error::Validation { path, .. }) if path == "limit.grid_half"));
        let mut cfg = RunConfig::hadamard();
        cfg.compare.times = vec![10, 5];
        assert!(cfg.validate().is_err());
        assert!(matches!(RunConfig::from_toml("seed = ["), Err(Error::Parse { .. })));
        assert!(matches!(RunConfig::from_toml("bogus = 1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn random_state_depends_only_on_seed() {
        let mut cfg = RunConfig::hadamard();
        cfg.state = StateSpec {
            entries: Vec::new(),
            random: Some(RandomStateSpec { lo: -3, hi: 4 }),
        };
        let a = cfg.initial_state().unwrap().state;
        let b = cfg.initial_state().unwrap().state;
        assert_eq!(a, b);
        cfg.seed = 1;
        assert!(cfg.initial_state().unwrap().state.distance(&a) > 1e-3);
        assert!((a.norm() - 1.0).abs() < 1e-14);
    }
}
