//! Coin matrices and position-dependent coin fields.
//!
//! Every `U(2)` matrix is written as
//!
//! ```text
//! C = e^{iδ/2} [[ a e^{i(α−δ/2)},   b e^{i(β−δ/2)} ],
//!               [ −b e^{−i(β−δ/2)},  a e^{−i(α−δ/2)} ]]
//! ```
//!
//! with `a² + b² = 1`. The parameter `a = |C₀₀|` alone decides the transport
//! regime of the homogeneous walk built from `C`: trapped for `a = 0`,
//! dispersive for `0 < a < 1` and ballistic at unit speed for `a = 1`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{wrap_angle, Mat2};

/// Stored coins must satisfy `‖M*M − I‖_max` below this.
pub const UNITARY_TOL: f64 = 1e-12;

/// Inputs to [`CoinMatrix::from_matrix`] only need to be unitary to this.
pub const INPUT_UNITARY_TOL: f64 = 1e-10;

/// Moduli below this are treated as exact zeros when fixing angle conventions.
const DEGENERATE_TOL: f64 = 1e-13;

/// A 2×2 unitary together with its `(a, b, α, β, δ)` parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinMatrix {
    entries: Mat2,
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
}

fn build_entries(a: f64, b: f64, alpha: f64, beta: f64, delta: f64) -> Mat2 {
    let g = C64::from_polar(1.0, delta / 2.0);
    Mat2::new(
        g * C64::from_polar(a, alpha - delta / 2.0),
        g * C64::from_polar(b, beta - delta / 2.0),
        g * C64::from_polar(-b, -(beta - delta / 2.0)),
        g * C64::from_polar(a, -(alpha - delta / 2.0)),
    )
}

impl CoinMatrix {
    /// Build a coin from its parameters. Angles are wrapped into `(−π, π]`;
    /// angles that do not influence the matrix (`α` when `a = 0`, `β` when
    /// `a = 1`) are pinned to zero.
    pub fn from_params(a: f64, alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !a.is_finite() {
            return Err(Error::domain(format!("coin parameter a = {a} is outside [0, 1]")));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta), ("delta", delta)] {
            if !v.is_finite() {
                return Err(Error::domain(format!("coin angle {name} = {v} is not finite")));
            }
        }
        let b = (1.0 - a * a).max(0.0).sqrt();
        let alpha = if a == 0.0 { 0.0 } else { wrap_angle(alpha) };
        let beta = if b == 0.0 { 0.0 } else { wrap_angle(beta) };
        let delta = wrap_angle(delta);
        Ok(CoinMatrix {
            entries: build_entries(a, b, alpha, beta, delta),
            a,
            b,
            alpha,
            beta,
            delta,
        })
    }

    /// Recover the parameters of a unitary matrix: `δ = arg det M`,
    /// `a = |M₀₀|`, `α = arg M₀₀`, `β = arg M₀₁`.
    pub fn from_matrix(m: Mat2) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= INPUT_UNITARY_TOL) {
            return Err(Error::validation(
                "",
                format!("matrix is not unitary (‖M*M − I‖_max = {defect:.3e})"),
            ));
        }
        let delta = wrap_angle(m.det().arg());
        let m00 = m.get(0, 0);
        let m01 = m.get(0, 1);
        let (a, alpha) = if m00.norm() < DEGENERATE_TOL {
            (0.0, 0.0)
        } else {
            (m00.norm().min(1.0), wrap_angle(m00.arg()))
        };
        let b = (1.0 - a * a).max(0.0).sqrt();
        let (a, b, beta) = if m01.norm() < DEGENERATE_TOL {
            (1.0, 0.0, 0.0)
        } else {
            (a, b, wrap_angle(m01.arg()))
        };
        let rebuilt = build_entries(a, b, alpha, beta, delta);
        let err = rebuilt.max_abs_diff(&m);
        if err > INPUT_UNITARY_TOL {
            return Err(Error::validation(
                "",
                format!("parameter reconstruction is off by {err:.3e}"),
            ));
        }
        Ok(CoinMatrix {
            entries: m,
            a,
            b,
            alpha,
            beta,
            delta,
        })
    }

    pub fn identity() -> Self {
        Self::from_params(1.0, 0.0, 0.0, 0.0).expect("valid parameters")
    }

    /// `(1/√2) [[1, 1], [1, −1]]`.
    pub fn hadamard() -> Self {
        Self::from_params(FRAC_1_SQRT_2, 0.0, 0.0, PI).expect("valid parameters")
    }

    pub fn matrix(&self) -> Mat2 {
        self.entries
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Entries rebuilt from the stored parameters.
    pub fn reconstruct(&self) -> Mat2 {
        build_entries(self.a, self.b, self.alpha, self.beta, self.delta)
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.a)
    }
}

/// Transport regime of a homogeneous walk, decided by `a = |C₀₀|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `a = 0`: pure point spectrum, zero velocity.
    Trapped,
    /// `0 < a < 1`: absolutely continuous spectrum, velocities in `[−a, a]`.
    Dispersive,
    /// `a = 1`: velocities exactly `±1`.
    Ballistic,
}

impl Regime {
    pub fn of(a: f64) -> Self {
        if a <= 0.0 {
            Regime::Trapped
        } else if a >= 1.0 {
            Regime::Ballistic
        } else {
            Regime::Dispersive
        }
    }
}

/// One of the two half-lines: `x ≤ −1` (left) or `x ≥ 0` (right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn of(x: i64) -> Self {
        if x < 0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// `j_⋆(x)`: the indicator of this half-line.
    pub fn indicator(self, x: i64) -> f64 {
        if Side::of(x) == self {
            1.0
        } else {
            0.0
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "l",
            Side::Right => "r",
        }
    }
}

/// Short-range decay of the coin towards one asymptotic matrix:
/// `C(x) = polar(C_⋆ + |x|^{−1−ε} P)` with the declared bound
/// `‖C(x) − C_⋆‖ ≤ κ |x|^{−1−ε}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSide {
    pub epsilon: f64,
    pub kappa: f64,
    pub perturbation: Mat2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRule {
    pub left: Option<TailSide>,
    pub right: Option<TailSide>,
}

/// A position-dependent coin `x ↦ C(x)` with left and right asymptotics.
///
/// Sites `x ≥ 0` belong to the right half-line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinField {
    left: CoinMatrix,
    right: CoinMatrix,
    overrides: BTreeMap<i64, Mat2>,
    tail: Option<TailRule>,
}

impl CoinField {
    pub fn two_phase(left: CoinMatrix, right: CoinMatrix) -> Self {
        CoinField {
            left,
            right,
            overrides: BTreeMap::new(),
            tail: None,
        }
    }

    pub fn homogeneous(coin: CoinMatrix) -> Self {
        Self::two_phase(coin, coin)
    }

    /// Replace the coin at a single site.
    pub fn with_override(mut self, x: i64, m: Mat2) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= UNITARY_TOL) {
            return Err(Error::validation(
                format!("override[{x}]"),
                format!("coin is not unitary (‖M*M − I‖_max = {defect:.3e})"),
            ));
        }
        self.overrides.insert(x, m);
        Ok(self)
    }

    /// Attach a decaying tail. The declared `κ` is checked against the
    /// re-unitarized coins on sampled sites up to `|x| = 10⁶`.
    pub fn with_tail(mut self, rule: TailRule) -> Result<Self> {
        for (name, side, asym) in [("left", rule.left, self.left), ("right", rule.right, self.right)] {
            let Some(t) = side else { continue };
            let path = format!("tail.{name}");
            if !(t.epsilon > 0.0) || !t.epsilon.is_finite() {
                return Err(Error::validation(path, "epsilon must be positive"));
            }
            if !(t.kappa > 0.0) || !t.kappa.is_finite() {
                return Err(Error::validation(path, "kappa must be positive"));
            }
            for x in sample_sites() {
                let c = tail_coin(&asym, &t, x)
                    .ok_or_else(|| Error::validation(path.clone(), format!("coin is singular at |x| = {x}")))?;
                let dev = (c - asym.matrix()).op_norm();
                let bound = t.kappa * (x as f64).powf(-1.0 - t.epsilon);
                if dev > bound * (1.0 + 1e-9) {
                    return Err(Error::validation(
                        path,
                        format!("‖C(x) − C_asym‖ = {dev:.3e} exceeds κ|x|^(−1−ε) = {bound:.3e} at |x| = {x}"),
                    ));
                }
            }
        }
        self.tail = Some(rule);
        Ok(self)
    }

    pub fn left(&self) -> &CoinMatrix {
        &self.left
    }

    pub fn right(&self) -> &CoinMatrix {
        &self.right
    }

    pub fn overrides(&self) -> &BTreeMap<i64, Mat2> {
        &self.overrides
    }

    pub fn tail(&self) -> Option<&TailRule> {
        self.tail.as_ref()
    }

    pub fn asymptotic(&self, x: i64) -> &CoinMatrix {
        self.side(Side::of(x))
    }

    pub fn side(&self, side: Side) -> &CoinMatrix {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// `C(x)`: an override if present, otherwise the tail rule for `x ≠ 0`,
    /// otherwise the asymptotic coin of the half-line containing `x`.
    pub fn coin_at(&self, x: i64) -> Mat2 {
        if let Some(m) = self.overrides.get(&x) {
            return *m;
        }
        let asym = self.asymptotic(x);
        if let Some(rule) = &self.tail {
            let side = if x < 0 { rule.left } else if x > 0 { rule.right } else { None };
            if let Some(t) = side {
                if let Some(c) = tail_coin(asym, &t, x.unsigned_abs()) {
                    return c;
                }
            }
        }
        asym.matrix()
    }

    /// Coins on the sites `lo..=hi`.
    pub fn coins_on(&self, lo: i64, hi: i64) -> Vec<Mat2> {
        if hi < lo {
            return Vec::new();
        }
        (lo..=hi).map(|x| self.coin_at(x)).collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.left.matrix() == self.right.matrix() && self.overrides.is_empty() && self.tail.is_none()
    }
}

fn tail_coin(asym: &CoinMatrix, t: &TailSide, abs_x: u64) -> Option<Mat2> {
    let s = (abs_x as f64).powf(-1.0 - t.epsilon);
    (asym.matrix() + t.perturbation.scale(C64::new(s, 0.0))).polar_unitary()
}

fn sample_sites() -> impl Iterator<Item = u64> {
    (1..=64u64).chain((0..=40).map(|i| (64.0 * 1.2f64.powi(i)).round() as u64).filter(|&x| x > 64))
        .chain([1_000_000])
}
