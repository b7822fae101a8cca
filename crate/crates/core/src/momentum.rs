//! Momentum-space structure of a homogeneous walk `U_⋆ = SC_⋆`.
//!
//! With `(ℱΨ)(k) = Σ_x e^{−ikx}Ψ(x)` the walk becomes multiplication by the
//! symbol `Û(k) = diag(e^{ik}, e^{−ik}) C_⋆`, whose eigenvalues are
//!
//! ```text
//! λ_j(k) = e^{iδ/2} (τ(k) − (−1)^j i η(k)),   τ = a cos(k + α − δ/2),  η = √(1 − τ²)
//! ```
//!
//! so that the group velocity `v_j = −∂_k arg λ_j` equals `(−1)^j ς/η` with
//! `ς = a sin(k + α − δ/2)`. Branches are labelled by this closed form and
//! never by sorting.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::coin::{CoinMatrix, Regime};
use crate::error::{Error, Result};
use crate::lattice::LatticeState;
use crate::linalg::{spinor_norm_sqr, spinor_scale, wrap_angle, Mat2, Spinor, ZERO_SPINOR};

/// Branch index `j ∈ {1, 2}`.
pub type Branch = usize;

pub const BRANCHES: [Branch; 2] = [1, 2];

/// Default number of empty sites on each side of a state in a DFT frame.
pub const DEFAULT_MARGIN: usize = 256;

/// Largest mass allowed within the margin of a DFT frame.
pub const DEFAULT_ALIAS_THRESHOLD: f64 = 1e-10;

fn sign(j: Branch) -> f64 {
    assert!(j == 1 || j == 2, "branch index must be 1 or 2, got {j}");
    if j == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `k + α − δ/2`.
fn phase_arg(coin: &CoinMatrix, k: f64) -> f64 {
    k + coin.alpha() - coin.delta() / 2.0
}

pub fn tau(coin: &CoinMatrix, k: f64) -> f64 {
    coin.a() * phase_arg(coin, k).cos()
}

pub fn eta(coin: &CoinMatrix, k: f64) -> f64 {
    let t = tau(coin, k);
    (1.0 - t * t).max(0.0).sqrt()
}

pub fn varsigma(coin: &CoinMatrix, k: f64) -> f64 {
    coin.a() * phase_arg(coin, k).sin()
}

/// `Û(k) = diag(e^{ik}, e^{−ik}) C`.
pub fn symbol_at(coin: &CoinMatrix, k: f64) -> Mat2 {
    Mat2::diag(C64::from_polar(1.0, k), C64::from_polar(1.0, -k)) * coin.matrix()
}

/// Phase convention for eigenvectors.
#[derive(Clone, Copy, Debug, Default)]
pub enum Gauge {
    /// The component of larger modulus is real and positive (the first one
    /// on ties).
    #[default]
    Standard,
    /// Standard gauge multiplied by `e^{iθ(k, j)}`.
    Rephased(fn(f64, Branch) -> f64),
}

/// Eigendata of `Û(k)` at one momentum; index 0 holds branch `j = 1`.
#[derive(Clone, Copy, Debug)]
pub struct EigenSystem {
    pub k: f64,
    pub lambda: [C64; 2],
    pub u: [Spinor; 2],
    pub v: [f64; 2],
}

impl EigenSystem {
    pub fn lambda(&self, j: Branch) -> C64 {
        self.lambda[j - 1]
    }

    pub fn vector(&self, j: Branch) -> Spinor {
        self.u[j - 1]
    }

    pub fn velocity(&self, j: Branch) -> f64 {
        self.v[j - 1]
    }

    /// `Π_j(k) = u_j u_j*`.
    pub fn projector(&self, j: Branch) -> Mat2 {
        Mat2::outer(&self.u[j - 1], &self.u[j - 1])
    }

    /// `Σ_j F(v_j(k)) Π_j(k)`.
    pub fn velocity_multiplier(&self, f: impl Fn(f64) -> f64) -> Mat2 {
        self.projector(1).scale(f(self.v[0]).into()) + self.projector(2).scale(f(self.v[1]).into())
    }
}

/// Closed-form eigenpairs of the symbol in the standard gauge.
pub fn eigensystem(coin: &CoinMatrix, k: f64) -> EigenSystem {
    eigensystem_with_gauge(coin, k, Gauge::Standard)
}

pub fn eigensystem_with_gauge(coin: &CoinMatrix, k: f64, gauge: Gauge) -> EigenSystem {
    let sym = symbol_at(coin, k);
    let half = C64::from_polar(1.0, coin.delta() / 2.0);
    let lambda = match coin.regime() {
        // Diagonal symbol: keep λ₁ on component 0 so that v₁ = −1.
        Regime::Ballistic => [sym.get(0, 0), sym.get(1, 1)],
        _ => {
            let t = tau(coin, k);
            let e = eta(coin, k);
            [half * C64::new(t, e), half * C64::new(t, -e)]
        }
    };
    let mut u = [ZERO_SPINOR; 2];
    for (idx, &l) in lambda.iter().enumerate() {
        u[idx] = match coin.regime() {
            Regime::Ballistic => {
                let mut e = ZERO_SPINOR;
                e[idx] = C64::new(1.0, 0.0);
                e
            }
            _ => eigenvector(&sym, l),
        };
        u[idx] = fix_gauge(u[idx]);
        if let Gauge::Rephased(theta) = gauge {
            u[idx] = spinor_scale(&u[idx], C64::from_polar(1.0, theta(k, idx + 1)));
        }
    }
    let v = [velocity(coin, k, 1), velocity(coin, k, 2)];
    EigenSystem { k, lambda, u, v }
}

/// Unit eigenvector of `m` for the eigenvalue `l`, from whichever row of
/// `m − l` gives the better-conditioned null vector.
fn eigenvector(m: &Mat2, l: C64) -> Spinor {
    let r0 = [m.get(0, 1), l - m.get(0, 0)];
    let r1 = [l - m.get(1, 1), m.get(1, 0)];
    let v = if spinor_norm_sqr(&r0) >= spinor_norm_sqr(&r1) { r0 } else { r1 };
    spinor_scale(&v, C64::new(1.0 / spinor_norm_sqr(&v).sqrt(), 0.0))
}

fn fix_gauge(u: Spinor) -> Spinor {
    let pivot = if u[0].norm() >= FRAC_1_SQRT_2 * (1.0 - 1e-15) { u[0] } else { u[1] };
    spinor_scale(&u, (pivot.conj() / pivot.norm()).into())
}

/// Group velocity `v_j(k)`.
pub fn velocity(coin: &CoinMatrix, k: f64, j: Branch) -> f64 {
    match coin.regime() {
        Regime::Trapped => 0.0,
        Regime::Ballistic => sign(j),
        Regime::Dispersive => sign(j) * varsigma(coin, k) / eta(coin, k),
    }
}

/// An arc `{e^{iθ}: θ ∈ [start, end]}` traversed counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc2 {
    pub start: f64,
    pub end: f64,
}

impl Arc2 {
    pub fn contains_angle(&self, theta: f64, tol: f64) -> bool {
        let span = self.end - self.start;
        let rel = (theta - self.start).rem_euclid(2.0 * PI);
        rel <= span + tol || rel >= 2.0 * PI - tol
    }

    pub fn is_point(&self) -> bool {
        self.end == self.start
    }
}

/// Spectrum of `U_⋆` on the unit circle: one arc per branch and the
/// boundary points of their union.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub arcs: Vec<Arc2>,
    pub thresholds: Vec<C64>,
    pub full_circle: bool,
}

impl Spectrum {
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        (z.norm() - 1.0).abs() <= tol && self.arcs.iter().any(|a| a.contains_angle(z.arg(), tol))
    }
}

/// Spectral arcs and thresholds of `U_⋆`.
///
/// Branch 1 sweeps `e^{i(δ/2 + θ)}` and branch 2 sweeps `e^{i(δ/2 − θ)}` with
/// `θ = arccos τ ∈ [arccos a, π − arccos a]`.
pub fn spectrum_arcs(coin: &CoinMatrix) -> Spectrum {
    let d = coin.delta() / 2.0;
    let t0 = coin.a().clamp(0.0, 1.0).acos();
    let arcs = vec![
        Arc2 { start: d + t0, end: d + PI - t0 },
        Arc2 { start: d - PI + t0, end: d - t0 },
    ];
    let thresholds = match coin.regime() {
        Regime::Ballistic => Vec::new(),
        Regime::Trapped => vec![C64::from_polar(1.0, d + t0), C64::from_polar(1.0, d - t0)],
        Regime::Dispersive => [d + t0, d + PI - t0, d - PI + t0, d - t0]
            .iter()
            .map(|&t| C64::from_polar(1.0, t))
            .collect(),
    };
    Spectrum {
        arcs,
        thresholds,
        full_circle: coin.regime() == Regime::Ballistic,
    }
}

/// Eigendata of one coin sampled on the uniform grid `k_m = 2πm/N`.
#[derive(Clone, Debug)]
pub struct FreeModel {
    coin: CoinMatrix,
    samples: Vec<EigenSystem>,
    spectrum: Spectrum,
}

impl FreeModel {
    pub fn new(coin: CoinMatrix, grid_size: usize) -> Self {
        let samples = (0..grid_size)
            .map(|m| eigensystem(&coin, 2.0 * PI * m as f64 / grid_size as f64))
            .collect();
        FreeModel {
            coin,
            samples,
            spectrum: spectrum_arcs(&coin),
        }
    }

    pub fn coin(&self) -> &CoinMatrix {
        &self.coin
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[EigenSystem] {
        &self.samples
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Eigendata at an arbitrary momentum.
    pub fn at(&self, k: f64) -> EigenSystem {
        eigensystem(&self.coin, k)
    }
}

/// `(ℱΨ)(k)` as an exact finite sum over the support.
pub fn fourier_at(state: &LatticeState, k: f64) -> Spinor {
    let Some((lo, hi)) = state.support_bounds() else {
        return ZERO_SPINOR;
    };
    let step = C64::from_polar(1.0, -k);
    // Restart the phase recurrence every 64 sites to bound rounding drift.
    let mut acc = ZERO_SPINOR;
    let mut x = lo;
    while x <= hi {
        let mut ph = C64::from_polar(1.0, -k * x as f64);
        for y in x..=hi.min(x + 63) {
            let v = state.get(y);
            acc[0] += ph * v[0];
            acc[1] += ph * v[1];
            ph *= step;
        }
        x += 64;
    }
    acc
}

/// `(ℱΨ)(k)` at many momenta, in parallel.
pub fn fourier_many(state: &LatticeState, ks: &[f64]) -> Vec<Spinor> {
    ks.par_iter().map(|&k| fourier_at(state, k)).collect()
}

/// A window of `len` sites starting at `first_site`, closed into a ring with
/// a twisted boundary condition so that `ℱ` is computed by FFT at
/// `k_m = 2π(m + ½)/len`.
#[derive(Clone)]
pub struct MomentumFrame {
    first_site: i64,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MomentumFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MomentumFrame")
            .field("first_site", &self.first_site)
            .field("len", &self.len)
            .finish()
    }
}

impl MomentumFrame {
    pub fn new(first_site: i64, len: usize) -> Self {
        assert!(len > 0, "frame must have at least one site");
        let mut planner = FftPlanner::new();
        MomentumFrame {
            first_site,
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    /// Smallest power-of-two frame holding the support of `state` with
    /// `margin` free sites on both sides.
    pub fn around(state: &LatticeState, margin: usize) -> Self {
        let (lo, hi) = state.support_bounds().unwrap_or((0, 0));
        let need = (hi - lo + 1) as usize + 2 * margin;
        let len = need.next_power_of_two();
        let first = lo - ((len - (hi - lo + 1) as usize) / 2) as i64;
        Self::new(first, len)
    }

    pub fn first_site(&self) -> i64 {
        self.first_site
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn last_site(&self) -> i64 {
        self.first_site + self.len as i64 - 1
    }

    /// `k_m = 2π(m + ½)/len`. The half-step offset keeps the grid off the
    /// symmetric points `k ∈ (π/2)ℤ`, where velocities of the standard
    /// coins vanish.
    pub fn momentum(&self, m: usize) -> f64 {
        2.0 * PI * (m as f64 + 0.5) / self.len as f64
    }

    /// Mass of `state` within `margin` sites of the frame edges or outside
    /// the frame.
    pub fn edge_mass(&self, state: &LatticeState, margin: usize) -> f64 {
        let m = margin as i64;
        state.mass_outside(self.first_site + m, self.last_site() - m)
    }

    /// `(ℱΨ)(k_m)` for all `m`. The state must lie inside the frame.
    pub fn forward(&self, state: &LatticeState) -> Vec<Spinor> {
        let twist = |t: usize| C64::from_polar(1.0, -PI * t as f64 / self.len as f64);
        let mut c0: Vec<C64> = (0..self.len)
            .map(|t| twist(t) * state.get(self.first_site + t as i64)[0])
            .collect();
        let mut c1: Vec<C64> = (0..self.len)
            .map(|t| twist(t) * state.get(self.first_site + t as i64)[1])
            .collect();
        self.forward.process(&mut c0);
        self.forward.process(&mut c1);
        (0..self.len)
            .map(|m| {
                let ph = C64::from_polar(1.0, -self.momentum(m) * self.first_site as f64);
                [ph * c0[m], ph * c1[m]]
            })
            .collect()
    }

    /// Inverse of [`forward`](Self::forward).
    pub fn inverse(&self, values: &[Spinor]) -> LatticeState {
        assert_eq!(values.len(), self.len);
        let mut c0 = Vec::with_capacity(self.len);
        let mut c1 = Vec::with_capacity(self.len);
        for (m, v) in values.iter().enumerate() {
            let ph = C64::from_polar(1.0 / self.len as f64, self.momentum(m) * self.first_site as f64);
            c0.push(ph * v[0]);
            c1.push(ph * v[1]);
        }
        self.inverse.process(&mut c0);
        self.inverse.process(&mut c1);
        let amps: Vec<Spinor> = c0
            .into_iter()
            .zip(c1)
            .enumerate()
            .map(|(t, (a, b))| {
                let ph = C64::from_polar(1.0, PI * t as f64 / self.len as f64);
                [ph * a, ph * b]
            })
            .collect();
        LatticeState::from_amplitudes(self.first_site, &amps)
    }

    /// `ℱ* M(k) ℱ Ψ` on the periodic frame.
    pub fn apply_multiplier(&self, state: &LatticeState, mult: impl Fn(f64) -> Mat2 + Sync) -> LatticeState {
        let mut vals = self.forward(state);
        vals.par_iter_mut().enumerate().for_each(|(m, v)| {
            *v = mult(self.momentum(m)).apply(v);
        });
        self.inverse(&vals)
    }
}

/// A Borel set of velocities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityWindow {
    All,
    /// `(0, ∞)`.
    Positive,
    /// `(−∞, 0)`.
    Negative,
    /// The closed interval `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

impl VelocityWindow {
    pub fn indicator(&self, v: f64) -> f64 {
        let inside = match *self {
            VelocityWindow::All => true,
            VelocityWindow::Positive => v > 0.0,
            VelocityWindow::Negative => v < 0.0,
            VelocityWindow::Interval { lo, hi } => v >= lo && v <= hi,
        };
        if inside {
            1.0
        } else {
            0.0
        }
    }
}

/// `F(V_⋆)Ψ` for a bounded function `F`, evaluated on `frame`.
///
/// Fails with an aliasing error when more than `threshold` of the mass of
/// `state` lies within `margin` sites of the frame edges.
pub fn velocity_function(
    state: &LatticeState,
    coin: &CoinMatrix,
    f: impl Fn(f64) -> f64 + Sync,
    frame: &MomentumFrame,
    margin: usize,
    threshold: f64,
) -> Result<LatticeState> {
    let edge = frame.edge_mass(state, margin);
    if edge > threshold {
        return Err(Error::Aliasing { mass: edge, threshold });
    }
    Ok(frame.apply_multiplier(state, |k| eigensystem(coin, k).velocity_multiplier(&f)))
}

/// Free sites on each side of the frame used by [`velocity_projection`].
/// Sharp windows leave `1/x` tails, so the ring must be long.
pub const PROJECTION_MARGIN: usize = 1 << 17;

/// `χ_B(V_⋆)Ψ` on a frame with [`PROJECTION_MARGIN`] free sites around the
/// state.
pub fn velocity_projection(state: &LatticeState, coin: &CoinMatrix, window: VelocityWindow) -> Result<LatticeState> {
    let frame = MomentumFrame::around(state, PROJECTION_MARGIN);
    velocity_function(
        state,
        coin,
        |v| window.indicator(v),
        &frame,
        DEFAULT_MARGIN,
        DEFAULT_ALIAS_THRESHOLD,
    )
}

/// `U_⋆ⁿΨ` computed in momentum space; exact up to rounding because the
/// frame holds the whole light cone of the support.
pub fn free_evolve(state: &LatticeState, coin: &CoinMatrix, n: i64) -> LatticeState {
    let Some((lo, hi)) = state.support_bounds() else {
        return state.clone();
    };
    let reach = n.unsigned_abs() as usize;
    let frame = MomentumFrame::around(state, reach + 1);
    let out = frame.apply_multiplier(state, |k| symbol_at(coin, k).powi_unitary(n));
    out.restricted(lo - reach as i64, hi + reach as i64).trimmed()
}

/// Angle of `λ_j(k)` relative to `e^{iδ/2}`, in `(−π, π]`.
pub fn eigenphase(coin: &CoinMatrix, k: f64, j: Branch) -> f64 {
    let l = eigensystem(coin, k).lambda(j);
    wrap_angle(l.arg() - coin.delta() / 2.0)
}
