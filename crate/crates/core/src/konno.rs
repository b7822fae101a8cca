//! The Konno density, the velocity-to-momentum maps `k_{j,m}` and the
//! operators `K_{j,m}` that carry a state to a function of the velocity.
//!
//! For a coin with `0 < a < 1` every velocity `υ ∈ (−a, a)` is attained by
//! branch `j` at exactly one momentum in each of the half-period intervals
//! `I₀ = [δ/2 − α − π/2, δ/2 − α + π/2]` and `I₁ = I₀ + π`. Substituting
//! `k = k_{j,m}(υ)` turns `dk/2π` into `½ f_K(υ, a) dυ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::coin::{CoinMatrix, Regime};
use crate::error::{Error, Result};
use crate::lattice::LatticeState;
use crate::linalg::{spinor_inner, spinor_scale, wrap_angle, wrap_positive, Spinor, ZERO_SPINOR};
use crate::momentum::{eigensystem_with_gauge, fourier_many, velocity, Branch, Gauge, BRANCHES};
use crate::quadrature::{barycentric_eval, GaussLegendre};

/// Default number of grid points on each half `(−a, 0)` and `(0, a)`.
pub const DEFAULT_GRID_HALF: usize = 513;

/// `f_K(υ, r) = √(1 − r²) / (π (1 − υ²) √(r² − υ²))` for `|υ| < r`, else 0.
pub fn konno_density(v: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("Konno parameter r = {r} is outside (0, 1]")));
    }
    if v.abs() >= r {
        return Ok(0.0);
    }
    Ok((1.0 - r * r).sqrt() / (PI * (1.0 - v * v) * (r * r - v * v).sqrt()))
}

fn require_dispersive(coin: &CoinMatrix) -> Result<()> {
    if coin.regime() != Regime::Dispersive {
        return Err(Error::Unsupported(format!(
            "velocity maps need 0 < a < 1, got a = {}",
            coin.a()
        )));
    }
    Ok(())
}

fn check_indices(j: Branch, m: usize) {
    assert!(j == 1 || j == 2, "branch index must be 1 or 2, got {j}");
    assert!(m <= 1, "interval index must be 0 or 1, got {m}");
}

fn parity(j: Branch, m: usize) -> f64 {
    if (j + m) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Centre `δ/2 − α + mπ` of `I_m`.
pub fn interval_center(coin: &CoinMatrix, m: usize) -> f64 {
    coin.delta() / 2.0 - coin.alpha() + m as f64 * PI
}

/// `I_m` as `[lo, lo + π]`, not reduced modulo 2π.
pub fn interval(coin: &CoinMatrix, m: usize) -> (f64, f64) {
    let c = interval_center(coin, m);
    (c - FRAC_PI_2, c + FRAC_PI_2)
}

/// Whether `k` (mod 2π) lies in `I_m`.
pub fn in_interval(coin: &CoinMatrix, m: usize, k: f64) -> bool {
    wrap_angle(k - interval_center(coin, m)).abs() <= FRAC_PI_2
}

/// `k_{j,m}(υ)` reduced into `[0, 2π)`.
pub fn k_map(v: f64, coin: &CoinMatrix, j: Branch, m: usize) -> Result<f64> {
    check_indices(j, m);
    require_dispersive(coin)?;
    let a = coin.a();
    if !(v.abs() <= a) {
        return Err(Error::domain(format!("velocity {v} is outside [−{a}, {a}]")));
    }
    let s = (parity(j, m) * coin.b() * v / (a * (1.0 - v * v).sqrt())).clamp(-1.0, 1.0);
    Ok(wrap_positive(interval_center(coin, m) + s.asin()))
}

/// `k_{j,m}'(υ) = (−1)^{j+m} π f_K(υ, a)`.
pub fn k_map_derivative(v: f64, coin: &CoinMatrix, j: Branch, m: usize) -> Result<f64> {
    check_indices(j, m);
    require_dispersive(coin)?;
    let a = coin.a();
    if v.abs() == a {
        return Err(Error::Singularity(format!("k-map derivative is infinite at υ = {v}")));
    }
    if !(v.abs() < a) {
        return Err(Error::domain(format!("velocity {v} is outside [−{a}, {a}]")));
    }
    Ok(parity(j, m) * PI * konno_density(v, a)?)
}

/// Quadrature grid for `L²([−a, a], ½ f_K(υ, a) dυ)`.
///
/// Nodes are `υ = a sin θ` with Gauss–Legendre `θ` on `(−π/2, 0)` and
/// `(0, π/2)` separately; in `θ` the measure is the smooth weight
/// `b / (2π (1 − a² sin² θ)) dθ`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityGrid {
    a: f64,
    half: usize,
    theta: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(a: f64, per_half: usize) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Unsupported(format!("velocity grid needs 0 < a < 1, got a = {a}")));
        }
        if per_half == 0 {
            return Err(Error::validation("grid_half", "grid needs at least one node per half"));
        }
        let b = (1.0 - a * a).sqrt();
        let gl = GaussLegendre::new(per_half);
        let (tl, wl) = gl.on(-FRAC_PI_2, 0.0);
        let (tr, wr) = gl.on(0.0, FRAC_PI_2);
        let theta: Vec<f64> = tl.into_iter().chain(tr).collect();
        let wtheta: Vec<f64> = wl.into_iter().chain(wr).collect();
        let nodes = theta.iter().map(|t| a * t.sin()).collect();
        let weights = theta
            .iter()
            .zip(&wtheta)
            .map(|(t, w)| w * b / (2.0 * PI * (1.0 - (a * t.sin()).powi(2))))
            .collect();
        Ok(VelocityGrid {
            a,
            half: per_half,
            theta,
            nodes,
            weights,
            bary: gl.barycentric_weights(),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn per_half(&self) -> usize {
        self.half
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Velocities, increasing; the first half is negative.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights for `½ f_K dυ`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn negative_half(&self) -> std::ops::Range<usize> {
        0..self.half
    }

    pub fn positive_half(&self) -> std::ops::Range<usize> {
        self.half..2 * self.half
    }

    /// `∫ h(υ) ½ f_K(υ, a) dυ` over `[−a, a]`.
    pub fn integrate(&self, h: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(v, w)| w * h(*v)).sum()
    }

    /// Interpolate samples at velocity `v`, using the polynomial in `θ` on
    /// the half containing `v`.
    pub fn interpolate<T>(&self, values: &[T], v: f64) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Div<f64, Output = T>,
    {
        assert_eq!(values.len(), self.len());
        let theta = (v / self.a).clamp(-1.0, 1.0).asin();
        let (range, lo) = if v < 0.0 {
            (self.negative_half(), -FRAC_PI_2)
        } else {
            (self.positive_half(), 0.0)
        };
        // Back to the reference variable of the Gauss rule.
        let t = (theta - lo) / FRAC_PI_2 * 2.0 - 1.0;
        let ref_nodes: Vec<f64> = self.theta[range.clone()]
            .iter()
            .map(|th| (th - lo) / FRAC_PI_2 * 2.0 - 1.0)
            .collect();
        barycentric_eval(&ref_nodes, &self.bary, &values[range], t)
    }
}

/// Complex samples `g(υ)` on a [`VelocityGrid`], an element of `𝒢_⋆`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityDensitySamples {
    pub grid: VelocityGrid,
    pub values: Vec<C64>,
}

impl VelocityDensitySamples {
    pub fn zeros(grid: VelocityGrid) -> Self {
        let n = grid.len();
        VelocityDensitySamples {
            grid,
            values: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(grid: VelocityGrid, g: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().iter().map(|v| g(*v)).collect();
        VelocityDensitySamples { grid, values }
    }

    /// `∫ |g|² ½ f_K dυ`.
    pub fn norm_sqr(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(g, w)| w * g.norm_sqr())
            .sum()
    }

    /// `⟨self, other⟩` in `𝒢_⋆`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((g, h), w)| g.conj() * h * *w)
            .sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((g, h), w)| w * (g - h).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn at(&self, v: f64) -> C64 {
        self.grid.interpolate(&self.values, v)
    }

    /// Pointwise `F(υ) g(υ)`.
    pub fn multiplied(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.grid.nodes())
            .map(|(g, v)| g * f(*v))
            .collect();
        VelocityDensitySamples {
            grid: self.grid.clone(),
            values,
        }
    }
}

/// The operator `K_{j,m}: ℓ²(ℤ, ℂ²) → 𝒢_⋆`,
/// `(K_{j,m}Ψ)(υ) = ⟨u_j(k_{j,m}(υ)), (ℱΨ)(k_{j,m}(υ))⟩`.
#[derive(Clone, Copy, Debug)]
pub struct KOperator {
    coin: CoinMatrix,
    j: Branch,
    m: usize,
    gauge: Gauge,
}

impl KOperator {
    pub fn new(coin: CoinMatrix, j: Branch, m: usize) -> Result<Self> {
        check_indices(j, m);
        require_dispersive(&coin)?;
        Ok(KOperator {
            coin,
            j,
            m,
            gauge: Gauge::Standard,
        })
    }

    /// All four operators, ordered `(1,0), (1,1), (2,0), (2,1)`.
    pub fn all(coin: CoinMatrix) -> Result<Vec<Self>> {
        let mut out = Vec::with_capacity(4);
        for j in BRANCHES {
            for m in 0..2 {
                out.push(Self::new(coin, j, m)?);
            }
        }
        Ok(out)
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn branch(&self) -> Branch {
        self.j
    }

    pub fn interval_index(&self) -> usize {
        self.m
    }

    pub fn momentum(&self, v: f64) -> f64 {
        k_map(v, &self.coin, self.j, self.m).expect("velocity inside the grid")
    }

    fn eigenvector(&self, k: f64) -> Spinor {
        eigensystem_with_gauge(&self.coin, k, self.gauge).vector(self.j)
    }

    /// `K_{j,m}Ψ` on `grid`, with `ℱΨ` evaluated as an exact finite sum.
    pub fn apply(&self, state: &LatticeState, grid: &VelocityGrid) -> VelocityDensitySamples {
        let ks: Vec<f64> = grid.nodes().iter().map(|v| self.momentum(*v)).collect();
        let fourier = fourier_many(state, &ks);
        let values = ks
            .par_iter()
            .zip(fourier)
            .map(|(k, f)| spinor_inner(&self.eigenvector(*k), &f))
            .collect();
        VelocityDensitySamples {
            grid: grid.clone(),
            values,
        }
    }

    /// `K_{j,m}` applied to a vector given by its Fourier transform.
    pub fn apply_fourier(&self, fourier: impl Fn(f64) -> Spinor + Sync, grid: &VelocityGrid) -> VelocityDensitySamples {
        let values = grid
            .nodes()
            .par_iter()
            .map(|v| {
                let k = self.momentum(*v);
                spinor_inner(&self.eigenvector(k), &fourier(k))
            })
            .collect();
        VelocityDensitySamples {
            grid: grid.clone(),
            values,
        }
    }

    /// `(ℱ K*_{j,m} g)(k) = χ_{I_m}(k) g(v_j(k)) u_j(k)`.
    pub fn adjoint_fourier(&self, g: &VelocityDensitySamples, k: f64) -> Spinor {
        if !in_interval(&self.coin, self.m, k) {
            return ZERO_SPINOR;
        }
        let v = velocity(&self.coin, k, self.j);
        spinor_scale(&self.eigenvector(k), g.at(v))
    }

    /// `K*_{j,m} g` on the sites `lo..=hi`:
    /// `(K*g)(x) = ∫ g(υ) e^{ik_{j,m}(υ)x} u_j(k_{j,m}(υ)) ½ f_K(υ) dυ`.
    pub fn adjoint(&self, g: &VelocityDensitySamples, lo: i64, hi: i64) -> LatticeState {
        let terms: Vec<(f64, Spinor)> = g
            .grid
            .nodes()
            .iter()
            .zip(g.grid.weights())
            .zip(&g.values)
            .map(|((v, w), gv)| {
                let k = self.momentum(*v);
                (k, spinor_scale(&self.eigenvector(k), gv * *w))
            })
            .collect();
        let amps: Vec<Spinor> = (lo..=hi)
            .into_par_iter()
            .map(|x| {
                let mut acc = ZERO_SPINOR;
                for (k, c) in &terms {
                    let ph = C64::from_polar(1.0, k * x as f64);
                    acc[0] += ph * c[0];
                    acc[1] += ph * c[1];
                }
                acc
            })
            .collect();
        LatticeState::from_amplitudes(lo, &amps)
    }
}

/// `K_{j,m}Ψ` with the standard gauge.
pub fn apply_k(state: &LatticeState, coin: &CoinMatrix, j: Branch, m: usize, grid: &VelocityGrid) -> Result<VelocityDensitySamples> {
    Ok(KOperator::new(*coin, j, m)?.apply(state, grid))
}

/// `K*_{j,m} g` on the sites `lo..=hi`.
pub fn apply_k_adjoint(
    g: &VelocityDensitySamples,
    coin: &CoinMatrix,
    j: Branch,
    m: usize,
    lo: i64,
    hi: i64,
) -> Result<LatticeState> {
    Ok(KOperator::new(*coin, j, m)?.adjoint(g, lo, hi))
}

/// `ω(υ) = Σ_{j,m} |(K_{j,m}Ψ)(υ)|²` on `grid`.
pub fn velocity_weight(state: &LatticeState, coin: &CoinMatrix, grid: &VelocityGrid) -> Result<Vec<f64>> {
    let mut w = vec![0.0; grid.len()];
    for k in KOperator::all(*coin)? {
        for (acc, g) in w.iter_mut().zip(k.apply(state, grid).values) {
            *acc += g.norm_sqr();
        }
    }
    Ok(w)
}
