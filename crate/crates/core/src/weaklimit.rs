//! The limit law `μ_V` of the average velocity `X_n/n` and its comparison
//! with finite-time walk statistics.
//!
//! ```text
//! μ_V(dυ) = κ₀ δ₀ + κ_ℓ δ₋₁ + κ_r δ₁
//!         + ½ χ_{[−a_ℓ,0)}(υ) w_ℓ(υ) f_K(υ, a_ℓ) dυ + ½ χ_{(0,a_r]}(υ) w_r(υ) f_K(υ, a_r) dυ
//! ```
//!
//! with `κ_⋆ = ‖Φ_⋆‖²` when `a_⋆ = 1`, `w_⋆ = Σ_{j,m} |K_{⋆,j,m}Φ_⋆|²` when
//! `0 < a_⋆ < 1`, and `κ₀` the pure-point mass of the initial state.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coin::{CoinField, CoinMatrix, Regime, Side};
use crate::error::{Error, Result};
use crate::konno::{konno_density, velocity_weight, VelocityGrid, DEFAULT_GRID_HALF};
use crate::lattice::{LatticeState, Walk};
use crate::quadrature::GaussLegendre;
use crate::scattering::{
    outgoing_states, richardson, time_averaged_local_mass, ConvergenceReport, Outgoing, Schedule, DEFAULT_LOCAL_RADIUS,
    DEFAULT_PP_GATE,
};

/// Largest allowed deviation of the total mass from 1.
pub const DEFAULT_MASS_TOL: f64 = 1e-3;

/// Half-width of the band around the atoms `−1, 0, 1` excluded from
/// Kolmogorov distances.
pub const DEFAULT_GUARD_BAND: f64 = 0.02;

const CDF_SEGMENTS: usize = 2048;

/// Settings of the limit-distribution pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub schedule: Schedule,
    pub grid_half: usize,
    pub horizon: u64,
    pub radius: i64,
    pub gate: f64,
    pub mass_tol: f64,
    /// Remove the `N^{−1/2}` term from masses by Richardson extrapolation
    /// over the last two checkpoints.
    pub extrapolate: bool,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            schedule: Schedule::default(),
            grid_half: DEFAULT_GRID_HALF,
            horizon: 2000,
            radius: DEFAULT_LOCAL_RADIUS,
            gate: DEFAULT_PP_GATE,
            mass_tol: DEFAULT_MASS_TOL,
            extrapolate: true,
        }
    }
}

/// `w_⋆` sampled on one half of a velocity grid, with the quadrature
/// weights of `½ f_K(·, a_⋆) dυ` on that half.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideDensity {
    pub side: Side,
    pub a: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub w: Vec<f64>,
    #[serde(skip)]
    table: Vec<(f64, f64)>,
    #[serde(skip)]
    theta: Vec<f64>,
}

impl SideDensity {
    fn new(side: Side, grid: &VelocityGrid, w_full: &[f64]) -> Self {
        let range = match side {
            Side::Left => grid.negative_half(),
            Side::Right => grid.positive_half(),
        };
        let nodes = grid.nodes()[range.clone()].to_vec();
        let weights = grid.weights()[range.clone()].to_vec();
        let w = w_full[range].to_vec();
        let mut d = SideDensity {
            side,
            a: grid.a(),
            nodes,
            weights,
            w,
            table: Vec::new(),
            theta: Vec::new(),
        };
        d.theta = d.nodes.iter().map(|v| (v / d.a).clamp(-1.0, 1.0).asin()).collect();
        d.table = d.cumulative_table();
        d
    }

    /// Add `delta` to the mass near `υ = 0` through the profile
    /// `exp(−(υ/width)²)`. Falls back to scaling all of `w` when the profile
    /// carries no mass or `w` would turn negative.
    pub fn with_mass_near_zero(&self, delta: f64, width: f64) -> Self {
        let profile: Vec<f64> = self.nodes.iter().map(|v| (-(v / width).powi(2)).exp()).collect();
        let z: f64 = profile.iter().zip(&self.weights).map(|(p, q)| p * q).sum();
        let mut d = self.clone();
        let shifted: Vec<f64> = self.w.iter().zip(&profile).map(|(w, p)| w + delta * p / z).collect();
        if z > 0.0 && shifted.iter().all(|w| *w >= 0.0) {
            d.w = shifted;
        } else {
            let m = self.mass();
            if m > 0.0 {
                let f = ((m + delta) / m).max(0.0);
                d.w.iter_mut().for_each(|w| *w *= f);
            }
        }
        d.table = d.cumulative_table();
        d
    }

    /// `∫ w ½f_K dυ` over the half-line.
    pub fn mass(&self) -> f64 {
        self.w.iter().zip(&self.weights).map(|(w, q)| w * q).sum()
    }

    /// `∫ h(υ) w(υ) ½f_K dυ`.
    pub fn integrate(&self, h: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.w)
            .zip(&self.weights)
            .map(|((v, w), q)| h(*v) * w * q)
            .sum()
    }

    /// Density of `μ_V` at a node: `w(υ) · ½ f_K(υ, a)`.
    pub fn density_values(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.w)
            .map(|(v, w)| w * 0.5 * konno_density(*v, self.a).unwrap_or(0.0))
            .collect()
    }

    /// `θ`-interval of this half, with `υ = a sin θ`.
    fn theta_range(&self) -> (f64, f64) {
        match self.side {
            Side::Left => (-FRAC_PI_2, 0.0),
            Side::Right => (0.0, FRAC_PI_2),
        }
    }

    /// `w` interpolated linearly in `θ` between the nodes, constant beyond
    /// the outermost ones. Thresholds of the other phase put kinks into `w`,
    /// which rule out global polynomial interpolation.
    fn w_at_theta(&self, theta: f64) -> f64 {
        let t = &self.theta;
        match t.partition_point(|x| *x < theta) {
            0 => self.w.first().copied().unwrap_or(0.0),
            i if i == t.len() => self.w[i - 1],
            i => {
                let f = (theta - t[i - 1]) / (t[i] - t[i - 1]);
                self.w[i - 1] * (1.0 - f) + self.w[i] * f
            }
        }
    }

    /// Cumulative mass `∫_{θ_lo}^{θ}` at equally spaced `θ`, by 6-point Gauss
    /// on each segment of the interpolated density.
    fn cumulative_table(&self) -> Vec<(f64, f64)> {
        if self.nodes.is_empty() {
            return Vec::new();
        }
        let (lo, hi) = self.theta_range();
        let seg = GaussLegendre::new(6);
        let b = (1.0 - self.a * self.a).sqrt();
        let rho = |theta: f64| {
            let w = self.w_at_theta(theta);
            w * b / (2.0 * std::f64::consts::PI * (1.0 - (self.a * theta.sin()).powi(2)))
        };
        let h = (hi - lo) / CDF_SEGMENTS as f64;
        let mut table = Vec::with_capacity(CDF_SEGMENTS + 1);
        let mut acc = 0.0;
        table.push((lo, 0.0));
        for s in 0..CDF_SEGMENTS {
            let a = lo + s as f64 * h;
            acc += seg.integrate(a, a + h, rho);
            table.push((a + h, acc));
        }
        // Pin the total to the node quadrature, which is the more accurate one.
        let total = self.mass();
        if acc != 0.0 {
            for e in &mut table {
                e.1 *= total / acc;
            }
        }
        table
    }

    /// `∫_{υ' ≤ v} w ½f_K dυ'`.
    pub fn cumulative(&self, v: f64) -> f64 {
        if self.table.is_empty() {
            return 0.0;
        }
        let (lo, hi) = self.theta_range();
        let (vlo, vhi) = (self.a * lo.sin(), self.a * hi.sin());
        if v < vlo {
            return 0.0;
        }
        if v >= vhi {
            return self.table.last().unwrap().1;
        }
        let theta = (v / self.a).clamp(-1.0, 1.0).asin();
        let pos = (theta - lo) / (hi - lo) * CDF_SEGMENTS as f64;
        let i = (pos.floor() as usize).min(CDF_SEGMENTS - 1);
        let f = pos - i as f64;
        self.table[i].1 * (1.0 - f) + self.table[i + 1].1 * f
    }

    /// `w(υ)` at an arbitrary velocity of this half.
    pub fn w_at(&self, v: f64) -> f64 {
        self.w_at_theta((v / self.a).clamp(-1.0, 1.0).asin())
    }
}

/// Masses at the final checkpoint before extrapolation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RawMasses {
    pub norm_l: f64,
    pub norm_r: f64,
    pub deficit: f64,
    pub density_l: f64,
    pub density_r: f64,
}

/// Provenance of a limit distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitMeta {
    pub coin_left: CoinMatrix,
    pub coin_right: CoinMatrix,
    pub psi_hash: String,
    pub grid_half: usize,
    pub time_average: Option<f64>,
    pub extrapolated: bool,
    pub raw: RawMasses,
    pub reports: Vec<(Side, ConvergenceReport)>,
}

/// `μ_V` as atoms at `0, −1, 1` plus sampled densities on `[−a_ℓ, 0)` and `(0, a_r]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitDistribution {
    pub kappa0: f64,
    pub kappa_l: f64,
    pub kappa_r: f64,
    pub density_l: Option<SideDensity>,
    pub density_r: Option<SideDensity>,
    pub meta: Option<LimitMeta>,
}

impl LimitDistribution {
    /// A purely atomic distribution.
    pub fn atoms(kappa0: f64, kappa_l: f64, kappa_r: f64) -> Self {
        LimitDistribution {
            kappa0,
            kappa_l,
            kappa_r,
            density_l: None,
            density_r: None,
            meta: None,
        }
    }

    pub fn densities(&self) -> impl Iterator<Item = &SideDensity> {
        self.density_l.iter().chain(self.density_r.iter())
    }

    pub fn total_mass(&self) -> f64 {
        self.kappa0 + self.kappa_l + self.kappa_r + self.densities().map(SideDensity::mass).sum::<f64>()
    }

    /// `μ_V((−∞, v])`.
    pub fn cdf(&self, v: f64) -> f64 {
        let mut c = 0.0;
        for (x, k) in [(-1.0, self.kappa_l), (0.0, self.kappa0), (1.0, self.kappa_r)] {
            if v >= x {
                c += k;
            }
        }
        c + self.densities().map(|d| d.cumulative(v)).sum::<f64>()
    }

    /// `∫ υ^p μ_V(dυ)`.
    pub fn moment(&self, p: u32) -> Result<f64> {
        if p == 0 || p > 8 {
            return Err(Error::domain(format!("moment order {p} is outside 1..=8")));
        }
        let pi = p as i32;
        let atoms = self.kappa_l * (-1f64).powi(pi) + self.kappa_r + self.kappa0 * 0f64.powi(pi);
        Ok(atoms + self.densities().map(|d| d.integrate(|v| v.powi(pi))).sum::<f64>())
    }

    /// `E(e^{iξ𝚅})`.
    pub fn cf(&self, xi: f64) -> C64 {
        let atoms = C64::new(self.kappa0, 0.0) + C64::from_polar(self.kappa_l, -xi) + C64::from_polar(self.kappa_r, xi);
        let dens: C64 = self
            .densities()
            .map(|d| C64::new(d.integrate(|v| (xi * v).cos()), d.integrate(|v| (xi * v).sin())))
            .sum();
        atoms + dens
    }

    /// CSV table `v,density_l,density_r` over the grid nodes.
    pub fn density_csv(&self) -> String {
        let mut out = String::from("v,density_l,density_r\n");
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        if let Some(d) = &self.density_l {
            rows.extend(d.nodes.iter().zip(d.density_values()).map(|(v, f)| (*v, f, 0.0)));
        }
        if let Some(d) = &self.density_r {
            rows.extend(d.nodes.iter().zip(d.density_values()).map(|(v, f)| (*v, 0.0, f)));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (v, l, r) in rows {
            out.push_str(&format!("{v:.16e},{l:.16e},{r:.16e}\n"));
        }
        out
    }
}

/// `E(e^{iξ𝚅})`.
pub fn cf_limit(dist: &LimitDistribution, xi: f64) -> C64 {
    dist.cf(xi)
}

/// `μ_V((−∞, v])`.
pub fn cdf(dist: &LimitDistribution, v: f64) -> f64 {
    dist.cdf(v)
}

/// `∫ υ^p μ_V(dυ)`.
pub fn moment(dist: &LimitDistribution, p: u32) -> Result<f64> {
    dist.moment(p)
}

/// FNV-1a over the amplitudes, for provenance only.
pub fn state_hash(psi: &LatticeState) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    if let Some((lo, hi)) = psi.support() {
        for x in lo..=hi {
            feed(&x.to_le_bytes());
            for c in psi.get(x) {
                feed(&c.re.to_le_bytes());
                feed(&c.im.to_le_bytes());
            }
        }
    }
    format!("{h:016x}")
}

/// Assemble `μ_V` from the outgoing states of `psi`.
pub fn limit_distribution(psi: &LatticeState, field: &CoinField, config: &LimitConfig) -> Result<LimitDistribution> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!("initial state must be normalized, ‖Ψ‖ = {norm}")));
    }
    let (l, r) = outgoing_states(psi, field, &config.schedule)?;
    l.report.require("left outgoing state")?;
    r.report.require("right outgoing state")?;

    // `f(Φ_N)`, Richardson-extrapolated with `f(Φ_{N/2})` when enabled.
    let extrapolated = |o: &Outgoing, f: &dyn Fn(&LatticeState) -> Result<f64>| -> Result<(f64, f64)> {
        let full = f(&o.state)?;
        match (&o.previous, config.extrapolate) {
            (Some(p), true) => Ok((full, richardson(f(p)?, full).max(0.0))),
            _ => Ok((full, full)),
        }
    };

    let mut dist = LimitDistribution::atoms(0.0, 0.0, 0.0);
    let mut raw = RawMasses::default();
    let mut scattered = [0.0; 2];
    let mut scattered_half = [0.0; 2];
    for (i, o) in [&l, &r].into_iter().enumerate() {
        let coin = field.side(o.side);
        scattered[i] = o.state.norm_sqr();
        scattered_half[i] = o.previous.as_ref().map_or(scattered[i], LatticeState::norm_sqr);
        match o.side {
            Side::Left => raw.norm_l = scattered[i],
            Side::Right => raw.norm_r = scattered[i],
        }
        match coin.regime() {
            Regime::Trapped => {}
            Regime::Ballistic => {
                let (_, kappa) = extrapolated(o, &|s| Ok(s.norm_sqr()))?;
                match o.side {
                    Side::Left => dist.kappa_l = kappa,
                    Side::Right => dist.kappa_r = kappa,
                }
            }
            Regime::Dispersive => {
                let grid = VelocityGrid::new(coin.a(), config.grid_half)?;
                let restricted = |s: &LatticeState| -> Result<SideDensity> {
                    Ok(SideDensity::new(o.side, &grid, &velocity_weight(s, coin, &grid)?))
                };
                let mut d = restricted(&o.state)?;
                let (m_raw, m) = extrapolated(o, &|s| Ok(restricted(s)?.mass()))?;
                if m != m_raw {
                    // The mass lost to the wrong half-line sits in the
                    // Fresnel zone `|υ| ≲ N^{−1/2}`.
                    let width = 1.0 / (o.report.final_n.max(1) as f64).sqrt();
                    d = d.with_mass_near_zero(m - m_raw, width);
                }
                match o.side {
                    Side::Left => {
                        raw.density_l = m_raw;
                        dist.density_l = Some(d);
                    }
                    Side::Right => {
                        raw.density_r = m_raw;
                        dist.density_r = Some(d);
                    }
                }
            }
        }
    }
    let total = psi.norm_sqr();
    raw.deficit = (total - scattered[0] - scattered[1]).max(0.0);
    let deficit_half = (total - scattered_half[0] - scattered_half[1]).max(0.0);
    let has_previous = l.previous.is_some() || r.previous.is_some();
    dist.kappa0 = if config.extrapolate && has_previous {
        richardson(deficit_half, raw.deficit).max(0.0)
    } else {
        raw.deficit
    };

    let time_average = time_averaged_local_mass(psi, field, config.horizon, config.radius)?;
    if (dist.kappa0 - time_average).abs() > config.gate {
        return Err(Error::Inconsistency {
            deficit: dist.kappa0,
            time_average,
            gate: config.gate,
        });
    }
    let total = dist.total_mass();
    if (total - 1.0).abs() > config.mass_tol {
        return Err(Error::MassDefect {
            total,
            tolerance: config.mass_tol,
        });
    }
    dist.meta = Some(LimitMeta {
        coin_left: *field.left(),
        coin_right: *field.right(),
        psi_hash: state_hash(psi),
        grid_half: config.grid_half,
        time_average: Some(time_average),
        extrapolated: config.extrapolate && has_previous,
        raw,
        reports: vec![(Side::Left, l.report), (Side::Right, r.report)],
    });
    Ok(dist)
}

/// One row of a finite-time comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: u64,
    pub kolmogorov_distance: f64,
    pub mean_n: f64,
    pub mean_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub guard_band: f64,
    /// Distances over the second half of `n_list` never increase by more
    /// than `1e-3`.
    pub nonincreasing_tail: bool,
}

impl CompareReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,kolmogorov_distance,mean_n,mean_limit\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                r.n, r.kolmogorov_distance, r.mean_n, r.mean_limit
            ));
        }
        out
    }
}

/// `sup_υ |P(X_n/n ≤ υ) − μ_V((−∞, υ])|` over `v_grid`, skipping points
/// within `guard` of the atoms.
pub fn kolmogorov_distance(dist: &LimitDistribution, state_n: &LatticeState, n: u64, v_grid: &[f64], guard: f64) -> f64 {
    let pd = state_n.position_distribution();
    let mut pts: Vec<f64> = v_grid
        .iter()
        .copied()
        .filter(|v| [-1.0, 0.0, 1.0].iter().all(|a| (v - a).abs() > guard))
        .collect();
    pts.sort_by(f64::total_cmp);
    let mut emp = 0.0;
    let mut it = pd.iter().peekable();
    let mut worst: f64 = 0.0;
    for v in pts {
        while let Some((x, p)) = it.peek() {
            if (*x as f64) / n as f64 <= v {
                emp += p;
                it.next();
            } else {
                break;
            }
        }
        worst = worst.max((emp - dist.cdf(v)).abs());
    }
    worst
}

/// Uniform velocity grid on `[−1.1, 1.1]` with `points` points.
pub fn default_v_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| -1.1 + 2.2 * i as f64 / (points - 1) as f64)
        .collect()
}

/// Compare the law of `X_n/n` with `μ_V` for each `n` in an increasing list.
pub fn compare_empirical(
    psi: &LatticeState,
    field: &CoinField,
    dist: &LimitDistribution,
    n_list: &[u64],
    v_grid: &[f64],
    guard: f64,
) -> Result<CompareReport> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list.first() == Some(&0) {
        return Err(Error::validation("n_list", "times must be positive and increasing"));
    }
    let mean_limit = dist.moment(1)?;
    let mut walk = Walk::new(field);
    let mut s = psi.clone();
    let mut now = 0u64;
    let mut rows = Vec::new();
    for &n in n_list {
        walk.evolve_in_place(&mut s, (n - now) as i64)?;
        now = n;
        rows.push(CompareRow {
            n,
            kolmogorov_distance: kolmogorov_distance(dist, &s, n, v_grid, guard),
            mean_n: s.position_distribution().velocity_moment(n, 1),
            mean_limit,
        });
    }
    let tail = &rows[rows.len() / 2..];
    let nonincreasing_tail = tail
        .windows(2)
        .all(|w| w[1].kolmogorov_distance <= w[0].kolmogorov_distance + 1e-3);
    Ok(CompareReport {
        rows,
        guard_band: guard,
        nonincreasing_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn atomic_distributions() {
        let d = LimitDistribution::atoms(1.0, 0.0, 0.0);
        assert_eq!(d.cdf(-1.5), 0.0);
        assert_eq!(d.cdf(-1e-9), 0.0);
        assert_eq!(d.cdf(1e-12), 1.0);
        for p in 1..=8 {
            assert_eq!(d.moment(p).unwrap(), 0.0);
        }
        assert!(d.moment(9).is_err());
        let r = LimitDistribution::atoms(0.0, 0.0, 1.0);
        assert_eq!(r.moment(3).unwrap(), 1.0);
        let l = LimitDistribution::atoms(0.0, 1.0, 0.0);
        for xi in [0.0, 1.0, 2.5] {
            assert!((l.cf(xi) - C64::from_polar(1.0, -xi)).norm() < 1e-15);
        }
        assert!((d.cf(0.0) - C64::new(d.total_mass(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn side_density_of_constant_weight() {
        // w ≡ 1 on both halves gives μ_V = f_K(·, a) dυ / 2 per half.
        let a = FRAC_1_SQRT_2;
        let grid = VelocityGrid::new(a, 129).unwrap();
        let w = vec![1.0; grid.len()];
        let d = LimitDistribution {
            density_l: Some(SideDensity::new(Side::Left, &grid, &w)),
            density_r: Some(SideDensity::new(Side::Right, &grid, &w)),
            ..LimitDistribution::atoms(0.0, 0.0, 0.0)
        };
        assert!((d.total_mass() - 0.5).abs() < 1e-12);
        assert!((d.cdf(0.0) - 0.25).abs() < 1e-9);
        assert!(d.cdf(-a - 1e-9) == 0.0 && (d.cdf(a) - 0.5).abs() < 1e-12);
        // Exact CDF of f_K/2 on [−a, v]: closed form in θ.
        let b = (1.0 - a * a).sqrt();
        let exact = |v: f64| {
            let th = (v / a).asin();
            let f = |t: f64| (b * t.tan()).atan() / (2.0 * std::f64::consts::PI);
            f(th) + 0.25
        };
        for v in [-0.7, -0.5, -0.1, 0.2, 0.6, 0.7] {
            assert!((d.cdf(v) - exact(v)).abs() < 1e-8, "v = {v}");
        }
        let mut prev = 0.0;
        for i in 0..1000 {
            let c = d.cdf(-0.8 + 1.6 * i as f64 / 999.0);
            assert!(c >= prev - 1e-15);
            prev = c;
        }
    }
}
