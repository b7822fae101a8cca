//! Two-Hilbert-space scattering for the anisotropic walk.
//!
//! The free comparison dynamics is `U₀ = U_ℓ ⊕ U_r` on `H ⊕ H`, glued to `H`
//! by `J(Ψ_ℓ, Ψ_r) = j_ℓΨ_ℓ + j_rΨ_r` with `j_r = χ_{x≥0}` and `j_ℓ = 1 − j_r`.
//!
//! Outgoing states `Φ_⋆ = W₊(U, U_⋆, j_⋆)*Ψ` are the limits of
//! `U_⋆^{−n} j_⋆ Uⁿ Ψ`. The raw iterates keep the bound-state part of `Ψ`
//! at constant norm (it only converges weakly to zero), so the iterates are
//! averaged over `n ∈ [N, 2N]` with a `sin²` window before taking the limit.
//! Averaging leaves the limit of the absolutely continuous part unchanged and
//! removes the bound-state part.
//!
//! The sharp cut `j_⋆` resolves velocities only down to a Fresnel zone of
//! width `O(N^{−1/2})` around `υ = 0`, so masses of the averaged iterates
//! converge like `N^{−1/2}`. [`richardson`] removes that leading term.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coin::{CoinField, Regime, Side};
use crate::error::{Error, Result};
use crate::lattice::{LatticeState, Walk};
use crate::linalg::{spinor_inner, spinor_norm_sqr, Spinor, ZERO_SPINOR};
use crate::momentum::free_evolve;

/// A vector `(Ψ_ℓ, Ψ_r)` of `H ⊕ H`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairState {
    pub left: LatticeState,
    pub right: LatticeState,
}

impl PairState {
    pub fn new(left: LatticeState, right: LatticeState) -> Self {
        PairState { left, right }
    }

    pub fn zeros() -> Self {
        PairState::new(LatticeState::zeros(0, 0), LatticeState::zeros(0, 0))
    }

    pub fn only(side: Side, state: LatticeState) -> Self {
        match side {
            Side::Left => PairState::new(state, LatticeState::zeros(0, 0)),
            Side::Right => PairState::new(LatticeState::zeros(0, 0), state),
        }
    }

    pub fn get(&self, side: Side) -> &LatticeState {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.left.norm_sqr() + self.right.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.left.distance(&other.left).powi(2) + self.right.distance(&other.right).powi(2)).sqrt()
    }

    /// `U₀ⁿ` with `U_⋆` the homogeneous walk of each asymptotic coin.
    pub fn free_evolve(&self, field: &CoinField, n: i64) -> Self {
        PairState::new(
            free_evolve(&self.left, field.left(), n),
            free_evolve(&self.right, field.right(), n),
        )
    }
}

/// `J(Ψ_ℓ, Ψ_r) = j_ℓΨ_ℓ + j_rΨ_r`.
pub fn apply_j(pair: &PairState) -> LatticeState {
    let l = pair.left.multiply_by(|x| Side::Left.indicator(x));
    let r = pair.right.multiply_by(|x| Side::Right.indicator(x));
    l.add_scaled(&r, C64::new(1.0, 0.0))
}

/// `J*Ψ = (j_ℓΨ, j_rΨ)`.
pub fn apply_j_adjoint(state: &LatticeState) -> PairState {
    PairState::new(
        state.multiply_by(|x| Side::Left.indicator(x)),
        state.multiply_by(|x| Side::Right.indicator(x)),
    )
}

/// `E^{U₀}(Θ)` restricted to the cases that occur: the identity on a slot
/// whose asymptotic coin has `a > 0` and zero on a slot with `a = 0`.
pub fn project_scattering_subspace(pair: &PairState, field: &CoinField) -> PairState {
    let keep = |side: Side| field.side(side).regime() != Regime::Trapped;
    PairState::new(
        if keep(Side::Left) { pair.left.clone() } else { LatticeState::zeros(0, 0) },
        if keep(Side::Right) { pair.right.clone() } else { LatticeState::zeros(0, 0) },
    )
}

/// How convergence of a sequence of iterates is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `‖Φ^{(n)} − Φ^{(n')}‖ < tol`.
    Strong,
    /// `|‖Φ^{(n)}‖² − ‖Φ^{(n')}‖²| < tol`.
    Mass,
    /// Successive Richardson-extrapolated masses differ by less than `tol`.
    Extrapolated,
}

/// `m_N + (m_N − m_{N/2})/(√2 − 1)`: removes a `c N^{−1/2}` error term from
/// values at consecutive doubling checkpoints.
pub fn richardson(half: f64, full: f64) -> f64 {
    full + (full - half) / (std::f64::consts::SQRT_2 - 1.0)
}

/// Geometric checkpoints `n_start, 2n_start, …, ≤ n_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n_start: u64,
    pub n_max: u64,
    pub tol: f64,
    pub criterion: Criterion,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            n_start: 64,
            n_max: 4096,
            tol: 1e-4,
            criterion: Criterion::Extrapolated,
        }
    }
}

impl Schedule {
    pub fn new(n_start: u64, n_max: u64, tol: f64, criterion: Criterion) -> Result<Self> {
        if n_start == 0 || n_max < n_start {
            return Err(Error::validation("schedule", format!("need 1 ≤ n_start ≤ n_max, got {n_start}, {n_max}")));
        }
        if !(tol > 0.0) {
            return Err(Error::validation("schedule.tol", "tolerance must be positive"));
        }
        Ok(Schedule {
            n_start,
            n_max,
            tol,
            criterion,
        })
    }

    pub fn checkpoints(&self) -> Vec<u64> {
        std::iter::successors(Some(self.n_start), |n| n.checked_mul(2))
            .take_while(|n| *n <= self.n_max)
            .collect()
    }
}

/// One checkpoint of a convergence study. Increments compare with the
/// previous checkpoint and are absent at the first one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    pub norm: f64,
    pub increment: Option<f64>,
    pub mass_increment: Option<f64>,
    pub extrapolated_mass: Option<f64>,
    pub extrapolated_increment: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterates: Vec<Checkpoint>,
    pub final_n: u64,
    pub converged: bool,
    pub limit_norm: f64,
    pub tolerance: f64,
    pub criterion: Criterion,
}

impl ConvergenceReport {
    fn new(schedule: &Schedule) -> Self {
        ConvergenceReport {
            iterates: Vec::new(),
            final_n: 0,
            converged: false,
            limit_norm: 0.0,
            tolerance: schedule.tol,
            criterion: schedule.criterion,
        }
    }

    /// A report for a limit known to vanish identically.
    pub fn trivial(schedule: &Schedule) -> Self {
        ConvergenceReport {
            converged: true,
            ..Self::new(schedule)
        }
    }

    fn push(&mut self, n: u64, current: &LatticeState, previous: Option<&LatticeState>) -> bool {
        let norm = current.norm();
        let (increment, mass_increment) = match previous {
            Some(p) => (Some(current.distance(p)), Some((current.norm_sqr() - p.norm_sqr()).abs())),
            None => (None, None),
        };
        let extrapolated_mass = previous.map(|p| richardson(p.norm_sqr(), current.norm_sqr()));
        let extrapolated_increment = match (self.iterates.last().and_then(|c| c.extrapolated_mass), extrapolated_mass) {
            (Some(a), Some(b)) => Some((b - a).abs()),
            _ => None,
        };
        self.iterates.push(Checkpoint {
            n,
            norm,
            increment,
            mass_increment,
            extrapolated_mass,
            extrapolated_increment,
        });
        self.final_n = n;
        self.limit_norm = norm;
        self.converged = self.last_increment().is_some_and(|m| m < self.tolerance);
        self.converged
    }

    pub fn last_increment(&self) -> Option<f64> {
        self.iterates.last().and_then(|c| match self.criterion {
            Criterion::Strong => c.increment,
            Criterion::Mass => c.mass_increment,
            Criterion::Extrapolated => c.extrapolated_increment,
        })
    }

    /// Turn a non-converged report into an error.
    pub fn require(&self, what: &str) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NonConvergence {
                what: what.to_string(),
                n_max: self.final_n,
                last_increment: self.last_increment().unwrap_or(f64::NAN),
            })
        }
    }
}

/// `Φ^{(n)} = U^{−n} J U₀ⁿ E^{U₀}(Θ) pair` at one `n`.
pub fn wave_iterate(pair: &PairState, field: &CoinField, n: u64) -> Result<LatticeState> {
    let p = project_scattering_subspace(pair, field);
    let glued = apply_j(&p.free_evolve(field, n as i64));
    Walk::new(field).evolve(&glued, -(n as i64))
}

/// Iterate `U^{−n} J U₀ⁿ E^{U₀}(Θ)` along the schedule until the increment
/// criterion is met, approximating `W₊(U, U₀, J, Θ) pair`.
pub fn wave_forward(pair: &PairState, field: &CoinField, schedule: &Schedule) -> Result<(LatticeState, ConvergenceReport)> {
    let mut report = ConvergenceReport::new(schedule);
    let mut prev: Option<LatticeState> = None;
    for n in schedule.checkpoints() {
        let phi = wave_iterate(pair, field, n)?;
        let done = report.push(n, &phi, prev.as_ref());
        prev = Some(phi);
        if done {
            break;
        }
    }
    Ok((prev.unwrap_or_else(|| LatticeState::zeros(0, 0)), report))
}

/// `‖W_n(U₀ pair) − U W_n(pair)‖` with `W_n = U^{−n} J U₀ⁿ`, for `η(z) = z^q`.
pub fn verify_intertwining_power(field: &CoinField, pair: &PairState, n: u64, q: u32) -> Result<f64> {
    let p = project_scattering_subspace(pair, field);
    let shifted = p.free_evolve(field, q as i64);
    let lhs = wave_iterate(&shifted, field, n)?;
    let rhs = Walk::new(field).evolve(&wave_iterate(&p, field, n)?, q as i64)?;
    Ok(lhs.distance(&rhs))
}

/// Intertwining residual for `η(z) = z`.
pub fn verify_intertwining(field: &CoinField, pair: &PairState, n: u64) -> Result<f64> {
    verify_intertwining_power(field, pair, n, 1)
}

/// An outgoing state `Φ_⋆ ≈ W₊(U, U_⋆, j_⋆, Θ)*Ψ` with its convergence trace.
/// Checkpoint `n = N` refers to the average over `[N, 2N]`.
#[derive(Clone, Debug)]
pub struct Outgoing {
    pub side: Side,
    pub state: LatticeState,
    /// The average at the previous checkpoint, if there was one.
    pub previous: Option<LatticeState>,
    pub report: ConvergenceReport,
}

/// `sin²` window on `[N, 2N]`.
fn window_weight(m: u64, n: u64) -> f64 {
    (PI * (m - n) as f64 / n as f64).sin().powi(2)
}

/// Outgoing states on the requested sides, sharing one forward evolution.
pub fn outgoing_states_for(psi: &LatticeState, field: &CoinField, sides: &[Side], schedule: &Schedule) -> Result<Vec<Outgoing>> {
    let active: Vec<Side> = sides
        .iter()
        .copied()
        .filter(|s| field.side(*s).regime() != Regime::Trapped)
        .collect();
    let mut out: Vec<Outgoing> = sides
        .iter()
        .map(|&side| Outgoing {
            side,
            state: LatticeState::zeros(0, 0),
            previous: None,
            report: ConvergenceReport::trivial(schedule),
        })
        .collect();
    if active.is_empty() {
        return Ok(out);
    }
    for o in out.iter_mut().filter(|o| active.contains(&o.side)) {
        o.report = ConvergenceReport::new(schedule);
    }
    let free_fields: Vec<CoinField> = active.iter().map(|s| CoinField::homogeneous(*field.side(*s))).collect();
    let mut walk = Walk::new(field);
    let mut free_walks: Vec<Walk> = free_fields.iter().map(Walk::new).collect();
    let mut current = psi.clone();
    let mut n_now = 0u64;
    let mut prev: Vec<Option<LatticeState>> = vec![None; active.len()];
    for big_n in schedule.checkpoints() {
        walk.evolve_in_place(&mut current, (big_n - n_now) as i64)?;
        n_now = big_n;
        let mut acc: Vec<LatticeState> = vec![LatticeState::zeros(0, 0); active.len()];
        let mut wsum = 0.0;
        for m in big_n..=2 * big_n {
            if m > n_now {
                walk.step(&mut current)?;
                n_now = m;
            }
            let w = window_weight(m, big_n);
            for (i, side) in active.iter().enumerate() {
                if m > big_n {
                    free_walks[i].step(&mut acc[i])?;
                }
                if w > 0.0 {
                    let (lo, hi) = match side {
                        Side::Left => (i64::MIN, -1),
                        Side::Right => (0, i64::MAX),
                    };
                    acc[i].add_scaled_on(&current, C64::new(w, 0.0), lo, hi);
                }
            }
            wsum += w;
        }
        let mut all_done = true;
        for (i, side) in active.iter().enumerate() {
            let phi = free_evolve(&acc[i], field.side(*side), -2 * big_n as i64).scaled(C64::new(1.0 / wsum, 0.0));
            let slot = out.iter_mut().find(|o| o.side == *side).unwrap();
            all_done &= slot.report.push(big_n, &phi, prev[i].as_ref());
            slot.previous = prev[i].take();
            slot.state = phi.clone();
            prev[i] = Some(phi);
        }
        if all_done {
            break;
        }
    }
    Ok(out)
}

/// `Φ_⋆` for one side; zero when `a_⋆ = 0`.
pub fn outgoing_state(psi: &LatticeState, field: &CoinField, side: Side, schedule: &Schedule) -> Result<Outgoing> {
    Ok(outgoing_states_for(psi, field, &[side], schedule)?.remove(0))
}

/// `(Φ_ℓ, Φ_r)`.
pub fn outgoing_states(psi: &LatticeState, field: &CoinField, schedule: &Schedule) -> Result<(Outgoing, Outgoing)> {
    let mut v = outgoing_states_for(psi, field, &Side::BOTH, schedule)?;
    let r = v.pop().unwrap();
    let l = v.pop().unwrap();
    Ok((l, r))
}

/// Default radius for the localized-mass estimator.
pub const DEFAULT_LOCAL_RADIUS: i64 = 24;

/// Default gate between the two pure-point estimators.
pub const DEFAULT_PP_GATE: f64 = 5e-2;

/// `(2/h) Σ_{n ∈ (h/2, h]} Σ_{|x| ≤ R} P(X_n = x)`: the time-averaged mass
/// near the origin. The first half of the horizon is skipped because slow
/// scattering states are still close to the origin there.
pub fn time_averaged_local_mass(psi: &LatticeState, field: &CoinField, horizon: u64, radius: i64) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::validation("horizon", "horizon must be at least 2"));
    }
    let mut walk = Walk::new(field);
    let mut s = psi.clone();
    let start = horizon / 2;
    walk.evolve_in_place(&mut s, start as i64)?;
    let mut total = 0.0;
    for _ in start..horizon {
        walk.step(&mut s)?;
        total += (-radius..=radius).map(|x| spinor_norm_sqr(&s.get(x))).sum::<f64>();
    }
    Ok(total / (horizon - start) as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PurePointReport {
    /// The deficit below, Richardson-extrapolated over the last two
    /// checkpoints when both sides have them.
    pub kappa0: f64,
    /// `‖Ψ‖² − ‖Φ_ℓ‖² − ‖Φ_r‖²` at the final checkpoint.
    pub deficit: f64,
    /// Time-averaged mass within `radius` of the origin.
    pub time_average: f64,
    pub radius: i64,
    pub horizon: u64,
    pub gate: f64,
    pub norm_left: f64,
    pub norm_right: f64,
    pub left: ConvergenceReport,
    pub right: ConvergenceReport,
}

/// Pure-point mass `‖E^U_p Ψ‖²` by the norm deficit of the outgoing states,
/// cross-checked against the time-averaged localized mass.
pub fn pure_point_mass_with(
    psi: &LatticeState,
    field: &CoinField,
    schedule: &Schedule,
    horizon: u64,
    radius: i64,
    gate: f64,
) -> Result<PurePointReport> {
    let (l, r) = outgoing_states(psi, field, schedule)?;
    let total = psi.norm_sqr();
    let deficit = (total - l.state.norm_sqr() - r.state.norm_sqr()).max(0.0);
    // A side without iterates has an identically vanishing limit.
    let half = |o: &Outgoing| match &o.previous {
        Some(p) => Some(p.norm_sqr()),
        None if o.report.iterates.is_empty() => Some(o.state.norm_sqr()),
        None => None,
    };
    let kappa0 = match (half(&l), half(&r)) {
        (Some(hl), Some(hr)) => richardson((total - hl - hr).max(0.0), deficit).max(0.0),
        _ => deficit,
    };
    let time_average = time_averaged_local_mass(psi, field, horizon, radius)?;
    if (kappa0 - time_average).abs() > gate {
        return Err(Error::Inconsistency {
            deficit: kappa0,
            time_average,
            gate,
        });
    }
    Ok(PurePointReport {
        kappa0,
        deficit,
        time_average,
        radius,
        horizon,
        gate,
        norm_left: l.state.norm(),
        norm_right: r.state.norm(),
        left: l.report,
        right: r.report,
    })
}

pub fn pure_point_mass(psi: &LatticeState, field: &CoinField, horizon: u64) -> Result<PurePointReport> {
    pure_point_mass_with(psi, field, &Schedule::default(), horizon, DEFAULT_LOCAL_RADIUS, DEFAULT_PP_GATE)
}

/// A normalized eigenvector of `U` found on a finite window.
#[derive(Clone, Debug)]
pub struct BoundState {
    pub eigenvalue: C64,
    pub state: LatticeState,
    /// Mass on the two outermost sites at each end of the window.
    pub boundary_mass: f64,
}

/// Eigenvectors of `U` truncated to `lo..=hi` with reflecting ends, kept
/// when their mass on the outer sites is below `boundary_tol`.
///
/// Reflection (component 0 at `lo` turns into component 1 at `lo`, and
/// component 1 at `hi` into component 0 at `hi`) keeps the truncation
/// unitary, so the Schur vectors are eigenvectors. Meant for building test
/// states, not for the scattering pipeline.
pub fn bound_states(field: &CoinField, lo: i64, hi: i64, boundary_tol: f64) -> Result<Vec<BoundState>> {
    if hi - lo < 4 {
        return Err(Error::validation("window", "bound-state window needs at least 5 sites"));
    }
    let len = (hi - lo + 1) as usize;
    let dim = 2 * len;
    let idx = |x: i64, c: usize| 2 * (x - lo) as usize + c;
    let mut u = DMatrix::<C64>::zeros(dim, dim);
    for x in lo..=hi {
        let c = field.coin_at(x);
        for col in 0..2 {
            // Column of U for the basis vector δ_x ⊗ e_col.
            let after: Spinor = c.apply(&if col == 0 { [C64::new(1.0, 0.0), ZERO_SPINOR[1]] } else { [ZERO_SPINOR[0], C64::new(1.0, 0.0)] });
            let to0 = if x - 1 >= lo { idx(x - 1, 0) } else { idx(x, 1) };
            let to1 = if x + 1 <= hi { idx(x + 1, 1) } else { idx(x, 0) };
            u[(to0, idx(x, col))] += after[0];
            u[(to1, idx(x, col))] += after[1];
        }
    }
    let schur = nalgebra::linalg::Schur::try_new(u, 1e-14, 10_000)
        .ok_or_else(|| Error::NonConvergence {
            what: "Schur decomposition".into(),
            n_max: 10_000,
            last_increment: f64::NAN,
        })?;
    let (q, t) = schur.unpack();
    let mut found = Vec::new();
    for i in 0..dim {
        let amps: Vec<Spinor> = (0..len).map(|s| [q[(2 * s, i)], q[(2 * s + 1, i)]]).collect();
        let state = LatticeState::from_amplitudes(lo, &amps);
        let boundary_mass = state.mass_outside(lo + 2, hi - 2);
        if boundary_mass < boundary_tol {
            found.push(BoundState {
                eigenvalue: t[(i, i)],
                state,
                boundary_mass,
            });
        }
    }
    Ok(found)
}

/// `Σ_i |⟨e_i, Ψ⟩|²` over orthonormal bound states.
pub fn bound_state_overlap(states: &[BoundState], psi: &LatticeState) -> f64 {
    states.iter().map(|b| b.state.inner(psi).norm_sqr()).sum()
}

/// `⟨e, Ψ⟩` summed componentwise; convenience for fixtures.
pub fn overlap(e: &LatticeState, psi: &LatticeState) -> C64 {
    e.iter().map(|(x, v)| spinor_inner(&v, &psi.get(x))).sum()
}
