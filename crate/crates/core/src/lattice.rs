//! Compactly supported states in `ℓ²(ℤ, ℂ²)` and the walk `U = SC`.
//!
//! A [`LatticeState`] stores amplitudes on a contiguous window of sites and
//! keeps every nonzero amplitude at least one site away from the window
//! edges. One step of the walk widens the support by at most one site on each
//! side, so growing the window ahead of each step makes the evolution on `ℤ`
//! exact: there is no boundary condition anywhere.

use std::ops::Range;

use num_complex::Complex64 as C64;

use crate::coin::CoinField;
use crate::error::{Error, Result};
use crate::linalg::{spinor_inner, spinor_norm_sqr, Mat2, Spinor, ZERO_SPINOR};

/// Default cap on the number of sites a window may grow to.
pub const DEFAULT_MAX_WINDOW: usize = 1 << 20;

/// A finitely supported state `Ψ: ℤ → ℂ²`.
///
/// Invariant: `amps[i] == 0` outside `active`, and `active` keeps one guard
/// site free on each side of the window.
#[derive(Clone, Debug)]
pub struct LatticeState {
    offset: i64,
    amps: Vec<Spinor>,
    active: Range<usize>,
}

impl PartialEq for LatticeState {
    /// Equality of the represented functions on `ℤ`, independent of windows.
    fn eq(&self, other: &Self) -> bool {
        let (lo, hi) = self.union_bounds(other);
        (lo..=hi).all(|x| self.get(x) == other.get(x))
    }
}

impl LatticeState {
    /// The zero state on sites `lo..=hi` (plus guard sites).
    pub fn zeros(lo: i64, hi: i64) -> Self {
        let len = (hi - lo + 1).max(0) as usize + 2;
        LatticeState {
            offset: lo - 1,
            amps: vec![ZERO_SPINOR; len],
            active: 1..1,
        }
    }

    /// `δ_x ⊗ v`.
    pub fn delta(x: i64, v: Spinor) -> Self {
        let mut s = Self::zeros(x, x);
        s.set(x, v);
        s
    }

    /// Build from `(site, spinor)` entries; repeated sites are summed.
    pub fn from_entries<I: IntoIterator<Item = (i64, Spinor)>>(entries: I) -> Self {
        let entries: Vec<_> = entries.into_iter().collect();
        if entries.is_empty() {
            return Self::zeros(0, 0);
        }
        let lo = entries.iter().map(|e| e.0).min().unwrap();
        let hi = entries.iter().map(|e| e.0).max().unwrap();
        let mut s = Self::zeros(lo, hi);
        for (x, v) in entries {
            let cur = s.get(x);
            s.set(x, [cur[0] + v[0], cur[1] + v[1]]);
        }
        s
    }

    /// Amplitudes on consecutive sites starting at `first_site`.
    pub fn from_amplitudes(first_site: i64, amps: &[Spinor]) -> Self {
        let mut s = Self::zeros(first_site, first_site + amps.len() as i64 - 1);
        for (i, v) in amps.iter().enumerate() {
            s.set(first_site + i as i64, *v);
        }
        s
    }

    /// Leftmost site of the window (a guard site).
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Number of sites in the window, guards included.
    pub fn window_len(&self) -> usize {
        self.amps.len()
    }

    /// Sites of the window, guards included.
    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.amps.len() as i64 - 1)
    }

    /// Conservative support bounds: every nonzero amplitude lies in the
    /// returned inclusive range. `None` for a state known to be zero.
    pub fn support_bounds(&self) -> Option<(i64, i64)> {
        if self.active.is_empty() {
            None
        } else {
            Some((
                self.offset + self.active.start as i64,
                self.offset + self.active.end as i64 - 1,
            ))
        }
    }

    /// Exact support: first and last site with a nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz = |v: &Spinor| v[0] != C64::new(0.0, 0.0) || v[1] != C64::new(0.0, 0.0);
        let first = self.active.clone().find(|&i| nz(&self.amps[i]))?;
        let last = self.active.clone().rev().find(|&i| nz(&self.amps[i]))?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    pub fn get(&self, x: i64) -> Spinor {
        let i = x - self.offset;
        if i < 0 || i as usize >= self.amps.len() {
            ZERO_SPINOR
        } else {
            self.amps[i as usize]
        }
    }

    /// Set the amplitude at `x`, growing the window if needed.
    pub fn set(&mut self, x: i64, v: Spinor) {
        if v == ZERO_SPINOR && self.get(x) == ZERO_SPINOR {
            return;
        }
        self.reserve_sites(x, x);
        let i = (x - self.offset) as usize;
        self.amps[i] = v;
        if self.active.is_empty() {
            self.active = i..i + 1;
        } else {
            self.active = self.active.start.min(i)..self.active.end.max(i + 1);
        }
    }

    /// `(site, amplitude)` over the conservative support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Spinor)> + '_ {
        let off = self.offset;
        self.active
            .clone()
            .map(move |i| (off + i as i64, self.amps[i]))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps[self.active.clone()].iter().map(spinor_norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.amps[self.active.clone()].iter().all(|v| *v == ZERO_SPINOR)
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        let Some((lo, hi)) = self.support_bounds() else {
            return C64::new(0.0, 0.0);
        };
        (lo..=hi).map(|x| spinor_inner(&self.get(x), &other.get(x))).sum()
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.amps[out.active.clone()] {
            v[0] *= s;
            v[1] *= s;
        }
        out
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, other: &Self, s: C64) -> Self {
        let mut out = self.clone();
        out.add_scaled_in_place(other, s);
        out
    }

    pub fn add_scaled_in_place(&mut self, other: &Self, s: C64) {
        self.add_scaled_on(other, s, i64::MIN, i64::MAX);
    }

    /// `self += s · χ_{[lo, hi]} other`.
    pub fn add_scaled_on(&mut self, other: &Self, s: C64, lo: i64, hi: i64) {
        let Some((olo, ohi)) = other.support_bounds() else {
            return;
        };
        let (lo, hi) = (lo.max(olo), hi.min(ohi));
        if lo > hi {
            return;
        }
        self.reserve_sites(lo, hi);
        let src = &other.amps[(lo - other.offset) as usize..=(hi - other.offset) as usize];
        let (ilo, ihi) = ((lo - self.offset) as usize, (hi - self.offset) as usize + 1);
        for (d, w) in self.amps[ilo..ihi].iter_mut().zip(src) {
            d[0] += s * w[0];
            d[1] += s * w[1];
        }
        self.active = if self.active.is_empty() {
            ilo..ihi
        } else {
            self.active.start.min(ilo)..self.active.end.max(ihi)
        };
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        let (lo, hi) = self.union_bounds(other);
        (lo..=hi)
            .map(|x| {
                let a = self.get(x);
                let b = other.get(x);
                (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Rescale to unit norm. Returns the original norm.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            *self = self.scaled(C64::new(1.0 / n, 0.0));
        }
        n
    }

    pub fn normalized(&self) -> Self {
        let mut s = self.clone();
        s.normalize();
        s
    }

    /// Multiply pointwise by a real function of the site.
    pub fn multiply_by(&self, f: impl Fn(i64) -> f64) -> Self {
        let mut out = self.clone();
        let off = out.offset;
        for i in out.active.clone() {
            let w = f(off + i as i64);
            out.amps[i][0] *= w;
            out.amps[i][1] *= w;
        }
        out
    }

    /// Keep only the sites `lo..=hi`.
    pub fn restricted(&self, lo: i64, hi: i64) -> Self {
        self.multiply_by(|x| if x >= lo && x <= hi { 1.0 } else { 0.0 })
    }

    /// `Σ_{x ∉ [lo, hi]} ‖Ψ(x)‖²`.
    pub fn mass_outside(&self, lo: i64, hi: i64) -> f64 {
        self.iter()
            .filter(|(x, _)| *x < lo || *x > hi)
            .map(|(_, v)| spinor_norm_sqr(&v))
            .sum()
    }

    /// Drop the window down to the exact support plus one guard site.
    pub fn trimmed(&self) -> Self {
        match self.support() {
            None => Self::zeros(0, 0),
            Some((lo, hi)) => {
                let amps: Vec<Spinor> = (lo..=hi).map(|x| self.get(x)).collect();
                Self::from_amplitudes(lo, &amps)
            }
        }
    }

    /// Dense copy of the amplitudes on `lo..=hi`.
    pub fn to_dense(&self, lo: i64, hi: i64) -> Vec<Spinor> {
        (lo..=hi).map(|x| self.get(x)).collect()
    }

    /// `S`: component 0 moves one site left, component 1 one site right.
    pub fn apply_shift(&self) -> Self {
        let mut out = self.clone();
        out.shift_in_place(false);
        out
    }

    /// `S*`, the inverse shift.
    pub fn apply_shift_adjoint(&self) -> Self {
        let mut out = self.clone();
        out.shift_in_place(true);
        out
    }

    /// `C`: pointwise action of the coin field.
    pub fn apply_coin(&self, field: &CoinField) -> Self {
        let mut out = self.clone();
        for (i, x) in out.active.clone().zip(self.active_sites()) {
            out.amps[i] = field.coin_at(x).apply(&out.amps[i]);
        }
        out
    }

    /// `C*`.
    pub fn apply_coin_adjoint(&self, field: &CoinField) -> Self {
        let mut out = self.clone();
        for (i, x) in out.active.clone().zip(self.active_sites()) {
            out.amps[i] = field.coin_at(x).apply_adjoint(&out.amps[i]);
        }
        out
    }

    /// `P(X = x) = ‖Ψ(x)‖²` over the support.
    pub fn position_distribution(&self) -> PositionDistribution {
        let (lo, hi) = self.support_bounds().unwrap_or((0, -1));
        PositionDistribution {
            first_site: lo,
            probs: (lo..=hi).map(|x| spinor_norm_sqr(&self.get(x))).collect(),
        }
    }

    /// `Σ_x e^{iξx/n} P(X = x)` for the distribution of this state.
    pub fn characteristic_function(&self, n: u64, xi: f64) -> C64 {
        self.position_distribution().characteristic_function(n, xi)
    }

    fn active_sites(&self) -> impl Iterator<Item = i64> {
        let off = self.offset;
        self.active.clone().map(move |i| off + i as i64)
    }

    fn union_bounds(&self, other: &Self) -> (i64, i64) {
        match (self.support_bounds(), other.support_bounds()) {
            (None, None) => (0, -1),
            (Some(b), None) | (None, Some(b)) => b,
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
        }
    }

    /// Make sure `lo..=hi` plus one guard site on each side lies in the window.
    fn reserve_sites(&mut self, lo: i64, hi: i64) {
        let need_left = (self.offset - (lo - 1)).max(0) as usize;
        let need_right = ((hi + 1) - (self.offset + self.amps.len() as i64 - 1)).max(0) as usize;
        if need_left == 0 && need_right == 0 {
            return;
        }
        self.grow(need_left, need_right);
    }

    fn grow(&mut self, left: usize, right: usize) {
        let mut amps = vec![ZERO_SPINOR; left + self.amps.len() + right];
        amps[left..left + self.amps.len()].copy_from_slice(&self.amps);
        self.amps = amps;
        self.offset -= left as i64;
        self.active = if self.active.is_empty() {
            left..left
        } else {
            self.active.start + left..self.active.end + left
        };
    }

    /// Grow (amortized doubling) so the active range can widen by one site
    /// on each side while keeping a guard site. Fails above `max_window`.
    fn ensure_step_room(&mut self, max_window: usize) -> Result<()> {
        if self.active.is_empty() {
            return Ok(());
        }
        let len = self.amps.len();
        let left_short = self.active.start < 2;
        let right_short = self.active.end + 2 > len;
        if !left_short && !right_short {
            return Ok(());
        }
        let extra = (len / 2).max(16);
        let l = if left_short { extra } else { 0 };
        let r = if right_short { extra } else { 0 };
        let requested = len + l + r;
        if requested > max_window {
            let minimal = self.active.len() + 4;
            if minimal > max_window {
                return Err(Error::WindowLimit {
                    requested,
                    limit: max_window,
                });
            }
            let (l, r) = (
                if left_short { 2 - self.active.start.min(2) } else { 0 },
                if right_short { self.active.end + 2 - len } else { 0 },
            );
            if len + l + r > max_window {
                return Err(Error::WindowLimit {
                    requested: len + l + r,
                    limit: max_window,
                });
            }
            self.grow(l, r);
            return Ok(());
        }
        self.grow(l, r);
        Ok(())
    }

    fn shift_in_place(&mut self, adjoint: bool) {
        if self.active.is_empty() {
            return;
        }
        self.ensure_step_room(usize::MAX).expect("unbounded growth");
        let (s, e) = (self.active.start - 1, self.active.end + 1);
        // `left` receives from the right neighbour, `right` from the left one.
        let (left, right) = if adjoint { (1, 0) } else { (0, 1) };
        for i in s..e {
            self.amps[i][left] = self.amps[i + 1][left];
        }
        for i in (s..e).rev() {
            self.amps[i][right] = self.amps[i - 1][right];
        }
        self.active = s..e;
    }
}

/// Distribution of the walker's position.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    first_site: i64,
    probs: Vec<f64>,
}

impl PositionDistribution {
    pub fn get(&self, x: i64) -> f64 {
        let i = x - self.first_site;
        if i < 0 || i as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.first_site + i as i64, *p))
    }

    /// Nonzero entries, as an ordered map.
    pub fn to_map(&self) -> std::collections::BTreeMap<i64, f64> {
        self.iter().filter(|(_, p)| *p > 0.0).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `E[(X/n)^p]`.
    pub fn velocity_moment(&self, n: u64, p: u32) -> f64 {
        let n = n as f64;
        self.iter().map(|(x, q)| q * (x as f64 / n).powi(p as i32)).sum()
    }

    /// `P(X/n ≤ v)`.
    pub fn velocity_cdf(&self, n: u64, v: f64) -> f64 {
        let n = n as f64;
        self.iter()
            .take_while(|(x, _)| (*x as f64) / n <= v)
            .map(|(_, q)| q)
            .sum()
    }

    /// `E(e^{iξX/n})`.
    pub fn characteristic_function(&self, n: u64, xi: f64) -> C64 {
        assert!(n >= 1, "characteristic function needs n ≥ 1");
        let n = n as f64;
        self.iter()
            .map(|(x, p)| C64::from_polar(p, xi * x as f64 / n))
            .sum()
    }
}

/// The evolution `U = SC` for a fixed coin field.
///
/// Coins are cached on a window of sites that grows with the states evolved.
pub struct Walk<'a> {
    field: &'a CoinField,
    max_window: usize,
    cache_lo: i64,
    cache: Vec<Mat2>,
}

impl<'a> Walk<'a> {
    pub fn new(field: &'a CoinField) -> Self {
        Walk {
            field,
            max_window: DEFAULT_MAX_WINDOW,
            cache_lo: 0,
            cache: Vec::new(),
        }
    }

    pub fn with_max_window(mut self, max_window: usize) -> Self {
        self.max_window = max_window;
        self
    }

    pub fn field(&self) -> &CoinField {
        self.field
    }

    fn coins_for(&mut self, lo: i64, hi: i64) -> &[Mat2] {
        let cache_hi = self.cache_lo + self.cache.len() as i64 - 1;
        if self.cache.is_empty() || lo < self.cache_lo || hi > cache_hi {
            let span = (hi - lo + 1).max(16);
            let (new_lo, new_hi) = if self.cache.is_empty() {
                (lo - span / 2, hi + span / 2)
            } else {
                (lo.min(self.cache_lo - span / 2), hi.max(cache_hi + span / 2))
            };
            self.cache_lo = new_lo;
            self.cache = self.field.coins_on(new_lo, new_hi);
        }
        let start = (lo - self.cache_lo) as usize;
        &self.cache[start..start + (hi - lo + 1) as usize]
    }

    /// `Ψ ← UΨ`.
    pub fn step(&mut self, state: &mut LatticeState) -> Result<()> {
        let Some((lo, hi)) = state.support_bounds() else {
            return Ok(());
        };
        state.ensure_step_room(self.max_window)?;
        let (s, e) = (state.active.start, state.active.end);
        let coins = self.coins_for(lo, hi);
        // Coin and shift in one sweep: site i sends component 0 to i − 1
        // and component 1 to i + 1.
        let amps = &mut state.amps;
        let mut carry = C64::new(0.0, 0.0);
        for (i, c) in (s..e).zip(coins) {
            let v = c.apply(&amps[i]);
            amps[i - 1][0] = v[0];
            amps[i][1] = carry;
            carry = v[1];
        }
        amps[e - 1][0] = C64::new(0.0, 0.0);
        amps[e][1] = carry;
        state.active = s - 1..e + 1;
        Ok(())
    }

    /// `Ψ ← U⁻¹Ψ = C*S*Ψ`.
    pub fn step_back(&mut self, state: &mut LatticeState) -> Result<()> {
        if state.support_bounds().is_none() {
            return Ok(());
        }
        state.ensure_step_room(self.max_window)?;
        state.shift_in_place(true);
        let (lo, hi) = state.support_bounds().unwrap();
        let start = (lo - state.offset) as usize;
        let coins = self.coins_for(lo, hi);
        for (v, c) in state.amps[start..start + coins.len()].iter_mut().zip(coins) {
            *v = c.apply_adjoint(v);
        }
        Ok(())
    }

    /// `UⁿΨ` for any integer `n`.
    pub fn evolve(&mut self, state: &LatticeState, n: i64) -> Result<LatticeState> {
        let mut s = state.clone();
        self.evolve_in_place(&mut s, n)?;
        Ok(s)
    }

    pub fn evolve_in_place(&mut self, state: &mut LatticeState, n: i64) -> Result<()> {
        if n >= 0 {
            for _ in 0..n {
                self.step(state)?;
            }
        } else {
            for _ in 0..n.unsigned_abs() {
                self.step_back(state)?;
            }
        }
        Ok(())
    }
}

/// `UⁿΨ` for the walk with coin field `field`; negative `n` uses `U⁻¹ = C*S*`.
pub fn evolve(state: &LatticeState, field: &CoinField, n: i64) -> Result<LatticeState> {
    Walk::new(field).evolve(state, n)
}
