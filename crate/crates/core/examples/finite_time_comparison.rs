//! Kolmogorov distance between the law of `X_n/n` and its weak limit as `n`
//! grows, for the defect walk of `defect_bound_states`.
//!
//! ```bash
//! cargo run --release --example finite_time_comparison
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use anisowalk::coin::{CoinField, CoinMatrix};
use anisowalk::lattice::LatticeState;
use anisowalk::linalg::Mat2;
use anisowalk::weaklimit::{compare_empirical, default_v_grid, limit_distribution, LimitConfig, DEFAULT_GUARD_BAND};
use num_complex::Complex64 as C64;

fn main() -> anisowalk::error::Result<()> {
    let s = FRAC_1_SQRT_2;
    let coin = |sigma: f64| {
        let e = C64::from_polar(1.0, sigma);
        CoinMatrix::from_matrix(Mat2([[C64::new(s, 0.0), e * s], [e.conj() * s, C64::new(-s, 0.0)]]))
    };
    let field = CoinField::two_phase(coin(0.0)?, coin(PI / 2.0)?).with_override(0, Mat2::real(1.0, 0.0, 0.0, -1.0))?;
    let psi = LatticeState::delta(0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let dist = limit_distribution(&psi, &field, &LimitConfig::default())?;
    let report = compare_empirical(
        &psi,
        &field,
        &dist,
        &[125, 250, 500, 1000, 2000],
        &default_v_grid(2201),
        DEFAULT_GUARD_BAND,
    )?;
    print!("{}", report.to_csv());
    println!("distances non-increasing over the tail: {}", report.nonincreasing_tail);
    Ok(())
}
