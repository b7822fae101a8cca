//! Wave operators of a two-phase walk: outgoing pairs are carried over with
//! their norm, incoming pairs are annihilated.
//!
//! ```bash
//! cargo run --release --example wave_operators
//! ```

use anisowalk::coin::{CoinField, CoinMatrix};
use anisowalk::lattice::LatticeState;
use anisowalk::momentum::{velocity_function, MomentumFrame};
use anisowalk::scattering::{verify_intertwining, wave_forward, Criterion, PairState, Schedule};
use num_complex::Complex64 as C64;

/// Smooth bump supported on `(lo, hi)`.
fn bump(v: f64, lo: f64, hi: f64) -> f64 {
    let t = (2.0 * v - lo - hi) / (hi - lo);
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

fn packet(coin: &CoinMatrix, lo: f64, hi: f64) -> anisowalk::error::Result<LatticeState> {
    let seed = LatticeState::from_entries((-4..=4).map(|x| (x, [C64::new(1.0, 0.1 * x as f64), C64::new(0.5, -0.3)])));
    let frame = MomentumFrame::around(&seed, 512);
    velocity_function(&seed, coin, |v| bump(v, lo, hi), &frame, 256, 1e-10)
}

fn main() -> anisowalk::error::Result<()> {
    let left = CoinMatrix::from_params(0.8, 0.3, -0.4, 0.7)?;
    let right = CoinMatrix::from_params(0.6, -0.2, 0.5, 1.1)?;
    let field = CoinField::two_phase(left, right);
    let schedule = Schedule::new(64, 4096, 1e-3, Criterion::Strong)?;

    let cases = [
        ("outgoing", packet(&left, -0.75, -0.1)?, packet(&right, 0.1, 0.55)?),
        ("incoming", packet(&left, 0.1, 0.75)?, packet(&right, -0.55, -0.1)?),
    ];
    for (name, l, r) in cases {
        let pair = PairState::new(l, r);
        let (w, report) = wave_forward(&pair, &field, &schedule)?;
        println!(
            "{name}: ‖pair‖ = {:.6}, ‖W pair‖ = {:.6}, converged at n = {} ({})",
            pair.norm(),
            w.norm(),
            report.final_n,
            report.converged
        );
        for c in &report.iterates {
            println!("  n = {:5}  ‖Φ_n‖ = {:.8}  step {:?}", c.n, c.norm, c.increment);
        }
        println!("  intertwining residual at n = 1024: {:.2e}", verify_intertwining(&field, &pair, 1024)?);
    }
    Ok(())
}
