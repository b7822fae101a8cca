//! Hadamard walk from `δ₀ ⊗ (1, 0)`: position law after `n` steps against
//! its limit density `(1 − υ) f_K(υ, 1/√2)`.
//!
//! ```bash
//! cargo run --release --example hadamard_walk -- 1000
//! ```

use anisowalk::coin::{CoinField, CoinMatrix};
use anisowalk::konno::konno_density;
use anisowalk::lattice::{evolve, LatticeState};
use num_complex::Complex64 as C64;

fn main() -> anisowalk::error::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let field = CoinField::homogeneous(CoinMatrix::hadamard());
    let psi = LatticeState::delta(0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let state = evolve(&psi, &field, n as i64)?;
    let pd = state.position_distribution();

    println!("n = {n}, total probability {:.15}", pd.total());
    println!("E[X_n/n] = {:+.6}  (limit −(1 − 1/√2) = {:+.6})", pd.velocity_moment(n, 1), -(1.0 - 0.5f64.sqrt()));
    println!("E[(X_n/n)²] = {:.6}", pd.velocity_moment(n, 2));

    println!("\n   υ      histogram   (1 − υ) f_K(υ, 1/√2)");
    let bins = 14;
    for b in 0..bins {
        let lo = -0.7 + 1.4 * b as f64 / bins as f64;
        let hi = lo + 1.4 / bins as f64;
        let mass: f64 = pd
            .iter()
            .filter(|(x, _)| {
                let v = *x as f64 / n as f64;
                v >= lo && v < hi
            })
            .map(|(_, p)| p)
            .sum();
        let mid = 0.5 * (lo + hi);
        println!("{mid:+.2}   {:9.4}   {:9.4}", mass / (hi - lo), (1.0 - mid) * konno_density(mid, 0.5f64.sqrt())?);
    }
    Ok(())
}
