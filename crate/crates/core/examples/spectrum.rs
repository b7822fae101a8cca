//! Spectral arcs, thresholds and group velocities of a free walk.
//!
//! ```bash
//! cargo run --release --example spectrum
//! ```

use anisowalk::coin::CoinMatrix;
use anisowalk::momentum::{spectrum_arcs, FreeModel, BRANCHES};

fn main() -> anisowalk::error::Result<()> {
    for coin in [
        CoinMatrix::hadamard(),
        CoinMatrix::from_params(0.9, 0.3, 0.2, 1.0)?,
        CoinMatrix::from_params(0.0, 0.0, 0.4, 1.3)?,
        CoinMatrix::identity(),
    ] {
        let spec = spectrum_arcs(&coin);
        println!(
            "a = {:.4}, α = {:+.3}, β = {:+.3}, δ = {:+.3}: {:?}",
            coin.a(),
            coin.alpha(),
            coin.beta(),
            coin.delta(),
            coin.regime()
        );
        for (j, arc) in BRANCHES.iter().zip(&spec.arcs) {
            println!("  branch {j}: arc [{:+.4}, {:+.4}]", arc.start, arc.end);
        }
        for z in &spec.thresholds {
            println!("  threshold e^{{i {:+.4}}}", z.arg());
        }
        let model = FreeModel::new(coin, 8);
        for e in model.samples() {
            println!("  k = {:.3}: v₁ = {:+.4}, v₂ = {:+.4}", e.k, e.velocity(1), e.velocity(2));
        }
        println!();
    }
    Ok(())
}
