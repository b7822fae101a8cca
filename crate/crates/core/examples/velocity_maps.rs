//! The maps `k_{j,m}` and the operators `K_{j,m}`: the four pieces of a
//! state add back up to the state, and `F(V)` agrees with the momentum-space
//! multiplier.
//!
//! ```bash
//! cargo run --release --example velocity_maps
//! ```

use anisowalk::coin::CoinMatrix;
use anisowalk::konno::{k_map, KOperator, VelocityGrid};
use anisowalk::lattice::LatticeState;
use anisowalk::momentum::{velocity, velocity_projection, VelocityWindow};
use num_complex::Complex64 as C64;

fn main() -> anisowalk::error::Result<()> {
    let coin = CoinMatrix::from_params(0.6, 0.4, -1.0, 0.5)?;
    println!("υ       k_{{1,0}}(υ)   v_1(k)   k_{{2,1}}(υ)   v_2(k)");
    for v in [-0.5, -0.25, 0.0, 0.25, 0.5] {
        let k1 = k_map(v, &coin, 1, 0)?;
        let k2 = k_map(v, &coin, 2, 1)?;
        println!("{v:+.2}   {k1:+.6}   {:+.6}   {k2:+.6}   {:+.6}", velocity(&coin, k1, 1), velocity(&coin, k2, 2));
    }

    let psi = LatticeState::from_entries([
        (-1, [C64::new(0.3, 0.1), C64::new(0.0, -0.2)]),
        (0, [C64::new(0.6, 0.0), C64::new(0.4, 0.3)]),
        (2, [C64::new(-0.2, 0.2), C64::new(0.1, 0.0)]),
    ])
    .normalized();
    let grid = VelocityGrid::new(coin.a(), 257)?;
    let mut sum = LatticeState::zeros(-40, 40);
    let mut right = 0.0;
    for k in KOperator::all(coin)? {
        let g = k.apply(&psi, &grid);
        println!("‖K_{{{},{}}}Ψ‖² = {:.6}", k.branch(), k.interval_index(), g.norm_sqr());
        sum.add_scaled_in_place(&k.adjoint(&g, -40, 40), C64::new(1.0, 0.0));
        right += g.multiplied(|v| if v > 0.0 { 1.0 } else { 0.0 }).norm_sqr();
    }
    println!("‖Σ K*KΨ − Ψ‖ = {:.2e}", sum.distance(&psi));

    let dft = velocity_projection(&psi, &coin, VelocityWindow::Positive)?;
    println!("‖χ(V > 0)Ψ‖² = {:.9} (K route), {:.9} (momentum multiplier)", right, dft.norm_sqr());
    Ok(())
}
