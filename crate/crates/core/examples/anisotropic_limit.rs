//! Weak limit of `X_n/n` for a walk that is fast on the left (`a = 0.9`) and
//! slow on the right (`a = 0.4`). Prints the decomposition and writes the
//! densities as CSV to stdout with `--csv`.
//!
//! ```bash
//! cargo run --release --example anisotropic_limit
//! cargo run --release --example anisotropic_limit -- --csv > density.csv
//! ```

use std::f64::consts::FRAC_1_SQRT_2;

use anisowalk::coin::{CoinField, CoinMatrix};
use anisowalk::lattice::LatticeState;
use anisowalk::weaklimit::{limit_distribution, LimitConfig};
use num_complex::Complex64 as C64;

fn main() -> anisowalk::error::Result<()> {
    let field = CoinField::two_phase(
        CoinMatrix::from_params(0.9, 0.3, 0.2, 1.0)?,
        CoinMatrix::from_params(0.4, -0.5, 0.1, 2.0)?,
    );
    let psi = LatticeState::delta(0, [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)]);
    let dist = limit_distribution(&psi, &field, &LimitConfig::default())?;
    if std::env::args().any(|a| a == "--csv") {
        print!("{}", dist.density_csv());
        return Ok(());
    }
    println!("κ₀ = {:.6}, κ_ℓ = {:.6}, κ_r = {:.6}", dist.kappa0, dist.kappa_l, dist.kappa_r);
    for d in dist.densities() {
        let lo = d.nodes.first().copied().unwrap_or(0.0);
        let hi = d.nodes.last().copied().unwrap_or(0.0);
        println!(
            "{:?} density: mass {:.6}, nodes in [{lo:+.4}, {hi:+.4}], mean speed {:.4}",
            d.side,
            d.mass(),
            d.integrate(f64::abs) / d.mass()
        );
    }
    println!("total mass {:.8}", dist.total_mass());
    for p in 1..=4 {
        println!("E[V^{p}] = {:+.6}", dist.moment(p)?);
    }
    for xi in [1.0, 2.0, 5.0] {
        let c = dist.cf(xi);
        println!("E[e^{{i{xi}V}}] = {:+.6} {:+.6}i", c.re, c.im);
    }
    for v in [-0.9, -0.5, 0.0, 0.2, 0.4] {
        println!("P(V ≤ {v:+.1}) = {:.6}", dist.cdf(v));
    }
    Ok(())
}
