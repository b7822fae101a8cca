//! The Konno density `f_K(υ, r)` and the velocity grid that integrates
//! against `½ f_K dυ`.
//!
//! ```bash
//! cargo run --release --example konno_density
//! ```

use anisowalk::konno::{konno_density, VelocityGrid};

fn main() -> anisowalk::error::Result<()> {
    for r in [0.2, 0.5f64.sqrt(), 0.95] {
        let grid = VelocityGrid::new(r, 65)?;
        println!(
            "r = {r:.4}: ∫½f_K = {:.15}, ∫υ²·½f_K = {:.10}, f_K(0) = {:.6}",
            grid.integrate(|_| 1.0),
            grid.integrate(|v| v * v),
            konno_density(0.0, r)?
        );
    }
    println!("\n   υ     f_K(υ, 0.8)");
    for i in 0..=16 {
        let v = -0.8 + 0.1 * i as f64;
        println!("{v:+.2}   {:.6}", konno_density(v, 0.8)?);
    }
    Ok(())
}
