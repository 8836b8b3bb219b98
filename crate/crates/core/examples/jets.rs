//! Truncated Taylor arithmetic in several variables.

use cma_lift::jets::{Jet, JetSpace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = JetSpace::new(&["x", "y"], 4)?;
    let x = Jet::seed(&space, "x", 0.5)?;
    let y = Jet::seed(&space, "y", -0.2)?;
    // f = exp(x y) / (1 + x²)
    let f = (&x * &y).exp() * (Jet::constant(&space, 1.0) + &x * &x).recip()?;
    println!("f      = {}", f.value());
    println!("f_x    = {}", f.d(&["x"])?);
    println!("f_xy   = {}", f.d(&["x", "y"])?);
    println!("f_xxyy = {}", f.d(&["x", "x", "y", "y"])?);
    Ok(())
}
