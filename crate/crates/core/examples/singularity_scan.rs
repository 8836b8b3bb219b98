//! Scanning Δ over σ for regular and singular profiles.

use cma_lift::geometry::{singularity_scan, Grid};
use cma_lift::holofunc::FnBundle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid { min: -1.0, max: 1.0, steps: 21 };
    for a in ["exp(z)", "(0.7 + 0.2*i)*z + 1", "i - 1/((0.5 + 0.1*i)*z + 3)", "-4/(0.8*(0.8*z + 2))"] {
        let s = singularity_scan(&FnBundle::from_sources([("a", a)])?, grid)?;
        println!(
            "{a:<28} {:?}  |Δ| in [{:.2e}, {:.2e}]  max flatness {:.1e}",
            s.verdict, s.min_abs_delta, s.max_abs_delta, s.max_abs_flatness
        );
    }
    Ok(())
}
