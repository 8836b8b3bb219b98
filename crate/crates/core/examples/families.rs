//! Building the explicit potentials and evaluating them on the real slice.

use cma_lift::fields::{build_potential, Catalog, Chart, Family, SolutionSpec, Window};
use cma_lift::holofunc::FnBundle;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = FnBundle::from_sources([("a", "exp(z)"), ("d", "0"), ("phi0", "0"), ("rho1", "0"), ("psi0", "0")])?;
    let v = build_potential(&SolutionSpec::new(Family::Zeroc, bundle))?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let pt = Chart::heavenly().real_point(&[("t", c(1.0)), ("q", c(0.0)), ("z", c(0.0))])?;
    println!("ZEROC at t=1, q=z=0: {}  (ln 2 + 3/2 = {})", v.value(&pt)?, 2f64.ln() + 1.5);

    let mut cat = Catalog::new(42);
    for family in [Family::Zerocom, Family::FamilyC, Family::Zeroc, Family::URot, Family::Omega] {
        let field = build_potential(&cat.spec(family)?)?;
        let pts = cat.points(&field, &Window::for_chart(field.chart()), 3)?;
        let worst = pts
            .iter()
            .map(|p| field.value(p).map(|v| v.im.abs() / (1.0 + v.norm())))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("{:<9} on {:<11} max |Im v|/(1+|v|) = {worst:.1e}", family.name(), field.chart().name());
    }
    Ok(())
}
