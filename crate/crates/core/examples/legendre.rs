//! The two Legendre transforms linking the heavenly, rotational and
//! parametric potentials.

use cma_lift::fields::{build_potential, Catalog, Family, SolutionSpec, Window};
use cma_lift::legendre::{forward_1d, forward_2d, TSolver};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cat = Catalog::new(12);
    let spec = cat.spec(Family::Zeroc)?;
    let v = build_potential(&spec)?;
    let u = forward_1d(&v, TSolver::Newton)?;
    let urot = build_potential(&SolutionSpec::new(Family::URot, spec.bundle.clone()))?;
    for p in cat.points(&urot, &Window::for_chart(urot.chart()), 3)? {
        println!("t ↔ ρ  transform {:.12}  closed {:.12}", u.value(&p)?, urot.value(&p)?);
    }
    let omega = build_potential(&SolutionSpec::new(Family::Omega, spec.bundle.clone()))?;
    let sub = forward_2d(&urot)?;
    for p in cat.points(&omega, &Window::for_chart(omega.chart()), 3)? {
        println!("q ↔ p  transform {:.12}  closed {:.12}", sub.value(&p)?, omega.value(&p)?);
    }
    Ok(())
}
