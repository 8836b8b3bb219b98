//! Residuals of the heavenly, rotational and Monge–Ampère systems along the
//! reduction chain.

use cma_lift::fields::{build_potential, lift_extended, lift_rotational, Catalog, Family, PotentialField, Window};
use cma_lift::pde::{residual, EquationId};

fn report(cat: &mut Catalog, eq: EquationId, field: &PotentialField) -> Result<(), Box<dyn std::error::Error>> {
    let pts = cat.points(field, &Window::for_chart(field.chart()), 20)?;
    let r = residual(eq, field, &pts)?;
    println!("{:<15} {:<20} max rel {:.2e}", eq.name(), field.label(), r.max_rel);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cat = Catalog::new(3);
    let spec = cat.spec(Family::Zeroc)?;
    report(&mut cat, EquationId::BfSystem, &build_potential(&spec)?)?;
    let u = build_potential(&cat.spec(Family::URot)?)?;
    report(&mut cat, EquationId::RotSystem, &u)?;
    report(&mut cat, EquationId::Cma, &lift_rotational(&u)?)?;
    report(&mut cat, EquationId::ReducedSystem, &lift_rotational(&u)?)?;
    report(&mut cat, EquationId::SixSystem, &lift_extended(&u)?)?;
    let omega = build_potential(&cat.spec(Family::Omega)?)?;
    report(&mut cat, EquationId::CmaParam, &omega)?;
    Ok(())
}
