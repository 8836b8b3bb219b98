//! Witnessing that a parametric potential is not invariant under any
//! catalog symmetry, with the flat potential as control.

use cma_lift::fields::{build_potential, Catalog, Chart, Family, PotentialField, Window};
use cma_lift::symmetry::killing_verdict;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cat = Catalog::new(8);
    let omega = build_potential(&cat.spec(Family::Omega)?)?;
    let pts = cat.points(&omega, &Window::for_chart(omega.chart()), 10)?;
    let flat = PotentialField::new(Chart::parametric(), "flat", |x| Ok(&x[0] * &x[2] + &x[1] * &x[3]));
    for f in [&omega, &flat] {
        let r = killing_verdict(f, &pts)?;
        println!("{}: {:?}", f.label(), r.verdict);
        for w in &r.witnesses {
            println!("  {:?} {:<18} residual {:.2e}", w.case, w.label, w.residual.max_abs);
        }
    }
    Ok(())
}
