//! Differential invariants of the heavenly system, their operator algebra,
//! and finite symmetry flows.

use cma_lift::fields::{build_potential, Catalog, Family, Window};
use cma_lift::foliation::{flow_invariance, invariant_equations, invariants_at, verify_commutators, Flow, Invariant};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cat = Catalog::new(1);
    let v = build_potential(&cat.spec(Family::Zeroc)?)?;
    let pts = cat.points(&v, &Window::for_chart(v.chart()), 5)?;
    let f = invariants_at(&v, &pts[0])?;
    println!("ω₁ = {:.6}  ω₂ = {:.6}  ω₃ = {:.6}", f.w1, f.w2, f.w3);
    for eq in invariant_equations(&v, &pts)? {
        println!("{:<12} {:.1e}", eq.statement, eq.max_abs);
    }
    for r in verify_commutators(&v, &pts[..2])? {
        println!("{:<42} {:.1e}", r.statement, r.max_rel);
    }
    let probes = [Invariant::W1, Invariant::W2, Invariant::W3];
    for flow in [Flow::Translation(Complex64::new(1.0, 0.5)), Flow::Scaling] {
        println!("{flow:?} drift {:.1e}", flow_invariance(&v, flow, 0.05, &probes, &pts)?);
    }
    Ok(())
}
