//! Metric, curvature and chirality of the parametric Kähler potential, with
//! the closed-form curvature coefficients for comparison.

use cma_lift::fields::{build_potential, Family, SolutionSpec, Window, Catalog};
use cma_lift::geometry::{closed_form_r11, closed_form_r13, curvature, metric};
use cma_lift::holofunc::FnBundle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = FnBundle::from_sources([("a", "3 + exp(z)"), ("d", "z^2"), ("phi0", "1 + z")])?;
    let omega = build_potential(&SolutionSpec::new(Family::Omega, bundle.clone()))?;
    let mut cat = Catalog::new(1);
    for p in cat.points(&omega, &Window::for_chart(omega.chart()), 3)? {
        let (sigma, sigmab, rho) = (p[1], p[3], p[4].re);
        let g = metric(&omega, &p)?;
        let r = curvature(&omega, &p)?;
        let closed = closed_form_r11(&bundle, sigma, sigmab, rho)?;
        let printed = closed_form_r13(&bundle, sigma, sigmab, rho)?;
        println!("σ = {sigma:.3}, ρ = {rho:.3}");
        println!("  det g = {:.6}  e^(ρ/2) = {:.6}  eigenvalues {:?}", g.det, (rho / 2.0).exp(), g.eigenvalues());
        println!("  max |Ricci| {:.1e}   SD/ASD {:.1e}", r.max_ricci(), r.chirality.ratio());
        println!("  R¹₁ numeric {:.10}  closed {:.10}", r.r11.coefficient, closed);
        println!("  R¹₃ e¹∧e⁴ numeric {:.6}  printed {:.6}", r.r13[1], printed[1]);
    }
    Ok(())
}
