//! Commutators of the symmetry generators of the parametric equation against
//! the tabulated templates.

use cma_lift::symmetry::{rng, sample_points, verify_table, GeneratorParams, TableForm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut r = rng(7);
    let params = GeneratorParams::random(&mut r)?;
    let pts = sample_points(&mut r, 4)?;
    for form in [TableForm::Printed, TableForm::Corrected] {
        println!("{form:?}");
        for e in verify_table(&params, &pts, form)? {
            if !e.passes(1e-10) || e.row == e.col {
                println!(
                    "  [{}, {}] = {:<24} deviation {:.2e} ({})",
                    e.row.name(),
                    e.col.name(),
                    e.template,
                    e.deviation,
                    if e.passes(1e-10) { "ok" } else { "MISMATCH" }
                );
            }
        }
    }
    Ok(())
}
