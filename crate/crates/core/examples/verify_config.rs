//! Running the verification harness from a config string.

use cma_lift::cli::{verify, Config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config::parse(
        r#"{
            "family": "ZEROC",
            "functions": {"a": "3 + exp(z)", "d": "z^2", "phi0": "1 + z", "rho1": "0.5*z", "psi0": "z^3"},
            "sampling": {"seed": 7, "count": 20},
            "suites": ["pde", "foliation"]
        }"#,
    )?;
    let report = verify(&cfg)?;
    for s in &report.suites {
        for c in &s.checks {
            println!("{} {}.{} {:.1e} (tol {:.0e})", if c.pass { "PASS" } else { "FAIL" }, s.name, c.id, c.value, c.tol);
        }
    }
    println!("exit code {}", report.exit_code());
    Ok(())
}
