//! Parsing holomorphic parameter functions and evaluating their derivatives.

use cma_lift::holofunc::HoloFn;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = HoloFn::parse("(0.7 + 0.2*i)*exp(z) - 1/(z + 3) + sqrt(z + 4)")?;
    let w = Complex64::new(0.3, -0.4);
    for (k, d) in a.derivatives(w, 3)?.iter().enumerate() {
        println!("a^({k})({w}) = {d}");
    }
    let ab = a.conjugate();
    println!("conj(a(w)) = {}", a.eval(w)?.conj());
    println!("ā(w̄)       = {}", ab.eval(w.conj())?);
    match HoloFn::parse("exp(z") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
