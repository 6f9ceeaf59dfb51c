//! Closed-form roots of a cubic, and the positive real roots the
//! correction step asks for.

use tlspr::{all_roots, positive_real_roots, CubicCoefficients, Result};

fn main() -> Result<()> {
    // (x − 1)(x − 2)(x + 3)
    let p = CubicCoefficients::real(1.0, 0.0, -7.0, 6.0)?;
    for r in all_roots(&p)? {
        println!("root {:.6} {:+.1e}i  residual {:.1e}", r.re, r.im, p.eval(r).norm());
    }

    // 2r³ + r − 2 = 0 has exactly one positive root.
    let pos = positive_real_roots(2.0, 1.0, -2.0)?;
    println!("positive roots of 2r³ + r − 2: {pos:?}");
    Ok(())
}
