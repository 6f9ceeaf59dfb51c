//! Optimal correction of a single sensing vector for a fixed signal.

use num_complex::Complex64;
use tlspr::{correct_sensing_vector, inner, CVector, CorrectionParams, Result};

fn main() -> Result<()> {
    let x = CVector::new(vec![Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.2)])?;
    let a = CVector::new(vec![Complex64::new(0.4, -0.1), Complex64::new(0.9, 0.3)])?;
    let y = 2.5;
    println!("|<a, x>|² = {:.4}, measured y = {y}", inner(&a, &x)?.norm_sqr());

    for ratio in [0.01, 1.0, 100.0] {
        let w = CorrectionParams::new(1.0, ratio)?;
        let r = correct_sensing_vector(&a, y, &x, &w)?;
        let moved: f64 = r.corrected.iter().zip(a.iter()).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
        println!(
            "λ_y/λ_a = {ratio:>6}: |<â, x>|² = {:.4}, ‖â − a‖ = {moved:.4}, objective {:.4e}",
            r.nu.norm_sqr(),
            r.objective_value
        );
    }
    Ok(())
}
