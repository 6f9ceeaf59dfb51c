//! Closed-form cubic roots.
//!
//! For `a x³ + b x² + c x + d = 0` with
//!
//! ```text
//! ψ0 = b² − 3ac
//! ψ1 = 2b³ − 9abc + 27a²d
//! ψ3 = ∛((ψ1 + √(ψ1² − 4ψ0³)) / 2)
//! ```
//!
//! the roots are `x_k = −(b + θᵏψ3 + ψ0/(θᵏψ3)) / (3a)` for `k = 0, 1, 2`,
//! with `θ = (−1 + √−3)/2`. Everything is evaluated in complex arithmetic, so
//! the three-real-roots case needs no trigonometric branch. Only the largest
//! root is kept from this formula; the other two come from the quadratic
//! left after dividing it out.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Roots with positive real part below this are treated as zero.
pub const R_TOL: f64 = 1e-12;
/// A root is real when `|Im x| ≤ REAL_TOL · max(1, |Re x|)`.
pub const REAL_TOL: f64 = 1e-9;
/// Real roots closer than this (relative) are merged.
pub const MERGE_TOL: f64 = 1e-9;

/// Coefficients of `a x³ + b x² + c x + d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl CubicCoefficients {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        if a == Complex64::new(0.0, 0.0) {
            return Err(Error::DegenerateCubic);
        }
        if ![a, b, c, d].iter().all(|z| z.is_finite()) {
            return Err(Error::NonFinite("cubic coefficients"));
        }
        Ok(CubicCoefficients { a, b, c, d })
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let r = |v| Complex64::new(v, 0.0);
        Self::new(r(a), r(b), r(c), r(d))
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        ((self.a * x + self.b) * x + self.c) * x + self.d
    }

    fn derivative(&self, x: Complex64) -> Complex64 {
        (self.a * 3.0 * x + self.b * 2.0) * x + self.c
    }

    /// `max(|a|, |b|, |c|, |d|)`.
    pub fn scale(&self) -> f64 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// The three roots of a cubic, with multiplicity.
pub fn all_roots(coeffs: &CubicCoefficients) -> Result<[Complex64; 3]> {
    if coeffs.a == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateCubic);
    }
    // Work on the monic polynomial; the formula is invariant under scaling
    // and this keeps ψ1 ~ a²d from overflowing.
    let b = coeffs.b / coeffs.a;
    let c = coeffs.c / coeffs.a;
    let d = coeffs.d / coeffs.a;

    let psi0 = b * b - 3.0 * c;
    let psi1 = 2.0 * b * b * b - 9.0 * b * c + 27.0 * d;
    let disc = (psi1 * psi1 - 4.0 * psi0 * psi0 * psi0).sqrt();
    // Either sign of the square root yields the same root set; take the one
    // that avoids cancellation.
    let sum = if (psi1 + disc).norm() >= (psi1 - disc).norm() {
        psi1 + disc
    } else {
        psi1 - disc
    };
    let psi3 = (sum / 2.0).cbrt();

    let zero = Complex64::new(0.0, 0.0);
    let mut roots = [zero; 3];
    if psi3 == zero {
        // ψ0 = ψ1 = 0: triple root.
        roots = [-b / 3.0; 3];
    } else {
        let theta = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let mut t = Complex64::new(1.0, 0.0);
        for root in roots.iter_mut() {
            let u = t * psi3;
            *root = -(b + u + psi0 / u) / 3.0;
            t *= theta;
        }
    }

    // Small roots lose digits to cancellation when the magnitudes are far
    // apart. Keep the largest, then take the other two from the deflated
    // quadratic.
    let (big, _) = roots
        .iter()
        .enumerate()
        .max_by(|p, q| p.1.norm().total_cmp(&q.1.norm()))
        .expect("three roots");
    let r1 = polish(coeffs, roots[big]);
    if r1 == zero {
        return Ok([zero; 3]);
    }
    // Divide from the constant term, which is the stable direction for the
    // largest root.
    let q0 = -d / r1;
    let q1 = (q0 - c) / r1;
    let [r2, r3] = quadratic_roots(q1, q0);
    Ok([r1, polish(coeffs, r2), polish(coeffs, r3)])
}

/// Roots of the monic `x² + q1 x + q0`, each from the formula that avoids
/// subtracting nearly equal numbers.
fn quadratic_roots(q1: Complex64, q0: Complex64) -> [Complex64; 2] {
    let disc = (q1 * q1 - 4.0 * q0).sqrt();
    let t = if (q1 + disc).norm() >= (q1 - disc).norm() {
        -(q1 + disc) / 2.0
    } else {
        -(q1 - disc) / 2.0
    };
    if t == Complex64::new(0.0, 0.0) {
        [t, t]
    } else {
        [t, q0 / t]
    }
}

/// Up to three Newton steps, each kept only when it lowers the residual.
fn polish(coeffs: &CubicCoefficients, mut x: Complex64) -> Complex64 {
    for _ in 0..3 {
        let px = coeffs.eval(x);
        let dpx = coeffs.derivative(x);
        if px.norm() == 0.0 || dpx.norm() == 0.0 || !dpx.is_finite() {
            break;
        }
        let next = x - px / dpx;
        if next.is_finite() && coeffs.eval(next).norm() < px.norm() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Positive real roots of `alpha·r³ + beta·r + gamma_const = 0`, ascending and
/// deduplicated.
pub fn positive_real_roots(alpha: f64, beta: f64, gamma_const: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "leading coefficient must be positive, got {alpha}"
        )));
    }
    if !beta.is_finite() || !gamma_const.is_finite() {
        return Err(Error::NonFinite("cubic coefficients"));
    }
    let coeffs = CubicCoefficients::real(alpha, 0.0, beta, gamma_const)?;
    let mut reals: Vec<f64> = all_roots(&coeffs)?
        .iter()
        .filter(|z| z.im.abs() <= REAL_TOL * z.re.abs().max(1.0))
        .map(|z| z.re)
        .filter(|&r| r > R_TOL)
        .collect();
    reals.sort_by(f64::total_cmp);
    reals.dedup_by(|next, kept| (*next - *kept).abs() <= MERGE_TOL * next.abs().max(kept.abs()));
    Ok(reals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn contains(roots: &[Complex64], target: Complex64) -> bool {
        roots.iter().any(|r| (r - target).norm() < 1e-12)
    }

    fn residual_ok(coeffs: &CubicCoefficients, x: Complex64) -> bool {
        coeffs.eval(x).norm() <= 1e-8 * coeffs.scale() * x.norm().max(1.0).powi(3)
    }

    #[test]
    fn roots_of_unity() {
        let roots = all_roots(&CubicCoefficients::real(1.0, 0.0, 0.0, -1.0).unwrap()).unwrap();
        let w = c(-0.5, 3f64.sqrt() / 2.0);
        assert!(contains(&roots, c(1.0, 0.0)));
        assert!(contains(&roots, w));
        assert!(contains(&roots, w * w));
    }

    #[test]
    fn factored_cubic() {
        // (x − 1)(x − 2)(x + 3)
        let roots = all_roots(&CubicCoefficients::real(1.0, 0.0, -7.0, 6.0).unwrap()).unwrap();
        for r in [1.0, 2.0, -3.0] {
            assert!(contains(&roots, c(r, 0.0)), "{roots:?} missing {r}");
        }
    }

    #[test]
    fn triple_root() {
        // 2(x − 1.5)³ = 2x³ − 9x² + 13.5x − 6.75
        let coeffs = CubicCoefficients::real(2.0, -9.0, 13.5, -6.75).unwrap();
        for r in all_roots(&coeffs).unwrap() {
            assert!((r - c(1.5, 0.0)).norm() < 1e-12);
        }
        assert_eq!(positive_real_roots(1.0, 0.0, 0.0).unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn zero_leading_coefficient_is_rejected() {
        assert!(matches!(
            CubicCoefficients::real(0.0, 1.0, 1.0, 1.0),
            Err(Error::DegenerateCubic)
        ));
        let raw = CubicCoefficients {
            a: c(0.0, 0.0),
            b: c(1.0, 0.0),
            c: c(0.0, 0.0),
            d: c(0.0, 0.0),
        };
        assert!(all_roots(&raw).is_err());
        assert!(positive_real_roots(0.0, 1.0, 1.0).is_err());
        assert!(positive_real_roots(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn positive_roots_examples() {
        let r = positive_real_roots(1.0, 0.0, -8.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-12);

        let r = positive_real_roots(1.0, -7.0, 6.0).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);

        assert!(positive_real_roots(2.0, 3.0, 5.0).unwrap().is_empty());
    }

    #[test]
    fn double_root_is_merged() {
        // r³ − 3r + 2 = (r − 1)²(r + 2)
        let r = positive_real_roots(1.0, -3.0, 2.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn random_cubics_meet_residual_bound() {
        let mut rng = Rng::new(11);
        for i in 0..2000 {
            let mut draw = || {
                let mag = 10f64.powf(4.0 * rng.uniform() - 2.0);
                if i % 2 == 0 {
                    c(mag * rng.normal(), 0.0)
                } else {
                    rng.complex_normal(mag)
                }
            };
            let coeffs = CubicCoefficients::new(draw(), draw(), draw(), draw()).unwrap();
            for x in all_roots(&coeffs).unwrap() {
                assert!(residual_ok(&coeffs, x), "{coeffs:?} root {x}");
            }
        }
    }

    #[test]
    fn positive_roots_are_subset_of_all_roots() {
        let mut rng = Rng::new(5);
        for _ in 0..2000 {
            let alpha = rng.uniform() * 10.0 + 1e-3;
            let beta = rng.normal() * 5.0;
            let g = rng.normal() * 5.0;
            let all = all_roots(&CubicCoefficients::real(alpha, 0.0, beta, g).unwrap()).unwrap();
            for r in positive_real_roots(alpha, beta, g).unwrap() {
                assert!(r > R_TOL);
                assert!(all.iter().any(|z| (z.re - r).abs() <= 1e-12 * r.max(1.0)));
                let p = alpha * r * r * r + beta * r + g;
                assert!(p.abs() <= 1e-8 * alpha.max(beta.abs()).max(g.abs()) * r.max(1.0).powi(3));
            }
        }
    }

    #[test]
    fn widely_separated_roots_keep_their_digits() {
        // (x − 1e5)(x − 1e-3)(x + 2e-3)
        let (r1, r2, r3) = (1e5, 1e-3, -2e-3);
        let coeffs = CubicCoefficients::real(1.0, -(r1 + r2 + r3), r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3).unwrap();
        let mut got: Vec<f64> = all_roots(&coeffs).unwrap().iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        for (g, want) in got.iter().zip([r3, r2, r1]) {
            assert!((g - want).abs() <= 1e-12 * want.abs(), "{g} vs {want}");
        }
    }
}
