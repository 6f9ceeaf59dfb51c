//! Complex vectors, sensing ensembles and measurement sets.
//!
//! Inner products conjugate the first argument: `inner(a, b) = Σ conj(a_i) b_i`,
//! so a measurement is `|inner(a_m, x)|² = |a_m* x|²`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex vector with at least one entry and no NaN/Inf parts.
#[derive(Clone, PartialEq)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("vector"));
        }
        if !entries.iter().all(|z| z.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(CVector(entries))
    }

    /// Embeds real entries with zero imaginary parts.
    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Standard basis vector `e_index` of dimension `n`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {n}"
            )));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[index] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    /// Wraps entries produced by trusted numerical code; finiteness is only
    /// checked in debug builds.
    pub(crate) fn from_raw(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        CVector(entries)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    #[inline]
    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.re).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("CVector").field(&self.0).finish()
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

#[inline]
pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `Σ conj(a_i) b_i` over equal-length slices.
#[inline]
pub(crate) fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut re = 0.0;
    let mut im = 0.0;
    for (u, v) in a.iter().zip(b) {
        // conj(u) * v
        re += u.re * v.re + u.im * v.im;
        im += u.re * v.im - u.im * v.re;
    }
    Complex64::new(re, im)
}

/// Inner product, conjugate-linear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(dot_conj(a.as_slice(), b.as_slice()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Gaussian,
    Cdp,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseTag {
    Clean,
    Noisy,
    Corrected,
}

/// `M` sensing vectors of common dimension `N`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingEnsemble {
    n: usize,
    m: usize,
    data: Vec<Complex64>,
    model_tag: ModelTag,
    noise_tag: NoiseTag,
}

impl SensingEnsemble {
    pub fn from_rows(rows: Vec<CVector>, model_tag: ModelTag, noise_tag: NoiseTag) -> Result<Self> {
        let n = rows.first().ok_or(Error::Empty("ensemble"))?.len();
        let m = rows.len();
        let mut data = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend(row.into_inner());
        }
        Ok(SensingEnsemble {
            n,
            m,
            data,
            model_tag,
            noise_tag,
        })
    }

    /// Builds an ensemble from row-major data of length `m * n`.
    pub fn from_flat(
        n: usize,
        m: usize,
        data: Vec<Complex64>,
        model_tag: ModelTag,
        noise_tag: NoiseTag,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Empty("ensemble"));
        }
        if data.len() != n * m {
            return Err(Error::DimensionMismatch {
                expected: n * m,
                found: data.len(),
            });
        }
        if !data.iter().all(|z| z.is_finite()) {
            return Err(Error::NonFinite("ensemble"));
        }
        Ok(SensingEnsemble {
            n,
            m,
            data,
            model_tag,
            noise_tag,
        })
    }

    /// Signal dimension `N`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of sensing vectors `M`.
    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, Complex64> {
        self.data.chunks(self.n)
    }

    pub fn row_vector(&self, m: usize) -> CVector {
        CVector::from_raw(self.row(m).to_vec())
    }

    pub fn as_flat(&self) -> &[Complex64] {
        &self.data
    }

    pub fn model_tag(&self) -> ModelTag {
        self.model_tag
    }

    pub fn noise_tag(&self) -> NoiseTag {
        self.noise_tag
    }

    pub fn with_tags(mut self, model_tag: ModelTag, noise_tag: NoiseTag) -> Self {
        self.model_tag = model_tag;
        self.noise_tag = noise_tag;
        self
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm_sqr(&self.data).sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// `inner(a_m, x)` for every row.
    pub fn project(&self, x: &CVector) -> Result<Vec<Complex64>> {
        self.check_signal(x)?;
        Ok(self.project_unchecked(x.as_slice()))
    }

    pub(crate) fn project_unchecked(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows().map(|row| dot_conj(row, x)).collect()
    }

    pub(crate) fn check_signal(&self, x: &CVector) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Stable 64-bit fingerprint of dimensions and contents (FNV-1a over the
    /// little-endian bytes). Used as the `ensemble_ref` of measurement sets.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write(&(self.n as u64).to_le_bytes());
        h.write(&(self.m as u64).to_le_bytes());
        for z in &self.data {
            h.write(&z.re.to_le_bytes());
            h.write(&z.im.to_le_bytes());
        }
        h.finish()
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Real measurements `y_m`, one per sensing vector of the generating ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    values: Vec<f64>,
    ensemble_ref: u64,
}

impl MeasurementSet {
    pub fn new(values: Vec<f64>, ensemble_ref: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("measurements"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("measurements"));
        }
        Ok(MeasurementSet {
            values,
            ensemble_ref,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ensemble_ref(&self) -> u64 {
        self.ensemble_ref
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect(), self.ensemble_ref)
    }

    pub(crate) fn check_against(&self, ensemble: &SensingEnsemble) -> Result<()> {
        if self.len() != ensemble.len() {
            return Err(Error::DimensionMismatch {
                expected: ensemble.len(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian_vector, Rng};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_basis_and_conjugation() {
        let e1 = CVector::basis(3, 0).unwrap();
        assert_eq!(inner(&e1, &e1).unwrap(), c(1.0, 0.0));
        let je1 = e1.scale(c(0.0, 1.0));
        assert_eq!(inner(&je1, &e1).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn inner_matches_naive_loop() {
        let mut rng = Rng::new(7);
        let a = complex_gaussian_vector(&mut rng, 257, 1.0).unwrap();
        let b = complex_gaussian_vector(&mut rng, 257, 1.0).unwrap();
        let mut naive = c(0.0, 0.0);
        for i in 0..a.len() {
            naive += a[i].conj() * b[i];
        }
        let got = inner(&a, &b).unwrap();
        assert!((got - naive).norm() <= 1e-12 * naive.norm());
    }

    #[test]
    fn inner_rejects_mismatch() {
        let a = CVector::zeros(2).unwrap();
        let b = CVector::zeros(3).unwrap();
        assert!(matches!(inner(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn vector_invariants() {
        assert!(CVector::new(vec![]).is_err());
        assert!(CVector::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(CVector::new(vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn ensemble_rejects_ragged_rows() {
        let rows = vec![CVector::zeros(2).unwrap(), CVector::zeros(3).unwrap()];
        assert!(SensingEnsemble::from_rows(rows, ModelTag::External, NoiseTag::Clean).is_err());
    }

    proptest! {
        #[test]
        fn self_inner_is_real_nonnegative(seed in any::<u64>(), n in 1usize..64) {
            let mut rng = Rng::new(seed);
            let a = complex_gaussian_vector(&mut rng, n, 3.0).unwrap();
            let v = inner(&a, &a).unwrap();
            prop_assert!(v.re >= 0.0);
            prop_assert!(v.im.abs() <= 1e-12 * v.re.max(f64::MIN_POSITIVE));
        }
    }
}
