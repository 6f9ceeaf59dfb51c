//! On-disk formats for vectors, ensembles and measurement sets.
//!
//! # Binary container (`.tpr`)
//!
//! All integers and floats are little-endian. The header is 40 bytes:
//!
//! | offset | size | field                                                  |
//! |-------:|-----:|--------------------------------------------------------|
//! | 0      | 8    | magic `b"TLSPRBIN"`                                    |
//! | 8      | 4    | `format_version` (u32, currently 1)                    |
//! | 12     | 1    | kind: 0 vector, 1 ensemble, 2 measurements             |
//! | 13     | 1    | model tag: 0 gaussian, 1 cdp, 2 external               |
//! | 14     | 1    | noise tag: 0 clean, 1 noisy, 2 corrected               |
//! | 15     | 1    | dtype: 1 = float64 little-endian                       |
//! | 16     | 8    | `N` (u64): signal dimension                            |
//! | 24     | 8    | `M` (u64): vector count / measurement count            |
//! | 32     | 8    | reference (u64): ensemble fingerprint                  |
//!
//! Payload:
//!
//! * vector: `N` complex values as interleaved `(re, im)` f64 pairs, `M = 1`;
//! * ensemble: `M·N` complex values, row-major (row `m` is sensing vector `m`);
//! * measurements: `M` f64 values; `N` is written as 0 and ignored on read.
//!
//! The reference field holds the ensemble's own fingerprint for ensembles,
//! the generating ensemble's fingerprint for measurements and 0 for vectors.
//! Trailing bytes after the payload are an error.
//!
//! # JSON variant
//!
//! Any path ending in `.json` uses a JSON document instead:
//!
//! ```json
//! {"format_version": 1, "kind": "ensemble", "n": 2, "m": 1,
//!  "model_tag": "gaussian", "noise_tag": "clean", "reference": 0,
//!  "data": [[[1.0, 0.0], [0.0, -1.0]]]}
//! ```
//!
//! `data` is `[[re, im], ...]` for a vector, a list of such rows for an
//! ensemble, and `[y, ...]` for measurements. Floats are printed in shortest
//! round-trip form, so both variants round-trip bit-exactly.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{CVector, MeasurementSet, ModelTag, NoiseTag, SensingEnsemble};

pub const MAGIC: &[u8; 8] = b"TLSPRBIN";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 40;
const DTYPE_F64_LE: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Vector,
    Ensemble,
    Measurements,
}

impl Kind {
    fn code(self) -> u8 {
        match self {
            Kind::Vector => 0,
            Kind::Ensemble => 1,
            Kind::Measurements => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        Ok(match c {
            0 => Kind::Vector,
            1 => Kind::Ensemble,
            2 => Kind::Measurements,
            _ => return Err(Error::Malformed(format!("unknown kind code {c}"))),
        })
    }
}

fn model_code(t: ModelTag) -> u8 {
    match t {
        ModelTag::Gaussian => 0,
        ModelTag::Cdp => 1,
        ModelTag::External => 2,
    }
}

fn model_from_code(c: u8) -> Result<ModelTag> {
    Ok(match c {
        0 => ModelTag::Gaussian,
        1 => ModelTag::Cdp,
        2 => ModelTag::External,
        _ => return Err(Error::Malformed(format!("unknown model tag {c}"))),
    })
}

fn noise_code(t: NoiseTag) -> u8 {
    match t {
        NoiseTag::Clean => 0,
        NoiseTag::Noisy => 1,
        NoiseTag::Corrected => 2,
    }
}

fn noise_from_code(c: u8) -> Result<NoiseTag> {
    Ok(match c {
        0 => NoiseTag::Clean,
        1 => NoiseTag::Noisy,
        2 => NoiseTag::Corrected,
        _ => return Err(Error::Malformed(format!("unknown noise tag {c}"))),
    })
}

/// Decoded container header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub format_version: u32,
    pub kind: Kind,
    pub model_tag: ModelTag,
    pub noise_tag: NoiseTag,
    pub n: u64,
    pub m: u64,
    pub reference: u64,
}

impl Header {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..8].copy_from_slice(MAGIC);
        out[8..12].copy_from_slice(&self.format_version.to_le_bytes());
        out[12] = self.kind.code();
        out[13] = model_code(self.model_tag);
        out[14] = noise_code(self.noise_tag);
        out[15] = DTYPE_F64_LE;
        out[16..24].copy_from_slice(&self.n.to_le_bytes());
        out[24..32].copy_from_slice(&self.m.to_le_bytes());
        out[32..40].copy_from_slice(&self.reference.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Malformed(format!(
                "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        if &bytes[0..8] != MAGIC {
            return Err(Error::Malformed("bad magic".into()));
        }
        let format_version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if format_version != FORMAT_VERSION {
            return Err(Error::Malformed(format!(
                "unsupported format version {format_version}"
            )));
        }
        if bytes[15] != DTYPE_F64_LE {
            return Err(Error::Malformed(format!("unsupported dtype {}", bytes[15])));
        }
        Ok(Header {
            format_version,
            kind: Kind::from_code(bytes[12])?,
            model_tag: model_from_code(bytes[13])?,
            noise_tag: noise_from_code(bytes[14])?,
            n: u64::from_le_bytes(bytes[16..24].try_into().unwrap()),
            m: u64::from_le_bytes(bytes[24..32].try_into().unwrap()),
            reference: u64::from_le_bytes(bytes[32..40].try_into().unwrap()),
        })
    }

    fn payload_floats(&self) -> Result<usize> {
        let count = match self.kind {
            Kind::Vector => {
                if self.m != 1 {
                    return Err(Error::Malformed(format!(
                        "vector header must have M = 1, found {}",
                        self.m
                    )));
                }
                self.n.checked_mul(2)
            }
            Kind::Ensemble => self.n.checked_mul(self.m).and_then(|v| v.checked_mul(2)),
            Kind::Measurements => Some(self.m),
        };
        count
            .and_then(|c| usize::try_from(c).ok())
            .ok_or_else(|| Error::Malformed("payload size overflows".into()))
    }
}

fn push_f64s(out: &mut Vec<u8>, values: impl IntoIterator<Item = f64>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn push_complex(out: &mut Vec<u8>, values: &[Complex64]) {
    push_f64s(out, values.iter().flat_map(|z| [z.re, z.im]));
}

fn read_payload(bytes: &[u8], header: &Header) -> Result<Vec<f64>> {
    let count = header.payload_floats()?;
    let body = &bytes[HEADER_LEN..];
    let expected = count
        .checked_mul(8)
        .ok_or_else(|| Error::Malformed("payload size overflows".into()))?;
    if body.len() != expected {
        return Err(Error::Malformed(format!(
            "header declares {expected} payload bytes, file has {}",
            body.len()
        )));
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn pairs_to_complex(values: &[f64]) -> Vec<Complex64> {
    values
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect()
}

fn expect_kind(header: &Header, kind: Kind) -> Result<()> {
    if header.kind != kind {
        return Err(Error::Malformed(format!(
            "expected a {kind:?} file, found {:?}",
            header.kind
        )));
    }
    Ok(())
}

/// Objects that can be written in both container variants.
pub trait Persist: Sized {
    fn to_bytes(&self) -> Vec<u8>;
    fn from_bytes(bytes: &[u8]) -> Result<Self>;
    fn to_json(&self) -> Result<String>;
    fn from_json(text: &str) -> Result<Self>;

    /// Writes the JSON variant when `path` ends in `.json`, binary otherwise.
    fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if is_json(path) {
            fs::write(path, self.to_json()?)?;
        } else {
            fs::write(path, self.to_bytes())?;
        }
        Ok(())
    }

    fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if is_json(path) {
            Self::from_json(&fs::read_to_string(path)?)
        } else {
            Self::from_bytes(&fs::read(path)?)
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false)
}

#[derive(Serialize, Deserialize)]
struct JsonDoc<T> {
    format_version: u32,
    kind: Kind,
    n: u64,
    m: u64,
    model_tag: ModelTag,
    noise_tag: NoiseTag,
    #[serde(default)]
    reference: u64,
    data: T,
}

impl<T> JsonDoc<T> {
    fn check(&self, kind: Kind) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Malformed(format!(
                "unsupported format version {}",
                self.format_version
            )));
        }
        if self.kind != kind {
            return Err(Error::Malformed(format!(
                "expected a {kind:?} document, found {:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

fn to_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

fn mismatch(what: &str, declared: u64, found: usize) -> Error {
    Error::Malformed(format!("{what}: header declares {declared}, data has {found}"))
}

impl Persist for CVector {
    fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            format_version: FORMAT_VERSION,
            kind: Kind::Vector,
            model_tag: ModelTag::External,
            noise_tag: NoiseTag::Clean,
            n: self.len() as u64,
            m: 1,
            reference: 0,
        };
        let mut out = header.encode().to_vec();
        push_complex(&mut out, self.as_slice());
        out
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = Header::decode(bytes)?;
        expect_kind(&header, Kind::Vector)?;
        CVector::new(pairs_to_complex(&read_payload(bytes, &header)?))
    }

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&JsonDoc {
            format_version: FORMAT_VERSION,
            kind: Kind::Vector,
            n: self.len() as u64,
            m: 1,
            model_tag: ModelTag::External,
            noise_tag: NoiseTag::Clean,
            reference: 0,
            data: to_pairs(self.as_slice()),
        })?)
    }

    fn from_json(text: &str) -> Result<Self> {
        let doc: JsonDoc<Vec<[f64; 2]>> = serde_json::from_str(text)?;
        doc.check(Kind::Vector)?;
        if doc.data.len() as u64 != doc.n {
            return Err(mismatch("vector length", doc.n, doc.data.len()));
        }
        CVector::new(from_pairs(&doc.data))
    }
}

impl Persist for SensingEnsemble {
    fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            format_version: FORMAT_VERSION,
            kind: Kind::Ensemble,
            model_tag: self.model_tag(),
            noise_tag: self.noise_tag(),
            n: self.dim() as u64,
            m: self.len() as u64,
            reference: self.fingerprint(),
        };
        let mut out = header.encode().to_vec();
        push_complex(&mut out, self.as_flat());
        out
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = Header::decode(bytes)?;
        expect_kind(&header, Kind::Ensemble)?;
        let data = pairs_to_complex(&read_payload(bytes, &header)?);
        SensingEnsemble::from_flat(
            header.n as usize,
            header.m as usize,
            data,
            header.model_tag,
            header.noise_tag,
        )
    }

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&JsonDoc {
            format_version: FORMAT_VERSION,
            kind: Kind::Ensemble,
            n: self.dim() as u64,
            m: self.len() as u64,
            model_tag: self.model_tag(),
            noise_tag: self.noise_tag(),
            reference: self.fingerprint(),
            data: self.rows().map(to_pairs).collect::<Vec<_>>(),
        })?)
    }

    fn from_json(text: &str) -> Result<Self> {
        let doc: JsonDoc<Vec<Vec<[f64; 2]>>> = serde_json::from_str(text)?;
        doc.check(Kind::Ensemble)?;
        if doc.data.len() as u64 != doc.m {
            return Err(mismatch("vector count M", doc.m, doc.data.len()));
        }
        let mut flat = Vec::with_capacity(doc.data.len() * doc.n as usize);
        for row in &doc.data {
            if row.len() as u64 != doc.n {
                return Err(mismatch("row length N", doc.n, row.len()));
            }
            flat.extend(from_pairs(row));
        }
        SensingEnsemble::from_flat(
            doc.n as usize,
            doc.m as usize,
            flat,
            doc.model_tag,
            doc.noise_tag,
        )
    }
}

impl Persist for MeasurementSet {
    fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            format_version: FORMAT_VERSION,
            kind: Kind::Measurements,
            model_tag: ModelTag::External,
            noise_tag: NoiseTag::Clean,
            n: 0,
            m: self.len() as u64,
            reference: self.ensemble_ref(),
        };
        let mut out = header.encode().to_vec();
        push_f64s(&mut out, self.values().iter().copied());
        out
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = Header::decode(bytes)?;
        expect_kind(&header, Kind::Measurements)?;
        MeasurementSet::new(read_payload(bytes, &header)?, header.reference)
    }

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&JsonDoc {
            format_version: FORMAT_VERSION,
            kind: Kind::Measurements,
            n: 0,
            m: self.len() as u64,
            model_tag: ModelTag::External,
            noise_tag: NoiseTag::Clean,
            reference: self.ensemble_ref(),
            data: self.values(),
        })?)
    }

    fn from_json(text: &str) -> Result<Self> {
        let doc: JsonDoc<Vec<f64>> = serde_json::from_str(text)?;
        doc.check(Kind::Measurements)?;
        if doc.data.len() as u64 != doc.m {
            return Err(mismatch("measurement count M", doc.m, doc.data.len()));
        }
        MeasurementSet::new(doc.data, doc.reference)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gaussian_ensemble;
    use crate::rng::{complex_gaussian_vector, Rng};
    use proptest::prelude::*;

    fn ensemble(seed: u64, n: usize, m: usize) -> SensingEnsemble {
        gaussian_ensemble(&mut Rng::new(seed), n, m, false).unwrap()
    }

    #[test]
    fn ensemble_round_trip_both_variants() {
        let e = ensemble(3, 5, 11);
        assert_eq!(SensingEnsemble::from_bytes(&e.to_bytes()).unwrap(), e);
        assert_eq!(SensingEnsemble::from_json(&e.to_json().unwrap()).unwrap(), e);
    }

    #[test]
    fn header_layout_is_fixed() {
        let e = ensemble(1, 2, 3);
        let bytes = e.to_bytes();
        assert_eq!(&bytes[0..8], b"TLSPRBIN");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(bytes[12], 1);
        assert_eq!(bytes[15], 1);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), HEADER_LEN + 2 * 3 * 16);
        let first_re = f64::from_le_bytes(bytes[40..48].try_into().unwrap());
        assert_eq!(first_re, e.row(0)[0].re);
    }

    #[test]
    fn mismatched_vector_count_is_rejected() {
        let e = ensemble(1, 2, 3);
        let mut bytes = e.to_bytes();
        bytes[24..32].copy_from_slice(&4u64.to_le_bytes());
        assert!(matches!(
            SensingEnsemble::from_bytes(&bytes),
            Err(Error::Malformed(_))
        ));

        let json = e.to_json().unwrap().replace("\"m\":3", "\"m\":4");
        assert!(SensingEnsemble::from_json(&json).is_err());
    }

    #[test]
    fn empty_vector_file_is_rejected() {
        let header = Header {
            format_version: FORMAT_VERSION,
            kind: Kind::Vector,
            model_tag: ModelTag::External,
            noise_tag: NoiseTag::Clean,
            n: 0,
            m: 1,
            reference: 0,
        };
        assert!(CVector::from_bytes(&header.encode()).is_err());
        assert!(CVector::from_bytes(&[]).is_err());
        let json = r#"{"format_version":1,"kind":"vector","n":0,"m":1,
            "model_tag":"external","noise_tag":"clean","data":[]}"#;
        assert!(CVector::from_json(json).is_err());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let v = complex_gaussian_vector(&mut Rng::new(0), 4, 1.0).unwrap();
        assert!(SensingEnsemble::from_bytes(&v.to_bytes()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let e = ensemble(5, 3, 4);
        let y = MeasurementSet::new(vec![1.0, 2.5, 0.0, 1e-300], e.fingerprint()).unwrap();
        for name in ["a.tpr", "a.json"] {
            let p = dir.path().join(name);
            e.save(&p).unwrap();
            assert_eq!(SensingEnsemble::load(&p).unwrap(), e);
            y.save(&p).unwrap();
            assert_eq!(MeasurementSet::load(&p).unwrap(), y);
        }
        assert!(matches!(
            MeasurementSet::load(dir.path().join("missing.tpr")),
            Err(Error::Io(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..6, m in 1usize..6) {
            let e = ensemble(seed, n, m);
            let back = SensingEnsemble::from_bytes(&e.to_bytes()).unwrap();
            let back_json = SensingEnsemble::from_json(&e.to_json().unwrap()).unwrap();
            for (a, b) in e.as_flat().iter().zip(back.as_flat()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
            prop_assert_eq!(&back_json, &e);

            let v = complex_gaussian_vector(&mut Rng::new(seed ^ 1), n, 1e-3).unwrap();
            prop_assert_eq!(CVector::from_json(&v.to_json().unwrap()).unwrap(), v.clone());
            prop_assert_eq!(CVector::from_bytes(&v.to_bytes()).unwrap(), v);
        }
    }
}
