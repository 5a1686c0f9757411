//! JSON map descriptions and content digests.

use crate::error::{QxError, Result};
use crate::henon::HenonMap;
use crate::poly::Polynomial;
use crate::scalar::{c64, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Wire form of a Hénon map: coefficients low-to-high as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDescription {
    pub p_coeffs: Vec<[f64; 2]>,
    pub a: [f64; 2],
    #[serde(default)]
    pub real: bool,
}

/// Wire form of a one-variable polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyDescription {
    pub coeffs: Vec<[f64; 2]>,
}

fn to_pairs(cs: &[C64]) -> Vec<[f64; 2]> {
    cs.iter().map(|c| [c.re, c.im]).collect()
}

fn from_pairs(cs: &[[f64; 2]]) -> Vec<C64> {
    cs.iter().map(|c| c64(c[0], c[1])).collect()
}

impl MapDescription {
    pub fn from_map(map: &HenonMap) -> Self {
        Self { p_coeffs: to_pairs(map.p().coeffs()), a: [map.a().re, map.a().im], real: map.is_real() }
    }

    pub fn build(&self) -> Result<HenonMap> {
        let map = HenonMap::new(from_pairs(&self.p_coeffs), c64(self.a[0], self.a[1]))?;
        if self.real && !map.is_real() {
            return Err(QxError::InvalidMap("real flag set but parameters have imaginary parts".into()));
        }
        Ok(map)
    }
}

impl PolyDescription {
    pub fn from_poly(p: &Polynomial) -> Self {
        Self { coeffs: to_pairs(p.coeffs()) }
    }

    pub fn build(&self) -> Polynomial {
        Polynomial::new(from_pairs(&self.coeffs))
    }
}

pub fn parse_map(json: &str) -> Result<HenonMap> {
    serde_json::from_str::<MapDescription>(json)?.build()
}

/// Hex SHA-256 of the parameters' bit patterns, prefixed by a kind tag.
fn digest_of(kind: &str, coeffs: &[C64], a: Option<C64>) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_bytes());
    for c in coeffs {
        h.update(c.re.to_bits().to_le_bytes());
        h.update(c.im.to_bits().to_le_bytes());
    }
    if let Some(a) = a {
        h.update(b"a");
        h.update(a.re.to_bits().to_le_bytes());
        h.update(a.im.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub fn map_digest(map: &HenonMap) -> String {
    digest_of("henon", map.p().coeffs(), Some(map.a()))
}

pub fn poly_digest(p: &Polynomial) -> String {
    digest_of("poly", p.coeffs(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_roundtrip_and_digest() {
        let json = r#"{"p_coeffs": [[-6, 0], [0, 0], [1, 0]], "a": [0.1, 0], "real": true}"#;
        let map = parse_map(json).unwrap();
        assert_eq!(map, HenonMap::quadratic(-6.0, 0.1));
        let back = MapDescription::from_map(&map).build().unwrap();
        assert_eq!(map_digest(&map), map_digest(&back));
        assert_ne!(map_digest(&map), map_digest(&HenonMap::quadratic(-6.0, 0.2)));
    }

    #[test]
    fn rejects_false_real_flag() {
        let json = r#"{"p_coeffs": [[0, 1], [0, 0], [1, 0]], "a": [0.1, 0], "real": true}"#;
        assert!(parse_map(json).is_err());
    }
}
