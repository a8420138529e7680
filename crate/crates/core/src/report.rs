//! JSON report types.

use serde::{Deserialize, Serialize};

use crate::expr::C64;

/// A complex number as `{re, im}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

impl From<Complex> for C64 {
    fn from(z: Complex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// `#[serde(with)]` adapter for a single complex field.
pub mod complex {
    use super::*;

    pub fn serialize<S: serde::Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        Complex::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Complex::deserialize(d).map(C64::from)
    }
}

/// `#[serde(with)]` adapter for a list of complex numbers.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| Complex::from(*z)))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<Complex>::deserialize(d)?.into_iter().map(C64::from).collect())
    }
}
