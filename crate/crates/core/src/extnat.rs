//! Extended natural numbers `ℕ ∪ {∞}`.
//!
//! Every bound the engine produces lives here. Unknown quantities are
//! represented by [`ExtNat::Infinity`], which is always a valid upper bound.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A natural number below `2^32` or infinity.
///
/// The derived ordering places every finite value below `Infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtNat {
    Finite(u32),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("finite bound overflow: {0} + {1} exceeds 2^32-1")]
pub struct Overflow(pub u32, pub u32);

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Finite(0);
    pub const ONE: ExtNat = ExtNat::Finite(1);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            ExtNat::Finite(v) => Some(v),
            ExtNat::Infinity => None,
        }
    }

    /// Addition with `Infinity` absorbing. Finite overflow is an error.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: ExtNat) -> Result<ExtNat, Overflow> {
        match (self, other) {
            (ExtNat::Finite(a), ExtNat::Finite(b)) => a
                .checked_add(b)
                .map(ExtNat::Finite)
                .ok_or(Overflow(a, b)),
            _ => Ok(ExtNat::Infinity),
        }
    }

    pub fn add_const(self, k: u32) -> Result<ExtNat, Overflow> {
        self.add(ExtNat::Finite(k))
    }

    /// Literature normalisation: finite values shifted by one, infinity kept.
    pub fn plus_one_saturating(self) -> ExtNat {
        match self {
            ExtNat::Finite(v) => ExtNat::Finite(v.saturating_add(1)),
            ExtNat::Infinity => ExtNat::Infinity,
        }
    }
}

impl Default for ExtNat {
    fn default() -> Self {
        ExtNat::ZERO
    }
}

impl From<u32> for ExtNat {
    fn from(v: u32) -> Self {
        ExtNat::Finite(v)
    }
}

/// Maximum of a list; the supremum of the empty list is 0.
pub fn supremum<I: IntoIterator<Item = ExtNat>>(xs: I) -> ExtNat {
    xs.into_iter().max().unwrap_or(ExtNat::ZERO)
}

/// Sum of a list; the empty sum is 0.
pub fn sum<I: IntoIterator<Item = ExtNat>>(xs: I) -> Result<ExtNat, Overflow> {
    xs.into_iter().try_fold(ExtNat::ZERO, ExtNat::add)
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(v) => write!(f, "{v}"),
            ExtNat::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid extended natural {0:?}: expected a non-negative integer below 2^32 or \"inf\"")]
pub struct ParseExtNatError(pub String);

impl FromStr for ExtNat {
    type Err = ParseExtNatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "∞" => Ok(ExtNat::Infinity),
            _ => s
                .parse::<u32>()
                .map(ExtNat::Finite)
                .map_err(|_| ParseExtNatError(s.to_string())),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtNat::Finite(v) => serializer.serialize_u32(*v),
            ExtNat::Infinity => serializer.serialize_str("inf"),
        }
    }
}

struct ExtNatVisitor;

impl<'de> Visitor<'de> for ExtNatVisitor {
    type Value = ExtNat;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a non-negative integer below 2^32 or the string \"inf\"")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtNat, E> {
        u32::try_from(v)
            .map(ExtNat::Finite)
            .map_err(|_| E::custom(format!("{v} exceeds 2^32-1")))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtNat, E> {
        u32::try_from(v)
            .map(ExtNat::Finite)
            .map_err(|_| E::custom(format!("{v} is not a valid extended natural")))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtNat, E> {
        if v == "inf" {
            Ok(ExtNat::Infinity)
        } else {
            Err(E::custom(format!("unexpected string {v:?}")))
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ExtNatVisitor)
    }
}
