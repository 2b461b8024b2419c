//! Declared facts about group atoms and family membership.

pub mod membership;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::extnat::ExtNat;

pub use membership::{lookup_cat, membership, profile, Membership, Profile};

/// Three-valued truth for properties that may be undecided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Tri {
    Yes,
    No,
    #[default]
    Unknown,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::Yes
        } else {
            Tri::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Tri::Yes
    }

    pub fn is_no(self) -> bool {
        self == Tri::No
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::Yes => "yes",
            Tri::No => "no",
            Tri::Unknown => "unknown",
        })
    }
}

impl FromStr for Tri {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yes" => Ok(Tri::Yes),
            "no" => Ok(Tri::No),
            "unknown" => Ok(Tri::Unknown),
            _ => Err(format!("expected yes, no or unknown, found {s:?}")),
        }
    }
}

/// A family of subgroups, evaluated as a global predicate on groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Trivial,
    Finite,
    Amenable,
    Custom(String),
}

impl Family {
    pub fn builtin(name: &str) -> Option<Family> {
        match name {
            "tr" => Some(Family::Trivial),
            "fin" => Some(Family::Finite),
            "am" => Some(Family::Amenable),
            _ => None,
        }
    }

    /// Parses a built-in short name or treats anything else as a custom name.
    pub fn parse(name: &str) -> Family {
        Family::builtin(name).unwrap_or_else(|| Family::Custom(name.to_string()))
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, Family::Custom(_))
    }

    /// Built-in families are closed under finite direct products.
    pub fn closed_under_products(&self) -> bool {
        self.is_builtin()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Trivial => f.write_str("tr"),
            Family::Finite => f.write_str("fin"),
            Family::Amenable => f.write_str("am"),
            Family::Custom(n) => f.write_str(n),
        }
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A user-declared family: an opaque predicate driven by per-atom
/// membership assertions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CustomFamily {
    pub name: String,
    /// Declared closure statement, kept verbatim for the trace.
    pub closure: String,
    /// A built-in family known to be contained in this one.
    pub contains: Option<Family>,
}

/// Declared upper bounds and flags for one group atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactSheet {
    pub name: String,
    pub gd_ub: ExtNat,
    pub cd_ub: ExtNat,
    pub tc_ub: ExtNat,
    pub cat_ub: BTreeMap<Family, ExtNat>,
    pub amenable: Tri,
    pub finite: Tri,
    pub trivial: bool,
    pub order: Option<u64>,
    /// Membership assertions for custom families.
    pub members: BTreeMap<String, Tri>,
    /// Citation per fact key (`gd`, `cat[am]`, `amenable`, ...).
    pub provenance: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("inconsistent facts for {name}: {reason}")]
pub struct FactConflict {
    pub name: String,
    pub reason: String,
}

impl FactSheet {
    pub fn new(name: impl Into<String>) -> Self {
        FactSheet {
            name: name.into(),
            gd_ub: ExtNat::Infinity,
            cd_ub: ExtNat::Infinity,
            tc_ub: ExtNat::Infinity,
            cat_ub: BTreeMap::new(),
            amenable: Tri::Unknown,
            finite: Tri::Unknown,
            trivial: false,
            order: None,
            members: BTreeMap::new(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn provenance_of(&self, key: &str) -> &str {
        self.provenance.get(key).map(String::as_str).unwrap_or("declared")
    }

    /// Declared `cat_F` bound, or infinity.
    pub fn cat_for(&self, family: &Family) -> ExtNat {
        self.cat_ub.get(family).copied().unwrap_or(ExtNat::Infinity)
    }

    fn derive(&mut self, key: &str, why: &str) {
        self.provenance.entry(key.to_string()).or_insert_with(|| why.to_string());
    }

    fn tighten(slot: &mut ExtNat, v: ExtNat) -> bool {
        if v < *slot {
            *slot = v;
            true
        } else {
            false
        }
    }

    /// Saturates the closure rules and rejects contradictory declarations.
    /// Running it on its own output changes nothing.
    pub fn closed(mut self) -> Result<FactSheet, FactConflict> {
        let name = self.name.clone();
        let conflict = |reason: &str| FactConflict { name: name.clone(), reason: reason.to_string() };
        if self.order == Some(0) {
            return Err(conflict("order 0 is not a group order"));
        }
        if self.order == Some(1) && !self.trivial {
            self.trivial = true;
            self.derive("trivial", "closure: order 1");
        }
        if self.trivial {
            if self.amenable.is_no() || self.finite.is_no() {
                return Err(conflict("declared trivial but not finite or not amenable"));
            }
            if matches!(self.order, Some(n) if n > 1) {
                return Err(conflict("declared trivial with order > 1"));
            }
            if self.members.values().any(|t| t.is_no()) {
                return Err(conflict("declared trivial but excluded from a family"));
            }
            let why = "closure: trivial group";
            self.order = Some(1);
            self.derive("order", why);
            if self.finite != Tri::Yes {
                self.finite = Tri::Yes;
                self.derive("finite", why);
            }
            for (slot, key) in [(&mut self.gd_ub, "gd"), (&mut self.cd_ub, "cd"), (&mut self.tc_ub, "tc")] {
                if Self::tighten(slot, ExtNat::ZERO) {
                    self.provenance.insert(key.to_string(), why.to_string());
                }
            }
        }
        if matches!(self.order, Some(n) if n > 1) {
            if self.finite.is_no() {
                return Err(conflict("finite order declared for an infinite group"));
            }
            if self.finite != Tri::Yes {
                self.finite = Tri::Yes;
                self.derive("finite", "closure: finite order declared");
            }
        }
        if self.finite.is_yes() {
            if self.amenable.is_no() {
                return Err(conflict("finite but declared non-amenable"));
            }
            if self.amenable != Tri::Yes {
                self.amenable = Tri::Yes;
                self.derive("amenable", "closure: finite groups are amenable");
            }
        }
        if self.amenable.is_no() && self.finite == Tri::Unknown {
            self.finite = Tri::No;
            self.derive("finite", "closure: non-amenable groups are infinite");
        }
        Ok(self)
    }
}
