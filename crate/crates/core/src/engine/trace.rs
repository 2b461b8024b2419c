//! Derivation trees and their replay.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::extnat::{self, ExtNat};

/// How a node's value follows from its premises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    /// The value is read off a fact, a convention or a constant.
    Leaf,
    /// Supremum of the premises (0 for none).
    Max,
    /// Sum of the premises (0 for none).
    Sum,
    /// 1, provided every premise is 0.
    OneIfAllZero,
    /// Equal to the single premise.
    Same,
}

/// Rule identifiers and the combinator each one replays with.
pub const RULES: &[(&str, Combine)] = &[
    ("fact", Combine::Leaf),
    ("member", Combine::Leaf),
    ("trivial", Combine::Leaf),
    ("no-bound", Combine::Leaf),
    ("constant", Combine::Leaf),
    ("sup", Combine::Max),
    ("gd-combination", Combine::Max),
    ("gog-max", Combine::Max),
    ("max-form", Combine::Max),
    ("max-arm", Combine::Max),
    ("polygon-max", Combine::Max),
    ("tc-combination", Combine::Max),
    ("sum", Combine::Sum),
    ("gog-sum", Combine::Sum),
    ("sum-form", Combine::Sum),
    ("sum-arm", Combine::Sum),
    ("product-sum", Combine::Sum),
    ("gluing-sum", Combine::Sum),
    ("vertex-members", Combine::OneIfAllZero),
    ("selection", Combine::Same),
    ("definition", Combine::Same),
    ("cat-le-gd", Combine::Same),
    ("cat-tr-eq-cd", Combine::Same),
    ("family-inclusion", Combine::Same),
    ("tc-le-cd-square", Combine::Same),
    ("space-le-group", Combine::Same),
];

pub fn combinator(rule: &str) -> Option<Combine> {
    RULES.iter().find(|(r, _)| *r == rule).map(|(_, c)| *c)
}

/// One inference step. Assumptions of the whole subtree are collected at
/// every node, so the root carries the full assumption set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationNode {
    pub rule: String,
    pub cite: String,
    pub value: ExtNat,
    pub assumptions: Vec<String>,
    pub premises: Vec<DerivationNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("node `{rule}` ({cite}) records {recorded} but its premises give {computed}")]
    Mismatch { rule: String, cite: String, recorded: ExtNat, computed: ExtNat },
    #[error("node `{rule}` ({cite}) has premises that do not fit its rule")]
    Shape { rule: String, cite: String },
    #[error("node `{rule}` ({cite}) does not carry the assumptions of its premises")]
    Assumptions { rule: String, cite: String },
    #[error("finite overflow while replaying `{0}`")]
    Overflow(String),
}

impl DerivationNode {
    pub fn leaf(rule: &str, cite: impl Into<String>, value: ExtNat) -> Self {
        DerivationNode { rule: rule.into(), cite: cite.into(), value, assumptions: vec![], premises: vec![] }
    }

    pub fn constant(k: u32, what: &str) -> Self {
        Self::leaf("constant", what, ExtNat::Finite(k))
    }

    /// Builds an inner node, computing its value from the premises.
    pub fn combine(rule: &str, cite: impl Into<String>, premises: Vec<DerivationNode>) -> Result<Self, extnat::Overflow> {
        let cite = cite.into();
        let value = match combinator(rule).unwrap_or_else(|| panic!("unregistered rule {rule}")) {
            Combine::Leaf => panic!("leaf rule {rule} used as inner node"),
            Combine::Max => extnat::supremum(premises.iter().map(|p| p.value)),
            Combine::Sum => extnat::sum(premises.iter().map(|p| p.value))?,
            Combine::OneIfAllZero => ExtNat::ONE,
            Combine::Same => premises[0].value,
        };
        let mut node = DerivationNode { rule: rule.into(), cite, value, assumptions: vec![], premises };
        node.assumptions = node.collect_assumptions(&[]);
        Ok(node)
    }

    /// Adds assumptions made at this node.
    pub fn assuming(mut self, extra: impl IntoIterator<Item = String>) -> Self {
        let extra: Vec<String> = extra.into_iter().collect();
        self.assumptions = self.collect_assumptions(&extra);
        self
    }

    fn collect_assumptions(&self, extra: &[String]) -> Vec<String> {
        let mut set: BTreeSet<String> = self.assumptions.iter().cloned().collect();
        set.extend(extra.iter().cloned());
        for p in &self.premises {
            set.extend(p.assumptions.iter().cloned());
        }
        set.into_iter().collect()
    }

    /// Recomputes every inner node bottom-up and checks the recorded values
    /// and assumption sets.
    pub fn replay(&self) -> Result<ExtNat, ReplayError> {
        let err_shape = || ReplayError::Shape { rule: self.rule.clone(), cite: self.cite.clone() };
        let c = combinator(&self.rule).ok_or_else(|| ReplayError::UnknownRule(self.rule.clone()))?;
        let values = self.premises.iter().map(|p| p.replay()).collect::<Result<Vec<_>, _>>()?;
        let computed = match c {
            Combine::Leaf => {
                if !values.is_empty() {
                    return Err(err_shape());
                }
                self.value
            }
            Combine::Max => extnat::supremum(values),
            Combine::Sum => extnat::sum(values).map_err(|_| ReplayError::Overflow(self.rule.clone()))?,
            Combine::OneIfAllZero => {
                if values.iter().any(|v| *v != ExtNat::ZERO) {
                    return Err(err_shape());
                }
                ExtNat::ONE
            }
            Combine::Same => match values.as_slice() {
                [v] => *v,
                _ => return Err(err_shape()),
            },
        };
        if computed != self.value {
            return Err(ReplayError::Mismatch {
                rule: self.rule.clone(),
                cite: self.cite.clone(),
                recorded: self.value,
                computed,
            });
        }
        let mine: BTreeSet<&String> = self.assumptions.iter().collect();
        if self.premises.iter().flat_map(|p| &p.assumptions).any(|a| !mine.contains(a)) {
            return Err(ReplayError::Assumptions { rule: self.rule.clone(), cite: self.cite.clone() });
        }
        Ok(computed)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Self::size).sum::<usize>()
    }

    /// Depth-first search for the first node satisfying `pred`.
    pub fn find(&self, pred: &impl Fn(&DerivationNode) -> bool) -> Option<&DerivationNode> {
        if pred(self) {
            return Some(self);
        }
        self.premises.iter().find_map(|p| p.find(pred))
    }

    /// Indented text rendering, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        use std::fmt::Write;
        let _ = writeln!(out, "{:indent$}{} = {}  [{}: {}]", "", self.rule_label(), self.value, self.rule, self.cite, indent = 2 * depth);
        for p in &self.premises {
            p.render_into(out, depth + 1);
        }
    }

    fn rule_label(&self) -> &str {
        match combinator(&self.rule) {
            Some(Combine::Leaf) => "leaf",
            Some(Combine::Max) => "max",
            Some(Combine::Sum) => "sum",
            Some(Combine::OneIfAllZero) => "one",
            _ => "via",
        }
    }
}
