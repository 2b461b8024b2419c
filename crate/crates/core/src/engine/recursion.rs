//! The dimension-by-dimension recursion over a selection set `I`, on plain
//! numbers: per dimension, the `cat` and `gd` bounds of the orbit stabilizers.

use std::collections::BTreeSet;

use crate::extnat::{self, ExtNat, Overflow};

/// Stabilizer bounds of the orbit representatives in one dimension.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Level {
    pub cat: Vec<ExtNat>,
    pub gd: Vec<ExtNat>,
}

impl Level {
    /// `sup(gd + i)` over the level.
    pub fn max_term(&self, i: u32) -> Result<ExtNat, Overflow> {
        let shifted = self.gd.iter().map(|g| g.add_const(i)).collect::<Result<Vec<_>, _>>()?;
        Ok(extnat::supremum(shifted))
    }

    /// `sup(cat + 1)` over the level.
    pub fn sum_term(&self) -> Result<ExtNat, Overflow> {
        let shifted = self.cat.iter().map(|c| c.add_const(1)).collect::<Result<Vec<_>, _>>()?;
        Ok(extnat::supremum(shifted))
    }
}

/// A subset of `{1, ..., n}`.
pub type SelectionSet = BTreeSet<usize>;

fn step(prev: ExtNat, level: &Level, i: usize, max_arm: bool) -> Result<ExtNat, Overflow> {
    if max_arm {
        Ok(prev.max(level.max_term(i as u32)?))
    } else {
        prev.add(level.sum_term()?)
    }
}

/// `d_n` for the given selection set; `levels[0]` holds the 0-cells.
pub fn evaluate(levels: &[Level], selection: &SelectionSet) -> Result<ExtNat, Overflow> {
    let Some(first) = levels.first() else { return Ok(ExtNat::ZERO) };
    let mut d = extnat::supremum(first.cat.iter().copied());
    for (i, level) in levels.iter().enumerate().skip(1) {
        d = step(d, level, i, selection.contains(&i))?;
    }
    Ok(d)
}

/// Greedy choice per dimension; ties go to the max arm. Optimal because
/// both arms are nondecreasing in `d_{i-1}`.
pub fn optimize(levels: &[Level]) -> Result<(SelectionSet, ExtNat), Overflow> {
    let mut selection = SelectionSet::new();
    let Some(first) = levels.first() else { return Ok((selection, ExtNat::ZERO)) };
    let mut d = extnat::supremum(first.cat.iter().copied());
    for (i, level) in levels.iter().enumerate().skip(1) {
        let by_max = step(d, level, i, true)?;
        let by_sum = step(d, level, i, false)?;
        if by_max <= by_sum {
            selection.insert(i);
            d = by_max;
        } else {
            d = by_sum;
        }
    }
    Ok((selection, d))
}

/// Closed form with every dimension selected.
pub fn max_form(levels: &[Level]) -> Result<ExtNat, Overflow> {
    let Some(first) = levels.first() else { return Ok(ExtNat::ZERO) };
    let mut terms = vec![extnat::supremum(first.cat.iter().copied())];
    for (i, level) in levels.iter().enumerate().skip(1) {
        terms.push(level.max_term(i as u32)?);
    }
    Ok(extnat::supremum(terms))
}

/// Closed form with no dimension selected.
pub fn sum_form(levels: &[Level]) -> Result<ExtNat, Overflow> {
    let Some(first) = levels.first() else { return Ok(ExtNat::ZERO) };
    let mut terms = vec![extnat::supremum(first.cat.iter().copied())];
    for level in &levels[1..] {
        terms.push(level.sum_term()?);
    }
    extnat::sum(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(x: u32) -> ExtNat {
        ExtNat::Finite(x)
    }

    #[test]
    fn finite_amalgam_levels() {
        // Z/4 and Z/6 over Z/2 with the finite family
        let levels = vec![
            Level { cat: vec![f(0), f(0)], gd: vec![ExtNat::Infinity, ExtNat::Infinity] },
            Level { cat: vec![f(0)], gd: vec![ExtNat::Infinity] },
        ];
        assert_eq!(evaluate(&levels, &SelectionSet::from([1])), Ok(ExtNat::Infinity));
        assert_eq!(evaluate(&levels, &SelectionSet::new()), Ok(f(1)));
        assert_eq!(optimize(&levels), Ok((SelectionSet::new(), f(1))));
    }

    #[test]
    fn ties_prefer_the_max_arm() {
        let levels = vec![
            Level { cat: vec![f(1), f(1)], gd: vec![f(1), f(1)] },
            Level { cat: vec![f(0)], gd: vec![f(1)] },
        ];
        assert_eq!(optimize(&levels), Ok((SelectionSet::from([1]), f(2))));
    }

    #[test]
    fn empty_levels_contribute_nothing() {
        let levels = vec![Level { cat: vec![f(3)], gd: vec![f(3)] }, Level::default(), Level::default()];
        assert_eq!(max_form(&levels), Ok(f(3)));
        assert_eq!(sum_form(&levels), Ok(f(3)));
        assert_eq!(evaluate(&[], &SelectionSet::new()), Ok(ExtNat::ZERO));
    }
}
