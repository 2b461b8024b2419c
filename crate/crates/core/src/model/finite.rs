//! Concrete finite groups given by multiplication tables, and homomorphisms
//! between them given by generator images.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

/// Element index inside a [`ConcreteFiniteGroup`].
pub type Elem = usize;

/// A set of elements of one concrete group.
pub type ElementSet = BTreeSet<Elem>;

/// Largest explicit table accepted; balls and cosets are built on top of this.
pub const MAX_ORDER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("group order must be positive")]
    Empty,
    #[error("group order {0} exceeds the limit {MAX_ORDER}")]
    TooLarge(usize),
    #[error("multiplication table row {row} has {len} entries, expected {order}")]
    NotSquare { row: usize, len: usize, order: usize },
    #[error("table entry {entry} at ({row}, {col}) is out of range for order {order}")]
    OutOfRange { row: usize, col: usize, entry: usize, order: usize },
    #[error("table has no identity element")]
    NoIdentity,
    #[error("row or column {0} is not a permutation, so inverses fail")]
    NotLatin(usize),
    #[error("associativity fails: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: Elem, b: Elem, c: Elem },
    #[error("generator {0} is out of range")]
    BadGenerator(Elem),
    #[error("generators {0:?} do not generate the whole group")]
    NotGenerating(Vec<Elem>),
}

/// A finite group stored as a full multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteFiniteGroup {
    order: usize,
    table: Vec<Elem>,
    identity: Elem,
    inverses: Vec<Elem>,
    generators: Vec<Elem>,
}

impl ConcreteFiniteGroup {
    /// The cyclic group `Z/n` with element `k` standing for `g^k`.
    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::Empty);
        }
        if n > MAX_ORDER {
            return Err(GroupError::TooLarge(n));
        }
        let table = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a + b) % n))
            .collect();
        let inverses = (0..n).map(|a| (n - a) % n).collect();
        let generators = if n > 1 { vec![1] } else { vec![] };
        Ok(Self { order: n, table, identity: 0, inverses, generators })
    }

    /// Direct product; element `(a, b)` has index `a * |B| + b`.
    /// Generators are those of `A` followed by those of `B`.
    pub fn product(a: &Self, b: &Self) -> Result<Self, GroupError> {
        let order = a.order * b.order;
        if order > MAX_ORDER {
            return Err(GroupError::TooLarge(order));
        }
        let nb = b.order;
        let split = |x: Elem| (x / nb, x % nb);
        let mut table = Vec::with_capacity(order * order);
        for x in 0..order {
            let (xa, xb) = split(x);
            for y in 0..order {
                let (ya, yb) = split(y);
                table.push(a.mul(xa, ya) * nb + b.mul(xb, yb));
            }
        }
        let inverses = (0..order)
            .map(|x| {
                let (xa, xb) = split(x);
                a.inverse(xa) * nb + b.inverse(xb)
            })
            .collect();
        let generators = a
            .generators
            .iter()
            .map(|&g| g * nb + b.identity)
            .chain(b.generators.iter().map(|&g| a.identity * nb + g))
            .collect();
        Ok(Self { order, table, identity: a.identity * nb + b.identity, inverses, generators })
    }

    /// Builds a group from an explicit table, verifying the group axioms.
    /// Without explicit generators a generating set is chosen greedily.
    pub fn from_table(rows: &[Vec<Elem>], generators: Option<&[Elem]>) -> Result<Self, GroupError> {
        let order = rows.len();
        if order == 0 {
            return Err(GroupError::Empty);
        }
        if order > MAX_ORDER {
            return Err(GroupError::TooLarge(order));
        }
        let mut table = Vec::with_capacity(order * order);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != order {
                return Err(GroupError::NotSquare { row, len: r.len(), order });
            }
            for (col, &entry) in r.iter().enumerate() {
                if entry >= order {
                    return Err(GroupError::OutOfRange { row, col, entry, order });
                }
            }
            table.extend_from_slice(r);
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| table[e * order + x] == x && table[x * order + e] == x))
            .ok_or(GroupError::NoIdentity)?;
        // Latin square: every row and column is a permutation.
        for i in 0..order {
            let mut row_seen = vec![false; order];
            let mut col_seen = vec![false; order];
            for j in 0..order {
                let r = table[i * order + j];
                let c = table[j * order + i];
                if row_seen[r] || col_seen[c] {
                    return Err(GroupError::NotLatin(i));
                }
                row_seen[r] = true;
                col_seen[c] = true;
            }
        }
        let inverses = (0..order)
            .map(|x| (0..order).find(|&y| table[x * order + y] == identity).unwrap())
            .collect();
        let mut group = Self { order, table, identity, inverses, generators: vec![] };
        group.generators = match generators {
            Some(gens) => {
                if let Some(&bad) = gens.iter().find(|&&g| g >= order) {
                    return Err(GroupError::BadGenerator(bad));
                }
                if group.generated(gens).len() != order {
                    return Err(GroupError::NotGenerating(gens.to_vec()));
                }
                gens.to_vec()
            }
            None => group.greedy_generators(),
        };
        group.check_associative()?;
        Ok(group)
    }

    /// Light's associativity test: it suffices to check `(x s) y = x (s y)`
    /// for `s` ranging over a generating set.
    fn check_associative(&self) -> Result<(), GroupError> {
        for &s in &self.generators {
            for x in 0..self.order {
                let xs = self.mul(x, s);
                for y in 0..self.order {
                    if self.mul(xs, y) != self.mul(x, self.mul(s, y)) {
                        return Err(GroupError::NotAssociative { a: x, b: s, c: y });
                    }
                }
            }
        }
        Ok(())
    }

    fn greedy_generators(&self) -> Vec<Elem> {
        let mut gens = Vec::new();
        let mut span = self.generated(&gens);
        for x in 0..self.order {
            if !span.contains(&x) {
                gens.push(x);
                span = self.generated(&gens);
            }
        }
        gens
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a * self.order + b]
    }

    pub fn inverse(&self, a: Elem) -> Elem {
        self.inverses[a]
    }

    pub fn conjugate(&self, g: Elem, x: Elem) -> Elem {
        self.mul(self.mul(g, x), self.inverse(g))
    }

    pub fn power(&self, a: Elem, k: usize) -> Elem {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, a))
    }

    pub fn element_order(&self, a: Elem) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        self.table.chunks(self.order).map(<[Elem]>::to_vec).collect()
    }

    /// Subgroup generated by `gens`, by closure under right multiplication.
    pub fn generated(&self, gens: &[Elem]) -> ElementSet {
        let mut seen = vec![false; self.order];
        let mut queue = VecDeque::from([self.identity]);
        seen[self.identity] = true;
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order).filter(|&x| seen[x]).collect()
    }

    pub fn is_subgroup(&self, set: &ElementSet) -> bool {
        set.contains(&self.identity)
            && set.iter().all(|&a| a < self.order)
            && set
                .iter()
                .all(|&a| set.iter().all(|&b| set.contains(&self.mul(a, self.inverse(b)))))
    }

    pub fn is_cyclic(&self) -> bool {
        self.elements().any(|a| self.element_order(a) == self.order)
    }

    /// The subgroup `set` re-indexed as a group of its own, together with the
    /// inclusion map into `self`.
    pub fn subgroup(self: &Arc<Self>, set: &ElementSet) -> Option<Homomorphism> {
        if !self.is_subgroup(set) {
            return None;
        }
        let mut elems: Vec<Elem> = set.iter().copied().collect();
        // identity first so index 0 is the identity of the subgroup
        elems.sort_by_key(|&x| (x != self.identity, x));
        let index_of = |x: Elem| elems.iter().position(|&y| y == x).unwrap();
        let rows: Vec<Vec<Elem>> = elems
            .iter()
            .map(|&a| elems.iter().map(|&b| index_of(self.mul(a, b))).collect())
            .collect();
        let sub = Arc::new(ConcreteFiniteGroup::from_table(&rows, None).ok()?);
        Some(Homomorphism {
            source: sub,
            target: Arc::clone(self),
            images: elems,
            injective: true,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HomError {
    #[error("source has {expected} generators but {given} images were given")]
    ArityMismatch { expected: usize, given: usize },
    #[error("image {0} is not an element of the target")]
    ImageOutOfRange(Elem),
    #[error("generator images do not define a homomorphism (conflict at source element {0})")]
    NotHomomorphism(Elem),
}

/// A homomorphism between concrete groups, stored as a full image table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    source: Arc<ConcreteFiniteGroup>,
    target: Arc<ConcreteFiniteGroup>,
    images: Vec<Elem>,
    injective: bool,
}

impl Homomorphism {
    /// Extends generator images along the Cayley graph of the source and
    /// checks that every edge `x -> x*s` is respected.
    pub fn from_generator_images(
        source: Arc<ConcreteFiniteGroup>,
        target: Arc<ConcreteFiniteGroup>,
        gen_images: &[Elem],
    ) -> Result<Self, HomError> {
        let gens = source.generators().to_vec();
        if gens.len() != gen_images.len() {
            return Err(HomError::ArityMismatch { expected: gens.len(), given: gen_images.len() });
        }
        if let Some(&bad) = gen_images.iter().find(|&&x| x >= target.order()) {
            return Err(HomError::ImageOutOfRange(bad));
        }
        let mut images: Vec<Option<Elem>> = vec![None; source.order()];
        images[source.identity()] = Some(target.identity());
        let mut queue = VecDeque::from([source.identity()]);
        while let Some(x) = queue.pop_front() {
            let fx = images[x].unwrap();
            for (&s, &fs) in gens.iter().zip(gen_images) {
                let y = source.mul(x, s);
                let fy = target.mul(fx, fs);
                match images[y] {
                    None => {
                        images[y] = Some(fy);
                        queue.push_back(y);
                    }
                    Some(prev) if prev != fy => return Err(HomError::NotHomomorphism(y)),
                    Some(_) => {}
                }
            }
        }
        let images: Vec<Elem> = images.into_iter().map(|x| x.expect("generators span")).collect();
        let injective = images.iter().collect::<BTreeSet<_>>().len() == images.len();
        Ok(Self { source, target, images, injective })
    }

    /// The unique-up-to-image embedding of a cyclic group into a cyclic group
    /// whose order it divides; trivial sources map trivially.
    pub fn canonical_cyclic(
        source: Arc<ConcreteFiniteGroup>,
        target: Arc<ConcreteFiniteGroup>,
    ) -> Option<Self> {
        let m = source.order();
        let n = target.order();
        if m == 1 {
            let images = vec![target.identity()];
            return Some(Self { source, target, images, injective: true });
        }
        if !n.is_multiple_of(m) || source.generators().len() != 1 || target.generators().len() != 1 {
            return None;
        }
        let g = source.generators()[0];
        let h = target.generators()[0];
        if source.element_order(g) != m || target.element_order(h) != n {
            return None;
        }
        let image = target.power(h, n / m);
        Self::from_generator_images(source, target, &[image]).ok()
    }

    pub fn source(&self) -> &Arc<ConcreteFiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ConcreteFiniteGroup> {
        &self.target
    }

    pub fn apply(&self, x: Elem) -> Elem {
        self.images[x]
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    /// Image of the whole source, computed element by element.
    pub fn image(&self) -> ElementSet {
        self.images.iter().copied().collect()
    }

    /// Preimage of `y` under an injective map.
    pub fn preimage(&self, y: Elem) -> Option<Elem> {
        self.images.iter().position(|&x| x == y)
    }

    pub fn compose(&self, after: &Homomorphism) -> Option<Homomorphism> {
        if self.target != after.source {
            return None;
        }
        let images: Vec<Elem> = self.images.iter().map(|&x| after.apply(x)).collect();
        let injective = images.iter().collect::<BTreeSet<_>>().len() == images.len();
        Some(Homomorphism {
            source: Arc::clone(&self.source),
            target: Arc::clone(&after.target),
            images,
            injective,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn klein() -> Arc<ConcreteFiniteGroup> {
        let z2 = ConcreteFiniteGroup::cyclic(2).unwrap();
        Arc::new(ConcreteFiniteGroup::product(&z2, &z2).unwrap())
    }

    #[test]
    fn cyclic_basics() {
        let z6 = ConcreteFiniteGroup::cyclic(6).unwrap();
        assert_eq!(z6.mul(4, 5), 3);
        assert_eq!(z6.inverse(2), 4);
        assert_eq!(z6.element_order(2), 3);
        assert!(z6.is_cyclic());
        assert_eq!(z6.generated(&[3]), ElementSet::from([0, 3]));
    }

    #[test]
    fn product_indexing() {
        let k = klein();
        assert_eq!(k.order(), 4);
        assert_eq!(k.generators(), &[2, 1]);
        assert!(!k.is_cyclic());
        assert_eq!(k.mul(3, 1), 2);
    }

    #[test]
    fn table_validation() {
        let ok = vec![vec![0, 1], vec![1, 0]];
        assert!(ConcreteFiniteGroup::from_table(&ok, None).is_ok());
        let no_identity = vec![vec![0, 0], vec![1, 1]];
        assert!(matches!(
            ConcreteFiniteGroup::from_table(&no_identity, None),
            Err(GroupError::NoIdentity) | Err(GroupError::NotLatin(_))
        ));
        let ragged = vec![vec![0, 1], vec![1]];
        assert!(matches!(
            ConcreteFiniteGroup::from_table(&ragged, None),
            Err(GroupError::NotSquare { .. })
        ));
    }

    #[test]
    fn non_associative_loop_is_rejected() {
        // The smallest non-associative loop (order 5) with identity 0.
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(
            ConcreteFiniteGroup::from_table(&rows, None),
            Err(GroupError::NotAssociative { .. })
        ));
    }

    #[test]
    fn symmetric_group_from_table() {
        let s3 = s3_table();
        let g = ConcreteFiniteGroup::from_table(&s3, None).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_cyclic());
        assert_eq!(g.generated(g.generators()).len(), 6);
    }

    pub(crate) fn s3_table() -> Vec<Vec<Elem>> {
        // permutations of {0,1,2} in lexicographic order, composed as (p*q)(i) = p(q(i))
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let idx = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
        perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| idx([p[q[0]], p[q[1]], p[q[2]]]))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn homomorphism_from_generators() {
        let z2 = Arc::new(ConcreteFiniteGroup::cyclic(2).unwrap());
        let z4 = Arc::new(ConcreteFiniteGroup::cyclic(4).unwrap());
        let h = Homomorphism::from_generator_images(z2.clone(), z4.clone(), &[2]).unwrap();
        assert!(h.is_injective());
        assert_eq!(h.image(), ElementSet::from([0, 2]));
        assert_eq!(
            Homomorphism::from_generator_images(z2.clone(), z4.clone(), &[1]),
            Err(HomError::NotHomomorphism(0))
        );
        let triv = Homomorphism::from_generator_images(z4.clone(), z2.clone(), &[0]).unwrap();
        assert!(!triv.is_injective());
    }

    #[test]
    fn canonical_cyclic_embedding() {
        let z2 = Arc::new(ConcreteFiniteGroup::cyclic(2).unwrap());
        let z6 = Arc::new(ConcreteFiniteGroup::cyclic(6).unwrap());
        let h = Homomorphism::canonical_cyclic(z2, z6.clone()).unwrap();
        assert_eq!(h.image(), ElementSet::from([0, 3]));
        let z4 = Arc::new(ConcreteFiniteGroup::cyclic(4).unwrap());
        assert!(Homomorphism::canonical_cyclic(z4, z6).is_none());
    }

    #[test]
    fn subgroup_inclusion() {
        let k = klein();
        let inc = k.subgroup(&ElementSet::from([0, 1])).unwrap();
        assert_eq!(inc.source().order(), 2);
        assert_eq!(inc.image(), ElementSet::from([0, 1]));
        assert!(k.subgroup(&ElementSet::from([0, 1, 2])).is_none());
    }
}
