use crate::extnat::ExtNat;
use crate::model::{GroupExpr, Homomorphism};

/// A boundary component with its fundamental group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    pub name: String,
    pub pi1: GroupExpr,
    pub pi1_injective: bool,
    /// Declared space-level `cat_Am` bound.
    pub cat_am: Option<ExtNat>,
}

/// A compact connected manifold piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub name: String,
    pub pi1: GroupExpr,
    pub cat_am: Option<ExtNat>,
    pub boundaries: Vec<Boundary>,
}

/// Boundary position `(piece index, boundary index)`.
pub type BoundaryRef = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing {
    pub plus: BoundaryRef,
    pub minus: BoundaryRef,
}

/// Pieces glued pairwise along boundary components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingSetup {
    pub name: String,
    pub n: u32,
    pub pieces: Vec<Piece>,
    pub pairings: Vec<Pairing>,
    pub connected_asserted: bool,
}

impl GluingSetup {
    pub fn boundary(&self, r: BoundaryRef) -> &Boundary {
        &self.pieces[r.0].boundaries[r.1]
    }

    /// Boundary components of the glued manifold: those not used by a pairing.
    pub fn free_boundaries(&self) -> Vec<BoundaryRef> {
        let used: Vec<BoundaryRef> = self.pairings.iter().flat_map(|p| [p.plus, p.minus]).collect();
        self.pieces
            .iter()
            .enumerate()
            .flat_map(|(j, p)| (0..p.boundaries.len()).map(move |b| (j, b)))
            .filter(|r| !used.contains(r))
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.free_boundaries().is_empty()
    }
}

/// A manifold with nonempty boundary, doubled along a self-homeomorphism of
/// its boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleSetup {
    pub name: String,
    pub n: u32,
    pub manifold: Piece,
    /// Whether the gluing map is a nontrivial twist; bounds never read it.
    pub twist: bool,
}

/// Concrete maps `M -> W`, `-M -> W`, `dM -> M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchedMaps {
    pub m_in_w: Homomorphism,
    pub neg_m_in_w: Homomorphism,
    pub dm_in_m: Homomorphism,
}

/// `d` copies of `W` glued cyclically along copies of `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchedSetup {
    pub name: String,
    pub n: u32,
    pub d: Option<u32>,
    pub w: GroupExpr,
    pub m: GroupExpr,
    pub dm: GroupExpr,
    pub pi1_injective: bool,
    pub intersection_asserted: bool,
    pub maps: Option<BranchedMaps>,
}
