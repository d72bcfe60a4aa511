//! Symbolic abelian groups given as finite lists of blocks, their elements,
//! numerical invariants and finite truncations.

mod element;
mod invariants;
mod truncate;

pub use element::{Coord, Element, Order};
pub use invariants::{
    h_descriptor, h_equal, invariants, nm_type, Count, ExtNat, HDescriptor, HElement, Invariants,
    NMType, PrimeData, PrimeSelector,
};
pub use truncate::{truncate, TfTruncation, Truncation};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::exactnum::{Int, Prime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("duplicate block name `{0}`")]
    DuplicateName(String),
    #[error("more than one free block of infinite rank")]
    MultipleFreeOmega,
    #[error("more than one Prüfer block for prime {0}")]
    DuplicatePrufer(u64),
    #[error("block `{0}`: exponents, multiplicities and ranks must be at least 1")]
    Degenerate(String),
    #[error("a group needs at least one block")]
    Empty,
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("coordinate {block}.{copy} is out of range")]
    CoordOutOfRange { block: String, copy: u64 },
    #[error("coefficient {value} is not valid at {block}.{copy}")]
    BadCoefficient { block: String, copy: u64, value: String },
    #[error("the group does not have finite torsion-free rank")]
    NotFtfr,
    #[error("descriptors differ")]
    DescriptorMismatch,
}

/// Finite multiplicity `n >= 1` or countably many copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mult {
    Finite(u64),
    Omega,
}

impl Mult {
    pub fn is_omega(self) -> bool {
        self == Mult::Omega
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Mult::Finite(n) => Some(n),
            Mult::Omega => None,
        }
    }

    /// Whether `copy` is a valid copy index.
    pub fn contains(self, copy: u64) -> bool {
        match self {
            Mult::Finite(n) => copy < n,
            Mult::Omega => true,
        }
    }
}

impl fmt::Display for Mult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mult::Finite(n) => write!(f, "{n}"),
            Mult::Omega => f.write_str("omega"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// `mult` copies of `Z(p^k)`.
    Cyclic { p: Prime, k: u32, mult: Mult },
    /// Copies of `Z(p^∞)`.
    Prufer { p: Prime, copies: Mult },
    /// `rank` copies of the rationals with `pi`-number denominators.
    TorsionFree { pi: BTreeSet<Prime>, rank: u64 },
    /// Free abelian of countable rank.
    FreeOmega,
}

impl BlockKind {
    pub fn mult(&self) -> Mult {
        match self {
            BlockKind::Cyclic { mult, .. } => *mult,
            BlockKind::Prufer { copies, .. } => *copies,
            BlockKind::TorsionFree { rank, .. } => Mult::Finite(*rank),
            BlockKind::FreeOmega => Mult::Omega,
        }
    }

    pub fn prime(&self) -> Option<Prime> {
        match self {
            BlockKind::Cyclic { p, .. } | BlockKind::Prufer { p, .. } => Some(*p),
            _ => None,
        }
    }

    pub fn is_torsion(&self) -> bool {
        matches!(self, BlockKind::Cyclic { .. } | BlockKind::Prufer { .. })
    }

    /// Primes inverted on a torsion-free block; empty for the free block.
    pub fn pi(&self) -> Option<&BTreeSet<Prime>> {
        static EMPTY: BTreeSet<Prime> = BTreeSet::new();
        match self {
            BlockKind::TorsionFree { pi, .. } => Some(pi),
            BlockKind::FreeOmega => Some(&EMPTY),
            _ => None,
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKind::Cyclic { p, k, mult } => write!(f, "cyclic(p={p}, k={k}, mult={mult})"),
            BlockKind::Prufer { p, copies } => write!(f, "prufer(p={p}, copies={copies})"),
            BlockKind::TorsionFree { pi, rank } => {
                let list: Vec<String> = pi.iter().map(|p| p.to_string()).collect();
                write!(f, "torsionfree(pi={{{}}}, rank={rank})", list.join(","))
            }
            BlockKind::FreeOmega => f.write_str("torsionfree(pi={}, rank=omega)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
}

/// A torsion-free copy of finite rank, addressed by position in the list of
/// all finite torsion-free copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TfCopy {
    pub block: usize,
    pub copy: u64,
}

/// An abelian group written as a direct sum of named blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupDesc {
    name: String,
    blocks: Vec<Block>,
}

impl GroupDesc {
    pub fn new(name: impl Into<String>, blocks: Vec<Block>) -> Result<GroupDesc, GroupError> {
        if blocks.is_empty() {
            return Err(GroupError::Empty);
        }
        let mut names = BTreeSet::new();
        let mut prufer = BTreeSet::new();
        let mut free = 0;
        for b in &blocks {
            if !names.insert(b.name.clone()) {
                return Err(GroupError::DuplicateName(b.name.clone()));
            }
            let degenerate = match &b.kind {
                BlockKind::Cyclic { k, mult, .. } => *k == 0 || *mult == Mult::Finite(0),
                BlockKind::Prufer { p, copies } => {
                    if !prufer.insert(*p) {
                        return Err(GroupError::DuplicatePrufer(p.get()));
                    }
                    *copies == Mult::Finite(0)
                }
                BlockKind::TorsionFree { rank, .. } => *rank == 0,
                BlockKind::FreeOmega => {
                    free += 1;
                    false
                }
            };
            if degenerate {
                return Err(GroupError::Degenerate(b.name.clone()));
            }
        }
        if free > 1 {
            return Err(GroupError::MultipleFreeOmega);
        }
        Ok(GroupDesc { name: name.into(), blocks })
    }

    /// Builds a group with generated block names `b0, b1, ...`.
    pub fn from_kinds(name: &str, kinds: Vec<BlockKind>) -> Result<GroupDesc, GroupError> {
        let blocks = kinds
            .into_iter()
            .enumerate()
            .map(|(i, kind)| Block { name: format!("b{i}"), kind })
            .collect();
        GroupDesc::new(name, blocks)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Block {
        &self.blocks[i]
    }

    pub fn kind(&self, i: usize) -> &BlockKind {
        &self.blocks[i].kind
    }

    pub fn block_index(&self, name: &str) -> Result<usize, GroupError> {
        self.blocks
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| GroupError::UnknownBlock(name.to_string()))
    }

    pub fn is_periodic(&self) -> bool {
        self.blocks.iter().all(|b| b.kind.is_torsion())
    }

    pub fn is_ftfr(&self) -> bool {
        !self.blocks.iter().any(|b| b.kind == BlockKind::FreeOmega)
    }

    /// Finite when every block is finite.
    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| matches!(b.kind, BlockKind::Cyclic { mult: Mult::Finite(_), .. }))
    }

    pub fn free_omega(&self) -> Option<usize> {
        self.blocks.iter().position(|b| b.kind == BlockKind::FreeOmega)
    }

    /// All finite-rank torsion-free copies in block order.
    pub fn tf_copies(&self) -> Vec<TfCopy> {
        let mut out = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            if let BlockKind::TorsionFree { rank, .. } = b.kind {
                out.extend((0..rank).map(|copy| TfCopy { block: i, copy }));
            }
        }
        out
    }

    pub fn tf_pi(&self, c: TfCopy) -> &BTreeSet<Prime> {
        self.kind(c.block).pi().expect("torsion-free copy")
    }

    /// Index of the Prüfer block of `p`.
    pub fn prufer_block(&self, p: Prime) -> Option<usize> {
        self.blocks.iter().position(|b| matches!(b.kind, BlockKind::Prufer { p: q, .. } if q == p))
    }

    /// Indices of cyclic `p`-blocks.
    pub fn cyclic_blocks(&self, p: Prime) -> Vec<usize> {
        (0..self.blocks.len())
            .filter(|&i| matches!(self.kind(i), BlockKind::Cyclic { p: q, .. } if *q == p))
            .collect()
    }

    /// Primes that occur in a block, either as a torsion prime or inside a
    /// torsion-free `pi`.
    pub fn primes(&self) -> BTreeSet<Prime> {
        let mut out = BTreeSet::new();
        for b in &self.blocks {
            match &b.kind {
                BlockKind::Cyclic { p, .. } | BlockKind::Prufer { p, .. } => {
                    out.insert(*p);
                }
                BlockKind::TorsionFree { pi, .. } => out.extend(pi.iter().copied()),
                BlockKind::FreeOmega => {}
            }
        }
        out
    }

    /// Exponent `k` of a cyclic block.
    pub fn cyclic_exp(&self, i: usize) -> Option<(Prime, u32)> {
        match self.kind(i) {
            BlockKind::Cyclic { p, k, .. } => Some((*p, *k)),
            _ => None,
        }
    }

    /// `p^k` for a cyclic block.
    pub fn cyclic_modulus(&self, i: usize) -> Option<Int> {
        self.cyclic_exp(i).map(|(p, k)| p.pow(k))
    }

    /// Same group with blocks permuted by `perm` (new position j holds old block perm[j]).
    pub fn permuted(&self, perm: &[usize]) -> GroupDesc {
        let blocks = perm.iter().map(|&i| self.blocks[i].clone()).collect();
        GroupDesc { name: self.name.clone(), blocks }
    }

    /// Per-prime torsion-free ranks `sRank_p` over all primes in some `pi`.
    pub(crate) fn s_ranks(&self) -> BTreeMap<Prime, u64> {
        let mut out = BTreeMap::new();
        for b in &self.blocks {
            if let BlockKind::TorsionFree { pi, rank } = &b.kind {
                for p in pi {
                    *out.entry(*p).or_insert(0) += rank;
                }
            }
        }
        out
    }
}

impl fmt::Display for GroupDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| format!("{}={}", b.name, b.kind)).collect();
        write!(f, "{}[{}]", self.name, parts.join(" + "))
    }
}

/// Shorthand constructors used across the crate and its tests.
pub mod build {
    use super::*;

    pub fn prime(p: u64) -> Prime {
        Prime::new(p).expect("prime")
    }

    pub fn cyclic(p: u64, k: u32, mult: Mult) -> BlockKind {
        BlockKind::Cyclic { p: prime(p), k, mult }
    }

    pub fn prufer(p: u64, copies: Mult) -> BlockKind {
        BlockKind::Prufer { p: prime(p), copies }
    }

    pub fn torsion_free(pi: &[u64], rank: u64) -> BlockKind {
        BlockKind::TorsionFree { pi: pi.iter().map(|&p| prime(p)).collect(), rank }
    }

    pub fn omega() -> Mult {
        Mult::Omega
    }

    pub fn fin(n: u64) -> Mult {
        Mult::Finite(n)
    }

    pub fn group(kinds: Vec<BlockKind>) -> GroupDesc {
        GroupDesc::from_kinds("A", kinds).expect("valid group")
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    #[test]
    fn construction_rules() {
        assert!(GroupDesc::new("A", vec![]).is_err());
        let dup = vec![
            Block { name: "B".into(), kind: cyclic(2, 1, fin(1)) },
            Block { name: "B".into(), kind: cyclic(3, 1, fin(1)) },
        ];
        assert_eq!(GroupDesc::new("A", dup), Err(GroupError::DuplicateName("B".into())));
        assert_eq!(
            GroupDesc::from_kinds("A", vec![BlockKind::FreeOmega, BlockKind::FreeOmega]),
            Err(GroupError::MultipleFreeOmega)
        );
        assert!(GroupDesc::from_kinds("A", vec![cyclic(2, 0, fin(1))]).is_err());
        assert!(GroupDesc::from_kinds("A", vec![prufer(2, fin(1)), prufer(2, omega())]).is_err());
    }

    #[test]
    fn tf_copies_in_order() {
        let a = group(vec![torsion_free(&[2], 2), cyclic(3, 1, omega()), torsion_free(&[], 1)]);
        let c = a.tf_copies();
        assert_eq!(c.len(), 3);
        assert_eq!(c[2], TfCopy { block: 2, copy: 0 });
        assert!(!a.is_periodic());
        assert!(a.is_ftfr());
    }
}
