use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::{Block, BlockKind, Coord, Element, GroupDesc, Mult};
use crate::exactnum::{p_part_mod_one, rat_int, Int, Prime, Rational};

/// Treatment of torsion-free blocks when truncating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TfTruncation {
    /// Torsion-free blocks are left out.
    Drop,
    /// A torsion-free block with `p` in its `pi` contributes the layer
    /// `p^{-N}Z/Z` of its quotient by the standard lattice, one copy per rank,
    /// for every listed `p`.
    Layers(BTreeSet<Prime>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Origin {
    Cyclic(usize),
    Prufer(usize, Prime),
    TfLayer(usize, Prime),
}

/// A finite group approximating `A` at level `N`.
///
/// Infinite multiplicities become `N`, `Prufer(p, c)` becomes
/// `Cyclic(p, N, c)` through `x/p^N ↦ x`, and torsion-free blocks follow
/// [`TfTruncation`]. The truncation at level `N` embeds into the one at
/// level `N + 1` (see [`Truncation::embed`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncation {
    pub level: u32,
    pub group: GroupDesc,
    origin: Vec<Origin>,
}

pub fn truncate(a: &GroupDesc, n: u32, tf: &TfTruncation) -> Truncation {
    assert!(n >= 1, "truncation level must be at least 1");
    let cap = |m: Mult| Mult::Finite(m.finite().unwrap_or(n as u64));
    let mut blocks = Vec::new();
    let mut origin = Vec::new();
    for (i, b) in a.blocks().iter().enumerate() {
        match &b.kind {
            BlockKind::Cyclic { p, k, mult } => {
                blocks.push(Block { name: b.name.clone(), kind: BlockKind::Cyclic { p: *p, k: *k, mult: cap(*mult) } });
                origin.push(Origin::Cyclic(i));
            }
            BlockKind::Prufer { p, copies } => {
                blocks.push(Block { name: b.name.clone(), kind: BlockKind::Cyclic { p: *p, k: n, mult: cap(*copies) } });
                origin.push(Origin::Prufer(i, *p));
            }
            BlockKind::TorsionFree { pi, rank } => {
                if let TfTruncation::Layers(sample) = tf {
                    for p in pi.intersection(sample) {
                        blocks.push(Block {
                            name: format!("{}_{}", b.name, p),
                            kind: BlockKind::Cyclic { p: *p, k: n, mult: Mult::Finite(*rank) },
                        });
                        origin.push(Origin::TfLayer(i, *p));
                    }
                }
            }
            BlockKind::FreeOmega => {}
        }
    }
    if blocks.is_empty() {
        // the trivial group, written as one copy of Z(2^1) with no generators used
        blocks.push(Block { name: "trivial".into(), kind: BlockKind::Cyclic { p: Prime::new(2).unwrap(), k: 1, mult: Mult::Finite(1) } });
        origin.push(Origin::Cyclic(usize::MAX));
    }
    let group = GroupDesc::new(format!("{}@{}", a.name(), n), blocks).expect("truncation is well formed");
    Truncation { level: n, group, origin }
}

impl Truncation {
    /// Order of the finite group.
    pub fn order(&self) -> Int {
        let mut n = Int::one();
        for (b, o) in self.group.blocks().iter().zip(&self.origin) {
            if matches!(o, Origin::Cyclic(usize::MAX)) {
                continue;
            }
            if let BlockKind::Cyclic { p, k, mult } = b.kind {
                n *= num_traits::pow(p.pow(k), mult.finite().unwrap() as usize);
            }
        }
        n
    }

    /// Maps an element of `A` into the truncation when every coordinate lies
    /// in the window; torsion-free coordinates are read modulo the standard
    /// lattice under [`TfTruncation::Layers`] and ignored otherwise.
    pub fn project(&self, a: &GroupDesc, x: &Element) -> Option<Element> {
        let n = self.level;
        let mut out = Element::zero();
        for (c, q) in x.iter() {
            let mut hit = false;
            for (j, o) in self.origin.iter().enumerate() {
                let value = match o {
                    Origin::Cyclic(i) if *i == c.block => q.clone(),
                    Origin::Prufer(i, p) if *i == c.block => {
                        let v = p.valuation(q.denom()).unwrap_or(0);
                        if v > n {
                            return None;
                        }
                        q * rat_int(&p.pow(n))
                    }
                    Origin::TfLayer(i, p) if *i == c.block => {
                        let part = p_part_mod_one(q, *p);
                        if p.valuation(part.denom()).unwrap_or(0) > n {
                            return None;
                        }
                        part * rat_int(&p.pow(n))
                    }
                    _ => continue,
                };
                if !self.group.kind(j).mult().contains(c.copy) {
                    return None;
                }
                hit = true;
                out.add_at(&self.group, Coord::new(j, c.copy), &value).ok()?;
            }
            if !hit && a.kind(c.block).is_torsion() {
                return None;
            }
        }
        Some(out)
    }

    /// Maps a truncated element back into `A`. Layer coordinates of
    /// torsion-free blocks have no preimage in `A` and yield `None`.
    pub fn lift(&self, a: &GroupDesc, x: &Element) -> Option<Element> {
        let n = self.level;
        let mut out = Element::zero();
        for (c, q) in x.iter() {
            match &self.origin[c.block] {
                Origin::Cyclic(i) => out.add_at(a, Coord::new(*i, c.copy), q).ok()?,
                Origin::Prufer(i, p) => {
                    out.add_at(a, Coord::new(*i, c.copy), &(q / rat_int(&p.pow(n)))).ok()?
                }
                Origin::TfLayer(..) => return None,
            }
        }
        Some(out)
    }

    /// The blockwise embedding into the truncation at level `N + 1`:
    /// identity on cyclic blocks, multiplication by `p` on the layers.
    pub fn embed(&self, next: &Truncation, x: &Element) -> Option<Element> {
        if next.level != self.level + 1 || next.origin != self.origin {
            return None;
        }
        let mut out = Element::zero();
        for (c, q) in x.iter() {
            let v: Rational = match &self.origin[c.block] {
                Origin::Cyclic(_) => q.clone(),
                Origin::Prufer(_, p) | Origin::TfLayer(_, p) => q * rat_int(&p.int()),
            };
            if !v.is_zero() {
                out.add_at(&next.group, *c, &v).ok()?;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::*;
    use crate::exactnum::{int, rat};

    #[test]
    fn basic_truncations() {
        let a = group(vec![cyclic(3, 1, omega())]);
        let t = truncate(&a, 3, &TfTruncation::Drop);
        assert_eq!(t.group.kind(0), &cyclic(3, 1, fin(3)));
        let b = group(vec![prufer(3, fin(1))]);
        let t = truncate(&b, 2, &TfTruncation::Drop);
        assert_eq!(t.group.kind(0), &cyclic(3, 2, fin(1)));
        assert_eq!(t.order(), int(9));
    }

    #[test]
    fn mixed_order() {
        let a = group(vec![cyclic(2, 1, omega()), prufer(3, fin(2)), torsion_free(&[2, 5], 1)]);
        let t = truncate(&a, 2, &TfTruncation::Layers([prime(2)].into()));
        // 2^2 * 9^2 * 4
        assert_eq!(t.order(), int(4 * 81 * 4));
        let t0 = truncate(&a, 2, &TfTruncation::Drop);
        assert_eq!(t0.order(), int(4 * 81));
    }

    #[test]
    fn project_lift_embed() {
        let a = group(vec![cyclic(2, 2, omega()), prufer(2, fin(1))]);
        let t2 = truncate(&a, 2, &TfTruncation::Drop);
        let t3 = truncate(&a, 3, &TfTruncation::Drop);
        let x = Element::new(&a, [(Coord::new(0, 1), rat(3, 1)), (Coord::new(1, 0), rat(1, 4))]).unwrap();
        let y = t2.project(&a, &x).unwrap();
        assert_eq!(y.get(Coord::new(1, 0)), rat(1, 1));
        assert_eq!(t2.lift(&a, &y).unwrap(), x);
        let z = t2.embed(&t3, &y).unwrap();
        assert_eq!(t3.lift(&a, &z).unwrap(), x);
        let deep = Element::single(&a, Coord::new(1, 0), rat(1, 8)).unwrap();
        assert!(t2.project(&a, &deep).is_none());
        let far = Element::single(&a, Coord::new(0, 2), rat(1, 1)).unwrap();
        assert!(t2.project(&a, &far).is_none());
    }
}
