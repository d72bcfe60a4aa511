//! Brute-force ground truth for inertiality: exact indices `|H + φ(H) : H|`
//! of finitely generated subgroups by Smith normal form, a naive coset
//! count for finite cases, subgroup families, level profiles and witness
//! families.
//!
//! Every randomized routine draws trial `i` from its own ChaCha stream of
//! the 64-bit seed, so reports are identical under [`Exec::Sequential`] and
//! [`Exec::Parallel`].

mod enumerate;
mod profile;
mod sample;

pub use enumerate::{all_subgroups, enumerate_elements};
pub use profile::{
    fs_profile, inertness_profile, witness_family, witness_search, FsLevel, FsReport, InertnessEvidence, LevelMax,
    VerdictHint, WitnessFamily, FS_ELEMENT_BUDGET,
};
pub use sample::{sample_subgroups, structured_families, top, SampleConfig};

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::endokit::{Endo, EndoError};
use crate::exactnum::{snf_diagonal, Int};
use crate::groupkit::{BlockKind, Coord, Element, GroupDesc, GroupError};

#[cfg(test)]
pub(crate) use crate::exec::Exec;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("the group is not periodic")]
    NotPeriodic,
    #[error("enumeration exceeds budget {0}")]
    Budget(u64),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Endo(#[from] EndoError),
}

/// A subgroup given by finitely many generators, zero allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FGSubgroup {
    pub group: Arc<GroupDesc>,
    pub gens: Vec<Element>,
}

impl FGSubgroup {
    pub fn new(group: Arc<GroupDesc>, gens: Vec<Element>) -> FGSubgroup {
        FGSubgroup { group, gens }
    }

    pub fn image(&self, phi: &Endo) -> Result<Vec<Element>, OracleError> {
        Ok(self.gens.iter().map(|x| phi.apply(x)).collect::<Result<_, _>>()?)
    }
}

impl fmt::Display for FGSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.gens.iter().map(|x| x.to_string()).collect();
        write!(f, "<{}>", gens.join(", "))
    }
}

impl Serialize for FGSubgroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A subgroup index: a positive integer or infinity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Finite(Int),
    Infinite,
}

impl Index {
    pub fn one() -> Index {
        Index::Finite(Int::one())
    }

    pub fn finite(&self) -> Option<&Int> {
        match self {
            Index::Finite(n) => Some(n),
            Index::Infinite => None,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Integer presentation of the coordinates used by a set of elements:
/// each coordinate gets a scale turning its coefficients into integers and,
/// for torsion coordinates, the order relation of the scaled generator.
struct Presentation {
    coords: Vec<(Coord, Int, Option<Int>)>,
}

impl Presentation {
    fn new(g: &GroupDesc, elems: &[&Element]) -> Presentation {
        let mut dens: BTreeMap<Coord, Int> = BTreeMap::new();
        for x in elems {
            for (c, q) in x.iter() {
                let d = dens.entry(*c).or_insert_with(Int::one);
                *d = d.lcm(q.denom());
            }
        }
        let coords = dens
            .into_iter()
            .map(|(c, d)| match g.kind(c.block) {
                BlockKind::Cyclic { p, k, .. } => (c, Int::one(), Some(p.pow(*k))),
                BlockKind::Prufer { .. } => (c, d.clone(), Some(d)),
                BlockKind::TorsionFree { .. } | BlockKind::FreeOmega => (c, d, None),
            })
            .collect();
        Presentation { coords }
    }

    fn row(&self, x: &Element) -> Vec<Int> {
        self.coords.iter().map(|(c, s, _)| (x.get(*c) * s).to_integer()).collect()
    }

    fn relations(&self) -> Vec<Vec<Int>> {
        let n = self.coords.len();
        self.coords
            .iter()
            .enumerate()
            .filter_map(|(i, (_, _, m))| {
                m.as_ref().map(|m| {
                    let mut r = vec![Int::zero(); n];
                    r[i] = m.clone();
                    r
                })
            })
            .collect()
    }

    /// Rank and product of the nonzero invariant factors of the lattice
    /// spanned by `elems` and the order relations.
    fn lattice(&self, elems: &[&Element]) -> (usize, Int) {
        let mut rows: Vec<Vec<Int>> = elems.iter().map(|x| self.row(x)).collect();
        rows.extend(self.relations());
        if rows.is_empty() || self.coords.is_empty() {
            return (0, Int::one());
        }
        let d = snf_diagonal(&rows);
        let nz: Vec<&Int> = d.iter().filter(|x| !x.is_zero()).collect();
        (nz.len(), nz.into_iter().fold(Int::one(), |acc, x| acc * x.abs()))
    }
}

/// `|⟨big⟩ : ⟨small⟩|` for `⟨small⟩ ≤ ⟨big⟩`.
pub fn relative_index(g: &GroupDesc, small: &[Element], big: &[Element]) -> Index {
    let all: Vec<&Element> = small.iter().chain(big).collect();
    let pres = Presentation::new(g, &all);
    let s: Vec<&Element> = small.iter().collect();
    let b: Vec<&Element> = small.iter().chain(big).collect();
    let (rs, ds) = pres.lattice(&s);
    let (rb, db) = pres.lattice(&b);
    if rb > rs {
        Index::Infinite
    } else {
        Index::Finite(ds / db)
    }
}

/// Order of `⟨gens⟩`, infinite when some generator has infinite order.
pub fn subgroup_order(g: &GroupDesc, gens: &[Element]) -> Index {
    let pres = Presentation::new(g, &gens.iter().collect::<Vec<_>>());
    let (r0, d0) = pres.lattice(&[]);
    let (r1, d1) = pres.lattice(&gens.iter().collect::<Vec<_>>());
    if r1 > r0 {
        Index::Infinite
    } else {
        Index::Finite(d0 / d1)
    }
}

/// Exact `|H + φ(H) : H|`.
pub fn index_in_sum(h: &FGSubgroup, phi: &Endo) -> Result<Index, OracleError> {
    let img = h.image(phi)?;
    Ok(relative_index(&h.group, &h.gens, &img))
}

/// Every element of `⟨gens⟩` by breadth-first closure, or `None` past
/// `limit` elements or on a generator of infinite order.
pub fn closure(g: &GroupDesc, gens: &[Element], limit: usize) -> Option<HashSet<Element>> {
    if gens.iter().any(|x| !x.is_torsion(g)) {
        return None;
    }
    let mut seen: HashSet<Element> = HashSet::from([Element::zero()]);
    let mut queue = VecDeque::from([Element::zero()]);
    while let Some(x) = queue.pop_front() {
        for s in gens {
            let y = x.add(g, s).ok()?;
            if seen.insert(y.clone()) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(y);
            }
        }
    }
    Some(seen)
}

/// `|H + φ(H) : H|` by listing both subgroups element by element; `None`
/// when either exceeds `limit` elements.
pub fn naive_index_in_sum(h: &FGSubgroup, phi: &Endo, limit: usize) -> Result<Option<Int>, OracleError> {
    let img = h.image(phi)?;
    let all: Vec<Element> = h.gens.iter().chain(&img).cloned().collect();
    let (Some(hs), Some(ks)) = (closure(&h.group, &h.gens, limit), closure(&h.group, &all, limit)) else {
        return Ok(None);
    };
    Ok(Some(Int::from(ks.len()) / Int::from(hs.len())))
}

/// Coordinates touched by a family of subgroups, for reporting.
pub fn support(hs: &[FGSubgroup]) -> BTreeSet<Coord> {
    hs.iter().flat_map(|h| h.gens.iter().flat_map(|x| x.support().collect::<Vec<_>>())).collect()
}

#[cfg(test)]
mod tests;
