use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use super::{BlockKind, GroupDesc, GroupError, Mult};
use crate::exactnum::{JElement, Prime};

/// A natural number or countably infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Count {
    Finite(u64),
    Omega,
}

impl Count {
    fn add_mult(self, m: Mult) -> Count {
        match (self, m) {
            (Count::Finite(a), Mult::Finite(b)) => Count::Finite(a + b),
            _ => Count::Omega,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Count::Finite(0)
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Omega => f.write_str("omega"),
        }
    }
}

/// A natural number or `∞`; finite values order below `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u32),
    Inf,
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Inf => f.write_str("inf"),
        }
    }
}

/// A set of primes that is either finite or cofinite: `default` says whether
/// unlisted primes belong, `exceptions` flips membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeSelector {
    default: bool,
    exceptions: BTreeSet<Prime>,
}

impl PrimeSelector {
    pub fn new(default: bool, exceptions: BTreeSet<Prime>) -> PrimeSelector {
        PrimeSelector { default, exceptions }
    }

    pub fn finite(members: BTreeSet<Prime>) -> PrimeSelector {
        PrimeSelector::new(false, members)
    }

    pub fn empty() -> PrimeSelector {
        PrimeSelector::finite(BTreeSet::new())
    }

    pub fn default_member(&self) -> bool {
        self.default
    }

    pub fn exceptions(&self) -> &BTreeSet<Prime> {
        &self.exceptions
    }

    pub fn contains(&self, p: Prime) -> bool {
        self.default != self.exceptions.contains(&p)
    }

    pub fn contains_all<'a>(&self, ps: impl IntoIterator<Item = &'a Prime>) -> bool {
        ps.into_iter().all(|p| self.contains(*p))
    }

    /// Members when the set is finite.
    pub fn members(&self) -> Option<&BTreeSet<Prime>> {
        (!self.default).then_some(&self.exceptions)
    }
}

impl fmt::Display for PrimeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.exceptions.iter().map(|p| p.to_string()).collect();
        if self.default {
            write!(f, "all except {{{}}}", list.join(","))
        } else {
            write!(f, "{{{}}}", list.join(","))
        }
    }
}

/// Per-prime block data and derived bounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeData {
    /// Largest cyclic exponent.
    pub max_k: u32,
    /// Largest cyclic exponent over blocks of infinite multiplicity.
    pub eps_k: u32,
    /// Prüfer copies.
    pub d: Count,
    /// Total rank of torsion-free blocks that are `p`-divisible.
    pub s_rank: u64,
    pub e: ExtNat,
    pub eps: ExtNat,
    pub c: u32,
    pub critical: bool,
}

impl PrimeData {
    /// True when `(A/F)_p` has a nonzero divisible part.
    pub fn has_divisible(&self) -> bool {
        !self.d.is_zero() || self.s_rank > 0
    }

    pub fn has_omega_cyclic(&self) -> bool {
        self.eps_k > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Invariants {
    pub r0: Count,
    pub periodic: bool,
    pub ftfr: bool,
    /// Data for every prime occurring in a block.
    pub primes: BTreeMap<Prime, PrimeData>,
    /// `A_p` finite and `A/A_p` `p`-divisible.
    pub pi0: PrimeSelector,
    /// `A_p` bounded and `A/A_p` `p`-divisible.
    pub pi_star: PrimeSelector,
    /// Critical primes.
    pub pi_c: PrimeSelector,
    /// Primes `p` with `A` `p`-divisible and free of `p`-torsion; only
    /// meaningful for non-periodic groups.
    pub pi_mult: BTreeSet<Prime>,
}

impl Invariants {
    pub fn at(&self, p: Prime) -> PrimeData {
        self.primes.get(&p).cloned().unwrap_or(PrimeData {
            max_k: 0,
            eps_k: 0,
            d: Count::Finite(0),
            s_rank: 0,
            e: ExtNat::Fin(0),
            eps: ExtNat::Fin(0),
            c: 0,
            critical: false,
        })
    }

    pub fn critical_primes(&self) -> BTreeSet<Prime> {
        self.primes.iter().filter(|(_, d)| d.critical).map(|(p, _)| *p).collect()
    }
}

pub fn invariants(a: &GroupDesc) -> Invariants {
    let ftfr = a.is_ftfr();
    let periodic = a.is_periodic();
    let s_ranks = a.s_ranks();
    let mut r0 = Count::Finite(0);
    for b in a.blocks() {
        if let BlockKind::TorsionFree { rank, .. } = b.kind {
            r0 = r0.add_mult(Mult::Finite(rank));
        } else if b.kind == BlockKind::FreeOmega {
            r0 = Count::Omega;
        }
    }

    let mut primes = BTreeMap::new();
    for p in a.primes() {
        let mut max_k = 0;
        let mut eps_k = 0;
        let mut d = Count::Finite(0);
        for b in a.blocks() {
            match &b.kind {
                BlockKind::Cyclic { p: q, k, mult } if *q == p => {
                    max_k = max_k.max(*k);
                    if mult.is_omega() {
                        eps_k = eps_k.max(*k);
                    }
                }
                BlockKind::Prufer { p: q, copies } if *q == p => d = d.add_mult(*copies),
                _ => {}
            }
        }
        let s_rank = s_ranks.get(&p).copied().unwrap_or(0);
        let divisible = !d.is_zero() || s_rank > 0;
        let e = if divisible { ExtNat::Inf } else { ExtNat::Fin(max_k) };
        let eps = if divisible { ExtNat::Inf } else { ExtNat::Fin(eps_k) };
        let critical = ftfr && eps_k > 0 && divisible && d != Count::Omega;
        primes.insert(p, PrimeData { max_k, eps_k, d, s_rank, e, eps, c: max_k, critical });
    }

    // primes inverted on every torsion-free block (the free block inverts none)
    let mut common: Option<BTreeSet<Prime>> = None;
    for b in a.blocks() {
        if let Some(pi) = b.kind.pi() {
            common = Some(match common {
                None => pi.clone(),
                Some(c) => c.intersection(pi).copied().collect(),
            });
        }
    }

    let (pi0, pi_star, pi_mult) = if periodic {
        let not0 = primes.iter().filter(|(_, x)| x.eps_k > 0 || !x.d.is_zero()).map(|(p, _)| *p).collect();
        let not_star = primes.iter().filter(|(_, x)| !x.d.is_zero()).map(|(p, _)| *p).collect();
        (PrimeSelector::new(true, not0), PrimeSelector::new(true, not_star), BTreeSet::new())
    } else {
        let common = common.unwrap_or_default();
        let pd = |p: &Prime| primes.get(p).cloned().expect("prime occurs in a block");
        let pi0 = common.iter().filter(|p| pd(p).eps_k == 0 && pd(p).d.is_zero()).copied().collect();
        let pis = common.iter().filter(|p| pd(p).d.is_zero()).copied().collect();
        let pim = common.iter().filter(|p| pd(p).max_k == 0 && pd(p).d.is_zero()).copied().collect();
        (PrimeSelector::finite(pi0), PrimeSelector::finite(pis), pim)
    };
    let pi_c = PrimeSelector::finite(primes.iter().filter(|(_, x)| x.critical).map(|(p, _)| *p).collect());

    Invariants { r0, periodic, ftfr, primes, pi0, pi_star, pi_c, pi_mult }
}

/// Per-prime `(e_p, eps_p)` for primes with `e_p > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct HDescriptor(pub BTreeMap<Prime, (ExtNat, ExtNat)>);

impl HDescriptor {
    pub fn get(&self, p: Prime) -> (ExtNat, ExtNat) {
        self.0.get(&p).copied().unwrap_or((ExtNat::Fin(0), ExtNat::Fin(0)))
    }
}

impl fmt::Display for HDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(p, (e, s))| format!("{p}: ({e},{s})")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn h_descriptor(a: &GroupDesc) -> Result<HDescriptor, GroupError> {
    if !a.is_ftfr() {
        return Err(GroupError::NotFtfr);
    }
    let inv = invariants(a);
    Ok(HDescriptor(
        inv.primes.iter().filter(|(_, d)| d.e != ExtNat::Fin(0)).map(|(p, d)| (*p, (d.e, d.eps))).collect(),
    ))
}

/// An element of the ring described by an [`HDescriptor`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HElement {
    pub value: JElement,
    pub desc: HDescriptor,
}

/// Equality in `H(A)`: at each prime of the descriptor the components agree
/// modulo `p^{eps_p}`, exactly when `eps_p` is infinite.
pub fn h_equal(x: &HElement, y: &HElement) -> Result<bool, GroupError> {
    if x.desc != y.desc {
        return Err(GroupError::DescriptorMismatch);
    }
    for (p, (_, eps)) in &x.desc.0 {
        let diff = x.value.at(*p) - y.value.at(*p);
        if diff.is_zero() {
            continue;
        }
        match eps {
            ExtNat::Inf => return Ok(false),
            ExtNat::Fin(k) => {
                if p.valuation_q(&diff).expect("nonzero") < *k as i64 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Critical primes with the exponent bound `c_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NMType(pub BTreeMap<Prime, u32>);

pub fn nm_type(a: &GroupDesc) -> Result<NMType, GroupError> {
    if !a.is_ftfr() {
        return Err(GroupError::NotFtfr);
    }
    let inv = invariants(a);
    Ok(NMType(inv.primes.iter().filter(|(_, d)| d.critical).map(|(p, d)| (*p, d.c)).collect()))
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::*;
    use crate::exactnum::{int, rat};

    fn set(ps: &[u64]) -> BTreeSet<Prime> {
        ps.iter().map(|&p| prime(p)).collect()
    }

    #[test]
    fn mixed_example() {
        let a = group(vec![cyclic(5, 1, fin(1)), torsion_free(&[5], 1)]);
        let inv = invariants(&a);
        assert_eq!(inv.pi0, PrimeSelector::finite(set(&[5])));
        assert_eq!(inv.pi_star, PrimeSelector::finite(set(&[5])));
        assert_eq!(inv.pi_c, PrimeSelector::empty());
        assert_eq!(inv.r0, Count::Finite(1));
    }

    #[test]
    fn critical_examples() {
        let a = group(vec![cyclic(3, 2, omega()), prufer(3, fin(1))]);
        let inv = invariants(&a);
        let d = inv.at(prime(3));
        assert!(d.critical);
        assert_eq!((d.c, d.e, d.eps), (2, ExtNat::Inf, ExtNat::Inf));
        let b = group(vec![cyclic(3, 1, omega()), torsion_free(&[3], 1)]);
        let d = invariants(&b).at(prime(3));
        assert!(d.critical);
        assert_eq!(d.c, 1);
        let c = group(vec![cyclic(2, 1, omega()), cyclic(2, 3, omega()), prufer(2, fin(2))]);
        assert_eq!(nm_type(&c).unwrap().0, [(prime(2), 3)].into_iter().collect());
        let d = group(vec![cyclic(2, 1, omega()), prufer(2, omega())]);
        assert!(nm_type(&d).unwrap().0.is_empty());
    }

    #[test]
    fn descriptors() {
        let a = group(vec![cyclic(3, 2, omega())]);
        assert_eq!(h_descriptor(&a).unwrap().0, [(prime(3), (ExtNat::Fin(2), ExtNat::Fin(2)))].into());
        let b = group(vec![cyclic(3, 2, omega()), cyclic(3, 3, fin(1))]);
        assert_eq!(h_descriptor(&b).unwrap().get(prime(3)), (ExtNat::Fin(3), ExtNat::Fin(2)));
        let c = group(vec![prufer(3, fin(1))]);
        assert_eq!(h_descriptor(&c).unwrap().get(prime(3)), (ExtNat::Inf, ExtNat::Inf));
        let free = group(vec![BlockKind::FreeOmega]);
        assert_eq!(h_descriptor(&free), Err(GroupError::NotFtfr));
    }

    #[test]
    fn h_equality() {
        let p = prime(3);
        let el = |v: i64, desc: &HDescriptor| HElement {
            value: JElement::new(int(0), [(p, rat(v, 1))].into()).unwrap(),
            desc: desc.clone(),
        };
        let d21 = HDescriptor([(p, (ExtNat::Fin(2), ExtNat::Fin(1)))].into());
        let d22 = HDescriptor([(p, (ExtNat::Fin(2), ExtNat::Fin(2)))].into());
        assert!(h_equal(&el(1, &d21), &el(1, &d21)).unwrap());
        assert!(h_equal(&el(1, &d21), &el(4, &d21)).unwrap());
        assert!(!h_equal(&el(1, &d22), &el(4, &d22)).unwrap());
        assert!(h_equal(&el(1, &d21), &el(4, &d22)).is_err());
    }

    #[test]
    fn periodic_selectors() {
        let a = group(vec![cyclic(2, 1, omega()), prufer(3, fin(1)), cyclic(5, 1, fin(2))]);
        let inv = invariants(&a);
        assert_eq!(inv.pi_star, PrimeSelector::new(true, set(&[3])));
        assert_eq!(inv.pi0, PrimeSelector::new(true, set(&[2, 3])));
        assert!(inv.pi0.contains(prime(5)) && inv.pi0.contains(prime(7)));
    }

    #[test]
    fn non_ftfr_has_no_critical_primes() {
        let a = group(vec![cyclic(2, 1, omega()), prufer(2, fin(1)), BlockKind::FreeOmega]);
        let inv = invariants(&a);
        assert_eq!(inv.r0, Count::Omega);
        assert!(inv.critical_primes().is_empty());
        assert_eq!(inv.pi_star, PrimeSelector::empty());
    }
}
