use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::Zero;

use super::{Endo, EndoError};
use crate::exactnum::{crt_solve, fmt_rational, prime_factors, rat_int, residue_mod, Int, JElement, Prime, Rational};
use crate::groupkit::{invariants, BlockKind, GroupDesc, Mult};

/// A multiplication: by a rational on non-periodic groups, by an element
/// of the product of the p-adic integers on periodic ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Multiplier {
    Rational(Rational),
    J(JElement),
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplier::Rational(r) => f.write_str(&fmt_rational(r)),
            Multiplier::J(j) => write!(f, "{j}"),
        }
    }
}

/// Shape `r ⊕_pi m`: the integer `r` on the bounded `pi`-part, the
/// multiplication `m` on its complement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quasi {
    pub r: Int,
    pub pi: BTreeSet<Prime>,
    pub mult: Multiplier,
}

/// Shape `n ⊕_pi 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mini {
    pub n: Int,
    pub pi: BTreeSet<Prime>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoClass {
    pub finitary: bool,
    pub multiplication: Option<Multiplier>,
    pub quasi: Option<Quasi>,
    pub semi: Option<Quasi>,
    pub mini: Option<Mini>,
    /// `(fin, qm)` with `φ = fin + qm`.
    pub fm: Option<(Endo, Endo)>,
}

/// Finite image: no action on torsion-free, Prüfer, free or infinite cyclic
/// blocks.
pub fn is_finitary(phi: &Endo) -> bool {
    if phi.tf.iter().flatten().any(|x| !x.is_zero()) || !phi.tau.is_empty() {
        return false;
    }
    phi.group.blocks().iter().zip(&phi.blocks).all(|(b, a)| match (&b.kind, a) {
        (BlockKind::Cyclic { mult: Mult::Finite(_), .. }, _) => true,
        (_, Some(a)) => a.is_zero(),
        (_, None) => true,
    })
}

/// The difference is finitary.
pub fn close(phi: &Endo, psi: &Endo) -> Result<bool, EndoError> {
    Ok(is_finitary(&phi.sub(psi)?))
}

/// `(value, p^k)` for each cyclic `p`-block, when every action there is scalar.
fn cyclic_congruences(phi: &Endo, p: Prime, omega_only: bool) -> Option<Vec<(Int, Int)>> {
    let g = &phi.group;
    let mut out = Vec::new();
    for i in g.cyclic_blocks(p) {
        let BlockKind::Cyclic { k, mult, .. } = g.kind(i) else { unreachable!() };
        if omega_only && !mult.is_omega() {
            continue;
        }
        let s = phi.block_scalar(i)?;
        out.push((s.to_integer(), p.pow(*k)));
    }
    Some(out)
}

/// Common residue of the cyclic `p`-blocks, or `None` when they disagree or
/// some block is not scalar. `Some(None)` when there is no such block.
fn cyclic_residue(phi: &Endo, p: Prime, omega_only: bool) -> Option<Option<(Int, u32)>> {
    let cs = cyclic_congruences(phi, p, omega_only)?;
    if cs.is_empty() {
        return Some(None);
    }
    let r = crt_solve(&cs).expect("moduli are powers of p")?;
    Some(Some((r.value().clone(), r.exp())))
}

/// Integer congruent to each `a_i` modulo pairwise coprime `m_i`.
pub(crate) fn crt_coprime(parts: &[(Int, Int)]) -> Int {
    let mut x = Int::zero();
    let mut m = Int::from(1);
    for (a, n) in parts {
        // x + m·t ≡ a (mod n)
        let e = m.extended_gcd(n);
        let t = ((a - &x) * e.x).mod_floor(n);
        x += &m * t;
        m *= n;
        x = x.mod_floor(&m);
    }
    x
}

fn matches_residue(s: &Rational, r: &Rational, m: &Int) -> bool {
    match (residue_mod(s, m), residue_mod(r, m)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Exact multiplication test.
pub fn is_multiplication(phi: &Endo) -> Option<Multiplier> {
    if !phi.fin.is_empty() || !phi.tau.is_empty() {
        return None;
    }
    let g = phi.group.clone();
    if g.is_periodic() {
        let mut alpha = BTreeMap::new();
        for p in g.primes() {
            let a = match g.prufer_block(p) {
                Some(b) => {
                    let a = phi.block_scalar(b)?;
                    for (v, m) in cyclic_congruences(phi, p, false)? {
                        if !matches_residue(&rat_int(&v), &a, &m) {
                            return None;
                        }
                    }
                    a
                }
                None => rat_int(&cyclic_residue(phi, p, false)??.0),
            };
            alpha.insert(p, a);
        }
        return Some(Multiplier::J(j_from_components(&g, &alpha)));
    }
    let r = phi.tf_scalar()?;
    let inv = invariants(&g);
    if !prime_factors(r.denom()).iter().all(|p| inv.pi_mult.contains(p)) {
        return None;
    }
    for (i, b) in g.blocks().iter().enumerate() {
        match &b.kind {
            BlockKind::Prufer { .. } => {
                if phi.block_scalar(i)? != r {
                    return None;
                }
            }
            BlockKind::Cyclic { p, k, .. }
                if !matches_residue(&phi.block_scalar(i)?, &r, &p.pow(*k)) => {
                    return None;
                }
            _ => {}
        }
    }
    Some(Multiplier::Rational(r))
}

/// A J-element with the given components; a single integer when one
/// integer among them represents every component.
fn j_from_components(g: &GroupDesc, alpha: &BTreeMap<Prime, Rational>) -> JElement {
    let fits = |n: &Rational| {
        alpha.iter().all(|(p, a)| match g.prufer_block(*p) {
            Some(_) => a == n,
            None => {
                let k = g.cyclic_blocks(*p).iter().filter_map(|&i| g.cyclic_exp(i)).map(|x| x.1).max().unwrap_or(0);
                matches_residue(a, n, &p.pow(k))
            }
        })
    };
    for n in alpha.values() {
        if n.is_integer() && fits(n) {
            return JElement::integer(n.to_integer());
        }
    }
    JElement::new(Int::zero(), alpha.clone()).expect("components are p-local")
}

impl Endo {
    /// The endomorphism given by a multiplication.
    pub fn multiplication(group: Arc<GroupDesc>, m: &Multiplier) -> Result<Endo, EndoError> {
        match m {
            Multiplier::Rational(r) => Endo::scalar(group, r),
            Multiplier::J(j) => {
                if !group.is_periodic() {
                    return Err(EndoError::Invalid("J-multiplications act on periodic groups".into()));
                }
                Endo::blockwise(group, |_, k| j.at(k.prime().expect("torsion block")))
            }
        }
    }

    /// `n` on the cyclic `pi`-blocks and `0` everywhere else.
    pub fn mini(group: Arc<GroupDesc>, n: &Int, pi: &BTreeSet<Prime>) -> Endo {
        Endo::blockwise(group, |_, k| match k {
            BlockKind::Cyclic { p, .. } if pi.contains(p) => rat_int(n),
            _ => Rational::zero(),
        })
        .expect("integers act on cyclic blocks")
    }
}

/// `(r, pi, n)` for shapes `n ⊕_pi r` on non-periodic groups.
fn split_shape(phi: &Endo) -> Option<(Rational, BTreeSet<Prime>, Int)> {
    if !phi.fin.is_empty() || !phi.tau.is_empty() {
        return None;
    }
    let g = &phi.group;
    let r = phi.tf_scalar()?;
    let mut pi: BTreeSet<Prime> = prime_factors(r.denom());
    for (i, b) in g.blocks().iter().enumerate() {
        match &b.kind {
            BlockKind::Prufer { .. } => {
                if phi.block_scalar(i)? != r {
                    return None;
                }
            }
            BlockKind::Cyclic { p, k, .. } => {
                let ok = phi.block_scalar(i).is_some_and(|s| matches_residue(&s, &r, &p.pow(*k)));
                if !ok {
                    pi.insert(*p);
                }
            }
            _ => {}
        }
    }
    let mut parts = Vec::new();
    for p in &pi {
        if g.prufer_block(*p).is_some() {
            return None;
        }
        if let Some((v, k)) = cyclic_residue(phi, *p, false)? {
            parts.push((v, p.pow(k)));
        }
    }
    Some((r, pi, crt_coprime(&parts)))
}

pub fn classify(phi: &Endo) -> EndoClass {
    let g = phi.group.clone();
    let inv = invariants(&g);
    let multiplication = is_multiplication(phi);
    let (quasi, semi) = if g.is_periodic() {
        let q = multiplication.clone().map(|m| Quasi { r: Int::zero(), pi: BTreeSet::new(), mult: m });
        (q.clone(), q)
    } else {
        match split_shape(phi) {
            Some((r, pi, n)) => {
                let q = Quasi { r: n, pi: pi.clone(), mult: Multiplier::Rational(r) };
                let quasi = inv.pi0.contains_all(&pi).then(|| q.clone());
                let semi = inv.pi_star.contains_all(&pi).then_some(q);
                (quasi, semi)
            }
            None => (None, None),
        }
    };
    EndoClass { finitary: is_finitary(phi), multiplication, quasi, semi, mini: mini_shape(phi), fm: fm_split(phi) }
}

fn mini_shape(phi: &Endo) -> Option<Mini> {
    let g = &phi.group;
    if !phi.fin.is_empty() || !phi.tau.is_empty() || phi.tf.iter().flatten().any(|x| !x.is_zero()) {
        return None;
    }
    let inv = invariants(g);
    let mut pi = BTreeSet::new();
    for (i, b) in g.blocks().iter().enumerate() {
        match (&b.kind, phi.blocks[i].as_ref()) {
            (BlockKind::Cyclic { p, .. }, Some(a)) => {
                if !a.is_zero() {
                    pi.insert(*p);
                }
            }
            (_, Some(a))
                if !a.is_zero() => {
                    return None;
                }
            _ => {}
        }
    }
    let mut parts = Vec::new();
    for p in &pi {
        if inv.at(*p).d == crate::groupkit::Count::Omega {
            return None;
        }
        let (v, k) = cyclic_residue(phi, *p, false)??;
        parts.push((v, p.pow(k)));
    }
    Some(Mini { n: crt_coprime(&parts), pi })
}

/// Splits `φ = fin + qm` with `fin` finitary and `qm` a quasi-multiplication.
pub fn fm_split(phi: &Endo) -> Option<(Endo, Endo)> {
    if !phi.tau.is_empty() {
        return None;
    }
    let g = phi.group.clone();
    let qm = if g.is_periodic() {
        let mut alpha: BTreeMap<Prime, Rational> = BTreeMap::new();
        for p in g.primes() {
            let a = match g.prufer_block(p) {
                Some(b) => {
                    let a = phi.block_scalar(b)?;
                    for (v, m) in cyclic_congruences(phi, p, true)? {
                        if !matches_residue(&rat_int(&v), &a, &m) {
                            return None;
                        }
                    }
                    a
                }
                None => cyclic_residue(phi, p, true)?.map_or_else(Rational::zero, |(v, _)| rat_int(&v)),
            };
            alpha.insert(p, a);
        }
        Endo::blockwise(g.clone(), |_, k| alpha[&k.prime().expect("torsion block")].clone()).ok()?
    } else {
        let r = phi.tf_scalar()?;
        let pi = prime_factors(r.denom());
        let inv = invariants(&g);
        if !inv.pi0.contains_all(&pi) {
            return None;
        }
        for (i, b) in g.blocks().iter().enumerate() {
            match &b.kind {
                BlockKind::Prufer { .. } => {
                    if phi.block_scalar(i)? != r {
                        return None;
                    }
                }
                BlockKind::Cyclic { p, k, mult: Mult::Omega }
                    if !matches_residue(&phi.block_scalar(i)?, &r, &p.pow(*k)) => {
                        return None;
                    }
                _ => {}
            }
        }
        Endo::blockwise(g.clone(), |_, k| match k {
            BlockKind::Cyclic { p, .. } if pi.contains(p) => Rational::zero(),
            _ => r.clone(),
        })
        .ok()?
    };
    let fin = phi.sub(&qm).ok()?;
    debug_assert!(is_finitary(&fin));
    Some((fin, qm))
}
