//! Deciding inertiality of representable endomorphisms and splitting
//! inertial ones into semi-multiplication, uniform and mini parts.
//!
//! An endomorphism is inertial when every subgroup `H` has finite index in
//! `H + φ(H)`. The decision reads block data only: the `fin` part and blocks
//! of finite multiplicity never matter.

mod decompose;
mod sample;

pub use decompose::{
    bounded_split, decompose, is_uniform, ui_class_in_h, uniform_witness, Decomposition,
    DecompositionChecks,
};
pub use sample::random_inertial;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::endokit::{EndoError, Endo};
use crate::exactnum::{crt_solve, prime_factors, rat_int, residue_mod, Int, Prime, Rational, Residue};
use crate::groupkit::{invariants, BlockKind, Coord, Count, GroupDesc, GroupError, Invariants, Mult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InertiaError {
    #[error("endomorphism is not inertial")]
    NotInertial,
    #[error("certificate does not belong to this endomorphism")]
    CertificateMismatch,
    #[error("endomorphism is not uniform")]
    NotUniform,
    #[error("endomorphism is not bounded")]
    NotBounded,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Endo(#[from] EndoError),
}

/// Per-prime data of a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeCertificate {
    /// Common scalar of the cyclic blocks of infinite multiplicity.
    pub alpha_cyc: Option<Residue>,
    /// Scalar on the Prüfer block.
    pub alpha_div: Option<Rational>,
    /// The cyclic side and the divisible side disagree; a mini-multiplication
    /// carries the difference.
    pub bridged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InertialCertificate {
    /// Scalar on the torsion-free quotient, absent for periodic groups.
    pub r: Option<Rational>,
    /// Primes dividing the denominator of `r`.
    pub pi: BTreeSet<Prime>,
    pub per_prime: BTreeMap<Prime, PrimeCertificate>,
    /// Blocks of finite multiplicity.
    pub exempt_blocks: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    TfNotScalar,
    PiHasDivisible,
    DivNotScalar,
    CrtInconsistent,
    DivVsRMismatch,
    TauNonzero,
    OmegaDivMismatch,
    NotFtfrNotInteger,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::TfNotScalar => "TF_NOT_SCALAR",
            ViolationKind::PiHasDivisible => "PI_HAS_DIVISIBLE",
            ViolationKind::DivNotScalar => "DIV_NOT_SCALAR",
            ViolationKind::CrtInconsistent => "CRT_INCONSISTENT",
            ViolationKind::DivVsRMismatch => "DIV_VS_R_MISMATCH",
            ViolationKind::TauNonzero => "TAU_NONZERO",
            ViolationKind::OmegaDivMismatch => "OMEGA_DIV_MISMATCH",
            ViolationKind::NotFtfrNotInteger => "NOT_FTFR_NOT_INTEGER",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Template of a subgroup family along which `|H + φ(H) : H|` grows.
/// Every family is increasing, so its union is one subgroup of infinite index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WitnessHint {
    /// `H = ⟨v⟩` with `v` and `φ(v)` independent over `Q`.
    Rank { v: Vec<(Coord, Rational)> },
    /// `H_N = ⟨x_i + y_i : i < N⟩` across copies of two blocks of infinite
    /// multiplicity, scaled to equal orders.
    Diagonal { a: usize, b: usize },
    /// `H_N = ⟨x_N + 1/p^N⟩`: `x_N = src/p^N` for a divisible source,
    /// otherwise `⟨src_i + 1/p^i : i ≤ N⟩` over copies of the free block.
    Graph { src: Coord, dst: Coord },
    /// `H_N = ⟨v/p^N⟩` in a Prüfer block, `v = e_a + e_b`.
    PruferLayer { block: usize, a: u64, b: u64 },
    /// `H_N = ⟨src/p^N⟩`.
    TauSource { src: Coord, dst: Coord },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Violation {
    pub kind: ViolationKind,
    pub blocks: Vec<usize>,
    pub prime: Option<Prime>,
    pub hint: WitnessHint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Inertial(InertialCertificate),
    NotInertial(Vec<Violation>),
}

impl Verdict {
    pub fn is_inertial(&self) -> bool {
        matches!(self, Verdict::Inertial(_))
    }

    pub fn certificate(&self) -> Option<&InertialCertificate> {
        match self {
            Verdict::Inertial(c) => Some(c),
            Verdict::NotInertial(_) => None,
        }
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Verdict::Inertial(_) => &[],
            Verdict::NotInertial(v) => v,
        }
    }
}

/// Torsion-free coordinates with their nonzero column entries.
fn tf_columns(phi: &Endo) -> Vec<(Coord, BTreeMap<usize, Rational>)> {
    let tfc = phi.group().tf_copies();
    (0..tfc.len())
        .map(|j| {
            let col = (0..tfc.len()).filter(|&i| !phi.tf()[i][j].is_zero()).map(|i| (i, phi.tf()[i][j].clone())).collect();
            (Coord::new(tfc[j].block, tfc[j].copy), col)
        })
        .collect()
}

/// An element `v` with `v`, `φ(v)` independent, when the torsion-free action
/// is not a single scalar.
fn rank_witness(phi: &Endo) -> Option<Vec<(Coord, Rational)>> {
    let cols = tf_columns(phi);
    let one = Rational::from_integer(Int::from(1));
    for (j, (c, col)) in cols.iter().enumerate() {
        if col.keys().any(|&i| i != j) {
            return Some(vec![(*c, one)]);
        }
    }
    let diag = |j: usize| cols[j].1.get(&j).cloned().unwrap_or_else(Rational::zero);
    for j in 1..cols.len() {
        if diag(j) != diag(0) {
            return Some(vec![(cols[0].0, one.clone()), (cols[j].0, one)]);
        }
    }
    None
}

/// Two copies `a`, `b` of a Prüfer block with `v = e_a + e_b` not an
/// eigenvector, when the action is not scalar.
fn prufer_witness(phi: &Endo, block: usize, n: u64) -> Option<(u64, u64)> {
    let a = phi.action(block)?;
    a.as_scalar().is_none().then_some(())?;
    for j in 0..n {
        if (0..n).any(|i| i != j && !a.entry(i, j).is_zero()) {
            return Some((j, j));
        }
    }
    (1..n).find(|&j| a.entry(j, j) != a.entry(0, 0)).map(|j| (0, j))
}

/// Scalars of the cyclic blocks of infinite multiplicity at `p`.
fn omega_cyclic(phi: &Endo, p: Prime) -> Vec<(usize, Int, u32)> {
    let g = phi.group();
    g.cyclic_blocks(p)
        .into_iter()
        .filter_map(|i| match g.kind(i) {
            BlockKind::Cyclic { k, mult: Mult::Omega, .. } => {
                let s = phi.block_scalar(i).expect("scalar on blocks of infinite multiplicity");
                Some((i, s.to_integer(), *k))
            }
            _ => None,
        })
        .collect()
}

/// Common residue of the given cyclic scalars, or a pair of blocks that
/// disagree.
fn crt_or_pair(p: Prime, cyc: &[(usize, Int, u32)]) -> Result<Option<Residue>, (usize, usize)> {
    if cyc.is_empty() {
        return Ok(None);
    }
    let cs: Vec<(Int, Int)> = cyc.iter().map(|(_, s, k)| (s.clone(), p.pow(*k))).collect();
    if let Some(r) = crt_solve(&cs).expect("nonempty") {
        return Ok(Some(r));
    }
    for (x, (a, sa, ka)) in cyc.iter().enumerate() {
        for (b, sb, kb) in &cyc[x + 1..] {
            let m = p.pow((*ka).min(*kb));
            if (sa - sb) % &m != Int::zero() {
                return Err((*a, *b));
            }
        }
    }
    unreachable!("pairwise consistent prime-power congruences are solvable")
}

fn matches_mod(s: &Int, r: &Rational, m: &Int) -> bool {
    residue_mod(r, m).is_some_and(|v| (s - v) % m == Int::zero())
}

fn exempt_blocks(g: &GroupDesc) -> Vec<usize> {
    (0..g.blocks().len()).filter(|&i| matches!(g.kind(i), BlockKind::Cyclic { mult: Mult::Finite(_), .. })).collect()
}

/// Decides inertiality from block data.
pub fn is_inertial(phi: &Endo) -> Verdict {
    let g = phi.group().clone();
    if g.is_finite() {
        return Verdict::Inertial(InertialCertificate {
            r: None,
            pi: BTreeSet::new(),
            per_prime: BTreeMap::new(),
            exempt_blocks: exempt_blocks(&g),
        });
    }
    if g.is_ftfr() {
        check_ftfr(phi, &g)
    } else {
        check_free(phi, &g)
    }
}

fn tau_violation(phi: &Endo) -> Option<Violation> {
    let ((src, dst), _) = phi.tau().iter().next()?;
    Some(Violation {
        kind: ViolationKind::TauNonzero,
        blocks: vec![src.block, dst.block],
        prime: phi.group().kind(dst.block).prime(),
        hint: WitnessHint::TauSource { src: *src, dst: *dst },
    })
}

/// Groups with a free block of infinite rank: inertial endomorphisms are an
/// integer multiplication plus a finitary part.
fn check_free(phi: &Endo, g: &GroupDesc) -> Verdict {
    let f = g.free_omega().expect("not of finite torsion-free rank");
    let mut out = Vec::new();
    if let Some(v) = rank_witness(phi) {
        out.push(Violation {
            kind: ViolationKind::TfNotScalar,
            blocks: v.iter().map(|(c, _)| c.block).collect(),
            prime: None,
            hint: WitnessHint::Rank { v },
        });
        return Verdict::NotInertial(out);
    }
    let s = phi.block_scalar(f).expect("scalar on the free block");
    let tfc = g.tf_copies();
    let m = if tfc.is_empty() { s.clone() } else { phi.tf()[0][0].clone() };
    let pair = |c: Coord| {
        vec![(c, Rational::from_integer(Int::from(1))), (Coord::new(f, 0), Rational::from_integer(Int::from(1)))]
    };
    if !m.is_integer() {
        let c = Coord::new(tfc[0].block, tfc[0].copy);
        out.push(Violation {
            kind: ViolationKind::NotFtfrNotInteger,
            blocks: vec![c.block, f],
            prime: None,
            hint: WitnessHint::Rank { v: pair(c) },
        });
        return Verdict::NotInertial(out);
    }
    if s != m {
        let c = Coord::new(tfc[0].block, tfc[0].copy);
        out.push(Violation {
            kind: ViolationKind::TfNotScalar,
            blocks: vec![c.block, f],
            prime: None,
            hint: WitnessHint::Rank { v: pair(c) },
        });
        return Verdict::NotInertial(out);
    }
    let mut per_prime = BTreeMap::new();
    for p in g.primes() {
        let mut pc = PrimeCertificate { alpha_cyc: None, alpha_div: None, bridged: false };
        if let Some(b) = g.prufer_block(p) {
            let BlockKind::Prufer { copies, .. } = g.kind(b) else { unreachable!() };
            if let Some((x, y)) = copies.finite().and_then(|n| prufer_witness(phi, b, n)) {
                out.push(Violation {
                    kind: ViolationKind::DivNotScalar,
                    blocks: vec![b],
                    prime: Some(p),
                    hint: WitnessHint::PruferLayer { block: b, a: x, b: y },
                });
            } else if phi.block_scalar(b).as_ref() != Some(&m) {
                out.push(Violation {
                    kind: ViolationKind::OmegaDivMismatch,
                    blocks: vec![f, b],
                    prime: Some(p),
                    hint: WitnessHint::Graph { src: Coord::new(f, 0), dst: Coord::new(b, 0) },
                });
            }
            pc.alpha_div = Some(m.clone());
        }
        let cyc = omega_cyclic(phi, p);
        for (i, s, k) in &cyc {
            if !matches_mod(s, &m, &p.pow(*k)) {
                out.push(Violation {
                    kind: ViolationKind::OmegaDivMismatch,
                    blocks: vec![f, *i],
                    prime: Some(p),
                    hint: WitnessHint::Diagonal { a: f, b: *i },
                });
            }
        }
        if let Some(eps) = cyc.iter().map(|c| c.2).max() {
            pc.alpha_cyc = Some(Residue::new(&m.to_integer(), p, eps));
        }
        if pc.alpha_cyc.is_some() || pc.alpha_div.is_some() {
            per_prime.insert(p, pc);
        }
    }
    if let Some(v) = tau_violation(phi) {
        out.push(v);
    }
    if !out.is_empty() {
        return Verdict::NotInertial(out);
    }
    Verdict::Inertial(InertialCertificate { r: Some(m), pi: BTreeSet::new(), per_prime, exempt_blocks: exempt_blocks(g) })
}

fn check_ftfr(phi: &Endo, g: &GroupDesc) -> Verdict {
    let inv = invariants(g);
    let mut out = Vec::new();
    let tfc = g.tf_copies();
    let r = if tfc.is_empty() {
        None
    } else {
        if let Some(v) = rank_witness(phi) {
            out.push(Violation {
                kind: ViolationKind::TfNotScalar,
                blocks: v.iter().map(|(c, _)| c.block).collect(),
                prime: None,
                hint: WitnessHint::Rank { v },
            });
            return Verdict::NotInertial(out);
        }
        Some(phi.tf()[0][0].clone())
    };
    let pi = r.as_ref().map(|r| prime_factors(r.denom())).unwrap_or_default();
    for p in &pi {
        if let Some(b) = g.prufer_block(*p) {
            out.push(Violation {
                kind: ViolationKind::PiHasDivisible,
                blocks: vec![tfc[0].block, b],
                prime: Some(*p),
                hint: WitnessHint::Graph { src: Coord::new(tfc[0].block, tfc[0].copy), dst: Coord::new(b, 0) },
            });
        }
    }

    let mut per_prime = BTreeMap::new();
    for p in g.primes() {
        let d = inv.at(p);
        let mut pc = PrimeCertificate { alpha_cyc: None, alpha_div: None, bridged: false };
        if let Some(b) = g.prufer_block(p) {
            let BlockKind::Prufer { copies, .. } = g.kind(b) else { unreachable!() };
            if let Some((x, y)) = copies.finite().and_then(|n| prufer_witness(phi, b, n)) {
                out.push(Violation {
                    kind: ViolationKind::DivNotScalar,
                    blocks: vec![b],
                    prime: Some(p),
                    hint: WitnessHint::PruferLayer { block: b, a: x, b: y },
                });
            } else {
                let a = phi.block_scalar(b).expect("scalar action");
                if let Some(r) = &r {
                    if d.s_rank > 0 && !pi.contains(&p) && a != *r {
                        let src = tfc.iter().find(|c| g.tf_pi(**c).contains(&p)).expect("p-divisible copy");
                        out.push(Violation {
                            kind: ViolationKind::DivVsRMismatch,
                            blocks: vec![src.block, b],
                            prime: Some(p),
                            hint: WitnessHint::Graph { src: Coord::new(src.block, src.copy), dst: Coord::new(b, 0) },
                        });
                    }
                }
                pc.alpha_div = Some(a);
            }
        }
        let cyc = omega_cyclic(phi, p);
        match crt_or_pair(p, &cyc) {
            Ok(res) => pc.alpha_cyc = res,
            Err((a, b)) => out.push(Violation {
                kind: ViolationKind::CrtInconsistent,
                blocks: vec![a, b],
                prime: Some(p),
                hint: WitnessHint::Diagonal { a, b },
            }),
        }
        if d.d == Count::Omega {
            if let Some(a) = &pc.alpha_div {
                let b = g.prufer_block(p).unwrap();
                for (i, s, k) in &cyc {
                    if !matches_mod(s, a, &p.pow(*k)) {
                        out.push(Violation {
                            kind: ViolationKind::OmegaDivMismatch,
                            blocks: vec![*i, b],
                            prime: Some(p),
                            hint: WitnessHint::Diagonal { a: *i, b },
                        });
                    }
                }
            }
        }
        if pc.alpha_cyc.is_some() || pc.alpha_div.is_some() {
            per_prime.insert(p, pc);
        }
    }
    if let Some(v) = tau_violation(phi) {
        out.push(v);
    }
    if !out.is_empty() {
        out.sort_by_key(|v| v.kind);
        return Verdict::NotInertial(out);
    }
    let mut cert = InertialCertificate { r, pi, per_prime, exempt_blocks: exempt_blocks(g) };
    let gaps = bridge_gaps(&cert, &inv);
    for (p, pc) in cert.per_prime.iter_mut() {
        pc.bridged = gaps.contains_key(p);
    }
    Verdict::Inertial(cert)
}

/// Integers `s_p` in `[0, p^{c_p})` by which the cyclic side exceeds the
/// uniform target at each prime, after the semi-multiplication part is
/// removed. Only nonzero gaps are listed.
pub(crate) fn bridge_gaps(cert: &InertialCertificate, inv: &Invariants) -> BTreeMap<Prime, Int> {
    let mut out = BTreeMap::new();
    let zero = Rational::zero();
    for (p, pc) in &cert.per_prime {
        let Some(alpha) = &pc.alpha_cyc else { continue };
        let d = inv.at(*p);
        let r = match &cert.r {
            Some(r) if !cert.pi.contains(p) => r,
            _ => &zero,
        };
        let cyc1 = rat_int(alpha.value()) - r;
        let beta = if d.s_rank > 0 {
            zero.clone()
        } else if let Some(a) = &pc.alpha_div {
            a - r
        } else {
            continue;
        };
        let gap = &cyc1 - &beta;
        let eps = p.pow(alpha.exp());
        if residue_mod(&gap, &eps).expect("p-local").is_zero() {
            continue;
        }
        out.insert(*p, residue_mod(&gap, &p.pow(d.c)).expect("p-local"));
    }
    out
}

#[cfg(test)]
mod tests;
