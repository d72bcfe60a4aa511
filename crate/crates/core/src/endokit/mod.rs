//! Representable endomorphisms in a finite normal form.
//!
//! An [`Endo`] is stored as
//! * `tf`: a rational matrix (`[target][source]`) over the finite-rank
//!   torsion-free copies,
//! * one [`Action`] per cyclic, Prüfer and free block: a scalar on blocks of
//!   infinite multiplicity, a matrix on finite ones,
//! * `tau`: maps `q ↦ p-part(c·q mod Z)` from a `p`-divisible torsion-free
//!   copy into a Prüfer coordinate,
//! * `fin`: finitely many generator images. A cyclic or free source copy
//!   maps by `e ↦ t`; a torsion-free source maps by `q ↦ res_w(q)·t` with
//!   `w = ord t` prime to its `pi`.
//!
//! The normal form is unique, so equality is structural.

mod classify;
mod draft;
mod ops;
pub mod random;

pub use classify::{classify, close, fm_split, is_finitary, is_multiplication, EndoClass, Mini, Multiplier, Quasi};
pub(crate) use classify::crt_coprime;
pub use draft::{validate, EndoDraft, EndoViolation, Entry};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::{fmt_rational, rat_int, residue_mod, Rational};
use crate::groupkit::{BlockKind, Coord, Element, GroupDesc, GroupError, Mult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndoError {
    #[error("endomorphisms act on different groups")]
    GroupMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid endomorphism: {0}")]
    Invalid(String),
}

/// Action of an endomorphism inside one cyclic, Prüfer or free block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Scalar(Rational),
    /// `[target][source]` over the copies of a finite block.
    Matrix(Vec<Vec<Rational>>),
}

impl Action {
    fn zero_for(kind: &BlockKind) -> Option<Action> {
        match kind {
            BlockKind::TorsionFree { .. } => None,
            k => Some(match k.mult() {
                Mult::Omega => Action::Scalar(Rational::zero()),
                Mult::Finite(n) => Action::Matrix(vec![vec![Rational::zero(); n as usize]; n as usize]),
            }),
        }
    }

    fn scalar_for(kind: &BlockKind, s: &Rational) -> Option<Action> {
        match Action::zero_for(kind)? {
            Action::Scalar(_) => Some(Action::Scalar(s.clone())),
            Action::Matrix(mut m) => {
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = s.clone();
                }
                Some(Action::Matrix(m))
            }
        }
    }

    /// Entry `target <- source`.
    pub fn entry(&self, target: u64, source: u64) -> Rational {
        match self {
            Action::Scalar(s) => {
                if target == source {
                    s.clone()
                } else {
                    Rational::zero()
                }
            }
            Action::Matrix(m) => m[target as usize][source as usize].clone(),
        }
    }

    /// The common diagonal value when the action is scalar.
    pub fn as_scalar(&self) -> Option<Rational> {
        match self {
            Action::Scalar(s) => Some(s.clone()),
            Action::Matrix(m) => {
                let d = m.first().map_or_else(Rational::zero, |r| r[0].clone());
                for (i, row) in m.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        if (i == j && *x != d) || (i != j && !x.is_zero()) {
                            return None;
                        }
                    }
                }
                Some(d)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Action::Scalar(s) => s.is_zero(),
            Action::Matrix(m) => m.iter().flatten().all(|x| x.is_zero()),
        }
    }

    /// All entries, row-major.
    pub fn entries(&self) -> Vec<&Rational> {
        match self {
            Action::Scalar(s) => vec![s],
            Action::Matrix(m) => m.iter().flatten().collect(),
        }
    }
}

/// An endomorphism in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Endo {
    group: Arc<GroupDesc>,
    tf: Vec<Vec<Rational>>,
    blocks: Vec<Option<Action>>,
    tau: BTreeMap<(Coord, Coord), Rational>,
    fin: BTreeMap<Coord, Element>,
}

/// `q ↦ α·q` on a Prüfer coordinate, with `α` a `p`-local rational.
pub(crate) fn prufer_mul(alpha: &Rational, q: &Rational) -> Rational {
    if q.is_zero() || alpha.is_zero() {
        return Rational::zero();
    }
    let r = residue_mod(alpha, q.denom()).expect("p-local scalar on a p-power denominator");
    rat_int(&r) * q
}

impl Endo {
    pub fn zero(group: Arc<GroupDesc>) -> Endo {
        let n = group.tf_copies().len();
        let blocks = group.blocks().iter().map(|b| Action::zero_for(&b.kind)).collect();
        Endo {
            group,
            tf: vec![vec![Rational::zero(); n]; n],
            blocks,
            tau: BTreeMap::new(),
            fin: BTreeMap::new(),
        }
    }

    /// Acts on every block by the scalar `f(block)`.
    pub fn blockwise(
        group: Arc<GroupDesc>,
        f: impl Fn(usize, &BlockKind) -> Rational,
    ) -> Result<Endo, EndoError> {
        let mut e = Endo::zero(group.clone());
        let tfc = group.tf_copies();
        for (i, b) in group.blocks().iter().enumerate() {
            let s = f(i, &b.kind);
            match &b.kind {
                BlockKind::TorsionFree { pi, .. } => {
                    if !crate::exactnum::is_pi_number(s.denom(), pi) {
                        return Err(EndoError::Invalid(format!(
                            "{} does not act on block {}",
                            fmt_rational(&s),
                            b.name
                        )));
                    }
                    for (k, c) in tfc.iter().enumerate() {
                        if c.block == i {
                            e.tf[k][k] = s.clone();
                        }
                    }
                }
                BlockKind::FreeOmega => {
                    if !s.is_integer() {
                        return Err(EndoError::Invalid(format!("{} does not act on block {}", fmt_rational(&s), b.name)));
                    }
                    e.blocks[i] = Action::scalar_for(&b.kind, &s);
                }
                BlockKind::Cyclic { p, .. } | BlockKind::Prufer { p, .. } => {
                    if !p.is_local(&s) {
                        return Err(EndoError::Invalid(format!("{} does not act on block {}", fmt_rational(&s), b.name)));
                    }
                    e.blocks[i] = Action::scalar_for(&b.kind, &s);
                }
            }
        }
        e.canonicalize();
        Ok(e)
    }

    /// Multiplication by `r` on every block.
    pub fn scalar(group: Arc<GroupDesc>, r: &Rational) -> Result<Endo, EndoError> {
        Endo::blockwise(group, |_, _| r.clone())
    }

    pub fn identity(group: Arc<GroupDesc>) -> Endo {
        Endo::scalar(group, &Rational::one()).expect("identity acts everywhere")
    }

    pub fn group(&self) -> &Arc<GroupDesc> {
        &self.group
    }

    pub fn same_group(&self, other: &Endo) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || self.group == other.group
    }

    pub fn tf(&self) -> &[Vec<Rational>] {
        &self.tf
    }

    /// The action on a cyclic, Prüfer or free block.
    pub fn action(&self, block: usize) -> Option<&Action> {
        self.blocks[block].as_ref()
    }

    pub fn tau(&self) -> &BTreeMap<(Coord, Coord), Rational> {
        &self.tau
    }

    pub fn fin(&self) -> &BTreeMap<Coord, Element> {
        &self.fin
    }

    /// Index of a torsion-free coordinate in the `tf` matrix.
    pub fn tf_index(&self, c: Coord) -> Option<usize> {
        self.group.tf_copies().iter().position(|t| t.block == c.block && t.copy == c.copy)
    }

    /// `tf = r·I` for a single rational `r`; the free block must act by `r` too.
    pub fn tf_scalar(&self) -> Option<Rational> {
        let n = self.tf.len();
        let r = if n > 0 {
            self.tf[0][0].clone()
        } else {
            let f = self.group.free_omega()?;
            self.blocks[f].as_ref().and_then(|a| a.as_scalar()).unwrap_or_else(Rational::zero)
        };
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { r.clone() } else { Rational::zero() };
                if self.tf[i][j] != want {
                    return None;
                }
            }
        }
        if let Some(f) = self.group.free_omega() {
            if self.blocks[f].as_ref().and_then(|a| a.as_scalar()) != Some(r.clone()) {
                return None;
            }
        }
        Some(r)
    }

    /// Scalar of a block whose action is scalar.
    pub fn block_scalar(&self, block: usize) -> Option<Rational> {
        self.blocks[block].as_ref().and_then(|a| a.as_scalar())
    }

    /// Copy of this endomorphism without its `fin` part.
    pub fn without_fin(&self) -> Endo {
        let mut e = self.clone();
        e.fin.clear();
        e
    }

    /// Only the `fin` part together with the matrices of finite cyclic blocks.
    pub fn finite_part(&self) -> Endo {
        let mut e = Endo::zero(self.group.clone());
        e.fin = self.fin.clone();
        for (i, b) in self.group.blocks().iter().enumerate() {
            if matches!(b.kind, BlockKind::Cyclic { mult: Mult::Finite(_), .. }) {
                e.blocks[i] = self.blocks[i].clone();
            }
        }
        e
    }

    /// Restores the normal form after raw edits.
    fn canonicalize(&mut self) {
        let g = self.group.clone();
        // tau entries whose source is not p-divisible have finite image
        let moved: Vec<((Coord, Coord), Rational)> = self
            .tau
            .iter()
            .filter(|((src, dst), _)| {
                let p = g.kind(dst.block).prime().expect("Prüfer target");
                !g.kind(src.block).pi().expect("torsion-free source").contains(&p)
            })
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        for ((src, dst), c) in moved {
            self.tau.remove(&(src, dst));
            let p = g.kind(dst.block).prime().unwrap();
            let t = crate::exactnum::p_part_mod_one(&c, p);
            let img = self.fin.entry(src).or_default();
            img.add_at(&g, dst, &t).expect("p-part lies in the Prüfer group");
        }
        self.tau.retain(|_, v| !v.is_zero());

        // own-block components of finite cyclic sources belong to the matrix
        let finite: Vec<Coord> = self
            .fin
            .keys()
            .filter(|c| matches!(g.kind(c.block), BlockKind::Cyclic { mult: Mult::Finite(_), .. }))
            .copied()
            .collect();
        for src in finite {
            let img = self.fin.get(&src).unwrap().clone();
            let own = img.filter(|c| c.block == src.block);
            if own.is_empty() {
                continue;
            }
            if let Some(Action::Matrix(m)) = &mut self.blocks[src.block] {
                for (c, q) in own.iter() {
                    m[c.copy as usize][src.copy as usize] += q;
                }
            }
            self.fin.insert(src, img.filter(|c| c.block != src.block));
        }

        // cyclic entries live in [0, p^k)
        for (i, b) in g.blocks().iter().enumerate() {
            if let BlockKind::Cyclic { p, k, .. } = b.kind {
                let m = p.pow(k);
                let red = |x: &mut Rational| {
                    let v = residue_mod(x, &m).expect("cyclic entries are p-local");
                    *x = rat_int(&v);
                };
                match self.blocks[i].as_mut().unwrap() {
                    Action::Scalar(s) => red(s),
                    Action::Matrix(mm) => mm.iter_mut().flatten().for_each(red),
                }
            }
        }
        self.fin.retain(|_, v| !v.is_zero());
    }
}

impl fmt::Display for Endo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::cli::serialize_endo_body(self))
    }
}
