use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::Zero;

use super::{Action, Endo};
use crate::exactnum::{fmt_rational, is_pi_number, Int, Rational};
use crate::groupkit::{BlockKind, Coord, Element, GroupDesc, Mult, Order};

/// One assignment of an endomorphism description. Later entries overwrite
/// earlier ones at the same position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    /// Diagonal of a torsion-free block, or the scalar of the free block.
    TfScalar { block: usize, value: Rational },
    Tf { src: Coord, dst: Coord, value: Rational },
    DivScalar { block: usize, value: Rational },
    Div { block: usize, src: u64, dst: u64, value: Rational },
    CycScalar { block: usize, value: Rational },
    Cyc { block: usize, src: u64, dst: u64, value: Rational },
    Tau { src: Coord, dst: Coord, value: Rational },
    Fin { src: Coord, modulus: Option<Int>, image: Vec<(Coord, Rational)> },
}

/// An unvalidated endomorphism description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoDraft {
    pub group: Arc<GroupDesc>,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EndoViolation {
    WrongBlock { entry: &'static str, block: String },
    CoordOutOfRange { coord: String },
    /// A torsion-free entry whose source inverts a prime the target does not.
    TfNotContained { src: String, dst: String },
    /// A torsion-free entry outside the target's ring of rationals.
    TfValue { src: String, dst: String, value: String },
    FreeNotInteger { value: String },
    NotPLocal { block: String, value: String },
    MatrixOnOmega { block: String },
    TauNotDivisible { src: String, prime: u64 },
    FinFromPrufer { src: String },
    FinImage { src: String, reason: String },
    FinNotTorsion { src: String },
    /// Order of the image does not divide the order of the source.
    FinOrder { src: String },
    FinModulus { src: String },
}

impl fmt::Display for EndoViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use EndoViolation::*;
        match self {
            WrongBlock { entry, block } => write!(f, "{entry} entry on block {block} of the wrong kind"),
            CoordOutOfRange { coord } => write!(f, "coordinate {coord} out of range"),
            TfNotContained { src, dst } => write!(f, "tf {src} -> {dst}: pi(source) not contained in pi(target)"),
            TfValue { src, dst, value } => write!(f, "tf {src} -> {dst}: {value} has a denominator outside pi(target)"),
            FreeNotInteger { value } => write!(f, "free block scalar {value} is not an integer"),
            NotPLocal { block, value } => write!(f, "{value} is not p-integral on block {block}"),
            MatrixOnOmega { block } => write!(f, "block {block} has infinitely many copies and takes a scalar only"),
            TauNotDivisible { src, prime } => write!(f, "tau source {src} is not {prime}-divisible"),
            FinFromPrufer { src } => write!(f, "fin entry from Prüfer coordinate {src}"),
            FinImage { src, reason } => write!(f, "fin image of {src}: {reason}"),
            FinNotTorsion { src } => write!(f, "fin image of {src} is not torsion"),
            FinOrder { src } => write!(f, "fin image of {src} has order not dividing the order of the source"),
            FinModulus { src } => write!(f, "fin entry of {src}: modulus must be prime to pi(source) and divisible by the image order"),
        }
    }
}

fn coord_name(g: &GroupDesc, c: Coord) -> String {
    match g.blocks().get(c.block) {
        Some(b) => format!("{}.{}", b.name, c.copy),
        None => format!("#{}.{}", c.block, c.copy),
    }
}

fn in_range(g: &GroupDesc, c: Coord) -> bool {
    c.block < g.blocks().len() && g.kind(c.block).mult().contains(c.copy)
}

/// Checks every domain rule of a draft.
pub fn validate(d: &EndoDraft) -> Result<(), Vec<EndoViolation>> {
    let g = &*d.group;
    let mut out = Vec::new();
    let block_name = |b: usize| g.blocks().get(b).map_or_else(|| format!("#{b}"), |x| x.name.clone());
    let block_ok = |b: usize| b < g.blocks().len();
    for e in &d.entries {
        match e {
            Entry::TfScalar { block, value } => {
                if !block_ok(*block) {
                    out.push(EndoViolation::WrongBlock { entry: "tf", block: block_name(*block) });
                    continue;
                }
                match g.kind(*block) {
                    BlockKind::TorsionFree { pi, .. } => {
                        if !is_pi_number(value.denom(), pi) {
                            let c = coord_name(g, Coord::new(*block, 0));
                            out.push(EndoViolation::TfValue { src: c.clone(), dst: c, value: fmt_rational(value) });
                        }
                    }
                    BlockKind::FreeOmega => {
                        if !value.is_integer() {
                            out.push(EndoViolation::FreeNotInteger { value: fmt_rational(value) });
                        }
                    }
                    _ => out.push(EndoViolation::WrongBlock { entry: "tf", block: block_name(*block) }),
                }
            }
            Entry::Tf { src, dst, value } => {
                let kinds_ok = [src, dst].iter().all(|c| {
                    in_range(g, **c) && matches!(g.kind(c.block), BlockKind::TorsionFree { .. })
                });
                if !kinds_ok {
                    out.push(EndoViolation::CoordOutOfRange {
                        coord: format!("{} -> {}", coord_name(g, *src), coord_name(g, *dst)),
                    });
                    continue;
                }
                if value.is_zero() {
                    continue;
                }
                let ps = g.kind(src.block).pi().unwrap();
                let pt = g.kind(dst.block).pi().unwrap();
                if !ps.is_subset(pt) {
                    out.push(EndoViolation::TfNotContained { src: coord_name(g, *src), dst: coord_name(g, *dst) });
                } else if !is_pi_number(value.denom(), pt) {
                    out.push(EndoViolation::TfValue {
                        src: coord_name(g, *src),
                        dst: coord_name(g, *dst),
                        value: fmt_rational(value),
                    });
                }
            }
            Entry::DivScalar { block, value } | Entry::CycScalar { block, value } => {
                let want_prufer = matches!(e, Entry::DivScalar { .. });
                check_block_value(g, *block, want_prufer, value, &mut out);
            }
            Entry::Div { block, src, dst, value } | Entry::Cyc { block, src, dst, value } => {
                let want_prufer = matches!(e, Entry::Div { .. });
                if !check_block_value(g, *block, want_prufer, value, &mut out) {
                    continue;
                }
                match g.kind(*block).mult() {
                    Mult::Omega => out.push(EndoViolation::MatrixOnOmega { block: block_name(*block) }),
                    Mult::Finite(n) => {
                        if *src >= n || *dst >= n {
                            out.push(EndoViolation::CoordOutOfRange {
                                coord: format!("{}.{} -> {}.{}", block_name(*block), src, block_name(*block), dst),
                            });
                        }
                    }
                }
            }
            Entry::Tau { src, dst, .. } => {
                let ok = in_range(g, *src)
                    && in_range(g, *dst)
                    && matches!(g.kind(src.block), BlockKind::TorsionFree { .. })
                    && matches!(g.kind(dst.block), BlockKind::Prufer { .. });
                if !ok {
                    out.push(EndoViolation::WrongBlock { entry: "tau", block: coord_name(g, *src) });
                    continue;
                }
                let p = g.kind(dst.block).prime().unwrap();
                if !g.kind(src.block).pi().unwrap().contains(&p) {
                    out.push(EndoViolation::TauNotDivisible { src: coord_name(g, *src), prime: p.get() });
                }
            }
            Entry::Fin { src, modulus, image } => check_fin(g, *src, modulus.as_ref(), image, &mut out),
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn check_block_value(
    g: &GroupDesc,
    block: usize,
    want_prufer: bool,
    value: &Rational,
    out: &mut Vec<EndoViolation>,
) -> bool {
    let entry = if want_prufer { "div" } else { "cyc" };
    let name = g.blocks().get(block).map_or_else(|| format!("#{block}"), |b| b.name.clone());
    let p = match g.blocks().get(block).map(|b| &b.kind) {
        Some(BlockKind::Prufer { p, .. }) if want_prufer => *p,
        Some(BlockKind::Cyclic { p, .. }) if !want_prufer => *p,
        _ => {
            out.push(EndoViolation::WrongBlock { entry, block: name });
            return false;
        }
    };
    if !p.is_local(value) {
        out.push(EndoViolation::NotPLocal { block: name, value: fmt_rational(value) });
        return false;
    }
    true
}

fn check_fin(g: &GroupDesc, src: Coord, modulus: Option<&Int>, image: &[(Coord, Rational)], out: &mut Vec<EndoViolation>) {
    let name = coord_name(g, src);
    if !in_range(g, src) {
        out.push(EndoViolation::CoordOutOfRange { coord: name });
        return;
    }
    let img = match Element::new(g, image.iter().cloned()) {
        Ok(x) => x,
        Err(e) => {
            out.push(EndoViolation::FinImage { src: name, reason: e.to_string() });
            return;
        }
    };
    let ord = match img.order(g) {
        Order::Finite(n) => n,
        Order::Infinite => {
            out.push(EndoViolation::FinNotTorsion { src: name });
            return;
        }
    };
    match g.kind(src.block) {
        BlockKind::Prufer { .. } => out.push(EndoViolation::FinFromPrufer { src: name }),
        BlockKind::Cyclic { p, k, .. } => {
            if modulus.is_some() {
                out.push(EndoViolation::FinModulus { src: name });
            } else if !p.pow(*k).is_multiple_of(&ord) {
                out.push(EndoViolation::FinOrder { src: name });
            }
        }
        BlockKind::FreeOmega => {
            if modulus.is_some() {
                out.push(EndoViolation::FinModulus { src: name });
            }
        }
        BlockKind::TorsionFree { pi, .. } => {
            let w = modulus.cloned().unwrap_or_else(|| ord.clone());
            let coprime = w > Int::zero() && pi.iter().all(|p| !p.divides(&w));
            if !coprime || !w.is_multiple_of(&ord) {
                out.push(EndoViolation::FinModulus { src: name });
            }
        }
    }
}

impl EndoDraft {
    pub fn new(group: Arc<GroupDesc>) -> EndoDraft {
        EndoDraft { group, entries: Vec::new() }
    }

    pub fn push(mut self, e: Entry) -> EndoDraft {
        self.entries.push(e);
        self
    }

    /// Validates and brings the draft into normal form.
    pub fn build(&self) -> Result<Endo, Vec<EndoViolation>> {
        validate(self)?;
        let g = self.group.clone();
        let mut e = Endo::zero(g.clone());
        let tfc = g.tf_copies();
        let tf_idx = |c: Coord| tfc.iter().position(|t| t.block == c.block && t.copy == c.copy).unwrap();
        for entry in &self.entries {
            match entry {
                Entry::TfScalar { block, value } => match g.kind(*block) {
                    BlockKind::FreeOmega => e.blocks[*block] = Some(Action::Scalar(value.clone())),
                    _ => {
                        for (k, c) in tfc.iter().enumerate() {
                            if c.block == *block {
                                e.tf[k][k] = value.clone();
                            }
                        }
                    }
                },
                Entry::Tf { src, dst, value } => e.tf[tf_idx(*dst)][tf_idx(*src)] = value.clone(),
                Entry::DivScalar { block, value } | Entry::CycScalar { block, value } => {
                    match e.blocks[*block].as_mut().unwrap() {
                        Action::Scalar(s) => *s = value.clone(),
                        Action::Matrix(m) => {
                            for (i, row) in m.iter_mut().enumerate() {
                                row[i] = value.clone();
                            }
                        }
                    }
                }
                Entry::Div { block, src, dst, value } | Entry::Cyc { block, src, dst, value } => {
                    if let Some(Action::Matrix(m)) = e.blocks[*block].as_mut() {
                        m[*dst as usize][*src as usize] = value.clone();
                    }
                }
                Entry::Tau { src, dst, value } => {
                    e.tau.insert((*src, *dst), value.clone());
                }
                Entry::Fin { src, image, .. } => {
                    let img = Element::new(&g, image.iter().cloned()).expect("validated");
                    e.fin.insert(*src, img);
                }
            }
        }
        e.canonicalize();
        Ok(e)
    }
}

impl Endo {
    /// Adds a single generator image to `fin`.
    pub fn with_fin(&self, src: Coord, image: &Element) -> Result<Endo, Vec<EndoViolation>> {
        let d = EndoDraft::new(self.group.clone()).push(Entry::Fin {
            src,
            modulus: None,
            image: image.iter().map(|(c, q)| (*c, q.clone())).collect(),
        });
        let f = d.build()?;
        Ok(self.add(&f).expect("same group"))
    }

    /// The draft that rebuilds this endomorphism.
    pub fn to_draft(&self) -> EndoDraft {
        let g = &self.group;
        let mut entries = Vec::new();
        let tfc = g.tf_copies();
        for (t, row) in self.tf.iter().enumerate() {
            for (s, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    let c = |x: usize| Coord::new(tfc[x].block, tfc[x].copy);
                    entries.push(Entry::Tf { src: c(s), dst: c(t), value: v.clone() });
                }
            }
        }
        for (i, a) in self.blocks.iter().enumerate() {
            let Some(a) = a else { continue };
            let kind = g.kind(i);
            match a {
                Action::Scalar(s) if !s.is_zero() => entries.push(match kind {
                    BlockKind::FreeOmega => Entry::TfScalar { block: i, value: s.clone() },
                    BlockKind::Prufer { .. } => Entry::DivScalar { block: i, value: s.clone() },
                    _ => Entry::CycScalar { block: i, value: s.clone() },
                }),
                Action::Scalar(_) => {}
                Action::Matrix(m) => {
                    for (dst, row) in m.iter().enumerate() {
                        for (src, v) in row.iter().enumerate() {
                            if v.is_zero() {
                                continue;
                            }
                            let (src, dst) = (src as u64, dst as u64);
                            entries.push(match kind {
                                BlockKind::Prufer { .. } => Entry::Div { block: i, src, dst, value: v.clone() },
                                _ => Entry::Cyc { block: i, src, dst, value: v.clone() },
                            });
                        }
                    }
                }
            }
        }
        for ((src, dst), v) in &self.tau {
            entries.push(Entry::Tau { src: *src, dst: *dst, value: v.clone() });
        }
        for (src, img) in &self.fin {
            entries.push(Entry::Fin {
                src: *src,
                modulus: None,
                image: img.iter().map(|(c, q)| (*c, q.clone())).collect(),
            });
        }
        EndoDraft { group: self.group.clone(), entries }
    }
}
