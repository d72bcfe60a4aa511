use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::{prufer_mul, Action, Endo, EndoError};
use crate::exactnum::{p_part_mod_one, rat_int, residue_mod, Int, Rational};
use crate::groupkit::{BlockKind, Coord, Element, Mult, Order};

fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

fn action_zip(a: &Action, b: &Action, f: impl Fn(&Rational, &Rational) -> Rational) -> Action {
    match (a, b) {
        (Action::Scalar(x), Action::Scalar(y)) => Action::Scalar(f(x, y)),
        (Action::Matrix(x), Action::Matrix(y)) => Action::Matrix(
            x.iter().zip(y).map(|(r, s)| r.iter().zip(s).map(|(u, v)| f(u, v)).collect()).collect(),
        ),
        _ => unreachable!("actions of one block share a shape"),
    }
}

fn action_map(a: &Action, f: impl Fn(&Rational) -> Rational) -> Action {
    match a {
        Action::Scalar(x) => Action::Scalar(f(x)),
        Action::Matrix(m) => Action::Matrix(m.iter().map(|r| r.iter().map(&f).collect()).collect()),
    }
}

impl Endo {
    fn check(&self, other: &Endo) -> Result<(), EndoError> {
        if self.same_group(other) {
            Ok(())
        } else {
            Err(EndoError::GroupMismatch)
        }
    }

    /// Image of an element.
    pub fn apply(&self, x: &Element) -> Result<Element, EndoError> {
        let g = &*self.group;
        let tfc = g.tf_copies();
        let mut out = Element::zero();
        for (c, q) in x.iter() {
            let kind = g.kind(c.block);
            match kind {
                BlockKind::Cyclic { .. } | BlockKind::Prufer { .. } | BlockKind::FreeOmega => {
                    let a = self.blocks[c.block].as_ref().expect("block action");
                    let targets: Vec<u64> = match (a, kind.mult()) {
                        (Action::Matrix(m), _) => (0..m.len() as u64).collect(),
                        (Action::Scalar(_), _) => vec![c.copy],
                    };
                    for t in targets {
                        let s = a.entry(t, c.copy);
                        if s.is_zero() {
                            continue;
                        }
                        let v = if matches!(kind, BlockKind::Prufer { .. }) { prufer_mul(&s, q) } else { &s * q };
                        out.add_at(g, Coord::new(c.block, t), &v)?;
                    }
                    if let Some(t) = self.fin.get(c) {
                        out = out.add(g, &t.scale(g, &q.to_integer()))?;
                    }
                }
                BlockKind::TorsionFree { .. } => {
                    let k = tfc.iter().position(|t| t.block == c.block && t.copy == c.copy).expect("tf copy");
                    for (t, row) in self.tf.iter().enumerate() {
                        if !row[k].is_zero() {
                            out.add_at(g, Coord::new(tfc[t].block, tfc[t].copy), &(&row[k] * q))?;
                        }
                    }
                    for ((src, dst), s) in self.tau.range((*c, Coord::new(0, 0))..) {
                        if src != c {
                            break;
                        }
                        let p = g.kind(dst.block).prime().expect("Prüfer target");
                        out.add_at(g, *dst, &p_part_mod_one(&(s * q), p))?;
                    }
                    if let Some(t) = self.fin.get(c) {
                        let Order::Finite(w) = t.order(g) else { unreachable!("fin images are torsion") };
                        let r = residue_mod(q, &w).expect("modulus prime to pi(source)");
                        out = out.add(g, &t.scale(g, &r))?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Endo) -> Result<Endo, EndoError> {
        self.check(other)?;
        let g = &self.group;
        let mut e = self.clone();
        for (r, s) in e.tf.iter_mut().zip(&other.tf) {
            for (x, y) in r.iter_mut().zip(s) {
                *x += y;
            }
        }
        for (a, b) in e.blocks.iter_mut().zip(&other.blocks) {
            if let (Some(a), Some(b)) = (a.as_mut(), b) {
                *a = action_zip(a, b, |x, y| x + y);
            }
        }
        for (k, v) in &other.tau {
            *e.tau.entry(*k).or_insert_with(Rational::zero) += v;
        }
        for (k, v) in &other.fin {
            let cur = e.fin.remove(k).unwrap_or_default();
            e.fin.insert(*k, cur.add(g, v)?);
        }
        e.canonicalize();
        Ok(e)
    }

    /// Integer multiple `n·φ`.
    pub fn scale(&self, n: &Int) -> Endo {
        let g = &self.group;
        let nq = rat_int(n);
        let mut e = self.clone();
        for x in e.tf.iter_mut().flatten() {
            *x *= &nq;
        }
        for a in e.blocks.iter_mut().flatten() {
            *a = action_map(a, |x| x * &nq);
        }
        for v in e.tau.values_mut() {
            *v *= &nq;
        }
        for v in e.fin.values_mut() {
            *v = v.scale(g, n);
        }
        e.canonicalize();
        e
    }

    pub fn negate(&self) -> Endo {
        self.scale(&-Int::one())
    }

    pub fn sub(&self, other: &Endo) -> Result<Endo, EndoError> {
        self.add(&other.negate())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Endo) -> Result<Endo, EndoError> {
        self.check(other)?;
        let g = self.group.clone();
        let tfc = g.tf_copies();
        let mut e = Endo::zero(g.clone());
        e.tf = mat_mul(&self.tf, &other.tf);
        for (i, b) in g.blocks().iter().enumerate() {
            let (Some(a), Some(c)) = (&self.blocks[i], &other.blocks[i]) else { continue };
            e.blocks[i] = Some(match (a, c, &b.kind) {
                (Action::Scalar(x), Action::Scalar(y), _) => Action::Scalar(x * y),
                (Action::Matrix(x), Action::Matrix(y), BlockKind::Prufer { .. }) => Action::Matrix(mat_mul(x, y)),
                // finite cyclic blocks are rebuilt from generator images below
                (Action::Matrix(x), _, _) => Action::Matrix(vec![vec![Rational::zero(); x.len()]; x.len()]),
                _ => unreachable!("actions of one block share a shape"),
            });
        }

        // twisted part: only p-divisible sources keep a tau entry
        let divisible = |src: Coord, dst: Coord| {
            let p = g.kind(dst.block).prime().unwrap();
            g.kind(src.block).pi().unwrap().contains(&p)
        };
        for ((mid, dst), s) in &self.tau {
            let k = tfc.iter().position(|t| t.block == mid.block && t.copy == mid.copy).unwrap();
            for (j, src) in tfc.iter().enumerate() {
                let t = &other.tf[k][j];
                let src = Coord::new(src.block, src.copy);
                if !t.is_zero() && divisible(src, *dst) {
                    *e.tau.entry((src, *dst)).or_insert_with(Rational::zero) += s * t;
                }
            }
        }
        for ((src, mid), s) in &other.tau {
            if !divisible(*src, *mid) {
                continue;
            }
            let d = self.blocks[mid.block].as_ref().unwrap();
            let n = match g.kind(mid.block).mult() {
                Mult::Finite(n) => n,
                Mult::Omega => mid.copy + 1,
            };
            let targets: Vec<u64> = match d {
                Action::Scalar(_) => vec![mid.copy],
                Action::Matrix(_) => (0..n).collect(),
            };
            for t in targets {
                let a = d.entry(t, mid.copy);
                if !a.is_zero() {
                    *e.tau.entry((*src, Coord::new(mid.block, t))).or_insert_with(Rational::zero) += a * s;
                }
            }
        }

        // generator images
        let mut sources: BTreeSet<Coord> = self.fin.keys().chain(other.fin.keys()).copied().collect();
        sources.extend(tfc.iter().map(|t| Coord::new(t.block, t.copy)));
        for (i, b) in g.blocks().iter().enumerate() {
            if let BlockKind::Cyclic { mult: Mult::Finite(n), .. } = b.kind {
                sources.extend((0..n).map(|c| Coord::new(i, c)));
            }
        }
        for src in sources {
            let unit = Element::single(&g, src, Rational::one())?;
            let img = self.apply(&other.apply(&unit)?)?;
            let fin = match g.kind(src.block) {
                BlockKind::Cyclic { mult: Mult::Finite(_), .. } => img,
                BlockKind::TorsionFree { pi, .. } => img.filter(|c| match g.kind(c.block).prime() {
                    Some(p) => !pi.contains(&p),
                    None => false,
                }),
                _ => {
                    let s = e.blocks[src.block].as_ref().unwrap().entry(src.copy, src.copy);
                    let own = Element::single(&g, src, s)?;
                    img.sub(&g, &own)?
                }
            };
            if !fin.is_zero() {
                e.fin.insert(src, fin);
            }
        }
        e.canonicalize();
        Ok(e)
    }
}
