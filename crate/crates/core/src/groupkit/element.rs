use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};

use super::{BlockKind, GroupDesc, GroupError};
use crate::exactnum::{fmt_rational, is_pi_number, rat_int, residue_mod, Int, Rational};

/// Copy `copy` of block number `block`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub block: usize,
    pub copy: u64,
}

impl Coord {
    pub fn new(block: usize, copy: u64) -> Coord {
        Coord { block, copy }
    }
}

/// Additive order of an element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(Int),
    Infinite,
}

impl Order {
    pub fn is_finite(&self) -> bool {
        matches!(self, Order::Finite(_))
    }

    pub fn finite(&self) -> Option<&Int> {
        match self {
            Order::Finite(n) => Some(n),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

/// A finitely supported element. Coefficients are stored as rationals in a
/// canonical range per block kind:
/// cyclic `Z(p^k)` coordinates hold an integer in `[0, p^k)`, Prüfer
/// coordinates a fraction `a/p^j` in `[0, 1)`, torsion-free coordinates a
/// rational with `pi`-number denominator and the free block an integer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Element {
    coeffs: BTreeMap<Coord, Rational>,
}

/// Reduces `q` into the canonical range of coordinate `c`.
pub(crate) fn normalize_coeff(g: &GroupDesc, c: Coord, q: &Rational) -> Result<Rational, GroupError> {
    let bad = || GroupError::BadCoefficient {
        block: g.blocks.get(c.block).map_or_else(|| c.block.to_string(), |b| b.name.clone()),
        copy: c.copy,
        value: fmt_rational(q),
    };
    let block = g.blocks.get(c.block).ok_or_else(bad)?;
    if !block.kind.mult().contains(c.copy) {
        return Err(GroupError::CoordOutOfRange { block: block.name.clone(), copy: c.copy });
    }
    match &block.kind {
        BlockKind::Cyclic { p, k, .. } => {
            let v = residue_mod(q, &p.pow(*k)).ok_or_else(bad)?;
            Ok(rat_int(&v))
        }
        BlockKind::Prufer { p, .. } => {
            let d = q.denom();
            let j = p.valuation(d).unwrap_or(0);
            if &p.pow(j) != d {
                return Err(bad());
            }
            Ok(q - rat_int(&q.floor().to_integer()))
        }
        BlockKind::TorsionFree { pi, .. } => {
            if is_pi_number(q.denom(), pi) {
                Ok(q.clone())
            } else {
                Err(bad())
            }
        }
        BlockKind::FreeOmega => {
            if q.is_integer() {
                Ok(q.clone())
            } else {
                Err(bad())
            }
        }
    }
}

impl Element {
    pub fn zero() -> Element {
        Element::default()
    }

    /// Builds an element, reducing every coefficient.
    pub fn new<I>(g: &GroupDesc, pairs: I) -> Result<Element, GroupError>
    where
        I: IntoIterator<Item = (Coord, Rational)>,
    {
        let mut e = Element::zero();
        for (c, q) in pairs {
            e.add_at(g, c, &q)?;
        }
        Ok(e)
    }

    /// A single coordinate.
    pub fn single(g: &GroupDesc, c: Coord, q: Rational) -> Result<Element, GroupError> {
        Element::new(g, [(c, q)])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, c: Coord) -> Rational {
        self.coeffs.get(&c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Coord, &Rational)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = Coord> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `q` at coordinate `c`.
    pub fn add_at(&mut self, g: &GroupDesc, c: Coord, q: &Rational) -> Result<(), GroupError> {
        let cur = self.get(c);
        let v = normalize_coeff(g, c, &(cur + q))?;
        if v.is_zero() {
            self.coeffs.remove(&c);
        } else {
            self.coeffs.insert(c, v);
        }
        Ok(())
    }

    pub fn add(&self, g: &GroupDesc, other: &Element) -> Result<Element, GroupError> {
        let mut out = self.clone();
        for (c, q) in &other.coeffs {
            out.add_at(g, *c, q)?;
        }
        Ok(out)
    }

    pub fn neg(&self, g: &GroupDesc) -> Element {
        self.scale(g, &-Int::one())
    }

    pub fn sub(&self, g: &GroupDesc, other: &Element) -> Result<Element, GroupError> {
        self.add(g, &other.neg(g))
    }

    /// Integer multiple.
    pub fn scale(&self, g: &GroupDesc, n: &Int) -> Element {
        let mut out = Element::zero();
        for (c, q) in &self.coeffs {
            let v = normalize_coeff(g, *c, &(q * rat_int(n))).expect("integer multiples stay in range");
            if !v.is_zero() {
                out.coeffs.insert(*c, v);
            }
        }
        out
    }

    /// Restriction to the coordinates accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(Coord) -> bool) -> Element {
        let coeffs = self.coeffs.iter().filter(|(c, _)| keep(**c)).map(|(c, q)| (*c, q.clone())).collect();
        Element { coeffs }
    }

    /// Additive order: lcm of coordinate orders, infinite when a torsion-free
    /// coordinate is nonzero.
    pub fn order(&self, g: &GroupDesc) -> Order {
        let mut n = Int::one();
        for (c, q) in &self.coeffs {
            match g.kind(c.block) {
                BlockKind::Cyclic { p, k, .. } => {
                    let m = p.pow(*k);
                    let o = &m / q.numer().gcd(&m);
                    n = n.lcm(&o);
                }
                BlockKind::Prufer { .. } => n = n.lcm(q.denom()),
                _ => return Order::Infinite,
            }
        }
        Order::Finite(n)
    }

    pub fn is_torsion(&self, g: &GroupDesc) -> bool {
        self.order(g).is_finite()
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> =
            self.coeffs.iter().map(|(c, q)| format!("{}.{}: {}", c.block, c.copy, fmt_rational(q))).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::*;
    use crate::exactnum::{int, rat};

    #[test]
    fn prufer_wraps_mod_one() {
        let a = group(vec![prufer(3, fin(1))]);
        let c = Coord::new(0, 0);
        let x = Element::single(&a, c, rat(1, 3)).unwrap();
        let y = Element::single(&a, c, rat(2, 3)).unwrap();
        assert!(x.add(&a, &y).unwrap().is_zero());
        assert!(Element::single(&a, c, rat(1, 2)).is_err());
        assert_eq!(Element::single(&a, c, rat(7, 9)).unwrap().order(&a), Order::Finite(int(9)));
    }

    #[test]
    fn orders() {
        let a = group(vec![cyclic(3, 2, omega()), torsion_free(&[3], 1)]);
        let x = Element::single(&a, Coord::new(0, 5), rat(3, 1)).unwrap();
        assert_eq!(x.order(&a), Order::Finite(int(3)));
        assert!(x.add(&a, &Element::zero()).unwrap() == x);
        let t = Element::single(&a, Coord::new(1, 0), rat(1, 9)).unwrap();
        assert_eq!(t.order(&a), Order::Infinite);
        assert!(Element::single(&a, Coord::new(1, 0), rat(1, 2)).is_err());
        assert!(Element::single(&a, Coord::new(1, 1), rat(1, 1)).is_err());
        assert_eq!(Element::zero().order(&a), Order::Finite(int(1)));
    }
}
