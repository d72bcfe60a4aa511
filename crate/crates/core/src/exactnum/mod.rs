//! Exact arithmetic substrate: big integers and rationals, prime-power
//! residues, p-integral rationals, elements of the product ring of p-adic
//! integers restricted to representable values, and Smith normal form.

mod factor;
mod snf;

pub use factor::{divisors, factorize, is_probable_prime};
pub use snf::{snf, snf_diagonal, Snf};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Int = BigInt;
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("congruences mix moduli of different primes")]
    MixedPrimes,
    #[error("modulus {0} is not a prime power")]
    NotPrimePower(String),
    #[error("empty congruence system")]
    Empty,
    #[error("{value} is not {prime}-integral")]
    NotPIntegral { value: String, prime: u64 },
}

pub fn int(n: i64) -> Int {
    Int::from(n)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: &Int) -> Rational {
    Rational::from_integer(n.clone())
}

/// Parses `m`, `-m` or `m/n`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().ok()?;
            let d: Int = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Prime, NumError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(NumError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn int(self) -> Int {
        Int::from(self.0)
    }

    pub fn pow(self, k: u32) -> Int {
        num_traits::pow(self.int(), k as usize)
    }

    /// p-adic valuation; `None` for zero.
    pub fn valuation(self, n: &Int) -> Option<u32> {
        if n.is_zero() {
            return None;
        }
        let p = self.int();
        let mut n = n.abs();
        let mut v = 0;
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                return Some(v);
            }
            n = q;
            v += 1;
        }
    }

    /// Valuation of a rational; `None` for zero.
    pub fn valuation_q(self, q: &Rational) -> Option<i64> {
        let vn = self.valuation(q.numer())? as i64;
        let vd = self.valuation(q.denom()).unwrap_or(0) as i64;
        Some(vn - vd)
    }

    pub fn divides(self, n: &Int) -> bool {
        (n % self.int()).is_zero()
    }

    pub fn is_local(self, q: &Rational) -> bool {
        !self.divides(q.denom())
    }
}

impl TryFrom<u64> for Prime {
    type Error = NumError;
    fn try_from(p: u64) -> Result<Self, NumError> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Prime factors of a nonzero integer.
pub fn prime_factors(n: &Int) -> BTreeSet<Prime> {
    factorize(n)
        .into_keys()
        .map(|p| Prime(p.to_u64().expect("prime factor beyond 64 bits")))
        .collect()
}

/// True when every prime factor of `n` lies in `pi`.
pub fn is_pi_number(n: &Int, pi: &BTreeSet<Prime>) -> bool {
    let mut n = n.abs();
    if n.is_zero() {
        return false;
    }
    for p in pi {
        let pp = p.int();
        while (&n % &pp).is_zero() {
            n /= &pp;
        }
    }
    n.is_one()
}

pub fn mod_floor(a: &Int, m: &Int) -> Int {
    a.mod_floor(m)
}

/// Inverse of `a` modulo `m`, when it exists.
pub fn mod_inverse(a: &Int, m: &Int) -> Option<Int> {
    if m.is_one() {
        return Some(Int::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// `numer · denom⁻¹ mod m`, defined when the denominator is a unit mod `m`.
pub fn residue_mod(q: &Rational, m: &Int) -> Option<Int> {
    let inv = mod_inverse(q.denom(), m)?;
    Some((q.numer() * inv).mod_floor(m))
}

/// The p-primary part of `q mod Z`, written as `c / p^j` with `0 <= c < p^j`.
pub fn p_part_mod_one(q: &Rational, p: Prime) -> Rational {
    let den = q.denom();
    let j = p.valuation(den).unwrap_or(0);
    if j == 0 {
        return Rational::zero();
    }
    let pj = p.pow(j);
    let rest = den / &pj;
    let inv = mod_inverse(&rest, &pj).expect("cofactor is prime to p");
    let c = (q.numer() * inv).mod_floor(&pj);
    Rational::new(c, pj)
}

/// An integer class modulo `p^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    value: Int,
    prime: Prime,
    exp: u32,
}

impl Residue {
    pub fn new(value: &Int, prime: Prime, exp: u32) -> Residue {
        let value = value.mod_floor(&prime.pow(exp));
        Residue { value, prime, exp }
    }

    pub fn value(&self) -> &Int {
        &self.value
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn modulus(&self) -> Int {
        self.prime.pow(self.exp)
    }

    /// Reduce to a smaller exponent.
    pub fn reduce(&self, k: u32) -> Residue {
        Residue::new(&self.value, self.prime, k.min(self.exp))
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.prime, self.exp)
    }
}

/// A rational number whose denominator is prime to `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PLocal {
    prime: Prime,
    value: Rational,
}

impl PLocal {
    pub fn new(prime: Prime, value: Rational) -> Result<PLocal, NumError> {
        if prime.is_local(&value) {
            Ok(PLocal { prime, value })
        } else {
            Err(NumError::NotPIntegral { value: fmt_rational(&value), prime: prime.get() })
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }
}

pub fn residue_of(x: &PLocal, k: u32) -> Residue {
    let m = x.prime.pow(k);
    let v = residue_mod(&x.value, &m).expect("p-local denominators are units");
    Residue::new(&v, x.prime, k)
}

/// Solves a system of congruences whose moduli are powers of one prime.
///
/// Returns the class modulo the largest modulus, or `None` when two
/// congruences disagree modulo their common power.
pub fn crt_solve(congruences: &[(Int, Int)]) -> Result<Option<Residue>, NumError> {
    if congruences.is_empty() {
        return Err(NumError::Empty);
    }
    let mut prime = None;
    let mut parsed = Vec::with_capacity(congruences.len());
    for (a, m) in congruences {
        let (p, k) = prime_power(m).ok_or_else(|| NumError::NotPrimePower(m.to_string()))?;
        match prime {
            None => prime = Some(p),
            Some(q) if q != p => return Err(NumError::MixedPrimes),
            _ => {}
        }
        parsed.push((a.clone(), k));
    }
    let p = prime.unwrap();
    let (top, kmax) = parsed.iter().max_by_key(|(_, k)| *k).cloned().unwrap();
    for (a, k) in &parsed {
        let m = p.pow(*k);
        if (&top - a).mod_floor(&m) != Int::zero() {
            return Ok(None);
        }
    }
    Ok(Some(Residue::new(&top, p, kmax)))
}

/// Decomposes `p^k` (k >= 1) into `(p, k)`.
pub fn prime_power(m: &Int) -> Option<(Prime, u32)> {
    if m <= &Int::one() {
        return None;
    }
    let factors = prime_factors(m);
    if factors.len() != 1 {
        return None;
    }
    let p = *factors.iter().next().unwrap();
    Some((p, p.valuation(m).unwrap()))
}

/// An element of the product over all primes of the p-adic integers, with
/// an integer default and finitely many p-integral exceptions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JElement {
    default: Int,
    exceptions: BTreeMap<Prime, Rational>,
}

impl JElement {
    pub fn new(default: Int, exceptions: BTreeMap<Prime, Rational>) -> Result<JElement, NumError> {
        for (p, v) in &exceptions {
            PLocal::new(*p, v.clone())?;
        }
        let mut j = JElement { default, exceptions };
        j.canonicalize();
        Ok(j)
    }

    pub fn integer(n: Int) -> JElement {
        JElement { default: n, exceptions: BTreeMap::new() }
    }

    pub fn zero() -> JElement {
        JElement::integer(Int::zero())
    }

    pub fn one() -> JElement {
        JElement::integer(Int::one())
    }

    pub fn default_value(&self) -> &Int {
        &self.default
    }

    pub fn exceptions(&self) -> &BTreeMap<Prime, Rational> {
        &self.exceptions
    }

    /// The component at `p`.
    pub fn at(&self, p: Prime) -> Rational {
        self.exceptions.get(&p).cloned().unwrap_or_else(|| rat_int(&self.default))
    }

    fn canonicalize(&mut self) {
        let d = rat_int(&self.default);
        self.exceptions.retain(|_, v| *v != d);
    }

    fn zip(&self, other: &JElement, f: impl Fn(&Rational, &Rational) -> Rational) -> JElement {
        let default = f(&rat_int(&self.default), &rat_int(&other.default)).to_integer();
        let primes: BTreeSet<Prime> =
            self.exceptions.keys().chain(other.exceptions.keys()).copied().collect();
        let exceptions = primes.into_iter().map(|p| (p, f(&self.at(p), &other.at(p)))).collect();
        let mut j = JElement { default, exceptions };
        j.canonicalize();
        j
    }

    pub fn add(&self, other: &JElement) -> JElement {
        self.zip(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &JElement) -> JElement {
        self.zip(other, |a, b| a * b)
    }

    pub fn neg(&self) -> JElement {
        self.zip(&JElement::zero(), |a, _| -a)
    }

    pub fn sub(&self, other: &JElement) -> JElement {
        self.add(&other.neg())
    }
}

impl fmt::Display for JElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.default)?;
        for (p, v) in &self.exceptions {
            write!(f, " [{}: {}]", p, fmt_rational(v))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(561));
        assert!(Prime::new(9).is_err());
    }

    #[test]
    fn crt_examples() {
        let r = crt_solve(&[(int(1), int(2)), (int(3), int(4))]).unwrap().unwrap();
        assert_eq!((r.value().clone(), r.modulus()), (int(3), int(4)));
        assert_eq!(crt_solve(&[(int(0), int(3)), (int(1), int(9))]).unwrap(), None);
        let r = crt_solve(&[(int(2), int(9)), (int(2), int(3))]).unwrap().unwrap();
        assert_eq!((r.value().clone(), r.modulus()), (int(2), int(9)));
        assert_eq!(crt_solve(&[(int(1), int(2)), (int(1), int(3))]), Err(NumError::MixedPrimes));
        assert!(matches!(crt_solve(&[(int(1), int(6))]), Err(NumError::NotPrimePower(_))));
    }

    #[test]
    fn residue_examples() {
        let x = PLocal::new(p(3), rat(1, 2)).unwrap();
        assert_eq!(residue_of(&x, 2).value(), &int(5));
        let z = PLocal::new(p(7), rat(0, 1)).unwrap();
        assert_eq!(residue_of(&z, 4).value(), &int(0));
        let y = PLocal::new(p(2), rat(3, 5)).unwrap();
        assert_eq!(residue_of(&y, 3).value(), &int(7));
        assert!(PLocal::new(p(2), rat(1, 2)).is_err());
    }

    #[test]
    fn p_parts() {
        // 1/6 = 1/2 - 1/3 mod Z
        assert_eq!(p_part_mod_one(&rat(1, 6), p(3)), rat(2, 3));
        assert_eq!(p_part_mod_one(&rat(1, 6), p(2)), rat(1, 2));
        assert_eq!(p_part_mod_one(&rat(5, 1), p(2)), rat(0, 1));
        assert_eq!(p_part_mod_one(&rat(-1, 4), p(2)), rat(3, 4));
    }

    #[test]
    fn jelement_folding() {
        let mut ex = BTreeMap::new();
        ex.insert(p(2), rat(1, 1));
        let j = JElement::new(int(1), ex).unwrap();
        assert!(j.exceptions().is_empty());
        let mut ex = BTreeMap::new();
        ex.insert(p(3), rat(1, 2));
        let a = JElement::new(int(2), ex).unwrap();
        let b = a.mul(&JElement::integer(int(2)));
        assert_eq!(b.at(p(3)), rat(1, 1));
        assert_eq!(b.at(p(5)), rat(4, 1));
    }

    #[test]
    fn factors() {
        let f: Vec<u64> = prime_factors(&int(360)).into_iter().map(|p| p.get()).collect();
        assert_eq!(f, vec![2, 3, 5]);
        assert!(is_pi_number(&int(12), &[p(2), p(3)].into_iter().collect()));
        assert!(!is_pi_number(&int(10), &[p(2)].into_iter().collect()));
    }
}
