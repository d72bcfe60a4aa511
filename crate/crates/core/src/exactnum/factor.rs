use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{is_prime, Int};

const SMALL: [u64; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];

/// Miller-Rabin with twenty fixed bases; exact below 3.3e24 and for all
/// 64-bit inputs.
pub fn is_probable_prime(n: &Int) -> bool {
    if let Some(m) = n.to_u64() {
        return is_prime(m);
    }
    if n.is_negative() || n.is_even() {
        return false;
    }
    let one = Int::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for a in SMALL {
        let mut x = Int::from(a).modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A nontrivial factor of an odd composite `n` by Pollard's rho.
fn rho(n: &Int) -> Int {
    let mut c = Int::one();
    loop {
        let f = |x: &Int| (x * x + &c) % n;
        let (mut x, mut y) = (Int::from(2), Int::from(2));
        let mut d = Int::one();
        while d.is_one() {
            let mut prod = Int::one();
            let (mut xs, mut ys) = (x.clone(), y.clone());
            for _ in 0..64 {
                xs = f(&xs);
                ys = f(&f(&ys));
                prod = (prod * (&xs - &ys).abs()) % n;
                if prod.is_zero() {
                    break;
                }
            }
            d = prod.gcd(n);
            if d.is_one() {
                x = xs;
                y = ys;
                continue;
            }
            if d == *n {
                // retry one step at a time from the last checkpoint
                loop {
                    x = f(&x);
                    y = f(&f(&y));
                    d = (&x - &y).abs().gcd(n);
                    if !d.is_one() {
                        break;
                    }
                }
            }
        }
        if d != *n {
            return d;
        }
        c += 1;
    }
}

fn split(n: Int, out: &mut BTreeMap<Int, u32>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = rho(&n);
    let m = &n / &d;
    split(d, out);
    split(m, out);
}

/// Prime factorization of `|n|` for nonzero `n`.
pub fn factorize(n: &Int) -> BTreeMap<Int, u32> {
    let mut out = BTreeMap::new();
    let mut n = n.abs();
    assert!(!n.is_zero(), "factorize(0)");
    for p in SMALL.iter().copied().chain((73..1000).step_by(2)) {
        let pp = Int::from(p);
        while (&n % &pp).is_zero() {
            n /= &pp;
            *out.entry(pp.clone()).or_insert(0) += 1;
        }
    }
    split(n, &mut out);
    out
}

/// Positive divisors of a nonzero `n`, ascending.
pub fn divisors(n: &Int) -> Vec<Int> {
    let mut ds = vec![Int::one()];
    for (p, e) in factorize(n) {
        let mut next = Vec::with_capacity(ds.len() * (e as usize + 1));
        for d in &ds {
            let mut x = d.clone();
            for _ in 0..=e {
                next.push(x.clone());
                x *= &p;
            }
        }
        ds = next;
    }
    ds.sort();
    ds
}
