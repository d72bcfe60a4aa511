//! Property tests for exact arithmetic and the endomorphism ring.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use inertial_core::endokit::random::{random_element, random_endo, random_group, RandomConfig};
use inertial_core::exactnum::{
    crt_solve, divisors, factorize, is_prime, is_probable_prime, mod_floor, rat, residue_mod, snf, Int, JElement, Prime,
    Rational,
};
use inertial_core::inertia::{is_inertial, random_inertial};

fn small_matrix() -> impl Strategy<Value = Vec<Vec<Int>>> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec((-20i64..=20).prop_map(Int::from), c), r)
    })
}

fn mat_mul(a: &[Vec<Int>], b: &[Vec<Int>]) -> Vec<Vec<Int>> {
    (0..a.len())
        .map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

fn det(m: &[Vec<Int>]) -> Int {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<Int>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect()).collect();
            let s = if j % 2 == 0 { Int::one() } else { -Int::one() };
            s * &m[0][j] * det(&minor)
        })
        .sum()
}

proptest! {
    #[test]
    fn snf_is_a_factorization(m in small_matrix()) {
        let s = snf(&m);
        prop_assert_eq!(mat_mul(&mat_mul(&s.u, &m), &s.v), s.d.clone());
        prop_assert!(det(&s.u).abs().is_one());
        prop_assert!(det(&s.v).abs().is_one());
        let d = s.diagonal();
        for w in d.windows(2) {
            prop_assert!(!w[0].is_negative());
            prop_assert!(w[0].is_zero() && w[1].is_zero() || !w[0].is_zero() && (&w[1] % &w[0]).is_zero());
        }
        if m.len() == m[0].len() {
            let prod: Int = d.iter().product();
            prop_assert_eq!(prod, det(&m).abs());
        }
    }

    #[test]
    fn factorization_reconstructs(n in 1u64..10_000_000_000) {
        let n = Int::from(n);
        let f = factorize(&n);
        let mut back = Int::one();
        for (p, e) in &f {
            prop_assert!(is_probable_prime(p));
            back *= p.pow(*e);
        }
        prop_assert_eq!(&back, &n);
        let ds = divisors(&n);
        let count: u32 = f.values().map(|e| e + 1).product();
        prop_assert_eq!(ds.len(), count as usize);
        prop_assert!(ds.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(ds.iter().all(|d| (&n % d).is_zero()));
    }

    #[test]
    fn primality_agrees(n in 0u64..200_000) {
        prop_assert_eq!(is_prime(n), is_probable_prime(&Int::from(n)));
    }

    #[test]
    fn residues_are_ring_maps(a in -50i64..50, b in 1i64..40, c in -50i64..50, d in 1i64..40, k in 1u32..5) {
        let m = Int::from(7).pow(k);
        let (x, y) = (rat(a, b), rat(c, d));
        let r = |q: &Rational| residue_mod(q, &m);
        if let (Some(rx), Some(ry)) = (r(&x), r(&y)) {
            prop_assert_eq!(r(&(&x + &y)).unwrap(), mod_floor(&(&rx + &ry), &m));
            prop_assert_eq!(r(&(&x * &y)).unwrap(), mod_floor(&(&rx * &ry), &m));
        }
    }

    #[test]
    fn crt_agrees_with_search(a in 0i64..243, ks in prop::collection::vec(1u32..6, 1..4), noise in prop::collection::vec(0i64..3, 3)) {
        let p = Int::from(3);
        let cs: Vec<(Int, Int)> = ks.iter().zip(&noise).map(|(k, n)| (Int::from(a + n * 81), p.pow(*k))).collect();
        let kmax = *ks.iter().max().unwrap();
        let m = p.pow(kmax);
        let brute: Vec<Int> = (0..3i64.pow(kmax)).map(Int::from).filter(|x| cs.iter().all(|(a, q)| (x - a).mod_floor(q).is_zero())).collect();
        match crt_solve(&cs).unwrap() {
            Some(r) => prop_assert_eq!(vec![mod_floor(r.value(), &m)], brute),
            None => prop_assert!(brute.is_empty()),
        }
    }

    #[test]
    fn j_elements_form_a_commutative_ring(a in -9i64..9, b in -9i64..9, c in -9i64..9, x in -9i64..9, y in 1i64..9) {
        let p = Prime::new(2).unwrap();
        let local = |n: i64| if y % 2 == 0 { rat(n, 1) } else { rat(n, y) };
        let j = |d: i64, e: i64| JElement::new(Int::from(d), BTreeMap::from([(p, local(e))])).unwrap();
        let (u, v, w) = (j(a, x), j(b, c), j(c, a));
        prop_assert_eq!(u.add(&v), v.add(&u));
        prop_assert_eq!(u.mul(&v), v.mul(&u));
        prop_assert_eq!(u.mul(&v).mul(&w), u.mul(&v.mul(&w)));
        prop_assert_eq!(u.mul(&v.add(&w)), u.mul(&v).add(&u.mul(&w)));
        prop_assert_eq!(u.sub(&u), JElement::zero());
        prop_assert_eq!(u.mul(&JElement::one()), u);
    }

    #[test]
    fn endomorphisms_form_a_ring(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random_group(&mut rng, true));
        let cfg = RandomConfig::default();
        let (a, b, c) = (random_endo(&g, &mut rng, &cfg), random_endo(&g, &mut rng, &cfg), random_endo(&g, &mut rng, &cfg));
        prop_assert_eq!(a.compose(&b).unwrap().compose(&c).unwrap(), a.compose(&b.compose(&c).unwrap()).unwrap());
        prop_assert_eq!(a.compose(&b.add(&c).unwrap()).unwrap(), a.compose(&b).unwrap().add(&a.compose(&c).unwrap()).unwrap());
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        let x = random_element(&g, &mut rng, &cfg);
        prop_assert_eq!(a.compose(&b).unwrap().apply(&x).unwrap(), a.apply(&b.apply(&x).unwrap()).unwrap());
    }

    #[test]
    fn inertial_endomorphisms_are_closed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random_group(&mut rng, true));
        let cfg = RandomConfig::default();
        let (a, b) = (random_inertial(&g, &mut rng, &cfg), random_inertial(&g, &mut rng, &cfg));
        prop_assert!(is_inertial(&a.add(&b).unwrap()).is_inertial());
        prop_assert!(is_inertial(&a.compose(&b).unwrap()).is_inertial());
        prop_assert!(is_inertial(&a.negate()).is_inertial());
    }
}
