use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::endokit::random::{random_endo, RandomConfig};
use crate::endokit::{Endo, EndoDraft, Entry};
use crate::exactnum::{int, rat, Rational};
use crate::groupkit::build::*;
use crate::groupkit::{BlockKind, Coord, Element};
use crate::inertia::{is_inertial, random_inertial, WitnessHint};

fn arc(kinds: Vec<BlockKind>) -> Arc<GroupDesc> {
    Arc::new(group(kinds))
}

fn blockwise(g: &Arc<GroupDesc>, s: &[Rational]) -> Endo {
    Endo::blockwise(g.clone(), |i, _| s[i].clone()).unwrap()
}

fn el(g: &GroupDesc, pairs: &[(usize, u64, Rational)]) -> Element {
    Element::new(g, pairs.iter().map(|(b, c, q)| (Coord::new(*b, *c), q.clone()))).unwrap()
}

#[test]
fn index_examples() {
    let z = arc(vec![torsion_free(&[], 1)]);
    let h = FGSubgroup::new(z.clone(), vec![el(&z, &[(0, 0, rat(2, 1))])]);
    assert_eq!(index_in_sum(&h, &Endo::scalar(z.clone(), &rat(3, 1)).unwrap()).unwrap(), Index::one());

    let z2 = arc(vec![torsion_free(&[], 2)]);
    let d = EndoDraft {
        group: z2.clone(),
        entries: vec![Entry::Tf { src: Coord::new(0, 1), dst: Coord::new(0, 1), value: rat(2, 1) }, Entry::Tf {
            src: Coord::new(0, 0),
            dst: Coord::new(0, 0),
            value: rat(1, 1),
        }],
    }
    .build()
    .unwrap();
    let h = FGSubgroup::new(z2.clone(), vec![el(&z2, &[(0, 0, rat(1, 1)), (0, 1, rat(1, 1))])]);
    assert_eq!(index_in_sum(&h, &d).unwrap(), Index::Infinite);

    for p in [2u64, 3, 5] {
        let g = arc(vec![cyclic(p, 1, omega()), torsion_free(&[p], 1)]);
        let phi = blockwise(&g, &[rat(1, 1), rat(0, 1)]);
        let h = FGSubgroup::new(g.clone(), vec![el(&g, &[(0, 0, rat(1, 1)), (1, 0, rat(1, p as i64))])]);
        let Index::Finite(n) = index_in_sum(&h, &phi).unwrap() else { panic!("finite index expected") };
        assert!((int(p as i64) % n).eq(&int(0)));
    }
}

#[test]
fn subgroup_counts() {
    let e8 = arc(vec![cyclic(2, 1, fin(3))]);
    assert_eq!(all_subgroups(&e8, 1 << 10, 1000).unwrap().len(), 16);
    assert_eq!(all_subgroups(&arc(vec![cyclic(2, 2, fin(1))]), 1 << 10, 1000).unwrap().len(), 3);
    assert_eq!(all_subgroups(&arc(vec![cyclic(2, 1, fin(1)), cyclic(2, 2, fin(1))]), 1 << 10, 1000).unwrap().len(), 8);
    assert_eq!(all_subgroups(&arc(vec![cyclic(3, 1, fin(2))]), 1 << 10, 1000).unwrap().len(), 6);
    assert_eq!(enumerate_elements(&arc(vec![cyclic(3, 1, fin(2)), cyclic(2, 2, fin(1))]), 100).unwrap().len(), 36);
    assert!(all_subgroups(&arc(vec![prufer(2, fin(1))]), 1 << 10, 10).is_err());
}

#[test]
fn invariant_subgroups_have_index_one() {
    let g = arc(vec![cyclic(3, 2, omega()), prufer(3, fin(2)), cyclic(2, 1, fin(2))]);
    let mu = Endo::scalar(g.clone(), &rat(5, 1)).unwrap();
    for h in sample_subgroups(&g, 3, 40, 1, &SampleConfig::default(), Exec::Parallel) {
        assert_eq!(index_in_sum(&h, &mu).unwrap(), Index::one());
    }
}

#[test]
fn snf_matches_naive_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let groups = [
        arc(vec![cyclic(2, 1, omega()), cyclic(2, 2, fin(1)), prufer(2, fin(1))]),
        arc(vec![cyclic(3, 1, fin(2)), prufer(3, fin(1))]),
        arc(vec![cyclic(2, 2, omega()), cyclic(3, 1, omega())]),
    ];
    let mut compared = 0;
    for g in &groups {
        for _ in 0..6 {
            let phi = random_endo(g, &mut rng, &RandomConfig::default());
            for h in sample_subgroups(g, 2, 20, 9, &SampleConfig::default(), Exec::Sequential) {
                if let Some(n) = naive_index_in_sum(&h, &phi, 1 << 12).unwrap() {
                    assert_eq!(index_in_sum(&h, &phi).unwrap(), Index::Finite(n), "{h}");
                    compared += 1;
                }
            }
        }
    }
    assert!(compared > 200);
}

#[test]
fn sampling_is_deterministic_and_covers_pairs() {
    let g = arc(vec![cyclic(2, 1, omega()), prufer(2, fin(1)), torsion_free(&[2], 1)]);
    let a = sample_subgroups(&g, 3, 30, 42, &SampleConfig::default(), Exec::Parallel);
    let b = sample_subgroups(&g, 3, 30, 42, &SampleConfig::default(), Exec::Sequential);
    assert_eq!(a, b);
    assert_ne!(a, sample_subgroups(&g, 3, 30, 43, &SampleConfig::default(), Exec::Sequential));
    for x in 0..3 {
        for y in x + 1..3 {
            assert!(a.iter().any(|h| {
                h.gens.len() == 1 && {
                    let blocks: Vec<usize> = h.gens[0].support().map(|c| c.block).collect();
                    blocks == vec![x, y]
                }
            }));
        }
    }
}

#[test]
fn profile_examples() {
    let levels = [2, 4, 6, 8];
    let g = arc(vec![cyclic(2, 2, omega()), prufer(2, fin(1)), cyclic(3, 1, fin(2))]);
    let mu = Endo::scalar(g.clone(), &rat(7, 1)).unwrap();
    let ev = inertness_profile(&mu, &levels, 30, 1, false, Exec::Parallel).unwrap();
    assert!(ev.per_level.iter().all(|l| l.max_index == Index::one()));
    assert_eq!(ev.verdict_hint, VerdictHint::Stable);

    for p in [2u64, 3] {
        let g = arc(vec![cyclic(p, 1, omega()), cyclic(p, 2, omega())]);
        let phi = blockwise(&g, &[rat(0, 1), rat(1, 1)]);
        assert!(!is_inertial(&phi).is_inertial());
        let ev = inertness_profile(&phi, &levels, 30, 1, false, Exec::Parallel).unwrap();
        assert_eq!(ev.verdict_hint, VerdictHint::Growing);
        for l in &ev.per_level {
            assert!(l.max_index >= Index::Finite(int(p as i64).pow(l.level / 2)));
        }

        let h = arc(vec![cyclic(p, 2, omega()), prufer(p, fin(1))]);
        let mini = Endo::mini(h.clone(), &int(1), &[prime(p)].into());
        assert!(is_inertial(&mini).is_inertial());
        let ev = inertness_profile(&mini, &levels, 30, 1, false, Exec::Parallel).unwrap();
        assert_eq!(ev.verdict_hint, VerdictHint::Stable);
        assert!(ev.per_level.last().unwrap().max_index <= Index::Finite(int((p * p) as i64)));
    }
}

/// `1/3 ⊕ 2` on `Q^{3} ⊕ Z(5^∞)`: inertial, while `⟨1/3^n + 1/5^n⟩` has
/// index `3 · 5^{n-1}`.
#[test]
fn mixed_profile_is_level_independent() {
    let g = arc(vec![torsion_free(&[3], 1), prufer(5, fin(1))]);
    let phi = blockwise(&g, &[rat(1, 3), rat(2, 1)]);
    assert!(is_inertial(&phi).is_inertial());
    for n in 1..6u32 {
        let x = el(&g, &[(0, 0, Rational::new(int(1), int(3).pow(n))), (1, 0, Rational::new(int(1), int(5).pow(n)))]);
        let h = FGSubgroup::new(g.clone(), vec![x]);
        assert_eq!(index_in_sum(&h, &phi).unwrap(), Index::Finite(int(3) * int(5).pow(n - 1)));
    }
    let ev = inertness_profile(&phi, &[2, 4, 6, 8], 40, 2, false, Exec::Parallel).unwrap();
    assert_eq!(ev.verdict_hint, VerdictHint::Stable);
    assert!(ev.per_level.windows(2).all(|w| w[0].level_max == w[1].level_max));
}

#[test]
fn enumerate_all_profile() {
    let g = arc(vec![cyclic(2, 1, omega()), prufer(2, fin(1))]);
    let phi = blockwise(&g, &[rat(1, 1), rat(3, 1)]);
    let a = inertness_profile(&phi, &[1, 2, 3], 5, 4, true, Exec::Parallel).unwrap();
    let b = inertness_profile(&phi, &[1, 2, 3], 5, 4, false, Exec::Parallel).unwrap();
    assert!(a.per_level.iter().zip(&b.per_level).all(|(x, y)| x.subgroups > y.subgroups && x.max_index >= y.max_index));
    assert_eq!(a, inertness_profile(&phi, &[1, 2, 3], 5, 4, true, Exec::Sequential).unwrap());
}

#[test]
fn fs_examples() {
    let levels = [1, 2, 3, 4];
    let p = 3u64;
    let g = arc(vec![cyclic(p, 1, omega()), cyclic(p, 2, omega())]);
    let mu = Endo::scalar(g.clone(), &rat(2, 1)).unwrap();
    let r = fs_profile(&mu, &levels, 20, 5, Exec::Parallel).unwrap();
    assert!(r.per_level.iter().all(|l| l.max_ratio == Index::one()));

    // 1 and 4 agree mod 3; a finitary tail makes the map non-scalar
    let t = Element::single(&g, Coord::new(1, 1), rat(3, 1)).unwrap();
    let phi = blockwise(&g, &[rat(1, 1), rat(4, 1)]).add(&Endo::zero(g.clone()).with_fin(Coord::new(0, 0), &t).unwrap()).unwrap();
    assert!(is_inertial(&phi).is_inertial());
    let r = fs_profile(&phi, &levels, 20, 5, Exec::Parallel).unwrap();
    assert_eq!(r.verdict_hint, VerdictHint::Stable);

    let bad = blockwise(&g, &[rat(1, 1), rat(2, 1)]);
    assert!(!is_inertial(&bad).is_inertial());
    let r = fs_profile(&bad, &levels, 20, 5, Exec::Parallel).unwrap();
    assert_eq!(r.verdict_hint, VerdictHint::Growing);

    let mixed = arc(vec![torsion_free(&[], 1)]);
    assert!(matches!(
        fs_profile(&Endo::identity(mixed), &levels, 2, 1, Exec::Sequential),
        Err(OracleError::NotPeriodic)
    ));
}

#[test]
fn witness_examples() {
    let z2 = arc(vec![torsion_free(&[], 1), torsion_free(&[], 1)]);
    let d = blockwise(&z2, &[rat(1, 1), rat(2, 1)]);
    let v = is_inertial(&d).violations()[0].clone();
    let fam = witness_search(&d, Some(&v.hint), 4).unwrap().expect("rank witness");
    assert!(fam.indices.iter().all(|(_, i)| *i == Index::Infinite));

    for p in [2u64, 3, 5] {
        let g = arc(vec![torsion_free(&[p], 1), prufer(p, fin(1))]);
        let phi = EndoDraft {
            group: g.clone(),
            entries: vec![
                Entry::TfScalar { block: 0, value: rat(1, 1) },
                Entry::DivScalar { block: 1, value: rat(1, 1) },
                Entry::Tau { src: Coord::new(0, 0), dst: Coord::new(1, 0), value: rat(1, 1) },
            ],
        }
        .build()
        .unwrap();
        let v = is_inertial(&phi).violations()[0].clone();
        assert!(matches!(v.hint, WitnessHint::TauSource { .. }));
        let fam = witness_search(&phi, Some(&v.hint), 6).unwrap().expect("tau witness");
        for (n, i) in &fam.indices {
            assert!(*i >= Index::Finite(int(p as i64).pow(*n)));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let g = arc(vec![cyclic(2, 1, omega()), prufer(2, fin(2)), torsion_free(&[2], 1), torsion_free(&[], 1)]);
    for _ in 0..5 {
        let phi = random_inertial(&g, &mut rng, &RandomConfig::default());
        assert!(witness_search(&phi, None, 6).unwrap().is_none());
    }
}
