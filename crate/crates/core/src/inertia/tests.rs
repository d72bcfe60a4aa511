use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::endokit::random::{random_finitary, random_group, RandomConfig};
use crate::endokit::{classify, close, fm_split, is_finitary, EndoDraft, Entry, Multiplier};
use crate::exactnum::{int, rat, JElement};
use crate::groupkit::build::*;
use crate::groupkit::{h_equal, nm_type, Element, ExtNat, HElement};

fn arc(kinds: Vec<BlockKind>) -> Arc<GroupDesc> {
    Arc::new(group(kinds))
}

fn endo(g: &Arc<GroupDesc>, entries: Vec<Entry>) -> Endo {
    EndoDraft { group: g.clone(), entries }.build().unwrap()
}

fn kinds(v: &Verdict) -> Vec<ViolationKind> {
    v.violations().iter().map(|x| x.kind).collect()
}

fn set(ps: &[u64]) -> BTreeSet<Prime> {
    ps.iter().map(|&p| prime(p)).collect()
}

/// `1 ⊕_p 0` on `Z(p)^(ω) ⊕ Q^{p}`.
fn bridged(p: u64) -> (Arc<GroupDesc>, Endo) {
    let g = arc(vec![cyclic(p, 1, omega()), torsion_free(&[p], 1)]);
    let phi = Endo::mini(g.clone(), &int(1), &set(&[p]));
    (g, phi)
}

#[test]
fn identity_is_inertial() {
    for g in [
        arc(vec![prufer(3, fin(2)), cyclic(3, 1, omega())]),
        arc(vec![torsion_free(&[2], 2), BlockKind::FreeOmega, cyclic(5, 2, omega())]),
        arc(vec![cyclic(2, 2, fin(3))]),
    ] {
        assert!(is_inertial(&Endo::identity(g)).is_inertial());
    }
}

#[test]
fn decision_examples() {
    let g = arc(vec![prufer(3, fin(2))]);
    let diag = endo(
        &g,
        vec![
            Entry::Div { block: 0, src: 0, dst: 0, value: rat(1, 1) },
            Entry::Div { block: 0, src: 1, dst: 1, value: rat(2, 1) },
        ],
    );
    let v = is_inertial(&diag);
    assert_eq!(kinds(&v), vec![ViolationKind::DivNotScalar]);
    assert_eq!(v.violations()[0].hint, WitnessHint::PruferLayer { block: 0, a: 0, b: 1 });

    let g = arc(vec![cyclic(3, 1, omega()), cyclic(3, 2, omega())]);
    let crt = endo(&g, vec![Entry::CycScalar { block: 1, value: rat(1, 1) }]);
    let v = is_inertial(&crt);
    assert_eq!(kinds(&v), vec![ViolationKind::CrtInconsistent]);
    assert_eq!(v.violations()[0].hint, WitnessHint::Diagonal { a: 0, b: 1 });

    let g = arc(vec![torsion_free(&[], 2)]);
    let tf = endo(
        &g,
        vec![
            Entry::Tf { src: Coord::new(0, 0), dst: Coord::new(0, 0), value: rat(1, 1) },
            Entry::Tf { src: Coord::new(0, 1), dst: Coord::new(0, 1), value: rat(2, 1) },
        ],
    );
    let v = is_inertial(&tf);
    assert_eq!(kinds(&v), vec![ViolationKind::TfNotScalar]);
    assert_eq!(v.violations()[0].hint, WitnessHint::Rank { v: vec![(Coord::new(0, 0), rat(1, 1)), (Coord::new(0, 1), rat(1, 1))] });

    let (_, phi) = bridged(3);
    let Verdict::Inertial(c) = is_inertial(&phi) else { panic!("certificate expected") };
    assert!(c.per_prime[&prime(3)].bridged);
    assert_eq!(c.r, Some(rat(0, 1)));
}

#[test]
fn remaining_violation_kinds() {
    // 1/3 on Q^{3} next to Z(3^∞)
    let g = arc(vec![torsion_free(&[3], 1), prufer(3, fin(1))]);
    let phi = endo(&g, vec![Entry::TfScalar { block: 0, value: rat(1, 3) }]);
    assert_eq!(kinds(&is_inertial(&phi)), vec![ViolationKind::PiHasDivisible]);
    let phi = endo(&g, vec![Entry::TfScalar { block: 0, value: rat(1, 1) }, Entry::DivScalar { block: 1, value: rat(2, 1) }]);
    assert_eq!(kinds(&is_inertial(&phi)), vec![ViolationKind::DivVsRMismatch]);
    let phi = endo(
        &g,
        vec![
            Entry::TfScalar { block: 0, value: rat(1, 1) },
            Entry::DivScalar { block: 1, value: rat(1, 1) },
            Entry::Tau { src: Coord::new(0, 0), dst: Coord::new(1, 0), value: rat(1, 1) },
        ],
    );
    assert_eq!(kinds(&is_inertial(&phi)), vec![ViolationKind::TauNonzero]);

    let g = arc(vec![cyclic(2, 1, omega()), prufer(2, omega())]);
    let phi = endo(&g, vec![Entry::DivScalar { block: 1, value: rat(1, 1) }]);
    assert_eq!(kinds(&is_inertial(&phi)), vec![ViolationKind::OmegaDivMismatch]);

    let g = arc(vec![torsion_free(&[2], 1), BlockKind::FreeOmega]);
    let phi = endo(&g, vec![Entry::TfScalar { block: 0, value: rat(1, 2) }]);
    assert_eq!(kinds(&is_inertial(&phi)), vec![ViolationKind::NotFtfrNotInteger]);
    let phi = endo(&g, vec![Entry::TfScalar { block: 0, value: rat(2, 1) }, Entry::TfScalar { block: 1, value: rat(2, 1) }]);
    assert!(is_inertial(&phi).is_inertial());
    let g = arc(vec![cyclic(5, 1, omega()), BlockKind::FreeOmega]);
    let phi = endo(&g, vec![Entry::TfScalar { block: 1, value: rat(1, 1) }]);
    assert_eq!(kinds(&is_inertial(&phi)), vec![ViolationKind::OmegaDivMismatch]);
}

#[test]
fn finite_group_is_trivially_inertial() {
    let g = arc(vec![cyclic(2, 3, fin(2)), cyclic(3, 1, fin(1))]);
    let phi = endo(&g, vec![Entry::Cyc { block: 0, src: 0, dst: 1, value: rat(1, 1) }]);
    let c = is_inertial(&phi).certificate().cloned().unwrap();
    assert_eq!(c.exempt_blocks, vec![0, 1]);
}

#[test]
fn decompose_examples() {
    let g = arc(vec![cyclic(5, 1, omega()), prufer(3, fin(1)), torsion_free(&[3], 1), torsion_free(&[], 1)]);
    let three = Endo::scalar(g.clone(), &rat(3, 1)).unwrap();
    let d = decompose(&three, is_inertial(&three).certificate().unwrap()).unwrap();
    assert_eq!(d.sm, three);
    assert_eq!(d.ui, Endo::zero(g.clone()));
    assert_eq!(d.nm, Endo::zero(g.clone()));
    assert!(d.checks(&three).all());

    let (g, phi) = bridged(2);
    let d = decompose(&phi, is_inertial(&phi).certificate().unwrap()).unwrap();
    assert_eq!(d.sm, Endo::zero(g.clone()));
    assert_eq!(d.ui, Endo::zero(g.clone()));
    assert_eq!(d.nm, phi);
    assert!(d.checks(&phi).all());

    let g = arc(vec![cyclic(3, 2, omega()), prufer(3, fin(1))]);
    let phi = endo(&g, vec![Entry::CycScalar { block: 0, value: rat(4, 1) }, Entry::DivScalar { block: 1, value: rat(1, 1) }]);
    let d = decompose(&phi, is_inertial(&phi).certificate().unwrap()).unwrap();
    assert_eq!(d.nm, Endo::mini(g.clone(), &int(3), &set(&[3])));
    assert_eq!(d.ui, Endo::identity(g.clone()));
    assert!(d.checks(&phi).all());

    let other = Endo::identity(g.clone());
    assert_eq!(
        decompose(&phi, is_inertial(&other).certificate().unwrap()),
        Err(InertiaError::CertificateMismatch)
    );
}

#[test]
fn uniform_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = arc(vec![cyclic(3, 2, omega()), prufer(5, fin(1)), torsion_free(&[5], 1)]);
    let f = random_finitary(&g, &mut rng, &RandomConfig::default());
    assert!(is_uniform(&f));
    let class = ui_class_in_h(&f).unwrap();
    let zero = HElement { value: JElement::zero(), desc: class.desc.clone() };
    assert!(h_equal(&class, &zero).unwrap());

    let h = arc(vec![cyclic(3, 2, omega()), prufer(5, fin(2))]);
    let mut ex = std::collections::BTreeMap::new();
    ex.insert(prime(5), rat(2, 7));
    let j = Endo::multiplication(h.clone(), &Multiplier::J(JElement::new(int(4), ex).unwrap())).unwrap();
    assert!(is_uniform(&j));

    let (_, mini) = bridged(3);
    assert!(!is_uniform(&mini));

    let g = arc(vec![cyclic(3, 2, omega())]);
    let m = Endo::scalar(g.clone(), &rat(4, 1)).unwrap();
    let class = ui_class_in_h(&m).unwrap();
    assert_eq!(class.desc.0[&prime(3)], (ExtNat::Fin(2), ExtNat::Fin(2)));
    assert_eq!(class.value.at(prime(3)), rat(4, 1));
    let t = Element::single(&g, Coord::new(0, 1), rat(1, 1)).unwrap();
    let m2 = m.with_fin(Coord::new(0, 0), &t).unwrap();
    assert!(h_equal(&class, &ui_class_in_h(&m2).unwrap()).unwrap());
    assert_eq!(ui_class_in_h(&mini_not_uniform()), Err(InertiaError::NotUniform));
}

fn mini_not_uniform() -> Endo {
    bridged(5).1
}

#[test]
fn bounded_split_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = arc(vec![cyclic(2, 2, omega()), prufer(2, fin(1)), torsion_free(&[3], 1)]);
    let f = random_finitary(&g, &mut rng, &RandomConfig::default());
    assert_eq!(bounded_split(&f), Some((Endo::zero(g.clone()), f.clone())));

    let h = arc(vec![cyclic(3, 2, omega()), prufer(3, fin(1))]);
    let mini = Endo::mini(h.clone(), &int(1), &set(&[3]));
    assert_eq!(bounded_split(&mini), Some((mini.clone(), Endo::zero(h.clone()))));

    let two = Endo::scalar(g.clone(), &rat(2, 1)).unwrap();
    assert_eq!(bounded_split(&two), None);
}

#[test]
fn mini_orders_match_nm_type() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut seen = 0;
    for _ in 0..300 {
        let g = Arc::new(random_group(&mut rng, false));
        let Ok(nm) = nm_type(&g) else { continue };
        let inv = invariants(&g);
        for (p, c) in nm.0 {
            seen += 1;
            let one = Endo::mini(g.clone(), &int(1), &[p].into());
            assert!(is_inertial(&one).is_inertial());
            let zero = Endo::zero(g.clone());
            // exact additive order p^{c_p}
            assert_eq!(one.scale(&p.pow(c)), zero);
            assert_ne!(one.scale(&p.pow(c - 1)), zero);
            // order modulo finitary endomorphisms
            let eps = inv.at(p).eps_k;
            assert!(close(&one.scale(&p.pow(eps)), &zero).unwrap());
            assert!(!close(&one.scale(&p.pow(eps - 1)), &zero).unwrap());
            if eps == c {
                assert!(!close(&one.scale(&p.pow(c - 1)), &zero).unwrap());
            }
        }
    }
    assert!(seen > 20);
}

#[test]
fn ring_properties_on_random_inertial() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let cfg = RandomConfig { fin_entries: 1, ..RandomConfig::default() };
    for _ in 0..120 {
        let g = Arc::new(random_group(&mut rng, true));
        let phi = random_inertial(&g, &mut rng, &cfg);
        let psi = random_inertial(&g, &mut rng, &cfg);
        let cp = is_inertial(&phi).certificate().cloned().expect("sampler yields inertial endomorphisms");
        let cq = is_inertial(&psi).certificate().cloned().unwrap();
        let sum = phi.add(&psi).unwrap();
        let prod = phi.compose(&psi).unwrap();
        let cs = is_inertial(&sum).certificate().cloned().expect("sum inertial");
        let cpq = is_inertial(&prod).certificate().cloned().expect("product inertial");
        let comm = prod.sub(&psi.compose(&phi).unwrap()).unwrap();
        assert!(is_finitary(&comm), "commutator not finitary on {}", g);

        // quotient map to the torsion-free scalar
        if let (Some(a), Some(b)) = (&cp.r, &cq.r) {
            assert_eq!(cs.r.as_ref(), Some(&(a + b)));
            assert_eq!(cpq.r.as_ref(), Some(&(a * b)));
            let inv = invariants(&g);
            assert!(inv.pi_star.contains_all(&prime_factors(a.denom())));
            let base = phi.without_fin();
            let free_zero = g.free_omega().is_none_or(|f| base.block_scalar(f).is_some_and(|s| s.is_zero()));
            let periodic_image = free_zero && base.tf().iter().flatten().all(|x| x.is_zero());
            assert_eq!(a.is_zero(), periodic_image);
        }

        for (x, c) in [(&phi, &cp), (&psi, &cq), (&sum, &cs), (&prod, &cpq)] {
            let d = decompose(x, c).unwrap();
            let ch = d.checks(x);
            assert!(ch.all(), "{ch:?} for {x} on {g}");
            if g.is_periodic() {
                assert_eq!(d.sm, Endo::zero(g.clone()));
                assert!(fm_split(&d.ui).is_some());
            }
            if let Some(m) = classify(&d.nm).mini {
                for p in &m.pi {
                    assert!(invariants(&g).at(*p).critical, "gap at a non-critical prime");
                }
            }
        }

        // class map on uniform parts
        if g.is_ftfr() {
            let u = decompose(&phi, &cp).unwrap().ui;
            let v = decompose(&psi, &cq).unwrap().ui;
            let (cu, cv) = (ui_class_in_h(&u).unwrap(), ui_class_in_h(&v).unwrap());
            let s = ui_class_in_h(&u.add(&v).unwrap()).unwrap();
            let m = ui_class_in_h(&u.compose(&v).unwrap()).unwrap();
            let add = HElement { value: cu.value.add(&cv.value), desc: cu.desc.clone() };
            let mul = HElement { value: cu.value.mul(&cv.value), desc: cu.desc.clone() };
            assert!(h_equal(&s, &add).unwrap());
            assert!(h_equal(&m, &mul).unwrap());
            let zero = HElement { value: JElement::zero(), desc: cu.desc.clone() };
            assert_eq!(h_equal(&cu, &zero).unwrap(), is_finitary(&u));
        }
    }
}

#[test]
fn bounded_parts_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cfg = RandomConfig::default();
    let mut split = 0;
    for _ in 0..200 {
        let g = Arc::new(random_group(&mut rng, true));
        let phi = random_inertial(&g, &mut rng, &cfg);
        let d = decompose(&phi, is_inertial(&phi).certificate().unwrap()).unwrap();
        // the uniform part minus its Prüfer and torsion-free action is bounded
        if let Some((nm, fin)) = bounded_split(&d.nm) {
            split += 1;
            assert!(is_finitary(&fin));
            assert!(nm == Endo::zero(g.clone()) || classify(&nm).mini.is_some());
            assert_eq!(nm.add(&fin).unwrap(), d.nm);
        }
    }
    assert_eq!(split, 200);
}
