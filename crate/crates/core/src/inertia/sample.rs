use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use rand::Rng;

use crate::endokit::random::{random_finitary, RandomConfig};
use crate::endokit::Endo;
use crate::exactnum::{rat, Int, Prime, Rational};
use crate::groupkit::{invariants, BlockKind, Count, GroupDesc, Mult};

/// A `p`-local rational of small height.
fn local(rng: &mut impl Rng, p: Prime, cfg: &RandomConfig) -> Rational {
    let num = rng.gen_range(-cfg.height..=cfg.height);
    let den = [1i64, 1, 1, 2, 3, 5].into_iter().filter(|d| d % p.get() as i64 != 0).nth(rng.gen_range(0..3)).unwrap_or(1);
    rat(num, den)
}

/// A random inertial endomorphism: block scalars obeying the decision
/// rules plus a random finitary part.
pub fn random_inertial(g: &Arc<GroupDesc>, rng: &mut impl Rng, cfg: &RandomConfig) -> Endo {
    let inv = invariants(g);
    let mut scal: BTreeMap<usize, Rational> = BTreeMap::new();
    if !g.is_ftfr() {
        let m = rat(rng.gen_range(-cfg.height..=cfg.height), 1);
        for i in 0..g.blocks().len() {
            scal.insert(i, m.clone());
        }
    } else {
        let r = if g.tf_copies().is_empty() {
            Rational::zero()
        } else {
            let mut den = Int::from(1);
            for p in inv.pi_star.members().into_iter().flatten() {
                if rng.gen_bool(0.3) {
                    den *= p.pow(rng.gen_range(1..=cfg.depth));
                }
            }
            Rational::new(Int::from(rng.gen_range(-cfg.height..=cfg.height)), den)
        };
        let mut cyc: BTreeMap<Prime, Rational> = BTreeMap::new();
        let mut div: BTreeMap<Prime, Rational> = BTreeMap::new();
        for p in g.primes() {
            let d = inv.at(p);
            let a = if d.s_rank > 0 && !d.d.is_zero() { r.clone() } else { local(rng, p, cfg) };
            let c = if d.d == Count::Omega { a.clone() } else { rat(rng.gen_range(0..=cfg.height), 1) };
            div.insert(p, a);
            cyc.insert(p, c);
        }
        for (i, b) in g.blocks().iter().enumerate() {
            let v = match &b.kind {
                BlockKind::TorsionFree { .. } | BlockKind::FreeOmega => r.clone(),
                BlockKind::Prufer { p, .. } => div[p].clone(),
                BlockKind::Cyclic { p, mult: Mult::Omega, .. } => cyc[p].clone(),
                BlockKind::Cyclic { .. } => Rational::zero(),
            };
            scal.insert(i, v);
        }
    }
    let base = Endo::blockwise(g.clone(), |i, _| scal[&i].clone()).expect("scalars act on their blocks");
    base.add(&random_finitary(g, rng, cfg)).expect("same group")
}
