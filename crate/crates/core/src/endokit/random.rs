//! Random elements and endomorphisms with small heights.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Endo, EndoDraft, Entry};
use crate::exactnum::{rat, rat_int, Int, Prime, Rational};
use crate::groupkit::{BlockKind, Coord, Element, GroupDesc, Mult};

/// Size bounds for random generation.
#[derive(Debug, Clone, Copy)]
pub struct RandomConfig {
    /// Copies of an infinite block that may carry data.
    pub copies: u64,
    /// Bound on numerators.
    pub height: i64,
    /// Largest exponent of a Prüfer or torsion-free denominator.
    pub depth: u32,
    /// Number of `fin` entries drawn.
    pub fin_entries: usize,
    /// Number of `tau` entries drawn.
    pub tau_entries: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig { copies: 3, height: 4, depth: 2, fin_entries: 2, tau_entries: 1 }
    }
}

fn copies(kind: &BlockKind, cfg: &RandomConfig) -> u64 {
    match kind.mult() {
        Mult::Finite(n) => n,
        Mult::Omega => cfg.copies,
    }
}

/// A rational whose denominator is a product of primes from `pi`.
fn pi_rational(rng: &mut impl Rng, pi: &[Prime], cfg: &RandomConfig) -> Rational {
    let num = rng.gen_range(-cfg.height..=cfg.height);
    let mut den = Int::from(1);
    for p in pi {
        if rng.gen_bool(0.4) {
            den *= p.pow(rng.gen_range(1..=cfg.depth));
        }
    }
    Rational::new(Int::from(num), den)
}

/// A `p`-local rational.
fn local_rational(rng: &mut impl Rng, p: Prime, cfg: &RandomConfig) -> Rational {
    let num = rng.gen_range(-cfg.height..=cfg.height);
    let dens: Vec<i64> = [1i64, 1, 1, 2, 3, 5, 7].into_iter().filter(|d| d % p.get() as i64 != 0).collect();
    rat(num, *dens.choose(rng).unwrap())
}

/// A random element supported on the first copies of each block.
pub fn random_element(g: &GroupDesc, rng: &mut impl Rng, cfg: &RandomConfig) -> Element {
    let mut x = Element::zero();
    for (i, b) in g.blocks().iter().enumerate() {
        for c in 0..copies(&b.kind, cfg) {
            if !rng.gen_bool(0.5) {
                continue;
            }
            let q = match &b.kind {
                BlockKind::Cyclic { .. } | BlockKind::FreeOmega => rat(rng.gen_range(-cfg.height..=cfg.height), 1),
                BlockKind::Prufer { p, .. } => {
                    let j = rng.gen_range(0..=cfg.depth);
                    Rational::new(Int::from(rng.gen_range(0..=cfg.height)), p.pow(j))
                }
                BlockKind::TorsionFree { pi, .. } => {
                    let pi: Vec<Prime> = pi.iter().copied().collect();
                    pi_rational(rng, &pi, cfg)
                }
            };
            x.add_at(g, Coord::new(i, c), &q).expect("random coefficient is valid");
        }
    }
    x
}

/// A random torsion element whose `p`-components have order at most
/// `p^{bound(p)}`; primes with `bound(p) = None` are excluded.
pub fn random_torsion(
    g: &GroupDesc,
    rng: &mut impl Rng,
    cfg: &RandomConfig,
    bound: impl Fn(Prime) -> Option<u32>,
) -> Element {
    let mut x = Element::zero();
    for (i, b) in g.blocks().iter().enumerate() {
        let Some(p) = b.kind.prime() else { continue };
        let Some(e) = bound(p) else { continue };
        if e == 0 {
            continue;
        }
        for c in 0..copies(&b.kind, cfg) {
            if !rng.gen_bool(0.35) {
                continue;
            }
            let q = match &b.kind {
                BlockKind::Cyclic { k, .. } => {
                    // order divides p^e
                    let shift = k.saturating_sub(e);
                    rat_int(&(Int::from(rng.gen_range(0..=cfg.height)) * p.pow(shift)))
                }
                _ => {
                    let j = rng.gen_range(1..=e.min(cfg.depth).max(1));
                    Rational::new(Int::from(rng.gen_range(0..=cfg.height)), p.pow(j))
                }
            };
            x.add_at(g, Coord::new(i, c), &q).expect("torsion coefficient is valid");
        }
    }
    x
}

/// A random valid endomorphism.
pub fn random_endo(g: &Arc<GroupDesc>, rng: &mut impl Rng, cfg: &RandomConfig) -> Endo {
    let mut d = EndoDraft::new(g.clone());
    let tfc = g.tf_copies();
    for s in &tfc {
        for t in &tfc {
            let ps = g.tf_pi(*s);
            let pt = g.tf_pi(*t);
            if ps.is_subset(pt) && rng.gen_bool(if s == t { 0.9 } else { 0.3 }) {
                let pi: Vec<Prime> = pt.iter().copied().collect();
                d.entries.push(Entry::Tf {
                    src: Coord::new(s.block, s.copy),
                    dst: Coord::new(t.block, t.copy),
                    value: pi_rational(rng, &pi, cfg),
                });
            }
        }
    }
    for (i, b) in g.blocks().iter().enumerate() {
        match &b.kind {
            BlockKind::FreeOmega => {
                d.entries.push(Entry::TfScalar { block: i, value: rat(rng.gen_range(-cfg.height..=cfg.height), 1) })
            }
            BlockKind::Cyclic { p, mult, .. } | BlockKind::Prufer { p, copies: mult } => {
                let prufer = matches!(b.kind, BlockKind::Prufer { .. });
                match mult {
                    Mult::Omega => {
                        let value = local_rational(rng, *p, cfg);
                        d.entries.push(if prufer {
                            Entry::DivScalar { block: i, value }
                        } else {
                            Entry::CycScalar { block: i, value }
                        });
                    }
                    Mult::Finite(n) => {
                        for s in 0..*n {
                            for t in 0..*n {
                                if s != t && !rng.gen_bool(0.3) {
                                    continue;
                                }
                                let value = local_rational(rng, *p, cfg);
                                d.entries.push(if prufer {
                                    Entry::Div { block: i, src: s, dst: t, value }
                                } else {
                                    Entry::Cyc { block: i, src: s, dst: t, value }
                                });
                            }
                        }
                    }
                }
            }
            BlockKind::TorsionFree { .. } => {}
        }
    }
    let prufer: Vec<Coord> = g
        .blocks()
        .iter()
        .enumerate()
        .filter(|(_, b)| matches!(b.kind, BlockKind::Prufer { .. }))
        .flat_map(|(i, b)| (0..copies(&b.kind, cfg)).map(move |c| Coord::new(i, c)))
        .collect();
    for _ in 0..cfg.tau_entries {
        if tfc.is_empty() || prufer.is_empty() {
            break;
        }
        let s = *tfc.choose(rng).unwrap();
        let t = *prufer.choose(rng).unwrap();
        let p = g.kind(t.block).prime().unwrap();
        if g.tf_pi(s).contains(&p) && rng.gen_bool(0.5) {
            let value = pi_rational(rng, &[p, Prime::new(2).unwrap()], cfg);
            d.entries.push(Entry::Tau { src: Coord::new(s.block, s.copy), dst: t, value });
        }
    }
    let sources: Vec<Coord> = g
        .blocks()
        .iter()
        .enumerate()
        .filter(|(_, b)| !matches!(b.kind, BlockKind::Prufer { .. }))
        .flat_map(|(i, b)| (0..copies(&b.kind, cfg)).map(move |c| Coord::new(i, c)))
        .collect();
    for _ in 0..cfg.fin_entries {
        let Some(src) = sources.choose(rng).copied() else { break };
        let image = match g.kind(src.block) {
            BlockKind::Cyclic { p: q, k, .. } => {
                let (q, k) = (*q, *k);
                random_torsion(g, rng, cfg, |p| (p == q).then_some(k))
            }
            BlockKind::TorsionFree { pi, .. } => random_torsion(g, rng, cfg, |p| (!pi.contains(&p)).then_some(cfg.depth)),
            _ => random_torsion(g, rng, cfg, |_| Some(cfg.depth)),
        };
        if image.is_zero() {
            continue;
        }
        d.entries.push(Entry::Fin { src, modulus: None, image: image.iter().map(|(c, q)| (*c, q.clone())).collect() });
    }
    d.build().unwrap_or_else(|v| panic!("random endomorphism is valid: {v:?}"))
}

/// A random endomorphism built only from `fin` entries and finite blocks.
pub fn random_finitary(g: &Arc<GroupDesc>, rng: &mut impl Rng, cfg: &RandomConfig) -> Endo {
    random_endo(g, rng, cfg).finite_part()
}

/// A random group with up to four blocks over the primes 2, 3 and 5.
pub fn random_group(rng: &mut impl Rng, allow_free: bool) -> GroupDesc {
    let primes = [2u64, 3, 5].map(|p| Prime::new(p).unwrap());
    let mut kinds = Vec::new();
    let mut prufer = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let p = *primes.choose(rng).unwrap();
        let kind = match rng.gen_range(0..10) {
            0..=4 => BlockKind::Cyclic {
                p,
                k: rng.gen_range(1..=3),
                mult: if rng.gen_bool(0.6) { Mult::Omega } else { Mult::Finite(rng.gen_range(1..=2)) },
            },
            5..=6 if !prufer.contains(&p) => {
                prufer.push(p);
                BlockKind::Prufer { p, copies: if rng.gen_bool(0.25) { Mult::Omega } else { Mult::Finite(rng.gen_range(1..=2)) } }
            }
            _ => BlockKind::TorsionFree {
                pi: primes.iter().copied().filter(|_| rng.gen_bool(0.4)).collect(),
                rank: rng.gen_range(1..=2),
            },
        };
        kinds.push(kind);
    }
    if allow_free && rng.gen_bool(0.15) {
        kinds.push(BlockKind::FreeOmega);
    }
    GroupDesc::from_kinds("A", kinds).expect("generated blocks are valid")
}
