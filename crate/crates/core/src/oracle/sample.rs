use std::sync::Arc;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::FGSubgroup;
use crate::exactnum::{rat_int, Int, Rational};
use crate::exec::Exec;
use crate::groupkit::{BlockKind, Coord, Element, GroupDesc};

/// Shape of the random part of a subgroup sample: generator counts are
/// uniform in `1..=max_gens`, each generator has `1..=max_terms` terms
/// with numerators in `[-height, height]` and denominators `p^j`,
/// `0 ≤ j ≤ N`, on the level-`N` window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    pub max_gens: usize,
    pub max_terms: usize,
    pub height: i64,
    /// Copies per block used by the single and pair families.
    pub pair_copies: u64,
    /// Restricts every family to cyclic and Prüfer blocks.
    pub torsion_only: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { max_gens: 4, max_terms: 3, height: 3, pair_copies: 2, torsion_only: false }
    }
}

/// Copies of block `i` inside the level-`n` window.
fn window(g: &GroupDesc, i: usize, n: u32) -> u64 {
    g.kind(i).mult().finite().unwrap_or(u64::from(n)).min(u64::from(n).max(1))
}

fn pi_denominator(pi: impl IntoIterator<Item = crate::exactnum::Prime>, n: u32) -> Int {
    pi.into_iter().fold(Int::one(), |acc, p| acc * p.pow(n))
}

/// The generator of coordinate `c` at level `n`: `1` on cyclic and free
/// blocks, `1/p^n` on Prüfer blocks and `1/(∏ pi)^n` on torsion-free ones.
pub fn top(g: &GroupDesc, c: Coord, n: u32) -> Element {
    let q = match g.kind(c.block) {
        BlockKind::Cyclic { .. } | BlockKind::FreeOmega => Rational::one(),
        BlockKind::Prufer { p, .. } => Rational::new(Int::one(), p.pow(n)),
        BlockKind::TorsionFree { pi, .. } => Rational::new(Int::one(), pi_denominator(pi.iter().copied(), n)),
    };
    Element::single(g, c, q).expect("window coordinate")
}

/// `x + y` after scaling the one of larger finite order down to the
/// order of the other.
fn balanced(g: &GroupDesc, x: &Element, y: &Element) -> Element {
    let (ox, oy) = (x.order(g), y.order(g));
    let (x, y) = match (ox.finite(), oy.finite()) {
        (Some(a), Some(b)) if a > b && (a % b).eq(&Int::from(0)) => (x.scale(g, &(a / b)), y.clone()),
        (Some(a), Some(b)) if b > a && (b % a).eq(&Int::from(0)) => (x.clone(), y.scale(g, &(b / a))),
        _ => (x.clone(), y.clone()),
    };
    x.add(g, &y).expect("same group")
}

/// Deterministic families at level `n`: cyclic subgroups of single
/// coordinates and their socles, pair graphs across coordinates, diagonals
/// across `n` copies of two blocks, and layered graphs from the free block
/// into Prüfer blocks.
pub fn structured_families(g: &Arc<GroupDesc>, n: u32, cfg: &SampleConfig) -> Vec<FGSubgroup> {
    let h = |gens: Vec<Element>| FGSubgroup::new(g.clone(), gens);
    let used = blocks(g, cfg);
    let coords: Vec<Coord> = used
        .iter()
        .copied()
        .flat_map(|i| (0..window(g, i, n).min(cfg.pair_copies)).map(move |c| Coord::new(i, c)))
        .collect();
    let mut out = Vec::new();
    for &c in &coords {
        let t = top(g, c, n);
        out.push(h(vec![t.clone()]));
        if let Some(o) = t.order(g).finite() {
            if let Some((p, _)) = crate::exactnum::prime_power(o) {
                out.push(h(vec![t.scale(g, &(o / p.int()))]));
            }
        }
    }
    for (x, &c) in coords.iter().enumerate() {
        for &d in &coords[x + 1..] {
            out.push(h(vec![balanced(g, &top(g, c, n), &top(g, d, n))]));
        }
    }
    for (x, &a) in used.iter().enumerate() {
        for &b in &used[x..] {
            let w = window(g, a, n).min(window(g, b, n));
            if w < 2 {
                continue;
            }
            let gens = (0..w)
                .map(|i| {
                    let x = top(g, Coord::new(a, i), n);
                    if a == b { x } else { balanced(g, &x, &top(g, Coord::new(b, i), n)) }
                })
                .collect();
            out.push(h(gens));
        }
    }
    if let Some(f) = g.free_omega().filter(|_| !cfg.torsion_only) {
        for b in 0..g.blocks().len() {
            if let BlockKind::Prufer { p, .. } = g.kind(b) {
                let gens = (1..=n)
                    .map(|i| {
                        let y = Element::single(g, Coord::new(b, 0), Rational::new(Int::one(), p.pow(i))).unwrap();
                        top(g, Coord::new(f, u64::from(i)), n).add(g, &y).unwrap()
                    })
                    .collect();
                out.push(h(gens));
            }
        }
    }
    out
}

fn blocks(g: &GroupDesc, cfg: &SampleConfig) -> Vec<usize> {
    (0..g.blocks().len()).filter(|&i| !cfg.torsion_only || g.kind(i).is_torsion()).collect()
}

fn random_coeff(g: &GroupDesc, c: Coord, n: u32, cfg: &SampleConfig, rng: &mut ChaCha8Rng) -> Rational {
    let num = Int::from(rng.gen_range(-cfg.height..=cfg.height));
    let j = rng.gen_range(0..=n);
    match g.kind(c.block) {
        BlockKind::Cyclic { p, k, .. } => rat_int(&Int::from(rng.gen_range(0..p.get().saturating_pow(*k).min(1 << 20)))),
        BlockKind::Prufer { p, .. } => Rational::new(num, p.pow(j)),
        BlockKind::TorsionFree { pi, .. } => Rational::new(num, pi_denominator(pi.iter().copied(), j)),
        BlockKind::FreeOmega => rat_int(&num),
    }
}

fn random_subgroup(g: &Arc<GroupDesc>, n: u32, cfg: &SampleConfig, rng: &mut ChaCha8Rng) -> FGSubgroup {
    let used = blocks(g, cfg);
    if used.is_empty() {
        return FGSubgroup::new(g.clone(), vec![Element::zero()]);
    }
    let gens = (0..rng.gen_range(1..=cfg.max_gens))
        .map(|_| {
            let mut x = Element::zero();
            for _ in 0..rng.gen_range(1..=cfg.max_terms) {
                let b = used[rng.gen_range(0..used.len())];
                let c = Coord::new(b, rng.gen_range(0..window(g, b, n)));
                let q = random_coeff(g, c, n, cfg, rng);
                x.add_at(g, c, &q).expect("window coordinate");
            }
            x
        })
        .collect();
    FGSubgroup::new(g.clone(), gens)
}

/// The structured families at level `n` followed by `count` random
/// finitely generated subgroups of the level-`n` window. Random subgroup
/// `i` is drawn from stream `(n, i)` of `seed`.
pub fn sample_subgroups(
    g: &Arc<GroupDesc>,
    n: u32,
    count: usize,
    seed: u64,
    cfg: &SampleConfig,
    exec: Exec,
) -> Vec<FGSubgroup> {
    let tag = u64::from(n) | if cfg.torsion_only { 0 } else { 1 << 31 };
    let mut out = structured_families(g, n, cfg);
    out.extend(exec.map_range(count, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((tag << 32) | i as u64);
        random_subgroup(g, n, cfg, &mut rng)
    }));
    out
}
