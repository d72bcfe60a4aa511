use std::collections::HashSet;
use std::sync::Arc;

use num_traits::One;
use serde::Serialize;

use super::sample::{sample_subgroups, top, SampleConfig};
use super::{all_subgroups, closure, index_in_sum, subgroup_order, FGSubgroup, Index, OracleError};
use crate::endokit::Endo;
use crate::exactnum::{Int, Prime, Rational};
use crate::exec::Exec;
use crate::groupkit::{truncate, BlockKind, Coord, Element, GroupDesc, TfTruncation};
use crate::inertia::WitnessHint;

/// Largest subgroup whose elements `fs_profile` lists one by one.
pub const FS_ELEMENT_BUDGET: usize = 1 << 14;

/// Largest truncation whose subgroups are all enumerated on request.
pub const ENUMERATE_ALL_ORDER: u64 = 1 << 10;

/// Cap on the number of subgroups listed by an exhaustive enumeration.
pub const ENUMERATE_ALL_COUNT: usize = 200_000;

/// Window depth of the level-independent samples over all blocks.
pub const UNTRUNCATED_LEVEL: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictHint {
    Stable,
    Growing,
    Inconclusive,
}

/// Maxima at one level. Levels are nested: the families of a level contain
/// those of every lower level, so `max_index` is the running maximum and
/// `level_max` the maximum over the families drawn at this level alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelMax {
    pub level: u32,
    pub max_index: Index,
    pub level_max: Index,
    pub subgroups: usize,
    pub argmax: FGSubgroup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InertnessEvidence {
    pub per_level: Vec<LevelMax>,
    pub families: Vec<String>,
    pub verdict_hint: VerdictHint,
}

fn hint_of<'a>(maxima: impl Iterator<Item = &'a Index>) -> VerdictHint {
    let m: Vec<&Index> = maxima.collect();
    if m.iter().any(|x| **x == Index::Infinite) {
        return VerdictHint::Growing;
    }
    if m.len() >= 2 && m.windows(2).all(|w| w[1] > w[0]) {
        return VerdictHint::Growing;
    }
    if m.len() >= 2 && m[m.len() - 1] == m[m.len() - 2] {
        return VerdictHint::Stable;
    }
    VerdictHint::Inconclusive
}

/// Subgroups of the level-`n` truncation of the periodic part, lifted back
/// into `A`; empty when the truncation is too large.
fn truncation_subgroups(g: &Arc<GroupDesc>, n: u32) -> Vec<FGSubgroup> {
    let t = truncate(g, n, &TfTruncation::Drop);
    if t.order().is_one() || t.order() > Int::from(ENUMERATE_ALL_ORDER) {
        return Vec::new();
    }
    let tg = Arc::new(t.group.clone());
    let Ok(subs) = all_subgroups(&tg, ENUMERATE_ALL_ORDER, ENUMERATE_ALL_COUNT) else { return Vec::new() };
    subs.into_iter()
        .filter_map(|h| {
            let gens = h.gens.iter().map(|x| t.lift(g, x)).collect::<Option<Vec<_>>>()?;
            Some(FGSubgroup::new(g.clone(), gens))
        })
        .collect()
}

/// Subgroups of the periodic part inside the level-`n` window.
fn level_families(g: &Arc<GroupDesc>, n: u32, samples: usize, seed: u64, enumerate_all: bool, exec: Exec) -> Vec<FGSubgroup> {
    let cfg = SampleConfig { torsion_only: true, ..SampleConfig::default() };
    let mut hs = if g.blocks().iter().any(|b| b.kind.is_torsion()) {
        sample_subgroups(g, n, samples, seed, &cfg, exec)
    } else {
        Vec::new()
    };
    if enumerate_all {
        hs.extend(truncation_subgroups(g, n));
    }
    hs
}

fn first_max<T: Ord + Clone>(xs: &[T]) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, x) in xs.iter().enumerate() {
        if best.as_ref().is_none_or(|(_, b)| x > b) {
            best = Some((i, x.clone()));
        }
    }
    best
}

/// Maximum of `|H + φ(H) : H|` at each level over subgroups of the
/// periodic part inside the level window, together with one
/// level-independent sample of finitely generated subgroups over all
/// blocks. Indices are computed in `A`. `levels` must be ascending.
pub fn inertness_profile(
    phi: &Endo,
    levels: &[u32],
    samples: usize,
    seed: u64,
    enumerate_all: bool,
    exec: Exec,
) -> Result<InertnessEvidence, OracleError> {
    let g = phi.group().clone();
    let free_hs = if g.is_periodic() {
        Vec::new()
    } else {
        sample_subgroups(&g, UNTRUNCATED_LEVEL, samples, seed, &SampleConfig::default(), exec)
    };
    let free_idx = exec.map(&free_hs, |h| index_in_sum(h, phi)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let free_max = first_max(&free_idx);
    let mut per_level: Vec<LevelMax> = Vec::new();
    for &n in levels {
        let hs = level_families(&g, n, samples, seed, enumerate_all, exec);
        let idx = exec.map(&hs, |h| index_in_sum(h, phi)).into_iter().collect::<Result<Vec<_>, _>>()?;
        let (mut i, mut level_max) = first_max(&idx).unwrap_or((0, Index::one()));
        let mut argmax = hs.get(i).cloned();
        if let Some((j, m)) = &free_max {
            if *m > level_max {
                (i, level_max) = (*j, m.clone());
                argmax = Some(free_hs[i].clone());
            }
        }
        let argmax = argmax.unwrap_or_else(|| FGSubgroup::new(g.clone(), Vec::new()));
        let subgroups = hs.len() + free_hs.len();
        let (max_index, argmax) = match per_level.last() {
            Some(prev) if prev.max_index >= level_max => (prev.max_index.clone(), prev.argmax.clone()),
            _ => (level_max.clone(), argmax),
        };
        per_level.push(LevelMax { level: n, max_index, level_max, subgroups, argmax });
    }
    let mut families = vec!["singles".into(), "socles".into(), "pairs".into(), "diagonals".into()];
    families.push(format!("random:{samples}"));
    if !g.is_periodic() {
        families.push(format!("untruncated:{UNTRUNCATED_LEVEL}:{samples}"));
    }
    if enumerate_all {
        families.push(format!("all-subgroups:{ENUMERATE_ALL_ORDER}"));
    }
    let verdict_hint = hint_of(per_level.iter().map(|l| &l.max_index));
    Ok(InertnessEvidence { per_level, families, verdict_hint })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FsLevel {
    pub level: u32,
    /// Running maximum of `|X^* / X_*|` over nested levels.
    pub max_ratio: Index,
    pub level_max: Index,
    pub evaluated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FsReport {
    pub per_level: Vec<FsLevel>,
    pub verdict_hint: VerdictHint,
}

/// `|X^* / X_*|` for the least `φ`-invariant subgroup `X^*` containing `X`
/// and the largest `X_*` inside it; `None` past the element budget.
pub fn fs_ratio(phi: &Endo, x: &FGSubgroup) -> Result<Option<Int>, OracleError> {
    let g = phi.group();
    let mut gens = x.gens.clone();
    let mut frontier = x.gens.clone();
    let mut order = subgroup_order(g, &gens);
    loop {
        frontier = frontier.iter().map(|y| phi.apply(y)).collect::<Result<Vec<_>, _>>()?;
        gens.extend(frontier.iter().cloned());
        let next = subgroup_order(g, &gens);
        if next == order {
            break;
        }
        order = next;
    }
    let Index::Finite(upper) = order else { return Err(OracleError::NotPeriodic) };
    let Some(mut inner) = closure(g, &x.gens, FS_ELEMENT_BUDGET) else { return Ok(None) };
    loop {
        let mut next: HashSet<Element> = HashSet::with_capacity(inner.len());
        for y in &inner {
            if inner.contains(&phi.apply(y)?) {
                next.insert(y.clone());
            }
        }
        if next.len() == inner.len() {
            break;
        }
        inner = next;
    }
    Ok(Some(upper / Int::from(inner.len())))
}

/// Per-level maxima of `|X^* / X_*|` over the sampled families of a
/// periodic group.
pub fn fs_profile(phi: &Endo, levels: &[u32], samples: usize, seed: u64, exec: Exec) -> Result<FsReport, OracleError> {
    let g = phi.group().clone();
    if !g.is_periodic() {
        return Err(OracleError::NotPeriodic);
    }
    let mut per_level: Vec<FsLevel> = Vec::new();
    for &n in levels {
        let hs = level_families(&g, n, samples, seed, false, exec);
        let ratios = exec.map(&hs, |h| fs_ratio(phi, h)).into_iter().collect::<Result<Vec<_>, _>>()?;
        let done: Vec<Int> = ratios.iter().flatten().cloned().collect();
        let level_max = done.iter().max().cloned().unwrap_or_else(Int::one);
        let prev = per_level.last().map(|l| l.max_ratio.clone()).unwrap_or_else(Index::one);
        let level_max = Index::Finite(level_max);
        per_level.push(FsLevel {
            level: n,
            max_ratio: prev.max(level_max.clone()),
            level_max,
            evaluated: done.len(),
            skipped: ratios.len() - done.len(),
        });
    }
    let verdict_hint = hint_of(per_level.iter().map(|l| &l.max_ratio));
    Ok(FsReport { per_level, verdict_hint })
}

/// A witness family `H_1 ≤ H_2 ≤ …` with its indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessFamily {
    pub template: String,
    pub prime: u64,
    pub indices: Vec<(u32, Index)>,
    pub top: FGSubgroup,
}

impl WitnessFamily {
    /// Infinite at some level, or growing by a factor of at least `p` at
    /// every step of the upper half of the levels.
    pub fn unbounded(&self) -> bool {
        if self.indices.iter().any(|(_, i)| *i == Index::Infinite) {
            return true;
        }
        let n = self.indices.len();
        if n < 2 {
            return false;
        }
        let p = Int::from(self.prime);
        self.indices[n / 2..].windows(2).all(|w| match (&w[0].1, &w[1].1) {
            (Index::Finite(a), Index::Finite(b)) => *b >= a * &p,
            _ => false,
        })
    }
}

fn single(g: &GroupDesc, c: Coord, q: Rational) -> Element {
    Element::single(g, c, q).expect("family coordinate")
}

fn inv_pow(p: Prime, n: u32) -> Rational {
    Rational::new(Int::one(), p.pow(n))
}

fn hint_prime(g: &GroupDesc, hint: &WitnessHint) -> Prime {
    let of = |b: usize| g.kind(b).prime();
    let p = match hint {
        WitnessHint::Rank { .. } => None,
        WitnessHint::Diagonal { a, b } => of(*a).or(of(*b)),
        WitnessHint::Graph { dst, .. } | WitnessHint::TauSource { dst, .. } => of(dst.block),
        WitnessHint::PruferLayer { block, .. } => of(*block),
    };
    p.unwrap_or_else(|| Prime::new(2).expect("2 is prime"))
}

/// Member `H_n` of the family attached to `hint`.
pub fn family_member(g: &Arc<GroupDesc>, hint: &WitnessHint, n: u32) -> FGSubgroup {
    let p = hint_prime(g, hint);
    let gens = match hint {
        WitnessHint::Rank { v } => vec![Element::new(g, v.iter().cloned()).expect("hint coordinates")],
        WitnessHint::Diagonal { a, b } => (0..u64::from(n))
            .map(|i| {
                let x = top(g, Coord::new(*a, i), n);
                let y = top(g, Coord::new(*b, i), n);
                let (ox, oy) = (x.order(g), y.order(g));
                let (x, y) = match (ox.finite(), oy.finite()) {
                    (Some(s), Some(t)) if s > t => (x.scale(g, &(s / t)), y),
                    (Some(s), Some(t)) if t > s => (x, y.scale(g, &(t / s))),
                    _ => (x, y),
                };
                x.add(g, &y).expect("same group")
            })
            .collect(),
        WitnessHint::Graph { src, dst } => match g.kind(src.block) {
            BlockKind::FreeOmega => (1..=n)
                .map(|i| {
                    let x = single(g, Coord::new(src.block, u64::from(i)), Rational::one());
                    x.add(g, &single(g, *dst, inv_pow(p, i))).unwrap()
                })
                .collect(),
            _ => vec![single(g, *src, inv_pow(p, n)).add(g, &single(g, *dst, inv_pow(p, n))).unwrap()],
        },
        WitnessHint::PruferLayer { block, a, b } => {
            let mut x = single(g, Coord::new(*block, *a), inv_pow(p, n));
            if a != b {
                x = x.add(g, &single(g, Coord::new(*block, *b), inv_pow(p, n))).unwrap();
            }
            vec![x]
        }
        WitnessHint::TauSource { src, .. } => vec![single(g, *src, inv_pow(p, n))],
    };
    FGSubgroup::new(g.clone(), gens)
}

/// Indices of the family attached to `hint` at levels `1..=budget`.
pub fn witness_family(phi: &Endo, hint: &WitnessHint, budget: u32) -> Result<WitnessFamily, OracleError> {
    let g = phi.group().clone();
    let mut indices = Vec::new();
    for n in 1..=budget.max(1) {
        indices.push((n, index_in_sum(&family_member(&g, hint, n), phi)?));
    }
    Ok(WitnessFamily {
        template: format!("{hint:?}"),
        prime: hint_prime(&g, hint).get(),
        indices,
        top: family_member(&g, hint, budget.max(1)),
    })
}

/// Candidate templates built from the block structure alone.
pub fn candidate_hints(g: &GroupDesc) -> Vec<WitnessHint> {
    let nb = g.blocks().len();
    let mut out = Vec::new();
    let one = Rational::one();
    let tf: Vec<Coord> = g.tf_copies().iter().map(|c| Coord::new(c.block, c.copy)).take(4).collect();
    let free: Vec<Coord> = g.free_omega().map(|f| vec![Coord::new(f, 0)]).unwrap_or_default();
    let rank_coords: Vec<Coord> = tf.iter().chain(&free).copied().collect();
    for (i, c) in rank_coords.iter().enumerate() {
        out.push(WitnessHint::Rank { v: vec![(*c, one.clone())] });
        for d in &rank_coords[i + 1..] {
            out.push(WitnessHint::Rank { v: vec![(*c, one.clone()), (*d, one.clone())] });
        }
    }
    let omega: Vec<usize> = (0..nb).filter(|&i| g.kind(i).mult().is_omega()).collect();
    for (x, a) in omega.iter().enumerate() {
        for b in &omega[x + 1..] {
            out.push(WitnessHint::Diagonal { a: *a, b: *b });
        }
    }
    for b in 0..nb {
        let BlockKind::Prufer { p, copies } = g.kind(b) else { continue };
        let dst = Coord::new(b, 0);
        for c in &free {
            out.push(WitnessHint::Graph { src: *c, dst });
        }
        for c in tf.iter().filter(|c| g.kind(c.block).pi().is_some_and(|pi| pi.contains(p))) {
            out.push(WitnessHint::Graph { src: *c, dst });
            out.push(WitnessHint::TauSource { src: *c, dst });
        }
        let k = copies.finite().unwrap_or(3).min(3);
        for x in 0..k {
            for y in x..k {
                out.push(WitnessHint::PruferLayer { block: b, a: x, b: y });
            }
        }
    }
    out
}

/// The family for `hint` when it is unbounded within `budget` levels; with
/// no hint, the first unbounded family among [`candidate_hints`].
pub fn witness_search(phi: &Endo, hint: Option<&WitnessHint>, budget: u32) -> Result<Option<WitnessFamily>, OracleError> {
    let hints = match hint {
        Some(h) => vec![h.clone()],
        None => candidate_hints(phi.group()),
    };
    for h in &hints {
        let fam = witness_family(phi, h, budget)?;
        if fam.unbounded() {
            return Ok(Some(fam));
        }
    }
    Ok(None)
}
