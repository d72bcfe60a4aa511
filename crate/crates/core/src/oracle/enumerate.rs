use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use super::{FGSubgroup, OracleError};
use crate::exactnum::{rat_int, Int};
use crate::groupkit::{BlockKind, Coord, Element, GroupDesc};

/// Coordinates of a finite group with their cyclic orders.
fn radix(g: &GroupDesc) -> Result<Vec<(Coord, u64)>, OracleError> {
    let mut out = Vec::new();
    for (i, b) in g.blocks().iter().enumerate() {
        match &b.kind {
            BlockKind::Cyclic { p, k, mult } => {
                let m = mult.finite().ok_or(OracleError::NotPeriodic)?;
                let q = p.get().checked_pow(*k).ok_or(OracleError::Budget(u64::MAX))?;
                out.extend((0..m).map(|c| (Coord::new(i, c), q)));
            }
            _ => return Err(OracleError::NotPeriodic),
        }
    }
    Ok(out)
}

fn order_of(rad: &[(Coord, u64)], limit: u64) -> Result<u64, OracleError> {
    rad.iter().try_fold(1u64, |acc, (_, q)| acc.checked_mul(*q).filter(|&n| n <= limit).ok_or(OracleError::Budget(limit)))
}

fn decode(g: &GroupDesc, rad: &[(Coord, u64)], mut i: u64) -> Element {
    let mut pairs = Vec::new();
    for (c, q) in rad.iter().rev() {
        pairs.push((*c, rat_int(&Int::from(i % q))));
        i /= q;
    }
    Element::new(g, pairs).expect("in range")
}

/// All elements of a finite group given by cyclic blocks of finite
/// multiplicity, in mixed-radix order, when its order is at most `limit`.
pub fn enumerate_elements(g: &GroupDesc, limit: u64) -> Result<Vec<Element>, OracleError> {
    let rad = radix(g)?;
    let n = order_of(&rad, limit)?;
    Ok((0..n).map(|i| decode(g, &rad, i)).collect())
}

/// Every subgroup of a finite group of order at most `order_limit`, each
/// with a generating set, breadth first by number of generators. Fails
/// once more than `count_limit` subgroups are found.
pub fn all_subgroups(g: &Arc<GroupDesc>, order_limit: u64, count_limit: usize) -> Result<Vec<FGSubgroup>, OracleError> {
    let rad = radix(g)?;
    let n = order_of(&rad, order_limit)? as usize;
    let add = |a: usize, b: usize| {
        let (mut a, mut b, mut out, mut place) = (a as u64, b as u64, 0u64, 1u64);
        for (_, q) in rad.iter().rev() {
            out += ((a % q + b % q) % q) * place;
            place *= q;
            a /= q;
            b /= q;
        }
        out as usize
    };
    let words = n.div_ceil(64);
    let has = |s: &[u64], i: usize| s[i / 64] >> (i % 64) & 1 == 1;
    let mut trivial = vec![0u64; words];
    trivial[0] = 1;
    let mut seen: HashSet<Vec<u64>> = HashSet::from([trivial.clone()]);
    let mut found: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([(trivial, Vec::<usize>::new())]);
    while let Some((s, gens)) = queue.pop_front() {
        let members: Vec<usize> = (0..n).filter(|&i| has(&s, i)).collect();
        for x in 0..n {
            if has(&s, x) {
                continue;
            }
            let mut t = s.clone();
            let mut kx = x;
            while !has(&s, kx) {
                for &m in &members {
                    let y = add(m, kx);
                    t[y / 64] |= 1 << (y % 64);
                }
                kx = add(kx, x);
            }
            if seen.insert(t.clone()) {
                if seen.len() > count_limit {
                    return Err(OracleError::Budget(count_limit as u64));
                }
                let mut gx = gens.clone();
                gx.push(x);
                found.push(gx.clone());
                queue.push_back((t, gx));
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|gens| FGSubgroup::new(g.clone(), gens.into_iter().map(|i| decode(g, &rad, i as u64)).collect()))
        .collect())
}
