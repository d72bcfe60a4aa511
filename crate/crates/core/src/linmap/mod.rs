//! Scalar-plus-finite-rank decomposition of square matrices over a prime
//! field or the rationals, with exhaustive and sampled subspace-growth
//! oracles over finite fields.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{divisors, fmt_rational, mod_inverse, Int, Prime, Rational};
use crate::exec::Exec;

/// Default cap on `p^n` for exhaustive subspace enumeration. F_2 up to
/// n = 8 and F_3 up to n = 5 fit.
pub const DEFAULT_BUDGET: u64 = 256;

/// Largest prime whose elements `scalar_defect` scans one by one.
pub const SCAN_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Field {
    Fp(Prime),
    Q,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Fp(p) => write!(f, "F{p}"),
            Field::Q => write!(f, "Q"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinmapError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("{value} is not an element of {field}")]
    NotInField { value: String, field: Field },
    #[error("enumeration needs {needed} > budget {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("exhaustive enumeration requires a finite field")]
    InfiniteField,
    #[error("dimension mismatch")]
    Dimension,
}

/// Square matrix with entries in `field`. Prime-field entries are stored as
/// integers in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    field: Field,
    rows: Vec<Vec<Rational>>,
}

fn reduce(field: Field, q: &Rational) -> Result<Rational, LinmapError> {
    match field {
        Field::Q => Ok(q.clone()),
        Field::Fp(p) => {
            let m = p.int();
            let inv = mod_inverse(q.denom(), &m)
                .ok_or_else(|| LinmapError::NotInField { value: fmt_rational(q), field })?;
            Ok(Rational::from_integer((q.numer() * inv).mod_floor(&m)))
        }
    }
}

impl ExactMatrix {
    pub fn new(field: Field, rows: Vec<Vec<Rational>>) -> Result<Self, LinmapError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinmapError::NotSquare);
        }
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|x| reduce(field, x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExactMatrix { field, rows })
    }

    pub fn from_ints(field: Field, rows: &[Vec<i64>]) -> Result<Self, LinmapError> {
        Self::new(field, rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect())
    }

    pub fn scalar(field: Field, n: usize, lambda: &Rational) -> Result<Self, LinmapError> {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { lambda.clone() } else { Rational::zero() }).collect())
            .collect();
        Self::new(field, rows)
    }

    pub fn identity(field: Field, n: usize) -> Self {
        Self::scalar(field, n, &Rational::one()).expect("1 lies in every field")
    }

    /// Companion matrix of `x^n`: the nilpotent shift `e_i ↦ e_{i+1}`.
    pub fn shift(field: Field, n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j + 1 { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        ExactMatrix { field, rows }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinmapError> {
        if self.field != other.field || self.dim() != other.dim() {
            return Err(LinmapError::Dimension);
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Self::new(self.field, rows)
    }

    /// `M + μI`.
    pub fn add_scalar(&self, mu: &Rational) -> Result<Self, LinmapError> {
        self.add(&Self::scalar(self.field, self.dim(), mu)?)
    }

    pub fn rank(&self) -> usize {
        rank_rows(self.field, &self.rows)
    }

    /// Entries as residues mod `p`; `None` over Q.
    fn residues(&self) -> Option<(u64, Vec<Vec<u64>>)> {
        let Field::Fp(p) = self.field else { return None };
        let rows = self.rows.iter().map(|r| r.iter().map(|x| x.numer().to_u64().expect("reduced entry")).collect()).collect();
        Some((p.get(), rows))
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> =
            self.rows.iter().map(|r| r.iter().map(fmt_rational).collect::<Vec<_>>().join(" ")).collect();
        write!(f, "{}", rows.join("; "))
    }
}

fn rank_rows(field: Field, rows: &[Vec<Rational>]) -> usize {
    match field {
        Field::Fp(p) => {
            let m: Vec<Vec<u64>> = rows
                .iter()
                .map(|r| r.iter().map(|x| reduce(field, x).expect("field element").numer().to_u64().unwrap()).collect())
                .collect();
            rank_fp(p.get(), m)
        }
        Field::Q => rank_q(rows.to_vec()),
    }
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut b, mut e, mut r) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

/// Row rank over F_p of a possibly non-square matrix.
pub fn rank_fp(p: u64, mut m: Vec<Vec<u64>>) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank][c], p);
        for x in m[rank].iter_mut() {
            *x = mulmod(*x, inv, p);
        }
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + p - mulmod(f, *y, p)) % p;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Row rank over Q of a possibly non-square matrix.
pub fn rank_q(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, piv);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &pivot_row[c];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Characteristic polynomial `det(xI − A)` of an integer matrix, leading
/// coefficient first. Division-free, so valid over every ring.
pub fn char_poly(a: &[Vec<Int>]) -> Vec<Int> {
    let n = a.len();
    let mut v = vec![Int::one()];
    for r in 0..n {
        // t = (1, −a_rr, −R C, −R S C, …, −R S^{r−1} C)
        let mut t = vec![Int::one(), -&a[r][r]];
        let mut col: Vec<Int> = (0..r).map(|i| a[i][r].clone()).collect();
        for _ in 0..r {
            let rc: Int = (0..r).map(|j| &a[r][j] * &col[j]).sum();
            t.push(-rc);
            col = (0..r).map(|i| (0..r).map(|j| &a[i][j] * &col[j]).sum()).collect();
        }
        v = (0..r + 2).map(|i| (0..=i.min(r)).map(|j| &t[i - j] * &v[j]).sum()).collect();
    }
    v
}

fn eval(poly: &[Int], x: &Int) -> Int {
    poly.iter().fold(Int::zero(), |acc, c| acc * x + c)
}

/// Rational eigenvalues of `M` over Q, ascending and without repetition.
fn rational_eigenvalues(m: &ExactMatrix) -> Vec<Rational> {
    let d = m.rows.iter().flatten().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
    let a: Vec<Vec<Int>> = m.rows.iter().map(|r| r.iter().map(|x| (x * &d).to_integer()).collect()).collect();
    let mut poly = char_poly(&a);
    let mut roots = Vec::new();
    // strip factors of x
    while poly.len() > 1 && poly.last().is_some_and(|c| c.is_zero()) {
        poly.pop();
        if roots.is_empty() {
            roots.push(Int::zero());
        }
    }
    if poly.len() > 1 {
        let low = poly.last().expect("nonempty").clone();
        for q in divisors(&low) {
            for mu in [q.clone(), -q] {
                if eval(&poly, &mu).is_zero() {
                    roots.push(mu);
                }
            }
        }
    }
    let mut out: Vec<Rational> = roots.into_iter().map(|mu| Rational::new(mu, d.clone())).collect();
    out.sort();
    out.dedup();
    out
}

/// `M = λI + finitary_part` with `defect = rank(finitary_part)` minimal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectResult {
    pub lambda: Option<Rational>,
    pub defect: usize,
    pub finitary_part: ExactMatrix,
}

/// Minimizes `rank(M − λI)` over admissible scalars, smallest `λ` first on
/// ties. Without any admissible scalar, `λ` is absent, the defect is `n`
/// and the finitary part is `M`.
pub fn scalar_defect(m: &ExactMatrix, exclude_zero: bool) -> Result<DefectResult, LinmapError> {
    let n = m.dim();
    let candidates: Vec<Rational> = match m.field {
        Field::Fp(p) => {
            let p = p.get();
            if p > SCAN_LIMIT {
                return Err(LinmapError::BudgetExceeded { needed: p.to_string(), budget: SCAN_LIMIT });
            }
            let (_, res) = m.residues().expect("prime field");
            let a: Vec<Vec<Int>> = res.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect();
            let poly: Vec<u64> = char_poly(&a).iter().map(|c| c.mod_floor(&Int::from(p)).to_u64().unwrap()).collect();
            let start = u64::from(exclude_zero);
            let is_root = |x: u64| poly.iter().fold(0u64, |acc, &c| (mulmod(acc, x, p) + c) % p) == 0;
            // every non-root has full rank, so the first admissible scalar
            // stands in for all of them
            let mut c: Vec<u64> = (start..p).filter(|&x| is_root(x)).collect();
            if start < p && !c.contains(&start) {
                c.push(start);
            }
            c.sort_unstable();
            c.into_iter().map(|x| Rational::from_integer(x.into())).collect()
        }
        Field::Q => {
            let mut c = rational_eigenvalues(m);
            if !exclude_zero && !c.iter().any(|x| x.is_zero()) {
                c.push(Rational::zero());
                c.sort();
            }
            c.retain(|x| !(exclude_zero && x.is_zero()));
            c
        }
    };
    let mut best: Option<(usize, Rational, ExactMatrix)> = None;
    for lambda in candidates {
        let part = m.add_scalar(&-&lambda)?;
        let r = part.rank();
        if best.as_ref().is_none_or(|(b, _, _)| r < *b) {
            best = Some((r, lambda, part));
        }
    }
    Ok(match best {
        Some((defect, lambda, finitary_part)) => DefectResult { lambda: Some(lambda), defect, finitary_part },
        None => DefectResult { lambda: None, defect: n, finitary_part: m.clone() },
    })
}

/// Basis rows of a subspace of `F_p^n`.
pub type Basis = Vec<Vec<u64>>;

/// `dim(H + MH) − dim(H)` for `H` spanned by the rows of `basis`.
pub fn growth_fp(p: u64, m: &[Vec<u64>], basis: &Basis) -> usize {
    let n = m.len();
    let h = rank_fp(p, basis.clone());
    let mut all = basis.clone();
    for v in basis {
        all.push((0..n).map(|i| (0..n).fold(0, |acc, j| (acc + mulmod(m[i][j], v[j], p)) % p)).collect());
    }
    rank_fp(p, all) - h
}

fn growth_q(m: &ExactMatrix, basis: &[Vec<Rational>]) -> usize {
    let n = m.dim();
    let h = rank_q(basis.to_vec());
    let mut all = basis.to_vec();
    for v in basis {
        all.push((0..n).map(|i| (0..n).map(|j| &m.rows[i][j] * &v[j]).sum()).collect());
    }
    rank_q(all) - h
}

/// Result of an exhaustive subspace scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InertReport {
    pub max_growth: usize,
    /// First subspace in enumeration order attaining the maximum, as its
    /// reduced row-echelon basis.
    pub witness: Basis,
    pub subspaces: u64,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Every subspace of `F_p^n` with pivot columns `pivots`, in lexicographic
/// order of their row-major free entries, folded into the best growth.
fn scan_cell(p: u64, m: &[Vec<u64>], pivots: &[usize]) -> (usize, Basis, u64) {
    let n = m.len();
    let free: Vec<(usize, usize)> = pivots
        .iter()
        .enumerate()
        .flat_map(|(r, &pc)| ((pc + 1)..n).filter(|c| !pivots.contains(c)).map(move |c| (r, c)))
        .collect();
    let mut basis: Basis = pivots
        .iter()
        .map(|&pc| (0..n).map(|c| u64::from(c == pc)).collect())
        .collect();
    let mut digits = vec![0u64; free.len()];
    let mut best: Option<(usize, Basis)> = None;
    let mut count = 0u64;
    loop {
        count += 1;
        let g = growth_fp(p, m, &basis);
        if best.as_ref().is_none_or(|(b, _)| g > *b) {
            best = Some((g, basis.clone()));
        }
        // odometer with the last free entry fastest
        let mut i = free.len();
        loop {
            if i == 0 {
                let (g, b) = best.expect("one subspace at least");
                return (g, b, count);
            }
            i -= 1;
            digits[i] = (digits[i] + 1) % p;
            let (r, c) = free[i];
            basis[r][c] = digits[i];
            if digits[i] != 0 {
                break;
            }
        }
    }
}

/// `max_H dim(H + MH) − dim(H)` over every subspace `H` of `F_p^n`,
/// enumerated by dimension and then by reduced row-echelon form. Requires
/// `p^n ≤ budget`.
pub fn max_inert_codim(m: &ExactMatrix, budget: u64, exec: Exec) -> Result<InertReport, LinmapError> {
    let (p, res) = m.residues().ok_or(LinmapError::InfiniteField)?;
    let n = m.dim();
    let size = Int::from(p).pow(n as u32);
    if size > Int::from(budget) {
        return Err(LinmapError::BudgetExceeded { needed: size.to_string(), budget });
    }
    let cells: Vec<Vec<usize>> = (0..=n).flat_map(|k| combinations(n, k)).collect();
    let results = exec.map(&cells, |pivots| scan_cell(p, &res, pivots));
    let mut out = InertReport { max_growth: 0, witness: Vec::new(), subspaces: 0 };
    let mut first = true;
    for (g, b, c) in results {
        out.subspaces += c;
        if first || g > out.max_growth {
            out.max_growth = g;
            out.witness = b;
            first = false;
        }
    }
    Ok(out)
}

/// Sampled growth against the scalar defect bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthReport {
    pub trials: usize,
    pub bound: usize,
    pub max_observed: usize,
    pub violations: usize,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `trials` random subspaces spanned by a random number of random
/// vectors; over Q the coordinates lie in `[-3, 3]`. Trial `i` draws from
/// its own stream derived from `seed`, so the report does not depend on
/// `exec`.
pub fn growth_bound_check(m: &ExactMatrix, trials: usize, seed: u64, exec: Exec) -> Result<GrowthReport, LinmapError> {
    let bound = scalar_defect(m, false)?.defect;
    let n = m.dim();
    let res = m.residues();
    let growths = exec.map_range(trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let k = rng.gen_range(0..=n);
        match &res {
            Some((p, mm)) => {
                let basis: Basis = (0..k).map(|_| (0..n).map(|_| rng.gen_range(0..*p)).collect()).collect();
                growth_fp(*p, mm, &basis)
            }
            None => {
                let basis: Vec<Vec<Rational>> = (0..k)
                    .map(|_| (0..n).map(|_| Rational::from_integer(rng.gen_range(-3i64..=3).into())).collect())
                    .collect();
                growth_q(m, &basis)
            }
        }
    });
    Ok(GrowthReport {
        trials,
        bound,
        max_observed: growths.iter().copied().max().unwrap_or(0),
        violations: growths.iter().filter(|&&g| g > bound).count(),
    })
}

/// Parses `field` (`Q` or a prime) and rows separated by `;` or newlines,
/// entries separated by whitespace or commas.
pub fn parse_matrix(field: &str, text: &str) -> Result<ExactMatrix, String> {
    let field = match field.trim() {
        "Q" | "q" => Field::Q,
        s => {
            let s = s.trim_start_matches(['F', 'f']);
            let p: u64 = s.parse().map_err(|_| format!("bad field {s:?}"))?;
            Field::Fp(Prime::new(p).map_err(|e| e.to_string())?)
        }
    };
    let rows = text
        .split([';', '\n'])
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| {
            r.split([' ', ',', '\t'])
                .filter(|x| !x.is_empty())
                .map(|x| crate::exactnum::parse_rational(x).ok_or_else(|| format!("bad entry {x:?}")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    ExactMatrix::new(field, rows).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests;
