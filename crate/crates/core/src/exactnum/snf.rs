use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Int;

/// Smith normal form `U · M · V = D` with `d_i | d_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    pub d: Vec<Vec<Int>>,
    pub u: Vec<Vec<Int>>,
    pub v: Vec<Vec<Int>>,
}

impl Snf {
    pub fn diagonal(&self) -> Vec<Int> {
        let n = self.d.len().min(self.d.first().map_or(0, |r| r.len()));
        (0..n).map(|i| self.d[i][i].clone()).collect()
    }
}

pub fn snf(m: &[Vec<Int>]) -> Snf {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut w = Work {
        a: m.to_vec(),
        u: Some(identity(rows)),
        v: Some(identity(cols)),
        rows,
        cols,
    };
    w.run();
    Snf { d: w.a, u: w.u.unwrap(), v: w.v.unwrap() }
}

/// Diagonal of the Smith normal form, without the transforms.
pub fn snf_diagonal(m: &[Vec<Int>]) -> Vec<Int> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut w = Work { a: m.to_vec(), u: None, v: None, rows, cols };
    w.run();
    (0..rows.min(cols)).map(|i| w.a[i][i].clone()).collect()
}

fn identity(n: usize) -> Vec<Vec<Int>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect()
}

struct Work {
    a: Vec<Vec<Int>>,
    u: Option<Vec<Vec<Int>>>,
    v: Option<Vec<Vec<Int>>>,
    rows: usize,
    cols: usize,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            if let Some(u) = &mut self.u {
                u.swap(i, j);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for r in &mut self.a {
                r.swap(i, j);
            }
            if let Some(v) = &mut self.v {
                for r in v {
                    r.swap(i, j);
                }
            }
        }
    }

    /// row_i -= q · row_t
    fn row_sub(&mut self, i: usize, t: usize, q: &Int) {
        let (src, dst) = pick(&mut self.a, t, i);
        for (x, y) in dst.iter_mut().zip(src.iter()) {
            if !y.is_zero() {
                *x -= q * y;
            }
        }
        if let Some(u) = &mut self.u {
            let (src, dst) = pick(u, t, i);
            for (x, y) in dst.iter_mut().zip(src.iter()) {
                if !y.is_zero() {
                    *x -= q * y;
                }
            }
        }
    }

    /// col_j -= q · col_t
    fn col_sub(&mut self, j: usize, t: usize, q: &Int) {
        for r in &mut self.a {
            if !r[t].is_zero() {
                let d = q * &r[t];
                r[j] -= d;
            }
        }
        if let Some(v) = &mut self.v {
            for r in v {
                if !r[t].is_zero() {
                    let d = q * &r[t];
                    r[j] -= d;
                }
            }
        }
    }

    fn negate_row(&mut self, t: usize) {
        for x in &mut self.a[t] {
            *x = -&*x;
        }
        if let Some(u) = &mut self.u {
            for x in &mut u[t] {
                *x = -&*x;
            }
        }
    }

    fn run(&mut self) {
        let n = self.rows.min(self.cols);
        let mut t = 0;
        while t < n {
            // pivot of minimal absolute value in the remaining block
            let mut best: Option<(usize, usize)> = None;
            for i in t..self.rows {
                for j in t..self.cols {
                    let x = &self.a[i][j];
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < self.a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut dirty = false;
                for i in t + 1..self.rows {
                    if !self.a[i][t].is_zero() {
                        let q = self.a[i][t].div_floor(&self.a[t][t]);
                        self.row_sub(i, t, &q);
                        dirty |= !self.a[i][t].is_zero();
                    }
                }
                for j in t + 1..self.cols {
                    if !self.a[t][j].is_zero() {
                        let q = self.a[t][j].div_floor(&self.a[t][t]);
                        self.col_sub(j, t, &q);
                        dirty |= !self.a[t][j].is_zero();
                    }
                }
                if dirty {
                    // move the smallest leftover in row/column t to the pivot
                    let mut best = (t, t);
                    for i in t + 1..self.rows {
                        let x = &self.a[i][t];
                        if !x.is_zero() && x.abs() < self.a[best.0][best.1].abs() {
                            best = (i, t);
                        }
                    }
                    for j in t + 1..self.cols {
                        let x = &self.a[t][j];
                        if !x.is_zero() && x.abs() < self.a[best.0][best.1].abs() {
                            best = (t, j);
                        }
                    }
                    self.swap_rows(t, best.0);
                    self.swap_cols(t, best.1);
                    continue;
                }
                // divisibility of the remaining block by the pivot
                let piv = self.a[t][t].clone();
                let bad = (t + 1..self.rows)
                    .find(|&i| (t + 1..self.cols).any(|j| !self.a[i][j].is_multiple_of(&piv)));
                match bad {
                    Some(i) => {
                        let minus_one = -Int::one();
                        self.row_sub(t, i, &minus_one);
                    }
                    None => break,
                }
            }
            if self.a[t][t].is_negative() {
                self.negate_row(t);
            }
            t += 1;
        }
    }
}

fn pick<T>(v: &mut [T], src: usize, dst: usize) -> (&T, &mut T) {
    assert_ne!(src, dst);
    if src < dst {
        let (a, b) = v.split_at_mut(dst);
        (&a[src], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(src);
        (&b[0], &mut a[dst])
    }
}
