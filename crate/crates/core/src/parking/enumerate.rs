//! Exhaustive enumeration of fully packed trees.
//!
//! Plane trees with `n` vertices are walked as balanced words of length
//! `2(n-1)` in lexicographic order (down before up), and labelings as a
//! mixed-radix counter over the support of `b`. Weights `Π b_ℓ(v)` depend
//! only on how often each label occurs, so the inner loop only tallies
//! integer counts per (label multiset, root surplus); the rationals are
//! formed once at the end.

use std::collections::HashMap;

use rug::{Integer, Rational};

use super::{LabeledTree, ParkingError, Result};
use crate::exec::Exec;
use crate::weights::WeightSequence;

/// Default cap on `shapes × labelings`.
pub const ITERATION_BUDGET: u128 = 1_000_000_000;

/// Exact `F_{n,p}` table: `rows[n - 1][p]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub rows: Vec<Vec<Rational>>,
}

impl Table {
    /// `F_{n,p}`, zero outside the table.
    pub fn get(&self, n: usize, p: usize) -> Rational {
        n.checked_sub(1)
            .and_then(|i| self.rows.get(i))
            .and_then(|r| r.get(p))
            .cloned()
            .unwrap_or_default()
    }

    pub fn n_max(&self) -> usize {
        self.rows.len()
    }

    /// Rows `n,p,numerator,denominator`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,p,numerator,denominator\n");
        for (i, row) in self.rows.iter().enumerate() {
            for (p, v) in row.iter().enumerate() {
                s.push_str(&format!("{},{},{},{}\n", i + 1, p, v.numer(), v.denom()));
            }
        }
        s
    }
}

/// Successor of a balanced word in lexicographic order, `true` < `false`.
pub fn next_dyck(word: &mut [bool]) -> bool {
    let len = word.len();
    let mut depth: Vec<i64> = Vec::with_capacity(len + 1);
    depth.push(0);
    for &d in word.iter() {
        depth.push(depth.last().unwrap() + if d { 1 } else { -1 });
    }
    // the rightmost down step that can turn into an up step
    for i in (0..len).rev() {
        if word[i] && depth[i] >= 1 {
            word[i] = false;
            let d = (depth[i] - 1) as usize;
            let rest = len - i - 1;
            let downs = (rest - d) / 2;
            for (k, w) in word[i + 1..].iter_mut().enumerate() {
                *w = k < downs;
            }
            return true;
        }
    }
    false
}

/// All balanced words of length `2m`.
pub fn dyck_words(m: usize) -> Vec<Vec<bool>> {
    let mut w: Vec<bool> = (0..2 * m).map(|k| k < m).collect();
    let mut out = vec![w.clone()];
    while next_dyck(&mut w) {
        out.push(w.clone());
    }
    out
}

pub fn catalan(m: usize) -> u128 {
    let mut c: u128 = 1;
    for k in 0..m as u128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

fn support(ws: &WeightSequence) -> Result<Vec<(u32, Rational)>> {
    let d = ws.degree().ok_or(ParkingError::InfiniteSupport)?;
    Ok((0..=d)
        .filter_map(|l| {
            let b = ws.coeff_exact(l)?;
            (b != 0).then_some((l as u32, b))
        })
        .collect())
}

/// Tallies of fully packed labelings of one shape, keyed by
/// (occurrences of each support label, root surplus).
fn tally_shape(word: &[bool], n: usize, labels: &[u32]) -> HashMap<(Vec<u8>, usize), u64> {
    let shape = LabeledTree::from_dyck(word, vec![0; n]).expect("balanced word");
    let parent: Vec<usize> = (0..n).map(|v| shape.parent(v).unwrap_or(0)).collect();
    let k = labels.len();
    let mut digits = vec![0usize; n];
    let mut s = vec![0i64; n];
    let mut out = HashMap::new();
    loop {
        for v in 0..n {
            s[v] = labels[digits[v]] as i64 - 1;
        }
        let mut ok = true;
        for v in (1..n).rev() {
            if s[v] < 0 {
                ok = false;
                break;
            }
            s[parent[v]] += s[v];
        }
        if ok && s[0] >= 0 {
            let mut counts = vec![0u8; k];
            for &d in &digits {
                counts[d] += 1;
            }
            *out.entry((counts, s[0] as usize)).or_insert(0) += 1;
        }
        // mixed-radix increment
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            digits[i] += 1;
            if digits[i] < k {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// `F_{n,p}` for `n <= n_max` by iterating over every labeled plane tree.
pub fn enumerate_fnp(ws: &WeightSequence, n_max: usize, budget: u128, exec: Exec) -> Result<Table> {
    let supp = support(ws)?;
    let labels: Vec<u32> = supp.iter().map(|s| s.0).collect();
    let needed: u128 = (1..=n_max).map(|n| catalan(n - 1) * (labels.len() as u128).pow(n as u32)).sum();
    if needed > budget {
        return Err(ParkingError::BudgetExceeded { needed, budget });
    }
    let d = ws.degree().unwrap_or(0);
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let words = dyck_words(n - 1);
        let tallies = exec.map_reduce(
            0..words.len(),
            |i| tally_shape(&words[i], n, &labels),
            HashMap::new,
            |mut a, b| {
                for (key, c) in b {
                    *a.entry(key).or_insert(0) += c;
                }
                a
            },
        );
        let width = (d.max(1) - 1) * n + 1;
        let mut row = vec![Rational::new(); width];
        for ((counts, p), c) in tallies {
            let mut w = Rational::from(Integer::from(c));
            for (j, &m) in counts.iter().enumerate() {
                for _ in 0..m {
                    w *= &supp[j].1;
                }
            }
            row[p] += w;
        }
        rows.push(row);
    }
    Ok(Table { rows })
}

/// The same table by a recursion on root label and ordered forests of
/// subtrees, independent of both the enumeration and the functional
/// equation's series algebra.
pub fn forest_dp(ws: &WeightSequence, n_max: usize) -> Result<Table> {
    let supp = support(ws)?;
    let d = ws.degree().unwrap_or(0);
    let width = |n: usize| (d.max(1) - 1) * n + 1;
    // f[n][s]: fully packed trees, g[n][s]: ordered forests of them
    let mut f: Vec<Vec<Rational>> = vec![vec![]];
    let mut g: Vec<Vec<Rational>> = vec![vec![Rational::from(1)]];
    for n in 1..=n_max {
        let mut row = vec![Rational::new(); width(n)];
        for (s_f, gv) in g[n - 1].iter().enumerate() {
            if *gv == 0 {
                continue;
            }
            for (l, b) in &supp {
                let s = s_f as i64 + *l as i64 - 1;
                if s >= 0 {
                    row[s as usize] += Rational::from(b * gv);
                }
            }
        }
        f.push(row);
        // forests with n vertices: first tree has n1 vertices
        let mut frow = vec![Rational::new(); width(n)];
        for n1 in 1..=n {
            for (s1, a) in f[n1].iter().enumerate() {
                if *a == 0 {
                    continue;
                }
                for (s2, b) in g[n - n1].iter().enumerate() {
                    if *b != 0 {
                        frow[s1 + s2] += Rational::from(a * b);
                    }
                }
            }
        }
        g.push(frow);
    }
    Ok(Table { rows: f.into_iter().skip(1).collect() })
}

/// Number of fully packed trees with `n` vertices and labels in `0..=d`,
/// by a depth-first search that assigns labels in preorder and prunes
/// once a finished subtree has negative surplus.
pub fn count_fully_packed_dfs(n: usize, d: u32) -> u128 {
    dyck_words(n - 1)
        .iter()
        .map(|w| {
            let t = LabeledTree::from_dyck(w, vec![0; n]).unwrap();
            let mut labels = vec![0u32; n];
            dfs(&t, 0, d, &mut labels)
        })
        .sum()
}

fn dfs(t: &LabeledTree, v: usize, d: u32, labels: &mut Vec<u32>) -> u128 {
    if v == t.len() {
        let lt = LabeledTree::new((0..t.len()).map(|u| t.children(u).to_vec()).collect(), labels.clone()).unwrap();
        return lt.is_fully_packed() as u128;
    }
    let mut total = 0;
    for l in 0..=d {
        labels[v] = l;
        if subtree_closed_ok(t, v, labels) {
            total += dfs(t, v + 1, d, labels);
        }
    }
    total
}

/// Subtrees whose last preorder vertex is `v` are complete; reject if any
/// has negative surplus.
fn subtree_closed_ok(t: &LabeledTree, v: usize, labels: &[u32]) -> bool {
    if !t.children(v).is_empty() {
        return true;
    }
    let mut u = v;
    loop {
        let last = last_descendant(t, u);
        if last != v {
            return true;
        }
        let s: i64 = (u..=last).map(|w| labels[w] as i64 - 1).sum();
        if s < 0 {
            return false;
        }
        match t.parent(u) {
            Some(p) => u = p,
            None => return true,
        }
    }
}

fn last_descendant(t: &LabeledTree, mut u: usize) -> usize {
    while let Some(&c) = t.children(u).last() {
        u = c;
    }
    u
}
