//! Exact size-bounded correlation clustering by exhaustive enumeration.
//!
//! Partitions are generated as restricted-growth strings (vertex `i` goes
//! into one of the open blocks or opens the next one), skipping full blocks
//! and any prefix whose partial cost already reaches the incumbent. The
//! depth-first order is lexicographic in the string, so keeping the first
//! strictly better partition yields the lexicographically smallest optimum.

use crate::error::{Error, Result};
use crate::rounding::Clustering;
use crate::weights::EdgeWeights;

pub const DEFAULT_MAX_N: usize = 12;

/// Cost differences below this are ties.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub best: Clustering,
    pub cost: f64,
    /// Complete partitions reached by the search.
    pub partitions_examined: u64,
}

struct Search<'a> {
    w: &'a EdgeWeights,
    n: usize,
    cap: usize,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    best_cost: f64,
    best_labels: Vec<usize>,
    examined: u64,
}

impl Search<'_> {
    fn dfs(&mut self, i: usize, open: usize, cost: f64) {
        if i == self.n {
            self.examined += 1;
            if cost < self.best_cost - TIE_EPS {
                self.best_cost = cost;
                self.best_labels.clone_from(&self.labels);
            }
            return;
        }
        if cost >= self.best_cost - TIE_EPS {
            return;
        }
        for b in 0..=open {
            if b < open && self.sizes[b] >= self.cap {
                continue;
            }
            let mut delta = 0.0;
            for j in 0..i {
                delta += if self.labels[j] == b {
                    self.w.minus(i, j)
                } else {
                    self.w.plus(i, j)
                };
            }
            self.labels[i] = b;
            if b == open {
                self.sizes.push(1);
                self.dfs(i + 1, open + 1, cost + delta);
                self.sizes.pop();
            } else {
                self.sizes[b] += 1;
                self.dfs(i + 1, open, cost + delta);
                self.sizes[b] -= 1;
            }
        }
    }
}

/// Minimum-cost clustering with every block of size at most `k + 1`.
///
/// Refuses instances with more than `max_n` vertices.
pub fn solve_exact(w: &EdgeWeights, k: usize, max_n: usize) -> Result<ExactResult> {
    let n = w.n();
    if n > max_n {
        return Err(Error::TooLarge { n, max: max_n });
    }
    if k == 0 {
        return Err(Error::input("K must be a positive integer"));
    }
    let mut search = Search {
        w,
        n,
        cap: k + 1,
        labels: vec![0; n],
        sizes: Vec::with_capacity(n),
        best_cost: f64::INFINITY,
        best_labels: Vec::new(),
        examined: 0,
    };
    search.dfs(0, 0, 0.0);
    let best = Clustering::from_labels(&search.best_labels);
    Ok(ExactResult {
        cost: crate::rounding::clustering_cost(&best, w),
        best,
        partitions_examined: search.examined,
    })
}
