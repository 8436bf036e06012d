//! Size-bounded pivot rounding of a fractional LP solution.
//!
//! Each step picks a pivot `u` from the surviving vertices and gathers its
//! close set `T = {w : x_uw <= α}`. If the pivot is, on average, not close
//! enough to `T` it becomes a singleton; otherwise `{u} ∪ T` is emitted,
//! split into groups of at most `K + 1` when it is too large.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::FractionalSolution;
use crate::matrix::SymMatrix;
use crate::stats::seeded_rng;
use crate::weights::EdgeWeights;

/// Default rounding threshold, the value that balances the two charging
/// factors `3/(1-2α)` and `2/α` (both equal 7).
pub const DEFAULT_ALPHA: f64 = 2.0 / 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum PivotRule {
    /// Smallest surviving index.
    LowestIndex,
    /// Surviving vertex with the most survivors within `α`; ties by index.
    LargestNeighbourhood,
    /// Uniformly random survivor from a seeded generator.
    Seeded { seed: u64 },
}

impl std::str::FromStr for PivotRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest-index" => Ok(PivotRule::LowestIndex),
            "largest-neighbourhood" | "largest-neighborhood" => Ok(PivotRule::LargestNeighbourhood),
            other => match other.strip_prefix("seeded:") {
                Some(seed) => seed
                    .parse()
                    .map(|seed| PivotRule::Seeded { seed })
                    .map_err(|_| Error::input(format!("invalid pivot seed in '{other}'"))),
                None => Err(Error::input(format!(
                    "unknown pivot rule '{other}' (lowest-index, largest-neighbourhood, seeded:<n>)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingParams {
    pub alpha: f64,
    /// Clusters hold at most `k + 1` genes.
    pub k: usize,
    pub pivot: PivotRule,
}

impl RoundingParams {
    pub fn new(k: usize) -> Self {
        RoundingParams {
            alpha: DEFAULT_ALPHA,
            k,
            pivot: PivotRule::LowestIndex,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::input(format!("alpha must lie in (0, 1/2), got {}", self.alpha)));
        }
        if self.k == 0 {
            return Err(Error::input("K must be a positive integer"));
        }
        Ok(())
    }
}

/// A partition of `0..n` into nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    blocks: Vec<Vec<usize>>,
    assignment: Vec<usize>,
}

impl Clustering {
    /// Validates that `blocks` partition `0..n`. Members are sorted within
    /// each block; block order is kept.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        let mut blocks = blocks;
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(Error::input(format!("block {b} is empty")));
            }
            block.sort_unstable();
            for &v in block.iter() {
                if v >= n {
                    return Err(Error::input(format!("vertex {v} out of range for {n} vertices")));
                }
                if assignment[v] != usize::MAX {
                    return Err(Error::input(format!("vertex {v} appears in two blocks")));
                }
                assignment[v] = b;
            }
        }
        if let Some(v) = assignment.iter().position(|&b| b == usize::MAX) {
            return Err(Error::input(format!("vertex {v} is not covered by any block")));
        }
        Ok(Clustering { blocks, assignment })
    }

    /// Builds a clustering from block labels, one per vertex.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut ids: Vec<usize> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (v, &l) in labels.iter().enumerate() {
            match ids.iter().position(|&x| x == l) {
                Some(b) => blocks[b].push(v),
                None => {
                    ids.push(l);
                    blocks.push(vec![v]);
                }
            }
        }
        Clustering::from_blocks(labels.len(), blocks).expect("labels always partition")
    }

    pub fn singletons(n: usize) -> Self {
        Clustering::from_blocks(n, (0..n).map(|v| vec![v]).collect()).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn same_block(&self, u: usize, v: usize) -> bool {
        self.assignment[u] == self.assignment[v]
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Label-free form: the set of blocks.
    pub fn canonical(&self) -> BTreeSet<Vec<usize>> {
        self.blocks.iter().cloned().collect()
    }

    pub fn block_names(&self, genes: &[String]) -> Vec<Vec<String>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&v| genes[v].clone()).collect())
            .collect()
    }
}

/// Rounds `x` into a clustering whose blocks never exceed `k + 1` vertices.
pub fn round(x: &FractionalSolution, params: &RoundingParams) -> Result<Clustering> {
    round_matrix(&x.x, params)
}

pub fn round_matrix(x: &SymMatrix, params: &RoundingParams) -> Result<Clustering> {
    params.validate()?;
    let n = x.n();
    let alpha = params.alpha;
    let k = params.k;
    let mut alive = vec![true; n];
    let mut remaining = n;
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    if let PivotRule::Seeded { seed } = params.pivot {
        order.shuffle(&mut seeded_rng(seed, 0x7069766f74));
    }
    let close_set = |u: usize, alive: &[bool]| -> Vec<usize> {
        (0..n)
            .filter(|&w| w != u && alive[w] && x.get(u, w) <= alpha)
            .collect()
    };

    while remaining > 0 {
        let u = match params.pivot {
            PivotRule::LowestIndex => (0..n).find(|&v| alive[v]).expect("survivor"),
            PivotRule::Seeded { .. } => *order.iter().find(|&&v| alive[v]).expect("survivor"),
            PivotRule::LargestNeighbourhood => (0..n)
                .filter(|&v| alive[v])
                .max_by_key(|&v| (close_set(v, &alive).len(), std::cmp::Reverse(v)))
                .expect("survivor"),
        };
        let mut t = close_set(u, &alive);
        let sum: f64 = t.iter().map(|&w| x.get(u, w)).sum();

        if sum >= alpha * t.len() as f64 / 2.0 {
            blocks.push(vec![u]);
            alive[u] = false;
            remaining -= 1;
            continue;
        }

        alive[u] = false;
        remaining -= 1 + t.len();
        for &w in &t {
            alive[w] = false;
        }
        if t.len() <= k {
            let mut block = vec![u];
            block.extend(&t);
            blocks.push(block);
            continue;
        }
        // closest vertices go with the pivot; the rest fill groups of K + 1
        t.sort_by(|&a, &b| x.get(u, a).total_cmp(&x.get(u, b)).then(a.cmp(&b)));
        let mut first = vec![u];
        first.extend(&t[..k]);
        blocks.push(first);
        for chunk in t[k..].chunks(k + 1) {
            blocks.push(chunk.to_vec());
        }
    }
    Clustering::from_blocks(n, blocks)
}

/// `Σ w⁺` over split pairs plus `Σ w⁻` over co-clustered pairs.
pub fn clustering_cost(c: &Clustering, w: &EdgeWeights) -> f64 {
    w.pairs()
        .map(|(u, v)| if c.same_block(u, v) { w.minus(u, v) } else { w.plus(u, v) })
        .sum()
}

/// Sum of the `n - 1 - k` smallest positive weights at `v` (0 when `v` has at
/// most `k` other vertices): the least positive weight `v` must lose to sit
/// in a cluster of size `k + 1`.
pub fn excess_weight(v: usize, w: &EdgeWeights, k: usize) -> f64 {
    let n = w.n();
    let degree = n.saturating_sub(1);
    if degree <= k {
        return 0.0;
    }
    let mut incident: Vec<f64> = (0..n).filter(|&z| z != v).map(|z| w.plus(v, z)).collect();
    incident.sort_by(f64::total_cmp);
    incident[..degree - k].iter().sum()
}

pub fn total_excess_weight(w: &EdgeWeights, k: usize) -> f64 {
    (0..w.n()).map(|v| excess_weight(v, w, k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize) -> RoundingParams {
        RoundingParams::new(k)
    }

    #[test]
    fn far_vertices_become_singletons() {
        let x = SymMatrix::from_fn(5, |_, _| 0.5);
        let c = round_matrix(&x, &params(3)).unwrap();
        assert_eq!(c.blocks().len(), 5);
    }

    #[test]
    fn close_pair_joins_pivot() {
        let mut x = SymMatrix::from_fn(4, |_, _| 1.0);
        x.set(0, 1, 0.0);
        x.set(0, 2, 0.0);
        x.set(1, 2, 0.0);
        let c = round_matrix(&x, &params(5)).unwrap();
        assert_eq!(c.blocks(), &[vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn oversized_close_set_is_split() {
        // pivot 0 with |T| = 7 and K = 3 -> {0} ∪ T'0 (4) and T1 (4)
        let x = SymMatrix::from_fn(8, |u, v| if u == 0 { 0.01 * v as f64 } else { 0.0 });
        let c = round_matrix(&x, &params(3)).unwrap();
        assert_eq!(c.blocks(), &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);

        // |T| = 9, K = 3 -> 4, 4, 2
        let x = SymMatrix::from_fn(10, |_, _| 0.0);
        let c = round_matrix(&x, &params(3)).unwrap();
        let sizes: Vec<usize> = c.blocks().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 4, 2]);
    }

    #[test]
    fn split_prefers_closest_then_lowest_index() {
        let x = SymMatrix::from_fn(6, |u, v| match (u, v) {
            (0, 5) => 0.0,
            (0, 1) => 0.1,
            (0, _) => 0.05,
            _ => 0.1,
        });
        let c = round_matrix(&x, &params(2)).unwrap();
        assert_eq!(c.blocks()[0], vec![0, 2, 5]);
        assert!(c.max_block_size() <= 3);
    }

    #[test]
    fn alpha_and_k_are_checked() {
        let x = SymMatrix::zeros(3);
        let mut p = params(2);
        p.alpha = 0.5;
        assert!(round_matrix(&x, &p).is_err());
        assert!(round_matrix(&x, &params(0)).is_err());
    }

    #[test]
    fn seeded_and_neighbourhood_pivots_are_valid() {
        let x = SymMatrix::from_fn(9, |u, v| if u / 3 == v / 3 { 0.0 } else { 1.0 });
        for pivot in [PivotRule::LargestNeighbourhood, PivotRule::Seeded { seed: 4 }] {
            let p = RoundingParams { pivot, ..params(2) };
            let c = round_matrix(&x, &p).unwrap();
            assert_eq!(c.canonical(), Clustering::from_labels(&[0, 0, 0, 1, 1, 1, 2, 2, 2]).canonical());
        }
        assert_eq!("seeded:7".parse::<PivotRule>().unwrap(), PivotRule::Seeded { seed: 7 });
    }

    #[test]
    fn cost_examples() {
        let plus = SymMatrix::from_fn(4, |u, v| 0.1 * (u + v) as f64);
        let minus = SymMatrix::from_fn(4, |u, v| 0.05 * (u * v) as f64 + 0.5);
        let w = EdgeWeights::anonymous(plus, minus).unwrap();
        let sum_plus: f64 = w.pairs().map(|(u, v)| w.plus(u, v)).sum();
        let sum_minus: f64 = w.pairs().map(|(u, v)| w.minus(u, v)).sum();
        assert!((clustering_cost(&Clustering::singletons(4), &w) - sum_plus).abs() < 1e-12);
        let one = Clustering::from_labels(&[0, 0, 0, 0]);
        assert!((clustering_cost(&one, &w) - sum_minus).abs() < 1e-12);
        // {0,1} {2,3}: minus(0,1)+minus(2,3) + plus(0,2)+plus(0,3)+plus(1,2)+plus(1,3)
        let two = Clustering::from_labels(&[0, 0, 1, 1]);
        let hand = 0.5 + (0.3 + 0.5) + (0.2 + 0.3 + 0.3 + 0.4);
        assert!((clustering_cost(&two, &w) - hand).abs() < 1e-12);
    }

    #[test]
    fn excess_weight_examples() {
        // vertex 0 with incident weights 0.1, 0.5, 0.9 and K = 1
        let plus = SymMatrix::from_fn(4, |u, v| match (u.min(v), u.max(v)) {
            (0, 1) => 0.1,
            (0, 2) => 0.5,
            (0, 3) => 0.9,
            _ => 1.0,
        });
        let w = EdgeWeights::anonymous(plus, SymMatrix::zeros(4)).unwrap();
        assert!((excess_weight(0, &w, 1) - 0.6).abs() < 1e-15);
        assert_eq!(excess_weight(0, &w, 3), 0.0);
        assert!((excess_weight(1, &w, 1) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn clustering_validation() {
        assert!(Clustering::from_blocks(3, vec![vec![0, 1]]).is_err());
        assert!(Clustering::from_blocks(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Clustering::from_blocks(2, vec![vec![0, 1], vec![]]).is_err());
        assert!(Clustering::from_blocks(2, vec![vec![0, 5]]).is_err());
    }
}
