//! Synthetic instances with known structure.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::matrix::{pair_count, SymMatrix};
use crate::rounding::Clustering;
use crate::stats::seeded_rng;
use crate::weights::EdgeWeights;

const FLIP_STREAM: u64 = 1;
const RANDOM_STREAM: u64 = 2;

/// Block sizes used for the 35-vertex planted experiments.
pub const PLANTED_SIZES: [usize; 6] = [6, 6, 6, 6, 6, 5];

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub weights: EdgeWeights,
    pub truth: Clustering,
    pub gamma: f64,
    pub flips: Vec<(usize, usize)>,
    pub seed: u64,
}

/// Planted clusters: `w⁺ = γ` inside a block and `1 - γ` across, `w⁻ = 1 - w⁺`,
/// then `n_flips` distinct pairs (seeded) get their two weights exchanged.
pub fn make_planted(sizes: &[usize], gamma: f64, n_flips: usize, seed: u64) -> Result<PlantedInstance> {
    if !(gamma > 0.5 && gamma < 1.0) {
        return Err(Error::input(format!("gamma must lie in (1/2, 1), got {gamma}")));
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::input("block sizes must be positive"));
    }
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let n = labels.len();
    if n < 2 {
        return Err(Error::input("planted instance needs at least two vertices"));
    }
    let pairs = pair_count(n);
    if n_flips > pairs {
        return Err(Error::input(format!("{n_flips} flips requested but only {pairs} pairs exist")));
    }
    let plus = SymMatrix::from_fn(n, |u, v| if labels[u] == labels[v] { gamma } else { 1.0 - gamma });
    let minus = SymMatrix::from_fn(n, |u, v| 1.0 - plus.get(u, v));
    let mut weights = EdgeWeights::anonymous(plus, minus)?;

    let all: Vec<(usize, usize)> = weights.pairs().collect();
    let mut rng = seeded_rng(seed, FLIP_STREAM);
    let mut picked: Vec<usize> = sample(&mut rng, pairs, n_flips).into_vec();
    picked.sort_unstable();
    let flips: Vec<(usize, usize)> = picked.into_iter().map(|i| all[i]).collect();
    for &(u, v) in &flips {
        weights.swap_pair(u, v);
    }
    Ok(PlantedInstance {
        weights,
        truth: Clustering::from_labels(&labels),
        gamma,
        flips,
        seed,
    })
}

/// One outcome of the discrete `w⁺` distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub probability: f64,
    pub value: f64,
}

/// Parses `value:probability` items separated by commas.
pub fn parse_levels(text: &str) -> Result<Vec<Level>> {
    text.split(',')
        .map(|item| {
            let (v, p) = item
                .split_once(':')
                .ok_or_else(|| Error::input(format!("level '{item}' is not value:probability")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::input(format!("invalid number in level '{item}'")))
            };
            Ok(Level {
                value: parse(v)?,
                probability: parse(p)?,
            })
        })
        .collect()
}

/// `w⁺` i.i.d. per pair from a discrete distribution, `w⁻ = 1 - w⁺`.
pub fn make_random(n: usize, levels: &[Level], seed: u64) -> Result<EdgeWeights> {
    if levels.is_empty() {
        return Err(Error::input("at least one weight level is required"));
    }
    if let Some(l) = levels.iter().find(|l| !(0.0..=1.0).contains(&l.value)) {
        return Err(Error::input(format!("level value {} outside [0, 1]", l.value)));
    }
    let dist = WeightedIndex::new(levels.iter().map(|l| l.probability))
        .map_err(|e| Error::input(format!("invalid level probabilities: {e}")))?;
    let mut rng = seeded_rng(seed, RANDOM_STREAM);
    let mut plus = SymMatrix::zeros(n);
    for u in 0..n {
        for v in (u + 1)..n {
            plus.set(u, v, levels[dist.sample(&mut rng)].value);
        }
    }
    let minus = SymMatrix::from_fn(n, |u, v| 1.0 - plus.get(u, v));
    EdgeWeights::anonymous(plus, minus)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub exact_match: bool,
    /// Fraction of vertices covered by an optimal one-to-one block matching.
    pub overlap: f64,
}

/// Compares two clusterings of the same vertex set.
pub fn compare_clusterings(a: &Clustering, b: &Clustering) -> Result<Comparison> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::input(format!(
            "clusterings cover {} and {} vertices",
            n,
            b.n()
        )));
    }
    if n == 0 {
        return Ok(Comparison {
            exact_match: true,
            overlap: 1.0,
        });
    }
    let exact_match = a.canonical() == b.canonical();
    let (rows, cols) = if a.blocks().len() <= b.blocks().len() { (a, b) } else { (b, a) };
    let mut inter = Matrix::new(rows.blocks().len(), cols.blocks().len(), 0i64);
    for v in 0..n {
        inter[(rows.block_of(v), cols.block_of(v))] += 1;
    }
    let (matched, _) = kuhn_munkres(&inter);
    Ok(Comparison {
        exact_match,
        overlap: matched as f64 / n as f64,
    })
}
