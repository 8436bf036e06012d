//! Cluster scoring: pairwise Fisher exclusivity, patient coverage, network
//! proximity and driver enrichment, with permutation baselines.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{InteractionNetwork, MutationMatrix};
use crate::rounding::Clustering;
use crate::stats::{fmt_sig9, median, seeded_rng};

/// 2×2 co-mutation table for a gene pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    /// Both mutated.
    pub a: u64,
    /// Only the first gene mutated.
    pub b: u64,
    /// Only the second gene mutated.
    pub c: u64,
    /// Neither mutated.
    pub d: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable { a, b, c, d }
    }

    pub fn from_genes(m: &MutationMatrix, u: usize, v: usize) -> Self {
        let (su, sv) = (m.patients(u), m.patients(v));
        let both = su.iter().filter(|s| sv.binary_search(s).is_ok()).count() as u64;
        let b = su.len() as u64 - both;
        let c = sv.len() as u64 - both;
        let d = m.n_samples() as u64 - both - b - c;
        ContingencyTable { a: both, b, c, d }
    }

    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// Feasible range of the co-mutation cell with both margins fixed.
    fn support(&self) -> (u64, u64) {
        let row = self.a + self.b;
        let col = self.a + self.c;
        let lo = (row + col).saturating_sub(self.n());
        (lo, row.min(col))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// `P(A <= a)`: depletion of co-mutation, i.e. exclusivity.
    #[default]
    Left,
    /// `P(A >= a)`: co-occurrence.
    Right,
    /// Sum of all tables no more probable than the observed one.
    TwoSided,
}

impl std::str::FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Tail::Left),
            "right" => Ok(Tail::Right),
            "two-sided" => Ok(Tail::TwoSided),
            other => Err(Error::input(format!("unknown tail '{other}' (left, right, two-sided)"))),
        }
    }
}

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

struct Hypergeometric {
    lf: Vec<f64>,
    row: u64,
    rest: u64,
    col: u64,
    n: u64,
}

impl Hypergeometric {
    fn new(t: &ContingencyTable) -> Self {
        let n = t.n();
        Hypergeometric {
            lf: ln_factorials(n),
            row: t.a + t.b,
            rest: t.c + t.d,
            col: t.a + t.c,
            n,
        }
    }

    fn ln_choose(&self, n: u64, k: u64) -> f64 {
        self.lf[n as usize] - self.lf[k as usize] - self.lf[(n - k) as usize]
    }

    /// `C(row, a) C(rest, col - a) / C(n, col)`.
    fn pmf(&self, a: u64) -> f64 {
        (self.ln_choose(self.row, a) + self.ln_choose(self.rest, self.col - a) - self.ln_choose(self.n, self.col)).exp()
    }
}

/// Hypergeometric probability of the observed table given its margins.
pub fn fisher_point(t: &ContingencyTable) -> f64 {
    Hypergeometric::new(t).pmf(t.a)
}

/// Fisher exact p-value in the requested direction.
pub fn fisher_p(t: &ContingencyTable, tail: Tail) -> f64 {
    let h = Hypergeometric::new(t);
    let (lo, hi) = t.support();
    let p: f64 = match tail {
        Tail::Left => (lo..=t.a).map(|a| h.pmf(a)).sum(),
        Tail::Right => (t.a..=hi).map(|a| h.pmf(a)).sum(),
        Tail::TwoSided => {
            let observed = h.pmf(t.a) * (1.0 + 1e-7);
            (lo..=hi).map(|a| h.pmf(a)).filter(|&p| p <= observed).sum()
        }
    };
    p.min(1.0)
}

/// One-sided left-tail Fisher p-value: small when the genes are rarely
/// mutated together.
pub fn fisher_exclusivity_p(t: &ContingencyTable) -> f64 {
    fisher_p(t, Tail::Left)
}

/// Median pairwise Fisher p-value of a block; `None` for fewer than two genes.
pub fn cluster_exclusivity(block: &[usize], m: &MutationMatrix, tail: Tail) -> Option<f64> {
    let mut ps = Vec::new();
    for (i, &u) in block.iter().enumerate() {
        for &v in &block[i + 1..] {
            ps.push(fisher_p(&ContingencyTable::from_genes(m, u, v), tail));
        }
    }
    median(&ps)
}

/// Fraction of samples with at least one mutation among the block's genes.
pub fn cluster_coverage(block: &[usize], m: &MutationMatrix) -> f64 {
    if m.n_samples() == 0 {
        return 0.0;
    }
    let mut hit = vec![false; m.n_samples()];
    for &g in block {
        for &s in m.patients(g) {
            hit[s] = true;
        }
    }
    hit.iter().filter(|&&h| h).count() as f64 / m.n_samples() as f64
}

/// Unit-weight Dijkstra from `source`; `None` marks unreachable nodes.
pub fn shortest_paths(net: &InteractionNetwork, source: usize) -> Vec<Option<u32>> {
    let mut dist: Vec<Option<u32>> = vec![None; net.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(0);
    heap.push(Reverse((0u32, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v].is_some_and(|best| d > best) {
            continue;
        }
        for &w in net.neighbors(v) {
            let nd = d + 1;
            if dist[w].is_none_or(|cur| nd < cur) {
                dist[w] = Some(nd);
                heap.push(Reverse((nd, w)));
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceSummary {
    /// Mean hop distance over connected pairs.
    pub mean: Option<f64>,
    pub pairs: usize,
    /// Pairs with no path or with a gene missing from the network.
    pub excluded: usize,
}

/// Mean shortest-path distance over all unordered pairs of `genes`.
pub fn pairwise_distances<S: AsRef<str>>(genes: &[S], net: &InteractionNetwork) -> DistanceSummary {
    let idx: Vec<Option<usize>> = genes.iter().map(|g| net.position(g.as_ref())).collect();
    let mut total = 0u64;
    let mut pairs = 0usize;
    let mut excluded = 0usize;
    for (i, &src) in idx.iter().enumerate() {
        let dist = src.map(|s| shortest_paths(net, s));
        for &dst in &idx[i + 1..] {
            match (&dist, dst) {
                (Some(d), Some(t)) => match d[t] {
                    Some(h) => {
                        total += u64::from(h);
                        pairs += 1;
                    }
                    None => excluded += 1,
                },
                _ => excluded += 1,
            }
        }
    }
    DistanceSummary {
        mean: (pairs > 0).then(|| total as f64 / pairs as f64),
        pairs,
        excluded,
    }
}

/// Share of driver genes among the union of `blocks`; 0 for an empty union.
pub fn driver_proportion<S: AsRef<str>>(blocks: &[Vec<S>], drivers: &HashSet<String>) -> f64 {
    let genes: HashSet<&str> = blocks.iter().flatten().map(AsRef::as_ref).collect();
    if genes.is_empty() {
        return 0.0;
    }
    genes.iter().filter(|g| drivers.contains(**g)).count() as f64 / genes.len() as f64
}

/// Ids of up to `count` clusters with the smallest median exclusivity p,
/// ties by id. Clusters without a p-value are ineligible.
pub fn most_exclusive(medians: &[Option<f64>], count: usize) -> Vec<usize> {
    let mut ids: Vec<(f64, usize)> = medians
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|p| (p, i)))
        .collect();
    ids.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    ids.into_iter().take(count).map(|(_, i)| i).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// Mean over blocks of the median pairwise p (lower is better).
    Exclusivity,
    /// Mean block coverage (higher is better).
    Coverage,
    /// Mean over blocks of the mean network distance (lower is better).
    Distance,
    /// Driver share of the pooled genes (higher is better).
    DriverProportion,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::Exclusivity,
        Statistic::Coverage,
        Statistic::Distance,
        Statistic::DriverProportion,
    ];

    fn lower_is_better(self) -> bool {
        matches!(self, Statistic::Exclusivity | Statistic::Distance)
    }
}

/// Inputs shared by every statistic.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub mutations: &'a MutationMatrix,
    pub network: Option<&'a InteractionNetwork>,
    pub drivers: Option<&'a HashSet<String>>,
    pub tail: Tail,
}

impl EvalContext<'_> {
    fn names(&self, block: &[usize]) -> Vec<&str> {
        block.iter().map(|&g| self.mutations.genes().name(g)).collect()
    }

    /// Value of `stat` over a set of blocks, or `None` if undefined for all
    /// of them (or the needed input is missing).
    pub fn statistic(&self, stat: Statistic, blocks: &[Vec<usize>]) -> Option<f64> {
        let mean = |vals: Vec<f64>| (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
        match stat {
            Statistic::Exclusivity => mean(
                blocks
                    .iter()
                    .filter_map(|b| cluster_exclusivity(b, self.mutations, self.tail))
                    .collect(),
            ),
            Statistic::Coverage => mean(blocks.iter().map(|b| cluster_coverage(b, self.mutations)).collect()),
            Statistic::Distance => {
                let net = self.network?;
                mean(
                    blocks
                        .iter()
                        .filter_map(|b| pairwise_distances(&self.names(b), net).mean)
                        .collect(),
                )
            }
            Statistic::DriverProportion => {
                let drivers = self.drivers?;
                let named: Vec<Vec<&str>> = blocks.iter().map(|b| self.names(b)).collect();
                (!named.iter().all(Vec::is_empty)).then(|| driver_proportion(&named, drivers))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baseline {
    pub statistic: Statistic,
    pub observed: f64,
    pub mean: f64,
    pub p_value: f64,
    pub trials: usize,
}

/// Compares `stat` on `blocks` with `trials` random disjoint gene sets of the
/// same sizes drawn from all genes of the mutation matrix. The p-value is
/// `(r + 1) / (trials + 1)` with `r` the number of random draws at least as
/// good as the observed value.
pub fn permutation_baseline(
    ctx: &EvalContext,
    blocks: &[Vec<usize>],
    stat: Statistic,
    trials: usize,
    seed: u64,
) -> Result<Option<Baseline>> {
    if trials == 0 {
        return Err(Error::input("permutation baseline needs at least one trial"));
    }
    let needed: usize = blocks.iter().map(Vec::len).sum();
    let universe = ctx.mutations.n_genes();
    if needed > universe {
        return Err(Error::input(format!(
            "blocks hold {needed} genes but only {universe} are available"
        )));
    }
    let Some(observed) = ctx.statistic(stat, blocks) else {
        return Ok(None);
    };
    let mut rng = seeded_rng(seed, 0x7065726d ^ stat as u64);
    let mut genes: Vec<usize> = (0..universe).collect();
    let mut sum = 0.0;
    let mut counted = 0usize;
    let mut as_good = 0usize;
    for _ in 0..trials {
        genes.shuffle(&mut rng);
        let mut offset = 0;
        let random: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| {
                let s = genes[offset..offset + b.len()].to_vec();
                offset += b.len();
                s
            })
            .collect();
        // undefined draws count against the observed value
        let Some(value) = ctx.statistic(stat, &random) else {
            continue;
        };
        sum += value;
        counted += 1;
        let good = if stat.lower_is_better() { value <= observed } else { value >= observed };
        if good {
            as_good += 1;
        }
    }
    Ok(Some(Baseline {
        statistic: stat,
        observed,
        mean: if counted > 0 { sum / counted as f64 } else { f64::NAN },
        p_value: (as_good + 1) as f64 / (trials + 1) as f64,
        trials,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStats {
    pub id: usize,
    pub genes: Vec<String>,
    pub median_exclusivity_p: Option<f64>,
    pub coverage: f64,
    pub mean_pairwise_distance: Option<f64>,
    pub distance_pairs: Option<usize>,
    pub excluded_pairs: Option<usize>,
    pub driver_proportion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub clusters: Vec<ClusterStats>,
    pub top_by_exclusivity: Vec<usize>,
    pub top_driver_proportion: Option<f64>,
    pub permutation_baselines: Vec<Baseline>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalOptions {
    pub top: usize,
    /// 0 disables permutation baselines.
    pub trials: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            top: 10,
            trials: 1000,
            seed: 0,
        }
    }
}

/// Scores every block of `clustering` (indices into `ctx.mutations` genes).
pub fn evaluate(clustering: &Clustering, ctx: &EvalContext, opts: &EvalOptions) -> Result<ClusterReport> {
    if clustering.n() != ctx.mutations.n_genes() {
        return Err(Error::input(format!(
            "clustering covers {} genes but the mutation matrix has {}",
            clustering.n(),
            ctx.mutations.n_genes()
        )));
    }
    let clusters: Vec<ClusterStats> = clustering
        .blocks()
        .iter()
        .enumerate()
        .map(|(id, block)| {
            let names: Vec<String> = ctx.names(block).into_iter().map(String::from).collect();
            let dist = ctx.network.map(|net| pairwise_distances(&names, net));
            ClusterStats {
                id,
                median_exclusivity_p: cluster_exclusivity(block, ctx.mutations, ctx.tail),
                coverage: cluster_coverage(block, ctx.mutations),
                mean_pairwise_distance: dist.and_then(|d| d.mean),
                distance_pairs: dist.map(|d| d.pairs),
                excluded_pairs: dist.map(|d| d.excluded),
                driver_proportion: ctx.drivers.map(|d| driver_proportion(std::slice::from_ref(&names), d)),
                genes: names,
            }
        })
        .collect();
    let medians: Vec<Option<f64>> = clusters.iter().map(|c| c.median_exclusivity_p).collect();
    let top = most_exclusive(&medians, opts.top);
    let top_blocks: Vec<Vec<usize>> = top.iter().map(|&i| clustering.blocks()[i].clone()).collect();
    let top_driver_proportion = ctx.drivers.and_then(|_| ctx.statistic(Statistic::DriverProportion, &top_blocks));

    let mut permutation_baselines = Vec::new();
    if opts.trials > 0 && !top_blocks.is_empty() {
        for stat in Statistic::ALL {
            if let Some(b) = permutation_baseline(ctx, &top_blocks, stat, opts.trials, opts.seed)? {
                permutation_baselines.push(b);
            }
        }
    }
    Ok(ClusterReport {
        clusters,
        top_by_exclusivity: top,
        top_driver_proportion,
        permutation_baselines,
    })
}

impl ClusterReport {
    /// One row per cluster; empty cells for undefined statistics.
    pub fn to_tsv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_default();
        let mut out = String::from(
            "cluster\tsize\tmedian_exclusivity_p\tcoverage\tmean_pairwise_distance\texcluded_pairs\tdriver_proportion\tgenes\n",
        );
        for c in &self.clusters {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.id,
                c.genes.len(),
                opt(c.median_exclusivity_p),
                fmt_sig9(c.coverage),
                opt(c.mean_pairwise_distance),
                c.excluded_pairs.map(|e| e.to_string()).unwrap_or_default(),
                opt(c.driver_proportion),
                c.genes.join(",")
            );
        }
        out
    }
}
