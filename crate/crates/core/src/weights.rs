//! Positive and negative clustering weights.
//!
//! `w⁻` measures co-occurrence of mutations (high when two genes are rarely
//! mutually exclusive); `w⁺` is a convex combination of capped coverage,
//! network and expression affinities. A final pairwise rescaling enforces
//! `w⁺ + w⁻ >= 1`, which together with `w⁺ <= 1` is what the rounding
//! guarantee needs.

use std::fmt::Write as _;
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ExpressionMatrix, InteractionNetwork, MutationMatrix};
use crate::matrix::SymMatrix;
use crate::stats::{fmt_sig9, nearest_rank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Exclusivity + coverage.
    #[serde(rename = "ME-CO")]
    MeCo,
    /// Adds network affinity.
    #[serde(rename = "NI-ME-CO")]
    NiMeCo,
    /// Adds expression affinity.
    #[serde(rename = "EX-ME-CO")]
    ExMeCo,
    /// Coverage, network and expression together.
    #[serde(rename = "FULL")]
    Full,
}

impl Scheme {
    pub fn uses_network(self) -> bool {
        matches!(self, Scheme::NiMeCo | Scheme::Full)
    }

    pub fn uses_expression(self) -> bool {
        matches!(self, Scheme::ExMeCo | Scheme::Full)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::MeCo => "ME-CO",
            Scheme::NiMeCo => "NI-ME-CO",
            Scheme::ExMeCo => "EX-ME-CO",
            Scheme::Full => "FULL",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "-").as_str() {
            "ME-CO" | "MECO" => Ok(Scheme::MeCo),
            "NI-ME-CO" | "NIMECO" => Ok(Scheme::NiMeCo),
            "EX-ME-CO" | "EXMECO" => Ok(Scheme::ExMeCo),
            "FULL" | "NI-EX-ME-CO" => Ok(Scheme::Full),
            _ => Err(Error::input(format!(
                "unknown scheme '{s}' (expected ME-CO, NI-ME-CO, EX-ME-CO or FULL)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Weight construction parameters.
///
/// The three shares always refer to the same component: `w1` coverage, `w2`
/// network, `w3` expression. Shares of components the scheme does not use
/// must be zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub scheme: Scheme,
    /// Exclusivity scale.
    pub a: f64,
    /// Coverage percentile.
    pub j: f64,
    /// Network-affinity percentile.
    pub j_network: f64,
    /// Expression-affinity percentile.
    pub j_expression: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            scheme: Scheme::MeCo,
            a: 1.0,
            j: 95.0,
            j_network: 95.0,
            j_expression: 95.0,
            w1: 1.0,
            w2: 0.0,
            w3: 0.0,
        }
    }
}

impl WeightConfig {
    pub fn me_co(a: f64) -> Self {
        WeightConfig {
            a,
            ..Default::default()
        }
    }

    /// Checks ranges and rescales the shares to sum to one.
    pub fn validated(mut self) -> Result<Self> {
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::input(format!("a must be a finite value >= 0, got {}", self.a)));
        }
        for (name, p) in [("J", self.j), ("J'", self.j_network), ("J''", self.j_expression)] {
            if !(p > 0.0 && p <= 100.0) {
                return Err(Error::input(format!("{name} must lie in (0, 100], got {p}")));
            }
        }
        for (name, w) in [("w1", self.w1), ("w2", self.w2), ("w3", self.w3)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::input(format!("{name} must be a finite value >= 0, got {w}")));
            }
        }
        if !self.scheme.uses_network() && self.w2 != 0.0 {
            return Err(Error::input(format!("w2 (network) must be 0 for scheme {}", self.scheme)));
        }
        if !self.scheme.uses_expression() && self.w3 != 0.0 {
            return Err(Error::input(format!("w3 (expression) must be 0 for scheme {}", self.scheme)));
        }
        let sum = self.w1 + self.w2 + self.w3;
        if sum <= 0.0 {
            return Err(Error::input("w1 + w2 + w3 must be positive"));
        }
        if (sum - 1.0).abs() > 1e-12 {
            warn!(
                "shares w1={}, w2={}, w3={} sum to {sum}; rescaling to sum 1",
                self.w1, self.w2, self.w3
            );
            self.w1 /= sum;
            self.w2 /= sum;
            self.w3 /= sum;
        }
        Ok(self)
    }
}

/// Symmetric per-pair `(w⁺, w⁻)` over a gene list.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    genes: Vec<String>,
    plus: SymMatrix,
    minus: SymMatrix,
}

impl EdgeWeights {
    pub fn new(genes: Vec<String>, plus: SymMatrix, minus: SymMatrix) -> Result<Self> {
        if plus.n() != genes.len() || minus.n() != genes.len() {
            return Err(Error::input("weight matrices do not match the gene list"));
        }
        for (u, v) in plus.pairs() {
            let (p, m) = (plus.get(u, v), minus.get(u, v));
            if !p.is_finite() || !m.is_finite() || p < 0.0 || m < 0.0 {
                return Err(Error::input(format!(
                    "weights for ({}, {}) must be finite and nonnegative",
                    genes[u], genes[v]
                )));
            }
        }
        Ok(EdgeWeights { genes, plus, minus })
    }

    /// Gene names `v0, v1, ...`; used for synthetic instances.
    pub fn anonymous(plus: SymMatrix, minus: SymMatrix) -> Result<Self> {
        let genes = (0..plus.n()).map(|i| format!("v{i}")).collect();
        Self::new(genes, plus, minus)
    }

    pub fn n(&self) -> usize {
        self.genes.len()
    }

    pub fn genes(&self) -> &[String] {
        &self.genes
    }

    #[inline]
    pub fn plus(&self, u: usize, v: usize) -> f64 {
        self.plus.get(u, v)
    }

    #[inline]
    pub fn minus(&self, u: usize, v: usize) -> f64 {
        self.minus.get(u, v)
    }

    pub fn plus_matrix(&self) -> &SymMatrix {
        &self.plus
    }

    pub fn minus_matrix(&self) -> &SymMatrix {
        &self.minus
    }

    pub fn set(&mut self, u: usize, v: usize, plus: f64, minus: f64) {
        self.plus.set(u, v, plus);
        self.minus.set(u, v, minus);
    }

    /// Exchanges `w⁺` and `w⁻` on one pair.
    pub fn swap_pair(&mut self, u: usize, v: usize) {
        let (p, m) = (self.plus(u, v), self.minus(u, v));
        self.set(u, v, m, p);
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.plus.pairs()
    }

    /// Largest violation of `w⁺ <= 1`, `w⁺ + w⁻ >= 1` over all pairs
    /// (0 when both hold everywhere).
    pub fn constraint_violation(&self) -> f64 {
        self.pairs()
            .map(|(u, v)| {
                let (p, m) = (self.plus(u, v), self.minus(u, v));
                (p - 1.0).max(1.0 - (p + m)).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("gene_u\tgene_v\tw_plus\tw_minus\n");
        for (u, v) in self.pairs() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                self.genes[u],
                self.genes[v],
                fmt_sig9(self.plus(u, v)),
                fmt_sig9(self.minus(u, v))
            );
        }
        out
    }

    /// Reads the pair-table format written by [`EdgeWeights::to_tsv`].
    /// Gene order is first appearance; every pair must be listed once.
    pub fn from_tsv(text: &str, source: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.split_whitespace().collect::<Vec<_>>() == ["gene_u", "gene_v", "w_plus", "w_minus"] => {}
            Some((i, _)) => return Err(Error::parse(source, i + 1, "expected header 'gene_u gene_v w_plus w_minus'")),
            None => return Err(Error::parse(source, 1, "file is empty")),
        }
        let mut genes: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            if f.len() != 4 {
                return Err(Error::parse(source, i + 1, format!("expected 4 fields, found {}", f.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(source, i + 1, format!("invalid number '{s}'")))
            };
            if f[0] == f[1] {
                return Err(Error::parse(source, i + 1, "pair with identical genes"));
            }
            for g in &f[..2] {
                if !genes.iter().any(|x| x == g) {
                    genes.push(g.to_string());
                }
            }
            rows.push((f[0].to_string(), f[1].to_string(), num(f[2])?, num(f[3])?, i + 1));
        }
        let n = genes.len();
        let pos = |g: &str| genes.iter().position(|x| x == g).expect("registered");
        let mut plus = SymMatrix::zeros(n);
        let mut minus = SymMatrix::zeros(n);
        let mut seen = SymMatrix::zeros(n);
        for (a, b, p, m, line) in rows {
            let (u, v) = (pos(&a), pos(&b));
            if seen.get(u, v) != 0.0 {
                return Err(Error::parse(source, line, format!("pair ({a}, {b}) listed twice")));
            }
            seen.set(u, v, 1.0);
            plus.set(u, v, p);
            minus.set(u, v, m);
        }
        if let Some((u, v)) = seen.pairs().find(|&(u, v)| seen.get(u, v) == 0.0) {
            return Err(Error::input(format!(
                "{source}: pair ({}, {}) is missing",
                genes[u], genes[v]
            )));
        }
        EdgeWeights::new(genes, plus, minus)
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_tsv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text, &path.display().to_string())
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `a · |S(u) ∩ S(v)| / min(|S(u)|, |S(v)|)` over sorted patient sets.
/// Returns 0 when either set is empty.
pub fn exclusivity_weight(su: &[usize], sv: &[usize], a: f64) -> f64 {
    let denom = su.len().min(sv.len());
    if denom == 0 {
        return 0.0;
    }
    a * intersection_size(su, sv) as f64 / denom as f64
}

/// Size of the symmetric difference of two sorted patient sets.
pub fn coverage_raw(su: &[usize], sv: &[usize]) -> usize {
    su.len() + sv.len() - 2 * intersection_size(su, sv)
}

/// Linear scaling by a percentile threshold, capped at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercentileCap {
    pub threshold: f64,
}

impl PercentileCap {
    pub fn from_values(values: &[f64], percentile: f64) -> Result<Self> {
        let threshold = nearest_rank(values, percentile).ok_or_else(|| {
            Error::input(format!(
                "cannot take the {percentile} percentile of {} values",
                values.len()
            ))
        })?;
        Ok(PercentileCap { threshold })
    }

    /// 1 above the threshold, `x / T` otherwise; a zero threshold degrades to
    /// the indicator of `x > 0`.
    pub fn apply(&self, x: f64) -> f64 {
        if x > self.threshold {
            1.0
        } else if self.threshold > 0.0 {
            (x / self.threshold).clamp(0.0, 1.0)
        } else if x > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

pub fn percentile_cap(values: &[f64], percentile: f64, x: f64) -> Result<f64> {
    Ok(PercentileCap::from_values(values, percentile)?.apply(x))
}

/// Jaccard index of the closed neighbourhoods of two network nodes.
pub fn network_affinity(net: &InteractionNetwork, u: usize, v: usize) -> f64 {
    if u == v {
        return 1.0;
    }
    let closed = |x: usize| {
        let mut c = net.neighbors(x).to_vec();
        if let Err(p) = c.binary_search(&x) {
            c.insert(p, x);
        }
        c
    };
    let (nu, nv) = (closed(u), closed(v));
    let inter = intersection_size(&nu, &nv);
    inter as f64 / (nu.len() + nv.len() - inter) as f64
}

/// Network affinity by gene name; genes outside the network are isolated, so
/// two distinct genes with either one missing have affinity 0.
pub fn network_affinity_by_name(net: &InteractionNetwork, u: &str, v: &str) -> f64 {
    if u == v {
        return 1.0;
    }
    match (net.position(u), net.position(v)) {
        (Some(a), Some(b)) => network_affinity(net, a, b),
        _ => 0.0,
    }
}

/// `|⟨z(u), z(v)⟩| / (‖z(u)‖ ‖z(v)‖)`; 0 when either gene is absent.
pub fn expression_affinity(z: &ExpressionMatrix, u: &str, v: &str) -> f64 {
    match (z.vector(u), z.vector(v)) {
        (Some(a), Some(b)) => cosine_abs(a, b),
        _ => 0.0,
    }
}

fn cosine_abs(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot.abs() / (na * nb)).min(1.0)
}

/// Rescales a pair so that `w⁺ + w⁻ >= 1`. Pairs already satisfying it are
/// returned unchanged; an all-zero pair maps to `(1, 0)`.
pub fn normalize_pair(plus: f64, minus: f64) -> (f64, f64) {
    let sum = plus + minus;
    if sum >= 1.0 {
        return (plus, minus);
    }
    if sum <= 0.0 {
        return (1.0, 0.0);
    }
    let m = minus / sum;
    (1.0 - m, m)
}

/// Builds the clustering weights for the genes of `m`.
///
/// `w⁻` is the exclusivity weight of every pair; `w⁺` combines the capped
/// coverage, network and expression components with the configured shares.
/// Network and expression data are looked up by gene name.
pub fn build_weights(
    m: &MutationMatrix,
    net: Option<&InteractionNetwork>,
    z: Option<&ExpressionMatrix>,
    cfg: &WeightConfig,
) -> Result<EdgeWeights> {
    let cfg = cfg.clone().validated()?;
    let n = m.n_genes();
    if n < 2 {
        return Err(Error::input("at least two genes are required to build weights"));
    }
    let net = match (cfg.scheme.uses_network(), net) {
        (true, None) => {
            return Err(Error::input(format!("scheme {} requires an interaction network", cfg.scheme)))
        }
        (true, Some(net)) => Some(net),
        (false, _) => None,
    };
    let z = match (cfg.scheme.uses_expression(), z) {
        (true, None) => {
            return Err(Error::input(format!("scheme {} requires expression data", cfg.scheme)))
        }
        (true, Some(z)) => Some(z),
        (false, _) => None,
    };
    let names = m.genes().names();

    let coverage = SymMatrix::from_fn(n, |u, v| coverage_raw(m.patients(u), m.patients(v)) as f64);
    let coverage_cap = PercentileCap::from_values(&coverage.upper_values(), cfg.j)?;

    let network = net.map(|net| {
        let idx: Vec<Option<usize>> = names.iter().map(|g| net.position(g)).collect();
        SymMatrix::from_fn(n, |u, v| match (idx[u], idx[v]) {
            (Some(a), Some(b)) => network_affinity(net, a, b),
            _ => 0.0,
        })
    });
    let network_cap = match &network {
        Some(f) => Some(PercentileCap::from_values(&f.upper_values(), cfg.j_network)?),
        None => None,
    };

    let expression = z.map(|z| {
        let vecs: Vec<Option<&[f64]>> = names.iter().map(|g| z.vector(g)).collect();
        SymMatrix::from_fn(n, |u, v| match (vecs[u], vecs[v]) {
            (Some(a), Some(b)) => cosine_abs(a, b),
            _ => 0.0,
        })
    });
    let expression_cap = match &expression {
        Some(g) => Some(PercentileCap::from_values(&g.upper_values(), cfg.j_expression)?),
        None => None,
    };

    let mut plus = SymMatrix::zeros(n);
    let mut minus = SymMatrix::zeros(n);
    let mut rescaled = 0usize;
    let mut degenerate = 0usize;
    for u in 0..n {
        for v in (u + 1)..n {
            let mut p = cfg.w1 * coverage_cap.apply(coverage.get(u, v));
            if let (Some(f), Some(cap)) = (&network, &network_cap) {
                p += cfg.w2 * cap.apply(f.get(u, v));
            }
            if let (Some(g), Some(cap)) = (&expression, &expression_cap) {
                p += cfg.w3 * cap.apply(g.get(u, v));
            }
            let p = p.min(1.0);
            let mm = exclusivity_weight(m.patients(u), m.patients(v), cfg.a);
            if p + mm < 1.0 {
                rescaled += 1;
                if p + mm <= 0.0 {
                    degenerate += 1;
                    warn!("pair ({}, {}) has zero weights; set to (1, 0)", names[u], names[v]);
                }
            }
            let (p, mm) = normalize_pair(p, mm);
            plus.set(u, v, p);
            minus.set(u, v, mm);
        }
    }
    info!(
        "weights: scheme {}, {n} genes, T={} rescaled {rescaled} pairs ({degenerate} degenerate)",
        cfg.scheme, coverage_cap.threshold
    );
    EdgeWeights::new(names.to_vec(), plus, minus)
}
