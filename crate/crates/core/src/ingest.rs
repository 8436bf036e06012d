//! Input parsing and preprocessing.
//!
//! Matrix files are tab-separated: the first row holds sample IDs (its first
//! cell is a free-form corner label), every further row starts with a gene
//! name. Alteration and CNV cells are integers; expression cells are decimals
//! or `NA`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::stats::nearest_rank;

/// Ordered list of unique, non-empty identifiers with its inverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

pub type GeneCatalog = Catalog;
pub type SampleCatalog = Catalog;

impl Catalog {
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::input(format!("empty identifier at position {i}")));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate identifier '{name}'")));
            }
        }
        Ok(Catalog { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn subset(&self, keep: &[usize]) -> Catalog {
        let names = keep.iter().map(|&i| self.names[i].clone()).collect();
        Catalog::new(names).expect("subset of a valid catalog")
    }
}

/// Binary alteration calls, genes × samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AlterationMatrix {
    pub genes: GeneCatalog,
    pub samples: SampleCatalog,
    pub entries: Vec<Vec<bool>>,
}

/// Thresholded copy-number deviation from baseline, genes × samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CnvMatrix {
    pub genes: GeneCatalog,
    pub samples: SampleCatalog,
    pub entries: Vec<Vec<i32>>,
}

/// Binary mutation matrix together with the per-gene patient sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationMatrix {
    genes: GeneCatalog,
    samples: SampleCatalog,
    entries: Vec<Vec<bool>>,
    patient_sets: Vec<Vec<usize>>,
}

impl MutationMatrix {
    pub fn new(genes: GeneCatalog, samples: SampleCatalog, entries: Vec<Vec<bool>>) -> Result<Self> {
        check_shape(&genes, &samples, &entries, "mutation matrix")?;
        let patient_sets = entries
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &m)| m).map(|(j, _)| j).collect())
            .collect();
        Ok(MutationMatrix {
            genes,
            samples,
            entries,
            patient_sets,
        })
    }

    pub fn genes(&self) -> &GeneCatalog {
        &self.genes
    }

    pub fn samples(&self) -> &SampleCatalog {
        &self.samples
    }

    pub fn entries(&self) -> &[Vec<bool>] {
        &self.entries
    }

    pub fn n_genes(&self) -> usize {
        self.genes.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    /// Sorted sample indices in which gene `g` is mutated.
    pub fn patients(&self, g: usize) -> &[usize] {
        &self.patient_sets[g]
    }

    pub fn mutation_count(&self, g: usize) -> usize {
        self.patient_sets[g].len()
    }

    /// Restricts the matrix to the named genes, in the given order.
    pub fn select_genes<S: AsRef<str>>(&self, names: &[S]) -> Result<MutationMatrix> {
        let keep = names
            .iter()
            .map(|g| {
                let g = g.as_ref();
                self.genes
                    .position(g)
                    .ok_or_else(|| Error::input(format!("gene '{g}' is not in the mutation data")))
            })
            .collect::<Result<Vec<_>>>()?;
        Catalog::new(names.iter().map(|g| g.as_ref().to_string()).collect())?;
        Ok(self.retain_genes(&keep))
    }

    fn retain_genes(&self, keep: &[usize]) -> MutationMatrix {
        MutationMatrix {
            genes: self.genes.subset(keep),
            samples: self.samples.clone(),
            entries: keep.iter().map(|&g| self.entries[g].clone()).collect(),
            patient_sets: keep.iter().map(|&g| self.patient_sets[g].clone()).collect(),
        }
    }
}

/// Raw expression values as read from disk; `None` marks an `NA` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RawExpression {
    pub genes: GeneCatalog,
    pub samples: SampleCatalog,
    pub values: Vec<Vec<Option<f64>>>,
}

/// Divisor used for the per-gene standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdDivisor {
    /// `n - 1`
    #[default]
    Sample,
    /// `n`
    Population,
}

/// Row-wise z-scores. Rows with `present == false` are all zero and carry no
/// information.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix {
    pub genes: GeneCatalog,
    pub samples: SampleCatalog,
    pub entries: Vec<Vec<f64>>,
    pub present: Vec<bool>,
}

impl ExpressionMatrix {
    /// Z-score vector for a gene, if the gene is known and usable.
    pub fn vector(&self, gene: &str) -> Option<&[f64]> {
        let i = self.genes.position(gene)?;
        self.present[i].then(|| self.entries[i].as_slice())
    }

    pub fn to_raw(&self) -> RawExpression {
        RawExpression {
            genes: self.genes.clone(),
            samples: self.samples.clone(),
            values: self
                .entries
                .iter()
                .zip(&self.present)
                .map(|(row, &p)| {
                    if p {
                        row.iter().map(|&v| Some(v)).collect()
                    } else {
                        vec![None; row.len()]
                    }
                })
                .collect(),
        }
    }
}

/// Undirected simple graph over gene names.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionNetwork {
    genes: GeneCatalog,
    adjacency: Vec<Vec<usize>>,
}

impl InteractionNetwork {
    /// Builds a network from name pairs. Duplicate edges collapse; self-loops
    /// are rejected.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut id = |name: &str, names: &mut Vec<String>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        let mut pairs = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                return Err(Error::input(format!("self-loop on '{a}'")));
            }
            let ia = id(a, &mut names);
            let ib = id(b, &mut names);
            pairs.push((ia, ib));
        }
        let mut adjacency = vec![Vec::new(); names.len()];
        for (a, b) in pairs {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(InteractionNetwork {
            genes: Catalog::new(names)?,
            adjacency,
        })
    }

    pub fn genes(&self) -> &GeneCatalog {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn position(&self, gene: &str) -> Option<usize> {
        self.genes.position(gene)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(u, adj)| {
            adj.iter()
                .all(|&v| v != u && self.adjacency[v].binary_search(&u).is_ok())
        })
    }
}

fn check_shape<T>(genes: &Catalog, samples: &Catalog, entries: &[Vec<T>], what: &str) -> Result<()> {
    if entries.len() != genes.len() {
        return Err(Error::input(format!(
            "{what}: {} rows but {} genes",
            entries.len(),
            genes.len()
        )));
    }
    if let Some((g, row)) = entries.iter().enumerate().find(|(_, r)| r.len() != samples.len()) {
        return Err(Error::input(format!(
            "{what}: gene '{}' has {} columns but {} samples",
            genes.name(g),
            row.len(),
            samples.len()
        )));
    }
    Ok(())
}

/// Merges alteration calls with significant copy-number events:
/// `M(i,j) = 0` iff `A(i,j) = 0` and `l_cnv < C(i,j) < h_cnv`.
pub fn merge_cnv(a: &AlterationMatrix, c: &CnvMatrix, l_cnv: i32, h_cnv: i32) -> Result<MutationMatrix> {
    if l_cnv >= h_cnv {
        return Err(Error::input(format!(
            "CNV bounds must satisfy l_cnv < h_cnv (got {l_cnv}, {h_cnv})"
        )));
    }
    check_shape(&a.genes, &a.samples, &a.entries, "alteration matrix")?;
    check_shape(&c.genes, &c.samples, &c.entries, "CNV matrix")?;
    if a.genes != c.genes || a.samples != c.samples {
        return Err(Error::input(
            "alteration and CNV matrices must share gene and sample catalogs",
        ));
    }
    let entries = a
        .entries
        .iter()
        .zip(&c.entries)
        .map(|(ar, cr)| {
            ar.iter()
                .zip(cr)
                .map(|(&alt, &cnv)| alt || !(l_cnv < cnv && cnv < h_cnv))
                .collect()
        })
        .collect();
    MutationMatrix::new(a.genes.clone(), a.samples.clone(), entries)
}

/// Reorders a CNV matrix onto the given catalogs. Genes missing from the CNV
/// file get a baseline (0) row; every sample must be present.
pub fn align_cnv(c: &CnvMatrix, genes: &GeneCatalog, samples: &SampleCatalog) -> Result<CnvMatrix> {
    let cols = sample_mapping(&c.samples, samples, "CNV")?;
    let entries = genes
        .names()
        .iter()
        .map(|g| match c.genes.position(g) {
            Some(r) => cols.iter().map(|&j| c.entries[r][j]).collect(),
            None => vec![0; samples.len()],
        })
        .collect();
    Ok(CnvMatrix {
        genes: genes.clone(),
        samples: samples.clone(),
        entries,
    })
}

/// Reorders an alteration matrix onto the given catalogs; missing genes are
/// unaltered everywhere.
pub fn align_alterations(
    a: &AlterationMatrix,
    genes: &GeneCatalog,
    samples: &SampleCatalog,
) -> Result<AlterationMatrix> {
    let cols = sample_mapping(&a.samples, samples, "alteration")?;
    let entries = genes
        .names()
        .iter()
        .map(|g| match a.genes.position(g) {
            Some(r) => cols.iter().map(|&j| a.entries[r][j]).collect(),
            None => vec![false; samples.len()],
        })
        .collect();
    Ok(AlterationMatrix {
        genes: genes.clone(),
        samples: samples.clone(),
        entries,
    })
}

fn sample_mapping(from: &SampleCatalog, to: &SampleCatalog, what: &str) -> Result<Vec<usize>> {
    if from.len() != to.len() {
        return Err(Error::input(format!(
            "{what} file has {} samples, expected {}",
            from.len(),
            to.len()
        )));
    }
    to.names()
        .iter()
        .map(|s| {
            from.position(s)
                .ok_or_else(|| Error::input(format!("{what} file lacks sample '{s}'")))
        })
        .collect()
}

/// Builds the mutation matrix from alteration calls and optional CNV calls.
/// The gene catalog is the alteration genes followed by CNV-only genes; the
/// sample order follows the alteration file.
pub fn build_mutation_matrix(
    a: &AlterationMatrix,
    c: Option<&CnvMatrix>,
    l_cnv: i32,
    h_cnv: i32,
) -> Result<MutationMatrix> {
    let Some(c) = c else {
        return MutationMatrix::new(a.genes.clone(), a.samples.clone(), a.entries.clone());
    };
    let mut names = a.genes.names().to_vec();
    names.extend(
        c.genes
            .names()
            .iter()
            .filter(|g| a.genes.position(g).is_none())
            .cloned(),
    );
    let genes = Catalog::new(names)?;
    let a = align_alterations(a, &genes, &a.samples)?;
    let c = align_cnv(c, &genes, &a.samples)?;
    merge_cnv(&a, &c, l_cnv, h_cnv)
}

/// Fraction of `NA` cells above which a gene is treated as absent.
pub const MAX_NA_FRACTION: f64 = 0.5;

/// Row-wise z-scoring. `NA` cells are replaced by the row mean of the observed
/// values; rows with more than half `NA`, fewer than two values, or zero
/// variance are marked absent instead of aborting.
pub fn zscore(raw: &RawExpression, divisor: StdDivisor) -> ExpressionMatrix {
    let n = raw.samples.len();
    let mut entries = Vec::with_capacity(raw.genes.len());
    let mut present = Vec::with_capacity(raw.genes.len());
    for (g, row) in raw.values.iter().enumerate() {
        let observed: Vec<f64> = row.iter().flatten().copied().collect();
        let missing = n - observed.len();
        let usable = n >= 2
            && observed.len() >= 2
            && (missing as f64) <= MAX_NA_FRACTION * n as f64;
        if !usable {
            if missing > 0 {
                warn!("expression for '{}' has {missing}/{n} NA cells; gene treated as absent", raw.genes.name(g));
            }
            entries.push(vec![0.0; n]);
            present.push(false);
            continue;
        }
        let obs_mean = observed.iter().sum::<f64>() / observed.len() as f64;
        let filled: Vec<f64> = row.iter().map(|v| v.unwrap_or(obs_mean)).collect();
        let mean = filled.iter().sum::<f64>() / n as f64;
        let ss: f64 = filled.iter().map(|v| (v - mean) * (v - mean)).sum();
        let denom = match divisor {
            StdDivisor::Sample => (n - 1) as f64,
            StdDivisor::Population => n as f64,
        };
        let sd = (ss / denom).sqrt();
        if !(sd > 0.0) || !sd.is_finite() {
            warn!("expression for '{}' has zero variance; gene treated as absent", raw.genes.name(g));
            entries.push(vec![0.0; n]);
            present.push(false);
            continue;
        }
        entries.push(filled.iter().map(|v| (v - mean) / sd).collect());
        present.push(true);
    }
    ExpressionMatrix {
        genes: raw.genes.clone(),
        samples: raw.samples.clone(),
        entries,
        present,
    }
}

/// Keeps the genes whose mutation count reaches the nearest-rank
/// `percentile` of all counts. Ties at the threshold are all kept, as is any
/// gene with at least one mutated sample above it; genes never mutated are
/// always dropped.
pub fn filter_top_genes(m: &MutationMatrix, percentile: f64) -> Result<MutationMatrix> {
    if m.n_genes() == 0 {
        return Err(Error::input("mutation matrix has no genes"));
    }
    if !(percentile > 0.0 && percentile <= 100.0) {
        return Err(Error::input(format!(
            "gene percentile must lie in (0, 100], got {percentile}"
        )));
    }
    let counts: Vec<f64> = (0..m.n_genes()).map(|g| m.mutation_count(g) as f64).collect();
    let threshold = nearest_rank(&counts, percentile).expect("nonempty counts");
    let keep: Vec<usize> = (0..m.n_genes())
        .filter(|&g| counts[g] >= threshold && counts[g] >= 1.0)
        .collect();
    if keep.is_empty() {
        return Err(Error::input(format!(
            "no mutated gene reaches the {percentile} percentile of mutation counts"
        )));
    }
    Ok(m.retain_genes(&keep))
}

struct Table {
    samples: Vec<String>,
    rows: Vec<(String, Vec<String>, usize)>,
}

fn parse_table(text: &str, source: &str) -> Result<Table> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(source, 1, "file is empty"))?;
    let samples: Vec<String> = header.split('\t').skip(1).map(|s| s.trim().to_string()).collect();
    if samples.is_empty() {
        return Err(Error::parse(source, 1, "header has no sample columns"));
    }
    let mut rows = Vec::new();
    for (line_no, line) in lines {
        let mut cells = line.split('\t');
        let gene = cells.next().unwrap_or("").trim().to_string();
        if gene.is_empty() {
            return Err(Error::parse(source, line_no, "missing gene name"));
        }
        let cells: Vec<String> = cells.map(|s| s.trim().to_string()).collect();
        if cells.len() != samples.len() {
            return Err(Error::parse(
                source,
                line_no,
                format!("expected {} values, found {}", samples.len(), cells.len()),
            ));
        }
        rows.push((gene, cells, line_no));
    }
    Ok(Table { samples, rows })
}

fn catalogs(table: &Table, source: &str) -> Result<(GeneCatalog, SampleCatalog)> {
    let samples = Catalog::new(table.samples.clone()).map_err(|e| Error::parse(source, 1, e.to_string()))?;
    let mut seen = HashMap::new();
    for (gene, _, line) in &table.rows {
        if let Some(first) = seen.insert(gene.clone(), *line) {
            return Err(Error::parse(
                source,
                *line,
                format!("gene '{gene}' already defined on line {first}"),
            ));
        }
    }
    let genes = Catalog::new(table.rows.iter().map(|(g, _, _)| g.clone()).collect())?;
    Ok((genes, samples))
}

fn parse_cells<T>(
    table: &Table,
    source: &str,
    mut cell: impl FnMut(&str) -> std::result::Result<T, String>,
) -> Result<Vec<Vec<T>>> {
    table
        .rows
        .iter()
        .map(|(_, cells, line)| {
            cells
                .iter()
                .enumerate()
                .map(|(j, c)| cell(c).map_err(|r| Error::parse(source, *line, format!("column {}: {r}", j + 2))))
                .collect()
        })
        .collect()
}

pub fn parse_alterations(text: &str, source: &str) -> Result<AlterationMatrix> {
    let table = parse_table(text, source)?;
    let (genes, samples) = catalogs(&table, source)?;
    let entries = parse_cells(&table, source, |c| match c {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("alteration value must be 0 or 1, got '{other}'")),
    })?;
    Ok(AlterationMatrix {
        genes,
        samples,
        entries,
    })
}

pub fn parse_cnv(text: &str, source: &str) -> Result<CnvMatrix> {
    let table = parse_table(text, source)?;
    let (genes, samples) = catalogs(&table, source)?;
    let entries = parse_cells(&table, source, |c| {
        c.parse::<i32>()
            .map_err(|_| format!("CNV value must be an integer, got '{c}'"))
    })?;
    Ok(CnvMatrix {
        genes,
        samples,
        entries,
    })
}

pub fn parse_expression(text: &str, source: &str) -> Result<RawExpression> {
    let table = parse_table(text, source)?;
    let (genes, samples) = catalogs(&table, source)?;
    let values = parse_cells(&table, source, |c| {
        if c == "NA" {
            return Ok(None);
        }
        match c.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(format!("expression value must be a finite decimal or NA, got '{c}'")),
        }
    })?;
    Ok(RawExpression {
        genes,
        samples,
        values,
    })
}

pub fn parse_network(text: &str, source: &str) -> Result<InteractionNetwork> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::parse(
                source,
                line_no,
                format!("expected two gene names, found {} fields", tokens.len()),
            ));
        }
        if tokens[0] == tokens[1] {
            return Err(Error::parse(source, line_no, format!("self-loop on '{}'", tokens[0])));
        }
        edges.push((tokens[0], tokens[1]));
    }
    InteractionNetwork::from_edges(&edges)
}

/// One gene per line; blank lines and `#` comments are skipped, duplicates
/// collapse.
pub fn parse_drivers(text: &str, source: &str) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.split_whitespace().count() != 1 {
            return Err(Error::parse(source, i + 1, "expected a single gene name"));
        }
        if !out.iter().any(|g| g == line) {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_alterations(path: &Path) -> Result<AlterationMatrix> {
    parse_alterations(&read(path)?, &path.display().to_string())
}

pub fn load_cnv(path: &Path) -> Result<CnvMatrix> {
    parse_cnv(&read(path)?, &path.display().to_string())
}

pub fn load_expression(path: &Path) -> Result<RawExpression> {
    parse_expression(&read(path)?, &path.display().to_string())
}

pub fn load_network(path: &Path) -> Result<InteractionNetwork> {
    parse_network(&read(path)?, &path.display().to_string())
}

pub fn load_drivers(path: &Path) -> Result<Vec<String>> {
    parse_drivers(&read(path)?, &path.display().to_string())
}

fn write_table<T>(genes: &Catalog, samples: &Catalog, entries: &[Vec<T>], cell: impl Fn(&T) -> String) -> String {
    let mut out = String::from("gene");
    for s in samples.names() {
        out.push('\t');
        out.push_str(s);
    }
    out.push('\n');
    for (g, row) in entries.iter().enumerate() {
        out.push_str(genes.name(g));
        for v in row {
            let _ = write!(out, "\t{}", cell(v));
        }
        out.push('\n');
    }
    out
}

impl AlterationMatrix {
    pub fn to_tsv(&self) -> String {
        write_table(&self.genes, &self.samples, &self.entries, |&b| u8::from(b).to_string())
    }
}

impl CnvMatrix {
    pub fn to_tsv(&self) -> String {
        write_table(&self.genes, &self.samples, &self.entries, |v| v.to_string())
    }
}

impl MutationMatrix {
    pub fn to_tsv(&self) -> String {
        write_table(&self.genes, &self.samples, &self.entries, |&b| u8::from(b).to_string())
    }
}

impl RawExpression {
    pub fn to_tsv(&self) -> String {
        write_table(&self.genes, &self.samples, &self.values, |v| match v {
            Some(x) => format!("{x:?}"),
            None => "NA".to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(names: &[&str]) -> Catalog {
        Catalog::new(names.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn single(alt: bool, cnv: i32) -> bool {
        let a = AlterationMatrix {
            genes: cat(&["G"]),
            samples: cat(&["s"]),
            entries: vec![vec![alt]],
        };
        let c = CnvMatrix {
            genes: cat(&["G"]),
            samples: cat(&["s"]),
            entries: vec![vec![cnv]],
        };
        merge_cnv(&a, &c, -1, 3).unwrap().entries()[0][0]
    }

    #[test]
    fn merge_cnv_strict_bounds() {
        assert!(!single(false, 0));
        assert!(single(true, 0));
        assert!(single(false, -1));
        assert!(single(false, 3));
        assert!(!single(false, 2));
        assert!(single(false, -2));
    }

    #[test]
    fn merge_cnv_rejects_mismatch_and_bad_bounds() {
        let a = AlterationMatrix {
            genes: cat(&["G"]),
            samples: cat(&["s", "t"]),
            entries: vec![vec![false, true]],
        };
        let c = CnvMatrix {
            genes: cat(&["G"]),
            samples: cat(&["s"]),
            entries: vec![vec![0]],
        };
        assert!(merge_cnv(&a, &c, -1, 3).is_err());
        let c2 = CnvMatrix {
            genes: cat(&["G"]),
            samples: cat(&["s", "t"]),
            entries: vec![vec![0, 0]],
        };
        assert!(merge_cnv(&a, &c2, 3, 3).is_err());
    }

    #[test]
    fn patient_sets_track_entries() {
        let m = MutationMatrix::new(
            cat(&["A", "B"]),
            cat(&["s1", "s2", "s3"]),
            vec![vec![true, false, true], vec![false, false, false]],
        )
        .unwrap();
        assert_eq!(m.patients(0), &[0, 2]);
        assert!(m.patients(1).is_empty());
    }

    #[test]
    fn zscore_two_values() {
        let raw = RawExpression {
            genes: cat(&["G", "H"]),
            samples: cat(&["a", "b"]),
            values: vec![vec![Some(1.0), Some(3.0)], vec![Some(5.0), Some(5.0)]],
        };
        let z = zscore(&raw, StdDivisor::Sample);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z.entries[0][0] + r).abs() < 1e-12);
        assert!((z.entries[0][1] - r).abs() < 1e-12);
        assert!(!z.present[1]);
        assert!(z.vector("H").is_none());
    }

    #[test]
    fn zscore_na_handling() {
        let raw = RawExpression {
            genes: cat(&["G", "H"]),
            samples: cat(&["a", "b", "c", "d"]),
            values: vec![
                vec![Some(1.0), None, Some(3.0), Some(5.0)],
                vec![None, None, None, Some(1.0)],
            ],
        };
        let z = zscore(&raw, StdDivisor::Sample);
        assert!(z.present[0]);
        // NA filled with the observed mean, which z-scores to 0
        assert!(z.entries[0][1].abs() < 1e-12);
        assert!(!z.present[1]);
    }

    #[test]
    fn filter_keeps_ties_and_drops_unmutated() {
        let genes: Vec<String> = (1..=10).map(|i| format!("g{i}")).collect();
        let samples: Vec<String> = (0..10).map(|i| format!("s{i}")).collect();
        let entries = (1..=10).map(|c| (0..10).map(|j| j < c).collect()).collect();
        let m = MutationMatrix::new(Catalog::new(genes).unwrap(), Catalog::new(samples).unwrap(), entries).unwrap();
        let top = filter_top_genes(&m, 95.0).unwrap();
        assert_eq!(top.genes().names(), &["g10".to_string()]);
        let top85 = filter_top_genes(&m, 85.0).unwrap();
        assert_eq!(top85.n_genes(), 2);
        let all = filter_top_genes(&m, 1e-9).unwrap();
        assert_eq!(all.n_genes(), 10);

        let zero = MutationMatrix::new(cat(&["A"]), cat(&["s"]), vec![vec![false]]).unwrap();
        assert!(filter_top_genes(&zero, 50.0).is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let text = "gene\ts1\ts2\nTP53\t1\t0\nPTEN\t0\t1\n";
        let a = parse_alterations(text, "alt.tsv").unwrap();
        assert_eq!(a.to_tsv(), text);
        assert_eq!(parse_alterations(&a.to_tsv(), "again").unwrap(), a);
    }

    #[test]
    fn malformed_cells_report_line() {
        let err = parse_alterations("g\ts1\nA\t1\nB\t2\n", "alt.tsv").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_cnv("g\ts1\ts2\nA\t1\n", "cnv.tsv").unwrap_err();
        assert!(err.to_string().starts_with("cnv.tsv:2:"), "{err}");
    }

    #[test]
    fn network_dedup_and_self_loop() {
        let net = parse_network("# comment\nA B\nB A\nA B\nB C\n", "net").unwrap();
        assert_eq!(net.edge_count(), 2);
        assert!(net.is_symmetric());
        let err = parse_network("A B\nA A\n", "net").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_network("A B C\n", "net").is_err());
    }

    #[test]
    fn mutation_matrix_unions_cnv_only_genes() {
        let a = parse_alterations("g\ts1\ts2\nA\t1\t0\n", "a").unwrap();
        let c = parse_cnv("g\ts2\ts1\nA\t0\t0\nB\t3\t0\n", "c").unwrap();
        let m = build_mutation_matrix(&a, Some(&c), -1, 3).unwrap();
        assert_eq!(m.genes().names(), &["A".to_string(), "B".to_string()]);
        assert_eq!(m.patients(0), &[0]);
        assert_eq!(m.patients(1), &[1]);
    }

    #[test]
    fn drivers_dedupe() {
        let d = parse_drivers("TP53\n\n# x\nPTEN\nTP53\n", "d").unwrap();
        assert_eq!(d, vec!["TP53".to_string(), "PTEN".to_string()]);
    }
}
