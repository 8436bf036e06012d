//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE` with flat `key = value` lines; the
//! keys are the long flag names without dashes. Flags given on the command
//! line win over the file.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::seq::index::sample;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::eval::{self, EvalContext, EvalOptions, Tail};
use crate::ingest::{self, ExpressionMatrix, InteractionNetwork, MutationMatrix, StdDivisor};
use crate::lp::{self, LpOptions};
use crate::oracle::{self, DEFAULT_MAX_N};
use crate::rounding::{self, Clustering, PivotRule, RoundingParams, DEFAULT_ALPHA};
use crate::stats::{fmt_sig9, seeded_rng};
use crate::synth::{self, PLANTED_SIZES};
use crate::weights::{self, EdgeWeights, Scheme, WeightConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "c3", version, about = "Size-bounded correlation clustering of mutated genes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline on mutation data.
    Cluster(ClusterArgs),
    /// Planted-cluster and random-weight experiments.
    Synth(SynthArgs),
    /// Compare LP, rounding and the exact optimum on a small instance.
    OracleCheck(OracleArgs),
    /// Network distances between driver genes versus random genes.
    DriverDistance(DriverArgs),
    /// Re-score an existing clustering JSON.
    Eval(EvalArgs),
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    #[arg(long)]
    pub alteration: Option<PathBuf>,
    #[arg(long)]
    pub cnv: Option<PathBuf>,
    #[arg(long = "l-cnv", allow_hyphen_values = true)]
    pub l_cnv: Option<i32>,
    #[arg(long = "h-cnv", allow_hyphen_values = true)]
    pub h_cnv: Option<i32>,
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub drivers: Option<PathBuf>,
    /// Fisher tail: left, right or two-sided.
    #[arg(long)]
    pub tail: Option<String>,
    /// Permutation trials for the evaluation baselines (0 disables them).
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub expression: Option<PathBuf>,
    /// Percentile of mutation counts a gene must reach.
    #[arg(long = "top-percentile")]
    pub top_percentile: Option<f64>,
    /// ME-CO, NI-ME-CO, EX-ME-CO or FULL.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long = "a")]
    pub a: Option<f64>,
    #[arg(long = "J")]
    pub j: Option<f64>,
    #[arg(long = "Jp")]
    pub j_network: Option<f64>,
    #[arg(long = "Jpp")]
    pub j_expression: Option<f64>,
    /// Coverage share.
    #[arg(long)]
    pub w1: Option<f64>,
    /// Network share.
    #[arg(long)]
    pub w2: Option<f64>,
    /// Expression share.
    #[arg(long)]
    pub w3: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// lowest-index, largest-neighbourhood or seeded.
    #[arg(long)]
    pub pivot: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long = "max-rounds")]
    pub max_rounds: Option<usize>,
    /// sample (n-1) or population (n).
    #[arg(long = "std-divisor")]
    pub std_divisor: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "dump-weights")]
    pub dump_weights: bool,
    #[arg(long = "dump-lp")]
    pub dump_lp: bool,
    /// Validate and print the resolved configuration without computing.
    #[arg(long = "dry-run")]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Planted block sizes, comma separated.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Gamma values, comma separated.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Flip counts, comma separated.
    #[arg(long)]
    pub flips: Option<String>,
    /// Seeds per planted setting.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Random-weight instances to generate (0 skips them).
    #[arg(long = "random-instances")]
    pub random_instances: Option<usize>,
    /// Vertex count of random instances.
    #[arg(long = "random-n")]
    pub random_n: Option<usize>,
    /// value:probability list for random w+.
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Weight table (gene_u gene_v w_plus w_minus); random weights if absent.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long = "random-n")]
    pub random_n: Option<usize>,
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "max-n")]
    pub max_n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DriverArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub drivers: Option<PathBuf>,
    /// Random gene pairs to sample.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Clustering JSON written by `cluster`.
    #[arg(long)]
    pub clustering: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed `key = value` configuration file.
#[derive(Debug, Default)]
struct ConfigFile {
    path: String,
    values: HashMap<String, (String, usize)>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn parse(text: &str, source: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, i + 1, "expected key = value"))?;
            let key = k.trim().trim_start_matches("--").to_string();
            if values.insert(key.clone(), (v.trim().to_string(), i + 1)).is_some() {
                return Err(Error::parse(source, i + 1, format!("key '{key}' set twice")));
            }
        }
        Ok(ConfigFile {
            path: source.to_string(),
            values,
        })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::parse(&self.path, *line, format!("invalid value '{v}' for '{key}'"))),
        }
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn pick_flag(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn existing(path: Option<PathBuf>, flag: &str) -> Result<Option<PathBuf>> {
    match path {
        Some(p) if !p.is_file() => Err(Error::input(format!("--{flag}: file '{}' not found", p.display()))),
        other => Ok(other),
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::input(format!("--{what}: invalid item '{x}'")))
        })
        .collect()
}

/// Mutation/network/driver inputs shared by `cluster` and `eval`.
#[derive(Debug, Clone, Serialize)]
pub struct DataConfig {
    pub alteration: PathBuf,
    pub cnv: Option<PathBuf>,
    pub l_cnv: i32,
    pub h_cnv: i32,
    pub network: Option<PathBuf>,
    pub drivers: Option<PathBuf>,
    pub tail: Tail,
    pub trials: usize,
}

impl DataConfig {
    fn resolve(args: DataArgs, cfg: &ConfigFile) -> Result<Self> {
        let alteration = existing(cfg.pick_opt(args.alteration, "alteration")?, "alteration")?
            .ok_or_else(|| Error::input("--alteration: an alteration matrix is required"))?;
        let l_cnv = cfg.pick(args.l_cnv, "l-cnv", -1)?;
        let h_cnv = cfg.pick(args.h_cnv, "h-cnv", 3)?;
        if l_cnv >= h_cnv {
            return Err(Error::input(format!("--l-cnv ({l_cnv}) must be below --h-cnv ({h_cnv})")));
        }
        Ok(DataConfig {
            alteration,
            cnv: existing(cfg.pick_opt(args.cnv, "cnv")?, "cnv")?,
            l_cnv,
            h_cnv,
            network: existing(cfg.pick_opt(args.network, "network")?, "network")?,
            drivers: existing(cfg.pick_opt(args.drivers, "drivers")?, "drivers")?,
            tail: cfg.pick(args.tail, "tail", "left".to_string())?.parse()?,
            trials: cfg.pick(args.trials, "trials", 1000)?,
        })
    }

    fn mutation_matrix(&self) -> Result<MutationMatrix> {
        let a = ingest::load_alterations(&self.alteration)?;
        let c = self.cnv.as_deref().map(ingest::load_cnv).transpose()?;
        ingest::build_mutation_matrix(&a, c.as_ref(), self.l_cnv, self.h_cnv)
    }

    fn network(&self) -> Result<Option<InteractionNetwork>> {
        self.network.as_deref().map(ingest::load_network).transpose()
    }

    fn drivers(&self) -> Result<Option<HashSet<String>>> {
        Ok(self
            .drivers
            .as_deref()
            .map(ingest::load_drivers)
            .transpose()?
            .map(|d| d.into_iter().collect()))
    }
}

/// Fully resolved parameters of a `cluster` run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub data: DataConfig,
    pub expression: Option<PathBuf>,
    pub std_divisor: StdDivisor,
    pub top_percentile: f64,
    pub weights: WeightConfig,
    pub rounding: RoundingParams,
    pub lp: LpOptions,
    pub seed: u64,
    pub out: PathBuf,
    pub dump_weights: bool,
    pub dump_lp: bool,
}

impl RunConfig {
    pub fn resolve(args: ClusterArgs) -> Result<Self> {
        let cfg = ConfigFile::load(args.config.as_deref())?;
        let seed = cfg.pick(args.seed, "seed", 0)?;
        let scheme: Scheme = cfg.pick(args.scheme, "scheme", "ME-CO".to_string())?.parse()?;
        let data = DataConfig::resolve(args.data, &cfg)?;
        let expression = existing(cfg.pick_opt(args.expression, "expression")?, "expression")?;
        if scheme.uses_network() && data.network.is_none() {
            return Err(Error::input(format!("--network: scheme {scheme} requires an interaction network")));
        }
        if scheme.uses_expression() && expression.is_none() {
            return Err(Error::input(format!("--expression: scheme {scheme} requires expression data")));
        }
        let default_shares = match scheme {
            Scheme::MeCo => (1.0, 0.0, 0.0),
            Scheme::NiMeCo => (0.5, 0.5, 0.0),
            Scheme::ExMeCo => (0.5, 0.0, 0.5),
            Scheme::Full => (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        };
        let weights = WeightConfig {
            scheme,
            a: cfg.pick(args.a, "a", 1.0)?,
            j: cfg.pick(args.j, "J", 95.0)?,
            j_network: cfg.pick(args.j_network, "Jp", 95.0)?,
            j_expression: cfg.pick(args.j_expression, "Jpp", 95.0)?,
            w1: cfg.pick(args.w1, "w1", default_shares.0)?,
            w2: cfg.pick(args.w2, "w2", default_shares.1)?,
            w3: cfg.pick(args.w3, "w3", default_shares.2)?,
        }
        .validated()?;
        let pivot = match cfg.pick(args.pivot, "pivot", "lowest-index".to_string())?.as_str() {
            "seeded" => PivotRule::Seeded { seed },
            other => other.parse()?,
        };
        let rounding = RoundingParams {
            alpha: cfg.pick(args.alpha, "alpha", DEFAULT_ALPHA)?,
            k: cfg
                .pick_opt(args.k, "K")?
                .ok_or_else(|| Error::input("--K: a cluster size bound is required"))?,
            pivot,
        };
        rounding.validate()?;
        let lp = LpOptions {
            tol: cfg.pick(args.tol, "tol", 1e-6)?,
            batch: cfg.pick_opt(args.batch, "batch")?,
            max_rounds: cfg.pick(args.max_rounds, "max-rounds", LpOptions::default().max_rounds)?,
        };
        if !(lp.tol > 0.0) {
            return Err(Error::input("--tol must be positive"));
        }
        let top_percentile = cfg.pick(args.top_percentile, "top-percentile", 95.0)?;
        if !(top_percentile > 0.0 && top_percentile <= 100.0) {
            return Err(Error::input("--top-percentile must lie in (0, 100]"));
        }
        let std_divisor = match cfg.pick(args.std_divisor, "std-divisor", "sample".to_string())?.as_str() {
            "sample" => StdDivisor::Sample,
            "population" => StdDivisor::Population,
            other => return Err(Error::input(format!("--std-divisor: unknown value '{other}'"))),
        };
        Ok(RunConfig {
            data,
            expression,
            std_divisor,
            top_percentile,
            weights,
            rounding,
            lp,
            seed,
            out: cfg.pick(args.out, "out", PathBuf::from("c3-out"))?,
            dump_weights: cfg.pick_flag(args.dump_weights, "dump-weights")?,
            dump_lp: cfg.pick_flag(args.dump_lp, "dump-lp")?,
        })
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn manifest(command: &str, config: &impl Serialize, seed: u64) -> serde_json::Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config": config,
    })
}

/// Clustering document shared by `cluster` (writer) and `eval` (reader).
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct ClusteringDoc {
    pub params: serde_json::Value,
    pub blocks: Vec<Vec<String>>,
    pub cost: f64,
}

fn cmd_cluster(args: ClusterArgs) -> Result<String> {
    let dry_run = args.dry_run;
    let cfg = RunConfig::resolve(args)?;
    if dry_run {
        return Ok(to_json(&manifest("cluster", &cfg, cfg.seed)));
    }
    let mut out = String::new();
    let all = cfg.data.mutation_matrix()?;
    let m = ingest::filter_top_genes(&all, cfg.top_percentile)?;
    let _ = writeln!(
        out,
        "genes: {} of {} kept at percentile {}; samples: {}",
        m.n_genes(),
        all.n_genes(),
        cfg.top_percentile,
        m.n_samples()
    );
    let net = cfg.data.network()?;
    let z: Option<ExpressionMatrix> = match &cfg.expression {
        Some(p) => Some(ingest::zscore(&ingest::load_expression(p)?, cfg.std_divisor)),
        None => None,
    };
    let w = weights::build_weights(&m, net.as_ref(), z.as_ref(), &cfg.weights)?;
    let sol = lp::solve_lp(&w, &cfg.lp)?;
    let clustering = rounding::round(&sol, &cfg.rounding)?;
    let cost = rounding::clustering_cost(&clustering, &w);
    let _ = writeln!(
        out,
        "LP objective {} after {} rounds ({} triangle cuts, max violation {:.2e})",
        fmt_sig9(sol.objective),
        sol.rounds,
        sol.cuts,
        sol.max_violation
    );
    let _ = writeln!(
        out,
        "clusters: {} (largest {}), cost {}",
        clustering.blocks().len(),
        clustering.max_block_size(),
        fmt_sig9(cost)
    );

    let drivers = cfg.data.drivers()?;
    let ctx = EvalContext {
        mutations: &m,
        network: net.as_ref(),
        drivers: drivers.as_ref(),
        tail: cfg.data.tail,
    };
    let report = eval::evaluate(
        &clustering,
        &ctx,
        &EvalOptions {
            top: 10,
            trials: cfg.data.trials,
            seed: cfg.seed,
        },
    )?;

    create_dir(&cfg.out)?;
    write_file(&cfg.out.join("manifest.json"), &to_json(&manifest("cluster", &cfg, cfg.seed)))?;
    if cfg.dump_weights {
        w.write_tsv(&cfg.out.join("weights.tsv"))?;
    }
    if cfg.dump_lp {
        write_file(&cfg.out.join("lp_solution.tsv"), &sol.to_tsv(w.genes()))?;
    }
    write_file(&cfg.out.join("lp_summary.json"), &format!("{}\n", serde_json::to_string(&sol.summary()).expect("json")))?;
    let doc = ClusteringDoc {
        params: json!({
            "scheme": cfg.weights.scheme,
            "K": cfg.rounding.k,
            "alpha": cfg.rounding.alpha,
            "pivot": cfg.rounding.pivot,
            "weights": cfg.weights,
            "seed": cfg.seed,
        }),
        blocks: clustering.block_names(w.genes()),
        cost,
    };
    write_file(&cfg.out.join("clustering.json"), &to_json(&doc))?;
    let text: String = doc.blocks.iter().map(|b| b.join("\t") + "\n").collect();
    write_file(&cfg.out.join("clusters.txt"), &text)?;
    write_file(&cfg.out.join("report.json"), &to_json(&report))?;
    write_file(&cfg.out.join("report.tsv"), &report.to_tsv())?;
    report_summary(&mut out, &report);
    let _ = writeln!(out, "outputs written to {}", cfg.out.display());
    Ok(out)
}

fn report_summary(out: &mut String, report: &eval::ClusterReport) {
    let _ = writeln!(out, "most exclusive clusters: {:?}", report.top_by_exclusivity);
    if let Some(p) = report.top_driver_proportion {
        let _ = writeln!(out, "driver proportion in top clusters: {}", fmt_sig9(p));
    }
    for b in &report.permutation_baselines {
        let _ = writeln!(
            out,
            "baseline {:?}: observed {} random mean {} p {}",
            b.statistic,
            fmt_sig9(b.observed),
            fmt_sig9(b.mean),
            fmt_sig9(b.p_value)
        );
    }
}

fn cmd_eval(args: EvalArgs) -> Result<String> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let seed = cfg.pick(args.seed, "seed", 0)?;
    let data = DataConfig::resolve(args.data, &cfg)?;
    let path = existing(cfg.pick_opt(args.clustering, "clustering")?, "clustering")?
        .ok_or_else(|| Error::input("--clustering: a clustering JSON is required"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let doc: ClusteringDoc = serde_json::from_str(&text)
        .map_err(|e| Error::input(format!("{}: invalid clustering JSON: {e}", path.display())))?;
    let names: Vec<String> = doc.blocks.iter().flatten().cloned().collect();
    let m = data.mutation_matrix()?.select_genes(&names)?;
    let mut next = 0;
    let blocks: Vec<Vec<usize>> = doc
        .blocks
        .iter()
        .map(|b| {
            let ids = (next..next + b.len()).collect();
            next += b.len();
            ids
        })
        .collect();
    let clustering = Clustering::from_blocks(names.len(), blocks)?;
    let net = data.network()?;
    let drivers = data.drivers()?;
    let ctx = EvalContext {
        mutations: &m,
        network: net.as_ref(),
        drivers: drivers.as_ref(),
        tail: data.tail,
    };
    let report = eval::evaluate(&clustering, &ctx, &EvalOptions { top: 10, trials: data.trials, seed })?;
    let mut out = String::new();
    let _ = writeln!(out, "{} clusters over {} genes", clustering.blocks().len(), names.len());
    report_summary(&mut out, &report);
    if let Some(dir) = cfg.pick_opt(args.out, "out")? {
        create_dir(&dir)?;
        write_file(&dir.join("manifest.json"), &to_json(&manifest("eval", &data, seed)))?;
        write_file(&dir.join("report.json"), &to_json(&report))?;
        write_file(&dir.join("report.tsv"), &report.to_tsv())?;
        let _ = writeln!(out, "outputs written to {}", dir.display());
    } else {
        out.push_str(&to_json(&report));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
struct SynthRow {
    kind: &'static str,
    seed: u64,
    gamma: Option<f64>,
    flips: Option<usize>,
    n: usize,
    k: usize,
    exact_match: Option<bool>,
    overlap: Option<f64>,
    lp_objective: f64,
    cost: f64,
    optimum: Option<f64>,
    ratio: Option<f64>,
}

/// `cost / optimum`, with `0 / 0` read as a perfect ratio of 1.
pub fn approximation_ratio(cost: f64, optimum: f64) -> f64 {
    if optimum > 1e-12 {
        cost / optimum
    } else if cost <= 1e-12 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn run_instance(w: &EdgeWeights, params: &RoundingParams, lp_opts: &LpOptions) -> Result<(f64, Clustering, f64, Option<f64>)> {
    let sol = lp::solve_lp(w, lp_opts)?;
    let c = rounding::round(&sol, params)?;
    let cost = rounding::clustering_cost(&c, w);
    let optimum = if w.n() <= DEFAULT_MAX_N {
        Some(oracle::solve_exact(w, params.k, DEFAULT_MAX_N)?.cost)
    } else {
        None
    };
    Ok((sol.objective, c, cost, optimum))
}

fn cmd_synth(args: SynthArgs) -> Result<String> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let seed = cfg.pick(args.seed, "seed", 0)?;
    let sizes: Vec<usize> = match cfg.pick_opt(args.sizes, "sizes")? {
        Some(s) => parse_list(&s, "sizes")?,
        None => PLANTED_SIZES.to_vec(),
    };
    let gammas: Vec<f64> = parse_list(&cfg.pick(args.gamma, "gamma", "0.6,0.7,0.8,0.9,0.99".to_string())?, "gamma")?;
    let flips: Vec<usize> = parse_list(&cfg.pick(args.flips, "flips", "0,20".to_string())?, "flips")?;
    let repeats = cfg.pick(args.repeats, "repeats", 1)?;
    let random_instances = cfg.pick(args.random_instances, "random-instances", 0)?;
    let random_n = cfg.pick(args.random_n, "random-n", 8)?;
    let levels = synth::parse_levels(&cfg.pick(
        args.levels,
        "levels",
        "0.1:1,0.2:1,0.3:1,0.4:1,0.5:1,0.6:1,0.7:1,0.8:1,0.9:1".to_string(),
    )?)?;
    let params = RoundingParams {
        alpha: cfg.pick(args.alpha, "alpha", DEFAULT_ALPHA)?,
        ..RoundingParams::new(cfg.pick(args.k, "K", 6)?)
    };
    params.validate()?;
    let lp_opts = LpOptions {
        tol: cfg.pick(args.tol, "tol", 1e-6)?,
        ..Default::default()
    };

    let mut rows = Vec::new();
    for &gamma in &gammas {
        for &nf in &flips {
            for r in 0..repeats {
                let s = seed.wrapping_add(r as u64);
                let inst = synth::make_planted(&sizes, gamma, nf, s)?;
                let (obj, c, cost, optimum) = run_instance(&inst.weights, &params, &lp_opts)?;
                let cmp = synth::compare_clusterings(&c, &inst.truth)?;
                rows.push(SynthRow {
                    kind: "planted",
                    seed: s,
                    gamma: Some(gamma),
                    flips: Some(nf),
                    n: inst.weights.n(),
                    k: params.k,
                    exact_match: Some(cmp.exact_match),
                    overlap: Some(cmp.overlap),
                    lp_objective: obj,
                    cost,
                    optimum,
                    ratio: optimum.map(|o| approximation_ratio(cost, o)),
                });
            }
        }
    }
    for r in 0..random_instances {
        let s = seed.wrapping_add(r as u64);
        let w = synth::make_random(random_n, &levels, s)?;
        let (obj, _, cost, optimum) = run_instance(&w, &params, &lp_opts)?;
        rows.push(SynthRow {
            kind: "random",
            seed: s,
            gamma: None,
            flips: None,
            n: random_n,
            k: params.k,
            exact_match: None,
            overlap: None,
            lp_objective: obj,
            cost,
            optimum,
            ratio: optimum.map(|o| approximation_ratio(cost, o)),
        });
    }

    let opt = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_else(|| "-".into());
    let mut table = String::from("kind\tseed\tgamma\tflips\tn\tK\texact_match\toverlap\tlp_objective\tcost\toptimum\tratio\n");
    for r in &rows {
        let _ = writeln!(
            table,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.kind,
            r.seed,
            opt(r.gamma),
            r.flips.map(|f| f.to_string()).unwrap_or_else(|| "-".into()),
            r.n,
            r.k,
            r.exact_match.map(|b| b.to_string()).unwrap_or_else(|| "-".into()),
            opt(r.overlap),
            fmt_sig9(r.lp_objective),
            fmt_sig9(r.cost),
            opt(r.optimum),
            opt(r.ratio)
        );
    }
    let mut out = format!("# seed={seed}\n");
    out.push_str(&table);
    if let Some(dir) = cfg.pick_opt(args.out, "out")? {
        create_dir(&dir)?;
        let config = json!({
            "sizes": sizes, "gamma": gammas, "flips": flips, "repeats": repeats,
            "random_instances": random_instances, "random_n": random_n,
            "levels": levels.iter().map(|l| (l.value, l.probability)).collect::<Vec<_>>(),
            "rounding": params, "lp": lp_opts,
        });
        write_file(&dir.join("manifest.json"), &to_json(&manifest("synth", &config, seed)))?;
        write_file(&dir.join("synth.tsv"), &table)?;
        write_file(&dir.join("synth.json"), &to_json(&rows))?;
    }
    Ok(out)
}

fn cmd_oracle_check(args: OracleArgs) -> Result<String> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let seed = cfg.pick(args.seed, "seed", 0)?;
    let max_n = cfg.pick(args.max_n, "max-n", DEFAULT_MAX_N)?;
    let w = match existing(cfg.pick_opt(args.weights, "weights")?, "weights")? {
        Some(p) => EdgeWeights::read_tsv(&p)?,
        None => {
            let levels = synth::parse_levels(&cfg.pick(
                args.levels,
                "levels",
                "0.1:1,0.3:1,0.5:1,0.7:1,0.9:1".to_string(),
            )?)?;
            synth::make_random(cfg.pick(args.random_n, "random-n", 8)?, &levels, seed)?
        }
    };
    let violation = w.constraint_violation();
    if violation > 1e-12 {
        return Err(Error::input(format!(
            "weights violate w+ <= 1 or w+ + w- >= 1 by {violation:.3e}"
        )));
    }
    let params = RoundingParams {
        alpha: cfg.pick(args.alpha, "alpha", DEFAULT_ALPHA)?,
        ..RoundingParams::new(cfg.pick(args.k, "K", 3)?)
    };
    params.validate()?;
    let sol = lp::solve_lp(&w, &LpOptions::default())?;
    let c = rounding::round(&sol, &params)?;
    let cost = rounding::clustering_cost(&c, &w);
    let exact = oracle::solve_exact(&w, params.k, max_n)?;
    let ratio = approximation_ratio(cost, exact.cost);
    let excess = rounding::total_excess_weight(&w, params.k);
    let doc = json!({
        "seed": seed,
        "n": w.n(),
        "K": params.k,
        "alpha": params.alpha,
        "lp_objective": sol.objective,
        "rounded_cost": cost,
        "optimum": exact.cost,
        "ratio": ratio,
        "partitions_examined": exact.partitions_examined,
        "lp_below_optimum": sol.objective <= exact.cost + 1e-6,
        "within_nine": cost <= 9.0 * exact.cost + 1e-9,
        "charge_bound": 7.0 * sol.objective + excess,
        "rounded_blocks": c.block_names(w.genes()),
        "optimal_blocks": exact.best.block_names(w.genes()),
    });
    Ok(to_json(&doc))
}

#[derive(Debug, Clone, Serialize)]
pub struct DriverDistanceReport {
    pub seed: u64,
    pub network_genes: usize,
    pub drivers_in_network: usize,
    pub drivers_missing: usize,
    pub random_pairs: usize,
    pub random_unreachable: usize,
    pub driver_pairs: usize,
    pub driver_unreachable: usize,
    pub random_mean: Option<f64>,
    pub driver_mean: Option<f64>,
    pub random_histogram: BTreeMap<u32, usize>,
    pub driver_histogram: BTreeMap<u32, usize>,
    pub trials: usize,
    pub p_value: Option<f64>,
}

struct DistanceCache<'a> {
    net: &'a InteractionNetwork,
    rows: HashMap<usize, Vec<Option<u32>>>,
}

impl DistanceCache<'_> {
    fn get(&mut self, u: usize, v: usize) -> Option<u32> {
        let (s, t) = if u < v { (u, v) } else { (v, u) };
        let net = self.net;
        self.rows.entry(s).or_insert_with(|| eval::shortest_paths(net, s))[t]
    }

    fn mean_over_set(&mut self, genes: &[usize]) -> Option<f64> {
        let (mut total, mut count) = (0u64, 0u64);
        for (i, &u) in genes.iter().enumerate() {
            for &v in &genes[i + 1..] {
                if let Some(d) = self.get(u, v) {
                    total += u64::from(d);
                    count += 1;
                }
            }
        }
        (count > 0).then(|| total as f64 / count as f64)
    }
}

fn histogram(dists: &[Option<u32>]) -> (BTreeMap<u32, usize>, usize, Option<f64>) {
    let mut h = BTreeMap::new();
    let mut unreachable = 0;
    let (mut total, mut count) = (0u64, 0u64);
    for d in dists {
        match d {
            Some(d) => {
                *h.entry(*d).or_insert(0) += 1;
                total += u64::from(*d);
                count += 1;
            }
            None => unreachable += 1,
        }
    }
    (h, unreachable, (count > 0).then(|| total as f64 / count as f64))
}

/// Distances between random gene pairs and between all driver pairs, plus a
/// permutation p-value for the mean driver distance against random gene sets
/// of the same size.
pub fn driver_distance(
    net: &InteractionNetwork,
    drivers: &[String],
    pairs: usize,
    trials: usize,
    seed: u64,
) -> Result<DriverDistanceReport> {
    let n = net.len();
    if n < 2 {
        return Err(Error::input("network needs at least two genes"));
    }
    let mut in_net: Vec<usize> = drivers.iter().filter_map(|d| net.position(d)).collect();
    in_net.sort_unstable();
    in_net.dedup();
    let mut cache = DistanceCache {
        net,
        rows: HashMap::new(),
    };
    let total_pairs = n * (n - 1) / 2;
    let decode = |mut idx: usize| {
        let mut u = 0;
        while idx >= n - 1 - u {
            idx -= n - 1 - u;
            u += 1;
        }
        (u, u + 1 + idx)
    };
    let chosen: Vec<usize> = if pairs >= total_pairs {
        (0..total_pairs).collect()
    } else {
        let mut rng = seeded_rng(seed, 0x7061697273);
        let mut v = sample(&mut rng, total_pairs, pairs).into_vec();
        v.sort_unstable();
        v
    };
    let random: Vec<Option<u32>> = chosen
        .into_iter()
        .map(|i| {
            let (u, v) = decode(i);
            cache.get(u, v)
        })
        .collect();
    let mut driver_d = Vec::new();
    for (i, &u) in in_net.iter().enumerate() {
        for &v in &in_net[i + 1..] {
            driver_d.push(cache.get(u, v));
        }
    }
    let (random_histogram, random_unreachable, random_mean) = histogram(&random);
    let (driver_histogram, driver_unreachable, driver_mean) = histogram(&driver_d);

    let p_value = match driver_mean {
        Some(observed) if trials > 0 => {
            let mut rng = seeded_rng(seed, 0x6e756c6c);
            let mut genes: Vec<usize> = (0..n).collect();
            let mut as_close = 0usize;
            for _ in 0..trials {
                let picked = sample(&mut rng, n, in_net.len()).into_vec();
                for (slot, g) in picked.iter().enumerate() {
                    genes[slot] = *g;
                }
                let mut set = genes[..in_net.len()].to_vec();
                set.sort_unstable();
                if cache.mean_over_set(&set).is_some_and(|m| m <= observed) {
                    as_close += 1;
                }
            }
            Some((as_close + 1) as f64 / (trials + 1) as f64)
        }
        _ => None,
    };
    Ok(DriverDistanceReport {
        seed,
        network_genes: n,
        drivers_in_network: in_net.len(),
        drivers_missing: drivers.len() - in_net.len(),
        random_pairs: random.len(),
        random_unreachable,
        driver_pairs: driver_d.len(),
        driver_unreachable,
        random_mean,
        driver_mean,
        random_histogram,
        driver_histogram,
        trials,
        p_value,
    })
}

fn cmd_driver_distance(args: DriverArgs) -> Result<String> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let seed = cfg.pick(args.seed, "seed", 0)?;
    let network = existing(cfg.pick_opt(args.network, "network")?, "network")?
        .ok_or_else(|| Error::input("--network: an interaction network is required"))?;
    let drivers_path = existing(cfg.pick_opt(args.drivers, "drivers")?, "drivers")?
        .ok_or_else(|| Error::input("--drivers: a driver list is required"))?;
    let pairs = cfg.pick(args.pairs, "pairs", 1000)?;
    let trials = cfg.pick(args.trials, "trials", 1000)?;
    let net = ingest::load_network(&network)?;
    let drivers = ingest::load_drivers(&drivers_path)?;
    let report = driver_distance(&net, &drivers, pairs, trials, seed)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "seed {seed}: {} random pairs (mean {}), {} driver pairs (mean {}), permutation p {}",
        report.random_pairs,
        report.random_mean.map(fmt_sig9).unwrap_or_else(|| "-".into()),
        report.driver_pairs,
        report.driver_mean.map(fmt_sig9).unwrap_or_else(|| "-".into()),
        report.p_value.map(fmt_sig9).unwrap_or_else(|| "-".into()),
    );
    let mut tsv = String::from("hops\trandom_pairs\tdriver_pairs\n");
    let hops: std::collections::BTreeSet<u32> = report
        .random_histogram
        .keys()
        .chain(report.driver_histogram.keys())
        .copied()
        .collect();
    for h in hops {
        let _ = writeln!(
            tsv,
            "{h}\t{}\t{}",
            report.random_histogram.get(&h).copied().unwrap_or(0),
            report.driver_histogram.get(&h).copied().unwrap_or(0)
        );
    }
    if let Some(dir) = cfg.pick_opt(args.out, "out")? {
        create_dir(&dir)?;
        let config = json!({"network": network, "drivers": drivers_path, "pairs": pairs, "trials": trials});
        write_file(&dir.join("manifest.json"), &to_json(&manifest("driver-distance", &config, seed)))?;
        write_file(&dir.join("driver_distance.json"), &to_json(&report))?;
        write_file(&dir.join("histograms.tsv"), &tsv)?;
    } else {
        out.push_str(&tsv);
    }
    Ok(out)
}

/// Runs one command and returns its stdout text.
pub fn execute(command: Command) -> Result<String> {
    match command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Synth(a) => cmd_synth(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::DriverDistance(a) => cmd_driver_distance(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

/// Parses `args`, runs the command, prints its summary and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            info!("done");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
