//! LP relaxation of size-bounded correlation clustering.
//!
//! Variables are the pair distances `x_uv ∈ [0, 1]` (0 = same cluster). The
//! objective is `Σ w⁺ x + w⁻ (1 - x)` subject to every triangle inequality
//! `x_uv <= x_uz + x_zv`. The cluster-size constraint is left to rounding.
//!
//! There are `3·C(n,3)` triangle rows, so they are generated lazily: solve
//! with box constraints only, add the most violated triangles, re-optimize
//! from the previous basis with the dual simplex, and stop once separation
//! finds nothing above the tolerance.

use std::collections::HashSet;
use std::fmt::Write as _;

use log::debug;
use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::stats::fmt_sig9;
use crate::weights::EdgeWeights;

#[derive(Debug, Clone, Serialize)]
pub struct LpOptions {
    /// Triangle feasibility tolerance of the returned solution.
    pub tol: f64,
    /// Cuts added per round; `None` means `10 · n`.
    pub batch: Option<usize>,
    pub max_rounds: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            tol: 1e-6,
            batch: None,
            max_rounds: 1000,
        }
    }
}

/// A triangle-feasible point of the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub x: SymMatrix,
    pub objective: f64,
    pub max_violation: f64,
    pub rounds: usize,
    pub cuts: usize,
}

impl FractionalSolution {
    /// Wraps an arbitrary distance matrix, recomputing objective and violation.
    pub fn from_matrix(x: SymMatrix, w: &EdgeWeights) -> Self {
        let objective = objective(&x, w);
        let max_violation = max_triangle_violation(&x);
        FractionalSolution {
            x,
            objective,
            max_violation,
            rounds: 0,
            cuts: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn to_tsv(&self, genes: &[String]) -> String {
        let mut out = String::from("gene_u\tgene_v\tx\n");
        for (u, v) in self.x.pairs() {
            let _ = writeln!(out, "{}\t{}\t{}", genes[u], genes[v], fmt_sig9(self.x.get(u, v)));
        }
        out
    }

    pub fn summary(&self) -> LpSummary {
        LpSummary {
            objective: self.objective,
            max_violation: self.max_violation,
            iterations: self.rounds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpSummary {
    pub objective: f64,
    pub max_violation: f64,
    pub iterations: usize,
}

/// A violated triangle `x_uv - x_uz - x_zv = amount > 0`, with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub u: usize,
    pub v: usize,
    pub z: usize,
    pub amount: f64,
}

/// `Σ_{u<v} w⁺ x + w⁻ (1 - x)`.
pub fn objective(x: &SymMatrix, w: &EdgeWeights) -> f64 {
    x.pairs()
        .map(|(u, v)| {
            let xe = x.get(u, v);
            w.plus(u, v) * xe + w.minus(u, v) * (1.0 - xe)
        })
        .sum()
}

/// Largest `x_uv - x_uz - x_zv` over all distinct triples (0 if none is
/// positive).
pub fn max_triangle_violation(x: &SymMatrix) -> f64 {
    let n = x.n();
    let mut worst = 0.0f64;
    for u in 0..n {
        let ru = x.row(u);
        for v in (u + 1)..n {
            let rv = x.row(v);
            let xuv = ru[v];
            for z in 0..n {
                if z != u && z != v {
                    worst = worst.max(xuv - ru[z] - rv[z]);
                }
            }
        }
    }
    worst
}

/// Up to `batch` triangles violated by more than `tol`, most violated first
/// (ties by `(u, v, z)`). An empty result certifies feasibility at `tol`.
pub fn separate_triangles(x: &SymMatrix, tol: f64, batch: usize) -> Vec<Violation> {
    let n = x.n();
    let mut found = Vec::new();
    for u in 0..n {
        let ru = x.row(u);
        for v in (u + 1)..n {
            let rv = x.row(v);
            let xuv = ru[v];
            if xuv <= tol {
                continue;
            }
            for z in 0..n {
                if z == u || z == v {
                    continue;
                }
                let amount = xuv - ru[z] - rv[z];
                if amount > tol {
                    found.push(Violation { u, v, z, amount });
                }
            }
        }
    }
    let order = |a: &Violation, b: &Violation| {
        b.amount
            .total_cmp(&a.amount)
            .then((a.u, a.v, a.z).cmp(&(b.u, b.v, b.z)))
    };
    if found.len() > batch && batch > 0 {
        found.select_nth_unstable_by(batch - 1, order);
        found.truncate(batch);
    }
    found.sort_by(order);
    found.truncate(batch);
    found
}

fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (i, j) = if u < v { (u, v) } else { (v, u) };
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Solves the relaxation by lazy triangle generation.
///
/// The returned matrix is symmetric, clamped to `[0, 1]`, and passes a full
/// triangle scan at `opts.tol`. If the round budget runs out first the error
/// carries the last iterate.
pub fn solve_lp(w: &EdgeWeights, opts: &LpOptions) -> Result<FractionalSolution> {
    let n = w.n();
    if n < 2 {
        return Err(Error::input("the LP needs at least two genes"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::input("LP tolerance must be positive"));
    }
    let batch = opts.batch.unwrap_or(10 * n).max(1);

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut vars: Vec<Variable> = Vec::with_capacity(n * (n - 1) / 2);
    for (u, v) in w.pairs() {
        vars.push(problem.add_var(w.plus(u, v) - w.minus(u, v), (0.0, 1.0)));
    }
    let mut solution = problem.solve().map_err(|e| Error::Solver(e.to_string()))?;
    let mut active: HashSet<(usize, usize, usize)> = HashSet::new();
    // separate slightly below the target so the clamped output keeps a margin
    let sep_tol = opts.tol * 0.1;
    let mut rounds = 0;

    loop {
        let x = SymMatrix::from_fn(n, |u, v| {
            solution[vars[pair_index(n, u, v)]].clamp(0.0, 1.0)
        });
        let cuts: Vec<Violation> = separate_triangles(&x, sep_tol, batch)
            .into_iter()
            .filter(|c| !active.contains(&(c.u, c.v, c.z)))
            .collect();
        let current = || {
            let mut s = FractionalSolution::from_matrix(x.clone(), w);
            s.rounds = rounds;
            s.cuts = active.len();
            s
        };
        if cuts.is_empty() {
            let s = current();
            if s.max_violation <= opts.tol {
                debug!(
                    "LP converged: n={n}, rounds={rounds}, cuts={}, objective={}",
                    s.cuts, s.objective
                );
                return Ok(s);
            }
            // every violated row is already in the model; numerical stall
            let max_violation = s.max_violation;
            return Err(Error::NotConverged {
                best: Box::new(s),
                max_violation,
                rounds,
            });
        }
        if rounds >= opts.max_rounds {
            let s = current();
            let max_violation = s.max_violation;
            return Err(Error::NotConverged {
                best: Box::new(s),
                max_violation,
                rounds,
            });
        }
        rounds += 1;
        debug!("LP round {rounds}: adding {} cuts (worst {:.3e})", cuts.len(), cuts[0].amount);
        for c in cuts {
            active.insert((c.u, c.v, c.z));
            let mut terms = [
                (pair_index(n, c.u, c.v), 1.0),
                (pair_index(n, c.u, c.z), -1.0),
                (pair_index(n, c.z, c.v), -1.0),
            ];
            terms.sort_by_key(|t| t.0);
            let expr: Vec<(Variable, f64)> = terms.iter().map(|&(i, a)| (vars[i], a)).collect();
            solution = solution
                .add_constraint(expr, ComparisonOp::Le, 0.0)
                .map_err(|e| Error::Solver(e.to_string()))?;
        }
    }
}
