//! Reference implementations used only by the tests.

#![allow(dead_code)]

use c3::matrix::SymMatrix;
use c3::rounding::Clustering;
use c3::weights::EdgeWeights;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn binomial(n: u64, k: u64) -> BigUint {
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Exact left-tail Fisher probability `P(A <= a)` for the table `[[a, b], [c, d]]`.
pub fn fisher_left_exact(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let row = a + b;
    let rest = c + d;
    let col = a + c;
    let n = row + rest;
    let lo = col.saturating_sub(rest);
    let mut num = BigUint::zero();
    for x in lo..=a {
        num += binomial(row, x) * binomial(rest, col - x);
    }
    let p = BigRational::new(num.into(), binomial(n, col).into());
    p.to_f64().unwrap()
}

/// All-pairs hop distances by Floyd–Warshall; `None` when unreachable.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<u32>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for &(u, v) in edges {
        d[u][v] = Some(1);
        d[v][u] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k][j] {
                    if d[i][j].is_none_or(|ij| ik + kj < ij) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    d
}

/// Largest `x_uv - x_uz - x_zv` over every ordered triple.
pub fn brute_triangle_violation(x: &SymMatrix) -> f64 {
    let n = x.n();
    let mut worst = 0.0f64;
    for u in 0..n {
        for v in 0..n {
            for z in 0..n {
                if u != v && v != z && u != z {
                    worst = worst.max(x.get(u, v) - x.get(u, z) - x.get(z, v));
                }
            }
        }
    }
    worst
}

/// Direct cost sum over all pairs.
pub fn naive_cost(labels: &[usize], w: &EdgeWeights) -> f64 {
    let n = labels.len();
    let mut cost = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            cost += if labels[u] == labels[v] { w.minus(u, v) } else { w.plus(u, v) };
        }
    }
    cost
}

/// Every set partition of `0..n` as a label vector, via restricted-growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, open: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=open {
            cur[i] = b;
            go(i + 1, open.max(b + 1), cur, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    go(0, 0, &mut vec![0; n], &mut out);
    out
}

/// Minimum cost over all partitions with blocks of size at most `k + 1`.
pub fn brute_optimum(w: &EdgeWeights, k: usize) -> f64 {
    all_partitions(w.n())
        .into_iter()
        .filter(|l| Clustering::from_labels(l).max_block_size() <= k + 1)
        .map(|l| naive_cost(&l, w))
        .fold(f64::INFINITY, f64::min)
}

/// Weights with `w⁺ <= 1` and `w⁺ + w⁻ >= 1`, drawn from `next` in `[0, 1)`.
pub fn random_valid_weights(n: usize, mut next: impl FnMut() -> f64) -> EdgeWeights {
    let mut plus = SymMatrix::zeros(n);
    let mut minus = SymMatrix::zeros(n);
    for u in 0..n {
        for v in (u + 1)..n {
            let p = next();
            plus.set(u, v, p);
            minus.set(u, v, 1.0 - p + 0.5 * next());
        }
    }
    EdgeWeights::anonymous(plus, minus).unwrap()
}
