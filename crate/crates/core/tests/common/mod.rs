//! Dense reference implementations and fixtures shared by the integration
//! tests. Nothing here calls into the library's numerical code.

#![allow(dead_code)]

use bilink::graph::{BipartiteGraph, UnipartiteGraph};
use bilink::svd::{truncated_svd, SvdModel, SvdOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal sample (Box–Muller).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

pub fn identity(n: usize) -> Dense {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn transpose(a: &Dense) -> Dense {
    let (r, c) = (a.len(), a.first().map_or(0, Vec::len));
    let mut t = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = zeros(n, m);
    for i in 0..n {
        for p in 0..k {
            let x = a[i][p];
            if x != 0.0 {
                for j in 0..m {
                    out[i][j] += x * b[p][j];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues and the eigenvectors as columns of the second result.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), v)
}

/// `V diag(f(λ)) Vᵀ` for symmetric `a`; `f` also sees all eigenvalues.
pub fn matrix_function(a: &Dense, f: impl Fn(f64, &[f64]) -> f64) -> Dense {
    let (lambda, v) = jacobi_eigen(a);
    let n = a.len();
    let fl: Vec<f64> = lambda.iter().map(|&l| f(l, &lambda)).collect();
    let mut out = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (0..n).map(|k| v[i][k] * fl[k] * v[j][k]).sum();
        }
    }
    out
}

/// Dense `[0 B; Bᵀ 0]`.
pub fn block(b: &Dense) -> Dense {
    let (m, n) = (b.len(), b.first().map_or(0, Vec::len));
    let mut a = zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            a[i][m + j] = b[i][j];
            a[m + j][i] = b[i][j];
        }
    }
    a
}

/// Top-right `m × n` block of a square matrix.
pub fn top_right(a: &Dense, m: usize, n: usize) -> Dense {
    (0..m).map(|i| a[i][m..m + n].to_vec()).collect()
}

/// Singular values of `b`, descending, from the eigenvalues of `BᵀB`.
pub fn singular_values(b: &Dense) -> Vec<f64> {
    let bt = transpose(b);
    let gram = if b.len() >= bt.len() {
        matmul(&bt, b)
    } else {
        matmul(b, &bt)
    };
    let (mut l, _) = jacobi_eigen(&gram);
    l.sort_by(|x, y| y.total_cmp(x));
    l.into_iter().map(|x| x.max(0.0).sqrt()).collect()
}

/// Minimum-norm least squares `argmin ‖Xc − d‖` through the normal
/// equations, dropping directions with negligible eigenvalues.
pub fn least_squares(x: &Dense, d: &[f64]) -> Vec<f64> {
    let xt = transpose(x);
    let gram = matmul(&xt, x);
    let rhs: Vec<f64> = xt.iter().map(|r| r.iter().zip(d).map(|(a, b)| a * b).sum()).collect();
    let (lambda, v) = jacobi_eigen(&gram);
    let top = lambda.iter().cloned().fold(0.0, f64::max);
    let n = gram.len();
    let mut c = vec![0.0; n];
    for k in 0..n {
        if lambda[k] <= 1e-14 * top {
            continue;
        }
        let proj: f64 = (0..n).map(|i| v[i][k] * rhs[i]).sum::<f64>() / lambda[k];
        for i in 0..n {
            c[i] += proj * v[i][k];
        }
    }
    c
}

pub fn sum_sq_residual(x: &Dense, c: &[f64], d: &[f64]) -> f64 {
    x.iter()
        .zip(d)
        .map(|(row, di)| {
            let f: f64 = row.iter().zip(c).map(|(a, b)| a * b).sum();
            (f - di) * (f - di)
        })
        .sum()
}

/// Random bipartite graph with each possible edge present with probability
/// `density`, and at least one edge.
pub fn random_bipartite(rng: &mut ChaCha8Rng, left: usize, right: usize, density: f64) -> BipartiteGraph {
    let mut pairs = Vec::new();
    for l in 0..left {
        for r in 0..right {
            if rng.random::<f64>() < density {
                pairs.push((l, r));
            }
        }
    }
    if pairs.is_empty() {
        pairs.push((rng.random_range(0..left), rng.random_range(0..right)));
    }
    BipartiteGraph::from_pairs(left, right, pairs).unwrap()
}

/// A random graph with between 2 and `max` nodes on each side.
pub fn random_small_bipartite(rng: &mut ChaCha8Rng, max: usize) -> BipartiteGraph {
    let left = rng.random_range(2..=max);
    let right = rng.random_range(2..=max);
    let density = rng.random_range(0.15..0.6);
    random_bipartite(rng, left, right, density)
}

pub fn dense_biadjacency(g: &BipartiteGraph) -> Dense {
    let mut b = zeros(g.left_count(), g.right_count());
    for e in g.edges() {
        b[e.left][e.right] = 1.0;
    }
    b
}

/// Truncated SVD keeping every component.
pub fn full_model(g: &BipartiteGraph) -> SvdModel {
    let rank = g.left_count().min(g.right_count());
    truncated_svd(
        &g.biadjacency(),
        &SvdOptions {
            rank,
            ..SvdOptions::default()
        },
    )
    .unwrap()
}

pub fn complete_bipartite(m: usize, n: usize) -> UnipartiteGraph {
    UnipartiteGraph::new(m + n, (0..m).flat_map(|a| (0..n).map(move |b| (a, m + b)))).unwrap()
}

pub fn complete(n: usize) -> UnipartiteGraph {
    UnipartiteGraph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).unwrap()
}

/// Exhaustive average precision: for each relevant item, the share of
/// relevant items among the first `rank` positions.
pub fn brute_ap(ranked: &[usize], relevant: &[usize]) -> f64 {
    let mut total = 0.0;
    for &r in relevant {
        if let Some(pos) = ranked.iter().position(|&x| x == r) {
            let prefix = &ranked[..=pos];
            let hits = prefix.iter().filter(|x| relevant.contains(x)).count();
            total += hits as f64 / (pos + 1) as f64;
        }
    }
    total / relevant.len() as f64
}
