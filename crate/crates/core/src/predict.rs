//! Link prediction scores: spectral pseudokernels evaluated on a truncated
//! SVD, preferential attachment, and the common-neighbor count.

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Side};
use crate::svd::SvdModel;
use crate::transform::SpectralTransform;

/// A link prediction function between a left node and a right node.
pub trait Scorer: Sync {
    fn score(&self, left: usize, right: usize) -> f64;
}

impl<F: Fn(usize, usize) -> f64 + Sync> Scorer for F {
    fn score(&self, left: usize, right: usize) -> f64 {
        self(left, right)
    }
}

/// An odd spectral transformation bound to an SVD model.
///
/// `score(u, w) = Σ_i f(σ_i) Ũ[u,i] Ṽ[w,i]`, which for a full-rank model is
/// entry `(u, left_count + w)` of `F([0 B; Bᵀ 0])`: the `±σ` eigenvalue
/// pairs contribute `f(σ)/2` and `−f(−σ)/2`, which add up for odd `f`.
#[derive(Debug, Clone)]
pub struct SpectralScorer<'a> {
    model: &'a SvdModel,
    weights: Vec<f64>,
}

impl<'a> SpectralScorer<'a> {
    pub fn new(model: &'a SvdModel, transform: &SpectralTransform) -> Result<Self> {
        if !transform.family().is_odd() {
            return Err(Error::UnsupportedTransform {
                family: transform.family().name(),
            });
        }
        transform.check_domain(model.singular_values())?;
        let weights = transform.apply(model.singular_values())?;
        Ok(SpectralScorer { model, weights })
    }

    /// `f(σ_i)` for each retained singular value.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Scores of one left node against every right node.
    pub fn score_row(&self, left: usize) -> Vec<f64> {
        let scaled: Vec<f64> = self
            .model
            .left_row(left)
            .iter()
            .zip(&self.weights)
            .map(|(u, f)| u * f)
            .collect();
        (0..self.model.cols())
            .map(|w| {
                scaled
                    .iter()
                    .zip(self.model.right_row(w))
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

impl Scorer for SpectralScorer<'_> {
    fn score(&self, left: usize, right: usize) -> f64 {
        self.model
            .left_row(left)
            .iter()
            .zip(self.model.right_row(right))
            .zip(&self.weights)
            .map(|((u, v), f)| f * u * v)
            .sum()
    }
}

/// Pseudokernel score of the pair `(u, w)`.
pub fn score(model: &SvdModel, t: &SpectralTransform, u: usize, w: usize) -> Result<f64> {
    if u >= model.rows() {
        return Err(Error::IndexOutOfRange {
            what: "left partition",
            index: u,
            size: model.rows(),
        });
    }
    if w >= model.cols() {
        return Err(Error::IndexOutOfRange {
            what: "right partition",
            index: w,
            size: model.cols(),
        });
    }
    Ok(SpectralScorer::new(model, t)?.score(u, w))
}

/// Orders `(id, score)` pairs by descending score, ascending id on ties.
pub fn rank_candidates(scored: &mut [(usize, f64)]) {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// The `n` best-scoring right nodes for left node `u`, skipping `exclude`
/// (typically the training neighbors). Returns fewer than `n` when the
/// candidates run out.
pub fn top_n(
    scorer: &dyn Scorer,
    right_count: usize,
    u: usize,
    n: usize,
    exclude: &[usize],
) -> Vec<(usize, f64)> {
    let mut skip = vec![false; right_count];
    for &w in exclude {
        if w < right_count {
            skip[w] = true;
        }
    }
    let mut scored: Vec<(usize, f64)> = (0..right_count)
        .filter(|&w| !skip[w])
        .map(|w| (w, scorer.score(u, w)))
        .collect();
    rank_candidates(&mut scored);
    scored.truncate(n);
    scored
}

/// Preferential attachment `d(u) d(w) / (2|E|)`.
pub fn preferential_attachment(g: &BipartiteGraph, u: usize, w: usize) -> Result<f64> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let du = g.degree(Side::Left, u)? as f64;
    let dw = g.degree(Side::Right, w)? as f64;
    Ok(du * dw / (2.0 * g.edge_count() as f64))
}

/// Preferential attachment with degrees precomputed.
#[derive(Debug, Clone)]
pub struct PreferentialAttachment {
    left: Vec<f64>,
    right: Vec<f64>,
    norm: f64,
}

impl PreferentialAttachment {
    pub fn new(g: &BipartiteGraph) -> Result<Self> {
        if g.edge_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(PreferentialAttachment {
            left: g.left_degrees().into_iter().map(|d| d as f64).collect(),
            right: g.right_degrees().into_iter().map(|d| d as f64).collect(),
            norm: 2.0 * g.edge_count() as f64,
        })
    }
}

impl Scorer for PreferentialAttachment {
    fn score(&self, left: usize, right: usize) -> f64 {
        self.left[left] * self.right[right] / self.norm
    }
}

/// `|N(a) ∩ N(b)|` in the block adjacency graph, where indices
/// `0..left_count` are left nodes and the rest right nodes.
pub fn common_neighbors(g: &BipartiteGraph, a: usize, b: usize) -> Result<usize> {
    let neighbors = |x: usize| -> Result<Vec<usize>> {
        if x < g.left_count() {
            Ok(g
                .neighbors(Side::Left, x)?
                .iter()
                .map(|w| w + g.left_count())
                .collect())
        } else {
            Ok(g.neighbors(Side::Right, x - g.left_count())?.to_vec())
        }
    };
    let (na, nb) = (neighbors(a)?, neighbors(b)?);
    // both sorted
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < na.len() && j < nb.len() {
        match na[i].cmp(&nb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(count)
}
