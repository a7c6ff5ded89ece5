//! Holdout evaluation by mean average precision.
//!
//! The protocol withholds a fraction of the edges (the newest ones when
//! timestamps exist), learns each transformation on a second split of the
//! training edges, and ranks for every user the items it has no training edge
//! with.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{split_edges, BipartiteGraph, Side};
use crate::learn::{build_targets, fit, FitOptions};
use crate::predict::{rank_candidates, PreferentialAttachment, Scorer, SpectralScorer};
use crate::svd::{truncated_svd, SvdOptions};
use crate::transform::{Family, SpectralTransform};

/// Average precision of a ranking: the mean over relevant items of the
/// precision at their rank. Relevant items missing from the ranking count
/// as zero.
pub fn average_precision(ranked: &[usize], relevant: &[usize]) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::invalid("average precision needs a relevant item"));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (pos, id) in ranked.iter().enumerate() {
        if relevant.contains(id) {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    Ok(sum / relevant.len() as f64)
}

/// A prediction method in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Spectral(Family),
    PreferentialAttachment,
}

impl Method {
    /// Table column order: the five odd families, then preferential
    /// attachment.
    pub fn all() -> Vec<Method> {
        Family::PREDICTORS
            .iter()
            .map(|&f| Method::Spectral(f))
            .chain([Method::PreferentialAttachment])
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral(f) => f.name(),
            Method::PreferentialAttachment => "pref",
        }
    }

    /// Parses a comma-separated method list.
    pub fn parse_list(text: &str) -> Result<Vec<Method>> {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse())
            .collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pref" => Ok(Method::PreferentialAttachment),
            other => {
                let family: Family = other.parse()?;
                if !family.is_odd() {
                    return Err(Error::UnsupportedTransform {
                        family: family.name(),
                    });
                }
                Ok(Method::Spectral(family))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub test_fraction: f64,
    pub inner_fraction: f64,
    pub seed: u64,
    pub rank: usize,
    /// Rank at most this many candidates per user (all test items plus a
    /// seeded uniform sample of the rest).
    pub candidate_cap: Option<usize>,
    pub methods: Vec<Method>,
    /// `None`: split by time whenever the graph has timestamps.
    pub by_time: Option<bool>,
    /// Partition whose nodes act as users.
    pub users: Side,
    pub svd_tol: f64,
    pub svd_max_iter: usize,
    pub fit: FitOptions,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            test_fraction: 0.3,
            inner_fraction: 0.3,
            seed: 1,
            rank: 32,
            candidate_cap: None,
            methods: Method::all(),
            by_time: None,
            users: Side::Left,
            svd_tol: 1e-8,
            svd_max_iter: 1000,
            fit: FitOptions::default(),
        }
    }
}

impl EvalConfig {
    fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("test_fraction", self.test_fraction),
            ("inner_fraction", self.inner_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1), got {f}")));
            }
        }
        if self.rank == 0 {
            return Err(Error::invalid("rank must be at least 1"));
        }
        Ok(())
    }

    fn svd_options(&self, rank: usize) -> SvdOptions {
        SvdOptions {
            rank,
            tol: self.svd_tol,
            max_iter: self.svd_max_iter,
            seed: self.seed,
        }
    }
}

/// MAP of one method with the user accounting behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodScore {
    pub map: f64,
    pub users_evaluated: usize,
    pub users_skipped: usize,
}

/// Ranks, for every user with at least one test edge, all items it has no
/// training edge with, and averages the per-user average precision in user
/// order.
pub fn evaluate_method(
    train: &BipartiteGraph,
    test_edges: &[(usize, usize)],
    scorer: &dyn Scorer,
    config: &EvalConfig,
) -> Result<MethodScore> {
    let (user_count, item_count) = match config.users {
        Side::Left => (train.left_count(), train.right_count()),
        Side::Right => (train.right_count(), train.left_count()),
    };
    let mut relevant: Vec<Vec<usize>> = vec![Vec::new(); user_count];
    for &(l, r) in test_edges {
        let (user, item) = match config.users {
            Side::Left => (l, r),
            Side::Right => (r, l),
        };
        if user >= user_count || item >= item_count {
            return Err(Error::IndexOutOfRange {
                what: "test edge endpoint",
                index: user.max(item),
                size: user_count.max(item_count),
            });
        }
        relevant[user].push(item);
    }
    let users: Vec<usize> = (0..user_count)
        .filter(|&u| !relevant[u].is_empty())
        .collect();
    if users.is_empty() {
        return Err(Error::invalid("no user has a test edge"));
    }

    let per_user: Vec<Option<f64>> = users
        .par_iter()
        .map(|&user| -> Result<Option<f64>> {
            let known = train.neighbors(config.users, user)?;
            let mut rel = relevant[user].clone();
            rel.sort_unstable();
            rel.dedup();
            rel.retain(|i| known.binary_search(i).is_err());
            let mut candidates: Vec<usize> = (0..item_count)
                .filter(|i| known.binary_search(i).is_err())
                .collect();
            if candidates.is_empty() || rel.is_empty() {
                return Ok(None);
            }
            if let Some(cap) = config.candidate_cap {
                if candidates.len() > cap {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        config.seed ^ (user as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                    );
                    let mut others: Vec<usize> = candidates
                        .iter()
                        .copied()
                        .filter(|i| rel.binary_search(i).is_err())
                        .collect();
                    others.shuffle(&mut rng);
                    others.truncate(cap.saturating_sub(rel.len()));
                    candidates = rel.iter().copied().chain(others).collect();
                }
            }
            let mut scored: Vec<(usize, f64)> = candidates
                .into_iter()
                .map(|item| {
                    let s = match config.users {
                        Side::Left => scorer.score(user, item),
                        Side::Right => scorer.score(item, user),
                    };
                    (item, s)
                })
                .collect();
            rank_candidates(&mut scored);
            let ranked: Vec<usize> = scored.into_iter().map(|p| p.0).collect();
            average_precision(&ranked, &rel).map(Some)
        })
        .collect::<Result<_>>()?;

    let evaluated: Vec<f64> = per_user.iter().flatten().copied().collect();
    let skipped = per_user.len() - evaluated.len();
    if evaluated.is_empty() {
        return Err(Error::invalid("every test user was skipped"));
    }
    Ok(MethodScore {
        map: evaluated.iter().sum::<f64>() / evaluated.len() as f64,
        users_evaluated: evaluated.len(),
        users_skipped: skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub outcome: std::result::Result<MethodScore, String>,
    /// The learned transformation, for spectral methods.
    pub transform: Option<SpectralTransform>,
    /// Residual of the curve fit on the inner split.
    pub fit_residual: Option<f64>,
    pub note: Option<String>,
}

impl MethodResult {
    pub fn map(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|s| s.map)
    }
}

/// One row of the results table.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub dataset: String,
    pub nodes: usize,
    pub edges: usize,
    pub rank: usize,
    pub seed: u64,
    pub by_time: bool,
    pub candidate_cap: Option<usize>,
    pub results: Vec<MethodResult>,
    pub timing: Vec<(String, Duration)>,
}

impl PartialEq for EvalReport {
    /// Timing is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.dataset == other.dataset
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.rank == other.rank
            && self.seed == other.seed
            && self.by_time == other.by_time
            && self.candidate_cap == other.candidate_cap
            && self.results == other.results
    }
}

impl EvalReport {
    pub fn map_of(&self, method: Method) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.method == method)
            .and_then(MethodResult::map)
    }

    pub fn csv_header(methods: &[Method]) -> String {
        let mut h = String::from("dataset,nodes,edges");
        for m in methods {
            let _ = write!(h, ",{m}");
        }
        h
    }

    /// CSV row; failed methods leave an empty cell.
    pub fn csv_row(&self) -> String {
        let mut row = format!("{},{},{}", self.dataset, self.nodes, self.edges);
        for r in &self.results {
            match r.map() {
                Some(map) => {
                    let _ = write!(row, ",{map}");
                }
                None => row.push(','),
            }
        }
        row
    }

    pub fn to_csv(&self) -> String {
        let methods: Vec<Method> = self.results.iter().map(|r| r.method).collect();
        format!("{}\n{}\n", Self::csv_header(&methods), self.csv_row())
    }

    /// Aligned text table of several reports sharing the same methods.
    pub fn table(reports: &[EvalReport]) -> String {
        let Some(first) = reports.first() else {
            return String::new();
        };
        let mut header: Vec<String> = vec!["dataset".into(), "nodes".into(), "edges".into()];
        header.extend(first.results.iter().map(|r| r.method.to_string()));
        let mut rows = vec![header];
        for rep in reports {
            let mut row = vec![
                rep.dataset.clone(),
                rep.nodes.to_string(),
                rep.edges.to_string(),
            ];
            row.extend(
                rep.results
                    .iter()
                    .map(|r| r.map().map_or_else(|| "-".to_string(), sig6)),
            );
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r.get(c).map_or(0, String::len)).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<w$}", w = widths[c])
                    } else {
                        format!("{cell:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// Per-method details: learned parameters, fit residuals and notes.
    pub fn details(&self) -> String {
        let mut out = format!(
            "dataset {} (rank {}, seed {}, by_time {}, candidate_cap {})\n",
            self.dataset,
            self.rank,
            self.seed,
            self.by_time,
            self.candidate_cap
                .map_or_else(|| "none".to_string(), |c| c.to_string())
        );
        for r in &self.results {
            let _ = write!(out, "  {:<10}", r.method.name());
            match &r.outcome {
                Ok(s) => {
                    let _ = write!(
                        out,
                        " map={} users={} skipped={}",
                        sig6(s.map),
                        s.users_evaluated,
                        s.users_skipped
                    );
                }
                Err(e) => {
                    let _ = write!(out, " failed: {e}");
                }
            }
            if let Some(t) = &r.transform {
                let _ = write!(out, " {t}");
            }
            if let Some(res) = r.fit_residual {
                let _ = write!(out, " fit_residual={}", sig6(res));
            }
            if let Some(n) = &r.note {
                let _ = write!(out, " ({n})");
            }
            out.push('\n');
        }
        out
    }
}

/// Formats a float with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Runs the full protocol on one graph: outer split, inner split, truncated
/// SVD of the inner training graph, curve fits, then scoring with a model of
/// the whole training graph using the learned (not re-fitted) parameters.
pub fn run_experiment(graph: &BipartiteGraph, dataset: &str, config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let mut timing = Vec::new();
    let by_time = config.by_time.unwrap_or_else(|| graph.has_timestamps());
    let rank = config
        .rank
        .min(graph.left_count())
        .min(graph.right_count());

    let clock = Instant::now();
    let outer = split_edges(graph, config.test_fraction, config.seed, by_time)?;
    let inner = split_edges(
        &outer.train,
        config.inner_fraction,
        config.seed.wrapping_add(1),
        by_time,
    )?;
    timing.push(("split".to_string(), clock.elapsed()));

    let wants_spectral = config
        .methods
        .iter()
        .any(|m| matches!(m, Method::Spectral(_)));
    let mut fitted: HashMap<Family, std::result::Result<(SpectralTransform, f64), String>> =
        HashMap::new();
    let mut full_model = None;
    if wants_spectral {
        let clock = Instant::now();
        let inner_model = truncated_svd(&inner.train.biadjacency(), &config.svd_options(rank))?;
        let targets = build_targets(&inner_model, &inner.test_graph().biadjacency())?;
        for m in &config.methods {
            if let Method::Spectral(family) = *m {
                let result = fit(family, &targets, &config.fit)
                    .map(|r| (r.transform, r.residual))
                    .map_err(|e| e.to_string());
                fitted.insert(family, result);
            }
        }
        timing.push(("learn".to_string(), clock.elapsed()));
        let clock = Instant::now();
        full_model = Some(truncated_svd(
            &outer.train.biadjacency(),
            &config.svd_options(rank),
        )?);
        timing.push(("decompose".to_string(), clock.elapsed()));
    }

    let clock = Instant::now();
    let mut results = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let result = match method {
            Method::PreferentialAttachment => {
                let outcome = PreferentialAttachment::new(&outer.train)
                    .and_then(|pa| evaluate_method(&outer.train, &outer.test_edges, &pa, config))
                    .map_err(|e| e.to_string());
                MethodResult {
                    method,
                    outcome,
                    transform: None,
                    fit_residual: None,
                    note: None,
                }
            }
            Method::Spectral(family) => {
                let model = full_model.as_ref().expect("decomposed above");
                match &fitted[&family] {
                    Err(e) => MethodResult {
                        method,
                        outcome: Err(format!("fit failed: {e}")),
                        transform: None,
                        fit_residual: None,
                        note: None,
                    },
                    Ok((transform, residual)) => {
                        let (transform, note) =
                            adapt_to_spectrum(transform.clone(), model.singular_values());
                        let outcome = SpectralScorer::new(model, &transform)
                            .and_then(|s| {
                                evaluate_method(&outer.train, &outer.test_edges, &s, config)
                            })
                            .map_err(|e| e.to_string());
                        MethodResult {
                            method,
                            outcome,
                            transform: Some(transform),
                            fit_residual: Some(*residual),
                            note,
                        }
                    }
                }
            }
        };
        results.push(result);
    }
    timing.push(("evaluate".to_string(), clock.elapsed()));

    Ok(EvalReport {
        dataset: dataset.to_string(),
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        rank,
        seed: config.seed,
        by_time,
        candidate_cap: config.candidate_cap,
        results,
        timing,
    })
}

/// The full training graph has a larger spectrum than the inner training
/// graph, which can push a learned odd von Neumann transformation past its
/// pole. Such an α is pulled back to the pole margin used in fitting.
fn adapt_to_spectrum(t: SpectralTransform, spectrum: &[f64]) -> (SpectralTransform, Option<String>) {
    let peak = spectrum.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if let SpectralTransform::OddNeumann { alpha, beta } = t {
        let limit = (1.0 - FitOptions::default().neumann_eps) / peak;
        if alpha > limit {
            let note = format!("alpha {alpha} clamped to {limit} below the pole");
            return (
                SpectralTransform::OddNeumann {
                    alpha: limit,
                    beta,
                },
                Some(note),
            );
        }
    }
    (t, None)
}
