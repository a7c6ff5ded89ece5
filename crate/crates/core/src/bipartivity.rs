//! Near-bipartivity detection for unipartite networks.
//!
//! The learned spectral transformation of a bipartite network is odd: edges
//! that appear later are negatively aligned with the eigenvectors of negative
//! eigenvalues. When a positive multiple of `sinh` describes the learned
//! curve better than a positive multiple of `exp`, the network is called
//! nearly bipartite.

use std::fmt::{self, Write as _};

use crate::eigen::{extremal_eigs, EigenOptions};
use crate::error::{Error, Result};
use crate::graph::UnipartiteGraph;
use crate::learn::{fit, FitOptions, FitReport, FitTargets};
use crate::transform::Family;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NearlyBipartite,
    NotBipartite,
}

impl Verdict {
    /// Nearly bipartite exactly when the sinh fit has the smaller residual.
    pub fn from_residuals(sinh: f64, exp: f64) -> Verdict {
        if residual_ratio(sinh, exp) < 1.0 {
            Verdict::NearlyBipartite
        } else {
            Verdict::NotBipartite
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::NearlyBipartite => "nearly-bipartite",
            Verdict::NotBipartite => "not-bipartite",
        })
    }
}

/// `residual(sinh) / residual(exp)`, with both floored at the smallest
/// positive double so the ratio stays finite and positive.
pub fn residual_ratio(sinh: f64, exp: f64) -> f64 {
    sinh.max(f64::MIN_POSITIVE) / exp.max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartivityConfig {
    pub top: usize,
    pub bottom: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub fit: FitOptions,
}

impl Default for BipartivityConfig {
    fn default() -> Self {
        BipartivityConfig {
            top: 16,
            bottom: 16,
            test_fraction: 0.3,
            seed: 1,
            tol: 1e-8,
            max_iter: 1000,
            fit: FitOptions {
                positive_beta: true,
                ..FitOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartivityReport {
    pub sinh_fit: FitReport,
    pub exp_fit: FitReport,
    pub ratio: f64,
    pub verdict: Verdict,
}

impl BipartivityReport {
    /// Eigenvalue/target pairs the fits were computed on.
    pub fn pairs(&self) -> &[(f64, f64)] {
        self.sinh_fit.targets.pairs()
    }

    /// `lambda,target,sinh_fit,exp_fit` rows.
    pub fn curve_csv(&self) -> Result<String> {
        let mut out = String::from("lambda,target,sinh_fit,exp_fit\n");
        for &(x, d) in self.pairs() {
            let s = self.sinh_fit.transform.eval(x, None)?;
            let e = self.exp_fit.transform.eval(x, None)?;
            let _ = writeln!(out, "{x},{d},{s},{e}");
        }
        Ok(out)
    }
}

/// Splits the edges, takes both ends of the training spectrum, measures the
/// withheld edges along each eigenvector (`d_i = u_iᵀ A_test u_i`) and
/// compares a sinh fit against an exp fit.
pub fn assess(g: &UnipartiteGraph, config: &BipartivityConfig) -> Result<BipartivityReport> {
    let (train, test) = g.split(config.test_fraction, config.seed)?;
    let n = g.node_count();
    let (mut top, mut bottom) = (config.top, config.bottom);
    if top + bottom > n {
        bottom = bottom.min(n / 2);
        top = top.min(n - bottom);
    }
    if top + bottom == 0 {
        return Err(Error::invalid("no eigenpairs requested"));
    }
    let eigen = extremal_eigs(
        &train.adjacency(),
        &EigenOptions {
            top,
            bottom,
            tol: config.tol,
            max_iter: config.max_iter,
            seed: config.seed,
        },
    )?;
    let a_test = test.adjacency();
    let mut pairs = Vec::with_capacity(eigen.len());
    for (i, &lambda) in eigen.eigenvalues().iter().enumerate() {
        let u = eigen.vector(i);
        let au = a_test.spmv(u)?;
        let d: f64 = u.iter().zip(&au).map(|(a, b)| a * b).sum();
        pairs.push((lambda, d));
    }
    let targets = FitTargets::new(pairs)?;
    let fit_options = FitOptions {
        positive_beta: true,
        ..config.fit
    };
    let sinh_fit = fit(Family::Sinh, &targets, &fit_options)?;
    let exp_fit = fit(Family::Exp, &targets, &fit_options)?;
    let ratio = residual_ratio(sinh_fit.residual, exp_fit.residual);
    let verdict = Verdict::from_residuals(sinh_fit.residual, exp_fit.residual);
    Ok(BipartivityReport {
        sinh_fit,
        exp_fit,
        ratio,
        verdict,
    })
}
