//! Learning transformation parameters by one-dimensional curve fitting.
//!
//! Each retained singular triplet `(σ_i, ũ_i, ṽ_i)` of a training split yields
//! a target `d_i = ũ_iᵀ (B_train + B_holdout) ṽ_i`, the total graph measured
//! in the latent direction of the training model. A transformation family is
//! then fit by least squares on the points `(σ_i, d_i)`. Because the families
//! are odd, the negative half of the spectrum `−σ_i` is fitted implicitly.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::nnls::nnls;
use crate::search::minimize_log;
use crate::sparse::SparseMatrix;
use crate::svd::SvdModel;
use crate::transform::{keeps, Family, SpectralTransform, OVERFLOW_LIMIT};

/// Points `(x_i, d_i)` to fit, sorted by descending `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTargets {
    pairs: Vec<(f64, f64)>,
    source_rank: usize,
}

impl FitTargets {
    pub fn new(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.iter().any(|(x, d)| !x.is_finite() || !d.is_finite()) {
            return Err(Error::invalid("fit targets must be finite"));
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let source_rank = pairs.len();
        Ok(FitTargets { pairs, source_rank })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn xs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    fn ds(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    /// Reads `x,d` rows (a header line and `%`/`#` comments are skipped).
    pub fn read_csv(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split([',', '\t']).map(str::trim);
            let (Some(x), Some(d)) = (cols.next(), cols.next()) else {
                return Err(Error::parse(i + 1, "expected two columns"));
            };
            match (x.parse::<f64>(), d.parse::<f64>()) {
                (Ok(x), Ok(d)) => pairs.push((x, d)),
                _ if pairs.is_empty() && i == 0 => continue,
                _ => return Err(Error::parse(i + 1, format!("bad number in {line:?}"))),
            }
        }
        Self::new(pairs)
    }
}

/// Targets `d_i = σ_i + ũ_iᵀ B_holdout ṽ_i` for each triplet of a model
/// computed on the training part, where `ũ_iᵀ B_train ṽ_i = σ_i`.
pub fn build_targets(train_model: &SvdModel, holdout: &SparseMatrix) -> Result<FitTargets> {
    if holdout.rows() != train_model.rows() || holdout.cols() != train_model.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", train_model.rows(), train_model.cols()),
            actual: format!("{}x{}", holdout.rows(), holdout.cols()),
        });
    }
    let mut pairs = Vec::with_capacity(train_model.rank());
    for (i, &sigma) in train_model.singular_values().iter().enumerate() {
        let hv = holdout.spmv(&train_model.right_vector(i))?;
        let u = train_model.left_vector(i);
        let projected: f64 = u.iter().zip(&hv).map(|(a, b)| a * b).sum();
        pairs.push((sigma, sigma + projected));
    }
    FitTargets::new(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Log-spaced α candidates scanned before golden-section refinement.
    pub grid_points: usize,
    /// Relative bracket width at which refinement stops.
    pub golden_rtol: f64,
    /// Lower α bound; defaults to `1e-4 / max|x|`.
    pub alpha_min: Option<f64>,
    /// Upper α bound; defaults to `300 / max|x|` for sinh and exp.
    pub alpha_max: Option<f64>,
    /// Odd von Neumann keeps `α max|x| ≤ 1 − ε`.
    pub neumann_eps: f64,
    /// Highest polynomial index `J` (powers `1, 3, …, 2J + 1`).
    pub poly_degree: usize,
    /// Constrain the scale β of the one-parameter families to be ≥ 0.
    pub positive_beta: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            grid_points: 200,
            golden_rtol: 1e-6,
            alpha_min: None,
            alpha_max: None,
            neumann_eps: 1e-3,
            poly_degree: 3,
            positive_beta: false,
        }
    }
}

/// A fitted transformation together with its data.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub family: Family,
    pub transform: SpectralTransform,
    /// `Σ_i (f(x_i) − d_i)²`
    pub residual: f64,
    pub targets: FitTargets,
}

impl FitReport {
    fn new(transform: SpectralTransform, targets: &FitTargets) -> Result<Self> {
        let residual = residual(&transform, targets)?;
        Ok(FitReport {
            family: transform.family(),
            transform,
            residual,
            targets: targets.clone(),
        })
    }

    /// Transform record plus fit statistics.
    pub fn to_record(&self) -> String {
        format!(
            "{}residual={}\npairs={}\nsource_rank={}\n",
            self.transform.to_record(),
            self.residual,
            self.targets.len(),
            self.targets.source_rank()
        )
    }

    /// `sigma,target,fitted` rows for plotting.
    pub fn curve_csv(&self) -> Result<String> {
        let xs = self.targets.xs();
        let mut out = String::from("sigma,target,fitted\n");
        for &(x, d) in self.targets.pairs() {
            let f = self.transform.eval(x, Some(&xs))?;
            let _ = writeln!(out, "{x},{d},{f}");
        }
        Ok(out)
    }
}

/// `Σ_i (f(x_i) − d_i)²` of a transformation on a set of targets.
pub fn residual(t: &SpectralTransform, targets: &FitTargets) -> Result<f64> {
    let xs = targets.xs();
    targets
        .pairs()
        .iter()
        .map(|&(x, d)| t.eval(x, Some(&xs)).map(|f| (f - d) * (f - d)))
        .sum()
}

/// Least-squares fit of one family.
pub fn fit(family: Family, targets: &FitTargets, options: &FitOptions) -> Result<FitReport> {
    let xs = targets.xs();
    let ds = targets.ds();
    let peak = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return Err(Error::Degenerate("all singular values are zero".into()));
    }
    let needed = match family {
        Family::OddPolynomial | Family::NonnegOddPolynomial => options.poly_degree + 1,
        Family::RankReduction => 1,
        _ => 2,
    };
    if targets.len() < needed {
        return Err(Error::InsufficientData(format!(
            "{family} needs {needed} target pairs, got {}",
            targets.len()
        )));
    }

    let transform = match family {
        Family::Sinh | Family::Exp => {
            let lo = options.alpha_min.unwrap_or(1e-4 / peak);
            let hi = options
                .alpha_max
                .unwrap_or(300.0 / peak)
                .min(OVERFLOW_LIMIT / peak);
            let shape = |alpha: f64, x: f64| {
                if family == Family::Sinh {
                    (alpha * x).sinh()
                } else {
                    (alpha * x).exp()
                }
            };
            let (alpha, beta) = fit_scaled(lo, hi, &xs, &ds, options, shape)?;
            if family == Family::Sinh {
                SpectralTransform::Sinh { alpha, beta }
            } else {
                SpectralTransform::Exp { alpha, beta }
            }
        }
        Family::OddNeumann => {
            let hi = options
                .alpha_max
                .unwrap_or(f64::INFINITY)
                .min((1.0 - options.neumann_eps) / peak);
            let lo = options.alpha_min.unwrap_or(1e-4 / peak).min(hi);
            let shape = |alpha: f64, x: f64| {
                let ax = alpha * x;
                ax / (1.0 - ax * ax)
            };
            let (alpha, beta) = fit_scaled(lo, hi, &xs, &ds, options, shape)?;
            SpectralTransform::OddNeumann { alpha, beta }
        }
        Family::RankReduction => {
            let mut best: Option<(f64, usize, f64)> = None;
            for rank in 1..=xs.len() {
                let threshold = xs[rank - 1].abs();
                let g: Vec<f64> = xs
                    .iter()
                    .map(|&x| if keeps(x, threshold) { x } else { 0.0 })
                    .collect();
                let beta = optimal_scale(&g, &ds, options.positive_beta);
                let r = sse(&g, beta, &ds);
                if best.is_none_or(|(br, _, _)| r < br) {
                    best = Some((r, rank, beta));
                }
            }
            let (_, rank, beta) = best.expect("at least one pair");
            SpectralTransform::RankReduction { rank, beta }
        }
        Family::OddPolynomial | Family::NonnegOddPolynomial => {
            let powers = options.poly_degree + 1;
            // columns of (x / peak)^(2j+1) keep the design well conditioned
            let design = DMatrix::from_fn(xs.len(), powers, |i, j| {
                (xs[i] / peak).powi(2 * j as i32 + 1)
            });
            let rhs = DVector::from_vec(ds.clone());
            let scaled = if family == Family::OddPolynomial {
                let svd = design.svd(true, true);
                let eps = 1e-13 * svd.singular_values.max();
                svd.solve(&rhs, eps).map_err(|e| Error::Degenerate(e.into()))?
            } else {
                nnls(&design, &rhs)?
            };
            let coeffs: Vec<f64> = (0..powers)
                .map(|j| scaled[j] / peak.powi(2 * j as i32 + 1))
                .collect();
            if family == Family::OddPolynomial {
                SpectralTransform::OddPolynomial { coeffs }
            } else {
                SpectralTransform::NonnegOddPolynomial {
                    coeffs: coeffs.into_iter().map(|c| c.max(0.0)).collect(),
                }
            }
        }
    };
    FitReport::new(transform, targets)
}

/// Fits `β g(α, x)` by scanning α with β in closed form. `g` values are
/// normalized by their largest magnitude so that large α cannot overflow the
/// sums.
fn fit_scaled(
    lo: f64,
    hi: f64,
    xs: &[f64],
    ds: &[f64],
    options: &FitOptions,
    shape: impl Fn(f64, f64) -> f64,
) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::invalid(format!("empty alpha range [{lo}, {hi}]")));
    }
    let scaled = |alpha: f64| -> (Vec<f64>, f64) {
        let g: Vec<f64> = xs.iter().map(|&x| shape(alpha, x)).collect();
        let top = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if top > 0.0 && top.is_finite() {
            (g.iter().map(|v| v / top).collect(), top)
        } else {
            (g, 1.0)
        }
    };
    let objective = |alpha: f64| {
        let (g, _) = scaled(alpha);
        let b = optimal_scale(&g, ds, options.positive_beta);
        sse(&g, b, ds)
    };
    let points = options.grid_points.max(2);
    let best = if hi == lo {
        crate::search::Minimum {
            x: lo,
            value: objective(lo),
        }
    } else {
        minimize_log(lo, hi, points, options.golden_rtol, objective)
    };
    let (g, top) = scaled(best.x);
    let beta = optimal_scale(&g, ds, options.positive_beta) / top;
    Ok((best.x, beta))
}

/// `β = Σ g d / Σ g²`, clamped at zero when a positive scale is required.
pub fn optimal_scale(g: &[f64], d: &[f64], positive: bool) -> f64 {
    let gg: f64 = g.iter().map(|v| v * v).sum();
    if gg == 0.0 {
        return 0.0;
    }
    let beta = g.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / gg;
    if positive {
        beta.max(0.0)
    } else {
        beta
    }
}

fn sse(g: &[f64], beta: f64, d: &[f64]) -> f64 {
    g.iter()
        .zip(d)
        .map(|(gi, di)| (beta * gi - di).powi(2))
        .sum()
}

/// Outcome of fitting one family in a batch.
#[derive(Debug, Clone, PartialEq)]
pub enum FitOutcome {
    Fitted(FitReport),
    Skipped { family: Family, reason: String },
}

impl FitOutcome {
    pub fn family(&self) -> Family {
        match self {
            FitOutcome::Fitted(r) => r.family,
            FitOutcome::Skipped { family, .. } => *family,
        }
    }

    pub fn report(&self) -> Option<&FitReport> {
        match self {
            FitOutcome::Fitted(r) => Some(r),
            FitOutcome::Skipped { .. } => None,
        }
    }
}

/// Fits every family, best residual first (ties by family name); failed
/// families come last with the reason.
pub fn fit_all(families: &[Family], targets: &FitTargets, options: &FitOptions) -> Vec<FitOutcome> {
    let mut outcomes: Vec<FitOutcome> = families
        .iter()
        .map(|&family| match fit(family, targets, options) {
            Ok(report) => FitOutcome::Fitted(report),
            Err(e) => FitOutcome::Skipped {
                family,
                reason: e.to_string(),
            },
        })
        .collect();
    outcomes.sort_by(|a, b| {
        let key = |o: &FitOutcome| match o {
            FitOutcome::Fitted(r) => (0, r.residual),
            FitOutcome::Skipped { .. } => (1, 0.0),
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(a.family().name().cmp(b.family().name()))
    });
    outcomes
}
