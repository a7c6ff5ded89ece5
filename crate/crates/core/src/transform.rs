//! Spectral transformation families.
//!
//! A spectral transformation replaces each eigenvalue `λ` of the adjacency
//! matrix by `f(λ)`. In a bipartite graph only odd path lengths connect the
//! two partitions, so the useful transformations are odd functions. They take
//! negative values and are therefore pseudokernels rather than kernels. `Exp`
//! is the one even-dominated family and serves only as the reference shape
//! for bipartivity detection.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `|α σ|` above which `sinh`/`exp` are rejected (double-precision overflow
/// starts near 710).
pub const OVERFLOW_LIMIT: f64 = 700.0;

/// Relative tolerance under which two singular values count as tied for rank
/// reduction.
pub const TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    OddPolynomial,
    NonnegOddPolynomial,
    Sinh,
    RankReduction,
    OddNeumann,
    Exp,
}

impl Family {
    /// The bipartite link predictors, in report column order.
    pub const PREDICTORS: [Family; 5] = [
        Family::OddPolynomial,
        Family::NonnegOddPolynomial,
        Family::Sinh,
        Family::RankReduction,
        Family::OddNeumann,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::OddPolynomial => "poly",
            Family::NonnegOddPolynomial => "nnpoly",
            Family::Sinh => "sinh",
            Family::RankReduction => "reduction",
            Family::OddNeumann => "neumann",
            Family::Exp => "exp",
        }
    }

    pub fn is_odd(self) -> bool {
        self != Family::Exp
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "poly" => Family::OddPolynomial,
            "nnpoly" => Family::NonnegOddPolynomial,
            "sinh" => Family::Sinh,
            "reduction" => Family::RankReduction,
            "neumann" => Family::OddNeumann,
            "exp" => Family::Exp,
            other => return Err(Error::invalid(format!("unknown family {other:?}"))),
        })
    }
}

/// A parametrized spectral transformation `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralTransform {
    /// `β sinh(α σ)`, the odd part of the exponential kernel.
    Sinh { alpha: f64, beta: f64 },
    /// `β α σ / (1 − α² σ²)`, the odd part of the von Neumann kernel
    /// `(I − αA)⁻¹`.
    OddNeumann { alpha: f64, beta: f64 },
    /// `β σ` for the `rank` largest singular values (and any tied with the
    /// last of them), zero otherwise.
    RankReduction { rank: usize, beta: f64 },
    /// `Σ_j c_j σ^(2j+1)`.
    OddPolynomial { coeffs: Vec<f64> },
    /// As `OddPolynomial` with every `c_j ≥ 0`.
    NonnegOddPolynomial { coeffs: Vec<f64> },
    /// `β exp(α λ)`.
    Exp { alpha: f64, beta: f64 },
}

impl SpectralTransform {
    pub fn family(&self) -> Family {
        match self {
            SpectralTransform::Sinh { .. } => Family::Sinh,
            SpectralTransform::OddNeumann { .. } => Family::OddNeumann,
            SpectralTransform::RankReduction { .. } => Family::RankReduction,
            SpectralTransform::OddPolynomial { .. } => Family::OddPolynomial,
            SpectralTransform::NonnegOddPolynomial { .. } => Family::NonnegOddPolynomial,
            SpectralTransform::Exp { .. } => Family::Exp,
        }
    }

    /// The identity transformation `f(σ) = σ`.
    pub fn identity() -> Self {
        SpectralTransform::OddPolynomial { coeffs: vec![1.0] }
    }

    /// Checks parameter constraints that do not depend on a spectrum.
    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralTransform::Sinh { alpha, beta }
            | SpectralTransform::OddNeumann { alpha, beta }
            | SpectralTransform::Exp { alpha, beta } => {
                if !(alpha.is_finite() && *alpha > 0.0) || !beta.is_finite() {
                    return Err(Error::invalid(format!(
                        "{}: alpha must be positive and finite, beta finite",
                        self.family()
                    )));
                }
            }
            SpectralTransform::RankReduction { rank, beta } => {
                if *rank == 0 || !beta.is_finite() {
                    return Err(Error::invalid("reduction: rank must be at least 1"));
                }
            }
            SpectralTransform::OddPolynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("poly: coefficients must be finite"));
                }
            }
            SpectralTransform::NonnegOddPolynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                    return Err(Error::invalid(
                        "nnpoly: coefficients must be finite and nonnegative",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Checks that `f` is defined on every value of a spectrum (pole and
    /// overflow guards).
    pub fn check_domain(&self, spectrum: &[f64]) -> Result<()> {
        let peak = spectrum.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        match *self {
            SpectralTransform::OddNeumann { alpha, .. } if (alpha * peak).abs() >= 1.0 => {
                Err(Error::Pole(alpha * peak))
            }
            SpectralTransform::Sinh { alpha, .. } | SpectralTransform::Exp { alpha, .. }
                if (alpha * peak).abs() > OVERFLOW_LIMIT =>
            {
                Err(Error::Overflow(alpha * peak))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates `f(σ)`. Rank reduction needs the spectrum it is bound to,
    /// sorted by descending magnitude.
    pub fn eval(&self, sigma: f64, context: Option<&[f64]>) -> Result<f64> {
        match self {
            SpectralTransform::Sinh { alpha, beta } => {
                let x = alpha * sigma;
                if x.abs() > OVERFLOW_LIMIT {
                    return Err(Error::Overflow(x));
                }
                Ok(beta * x.sinh())
            }
            SpectralTransform::Exp { alpha, beta } => {
                let x = alpha * sigma;
                if x.abs() > OVERFLOW_LIMIT {
                    return Err(Error::Overflow(x));
                }
                Ok(beta * x.exp())
            }
            SpectralTransform::OddNeumann { alpha, beta } => {
                let x = alpha * sigma;
                if x.abs() >= 1.0 {
                    return Err(Error::Pole(x));
                }
                Ok(beta * x / (1.0 - x * x))
            }
            SpectralTransform::RankReduction { rank, beta } => {
                let context = context.ok_or_else(|| {
                    Error::invalid("rank reduction needs the sorted spectrum as context")
                })?;
                let threshold = reduction_threshold(*rank, context)?;
                Ok(if keeps(sigma, threshold) {
                    beta * sigma
                } else {
                    0.0
                })
            }
            SpectralTransform::OddPolynomial { coeffs }
            | SpectralTransform::NonnegOddPolynomial { coeffs } => Ok(odd_poly(coeffs, sigma)),
        }
    }

    /// `f` applied to every value of a spectrum sorted by descending
    /// magnitude.
    pub fn apply(&self, spectrum: &[f64]) -> Result<Vec<f64>> {
        spectrum
            .iter()
            .map(|&s| self.eval(s, Some(spectrum)))
            .collect()
    }

    /// Key-value text record, one `key=value` per line.
    pub fn to_record(&self) -> String {
        let join = |c: &[f64]| c.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let body = match self {
            SpectralTransform::Sinh { alpha, beta }
            | SpectralTransform::OddNeumann { alpha, beta }
            | SpectralTransform::Exp { alpha, beta } => format!("alpha={alpha}\nbeta={beta}\n"),
            SpectralTransform::RankReduction { rank, beta } => {
                format!("rank={rank}\nbeta={beta}\n")
            }
            SpectralTransform::OddPolynomial { coeffs }
            | SpectralTransform::NonnegOddPolynomial { coeffs } => {
                format!("coeffs={}\n", join(coeffs))
            }
        };
        format!("family={}\n{body}", self.family())
    }

    /// Parses a record written by [`to_record`](Self::to_record). Unknown
    /// keys are ignored so that fit reports can be read directly.
    pub fn from_record(text: &str) -> Result<Self> {
        let mut values = std::collections::HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got {line:?}")))?;
            values.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        let get = |key: &str| {
            values
                .get(key)
                .map(String::as_str)
                .ok_or_else(|| Error::parse(0, format!("transform record lacks {key}")))
        };
        let real = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| Error::parse(0, format!("bad value for {key}")))
        };
        let coeffs = || -> Result<Vec<f64>> {
            get("coeffs")?
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(0, "bad coefficient list"))
        };
        let transform = match get("family")?.parse::<Family>()? {
            Family::Sinh => SpectralTransform::Sinh {
                alpha: real("alpha")?,
                beta: real("beta")?,
            },
            Family::OddNeumann => SpectralTransform::OddNeumann {
                alpha: real("alpha")?,
                beta: real("beta")?,
            },
            Family::Exp => SpectralTransform::Exp {
                alpha: real("alpha")?,
                beta: real("beta")?,
            },
            Family::RankReduction => SpectralTransform::RankReduction {
                rank: get("rank")?
                    .parse()
                    .map_err(|_| Error::parse(0, "bad rank"))?,
                beta: real("beta")?,
            },
            Family::OddPolynomial => SpectralTransform::OddPolynomial { coeffs: coeffs()? },
            Family::NonnegOddPolynomial => {
                SpectralTransform::NonnegOddPolynomial { coeffs: coeffs()? }
            }
        };
        transform.validate()?;
        Ok(transform)
    }
}

impl fmt::Display for SpectralTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralTransform::Sinh { alpha, beta } => write!(f, "sinh(alpha={alpha}, beta={beta})"),
            SpectralTransform::OddNeumann { alpha, beta } => {
                write!(f, "neumann(alpha={alpha}, beta={beta})")
            }
            SpectralTransform::Exp { alpha, beta } => write!(f, "exp(alpha={alpha}, beta={beta})"),
            SpectralTransform::RankReduction { rank, beta } => {
                write!(f, "reduction(rank={rank}, beta={beta})")
            }
            SpectralTransform::OddPolynomial { coeffs } => write!(f, "poly{coeffs:?}"),
            SpectralTransform::NonnegOddPolynomial { coeffs } => write!(f, "nnpoly{coeffs:?}"),
        }
    }
}

/// `σ · Σ_j c_j (σ²)^j`; odd in `σ` bit for bit.
fn odd_poly(coeffs: &[f64], sigma: f64) -> f64 {
    let sq = sigma * sigma;
    sigma * coeffs.iter().rev().fold(0.0, |acc, c| acc * sq + c)
}

/// Magnitude of the `rank`-th largest value of the spectrum.
pub(crate) fn reduction_threshold(rank: usize, spectrum: &[f64]) -> Result<f64> {
    if rank == 0 {
        return Err(Error::invalid("reduction rank must be at least 1"));
    }
    let mut mags: Vec<f64> = spectrum.iter().map(|s| s.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags.get(rank - 1).copied().unwrap_or(0.0))
}

pub(crate) fn keeps(sigma: f64, threshold: f64) -> bool {
    sigma.abs() >= threshold * (1.0 - TIE_RTOL)
}

/// Coefficients of the odd powers `1, 3, 5, … ≤ max_power` in the Taylor
/// series of a transformation, i.e. the relative weight it gives to paths of
/// each length.
pub fn taylor_weights(t: &SpectralTransform, max_power: u32) -> Result<Vec<(u32, f64)>> {
    let powers = (1..=max_power).step_by(2);
    match *t {
        SpectralTransform::Sinh { alpha, beta } => Ok(powers
            .map(|p| {
                let factorial: f64 = (1..=p).map(f64::from).product();
                (p, beta * alpha.powi(p as i32) / factorial)
            })
            .collect()),
        SpectralTransform::OddNeumann { alpha, beta } => Ok(powers
            .map(|p| (p, beta * alpha.powi(p as i32)))
            .collect()),
        SpectralTransform::OddPolynomial { ref coeffs }
        | SpectralTransform::NonnegOddPolynomial { ref coeffs } => Ok(powers
            .map(|p| (p, coeffs.get((p as usize - 1) / 2).copied().unwrap_or(0.0)))
            .collect()),
        _ => Err(Error::UnsupportedTransform {
            family: t.family().name(),
        }),
    }
}
