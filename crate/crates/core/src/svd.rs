//! Truncated singular value decomposition of sparse matrices by
//! Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
//!
//! For a bipartite graph with biadjacency matrix `B = Ũ Σ Ṽᵀ`, the block
//! adjacency matrix `[0 B; Bᵀ 0]` has eigenvectors `(ũ, ±ṽ)/√2` with
//! eigenvalues `±σ`, so the SVD of `B` carries its whole spectrum at half the
//! size.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::krylov::{axpy, fresh_direction, norm, orthogonalize, scale};
use crate::sparse::SparseMatrix;

/// Singular values below this fraction of the largest are set to zero.
pub const ZERO_CUTOFF: f64 = 1e-10;

/// Krylov steps between two convergence checks.
const CHECK_EVERY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    pub rank: usize,
    /// Residual tolerance relative to the largest singular value.
    pub tol: f64,
    /// Maximum Krylov subspace dimension.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            rank: 32,
            tol: 1e-8,
            max_iter: 1000,
            seed: 1,
        }
    }
}

/// Rank-k factors `B ≈ Ũ Σ Ṽᵀ`, stored row-major so that the factor row of
/// one node is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdModel {
    rows: usize,
    cols: usize,
    rank: usize,
    seed: u64,
    sigma: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    max_residual: f64,
    iterations: usize,
}

impl SvdModel {
    /// Assembles a model from row-major factors. Singular values must be
    /// nonincreasing and nonnegative.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        sigma: Vec<f64>,
        left: Vec<f64>,
        right: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let rank = sigma.len();
        if left.len() != rows * rank || right.len() != cols * rank {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows}x{rank} and {cols}x{rank} factors"),
                actual: format!("{} and {} entries", left.len(), right.len()),
            });
        }
        if sigma.iter().any(|s| s.is_nan() || *s < 0.0) || sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                "singular values must be nonnegative and nonincreasing",
            ));
        }
        Ok(SvdModel {
            rows,
            cols,
            rank,
            seed,
            sigma,
            left,
            right,
            max_residual: 0.0,
            iterations: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    /// Largest triplet residual relative to `σ_1` at convergence.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Krylov steps taken.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Row `u` of `Ũ`.
    pub fn left_row(&self, u: usize) -> &[f64] {
        &self.left[u * self.rank..(u + 1) * self.rank]
    }

    /// Row `w` of `Ṽ`.
    pub fn right_row(&self, w: usize) -> &[f64] {
        &self.right[w * self.rank..(w + 1) * self.rank]
    }

    /// Column `i` of `Ũ`.
    pub fn left_vector(&self, i: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.left[r * self.rank + i]).collect()
    }

    /// Column `i` of `Ṽ`.
    pub fn right_vector(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|r| self.right[r * self.rank + i]).collect()
    }

    /// Writes the model as tab-separated text: a header of key/value pairs,
    /// then Σ, then the rows of Ũ and Ṽ. Values are printed in shortest
    /// round-trip form.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "% bilink svd model")?;
        writeln!(
            out,
            "rows\t{}\tcols\t{}\trank\t{}\tseed\t{}\tmax_residual\t{}\titerations\t{}",
            self.rows, self.cols, self.rank, self.seed, self.max_residual, self.iterations
        )?;
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("\t")
        };
        writeln!(out, "{}", join(&self.sigma))?;
        for u in 0..self.rows {
            writeln!(out, "{}", join(self.left_row(u)))?;
        }
        for w in 0..self.cols {
            writeln!(out, "{}", join(self.right_row(w)))?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.starts_with('%')));
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(Error::parse(0, format!("model file ends before {what}"))),
            }
        };
        let (line_no, header) = next_line("header")?;
        let tokens: Vec<&str> = header.split('\t').collect();
        let field = |key: &str| -> Result<&str> {
            tokens
                .chunks(2)
                .find(|kv| kv[0] == key && kv.len() == 2)
                .map(|kv| kv[1])
                .ok_or_else(|| Error::parse(line_no, format!("header lacks {key}")))
        };
        let int = |key: &str| -> Result<u64> {
            field(key)?
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad {key}")))
        };
        let rows = int("rows")? as usize;
        let cols = int("cols")? as usize;
        let rank = int("rank")? as usize;
        let seed = int("seed")?;
        let max_residual = field("max_residual")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0.0);
        let iterations = int("iterations").unwrap_or(0) as usize;

        let mut row_values = |what: &str| -> Result<Vec<f64>> {
            let (no, line) = next_line(what)?;
            let values: Vec<f64> = line
                .split('\t')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(no, format!("bad number in {what}")))?;
            if values.len() != rank {
                return Err(Error::parse(
                    no,
                    format!("{what} has {} values, expected {rank}", values.len()),
                ));
            }
            Ok(values)
        };
        let sigma = row_values("singular values")?;
        let mut left = Vec::with_capacity(rows * rank);
        for _ in 0..rows {
            left.extend(row_values("left factor row")?);
        }
        let mut right = Vec::with_capacity(cols * rank);
        for _ in 0..cols {
            right.extend(row_values("right factor row")?);
        }
        let mut model = SvdModel::from_parts(rows, cols, sigma, left, right, seed)?;
        model.max_residual = max_residual;
        model.iterations = iterations;
        Ok(model)
    }
}

/// Top-`rank` singular triplets of `matrix`.
///
/// Every returned triplet satisfies `‖B ṽ_i − σ_i ũ_i‖ ≤ tol·σ_1` and
/// `‖Bᵀ ũ_i − σ_i ṽ_i‖ ≤ tol·σ_1`. Runs are reproducible for a fixed seed.
pub fn truncated_svd(matrix: &SparseMatrix, options: &SvdOptions) -> Result<SvdModel> {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let rank = options.rank;
    if rank == 0 || rank > rows.min(cols) {
        return Err(Error::invalid(format!(
            "rank must lie in [1, {}], got {rank}",
            rows.min(cols)
        )));
    }
    if options.max_iter < rank {
        return Err(Error::invalid(format!(
            "max_iter {} is below the requested rank {rank}",
            options.max_iter
        )));
    }
    // Work on the orientation with at least as many rows as columns so the
    // column-side Krylov basis is the one that can fill up.
    let transposed = matrix.transpose();
    let (op, op_t) = if rows >= cols {
        (matrix, &transposed)
    } else {
        (&transposed, matrix)
    };
    let triplets = bidiagonalize(op, op_t, options)?;
    let Triplets {
        sigma,
        row_side,
        col_side,
        worst,
        steps,
    } = triplets;

    let (left_cols, right_cols) = if rows >= cols {
        (row_side, col_side)
    } else {
        (col_side, row_side)
    };
    let mut left = vec![0.0; rows * rank];
    let mut right = vec![0.0; cols * rank];
    for (i, (u, v)) in left_cols.iter().zip(&right_cols).enumerate() {
        for (r, x) in u.iter().enumerate() {
            left[r * rank + i] = *x;
        }
        for (r, x) in v.iter().enumerate() {
            right[r * rank + i] = *x;
        }
    }
    let mut model = SvdModel::from_parts(rows, cols, sigma, left, right, options.seed)?;
    model.max_residual = worst;
    model.iterations = steps;
    Ok(model)
}

struct Triplets {
    sigma: Vec<f64>,
    row_side: Vec<Vec<f64>>,
    col_side: Vec<Vec<f64>>,
    worst: f64,
    steps: usize,
}

/// Lanczos bidiagonalization `M Q = P Bk` of an `m x n` operator, `m >= n`.
///
/// `Bk` is upper bidiagonal with `alphas` on the diagonal and `betas` above
/// it. The Ritz triplet `(σ, P x, Q y)` of `Bk = X S Yᵀ` has residual
/// `|β_last · x_last|`.
fn bidiagonalize(op: &SparseMatrix, op_t: &SparseMatrix, options: &SvdOptions) -> Result<Triplets> {
    let (m, n) = (op.rows(), op.cols());
    let rank = options.rank;
    let limit = n.min(options.max_iter);
    let breakdown = 1e-12 * op.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut p_basis: Vec<Vec<f64>> = Vec::new();
    let mut q_basis: Vec<Vec<f64>> =
        vec![fresh_direction(n, &[], &mut rng).expect("nonempty operator")];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    loop {
        let j = alphas.len();
        let mut p = op.spmv(&q_basis[j])?;
        if j > 0 {
            axpy(&mut p, betas[j - 1], &p_basis[j - 1]);
        }
        orthogonalize(&mut p, &p_basis);
        let mut alpha = norm(&p);
        if alpha <= breakdown {
            alpha = 0.0;
            p = fresh_direction(m, &p_basis, &mut rng).expect("m >= n > j leaves room");
        } else {
            scale(&mut p, 1.0 / alpha);
        }
        alphas.push(alpha);

        let mut q = op_t.spmv(&p)?;
        axpy(&mut q, alpha, &q_basis[j]);
        p_basis.push(p);
        orthogonalize(&mut q, &q_basis);
        let steps = j + 1;
        let complete = steps == n;
        let mut beta = norm(&q);
        let mut restarted = false;
        if complete {
            beta = 0.0;
        } else if beta <= breakdown {
            beta = 0.0;
            restarted = true;
            q = fresh_direction(n, &q_basis, &mut rng).expect("j + 1 < n leaves room");
        } else {
            scale(&mut q, 1.0 / beta);
        }
        betas.push(beta);

        let at_limit = steps == limit;
        let due = (steps >= rank && (steps - rank).is_multiple_of(CHECK_EVERY) && !restarted)
            || complete
            || at_limit;
        if steps >= rank && due {
            let ritz = ritz_triplets(&alphas, &betas, rank);
            let sigma_max = ritz.sigma[0];
            let residuals: Vec<f64> = ritz
                .last_row
                .iter()
                .map(|x| (beta * x).abs())
                .collect();
            let worst = residuals.iter().cloned().fold(0.0, f64::max);
            if worst <= options.tol * sigma_max || sigma_max == 0.0 {
                let lift = |basis: &[Vec<f64>], coeffs: &DMatrix<f64>, i: usize, len: usize| {
                    let mut v = vec![0.0; len];
                    for (b, c) in basis.iter().zip(coeffs.column(i).iter()) {
                        axpy(&mut v, -c, b);
                    }
                    v
                };
                let row_side = (0..rank).map(|i| lift(&p_basis, &ritz.x, i, m)).collect();
                let col_side = (0..rank)
                    .map(|i| lift(&q_basis[..steps], &ritz.y, i, n))
                    .collect();
                let sigma = ritz
                    .sigma
                    .iter()
                    .map(|&s| if s < ZERO_CUTOFF * sigma_max { 0.0 } else { s })
                    .collect();
                let rel = if sigma_max > 0.0 { worst / sigma_max } else { 0.0 };
                return Ok(Triplets {
                    sigma,
                    row_side,
                    col_side,
                    worst: rel,
                    steps,
                });
            }
            if at_limit {
                return Err(Error::NotConverged {
                    iterations: steps,
                    worst,
                    residuals,
                });
            }
        }
        q_basis.push(q);
    }
}

struct Ritz {
    sigma: Vec<f64>,
    /// Left singular vectors of the bidiagonal, columns sorted by σ.
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    /// Last component of each kept left vector.
    last_row: Vec<f64>,
}

fn ritz_triplets(alphas: &[f64], betas: &[f64], rank: usize) -> Ritz {
    let s = alphas.len();
    let mut bk = DMatrix::<f64>::zeros(s, s);
    for i in 0..s {
        bk[(i, i)] = alphas[i];
        if i + 1 < s {
            bk[(i, i + 1)] = betas[i];
        }
    }
    let svd = bk.svd(true, true);
    let u = svd.u.expect("requested");
    let v = svd.v_t.expect("requested").transpose();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.truncate(rank);
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let x = DMatrix::from_columns(&order.iter().map(|&i| u.column(i)).collect::<Vec<_>>());
    let y = DMatrix::from_columns(&order.iter().map(|&i| v.column(i)).collect::<Vec<_>>());
    let last_row = (0..order.len()).map(|i| x[(s - 1, i)]).collect();
    Ritz {
        sigma,
        x,
        y,
        last_row,
    }
}
