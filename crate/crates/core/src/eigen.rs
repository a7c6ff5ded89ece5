//! Extremal eigenpairs of symmetric sparse matrices (Lanczos with full
//! reorthogonalization and random restarts on breakdown).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::krylov::{axpy, dot, fresh_direction, norm, orthogonalize, scale};
use crate::sparse::SparseMatrix;

const CHECK_EVERY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Number of largest (most positive) eigenpairs.
    pub top: usize,
    /// Number of smallest (most negative) eigenpairs.
    pub bottom: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            top: 16,
            bottom: 16,
            tol: 1e-8,
            max_iter: 1000,
            seed: 1,
        }
    }
}

/// Eigenpairs sorted by descending absolute eigenvalue (positive first on
/// ties).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenModel {
    size: usize,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl EigenModel {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The `top` largest and `bottom` smallest eigenpairs of a symmetric matrix,
/// each with residual `‖A u − λ u‖ ≤ tol · max|λ|`.
pub fn extremal_eigs(matrix: &SparseMatrix, options: &EigenOptions) -> Result<EigenModel> {
    if !matrix.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    let n = matrix.rows();
    let wanted = options.top + options.bottom;
    if wanted == 0 || wanted > n {
        return Err(Error::invalid(format!(
            "requested {} + {} eigenpairs of a {n}x{n} matrix",
            options.top, options.bottom
        )));
    }
    if options.max_iter < wanted {
        return Err(Error::invalid(format!(
            "max_iter {} is below the {wanted} requested eigenpairs",
            options.max_iter
        )));
    }
    let limit = n.min(options.max_iter);
    let breakdown = 1e-12 * matrix.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut basis: Vec<Vec<f64>> = vec![fresh_direction(n, &[], &mut rng).expect("n > 0")];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    loop {
        let j = alphas.len();
        let mut r = matrix.spmv(&basis[j])?;
        let alpha = dot(&r, &basis[j]);
        axpy(&mut r, alpha, &basis[j]);
        if j > 0 {
            axpy(&mut r, betas[j - 1], &basis[j - 1]);
        }
        orthogonalize(&mut r, &basis);
        alphas.push(alpha);
        let steps = j + 1;
        let complete = steps == n;
        let mut beta = norm(&r);
        let mut restarted = false;
        if complete {
            beta = 0.0;
        } else if beta <= breakdown {
            beta = 0.0;
            restarted = true;
            r = fresh_direction(n, &basis, &mut rng).expect("steps < n leaves room");
        } else {
            scale(&mut r, 1.0 / beta);
        }
        betas.push(beta);

        let at_limit = steps == limit;
        let due = (steps >= wanted && (steps - wanted).is_multiple_of(CHECK_EVERY) && !restarted)
            || complete
            || at_limit;
        if steps >= wanted && due {
            let (theta, s) = tridiagonal_eigen(&alphas, &betas[..steps - 1]);
            // Ritz indices in descending eigenvalue order
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));
            let mut chosen: Vec<usize> = order[..options.top].to_vec();
            chosen.extend_from_slice(&order[steps - options.bottom..]);

            let scale_ref = theta.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            let residuals: Vec<f64> = chosen
                .iter()
                .map(|&i| (beta * s[(steps - 1, i)]).abs())
                .collect();
            let worst = residuals.iter().cloned().fold(0.0, f64::max);
            if worst <= options.tol * scale_ref || scale_ref == 0.0 {
                chosen.sort_by(|&a, &b| {
                    theta[b]
                        .abs()
                        .total_cmp(&theta[a].abs())
                        .then(theta[b].total_cmp(&theta[a]))
                });
                let values = chosen.iter().map(|&i| theta[i]).collect();
                let vectors = chosen
                    .iter()
                    .map(|&i| {
                        let mut v = vec![0.0; n];
                        for (b, c) in basis.iter().zip(s.column(i).iter()) {
                            axpy(&mut v, -c, b);
                        }
                        v
                    })
                    .collect();
                return Ok(EigenModel {
                    size: n,
                    values,
                    vectors,
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
        basis.push(r);
    }
}

fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let s = diag.len();
    let mut t = DMatrix::<f64>::zeros(s, s);
    for i in 0..s {
        t[(i, i)] = diag[i];
        if i + 1 < s {
            t[(i, i + 1)] = off[i];
            t[(i + 1, i)] = off[i];
        }
    }
    let eig = t.symmetric_eigen();
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}
