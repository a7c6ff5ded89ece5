//! Nonnegative least squares by the Lawson-Hanson active-set method.
//!
//! Solves `min ‖A x − b‖` subject to `x ≥ 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::invalid("nnls: empty design matrix"));
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: format!("{m} targets"),
            actual: format!("{}", b.len()),
        });
    }
    let tol = 10.0 * f64::EPSILON * a.norm() * (m.max(n) as f64) * b.norm().max(1.0);

    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let mut w = a.tr_mul(&(b - a * &x));

    for _ in 0..3 * n + 3 {
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            let z = solve_passive(a, b, &passive);
            let infeasible: Vec<usize> = (0..n).filter(|&i| passive[i] && z[i] <= 0.0).collect();
            if infeasible.is_empty() {
                x = z;
                break;
            }
            let step = infeasible
                .iter()
                .map(|&i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * step;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        w = a.tr_mul(&(b - a * &x));
    }
    Ok(x)
}

/// Unconstrained least squares over the passive columns; other entries zero.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(&cols);
    let svd = sub.svd(true, true);
    let sol = svd
        .solve(b, 1e-14 * svd.singular_values.max())
        .expect("both factors requested");
    let mut z = DVector::<f64>::zeros(passive.len());
    for (k, &j) in cols.iter().enumerate() {
        z[j] = sol[k];
    }
    z
}
