//! Dense vector helpers for the Lanczos solvers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// `y -= s * x`
pub(crate) fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi -= s * xi);
}

/// Removes the components of `v` along the (orthonormal) basis with two
/// passes of classical Gram-Schmidt.
pub(crate) fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|b| dot(b, v)).collect();
        for (b, c) in basis.iter().zip(coeffs) {
            axpy(v, c, b);
        }
    }
}

/// A random unit vector orthogonal to `basis`, or `None` when the basis
/// already spans the whole space.
pub(crate) fn fresh_direction(
    len: usize,
    basis: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Option<Vec<f64>> {
    if basis.len() >= len {
        return None;
    }
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, basis);
        let n = norm(&v);
        if n > 1e-8 {
            scale(&mut v, 1.0 / n);
            return Some(v);
        }
    }
    None
}
