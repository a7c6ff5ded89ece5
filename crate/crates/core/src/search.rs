//! One-dimensional minimization: a log-spaced grid scan followed by
//! golden-section refinement around the best grid point.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// `points` log-spaced values covering `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && points >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Minimizes `f` over `[lo, hi]`. The result is never worse than the best
/// grid point; golden-section search (in log space) runs until the bracket
/// is narrower than `rtol` relative to its center.
pub fn minimize_log(
    lo: f64,
    hi: f64,
    points: usize,
    rtol: f64,
    mut f: impl FnMut(f64) -> f64,
) -> Minimum {
    let grid = log_grid(lo, hi, points);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = (0..grid.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("grid has at least two points");
    let mut result = Minimum {
        x: grid[best],
        value: values[best],
    };
    let mut a = grid[best.saturating_sub(1)].ln();
    let mut b = grid[(best + 1).min(grid.len() - 1)].ln();
    let width = (1.0 + rtol).ln();

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    while b - a > width {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d.exp());
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < result.value {
            result = Minimum { x: x.exp(), value: v };
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ends() {
        let g = log_grid(1e-3, 10.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert_eq!(g[4], 10.0);
        assert!((g[2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn finds_smooth_minimum() {
        let m = minimize_log(1e-3, 100.0, 50, 1e-9, |x| (x.ln() - 0.3f64.ln()).powi(2));
        assert!((m.x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn never_worse_than_grid() {
        let f = |x: f64| (10.0 * x).sin() + 0.1 * x;
        let m = minimize_log(0.1, 5.0, 40, 1e-6, f);
        let grid_best = log_grid(0.1, 5.0, 40)
            .into_iter()
            .map(f)
            .fold(f64::INFINITY, f64::min);
        assert!(m.value <= grid_best);
    }
}
