//! Learn a spectral transformation from a random 70/30 split: hidden edges
//! are projected onto the singular vectors of the training graph and each
//! family is fitted to the resulting curve.

use bilink::graph::{split_edges, BipartiteGraph};
use bilink::learn::{build_targets, fit_all, FitOptions, FitOutcome};
use bilink::svd::{truncated_svd, SvdOptions};
use bilink::transform::Family;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bilink::Result<()> {
    // users and items fall into four communities; links mostly stay inside
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (users, items) = (200, 300);
    let mut pairs = Vec::new();
    for _ in 0..4000 {
        let u = rng.random_range(0..users);
        let i = if rng.random::<f64>() < 0.8 {
            (u % 4) + 4 * rng.random_range(0..items / 4)
        } else {
            rng.random_range(0..items)
        };
        pairs.push((u, i));
    }
    let graph = BipartiteGraph::from_pairs(users, items, pairs)?;

    let split = split_edges(&graph, 0.3, 1, false)?;
    let svd = SvdOptions {
        rank: 16,
        ..SvdOptions::default()
    };
    let model = truncated_svd(&split.train.biadjacency(), &svd)?;
    let targets = build_targets(&model, &split.test_graph().biadjacency())?;

    for outcome in fit_all(&Family::PREDICTORS, &targets, &FitOptions::default()) {
        match outcome {
            FitOutcome::Fitted(report) => {
                println!("{:<10} residual {:>10.4}  {}", report.family.name(), report.residual, report.transform)
            }
            FitOutcome::Skipped { family, reason } => println!("{family}: skipped, {reason}"),
        }
    }
    Ok(())
}
