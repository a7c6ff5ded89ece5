//! Decide whether unipartite networks are nearly bipartite from the shape
//! of their learned spectral curve.

use bilink::bipartivity::{assess, BipartivityConfig};
use bilink::graph::UnipartiteGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bilink::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // dating-style network: links almost always cross between two halves
    let mut crossing = Vec::new();
    // friendship-style network: links mostly inside four clusters
    let mut clustered = Vec::new();
    for _ in 0..1500 {
        let a = rng.random_range(0..100);
        let b = if rng.random::<f64>() < 0.97 { 100 + rng.random_range(0..100) } else { rng.random_range(0..100) };
        crossing.push((a, b));
        let c = rng.random_range(0..200);
        let d = if rng.random::<f64>() < 0.9 { (c / 50) * 50 + rng.random_range(0..50) } else { rng.random_range(0..200) };
        clustered.push((c, d));
    }
    for (name, pairs) in [("crossing", crossing), ("clustered", clustered)] {
        let graph = UnipartiteGraph::new(200, pairs.into_iter().filter(|(a, b)| a != b))?;
        let report = assess(&graph, &BipartivityConfig::default())?;
        println!(
            "{name:<10} {}  ratio {:.3}  sinh {:.3}  exp {:.3}",
            report.verdict, report.ratio, report.sinh_fit.residual, report.exp_fit.residual
        );
    }
    Ok(())
}
