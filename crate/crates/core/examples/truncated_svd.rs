//! Rank-k SVD of a sparse biadjacency matrix, round-tripped through the
//! model file format.

use bilink::graph::BipartiteGraph;
use bilink::svd::{truncated_svd, SvdModel, SvdOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bilink::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs: Vec<(usize, usize)> = (0..400)
        .map(|_| (rng.random_range(0..60), rng.random_range(0..90)))
        .collect();
    let graph = BipartiteGraph::from_pairs(60, 90, pairs)?;

    let options = SvdOptions {
        rank: 8,
        ..SvdOptions::default()
    };
    let model = truncated_svd(&graph.biadjacency(), &options)?;
    println!("singular values: {:.4?}", model.singular_values());
    println!(
        "lanczos steps: {}, worst ritz residual: {:.2e}",
        model.iterations(),
        model.max_residual()
    );

    let mut file = Vec::new();
    model.write_tsv(&mut file)?;
    let back = SvdModel::read_tsv(file.as_slice())?;
    assert_eq!(back.singular_values(), model.singular_values());
    println!("model file: {} bytes", file.len());
    Ok(())
}
