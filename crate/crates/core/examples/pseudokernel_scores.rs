//! Score unseen user-item pairs with several odd spectral transformations
//! and compare them to preferential attachment.

use bilink::graph::{BipartiteGraph, Side};
use bilink::predict::{top_n, PreferentialAttachment, Scorer, SpectralScorer};
use bilink::svd::{truncated_svd, SvdOptions};
use bilink::transform::SpectralTransform;

fn main() -> bilink::Result<()> {
    // two taste groups sharing one popular item (item 0)
    let pairs = [
        (0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 0), (2, 1),
        (3, 0), (3, 3), (3, 4), (4, 3), (4, 4), (5, 0), (5, 3), (5, 5),
    ];
    let graph = BipartiteGraph::from_pairs(6, 6, pairs)?;
    let model = truncated_svd(
        &graph.biadjacency(),
        &SvdOptions {
            rank: 6,
            ..SvdOptions::default()
        },
    )?;
    let peak = model.singular_values()[0];

    let transforms = [
        SpectralTransform::Sinh { alpha: 1.0 / peak, beta: 1.0 },
        SpectralTransform::OddNeumann { alpha: 0.9 / peak, beta: 1.0 },
        SpectralTransform::RankReduction { rank: 2, beta: 1.0 },
        SpectralTransform::OddPolynomial { coeffs: vec![0.0, 1.0] },
    ];
    let user = 1;
    let known = graph.neighbors(Side::Left, user)?;
    for t in &transforms {
        let scorer = SpectralScorer::new(&model, t)?;
        println!("{t}: {:?}", top_n(&scorer, graph.right_count(), user, 3, known));
    }
    let pref = PreferentialAttachment::new(&graph)?;
    println!("pref: {:?}", top_n(&pref, graph.right_count(), user, 3, known));
    println!("pref(1, 3) = {}", pref.score(1, 3));
    Ok(())
}
