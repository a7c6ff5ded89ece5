//! Parse a timestamped edge list and withhold the newest 30% of edges.

use bilink::graph::{parse_bipartite, split_edges, ParseOptions, Side};

const EDGES: &str = "\
% bip unweighted
% user item weight time
alice  dune      1 100
alice  emma      1 140
bob    dune      1 120
bob    ulysses   1 180
carol  emma      1 130
carol  ulysses   1 150
carol  walden    1 190
dave   walden    1 160
dave   dune      1 170
erin   emma      1 110
";

fn main() -> bilink::Result<()> {
    let options = ParseOptions {
        has_weight: true,
        has_timestamp: true,
        strict_unweighted: true,
    };
    let graph = parse_bipartite(EDGES.as_bytes(), options)?;
    println!(
        "{} users, {} items, {} edges",
        graph.left_count(),
        graph.right_count(),
        graph.edge_count()
    );

    let split = split_edges(&graph, 0.3, 1, true)?;
    let labels = graph.labels();
    println!("training edges: {}", split.train.edge_count());
    for &(u, i) in &split.test_edges {
        println!("held out: {} -> {}", labels.left[u], labels.right[i]);
    }

    let carol = labels.lookup(Side::Left, "carol").unwrap();
    println!("carol's training degree: {}", split.train.degree(Side::Left, carol)?);

    let mut out = Vec::new();
    split.train.write_edge_list(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
