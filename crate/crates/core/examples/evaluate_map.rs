//! Full experiment on a synthetic timestamped network: nested splits,
//! learned transformations and MAP per method.
//!
//! Pass an edge list path (`user item rating time`, e.g. MovieLens `u.data`)
//! to run on real data instead.

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use bilink::eval::{run_experiment, EvalConfig, EvalReport};
use bilink::graph::{parse_bipartite, BipartiteGraph, Edge, ParseOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(users: usize, items: usize, edges: usize) -> bilink::Result<BipartiteGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let taste: Vec<usize> = (0..users).map(|_| rng.random_range(0..8)).collect();
    let list = (0..edges)
        .map(|t| {
            let left = rng.random_range(0..users);
            // skewed popularity within the user's taste group
            let rank = (rng.random::<f64>().powi(3) * (items / 8) as f64) as usize;
            let right = if rng.random::<f64>() < 0.7 {
                (taste[left] + 8 * rank) % items
            } else {
                (rng.random::<f64>().powi(2) * items as f64) as usize
            };
            Edge { left, right, timestamp: Some(t as i64) }
        })
        .collect();
    BipartiteGraph::new(users, items, list)
}

fn main() -> bilink::Result<()> {
    let (name, graph) = match std::env::args().nth(1) {
        Some(path) => {
            let options = ParseOptions { has_weight: true, has_timestamp: true, strict_unweighted: false };
            (path.clone(), parse_bipartite(BufReader::new(File::open(&path)?), options)?)
        }
        None => ("synthetic".to_string(), synthetic(400, 600, 12_000)?),
    };
    let start = Instant::now();
    let report = run_experiment(&graph, &name, &EvalConfig::default())?;
    print!("{}", EvalReport::table(std::slice::from_ref(&report)));
    print!("{}", report.details());
    println!("elapsed: {:.2}s", start.elapsed().as_secs_f64());
    Ok(())
}
