//! Bipartite and unipartite graphs read from KONECT-style edge lists.
//!
//! Edge-list lines have the form `<u> <v> [weight [timestamp]]`, separated by
//! tabs or spaces. Lines starting with `%` or `#` are comments. Node labels
//! are arbitrary tokens and are remapped to dense 0-based indices in order of
//! first appearance, separately for each partition.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub left: usize,
    pub right: usize,
    pub timestamp: Option<i64>,
}

/// Original node labels of both partitions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeLabels {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

impl NodeLabels {
    fn numbered(left_count: usize, right_count: usize) -> Self {
        NodeLabels {
            left: (0..left_count).map(|i| i.to_string()).collect(),
            right: (0..right_count).map(|i| i.to_string()).collect(),
        }
    }

    pub fn lookup(&self, side: Side, label: &str) -> Option<usize> {
        let names = match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        };
        names.iter().position(|n| n == label)
    }
}

/// Column layout of an edge-list file.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Third column holds an edge weight (read and discarded).
    pub has_weight: bool,
    /// A timestamp column follows the (optional) weight column.
    pub has_timestamp: bool,
    /// Reject weights other than 1 instead of silently dropping them.
    pub strict_unweighted: bool,
}

/// An unweighted bipartite graph `G = (V + W, E)`.
///
/// Immutable after construction. Edges are unique, and either every edge
/// carries a timestamp or none does.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    left_count: usize,
    right_count: usize,
    edges: Vec<Edge>,
    left_adj: Vec<Vec<usize>>,
    right_adj: Vec<Vec<usize>>,
    labels: Arc<NodeLabels>,
}

impl BipartiteGraph {
    /// Builds a graph over `left_count + right_count` nodes. Duplicate pairs
    /// collapse to one edge keeping the earliest timestamp (first occurrence
    /// when timestamps tie or are absent).
    pub fn new(left_count: usize, right_count: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::with_labels(
            Arc::new(NodeLabels::numbered(left_count, right_count)),
            edges,
        )
    }

    pub fn from_pairs(
        left_count: usize,
        right_count: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let edges = pairs
            .into_iter()
            .map(|(left, right)| Edge {
                left,
                right,
                timestamp: None,
            })
            .collect();
        Self::new(left_count, right_count, edges)
    }

    pub fn with_labels(labels: Arc<NodeLabels>, edges: Vec<Edge>) -> Result<Self> {
        let left_count = labels.left.len();
        let right_count = labels.right.len();
        if let Some(first) = edges.first() {
            let timed = first.timestamp.is_some();
            if edges.iter().any(|e| e.timestamp.is_some() != timed) {
                return Err(Error::invalid(
                    "either all edges or none must carry timestamps",
                ));
            }
        }
        let mut slot: HashMap<(usize, usize), usize> = HashMap::with_capacity(edges.len());
        let mut unique: Vec<Edge> = Vec::with_capacity(edges.len());
        for e in edges {
            if e.left >= left_count {
                return Err(Error::IndexOutOfRange {
                    what: "left partition",
                    index: e.left,
                    size: left_count,
                });
            }
            if e.right >= right_count {
                return Err(Error::IndexOutOfRange {
                    what: "right partition",
                    index: e.right,
                    size: right_count,
                });
            }
            match slot.get(&(e.left, e.right)) {
                Some(&i) => {
                    if let (Some(kept), Some(new)) = (unique[i].timestamp, e.timestamp) {
                        if new < kept {
                            unique[i].timestamp = Some(new);
                        }
                    }
                }
                None => {
                    slot.insert((e.left, e.right), unique.len());
                    unique.push(e);
                }
            }
        }
        let mut left_adj = vec![Vec::new(); left_count];
        let mut right_adj = vec![Vec::new(); right_count];
        for e in &unique {
            left_adj[e.left].push(e.right);
            right_adj[e.right].push(e.left);
        }
        left_adj.iter_mut().for_each(|a| a.sort_unstable());
        right_adj.iter_mut().for_each(|a| a.sort_unstable());
        Ok(BipartiteGraph {
            left_count,
            right_count,
            edges: unique,
            left_adj,
            right_adj,
            labels,
        })
    }

    pub fn left_count(&self) -> usize {
        self.left_count
    }

    pub fn right_count(&self) -> usize {
        self.right_count
    }

    pub fn node_count(&self) -> usize {
        self.left_count + self.right_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &NodeLabels {
        &self.labels
    }

    pub fn has_timestamps(&self) -> bool {
        self.edges.first().is_some_and(|e| e.timestamp.is_some())
    }

    /// Sorted neighbors of a node.
    pub fn neighbors(&self, side: Side, id: usize) -> Result<&[usize]> {
        let (adj, what) = match side {
            Side::Left => (&self.left_adj, "left partition"),
            Side::Right => (&self.right_adj, "right partition"),
        };
        adj.get(id)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                what,
                index: id,
                size: adj.len(),
            })
    }

    /// Number of distinct neighbors `d(u)`.
    pub fn degree(&self, side: Side, id: usize) -> Result<usize> {
        self.neighbors(side, id).map(<[usize]>::len)
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        self.left_adj.iter().map(Vec::len).collect()
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        self.right_adj.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, left: usize, right: usize) -> bool {
        self.left_adj
            .get(left)
            .is_some_and(|a| a.binary_search(&right).is_ok())
    }

    /// The `left_count x right_count` 0/1 matrix `B`.
    pub fn biadjacency(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(
            self.left_count,
            self.right_count,
            self.edges.iter().map(|e| (e.left, e.right, 1.0)),
        )
        .expect("edge indices validated at construction")
    }

    /// The symmetric adjacency matrix `[0 B; B^T 0]`; right nodes are offset
    /// by `left_count`.
    pub fn block_adjacency(&self) -> SparseMatrix {
        let offset = self.left_count;
        let n = self.node_count();
        SparseMatrix::from_triplets(
            n,
            n,
            self.edges.iter().flat_map(|e| {
                [
                    (e.left, offset + e.right, 1.0),
                    (offset + e.right, e.left, 1.0),
                ]
            }),
        )
        .expect("edge indices validated at construction")
    }

    /// Subgraph on the same node set holding only the given edges.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Result<BipartiteGraph> {
        Self::with_labels(Arc::clone(&self.labels), edges)
    }

    /// Writes the canonical edge list using the original labels.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.has_timestamps() {
            writeln!(out, "% bip unweighted (weight, timestamp columns)")?;
        } else {
            writeln!(out, "% bip unweighted")?;
        }
        for e in &self.edges {
            let mut line = format!(
                "{}\t{}",
                self.labels.left[e.left], self.labels.right[e.right]
            );
            if let Some(t) = e.timestamp {
                let _ = write!(line, "\t1\t{t}");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Columns of one non-comment line.
fn fields(line: &str) -> Option<Vec<&str>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
        return None;
    }
    Some(trimmed.split_whitespace().collect())
}

fn parse_timestamp(token: &str, line: usize) -> Result<i64> {
    if let Ok(t) = token.parse::<i64>() {
        return Ok(t);
    }
    match token.parse::<f64>() {
        Ok(t) if t.is_finite() => Ok(t as i64),
        _ => Err(Error::parse(line, format!("bad timestamp {token:?}"))),
    }
}

struct Interner {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            names: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }
}

/// Reads a bipartite edge list. The first column names left nodes, the
/// second right nodes.
pub fn parse_bipartite<R: BufRead>(reader: R, options: ParseOptions) -> Result<BipartiteGraph> {
    let required = 2 + options.has_weight as usize + options.has_timestamp as usize;
    let mut left = Interner::new();
    let mut right = Interner::new();
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let Some(cols) = fields(&line) else { continue };
        if cols.len() < required {
            return Err(Error::parse(
                line_no,
                format!("expected at least {required} columns, found {}", cols.len()),
            ));
        }
        if options.has_weight {
            let w: f64 = cols[2]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad weight {:?}", cols[2])))?;
            if options.strict_unweighted && w != 1.0 {
                return Err(Error::parse(line_no, format!("weighted edge ({w})")));
            }
        }
        let timestamp = if options.has_timestamp {
            Some(parse_timestamp(
                cols[2 + options.has_weight as usize],
                line_no,
            )?)
        } else {
            None
        };
        edges.push(Edge {
            left: left.intern(cols[0]),
            right: right.intern(cols[1]),
            timestamp,
        });
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let labels = NodeLabels {
        left: left.names,
        right: right.names,
    };
    BipartiteGraph::with_labels(Arc::new(labels), edges)
}

/// An undirected simple graph, used for bipartivity assessment.
#[derive(Debug, Clone)]
pub struct UnipartiteGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    labels: Arc<Vec<String>>,
}

impl UnipartiteGraph {
    /// Builds a simple graph; self-loops are dropped and `(u, v)`, `(v, u)`
    /// collapse. Edges are stored as `(min, max)` in first-appearance order.
    pub fn new(node_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let labels = Arc::new((0..node_count).map(|i| i.to_string()).collect());
        Self::with_labels(labels, pairs)
    }

    fn with_labels(
        labels: Arc<Vec<String>>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let node_count = labels.len();
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for (u, v) in pairs {
            let bad = u.max(v);
            if bad >= node_count {
                return Err(Error::IndexOutOfRange {
                    what: "nodes",
                    index: bad,
                    size: node_count,
                });
            }
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                edges.push(key);
            }
        }
        Ok(UnipartiteGraph {
            node_count,
            edges,
            labels,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Symmetric 0/1 adjacency matrix.
    pub fn adjacency(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(
            self.node_count,
            self.node_count,
            self.edges.iter().flat_map(|&(u, v)| [(u, v, 1.0), (v, u, 1.0)]),
        )
        .expect("edge indices validated at construction")
    }

    pub fn with_edges(&self, edges: Vec<(usize, usize)>) -> Result<UnipartiteGraph> {
        Self::with_labels(Arc::clone(&self.labels), edges)
    }

    /// Uniform random split of the edges into (train, test) graphs over the
    /// same node set.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<(UnipartiteGraph, UnipartiteGraph)> {
        let test_size = holdout_size(self.edges.len(), fraction)?;
        let chosen = random_subset(self.edges.len(), test_size, seed);
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (i, &e) in self.edges.iter().enumerate() {
            if chosen[i] {
                test.push(e);
            } else {
                train.push(e);
            }
        }
        Ok((self.with_edges(train)?, self.with_edges(test)?))
    }
}

/// Reads an undirected edge list; extra columns are ignored.
pub fn parse_unipartite<R: BufRead>(reader: R) -> Result<UnipartiteGraph> {
    let mut nodes = Interner::new();
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let Some(cols) = fields(&line) else { continue };
        if cols.len() < 2 {
            return Err(Error::parse(
                i + 1,
                format!("expected at least 2 columns, found {}", cols.len()),
            ));
        }
        pairs.push((nodes.intern(cols[0]), nodes.intern(cols[1])));
    }
    let graph = UnipartiteGraph::with_labels(Arc::new(nodes.names), pairs)?;
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(graph)
}

/// Training graph plus the withheld edges.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: BipartiteGraph,
    pub test_edges: Vec<(usize, usize)>,
    pub seed: u64,
    pub by_time: bool,
}

impl SplitResult {
    /// The withheld edges as a graph on the same node set.
    pub fn test_graph(&self) -> BipartiteGraph {
        self.train
            .with_edges(
                self.test_edges
                    .iter()
                    .map(|&(left, right)| Edge {
                        left,
                        right,
                        timestamp: None,
                    })
                    .collect(),
            )
            .expect("test edges come from the same node set")
    }
}

/// `ceil(fraction * edges)`, tolerant of rounding noise in the product.
fn holdout_size(edges: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let expected = fraction * edges as f64;
    if expected < 1.0 - 1e-9 {
        return Err(Error::invalid(format!(
            "fraction {fraction} of {edges} edges withholds nothing"
        )));
    }
    Ok(((expected - 1e-9).ceil() as usize).min(edges))
}

fn random_subset(n: usize, size: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, n, size) {
        chosen[i] = true;
    }
    chosen
}

/// Withholds a fraction of the edges as a test set.
///
/// With `by_time`, the test set is the newest `ceil(fraction * |E|)` edges
/// (ties in timestamp broken by input order, later lines counting as newer).
/// Otherwise edges are drawn uniformly without replacement using `seed`.
pub fn split_edges(
    g: &BipartiteGraph,
    fraction: f64,
    seed: u64,
    by_time: bool,
) -> Result<SplitResult> {
    let n = g.edge_count();
    let test_size = holdout_size(n, fraction)?;
    let chosen = if by_time {
        if !g.has_timestamps() {
            return Err(Error::MissingTimestamps);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (g.edges[i].timestamp, i));
        let mut chosen = vec![false; n];
        for &i in &order[n - test_size..] {
            chosen[i] = true;
        }
        chosen
    } else {
        random_subset(n, test_size, seed)
    };
    let mut train = Vec::with_capacity(n - test_size);
    let mut test_edges = Vec::with_capacity(test_size);
    for (e, &held) in g.edges.iter().zip(&chosen) {
        if held {
            test_edges.push((e.left, e.right));
        } else {
            train.push(*e);
        }
    }
    Ok(SplitResult {
        train: g.with_edges(train)?,
        test_edges,
        seed,
        by_time,
    })
}
