//! Signed directed graphs, connectivity predicates and positive-cluster
//! partitions.
//!
//! Node ids are zero-based inside the library. The plain-text graph format and
//! every human-facing report use one-based ids.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest network size the model is defined for.
pub const MIN_NODES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph needs at least {MIN_NODES} nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node {node} out of range for a graph on {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("arc ({tail}, {head}) listed twice")]
    DuplicateArc { tail: usize, head: usize },
    #[error("arc ({tail}, {head}) appears with both signs")]
    SignConflict { tail: usize, head: usize },
    #[error("graphs disagree on node count ({0} vs {1})")]
    NodeCountMismatch(usize, usize),
    #[error("cannot take the union of an empty list of graphs")]
    EmptyUnion,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" => Ok(Sign::Positive),
            "-" | "\u{2212}" => Ok(Sign::Negative),
            other => Err(format!("unknown sign {other:?}, expected + or -")),
        }
    }
}

/// A directed arc `tail -> head` carrying a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedArc {
    pub tail: usize,
    pub head: usize,
    pub sign: Sign,
}

impl SignedArc {
    pub fn new(tail: usize, head: usize, sign: Sign) -> Self {
        SignedArc { tail, head, sign }
    }
}

/// Simple signed digraph: no self-loops, at most one arc per ordered pair.
///
/// Arcs are kept ordered by `(tail, head)`; iteration order is part of the
/// contract because the arc sampler consumes randomness in that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedDigraph {
    n: usize,
    arcs: BTreeMap<(usize, usize), Sign>,
}

impl SignedDigraph {
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n < MIN_NODES {
            return Err(GraphError::TooFewNodes(n));
        }
        Ok(SignedDigraph { n, arcs: BTreeMap::new() })
    }

    pub fn from_arcs<I>(n: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = SignedArc>,
    {
        let mut g = Self::empty(n)?;
        for arc in arcs {
            g.insert(arc)?;
        }
        Ok(g)
    }

    /// Shorthand for tests and presets: `(tail, head, sign)` triples.
    pub fn from_triples(n: usize, triples: &[(usize, usize, Sign)]) -> Result<Self, GraphError> {
        Self::from_arcs(n, triples.iter().map(|&(t, h, s)| SignedArc::new(t, h, s)))
    }

    pub fn insert(&mut self, arc: SignedArc) -> Result<(), GraphError> {
        for node in [arc.tail, arc.head] {
            if node >= self.n {
                return Err(GraphError::NodeOutOfRange { node, n: self.n });
            }
        }
        if arc.tail == arc.head {
            return Err(GraphError::SelfLoop(arc.tail));
        }
        match self.arcs.get(&(arc.tail, arc.head)) {
            Some(&s) if s == arc.sign => Err(GraphError::DuplicateArc { tail: arc.tail, head: arc.head }),
            Some(_) => Err(GraphError::SignConflict { tail: arc.tail, head: arc.head }),
            None => {
                self.arcs.insert((arc.tail, arc.head), arc.sign);
                Ok(())
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn sign_of(&self, tail: usize, head: usize) -> Option<Sign> {
        self.arcs.get(&(tail, head)).copied()
    }

    /// Arcs in ascending `(tail, head)` order.
    pub fn arcs(&self) -> impl Iterator<Item = SignedArc> + '_ {
        self.arcs.iter().map(|(&(tail, head), &sign)| SignedArc { tail, head, sign })
    }

    /// Graph on the same node set keeping only arcs of `sign`.
    pub fn subgraph_by_sign(&self, sign: Sign) -> SignedDigraph {
        SignedDigraph {
            n: self.n,
            arcs: self.arcs.iter().filter(|(_, &s)| s == sign).map(|(&k, &s)| (k, s)).collect(),
        }
    }

    /// Out-neighbour lists restricted to `keep` (every node when `None`).
    fn successors(&self, keep: Option<&[bool]>) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for &(t, h) in self.arcs.keys() {
            if keep.is_none_or(|k| k[t] && k[h]) {
                out[t].push(h);
            }
        }
        out
    }

    pub fn connectivity(&self) -> Connectivity {
        let succ = self.successors(None);
        let reach: Vec<Vec<bool>> = (0..self.n).map(|v| reachable_from(&succ, v)).collect();
        let center = (0..self.n).find(|&v| reach[v].iter().all(|&r| r));
        let strong = center.is_some() && (0..self.n).all(|v| reach[v].iter().all(|&r| r));
        let mut sets = DisjointSets::new(self.n);
        for &(t, h) in self.arcs.keys() {
            sets.union(t, h);
        }
        Connectivity { strong, weak: sets.count() == 1, center }
    }

    /// Whether the graph induced on `block` has a node reaching every other
    /// node of `block` through arcs with both ends in `block`.
    pub fn has_spanning_tree_within(&self, block: &[usize]) -> bool {
        if block.is_empty() {
            return false;
        }
        let mut keep = vec![false; self.n];
        for &v in block {
            keep[v] = true;
        }
        let succ = self.successors(Some(&keep));
        block.iter().any(|&root| {
            let r = reachable_from(&succ, root);
            block.iter().all(|&v| r[v])
        })
    }

    /// Weakly connected components of the positive subgraph, ordered by their
    /// smallest member.
    pub fn positive_cluster_partition(&self) -> PositiveClusterPartition {
        let mut sets = DisjointSets::new(self.n);
        for (&(t, h), &s) in &self.arcs {
            if s == Sign::Positive {
                sets.union(t, h);
            }
        }
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.n {
            by_root.entry(sets.find(v)).or_default().push(v);
        }
        let mut blocks: Vec<Vec<usize>> = by_root.into_values().collect();
        blocks.sort_by_key(|b| b[0]);
        PositiveClusterPartition::from_blocks(self.n, blocks)
    }

    /// Parses the plain-text graph format: first non-comment line is `n`,
    /// then one `tail head sign` arc per line with one-based node ids.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "missing node count".into() })?;
        let n: usize = header.parse().map_err(|_| GraphError::Parse {
            line: first,
            msg: format!("expected node count, found {header:?}"),
        })?;
        let mut g = SignedDigraph::empty(n)?;
        for (line, text) in lines {
            let arc = parse_arc_line(text, n).map_err(|msg| GraphError::Parse { line, msg })?;
            g.insert(arc).map_err(|e| GraphError::Parse { line, msg: e.to_string() })?;
        }
        Ok(g)
    }

    /// Parses inline arc lines (`"1 2 +"`) for a graph on `n` nodes.
    pub fn from_arc_lines<S: AsRef<str>>(n: usize, lines: &[S]) -> Result<Self, GraphError> {
        let mut g = SignedDigraph::empty(n)?;
        for (i, l) in lines.iter().enumerate() {
            let arc = parse_arc_line(l.as_ref().trim(), n).map_err(|msg| GraphError::Parse { line: i + 1, msg })?;
            g.insert(arc).map_err(|e| GraphError::Parse { line: i + 1, msg: e.to_string() })?;
        }
        Ok(g)
    }

    /// Arc lines in the one-based text form, without the header.
    pub fn arc_lines(&self) -> Vec<String> {
        self.arcs().map(|a| format!("{} {} {}", a.tail + 1, a.head + 1, a.sign)).collect()
    }
}

impl fmt::Display for SignedDigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for line in self.arc_lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl FromStr for SignedDigraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SignedDigraph::parse(s)
    }
}

fn parse_arc_line(text: &str, n: usize) -> Result<SignedArc, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let [tail, head, sign] = fields.as_slice() else {
        return Err(format!("expected `tail head sign`, found {text:?}"));
    };
    let id = |s: &str| -> Result<usize, String> {
        let v: usize = s.parse().map_err(|_| format!("bad node id {s:?}"))?;
        if v == 0 || v > n {
            return Err(format!("node id {v} outside 1..={n}"));
        }
        Ok(v - 1)
    };
    Ok(SignedArc::new(id(tail)?, id(head)?, sign.parse()?))
}

/// Union of arc sets over a list of graphs sharing a node set.
///
/// Fails with [`GraphError::SignConflict`] if some ordered pair carries both
/// signs across the list.
pub fn union_graph(graphs: &[SignedDigraph]) -> Result<SignedDigraph, GraphError> {
    let first = graphs.first().ok_or(GraphError::EmptyUnion)?;
    let mut out = SignedDigraph { n: first.n, arcs: BTreeMap::new() };
    for g in graphs {
        if g.n != first.n {
            return Err(GraphError::NodeCountMismatch(first.n, g.n));
        }
        for (&(tail, head), &sign) in &g.arcs {
            match out.arcs.get(&(tail, head)) {
                Some(&s) if s != sign => return Err(GraphError::SignConflict { tail, head }),
                _ => {
                    out.arcs.insert((tail, head), sign);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Connectivity {
    pub strong: bool,
    pub weak: bool,
    /// Smallest node from which every node is reachable.
    pub center: Option<usize>,
}

/// Partition of the node set into positive clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveClusterPartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl PositiveClusterPartition {
    fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Self {
        let mut block_of = vec![0; n];
        for (b, members) in blocks.iter().enumerate() {
            for &v in members {
                block_of[v] = b;
            }
        }
        PositiveClusterPartition { blocks, block_of }
    }

    /// Every node in its own block.
    pub fn singletons(n: usize) -> Self {
        Self::from_blocks(n, (0..n).map(|v| vec![v]).collect())
    }

    /// A single block holding all nodes.
    pub fn whole(n: usize) -> Self {
        Self::from_blocks(n, vec![(0..n).collect()])
    }

    /// Builds a partition from explicit blocks, canonicalising member and
    /// block order. Returns `None` unless the blocks exactly cover `0..n`.
    pub fn from_explicit(n: usize, mut blocks: Vec<Vec<usize>>) -> Option<Self> {
        let mut seen = vec![false; n];
        for b in &mut blocks {
            if b.is_empty() {
                return None;
            }
            b.sort_unstable();
            for &v in b.iter() {
                if v >= n || std::mem::replace(&mut seen[v], true) {
                    return None;
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return None;
        }
        blocks.sort_by_key(|b| b[0]);
        Some(Self::from_blocks(n, blocks))
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block count, `T_p`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.block_of[node]
    }

    /// Blocks with one-based ids, for reports.
    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|v| v + 1).collect()).collect()
    }
}

fn reachable_from(succ: &[Vec<usize>], root: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Union-find with path halving and union by size.
struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n], sets: n }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
    }

    fn count(&self) -> usize {
        self.sets
    }
}
