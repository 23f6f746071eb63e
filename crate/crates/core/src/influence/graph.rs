use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Directed graph on nodes `0..n` with a CSR adjacency index.
///
/// Edges are deduplicated and kept sorted by `(src, dst)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
}

impl DirectedGraph {
    pub fn new(n: usize, mut edges: Vec<(u32, u32)>) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::invalid(format!("{n} nodes exceed the u32 id space")));
        }
        if let Some(&(s, d)) = edges.iter().find(|&&(s, d)| s as usize >= n || d as usize >= n) {
            return Err(Error::NodeOutOfRange {
                node: s.max(d) as usize,
                nodes: n,
            });
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted(n, edges))
    }

    fn from_sorted(n: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(s, _) in &edges {
            offsets[s as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        Self { n, edges, offsets }
    }

    /// Every ordered pair of distinct nodes.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1));
        for s in 0..n as u32 {
            for d in 0..n as u32 {
                if s != d {
                    edges.push((s, d));
                }
            }
        }
        Self::new(n, edges)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[self.offsets[v]..self.offsets[v + 1]]
            .iter()
            .map(|&(_, d)| d as usize)
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.edges[self.offsets[src]..self.offsets[src + 1]]
            .binary_search(&(src as u32, dst as u32))
            .is_ok()
    }

    /// Nodes reachable from `seeds`, seeds included, in BFS discovery order.
    pub fn reachable(&self, seeds: &[usize]) -> Result<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut order = Vec::new();
        for &s in seeds {
            if s >= self.n {
                return Err(Error::NodeOutOfRange { node: s, nodes: self.n });
            }
            if !seen[s] {
                seen[s] = true;
                order.push(s);
            }
        }
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for d in self.successors(v) {
                if !seen[d] {
                    seen[d] = true;
                    order.push(d);
                }
            }
        }
        Ok(order)
    }

    /// Sorted reach list of every node.
    ///
    /// One BFS per source; the visited marks are stamped with the source index
    /// so the array is never cleared.
    pub fn reach_lists(&self) -> Vec<Vec<u32>> {
        let mut stamp = vec![u32::MAX; self.n];
        let mut queue = Vec::new();
        (0..self.n)
            .map(|src| {
                queue.clear();
                stamp[src] = src as u32;
                queue.push(src as u32);
                let mut head = 0;
                while head < queue.len() {
                    let v = queue[head] as usize;
                    head += 1;
                    for d in self.successors(v) {
                        if stamp[d] != src as u32 {
                            stamp[d] = src as u32;
                            queue.push(d as u32);
                        }
                    }
                }
                let mut list = queue.clone();
                list.sort_unstable();
                list
            })
            .collect()
    }
}

/// Keeps each edge of `g` independently with probability `p`.
///
/// Edges are visited in sorted order and each consumes one draw from the
/// generator seeded with `seed`, so the result is a pure function of the seed.
pub fn sample_subgraph(g: &DirectedGraph, p: f64, seed: u64) -> Result<DirectedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = SplitMix64::new(seed);
    let kept = g
        .edges
        .iter()
        .copied()
        .filter(|_| rng.bernoulli(p))
        .collect();
    Ok(DirectedGraph::from_sorted(g.n, kept))
}
