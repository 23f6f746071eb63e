use crate::error::{Error, Result};
use crate::influence::graph::{sample_subgraph, DirectedGraph};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::submodular::{ItemSet, SubmodularObjective};

/// `|reachable(S)| / |V|` on `g`, seeds counted as reachable.
pub fn influence_value<F: Scalar>(g: &DirectedGraph, seeds: &ItemSet) -> Result<F> {
    if g.node_count() == 0 {
        return Err(Error::Empty("graph"));
    }
    let reached = g.reachable(seeds.as_slice())?;
    Ok(F::of_usize(reached.len()) / F::of_usize(g.node_count()))
}

/// Normalized reachability on one graph, backed by precomputed reach lists.
#[derive(Debug, Clone)]
pub struct InfluenceObjective {
    reach: Vec<Vec<u32>>,
}

/// Greedy state: which nodes the current seed set already reaches.
#[derive(Debug, Clone)]
pub struct ReachState {
    covered: Vec<bool>,
}

impl InfluenceObjective {
    pub fn new(g: &DirectedGraph) -> Result<Self> {
        if g.node_count() == 0 {
            return Err(Error::Empty("graph"));
        }
        Ok(Self { reach: g.reach_lists() })
    }

    pub fn node_count(&self) -> usize {
        self.reach.len()
    }

    /// Sorted nodes reachable from `v`, `v` included.
    pub fn reach_of(&self, v: usize) -> &[u32] {
        &self.reach[v]
    }

    /// Unnormalized `|reachable(S)|`, using `marks` as scratch space.
    ///
    /// `marks` must have one slot per node; slots equal to `stamp` count as
    /// already reached, so callers bump `stamp` between sets instead of clearing.
    pub fn reached_count(&self, seeds: &[usize], marks: &mut [u32], stamp: u32) -> usize {
        let mut count = 0;
        for &s in seeds {
            for &v in &self.reach[s] {
                let slot = &mut marks[v as usize];
                if *slot != stamp {
                    *slot = stamp;
                    count += 1;
                }
            }
        }
        count
    }
}

impl<F: Scalar> SubmodularObjective<F> for InfluenceObjective {
    type State = ReachState;

    fn ground_size(&self) -> usize {
        self.reach.len()
    }

    fn value(&self, set: &ItemSet) -> F {
        let mut marks = vec![0u32; self.reach.len()];
        let count = self.reached_count(set.as_slice(), &mut marks, 1);
        F::of_usize(count) / F::of_usize(self.reach.len())
    }

    fn empty_state(&self) -> ReachState {
        ReachState {
            covered: vec![false; self.reach.len()],
        }
    }

    fn gain(&self, state: &ReachState, item: usize) -> F {
        let fresh = self.reach[item]
            .iter()
            .filter(|&&v| !state.covered[v as usize])
            .count();
        F::of_usize(fresh) / F::of_usize(self.reach.len())
    }

    fn insert(&self, state: &mut ReachState, item: usize) {
        for &v in &self.reach[item] {
            state.covered[v as usize] = true;
        }
    }
}

/// A base graph and `m` independently edge-sampled copies of it.
#[derive(Debug, Clone)]
pub struct InfluenceInstance {
    pub base: DirectedGraph,
    pub graphs: Vec<DirectedGraph>,
    pub objectives: Vec<InfluenceObjective>,
    pub p: f64,
    pub seed: u64,
}

impl InfluenceInstance {
    /// Samples `G_1..G_m`; `G_i` draws from substream `(i, 0)` of `seed`.
    pub fn sample(base: DirectedGraph, m: usize, p: f64, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty("subgraph family"));
        }
        let graphs = (0..m)
            .map(|i| sample_subgraph(&base, p, derive_seed(seed, i as u64, 0)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_graphs(base, graphs, p, seed)
    }

    /// Instance over explicitly given subgraphs of `base`.
    pub fn from_graphs(base: DirectedGraph, graphs: Vec<DirectedGraph>, p: f64, seed: u64) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::Empty("subgraph family"));
        }
        for g in &graphs {
            if g.node_count() != base.node_count() {
                return Err(Error::DimensionMismatch {
                    expected: base.node_count(),
                    found: g.node_count(),
                });
            }
            if let Some(&(s, d)) = g.edges().iter().find(|&&(s, d)| !base.has_edge(s as usize, d as usize)) {
                return Err(Error::invalid(format!("subgraph edge ({s}, {d}) is not in the base graph")));
            }
        }
        let objectives = graphs.iter().map(InfluenceObjective::new).collect::<Result<_>>()?;
        Ok(Self {
            base,
            graphs,
            objectives,
            p,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.graphs.len()
    }

    pub fn node_count(&self) -> usize {
        self.base.node_count()
    }

    /// Converts a normalized influence value to a node count.
    pub fn denormalize<F: Scalar>(&self, value: F) -> F {
        value * F::of_usize(self.node_count())
    }
}
