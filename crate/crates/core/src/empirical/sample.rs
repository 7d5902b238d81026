use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphon::SbmGraphon;
use crate::scalar::Scalar;

/// Simple undirected graph on `n` nodes with a community label per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledGraph {
    pub n: usize,
    /// `true` for community 1 (latent position `<= a`).
    pub in_first: Vec<bool>,
    /// Row-major `n x n`, symmetric, zero diagonal.
    adjacency: Vec<bool>,
    pub seed: u64,
}

impl SampledGraph {
    /// Graph with no edges; used when importing edge lists.
    pub fn empty(n: usize, in_first: Vec<bool>, seed: u64) -> Result<Self> {
        if in_first.len() != n {
            return Err(Error::EdgeList(format!("{} labels for {n} nodes", in_first.len())));
        }
        Ok(Self {
            n,
            in_first,
            adjacency: vec![false; n * n],
            seed,
        })
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    /// Adds the undirected edge `{i, j}`; self loops are rejected.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::EdgeList(format!("invalid edge {i} {j} for {} nodes", self.n)));
        }
        self.adjacency[i * self.n + j] = true;
        self.adjacency[j * self.n + i] = true;
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Edges `(i, j)` with `i < j`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).filter(move |&j| self.has_edge(i, j)).map(move |j| (i, j)))
    }

    pub fn community_sizes(&self) -> (usize, usize) {
        let first = self.in_first.iter().filter(|&&b| b).count();
        (first, self.n - first)
    }

    /// Returns the graph with node `i` renamed `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut in_first = vec![false; n];
        let mut adjacency = vec![false; n * n];
        for i in 0..n {
            in_first[perm[i]] = self.in_first[i];
            for j in 0..n {
                adjacency[perm[i] * n + perm[j]] = self.adjacency[i * n + j];
            }
        }
        Self {
            n,
            in_first,
            adjacency,
            seed: self.seed,
        }
    }
}

/// Draws `n` latent uniforms, labels node `i` community 1 when `lambda_i <= a`, then
/// includes each pair independently with the block probability. Deterministic in `seed`.
pub fn sample_graph<T: Scalar>(g: &SbmGraphon<T>, n: usize, seed: u64) -> Result<SampledGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "need at least two nodes",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = g.a.as_f64();
    let (p, q, r) = (g.p.as_f64(), g.q.as_f64(), g.r.as_f64());
    let in_first: Vec<bool> = (0..n).map(|_| rng.gen::<f64>() <= a).collect();
    let mut graph = SampledGraph::empty(n, in_first, seed)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let prob = match (graph.in_first[i], graph.in_first[j]) {
                (true, true) => p,
                (false, false) => r,
                _ => q,
            };
            if rng.gen::<f64>() < prob {
                graph.add_edge(i, j)?;
            }
        }
    }
    Ok(graph)
}
