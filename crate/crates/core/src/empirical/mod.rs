//! Desk-scale simulation of the embedding algorithm: sample a graph from the graphon,
//! fit node vectors by gradient descent on the pairwise cross-entropy, and compare the
//! fitted inner products with the limiting gram.

mod edgelist;
mod fit;
mod gap;
mod sample;

pub use edgelist::{read_edge_list, write_edge_list};
pub use fit::{fit_embeddings, EmbeddingFit, FitOptions};
pub use gap::{gap_report, GapReport};
pub use sample::{sample_graph, SampledGraph};
