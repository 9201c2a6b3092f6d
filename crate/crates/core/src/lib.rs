//! Constructive machinery for linear size-Ramsey hosts: graph/hypergraph
//! operators, certified expander generation and boosting, good-embedding
//! machinery for expanding graphs, ordered-tree Ramsey searches, hanging-tree
//! trimming, tree skeletons, the distance-halving reduction pipeline, and a
//! brute-force arrowing oracle that grounds everything at desk scale.

pub mod arrowing;
pub mod combin;
pub mod embed;
pub mod error;
pub mod exec;
pub mod expander;
pub mod graph;
pub mod hypergraph;
pub mod io;
pub mod mapping;
pub mod otree;
pub mod reduction;
pub mod skeleton;
pub mod subiso;
pub mod trace;
pub mod trim;
pub mod vizing;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use graph::Graph;
pub use hypergraph::Hypergraph;
pub use mapping::VertexMap;
