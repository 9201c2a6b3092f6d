//! JSON interchange formats. Hypergraphs (graphs are the r = 2 case) travel
//! as {"r", "n", "edges"} with an optional schema version field; unknown
//! fields are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hypergraph::Hypergraph;

fn default_version() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypergraphJson {
    #[serde(default = "default_version")]
    pub v: u32,
    pub r: usize,
    pub n: usize,
    pub edges: Vec<Vec<u32>>,
}

impl From<&Hypergraph> for HypergraphJson {
    fn from(h: &Hypergraph) -> Self {
        HypergraphJson {
            v: 1,
            r: h.r(),
            n: h.n(),
            edges: h.edges().map(|e| e.to_vec()).collect(),
        }
    }
}

impl TryFrom<HypergraphJson> for Hypergraph {
    type Error = Error;
    fn try_from(j: HypergraphJson) -> Result<Self> {
        if j.v != 1 {
            return Err(Error::invalid(format!("unsupported schema version {}", j.v)));
        }
        Hypergraph::from_edges(j.n, j.r, j.edges)
    }
}

pub fn hypergraph_to_json(h: &Hypergraph) -> String {
    serde_json::to_string_pretty(&HypergraphJson::from(h)).expect("serializable")
}

pub fn hypergraph_from_json(s: &str) -> Result<Hypergraph> {
    let j: HypergraphJson =
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("bad hypergraph JSON: {e}")))?;
    j.try_into()
}

pub fn graph_to_json(g: &Graph) -> String {
    let h = Hypergraph::from_edges(g.n(), 2, g.edges().map(|(u, v)| vec![u, v]))
        .expect("graph edges are valid 2-sets");
    hypergraph_to_json(&h)
}

pub fn graph_from_json(s: &str) -> Result<Graph> {
    let h = hypergraph_from_json(s)?;
    if h.r() != 2 {
        return Err(Error::invalid(format!("expected r = 2, got r = {}", h.r())));
    }
    Graph::from_edges(h.n(), h.edges().map(|e| (e[0], e[1])))
}

pub fn graph_as_two_uniform(g: &Graph) -> Hypergraph {
    Hypergraph::from_edges(g.n(), 2, g.edges().map(|(u, v)| vec![u, v]))
        .expect("graph edges are valid 2-sets")
}
