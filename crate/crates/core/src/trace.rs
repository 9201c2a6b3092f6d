//! Build traces: certificates of membership in the family of graphs grown
//! from a singleton by adding degree-1 vertices or attaching internally
//! fresh paths of length at least `min_path`. Replaying a trace is the
//! ground truth; generators only ever emit traces that replay cleanly.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum TraceStep {
    Leaf { at: u32 },
    Path { u: u32, v: u32, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildTrace {
    /// degree cap
    pub d: usize,
    /// minimum attached-path length
    pub l: usize,
    pub steps: Vec<TraceStep>,
}

impl BuildTrace {
    pub fn new(d: usize, l: usize) -> Self {
        BuildTrace {
            d,
            l,
            steps: Vec::new(),
        }
    }

    /// Number of vertices of the replayed graph.
    pub fn vertex_count(&self) -> usize {
        1 + self
            .steps
            .iter()
            .map(|s| match s {
                TraceStep::Leaf { .. } => 1,
                TraceStep::Path { len, .. } => len - 1,
            })
            .sum::<usize>()
    }

    /// Replay the trace, verifying every constraint: degree cap, path length
    /// floor, endpoints already present. Interior path vertices are fresh by
    /// construction (ids are assigned in replay order). A path with equal
    /// endpoints is accepted when its length is at least 3; the distance
    /// halving construction can anchor both ends of a long path at one
    /// vertex, which closes a cycle.
    pub fn replay(&self) -> Result<Graph> {
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut deg: Vec<usize> = vec![0];
        let mut bump = |deg: &mut Vec<usize>, v: u32, step: usize, cap: usize| -> Result<()> {
            deg[v as usize] += 1;
            if deg[v as usize] > cap {
                return Err(Error::BadTrace {
                    step,
                    reason: format!("vertex {v} exceeds degree cap {cap}"),
                });
            }
            Ok(())
        };
        for (i, step) in self.steps.iter().enumerate() {
            let n = deg.len() as u32;
            match *step {
                TraceStep::Leaf { at } => {
                    if at >= n {
                        return Err(Error::BadTrace {
                            step: i,
                            reason: format!("leaf attach point {at} not yet present"),
                        });
                    }
                    deg.push(0);
                    edges.push((at, n));
                    bump(&mut deg, at, i, self.d)?;
                    bump(&mut deg, n, i, self.d)?;
                }
                TraceStep::Path { u, v, len } => {
                    if u >= n || v >= n {
                        return Err(Error::BadTrace {
                            step: i,
                            reason: format!("path endpoint {u} or {v} not yet present"),
                        });
                    }
                    if len < self.l {
                        return Err(Error::BadTrace {
                            step: i,
                            reason: format!("path length {len} below minimum {}", self.l),
                        });
                    }
                    if u == v && len < 3 {
                        return Err(Error::BadTrace {
                            step: i,
                            reason: "closed path needs length at least 3".to_string(),
                        });
                    }
                    let mut prev = u;
                    for j in 0..len - 1 {
                        let fresh = n + j as u32;
                        deg.push(0);
                        edges.push((prev, fresh));
                        bump(&mut deg, prev, i, self.d)?;
                        bump(&mut deg, fresh, i, self.d)?;
                        prev = fresh;
                    }
                    edges.push((prev, v));
                    bump(&mut deg, prev, i, self.d)?;
                    bump(&mut deg, v, i, self.d)?;
                }
            }
        }
        Graph::from_edges(deg.len(), edges)
    }
}

/// Replays and returns the graph, or the violated constraint.
pub fn verify_trace(trace: &BuildTrace) -> Result<Graph> {
    trace.replay()
}

/// Seeded random member of the family on exactly `n` vertices, degree cap
/// `d`, attached paths of length at least `l`. Returns the graph and its
/// membership witness.
pub fn random_a_graph(n: usize, d: usize, l: usize, seed: u64) -> Result<(Graph, BuildTrace)> {
    if n == 0 {
        return Err(Error::invalid("need at least one vertex"));
    }
    if d < 1 || l < 1 {
        return Err(Error::invalid("need d >= 1 and l >= 1"));
    }
    const RETRIES: usize = 32;
    for attempt in 0..RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64 * 0x9e37));
        if let Some(trace) = try_random_trace(n, d, l, &mut rng) {
            let g = trace.replay()?;
            debug_assert_eq!(g.n(), n);
            return Ok((g, trace));
        }
    }
    Err(Error::RetriesExhausted {
        retries: RETRIES,
        what: format!("random graph trace with n={n}, d={d}, l={l}"),
    })
}

fn try_random_trace(n: usize, d: usize, l: usize, rng: &mut ChaCha8Rng) -> Option<BuildTrace> {
    let mut trace = BuildTrace::new(d, l);
    let mut deg: Vec<usize> = vec![0];
    while deg.len() < n {
        let budget = n - deg.len();
        let spare: Vec<u32> = (0..deg.len() as u32)
            .filter(|&v| deg[v as usize] < d)
            .collect();
        if spare.is_empty() {
            return None; // d = 1 dead end
        }
        // attach a path when there is room for one and the coin agrees
        let path_room = budget >= l.max(2) - 1 && spare.len() >= 2 && d >= 2;
        if path_room && rng.gen_ratio(1, 3) {
            let len = rng.gen_range(l.max(2)..=budget + 1);
            let mut ends = spare.clone();
            ends.shuffle(rng);
            trace.steps.push(TraceStep::Path {
                u: ends[0],
                v: ends[1],
                len,
            });
            deg[ends[0] as usize] += 1;
            deg[ends[1] as usize] += 1;
            for _ in 0..len - 1 {
                deg.push(2);
            }
        } else {
            let at = *spare.choose(rng).unwrap();
            trace.steps.push(TraceStep::Leaf { at });
            deg[at as usize] += 1;
            deg.push(1);
        }
    }
    Some(trace)
}
