//! Backtracking sub-hypergraph search: an injective vertex map sending every
//! pattern edge onto a host edge. Used for every containment claim in the
//! crate, so it prunes on degrees and checks pattern edges the moment they
//! are fully placed.

use std::collections::BTreeSet;

use crate::hypergraph::Hypergraph;
use crate::mapping::VertexMap;

struct Search<'a> {
    pattern_edges: Vec<Vec<u32>>,
    edges_by_vertex: Vec<Vec<usize>>,
    host: &'a Hypergraph,
    host_degree: Vec<usize>,
    pattern_degree: Vec<usize>,
    order: Vec<u32>,
}

/// Injective embedding of `pattern` into `host` mapping edges to edges, or
/// None when an exhaustive search finds no embedding. Uniformities must
/// match. Vertices isolated in the pattern are placed greedily at the end.
pub fn find_subhypergraph(pattern: &Hypergraph, host: &Hypergraph) -> Option<VertexMap> {
    assert_eq!(pattern.r(), host.r(), "uniformities must match");
    if pattern.n() > host.n() || pattern.edge_count() > host.edge_count() {
        return None;
    }
    let pattern_edges: Vec<Vec<u32>> = pattern.edges().map(|e| e.to_vec()).collect();
    let mut edges_by_vertex = vec![Vec::new(); pattern.n()];
    for (i, e) in pattern_edges.iter().enumerate() {
        for &v in e {
            edges_by_vertex[v as usize].push(i);
        }
    }
    let search = Search {
        pattern_edges,
        edges_by_vertex,
        host,
        host_degree: host.degrees(),
        pattern_degree: pattern.degrees(),
        order: placement_order(pattern),
    };
    let mut map = vec![u32::MAX; pattern.n()];
    let mut used = vec![false; host.n()];
    if search.place(0, &mut map, &mut used) {
        Some(VertexMap::new(host.n(), map))
    } else {
        None
    }
}

/// Most-constrained-first order: highest degree start, then always a vertex
/// with the most already-ordered incident edges.
fn placement_order(pattern: &Hypergraph) -> Vec<u32> {
    let n = pattern.n();
    let deg = pattern.degrees();
    let edges: Vec<BTreeSet<u32>> = pattern
        .edges()
        .map(|e| e.iter().copied().collect())
        .collect();
    let mut chosen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize, u32)> = None;
        for v in 0..n as u32 {
            if chosen[v as usize] {
                continue;
            }
            let attached = edges
                .iter()
                .filter(|e| e.contains(&v) && e.iter().any(|&u| chosen[u as usize]))
                .count();
            let key = (attached, deg[v as usize], v);
            let better = match best {
                None => true,
                Some((a, d, bv)) => {
                    (key.0, key.1) > (a, d) || ((key.0, key.1) == (a, d) && v < bv)
                }
            };
            if better {
                best = Some(key);
            }
        }
        let v = best.unwrap().2;
        chosen[v as usize] = true;
        order.push(v);
    }
    order
}

impl Search<'_> {
    fn place(&self, depth: usize, map: &mut Vec<u32>, used: &mut Vec<bool>) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let p = self.order[depth];
        'cand: for h in 0..self.host.n() as u32 {
            if used[h as usize] || self.host_degree[h as usize] < self.pattern_degree[p as usize] {
                continue;
            }
            map[p as usize] = h;
            for &ei in &self.edges_by_vertex[p as usize] {
                let e = &self.pattern_edges[ei];
                if e.iter().all(|&v| map[v as usize] != u32::MAX) {
                    let image: Vec<u32> = e.iter().map(|&v| map[v as usize]).collect();
                    if !self.host.has_edge(&image) {
                        map[p as usize] = u32::MAX;
                        continue 'cand;
                    }
                }
            }
            used[h as usize] = true;
            if self.place(depth + 1, map, used) {
                return true;
            }
            used[h as usize] = false;
            map[p as usize] = u32::MAX;
        }
        false
    }
}

/// Both-ways embedding check on equal sizes.
pub fn are_isomorphic(a: &Hypergraph, b: &Hypergraph) -> bool {
    a.n() == b.n()
        && a.r() == b.r()
        && a.edge_count() == b.edge_count()
        && find_subhypergraph(a, b).is_some()
        && find_subhypergraph(b, a).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::hypergraph::{clique_hypergraph, tight_path};

    fn as_two_graph(g: &Graph) -> Hypergraph {
        Hypergraph::from_edges(g.n(), 2, g.edges().map(|(u, v)| vec![u, v])).unwrap()
    }

    #[test]
    fn identity_embedding_found() {
        let h = tight_path(6, 3).unwrap();
        let m = find_subhypergraph(&h, &h).unwrap();
        assert!(m.is_injective());
        for e in h.edges() {
            let image: Vec<u32> = e.iter().map(|&v| m.apply(v)).collect();
            assert!(h.has_edge(&image));
        }
    }

    #[test]
    fn tight_path_inside_clique_power() {
        let pattern = tight_path(5, 3).unwrap();
        let host = clique_hypergraph(&Graph::path(5).power(2), 3);
        assert!(find_subhypergraph(&pattern, &host).is_some());
        assert!(are_isomorphic(&pattern, &host));
    }

    #[test]
    fn k4_not_in_c5() {
        let k4 = as_two_graph(&Graph::complete(4));
        let c5 = as_two_graph(&Graph::cycle(5));
        assert!(find_subhypergraph(&k4, &c5).is_none());
        // but a path fits
        let p4 = as_two_graph(&Graph::path(4));
        assert!(find_subhypergraph(&p4, &c5).is_some());
    }

    #[test]
    fn embedding_respects_edges() {
        let pattern = as_two_graph(&Graph::cycle(4));
        let host = as_two_graph(&Graph::complete_bipartite(3, 3));
        let m = find_subhypergraph(&pattern, &host).expect("C4 in K33");
        for e in pattern.edges() {
            assert!(host.has_edge(&[m.apply(e[0]), m.apply(e[1])]));
        }
    }
}
