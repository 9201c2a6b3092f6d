//! Simple graphs over dense vertex ids `0..n`, plus the graph operators used
//! throughout: powers, complete blow-ups, subdivisions and the standard
//! families. Edges are stored sorted so equal graphs compare equal.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(u32, u32)>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.try_add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn try_add_edge(&mut self, u: u32, v: u32) -> Result<()> {
        if u == v {
            return Err(Error::invalid(format!("loop at vertex {u}")));
        }
        if u as usize >= self.n || v as usize >= self.n {
            return Err(Error::invalid(format!(
                "edge ({u},{v}) out of range for n={}",
                self.n
            )));
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn add_edge(&mut self, u: u32, v: u32) {
        self.try_add_edge(u, v).expect("edge endpoints in range");
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        u != v && self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Adjacency lists, built on demand.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        adj
    }

    /// Adjacency as one u64-block bitmask row per vertex.
    pub fn adjacency_masks(&self) -> Vec<Vec<u64>> {
        let blocks = self.n.div_ceil(64);
        let mut rows = vec![vec![0u64; blocks]; self.n];
        for &(u, v) in &self.edges {
            rows[u as usize][v as usize / 64] |= 1 << (v % 64);
            rows[v as usize][u as usize / 64] |= 1 << (u % 64);
        }
        rows
    }

    pub fn degree(&self, u: u32) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == u || b == u)
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// BFS distances from `src`; unreachable vertices get `UNREACHABLE`.
    pub fn bfs_distances(&self, src: u32) -> Vec<u32> {
        bfs_from(&self.adjacency(), src)
    }

    /// All-pairs BFS distances, parallel over sources.
    pub fn all_pairs_distances(&self, mode: ExecMode) -> Vec<Vec<u32>> {
        let adj = self.adjacency();
        map_indexed(mode, self.n, |s| bfs_from(&adj, s as u32))
    }

    /// `t`-th power: join vertices at graph distance `1..=t`.
    pub fn power(&self, t: usize) -> Graph {
        assert!(t >= 1, "power exponent must be positive");
        if t == 1 {
            return self.clone();
        }
        let dist = self.all_pairs_distances(ExecMode::default());
        let mut g = Graph::new(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                let d = dist[u][v];
                if d != UNREACHABLE && d as usize <= t {
                    g.add_edge(u as u32, v as u32);
                }
            }
        }
        g
    }

    /// Complete blow-up: each vertex becomes a `b`-clique, blocks of adjacent
    /// vertices are completely joined. Block ids are contiguous: the copies
    /// of vertex `u` are `u*b..(u+1)*b`. Returns the graph and the block map
    /// (new vertex -> original vertex).
    pub fn blowup(&self, b: usize) -> (Graph, Vec<u32>) {
        assert!(b >= 1, "blow-up factor must be positive");
        let mut g = Graph::new(self.n * b);
        let mut block = vec![0u32; self.n * b];
        for u in 0..self.n {
            for j in 0..b {
                block[u * b + j] = u as u32;
                for i in 0..j {
                    g.add_edge((u * b + i) as u32, (u * b + j) as u32);
                }
            }
        }
        for &(u, v) in &self.edges {
            for i in 0..b {
                for j in 0..b {
                    g.add_edge((u as usize * b + i) as u32, (v as usize * b + j) as u32);
                }
            }
        }
        (g, block)
    }

    /// Replace every edge by a path of `q` edges through fresh interior
    /// vertices; `q = 1` is the identity, `q = 2` the 1-subdivision.
    pub fn subdivide(&self, q: usize) -> Graph {
        assert!(q >= 1, "subdivision parameter must be positive");
        if q == 1 {
            return self.clone();
        }
        let m = self.edges.len();
        let mut g = Graph::new(self.n + (q - 1) * m);
        let mut next = self.n as u32;
        for &(u, v) in &self.edges {
            let mut prev = u;
            for _ in 0..q - 1 {
                g.add_edge(prev, next);
                prev = next;
                next += 1;
            }
            g.add_edge(prev, v);
        }
        g
    }

    /// Two-colouring if one exists (per connected component, colour of the
    /// lowest vertex is 0).
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let adj = self.adjacency();
        let mut colour = vec![u8::MAX; self.n];
        for s in 0..self.n {
            if colour[s] != u8::MAX {
                continue;
            }
            colour[s] = 0;
            let mut queue = std::collections::VecDeque::from([s as u32]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u as usize] {
                    if colour[v as usize] == u8::MAX {
                        colour[v as usize] = 1 - colour[u as usize];
                        queue.push_back(v);
                    } else if colour[v as usize] == colour[u as usize] {
                        return None;
                    }
                }
            }
        }
        Some(colour)
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// Induced subgraph on `keep` (relabelled 0..keep.len() in the given
    /// order). Returns the graph and the kept original ids.
    pub fn induced(&self, keep: &[u32]) -> (Graph, Vec<u32>) {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            index[v as usize] = i;
        }
        let mut g = Graph::new(keep.len());
        for &(u, v) in &self.edges {
            let (iu, iv) = (index[u as usize], index[v as usize]);
            if iu != usize::MAX && iv != usize::MAX {
                g.add_edge(iu as u32, iv as u32);
            }
        }
        (g, keep.to_vec())
    }

    /// Subgraph on the same vertex set keeping only edges accepted by `f`.
    pub fn edge_subgraph(&self, mut f: impl FnMut(u32, u32) -> bool) -> Graph {
        let mut g = Graph::new(self.n);
        for &(u, v) in &self.edges {
            if f(u, v) {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u as u32, v as u32);
            }
        }
        g
    }

    pub fn path(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for u in 1..n {
            g.add_edge(u as u32 - 1, u as u32);
        }
        g
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3);
        let mut g = Graph::path(n);
        g.add_edge(0, n as u32 - 1);
        g
    }

    /// Complete bipartite K_{a,b}: left side `0..a`, right side `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Graph {
        let mut g = Graph::new(a + b);
        for u in 0..a {
            for v in 0..b {
                g.add_edge(u as u32, (a + v) as u32);
            }
        }
        g
    }

    /// Erdos-Renyi G(n, p) sample.
    pub fn random(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    g.add_edge(u as u32, v as u32);
                }
            }
        }
        g
    }
}

fn bfs_from(adj: &[Vec<u32>], src: u32) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; adj.len()];
    dist[src as usize] = 0;
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u as usize] {
            if dist[v as usize] == UNREACHABLE {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_of_path() {
        let p4 = Graph::path(4);
        assert_eq!(p4.power(1), p4);
        let sq = p4.power(2);
        let expect: BTreeSet<(u32, u32)> =
            [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)].into_iter().collect();
        assert_eq!(sq.edges().collect::<BTreeSet<_>>(), expect);
        assert_eq!(p4.power(3), Graph::complete(4));
    }

    #[test]
    fn blowup_counts() {
        let (k4, _) = Graph::complete(2).blowup(2);
        assert_eq!(k4, Graph::complete(4));
        let (k5, _) = Graph::new(1).blowup(5);
        assert_eq!(k5, Graph::complete(5));
        // oracle: count pairs in same block plus pairs in adjacent blocks
        let p3 = Graph::path(3);
        let (b, block) = p3.blowup(2);
        let mut expect = 0;
        for u in 0..6u32 {
            for v in u + 1..6 {
                let (bu, bv) = (block[u as usize], block[v as usize]);
                if bu == bv || p3.has_edge(bu, bv) {
                    expect += 1;
                }
            }
        }
        assert_eq!(expect, 11);
        assert_eq!(b.edge_count(), expect);
    }

    #[test]
    fn subdivision_shapes() {
        assert_eq!(Graph::complete(3).subdivide(2), Graph::cycle(6));
        assert_eq!(Graph::complete(2).subdivide(3), {
            // subdivision lays interior vertices after the originals
            let mut p = Graph::new(4);
            p.add_edge(0, 2);
            p.add_edge(2, 3);
            p.add_edge(3, 1);
            p
        });
        let s = Graph::complete(4).subdivide(2);
        assert_eq!(s.n(), 10);
        assert_eq!(s.edge_count(), 12);
        assert!(s.is_bipartite());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn distances_on_cycle() {
        let c8 = Graph::cycle(8);
        let d = c8.bfs_distances(0);
        assert_eq!(d[4], 4);
        assert_eq!(d[7], 1);
        let all = c8.all_pairs_distances(ExecMode::Parallel);
        assert_eq!(all[2][6], 4);
    }
}
