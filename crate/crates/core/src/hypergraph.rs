//! r-uniform hypergraphs over dense vertex ids, tight paths and their
//! powers, clique hypergraphs of graphs, and seeded generation of r-uniform
//! trees (edge-ordered, with the new-edge intersection confined to a single
//! earlier edge).

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    r: usize,
    edges: BTreeSet<Vec<u32>>,
}

impl Hypergraph {
    pub fn new(n: usize, r: usize) -> Self {
        Hypergraph {
            n,
            r,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(
        n: usize,
        r: usize,
        edges: impl IntoIterator<Item = Vec<u32>>,
    ) -> Result<Self> {
        let mut h = Hypergraph::new(n, r);
        for e in edges {
            h.try_add_edge(e)?;
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edges(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.edges.iter().map(|e| e.as_slice())
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn try_add_edge(&mut self, mut e: Vec<u32>) -> Result<()> {
        e.sort_unstable();
        if e.len() != self.r {
            return Err(Error::invalid(format!(
                "edge has {} vertices, expected r={}",
                e.len(),
                self.r
            )));
        }
        if e.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("edge has repeated vertices".to_string()));
        }
        if let Some(&v) = e.last() {
            if v as usize >= self.n {
                return Err(Error::invalid(format!(
                    "vertex {v} out of range for n={}",
                    self.n
                )));
            }
        }
        self.edges.insert(e);
        Ok(())
    }

    pub fn add_edge(&mut self, e: Vec<u32>) {
        self.try_add_edge(e).expect("valid edge");
    }

    pub fn has_edge(&self, e: &[u32]) -> bool {
        let mut e = e.to_vec();
        e.sort_unstable();
        self.edges.contains(&e)
    }

    /// Vertex degree: number of incident edges.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for e in &self.edges {
            for &v in e {
                deg[v as usize] += 1;
            }
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Number of connected components, counting isolated vertices.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for e in &self.edges {
            for w in e.windows(2) {
                let (a, b) = (find(&mut parent, w[0] as usize), find(&mut parent, w[1] as usize));
                parent[a] = b;
            }
        }
        (0..self.n).filter(|&v| find(&mut parent, v) == v).count()
    }

    /// Edges whose vertices all lie inside `verts`.
    pub fn induced_edges(&self, verts: &BTreeSet<u32>) -> Vec<Vec<u32>> {
        self.edges
            .iter()
            .filter(|e| e.iter().all(|v| verts.contains(v)))
            .cloned()
            .collect()
    }

    pub fn is_sub_hypergraph_of(&self, other: &Hypergraph) -> bool {
        self.r == other.r && self.edges.is_subset(&other.edges)
    }

    /// The `t`-power: r-sets contained in some tight path of this hypergraph
    /// on at most `r + t - 1` vertices. A tight path is a sequence of
    /// distinct vertices, at least r long, whose every r consecutive
    /// vertices form an edge.
    pub fn power(&self, t: usize) -> Hypergraph {
        assert!(t >= 1, "power exponent must be positive");
        let mut out = Hypergraph::new(self.n, self.r);
        let max_len = self.r + t - 1;
        for path in self.tight_paths_up_to(max_len) {
            let mut support: Vec<u32> = path.clone();
            support.sort_unstable();
            crate::combin::for_each_combination(&support, self.r, |e| {
                out.edges.insert(e.to_vec());
                None::<()>
            });
        }
        out
    }

    /// All tight paths (vertex sequences) of length `r..=max_len`, one
    /// orientation arbitrary (both orientations are generated; callers that
    /// only need supports are insensitive to that).
    pub fn tight_paths_up_to(&self, max_len: usize) -> Vec<Vec<u32>> {
        let r = self.r;
        let mut out = Vec::new();
        if max_len < r {
            return out;
        }
        // completions[w] = vertices u such that w + {u} spans an edge, for
        // (r-1)-sets w
        let mut completions: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
        for e in &self.edges {
            for skip in 0..r {
                let mut w: Vec<u32> = e.clone();
                let u = w.remove(skip);
                completions.entry(w).or_default().push(u);
            }
        }
        let mut stack: Vec<Vec<u32>> = Vec::new();
        for e in &self.edges {
            let mut perm: Vec<u32> = e.clone();
            permutations(&mut perm, 0, &mut |p| stack.push(p.to_vec()));
        }
        while let Some(path) = stack.pop() {
            if path.len() < max_len {
                let mut window: Vec<u32> = path[path.len() + 1 - r..].to_vec();
                window.sort_unstable();
                if let Some(cands) = completions.get(&window) {
                    for &u in cands {
                        if !path.contains(&u) {
                            let mut longer = path.clone();
                            longer.push(u);
                            stack.push(longer);
                        }
                    }
                }
            }
            out.push(path);
        }
        out
    }
}

fn permutations(items: &mut [u32], k: usize, f: &mut impl FnMut(&[u32])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Tight path P_n^(r): edges are the r-sets of consecutive integers in [0,n).
pub fn tight_path(n: usize, r: usize) -> Result<Hypergraph> {
    if r < 1 || n < r {
        return Err(Error::invalid(format!("tight path needs n >= r >= 1, got n={n}, r={r}")));
    }
    let mut h = Hypergraph::new(n, r);
    for i in 0..=n - r {
        h.add_edge((i as u32..(i + r) as u32).collect());
    }
    Ok(h)
}

/// t-power of the tight path: all r-subsets of every window of r+t-1
/// consecutive integers.
pub fn tight_path_power(n: usize, r: usize, t: usize) -> Result<Hypergraph> {
    if r < 1 || n < r || t < 1 {
        return Err(Error::invalid(format!(
            "tight path power needs n >= r >= 1 and t >= 1, got n={n}, r={r}, t={t}"
        )));
    }
    let mut h = Hypergraph::new(n, r);
    let w = (r + t - 1).min(n);
    for start in 0..=n - w {
        let window: Vec<u32> = (start as u32..(start + w) as u32).collect();
        crate::combin::for_each_combination(&window, r, |e| {
            h.add_edge(e.to_vec());
            None::<()>
        });
    }
    Ok(h)
}

/// K_r(G): the r-graph of r-cliques of G.
pub fn clique_hypergraph(g: &Graph, r: usize) -> Hypergraph {
    assert!(r >= 1, "clique size must be positive");
    let mut h = Hypergraph::new(g.n(), r);
    let adj = g.adjacency_masks();
    let mut clique: Vec<u32> = Vec::with_capacity(r);
    fn extend(
        g_n: usize,
        adj: &[Vec<u64>],
        clique: &mut Vec<u32>,
        r: usize,
        out: &mut Hypergraph,
    ) {
        if clique.len() == r {
            out.add_edge(clique.clone());
            return;
        }
        let lo = clique.last().map(|&v| v + 1).unwrap_or(0);
        'next: for v in lo..g_n as u32 {
            for &u in clique.iter() {
                if adj[u as usize][v as usize / 64] & (1 << (v % 64)) == 0 {
                    continue 'next;
                }
            }
            clique.push(v);
            extend(g_n, adj, clique, r, out);
            clique.pop();
        }
    }
    extend(g.n(), &adj, &mut clique, r, &mut h);
    h
}

/// An edge-ordered r-uniform tree: for i >= 2 the intersection of e_i with
/// everything earlier has at most r-1 vertices and is contained in e_{parent(i)}.
#[derive(Debug, Clone)]
pub struct HypergraphTree {
    pub hypergraph: Hypergraph,
    pub edge_order: Vec<Vec<u32>>,
    /// parents[i] is an index i0 < i witnessing the containment; parents[0] = 0.
    pub parents: Vec<usize>,
}

/// Re-check the tree property for an explicit edge order; on success returns
/// the minimal witness parent for each edge.
pub fn validate_tree_order(n: usize, r: usize, order: &[Vec<u32>], max_degree: Option<usize>) -> Result<Vec<usize>> {
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut deg = vec![0usize; n];
    let mut parents = vec![0usize; order.len()];
    for (i, e) in order.iter().enumerate() {
        let edge: BTreeSet<u32> = e.iter().copied().collect();
        if edge.len() != r || e.len() != r {
            return Err(Error::invalid(format!("edge {i} is not an r-set")));
        }
        if edge.iter().any(|&v| v as usize >= n) {
            return Err(Error::invalid(format!("edge {i} out of vertex range")));
        }
        if i > 0 {
            let overlap: BTreeSet<u32> = edge.intersection(&seen).copied().collect();
            if overlap.len() > r - 1 {
                return Err(Error::invalid(format!(
                    "edge {i} meets earlier edges in {} >= r vertices",
                    overlap.len()
                )));
            }
            let witness = order[..i].iter().position(|f| {
                let fs: BTreeSet<u32> = f.iter().copied().collect();
                overlap.is_subset(&fs)
            });
            match witness {
                Some(i0) => parents[i] = i0,
                None => {
                    return Err(Error::invalid(format!(
                        "edge {i}: overlap with the past is not inside any single earlier edge"
                    )))
                }
            }
        }
        for &v in &edge {
            deg[v as usize] += 1;
            if let Some(cap) = max_degree {
                if deg[v as usize] > cap {
                    return Err(Error::invalid(format!(
                        "vertex {v} exceeds degree cap {cap} at edge {i}"
                    )));
                }
            }
        }
        seen.extend(edge);
    }
    Ok(parents)
}

/// Seeded random r-uniform tree on vertex set [0,n) with max degree at most
/// d. With `connected`, every edge after the first shares a vertex with the
/// past; otherwise fresh components may be started (the definition permits
/// forests). The output is re-validated before returning.
pub fn random_hypergraph_tree(
    n: usize,
    r: usize,
    d: usize,
    connected: bool,
    seed: u64,
) -> Result<HypergraphTree> {
    if r < 1 || n < r || d < 1 {
        return Err(Error::invalid(format!(
            "tree generation needs n >= r >= 1 and d >= 1, got n={n}, r={r}, d={d}"
        )));
    }
    const RETRIES: usize = 32;
    for attempt in 0..RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        if let Some(tree) = try_random_tree(n, r, d, connected, &mut rng) {
            let parents =
                validate_tree_order(n, r, &tree, Some(d)).expect("generated order re-validates");
            let hypergraph = Hypergraph::from_edges(n, r, tree.iter().cloned())?;
            return Ok(HypergraphTree {
                hypergraph,
                edge_order: tree,
                parents,
            });
        }
    }
    Err(Error::RetriesExhausted {
        retries: RETRIES,
        what: format!("random r-uniform tree with n={n}, r={r}, d={d}"),
    })
}

fn try_random_tree(
    n: usize,
    r: usize,
    d: usize,
    connected: bool,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Vec<u32>>> {
    let mut fresh: Vec<u32> = (0..n as u32).collect();
    fresh.shuffle(rng);
    let mut deg = vec![0usize; n];
    let mut order: Vec<Vec<u32>> = Vec::new();

    let first: Vec<u32> = fresh.drain(..r).collect();
    for &v in &first {
        deg[v as usize] = 1;
    }
    order.push(first);

    // keep attaching while there is room; stop early at random for variety
    while !fresh.is_empty() {
        if order.len() > 1 && rng.gen_ratio(1, 8) {
            break;
        }
        let start_new = !connected && fresh.len() >= r && rng.gen_ratio(1, 4);
        if start_new {
            let e: Vec<u32> = fresh.drain(..r).collect();
            for &v in &e {
                deg[v as usize] = 1;
            }
            order.push(e);
            continue;
        }
        // attach to a random earlier edge through a subset with spare degree
        let mut edge_ids: Vec<usize> = (0..order.len()).collect();
        edge_ids.shuffle(rng);
        let mut attached = false;
        'edges: for i0 in edge_ids {
            let spare: Vec<u32> = order[i0]
                .iter()
                .copied()
                .filter(|&v| deg[v as usize] < d)
                .collect();
            if spare.is_empty() {
                continue;
            }
            let q_max = spare.len().min(r - 1).min(fresh.len().checked_sub(0)?);
            for q in (1..=q_max).rev() {
                if fresh.len() < r - q {
                    continue;
                }
                let mut overlap = spare.clone();
                overlap.shuffle(rng);
                overlap.truncate(q);
                let mut e = overlap.clone();
                for _ in 0..r - q {
                    e.push(fresh.pop().unwrap());
                }
                for &v in &e {
                    deg[v as usize] += 1;
                }
                order.push(e);
                attached = true;
                break 'edges;
            }
        }
        if !attached {
            break;
        }
    }
    Some(order)
}

/// The host hypergraph K_r(G^k[K_B]) for a generated eps-expander G; see the
/// expander module for generation. Returns the host together with the
/// expander and block map.
pub fn build_host(
    n: usize,
    eps: crate::expander::Eps,
    k: usize,
    b: usize,
    r: usize,
    seed: u64,
    retries: usize,
) -> Result<(Hypergraph, Graph, Vec<u32>)> {
    let (g, _cert) = crate::expander::random_expander(n, eps, seed, retries)?;
    let (blown, block) = g.power(k).blowup(b);
    Ok((clique_hypergraph(&blown, r), g, block))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tight_path_edges() {
        let p = tight_path(4, 2).unwrap();
        assert_eq!(
            p.edges().map(|e| e.to_vec()).collect::<Vec<_>>(),
            vec![vec![0, 1], vec![1, 2], vec![2, 3]]
        );
        let p53 = tight_path(5, 3).unwrap();
        assert_eq!(p53.edge_count(), 3);
        assert!(p53.has_edge(&[0, 1, 2]) && p53.has_edge(&[1, 2, 3]) && p53.has_edge(&[2, 3, 4]));
        assert_eq!(tight_path(3, 3).unwrap().edge_count(), 1);
        assert!(tight_path(2, 3).is_err());
    }

    #[test]
    fn tight_path_power_window_count() {
        assert_eq!(tight_path_power(5, 3, 1).unwrap(), tight_path(5, 3).unwrap());
        // oracle: 3-subsets of {0..3} union 3-subsets of {1..4}
        let mut expect: BTreeSet<Vec<u32>> = BTreeSet::new();
        for window in [[0u32, 1, 2, 3], [1, 2, 3, 4]] {
            crate::combin::for_each_combination(&window, 3, |e| {
                expect.insert(e.to_vec());
                None::<()>
            });
        }
        assert_eq!(expect.len(), 7);
        let p = tight_path_power(5, 3, 2).unwrap();
        assert_eq!(p.edges().map(|e| e.to_vec()).collect::<BTreeSet<_>>(), expect);
    }

    #[test]
    fn clique_hypergraph_examples() {
        let k4 = clique_hypergraph(&Graph::complete(4), 3);
        assert_eq!(k4.edge_count(), 4);
        // K_r(P_n^{r-1}) is the tight path
        let h = clique_hypergraph(&Graph::path(5).power(2), 3);
        assert_eq!(h, tight_path(5, 3).unwrap());
        // triangle-free graph has no 3-cliques
        let c5 = clique_hypergraph(&Graph::cycle(5), 3);
        assert_eq!(c5.edge_count(), 0);
    }

    #[test]
    fn hypergraph_power_matches_interval_powers() {
        let p = tight_path(5, 3).unwrap();
        assert_eq!(p.power(1), p);
        assert_eq!(p.power(2), tight_path_power(5, 3, 2).unwrap());
        let empty = Hypergraph::new(6, 3);
        assert_eq!(empty.power(3).edge_count(), 0);
        // the composite identity from the intro
        let via_graph = clique_hypergraph(&Graph::path(6).power(3 + 2 - 2), 3);
        assert_eq!(tight_path(6, 3).unwrap().power(2), via_graph);
        assert_eq!(tight_path_power(6, 3, 2).unwrap(), via_graph);
    }

    #[test]
    fn tree_generation_and_validation() {
        let single = random_hypergraph_tree(3, 3, 2, true, 7).unwrap();
        assert_eq!(single.edge_order.len(), 1);

        let tp = tight_path(7, 3).unwrap();
        let order: Vec<Vec<u32>> = tp.edges().map(|e| e.to_vec()).collect();
        let parents = validate_tree_order(7, 3, &order, None).unwrap();
        assert_eq!(parents, vec![0, 0, 1, 2]);

        let dup = vec![vec![0, 1, 2], vec![0, 1, 2]];
        assert!(validate_tree_order(3, 3, &dup, None).is_err());

        for seed in 0..20 {
            let t = random_hypergraph_tree(10, 3, 3, false, seed).unwrap();
            assert!(t.hypergraph.max_degree() <= 3);
            validate_tree_order(10, 3, &t.edge_order, Some(3)).unwrap();
        }
    }

    #[test]
    fn component_counting() {
        let mut h = Hypergraph::new(7, 2);
        h.add_edge(vec![0, 1]);
        h.add_edge(vec![1, 2]);
        h.add_edge(vec![4, 5]);
        // components: {0,1,2}, {3}, {4,5}, {6}
        assert_eq!(h.component_count(), 4);
    }
}
