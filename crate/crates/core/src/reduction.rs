//! Explicit reductions. A bounded-degree r-uniform tree embeds into the
//! clique hypergraph of a small power of an ordinary tree host; build traces
//! admit a distance-halving replay and a bipartite-subdivision replay; and
//! chaining ceil(log2 t) halvings with one subdivision step maps the t-power
//! of a traced graph into a bounded blow-up of a subdivision.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::graph::{Graph, UNREACHABLE};
use crate::hypergraph::{Hypergraph, HypergraphTree};
use crate::mapping::VertexMap;
use crate::trace::{BuildTrace, TraceStep};

#[derive(Debug, Clone)]
pub struct TreeHostResult {
    /// the host tree S on n + c(T) vertices; original tree vertices keep
    /// their ids, the per-component roots x follow
    pub host: Graph,
    pub roots: Vec<u32>,
    /// attach point p_i per edge (None for edges that start a component)
    pub attach: Vec<Option<u32>>,
    /// f(i): witness parent edge index (i itself for component starters)
    pub parent: Vec<usize>,
}

/// The tree host construction: the first edge of each component hangs off a
/// fresh root x, each later edge adds its new vertices as leaves at a pivot
/// p_i inside the overlap with its parent edge. Components are stitched
/// leaf-to-leaf. Degree and within-edge-distance bounds are re-verified.
pub fn tree_host(tree: &HypergraphTree) -> Result<TreeHostResult> {
    let n = tree.hypergraph.n();
    let r = tree.hypergraph.r();
    let order = &tree.edge_order;
    let m = order.len();
    let d = tree.hypergraph.max_degree().max(1);

    // component id per edge, in arrival order
    let mut comp_of_edge = vec![usize::MAX; m];
    let mut vertex_comp: BTreeMap<u32, usize> = BTreeMap::new();
    let mut n_comps = 0usize;
    let mut parent = vec![0usize; m];
    let mut seen: Vec<Vec<u32>> = Vec::new(); // edges so far
    for (i, e) in order.iter().enumerate() {
        let overlap: Vec<u32> = e
            .iter()
            .copied()
            .filter(|v| vertex_comp.contains_key(v))
            .collect();
        if overlap.is_empty() {
            comp_of_edge[i] = n_comps;
            parent[i] = i;
            n_comps += 1;
        } else {
            let i0 = seen
                .iter()
                .position(|f| overlap.iter().all(|v| f.contains(v)))
                .ok_or_else(|| {
                    Error::invalid(format!("edge {i} overlap not inside one earlier edge"))
                })?;
            parent[i] = i0;
            comp_of_edge[i] = comp_of_edge[i0];
        }
        for &v in e {
            vertex_comp.insert(v, comp_of_edge[i]);
        }
        seen.push(e.clone());
    }
    // isolated vertices are their own components
    let isolated: Vec<u32> = (0..n as u32)
        .filter(|v| !vertex_comp.contains_key(v))
        .collect();
    let total_comps = n_comps + isolated.len();

    let mut host = Graph::new(n + total_comps);
    let mut roots = Vec::with_capacity(total_comps);
    for c in 0..total_comps {
        roots.push((n + c) as u32);
    }
    let mut attach = vec![None; m];
    for (i, e) in order.iter().enumerate() {
        if parent[i] == i {
            // star on the component root
            let x = roots[comp_of_edge[i]];
            for &v in e {
                host.add_edge(x, v);
            }
        } else {
            let f = parent[i];
            let fe = &order[f];
            let pool: Vec<u32> = if parent[f] == f {
                e.iter().copied().filter(|v| fe.contains(v)).collect()
            } else {
                let ffe = &order[parent[f]];
                e.iter()
                    .copied()
                    .filter(|v| fe.contains(v) && !ffe.contains(v))
                    .collect()
            };
            let p = pool
                .iter()
                .min()
                .copied()
                .ok_or_else(|| Error::invalid(format!("edge {i}: empty pivot pool")))?;
            attach[i] = Some(p);
            for &v in e {
                if !fe.contains(&v) {
                    host.add_edge(p, v);
                }
            }
        }
    }
    for (j, &v) in isolated.iter().enumerate() {
        host.add_edge(roots[n_comps + j], v);
    }

    // stitch components leaf-to-leaf, in component order
    if total_comps > 1 {
        if d * r < 2 {
            return Err(Error::HypothesesNotMet(
                "cannot stitch components with dr < 2".to_string(),
            ));
        }
        let leaves_of = |g: &Graph, comp: usize, comp_of_edge: &[usize]| -> Vec<u32> {
            let mut verts: Vec<u32> = vec![roots[comp]];
            if comp < n_comps {
                for (i, e) in order.iter().enumerate() {
                    if comp_of_edge[i] == comp {
                        verts.extend(e.iter().copied());
                    }
                }
            } else {
                verts.push(isolated[comp - n_comps]);
            }
            verts.sort_unstable();
            verts.dedup();
            verts.into_iter().filter(|&v| g.degree(v) == 1).collect()
        };
        for c in 0..total_comps - 1 {
            let out = *leaves_of(&host, c, &comp_of_edge)
                .last()
                .ok_or_else(|| Error::invalid("component without a leaf"))?;
            let inn = *leaves_of(&host, c + 1, &comp_of_edge)
                .first()
                .ok_or_else(|| Error::invalid("component without a leaf"))?;
            host.add_edge(out, inn);
        }
    }

    // re-verify the claimed bounds
    if host.edge_count() != n + total_comps - 1 {
        return Err(Error::HypothesesNotMet("host is not a tree".to_string()));
    }
    if host.max_degree() > d * r.max(2).max(d * r) || host.max_degree() > (d * r).max(2) {
        return Err(Error::HypothesesNotMet(format!(
            "host degree {} above d r = {}",
            host.max_degree(),
            d * r
        )));
    }
    let dist = host.all_pairs_distances(ExecMode::default());
    for e in order {
        for (i, &a) in e.iter().enumerate() {
            for &b in &e[i + 1..] {
                let du = dist[a as usize][b as usize];
                if du == UNREACHABLE || du as usize > d + 1 {
                    return Err(Error::HypothesesNotMet(format!(
                        "vertices {a},{b} of one edge at host distance {du} > d+1"
                    )));
                }
            }
        }
    }
    Ok(TreeHostResult {
        host,
        roots,
        attach,
        parent,
    })
}

/// tree_host plus the t-power containment check: every edge of the t-power
/// lies inside a clique of S^{t(d+1)} (identity embedding, re-verified edge
/// by edge).
pub fn power_host(tree: &HypergraphTree, t: usize) -> Result<(TreeHostResult, Hypergraph)> {
    let result = tree_host(tree)?;
    let d = tree.hypergraph.max_degree().max(1);
    let powered = tree.hypergraph.power(t);
    let dist = result.host.all_pairs_distances(ExecMode::default());
    let radius = t * (d + 1);
    for e in powered.edges() {
        for (i, &a) in e.iter().enumerate() {
            for &b in &e[i + 1..] {
                let du = dist[a as usize][b as usize];
                if du == UNREACHABLE || du as usize > radius {
                    return Err(Error::HypothesesNotMet(format!(
                        "power edge {e:?} not inside a clique of S^{radius}"
                    )));
                }
            }
        }
    }
    Ok((result, powered))
}

#[derive(Debug, Clone)]
pub struct HalveResult {
    pub graph: Graph,
    pub trace: BuildTrace,
    pub map: VertexMap,
}

struct GrowingGraph {
    adj: Vec<Vec<u32>>,
    arrival: Vec<usize>,
    clock: usize,
}

impl GrowingGraph {
    fn singleton() -> Self {
        GrowingGraph {
            adj: vec![Vec::new()],
            arrival: vec![0],
            clock: 1,
        }
    }

    fn add_vertex(&mut self) -> u32 {
        self.adj.push(Vec::new());
        self.arrival.push(self.clock);
        self.clock += 1;
        (self.adj.len() - 1) as u32
    }

    fn add_edge(&mut self, u: u32, v: u32) {
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
    }

    /// the closed neighbourhood {x} u N(x)
    fn star(&self, x: u32) -> Vec<u32> {
        let mut s = self.adj[x as usize].clone();
        s.push(x);
        s
    }

    fn last_arrival(&self, verts: &[u32]) -> u32 {
        *verts
            .iter()
            .max_by_key(|&&v| self.arrival[v as usize])
            .expect("nonempty star")
    }
}

/// Distance-halving replay: F gains a fresh leaf only when a whole closed
/// neighbourhood of H maps to one vertex; long paths are normalised at both
/// ends and then halved, with interior vertices mapped in consecutive pairs.
/// Both postconditions (ceil(d/2) distance contraction and the 4d^2
/// preimage bound) are asserted exhaustively before returning.
pub fn halve(trace: &BuildTrace) -> Result<HalveResult> {
    let (d, ell) = (trace.d, trace.l);
    if ell < 6 {
        return Err(Error::invalid("halving needs l >= 6"));
    }
    let h_target = trace.replay()?;
    let big_d = 4 * d * d * d;
    let big_l = (ell - 4) / 2;

    let mut h = GrowingGraph::singleton();
    let mut f_trace = BuildTrace::new(big_d, big_l);
    let mut f_n = 1u32;
    let mut phi: Vec<u32> = vec![0];

    let mut add_leaf = |h: &mut GrowingGraph,
                        phi: &mut Vec<u32>,
                        f_trace: &mut BuildTrace,
                        f_n: &mut u32,
                        x: u32|
     -> u32 {
        let star = h.star(x);
        let images: std::collections::BTreeSet<u32> =
            star.iter().map(|&v| phi[v as usize]).collect();
        let y = h.add_vertex();
        if images.len() == 1 {
            let u = *images.iter().next().unwrap();
            f_trace.steps.push(TraceStep::Leaf { at: u });
            let v = *f_n;
            *f_n += 1;
            phi.push(v);
        } else {
            let z = h.last_arrival(&star);
            phi.push(phi[z as usize]);
        }
        h.add_edge(x, y);
        y
    };

    for step in &trace.steps {
        match *step {
            TraceStep::Leaf { at } => {
                add_leaf(&mut h, &mut phi, &mut f_trace, &mut f_n, at);
            }
            TraceStep::Path { u, v, len } => {
                let mut x_end = u;
                let mut y_end = v;
                let mut consumed_x = 0usize;
                let mut consumed_y = 0usize;
                // normalise so both closed neighbourhoods are collapsed
                while {
                    let star = h.star(x_end);
                    star.iter().map(|&w| phi[w as usize]).collect::<std::collections::BTreeSet<_>>().len() > 1
                } {
                    x_end = add_leaf(&mut h, &mut phi, &mut f_trace, &mut f_n, x_end);
                    consumed_x += 1;
                    if consumed_x > 2 {
                        return Err(Error::invalid("normalisation did not converge"));
                    }
                }
                while {
                    let star = h.star(y_end);
                    star.iter().map(|&w| phi[w as usize]).collect::<std::collections::BTreeSet<_>>().len() > 1
                } {
                    y_end = add_leaf(&mut h, &mut phi, &mut f_trace, &mut f_n, y_end);
                    consumed_y += 1;
                    if consumed_y > 2 {
                        return Err(Error::invalid("normalisation did not converge"));
                    }
                }
                let h_eff = len - consumed_x - consumed_y;
                let u_x = phi[x_end as usize];
                let u_y = phi[y_end as usize];
                let h_prime = (h_eff + 1) / 2;
                // interior H vertices still to create, in order from x to y
                let interiors = h_eff - 1;
                let collapse = u_x == u_y && h_prime < 3;
                let mut f_path: Vec<u32> = vec![u_x];
                if !collapse {
                    f_trace.steps.push(TraceStep::Path {
                        u: u_x,
                        v: u_y,
                        len: h_prime,
                    });
                    for _ in 0..h_prime - 1 {
                        f_path.push(f_n);
                        f_n += 1;
                    }
                    f_path.push(u_y);
                }
                let mut prev = x_end;
                for i in 1..=interiors {
                    let w = h.add_vertex();
                    let image = if collapse {
                        u_x
                    } else {
                        // interiors map in consecutive pairs; for even
                        // lengths the final interior steps down to the
                        // penultimate F vertex
                        let s = if h_eff % 2 == 0 && i == interiors {
                            h_prime - 1
                        } else {
                            (i + 1) / 2
                        };
                        f_path[s]
                    };
                    phi.push(image);
                    h.add_edge(prev, w);
                    prev = w;
                }
                h.add_edge(prev, y_end);
            }
        }
    }

    let f = f_trace.replay()?;
    let map = VertexMap::new(f.n(), phi);
    let h_graph = {
        let mut g = Graph::new(h.adj.len());
        for (u, nbrs) in h.adj.iter().enumerate() {
            for &v in nbrs {
                if (u as u32) < v {
                    g.add_edge(u as u32, v);
                }
            }
        }
        g
    };
    if h_graph != h_target {
        return Err(Error::invalid("internal replay mismatch"));
    }
    // postconditions, exhaustively
    let dh = h_graph.all_pairs_distances(ExecMode::default());
    let df = f.all_pairs_distances(ExecMode::default());
    for x in 0..h_graph.n() {
        for y in x + 1..h_graph.n() {
            if dh[x][y] == UNREACHABLE {
                continue;
            }
            let expect = (dh[x][y] as usize).div_ceil(2);
            let got = df[map.apply(x as u32) as usize][map.apply(y as u32) as usize];
            if got == UNREACHABLE || got as usize > expect {
                return Err(Error::HypothesesNotMet(format!(
                    "distance contraction fails at ({x},{y}): {got} > ceil({}/2)",
                    dh[x][y]
                )));
            }
        }
    }
    let worst = map.max_multiplicity();
    if worst > 4 * d * d {
        return Err(Error::HypothesesNotMet(format!(
            "preimage multiplicity {worst} above 4d^2 = {}",
            4 * d * d
        )));
    }
    // star collapse: each closed neighbourhood maps to one vertex or an edge
    let adj = h_graph.adjacency();
    for x in 0..h_graph.n() as u32 {
        let mut images: Vec<u32> = adj[x as usize]
            .iter()
            .map(|&v| map.apply(v))
            .chain([map.apply(x)])
            .collect();
        images.sort_unstable();
        images.dedup();
        let ok = match images.len() {
            1 => true,
            2 => f.has_edge(images[0], images[1]),
            _ => false,
        };
        if !ok {
            return Err(Error::HypothesesNotMet(format!(
                "closed neighbourhood of {x} maps to {images:?}"
            )));
        }
    }
    Ok(HalveResult {
        graph: f,
        trace: f_trace,
        map,
    })
}

/// A vertex of the 1-subdivision F^-: an original vertex or an edge of F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SubVertex {
    V(u32),
    /// (older endpoint, newer endpoint)
    E(u32, u32),
}

#[derive(Debug, Clone)]
pub struct SubdivisionResult {
    /// bipartite F
    pub graph: Graph,
    pub trace: BuildTrace,
    /// symbolic images in F^-
    pub images: Vec<SubVertex>,
    /// concrete 1-subdivision of F (interiors follow F's sorted edge list)
    pub f_minus: Graph,
    /// concrete map into f_minus
    pub map: VertexMap,
}

/// Bipartite-subdivision replay: leaves alternate between edge-images and
/// vertex-images; paths are normalised to vertex ends, then added to F with
/// a parity-correct length and walked with single visits to each new edge.
pub fn to_bipartite_subdivision(trace: &BuildTrace) -> Result<SubdivisionResult> {
    let (d, ell) = (trace.d, trace.l);
    if ell < 7 {
        return Err(Error::invalid("bipartite subdivision needs l >= 7"));
    }
    let h_target = trace.replay()?;
    let big_d = 4 * d * d;
    let big_l = (ell.saturating_sub(6)) / 2;

    let mut h = GrowingGraph::singleton();
    let mut f_trace = BuildTrace::new(big_d, big_l);
    let mut f_n = 1u32;
    let mut f_colour: Vec<u8> = vec![0];
    let mut f_edges: Vec<(u32, u32)> = Vec::new();
    let mut images: Vec<SubVertex> = vec![SubVertex::V(0)];

    fn add_leaf(
        h: &mut GrowingGraph,
        images: &mut Vec<SubVertex>,
        f_trace: &mut BuildTrace,
        f_n: &mut u32,
        f_colour: &mut Vec<u8>,
        f_edges: &mut Vec<(u32, u32)>,
        x: u32,
    ) -> u32 {
        let y = h.add_vertex();
        match images[x as usize] {
            SubVertex::V(u) => {
                f_trace.steps.push(TraceStep::Leaf { at: u });
                let v = *f_n;
                *f_n += 1;
                f_colour.push(1 - f_colour[u as usize]);
                f_edges.push((u, v));
                images.push(SubVertex::E(u, v));
            }
            SubVertex::E(u, _) => {
                images.push(SubVertex::V(u));
            }
        }
        h.add_edge(x, y);
        y
    }

    for step in &trace.steps {
        match *step {
            TraceStep::Leaf { at } => {
                add_leaf(
                    &mut h,
                    &mut images,
                    &mut f_trace,
                    &mut f_n,
                    &mut f_colour,
                    &mut f_edges,
                    at,
                );
            }
            TraceStep::Path { u, v, len } => {
                let mut x_end = u;
                let mut y_end = v;
                let mut consumed = 0usize;
                if matches!(images[x_end as usize], SubVertex::E(..)) {
                    x_end = add_leaf(
                        &mut h,
                        &mut images,
                        &mut f_trace,
                        &mut f_n,
                        &mut f_colour,
                        &mut f_edges,
                        x_end,
                    );
                    consumed += 1;
                }
                if matches!(images[y_end as usize], SubVertex::E(..)) {
                    y_end = add_leaf(
                        &mut h,
                        &mut images,
                        &mut f_trace,
                        &mut f_n,
                        &mut f_colour,
                        &mut f_edges,
                        y_end,
                    );
                    consumed += 1;
                }
                let h_eff = len - consumed;
                let (SubVertex::V(a), SubVertex::V(b)) =
                    (images[x_end as usize], images[y_end as usize])
                else {
                    unreachable!("both ends normalised")
                };
                let want_odd = f_colour[a as usize] != f_colour[b as usize];
                let h_max = h_eff / 2;
                let floor = big_l.max(1);
                let mut h_prime = None;
                let mut cand = h_max;
                while cand >= floor {
                    let parity_ok = (cand % 2 == 1) == want_odd;
                    let cycle_ok = a != b || (cand % 2 == 0 && cand >= 4);
                    if parity_ok && cycle_ok {
                        h_prime = Some(cand);
                        break;
                    }
                    cand -= 1;
                }
                match h_prime {
                    None if a == b => {
                        // park the whole segment on the shared anchor
                        let mut prev = x_end;
                        for _ in 1..h_eff {
                            let w = h.add_vertex();
                            images.push(SubVertex::V(a));
                            h.add_edge(prev, w);
                            prev = w;
                        }
                        h.add_edge(prev, y_end);
                        continue;
                    }
                    None => {
                        return Err(Error::invalid(
                            "no feasible subdivision path length".to_string(),
                        ))
                    }
                    Some(_) => {}
                }
                let h_prime = h_prime.unwrap();
                f_trace.steps.push(TraceStep::Path {
                    u: a,
                    v: b,
                    len: h_prime,
                });
                // F path a = p_0 .. p_{h'} = b with fresh interiors
                let mut f_path = vec![a];
                for j in 0..h_prime - 1 {
                    let w = f_n;
                    f_n += 1;
                    f_colour.push(if j % 2 == 0 {
                        1 - f_colour[a as usize]
                    } else {
                        f_colour[a as usize]
                    });
                    f_path.push(w);
                }
                f_path.push(b);
                for j in 0..h_prime {
                    f_edges.push((f_path[j], f_path[j + 1]));
                }
                // walk the F^- path: each new edge is the image of exactly
                // one interior vertex, every inner F vertex is visited, and
                // the surplus h_eff - 2h' is absorbed as stays on vertex
                // slots (round-robin)
                let surplus = h_eff - 2 * h_prime;
                let per = surplus / (h_prime + 1);
                let rem = surplus % (h_prime + 1);
                let mut walk: Vec<SubVertex> = Vec::with_capacity(h_eff - 1);
                for j in 0..=h_prime {
                    let required = usize::from(j > 0 && j < h_prime);
                    let stays = required + per + usize::from(j < rem);
                    for _ in 0..stays {
                        walk.push(SubVertex::V(f_path[j]));
                    }
                    if j < h_prime {
                        walk.push(SubVertex::E(f_path[j], f_path[j + 1]));
                    }
                }
                debug_assert_eq!(walk.len(), h_eff - 1);
                let mut prev = x_end;
                for img in walk {
                    let w = h.add_vertex();
                    images.push(img);
                    h.add_edge(prev, w);
                    prev = w;
                }
                h.add_edge(prev, y_end);
            }
        }
    }

    let f = f_trace.replay()?;
    let h_graph = {
        let mut g = Graph::new(h.adj.len());
        for (u, nbrs) in h.adj.iter().enumerate() {
            for &v in nbrs {
                if (u as u32) < v {
                    g.add_edge(u as u32, v);
                }
            }
        }
        g
    };
    if h_graph != h_target {
        return Err(Error::invalid("internal replay mismatch"));
    }
    if !f.is_bipartite() {
        return Err(Error::HypothesesNotMet("F is not bipartite".to_string()));
    }
    // concrete F^-: interiors follow F's sorted edge order
    let f_minus = f.subdivide(2);
    let edge_index: BTreeMap<(u32, u32), u32> = f
        .edges()
        .enumerate()
        .map(|(i, e)| (e, f.n() as u32 + i as u32))
        .collect();
    let concrete: Vec<u32> = images
        .iter()
        .map(|img| match *img {
            SubVertex::V(u) => u,
            SubVertex::E(u, v) => edge_index[&(u.min(v), u.max(v))],
        })
        .collect();
    let map = VertexMap::new(f_minus.n(), concrete);
    // adjacency preservation
    for (x, y) in h_graph.edges() {
        let (ix, iy) = (map.apply(x), map.apply(y));
        if ix != iy && !f_minus.has_edge(ix, iy) {
            return Err(Error::HypothesesNotMet(format!(
                "H edge ({x},{y}) maps to non-adjacent {ix},{iy}"
            )));
        }
    }
    // preimage bounds: 4d on F-vertices, exactly 1 on edge-vertices
    let counts = map.preimage_counts();
    for (w, &c) in counts.iter().enumerate() {
        if w < f.n() {
            if c > 4 * d {
                return Err(Error::HypothesesNotMet(format!(
                    "F vertex {w} has {c} preimages, above 4d = {}",
                    4 * d
                )));
            }
        } else if c != 1 {
            return Err(Error::HypothesesNotMet(format!(
                "edge vertex {w} has {c} preimages, expected exactly 1"
            )));
        }
    }
    Ok(SubdivisionResult {
        graph: f,
        trace: f_trace,
        images,
        f_minus,
        map,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionParams {
    pub s: usize,
    pub ells: Vec<u64>,
    pub ds: Vec<BigUint>,
    pub bs: Vec<BigUint>,
    pub big_d: BigUint,
    pub big_l: u64,
    pub big_t: BigUint,
}

/// The parameter recurrences of the reduction: l_i = floor((l_{i-1}-3)/2),
/// d_i = 4 d_{i-1}^3, b_i = 4 d_{i-1}^2, D = (2d)^{8t^2}, T = (2d)^{12t^2},
/// L = l/4t - 6. The chain inequalities are re-checked.
pub fn parameter_table(d: u64, t: u64, ell: u64) -> Result<ReductionParams> {
    if ell < 28 * t {
        return Err(Error::invalid("need l >= 28 t"));
    }
    let s = (t as f64).log2().ceil() as usize;
    let s = if t <= 1 { 0 } else { s.max(1) };
    let mut ells = vec![ell];
    let mut ds: Vec<BigUint> = vec![BigUint::from(d)];
    let mut bs: Vec<BigUint> = Vec::new();
    for i in 1..=s {
        ells.push((ells[i - 1] - 3) / 2);
        let prev = &ds[i - 1];
        bs.push(BigUint::from(4u32) * prev * prev);
        ds.push(BigUint::from(4u32) * prev * prev * prev);
    }
    let two_d = BigUint::from(2 * d);
    let big_d = two_d.pow(8 * (t * t) as u32);
    let big_t = two_d.pow(12 * (t * t) as u32);
    let big_l = (ell / (4 * t)).saturating_sub(6);

    // chain inequalities from the proof
    let ell_s = *ells.last().unwrap();
    let pow2s = 1u64 << s;
    if (ell_s + 5) * pow2s < ell {
        return Err(Error::HypothesesNotMet(format!(
            "l_s = {ell_s} below 2^-s l - 5"
        )));
    }
    let mut chain: BigUint = BigUint::one();
    for b in &bs {
        chain *= b;
    }
    chain *= BigUint::from(4u32) * ds.last().unwrap();
    if chain > big_t {
        return Err(Error::HypothesesNotMet(
            "multiplicity chain exceeds (2d)^{12t^2}".to_string(),
        ));
    }
    Ok(ReductionParams {
        s,
        ells,
        ds,
        bs,
        big_d,
        big_l,
        big_t,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub bipartite: SubdivisionResult,
    /// composed map H -> F^-
    pub rho: VertexMap,
    pub t_actual: usize,
    pub params: ReductionParams,
    /// explicit embedding of H^t into the blow-up F^-[K_{t_actual}]
    pub blowup_embedding: VertexMap,
}

/// Chain ceil(log2 t) halvings and one bipartite-subdivision step, compose
/// the maps, and certify that H^t embeds into F^-[K_{T_actual}] with
/// T_actual at most (2d)^{12 t^2}.
pub fn reduce_pipeline(trace: &BuildTrace, t: usize) -> Result<PipelineResult> {
    let params = parameter_table(trace.d as u64, t as u64, trace.l as u64)?;
    let h0 = trace.replay()?;
    let mut current = trace.clone();
    let mut composed: Option<VertexMap> = None;
    for _ in 0..params.s {
        let halved = halve(&current)?;
        composed = Some(match composed {
            None => halved.map.clone(),
            Some(prev) => prev.then(&halved.map),
        });
        current = halved.trace;
    }
    let sub = to_bipartite_subdivision(&current)?;
    let rho = match composed {
        None => sub.map.clone(),
        Some(prev) => prev.then(&sub.map),
    };

    // vertices at H-distance <= t map to equal or adjacent F^- vertices
    let dh = h0.all_pairs_distances(ExecMode::default());
    for x in 0..h0.n() {
        for y in x + 1..h0.n() {
            if dh[x][y] == UNREACHABLE || dh[x][y] as usize > t {
                continue;
            }
            let (ix, iy) = (rho.apply(x as u32), rho.apply(y as u32));
            if ix != iy && !sub.f_minus.has_edge(ix, iy) {
                return Err(Error::HypothesesNotMet(format!(
                    "close pair ({x},{y}) maps to non-adjacent vertices"
                )));
            }
        }
    }
    let t_actual = rho.max_multiplicity();
    if BigUint::from(t_actual) > params.big_t {
        return Err(Error::HypothesesNotMet(format!(
            "T_actual = {t_actual} exceeds (2d)^{{12t^2}}"
        )));
    }
    // explicit blow-up embedding: the copies of each F^- vertex host its
    // preimages in rho-order
    let (blown, block) = sub.f_minus.blowup(t_actual.max(1));
    let mut slot_used = vec![0usize; sub.f_minus.n()];
    let mut image = vec![0u32; h0.n()];
    for x in 0..h0.n() {
        let w = rho.apply(x as u32) as usize;
        image[x] = (w * t_actual.max(1) + slot_used[w]) as u32;
        slot_used[w] += 1;
    }
    let blowup_embedding = VertexMap::new(blown.n(), image);
    if !blowup_embedding.is_injective() {
        return Err(Error::HypothesesNotMet("blow-up embedding not injective".to_string()));
    }
    let ht = h0.power(t);
    for (x, y) in ht.edges() {
        let (bx, by) = (blowup_embedding.apply(x), blowup_embedding.apply(y));
        let same_block = block[bx as usize] == block[by as usize];
        if !same_block && !blown.has_edge(bx, by) {
            return Err(Error::HypothesesNotMet(format!(
                "H^t edge ({x},{y}) missing in the blow-up"
            )));
        }
    }
    Ok(PipelineResult {
        bipartite: sub,
        rho,
        t_actual,
        params,
        blowup_embedding,
    })
}
