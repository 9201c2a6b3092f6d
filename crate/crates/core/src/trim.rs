//! Hanging-tree trimming. Each base vertex carries an ordered tree rooted at
//! it; the lemmas here shrink arities to make trees of adjacent vertices
//! vertex-disjoint (via a random halving with retries, then an exhaustive
//! fallback at micro scale) and to make r-set colours depend only on shape
//! tuples (via the ordered-tree Ramsey searches, one proper-colouring class
//! at a time).

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::otree::{search::shape_tuple, uniformize, OrderedTree};
use crate::vizing::vizing_colouring;

/// A tree hanging from every vertex of a base graph.
#[derive(Debug, Clone)]
pub struct HangingForest {
    pub base: Graph,
    pub trees: BTreeMap<u32, OrderedTree>,
    pub arity: usize,
    pub height: usize,
}

impl HangingForest {
    pub fn new(base: Graph, trees: BTreeMap<u32, OrderedTree>) -> Result<Self> {
        let mut arity = None;
        let mut height = None;
        for (&u, t) in &trees {
            if t.root_payload() != u {
                return Err(Error::invalid(format!("tree of {u} is not rooted at it")));
            }
            if !t.payloads_distinct() {
                return Err(Error::invalid(format!("tree of {u} repeats a vertex")));
            }
            let h = t
                .uniform_height()
                .ok_or_else(|| Error::invalid("leaves at mixed depths"))?;
            let d = t.children(OrderedTree::ROOT).len();
            if !t.is_dary(d.max(1)) {
                return Err(Error::invalid(format!("tree of {u} is not uniformly ary")));
            }
            match (arity, height) {
                (None, None) => {
                    arity = Some(d);
                    height = Some(h);
                }
                (Some(a), Some(hh)) if (a == d || h == 0) && hh == h => {}
                _ => return Err(Error::invalid("trees must share arity and height")),
            }
        }
        Ok(HangingForest {
            base,
            trees,
            arity: arity.unwrap_or(0),
            height: height.unwrap_or(0),
        })
    }
}

fn payload_set(t: &OrderedTree) -> BTreeSet<u32> {
    t.payloads().iter().copied().collect()
}

/// Select a d-ary subtree whose non-root vertices all satisfy `allowed`,
/// by backtracking (child combinations in lexicographic order).
fn select_subtree(
    t: &OrderedTree,
    d: usize,
    allowed: &dyn Fn(u32) -> bool,
) -> Option<OrderedTree> {
    fn rec(
        t: &OrderedTree,
        node: usize,
        d: usize,
        allowed: &dyn Fn(u32) -> bool,
        out: &mut OrderedTree,
        target: usize,
    ) -> bool {
        if t.children(node).is_empty() {
            return true;
        }
        let ok: Vec<usize> = t
            .children(node)
            .iter()
            .copied()
            .filter(|&c| allowed(t.payload(c)))
            .collect();
        if ok.len() < d {
            return false;
        }
        crate::combin::for_each_combination(&ok, d, |picked| {
            let checkpoint = out.len();
            let mut good = true;
            for &c in picked {
                let nt = out.add_child(target, t.payload(c));
                if !rec(t, c, d, allowed, out, nt) {
                    good = false;
                    break;
                }
            }
            if good {
                Some(())
            } else {
                out.truncate_from(checkpoint);
                None
            }
        })
        .is_some()
    }
    let mut out = OrderedTree::singleton(t.root_payload());
    if rec(t, OrderedTree::ROOT, d, allowed, &mut out, OrderedTree::ROOT) {
        Some(out)
    } else {
        None
    }
}

/// Vertex-disjoint d-ary subtrees of two overlapping trees with distinct
/// roots: random 1/2-labelling of the shared payload space, retried, with an
/// exhaustive joint search as a last resort on small instances.
pub fn untangle_pair(
    t1: &OrderedTree,
    t2: &OrderedTree,
    d: usize,
    seed: u64,
) -> Result<(OrderedTree, OrderedTree)> {
    if t1.root_payload() == t2.root_payload() {
        return Err(Error::invalid("untangling needs distinct roots"));
    }
    let roots = [t1.root_payload(), t2.root_payload()];
    let all: BTreeSet<u32> = payload_set(t1).union(&payload_set(t2)).copied().collect();
    const RETRIES: usize = 400;
    for attempt in 0..RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let labels: BTreeMap<u32, u8> = all
            .iter()
            .map(|&p| (p, rng.gen_range(0..2u8)))
            .collect();
        let pick = |side: u8| {
            move |p: u32| labels.get(&p) == Some(&side) && !roots.contains(&p)
        };
        if let (Some(a), Some(b)) = (
            select_subtree(t1, d, &pick(0)),
            select_subtree(t2, d, &pick(1)),
        ) {
            debug_assert!(disjoint_payloads(&a, &b));
            return Ok((a, b));
        }
    }
    // exhaustive fallback: joint scan over subtree pairs
    let found = t1.for_each_dary_subtree(d, &mut |a| {
        if payload_set(a).contains(&roots[1]) {
            return None;
        }
        t2.for_each_dary_subtree(d, &mut |b| {
            if disjoint_payloads(a, b) {
                Some((a.clone(), b.clone()))
            } else {
                None
            }
        })
    });
    found.ok_or(Error::RetriesExhausted {
        retries: RETRIES,
        what: "untangling two trees".to_string(),
    })
}

fn disjoint_payloads(a: &OrderedTree, b: &OrderedTree) -> bool {
    let pa = payload_set(a);
    b.payloads().iter().all(|p| !pa.contains(p))
}

/// Arity chain interpolating D down to d across `stages` rounds; each step
/// shrinks by roughly the same factor.
fn arity_chain(big_d: usize, d: usize, stages: usize) -> Vec<usize> {
    if stages == 0 {
        return Vec::new();
    }
    let mut chain = Vec::with_capacity(stages);
    let ratio = (d as f64 / big_d as f64).powf(1.0 / stages as f64);
    let mut cur = big_d as f64;
    for i in 0..stages {
        cur *= ratio;
        let v = if i + 1 == stages { d } else { cur.round() as usize };
        chain.push(v.clamp(d, big_d));
    }
    for i in 1..chain.len() {
        chain[i] = chain[i].min(chain[i - 1]);
    }
    chain
}

/// Trim every tree so that trees of adjacent base vertices are
/// vertex-disjoint: Vizing's theorem splits the edges into matchings, and
/// each matching is untangled pairwise at a stepwise-decreasing arity.
pub fn untangle_along_graph(hf: &HangingForest, d: usize, seed: u64) -> Result<HangingForest> {
    let colouring = vizing_colouring(&hf.base);
    let matchings: Vec<Vec<(u32, u32)>> = colouring
        .matchings()
        .into_iter()
        .filter(|m| !m.is_empty())
        .collect();
    let chain = arity_chain(hf.arity, d, matchings.len());
    let mut trees = hf.trees.clone();
    for (stage, matching) in matchings.iter().enumerate() {
        let d_i = chain[stage];
        let mut touched: BTreeSet<u32> = BTreeSet::new();
        for &(u, v) in matching {
            let (tu, tv) = untangle_pair(
                &trees[&u],
                &trees[&v],
                d_i,
                seed.wrapping_add((stage as u64) << 32 | u as u64),
            )?;
            trees.insert(u, tu);
            trees.insert(v, tv);
            touched.insert(u);
            touched.insert(v);
        }
        for (&u, t) in trees.iter_mut() {
            if !touched.contains(&u) {
                *t = t.prefix_dary(d_i)?;
            }
        }
    }
    if matchings.is_empty() {
        for t in trees.values_mut() {
            *t = t.prefix_dary(d)?;
        }
    }
    // postcondition: adjacent trees disjoint
    for (u, v) in hf.base.edges() {
        if !disjoint_payloads(&trees[&u], &trees[&v]) {
            return Err(Error::HypothesesNotMet(format!(
                "trees of adjacent {u},{v} still overlap"
            )));
        }
    }
    HangingForest::new(hf.base.clone(), trees)
}

/// Greedy proper vertex colouring of the line graph of an edge family
/// (vertices = edges, adjacency = sharing a vertex), highest degree first.
fn line_graph_classes(edges: &[Vec<u32>]) -> Vec<Vec<usize>> {
    let m = edges.len();
    let mut adj = vec![Vec::new(); m];
    for i in 0..m {
        for j in i + 1..m {
            if edges[i].iter().any(|v| edges[j].contains(v)) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(adj[i].len()));
    let mut colour = vec![usize::MAX; m];
    for &i in &order {
        let used: BTreeSet<usize> = adj[i]
            .iter()
            .filter_map(|&j| (colour[j] != usize::MAX).then_some(colour[j]))
            .collect();
        colour[i] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    let classes = colour.iter().copied().max().map_or(0, |c| c + 1);
    let mut out = vec![Vec::new(); classes];
    for (i, &c) in colour.iter().enumerate() {
        out[c].push(i);
    }
    out
}

/// Trim trees so that within every edge of the family, the colour of an
/// r-set of leaves depends only on its shape tuple. The family's edges have
/// at most r vertices each; trees of the vertices of an edge must already be
/// pairwise vertex-disjoint. The postcondition is re-verified exhaustively.
pub fn trimming_ramsey(
    family: &[Vec<u32>],
    hf: &HangingForest,
    colouring: &dyn Fn(&[u32]) -> Option<u32>,
    r: usize,
    d: usize,
    budget_subsets: u128,
) -> Result<HangingForest> {
    for e in family {
        if e.len() > r {
            return Err(Error::invalid("family edge larger than r"));
        }
        for (i, &u) in e.iter().enumerate() {
            for &v in &e[i + 1..] {
                if !disjoint_payloads(&hf.trees[&u], &hf.trees[&v]) {
                    return Err(Error::invalid(format!(
                        "trees of {u},{v} overlap inside a family edge"
                    )));
                }
            }
        }
    }
    let classes = line_graph_classes(family);
    let chain = arity_chain(hf.arity, d, classes.len());
    let mut trees = hf.trees.clone();
    for (stage, class) in classes.iter().enumerate() {
        let d_i = chain[stage];
        let mut touched: BTreeSet<u32> = BTreeSet::new();
        for &ei in class {
            let verts = &family[ei];
            let tuple: Vec<OrderedTree> = verts.iter().map(|u| trees[u].clone()).collect();
            let trimmed = uniformize(&tuple, colouring, r, d_i, budget_subsets)?
                .ok_or_else(|| {
                    Error::NotFound(format!(
                        "no uniform subtree tuple for family edge {verts:?}"
                    ))
                })?;
            for (u, t) in verts.iter().zip(trimmed) {
                trees.insert(*u, t);
                touched.insert(*u);
            }
        }
        for (&u, t) in trees.iter_mut() {
            if !touched.contains(&u) {
                *t = t.prefix_dary(d_i)?;
            }
        }
    }
    if classes.is_empty() {
        for t in trees.values_mut() {
            *t = t.prefix_dary(d)?;
        }
    }
    let out = HangingForest::new(hf.base.clone(), trees)?;
    verify_shape_uniformity(family, &out, colouring, r)?;
    Ok(out)
}

/// Assert the trimming-Ramsey postcondition edge by edge.
pub fn verify_shape_uniformity(
    family: &[Vec<u32>],
    hf: &HangingForest,
    colouring: &dyn Fn(&[u32]) -> Option<u32>,
    r: usize,
) -> Result<()> {
    for e in family {
        let refs: Vec<&OrderedTree> = e.iter().map(|u| &hf.trees[u]).collect();
        let mut union: Vec<u32> = Vec::new();
        for t in &refs {
            union.extend(t.leaf_payloads());
        }
        union.sort_unstable();
        let mut by_shape: BTreeMap<Vec<crate::otree::Shape>, u32> = BTreeMap::new();
        let conflict = crate::combin::for_each_combination(&union, r, |set| {
            let tuple = shape_tuple(&refs, set).ok()?;
            let c = colouring(set)?;
            match by_shape.get(&tuple) {
                None => {
                    by_shape.insert(tuple, c);
                    None
                }
                Some(&prev) if prev == c => None,
                Some(_) => Some(set.to_vec()),
            }
        });
        if let Some(bad) = conflict {
            return Err(Error::NotFound(format!(
                "shape uniformity fails on edge {e:?} at r-set {bad:?}"
            )));
        }
    }
    Ok(())
}

/// The blowup special case: star trees of height one. Given a colouring of
/// the r-sets of the blowup of `g` (blocks of size `big_b`, block ids
/// contiguous), find b-subsets B'(u) of every block such that edges with the
/// same per-block intersection sizes have the same colour.
pub fn uniform_blowup(
    g: &Graph,
    r: usize,
    big_b: usize,
    colouring: &dyn Fn(&[u32]) -> Option<u32>,
    b: usize,
    budget_subsets: u128,
) -> Result<Vec<Vec<u32>>> {
    let n = g.n();
    let mut trees = BTreeMap::new();
    for u in 0..n as u32 {
        let sentinel = (n * big_b) as u32 + u;
        let leaves: Vec<u32> =
            (u as usize * big_b..(u as usize + 1) * big_b).map(|v| v as u32).collect();
        trees.insert(sentinel, OrderedTree::star(sentinel, &leaves));
    }
    let placeholder_base = Graph::new(n * big_b + n); // unused by the Ramsey stage
    let hf = HangingForest::new(placeholder_base, trees)?;
    // family: every clique of g with 1..=r vertices, as sentinel ids
    let mut family: Vec<Vec<u32>> = Vec::new();
    for size in 1..=r.min(n) {
        for e in crate::hypergraph::clique_hypergraph(g, size).edges() {
            family.push(e.iter().map(|&u| (n * big_b) as u32 + u).collect());
        }
    }
    let trimmed = trimming_ramsey(&family, &hf, colouring, r, b, budget_subsets)?;
    let mut out = Vec::with_capacity(n);
    for u in 0..n as u32 {
        let sentinel = (n * big_b) as u32 + u;
        out.push(trimmed.trees[&sentinel].leaf_payloads());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untangle_disjoint_stars_is_easy() {
        let t1 = OrderedTree::star(0, &[1, 2, 3, 4]);
        let t2 = OrderedTree::star(10, &[11, 12, 13, 14]);
        let (a, b) = untangle_pair(&t1, &t2, 2, 5).unwrap();
        assert!(a.is_dary(2) && b.is_dary(2));
        assert!(disjoint_payloads(&a, &b));
    }

    #[test]
    fn untangle_overlapping_stars() {
        // two 9-leaf stars sharing 3 leaves
        let t1 = OrderedTree::star(100, &[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        let t2 = OrderedTree::star(101, &[6, 7, 8, 9, 10, 11, 12, 13, 14]);
        let (a, b) = untangle_pair(&t1, &t2, 2, 3).unwrap();
        assert!(disjoint_payloads(&a, &b));
        assert!(a.is_dary(2) && b.is_dary(2));
        assert_eq!(a.uniform_height(), Some(1));
        // exhaustive fallback agrees that a solution exists
        let joint = t1.for_each_dary_subtree(2, &mut |x| {
            t2.for_each_dary_subtree(2, &mut |y| {
                disjoint_payloads(x, y).then(|| ())
            })
        });
        assert!(joint.is_some());
    }

    #[test]
    fn untangle_requires_distinct_roots() {
        let t = OrderedTree::star(0, &[1, 2]);
        assert!(untangle_pair(&t, &t, 1, 0).is_err());
    }

    #[test]
    fn untangle_along_path_graph() {
        // P_3 with generously overlapping 12-ary stars
        let base = Graph::path(3);
        let mut trees = BTreeMap::new();
        for u in 0..3u32 {
            let leaves: Vec<u32> = (0..12).map(|i| 10 + (u + i) % 14).collect();
            let mut uniq: Vec<u32> = leaves.clone();
            uniq.sort_unstable();
            uniq.dedup();
            trees.insert(u, OrderedTree::star(u, &uniq[..12.min(uniq.len())]));
        }
        let hf = HangingForest::new(base.clone(), trees).unwrap();
        let out = untangle_along_graph(&hf, 2, 7).unwrap();
        for (u, v) in base.edges() {
            assert!(disjoint_payloads(&out.trees[&u], &out.trees[&v]));
        }
        assert_eq!(out.arity, 2);
    }

    #[test]
    fn edgeless_base_is_plain_reduction() {
        let base = Graph::new(2);
        let mut trees = BTreeMap::new();
        trees.insert(0, OrderedTree::star(0, &[2, 3, 4]));
        trees.insert(1, OrderedTree::star(1, &[5, 6, 7]));
        let hf = HangingForest::new(base, trees).unwrap();
        let out = untangle_along_graph(&hf, 2, 0).unwrap();
        assert_eq!(out.arity, 2);
    }

    #[test]
    fn line_graph_colouring_classes_are_matchings() {
        let family = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0], vec![4, 5]];
        let classes = line_graph_classes(&family);
        for class in &classes {
            for (i, &a) in class.iter().enumerate() {
                for &b in &class[i + 1..] {
                    assert!(!family[a].iter().any(|v| family[b].contains(v)));
                }
            }
        }
    }

    #[test]
    fn single_colour_trimming_passes() {
        let base = Graph::complete(2);
        let mut trees = BTreeMap::new();
        trees.insert(0, OrderedTree::star(0, &[10, 11, 12, 13, 14, 15]));
        trees.insert(1, OrderedTree::star(1, &[20, 21, 22, 23, 24, 25]));
        let hf = HangingForest::new(base, trees).unwrap();
        let family = vec![vec![0u32, 1]];
        let all = |_: &[u32]| Some(0u32);
        let out = trimming_ramsey(&family, &hf, &all, 2, 3, 1 << 24).unwrap();
        assert_eq!(out.trees[&0].leaf_payloads().len(), 3);
        verify_shape_uniformity(&family, &out, &all, 2).unwrap();
    }

    #[test]
    fn blowup_single_block_is_leaf_ramsey() {
        // singleton base, r = 2, B = 6, b = 3: a monochromatic triangle
        // inside the block for any 2-colouring of its pairs
        let g = Graph::new(1);
        let colouring = |e: &[u32]| Some(u32::from(e[0] + e[1] >= 6));
        let picked = uniform_blowup(&g, 2, 6, &colouring, 3, 1 << 24).unwrap();
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].len(), 3);
        let c = crate::otree::search::mono_clique_colour(&picked[0], 2, &colouring);
        assert!(c.is_some());
    }

    #[test]
    fn blowup_type_uniformity_across_blocks() {
        // K_2 blown up by 4, trimmed to 2: all cross pairs one colour, all
        // inner pairs of each block one colour
        let g = Graph::complete(2);
        let colouring = |e: &[u32]| {
            let (a, b) = (e[0] / 4, e[1] / 4);
            Some(if a == b { a } else { 5u32 })
        };
        let picked = uniform_blowup(&g, 2, 4, &colouring, 2, 1 << 24).unwrap();
        for (u, block) in picked.iter().enumerate() {
            assert!(block.iter().all(|&v| (v / 4) as usize == u));
            assert_eq!(block.len(), 2);
        }
    }
}
