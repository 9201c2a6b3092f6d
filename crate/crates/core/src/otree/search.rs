//! Ramsey-type searches over ordered trees: monochromatic subforests,
//! shape-uniform subtree tuples, and same-colour connectors. All searches
//! are exhaustive under explicit caps, so absence verdicts are certificates.

use std::collections::BTreeMap;

use crate::combin::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::otree::{copies_of_shape, shape_of, OrderedTree, Shape};

/// Connector inside one ordered tree: X and Z span vertex-disjoint
/// order-isomorphic subtrees, and every r-set inside X u Y and Y u Z has the
/// single colour c.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connector {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
    pub z: Vec<u32>,
    pub colour: u32,
    pub shape: Shape,
}

/// Common colour of all r-subsets of `verts` (payload ids); None when the
/// colours disagree or some r-set is outside the colouring's domain.
pub fn mono_clique_colour(
    verts: &[u32],
    r: usize,
    colour: &dyn Fn(&[u32]) -> Option<u32>,
) -> Option<u32> {
    let mut sorted = verts.to_vec();
    sorted.sort_unstable();
    let mut seen: Option<u32> = None;
    let conflict = for_each_combination(&sorted, r, |e| {
        match (colour(e), seen) {
            (None, _) => Some(()),
            (Some(c), None) => {
                seen = Some(c);
                None
            }
            (Some(c), Some(prev)) if c == prev => None,
            _ => Some(()),
        }
    });
    if conflict.is_some() {
        None
    } else {
        seen
    }
}

/// Search for a d-ary height-preserving subforest (one subtree per
/// component) all of whose pattern copies share one colour. The colouring
/// maps per-component leaf payload tuples to colours. Absence is a
/// certificate: the scan is exhaustive over all subforest choices.
pub fn find_mono_subforest(
    forest: &[OrderedTree],
    pattern: &[OrderedTree],
    colouring: &dyn Fn(&[Vec<u32>]) -> u32,
    d: usize,
) -> Result<Option<Vec<OrderedTree>>> {
    if forest.len() != pattern.len() {
        return Err(Error::invalid("component counts differ"));
    }
    let shapes: Vec<Shape> = pattern.iter().map(|s| s.shape()).collect();
    let mut chosen: Vec<OrderedTree> = Vec::with_capacity(forest.len());
    Ok(search_components(forest, &shapes, colouring, d, &mut chosen))
}

fn search_components(
    forest: &[OrderedTree],
    shapes: &[Shape],
    colouring: &dyn Fn(&[Vec<u32>]) -> u32,
    d: usize,
    chosen: &mut Vec<OrderedTree>,
) -> Option<Vec<OrderedTree>> {
    let i = chosen.len();
    if i == forest.len() {
        return if forest_copies_monochromatic(chosen, shapes, colouring) {
            Some(chosen.clone())
        } else {
            None
        };
    }
    forest[i].for_each_dary_subtree(d, &mut |sub| {
        chosen.push(sub.clone());
        let r = search_components(forest, shapes, colouring, d, chosen);
        chosen.pop();
        r
    })
}

fn forest_copies_monochromatic(
    subforest: &[OrderedTree],
    shapes: &[Shape],
    colouring: &dyn Fn(&[Vec<u32>]) -> u32,
) -> bool {
    // cross product of per-component copies, checked against one colour
    let per: Vec<Vec<Vec<u32>>> = subforest
        .iter()
        .zip(shapes)
        .map(|(t, s)| {
            copies_of_shape(t, s)
                .into_iter()
                .map(|leaves| leaves.into_iter().map(|v| t.payload(v)).collect())
                .collect()
        })
        .collect();
    if per.iter().any(|c| c.is_empty()) {
        return true; // no copies at all: vacuously monochromatic
    }
    let mut tuple: Vec<Vec<u32>> = vec![Vec::new(); per.len()];
    let mut seen: Option<u32> = None;
    fn rec(
        per: &[Vec<Vec<u32>>],
        i: usize,
        tuple: &mut Vec<Vec<u32>>,
        seen: &mut Option<u32>,
        colouring: &dyn Fn(&[Vec<u32>]) -> u32,
    ) -> bool {
        if i == per.len() {
            let c = colouring(tuple);
            match *seen {
                None => {
                    *seen = Some(c);
                    true
                }
                Some(prev) => prev == c,
            }
        } else {
            per[i].iter().all(|copy| {
                tuple[i] = copy.clone();
                rec(per, i + 1, tuple, seen, colouring)
            })
        }
    }
    rec(&per, 0, &mut tuple, &mut seen, colouring)
}

/// Shape tuple of an r-set split across trees (per-tree minimal-subtree
/// encodings, empty string for no leaves in that tree).
pub fn shape_tuple(trees: &[&OrderedTree], verts: &[u32]) -> Result<Vec<Shape>> {
    let mut out = Vec::with_capacity(trees.len());
    for t in trees {
        let leaves = t.leaves();
        let mine: Vec<usize> = leaves
            .iter()
            .copied()
            .filter(|&l| verts.contains(&t.payload(l)))
            .collect();
        if mine.is_empty() {
            out.push(Shape(String::new()));
        } else {
            out.push(shape_of(t, &mine)?);
        }
    }
    Ok(out)
}

/// Find d-ary subtrees of the given vertex-disjoint trees such that every
/// r-set of surviving leaves has a colour depending only on its shape
/// tuple. Exhaustive over subtree tuples; None is a certified absence.
pub fn uniformize(
    trees: &[OrderedTree],
    colouring: &dyn Fn(&[u32]) -> Option<u32>,
    r: usize,
    d: usize,
    budget_subsets: u128,
) -> Result<Option<Vec<OrderedTree>>> {
    let mut total_leaves = 0usize;
    for (i, a) in trees.iter().enumerate() {
        total_leaves += a.leaves().len();
        for b in trees.iter().skip(i + 1) {
            if a.payloads().iter().any(|p| b.payloads().contains(p)) {
                return Err(Error::invalid("input trees must be vertex-disjoint"));
            }
        }
    }
    if binomial(total_leaves, r) > budget_subsets {
        return Err(Error::BudgetExceeded {
            needed: binomial(total_leaves, r),
            budget: budget_subsets,
        });
    }
    let mut chosen: Vec<OrderedTree> = Vec::new();
    Ok(uniformize_rec(trees, colouring, r, d, &mut chosen))
}

fn uniformize_rec(
    trees: &[OrderedTree],
    colouring: &dyn Fn(&[u32]) -> Option<u32>,
    r: usize,
    d: usize,
    chosen: &mut Vec<OrderedTree>,
) -> Option<Vec<OrderedTree>> {
    let i = chosen.len();
    if i == trees.len() {
        return if tuple_is_uniform(chosen, colouring, r) {
            Some(chosen.clone())
        } else {
            None
        };
    }
    trees[i].for_each_dary_subtree(d, &mut |sub| {
        chosen.push(sub.clone());
        let res = uniformize_rec(trees, colouring, r, d, chosen);
        chosen.pop();
        res
    })
}

fn tuple_is_uniform(
    chosen: &[OrderedTree],
    colouring: &dyn Fn(&[u32]) -> Option<u32>,
    r: usize,
) -> bool {
    let refs: Vec<&OrderedTree> = chosen.iter().collect();
    let mut union: Vec<u32> = Vec::new();
    for t in chosen {
        union.extend(t.leaf_payloads());
    }
    union.sort_unstable();
    let mut by_shape: BTreeMap<Vec<Shape>, u32> = BTreeMap::new();
    for_each_combination(&union, r, |e| {
        let Ok(tuple) = shape_tuple(&refs, e) else {
            return Some(());
        };
        let Some(c) = colouring(e) else {
            return Some(());
        };
        match by_shape.get(&tuple) {
            None => {
                by_shape.insert(tuple, c);
                None
            }
            Some(&prev) if prev == c => None,
            Some(_) => Some(()),
        }
    })
    .is_none()
}

/// Exhaustive connector search inside one tree: disjoint leaf sets X, Y, Z
/// of size `ell` with X and Z spanning vertex-disjoint order-isomorphic
/// subtrees and X u Y, Y u Z monochromatic r-cliques of one colour.
/// Pairs are grouped by shape before the Y scan.
pub fn find_connector(
    tree: &OrderedTree,
    colouring: &dyn Fn(&[u32]) -> Option<u32>,
    r: usize,
    ell: usize,
    budget_pairs: u128,
) -> Result<Option<Connector>> {
    if ell < r {
        return Err(Error::invalid("connector sets need at least r vertices"));
    }
    let leaves = tree.leaves();
    if leaves.len() < 3 * ell {
        return Ok(None);
    }
    let sets = binomial(leaves.len(), ell);
    if sets.saturating_mul(sets) > budget_pairs {
        return Err(Error::BudgetExceeded {
            needed: sets.saturating_mul(sets),
            budget: budget_pairs,
        });
    }
    // group ell-subsets by shape, remembering spanned tree nodes
    let mut by_shape: BTreeMap<Shape, Vec<(Vec<usize>, Vec<usize>)>> = BTreeMap::new();
    for_each_combination(&leaves, ell, |subset| {
        if let Ok((sub, nodes)) = tree.minimal_subtree(subset) {
            by_shape
                .entry(sub.shape())
                .or_default()
                .push((subset.to_vec(), nodes));
        }
        None::<()>
    });
    for (shape, class) in &by_shape {
        for (xi, (x_leaves, x_nodes)) in class.iter().enumerate() {
            for (zi, (z_leaves, z_nodes)) in class.iter().enumerate() {
                if xi == zi || x_nodes.iter().any(|n| z_nodes.contains(n)) {
                    continue;
                }
                let x: Vec<u32> = x_leaves.iter().map(|&l| tree.payload(l)).collect();
                let z: Vec<u32> = z_leaves.iter().map(|&l| tree.payload(l)).collect();
                let rest: Vec<u32> = leaves
                    .iter()
                    .filter(|l| !x_leaves.contains(l) && !z_leaves.contains(l))
                    .map(|&l| tree.payload(l))
                    .collect();
                let found = for_each_combination(&rest, ell, |y| {
                    let mut xy = x.clone();
                    xy.extend_from_slice(y);
                    let cx = mono_clique_colour(&xy, r, colouring)?;
                    let mut yz = z.clone();
                    yz.extend_from_slice(y);
                    let cz = mono_clique_colour(&yz, r, colouring)?;
                    if cx == cz {
                        Some(Connector {
                            x: x.clone(),
                            y: y.to_vec(),
                            z: z.clone(),
                            colour: cx,
                            shape: shape.clone(),
                        })
                    } else {
                        None
                    }
                });
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::otree::ordered_iso;

    fn counter(start: u32) -> impl FnMut() -> u32 {
        let mut next = start;
        move || {
            let v = next;
            next += 1;
            v
        }
    }

    #[test]
    fn mono_clique_detection() {
        let colour = |e: &[u32]| Some(u32::from(e.contains(&3)));
        assert_eq!(mono_clique_colour(&[0, 1, 2], 2, &colour), Some(0));
        assert_eq!(mono_clique_colour(&[1, 2, 3], 2, &colour), None);
        assert_eq!(mono_clique_colour(&[3, 4, 5], 2, &colour), None); // pair {4,5} has colour 0
    }

    #[test]
    fn micro_ramsey_ground_truth() {
        // one 6-leaf star, pattern = 2-leaf star, 2 colours, d = 3: a
        // monochromatic triangle in any 2-colouring of K_6
        let f = vec![OrderedTree::star(100, &[0, 1, 2, 3, 4, 5])];
        let s = vec![OrderedTree::star(0, &[1, 2])];
        let pair_index = |a: u32, b: u32| -> usize {
            let (a, b) = (a.min(b) as usize, a.max(b) as usize);
            a * 6 - a * (a + 1) / 2 + (b - a - 1)
        };
        for mask in 0u32..1 << 15 {
            let colouring = move |copy: &[Vec<u32>]| {
                let pair = &copy[0];
                mask >> pair_index(pair[0], pair[1]) & 1
            };
            let found = find_mono_subforest(&f, &s, &colouring, 3).unwrap();
            let sub = found.expect("K_6 always has a monochromatic triangle");
            let lp = sub[0].leaf_payloads();
            assert_eq!(lp.len(), 3);
            let c01 = colouring(&[vec![lp[0], lp[1]]]);
            let c02 = colouring(&[vec![lp[0], lp[2]]]);
            let c12 = colouring(&[vec![lp[1], lp[2]]]);
            assert!(c01 == c02 && c02 == c12);
        }
        // D = 5: the pentagon/pentagram colouring defeats the search
        let f5 = vec![OrderedTree::star(100, &[0, 1, 2, 3, 4])];
        let pentagon = |copy: &[Vec<u32>]| {
            let pair = &copy[0];
            u32::from((pair[1] - pair[0]) % 5 == 1 || (pair[1] - pair[0]) % 5 == 4)
        };
        assert!(find_mono_subforest(&f5, &s, &pentagon, 3)
            .unwrap()
            .is_none());
    }

    #[test]
    fn single_colour_always_uniformizes() {
        let t = OrderedTree::uniform(3, 1, &mut counter(0));
        let all_red = |_: &[u32]| Some(0u32);
        let out = uniformize(&[t], &all_red, 2, 2, 1 << 20).unwrap();
        assert!(out.is_some());
    }

    #[test]
    fn uniformize_single_star_is_leaf_ramsey() {
        // one star of 6 leaves, r = 2, s = 2, d = 3: uniformize must find a
        // monochromatic triangle among leaves (shape tuple = pair shape)
        let t = OrderedTree::star(100, &[0, 1, 2, 3, 4, 5]);
        let colouring =
            |e: &[u32]| Some(u32::from(e[0] + e[1] > 5));
        let out = uniformize(&[t], &colouring, 2, 3, 1 << 20)
            .unwrap()
            .expect("K_6 leaf Ramsey");
        let lp = out[0].leaf_payloads();
        let c = mono_clique_colour(&lp, 2, &colouring);
        assert!(c.is_some());
    }

    #[test]
    fn connector_in_monochromatic_tree() {
        // 3-ary height-2 tree, everything one colour, ell = r = 2
        let t = OrderedTree::uniform(3, 2, &mut counter(0));
        let all = |_: &[u32]| Some(0u32);
        let c = find_connector(&t, &all, 2, 2, 1 << 30)
            .unwrap()
            .expect("monochromatic tree has a connector");
        assert_eq!(c.colour, 0);
        assert_eq!(c.x.len(), 2);
        assert!(c.x.iter().all(|v| !c.y.contains(v) && !c.z.contains(v)));
        let leaves_x: Vec<usize> = t
            .leaves()
            .into_iter()
            .filter(|&l| c.x.contains(&t.payload(l)))
            .collect();
        let leaves_z: Vec<usize> = t
            .leaves()
            .into_iter()
            .filter(|&l| c.z.contains(&t.payload(l)))
            .collect();
        let (sx, nx) = t.minimal_subtree(&leaves_x).unwrap();
        let (sz, nz) = t.minimal_subtree(&leaves_z).unwrap();
        assert!(ordered_iso(&sx, &sz));
        assert!(nx.iter().all(|n| !nz.contains(n)));
    }

    #[test]
    fn connector_needs_enough_leaves() {
        let t = OrderedTree::uniform(2, 2, &mut counter(0));
        // 4 leaves < 3 * 2
        let all = |_: &[u32]| Some(0u32);
        assert!(find_connector(&t, &all, 2, 2, 1 << 30).unwrap().is_none());
    }
}
