//! Ordered rooted trees: per-vertex ordered child lists inducing the
//! left-to-right leaf order of a planar drawing. Payloads tie tree vertices
//! to external graph vertices. A height-0 singleton counts its root as a
//! leaf (the level-0 skeleton trees need this).

pub mod search;

pub use search::{find_connector, find_mono_subforest, uniformize, Connector};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedTree {
    payload: Vec<u32>,
    children: Vec<Vec<usize>>,
}

/// Canonical encoding of an ordered tree up to order-preserving isomorphism:
/// a vertex is "(" followed by its children's encodings and ")".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shape(pub String);

impl OrderedTree {
    pub const ROOT: usize = 0;

    pub fn singleton(payload: u32) -> Self {
        OrderedTree {
            payload: vec![payload],
            children: vec![Vec::new()],
        }
    }

    /// Star: root with the given leaf payloads in order.
    pub fn star(root: u32, leaves: &[u32]) -> Self {
        let mut t = OrderedTree::singleton(root);
        for &leaf in leaves {
            let node = t.add_child(Self::ROOT, leaf);
            let _ = node;
        }
        t
    }

    /// Uniform d-ary tree of the given height; payloads assigned by `next`
    /// in BFS order starting with the root.
    pub fn uniform(d: usize, height: usize, next: &mut impl FnMut() -> u32) -> Self {
        let mut t = OrderedTree::singleton(next());
        let mut level = vec![Self::ROOT];
        for _ in 0..height {
            let mut below = Vec::new();
            for &node in &level {
                for _ in 0..d {
                    below.push(t.add_child(node, next()));
                }
            }
            level = below;
        }
        t
    }

    pub fn add_child(&mut self, parent: usize, payload: u32) -> usize {
        let id = self.payload.len();
        self.payload.push(payload);
        self.children.push(Vec::new());
        self.children[parent].push(id);
        id
    }

    /// Graft a whole tree as the last child of `parent`; returns the node
    /// mapping from the grafted tree into self.
    pub fn graft(&mut self, parent: usize, sub: &OrderedTree) -> Vec<usize> {
        let offset = self.payload.len();
        let map: Vec<usize> = (0..sub.len()).map(|i| offset + i).collect();
        for i in 0..sub.len() {
            self.payload.push(sub.payload[i]);
            self.children
                .push(sub.children[i].iter().map(|&c| map[c]).collect());
        }
        self.children[parent].push(map[Self::ROOT]);
        map
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn payload(&self, node: usize) -> u32 {
        self.payload[node]
    }

    pub fn payloads(&self) -> &[u32] {
        &self.payload
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn root_payload(&self) -> u32 {
        self.payload[Self::ROOT]
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.len()];
        let mut stack = vec![Self::ROOT];
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                depth[c] = depth[v] + 1;
                stack.push(c);
            }
        }
        depth
    }

    /// Non-root leaves in sigma (left-to-right DFS) order; a singleton tree
    /// yields its root.
    pub fn leaves(&self) -> Vec<usize> {
        if self.len() == 1 {
            return vec![Self::ROOT];
        }
        let mut out = Vec::new();
        self.collect_leaves(Self::ROOT, &mut out);
        out
    }

    fn collect_leaves(&self, node: usize, out: &mut Vec<usize>) {
        if self.children[node].is_empty() {
            if node != Self::ROOT {
                out.push(node);
            }
            return;
        }
        for &c in &self.children[node] {
            self.collect_leaves(c, out);
        }
    }

    pub fn leaf_payloads(&self) -> Vec<u32> {
        self.leaves().into_iter().map(|v| self.payload[v]).collect()
    }

    /// Height when all non-root leaves sit at one depth.
    pub fn uniform_height(&self) -> Option<usize> {
        let depth = self.depths();
        let mut h = None;
        for leaf in self.leaves() {
            match h {
                None => h = Some(depth[leaf]),
                Some(d) if d == depth[leaf] => {}
                _ => return None,
            }
        }
        h
    }

    /// Every non-leaf vertex has exactly d children.
    pub fn is_dary(&self, d: usize) -> bool {
        (0..self.len()).all(|v| self.children[v].is_empty() || self.children[v].len() == d)
    }

    pub fn payloads_distinct(&self) -> bool {
        let set: BTreeSet<u32> = self.payload.iter().copied().collect();
        set.len() == self.payload.len()
    }

    pub fn parent_of(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.len()];
        for v in 0..self.len() {
            for &c in &self.children[v] {
                parent[c] = Some(v);
            }
        }
        parent
    }

    /// Minimal subtree containing the given leaves, rooted at their deepest
    /// common ancestor, leaf order inherited. Returns the subtree and its
    /// node map into self.
    pub fn minimal_subtree(&self, leaves: &[usize]) -> Result<(OrderedTree, Vec<usize>)> {
        if leaves.is_empty() {
            return Err(Error::invalid("minimal subtree of an empty leaf set"));
        }
        let parent = self.parent_of();
        let mut paths: Vec<Vec<usize>> = Vec::with_capacity(leaves.len());
        for &leaf in leaves {
            let mut path = vec![leaf];
            let mut cur = leaf;
            while let Some(p) = parent[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse(); // root .. leaf
            paths.push(path);
        }
        // deepest common prefix = LCA path
        let mut lca_depth = 0;
        'outer: loop {
            let Some(&candidate) = paths[0].get(lca_depth) else {
                break;
            };
            for p in &paths {
                if p.get(lca_depth) != Some(&candidate) {
                    break 'outer;
                }
            }
            lca_depth += 1;
        }
        let lca = paths[0][lca_depth - 1];
        let keep: BTreeSet<usize> = paths
            .iter()
            .flat_map(|p| p[lca_depth - 1..].iter().copied())
            .collect();
        // rebuild, preserving child order
        let mut sub = OrderedTree::singleton(self.payload[lca]);
        let mut map = vec![lca];
        self.copy_filtered(lca, 0, &keep, &mut sub, &mut map);
        Ok((sub, map))
    }

    fn copy_filtered(
        &self,
        node: usize,
        target: usize,
        keep: &BTreeSet<usize>,
        sub: &mut OrderedTree,
        map: &mut Vec<usize>,
    ) {
        for &c in &self.children[node] {
            if keep.contains(&c) {
                let t = sub.add_child(target, self.payload[c]);
                map.push(c);
                debug_assert_eq!(t, map.len() - 1);
                self.copy_filtered(c, t, keep, sub, map);
            }
        }
    }

    pub fn shape(&self) -> Shape {
        let mut s = String::with_capacity(2 * self.len());
        self.encode(Self::ROOT, &mut s);
        Shape(s)
    }

    fn encode(&self, node: usize, out: &mut String) {
        out.push('(');
        for &c in &self.children[node] {
            self.encode(c, out);
        }
        out.push(')');
    }

    /// Replace payloads via the given function.
    pub fn relabelled(&self, f: &mut impl FnMut(u32) -> u32) -> OrderedTree {
        OrderedTree {
            payload: self.payload.iter().map(|&p| f(p)).collect(),
            children: self.children.clone(),
        }
    }

    /// The d-ary subtree keeping the first d children everywhere.
    pub fn prefix_dary(&self, d: usize) -> Result<OrderedTree> {
        let mut sub = OrderedTree::singleton(self.root_payload());
        self.prefix_rec(Self::ROOT, 0, d, &mut sub)?;
        Ok(sub)
    }

    fn prefix_rec(&self, node: usize, target: usize, d: usize, sub: &mut OrderedTree) -> Result<()> {
        if self.children[node].is_empty() {
            return Ok(());
        }
        if self.children[node].len() < d {
            return Err(Error::invalid(format!(
                "vertex has only {} children, need {d}",
                self.children[node].len()
            )));
        }
        for &c in &self.children[node][..d] {
            let t = sub.add_child(target, self.payload[c]);
            self.prefix_rec(c, t, d, sub)?;
        }
        Ok(())
    }

    /// Visit every d-ary subtree with the same root (child subsets chosen in
    /// lexicographic order at each vertex); stops when `f` returns Some.
    pub fn for_each_dary_subtree<R>(
        &self,
        d: usize,
        f: &mut impl FnMut(&OrderedTree) -> Option<R>,
    ) -> Option<R> {
        let mut sub = OrderedTree::singleton(self.root_payload());
        self.dary_rec(&mut vec![(Self::ROOT, 0)], d, &mut sub, f)
    }

    // depth-first product of child combinations; `frontier` holds pairs of
    // (self node, sub node) whose children are still to be chosen
    fn dary_rec<R>(
        &self,
        frontier: &mut Vec<(usize, usize)>,
        d: usize,
        sub: &mut OrderedTree,
        f: &mut impl FnMut(&OrderedTree) -> Option<R>,
    ) -> Option<R> {
        let Some((node, target)) = frontier.pop() else {
            return f(sub);
        };
        if self.children[node].is_empty() {
            let r = self.dary_rec(frontier, d, sub, f);
            frontier.push((node, target));
            return r;
        }
        let kids = &self.children[node];
        if kids.len() < d {
            frontier.push((node, target));
            return None;
        }
        let result = crate::combin::for_each_combination(kids, d, |picked| {
            let checkpoint = sub.len();
            let mut added = Vec::with_capacity(d);
            for &c in picked {
                let t = sub.add_child(target, self.payload[c]);
                added.push((c, t));
            }
            for &pair in added.iter().rev() {
                frontier.push(pair);
            }
            let r = self.dary_rec(frontier, d, sub, f);
            for _ in &added {
                frontier.pop();
            }
            sub.truncate_from(checkpoint);
            r
        });
        frontier.push((node, target));
        result
    }

    /// Drop all nodes with index >= `from` (the tail of a run of add_child
    /// calls) and scrub them from child lists.
    pub(crate) fn truncate_from(&mut self, from: usize) {
        self.payload.truncate(from);
        self.children.truncate(from);
        for list in &mut self.children {
            list.retain(|&c| c < from);
        }
    }
}

impl Shape {
    pub fn leaf_count(&self) -> usize {
        self.0.matches("()").count().max(1)
    }

    pub fn height(&self) -> usize {
        let mut depth = 0usize;
        let mut best = 0usize;
        for b in self.0.bytes() {
            match b {
                b'(' => {
                    depth += 1;
                    best = best.max(depth);
                }
                _ => depth -= 1,
            }
        }
        best.saturating_sub(1)
    }

    /// Parse back into a payload-free tree (payloads count up from 0).
    pub fn to_tree(&self) -> Result<OrderedTree> {
        let bytes = self.0.as_bytes();
        if bytes.is_empty() || bytes[0] != b'(' {
            return Err(Error::invalid("bad shape encoding"));
        }
        let mut t = OrderedTree::singleton(0);
        let mut next_payload = 1u32;
        let mut stack = vec![OrderedTree::ROOT];
        for &b in &bytes[1..] {
            match b {
                b'(' => {
                    let parent = *stack.last().ok_or_else(|| Error::invalid("bad shape"))?;
                    let node = t.add_child(parent, next_payload);
                    next_payload += 1;
                    stack.push(node);
                }
                b')' => {
                    stack.pop().ok_or_else(|| Error::invalid("bad shape"))?;
                }
                _ => return Err(Error::invalid("bad shape character")),
            }
        }
        if !stack.is_empty() {
            return Err(Error::invalid("unbalanced shape encoding"));
        }
        Ok(t)
    }
}

/// Shape of the minimal subtree spanned by a set of leaf nodes.
pub fn shape_of(tree: &OrderedTree, leaves: &[usize]) -> Result<Shape> {
    Ok(tree.minimal_subtree(leaves)?.0.shape())
}

/// Ordered isomorphism: equal canonical encodings.
pub fn ordered_iso(a: &OrderedTree, b: &OrderedTree) -> bool {
    a.shape() == b.shape()
}

/// All leaf subsets of `tree` whose minimal subtree has the given shape.
pub fn copies_of_shape(tree: &OrderedTree, shape: &Shape) -> Vec<Vec<usize>> {
    let leaves = tree.leaves();
    let want = shape.leaf_count();
    let mut out = Vec::new();
    crate::combin::for_each_combination(&leaves, want, |subset| {
        if let Ok(s) = shape_of(tree, subset) {
            if &s == shape {
                out.push(subset.to_vec());
            }
        }
        None::<()>
    });
    out
}

/// Component-aligned copies of an ordered forest shape inside an ordered
/// forest: the i-th entry is a leaf subset of forest[i] with pattern[i]'s
/// shape. The cross product is returned as tuples of per-component subsets.
pub fn enumerate_copies(
    forest: &[OrderedTree],
    pattern: &[OrderedTree],
) -> Result<Vec<Vec<Vec<usize>>>> {
    if forest.len() != pattern.len() {
        return Err(Error::invalid("component counts differ"));
    }
    let mut per_component: Vec<Vec<Vec<usize>>> = Vec::with_capacity(forest.len());
    for (t, s) in forest.iter().zip(pattern) {
        let copies = copies_of_shape(t, &s.shape());
        if copies.is_empty() {
            return Ok(Vec::new());
        }
        per_component.push(copies);
    }
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for comp in per_component {
        let mut next = Vec::with_capacity(out.len() * comp.len());
        for prefix in &out {
            for c in &comp {
                let mut row = prefix.clone();
                row.push(c.clone());
                next.push(row);
            }
        }
        out = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counter() -> impl FnMut() -> u32 {
        let mut next = 0u32;
        move || {
            let v = next;
            next += 1;
            v
        }
    }

    #[test]
    fn singleton_leaf_is_root() {
        let t = OrderedTree::singleton(7);
        assert_eq!(t.leaves(), vec![0]);
        assert_eq!(t.leaf_payloads(), vec![7]);
        assert_eq!(t.uniform_height(), Some(0));
    }

    #[test]
    fn uniform_tree_structure() {
        let t = OrderedTree::uniform(3, 2, &mut counter());
        assert_eq!(t.len(), 13);
        assert!(t.is_dary(3));
        assert_eq!(t.uniform_height(), Some(2));
        assert_eq!(t.leaves().len(), 9);
        // leaves come out in planar order
        let lp = t.leaf_payloads();
        let mut sorted = lp.clone();
        sorted.sort_unstable();
        assert_eq!(lp, sorted);
    }

    #[test]
    fn minimal_subtree_examples() {
        let t = OrderedTree::uniform(2, 2, &mut counter());
        let leaves = t.leaves();
        // whole leaf set gives the whole tree
        let (full, _) = t.minimal_subtree(&leaves).unwrap();
        assert_eq!(full.shape(), t.shape());
        // single leaf gives a singleton
        let (one, _) = t.minimal_subtree(&leaves[..1]).unwrap();
        assert_eq!(one.len(), 1);
        // leaves under different height-1 children give a cherry through the root
        let (cherry, _) = t.minimal_subtree(&[leaves[0], leaves[2]]).unwrap();
        assert_eq!(cherry.shape(), Shape("((())(()))".to_string()));
        assert_eq!(cherry.uniform_height(), Some(2));
        // sibling leaves give a flat cherry below the root
        let (flat, _) = t.minimal_subtree(&[leaves[0], leaves[1]]).unwrap();
        assert_eq!(flat.shape(), Shape("(()())".to_string()));
    }

    #[test]
    fn shapes_and_iso() {
        let t = OrderedTree::uniform(2, 2, &mut counter());
        let leaves = t.leaves();
        let a = shape_of(&t, &[leaves[0], leaves[1]]).unwrap();
        let b = shape_of(&t, &[leaves[2], leaves[3]]).unwrap();
        assert_eq!(a, b);
        // payload relabelling does not change shapes
        let relabelled = t.relabelled(&mut |p| p + 100);
        assert_eq!(t.shape(), relabelled.shape());
        // mirror-image stalked cherries differ as ordered trees
        let left = Shape("(((()))(()))".to_string()).to_tree().unwrap();
        let right = Shape("((())((())))".to_string()).to_tree().unwrap();
        assert!(!ordered_iso(&left, &right));
    }

    #[test]
    fn shape_roundtrip() {
        let t = OrderedTree::uniform(3, 2, &mut counter());
        let s = t.shape();
        let back = s.to_tree().unwrap();
        assert_eq!(back.shape(), s);
        assert_eq!(s.leaf_count(), 9);
        assert_eq!(s.height(), 2);
    }

    #[test]
    fn copy_enumeration_star() {
        // D-ary star, r-leaf star pattern: all r-subsets
        let f = OrderedTree::star(99, &[0, 1, 2, 3, 4, 5]);
        let s = OrderedTree::star(0, &[1, 2]);
        let copies = copies_of_shape(&f, &s.shape());
        assert_eq!(copies.len(), 15);
        // binary tree of height 2, cherry through the root: 4 copies
        let t = OrderedTree::uniform(2, 2, &mut counter());
        let cherry = Shape("((())(()))".to_string());
        assert_eq!(copies_of_shape(&t, &cherry).len(), 4);
    }

    #[test]
    fn forest_copies_align_components() {
        let f = vec![
            OrderedTree::star(90, &[0, 1, 2]),
            OrderedTree::star(91, &[10, 11]),
        ];
        let s = vec![OrderedTree::star(0, &[1]), OrderedTree::star(0, &[1])];
        let copies = enumerate_copies(&f, &s).unwrap();
        assert_eq!(copies.len(), 6); // 3 leaves x 2 leaves
    }

    #[test]
    fn dary_subtree_enumeration() {
        let t = OrderedTree::star(9, &[0, 1, 2, 3]);
        let mut count = 0usize;
        t.for_each_dary_subtree(2, &mut |sub| {
            assert!(sub.is_dary(2));
            assert_eq!(sub.len(), 3);
            count += 1;
            None::<()>
        });
        assert_eq!(count, 6); // C(4,2)
        let deep = OrderedTree::uniform(3, 2, &mut counter());
        let mut deep_count = 0usize;
        deep.for_each_dary_subtree(2, &mut |sub| {
            assert!(sub.is_dary(2));
            assert_eq!(sub.uniform_height(), Some(2));
            deep_count += 1;
            None::<()>
        });
        assert_eq!(deep_count, 3 * 3 * 3); // C(3,2)^3
    }

    #[test]
    fn prefix_dary_subtree() {
        let t = OrderedTree::uniform(3, 2, &mut counter());
        let sub = t.prefix_dary(2).unwrap();
        assert!(sub.is_dary(2));
        assert_eq!(sub.uniform_height(), Some(2));
        assert!(t.prefix_dary(4).is_err());
    }
}
