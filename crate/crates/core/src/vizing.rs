//! Misra-Gries edge colouring: a proper colouring with at most Delta+1
//! colours, via maximal fans, cd_u path inversion and fan rotation.

use std::collections::BTreeMap;

use crate::graph::Graph;

#[derive(Debug, Clone)]
pub struct EdgeColouring {
    /// proper colour per edge
    pub colours: BTreeMap<(u32, u32), usize>,
    pub num_colours: usize,
}

impl EdgeColouring {
    pub fn colour(&self, u: u32, v: u32) -> Option<usize> {
        self.colours.get(&(u.min(v), u.max(v))).copied()
    }

    /// The colour classes as matchings, indexed by colour.
    pub fn matchings(&self) -> Vec<Vec<(u32, u32)>> {
        let mut out = vec![Vec::new(); self.num_colours];
        for (&e, &c) in &self.colours {
            out[c].push(e);
        }
        out
    }

    pub fn is_proper(&self, g: &Graph) -> bool {
        if self.colours.len() != g.edge_count() {
            return false;
        }
        let mut seen: BTreeMap<(u32, usize), ()> = BTreeMap::new();
        for (&(u, v), &c) in &self.colours {
            if !g.has_edge(u, v) {
                return false;
            }
            if seen.insert((u, c), ()).is_some() || seen.insert((v, c), ()).is_some() {
                return false;
            }
        }
        true
    }
}

struct State {
    adj: Vec<Vec<u32>>,
    colour: BTreeMap<(u32, u32), usize>,
    used: Vec<Vec<bool>>, // used[v][c]
    palette: usize,
}

impl State {
    fn key(u: u32, v: u32) -> (u32, u32) {
        (u.min(v), u.max(v))
    }

    fn get(&self, u: u32, v: u32) -> Option<usize> {
        self.colour.get(&Self::key(u, v)).copied()
    }

    fn set(&mut self, u: u32, v: u32, c: usize) {
        if let Some(old) = self.colour.insert(Self::key(u, v), c) {
            self.used[u as usize][old] = false;
            self.used[v as usize][old] = false;
        }
        self.used[u as usize][c] = true;
        self.used[v as usize][c] = true;
    }

    fn free(&self, v: u32, c: usize) -> bool {
        !self.used[v as usize][c]
    }

    fn first_free(&self, v: u32) -> usize {
        (0..self.palette)
            .find(|&c| self.free(v, c))
            .expect("palette of size Delta+1 always has a free colour")
    }

    /// Maximal fan at u starting with v: successive neighbours whose edge to
    /// u is coloured with a colour free on the previous fan vertex.
    /// Candidates are taken in ascending id order.
    fn maximal_fan(&self, u: u32, v: u32) -> Vec<u32> {
        let mut fan = vec![v];
        let mut cands: Vec<u32> = self.adj[u as usize]
            .iter()
            .copied()
            .filter(|&w| w != v)
            .collect();
        cands.sort_unstable();
        let mut last = v;
        loop {
            let next = cands.iter().position(|&w| {
                self.get(u, w)
                    .map(|c| self.free(last, c))
                    .unwrap_or(false)
            });
            match next {
                Some(i) => {
                    last = cands.remove(i);
                    fan.push(last);
                }
                None => return fan,
            }
        }
    }

    /// Longest path from u along alternating colours first, second, ... and
    /// flip every colour on it.
    fn invert_cd_path(&mut self, u: u32, first: usize, second: usize) {
        let mut cur = u;
        let mut want = first;
        let mut path: Vec<(u32, u32)> = Vec::new();
        loop {
            let next = self.adj[cur as usize]
                .iter()
                .copied()
                .find(|&w| self.get(cur, w) == Some(want) && path.last() != Some(&(w, cur)));
            match next {
                Some(w) => {
                    path.push((cur, w));
                    cur = w;
                    want = if want == first { second } else { first };
                }
                None => break,
            }
        }
        for &(a, b) in &path {
            let old = self.get(a, b).unwrap();
            let new = if old == first { second } else { first };
            self.set(a, b, new);
        }
    }
}

/// Proper edge colouring with at most Delta+1 colours.
pub fn vizing_colouring(g: &Graph) -> EdgeColouring {
    let delta = g.max_degree();
    let palette = delta + 1;
    let mut st = State {
        adj: g.adjacency(),
        colour: BTreeMap::new(),
        used: vec![vec![false; palette.max(1)]; g.n()],
        palette: palette.max(1),
    };
    for (u, v) in g.edges() {
        let fan = st.maximal_fan(u, v);
        let c = st.first_free(u);
        let d = st.first_free(*fan.last().unwrap());
        if c != d {
            st.invert_cd_path(u, d, c);
        }
        // first fan vertex with d free after inversion
        let w = fan
            .iter()
            .position(|&x| st.free(x, d))
            .expect("fan end has d free");
        // rotate the prefix: edge to fan[i-1] takes the colour of fan[i]
        for i in 1..=w {
            let next_colour = st.get(u, fan[i]).unwrap();
            st.set(u, fan[i - 1], next_colour);
        }
        st.set(u, fan[w], d);
    }
    let num_colours = st.colour.values().copied().max().map_or(0, |c| c + 1);
    EdgeColouring {
        colours: st.colour,
        num_colours,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_uses_two_colours() {
        let g = Graph::path(4);
        let c = vizing_colouring(&g);
        assert!(c.is_proper(&g));
        assert!(c.num_colours <= 2);
    }

    #[test]
    fn five_cycle_needs_three() {
        let g = Graph::cycle(5);
        let c = vizing_colouring(&g);
        assert!(c.is_proper(&g));
        assert!(c.num_colours <= 3);
        // exhaustive: no proper 2-colouring of C_5's edges exists
        let edges: Vec<(u32, u32)> = g.edges().collect();
        let mut any_proper = false;
        for mask in 0u32..1 << edges.len() {
            let mut seen = std::collections::BTreeSet::new();
            let proper = edges.iter().enumerate().all(|(i, &(u, v))| {
                let col = mask >> i & 1;
                seen.insert((u, col)) && seen.insert((v, col))
            });
            if proper {
                any_proper = true;
                break;
            }
        }
        assert!(!any_proper);
        assert_eq!(c.num_colours, 3);
    }

    #[test]
    fn complete_graph_within_bound() {
        let g = Graph::complete(4);
        let c = vizing_colouring(&g);
        assert!(c.is_proper(&g));
        assert!(c.num_colours <= g.max_degree() + 1);
    }

    #[test]
    fn random_graphs_proper_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..300 {
            let n = 4 + (trial % 27);
            let g = Graph::random(n, 0.3, &mut rng);
            let c = vizing_colouring(&g);
            assert!(c.is_proper(&g), "improper colouring on trial {trial}");
            assert!(c.num_colours <= g.max_degree() + 1);
        }
    }

    #[test]
    fn matchings_partition_edges() {
        let g = Graph::complete(5);
        let c = vizing_colouring(&g);
        let total: usize = c.matchings().iter().map(|m| m.len()).sum();
        assert_eq!(total, g.edge_count());
        for m in c.matchings() {
            let mut touched = std::collections::BTreeSet::new();
            for (u, v) in m {
                assert!(touched.insert(u) && touched.insert(v));
            }
        }
    }
}
