//! Expansion predicates and certified generation. An eps-expander has an
//! edge between every two disjoint vertex sets of size ceil(eps*n); the
//! bipartite variant restricts the sets to the two sides; (m,d)-expanding
//! means |N(X)| >= d|X| for all |X| <= m. Verdicts from the exhaustive
//! scanners are ground truth; the sampling mode is always labelled
//! uncertified.

use num_rational::Ratio;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combin::{binomial, subsets_up_to, unrank_combination};
use crate::error::{Error, Result};
use crate::exec::{find_map_indexed, ExecMode};
use crate::graph::Graph;

/// Exact rational expansion parameter; decimal strings like "0.25" parse
/// without float rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Eps(Ratio<u64>);

impl Eps {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Eps(Ratio::new(num, den))
    }

    pub fn from_decimal_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('.') {
            None => (
                s.parse::<u64>()
                    .map_err(|_| Error::invalid(format!("bad rational {s}")))?,
                1u64,
            ),
            Some((int, frac)) => {
                if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::invalid(format!("bad rational {s}")));
                }
                let den = 10u64
                    .checked_pow(frac.len() as u32)
                    .ok_or_else(|| Error::invalid("too many decimal digits"))?;
                let int: u64 = if int.is_empty() {
                    0
                } else {
                    int.parse()
                        .map_err(|_| Error::invalid(format!("bad rational {s}")))?
                };
                let frac: u64 = frac
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad rational {s}")))?;
                (int * den + frac, den)
            }
        };
        Ok(Eps::new(num, den))
    }

    /// ceil(eps * n), exactly.
    pub fn ceil_mul(&self, n: usize) -> usize {
        let num = self.0.numer() * n as u64;
        let den = *self.0.denom();
        (num.div_ceil(den)) as usize
    }

    pub fn as_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl From<Eps> for String {
    fn from(e: Eps) -> String {
        format!("{}/{}", e.0.numer(), e.0.denom())
    }
}

impl TryFrom<String> for Eps {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        if let Some((n, d)) = s.split_once('/') {
            let n = n.parse().map_err(|_| Error::invalid("bad rational"))?;
            let d = d.parse().map_err(|_| Error::invalid("bad rational"))?;
            Ok(Eps::new(n, d))
        } else {
            Eps::from_decimal_str(&s)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertKind {
    Eps { eps: Eps },
    BipartiteEps { eps: Eps },
    Expanding { m: usize, d: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    /// two disjoint sets with no edge between them
    SetPair { a: Vec<u32>, b: Vec<u32> },
    /// a set with too small a neighbourhood
    Set { x: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionCertificate {
    #[serde(flatten)]
    pub kind: CertKind,
    pub verdict: bool,
    /// false means the sampled (uncertified) mode produced the verdict
    pub exhaustive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl ExpansionCertificate {
    fn pass(kind: CertKind, exhaustive: bool) -> Self {
        ExpansionCertificate {
            kind,
            verdict: true,
            exhaustive,
            witness: None,
        }
    }

    fn fail(kind: CertKind, witness: Witness) -> Self {
        ExpansionCertificate {
            kind,
            verdict: false,
            exhaustive: true,
            witness: Some(witness),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanBudget {
    /// cap on the number of subsets an exhaustive scan may visit
    pub subsets: u128,
    /// hard vertex cap for the whole-graph eps scan
    pub eps_vertex_cap: usize,
    pub mode: ExecMode,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget {
            subsets: 50_000_000,
            eps_vertex_cap: 18,
            mode: ExecMode::default(),
        }
    }
}

/// Re-check a negative witness against the graph it was issued for.
pub fn witness_is_valid(g: &Graph, cert: &ExpansionCertificate) -> bool {
    match (&cert.kind, &cert.witness) {
        (CertKind::Eps { eps }, Some(Witness::SetPair { a, b })) => {
            let m = eps.ceil_mul(g.n());
            a.len() >= m
                && b.len() >= m
                && a.iter().all(|x| !b.contains(x))
                && !a.iter().any(|&x| b.iter().any(|&y| g.has_edge(x, y)))
        }
        (CertKind::BipartiteEps { .. }, Some(Witness::SetPair { a, b })) => {
            !a.iter().any(|&x| b.iter().any(|&y| g.has_edge(x, y)))
        }
        (CertKind::Expanding { m, d }, Some(Witness::Set { x })) => {
            x.len() <= *m && neighbourhood(g, x).len() < d * x.len()
        }
        _ => false,
    }
}

fn neighbourhood(g: &Graph, x: &[u32]) -> Vec<u32> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.n()];
    for &v in x {
        for &u in &adj[v as usize] {
            seen[u as usize] = true;
        }
    }
    for &v in x {
        seen[v as usize] = false;
    }
    (0..g.n() as u32).filter(|&v| seen[v as usize]).collect()
}

/// Exhaustive eps-expander check. A single scan over ceil(eps*n)-subsets A
/// suffices: a violating pair of large sets restricts to a violating pair of
/// exact-size sets, and for fixed A the best partner is everything outside
/// A and its neighbourhood.
pub fn is_eps_expander(g: &Graph, eps: Eps, budget: &ScanBudget) -> Result<ExpansionCertificate> {
    let kind = CertKind::Eps { eps };
    let n = g.n();
    if n > budget.eps_vertex_cap {
        return Err(Error::SizeCapExceeded {
            n,
            cap: budget.eps_vertex_cap,
        });
    }
    let m = eps.ceil_mul(n);
    if 2 * m > n || n == 0 {
        // two disjoint sets of this size cannot exist
        return Ok(ExpansionCertificate::pass(kind, true));
    }
    if m == 0 {
        return Err(Error::invalid("eps must be positive"));
    }
    let count = binomial(n, m);
    if count > budget.subsets {
        return Err(Error::BudgetExceeded {
            needed: count,
            budget: budget.subsets,
        });
    }
    let masks = g.adjacency_masks();
    let blocks = n.div_ceil(64);
    let found = find_map_indexed(budget.mode, count as u64, |rank| {
        let a = unrank_combination(n, m, rank as u128);
        let mut covered = vec![0u64; blocks];
        for &v in &a {
            covered[v / 64] |= 1 << (v % 64);
            for (i, w) in masks[v].iter().enumerate() {
                covered[i] |= w;
            }
        }
        let avail: Vec<u32> = (0..n as u32)
            .filter(|&v| covered[v as usize / 64] & (1 << (v % 64)) == 0)
            .collect();
        if avail.len() >= m {
            Some(Witness::SetPair {
                a: a.iter().map(|&v| v as u32).collect(),
                b: avail[..m].to_vec(),
            })
        } else {
            None
        }
    });
    Ok(match found {
        Some(w) => ExpansionCertificate::fail(kind, w),
        None => ExpansionCertificate::pass(kind, true),
    })
}

/// Sampling fallback for graphs beyond the exhaustive cap; a true verdict is
/// explicitly uncertified.
pub fn is_eps_expander_sampled(
    g: &Graph,
    eps: Eps,
    samples: usize,
    seed: u64,
) -> ExpansionCertificate {
    let kind = CertKind::Eps { eps };
    let n = g.n();
    let m = eps.ceil_mul(n);
    if 2 * m > n || n == 0 {
        return ExpansionCertificate::pass(kind, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut perm: Vec<u32> = (0..n as u32).collect();
        for i in 0..2 * m {
            let j = rng.gen_range(i..n);
            perm.swap(i, j);
        }
        let a = &perm[..m];
        let b = &perm[m..2 * m];
        if !a.iter().any(|&x| b.iter().any(|&y| g.has_edge(x, y))) {
            let mut a = a.to_vec();
            let mut b = b.to_vec();
            a.sort_unstable();
            b.sort_unstable();
            return ExpansionCertificate::fail(kind, Witness::SetPair { a, b });
        }
    }
    ExpansionCertificate {
        kind,
        verdict: true,
        exhaustive: false,
        witness: None,
    }
}

/// Exhaustive bipartite eps-expander check with respect to a given
/// bipartition (which must be a genuine bipartition of the edges).
pub fn is_bipartite_eps_expander(
    g: &Graph,
    parts: (&[u32], &[u32]),
    eps: Eps,
    budget: &ScanBudget,
) -> Result<ExpansionCertificate> {
    let kind = CertKind::BipartiteEps { eps };
    let (x1, x2) = parts;
    validate_bipartition(g, x1, x2)?;
    let (m1, m2) = (eps.ceil_mul(x1.len()), eps.ceil_mul(x2.len()));
    if m1 == 0 || m2 == 0 {
        // empty sides: the empty set pair is vacuously unjoined
        return Ok(ExpansionCertificate::fail(
            kind,
            Witness::SetPair { a: vec![], b: vec![] },
        ));
    }
    let count = binomial(x1.len(), m1);
    if count > budget.subsets {
        return Err(Error::BudgetExceeded {
            needed: count,
            budget: budget.subsets,
        });
    }
    let adj = g.adjacency();
    let found = find_map_indexed(budget.mode, count as u64, |rank| {
        let pick = unrank_combination(x1.len(), m1, rank as u128);
        let a: Vec<u32> = pick.iter().map(|&i| x1[i]).collect();
        let mut hit = vec![false; g.n()];
        for &v in &a {
            for &u in &adj[v as usize] {
                hit[u as usize] = true;
            }
        }
        let avail: Vec<u32> = x2.iter().copied().filter(|&v| !hit[v as usize]).collect();
        if avail.len() >= m2 {
            Some(Witness::SetPair {
                a,
                b: avail[..m2].to_vec(),
            })
        } else {
            None
        }
    });
    Ok(match found {
        Some(w) => ExpansionCertificate::fail(kind, w),
        None => ExpansionCertificate::pass(kind, true),
    })
}

fn validate_bipartition(g: &Graph, x1: &[u32], x2: &[u32]) -> Result<()> {
    let mut side = vec![u8::MAX; g.n()];
    for &v in x1 {
        side[v as usize] = 0;
    }
    for &v in x2 {
        if side[v as usize] == 0 {
            return Err(Error::invalid(format!("vertex {v} on both sides")));
        }
        side[v as usize] = 1;
    }
    if side.iter().any(|&s| s == u8::MAX) {
        return Err(Error::invalid("bipartition does not cover the graph"));
    }
    for (u, v) in g.edges() {
        if side[u as usize] == side[v as usize] {
            return Err(Error::invalid(format!(
                "edge ({u},{v}) lies inside one side"
            )));
        }
    }
    Ok(())
}

/// Exhaustive (m,d)-expanding check: |N(X)| >= d|X| for every X with
/// 1 <= |X| <= m. N(X) excludes X itself. m = 0 is vacuously true.
pub fn is_expanding(g: &Graph, m: usize, d: usize, budget: &ScanBudget) -> Result<ExpansionCertificate> {
    let kind = CertKind::Expanding { m, d };
    let n = g.n();
    let m_eff = m.min(n);
    let total = subsets_up_to(n, m_eff);
    if total > budget.subsets {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget: budget.subsets,
        });
    }
    let masks = g.adjacency_masks();
    let blocks = n.div_ceil(64);
    for k in 1..=m_eff {
        let count = binomial(n, k);
        let found = find_map_indexed(budget.mode, count as u64, |rank| {
            let x = unrank_combination(n, k, rank as u128);
            let mut nb = vec![0u64; blocks];
            for &v in &x {
                for (i, w) in masks[v].iter().enumerate() {
                    nb[i] |= w;
                }
            }
            for &v in &x {
                nb[v / 64] &= !(1 << (v % 64));
            }
            let size: usize = nb.iter().map(|w| w.count_ones() as usize).sum();
            if size < d * k {
                Some(Witness::Set {
                    x: x.iter().map(|&v| v as u32).collect(),
                })
            } else {
                None
            }
        });
        if let Some(w) = found {
            return Ok(ExpansionCertificate::fail(kind, w));
        }
    }
    Ok(ExpansionCertificate::pass(kind, true))
}

/// Sample G(N, p) with N = 2n and p = beta/N for beta =
/// 20 (1/eps) log(1/eps) (natural log), delete vertices of degree above
/// 4pN, keep n survivors, and certify. Retries with derived seeds until the
/// certificate comes back true.
pub fn random_expander(
    n: usize,
    eps: Eps,
    seed: u64,
    retries: usize,
) -> Result<(Graph, ExpansionCertificate)> {
    let budget = ScanBudget::default();
    let inv = 1.0 / eps.as_f64();
    let beta = 20.0 * inv * inv.ln();
    let big_n = 2 * n;
    let p = (beta / big_n as f64).clamp(0.0, 1.0);
    let degree_cap = (4.0 * p * big_n as f64).floor() as usize;
    for attempt in 0..retries.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64 * 0x5bd1));
        let g = Graph::random(big_n, p, &mut rng);
        let deg = g.degrees();
        let keep: Vec<u32> = (0..big_n as u32)
            .filter(|&v| deg[v as usize] <= degree_cap)
            .take(n)
            .collect();
        if keep.len() < n {
            continue;
        }
        let (candidate, _) = g.induced(&keep);
        let cert = if n <= budget.eps_vertex_cap {
            is_eps_expander(&candidate, eps, &budget)?
        } else {
            is_eps_expander_sampled(&candidate, eps, 20_000, seed ^ 0xabcd)
        };
        if cert.verdict {
            return Ok((candidate, cert));
        }
    }
    Err(Error::RetriesExhausted {
        retries,
        what: format!("random {n}-vertex expander at eps={}", String::from(eps)),
    })
}

#[derive(Debug, Clone)]
pub struct BoostResult {
    /// original ids of surviving vertices, ascending
    pub kept: Vec<u32>,
    /// original ids removed (the grown set A together with its neighbourhood)
    pub removed: Vec<u32>,
    /// induced subgraph on `kept`, relabelled in `kept` order
    pub graph: Graph,
}

/// Greedy form of the bipartite boosting lemma: grow A by violating sets
/// (smallest first, lexicographic within a size) until the remainder has no
/// set B with |B| <= cap and |N(B)| < d|B|; return the remainder.
pub fn boost_bipartite(
    g: &Graph,
    parts: (&[u32], &[u32]),
    d: usize,
    budget: &ScanBudget,
) -> Result<BoostResult> {
    validate_bipartition(g, parts.0, parts.1)?;
    let n_half = parts.0.len().min(parts.1.len()).max(1);
    let cap = (n_half / (2 * d)).max(1);
    let adj = g.adjacency();
    let mut in_a = vec![false; g.n()];
    loop {
        // current remainder = everything outside A and N_G(A)
        let mut removed = vec![false; g.n()];
        for v in 0..g.n() {
            if in_a[v] {
                removed[v] = true;
                for &u in &adj[v] {
                    removed[u as usize] = true;
                }
            }
        }
        let kept: Vec<u32> = (0..g.n() as u32).filter(|&v| !removed[v as usize]).collect();
        let (sub, _) = g.induced(&kept);
        let cert = is_expanding(&sub, cap, d, budget)?;
        match cert.witness {
            None => {
                return Ok(BoostResult {
                    removed: (0..g.n() as u32).filter(|&v| removed[v as usize]).collect(),
                    graph: sub,
                    kept,
                });
            }
            Some(Witness::Set { x }) => {
                for local in x {
                    in_a[kept[local as usize] as usize] = true;
                }
            }
            Some(_) => unreachable!("expanding witnesses are sets"),
        }
    }
}

/// Equipartition into low half and high half, cross edges only, then boost
/// with d = 2. For an eps-expander with eps <= 1/32 the result is
/// (n/16, 2)-expanding on at least n/2 vertices.
pub fn boost(g: &Graph, budget: &ScanBudget) -> Result<BoostResult> {
    let half = g.n().div_ceil(2);
    let x1: Vec<u32> = (0..half as u32).collect();
    let x2: Vec<u32> = (half as u32..g.n() as u32).collect();
    let cross = g.edge_subgraph(|u, v| ((u as usize) < half) != ((v as usize) < half));
    boost_bipartite(&cross, (&x1, &x2), 2, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> ScanBudget {
        ScanBudget::default()
    }

    #[test]
    fn eps_parsing() {
        assert_eq!(Eps::from_decimal_str("0.25").unwrap(), Eps::new(1, 4));
        assert_eq!(Eps::from_decimal_str("1").unwrap(), Eps::new(1, 1));
        assert_eq!(Eps::new(3, 10).ceil_mul(10), 3);
        assert_eq!(Eps::new(1, 10).ceil_mul(30), 3);
        assert_eq!(Eps::new(2, 5).ceil_mul(12), 5);
        assert!(Eps::from_decimal_str("x.y").is_err());
    }

    #[test]
    fn complete_graph_expands() {
        let cert = is_eps_expander(&Graph::complete(9), Eps::new(1, 5), &budget()).unwrap();
        assert!(cert.verdict && cert.exhaustive);
    }

    #[test]
    fn two_cliques_fail_with_witness() {
        let mut g = Graph::new(8);
        for u in 0..4u32 {
            for v in u + 1..4 {
                g.add_edge(u, v);
                g.add_edge(u + 4, v + 4);
            }
        }
        let cert = is_eps_expander(&g, Eps::new(2, 5), &budget()).unwrap();
        assert!(!cert.verdict);
        assert!(witness_is_valid(&g, &cert));
    }

    #[test]
    fn cycle_eight_quarter_fails() {
        let c8 = Graph::cycle(8);
        let cert = is_eps_expander(&c8, Eps::new(1, 4), &budget()).unwrap();
        assert!(!cert.verdict);
        assert!(witness_is_valid(&c8, &cert));
        // first witness in lexicographic order is {0,1} against {3,4}
        match cert.witness.unwrap() {
            Witness::SetPair { a, b } => {
                assert_eq!(a, vec![0, 1]);
                assert_eq!(b, vec![3, 4]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn vacuous_eps_above_half() {
        let g = Graph::new(6);
        let cert = is_eps_expander(&g, Eps::new(3, 5), &budget()).unwrap();
        assert!(cert.verdict);
    }

    #[test]
    fn eps_monotone_in_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let g = Graph::random(10, 0.45, &mut rng);
            let lo = is_eps_expander(&g, Eps::new(1, 4), &budget()).unwrap();
            let hi = is_eps_expander(&g, Eps::new(2, 5), &budget()).unwrap();
            if lo.verdict {
                assert!(hi.verdict);
            }
        }
    }

    #[test]
    fn bipartite_checks() {
        let kmm = Graph::complete_bipartite(4, 4);
        let x1: Vec<u32> = (0..4).collect();
        let x2: Vec<u32> = (4..8).collect();
        assert!(is_bipartite_eps_expander(&kmm, (&x1, &x2), Eps::new(1, 4), &budget())
            .unwrap()
            .verdict);
        // perfect matching fails: singletons on non-matched pairs
        let mut pm = Graph::new(8);
        for i in 0..4u32 {
            pm.add_edge(i, i + 4);
        }
        let cert =
            is_bipartite_eps_expander(&pm, (&x1, &x2), Eps::new(1, 4), &budget()).unwrap();
        assert!(!cert.verdict);
        assert!(witness_is_valid(&pm, &cert));
        // empty bipartite graph fails
        let empty = Graph::new(8);
        assert!(
            !is_bipartite_eps_expander(&empty, (&x1, &x2), Eps::new(1, 2), &budget())
                .unwrap()
                .verdict
        );
        // invalid partition rejected
        assert!(is_bipartite_eps_expander(&kmm, (&x1, &x1), Eps::new(1, 2), &budget()).is_err());
    }

    #[test]
    fn expanding_checks() {
        let k4 = Graph::complete(4);
        assert!(is_expanding(&k4, 1, 3, &budget()).unwrap().verdict);
        let star = Graph::from_edges(6, (1..6).map(|v| (0u32, v as u32))).unwrap();
        assert!(is_expanding(&star, 1, 1, &budget()).unwrap().verdict);
        let cert = is_expanding(&star, 2, 1, &budget()).unwrap();
        assert!(!cert.verdict);
        match cert.witness.as_ref().unwrap() {
            Witness::Set { x } => {
                assert_eq!(x.len(), 2);
                assert!(!x.contains(&0)); // two leaves share the centre
            }
            _ => unreachable!(),
        }
        assert!(is_expanding(&star, 0, 5, &budget()).unwrap().verdict);
    }

    #[test]
    fn antitone_in_m_and_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let g = Graph::random(9, 0.5, &mut rng);
            for (m, d) in [(1usize, 1usize), (2, 1), (1, 2), (2, 2), (3, 2)] {
                let strong = is_expanding(&g, m + 1, d, &budget()).unwrap().verdict
                    && is_expanding(&g, m, d + 1, &budget()).unwrap().verdict;
                if strong {
                    assert!(is_expanding(&g, m, d, &budget()).unwrap().verdict);
                }
            }
        }
    }

    #[test]
    fn random_expander_certifies() {
        let (g, cert) = random_expander(12, Eps::new(2, 5), 3, 10).unwrap();
        assert_eq!(g.n(), 12);
        assert!(cert.verdict && cert.exhaustive);
        let bound = 80.0 * 2.5 * 2.5f64.ln();
        assert!((g.max_degree() as f64) <= bound);
    }

    #[test]
    fn boost_keeps_kmm_whole() {
        let kmm = Graph::complete_bipartite(5, 5);
        let x1: Vec<u32> = (0..5).collect();
        let x2: Vec<u32> = (5..10).collect();
        let r = boost_bipartite(&kmm, (&x1, &x2), 2, &budget()).unwrap();
        assert_eq!(r.kept.len(), 10);
        assert!(r.removed.is_empty());
    }

    #[test]
    fn boost_drops_isolated_pair() {
        // K_{4,4} plus an isolated vertex on each side
        let mut g = Graph::new(10);
        for u in 0..4u32 {
            for v in 5..9u32 {
                g.add_edge(u, v);
            }
        }
        let x1: Vec<u32> = (0..5).collect();
        let x2: Vec<u32> = (5..10).collect();
        let r = boost_bipartite(&g, (&x1, &x2), 2, &budget()).unwrap();
        assert!(r.removed.contains(&4) && r.removed.contains(&9));
        assert_eq!(r.kept.len(), 8);
        // postcondition: no violating set under the scan cap survives
        let cap = (5usize / 4).max(1);
        assert!(is_expanding(&r.graph, cap, 2, &budget()).unwrap().verdict);
    }

    #[test]
    fn boost_complete_keeps_half() {
        let r = boost(&Graph::complete(12), &budget()).unwrap();
        assert!(r.kept.len() >= 6);
        assert!(is_expanding(&r.graph, 1, 2, &budget()).unwrap().verdict);
    }
}
