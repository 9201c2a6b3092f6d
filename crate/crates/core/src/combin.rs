//! Small combinatorial helpers shared by the exhaustive scans.

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Number of subsets of an `n`-set with size at most `m`, saturating.
pub fn subsets_up_to(n: usize, m: usize) -> u128 {
    (0..=m.min(n)).fold(0u128, |acc, k| acc.saturating_add(binomial(n, k)))
}

/// Visit all `k`-subsets of `items` in lexicographic order; stop early when
/// `f` returns `Some`. `f` receives the current subset as a slice.
pub fn for_each_combination<T: Copy, R>(
    items: &[T],
    k: usize,
    mut f: impl FnMut(&[T]) -> Option<R>,
) -> Option<R> {
    let n = items.len();
    if k > n {
        return None;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<T> = idx.iter().map(|&i| items[i]).collect();
    loop {
        if let Some(r) = f(&buf) {
            return Some(r);
        }
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return None;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..k {
            buf[j] = items[idx[j]];
        }
    }
}

/// Visit all subsets of `items` of size `1..=m` in (size, lexicographic)
/// order; stop early when `f` returns `Some`.
pub fn for_each_subset_up_to<T: Copy, R>(
    items: &[T],
    m: usize,
    mut f: impl FnMut(&[T]) -> Option<R>,
) -> Option<R> {
    for k in 1..=m.min(items.len()) {
        if let Some(r) = for_each_combination(items, k, &mut f) {
            return Some(r);
        }
    }
    None
}

/// Decode combination index `rank` (row-major over sizes then lexicographic)
/// into the `rank`-th `k`-subset of `0..n`. Used to shard subset scans.
pub fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0usize;
    let mut remaining = k;
    while remaining > 0 {
        let c = binomial(n - next - 1, remaining - 1);
        if rank < c {
            out.push(next);
            remaining -= 1;
        } else {
            rank -= c;
        }
        next += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(52, 5), 2_598_960);
    }

    #[test]
    fn combinations_cover_everything_in_order() {
        let items = [0, 1, 2, 3, 4];
        let mut seen = Vec::new();
        for_each_combination(&items, 3, |c| {
            seen.push(c.to_vec());
            None::<()>
        });
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
    }

    #[test]
    fn unrank_matches_enumeration() {
        let items: Vec<usize> = (0..7).collect();
        let mut all = Vec::new();
        for_each_combination(&items, 3, |c| {
            all.push(c.to_vec());
            None::<()>
        });
        for (rank, expect) in all.iter().enumerate() {
            assert_eq!(&unrank_combination(7, 3, rank as u128), expect);
        }
    }
}
