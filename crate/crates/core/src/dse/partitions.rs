//! Set-partition enumeration via restricted growth strings.
//!
//! A partition of `{0..n-1}` is encoded as `a` with `a[0] = 0` and
//! `a[i] <= max(a[0..i]) + 1`; `a[i]` is the block of element `i`.
//! Enumeration order is lexicographic on the strings, which puts the
//! single-block partition first and the all-singletons partition last.

/// All set partitions of `n` elements as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    grow(&mut current, 1, &mut out);
    out
}

fn grow(current: &mut Vec<usize>, idx: usize, out: &mut Vec<Vec<usize>>) {
    if idx == current.len() {
        out.push(current.clone());
        return;
    }
    let cap = current[..idx].iter().copied().max().unwrap_or(0) + 1;
    for block in 0..=cap {
        current[idx] = block;
        grow(current, idx + 1, out);
    }
    current[idx] = 0;
}

/// Blocks of a restricted growth string, each sorted, ordered by block
/// index (i.e. by smallest member).
pub fn partition_blocks(rgs: &[usize]) -> Vec<Vec<usize>> {
    let nblocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); nblocks];
    for (elem, &b) in rgs.iter().enumerate() {
        blocks[b].push(elem);
    }
    blocks
}

/// Bell numbers by the Bell triangle; `bell_number(n)` counts the set
/// partitions of `n` elements.
pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("row never empty"));
        for v in &row {
            next.push(next.last().unwrap() + v);
        }
        row = next;
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers_match_the_classic_sequence() {
        let expected = [1u64, 1, 2, 5, 15, 52, 203, 877];
        for (n, want) in expected.iter().enumerate() {
            assert_eq!(bell_number(n), *want, "bell({n})");
        }
    }

    #[test]
    fn enumeration_count_equals_bell_number() {
        for n in 0..=7 {
            assert_eq!(set_partitions(n).len() as u64, bell_number(n));
        }
    }

    #[test]
    fn two_elements_give_the_two_partitions() {
        assert_eq!(set_partitions(2), vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn strings_are_valid_and_unique() {
        let parts = set_partitions(5);
        let mut seen = std::collections::BTreeSet::new();
        for p in &parts {
            assert_eq!(p[0], 0);
            for i in 1..p.len() {
                let cap = p[..i].iter().copied().max().unwrap() + 1;
                assert!(p[i] <= cap);
            }
            assert!(seen.insert(p.clone()));
        }
    }

    #[test]
    fn blocks_cover_and_partition() {
        for rgs in set_partitions(4) {
            let blocks = partition_blocks(&rgs);
            let mut all: Vec<usize> = blocks.concat();
            all.sort();
            assert_eq!(all, vec![0, 1, 2, 3]);
        }
    }
}
