//! Subset enumeration over node labels. Subsets are sorted `Vec<usize>` of
//! 0-based labels, enumerated in lexicographic order.

use itertools::Itertools;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `size`-subsets of `items` (which must be sorted) in lexicographic order.
pub fn subsets_of(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    items.iter().copied().combinations(size).collect()
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(size).collect()
}

pub fn mask_of(set: &[usize]) -> u32 {
    set.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn without(set: &[usize], x: usize) -> Vec<usize> {
    set.iter().copied().filter(|&y| y != x).collect()
}
