use alloc::vec;
use alloc::vec::Vec;

/// Binary indexed tree over ranks `0..len` with `u64` weights.
pub(crate) struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    pub fn new(len: usize) -> Self {
        Self {
            tree: vec![0; len + 1],
        }
    }

    pub fn add(&mut self, rank: usize, weight: u64) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += weight;
            i += i & i.wrapping_neg();
        }
    }

    /// Total weight at ranks `< rank`.
    pub fn below(&self, rank: usize) -> u64 {
        let mut i = rank;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    pub fn total(&self) -> u64 {
        self.below(self.tree.len() - 1)
    }

    /// Total weight at ranks `> rank`.
    pub fn above(&self, rank: usize) -> u64 {
        self.total() - self.below(rank + 1)
    }
}

/// Dense ranks of `values` (equal values share a rank) and the rank count.
pub(crate) fn dense_ranks(values: &[f64]) -> (Vec<usize>, usize) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup_by(|a, b| a == b);
    let ranks = values
        .iter()
        .map(|v| sorted.partition_point(|s| s < v))
        .collect();
    (ranks, sorted.len())
}

/// Indices sorted by `key`, ascending.
pub(crate) fn argsort(key: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..key.len()).collect();
    idx.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    idx
}

/// Splits `order` (sorted by `key`) into runs of equal key.
pub(crate) fn tie_groups<'a>(
    order: &'a [usize],
    key: &'a [f64],
) -> impl Iterator<Item = &'a [usize]> + 'a {
    order.chunk_by(move |&a, &b| key[a] == key[b])
}
