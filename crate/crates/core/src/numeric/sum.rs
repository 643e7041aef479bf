//! Deterministic pairwise summation.
//!
//! Values are consumed in order and folded into a fixed binary tree: runs of
//! [`BLOCK`] consecutive terms are summed left to right, and completed blocks
//! are merged like a binary counter. The tree depends only on the number of
//! terms, so the result is bit-identical no matter which thread computes it.

/// Number of terms accumulated sequentially before entering the tree.
pub const BLOCK: usize = 32;

const MAX_LEVELS: usize = 64;

#[derive(Debug, Clone)]
pub struct PairwiseSum {
    block: f64,
    in_block: usize,
    // levels[i] holds a partial sum of 2^i blocks when bit i of `blocks` is set
    levels: [f64; MAX_LEVELS],
    blocks: u64,
}

impl Default for PairwiseSum {
    fn default() -> Self {
        Self::new()
    }
}

impl PairwiseSum {
    pub fn new() -> Self {
        Self {
            block: 0.0,
            in_block: 0,
            levels: [0.0; MAX_LEVELS],
            blocks: 0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        self.block += value;
        self.in_block += 1;
        if self.in_block == BLOCK {
            self.push_block();
        }
    }

    fn push_block(&mut self) {
        let mut carry = self.block;
        let mut level = 0;
        while self.blocks & (1 << level) != 0 {
            carry += self.levels[level];
            level += 1;
        }
        self.levels[level] = carry;
        self.blocks += 1;
        self.block = 0.0;
        self.in_block = 0;
    }

    /// Folds the pending partial sums, smallest level last.
    pub fn total(&self) -> f64 {
        let mut acc = self.block;
        for level in 0..MAX_LEVELS {
            if self.blocks & (1 << level) != 0 {
                acc += self.levels[level];
            }
        }
        acc
    }
}

/// Sums a slice with the same tree as [`PairwiseSum`].
pub fn pairwise_sum(values: &[f64]) -> f64 {
    let mut acc = PairwiseSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}
