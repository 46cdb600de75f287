use std::ops::Range;

use ndarray::{s, Array1, ArrayView1};

use crate::error::{invalid, Result};
use crate::Scalar;

/// Contiguous split of `0..n` into `N` non-empty blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    sizes: Vec<usize>,
    // N + 1 entries, offsets[N] == n
    offsets: Vec<usize>,
}

impl BlockPartition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return invalid("block partition needs at least one block");
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return invalid(format!("block {i} has size 0"));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &s in &sizes {
            acc += s;
            offsets.push(acc);
        }
        Ok(Self { sizes, offsets })
    }

    /// Sizes as equal as possible; the first `n % blocks` blocks get the
    /// extra element.
    pub fn even(n: usize, blocks: usize) -> Result<Self> {
        if blocks == 0 || blocks > n {
            return invalid(format!("cannot split dimension {n} into {blocks} blocks"));
        }
        let base = n / blocks;
        let extra = n % blocks;
        Self::new(
            (0..blocks)
                .map(|i| base + usize::from(i < extra))
                .collect(),
        )
    }

    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// Total dimension `n`.
    pub fn dim(&self) -> usize {
        self.offsets[self.sizes.len()]
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Start offset of every block.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets[..self.sizes.len()]
    }

    pub fn range(&self, block: usize) -> Result<Range<usize>> {
        if block >= self.sizes.len() {
            return invalid(format!(
                "block index {block} out of range for {} blocks",
                self.sizes.len()
            ));
        }
        Ok(self.offsets[block]..self.offsets[block + 1])
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.offsets.windows(2).map(|w| w[0]..w[1])
    }
}

/// Segment of `u` belonging to `block`.
pub fn slice_block<'a, T: Scalar>(
    partition: &BlockPartition,
    u: ArrayView1<'a, T>,
    block: usize,
) -> Result<ArrayView1<'a, T>> {
    if u.len() != partition.dim() {
        return invalid(format!(
            "vector of length {} does not match partition dimension {}",
            u.len(),
            partition.dim()
        ));
    }
    let r = partition.range(block)?;
    Ok(u.slice_move(s![r]))
}

/// Overwrites the segment of `u` belonging to `block`.
pub fn write_block<T: Scalar>(
    partition: &BlockPartition,
    u: &mut Array1<T>,
    block: usize,
    values: ArrayView1<'_, T>,
) -> Result<()> {
    if u.len() != partition.dim() {
        return invalid("vector length does not match partition dimension");
    }
    let r = partition.range(block)?;
    if values.len() != r.len() {
        return invalid(format!(
            "block {block} has {} entries, got {}",
            r.len(),
            values.len()
        ));
    }
    u.slice_mut(s![r]).assign(&values);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn slice_examples() {
        let p = BlockPartition::new(vec![2, 1]).unwrap();
        let u = array![1.0, 2.0, 3.0];
        assert_eq!(slice_block(&p, u.view(), 1).unwrap(), array![3.0]);

        let p = BlockPartition::new(vec![3]).unwrap();
        assert_eq!(slice_block(&p, u.view(), 0).unwrap(), u);

        let p = BlockPartition::new(vec![1, 1]).unwrap();
        assert_eq!(
            slice_block(&p, array![5.0, 7.0].view(), 0).unwrap(),
            array![5.0]
        );
    }

    #[test]
    fn out_of_range_block_is_rejected() {
        let p = BlockPartition::new(vec![1, 1]).unwrap();
        assert!(slice_block(&p, array![5.0, 7.0].view(), 2).is_err());
        assert!(BlockPartition::new(vec![]).is_err());
        assert!(BlockPartition::new(vec![2, 0]).is_err());
    }

    #[test]
    fn even_split_puts_larger_blocks_first() {
        assert_eq!(BlockPartition::even(351, 2).unwrap().sizes(), &[176, 175]);
        assert_eq!(
            BlockPartition::even(351, 10).unwrap().sizes()[..2],
            [36, 35]
        );
        assert_eq!(BlockPartition::even(270, 5).unwrap().sizes(), &[54; 5]);
        assert!(BlockPartition::even(3, 4).is_err());
    }

    proptest! {
        #[test]
        fn partition_invariants(sizes in proptest::collection::vec(1usize..8, 1..10)) {
            let p = BlockPartition::new(sizes.clone()).unwrap();
            prop_assert_eq!(p.dim(), sizes.iter().sum::<usize>());
            prop_assert!(p.offsets().windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn slice_then_write_reproduces(sizes in proptest::collection::vec(1usize..5, 1..6), seed in 0u64..1000) {
            let p = BlockPartition::new(sizes).unwrap();
            let u = Array1::from_iter((0..p.dim()).map(|j| (j as f64 + seed as f64).sin()));
            let mut v = Array1::<f64>::zeros(p.dim());
            for i in 0..p.num_blocks() {
                let seg = slice_block(&p, u.view(), i).unwrap().to_owned();
                write_block(&p, &mut v, i, seg.view()).unwrap();
            }
            prop_assert_eq!(u, v);
        }
    }
}
