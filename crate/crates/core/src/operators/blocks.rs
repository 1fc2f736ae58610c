use std::ops::Range;

use super::{ForwardOperator, Measurement};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Contiguous row block `A_J` of a parent operator.
pub struct OperatorBlock<'a> {
    parent: &'a dyn ForwardOperator,
    rows: Range<usize>,
    zero: Measurement,
}

impl<'a> OperatorBlock<'a> {
    pub fn new(parent: &'a dyn ForwardOperator, rows: Range<usize>) -> Result<Self> {
        let zero = parent.zero_data().slice(rows.clone())?;
        if zero.is_empty() {
            return Err(Error::Config(format!("empty row block {rows:?}")));
        }
        Ok(Self { parent, rows, zero })
    }

    pub fn rows(&self) -> Range<usize> {
        self.rows.clone()
    }
}

impl ForwardOperator for OperatorBlock<'_> {
    fn id(&self) -> String {
        format!("{}[{}..{}]", self.parent.id(), self.rows.start, self.rows.end)
    }

    fn domain(&self) -> &Grid {
        self.parent.domain()
    }

    fn zero_data(&self) -> Measurement {
        self.zero.clone()
    }

    fn data_len(&self) -> usize {
        self.rows.len()
    }

    fn apply_values(&self, u: &[f64]) -> Measurement {
        self.parent
            .apply_rows(u, self.rows.clone())
            .expect("block rows were validated at construction")
    }

    fn adjoint_values(&self, w: &Measurement) -> Result<Vec<f64>> {
        self.parent.adjoint_rows(w, self.rows.clone())
    }

    fn is_nonnegative(&self) -> bool {
        self.parent.is_nonnegative()
    }
}

/// Splits `len` rows into `blocks` contiguous ranges whose sizes differ by at most one.
pub fn row_partition(len: usize, blocks: usize) -> Result<Vec<Range<usize>>> {
    if blocks < 1 || blocks > len {
        return Err(Error::Config(format!(
            "cannot split {len} data rows into {blocks} blocks"
        )));
    }
    let base = len / blocks;
    let extra = len % blocks;
    let mut start = 0;
    Ok((0..blocks)
        .map(|b| {
            let size = base + usize::from(b < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .collect())
}

/// Row blocks of `op` paired with the matching slices of `data`.
pub fn partition_blocks<'a>(
    op: &'a dyn ForwardOperator,
    data: &Measurement,
    blocks: usize,
) -> Result<Vec<(OperatorBlock<'a>, Measurement)>> {
    op.zero_data().check_same_space(data)?;
    row_partition(op.data_len(), blocks)?
        .into_iter()
        .map(|rows| Ok((OperatorBlock::new(op, rows.clone())?, data.slice(rows)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::{adjoint_defect, random_data, random_values};
    use crate::operators::{make_kernel_operator, FourierSamplingOperator, KernelKind};

    #[test]
    fn partition_sizes() {
        assert_eq!(row_partition(16, 4).unwrap(), vec![0..4, 4..8, 8..12, 12..16]);
        assert_eq!(row_partition(5, 2).unwrap(), vec![0..3, 3..5]);
        assert_eq!(row_partition(3, 3).unwrap(), vec![0..1, 1..2, 2..3]);
        assert!(row_partition(3, 0).is_err());
        assert!(row_partition(3, 4).is_err());
    }

    #[test]
    fn single_block_is_the_operator() {
        let op = make_kernel_operator(KernelKind::Exponential, 20, 20).unwrap();
        let y = random_data(&op, 3);
        let parts = partition_blocks(&op, &y, 1).unwrap();
        assert_eq!(parts.len(), 1);
        let u = random_values(20, 4);
        assert_eq!(parts[0].0.apply_values(&u), op.apply_values(&u));
        assert_eq!(parts[0].1, y);
    }

    #[test]
    fn fourier_blocks_recompose() {
        let op = FourierSamplingOperator::uniform(10.0, 128, 16).unwrap();
        let y = random_data(&op, 5);
        let parts = partition_blocks(&op, &y, 4).unwrap();
        let u = random_values(128, 6);
        let pieces: Vec<_> = parts.iter().map(|(b, _)| b.apply_values(&u)).collect();
        let joined = Measurement::concat(&pieces).unwrap();
        let full = op.apply_values(&u);
        assert!(joined.sub(&full).unwrap().norm() <= 1e-14 * (1.0 + full.norm()));

        let w = random_data(&op, 7);
        let mut sum = vec![0.0; 128];
        for (b, _) in &parts {
            let slice = w.slice(b.rows()).unwrap();
            for (s, v) in sum.iter_mut().zip(b.adjoint_values(&slice).unwrap()) {
                *s += v;
            }
        }
        let direct = op.adjoint_values(&w).unwrap();
        for (a, b) in sum.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn kernel_blocks_one_row_each() {
        let op = make_kernel_operator(KernelKind::Step, 12, 9).unwrap();
        let y = random_data(&op, 1);
        let parts = partition_blocks(&op, &y, 9).unwrap();
        for (b, slice) in &parts {
            assert_eq!(b.data_len(), 1);
            assert_eq!(slice.len(), 1);
            assert!(adjoint_defect(b, 20) <= 1e-12);
        }
    }
}
