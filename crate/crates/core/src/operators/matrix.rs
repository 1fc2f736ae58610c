use std::ops::Range;
use std::sync::{Arc, OnceLock};

use super::{check_rows, ForwardOperator, Measurement};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// A raw matrix acting on node values: `(Au)_j = Σ_i M_ji u_i`.
///
/// Quadrature weights are not applied in the forward map; the adjoint is
/// `(A*w)_i = w_i⁻¹ Σ_j M_ji w̃_j w_j` so that it is the adjoint for the
/// weighted pairings on both sides.
#[derive(Debug)]
pub struct MatrixOperator {
    id: String,
    domain: Grid,
    out_weights: Arc<[f64]>,
    rows: usize,
    entries: Vec<f64>,
    norm: OnceLock<f64>,
}

impl MatrixOperator {
    /// `entries` is row-major with `out_weights.len()` rows.
    pub fn new(
        id: impl Into<String>,
        domain: Grid,
        out_weights: Arc<[f64]>,
        entries: Vec<f64>,
    ) -> Result<Self> {
        let rows = out_weights.len();
        if rows == 0 || entries.len() != rows * domain.len() {
            return Err(Error::Config(format!(
                "matrix has {} entries, expected {} x {}",
                entries.len(),
                rows,
                domain.len()
            )));
        }
        if let Some(w) = out_weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Config(format!("output weight {w} is not positive")));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::Config("matrix has non-finite entries".into()));
        }
        Ok(Self {
            id: id.into(),
            domain,
            out_weights,
            rows,
            entries,
            norm: OnceLock::new(),
        })
    }

    /// Identity from the grid into itself (same weights on both sides, so `A* = Id`).
    pub fn identity(grid: &Grid) -> Self {
        Self::scaled_identity(grid, 1.0)
    }

    pub fn scaled_identity(grid: &Grid, scale: f64) -> Self {
        let n = grid.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = scale;
        }
        Self::new(
            format!("identity*{scale}"),
            grid.clone(),
            grid.shared_weights(),
            entries,
        )
        .expect("identity is well formed")
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn out_weights(&self) -> &[f64] {
        &self.out_weights
    }

    fn row(&self, j: usize) -> &[f64] {
        let n = self.domain.len();
        &self.entries[j * n..(j + 1) * n]
    }
}

impl ForwardOperator for MatrixOperator {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn domain(&self) -> &Grid {
        &self.domain
    }

    fn zero_data(&self) -> Measurement {
        Measurement::Real {
            weights: Arc::clone(&self.out_weights),
            values: vec![0.0; self.rows],
        }
    }

    fn data_len(&self) -> usize {
        self.rows
    }

    fn apply_values(&self, u: &[f64]) -> Measurement {
        let values = (0..self.rows)
            .map(|j| self.row(j).iter().zip(u).map(|(m, x)| m * x).sum())
            .collect();
        Measurement::Real {
            weights: Arc::clone(&self.out_weights),
            values,
        }
    }

    fn adjoint_values(&self, w: &Measurement) -> Result<Vec<f64>> {
        self.zero_data().check_same_space(w)?;
        self.adjoint_rows_unchecked(w.real_values().unwrap(), 0..self.rows)
    }

    fn apply_rows(&self, u: &[f64], rows: Range<usize>) -> Result<Measurement> {
        check_rows(&rows, self.rows)?;
        let values = rows
            .clone()
            .map(|j| self.row(j).iter().zip(u).map(|(m, x)| m * x).sum())
            .collect();
        Measurement::real(self.out_weights[rows].into(), values)
    }

    fn adjoint_rows(&self, w: &Measurement, rows: Range<usize>) -> Result<Vec<f64>> {
        check_rows(&rows, self.rows)?;
        self.zero_data().slice(rows.clone())?.check_same_space(w)?;
        self.adjoint_rows_unchecked(w.real_values().unwrap(), rows)
    }

    fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|e| *e >= 0.0)
    }

    fn norm_estimate(&self) -> f64 {
        *self.norm.get_or_init(|| super::power_iteration_norm(self))
    }
}

impl MatrixOperator {
    fn adjoint_rows_unchecked(&self, w: &[f64], rows: Range<usize>) -> Result<Vec<f64>> {
        let n = self.domain.len();
        let mut out = vec![0.0; n];
        for (j, wj) in rows.zip(w) {
            let s = self.out_weights[j] * wj;
            out.iter_mut().zip(self.row(j)).for_each(|(o, m)| *o += m * s);
        }
        out.iter_mut()
            .zip(self.domain.weights())
            .for_each(|(o, wi)| *o /= wi);
        Ok(out)
    }
}
