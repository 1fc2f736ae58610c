use std::f64::consts::PI;
use std::ops::Range;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::{check_rows, ForwardOperator, Measurement};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Samples of the Fourier integral `(Au)_j = (2π)^{-1/2} ∫ u(x) e^{-i x ξ_j} dx`.
///
/// The adjoint is `(A*v)(x) = Re((2π)^{-1/2} Σ_j v_j e^{i x ξ_j})`.
/// Direct summation; the phase table is precomputed.
#[derive(Debug)]
pub struct FourierSamplingOperator {
    grid: Grid,
    freqs: Vec<f64>,
    /// `e^{-i x_i ξ_j}`, row-major by frequency.
    phases: Vec<Complex64>,
    norm: OnceLock<f64>,
}

impl FourierSamplingOperator {
    pub fn new(grid: Grid, freqs: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() || freqs.iter().any(|f| !f.is_finite()) {
            return Err(Error::Config("need at least one finite frequency".into()));
        }
        let nodes = grid.nodes();
        let phases = freqs
            .iter()
            .flat_map(|&xi| nodes.iter().map(move |&x| Complex64::from_polar(1.0, -x * xi)).collect::<Vec<_>>())
            .collect();
        Ok(Self {
            grid,
            freqs,
            phases,
            norm: OnceLock::new(),
        })
    }

    /// Grid of `n_grid` nodes on `[-a, a]` with `ξ_j = 2π(j-1)/n_freq`, `j = 1..n_freq`.
    pub fn uniform(half_width: f64, n_grid: usize, n_freq: usize) -> Result<Self> {
        if n_freq == 0 {
            return Err(Error::Config("need at least one frequency".into()));
        }
        let grid = Grid::new(-half_width, half_width, n_grid)?;
        Self::new(grid, sample_frequencies(n_freq))
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    fn row(&self, j: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.phases[j * n..(j + 1) * n]
    }

    fn forward_row(&self, j: usize, wu: &[f64]) -> Complex64 {
        let s: Complex64 = self.row(j).iter().zip(wu).map(|(p, x)| p * x).sum();
        s * scale()
    }

    fn adjoint_unchecked(&self, v: &[Complex64], rows: Range<usize>) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (j, vj) in rows.zip(v) {
            // Re(v_j e^{+i x ξ_j}) = Re(v_j · conj(e^{-i x ξ_j}))
            out.iter_mut()
                .zip(self.row(j))
                .for_each(|(o, p)| *o += vj.re * p.re + vj.im * p.im);
        }
        let s = scale();
        out.iter_mut().for_each(|o| *o *= s);
        out
    }
}

/// `ξ_j = 2π(j-1)/n` for `j = 1..n`.
pub fn sample_frequencies(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

fn scale() -> f64 {
    (2.0 * PI).sqrt().recip()
}

impl ForwardOperator for FourierSamplingOperator {
    fn id(&self) -> String {
        format!("fourier-{}", self.freqs.len())
    }

    fn domain(&self) -> &Grid {
        &self.grid
    }

    fn zero_data(&self) -> Measurement {
        Measurement::Complex(vec![Complex64::new(0.0, 0.0); self.freqs.len()])
    }

    fn data_len(&self) -> usize {
        self.freqs.len()
    }

    fn apply_values(&self, u: &[f64]) -> Measurement {
        let wu: Vec<f64> = self.grid.weights().iter().zip(u).map(|(w, x)| w * x).collect();
        Measurement::Complex((0..self.freqs.len()).map(|j| self.forward_row(j, &wu)).collect())
    }

    fn adjoint_values(&self, w: &Measurement) -> Result<Vec<f64>> {
        self.zero_data().check_same_space(w)?;
        Ok(self.adjoint_unchecked(w.complex_values().unwrap(), 0..self.freqs.len()))
    }

    fn apply_rows(&self, u: &[f64], rows: Range<usize>) -> Result<Measurement> {
        check_rows(&rows, self.freqs.len())?;
        let wu: Vec<f64> = self.grid.weights().iter().zip(u).map(|(w, x)| w * x).collect();
        Ok(Measurement::Complex(rows.map(|j| self.forward_row(j, &wu)).collect()))
    }

    fn adjoint_rows(&self, w: &Measurement, rows: Range<usize>) -> Result<Vec<f64>> {
        check_rows(&rows, self.freqs.len())?;
        self.zero_data().slice(rows.clone())?.check_same_space(w)?;
        Ok(self.adjoint_unchecked(w.complex_values().unwrap(), rows))
    }

    fn norm_estimate(&self) -> f64 {
        *self.norm.get_or_init(|| super::power_iteration_norm(self))
    }
}
