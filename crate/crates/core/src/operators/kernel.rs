use std::io::{Read, Write};
use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{check_rows, ForwardOperator, Measurement};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// The three test kernels on `(0,1) × (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `k(x,y) = e^{xy}`
    #[serde(rename = "k1")]
    Exponential,
    /// `k(x,y) = 3 e^{-(x-y)²/0.04}`
    #[serde(rename = "k2")]
    Gaussian,
    /// `k(x,y) = 1` if `x >= y`, else 0
    #[serde(rename = "k3")]
    Step,
}

impl KernelKind {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            KernelKind::Exponential => (x * y).exp(),
            KernelKind::Gaussian => 3.0 * (-(x - y) * (x - y) / 0.04).exp(),
            KernelKind::Step => {
                if x >= y {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            KernelKind::Exponential => "k1",
            KernelKind::Gaussian => "k2",
            KernelKind::Step => "k3",
        }
    }
}

/// Integral operator `(Au)(x_j) = Σ_i w_i k(x_j, y_i) u_i` into weighted L²(Ω̃).
#[derive(Debug)]
pub struct KernelOperator {
    id: String,
    domain: Grid,
    range: Grid,
    /// Row-major, `range.len()` rows by `domain.len()` columns.
    table: Vec<f64>,
    norm: OnceLock<f64>,
}

/// Tabulates one of the test kernels with `Ω = Ω̃ = (0,1)`.
pub fn make_kernel_operator(which: KernelKind, n_in: usize, n_out: usize) -> Result<KernelOperator> {
    let domain = Grid::new(0.0, 1.0, n_in)?;
    let range = Grid::new(0.0, 1.0, n_out)?;
    KernelOperator::tabulate(which.label(), domain, range, |x, y| which.eval(x, y))
}

impl KernelOperator {
    pub fn tabulate(
        id: impl Into<String>,
        domain: Grid,
        range: Grid,
        kernel: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let ys = domain.nodes();
        let table = range
            .nodes()
            .into_iter()
            .flat_map(|x| ys.iter().map(move |&y| (x, y)).collect::<Vec<_>>())
            .map(|(x, y)| kernel(x, y))
            .collect();
        Self::from_table(id, domain, range, table)
    }

    pub fn from_table(id: impl Into<String>, domain: Grid, range: Grid, table: Vec<f64>) -> Result<Self> {
        if table.len() != domain.len() * range.len() {
            return Err(Error::Config(format!(
                "kernel table has {} entries, expected {} x {}",
                table.len(),
                range.len(),
                domain.len()
            )));
        }
        if table.iter().any(|k| !k.is_finite()) {
            return Err(Error::Config("kernel table has non-finite entries".into()));
        }
        Ok(Self {
            id: id.into(),
            domain,
            range,
            table,
            norm: OnceLock::new(),
        })
    }

    pub fn range(&self) -> &Grid {
        &self.range
    }

    /// Kernel value `k(x_j, y_i)`.
    pub fn entry(&self, j: usize, i: usize) -> f64 {
        self.table[j * self.domain.len() + i]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn row(&self, j: usize) -> &[f64] {
        let n = self.domain.len();
        &self.table[j * n..(j + 1) * n]
    }

    fn weighted(&self, u: &[f64]) -> Vec<f64> {
        self.domain.weights().iter().zip(u).map(|(w, x)| w * x).collect()
    }

    /// Comma-separated rows, output index major.
    pub fn write_table_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for j in 0..self.range.len() {
            out.write_record(self.row(j).iter().map(|k| k.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_table_csv<R: Read>(id: impl Into<String>, domain: Grid, range: Grid, reader: R) -> Result<Self> {
        let mut input = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut table = Vec::with_capacity(domain.len() * range.len());
        for row in input.records() {
            let row = row?;
            if row.len() != domain.len() {
                return Err(Error::Config(format!(
                    "kernel row has {} columns, expected {}",
                    row.len(),
                    domain.len()
                )));
            }
            for cell in row.iter() {
                table.push(
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("kernel cell {cell:?}: {e}")))?,
                );
            }
        }
        Self::from_table(id, domain, range, table)
    }

    /// Little-endian binary: `b"EKRN"`, rows (u64), cols (u64), then `f64` entries row-major.
    pub fn write_table_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(b"EKRN")?;
        writer.write_all(&(self.range.len() as u64).to_le_bytes())?;
        writer.write_all(&(self.domain.len() as u64).to_le_bytes())?;
        for k in &self.table {
            writer.write_all(&k.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_table_binary<R: Read>(id: impl Into<String>, domain: Grid, range: Grid, mut reader: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if &magic != b"EKRN" {
            return Err(Error::Config("not a kernel table file".into()));
        }
        let mut word = [0u8; 8];
        reader.read_exact(&mut word)?;
        let rows = u64::from_le_bytes(word) as usize;
        reader.read_exact(&mut word)?;
        let cols = u64::from_le_bytes(word) as usize;
        if rows != range.len() || cols != domain.len() {
            return Err(Error::Config(format!(
                "kernel table is {rows} x {cols}, grids need {} x {}",
                range.len(),
                domain.len()
            )));
        }
        let mut table = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            reader.read_exact(&mut word)?;
            table.push(f64::from_le_bytes(word));
        }
        Self::from_table(id, domain, range, table)
    }
}

impl ForwardOperator for KernelOperator {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn domain(&self) -> &Grid {
        &self.domain
    }

    fn zero_data(&self) -> Measurement {
        Measurement::Real {
            weights: self.range.shared_weights(),
            values: vec![0.0; self.range.len()],
        }
    }

    fn data_len(&self) -> usize {
        self.range.len()
    }

    fn apply_values(&self, u: &[f64]) -> Measurement {
        let wu = self.weighted(u);
        let values = (0..self.range.len())
            .map(|j| self.row(j).iter().zip(&wu).map(|(k, x)| k * x).sum())
            .collect();
        Measurement::Real {
            weights: self.range.shared_weights(),
            values,
        }
    }

    fn adjoint_values(&self, w: &Measurement) -> Result<Vec<f64>> {
        self.zero_data().check_same_space(w)?;
        Ok(self.adjoint_unchecked(w.real_values().unwrap(), 0..self.range.len()))
    }

    fn apply_rows(&self, u: &[f64], rows: Range<usize>) -> Result<Measurement> {
        check_rows(&rows, self.range.len())?;
        let wu = self.weighted(u);
        let values = rows
            .clone()
            .map(|j| self.row(j).iter().zip(&wu).map(|(k, x)| k * x).sum())
            .collect();
        Measurement::real(self.range.weights()[rows].into(), values)
    }

    fn adjoint_rows(&self, w: &Measurement, rows: Range<usize>) -> Result<Vec<f64>> {
        check_rows(&rows, self.range.len())?;
        self.zero_data().slice(rows.clone())?.check_same_space(w)?;
        Ok(self.adjoint_unchecked(w.real_values().unwrap(), rows))
    }

    fn is_nonnegative(&self) -> bool {
        self.table.iter().all(|k| *k >= 0.0)
    }

    fn norm_estimate(&self) -> f64 {
        *self.norm.get_or_init(|| super::power_iteration_norm(self))
    }
}

impl KernelOperator {
    fn adjoint_unchecked(&self, w: &[f64], rows: Range<usize>) -> Vec<f64> {
        let mut out = vec![0.0; self.domain.len()];
        let out_w = self.range.weights();
        for (j, wj) in rows.zip(w) {
            let s = out_w[j] * wj;
            out.iter_mut().zip(self.row(j)).for_each(|(o, k)| *o += k * s);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert_eq!(KernelKind::Exponential.eval(0.0, 0.7), 1.0);
        assert_eq!(KernelKind::Gaussian.eval(0.3, 0.3), 3.0);
        assert_eq!(KernelKind::Step.eval(0.5, 0.5), 1.0);
        assert_eq!(KernelKind::Step.eval(0.5, 0.75), 0.0);
    }

    #[test]
    fn step_row_pattern() {
        let op = make_kernel_operator(KernelKind::Step, 5, 5).unwrap();
        let row: Vec<f64> = (0..5).map(|i| op.entry(2, i)).collect();
        assert_eq!(row, vec![1.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn step_kernel_last_row_is_mass() {
        let op = make_kernel_operator(KernelKind::Step, 41, 41).unwrap();
        let u = op.domain().tabulate(|t| 1.0 + t * t).unwrap();
        let au = op.apply(&u).unwrap();
        assert!((au.real_values().unwrap()[40] - u.integrate()).abs() < 1e-14);
    }

    #[test]
    fn adjoint_matches_transpose_oracle() {
        let op = make_kernel_operator(KernelKind::Exponential, 30, 20).unwrap();
        let w = crate::operators::testing::random_data(&op, 9);
        let got = op.adjoint_values(&w).unwrap();
        let wv = w.real_values().unwrap();
        let wt = op.range().weights();
        for (i, g) in got.iter().enumerate() {
            let expect: f64 = (0..20).map(|j| op.entry(j, i) * wt[j] * wv[j]).sum();
            assert!((g - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn table_io_round_trip() {
        let op = make_kernel_operator(KernelKind::Gaussian, 7, 5).unwrap();
        let mut text = Vec::new();
        op.write_table_csv(&mut text).unwrap();
        let back = KernelOperator::read_table_csv("k2", op.domain().clone(), op.range().clone(), text.as_slice()).unwrap();
        assert_eq!(back.table(), op.table());

        let mut bin = Vec::new();
        op.write_table_binary(&mut bin).unwrap();
        let back = KernelOperator::read_table_binary("k2", op.domain().clone(), op.range().clone(), bin.as_slice()).unwrap();
        assert_eq!(back.table(), op.table());

        let wrong = Grid::new(0.0, 1.0, 6).unwrap();
        assert!(KernelOperator::read_table_binary("k2", op.domain().clone(), wrong, bin.as_slice()).is_err());
    }

    #[test]
    fn nonnegativity_flag() {
        assert!(make_kernel_operator(KernelKind::Step, 5, 5).unwrap().is_nonnegative());
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let signed = KernelOperator::tabulate("signed", g.clone(), g, |x, y| x - y).unwrap();
        assert!(!signed.is_nonnegative());
    }
}
