//! Uniform 1-D grids with trapezoidal weights and the grid functions that live on them.
//!
//! All mass and norm computations are weight-aware: `integrate` is the
//! trapezoidal rule, `inner` is the weighted L² pairing, `l1_norm` is the
//! weighted L¹ norm. Refining a grid therefore converges to the continuum
//! quantities instead of growing with the node count.

use std::io::{Read, Write};
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serialized form of a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

/// A uniform partition of `[lower, upper]` into `n` nodes.
///
/// Cloning is cheap: the weight table is shared.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "GridSpec", try_from = "GridSpec")]
pub struct Grid {
    lower: f64,
    upper: f64,
    weights: Arc<[f64]>,
}

impl Grid {
    /// Trapezoidal grid with `n >= 2` nodes.
    pub fn new(lower: f64, upper: f64, n: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::InvalidGrid(format!(
                "need finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need n >= 2 nodes, got {n}")));
        }
        let h = (upper - lower) / (n - 1) as f64;
        let mut weights = vec![h; n];
        weights[0] = h / 2.0;
        weights[n - 1] = h / 2.0;
        Ok(Self {
            lower,
            upper,
            weights: weights.into(),
        })
    }

    /// Degenerate one-node grid whose single weight is the interval length.
    ///
    /// Used for scalar toy problems; the node sits at the midpoint.
    pub fn cell(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::InvalidGrid(format!(
                "need finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            lower,
            upper,
            weights: vec![upper - lower].into(),
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Node spacing; for a one-node grid this is the cell length.
    pub fn spacing(&self) -> f64 {
        match self.len() {
            1 => self.length(),
            n => self.length() / (n - 1) as f64,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn shared_weights(&self) -> Arc<[f64]> {
        Arc::clone(&self.weights)
    }

    pub fn node(&self, i: usize) -> f64 {
        if self.len() == 1 {
            return 0.5 * (self.lower + self.upper);
        }
        if i + 1 == self.len() {
            return self.upper;
        }
        self.lower + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            lower: self.lower,
            upper: self.upper,
            n: self.len(),
        }
    }

    /// Trapezoidal sum of raw node values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn inner_values(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * (x * y))
            .sum()
    }

    pub fn l1_values(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v.abs())
            .sum()
    }

    pub fn function(&self, values: Vec<f64>) -> Result<GridFunction> {
        GridFunction::new(self.clone(), values)
    }

    pub fn constant(&self, value: f64) -> Result<GridFunction> {
        GridFunction::new(self.clone(), vec![value; self.len()])
    }

    pub fn tabulate(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.clone(), self.nodes().into_iter().map(f).collect())
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower && self.upper == other.upper && self.len() == other.len()
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        g.spec()
    }
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(s: GridSpec) -> Result<Self> {
        if s.n == 1 {
            Grid::cell(s.lower, s.upper)
        } else {
            Grid::new(s.lower, s.upper, s.n)
        }
    }
}

/// Finite real values on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain {
                index,
                value,
                expected: "a finite value",
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ w_i u_i`
    pub fn integrate(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }

    /// `Σ w_i u_i v_i`
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.grid.inner_values(&self.values, &other.values))
    }

    /// `Σ w_i |u_i|`
    pub fn l1_norm(&self) -> f64 {
        self.grid.l1_values(&self.values)
    }

    pub fn l1_distance(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * (a - b).abs())
            .sum())
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid.spec(),
                other.grid.spec()
            )));
        }
        Ok(())
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// Writes `node,value` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["node", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            out.write_record([self.grid.node(i).to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads `node,value` rows written by [`GridFunction::write_csv`] onto `grid`.
    pub fn read_csv<R: Read>(grid: &Grid, reader: R) -> Result<GridFunction> {
        let mut input = csv::Reader::from_reader(reader);
        let mut values = Vec::with_capacity(grid.len());
        for (i, row) in input.records().enumerate() {
            let row = row?;
            let parse = |k: usize| -> Result<f64> {
                row.get(k)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::GridMismatch(format!("bad row {i}")))
            };
            let node = parse(0)?;
            if i >= grid.len() || (node - grid.node(i)).abs() > 1e-9 * (1.0 + node.abs()) {
                return Err(Error::GridMismatch(format!(
                    "row {i} node {node} does not match the grid"
                )));
            }
            values.push(parse(1)?);
        }
        GridFunction::new(grid.clone(), values)
    }
}

/// A nonnegative grid function: the iterate and truth type.
#[derive(Debug, Clone, PartialEq)]
pub struct Density(GridFunction);

impl Density {
    pub fn new(f: GridFunction) -> Result<Self> {
        if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::Domain {
                index,
                value,
                expected: "a nonnegative value",
            });
        }
        Ok(Self(f))
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(GridFunction::new(grid.clone(), values)?)
    }

    pub fn constant(grid: &Grid, value: f64) -> Result<Self> {
        Self::new(grid.constant(value)?)
    }

    /// Requires every value to be strictly positive (the domain of the entropy subgradient).
    pub fn strictly_positive(f: GridFunction) -> Result<Self> {
        if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::Domain {
                index,
                value,
                expected: "a strictly positive value",
            });
        }
        Ok(Self(f))
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.values().iter().all(|v| *v > 0.0)
    }

    pub fn mass(&self) -> f64 {
        self.0.integrate()
    }

    pub fn as_function(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_function(self) -> GridFunction {
        self.0
    }
}

impl Deref for Density {
    type Target = GridFunction;

    fn deref(&self) -> &GridFunction {
        &self.0
    }
}
