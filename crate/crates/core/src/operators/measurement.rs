use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An element of the data space.
///
/// Real data carries the quadrature weights of its output grid, so the inner
/// product is the weighted L² pairing `Σ w̃_j a_j b_j`. Complex data uses the
/// real-part pairing `Re Σ a_j conj(b_j)`; norms are real in both cases.
#[derive(Debug, Clone, PartialEq)]
pub enum Measurement {
    Real {
        weights: Arc<[f64]>,
        values: Vec<f64>,
    },
    Complex(Vec<Complex64>),
}

impl Measurement {
    pub fn real(weights: Arc<[f64]>, values: Vec<f64>) -> Result<Self> {
        if weights.len() != values.len() {
            return Err(Error::SpaceMismatch(format!(
                "{} values for {} weights",
                values.len(),
                weights.len()
            )));
        }
        Ok(Measurement::Real { weights, values })
    }

    /// Real data with unit weights (plain Euclidean pairing).
    pub fn euclidean(values: Vec<f64>) -> Self {
        let weights: Arc<[f64]> = vec![1.0; values.len()].into();
        Measurement::Real { weights, values }
    }

    pub fn len(&self) -> usize {
        match self {
            Measurement::Real { values, .. } => values.len(),
            Measurement::Complex(values) => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Measurement::Complex(_))
    }

    pub fn zeros_like(&self) -> Self {
        match self {
            Measurement::Real { weights, values } => Measurement::Real {
                weights: Arc::clone(weights),
                values: vec![0.0; values.len()],
            },
            Measurement::Complex(values) => {
                Measurement::Complex(vec![Complex64::new(0.0, 0.0); values.len()])
            }
        }
    }

    pub fn real_values(&self) -> Option<&[f64]> {
        match self {
            Measurement::Real { values, .. } => Some(values),
            Measurement::Complex(_) => None,
        }
    }

    pub fn complex_values(&self) -> Option<&[Complex64]> {
        match self {
            Measurement::Complex(values) => Some(values),
            Measurement::Real { .. } => None,
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            Measurement::Real { weights, .. } => Some(weights),
            Measurement::Complex(_) => None,
        }
    }

    pub fn check_same_space(&self, other: &Measurement) -> Result<()> {
        match (self, other) {
            (
                Measurement::Real { weights: a, values: x },
                Measurement::Real { weights: b, values: y },
            ) => {
                if x.len() != y.len() {
                    return Err(Error::SpaceMismatch(format!(
                        "real data of length {} vs {}",
                        x.len(),
                        y.len()
                    )));
                }
                if !Arc::ptr_eq(a, b) && a[..] != b[..] {
                    return Err(Error::SpaceMismatch("different output weights".into()));
                }
                Ok(())
            }
            (Measurement::Complex(x), Measurement::Complex(y)) if x.len() == y.len() => Ok(()),
            (Measurement::Complex(x), Measurement::Complex(y)) => Err(Error::SpaceMismatch(
                format!("complex data of length {} vs {}", x.len(), y.len()),
            )),
            _ => Err(Error::SpaceMismatch("real vs complex data".into())),
        }
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &Measurement, b: f64) -> Result<Measurement> {
        self.check_same_space(other)?;
        Ok(match (self, other) {
            (Measurement::Real { weights, values: x }, Measurement::Real { values: y, .. }) => {
                Measurement::Real {
                    weights: Arc::clone(weights),
                    values: x.iter().zip(y).map(|(p, q)| a * p + b * q).collect(),
                }
            }
            (Measurement::Complex(x), Measurement::Complex(y)) => {
                Measurement::Complex(x.iter().zip(y).map(|(p, q)| p * a + q * b).collect())
            }
            _ => unreachable!(),
        })
    }

    /// `self − other`
    pub fn sub(&self, other: &Measurement) -> Result<Measurement> {
        self.check_same_space(other)?;
        Ok(match (self, other) {
            (Measurement::Real { weights, values: x }, Measurement::Real { values: y, .. }) => {
                Measurement::Real {
                    weights: Arc::clone(weights),
                    values: x.iter().zip(y).map(|(p, q)| p - q).collect(),
                }
            }
            (Measurement::Complex(x), Measurement::Complex(y)) => {
                Measurement::Complex(x.iter().zip(y).map(|(p, q)| p - q).collect())
            }
            _ => unreachable!(),
        })
    }

    /// `self += a·other`
    pub fn axpy(&mut self, a: f64, other: &Measurement) -> Result<()> {
        self.check_same_space(other)?;
        match (self, other) {
            (Measurement::Real { values: x, .. }, Measurement::Real { values: y, .. }) => {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += a * q);
            }
            (Measurement::Complex(x), Measurement::Complex(y)) => {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q * a);
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    /// `self += other`, exact (no multiplication by one).
    pub fn add_assign(&mut self, other: &Measurement) -> Result<()> {
        self.check_same_space(other)?;
        match (self, other) {
            (Measurement::Real { values: x, .. }, Measurement::Real { values: y, .. }) => {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            (Measurement::Complex(x), Measurement::Complex(y)) => {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> Measurement {
        match self {
            Measurement::Real { weights, values } => Measurement::Real {
                weights: Arc::clone(weights),
                values: values.iter().map(|v| a * v).collect(),
            },
            Measurement::Complex(values) => {
                Measurement::Complex(values.iter().map(|v| v * a).collect())
            }
        }
    }

    pub fn neg(&self) -> Measurement {
        match self {
            Measurement::Real { weights, values } => Measurement::Real {
                weights: Arc::clone(weights),
                values: values.iter().map(|v| -v).collect(),
            },
            Measurement::Complex(values) => Measurement::Complex(values.iter().map(|v| -v).collect()),
        }
    }

    /// Multiplies entry `j` by `factors[j]`.
    pub fn scale_entries(&self, factors: &[f64]) -> Result<Measurement> {
        if factors.len() != self.len() {
            return Err(Error::SpaceMismatch(format!(
                "{} factors for data of length {}",
                factors.len(),
                self.len()
            )));
        }
        Ok(match self {
            Measurement::Real { weights, values } => Measurement::Real {
                weights: Arc::clone(weights),
                values: values.iter().zip(factors).map(|(v, f)| v * f).collect(),
            },
            Measurement::Complex(values) => {
                Measurement::Complex(values.iter().zip(factors).map(|(v, f)| v * f).collect())
            }
        })
    }

    pub fn inner(&self, other: &Measurement) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(match (self, other) {
            (Measurement::Real { weights, values: x }, Measurement::Real { values: y, .. }) => weights
                .iter()
                .zip(x.iter().zip(y))
                .map(|(w, (p, q))| w * (p * q))
                .sum(),
            (Measurement::Complex(x), Measurement::Complex(y)) => {
                x.iter().zip(y).map(|(p, q)| p.re * q.re + p.im * q.im).sum()
            }
            _ => unreachable!(),
        })
    }

    pub fn norm_sq(&self) -> f64 {
        match self {
            Measurement::Real { weights, values } => {
                weights.iter().zip(values).map(|(w, v)| w * v * v).sum()
            }
            Measurement::Complex(values) => values.iter().map(|v| v.norm_sqr()).sum(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Entries in `rows`; real slices keep the matching weights.
    pub fn slice(&self, rows: Range<usize>) -> Result<Measurement> {
        if rows.start > rows.end || rows.end > self.len() {
            return Err(Error::SpaceMismatch(format!(
                "rows {rows:?} out of range for data of length {}",
                self.len()
            )));
        }
        Ok(match self {
            Measurement::Real { weights, values } => Measurement::Real {
                weights: weights[rows.clone()].into(),
                values: values[rows].to_vec(),
            },
            Measurement::Complex(values) => Measurement::Complex(values[rows].to_vec()),
        })
    }

    /// Adds `block` into the entries `rows` of `self`.
    pub fn add_into_rows(&mut self, rows: Range<usize>, block: &Measurement) -> Result<()> {
        let target = self.slice(rows.clone())?;
        target.check_same_space(block)?;
        match (self, block) {
            (Measurement::Real { values: x, .. }, Measurement::Real { values: y, .. }) => {
                x[rows].iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            (Measurement::Complex(x), Measurement::Complex(y)) => {
                x[rows].iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    pub fn concat(parts: &[Measurement]) -> Result<Measurement> {
        let first = parts
            .first()
            .ok_or_else(|| Error::SpaceMismatch("nothing to concatenate".into()))?;
        match first {
            Measurement::Real { .. } => {
                let mut weights = Vec::new();
                let mut values = Vec::new();
                for p in parts {
                    match p {
                        Measurement::Real { weights: w, values: v } => {
                            weights.extend_from_slice(w);
                            values.extend_from_slice(v);
                        }
                        Measurement::Complex(_) => {
                            return Err(Error::SpaceMismatch("real vs complex data".into()))
                        }
                    }
                }
                Measurement::real(weights.into(), values)
            }
            Measurement::Complex(_) => {
                let mut values = Vec::new();
                for p in parts {
                    match p {
                        Measurement::Complex(v) => values.extend_from_slice(v),
                        Measurement::Real { .. } => {
                            return Err(Error::SpaceMismatch("real vs complex data".into()))
                        }
                    }
                }
                Ok(Measurement::Complex(values))
            }
        }
    }

    /// Unit vector at `index` (real part one for complex data).
    pub fn unit_like(&self, index: usize) -> Measurement {
        let mut e = self.zeros_like();
        match &mut e {
            Measurement::Real { values, .. } => values[index] = 1.0,
            Measurement::Complex(values) => values[index] = Complex64::new(1.0, 0.0),
        }
        e
    }
}
