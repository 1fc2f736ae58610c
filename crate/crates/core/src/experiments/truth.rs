use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Density, Grid, GridFunction};
use crate::operators::{FourierSamplingOperator, ForwardOperator};

/// `σ²` of the Gaussian bumps in the kernel test solutions.
pub const KERNEL_SIGMA_SQ: f64 = 0.01;

/// Negative mass below which a filtered truth is floored at zero instead of rejected.
pub const NEGATIVE_MASS_TOLERANCE: f64 = 1e-6;

fn bump(x: f64, center: f64) -> f64 {
    (-(x - center) * (x - center) / (2.0 * KERNEL_SIGMA_SQ)).exp()
}

/// Exact solutions of the three kernel problems on `(0,1)`.
pub fn truth_kernel(which: u8, grid: &Grid) -> Result<Density> {
    let f = match which {
        1 | 3 => grid.tabulate(|x| bump(x, 0.0))?,
        2 => grid.tabulate(|x| {
            1.0 - 0.9 * bump(x, 0.1) - 0.3 * bump(x, 0.3) - 0.5 * bump(x, 0.5) - 0.2 * bump(x, 0.7)
                - 0.7 * bump(x, 0.9)
        })?,
        other => return Err(Error::Truth(format!("no kernel truth z{other}"))),
    };
    Density::new(f)
}

/// `Σ_l c_l g(x, μ_l, σ_l)` with normalized Gaussians `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub means: [f64; 3],
    pub sds: [f64; 3],
    pub coefficients: [f64; 3],
}

impl GaussianMixture {
    const MEANS: [f64; 3] = [0.0, -1.0, 0.5];
    const SDS: [f64; 3] = [1.0, 0.1, 0.25];

    /// Mixture filtered into the smooth Fourier truth.
    pub fn z1() -> Self {
        Self { means: Self::MEANS, sds: Self::SDS, coefficients: [0.1, 0.6, 0.3] }
    }

    /// Mixture used directly as the second Fourier truth.
    pub fn z2() -> Self {
        Self { means: Self::MEANS, sds: Self::SDS, coefficients: [0.1, 0.4, 0.5] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sds.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Truth("mixture standard deviations must be positive".into()));
        }
        Ok(())
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        (0..3)
            .map(|l| {
                let (m, s) = (self.means[l], self.sds[l]);
                self.coefficients[l] * (-(x - m) * (x - m) / (2.0 * s * s)).exp() / (2.0 * PI * s * s).sqrt()
            })
            .sum()
    }

    pub fn tabulate(&self, grid: &Grid) -> Result<GridFunction> {
        self.validate()?;
        grid.tabulate(|x| self.eval(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierTruth {
    /// `exp(h)/∫exp(h)` with `h` the band-limited filter of the z1 mixture.
    Z1,
    /// `h/∫h` taken literally; rejected when its negative part is not negligible.
    Z1Linear,
    /// The raw z2 mixture.
    Z2,
}

/// `h(x) = Re((1/√2) Σ_j (∫ f(t) e^{-itξ_j} dt) e^{ixξ_j})`, i.e. `√2 π A*A f`.
pub fn band_limited_filter(op: &FourierSamplingOperator, f: &GridFunction) -> Result<GridFunction> {
    let back = op.adjoint(&op.apply(f)?)?;
    Ok(back.scaled(PI * SQRT_2))
}

/// Divides by the mass, flooring a negligible negative part at zero first.
fn normalize_filtered(h: GridFunction) -> Result<Density> {
    let grid = h.grid().clone();
    let negative: f64 = grid.integrate_values(&h.values().iter().map(|v| (-v).max(0.0)).collect::<Vec<_>>());
    if negative >= NEGATIVE_MASS_TOLERANCE {
        return Err(Error::Truth(format!(
            "filtered truth has negative mass {negative:e} (tolerance {NEGATIVE_MASS_TOLERANCE:e})"
        )));
    }
    let floored: Vec<f64> = h.values().iter().map(|v| v.max(0.0)).collect();
    let mass = grid.integrate_values(&floored);
    if !(mass > 0.0) {
        return Err(Error::Truth("filtered truth has no positive mass".into()));
    }
    Density::from_values(&grid, floored.into_iter().map(|v| v / mass).collect())
}

/// Ground truths of the Fourier sampling problem on the operator's grid.
pub fn truth_fourier(which: FourierTruth, op: &FourierSamplingOperator) -> Result<Density> {
    let grid = op.domain();
    match which {
        FourierTruth::Z2 => Density::new(GaussianMixture::z2().tabulate(grid)?),
        FourierTruth::Z1Linear => {
            let h = band_limited_filter(op, &GaussianMixture::z1().tabulate(grid)?)?;
            normalize_filtered(h)
        }
        FourierTruth::Z1 => {
            let h = band_limited_filter(op, &GaussianMixture::z1().tabulate(grid)?)?;
            let top = h.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e = grid.function(h.values().iter().map(|v| (v - top).exp()).collect())?;
            normalize_filtered(e)
        }
    }
}
