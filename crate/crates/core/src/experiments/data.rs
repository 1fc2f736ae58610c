use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Density;
use crate::operators::{ForwardOperator, Measurement};

/// Exact and perturbed data of one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub exact: Measurement,
    pub noisy: Measurement,
    /// `‖noisy − exact‖` in the data-space norm.
    pub delta: f64,
}

/// `y = Az` plus seeded `N(0, σ²)` noise on every real entry, or on the real
/// and imaginary part of every complex sample.
pub fn synthesize_data(op: &dyn ForwardOperator, z: &Density, sigma: f64, seed: u64) -> Result<SyntheticData> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("noise level must be finite and nonnegative, got {sigma}")));
    }
    let exact = op.apply(z)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { sigma * rng.sample::<f64, _>(StandardNormal) };
    let noise = match &exact {
        Measurement::Real { weights, values } => {
            Measurement::real(weights.clone(), values.iter().map(|_| draw()).collect())?
        }
        Measurement::Complex(values) => Measurement::Complex(
            values
                .iter()
                .map(|_| {
                    let re = draw();
                    let im = draw();
                    Complex64::new(re, im)
                })
                .collect(),
        ),
    };
    let noisy = exact.combine(1.0, &noise, 1.0)?;
    let delta = noisy.sub(&exact)?.norm();
    Ok(SyntheticData { exact, noisy, delta })
}

/// Relative weighted-L² distance of `1 + ln z` from the range of `A*`.
///
/// Fits `1 + ln z` by least squares in the span of `A*` applied to the unit
/// vectors of the data space (real and imaginary directions for complex data).
pub fn source_condition_residual(op: &dyn ForwardOperator, z: &Density) -> Result<f64> {
    if !z.is_strictly_positive() {
        return Err(Error::Truth("source condition needs a strictly positive truth".into()));
    }
    let zero = op.zero_data();
    let mut directions = Vec::new();
    for j in 0..zero.len() {
        directions.push(zero.unit_like(j));
        if let Measurement::Complex(values) = &zero {
            let mut im = values.clone();
            im[j] = Complex64::new(0.0, 1.0);
            directions.push(Measurement::Complex(im));
        }
    }
    let w = z.grid().weights();
    let n = w.len();
    let sqrt_w: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let mut basis = DMatrix::<f64>::zeros(n, directions.len());
    for (col, d) in directions.iter().enumerate() {
        let b = op.adjoint_values(d)?;
        for i in 0..n {
            basis[(i, col)] = sqrt_w[i] * b[i];
        }
    }
    let target = DVector::from_iterator(n, z.values().iter().zip(&sqrt_w).map(|(v, s)| s * (1.0 + v.ln())));
    let svd = basis.clone().svd(true, true);
    let coef = svd
        .solve(&target, 1e-12)
        .map_err(|e| Error::Truth(format!("least-squares fit failed: {e}")))?;
    let residual = &target - &basis * coef;
    Ok(residual.norm() / target.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::truth::{truth_fourier, truth_kernel, FourierTruth};
    use crate::grid::Grid;
    use crate::operators::{make_kernel_operator, FourierSamplingOperator, KernelKind, MatrixOperator};

    #[test]
    fn zero_noise_is_exact() {
        let op = make_kernel_operator(KernelKind::Step, 64, 64).unwrap();
        let z = truth_kernel(3, op.domain()).unwrap();
        let d = synthesize_data(&op, &z, 0.0, 7).unwrap();
        assert_eq!(d.delta, 0.0);
        assert_eq!(d.noisy, d.exact);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let op = FourierSamplingOperator::uniform(10.0, 256, 16).unwrap();
        let z = truth_fourier(FourierTruth::Z2, &op).unwrap();
        let a = synthesize_data(&op, &z, 1.0 / 500.0, 3).unwrap();
        let b = synthesize_data(&op, &z, 1.0 / 500.0, 3).unwrap();
        assert_eq!(a, b);
        let c = synthesize_data(&op, &z, 1.0 / 500.0, 4).unwrap();
        assert_ne!(a.noisy, c.noisy);
    }

    #[test]
    fn noise_scales_linearly_with_sigma() {
        let op = FourierSamplingOperator::uniform(10.0, 128, 16).unwrap();
        let z = truth_fourier(FourierTruth::Z2, &op).unwrap();
        let a = synthesize_data(&op, &z, 1.0 / 1000.0, 11).unwrap();
        let b = synthesize_data(&op, &z, 1.0 / 500.0, 11).unwrap();
        assert!((b.delta / a.delta - 2.0).abs() < 1e-12);
    }

    fn mean_delta_sq(op: &dyn ForwardOperator, z: &Density, sigma: f64) -> f64 {
        (0..1000u64).map(|s| synthesize_data(op, z, sigma, s).unwrap().delta.powi(2)).sum::<f64>() / 1000.0
    }

    #[test]
    fn chi_square_mean_of_noise() {
        // unit data weights: E δ² = n σ²
        let g = Grid::new(0.0, 1.0, 40).unwrap();
        let id = MatrixOperator::new("unit", g.clone(), vec![1.0; 40].into(), {
            let mut m = vec![0.0; 1600];
            (0..40).for_each(|i| m[i * 41] = 1.0);
            m
        })
        .unwrap();
        let z = Density::constant(&g, 1.0).unwrap();
        let sigma = 0.1;
        let m = mean_delta_sq(&id, &z, sigma);
        assert!((m / (40.0 * sigma * sigma) - 1.0).abs() < 0.05);

        // trapezoid data weights: E δ² = σ² Σ w̃
        let op = make_kernel_operator(KernelKind::Exponential, 50, 50).unwrap();
        let z = truth_kernel(1, op.domain()).unwrap();
        let m = mean_delta_sq(&op, &z, sigma);
        assert!((m / (sigma * sigma) - 1.0).abs() < 0.05);

        // complex samples: E δ² = 2 n σ²
        let op = FourierSamplingOperator::uniform(10.0, 64, 16).unwrap();
        let z = truth_fourier(FourierTruth::Z2, &op).unwrap();
        let m = mean_delta_sq(&op, &z, sigma);
        assert!((m / (32.0 * sigma * sigma) - 1.0).abs() < 0.05);
    }

    #[test]
    fn source_condition_separates_truths() {
        let op = FourierSamplingOperator::uniform(10.0, 512, 16).unwrap();
        let z1 = truth_fourier(FourierTruth::Z1, &op).unwrap();
        let z2 = truth_fourier(FourierTruth::Z2, &op).unwrap();
        assert!(source_condition_residual(&op, &z1).unwrap() < 1e-8);
        assert!(source_condition_residual(&op, &z2).unwrap() > 1e-2);
    }
}
