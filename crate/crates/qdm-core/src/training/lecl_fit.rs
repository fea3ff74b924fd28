//! Fitting the error-cancellation layer from (noisy, ideal) sample pairs.
//!
//! The objective Σ‖A·ŷ + b − y*‖² is convex; the closed-form least-squares
//! solution is the primary route and a BFGS run over the same objective is
//! kept as the independent cross-check.

use nalgebra::DMatrix;

use crate::error::{QdmError, Result};
use crate::model::LeclParams;
use crate::optimize::{bfgs, BfgsOptions};

#[derive(Clone, Debug)]
pub struct LeclFit {
    pub params: LeclParams,
    /// Set when the sample design matrix was rank-deficient and the
    /// minimum-norm solution was taken.
    pub rank_deficient: bool,
    /// Max-abs residual of the fitted map over the samples.
    pub max_residual: f64,
}

/// Least-squares fit of (A, b) to samples of (noisy output, ideal output).
pub fn fit_lecl(samples: &[(Vec<f64>, Vec<f64>)]) -> Result<LeclFit> {
    if samples.is_empty() {
        return Err(QdmError::EmptySeries);
    }
    let n = samples[0].0.len();
    for (a, b) in samples {
        if a.len() != n || b.len() != n {
            return Err(QdmError::DimensionMismatch { expected: n, actual: a.len().min(b.len()) });
        }
    }
    let rows = samples.len();
    if rows < n + 1 {
        return Err(QdmError::IllPosedFit(format!(
            "need at least {} samples for a {}-dimensional affine fit, got {}",
            n + 1,
            n,
            rows
        )));
    }
    // design matrix [ŷ | 1]; one least-squares solve per output row
    let x = DMatrix::from_fn(rows, n + 1, |r, c| {
        if c < n {
            samples[r].0[c]
        } else {
            1.0
        }
    });
    let svd = x.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let rank_deficient = rank < n + 1;

    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for out in 0..n {
        let y = nalgebra::DVector::from_fn(rows, |r, _| samples[r].1[out]);
        let sol = svd
            .solve(&y, tol)
            .map_err(|e| QdmError::IllPosedFit(e.to_string()))?;
        for c in 0..n {
            a[out][c] = sol[c];
        }
        b[out] = sol[n];
    }
    let params = LeclParams { a, b };
    let max_residual = max_residual(&params, samples)?;
    Ok(LeclFit { params, rank_deficient, max_residual })
}

/// Max-abs residual ‖A·ŷ + b − y*‖∞ over the samples.
pub fn max_residual(params: &LeclParams, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (noisy, ideal) in samples {
        let corrected = params.apply(noisy)?;
        for (c, i) in corrected.iter().zip(ideal.iter()) {
            worst = worst.max((c - i).abs());
        }
    }
    Ok(worst)
}

/// BFGS route over the same convex objective, used to cross-check the
/// closed-form solution.
pub fn fit_lecl_bfgs(samples: &[(Vec<f64>, Vec<f64>)]) -> Result<LeclParams> {
    if samples.is_empty() {
        return Err(QdmError::EmptySeries);
    }
    let n = samples[0].0.len();
    let dim = n * n + n;
    let objective = |p: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (noisy, ideal) in samples {
            for r in 0..n {
                let mut y = p[n * n + r];
                for c in 0..n {
                    y += p[r * n + c] * noisy[c];
                }
                acc += (y - ideal[r]) * (y - ideal[r]);
            }
        }
        acc
    };
    // identity initialization
    let mut x0 = vec![0.0; dim];
    for i in 0..n {
        x0[i * n + i] = 1.0;
    }
    let res = bfgs(objective, &x0, &BfgsOptions { max_iters: 2000, grad_tol: 1e-12, fd_step: 1e-6 });
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for r in 0..n {
        for c in 0..n {
            a[r][c] = res.x[r * n + c];
        }
        b[r] = res.x[n * n + r];
    }
    Ok(LeclParams { a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn grid_samples(f: impl Fn(f64, f64) -> (f64, f64)) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut out = Vec::new();
        for i in 0..7 {
            for j in 0..7 {
                let m = -0.9 + 0.3 * i as f64;
                let x = -0.9 + 0.3 * j as f64;
                let (nm, nx) = f(m, x);
                out.push((vec![nm, nx], vec![m, x]));
            }
        }
        out
    }

    #[test]
    fn noiseless_fit_is_identity() {
        let samples = grid_samples(|m, x| (m, x));
        let fit = fit_lecl(&samples).unwrap();
        assert!(!fit.rank_deficient);
        assert_abs_diff_eq!(fit.params.a[0][0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params.a[1][1], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params.a[0][1], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params.b[0], 0.0, epsilon = 1e-8);
        assert!(fit.max_residual < 1e-10);
    }

    #[test]
    fn inverts_synthetic_affine_noise() {
        // ŷ = 0.9·y* + 0.05  ⇒  A = I/0.9, b = −0.05/0.9
        let samples = grid_samples(|m, x| (0.9 * m + 0.05, 0.9 * x + 0.05));
        let fit = fit_lecl(&samples).unwrap();
        assert_abs_diff_eq!(fit.params.a[0][0], 1.1111111111111112, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params.b[0], -0.05555555555555555, epsilon = 1e-8);
        assert!(fit.max_residual < 1e-10);
    }

    #[test]
    fn inverts_depolarizing_plus_readout_composite() {
        // scale 0.81 (two p=0.1 layers) then symmetric readout flip ε=0.1:
        // w = 0.8·(0.81·v); LECL must undo the product exactly
        let samples = grid_samples(|m, x| (0.8 * 0.81 * m, 0.8 * 0.81 * x));
        let fit = fit_lecl(&samples).unwrap();
        assert!(fit.max_residual < 1e-8);
        assert_abs_diff_eq!(fit.params.a[0][0], 1.0 / (0.8 * 0.81), epsilon = 1e-8);
    }

    #[test]
    fn bfgs_route_agrees_with_closed_form() {
        let samples = grid_samples(|m, x| (0.93 * m + 0.02 * x + 0.01, 0.9 * x - 0.03));
        let ls = fit_lecl(&samples).unwrap().params;
        let qb = fit_lecl_bfgs(&samples).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(ls.a[r][c], qb.a[r][c], epsilon = 1e-6);
            }
            assert_abs_diff_eq!(ls.b[r], qb.b[r], epsilon = 1e-6);
        }
    }

    #[test]
    fn rank_deficient_collinear_samples_flagged() {
        // all noisy inputs on a line: design matrix rank-deficient
        let samples: Vec<_> = (0..8)
            .map(|i| {
                let t = i as f64 * 0.1;
                (vec![t, 2.0 * t], vec![t, 2.0 * t])
            })
            .collect();
        let fit = fit_lecl(&samples).unwrap();
        assert!(fit.rank_deficient);
        assert!(fit.max_residual < 1e-8);
    }

    #[test]
    fn too_few_samples_rejected() {
        let samples = vec![(vec![0.1, 0.2], vec![0.1, 0.2])];
        assert!(fit_lecl(&samples).is_err());
    }

    #[test]
    fn gaussian_perturbed_calibration_still_recovers_map() {
        let mut rng = crate::rng::sub_rng(3, "lecl-shot", 0);
        let sigma = 5e-3;
        let mut samples = grid_samples(|m, x| (0.9 * m + 0.01, 0.9 * x - 0.02));
        for (noisy, _) in samples.iter_mut() {
            for v in noisy.iter_mut() {
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                *v += sigma
                    * (-2.0 * u1.ln()).sqrt()
                    * (2.0 * std::f64::consts::PI * u2).cos();
            }
        }
        let fit = fit_lecl(&samples).unwrap();
        // evaluate on the clean map: estimation error stays well below 1e-2
        let clean = grid_samples(|m, x| (0.9 * m + 0.01, 0.9 * x - 0.02));
        let resid = max_residual(&fit.params, &clean).unwrap();
        assert!(resid < 1e-2, "residual {resid}");
    }
}
