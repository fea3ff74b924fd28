//! Quantum reservoir computing baseline: CPTP input injection, time-
//! multiplexed Hamiltonian evolution, linear readout, NMSE.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};
use crate::linalg::{CMat, C64};
use crate::quantum::hamiltonian::HamiltonianSpec;
use crate::quantum::state::{QuantumState, Representation};
use crate::rng::sub_rng;

fn default_washout() -> usize {
    10
}
fn default_ridge() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QrcConfig {
    pub n_qubits: usize,
    /// Evolution interval per step.
    pub tau: f64,
    /// Time-multiplexing subintervals V.
    pub v_slices: usize,
    /// Fixed reservoir Hamiltonian; drawn from the seed when absent.
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default = "default_washout")]
    pub washout: usize,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    pub seed: u64,
}

impl QrcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > crate::quantum::MAX_QUBITS {
            return Err(QdmError::InvalidQubitCount(self.n_qubits));
        }
        if self.v_slices == 0 {
            return Err(QdmError::InvalidConfig("v_slices must be >= 1".into()));
        }
        if self.tau < 0.0 || !self.tau.is_finite() {
            return Err(QdmError::DomainViolation { value: self.tau, domain: "[0, inf)" });
        }
        if self.ridge < 0.0 {
            return Err(QdmError::DomainViolation { value: self.ridge, domain: "[0, inf)" });
        }
        Ok(())
    }

    /// Resolve the reservoir Hamiltonian (coefficients ~ U[-1,1] from the
    /// seed when not given explicitly).
    pub fn resolve_hamiltonian(&self) -> HamiltonianSpec {
        match &self.hamiltonian {
            Some(h) => h.clone(),
            None => {
                let mut rng = sub_rng(self.seed, "qrc-hamiltonian", 0);
                HamiltonianSpec::random(self.n_qubits, self.tau, &mut rng)
            }
        }
    }

    /// Feature count per step: V·(2n−1).
    pub fn feature_count(&self) -> usize {
        self.v_slices * (2 * self.n_qubits - 1)
    }
}

/// CPTP injection: replace the target qubit with
/// |ρ(s)⟩ = √((1−s)/2)|0⟩ + √((1+s)/2)|1⟩, tensored with the partial trace
/// over that qubit.
pub fn inject_input(state: &mut QuantumState, s: f64, qubit: usize) -> Result<()> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(QdmError::DomainViolation { value: s, domain: "[-1, 1]" });
    }
    let a0 = ((1.0 - s) / 2.0).sqrt();
    let a1 = ((1.0 + s) / 2.0).sqrt();
    state.replace_qubit(qubit, C64::new(a0, 0.0), C64::new(a1, 0.0))
}

/// Measurement ensemble {σ_z,i} ∪ {σ_z,i ⊗ σ_z,i+1} evaluated from the
/// density-matrix diagonal.
fn ensemble_features(state: &QuantumState) -> Vec<f64> {
    let n = state.n_qubits();
    let p = state.probabilities();
    let mut f = Vec::with_capacity(2 * n - 1);
    for q in 0..n {
        let mut z = 0.0;
        for (b, pb) in p.iter().enumerate() {
            z += if b & (1 << q) == 0 { *pb } else { -*pb };
        }
        f.push(z);
    }
    for q in 0..n - 1 {
        let mut zz = 0.0;
        for (b, pb) in p.iter().enumerate() {
            let parity = ((b >> q) & 1) ^ ((b >> (q + 1)) & 1);
            zz += if parity == 0 { *pb } else { -*pb };
        }
        f.push(zz);
    }
    f
}

/// Inject s_t, evolve V slices of duration τ/V, and record the measurement
/// ensemble after each slice. `slice_unitary` must be exp(-iHτ/V).
pub fn multiplexed_step(
    state: &mut QuantumState,
    s: f64,
    cfg: &QrcConfig,
    slice_unitary: &CMat,
) -> Result<Vec<f64>> {
    inject_input(state, s, 0)?;
    let mut features = Vec::with_capacity(cfg.feature_count());
    for _ in 0..cfg.v_slices {
        state.apply_dense(slice_unitary)?;
        features.extend(ensemble_features(state));
    }
    Ok(features)
}

#[derive(Clone, Debug)]
pub struct ReadoutFit {
    /// Feature weights followed by the bias term.
    pub weights: Vec<f64>,
    pub rank_deficient: bool,
}

/// Ridge-regularized least squares with a bias column.
pub fn fit_readout(features: &[Vec<f64>], targets: &[f64], ridge: f64) -> Result<ReadoutFit> {
    if features.len() != targets.len() {
        return Err(QdmError::LengthMismatch { left: features.len(), right: targets.len() });
    }
    if features.is_empty() {
        return Err(QdmError::EmptySeries);
    }
    let rows = features.len();
    let cols = features[0].len() + 1;
    let x = DMatrix::from_fn(rows, cols, |r, c| {
        if c < cols - 1 {
            features[r][c]
        } else {
            1.0
        }
    });
    let y = DVector::from_fn(rows, |r, _| targets[r]);
    let xtx = x.transpose() * &x + DMatrix::identity(cols, cols) * ridge;
    let xty = x.transpose() * y;
    // Cholesky when well-conditioned; SVD minimum-norm fallback otherwise
    match xtx.clone().cholesky() {
        Some(ch) => {
            let sol = ch.solve(&xty);
            Ok(ReadoutFit { weights: sol.iter().copied().collect(), rank_deficient: false })
        }
        None => {
            let svd = xtx.svd(true, true);
            let tol = 1e-12 * svd.singular_values.max();
            let sol = svd
                .solve(&xty, tol)
                .map_err(|e| QdmError::IllPosedFit(e.to_string()))?;
            Ok(ReadoutFit { weights: sol.iter().copied().collect(), rank_deficient: true })
        }
    }
}

fn readout_apply(weights: &[f64], features: &[f64]) -> f64 {
    let (w, b) = weights.split_at(weights.len() - 1);
    w.iter().zip(features.iter()).map(|(a, f)| a * f).sum::<f64>() + b[0]
}

/// Σ(y−ŷ)² / Σy².
pub fn nmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(QdmError::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    let num: f64 = pred.iter().zip(truth.iter()).map(|(p, t)| (p - t) * (p - t)).sum();
    let den: f64 = truth.iter().map(|t| t * t).sum();
    if den == 0.0 {
        return Err(QdmError::DomainViolation { value: den, domain: "nonzero target energy" });
    }
    Ok(num / den)
}

#[derive(Clone, Debug)]
pub struct QrcOutcome {
    pub predictions: Vec<f64>,
    pub nmse_train: f64,
    pub nmse_pred: f64,
    pub mse_train: f64,
    pub mse_pred: f64,
}

/// Teacher-forced training over series[0..L], then an autonomous phase of
/// `predict_len` steps feeding the readout output back as the next input.
/// `series` must hold at least L + predict_len + 1 values for scoring.
pub fn run_qrc(
    cfg: &QrcConfig,
    series: &[f64],
    train_len: usize,
    predict_len: usize,
) -> Result<QrcOutcome> {
    cfg.validate()?;
    if series.len() < train_len + predict_len + 1 {
        return Err(QdmError::LengthMismatch {
            left: series.len(),
            right: train_len + predict_len + 1,
        });
    }
    if train_len <= cfg.washout {
        return Err(QdmError::InvalidConfig(format!(
            "train_len {} must exceed washout {}",
            train_len, cfg.washout
        )));
    }
    let ham = cfg.resolve_hamiltonian();
    let slice_u = crate::linalg::expm_neg_i_h_t(&ham.matrix()?, cfg.tau / cfg.v_slices as f64)?;
    let mut state = QuantumState::new(cfg.n_qubits, Representation::Mixed)?;

    let mut feats = Vec::with_capacity(train_len);
    for t in 0..train_len {
        feats.push(multiplexed_step(&mut state, series[t].clamp(-1.0, 1.0), cfg, &slice_u)?);
    }
    let targets: Vec<f64> = series[1..=train_len].to_vec();
    let fit = fit_readout(&feats[cfg.washout..], &targets[cfg.washout..], cfg.ridge)?;

    let fitted: Vec<f64> = feats[cfg.washout..]
        .iter()
        .map(|f| readout_apply(&fit.weights, f))
        .collect();
    let nmse_train = nmse(&fitted, &targets[cfg.washout..])?;
    let mse_train = fitted
        .iter()
        .zip(targets[cfg.washout..].iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / fitted.len() as f64;

    // autonomous: first input is the last training value, then feedback
    let mut s = series[train_len];
    let mut predictions = Vec::with_capacity(predict_len);
    for _ in 0..predict_len {
        let f = multiplexed_step(&mut state, s.clamp(-1.0, 1.0), cfg, &slice_u)?;
        s = readout_apply(&fit.weights, &f);
        predictions.push(s);
    }
    let truth = &series[train_len + 1..=train_len + predict_len];
    let nmse_pred = nmse(&predictions, truth)?;
    let mse_pred = predictions
        .iter()
        .zip(truth.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / predictions.len().max(1) as f64;

    Ok(QrcOutcome { predictions, nmse_train, nmse_pred, mse_train, mse_pred })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(seed: u64, tau: f64) -> QrcConfig {
        QrcConfig {
            n_qubits: 3,
            tau,
            v_slices: 5,
            hamiltonian: None,
            washout: 10,
            ridge: 1e-8,
            seed,
        }
    }

    #[test]
    fn injection_examples() {
        let mut st = QuantumState::new(2, Representation::Mixed).unwrap();
        inject_input(&mut st, 1.0, 0).unwrap();
        assert_abs_diff_eq!(st.expect_z(0).unwrap(), -1.0, epsilon = 1e-12);

        inject_input(&mut st, 0.0, 0).unwrap();
        assert_abs_diff_eq!(st.expect_z(0).unwrap(), 0.0, epsilon = 1e-12);

        // s = 0.5: amplitudes (0.5, 0.8660254), ⟨σ_z⟩ = 0.25 − 0.75
        inject_input(&mut st, 0.5, 0).unwrap();
        assert_abs_diff_eq!(st.expect_z(0).unwrap(), -0.5, epsilon = 1e-12);
        assert!(inject_input(&mut st, 1.5, 0).is_err());
    }

    #[test]
    fn injection_preserves_trace_and_is_idempotent_in_marginal() {
        let mut st = QuantumState::new(3, Representation::Mixed).unwrap();
        inject_input(&mut st, 0.3, 0).unwrap();
        let z1 = st.expect_z(0).unwrap();
        inject_input(&mut st, 0.3, 0).unwrap();
        let z2 = st.expect_z(0).unwrap();
        assert_abs_diff_eq!(z1, z2, epsilon = 1e-12);
        assert_abs_diff_eq!(st.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn feature_count_matches_formula() {
        let c = cfg(1, 2.8);
        let ham = c.resolve_hamiltonian();
        let u = crate::linalg::expm_neg_i_h_t(&ham.matrix().unwrap(), c.tau / 5.0).unwrap();
        let mut st = QuantumState::new(3, Representation::Mixed).unwrap();
        let f = multiplexed_step(&mut st, 0.4, &c, &u).unwrap();
        assert_eq!(f.len(), 5 * (2 * 3 - 1));
        assert_eq!(f.len(), c.feature_count());
    }

    #[test]
    fn zero_tau_keeps_injected_marginal_constant() {
        let mut c = cfg(2, 0.0);
        c.v_slices = 3;
        let ham = c.resolve_hamiltonian();
        let u = crate::linalg::expm_neg_i_h_t(&ham.matrix().unwrap(), 0.0).unwrap();
        let mut st = QuantumState::new(3, Representation::Mixed).unwrap();
        let f = multiplexed_step(&mut st, 0.7, &c, &u).unwrap();
        // σ_z of the injected qubit equals -s after every slice
        assert_abs_diff_eq!(f[0], -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(f[5], -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(f[10], -0.7, epsilon = 1e-12);
    }

    #[test]
    fn readout_recovers_linear_relation() {
        // y = 2 f1 - f2 + 0.1
        let mut rng = crate::rng::sub_rng(4, "qrc-test", 0);
        use rand::Rng;
        let feats: Vec<Vec<f64>> =
            (0..40).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let ys: Vec<f64> = feats.iter().map(|f| 2.0 * f[0] - f[1] + 0.1).collect();
        let fit = fit_readout(&feats, &ys, 1e-10).unwrap();
        assert_abs_diff_eq!(fit.weights[0], 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.weights[1], -1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.weights[2], 0.1, epsilon = 1e-6);
    }

    #[test]
    fn huge_ridge_shrinks_weights() {
        let feats: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 20.0]).collect();
        let ys: Vec<f64> = feats.iter().map(|f| 3.0 * f[0]).collect();
        let fit = fit_readout(&feats, &ys, 1e9).unwrap();
        assert!(fit.weights[0].abs() < 1e-6);
    }

    #[test]
    fn nmse_examples() {
        assert_eq!(nmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(nmse(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 1.0, epsilon = 1e-15);
        // joint scaling leaves NMSE unchanged
        let p = [0.3, -0.2, 0.8];
        let t = [0.25, -0.3, 0.7];
        let base = nmse(&p, &t).unwrap();
        let ps: Vec<f64> = p.iter().map(|v| v * 7.3).collect();
        let ts: Vec<f64> = t.iter().map(|v| v * 7.3).collect();
        assert_abs_diff_eq!(nmse(&ps, &ts).unwrap(), base, epsilon = 1e-12);
    }

    #[test]
    fn run_qrc_on_cosine_completes() {
        let series: Vec<f64> =
            (0..=120).map(|t| 0.5 * (0.04 * std::f64::consts::PI * t as f64).cos()).collect();
        let out = run_qrc(&cfg(0, 2.8), &series, 100, 20).unwrap();
        assert_eq!(out.predictions.len(), 20);
        assert!(out.nmse_train.is_finite() && out.nmse_pred.is_finite());
    }
}
