//! Training: MSE loss, parameter-shift gradients, Adam, the train/predict
//! protocol, and LECL calibration.

pub mod adam;
pub mod gradient;
pub mod lecl_fit;
pub mod params;

pub use adam::Adam;
pub use gradient::{
    accumulate_sensitivities, finite_difference_gradient, loss_gradient, mse_loss, rollout_loss,
    step_partials, SensitivityTable, StepPartials,
};
pub use lecl_fit::{fit_lecl, fit_lecl_bfgs, max_residual, LeclFit};
pub use params::{ParamGroup, ParamLayout};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};
use crate::model::{generate_trajectory, Ansatz, QdmModel};
use crate::quantum::noise::NoiseSpec;
use crate::rng::sub_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    #[default]
    ParameterShiftRecurrence,
    FiniteDifference,
}

/// How gate angles are initialized per restart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaInit {
    /// Uniform in [-scale, scale].
    Uniform { scale: f64 },
    /// Seed rotation angles from the dominant FFT frequencies of the
    /// training window (2-qubit HEA channels only; others fall back to
    /// Uniform with the given scale).
    Spectral { scale: f64 },
}

impl Default for ThetaInit {
    fn default() -> Self {
        ThetaInit::Uniform { scale: 0.2 }
    }
}

fn default_lr() -> f64 {
    0.01
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_epochs() -> usize {
    2000
}
fn default_restarts() -> usize {
    1
}

/// One stage of the learning-rate schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainStage {
    pub epochs: usize,
    pub learning_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Training length L (the series has L + 1 points including t = 0).
    pub train_len: usize,
    /// Prediction horizon T.
    pub predict_len: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    pub seed: u64,
    #[serde(default)]
    pub gradient_method: GradientMethod,
    /// Extra schedule stages run after the primary epochs (lr decay).
    #[serde(default)]
    pub extra_stages: Vec<TrainStage>,
    /// Independent seeded restarts; the best final training loss wins.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub theta_init: ThetaInit,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_len < 1 {
            return Err(QdmError::InvalidConfig("train_len must be >= 1".into()));
        }
        if self.restarts < 1 {
            return Err(QdmError::InvalidConfig("restarts must be >= 1".into()));
        }
        for v in [self.learning_rate, self.beta1, self.beta2, self.epsilon] {
            if !v.is_finite() || v < 0.0 {
                return Err(QdmError::InvalidConfig("optimizer settings must be finite".into()));
            }
        }
        Ok(())
    }

    fn stages(&self) -> Vec<TrainStage> {
        let mut s = vec![TrainStage { epochs: self.epochs, learning_rate: self.learning_rate }];
        s.extend(self.extra_stages.iter().copied());
        s
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: QdmModel,
    /// Per-epoch training loss of the winning restart.
    pub loss_history: Vec<f64>,
    pub best_restart: usize,
    pub final_loss: f64,
}

/// Dominant angular frequencies (rad/step) of a scalar series, DC excluded.
fn dominant_frequencies(series: &[f64], count: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut mags: Vec<(usize, f64)> = Vec::new();
    for k in 1..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in series.iter().enumerate() {
            let phi = 2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
            re += (v - mean) * phi.cos();
            im -= (v - mean) * phi.sin();
        }
        mags.push((k, (re * re + im * im).sqrt()));
    }
    mags.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut freqs: Vec<f64> = mags
        .iter()
        .take(count)
        .map(|(k, _)| 2.0 * std::f64::consts::PI * *k as f64 / n as f64)
        .collect();
    while freqs.len() < count {
        freqs.push(0.1 * (freqs.len() + 1) as f64);
    }
    freqs
}

/// Initialize trainables for one restart (θ per scheme, m0 ~ U[-0.5, 0.5],
/// x0 an even split of the bound initial data, LECL at identity).
///
/// The spectral scheme seeds the circuit with a rotation at the dominant
/// frequency of the training window: directly on the R_Y pair for the
/// 2-qubit HEA, and through RX·RZ·RX ≅ R_Y triplets on the data qubits for
/// the triplet ansätze (the identity RX(π/2)·RZ(−φ)·RX(−π/2) = R_Y(φ)).
fn init_restart(model: &mut QdmModel, target: &[Vec<f64>], cfg: &TrainConfig, restart: usize) {
    use std::f64::consts::FRAC_PI_2;
    let channels = model.channels.len();
    let depth = model.config.depth;
    let (n_m, n_x) = (model.config.n_m, model.config.n_x);
    let scalar_target: Vec<f64> = target.iter().map(|v| v[0]).collect();
    let pair_hea = model.config.ansatz == Ansatz::Hea && model.config.n_qubits() == 2;
    let freqs = dominant_frequencies(&scalar_target, channels);
    for k in 0..channels {
        let mut rng = sub_rng(cfg.seed, "train-init", (restart * channels + k) as u64);
        let theta_len = model.channels[k].theta.len();
        let theta: Vec<f64> = match cfg.theta_init {
            ThetaInit::Uniform { scale } => {
                (0..theta_len).map(|_| rng.gen_range(-scale..=scale)).collect()
            }
            ThetaInit::Spectral { scale } => {
                let w = freqs[k];
                let mut t: Vec<f64> =
                    (0..theta_len).map(|_| rng.gen_range(-scale..=scale)).collect();
                if pair_hea {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    // degenerate 2-qubit form: one R_Y angle per qubit
                    for layer in 0..depth {
                        t[2 * layer] = -sign * w / depth as f64;
                        t[2 * layer + 1] = sign * w / depth as f64;
                    }
                } else {
                    // triplet form: data qubits carry R_Y(±w/D) per layer
                    let signs: Vec<f64> = (0..n_x)
                        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                        .collect();
                    let n = n_m + n_x;
                    for layer in 0..depth {
                        for q in n_m..n {
                            let base = 3 * (layer * n + q);
                            if base + 2 < theta_len {
                                let jitter = rng.gen_range(-scale..=scale);
                                t[base] = FRAC_PI_2 + jitter * 0.1;
                                t[base + 1] = -signs[q - n_m] * w / depth as f64;
                                t[base + 2] = -FRAC_PI_2 + jitter * 0.1;
                            }
                        }
                    }
                }
                t
            }
        };
        model.channels[k].theta = theta;
        model.channels[k].m0 =
            (0..model.config.n_m).map(|_| rng.gen_range(-0.5..=0.5)).collect();
        if let Some(l) = &mut model.channels[k].lecl {
            *l = crate::model::LeclParams::identity(model.config.n_qubits());
        }
    }
    let x0: Vec<f64> = target[0].clone();
    model.bind_initial_data(&x0).expect("dimension checked by caller");
}

/// Train the model on the series x_{0:L} (length L + 1 including the
/// initial point). Deterministic given the config seed.
pub fn train(
    model: &QdmModel,
    target: &[Vec<f64>],
    cfg: &TrainConfig,
    noise: Option<&NoiseSpec>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if target.len() != cfg.train_len + 1 {
        return Err(QdmError::LengthMismatch {
            left: target.len(),
            right: cfg.train_len + 1,
        });
    }
    for row in target {
        if row.len() != model.config.n_x {
            return Err(QdmError::DimensionMismatch {
                expected: model.config.n_x,
                actual: row.len(),
            });
        }
    }

    let layout = ParamLayout::of(model)?;
    let mut best: Option<TrainOutcome> = None;
    for restart in 0..cfg.restarts {
        let mut work = model.clone();
        init_restart(&mut work, target, cfg, restart);
        let mut values = layout.get(&work);
        let mut opt = Adam::new(values.len(), cfg.beta1, cfg.beta2, cfg.epsilon);
        let mut history = Vec::new();
        for stage in cfg.stages() {
            for _ in 0..stage.epochs {
                let grad = match cfg.gradient_method {
                    GradientMethod::ParameterShiftRecurrence => {
                        loss_gradient(&work, target, noise)?
                    }
                    GradientMethod::FiniteDifference => {
                        finite_difference_gradient(&work, target, 1e-5, noise)?
                    }
                };
                let loss = rollout_loss(&work, target, noise)?;
                if !loss.is_finite() {
                    return Err(QdmError::TrainingDiverged(format!(
                        "non-finite loss at epoch {} of restart {restart}",
                        history.len()
                    )));
                }
                history.push(loss);
                opt.update(&mut values, &grad, stage.learning_rate);
                layout.set(&mut work, &values)?;
            }
        }
        let final_loss = rollout_loss(&work, target, noise)?;
        history.push(final_loss);
        let outcome = TrainOutcome { model: work, loss_history: history, best_restart: restart, final_loss };
        let better = match &best {
            None => true,
            Some(b) => outcome.final_loss < b.final_loss,
        };
        if better {
            best = Some(outcome);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Continue the autoregressive rollout for `horizon` steps past `train_len`
/// and return x̂_{L+1:L+T}. The model rolls from t = 0; the trained initial
/// conditions fully determine the trajectory.
pub fn predict(
    model: &QdmModel,
    train_len: usize,
    horizon: usize,
    noise: Option<&NoiseSpec>,
) -> Result<Vec<Vec<f64>>> {
    if horizon == 0 {
        return Ok(Vec::new());
    }
    let traj = generate_trajectory(model, train_len + horizon, noise)?;
    Ok(traj.combined_series()[train_len + 1..].to_vec())
}
