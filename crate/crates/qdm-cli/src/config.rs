//! Experiment configuration schema and shipped presets.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use qdm_core::model::{Ansatz, QdmConfig};
use qdm_core::qrc::QrcConfig;
use qdm_core::quantum::noise::{NoiseSpec, ReadoutMatrix};
use qdm_core::signals::{RayleighSpec, SignalComponent, SignalSpec, Trig};
use qdm_core::training::{GradientMethod, ThetaInit, TrainConfig, TrainStage};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Cosine,
    CompositePeriodic,
    CompositeAperiodic,
    Rayleigh,
    QrcCompare,
    NoiseLongterm,
    LeclCalibrate,
    TheoryCheck,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Cosine => "cosine",
            Task::CompositePeriodic => "composite-periodic",
            Task::CompositeAperiodic => "composite-aperiodic",
            Task::Rayleigh => "rayleigh",
            Task::QrcCompare => "qrc-compare",
            Task::NoiseLongterm => "noise-longterm",
            Task::LeclCalibrate => "lecl-calibrate",
            Task::TheoryCheck => "theory-check",
        }
    }
}

/// Settings for the grid-calibration workflow.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Grid points per axis over [-1, 1] (>= 5).
    pub resolution: usize,
    /// Rollout steps for the with-LECL deviation check.
    #[serde(default = "default_calib_rollout")]
    pub rollout_steps: usize,
}

fn default_calib_rollout() -> usize {
    25
}

/// QRC sweep settings for the comparison task.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QrcSweepConfig {
    pub base: QrcConfig,
    pub taus: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub task: Task,
    pub seed: u64,
    pub out_dir: String,
    #[serde(default)]
    pub model: Option<QdmConfig>,
    #[serde(default)]
    pub train: Option<TrainConfig>,
    #[serde(default)]
    pub signal: Option<SignalSpec>,
    #[serde(default)]
    pub rayleigh: Option<RayleighSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub qrc: Option<QrcSweepConfig>,
    #[serde(default)]
    pub calibration: Option<CalibrationConfig>,
}

impl ExperimentConfig {
    /// Validate cross-field consistency, listing every offending field.
    pub fn validate(&self) -> anyhow::Result<()> {
        let mut problems = Vec::new();
        if self.version != SCHEMA_VERSION {
            problems.push(format!(
                "version: expected {SCHEMA_VERSION}, got {}",
                self.version
            ));
        }
        let needs_model = matches!(
            self.task,
            Task::Cosine
                | Task::CompositePeriodic
                | Task::CompositeAperiodic
                | Task::Rayleigh
                | Task::QrcCompare
                | Task::NoiseLongterm
                | Task::LeclCalibrate
        );
        if needs_model {
            match &self.model {
                None => problems.push("model: required for this task".into()),
                Some(m) => {
                    if let Err(e) = m.validate() {
                        problems.push(format!("model: {e}"));
                    }
                }
            }
        }
        let needs_train = matches!(
            self.task,
            Task::Cosine
                | Task::CompositePeriodic
                | Task::CompositeAperiodic
                | Task::Rayleigh
                | Task::QrcCompare
                | Task::NoiseLongterm
        );
        if needs_train {
            match &self.train {
                None => problems.push("train: required for this task".into()),
                Some(t) => {
                    if let Err(e) = t.validate() {
                        problems.push(format!("train: {e}"));
                    }
                }
            }
        }
        match self.task {
            Task::Rayleigh => {
                if self.rayleigh.is_none() {
                    problems.push("rayleigh: required for this task".into());
                } else if let Err(e) = self.rayleigh.as_ref().unwrap().validate() {
                    problems.push(format!("rayleigh: {e}"));
                }
            }
            Task::Cosine
            | Task::CompositePeriodic
            | Task::CompositeAperiodic
            | Task::QrcCompare
            | Task::NoiseLongterm => {
                if self.signal.is_none() {
                    problems.push("signal: required for this task".into());
                } else if let Err(e) = self.signal.as_ref().unwrap().validate() {
                    problems.push(format!("signal: {e}"));
                }
            }
            _ => {}
        }
        if self.task == Task::QrcCompare {
            match &self.qrc {
                None => problems.push("qrc: required for qrc-compare".into()),
                Some(q) => {
                    if let Err(e) = q.base.validate() {
                        problems.push(format!("qrc.base: {e}"));
                    }
                    if q.taus.is_empty() {
                        problems.push("qrc.taus: must be non-empty".into());
                    }
                    if q.seeds.is_empty() {
                        problems.push("qrc.seeds: must be non-empty".into());
                    }
                }
            }
        }
        if self.task == Task::LeclCalibrate {
            match &self.calibration {
                None => problems.push("calibration: required for lecl-calibrate".into()),
                Some(c) => {
                    if c.resolution < 5 {
                        problems.push("calibration.resolution: must be >= 5".into());
                    }
                }
            }
            if self.noise.is_none() {
                problems.push("noise: required for lecl-calibrate".into());
            }
        }
        if let Some(ns) = &self.noise {
            if let Err(e) = ns.validate() {
                problems.push(format!("noise: {e}"));
            }
        }
        if !problems.is_empty() {
            bail!("invalid config:\n  - {}", problems.join("\n  - "));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(s).context("config schema error")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization")
    }
}

fn hea_model(channels: usize, seed: u64) -> QdmConfig {
    QdmConfig {
        n_m: 1,
        n_x: 1,
        ansatz: Ansatz::Hea,
        depth: 1,
        channels,
        seed,
        tiea_tau: 1.0,
        lecl: true,
        channel_weights: None,
        train_weights: false,
    }
}

fn standard_train(seed: u64, predict_len: usize) -> TrainConfig {
    TrainConfig {
        train_len: 100,
        predict_len,
        epochs: 4000,
        learning_rate: 0.01,
        beta1: 0.9,
        beta2: 0.999,
        epsilon: 1e-8,
        seed,
        gradient_method: GradientMethod::ParameterShiftRecurrence,
        extra_stages: vec![
            TrainStage { epochs: 2000, learning_rate: 1e-3 },
            TrainStage { epochs: 1000, learning_rate: 1e-4 },
        ],
        restarts: 3,
        theta_init: ThetaInit::Spectral { scale: 0.1 },
    }
}

fn cosine_signal() -> SignalSpec {
    SignalSpec {
        components: vec![SignalComponent {
            amplitude: 0.5,
            omega: 0.04 * PI,
            phase: 0.0,
            kind: Trig::Cos,
        }],
        delta: 0.04,
    }
}

/// Shipped presets, one per supported experiment.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let seed = 42;
    let w = 0.04 * PI;
    let cfg = match name {
        "cosine" => ExperimentConfig {
            version: SCHEMA_VERSION,
            task: Task::Cosine,
            seed,
            out_dir: "runs/cosine".into(),
            model: Some(hea_model(1, seed)),
            train: Some(standard_train(seed, 100)),
            signal: Some(cosine_signal()),
            rayleigh: None,
            noise: None,
            qrc: None,
            calibration: None,
        },
        "composite-periodic" => ExperimentConfig {
            version: SCHEMA_VERSION,
            task: Task::CompositePeriodic,
            seed,
            out_dir: "runs/composite-periodic".into(),
            model: Some(hea_model(2, seed)),
            train: Some(standard_train(seed, 100)),
            signal: Some(SignalSpec {
                components: vec![
                    SignalComponent { amplitude: 0.2, omega: w, phase: 0.0, kind: Trig::Cos },
                    SignalComponent {
                        amplitude: 0.3,
                        omega: 2.0 * w,
                        phase: 0.0,
                        kind: Trig::Sin,
                    },
                ],
                delta: 0.04,
            }),
            rayleigh: None,
            noise: None,
            qrc: None,
            calibration: None,
        },
        "composite-aperiodic" => ExperimentConfig {
            version: SCHEMA_VERSION,
            task: Task::CompositeAperiodic,
            seed,
            out_dir: "runs/composite-aperiodic".into(),
            model: Some(hea_model(2, seed)),
            train: Some(standard_train(seed, 100)),
            signal: Some(SignalSpec {
                components: vec![
                    SignalComponent { amplitude: 0.2, omega: w, phase: 0.0, kind: Trig::Cos },
                    SignalComponent {
                        amplitude: 0.3,
                        omega: 5f64.sqrt() * w,
                        phase: 0.0,
                        kind: Trig::Sin,
                    },
                ],
                delta: 0.04,
            }),
            rayleigh: None,
            noise: None,
            qrc: None,
            calibration: None,
        },
        "rayleigh" => ExperimentConfig {
            version: SCHEMA_VERSION,
            task: Task::Rayleigh,
            seed,
            out_dir: "runs/rayleigh".into(),
            model: Some(QdmConfig {
                n_m: 1,
                n_x: 2,
                ansatz: Ansatz::Tiea,
                depth: 2,
                channels: 1,
                seed,
                tiea_tau: 1.0,
                lecl: true,
                channel_weights: None,
                train_weights: false,
            }),
            train: Some(TrainConfig {
                train_len: 100,
                predict_len: 100,
                epochs: 1500,
                learning_rate: 0.02,
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 1e-8,
                seed,
                gradient_method: GradientMethod::ParameterShiftRecurrence,
                extra_stages: vec![
                    TrainStage { epochs: 700, learning_rate: 0.004 },
                    TrainStage { epochs: 300, learning_rate: 0.001 },
                ],
                restarts: 4,
                theta_init: ThetaInit::Uniform { scale: 0.3 },
            }),
            signal: None,
            rayleigh: Some(RayleighSpec {
                epsilon: PI,
                delta: 3.0,
                omega: PI,
                x0: 0.0,
                v0: 0.01,
                dt: 1e-3,
                steps: 100 * 200,
                subsample: 100,
            }),
            noise: None,
            qrc: None,
            calibration: None,
        },
        "qrc-compare" => ExperimentConfig {
            version: SCHEMA_VERSION,
            task: Task::QrcCompare,
            seed,
            out_dir: "runs/qrc-compare".into(),
            model: Some(hea_model(1, seed)),
            train: Some(standard_train(seed, 100)),
            signal: Some(cosine_signal()),
            rayleigh: None,
            noise: None,
            qrc: Some(QrcSweepConfig {
                base: QrcConfig {
                    n_qubits: 3,
                    tau: 2.8,
                    v_slices: 5,
                    hamiltonian: None,
                    washout: 10,
                    ridge: 1e-8,
                    seed,
                },
                taus: vec![2.6, 2.8, 3.0],
                seeds: (0..7).collect(),
            }),
            calibration: None,
        },
        "noise-longterm" => ExperimentConfig {
            version: SCHEMA_VERSION,
            task: Task::NoiseLongterm,
            seed,
            out_dir: "runs/noise-longterm".into(),
            model: Some(hea_model(1, seed)),
            train: Some(standard_train(seed, 1000)),
            signal: Some(cosine_signal()),
            rayleigh: None,
            noise: Some(NoiseSpec::depolarizing(0.01)),
            qrc: None,
            calibration: None,
        },
        "lecl-calibrate" => ExperimentConfig {
            version: SCHEMA_VERSION,
            task: Task::LeclCalibrate,
            seed,
            out_dir: "runs/lecl-calibrate".into(),
            model: Some(hea_model(1, seed)),
            train: None,
            signal: None,
            rayleigh: None,
            noise: Some(NoiseSpec {
                depolarizing_p: 0.1,
                amp_damp_gamma: 0.05,
                readout: Some(ReadoutMatrix::symmetric_flip(0.05)),
                shot_sigma: 0.0,
                ..NoiseSpec::depolarizing(0.1)
            }),
            qrc: None,
            calibration: Some(CalibrationConfig { resolution: 9, rollout_steps: 25 }),
        },
        "theory-check" => ExperimentConfig {
            version: SCHEMA_VERSION,
            task: Task::TheoryCheck,
            seed,
            out_dir: "runs/theory-check".into(),
            model: None,
            train: None,
            signal: None,
            rayleigh: None,
            noise: None,
            qrc: None,
            calibration: None,
        },
        _ => return None,
    };
    Some(cfg)
}

pub const PRESET_NAMES: &[&str] = &[
    "cosine",
    "composite-periodic",
    "composite-aperiodic",
    "rayleigh",
    "qrc-compare",
    "noise-longterm",
    "lecl-calibrate",
    "theory-check",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            // JSON roundtrip preserves the config
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back.task, cfg.task);
        }
    }

    #[test]
    fn unknown_preset_is_none() {
        assert!(preset("nope").is_none());
    }

    #[test]
    fn invalid_config_lists_fields() {
        let mut cfg = preset("cosine").unwrap();
        cfg.model = None;
        cfg.signal = None;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("model:"));
        assert!(err.contains("signal:"));
    }
}
