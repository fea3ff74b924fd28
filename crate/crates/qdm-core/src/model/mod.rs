//! The quantum discrete map: encoding, ansatz circuits, one-step evolution,
//! the closed-form (1,1) map, multi-channel rollout, and the LECL.

pub mod ansatz;
pub mod config;
pub mod evaluator;
pub mod step;
pub mod trajectory;

pub use ansatz::{build_ansatz, closed_form_circuit, AnsatzCircuit};
pub use config::{Ansatz, ChannelState, LeclParams, QdmConfig};
pub use evaluator::{clamp_value, StepEvaluator, CLAMP_LIMIT};
pub use step::{closed_form_step, qdm_step, step_with_raw, StepOutput};
pub use trajectory::{generate_trajectory, ChannelStep, Trajectory, TrajectoryStep};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};
use crate::quantum::hamiltonian::HamiltonianSpec;
use crate::quantum::noise::NoiseSpec;
use crate::rng::sub_rng;

/// Per-channel trainable parameters plus the channel's fixed Hamiltonian
/// coefficients (TIEA only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub theta: Vec<f64>,
    pub lecl: Option<LeclParams>,
    pub m0: Vec<f64>,
    pub x0: Vec<f64>,
    pub hamiltonian: Option<HamiltonianSpec>,
}

/// The full model: configuration plus per-channel parameter blocks. The
/// three trainable groups are the gate angles, the LECL (A, b), and the
/// initial memories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QdmModel {
    pub config: QdmConfig,
    pub channels: Vec<ChannelModel>,
    /// Combination weights for the channel outputs (all 1 by default).
    pub weights: Vec<f64>,
}

impl QdmModel {
    pub fn new(config: QdmConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_qubits();
        let mut channels = Vec::with_capacity(config.channels);
        for k in 0..config.channels {
            let mut ham_rng = sub_rng(config.seed, "hamiltonian", k as u64);
            let hamiltonian = ansatz::channel_hamiltonian(&config, &mut ham_rng);
            let circuit = ansatz::build_ansatz(&config, hamiltonian.as_ref());
            let mut m0_rng = sub_rng(config.seed, "m0", k as u64);
            let m0 = (0..config.n_m).map(|_| m0_rng.gen_range(-0.5..=0.5)).collect();
            channels.push(ChannelModel {
                theta: vec![0.0; circuit.param_count],
                lecl: config.lecl.then(|| LeclParams::identity(n)),
                m0,
                x0: vec![0.0; config.n_x],
                hamiltonian,
            });
        }
        let weights = config
            .channel_weights
            .clone()
            .unwrap_or_else(|| vec![1.0; config.channels]);
        Ok(Self { config, channels, weights })
    }

    pub fn n_qubits(&self) -> usize {
        self.config.n_qubits()
    }

    /// Rebuild the gate list for one channel (structure is config-derived;
    /// only the Hamiltonian coefficients are per-channel state).
    pub fn circuit(&self, channel: usize) -> Result<AnsatzCircuit> {
        let ch = self.channel(channel)?;
        Ok(ansatz::build_ansatz(&self.config, ch.hamiltonian.as_ref()))
    }

    pub fn channel(&self, k: usize) -> Result<&ChannelModel> {
        self.channels.get(k).ok_or(QdmError::InvalidQubitIndex {
            index: k,
            n_qubits: self.channels.len(),
        })
    }

    /// Split the given initial data across channels: the single channel gets
    /// it verbatim, multiple channels share it equally (the split itself is
    /// trainable for multi-channel models).
    pub fn bind_initial_data(&mut self, x0: &[f64]) -> Result<()> {
        if x0.len() != self.config.n_x {
            return Err(QdmError::DimensionMismatch {
                expected: self.config.n_x,
                actual: x0.len(),
            });
        }
        let m = self.channels.len() as f64;
        for ch in &mut self.channels {
            ch.x0 = x0.iter().map(|v| v / m).collect();
        }
        Ok(())
    }

    pub fn initial_state(&self, channel: usize) -> Result<ChannelState> {
        let ch = self.channel(channel)?;
        Ok(ChannelState::new(
            ch.m0.iter().map(|v| clamp_value(*v)).collect(),
            ch.x0.iter().map(|v| clamp_value(*v)).collect(),
        ))
    }

    /// Build the per-channel step evaluator for the current parameters.
    pub fn evaluator(&self, channel: usize, noise: Option<&NoiseSpec>) -> Result<StepEvaluator> {
        let ch = self.channel(channel)?;
        let circuit = self.circuit(channel)?;
        evaluator::validate_circuit(&circuit.layers, self.n_qubits())?;
        let ham_u = match &ch.hamiltonian {
            Some(h) => Some(h.unitary()?),
            None => None,
        };
        StepEvaluator::build_cached(
            &circuit.layers,
            &ch.theta,
            self.n_qubits(),
            noise,
            ham_u.as_ref(),
        )
    }

    /// Serialize to the checkpoint document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: QdmModel = serde_json::from_str(s)
            .map_err(|e| QdmError::InvalidConfig(format!("checkpoint parse error: {e}")))?;
        model.config.validate()?;
        for ch in &model.channels {
            if let Some(l) = &ch.lecl {
                l.validate()?;
            }
            if let Some(h) = &ch.hamiltonian {
                h.validate()?;
            }
        }
        Ok(model)
    }
}
