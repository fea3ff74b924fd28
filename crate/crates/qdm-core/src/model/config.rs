//! Model configuration and parameter containers.

use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ansatz {
    /// Transverse Ising evolution ansatz: per-qubit RX·RZ·RX followed by
    /// fixed Hamiltonian evolution, per layer.
    Tiea,
    /// Hardware-efficient ansatz: CZ entanglers plus parametrized rotations,
    /// per layer. The 2-qubit case degenerates to CZ + R_Y per qubit.
    Hea,
}

fn default_tau() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QdmConfig {
    /// Memory qubits.
    pub n_m: usize,
    /// Data qubits.
    pub n_x: usize,
    pub ansatz: Ansatz,
    /// Ansatz layers D.
    pub depth: usize,
    /// Linear-composite channels M.
    pub channels: usize,
    pub seed: u64,
    /// Hamiltonian evolution duration per TIEA layer.
    #[serde(default = "default_tau")]
    pub tiea_tau: f64,
    /// Whether the model carries a learnable error-cancellation layer.
    #[serde(default)]
    pub lecl: bool,
    /// Optional fixed per-channel combination weights (defaults to all 1).
    #[serde(default)]
    pub channel_weights: Option<Vec<f64>>,
    /// Train the combination weights (only meaningful when they are set).
    #[serde(default)]
    pub train_weights: bool,
}

impl QdmConfig {
    pub fn n_qubits(&self) -> usize {
        self.n_m + self.n_x
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_m < 1 || self.n_x < 1 {
            return Err(QdmError::InvalidConfig(
                "n_m and n_x must both be at least 1".into(),
            ));
        }
        if self.n_qubits() > crate::quantum::MAX_QUBITS {
            return Err(QdmError::InvalidQubitCount(self.n_qubits()));
        }
        if self.depth < 1 {
            return Err(QdmError::InvalidConfig("depth must be at least 1".into()));
        }
        if self.channels < 1 {
            return Err(QdmError::InvalidConfig("channels must be at least 1".into()));
        }
        if let Some(w) = &self.channel_weights {
            if w.len() != self.channels {
                return Err(QdmError::InvalidConfig(format!(
                    "channel_weights length {} does not match channels {}",
                    w.len(),
                    self.channels
                )));
            }
        }
        if !self.tiea_tau.is_finite() {
            return Err(QdmError::NonFinite("tiea_tau"));
        }
        Ok(())
    }
}

/// Learnable error-cancellation layer: v ↦ A·v + b on measured expectations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeclParams {
    /// Row-major n×n matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl LeclParams {
    pub fn identity(n: usize) -> Self {
        let a = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { a, b: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.b.len();
        if self.a.len() != n {
            return Err(QdmError::DimensionMismatch { expected: n, actual: self.a.len() });
        }
        for row in &self.a {
            if row.len() != n {
                return Err(QdmError::DimensionMismatch { expected: n, actual: row.len() });
            }
            if !row.iter().all(|v| v.is_finite()) {
                return Err(QdmError::NonFinite("LECL matrix entry"));
            }
        }
        if !self.b.iter().all(|v| v.is_finite()) {
            return Err(QdmError::NonFinite("LECL bias entry"));
        }
        Ok(())
    }

    /// A·v + b (clamping is the caller's concern).
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(QdmError::DimensionMismatch { expected: self.dim(), actual: v.len() });
        }
        Ok(self
            .a
            .iter()
            .zip(self.b.iter())
            .map(|(row, bi)| row.iter().zip(v.iter()).map(|(a, x)| a * x).sum::<f64>() + bi)
            .collect())
    }
}

/// Per-channel classical state: memory and data expectations in [-1, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub m: Vec<f64>,
    pub x: Vec<f64>,
}

impl ChannelState {
    pub fn new(m: Vec<f64>, x: Vec<f64>) -> Self {
        Self { m, x }
    }

    pub fn concat(&self) -> Vec<f64> {
        self.m.iter().chain(self.x.iter()).copied().collect()
    }

    pub fn from_concat(v: &[f64], n_m: usize) -> Self {
        Self { m: v[..n_m].to_vec(), x: v[n_m..].to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        for v in self.m.iter().chain(self.x.iter()) {
            if !v.is_finite() || v.abs() > 1.0 {
                return Err(QdmError::DomainViolation { value: *v, domain: "[-1, 1]" });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut cfg = QdmConfig {
            n_m: 1,
            n_x: 1,
            ansatz: Ansatz::Hea,
            depth: 1,
            channels: 1,
            seed: 0,
            tiea_tau: 1.0,
            lecl: false,
            channel_weights: None,
            train_weights: false,
        };
        assert!(cfg.validate().is_ok());
        cfg.n_m = 0;
        assert!(cfg.validate().is_err());
        cfg.n_m = 4;
        cfg.n_x = 4;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn lecl_apply_examples() {
        let id = LeclParams::identity(2);
        assert_eq!(id.apply(&[0.3, -0.2]).unwrap(), vec![0.3, -0.2]);

        // (1/0.81)·I on (0.405, 0.405) inverts a two-layer p=0.1 depolarizing scaling
        let inv = LeclParams {
            a: vec![vec![1.0 / 0.81, 0.0], vec![0.0, 1.0 / 0.81]],
            b: vec![0.0, 0.0],
        };
        let out = inv.apply(&[0.405, 0.405]).unwrap();
        assert!((out[0] - 0.5).abs() < 1e-12 && (out[1] - 0.5).abs() < 1e-12);

        // diag(2,2), b=(-1,-1) on (0.75, 0.5) -> (0.5, 0.0)
        let aff = LeclParams { a: vec![vec![2.0, 0.0], vec![0.0, 2.0]], b: vec![-1.0, -1.0] };
        let out = aff.apply(&[0.75, 0.5]).unwrap();
        assert!((out[0] - 0.5).abs() < 1e-12 && out[1].abs() < 1e-12);
    }

    #[test]
    fn lecl_dimension_mismatch() {
        let id = LeclParams::identity(2);
        assert!(id.apply(&[0.1]).is_err());
    }
}
