//! Noise model: depolarizing, amplitude damping, and readout response.

use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};
use crate::quantum::state::QuantumState;

/// Where depolarizing noise is injected during a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePlacement {
    PerGate,
    #[default]
    PerLayer,
    PerStep,
}

/// Whether the depolarizing channel acts on the whole register (I/2ⁿ mixing)
/// or qubit by qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DepolarizingScope {
    #[default]
    Global,
    PerQubit,
}

/// Readout response: a column-stochastic matrix mapping ideal outcome
/// probabilities to observed ones. A 2x2 matrix applies independently to
/// every qubit; a full 2ⁿ x 2ⁿ matrix applies to the joint distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadoutMatrix {
    PerQubit([[f64; 2]; 2]),
    Full(Vec<Vec<f64>>),
}

impl ReadoutMatrix {
    /// Symmetric per-qubit bit flip with probability ε.
    pub fn symmetric_flip(epsilon: f64) -> Self {
        ReadoutMatrix::PerQubit([[1.0 - epsilon, epsilon], [epsilon, 1.0 - epsilon]])
    }

    fn check_column_stochastic(cols: usize, get: impl Fn(usize, usize) -> f64) -> Result<()> {
        for c in 0..cols {
            let mut sum = 0.0;
            for r in 0..cols {
                let v = get(r, c);
                if v < 0.0 {
                    return Err(QdmError::DomainViolation { value: v, domain: "[0, 1]" });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(QdmError::NonStochasticMatrix { column: c, sum });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReadoutMatrix::PerQubit(m) => {
                Self::check_column_stochastic(2, |r, c| m[r][c])
            }
            ReadoutMatrix::Full(m) => {
                let n = m.len();
                for row in m {
                    if row.len() != n {
                        return Err(QdmError::DimensionMismatch { expected: n, actual: row.len() });
                    }
                }
                Self::check_column_stochastic(n, |r, c| m[r][c])
            }
        }
    }
}

/// Composite noise description for one QDM step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Depolarizing probability per application site.
    #[serde(default)]
    pub depolarizing_p: f64,
    /// Amplitude damping strength, applied once per qubit per step.
    #[serde(default)]
    pub amp_damp_gamma: f64,
    /// Optional readout response matrix.
    #[serde(default)]
    pub readout: Option<ReadoutMatrix>,
    #[serde(default)]
    pub placement: NoisePlacement,
    #[serde(default)]
    pub scope: DepolarizingScope,
    /// Std-dev of additive Gaussian perturbation on measured expectations,
    /// emulating shot noise. Zero disables it.
    #[serde(default)]
    pub shot_sigma: f64,
}

impl NoiseSpec {
    pub fn depolarizing(p: f64) -> Self {
        Self {
            depolarizing_p: p,
            amp_damp_gamma: 0.0,
            readout: None,
            placement: NoisePlacement::default(),
            scope: DepolarizingScope::default(),
            shot_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.depolarizing_p, self.amp_damp_gamma] {
            if !(0.0..=1.0).contains(&v) {
                return Err(QdmError::DomainViolation { value: v, domain: "[0, 1]" });
            }
        }
        if self.shot_sigma < 0.0 || !self.shot_sigma.is_finite() {
            return Err(QdmError::DomainViolation { value: self.shot_sigma, domain: "[0, inf)" });
        }
        if let Some(r) = &self.readout {
            r.validate()?;
        }
        Ok(())
    }

    /// Apply one depolarizing site to the state per the configured scope.
    pub fn apply_depolarizing_site(&self, state: &mut QuantumState) -> Result<()> {
        if self.depolarizing_p == 0.0 {
            return Ok(());
        }
        match self.scope {
            DepolarizingScope::Global => state.depolarize_global(self.depolarizing_p),
            DepolarizingScope::PerQubit => {
                for q in 0..state.n_qubits() {
                    state.depolarize_qubit(self.depolarizing_p, q)?;
                }
                Ok(())
            }
        }
    }
}

/// p_obs = M · p_ideal on a probability vector.
pub fn apply_readout_error(p_ideal: &[f64], m: &ReadoutMatrix) -> Result<Vec<f64>> {
    m.validate()?;
    let total: f64 = p_ideal.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(QdmError::DomainViolation { value: total, domain: "probability simplex" });
    }
    let dim = p_ideal.len();
    match m {
        ReadoutMatrix::Full(mat) => {
            if mat.len() != dim {
                return Err(QdmError::DimensionMismatch { expected: dim, actual: mat.len() });
            }
            let mut out = vec![0.0; dim];
            for (r, row) in mat.iter().enumerate() {
                out[r] = row.iter().zip(p_ideal.iter()).map(|(a, b)| a * b).sum();
            }
            Ok(out)
        }
        ReadoutMatrix::PerQubit(m2) => {
            if !dim.is_power_of_two() {
                return Err(QdmError::DimensionMismatch { expected: dim.next_power_of_two(), actual: dim });
            }
            let n = dim.trailing_zeros() as usize;
            let mut p = p_ideal.to_vec();
            for q in 0..n {
                let stride = 1usize << q;
                let mut next = vec![0.0; dim];
                for (b, pb) in p.iter().enumerate() {
                    let bit = (b >> q) & 1;
                    next[b & !stride] += m2[0][bit] * pb;
                    next[b | stride] += m2[1][bit] * pb;
                }
                p = next;
            }
            Ok(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_readout_is_noop() {
        let m = ReadoutMatrix::PerQubit([[1.0, 0.0], [0.0, 1.0]]);
        let p = vec![0.25, 0.25, 0.25, 0.25];
        let out = apply_readout_error(&p, &m).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn single_qubit_flip_example() {
        // M = [[0.9, 0.1], [0.1, 0.9]], p = (1, 0) -> (0.9, 0.1), z = 0.8
        let m = ReadoutMatrix::symmetric_flip(0.1);
        let out = apply_readout_error(&[1.0, 0.0], &m).unwrap();
        assert_abs_diff_eq!(out[0], 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(out[0] - out[1], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn uniform_is_fixed_point_of_symmetric_flip() {
        let m = ReadoutMatrix::symmetric_flip(0.23);
        let out = apply_readout_error(&[0.5, 0.5], &m).unwrap();
        assert_abs_diff_eq!(out[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn per_qubit_expansion_preserves_total() {
        let m = ReadoutMatrix::PerQubit([[0.95, 0.2], [0.05, 0.8]]);
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let out = apply_readout_error(&p, &m).unwrap();
        assert_abs_diff_eq!(out.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn non_stochastic_rejected() {
        let m = ReadoutMatrix::PerQubit([[0.9, 0.1], [0.2, 0.9]]);
        assert!(apply_readout_error(&[1.0, 0.0], &m).is_err());
        let m = ReadoutMatrix::PerQubit([[1.1, 0.0], [-0.1, 1.0]]);
        assert!(apply_readout_error(&[1.0, 0.0], &m).is_err());
    }

    #[test]
    fn bad_probability_vector_rejected() {
        let m = ReadoutMatrix::symmetric_flip(0.1);
        assert!(apply_readout_error(&[0.9, 0.0], &m).is_err());
    }
}
