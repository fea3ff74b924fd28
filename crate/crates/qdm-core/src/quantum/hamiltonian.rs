//! Transverse-field Ising Hamiltonian H = Σ hᵢ σ_x,i + Σ_{i>j} J_ij σ_z,i σ_z,j
//! and its exact time evolution exp(-iHτ).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};
use crate::linalg::{expm_neg_i_h_t, CMat, C64};
use crate::quantum::state::QuantumState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n_qubits: usize,
    /// Transverse fields h_i, one per qubit.
    pub h: Vec<f64>,
    /// ZZ couplings J_ij for i > j; row i holds entries j = 0..i.
    pub j: Vec<Vec<f64>>,
    /// Evolution duration τ.
    pub tau: f64,
}

impl HamiltonianSpec {
    /// Coefficients drawn uniformly from [-1, 1], fixed thereafter.
    pub fn random<R: Rng>(n_qubits: usize, tau: f64, rng: &mut R) -> Self {
        let h = (0..n_qubits).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let j = (0..n_qubits)
            .map(|i| (0..i).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            .collect();
        Self { n_qubits, h, j, tau }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.len() != self.n_qubits || self.j.len() != self.n_qubits {
            return Err(QdmError::DimensionMismatch {
                expected: self.n_qubits,
                actual: self.h.len().min(self.j.len()),
            });
        }
        for (i, row) in self.j.iter().enumerate() {
            if row.len() != i {
                return Err(QdmError::DimensionMismatch { expected: i, actual: row.len() });
            }
        }
        let finite = self.h.iter().all(|v| v.is_finite())
            && self.j.iter().flatten().all(|v| v.is_finite())
            && self.tau.is_finite();
        if !finite {
            return Err(QdmError::NonFinite("Hamiltonian coefficients"));
        }
        Ok(())
    }

    /// Dense matrix of H.
    pub fn matrix(&self) -> Result<CMat> {
        self.validate()?;
        let dim = 1usize << self.n_qubits;
        let mut m = CMat::zeros(dim);
        for b in 0..dim {
            // diagonal ZZ part
            let mut diag = 0.0;
            for i in 1..self.n_qubits {
                let zi = if b & (1 << i) == 0 { 1.0 } else { -1.0 };
                for (jq, jij) in self.j[i].iter().enumerate() {
                    let zj = if b & (1 << jq) == 0 { 1.0 } else { -1.0 };
                    diag += jij * zi * zj;
                }
            }
            m.set(b, b, C64::new(diag, 0.0));
            // off-diagonal X part
            for (i, hi) in self.h.iter().enumerate() {
                let flipped = b ^ (1 << i);
                let v = m.get(flipped, b) + C64::new(*hi, 0.0);
                m.set(flipped, b, v);
            }
        }
        Ok(m)
    }

    /// exp(-iHτ) by Hermitian eigendecomposition.
    pub fn unitary(&self) -> Result<CMat> {
        expm_neg_i_h_t(&self.matrix()?, self.tau)
    }
}

/// Conjugate the state by exp(-iHτ).
pub fn evolve_hamiltonian(state: &mut QuantumState, spec: &HamiltonianSpec) -> Result<()> {
    if spec.n_qubits != state.n_qubits() {
        return Err(QdmError::DimensionMismatch {
            expected: state.n_qubits(),
            actual: spec.n_qubits,
        });
    }
    state.apply_dense(&spec.unitary()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::state::Representation;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_duration_is_identity() {
        let spec = HamiltonianSpec {
            n_qubits: 2,
            h: vec![0.7, -0.3],
            j: vec![vec![], vec![0.5]],
            tau: 0.0,
        };
        let mut s = QuantumState::new(2, Representation::Pure).unwrap();
        evolve_hamiltonian(&mut s, &spec).unwrap();
        assert_abs_diff_eq!(s.amplitudes().unwrap()[0].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_qubit_transverse_field() {
        // n=1, h=1, τ=0.3: ⟨σ_z⟩ = cos(2τ) = cos(0.6)
        let spec = HamiltonianSpec { n_qubits: 1, h: vec![1.0], j: vec![vec![]], tau: 0.3 };
        let mut s = QuantumState::new(1, Representation::Pure).unwrap();
        evolve_hamiltonian(&mut s, &spec).unwrap();
        assert_abs_diff_eq!(s.expect_z(0).unwrap(), 0.6f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.expect_z(0).unwrap(), 0.8253356149096783, epsilon = 1e-7);
    }

    #[test]
    fn evolution_preserves_norm() {
        let mut rng = crate::rng::sub_rng(11, "ham-test", 0);
        for n in 1..=4 {
            let spec = HamiltonianSpec::random(n, 1.3, &mut rng);
            let mut s = QuantumState::new(n, Representation::Pure).unwrap();
            evolve_hamiltonian(&mut s, &spec).unwrap();
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn determinism_same_seed_same_coefficients() {
        let mut a = crate::rng::sub_rng(5, "h", 2);
        let mut b = crate::rng::sub_rng(5, "h", 2);
        let s1 = HamiltonianSpec::random(3, 1.0, &mut a);
        let s2 = HamiltonianSpec::random(3, 1.0, &mut b);
        assert_eq!(s1, s2);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = HamiltonianSpec { n_qubits: 2, h: vec![0.1, 0.2], j: vec![vec![], vec![0.0]], tau: 1.0 };
        let mut s = QuantumState::new(3, Representation::Pure).unwrap();
        assert!(evolve_hamiltonian(&mut s, &spec).is_err());
    }
}
