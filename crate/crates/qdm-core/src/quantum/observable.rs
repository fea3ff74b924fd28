//! Pauli-string observables and exact expectation values.

use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};
use crate::linalg::C64;
use crate::quantum::state::QuantumState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Weighted sum of Pauli strings. Each string has one letter per qubit,
/// indexed by qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub terms: Vec<(Vec<Pauli>, f64)>,
}

impl ObservableSpec {
    /// σ_z on one qubit.
    pub fn z(n_qubits: usize, qubit: usize) -> Self {
        let mut s = vec![Pauli::I; n_qubits];
        s[qubit] = Pauli::Z;
        Self { terms: vec![(s, 1.0)] }
    }

    /// σ_z ⊗ σ_z on a qubit pair.
    pub fn zz(n_qubits: usize, a: usize, b: usize) -> Self {
        let mut s = vec![Pauli::I; n_qubits];
        s[a] = Pauli::Z;
        s[b] = Pauli::Z;
        Self { terms: vec![(s, 1.0)] }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for (s, c) in &self.terms {
            if s.len() != n_qubits {
                return Err(QdmError::DimensionMismatch {
                    expected: n_qubits,
                    actual: s.len(),
                });
            }
            if !c.is_finite() {
                return Err(QdmError::NonFinite("observable coefficient"));
            }
        }
        Ok(())
    }
}

/// P|b⟩ = phase · |b'⟩ for a Pauli string.
fn pauli_action(s: &[Pauli], b: usize) -> (usize, C64) {
    let mut out = b;
    let mut phase = C64::new(1.0, 0.0);
    for (q, p) in s.iter().enumerate() {
        let bit = (b >> q) & 1;
        match p {
            Pauli::I => {}
            Pauli::X => out ^= 1 << q,
            Pauli::Y => {
                out ^= 1 << q;
                // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                phase *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
            }
            Pauli::Z => {
                if bit == 1 {
                    phase = -phase;
                }
            }
        }
    }
    (out, phase)
}

/// Tr(𝒪 ρ) or ⟨ψ|𝒪|ψ⟩. The imaginary part must vanish for a Hermitian
/// observable; |Im| ≥ 1e-10 is reported as an error.
pub fn expectation(state: &QuantumState, obs: &ObservableSpec) -> Result<f64> {
    obs.validate(state.n_qubits())?;
    let dim = state.dim();
    let mut acc = C64::new(0.0, 0.0);
    for (s, coeff) in &obs.terms {
        let mut term = C64::new(0.0, 0.0);
        match state.amplitudes() {
            Some(a) => {
                // ⟨ψ|P|ψ⟩ = Σ_b phase_b conj(ψ_{p(b)}) ψ_b
                for b in 0..dim {
                    let (pb, phase) = pauli_action(s, b);
                    term += phase * a[pb].conj() * a[b];
                }
            }
            None => {
                let rho = state.density_matrix().expect("mixed");
                // Tr(Pρ) = Σ_b phase_b ρ_{b, p(b)}
                for b in 0..dim {
                    let (pb, phase) = pauli_action(s, b);
                    term += phase * rho.get(b, pb);
                }
            }
        }
        acc += coeff * term;
    }
    if acc.im.abs() >= 1e-10 {
        return Err(QdmError::NonHermitianObservable(acc.im));
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gate::{apply_gate, Angle, GateOp};
    use crate::quantum::state::{pauli_x, QuantumState, Representation};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ground_state_z_is_one() {
        let s = QuantumState::new(1, Representation::Pure).unwrap();
        assert_abs_diff_eq!(expectation(&s, &ObservableSpec::z(1, 0)).unwrap(), 1.0);
    }

    #[test]
    fn bell_state_zz_parity() {
        // (|00⟩ + |11⟩)/√2
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![
            C64::new(inv, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(inv, 0.0),
        ];
        let s = QuantumState::from_amplitudes(2, amps).unwrap();
        assert_abs_diff_eq!(
            expectation(&s, &ObservableSpec::zz(2, 0, 1)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(expectation(&s, &ObservableSpec::z(2, 0)).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rotated_state_z_expectation() {
        // RY(0.7)|0⟩: ⟨σ_z⟩ = cos(0.7)
        let mut s = QuantumState::new(1, Representation::Pure).unwrap();
        apply_gate(&mut s, &GateOp::Ry { target: 0, angle: Angle::Fixed(0.7) }, &[]).unwrap();
        assert_abs_diff_eq!(
            expectation(&s, &ObservableSpec::z(1, 0)).unwrap(),
            0.7f64.cos(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            expectation(&s, &ObservableSpec::z(1, 0)).unwrap(),
            0.7648421872844885,
            epsilon = 1e-7
        );
    }

    #[test]
    fn pure_and_mixed_agree() {
        let mut s = QuantumState::new(2, Representation::Pure).unwrap();
        s.apply_1q(&pauli_x(), 1).unwrap();
        apply_gate(&mut s, &GateOp::Ry { target: 0, angle: Angle::Fixed(1.2) }, &[]).unwrap();
        let m = s.to_mixed();
        for obs in [
            ObservableSpec::z(2, 0),
            ObservableSpec::z(2, 1),
            ObservableSpec::zz(2, 0, 1),
        ] {
            assert_abs_diff_eq!(
                expectation(&s, &obs).unwrap(),
                expectation(&m, &obs).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = QuantumState::new(2, Representation::Pure).unwrap();
        assert!(expectation(&s, &ObservableSpec::z(1, 0)).is_err());
    }
}
