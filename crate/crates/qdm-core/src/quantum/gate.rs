//! Gate operations: parametrized single-qubit rotations, CZ, two-body Pauli
//! rotations, and fixed Hamiltonian evolution.
//!
//! Convention: R_A(θ) = exp(-i θ σ_A / 2), σ_z|0⟩ = +|0⟩.

use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};
use crate::linalg::{CMat, C64};
use crate::quantum::hamiltonian::HamiltonianSpec;
use crate::quantum::state::QuantumState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// A gate angle: fixed, or an index into the model parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Angle {
    Fixed(f64),
    Param(usize),
}

impl Angle {
    pub fn resolve(&self, params: &[f64]) -> Result<f64> {
        let v = match self {
            Angle::Fixed(v) => *v,
            Angle::Param(i) => *params.get(*i).ok_or(QdmError::DimensionMismatch {
                expected: *i + 1,
                actual: params.len(),
            })?,
        };
        if !v.is_finite() {
            return Err(QdmError::NonFinite("gate angle"));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GateOp {
    Rx { target: usize, angle: Angle },
    Ry { target: usize, angle: Angle },
    Rz { target: usize, angle: Angle },
    Cz { targets: (usize, usize) },
    /// exp(-i θ/2 · σ_a ⊗ σ_b) acting on (targets.0, targets.1).
    TwoBodyRotation {
        targets: (usize, usize),
        axes: (PauliAxis, PauliAxis),
        angle: Angle,
    },
    HamiltonianEvolution { spec: HamiltonianSpec },
}

pub fn rotation_matrix(axis: PauliAxis, theta: f64) -> [C64; 4] {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    match axis {
        PauliAxis::X => [
            C64::new(c, 0.0),
            C64::new(0.0, -s),
            C64::new(0.0, -s),
            C64::new(c, 0.0),
        ],
        PauliAxis::Y => [
            C64::new(c, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
            C64::new(c, 0.0),
        ],
        PauliAxis::Z => [
            C64::new(c, -s),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(c, s),
        ],
    }
}

pub fn cz_matrix() -> [C64; 16] {
    let mut u = [C64::new(0.0, 0.0); 16];
    u[0] = C64::new(1.0, 0.0);
    u[5] = C64::new(1.0, 0.0);
    u[10] = C64::new(1.0, 0.0);
    u[15] = C64::new(-1.0, 0.0);
    u
}

fn pauli_2x2(axis: PauliAxis) -> [C64; 4] {
    match axis {
        PauliAxis::X => crate::quantum::state::pauli_x(),
        PauliAxis::Y => crate::quantum::state::pauli_y(),
        PauliAxis::Z => crate::quantum::state::pauli_z(),
    }
}

/// 4x4 matrix of exp(-i θ/2 σ_a ⊗ σ_b). Index convention matches
/// `QuantumState::apply_2q`: basis |q1 q0⟩ with (q0, q1) = targets.
pub fn two_body_rotation_matrix(axes: (PauliAxis, PauliAxis), theta: f64) -> [C64; 16] {
    let (a, b) = (pauli_2x2(axes.0), pauli_2x2(axes.1));
    // G = σ_b ⊗ σ_a in the |q1 q0⟩ ordering of apply_2q
    let mut g = [C64::new(0.0, 0.0); 16];
    for r1 in 0..2 {
        for c1 in 0..2 {
            for r0 in 0..2 {
                for c0 in 0..2 {
                    g[(r1 * 2 + r0) * 4 + (c1 * 2 + c0)] = b[r1 * 2 + c1] * a[r0 * 2 + c0];
                }
            }
        }
    }
    // G² = I, so U = cos(θ/2) I - i sin(θ/2) G
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let mut u = [C64::new(0.0, 0.0); 16];
    for i in 0..4 {
        u[i * 4 + i] = C64::new(c, 0.0);
    }
    for (ui, gi) in u.iter_mut().zip(g.iter()) {
        *ui -= C64::new(0.0, s) * gi;
    }
    u
}

/// Apply a gate to the state, resolving parametrized angles against `params`.
pub fn apply_gate(state: &mut QuantumState, gate: &GateOp, params: &[f64]) -> Result<()> {
    match gate {
        GateOp::Rx { target, angle } => {
            state.apply_1q(&rotation_matrix(PauliAxis::X, angle.resolve(params)?), *target)
        }
        GateOp::Ry { target, angle } => {
            state.apply_1q(&rotation_matrix(PauliAxis::Y, angle.resolve(params)?), *target)
        }
        GateOp::Rz { target, angle } => {
            state.apply_1q(&rotation_matrix(PauliAxis::Z, angle.resolve(params)?), *target)
        }
        GateOp::Cz { targets } => state.apply_2q(&cz_matrix(), targets.0, targets.1),
        GateOp::TwoBodyRotation { targets, axes, angle } => state.apply_2q(
            &two_body_rotation_matrix(*axes, angle.resolve(params)?),
            targets.0,
            targets.1,
        ),
        GateOp::HamiltonianEvolution { spec } => {
            let u = spec.unitary()?;
            state.apply_dense(&u)
        }
    }
}

/// Dense matrix of a gate over an `n`-qubit register (used to pre-compose
/// circuits into a single unitary).
pub fn gate_unitary(gate: &GateOp, n_qubits: usize, params: &[f64]) -> Result<CMat> {
    let dim = 1usize << n_qubits;
    match gate {
        GateOp::HamiltonianEvolution { spec } => {
            if spec.n_qubits != n_qubits {
                return Err(QdmError::DimensionMismatch {
                    expected: n_qubits,
                    actual: spec.n_qubits,
                });
            }
            spec.unitary()
        }
        _ => {
            let mut u = CMat::zeros(dim);
            // build by applying the gate to each basis vector
            for b in 0..dim {
                let mut amps = vec![C64::new(0.0, 0.0); dim];
                amps[b] = C64::new(1.0, 0.0);
                let mut st = QuantumState::from_amplitudes(n_qubits, amps)?;
                apply_gate(&mut st, gate, params)?;
                let col = st.amplitudes().expect("pure");
                for (r, v) in col.iter().enumerate() {
                    u.set(r, b, *v);
                }
            }
            Ok(u)
        }
    }
}
