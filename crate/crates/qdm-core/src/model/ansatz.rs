//! Ansatz construction: gate layers with parameter indices.

use rand::Rng;

use crate::model::config::{Ansatz, QdmConfig};
use crate::quantum::gate::{Angle, GateOp};
use crate::quantum::hamiltonian::HamiltonianSpec;

/// One ansatz layer; noise placement `per-layer` injects after each.
pub type Layer = Vec<GateOp>;

/// Circuit structure plus the number of gate parameters it consumes.
#[derive(Clone, Debug)]
pub struct AnsatzCircuit {
    pub layers: Vec<Layer>,
    pub param_count: usize,
}

/// Draw the fixed Hamiltonian for a TIEA channel. HEA channels carry none.
pub fn channel_hamiltonian<R: Rng>(config: &QdmConfig, rng: &mut R) -> Option<HamiltonianSpec> {
    match config.ansatz {
        Ansatz::Tiea => Some(HamiltonianSpec::random(config.n_qubits(), config.tiea_tau, rng)),
        Ansatz::Hea => None,
    }
}

/// Build the per-channel circuit. For TIEA the same fixed Hamiltonian
/// evolution closes every layer.
pub fn build_ansatz(config: &QdmConfig, hamiltonian: Option<&HamiltonianSpec>) -> AnsatzCircuit {
    let n = config.n_qubits();
    let mut layers = Vec::with_capacity(config.depth);
    let mut p = 0;
    for _ in 0..config.depth {
        let mut layer = Vec::new();
        match config.ansatz {
            Ansatz::Tiea => {
                for q in 0..n {
                    layer.push(GateOp::Rx { target: q, angle: Angle::Param(p) });
                    layer.push(GateOp::Rz { target: q, angle: Angle::Param(p + 1) });
                    layer.push(GateOp::Rx { target: q, angle: Angle::Param(p + 2) });
                    p += 3;
                }
                let spec = hamiltonian.expect("TIEA requires a Hamiltonian").clone();
                layer.push(GateOp::HamiltonianEvolution { spec });
            }
            Ansatz::Hea => {
                for q in 0..n.saturating_sub(1) {
                    layer.push(GateOp::Cz { targets: (q, q + 1) });
                }
                if n == 2 {
                    // 2-qubit HEA degenerates to CZ + single-layer R_Y rotations
                    for q in 0..n {
                        layer.push(GateOp::Ry { target: q, angle: Angle::Param(p) });
                        p += 1;
                    }
                } else {
                    for q in 0..n {
                        layer.push(GateOp::Rx { target: q, angle: Angle::Param(p) });
                        layer.push(GateOp::Rz { target: q, angle: Angle::Param(p + 1) });
                        layer.push(GateOp::Rx { target: q, angle: Angle::Param(p + 2) });
                        p += 3;
                    }
                }
            }
        }
        layers.push(layer);
    }
    AnsatzCircuit { layers, param_count: p }
}

/// The commuting two-body-rotation realization of the closed-form (1,1) map:
/// exp(-i θ₁/2 σ_y⊗σ_z) · exp(-i θ₂/2 σ_z⊗σ_y) with memory on qubit 0 and
/// data on qubit 1.
pub fn closed_form_circuit() -> AnsatzCircuit {
    use crate::quantum::gate::PauliAxis;
    let layer = vec![
        GateOp::TwoBodyRotation {
            targets: (0, 1),
            axes: (PauliAxis::Y, PauliAxis::Z),
            angle: Angle::Param(0),
        },
        GateOp::TwoBodyRotation {
            targets: (0, 1),
            axes: (PauliAxis::Z, PauliAxis::Y),
            angle: Angle::Param(1),
        },
    ];
    AnsatzCircuit { layers: vec![layer], param_count: 2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::Ansatz;

    fn cfg(ansatz: Ansatz, n_m: usize, n_x: usize, depth: usize) -> QdmConfig {
        QdmConfig {
            n_m,
            n_x,
            ansatz,
            depth,
            channels: 1,
            seed: 3,
            tiea_tau: 1.0,
            lecl: false,
            channel_weights: None,
            train_weights: false,
        }
    }

    #[test]
    fn tiea_2q_d1_has_six_rotations_and_one_evolution() {
        let c = cfg(Ansatz::Tiea, 1, 1, 1);
        let mut rng = crate::rng::sub_rng(c.seed, "hamiltonian", 0);
        let ham = channel_hamiltonian(&c, &mut rng);
        let circ = build_ansatz(&c, ham.as_ref());
        assert_eq!(circ.param_count, 6);
        let evo = circ.layers[0]
            .iter()
            .filter(|g| matches!(g, GateOp::HamiltonianEvolution { .. }))
            .count();
        assert_eq!(evo, 1);
        assert_eq!(circ.layers[0].len(), 7);
    }

    #[test]
    fn hea_2q_d1_is_cz_plus_two_ry() {
        let c = cfg(Ansatz::Hea, 1, 1, 1);
        let circ = build_ansatz(&c, None);
        assert_eq!(circ.param_count, 2);
        assert!(matches!(circ.layers[0][0], GateOp::Cz { .. }));
        assert!(matches!(circ.layers[0][1], GateOp::Ry { .. }));
        assert!(matches!(circ.layers[0][2], GateOp::Ry { .. }));
    }

    #[test]
    fn same_seed_same_hamiltonian() {
        let c = cfg(Ansatz::Tiea, 1, 2, 2);
        let h1 = channel_hamiltonian(&c, &mut crate::rng::sub_rng(c.seed, "hamiltonian", 0));
        let h2 = channel_hamiltonian(&c, &mut crate::rng::sub_rng(c.seed, "hamiltonian", 0));
        assert_eq!(h1, h2);
    }

    #[test]
    fn hea_3q_uses_cz_chain_and_triple_rotations() {
        let c = cfg(Ansatz::Hea, 1, 2, 2);
        let circ = build_ansatz(&c, None);
        assert_eq!(circ.param_count, 2 * 3 * 3);
        let czs = circ.layers[0].iter().filter(|g| matches!(g, GateOp::Cz { .. })).count();
        assert_eq!(czs, 2);
    }
}
