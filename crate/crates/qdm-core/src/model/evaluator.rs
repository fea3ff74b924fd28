//! One-step circuit evaluation: encode, evolve (optionally through noise
//! channels), measure per-qubit σ_z.
//!
//! For noiseless evaluation the whole circuit is fused into a single dense
//! unitary once per parameter vector, so a rollout step is one matvec. The
//! noisy path keeps per-layer (or per-gate) unitaries so channels can be
//! injected at the configured placement.

use std::cell::Cell;

use crate::error::Result;
use crate::linalg::{CMat, C64};
use crate::model::ansatz::Layer;
use crate::quantum::gate::gate_unitary;
use crate::quantum::noise::{NoisePlacement, NoiseSpec};
use crate::quantum::state::QuantumState;
use crate::quantum::{apply_readout_error, GateOp};

/// Values are clamped to this magnitude before arccos encoding; the gradient
/// chain factor 1/sqrt(1-v²) diverges at |v| = 1.
pub const CLAMP_LIMIT: f64 = 1.0 - 1e-9;

pub fn clamp_value(v: f64) -> f64 {
    v.clamp(-CLAMP_LIMIT, CLAMP_LIMIT)
}

enum EvalMode {
    /// Noise-free: one fused unitary.
    PureFused(CMat),
    /// Channel noise present: fused unitary per layer.
    MixedLayers(Vec<CMat>),
    /// Per-gate noise placement: individual gate unitaries per layer.
    MixedGates(Vec<Vec<CMat>>),
}

pub struct StepEvaluator {
    n_qubits: usize,
    mode: EvalMode,
    noise: Option<NoiseSpec>,
    evals: Cell<u64>,
}

impl StepEvaluator {
    pub fn build(
        layers: &[Layer],
        theta: &[f64],
        n_qubits: usize,
        noise: Option<&NoiseSpec>,
    ) -> Result<Self> {
        Self::build_cached(layers, theta, n_qubits, noise, None)
    }

    /// Variant taking the pre-computed Hamiltonian-evolution unitary shared
    /// by every layer, so repeated builds (parameter shifts) skip the
    /// eigendecomposition.
    pub fn build_cached(
        layers: &[Layer],
        theta: &[f64],
        n_qubits: usize,
        noise: Option<&NoiseSpec>,
        ham_unitary: Option<&CMat>,
    ) -> Result<Self> {
        if let Some(ns) = noise {
            ns.validate()?;
        }
        let gate_u = |gate: &GateOp| -> Result<CMat> {
            if let (GateOp::HamiltonianEvolution { .. }, Some(u)) = (gate, ham_unitary) {
                return Ok(u.clone());
            }
            gate_unitary(gate, n_qubits, theta)
        };
        let channel_noise = noise
            .map(|ns| ns.depolarizing_p > 0.0 || ns.amp_damp_gamma > 0.0)
            .unwrap_or(false);
        let per_gate = noise
            .map(|ns| ns.placement == NoisePlacement::PerGate && ns.depolarizing_p > 0.0)
            .unwrap_or(false);

        let mode = if !channel_noise {
            let dim = 1usize << n_qubits;
            let mut u = CMat::identity(dim);
            for layer in layers {
                for gate in layer {
                    u = gate_u(gate)?.matmul(&u);
                }
            }
            EvalMode::PureFused(u)
        } else if per_gate {
            let mut all = Vec::new();
            for layer in layers {
                let mut gus = Vec::new();
                for gate in layer {
                    gus.push(gate_u(gate)?);
                }
                all.push(gus);
            }
            EvalMode::MixedGates(all)
        } else {
            let dim = 1usize << n_qubits;
            let mut lus = Vec::new();
            for layer in layers {
                let mut u = CMat::identity(dim);
                for gate in layer {
                    u = gate_u(gate)?.matmul(&u);
                }
                lus.push(u);
            }
            EvalMode::MixedLayers(lus)
        };

        Ok(Self {
            n_qubits,
            mode,
            noise: noise.cloned(),
            evals: Cell::new(0),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Circuit evaluations performed so far.
    pub fn eval_count(&self) -> u64 {
        self.evals.get()
    }

    pub fn reset_eval_count(&self) {
        self.evals.set(0);
    }

    /// Product-state amplitudes of ⊗ R_Y(arccos v_i + shift_i)|0⟩.
    fn encode_amplitudes(&self, v: &[f64], shift: Option<(usize, f64)>) -> Vec<C64> {
        let n = self.n_qubits;
        let dim = 1usize << n;
        let mut halves = Vec::with_capacity(n);
        for (i, vi) in v.iter().enumerate() {
            let mut phi = clamp_value(*vi).acos();
            if let Some((q, s)) = shift {
                if q == i {
                    phi += s;
                }
            }
            halves.push(((phi / 2.0).cos(), (phi / 2.0).sin()));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for (b, amp) in amps.iter_mut().enumerate() {
            let mut a = 1.0;
            for (i, (c, s)) in halves.iter().enumerate() {
                a *= if b & (1 << i) == 0 { *c } else { *s };
            }
            *amp = C64::new(a, 0.0);
        }
        amps
    }

    fn measure_z(&self, probs: &[f64]) -> Result<Vec<f64>> {
        let probs = match self.noise.as_ref().and_then(|ns| ns.readout.as_ref()) {
            Some(m) => apply_readout_error(probs, m)?,
            None => probs.to_vec(),
        };
        let n = self.n_qubits;
        let mut z = vec![0.0; n];
        for (b, pb) in probs.iter().enumerate() {
            for (q, zq) in z.iter_mut().enumerate() {
                *zq += if b & (1 << q) == 0 { *pb } else { -*pb };
            }
        }
        Ok(z)
    }

    /// Run one step circuit on input expectations `v` (length n) and return
    /// the measured per-qubit ⟨σ_z⟩. An optional encoding-angle shift on one
    /// qubit supports the parameter-shift rule through the encoder.
    pub fn eval_shifted(&self, v: &[f64], shift: Option<(usize, f64)>) -> Result<Vec<f64>> {
        self.evals.set(self.evals.get() + 1);
        let amps = self.encode_amplitudes(v, shift);
        match &self.mode {
            EvalMode::PureFused(u) => {
                let out = u.matvec(&amps);
                let probs: Vec<f64> = out.iter().map(|z| z.norm_sqr()).collect();
                self.measure_z(&probs)
            }
            EvalMode::MixedLayers(layers) => {
                let mut state =
                    QuantumState::from_amplitudes(self.n_qubits, amps)?.to_mixed();
                let ns = self.noise.as_ref().expect("mixed mode requires noise");
                for u in layers {
                    state.apply_dense(u)?;
                    if ns.placement == NoisePlacement::PerLayer {
                        ns.apply_depolarizing_site(&mut state)?;
                    }
                }
                if ns.placement == NoisePlacement::PerStep {
                    ns.apply_depolarizing_site(&mut state)?;
                }
                self.finish_mixed(state, ns)
            }
            EvalMode::MixedGates(layers) => {
                let mut state =
                    QuantumState::from_amplitudes(self.n_qubits, amps)?.to_mixed();
                let ns = self.noise.as_ref().expect("mixed mode requires noise");
                for layer in layers {
                    for u in layer {
                        state.apply_dense(u)?;
                        ns.apply_depolarizing_site(&mut state)?;
                    }
                }
                self.finish_mixed(state, ns)
            }
        }
    }

    fn finish_mixed(&self, mut state: QuantumState, ns: &NoiseSpec) -> Result<Vec<f64>> {
        if ns.amp_damp_gamma > 0.0 {
            for q in 0..self.n_qubits {
                state.amplitude_damp(ns.amp_damp_gamma, q)?;
            }
        }
        self.measure_z(&state.probabilities())
    }

    pub fn eval(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.eval_shifted(v, None)
    }

    /// Whether this evaluator simulates through a density matrix.
    pub fn is_mixed(&self) -> bool {
        !matches!(self.mode, EvalMode::PureFused(_))
    }
}

/// Check gate targets against a register size (shared precondition).
pub fn validate_circuit(layers: &[Layer], n_qubits: usize) -> Result<()> {
    for layer in layers {
        for gate in layer {
            let targets: Vec<usize> = match gate {
                GateOp::Rx { target, .. }
                | GateOp::Ry { target, .. }
                | GateOp::Rz { target, .. } => vec![*target],
                GateOp::Cz { targets } | GateOp::TwoBodyRotation { targets, .. } => {
                    vec![targets.0, targets.1]
                }
                GateOp::HamiltonianEvolution { spec } => {
                    spec.validate()?;
                    vec![]
                }
            };
            for t in targets {
                if t >= n_qubits {
                    return Err(crate::error::QdmError::InvalidQubitIndex {
                        index: t,
                        n_qubits,
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ansatz::closed_form_circuit;
    use crate::quantum::gate::Angle;
    use approx::assert_abs_diff_eq;

    #[test]
    fn encode_roundtrip_z() {
        let circ: Vec<Layer> = vec![];
        let ev = StepEvaluator::build(&circ, &[], 3, None).unwrap();
        let v = [0.3, -0.7, 0.95];
        let z = ev.eval(&v).unwrap();
        for (a, b) in v.iter().zip(z.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn encode_half_amplitudes() {
        // v = 0.5: amplitudes (cos(pi/6), sin(pi/6)) = (0.8660254, 0.5)
        let ev = StepEvaluator::build(&[], &[], 1, None).unwrap();
        let amps = ev.encode_amplitudes(&[0.5], None);
        assert_abs_diff_eq!(amps[0].re, 0.8660254037844387, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[1].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn eval_counter_counts() {
        let circ = closed_form_circuit();
        let ev = StepEvaluator::build(&circ.layers, &[0.1, -0.1], 2, None).unwrap();
        ev.eval(&[0.0, 0.5]).unwrap();
        ev.eval_shifted(&[0.0, 0.5], Some((0, 1.0))).unwrap();
        assert_eq!(ev.eval_count(), 2);
    }

    #[test]
    fn fused_matches_gate_by_gate() {
        use crate::quantum::gate::apply_gate;
        let layers = vec![vec![
            GateOp::Cz { targets: (0, 1) },
            GateOp::Ry { target: 0, angle: Angle::Param(0) },
            GateOp::Ry { target: 1, angle: Angle::Param(1) },
        ]];
        let theta = [0.31, -0.52];
        let ev = StepEvaluator::build(&layers, &theta, 2, None).unwrap();
        let v = [0.2, -0.4];
        let fused = ev.eval(&v).unwrap();

        let amps = ev.encode_amplitudes(&v, None);
        let mut st = QuantumState::from_amplitudes(2, amps).unwrap();
        for g in &layers[0] {
            apply_gate(&mut st, g, &theta).unwrap();
        }
        let direct = [st.expect_z(0).unwrap(), st.expect_z(1).unwrap()];
        assert_abs_diff_eq!(fused[0], direct[0], epsilon = 1e-12);
        assert_abs_diff_eq!(fused[1], direct[1], epsilon = 1e-12);
    }

    #[test]
    fn mixed_path_matches_pure_when_noise_is_zeroed() {
        // depolarizing p=0 goes through the mixed machinery untouched
        let circ = closed_form_circuit();
        let noise = NoiseSpec {
            depolarizing_p: 0.0,
            amp_damp_gamma: 1e-300,
            ..NoiseSpec::depolarizing(0.0)
        };
        let ev_pure = StepEvaluator::build(&circ.layers, &[0.2, 0.4], 2, None).unwrap();
        let ev_mixed = StepEvaluator::build(&circ.layers, &[0.2, 0.4], 2, Some(&noise)).unwrap();
        assert!(ev_mixed.is_mixed());
        let v = [0.3, -0.1];
        let a = ev_pure.eval(&v).unwrap();
        let b = ev_mixed.eval(&v).unwrap();
        assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-10);
        assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-10);
    }
}
