//! Exact simulation of small quantum systems: states, gates, Hamiltonian
//! evolution, observables, and noise channels.

pub mod gate;
pub mod hamiltonian;
pub mod noise;
pub mod observable;
pub mod state;

pub use gate::{apply_gate, Angle, GateOp, PauliAxis};
pub use hamiltonian::{evolve_hamiltonian, HamiltonianSpec};
pub use noise::{apply_readout_error, DepolarizingScope, NoisePlacement, NoiseSpec, ReadoutMatrix};
pub use observable::{expectation, ObservableSpec, Pauli};
pub use state::{QuantumState, Representation, MAX_QUBITS};
