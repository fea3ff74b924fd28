//! Exact quantum state simulation: pure statevectors and density matrices
//! over at most six qubits.

use num_complex::Complex64;

use crate::error::{QdmError, Result};
use crate::linalg::{min_eigenvalue, CMat, C64};

pub const MAX_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Pure,
    Mixed,
}

/// A pure statevector or a density matrix over `n_qubits` qubits.
///
/// Qubit `i` is the i-th bit of the computational basis index, so the
/// single-qubit gate stride for qubit `i` is `1 << i`.
#[derive(Clone, Debug)]
pub struct QuantumState {
    n_qubits: usize,
    data: StateData,
}

#[derive(Clone, Debug)]
enum StateData {
    Pure(Vec<C64>),
    Mixed(CMat),
}

impl QuantumState {
    /// All-zeros computational basis state.
    pub fn new(n_qubits: usize, repr: Representation) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QdmError::InvalidQubitCount(n_qubits));
        }
        let dim = 1usize << n_qubits;
        let data = match repr {
            Representation::Pure => {
                let mut amps = vec![C64::new(0.0, 0.0); dim];
                amps[0] = C64::new(1.0, 0.0);
                StateData::Pure(amps)
            }
            Representation::Mixed => {
                let mut rho = CMat::zeros(dim);
                rho.set(0, 0, C64::new(1.0, 0.0));
                StateData::Mixed(rho)
            }
        };
        Ok(Self { n_qubits, data })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QdmError::InvalidQubitCount(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if amps.len() != dim {
            return Err(QdmError::DimensionMismatch {
                expected: dim,
                actual: amps.len(),
            });
        }
        Ok(Self {
            n_qubits,
            data: StateData::Pure(amps),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn representation(&self) -> Representation {
        match self.data {
            StateData::Pure(_) => Representation::Pure,
            StateData::Mixed(_) => Representation::Mixed,
        }
    }

    pub fn amplitudes(&self) -> Option<&[C64]> {
        match &self.data {
            StateData::Pure(a) => Some(a),
            StateData::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Option<&CMat> {
        match &self.data {
            StateData::Mixed(m) => Some(m),
            StateData::Pure(_) => None,
        }
    }

    /// Promote a pure state to its density matrix |ψ⟩⟨ψ|; mixed states pass through.
    pub fn to_mixed(&self) -> Self {
        match &self.data {
            StateData::Mixed(_) => self.clone(),
            StateData::Pure(a) => {
                let dim = a.len();
                let mut rho = CMat::zeros(dim);
                for i in 0..dim {
                    for j in 0..dim {
                        rho.set(i, j, a[i] * a[j].conj());
                    }
                }
                Self {
                    n_qubits: self.n_qubits,
                    data: StateData::Mixed(rho),
                }
            }
        }
    }

    /// Squared norm (pure) or trace (mixed).
    pub fn norm(&self) -> f64 {
        match &self.data {
            StateData::Pure(a) => a.iter().map(|z| z.norm_sqr()).sum(),
            StateData::Mixed(m) => (0..m.n).map(|i| m.get(i, i).re).sum(),
        }
    }

    /// Check the state invariants: normalization, and for mixed states
    /// Hermiticity and positive semidefiniteness.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if (self.norm() - 1.0).abs() > tol {
            return Err(QdmError::NonFinite("state norm/trace deviates from 1"));
        }
        if let StateData::Mixed(m) = &self.data {
            if !m.is_hermitian(tol) {
                return Err(QdmError::NonFinite("density matrix not Hermitian"));
            }
            if min_eigenvalue(m)? < -1e-10 {
                return Err(QdmError::NonFinite("density matrix not positive"));
            }
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(QdmError::InvalidQubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Apply a 2x2 unitary (row-major) to one qubit.
    pub fn apply_1q(&mut self, u: &[C64; 4], q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let stride = 1usize << q;
        match &mut self.data {
            StateData::Pure(a) => {
                apply_1q_vec(a, u, stride);
            }
            StateData::Mixed(m) => {
                let dim = m.n;
                // U rho: gate on each column
                for c in 0..dim {
                    let mut col: Vec<C64> = (0..dim).map(|r| m.get(r, c)).collect();
                    apply_1q_vec(&mut col, u, stride);
                    for r in 0..dim {
                        m.set(r, c, col[r]);
                    }
                }
                // (U rho) U†: conjugated gate on each row
                let uc = [u[0].conj(), u[1].conj(), u[2].conj(), u[3].conj()];
                for r in 0..dim {
                    let mut row: Vec<C64> = (0..dim).map(|c| m.get(r, c)).collect();
                    apply_1q_vec(&mut row, &uc, stride);
                    for c in 0..dim {
                        m.set(r, c, row[c]);
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply a 4x4 unitary (row-major, basis order |q1 q0⟩ = q1*2+q0) to the
    /// ordered qubit pair (q0, q1).
    pub fn apply_2q(&mut self, u: &[C64; 16], q0: usize, q1: usize) -> Result<()> {
        self.check_qubit(q0)?;
        self.check_qubit(q1)?;
        if q0 == q1 {
            return Err(QdmError::InvalidQubitIndex {
                index: q1,
                n_qubits: self.n_qubits,
            });
        }
        let (s0, s1) = (1usize << q0, 1usize << q1);
        match &mut self.data {
            StateData::Pure(a) => apply_2q_vec(a, u, s0, s1),
            StateData::Mixed(m) => {
                let dim = m.n;
                for c in 0..dim {
                    let mut col: Vec<C64> = (0..dim).map(|r| m.get(r, c)).collect();
                    apply_2q_vec(&mut col, u, s0, s1);
                    for r in 0..dim {
                        m.set(r, c, col[r]);
                    }
                }
                let mut uc = [C64::new(0.0, 0.0); 16];
                for (dst, src) in uc.iter_mut().zip(u.iter()) {
                    *dst = src.conj();
                }
                for r in 0..dim {
                    let mut row: Vec<C64> = (0..dim).map(|c| m.get(r, c)).collect();
                    apply_2q_vec(&mut row, &uc, s0, s1);
                    for c in 0..dim {
                        m.set(r, c, row[c]);
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply a dense unitary over the full register.
    pub fn apply_dense(&mut self, u: &CMat) -> Result<()> {
        if u.n != self.dim() {
            return Err(QdmError::DimensionMismatch {
                expected: self.dim(),
                actual: u.n,
            });
        }
        match &mut self.data {
            StateData::Pure(a) => {
                *a = u.matvec(a);
            }
            StateData::Mixed(m) => {
                *m = u.conjugate(m);
            }
        }
        Ok(())
    }

    /// Computational-basis probabilities (diagonal of ρ, or |ψ|²).
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(a) => a.iter().map(|z| z.norm_sqr()).collect(),
            StateData::Mixed(m) => (0..m.n).map(|i| m.get(i, i).re).collect(),
        }
    }

    /// ⟨σ_z⟩ of a single qubit.
    pub fn expect_z(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let stride = 1usize << q;
        let p = self.probabilities();
        Ok(p.iter()
            .enumerate()
            .map(|(b, pb)| if b & stride == 0 { *pb } else { -*pb })
            .sum())
    }

    /// Global depolarizing channel ρ → (1-p)ρ + p·I/2ⁿ (mixed states only).
    pub fn depolarize_global(&mut self, p: f64) -> Result<()> {
        check_probability(p)?;
        let StateData::Mixed(m) = &mut self.data else {
            return Err(QdmError::MixedStateRequired("depolarizing channel"));
        };
        let dim = m.n;
        let fill = p / dim as f64;
        for i in 0..dim {
            for j in 0..dim {
                let v = m.get(i, j) * (1.0 - p);
                m.set(i, j, if i == j { v + fill } else { v });
            }
        }
        Ok(())
    }

    /// Single-qubit depolarizing channel ρ → (1-p)ρ + (p/3)(XρX + YρY + ZρZ).
    pub fn depolarize_qubit(&mut self, p: f64, q: usize) -> Result<()> {
        check_probability(p)?;
        self.check_qubit(q)?;
        if self.representation() == Representation::Pure {
            return Err(QdmError::MixedStateRequired("depolarizing channel"));
        }
        let x = pauli_x();
        let y = pauli_y();
        let z = pauli_z();
        let mut acc = match &self.data {
            StateData::Mixed(m) => {
                let mut base = m.clone();
                for v in base.data.iter_mut() {
                    *v *= 1.0 - p;
                }
                base
            }
            StateData::Pure(_) => unreachable!(),
        };
        for pauli in [&x, &y, &z] {
            let mut branch = self.clone();
            branch.apply_1q(pauli, q)?;
            if let StateData::Mixed(b) = branch.data {
                for (a, bb) in acc.data.iter_mut().zip(b.data.iter()) {
                    *a += (p / 3.0) * bb;
                }
            }
        }
        self.data = StateData::Mixed(acc);
        Ok(())
    }

    /// Amplitude damping of strength γ toward |0⟩ on one qubit (mixed only).
    pub fn amplitude_damp(&mut self, gamma: f64, q: usize) -> Result<()> {
        check_probability(gamma)?;
        self.check_qubit(q)?;
        let StateData::Mixed(_) = self.data else {
            return Err(QdmError::MixedStateRequired("amplitude damping channel"));
        };
        // Kraus: K0 = diag(1, sqrt(1-γ)), K1 = sqrt(γ)|0⟩⟨1|
        let k0 = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new((1.0 - gamma).sqrt(), 0.0),
        ];
        let k1 = [
            C64::new(0.0, 0.0),
            C64::new(gamma.sqrt(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ];
        self.apply_kraus_1q(&[k0, k1], q)
    }

    /// Apply a single-qubit Kraus channel ρ → Σ KᵢρKᵢ† (mixed only).
    pub fn apply_kraus_1q(&mut self, kraus: &[[C64; 4]], q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let StateData::Mixed(m) = &self.data else {
            return Err(QdmError::MixedStateRequired("Kraus channel"));
        };
        let dim = m.n;
        let mut acc = CMat::zeros(dim);
        for k in kraus {
            let mut branch = self.clone();
            // K rho K† is not unitary conjugation, but the same two-sided
            // application works elementwise.
            if let StateData::Mixed(bm) = &mut branch.data {
                let stride = 1usize << q;
                for c in 0..dim {
                    let mut col: Vec<C64> = (0..dim).map(|r| bm.get(r, c)).collect();
                    apply_1q_vec(&mut col, k, stride);
                    for r in 0..dim {
                        bm.set(r, c, col[r]);
                    }
                }
                let kc = [k[0].conj(), k[1].conj(), k[2].conj(), k[3].conj()];
                for r in 0..dim {
                    let mut row: Vec<C64> = (0..dim).map(|c| bm.get(r, c)).collect();
                    apply_1q_vec(&mut row, &kc, stride);
                    for c in 0..dim {
                        bm.set(r, c, row[c]);
                    }
                }
                for (a, b) in acc.data.iter_mut().zip(bm.data.iter()) {
                    *a += b;
                }
            }
        }
        self.data = StateData::Mixed(acc);
        Ok(())
    }

    /// Replace qubit `q` by the pure state (a, b), tracing out its old marginal.
    pub fn replace_qubit(&mut self, q: usize, amp0: C64, amp1: C64) -> Result<()> {
        self.check_qubit(q)?;
        let StateData::Mixed(m) = &self.data else {
            return Err(QdmError::MixedStateRequired("qubit replacement"));
        };
        let dim = m.n;
        let stride = 1usize << q;
        // partial trace over q
        let rd = dim / 2;
        let mut red = CMat::zeros(rd);
        for i in 0..dim {
            let ri = reduced_index(i, q);
            for j in 0..dim {
                if (i & stride) != (j & stride) {
                    continue;
                }
                let rj = reduced_index(j, q);
                let v = red.get(ri, rj) + m.get(i, j);
                red.set(ri, rj, v);
            }
        }
        let qubit = [
            [amp0 * amp0.conj(), amp0 * amp1.conj()],
            [amp1 * amp0.conj(), amp1 * amp1.conj()],
        ];
        let mut out = CMat::zeros(dim);
        for i in 0..dim {
            let bi = (i & stride != 0) as usize;
            let ri = reduced_index(i, q);
            for j in 0..dim {
                let bj = (j & stride != 0) as usize;
                let rj = reduced_index(j, q);
                out.set(i, j, qubit[bi][bj] * red.get(ri, rj));
            }
        }
        self.data = StateData::Mixed(out);
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(QdmError::DomainViolation {
            value: p,
            domain: "[0, 1]",
        });
    }
    Ok(())
}

/// Basis index of the register with qubit `q` removed.
fn reduced_index(b: usize, q: usize) -> usize {
    let low = b & ((1 << q) - 1);
    let high = b >> (q + 1);
    low | (high << q)
}

fn apply_1q_vec(v: &mut [C64], u: &[C64; 4], stride: usize) {
    let dim = v.len();
    let mut base = 0;
    while base < dim {
        for low in 0..stride {
            let i0 = base + low;
            let i1 = i0 + stride;
            let a = v[i0];
            let b = v[i1];
            v[i0] = u[0] * a + u[1] * b;
            v[i1] = u[2] * a + u[3] * b;
        }
        base += 2 * stride;
    }
}

fn apply_2q_vec(v: &mut [C64], u: &[C64; 16], s0: usize, s1: usize) {
    let dim = v.len();
    for b in 0..dim {
        if b & s0 != 0 || b & s1 != 0 {
            continue;
        }
        let idx = [b, b | s0, b | s1, b | s0 | s1];
        let old = [v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]];
        for (r, slot) in idx.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..4 {
                acc += u[r * 4 + c] * old[c];
            }
            v[*slot] = acc;
        }
    }
}

pub fn pauli_x() -> [C64; 4] {
    [
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
    ]
}

pub fn pauli_y() -> [C64; 4] {
    [
        C64::new(0.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, 0.0),
    ]
}

pub fn pauli_z() -> [C64; 4] {
    [
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(-1.0, 0.0),
    ]
}

pub type Complex = Complex64;
