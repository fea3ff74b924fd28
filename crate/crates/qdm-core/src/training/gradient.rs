//! Parameter-shift-through-time gradients.
//!
//! The one-step map is w = E(v; θ) followed by the optional LECL affine
//! correction and the clamp. Direct gate partials come from ±π/2 shifts on
//! θ_i; input sensitivities from ±π/2 shifts on the encoding angles, each
//! multiplied by the chain factor -1/sqrt(1-v²) of u(v) = arccos(v). The
//! per-time recurrence then chains the step Jacobian through the rollout,
//! so one full sweep costs O(nL) circuit evaluations per parameter.

use std::f64::consts::FRAC_PI_2;

use crate::error::{QdmError, Result};
use crate::model::evaluator::CLAMP_LIMIT;
use crate::model::{clamp_value, ChannelState, QdmModel, StepEvaluator};
use crate::quantum::noise::NoiseSpec;
use crate::training::params::{ParamGroup, ParamLayout};

/// All partials of the one-step map at a point: the direct ∂/∂θ_i terms for
/// one gate parameter and the full input Jacobian.
#[derive(Clone, Debug)]
pub struct StepPartials {
    /// ∂(step output)/∂θ_i, length n (memory components first).
    pub direct: Vec<f64>,
    /// jacobian[r][c] = ∂(step output r)/∂(input c).
    pub jacobian: Vec<Vec<f64>>,
    /// Circuit evaluations used for the shifts: 2 per gate parameter plus
    /// 2n for the encoding pairs (6 in the two-qubit case).
    pub evaluations: u64,
}

/// The gradient chain factor d(arccos v)/dv = -1/sqrt(1-v²), zeroed at the
/// clamp rail where the true local derivative of the clamped map vanishes.
fn encoding_chain_factor(v: f64) -> f64 {
    if v.abs() >= CLAMP_LIMIT {
        0.0
    } else {
        -1.0 / (1.0 - v * v).sqrt()
    }
}

struct ShiftedEvaluators {
    base: StepEvaluator,
    plus: Vec<StepEvaluator>,
    minus: Vec<StepEvaluator>,
}

impl ShiftedEvaluators {
    fn build(model: &QdmModel, channel: usize, noise: Option<&NoiseSpec>) -> Result<Self> {
        let ch = model.channel(channel)?;
        let circuit = model.circuit(channel)?;
        let n = model.n_qubits();
        let ham_u = match &ch.hamiltonian {
            Some(h) => Some(h.unitary()?),
            None => None,
        };
        let ham = ham_u.as_ref();
        let base = StepEvaluator::build_cached(&circuit.layers, &ch.theta, n, noise, ham)?;
        let mut plus = Vec::with_capacity(ch.theta.len());
        let mut minus = Vec::with_capacity(ch.theta.len());
        for i in 0..ch.theta.len() {
            let mut tp = ch.theta.clone();
            tp[i] += FRAC_PI_2;
            plus.push(StepEvaluator::build_cached(&circuit.layers, &tp, n, noise, ham)?);
            let mut tm = ch.theta.clone();
            tm[i] -= FRAC_PI_2;
            minus.push(StepEvaluator::build_cached(&circuit.layers, &tm, n, noise, ham)?);
        }
        Ok(Self { base, plus, minus })
    }

    fn eval_count(&self) -> u64 {
        self.base.eval_count()
            + self.plus.iter().map(|e| e.eval_count()).sum::<u64>()
            + self.minus.iter().map(|e| e.eval_count()).sum::<u64>()
    }

    /// Raw-measurement Jacobian ∂w/∂v via encoding shifts (2n evaluations).
    fn raw_jacobian(&self, v: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = v.len();
        let mut jac = vec![vec![0.0; n]; n];
        for c in 0..n {
            let wp = self.base.eval_shifted(v, Some((c, FRAC_PI_2)))?;
            let wm = self.base.eval_shifted(v, Some((c, -FRAC_PI_2)))?;
            let chain = encoding_chain_factor(v[c]);
            for r in 0..n {
                jac[r][c] = 0.5 * (wp[r] - wm[r]) * chain;
            }
        }
        Ok(jac)
    }

    /// Raw direct partial ∂w/∂θ_i (2 evaluations).
    fn raw_direct(&self, v: &[f64], i: usize) -> Result<Vec<f64>> {
        let wp = self.plus[i].eval(v)?;
        let wm = self.minus[i].eval(v)?;
        Ok(wp.iter().zip(wm.iter()).map(|(p, m)| 0.5 * (p - m)).collect())
    }
}

fn lecl_rows(model: &QdmModel, channel: usize) -> Result<Option<Vec<Vec<f64>>>> {
    Ok(model.channel(channel)?.lecl.as_ref().map(|l| l.a.clone()))
}

/// Chain a raw-measurement derivative through the LECL and the clamp mask.
fn chain_step(
    raw: &[f64],
    a: &Option<Vec<Vec<f64>>>,
    mask: &[bool],
) -> Vec<f64> {
    let n = raw.len();
    let mut out = vec![0.0; n];
    match a {
        Some(mat) => {
            for r in 0..n {
                if mask[r] {
                    out[r] = mat[r].iter().zip(raw.iter()).map(|(m, d)| m * d).sum();
                }
            }
        }
        None => {
            for r in 0..n {
                if mask[r] {
                    out[r] = raw[r];
                }
            }
        }
    }
    out
}

/// Clamp mask of the corrected output y = A·w + b: a component on the rail
/// carries zero derivative.
fn clamp_mask(y: &[f64]) -> Vec<bool> {
    y.iter().map(|v| v.abs() < CLAMP_LIMIT).collect()
}

/// All six partials of the one-step map at `state` for one gate parameter:
/// the direct (∂m'/∂θ, ∂x'/∂θ) pair and the 2x2 input Jacobian in the
/// (1,1) case, generalized to n components. Exactly 2 + 2n circuit
/// evaluations (6 when n = 2).
pub fn step_partials(
    model: &QdmModel,
    channel: usize,
    state: &ChannelState,
    noise: Option<&NoiseSpec>,
    theta_index: usize,
) -> Result<StepPartials> {
    let ch = model.channel(channel)?;
    if theta_index >= ch.theta.len() {
        return Err(QdmError::DimensionMismatch {
            expected: ch.theta.len(),
            actual: theta_index,
        });
    }
    let evs = ShiftedEvaluators::build(model, channel, noise)?;
    let v = state.concat();
    // base evaluation for the clamp mask; not part of the per-parameter
    // shift count (a rollout shares it across all parameters)
    let w = evs.base.eval(&v)?;
    let a = lecl_rows(model, channel)?;
    let y = match &model.channel(channel)?.lecl {
        Some(l) => l.apply(&w)?,
        None => w.clone(),
    };
    let mask = clamp_mask(&y);
    evs.base.reset_eval_count();

    let raw_jac = evs.raw_jacobian(&v)?;
    let raw_dir = evs.raw_direct(&v, theta_index)?;
    let evaluations = evs.eval_count();

    let n = v.len();
    let direct = chain_step(&raw_dir, &a, &mask);
    let mut jacobian = vec![vec![0.0; n]; n];
    for c in 0..n {
        let col: Vec<f64> = (0..n).map(|r| raw_jac[r][c]).collect();
        let chained = chain_step(&col, &a, &mask);
        for r in 0..n {
            jacobian[r][c] = chained[r];
        }
    }
    Ok(StepPartials { direct, jacobian, evaluations })
}

/// Sensitivities of every channel state component to every trainable
/// parameter, accumulated forward in time.
#[derive(Clone, Debug)]
pub struct SensitivityTable {
    /// table[k][t][p][j] = ∂ v_t^k[j] / ∂ p, with p indexing the channel-k
    /// parameter block (weight parameters excluded; their gradient is
    /// assembled directly from the trajectory).
    pub per_channel: Vec<Vec<Vec<Vec<f64>>>>,
    /// Combined-output series x̂_t of the underlying rollout.
    pub combined: Vec<Vec<f64>>,
    /// Per-channel state series of the rollout.
    pub states: Vec<Vec<ChannelState>>,
    /// Total circuit evaluations spent.
    pub evaluations: u64,
}

/// Forward-accumulate sensitivities over `steps` rollout steps.
pub fn accumulate_sensitivities(
    model: &QdmModel,
    steps: usize,
    noise: Option<&NoiseSpec>,
) -> Result<SensitivityTable> {
    let layout = ParamLayout::of(model)?;
    let n = model.n_qubits();
    let n_m = model.config.n_m;
    let per = layout.channel.len();
    let mut per_channel = Vec::with_capacity(model.channels.len());
    let mut all_states = Vec::with_capacity(model.channels.len());
    let mut combined = vec![vec![0.0; model.config.n_x]; steps + 1];
    let mut evaluations = 0;

    for k in 0..model.channels.len() {
        let evs = ShiftedEvaluators::build(model, k, noise)?;
        let a = lecl_rows(model, k)?;

        let mut v = model.initial_state(k)?.concat();
        // t = 0: identity pattern on the initial-condition parameters
        let mut sens = vec![vec![0.0; n]; per];
        for p in 0..per {
            match layout.channel.group(p) {
                ParamGroup::M0(i) => sens[p][i] = 1.0,
                ParamGroup::X0(i) => sens[p][n_m + i] = 1.0,
                _ => {}
            }
        }
        let mut table_t = vec![sens.clone()];
        let mut states_t = vec![ChannelState::from_concat(&v, n_m)];
        for (slot, comb) in combined[0].iter_mut().enumerate() {
            *comb += model.weights[k] * v[n_m + slot];
        }

        for t in 1..=steps {
            let w = evs.base.eval(&v)?;
            let y = match &model.channels[k].lecl {
                Some(l) => l.apply(&w)?,
                None => w.clone(),
            };
            let mask = clamp_mask(&y);
            let raw_jac = evs.raw_jacobian(&v)?;
            // chained Jacobian of the full step
            let mut jac = vec![vec![0.0; n]; n];
            for c in 0..n {
                let col: Vec<f64> = (0..n).map(|r| raw_jac[r][c]).collect();
                let chained = chain_step(&col, &a, &mask);
                for r in 0..n {
                    jac[r][c] = chained[r];
                }
            }

            let mut next_sens = vec![vec![0.0; n]; per];
            for p in 0..per {
                // carry term J · s_p
                let mut carry = vec![0.0; n];
                for r in 0..n {
                    carry[r] = (0..n).map(|c| jac[r][c] * sens[p][c]).sum();
                }
                // direct term of this parameter group
                match layout.channel.group(p) {
                    ParamGroup::Theta(i) => {
                        let raw_dir = evs.raw_direct(&v, i)?;
                        let dir = chain_step(&raw_dir, &a, &mask);
                        for r in 0..n {
                            carry[r] += dir[r];
                        }
                    }
                    ParamGroup::LeclA { row, col } => {
                        if mask[row] {
                            carry[row] += w[col];
                        }
                    }
                    ParamGroup::LeclB(row) => {
                        if mask[row] {
                            carry[row] += 1.0;
                        }
                    }
                    ParamGroup::M0(_) | ParamGroup::X0(_) | ParamGroup::Weight => {}
                }
                next_sens[p] = carry;
            }
            sens = next_sens;
            v = y.iter().map(|val| clamp_value(*val)).collect();
            table_t.push(sens.clone());
            states_t.push(ChannelState::from_concat(&v, n_m));
            for (slot, comb) in combined[t].iter_mut().enumerate() {
                *comb += model.weights[k] * v[n_m + slot];
            }
        }
        evaluations += evs.eval_count();
        per_channel.push(table_t);
        all_states.push(states_t);
    }

    Ok(SensitivityTable {
        per_channel,
        combined,
        states: all_states,
        evaluations,
    })
}

/// Mean-squared-error loss over the combined output, t = 1..L.
pub fn mse_loss(pred: &[Vec<f64>], target: &[Vec<f64>]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(QdmError::LengthMismatch { left: pred.len(), right: target.len() });
    }
    if pred.is_empty() {
        return Err(QdmError::EmptySeries);
    }
    let mut acc = 0.0;
    for (p, t) in pred.iter().zip(target.iter()) {
        if p.len() != t.len() {
            return Err(QdmError::LengthMismatch { left: p.len(), right: t.len() });
        }
        acc += p
            .iter()
            .zip(t.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(acc / pred.len() as f64)
}

/// Training loss of a model on the series x_{0:L} (prediction compared on
/// t = 1..L; the t = 0 entry seeds the rollout).
pub fn rollout_loss(
    model: &QdmModel,
    target: &[Vec<f64>],
    noise: Option<&NoiseSpec>,
) -> Result<f64> {
    if target.len() < 2 {
        return Err(QdmError::EmptySeries);
    }
    let steps = target.len() - 1;
    let traj = crate::model::generate_trajectory(model, steps, noise)?;
    let pred = traj.combined_series();
    mse_loss(&pred[1..], &target[1..])
}

/// Gradient of the training loss over every trainable (θ, LECL, m0, x0 and
/// optionally the channel weights), via the sensitivity recurrence.
pub fn loss_gradient(
    model: &QdmModel,
    target: &[Vec<f64>],
    noise: Option<&NoiseSpec>,
) -> Result<Vec<f64>> {
    if target.len() < 2 {
        return Err(QdmError::EmptySeries);
    }
    let steps = target.len() - 1;
    let layout = ParamLayout::of(model)?;
    let table = accumulate_sensitivities(model, steps, noise)?;
    let n_m = model.config.n_m;
    let n_x = model.config.n_x;
    let big_l = steps as f64;

    let mut grad = vec![0.0; layout.len()];
    let per = layout.channel.len();
    for t in 1..=steps {
        let diff: Vec<f64> = (0..n_x)
            .map(|d| table.combined[t][d] - target[t][d])
            .collect();
        for k in 0..model.channels.len() {
            for p in 0..per {
                let flat = k * per + p;
                let g = match layout.channel.group(p) {
                    ParamGroup::Weight => {
                        // direct combination derivative
                        (0..n_x)
                            .map(|d| diff[d] * table.states[k][t].x[d])
                            .sum::<f64>()
                    }
                    _ => (0..n_x)
                        .map(|d| {
                            diff[d] * model.weights[k] * table.per_channel[k][t][p][n_m + d]
                        })
                        .sum::<f64>(),
                };
                grad[flat] += (2.0 / big_l) * g;
            }
        }
    }
    Ok(grad)
}

/// Central-difference gradient of the rollout loss, the verification oracle
/// for `loss_gradient`.
pub fn finite_difference_gradient(
    model: &QdmModel,
    target: &[Vec<f64>],
    h: f64,
    noise: Option<&NoiseSpec>,
) -> Result<Vec<f64>> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(QdmError::DomainViolation { value: h, domain: "[1e-7, 1e-3]" });
    }
    let layout = ParamLayout::of(model)?;
    let base = layout.get(model);
    let mut grad = vec![0.0; base.len()];
    let mut work = model.clone();
    for i in 0..base.len() {
        let mut up = base.clone();
        up[i] += h;
        layout.set(&mut work, &up)?;
        let fp = rollout_loss(&work, target, noise)?;
        let mut dn = base.clone();
        dn[i] -= h;
        layout.set(&mut work, &dn)?;
        let fm = rollout_loss(&work, target, noise)?;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    layout.set(&mut work, &base)?;
    Ok(grad)
}
