//! Autoregressive rollout across linear-composite channels.

use rand::Rng;

use crate::error::Result;
use crate::model::config::ChannelState;
use crate::model::evaluator::clamp_value;
use crate::model::step::step_with_evaluator;
use crate::model::QdmModel;
use crate::quantum::noise::NoiseSpec;
use crate::rng::sub_rng;

#[derive(Clone, Debug)]
pub struct ChannelStep {
    pub state: ChannelState,
    /// Raw per-qubit measurement that produced this state (equals the
    /// initial state at t = 0).
    pub raw: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryStep {
    pub channels: Vec<ChannelStep>,
    /// Combined data output x̂_t = Σ_k w_k x_t^k.
    pub combined: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The combined data series as a time-major matrix.
    pub fn combined_series(&self) -> Vec<Vec<f64>> {
        self.steps.iter().map(|s| s.combined.clone()).collect()
    }
}

/// Roll the model forward. The trajectory has `steps + 1` entries including
/// the initial state at t = 0.
pub fn generate_trajectory(
    model: &QdmModel,
    steps: usize,
    noise: Option<&NoiseSpec>,
) -> Result<Trajectory> {
    let n_ch = model.channels.len();
    let evaluators: Vec<_> = (0..n_ch)
        .map(|k| model.evaluator(k, noise))
        .collect::<Result<_>>()?;
    let shot_sigma = noise.map(|ns| ns.shot_sigma).unwrap_or(0.0);
    let mut shot_rng = sub_rng(model.config.seed, "shot-noise", 0);

    let mut states: Vec<ChannelState> = (0..n_ch)
        .map(|k| model.initial_state(k))
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(steps + 1);
    out.push(TrajectoryStep {
        channels: states
            .iter()
            .map(|s| ChannelStep { state: s.clone(), raw: s.concat() })
            .collect(),
        combined: combine(model, &states),
    });

    for _ in 0..steps {
        let mut next = Vec::with_capacity(n_ch);
        let mut channel_steps = Vec::with_capacity(n_ch);
        for (k, ev) in evaluators.iter().enumerate() {
            let mut step = step_with_evaluator(model, k, &states[k], ev)?;
            if shot_sigma > 0.0 {
                for raw in step.raw.iter_mut() {
                    *raw += shot_sigma * sample_standard_normal(&mut shot_rng);
                }
                // re-run LECL + clamp on the perturbed measurement
                let corrected = match &model.channel(k)?.lecl {
                    Some(l) => l.apply(&step.raw)?,
                    None => step.raw.clone(),
                };
                let clamped: Vec<f64> = corrected.into_iter().map(clamp_value).collect();
                step.state = ChannelState::from_concat(&clamped, model.config.n_m);
            }
            next.push(step.state.clone());
            channel_steps.push(ChannelStep { state: step.state, raw: step.raw });
        }
        states = next;
        out.push(TrajectoryStep {
            channels: channel_steps,
            combined: combine(model, &states),
        });
    }

    Ok(Trajectory { steps: out })
}

fn combine(model: &QdmModel, states: &[ChannelState]) -> Vec<f64> {
    let n_x = model.config.n_x;
    let mut acc = vec![0.0; n_x];
    for (w, st) in model.weights.iter().zip(states.iter()) {
        for (a, x) in acc.iter_mut().zip(st.x.iter()) {
            *a += w * x;
        }
    }
    acc
}

/// Box-Muller standard normal draw.
fn sample_standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ansatz, QdmConfig, QdmModel};
    use approx::assert_abs_diff_eq;

    fn model(channels: usize, seed: u64) -> QdmModel {
        let cfg = QdmConfig {
            n_m: 1,
            n_x: 1,
            ansatz: Ansatz::Hea,
            depth: 1,
            channels,
            seed,
            tiea_tau: 1.0,
            lecl: false,
            channel_weights: None,
            train_weights: false,
        };
        QdmModel::new(cfg).unwrap()
    }

    #[test]
    fn zero_steps_holds_initial_state() {
        let mut m = model(1, 9);
        m.bind_initial_data(&[0.4]).unwrap();
        let t = generate_trajectory(&m, 0, None).unwrap();
        assert_eq!(t.len(), 1);
        assert_abs_diff_eq!(t.steps[0].combined[0], 0.4, epsilon = 1e-12);
    }

    #[test]
    fn identity_ansatz_gives_constant_series() {
        let mut m = model(1, 9);
        m.channels[0].theta = vec![0.0, 0.0];
        m.channels[0].m0 = vec![0.2];
        m.bind_initial_data(&[0.4]).unwrap();
        let t = generate_trajectory(&m, 5, None).unwrap();
        assert_eq!(t.len(), 6);
        for s in &t.steps {
            assert_abs_diff_eq!(s.combined[0], 0.4, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_closed_form_channels_sum() {
        // channels with θ = 0.04π and 0.08π starting from (0, 0.2), (0, 0.3):
        // x̂₁ = 0.2·cos(0.04π) + 0.3·cos(0.08π)
        let mut m = model(2, 9);
        let t1 = 0.04 * std::f64::consts::PI;
        let t2 = 0.08 * std::f64::consts::PI;
        m.channels[0].theta = vec![-t1, t1];
        m.channels[0].m0 = vec![0.0];
        m.channels[0].x0 = vec![0.2];
        m.channels[1].theta = vec![-t2, t2];
        m.channels[1].m0 = vec![0.0];
        m.channels[1].x0 = vec![0.3];
        let t = generate_trajectory(&m, 1, None).unwrap();
        let expected = 0.2 * t1.cos() + 0.3 * t2.cos();
        assert_abs_diff_eq!(t.steps[1].combined[0], expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.4889978, epsilon = 1e-7);
    }

    #[test]
    fn channel_order_does_not_change_combined_output() {
        let mut a = model(2, 17);
        a.channels[0].theta = vec![0.11, -0.23];
        a.channels[1].theta = vec![-0.31, 0.07];
        a.channels[0].m0 = vec![0.1];
        a.channels[1].m0 = vec![-0.2];
        a.channels[0].x0 = vec![0.25];
        a.channels[1].x0 = vec![0.15];
        let mut b = a.clone();
        b.channels.swap(0, 1);
        let ta = generate_trajectory(&a, 20, None).unwrap();
        let tb = generate_trajectory(&b, 20, None).unwrap();
        for (sa, sb) in ta.steps.iter().zip(tb.steps.iter()) {
            assert_abs_diff_eq!(sa.combined[0], sb.combined[0], epsilon = 1e-14);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut m = model(1, 5);
        m.channels[0].theta = vec![0.3, -0.2];
        m.bind_initial_data(&[0.5]).unwrap();
        let t1 = generate_trajectory(&m, 30, None).unwrap();
        let t2 = generate_trajectory(&m, 30, None).unwrap();
        for (a, b) in t1.steps.iter().zip(t2.steps.iter()) {
            assert_eq!(a.combined[0].to_bits(), b.combined[0].to_bits());
        }
    }
}
