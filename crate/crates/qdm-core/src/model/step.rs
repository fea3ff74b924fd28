//! One-step map: encode → evolve → measure → LECL → clamp, and the
//! closed-form (1,1) map it reproduces in the commuting two-body realization.

use crate::error::{QdmError, Result};
use crate::model::config::ChannelState;
use crate::model::evaluator::clamp_value;
use crate::model::QdmModel;
use crate::quantum::noise::NoiseSpec;

/// Measured raw expectations plus the clamped post-LECL state.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: ChannelState,
    /// Per-qubit ⟨σ_z⟩ before the LECL correction.
    pub raw: Vec<f64>,
}

/// Closed-form (1,1)-QDM map:
///   m' = m·cosθ₁ − x·√(1−m²)·sinθ₁
///   x' = x·cosθ₂ − m·√(1−x²)·sinθ₂
pub fn closed_form_step(theta1: f64, theta2: f64, m: f64, x: f64) -> Result<(f64, f64)> {
    for v in [m, x] {
        if !v.is_finite() || v.abs() > 1.0 {
            return Err(QdmError::DomainViolation { value: v, domain: "[-1, 1]" });
        }
    }
    let rm = (1.0 - m * m).max(0.0).sqrt();
    let rx = (1.0 - x * x).max(0.0).sqrt();
    Ok((
        m * theta1.cos() - x * rm * theta1.sin(),
        x * theta2.cos() - m * rx * theta2.sin(),
    ))
}

/// Advance one channel by a single QDM step, returning the raw measurement
/// alongside the new state.
pub fn step_with_raw(
    model: &QdmModel,
    channel: usize,
    state: &ChannelState,
    noise: Option<&NoiseSpec>,
) -> Result<StepOutput> {
    let ev = model.evaluator(channel, noise)?;
    step_with_evaluator(model, channel, state, &ev)
}

/// Same as [`step_with_raw`] with a pre-built evaluator (rollouts and
/// gradient passes reuse one evaluator across steps).
pub fn step_with_evaluator(
    model: &QdmModel,
    channel: usize,
    state: &ChannelState,
    ev: &crate::model::StepEvaluator,
) -> Result<StepOutput> {
    state.validate()?;
    let v = state.concat();
    let raw = ev.eval(&v)?;
    let corrected = match &model.channel(channel)?.lecl {
        Some(lecl) => lecl.apply(&raw)?,
        None => raw.clone(),
    };
    let clamped: Vec<f64> = corrected.into_iter().map(clamp_value).collect();
    Ok(StepOutput {
        state: ChannelState::from_concat(&clamped, model.config.n_m),
        raw,
    })
}

/// The spec-level one-step operation.
pub fn qdm_step(
    model: &QdmModel,
    channel: usize,
    state: &ChannelState,
    noise: Option<&NoiseSpec>,
) -> Result<ChannelState> {
    Ok(step_with_raw(model, channel, state, noise)?.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ansatz, QdmConfig, QdmModel};
    use approx::assert_abs_diff_eq;

    fn hea_model(theta: Vec<f64>) -> QdmModel {
        let cfg = QdmConfig {
            n_m: 1,
            n_x: 1,
            ansatz: Ansatz::Hea,
            depth: 1,
            channels: 1,
            seed: 0,
            tiea_tau: 1.0,
            lecl: false,
            channel_weights: None,
            train_weights: false,
        };
        let mut m = QdmModel::new(cfg).unwrap();
        m.channels[0].theta = theta;
        m
    }

    #[test]
    fn closed_form_identity_at_zero_angles() {
        let (m, x) = closed_form_step(0.0, 0.0, 0.3, -0.4).unwrap();
        assert_abs_diff_eq!(m, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(x, -0.4, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_reference_points() {
        // direct evaluation of the map at the documented points
        let t = 0.04 * std::f64::consts::PI;
        let (m1, x1) = closed_form_step(-t, t, 0.0, 0.5).unwrap();
        assert_abs_diff_eq!(m1, 0.0626666167821521, epsilon = 1e-12);
        assert_abs_diff_eq!(x1, 0.4960573506572389, epsilon = 1e-12);

        let (m2, x2) = closed_form_step(-t, t, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(m2, 0.5503282327598069, epsilon = 1e-12);
        assert_abs_diff_eq!(x2, 0.4417864685546710, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_fixed_point_at_origin() {
        for theta in [-1.2, -0.3, 0.0, 0.7, 2.9] {
            let (m, x) = closed_form_step(theta, -theta, 0.0, 0.0).unwrap();
            assert_eq!((m, x), (0.0, 0.0));
        }
    }

    #[test]
    fn closed_form_rejects_out_of_domain() {
        assert!(closed_form_step(0.1, 0.1, 1.2, 0.0).is_err());
    }

    #[test]
    fn hea_identity_angles_preserve_state() {
        // CZ is diagonal: with θ = 0 the map is the identity on (m, x)
        let model = hea_model(vec![0.0, 0.0]);
        let st = ChannelState::new(vec![0.35], vec![-0.6]);
        let out = qdm_step(&model, 0, &st, None).unwrap();
        assert_abs_diff_eq!(out.m[0], 0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(out.x[0], -0.6, epsilon = 1e-12);
    }

    #[test]
    fn hea_2q_matches_closed_form_map() {
        // the 2-qubit HEA layer realizes the closed-form map with
        // (θ₁, θ₂) = the two R_Y angles
        let (t1, t2) = (0.21, -0.47);
        let model = hea_model(vec![t1, t2]);
        let st = ChannelState::new(vec![0.3], vec![0.55]);
        let out = qdm_step(&model, 0, &st, None).unwrap();
        let (em, ex) = closed_form_step(t1, t2, 0.3, 0.55).unwrap();
        assert_abs_diff_eq!(out.m[0], em, epsilon = 1e-12);
        assert_abs_diff_eq!(out.x[0], ex, epsilon = 1e-12);
    }
}
