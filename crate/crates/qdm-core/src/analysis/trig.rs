//! Constructive universal approximation: trigonometric-polynomial fit of a
//! sampled function, realized as a bank of closed-form QDM channels.
//!
//! The sampled interval [a, b] is extended to [a, c] with a linear bridge
//! back to g(a) (skipped when g(b) already matches g(a)), rescaled to a 2π
//! span, and Fourier-fit by periodic trapezoidal quadrature. Each retained
//! mode becomes a closed-form channel whose rotation angle is the mode
//! frequency per step and whose initial conditions carry amplitude and
//! phase; amplitudes at or above 1/2 are split across duplicate channels to
//! respect the lemma preconditions.

use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};
use crate::model::closed_form_step;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigPolySpec {
    pub order: usize,
    pub alpha0: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Original sample interval.
    pub interval: (f64, f64),
    /// Extended endpoint c ≥ b; [a, c] maps to a 2π span.
    pub extended_end: f64,
}

impl TrigPolySpec {
    /// σ_J at the rescaled coordinate t' ∈ [0, 2π).
    pub fn eval_scaled(&self, t_prime: f64) -> f64 {
        let mut v = self.alpha0;
        for j in 1..=self.order {
            let arg = j as f64 * t_prime;
            v += self.alpha[j - 1] * arg.cos() + self.beta[j - 1] * arg.sin();
        }
        v
    }

    /// σ_J at an original-coordinate time t ∈ [a, c].
    pub fn eval(&self, t: f64) -> f64 {
        let (a, _) = self.interval;
        let span = self.extended_end - a;
        self.eval_scaled(2.0 * std::f64::consts::PI * (t - a) / span)
    }
}

/// One closed-form channel: θ₂ = −θ₁ = theta, initial pair (m0, x0).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedFormChannel {
    pub theta: f64,
    pub m0: f64,
    pub x0: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigConstruction {
    pub poly: TrigPolySpec,
    pub channels: Vec<ClosedFormChannel>,
    /// sup |g − σ_J| over the original samples.
    pub sup_g_sigma: f64,
    /// sup |σ_J − QDM rollout| over the original samples.
    pub sup_sigma_qdm: f64,
    /// sup |g − QDM rollout| over the original samples.
    pub sup_g_qdm: f64,
    /// Σ over channels of the Theorem-1 envelope (K/4)·|θ| at the last step.
    pub envelope_sum: f64,
}

/// Split one mode of amplitude `amp` into channels small enough for the
/// lemma precondition |A| < 1/2.
fn push_mode(channels: &mut Vec<ClosedFormChannel>, amp: f64, phase: f64, theta: f64) {
    if amp.abs() < 1e-12 {
        return;
    }
    let mut count = (2.0 * amp.abs()).ceil() as usize;
    if count == 0 {
        count = 1;
    }
    while amp.abs() / count as f64 >= 0.5 {
        count += 1;
    }
    let sub = amp / count as f64;
    for _ in 0..count {
        channels.push(ClosedFormChannel {
            theta,
            m0: sub * phase.sin(),
            x0: sub * phase.cos(),
        });
    }
}

/// Build the trigonometric approximant of order J for `samples` of g on the
/// uniform grid over `interval`, instantiate the channel bank, and report
/// the approximation errors on the original grid.
pub fn construct_trig_qdm(
    samples: &[f64],
    interval: (f64, f64),
    order: usize,
) -> Result<TrigConstruction> {
    if samples.len() < 4 {
        return Err(QdmError::EmptySeries);
    }
    if order == 0 {
        return Err(QdmError::InvalidConfig("order must be >= 1".into()));
    }
    let (a, b) = interval;
    if !(b > a) {
        return Err(QdmError::InvalidConfig("interval must have positive length".into()));
    }
    let n = samples.len();
    let h = (b - a) / (n - 1) as f64;
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(QdmError::NonFinite("function samples"));
    }

    // extended periodic sample set on [a, c)
    let needs_bridge = (samples[n - 1] - samples[0]).abs() > 1e-12;
    let mut periodic: Vec<f64> = samples[..n - 1].to_vec();
    let mut c = b;
    if needs_bridge {
        let bridge_len = ((n as f64) * 0.25).ceil() as usize;
        c = b + bridge_len as f64 * h;
        periodic.push(samples[n - 1]);
        for k in 1..bridge_len {
            let frac = k as f64 / bridge_len as f64;
            periodic.push(samples[n - 1] + frac * (samples[0] - samples[n - 1]));
        }
    }
    let m = periodic.len();
    if order >= m / 2 {
        return Err(QdmError::InvalidConfig(format!(
            "order {order} too large for {m} periodic samples"
        )));
    }

    // periodic trapezoid = rectangle rule
    let two_pi = 2.0 * std::f64::consts::PI;
    let alpha0 = periodic.iter().sum::<f64>() / m as f64;
    let mut alpha = Vec::with_capacity(order);
    let mut beta = Vec::with_capacity(order);
    for j in 1..=order {
        let (mut ca, mut sa) = (0.0, 0.0);
        for (k, g) in periodic.iter().enumerate() {
            let arg = two_pi * (j * k) as f64 / m as f64;
            ca += g * arg.cos();
            sa += g * arg.sin();
        }
        alpha.push(2.0 * ca / m as f64);
        beta.push(2.0 * sa / m as f64);
    }
    let poly = TrigPolySpec { order, alpha0, alpha, beta, interval, extended_end: c };

    // channel bank: DC plus one cos- and one sin-channel per retained mode
    let span = c - a;
    let dt_prime = two_pi * h / span;
    let mut channels = Vec::new();
    push_mode(&mut channels, poly.alpha0, 0.0, 0.0);
    for j in 1..=order {
        let theta = j as f64 * dt_prime;
        push_mode(&mut channels, poly.alpha[j - 1], 0.0, theta);
        push_mode(&mut channels, poly.beta[j - 1], -std::f64::consts::FRAC_PI_2, theta);
    }

    // roll the bank over the original grid
    let mut states: Vec<(f64, f64)> = channels.iter().map(|ch| (ch.m0, ch.x0)).collect();
    let mut sup_g_sigma = 0.0f64;
    let mut sup_sigma_qdm = 0.0f64;
    let mut sup_g_qdm = 0.0f64;
    for (k, g) in samples.iter().enumerate() {
        let t_prime = two_pi * (k as f64 * h) / span;
        let sigma = poly.eval_scaled(t_prime);
        let qdm: f64 = states.iter().map(|(_, x)| x).sum();
        sup_g_sigma = sup_g_sigma.max((g - sigma).abs());
        sup_sigma_qdm = sup_sigma_qdm.max((sigma - qdm).abs());
        sup_g_qdm = sup_g_qdm.max((g - qdm).abs());
        if k + 1 < samples.len() {
            for (state, ch) in states.iter_mut().zip(channels.iter()) {
                *state = closed_form_step(-ch.theta, ch.theta, state.0, state.1)?;
            }
        }
    }
    let steps = samples.len() - 1;
    let envelope_sum: f64 =
        channels.iter().map(|ch| steps as f64 / 4.0 * ch.theta.abs()).sum();

    Ok(TrigConstruction { poly, channels, sup_g_sigma, sup_sigma_qdm, sup_g_qdm, envelope_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn constant_function_is_a_single_dc_channel() {
        let samples = vec![0.37; 64];
        let c = construct_trig_qdm(&samples, (0.0, 63.0), 3).unwrap();
        assert_eq!(c.channels.len(), 1);
        assert_eq!(c.channels[0].theta, 0.0);
        assert_abs_diff_eq!(c.channels[0].x0, 0.37, epsilon = 1e-12);
        assert!(c.sup_g_sigma < 1e-12);
        assert!(c.sup_sigma_qdm < 1e-12);
    }

    #[test]
    fn single_cosine_mode_recovered() {
        // 0.4·cos(0.04π·t) over one period [0, 50]: mode j = 1 dominates
        let samples: Vec<f64> = (0..=50).map(|t| 0.4 * (0.04 * PI * t as f64).cos()).collect();
        let c = construct_trig_qdm(&samples, (0.0, 50.0), 3).unwrap();
        assert_abs_diff_eq!(c.poly.alpha[0], 0.4, epsilon = 1e-3);
        assert!(c.poly.alpha[1].abs() < 1e-10);
        assert!(c.sup_g_sigma < 1e-10, "sigma err {}", c.sup_g_sigma);
        // the channel bank obeys the summed Theorem-1 envelope
        assert!(c.sup_sigma_qdm <= c.envelope_sum);
    }

    #[test]
    fn ramp_error_decreases_with_order() {
        let samples: Vec<f64> = (0..=100).map(|t| t as f64 / 100.0 - 0.5).collect();
        let mut last = f64::INFINITY;
        for order in [2, 4, 8, 16] {
            let c = construct_trig_qdm(&samples, (0.0, 100.0), order).unwrap();
            assert!(
                c.sup_g_sigma < last,
                "order {order}: {} !< {last}",
                c.sup_g_sigma
            );
            last = c.sup_g_sigma;
        }
    }

    #[test]
    fn large_amplitude_modes_are_split() {
        // amplitude 1.3 cosine: needs ceil(2·1.3) = 3 sub-channels
        let samples: Vec<f64> = (0..=50).map(|t| 1.3 * (0.04 * PI * t as f64).cos()).collect();
        let c = construct_trig_qdm(&samples, (0.0, 50.0), 2).unwrap();
        let mode_channels: Vec<_> =
            c.channels.iter().filter(|ch| ch.theta != 0.0 && ch.x0.abs() > 1e-9).collect();
        assert_eq!(mode_channels.len(), 3);
        for ch in mode_channels {
            assert!((ch.m0 * ch.m0 + ch.x0 * ch.x0).sqrt() < 0.5);
        }
    }

    #[test]
    fn triangle_inequality_on_total_error() {
        let samples: Vec<f64> =
            (0..=80).map(|t| 0.3 * (0.05 * t as f64).cos() + 0.1 * (0.11 * t as f64).sin()).collect();
        let c = construct_trig_qdm(&samples, (0.0, 80.0), 8).unwrap();
        assert!(c.sup_g_qdm <= c.sup_g_sigma + c.sup_sigma_qdm + 1e-12);
        assert!(c.sup_sigma_qdm <= c.envelope_sum + 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(construct_trig_qdm(&[0.1, 0.2], (0.0, 1.0), 1).is_err());
        let samples = vec![0.1; 10];
        assert!(construct_trig_qdm(&samples, (0.0, 9.0), 0).is_err());
        assert!(construct_trig_qdm(&samples, (0.0, 9.0), 6).is_err());
    }
}
