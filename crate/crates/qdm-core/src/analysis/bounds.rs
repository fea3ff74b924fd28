//! Brute-force verification of the one-step error lemmas and the
//! linear-growth envelope for single-mode cosine approximation.
//!
//! The exact reference pair is m(t) = A·sin(πΔt), x(t) = A·cos(πΔt); the map
//! runs with θ₂ = −θ₁ = πΔ.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::closed_form_step;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaReport {
    pub preconditions_ok: bool,
    pub lemma1_max_error: f64,
    /// Stated bound |πΔ|/4.
    pub lemma1_bound: f64,
    /// Tighter intermediate A(1−√(1−A²))|sin(πΔ)|.
    pub tighter_bound: f64,
    pub lemma1_pass: bool,
    pub lemma2_max_error: f64,
    /// Stated bound δ + |πΔ|/4.
    pub lemma2_bound: f64,
    pub lemma2_pass: bool,
}

/// One exact step of the reference signal.
fn exact_point(amplitude: f64, theta: f64, t: usize) -> (f64, f64) {
    let phase = theta * t as f64;
    (amplitude * phase.sin(), amplitude * phase.cos())
}

/// Check Lemma 1 (error from an exact point) and Lemma 2 (error from a
/// perturbed point) over t = 0..=t_steps. Perturbation pairs follow the
/// proof's scenario: components of opposite sign (or zero), each of
/// magnitude at most `delta_perturb`.
pub fn check_lemma_bounds(
    amplitude: f64,
    delta: f64,
    t_steps: usize,
    delta_perturb: f64,
) -> Result<LemmaReport> {
    let theta = std::f64::consts::PI * delta;
    let preconditions_ok = amplitude.abs() < 0.5 && theta.abs() < 0.25;

    let lemma1_bound = theta.abs() / 4.0;
    let tighter_bound =
        amplitude.abs() * (1.0 - (1.0 - amplitude * amplitude).max(0.0).sqrt()) * theta.sin().abs();

    let mut lemma1_max = 0.0f64;
    for t in 0..=t_steps {
        let (m, x) = exact_point(amplitude, theta, t);
        let (m_hat, x_hat) = closed_form_step(-theta, theta, m, x)?;
        let (m_next, x_next) = exact_point(amplitude, theta, t + 1);
        lemma1_max = lemma1_max.max((m_next - m_hat).abs()).max((x_next - x_hat).abs());
    }

    let d = delta_perturb.abs();
    let perturbations: [(f64, f64); 7] = [
        (-d, d),
        (d, -d),
        (-d, 0.0),
        (d, 0.0),
        (0.0, -d),
        (0.0, d),
        (0.0, 0.0),
    ];
    let lemma2_bound = d + theta.abs() / 4.0;
    let mut lemma2_max = 0.0f64;
    for t in 0..=t_steps {
        let (m, x) = exact_point(amplitude, theta, t);
        for (dm, dx) in perturbations {
            let pm = (m + dm).clamp(-1.0, 1.0);
            let px = (x + dx).clamp(-1.0, 1.0);
            let (m_hat, x_hat) = closed_form_step(-theta, theta, pm, px)?;
            let (m_next, x_next) = exact_point(amplitude, theta, t + 1);
            lemma2_max = lemma2_max.max((m_next - m_hat).abs()).max((x_next - x_hat).abs());
        }
    }

    Ok(LemmaReport {
        preconditions_ok,
        lemma1_max_error: lemma1_max,
        lemma1_bound,
        tighter_bound,
        lemma1_pass: lemma1_max <= tighter_bound && lemma1_max <= lemma1_bound,
        lemma2_max_error: lemma2_max,
        lemma2_bound,
        lemma2_pass: lemma2_max <= lemma2_bound,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// Per-step max-component error of the rollout against the exact pair.
    pub errors: Vec<f64>,
    /// Envelope δ₀ + (t/4)|πΔ| with δ₀ = 0 (exact start).
    pub envelope: Vec<f64>,
    pub pass: bool,
}

/// Roll the map from the exact initial pair and assert the linear-growth
/// envelope error(t) ≤ (t/4)·|πΔ| at every step.
pub fn check_theorem1_growth(amplitude: f64, delta: f64, n_steps: usize) -> Result<Theorem1Report> {
    let theta = std::f64::consts::PI * delta;
    let (mut m, mut x) = exact_point(amplitude, theta, 0);
    let mut errors = Vec::with_capacity(n_steps + 1);
    let mut envelope = Vec::with_capacity(n_steps + 1);
    errors.push(0.0);
    envelope.push(0.0);
    for t in 1..=n_steps {
        let (nm, nx) = closed_form_step(-theta, theta, m, x)?;
        m = nm;
        x = nx;
        let (em, ex) = exact_point(amplitude, theta, t);
        errors.push((m - em).abs().max((x - ex).abs()));
        envelope.push(t as f64 / 4.0 * theta.abs());
    }
    let pass = errors.iter().zip(envelope.iter()).all(|(e, b)| e <= b);
    Ok(Theorem1Report { errors, envelope, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_example_bounds() {
        // A = 0.5 − 1e-9, Δ = 0.04: bound |πΔ|/4 = 0.0314159,
        // tighter = 0.5·(1−√0.75)·sin(0.04π) = 0.0083952
        let rep = check_lemma_bounds(0.5 - 1e-9, 0.04, 1000, 0.01).unwrap();
        assert!(rep.preconditions_ok);
        assert!((rep.lemma1_bound - 0.031415926535).abs() < 1e-9);
        assert!((rep.tighter_bound - 0.0083952).abs() < 1e-6);
        assert!(rep.lemma1_pass, "lemma1 max {} tighter {}", rep.lemma1_max_error, rep.tighter_bound);
        assert!(rep.lemma2_pass, "lemma2 max {} bound {}", rep.lemma2_max_error, rep.lemma2_bound);
    }

    #[test]
    fn zero_delta_means_zero_error() {
        let rep = check_lemma_bounds(0.4, 0.0, 100, 0.0).unwrap();
        assert_eq!(rep.lemma1_max_error, 0.0);
    }

    #[test]
    fn zero_amplitude_means_zero_error() {
        let rep = check_lemma_bounds(0.0, 0.04, 100, 0.0).unwrap();
        assert!(rep.lemma1_max_error < 1e-15);
    }

    #[test]
    fn precondition_violation_reported_not_asserted() {
        let rep = check_lemma_bounds(0.7, 0.04, 10, 0.0).unwrap();
        assert!(!rep.preconditions_ok);
    }

    #[test]
    fn theorem1_envelope_holds_and_is_monotone() {
        let rep = check_theorem1_growth(0.4, 0.04, 100).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.errors[0], 0.0);
        for w in rep.envelope.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }
}
