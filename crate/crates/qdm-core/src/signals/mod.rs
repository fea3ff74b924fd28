//! Ground-truth signal generators and range normalization.

pub mod rayleigh;

pub use rayleigh::{rayleigh_trajectory, RayleighSpec};

use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalComponent {
    pub amplitude: f64,
    /// Angular frequency in rad/step.
    pub omega: f64,
    /// Phase in radians.
    #[serde(default)]
    pub phase: f64,
    pub kind: Trig,
}

/// Composite trigonometric signal x(t) = Σᵢ Aᵢ·trigᵢ(ωᵢ t + φᵢ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub components: Vec<SignalComponent>,
    /// Time-axis rescale factor (labeling only; steps are integers).
    #[serde(default)]
    pub delta: f64,
}

impl SignalSpec {
    pub fn validate(&self) -> Result<()> {
        for c in &self.components {
            for v in [c.amplitude, c.omega, c.phase] {
                if !v.is_finite() {
                    return Err(QdmError::NonFinite("signal component"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let arg = c.omega * t + c.phase;
                c.amplitude
                    * match c.kind {
                        Trig::Cos => arg.cos(),
                        Trig::Sin => arg.sin(),
                    }
            })
            .sum()
    }
}

/// Sample the signal at integer steps t = 0..=steps.
pub fn generate_signal(spec: &SignalSpec, steps: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok((0..=steps).map(|t| spec.eval(t as f64)).collect())
}

/// Affine record y = scale·x + offset, invertible for de-normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub scale: f64,
    pub offset: f64,
}

impl AffineTransform {
    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.offset) / self.scale
    }
}

/// Normalize each dimension of a series into `target = (lo, hi)`, returning
/// the transformed series and the per-dimension transforms. A constant
/// dimension maps to 0 with unit scale recorded.
pub fn normalize(
    series: &[Vec<f64>],
    target: (f64, f64),
) -> Result<(Vec<Vec<f64>>, Vec<AffineTransform>)> {
    if series.is_empty() {
        return Err(QdmError::EmptySeries);
    }
    let dims = series[0].len();
    let (lo, hi) = target;
    let mut transforms = Vec::with_capacity(dims);
    for d in 0..dims {
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for row in series {
            if row.len() != dims {
                return Err(QdmError::DimensionMismatch { expected: dims, actual: row.len() });
            }
            mn = mn.min(row[d]);
            mx = mx.max(row[d]);
        }
        if (mx - mn).abs() < 1e-300 {
            transforms.push(AffineTransform { scale: 1.0, offset: -mn });
        } else {
            let scale = (hi - lo) / (mx - mn);
            transforms.push(AffineTransform { scale, offset: lo - mn * scale });
        }
    }
    let out = series
        .iter()
        .map(|row| row.iter().enumerate().map(|(d, v)| transforms[d].apply(*v)).collect())
        .collect();
    Ok((out, transforms))
}

/// Invert `normalize` with the recorded transforms.
pub fn denormalize(series: &[Vec<f64>], transforms: &[AffineTransform]) -> Vec<Vec<f64>> {
    series
        .iter()
        .map(|row| row.iter().enumerate().map(|(d, v)| transforms[d].invert(*v)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn cosine_amplitude_at_origin() {
        let spec = SignalSpec {
            components: vec![SignalComponent {
                amplitude: 0.5,
                omega: 0.04 * PI,
                phase: 0.0,
                kind: Trig::Cos,
            }],
            delta: 0.04,
        };
        let s = generate_signal(&spec, 10).unwrap();
        assert_abs_diff_eq!(s[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 0.5 * (0.04 * PI).cos(), epsilon = 1e-15);
    }

    #[test]
    fn composite_at_origin_keeps_cos_terms_only() {
        let w = 0.04 * PI;
        let spec = SignalSpec {
            components: vec![
                SignalComponent { amplitude: 0.2, omega: w, phase: 0.0, kind: Trig::Cos },
                SignalComponent { amplitude: 0.3, omega: 2.0 * w, phase: 0.0, kind: Trig::Sin },
            ],
            delta: 0.04,
        };
        assert_abs_diff_eq!(spec.eval(0.0), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn zero_amplitudes_give_zero() {
        let spec = SignalSpec {
            components: vec![SignalComponent {
                amplitude: 0.0,
                omega: 1.0,
                phase: 0.3,
                kind: Trig::Sin,
            }],
            delta: 1.0,
        };
        assert_eq!(spec.eval(5.0), 0.0);
    }

    #[test]
    fn composite_linearity() {
        let w = 0.11;
        let a = SignalSpec {
            components: vec![SignalComponent { amplitude: 0.4, omega: w, phase: 0.2, kind: Trig::Cos }],
            delta: 1.0,
        };
        let b = SignalSpec {
            components: vec![SignalComponent { amplitude: 0.3, omega: 2.3 * w, phase: -0.5, kind: Trig::Sin }],
            delta: 1.0,
        };
        let sum = SignalSpec {
            components: a.components.iter().chain(b.components.iter()).copied().collect(),
            delta: 1.0,
        };
        for t in 0..50 {
            let t = t as f64;
            assert_abs_diff_eq!(sum.eval(t), a.eval(t) + b.eval(t), epsilon = 1e-14);
        }
    }

    #[test]
    fn normalize_examples() {
        // {0, 2} -> {-1, 1}: scale 1, offset -1
        let (out, tr) = normalize(&[vec![0.0], vec![2.0]], (-1.0, 1.0)).unwrap();
        assert_eq!(out, vec![vec![-1.0], vec![1.0]]);
        assert_abs_diff_eq!(tr[0].scale, 1.0);
        assert_abs_diff_eq!(tr[0].offset, -1.0);

        // already in range: roundtrip is identity-close
        let series = vec![vec![-1.0], vec![1.0]];
        let (out, tr) = normalize(&series, (-1.0, 1.0)).unwrap();
        assert_eq!(out, series);
        assert_abs_diff_eq!(tr[0].scale, 1.0);
        assert_abs_diff_eq!(tr[0].offset, 0.0);
    }

    #[test]
    fn normalize_roundtrip() {
        let series: Vec<Vec<f64>> =
            (0..40).map(|t| vec![(0.3 * t as f64).sin() * 3.0 + 1.0, t as f64]).collect();
        let (norm, tr) = normalize(&series, (-0.9, 0.9)).unwrap();
        let back = denormalize(&norm, &tr);
        for (a, b) in series.iter().zip(back.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_series_maps_to_zero() {
        let (out, tr) = normalize(&[vec![3.0], vec![3.0]], (-1.0, 1.0)).unwrap();
        assert_eq!(out, vec![vec![0.0], vec![0.0]]);
        assert_abs_diff_eq!(tr[0].scale, 1.0);
    }

    #[test]
    fn empty_series_rejected() {
        assert!(normalize(&[], (-1.0, 1.0)).is_err());
    }
}
