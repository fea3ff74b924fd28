//! Flat layout of all trainable parameters: per channel the gate angles θ,
//! the LECL (A, b), the initial memory m0, the initial data split x0 (only
//! when more than one channel shares it), and optionally the combination
//! weight.

use crate::error::{QdmError, Result};
use crate::model::QdmModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamGroup {
    Theta(usize),
    LeclA { row: usize, col: usize },
    LeclB(usize),
    M0(usize),
    X0(usize),
    Weight,
}

#[derive(Clone, Debug)]
pub struct ChannelLayout {
    pub theta_len: usize,
    pub lecl: bool,
    pub n: usize,
    pub n_m: usize,
    pub n_x: usize,
    pub train_x0: bool,
    pub train_weight: bool,
}

impl ChannelLayout {
    pub fn len(&self) -> usize {
        let mut l = self.theta_len + self.n_m;
        if self.lecl {
            l += self.n * self.n + self.n;
        }
        if self.train_x0 {
            l += self.n_x;
        }
        if self.train_weight {
            l += 1;
        }
        l
    }

    /// Group of the local index within one channel block. Order: θ, A, b,
    /// m0, x0, weight.
    pub fn group(&self, mut i: usize) -> ParamGroup {
        if i < self.theta_len {
            return ParamGroup::Theta(i);
        }
        i -= self.theta_len;
        if self.lecl {
            if i < self.n * self.n {
                return ParamGroup::LeclA { row: i / self.n, col: i % self.n };
            }
            i -= self.n * self.n;
            if i < self.n {
                return ParamGroup::LeclB(i);
            }
            i -= self.n;
        }
        if i < self.n_m {
            return ParamGroup::M0(i);
        }
        i -= self.n_m;
        if self.train_x0 {
            if i < self.n_x {
                return ParamGroup::X0(i);
            }
            i -= self.n_x;
        }
        debug_assert!(self.train_weight && i == 0);
        ParamGroup::Weight
    }
}

#[derive(Clone, Debug)]
pub struct ParamLayout {
    pub channel: ChannelLayout,
    pub channels: usize,
}

impl ParamLayout {
    pub fn of(model: &QdmModel) -> Result<Self> {
        let cfg = &model.config;
        let circuit = model.circuit(0)?;
        Ok(Self {
            channel: ChannelLayout {
                theta_len: circuit.param_count,
                lecl: cfg.lecl,
                n: cfg.n_qubits(),
                n_m: cfg.n_m,
                n_x: cfg.n_x,
                train_x0: cfg.channels > 1,
                train_weight: cfg.train_weights && cfg.channel_weights.is_some(),
            },
            channels: cfg.channels,
        })
    }

    pub fn len(&self) -> usize {
        self.channel.len() * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn locate(&self, flat: usize) -> Result<(usize, ParamGroup)> {
        let per = self.channel.len();
        if flat >= self.len() {
            return Err(QdmError::DimensionMismatch { expected: self.len(), actual: flat });
        }
        Ok((flat / per, self.channel.group(flat % per)))
    }

    pub fn get(&self, model: &QdmModel) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for (k, ch) in model.channels.iter().enumerate() {
            out.extend_from_slice(&ch.theta);
            if let Some(l) = &ch.lecl {
                for row in &l.a {
                    out.extend_from_slice(row);
                }
                out.extend_from_slice(&l.b);
            }
            out.extend_from_slice(&ch.m0);
            if self.channel.train_x0 {
                out.extend_from_slice(&ch.x0);
            }
            if self.channel.train_weight {
                out.push(model.weights[k]);
            }
        }
        out
    }

    pub fn set(&self, model: &mut QdmModel, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(QdmError::DimensionMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        let per = self.channel.len();
        for k in 0..self.channels {
            let block = &values[k * per..(k + 1) * per];
            let mut i = 0;
            let ch = &mut model.channels[k];
            ch.theta.copy_from_slice(&block[i..i + self.channel.theta_len]);
            i += self.channel.theta_len;
            if self.channel.lecl {
                let n = self.channel.n;
                let lecl = ch.lecl.as_mut().expect("layout says lecl present");
                for row in lecl.a.iter_mut() {
                    row.copy_from_slice(&block[i..i + n]);
                    i += n;
                }
                lecl.b.copy_from_slice(&block[i..i + n]);
                i += n;
            }
            ch.m0.copy_from_slice(&block[i..i + self.channel.n_m]);
            i += self.channel.n_m;
            if self.channel.train_x0 {
                ch.x0.copy_from_slice(&block[i..i + self.channel.n_x]);
                i += self.channel.n_x;
            }
            if self.channel.train_weight {
                model.weights[k] = block[i];
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ansatz, QdmConfig, QdmModel};

    fn model(lecl: bool, channels: usize) -> QdmModel {
        QdmModel::new(QdmConfig {
            n_m: 1,
            n_x: 1,
            ansatz: Ansatz::Hea,
            depth: 1,
            channels,
            seed: 1,
            tiea_tau: 1.0,
            lecl,
            channel_weights: None,
            train_weights: false,
        })
        .unwrap()
    }

    #[test]
    fn roundtrip_get_set() {
        let mut m = model(true, 2);
        let layout = ParamLayout::of(&m).unwrap();
        // θ(2) + A(4) + b(2) + m0(1) + x0(1) = 10 per channel
        assert_eq!(layout.len(), 20);
        let mut vals = layout.get(&m);
        for (i, v) in vals.iter_mut().enumerate() {
            *v = i as f64 * 0.01;
        }
        layout.set(&mut m, &vals).unwrap();
        assert_eq!(layout.get(&m), vals);
    }

    #[test]
    fn groups_enumerate_in_order() {
        let m = model(true, 1);
        let layout = ParamLayout::of(&m).unwrap();
        let groups: Vec<_> = (0..layout.channel.len()).map(|i| layout.channel.group(i)).collect();
        assert_eq!(groups[0], ParamGroup::Theta(0));
        assert_eq!(groups[2], ParamGroup::LeclA { row: 0, col: 0 });
        assert_eq!(groups[6], ParamGroup::LeclB(0));
        assert_eq!(groups[8], ParamGroup::M0(0));
    }

    #[test]
    fn single_channel_x0_not_trainable() {
        let m = model(false, 1);
        let layout = ParamLayout::of(&m).unwrap();
        assert_eq!(layout.len(), 2 + 1); // θ + m0
    }
}
