// Rayleigh training diagnostics (scratch; removed before release).
use qdm_core::model::{generate_trajectory, Ansatz, QdmConfig, QdmModel};
use qdm_core::signals::{normalize, rayleigh_trajectory, RayleighSpec};
use qdm_core::training::{mse_loss, train, GradientMethod, ThetaInit, TrainConfig, TrainStage};
use std::f64::consts::PI;

fn main() {
    let sub = 50usize;
    let spec = RayleighSpec {
        epsilon: PI,
        delta: 3.0,
        omega: PI,
        x0: 0.0,
        v0: 0.01,
        dt: 1e-3,
        steps: sub * 400,
        subsample: sub,
    };
    let raw = rayleigh_trajectory(&spec).unwrap();
    let (_, tr) = normalize(&raw[..=100], (-0.9, 0.9)).unwrap();
    let full: Vec<Vec<f64>> = raw[..=200]
        .iter()
        .map(|r| r.iter().enumerate().map(|(d, v)| tr[d].apply(*v)).collect())
        .collect();

    let cases: Vec<(&str, Ansatz, usize, f64)> = vec![
        ("TIEA d2 tau1.0", Ansatz::Tiea, 2, 1.0),
        ("TIEA d2 tau0.5", Ansatz::Tiea, 2, 0.5),
        ("TIEA d2 tau0.2", Ansatz::Tiea, 2, 0.2),
        ("HEA d2", Ansatz::Hea, 2, 1.0),
        ("HEA d1", Ansatz::Hea, 1, 1.0),
    ];
    for (name, ansatz, depth, tau) in cases {
        let cfg = QdmConfig {
            n_m: 1,
            n_x: 2,
            ansatz,
            depth,
            channels: 1,
            seed: 42,
            tiea_tau: tau,
            lecl: true,
            channel_weights: None,
            train_weights: false,
        };
        let model = QdmModel::new(cfg).unwrap();
        let tc = TrainConfig {
            train_len: 100,
            predict_len: 100,
            epochs: 1500,
            learning_rate: 0.02,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 7,
            gradient_method: GradientMethod::ParameterShiftRecurrence,
            extra_stages: vec![
                TrainStage { epochs: 700, learning_rate: 0.004 },
                TrainStage { epochs: 300, learning_rate: 0.001 },
            ],
            restarts: 6,
            theta_init: ThetaInit::Spectral { scale: 0.15 },
        };
        let out = train(&model, &full[..=100], &tc, None).unwrap();
        let traj = generate_trajectory(&out.model, 200, None).unwrap();
        let pred = traj.combined_series();
        let mse_pred = mse_loss(&pred[101..], &full[101..]).unwrap();
        let bounded = pred.iter().all(|r| r.iter().all(|v| v.abs() <= 1.0));
        println!(
            "{name}: train {:.3e} pred {:.3e} bounded {} restart {}",
            out.final_loss, mse_pred, bounded, out.best_restart
        );
    }
}
