// Scratch tuning harness (removed before release); run with --release.
use qdm_core::model::{Ansatz, QdmConfig, QdmModel};
use qdm_core::qrc::{run_qrc, QrcConfig};
use qdm_core::signals::{normalize, rayleigh_trajectory, RayleighSpec};
use qdm_core::training::{
    mse_loss, predict, train, GradientMethod, ThetaInit, TrainConfig, TrainStage,
};
use std::f64::consts::PI;
use std::time::Instant;

fn cosine_series(len: usize) -> Vec<Vec<f64>> {
    (0..=len).map(|t| vec![0.5 * (0.04 * PI * t as f64).cos()]).collect()
}

fn qdm_cfg(ansatz: Ansatz, depth: usize, channels: usize, n_m: usize, n_x: usize) -> QdmConfig {
    QdmConfig {
        n_m,
        n_x,
        ansatz,
        depth,
        channels,
        seed: 42,
        tiea_tau: 1.0,
        lecl: false,
        channel_weights: None,
        train_weights: false,
    }
}

fn tc(epochs: usize, restarts: usize, init: ThetaInit) -> TrainConfig {
    TrainConfig {
        train_len: 100,
        predict_len: 100,
        epochs,
        learning_rate: 0.01,
        beta1: 0.9,
        beta2: 0.999,
        epsilon: 1e-8,
        seed: 7,
        gradient_method: GradientMethod::ParameterShiftRecurrence,
        extra_stages: vec![
            TrainStage { epochs: epochs / 2, learning_rate: 0.001 },
            TrainStage { epochs: epochs / 4, learning_rate: 1e-4 },
        ],
        restarts,
        theta_init: init,
    }
}

fn eval_task(name: &str, cfg: QdmConfig, target: &[Vec<f64>], t_cfg: &TrainConfig) {
    let t0 = Instant::now();
    let model = QdmModel::new(cfg).unwrap();
    let out = train(&model, &target[..=t_cfg.train_len], t_cfg, None).unwrap();
    let pred = predict(&out.model, t_cfg.train_len, t_cfg.predict_len, None).unwrap();
    let mse_pred = mse_loss(&pred, &target[t_cfg.train_len + 1..]).unwrap();
    println!(
        "{name}: train {:.3e} pred {:.3e} restart {} [{:.1}s]",
        out.final_loss,
        mse_pred,
        out.best_restart,
        t0.elapsed().as_secs_f64()
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("all");

    if which == "all" || which == "cosine" {
        let target = cosine_series(200);
        let mut lecl_cfg = qdm_cfg(Ansatz::Hea, 1, 1, 1, 1);
        lecl_cfg.lecl = true;
        eval_task(
            "cos HEA d1 +LECL",
            lecl_cfg,
            &target,
            &tc(4000, 3, ThetaInit::Spectral { scale: 0.1 }),
        );
        eval_task(
            "cos HEA d1 spectral",
            qdm_cfg(Ansatz::Hea, 1, 1, 1, 1),
            &target,
            &tc(4000, 3, ThetaInit::Spectral { scale: 0.1 }),
        );
        eval_task(
            "cos HEA d2 spectral",
            qdm_cfg(Ansatz::Hea, 2, 1, 1, 1),
            &target,
            &tc(4000, 3, ThetaInit::Spectral { scale: 0.1 }),
        );
        eval_task(
            "cos TIEA d1 uniform",
            qdm_cfg(Ansatz::Tiea, 1, 1, 1, 1),
            &target,
            &tc(4000, 3, ThetaInit::Uniform { scale: 0.2 }),
        );
        eval_task(
            "cos TIEA d2 uniform",
            qdm_cfg(Ansatz::Tiea, 2, 1, 1, 1),
            &target,
            &tc(4000, 3, ThetaInit::Uniform { scale: 0.2 }),
        );
    }

    if which == "all" || which == "composite" {
        let w = 0.04 * PI;
        let periodic: Vec<Vec<f64>> = (0..=200)
            .map(|t| {
                let t = t as f64;
                vec![0.2 * (w * t).cos() + 0.3 * (2.0 * w * t).sin()]
            })
            .collect();
        let aperiodic: Vec<Vec<f64>> = (0..=200)
            .map(|t| {
                let t = t as f64;
                vec![0.2 * (w * t).cos() + 0.3 * (5f64.sqrt() * w * t).sin()]
            })
            .collect();
        let mut c2 = qdm_cfg(Ansatz::Hea, 1, 2, 1, 1);
        c2.lecl = true;
        eval_task(
            "periodic HEA d1 2ch +LECL",
            c2.clone(),
            &periodic,
            &tc(4000, 3, ThetaInit::Spectral { scale: 0.1 }),
        );
        eval_task(
            "aperiodic HEA d1 2ch +LECL",
            c2,
            &aperiodic,
            &tc(4000, 3, ThetaInit::Spectral { scale: 0.1 }),
        );
    }

    if which == "all" || which == "rayleigh" {
        for (sub, depth, tau, scale, restarts) in [
            (50usize, 2usize, 1.0f64, 0.3f64, 8usize),
            (50, 2, 0.5, 0.3, 8),
            (50, 2, 2.0, 0.3, 8),
            (50, 2, 1.0, 0.6, 8),
            (25, 2, 1.0, 0.3, 8),
        ] {
            let spec = RayleighSpec {
                epsilon: PI,
                delta: 3.0,
                omega: PI,
                x0: 0.0,
                v0: 0.01,
                dt: 1e-3,
                steps: sub * 200,
                subsample: sub,
            };
            let raw = rayleigh_trajectory(&spec).unwrap();
            let (norm, _) = normalize(&raw[..=100], (-0.9, 0.9)).unwrap();
            let t0 = Instant::now();
            let mut rcfg = qdm_cfg(Ansatz::Tiea, depth, 1, 1, 2);
            rcfg.lecl = true;
            rcfg.tiea_tau = tau;
            let model = QdmModel::new(rcfg).unwrap();
            let cfg = TrainConfig {
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
                restarts,
                theta_init: ThetaInit::Uniform { scale },
            };
            let out = train(&model, &norm, &cfg, None).unwrap();
            println!(
                "rayleigh sub={sub} d={depth} tau={tau} scale={scale}: train {:.3e} restart {} [{:.1}s]",
                out.final_loss,
                out.best_restart,
                t0.elapsed().as_secs_f64()
            );
        }
    }

    if which == "all" || which == "qrc" {
        let series: Vec<f64> = (0..=300).map(|t| 0.5 * (0.04 * PI * t as f64).cos()).collect();
        let mut cells: Vec<f64> = Vec::new();
        for tau in [2.6, 2.8, 3.0] {
            let mut errs = Vec::new();
            for seed in 0..7u64 {
                let cfg = QrcConfig {
                    n_qubits: 3,
                    tau,
                    v_slices: 5,
                    hamiltonian: None,
                    washout: 10,
                    ridge: 1e-8,
                    seed,
                };
                let out = run_qrc(&cfg, &series, 100, 100).unwrap();
                errs.push(out.mse_pred);
            }
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            println!(
                "qrc tau {tau}: {:?} median {:.3e}",
                errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>(),
                errs[errs.len() / 2]
            );
            cells.extend(errs);
        }
        cells.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!("qrc median all cells: {:.3e}", cells[cells.len() / 2]);
    }
}
