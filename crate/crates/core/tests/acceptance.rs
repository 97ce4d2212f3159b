//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints its own PASS/FAIL line even when the others pass.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use unitac::dataset::{stratified_split, unseen_object_ids, PairedSample};
use unitac::geometry::{
    build_geom_dataset, eval_geom_grid, extract_ground_truth, lateral_positions, map_back,
    overlay_points, train_geom, GeomModel, GeomTrainConfig,
};
use unitac::metrics::{build_eval_report, nmae, ssim, ssim_channel, EvalReport, SsimConstants};
use unitac::model::{
    training_step, Checkpoint, Direction, OptimizerStates, TrainConfig, TrainHistory, Trainer,
    DECODER_OUTPUT,
};
use unitac::nn::{
    adam_step, adam_update, l1_loss_grad, mae_loss_grad, Activation, AdamConfig, AdamState,
    DenseLayer, Gradients, Mlp,
};
use unitac::plot::{geometry_svg, quiver_svg};
use unitac::rng::stream;
use unitac::sensor::{SensorKind, TactileFrame};
use unitac::sim::{
    builtin_objects, find_object, generate_paired_dataset, ObjectOutline, PressGrid,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("gradient oracle", gradient_oracle),
        ("Adam first step", adam_first_step),
        ("metric identities", metric_identities),
        ("architecture audit", architecture_audit),
        ("loss decomposition", loss_decomposition),
        ("split safety", split_safety),
        ("end-to-end trends", end_to_end_trends),
        ("downstream geometry trend", downstream_trend),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .map_or("panicked".into(), |m| format!("panicked: {m}")))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name} ({secs:.1} s): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- 1

/// Plain-loop forward pass over raw layer parameters; the loss oracle for
/// finite differences.
fn oracle_forward(layers: &[(usize, usize, Vec<f64>, Vec<f64>)], input: &[f64]) -> Vec<f64> {
    let mut x = input.to_vec();
    for (k, (inp, out, w, b)) in layers.iter().enumerate() {
        let mut y = vec![0.0; *out];
        for o in 0..*out {
            let mut s = b[o];
            for i in 0..*inp {
                s += w[o * inp + i] * x[i];
            }
            y[o] = if k + 1 < layers.len() { s.max(0.0) } else { s };
        }
        x = y;
    }
    x
}

fn oracle_mae(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter()
        .zip(target)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64
}

fn gradient_oracle() -> Outcome {
    let t0 = Instant::now();
    const H: f64 = 1e-5;
    let (mut total, mut good) = (0usize, 0usize);
    for net in 0..20u64 {
        let mut rng = stream(2024, "oracle", &[net]);
        let depth = rng.random_range(2..=4);
        let widths: Vec<usize> = (0..=depth).map(|_| rng.random_range(2..=7)).collect();
        let (din, dout) = (widths[0], widths[depth]);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        // random biases too: zero biases put dead-input units exactly on the ReLU kink
        let layers = widths
            .windows(2)
            .map(|w| {
                let weights = (0..w[0] * w[1]).map(|_| normal()).collect();
                let bias = (0..w[1]).map(|_| 0.5 * normal()).collect();
                DenseLayer::new(w[0], w[1], weights, bias)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let mut activations = vec![Activation::Relu; depth];
        activations[depth - 1] = Activation::Linear;
        let mlp = Mlp::from_layers(layers, activations, vec![0.0; depth - 1])
            .map_err(|e| e.to_string())?;
        let batch: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
            .map(|_| {
                (
                    (0..din).map(|_| normal()).collect(),
                    (0..dout).map(|_| normal()).collect(),
                )
            })
            .collect();
        // even networks use the reconstruction MAE, odd ones the geometry L1
        let grad_fn = if net % 2 == 0 {
            mae_loss_grad
        } else {
            l1_loss_grad
        };

        let mut analytic = Gradients::zeros_like(&mlp);
        for (x, t) in &batch {
            let (y, tape) = mlp
                .forward_train(x, &mut rng_unused())
                .map_err(|e| e.to_string())?;
            let mut g = grad_fn(&y, t).map_err(|e| e.to_string())?;
            g.iter_mut().for_each(|v| *v /= batch.len() as f64);
            mlp.backward_into(tape, &g, &mut analytic)
                .map_err(|e| e.to_string())?;
        }

        let raw: Vec<_> = mlp
            .layers()
            .iter()
            .map(|l| {
                (
                    l.in_dim(),
                    l.out_dim(),
                    l.weights().to_vec(),
                    l.bias().to_vec(),
                )
            })
            .collect();
        let loss = |params: &[(usize, usize, Vec<f64>, Vec<f64>)]| {
            batch
                .iter()
                .map(|(x, t)| oracle_mae(&oracle_forward(params, x), t))
                .sum::<f64>()
                / batch.len() as f64
        };
        for (k, g) in analytic.layers.iter().enumerate() {
            for (is_bias, grads) in [(false, &g.weights), (true, &g.bias)] {
                for (j, &a) in grads.iter().enumerate() {
                    let mut plus = raw.clone();
                    let mut minus = raw.clone();
                    if is_bias {
                        plus[k].3[j] += H;
                        minus[k].3[j] -= H;
                    } else {
                        plus[k].2[j] += H;
                        minus[k].2[j] -= H;
                    }
                    let n = (loss(&plus) - loss(&minus)) / (2.0 * H);
                    let scale = a.abs().max(n.abs());
                    total += 1;
                    if scale < 1e-10 || (a - n).abs() / scale < 1e-4 {
                        good += 1;
                    }
                }
            }
        }
    }
    let frac = good as f64 / total as f64;
    let elapsed = t0.elapsed();
    ensure!(
        frac >= 0.99,
        "only {good}/{total} parameters within 1e-4 relative"
    );
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "{good}/{total} parameters agree ({:.2}%)",
        100.0 * frac
    ))
}

/// Dropout is off in the oracle networks, so the stream is never consumed.
fn rng_unused() -> unitac::rng::Rng {
    stream(0, "unused", &[])
}

// ---------------------------------------------------------------- 2

fn adam_first_step() -> Outcome {
    let cfg = AdamConfig::default();
    let lr = 1e-3;
    let mut worst: f64 = 0.0;
    for (w0, g) in [(0.5, 0.3), (-1.2, -4.0), (0.0, 1e-3), (2.0, 0.0)] {
        // bias-corrected first moment is g, second is g², so the step is lr·g/(|g|+ε)
        let expected = w0 - lr * g / (f64::abs(g) + cfg.eps);

        let (mut p, mut m, mut v) = ([w0], [0.0], [0.0]);
        adam_update(&mut p, &[g], &mut m, &mut v, 1, &cfg, lr, 0.0);
        worst = worst.max((p[0] - expected).abs());

        let layer = DenseLayer::new(1, 1, vec![w0], vec![w0]).map_err(|e| e.to_string())?;
        let mut mlp = Mlp::from_layers(vec![layer], vec![Activation::Linear], vec![])
            .map_err(|e| e.to_string())?;
        let mut grads = Gradients::zeros_like(&mlp);
        grads.layers[0].weights[0] = g;
        grads.layers[0].bias[0] = g;
        let mut state = AdamState::new(&mlp);
        adam_step(&mut mlp, &grads, &mut state, &cfg, lr, 0.0).map_err(|e| e.to_string())?;
        let l = &mlp.layers()[0];
        worst = worst
            .max((l.weights()[0] - expected).abs())
            .max((l.bias()[0] - expected).abs());
    }
    ensure!(worst <= 1e-10, "max deviation {worst:e}");
    Ok(format!("max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- 3

/// SSIM of two 2-element signals written out term by term.
fn ssim_two(x: [f64; 2], y: [f64; 2], c1: f64, c2: f64) -> f64 {
    let mx = (x[0] + x[1]) / 2.0;
    let my = (y[0] + y[1]) / 2.0;
    let vx = ((x[0] - x[1]) / 2.0).powi(2);
    let vy = ((y[0] - y[1]) / 2.0).powi(2);
    let cov = (x[0] - x[1]) * (y[0] - y[1]) / 4.0;
    (2.0 * mx * my + c1) * (2.0 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

fn metric_identities() -> Outcome {
    let objects = builtin_objects();
    let grid = PressGrid {
        angles_deg: vec![0.0, 17.0, 45.0, 90.0],
        forces_n: vec![4.0, 7.5, 10.0],
    };
    let data = generate_paired_dataset(&objects, &grid, 5).map_err(|e| e.to_string())?;
    let consts = SsimConstants::default();
    let mut worst_ssim: f64 = 0.0;
    let mut worst_nmae: f64 = 0.0;
    for kind in SensorKind::ALL {
        let frames: Vec<&TactileFrame> = data.iter().map(|s| s.frame(kind)).collect();
        let stats = unitac::sensor::NormStats::from_frames(kind, frames.iter().copied())
            .map_err(|e| e.to_string())?;
        for f in &frames {
            worst_ssim = worst_ssim
                .max((ssim(f, f, &stats, &consts).map_err(|e| e.to_string())? - 1.0).abs());
            worst_nmae = worst_nmae.max(nmae(f, f, &stats).map_err(|e| e.to_string())?.abs());
        }
    }
    ensure!(worst_ssim <= 1e-9, "SSIM(X,X) off by {worst_ssim:e}");
    ensure!(worst_nmae == 0.0, "NMAE(X,X) = {worst_nmae:e}");

    let cases = [
        ([0.0, 1.0], [1.0, 0.0]),
        ([0.2, 0.8], [0.8, 0.2]),
        ([0.5, 0.5], [0.0, 1.0]),
        ([0.0, 0.0], [1.0, 1.0]),
        ([1e-3, 0.0], [0.0, -1e-3]),
        ([0.9, 0.1], [0.3, 0.31]),
    ];
    let mut worst_2: f64 = 0.0;
    for (x, y) in cases {
        let got = ssim_channel(&x, &y, &consts);
        worst_2 = worst_2.max((got - ssim_two(x, y, consts.c1, consts.c2)).abs());
    }
    ensure!(worst_2 <= 1e-12, "2-taxel SSIM deviates by {worst_2:e}");
    Ok(format!(
        "|SSIM(X,X)-1| ≤ {worst_ssim:.1e}, NMAE(X,X) = 0, 2-taxel deviation {worst_2:.1e}"
    ))
}

// ---------------------------------------------------------------- 4

fn tiny_seen(seed: u64) -> Vec<PairedSample> {
    let objects: Vec<ObjectOutline> = builtin_objects().into_iter().filter(|o| o.seen).collect();
    let grid = PressGrid {
        angles_deg: vec![0.0, 30.0, 60.0, 90.0],
        forces_n: vec![4.0, 10.0],
    };
    generate_paired_dataset(&objects, &grid, seed).expect("generation")
}

fn architecture_audit() -> Outcome {
    let data = tiny_seen(3);
    let config = TrainConfig {
        epochs: 1,
        seed: 3,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(&data, config).map_err(|e| e.to_string())?;
    trainer.run(&data, &data[..4]).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.json");
    Checkpoint::from_trainer(&trainer)
        .save(&path)
        .map_err(|e| e.to_string())?;

    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&path).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let arch = &json["architecture"];
    let widths = |v: &serde_json::Value| -> Vec<u64> {
        v.as_array()
            .map(|a| a.iter().filter_map(|x| x.as_u64()).collect())
            .unwrap_or_default()
    };
    ensure!(
        widths(&arch["encoder_uskin"]) == [72, 64, 48, 16],
        "uSkin encoder {:?}",
        arch["encoder_uskin"]
    );
    ensure!(
        widths(&arch["encoder_papill"]) == [27, 64, 48, 16],
        "PapillArray encoder {:?}",
        arch["encoder_papill"]
    );
    ensure!(
        widths(&arch["decoder"]) == [16, 64, 96, 99],
        "decoder {:?}",
        arch["decoder"]
    );
    ensure!(
        json["decoder_output_order"] == serde_json::json!(["USKIN", "PAPILL"]),
        "decoder output order"
    );

    // the stored weights agree with the declared widths
    let ck = Checkpoint::load(&path).map_err(|e| e.to_string())?;
    ensure!(
        ck.model.encoder_uskin.widths() == [72, 64, 48, 16],
        "stored uSkin encoder shape"
    );
    ensure!(
        ck.model.encoder_papill.widths() == [27, 64, 48, 16],
        "stored PapillArray encoder shape"
    );
    ensure!(
        ck.model.decoder.widths() == [16, 64, 96, DECODER_OUTPUT],
        "stored decoder shape"
    );
    Ok("encoders (64, 48) → 16, decoder (64, 96) → 99".into())
}

// ---------------------------------------------------------------- 5

fn loss_decomposition() -> Outcome {
    let data = tiny_seen(4);
    let batch = &data[..16];
    let config = TrainConfig {
        dropout: 0.0,
        seed: 4,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(&data, config.clone()).map_err(|e| e.to_string())?;
    let model = trainer.model.clone();

    // four batch-mean MAEs computed independently from eval-mode passes
    let mut terms = [0.0; 4];
    for s in batch {
        for from in SensorKind::ALL {
            let x = model
                .norm(from)
                .normalize_frame(s.frame(from))
                .map_err(|e| e.to_string())?;
            let z = model.encoder(from).forward(&x).map_err(|e| e.to_string())?;
            let y = model.decoder.forward(&z).map_err(|e| e.to_string())?;
            let (yu, yp) = y.split_at(SensorKind::USkin.flat_len());
            for (to, recon) in [(SensorKind::USkin, yu), (SensorKind::Papill, yp)] {
                let target = model
                    .norm(to)
                    .normalize_frame(s.frame(to))
                    .map_err(|e| e.to_string())?;
                terms[Direction { from, to }.index()] +=
                    oracle_mae(recon, &target) / batch.len() as f64;
            }
        }
    }
    let expected: f64 = terms.iter().sum();

    let mut optim = OptimizerStates::new(&model);
    let step = training_step(
        &mut trainer.model,
        batch,
        &mut optim,
        &config,
        &mut stream(4, "dropout", &[1]),
    )
    .map_err(|e| e.to_string())?;
    let diff = (step.total - expected).abs();
    let term_diff = step
        .terms
        .0
        .iter()
        .zip(&terms)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure!(
        diff <= 1e-12,
        "total {} vs sum of terms {expected} (diff {diff:e})",
        step.total
    );
    ensure!(
        term_diff <= 1e-12,
        "per-direction terms deviate by {term_diff:e}"
    );
    Ok(format!(
        "loss {:.6} = Σ four MAEs (diff {diff:.1e})",
        step.total
    ))
}

// ---------------------------------------------------------------- 6

fn split_safety() -> Outcome {
    let objects = builtin_objects();
    let data =
        generate_paired_dataset(&objects, &PressGrid::fast(), 6).map_err(|e| e.to_string())?;
    let unseen = unseen_object_ids(&objects);
    let unseen_total = data
        .iter()
        .filter(|s| unseen.contains(&s.meta().object_id))
        .count();
    let key = |s: &PairedSample| {
        (
            s.meta().object_id.clone(),
            unitac::dataset::angle_key(s.meta().angle_deg),
        )
    };

    let t0 = Instant::now();
    for seed in 0..100 {
        let split = stratified_split(&data, 0.1, seed, &unseen).map_err(|e| e.to_string())?;
        let train_keys: BTreeSet<_> = split.train.iter().map(key).collect();
        let test_keys: BTreeSet<_> = split.test.iter().map(key).collect();
        let shared = train_keys.intersection(&test_keys).count();
        ensure!(
            shared == 0,
            "seed {seed}: {shared} (object, angle) keys in both splits"
        );
        let unseen_test = split
            .test
            .iter()
            .filter(|s| unseen.contains(&s.meta().object_id))
            .count();
        ensure!(
            unseen_test == unseen_total
                && split
                    .train
                    .iter()
                    .all(|s| !unseen.contains(&s.meta().object_id)),
            "seed {seed}: unseen samples leaked into train"
        );
        ensure!(
            split.train.len() + split.test.len() == data.len(),
            "seed {seed}: samples lost"
        );
    }
    let elapsed = t0.elapsed();
    ensure!(
        elapsed < Duration::from_secs(5),
        "100 splits took {elapsed:?}"
    );
    Ok(format!(
        "100 seeds, no shared keys, {unseen_total} unseen samples always in test ({elapsed:.2?})"
    ))
}

// ---------------------------------------------------------------- 7, 8, 9

const PIPELINE_SEED: u64 = 1;

struct Pipeline {
    report: EvalReport,
    history: TrainHistory,
    geom_grid: [[f64; 2]; 2],
    train_time: Duration,
    files: Vec<(&'static str, Vec<u8>)>,
}

/// Fast-profile run: seen objects → split → train → evaluate → plot, then the
/// geometry task on the unseen object. Everything written to disk by the CLI
/// is collected as bytes.
fn run_pipeline(seed: u64) -> Result<Pipeline, unitac::Error> {
    let objects = builtin_objects();
    let seen: Vec<ObjectOutline> = objects.iter().filter(|o| o.seen).cloned().collect();
    let unseen: Vec<ObjectOutline> = objects.iter().filter(|o| !o.seen).cloned().collect();
    let data = generate_paired_dataset(&seen, &PressGrid::fast(), seed)?;
    let split = stratified_split(&data, 0.1, seed, &BTreeSet::new())?;

    let t0 = Instant::now();
    let mut trainer = Trainer::new(
        &split.train,
        TrainConfig {
            seed,
            ..TrainConfig::fast()
        },
    )?;
    let history = trainer.run(&split.train, &split.test)?;
    let train_time = t0.elapsed();
    let model = &trainer.model;
    let report = build_eval_report(
        model,
        &split.test,
        &BTreeSet::new(),
        &SsimConstants::default(),
    )?;

    let sample = &split.test[0];
    let predicted = model.transfer(sample.frame(SensorKind::Papill), SensorKind::USkin)?;
    let quiver = quiver_svg(&[
        ("PapillArray", sample.frame(SensorKind::Papill)),
        ("uSkin predicted", &predicted),
        ("uSkin measured", sample.frame(SensorKind::USkin)),
    ])?;

    let udata = generate_paired_dataset(&unseen, &PressGrid::fast(), seed)?;
    let gsplit = build_geom_dataset(model, &udata, &objects, 0.1, seed)?;
    let geom = SensorKind::ALL.map(|k| {
        train_geom(
            k,
            &gsplit.get(k).train,
            &GeomTrainConfig::for_sensor(k, seed),
        )
    });
    let [gu, gp] = geom;
    let geom_models: [GeomModel; 2] = [gu?, gp?];
    let geom_grid = eval_geom_grid(&geom_models, &gsplit)?;
    let o = overlay_points(&geom_models[0], &gsplit.uskin.test, &objects)?;
    let overlay = geometry_svg(o.outline, &o.predicted, Some(&o.truth));

    let files = vec![
        ("checkpoint", Checkpoint::from_trainer(&trainer).to_json()?),
        ("history.csv", history.to_csv().into_bytes()),
        ("report.csv", report.to_csv().into_bytes()),
        ("table.csv", report.to_table_csv().into_bytes()),
        ("transfer.svg", quiver.into_bytes()),
        ("geom models", serde_json::to_vec(&geom_models)?),
        ("geom.svg", overlay.into_bytes()),
    ];
    Ok(Pipeline {
        report,
        history,
        geom_grid,
        train_time,
        files,
    })
}

fn reference_run() -> Result<&'static Pipeline, String> {
    static RUN: OnceLock<Result<Pipeline, String>> = OnceLock::new();
    RUN.get_or_init(|| run_pipeline(PIPELINE_SEED).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(Clone::clone)
}

fn end_to_end_trends() -> Outcome {
    let run = reference_run()?;
    let seen = run
        .report
        .all_seen
        .as_ref()
        .ok_or("report has no seen aggregate")?;
    let uu = Direction {
        from: SensorKind::USkin,
        to: SensorKind::USkin,
    };
    let pp = Direction {
        from: SensorKind::Papill,
        to: SensorKind::Papill,
    };
    let pu = Direction {
        from: SensorKind::Papill,
        to: SensorKind::USkin,
    };
    let (ssim_uu, ssim_pp) = (seen.ssim.get(uu), seen.ssim.get(pp));
    let (nmae_uu, nmae_pu) = (seen.nmae.get(uu), seen.nmae.get(pu));
    let first = run
        .history
        .records
        .first()
        .ok_or("empty history")?
        .test_latent_manhattan;
    let last = run
        .history
        .records
        .last()
        .ok_or("empty history")?
        .test_latent_manhattan;

    ensure!(
        run.history.records.len() == 200,
        "{} epochs",
        run.history.records.len()
    );
    ensure!(
        ssim_uu >= 0.95 && ssim_pp >= 0.95,
        "(a) self SSIM uSkin {ssim_uu:.4}, PapillArray {ssim_pp:.4}"
    );
    ensure!(
        nmae_pu >= nmae_uu,
        "(b) PapillArray→uSkin NMAE {nmae_pu:.4} < uSkin→uSkin {nmae_uu:.4}"
    );
    ensure!(
        last < 0.5 * first,
        "(c) latent distance {last:.4} vs epoch-1 {first:.4}"
    );
    ensure!(
        run.train_time < Duration::from_secs(15 * 60),
        "training took {:?}",
        run.train_time
    );
    Ok(format!(
        "(a) SSIM uu {ssim_uu:.4}, pp {ssim_pp:.4}; (b) NMAE pu {nmae_pu:.4} ≥ uu {nmae_uu:.4}; \
         (c) latent L1 {first:.3} → {last:.3}; trained in {:.0?}",
        run.train_time
    ))
}

fn downstream_trend() -> Outcome {
    let run = reference_run()?;
    let g = run.geom_grid;
    // [train][test], uSkin first
    ensure!(
        g[0][0] < g[0][1],
        "uSkin-trained: same {:.4} mm ≥ cross {:.4} mm",
        g[0][0],
        g[0][1]
    );
    ensure!(
        g[1][1] < g[1][0],
        "PapillArray-trained: same {:.4} mm ≥ cross {:.4} mm",
        g[1][1],
        g[1][0]
    );

    let objects = builtin_objects();
    let irregular = find_object(&objects, "irregular").map_err(|e| e.to_string())?;
    let angles: Vec<f64> = (0..4)
        .flat_map(|r| {
            PressGrid::fast()
                .angles_deg
                .into_iter()
                .map(move |a| unitac::sim::world_angle(r, a))
        })
        .collect();
    let truths: Vec<Vec<f64>> = angles
        .iter()
        .map(|&a| extract_ground_truth(irregular, a).map(|t| t.offsets))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure!(
        truths.iter().all(|t| t[5] == 0.0),
        "centre offset not exactly 0"
    );
    let points = map_back(irregular, &truths, &angles).map_err(|e| e.to_string())?;
    let round_trip = points
        .iter()
        .map(|&p| irregular.distance_to_boundary(p))
        .fold(0.0, f64::max);
    ensure!(round_trip < 1e-6, "round trip error {round_trip:e} mm");

    let circle = find_object(&objects, "circle-rigid").map_err(|e| e.to_string())?;
    let mut circle_err: f64 = 0.0;
    for a in (0..360).map(|a| a as f64 + 0.5) {
        let t = extract_ground_truth(circle, a).map_err(|e| e.to_string())?;
        for (x, off) in lateral_positions().iter().zip(&t.offsets) {
            circle_err = circle_err.max((off - (20.0 - (400.0 - x * x).sqrt())).abs());
        }
    }
    ensure!(circle_err < 1e-9, "circle profile off by {circle_err:e} mm");
    Ok(format!(
        "uSkin-trained {:.3} < {:.3} mm, PapillArray-trained {:.3} < {:.3} mm; round trip {round_trip:.1e} mm; circle {circle_err:.1e} mm",
        g[0][0], g[0][1], g[1][1], g[1][0]
    ))
}

fn determinism() -> Outcome {
    let a = reference_run()?;
    let b = run_pipeline(PIPELINE_SEED).map_err(|e| e.to_string())?;
    let mut summary = Vec::new();
    for ((name, x), (_, y)) in a.files.iter().zip(&b.files) {
        let (cx, cy) = (crc32fast::hash(x), crc32fast::hash(y));
        ensure!(cx == cy && x == y, "{name} differs: {cx:08x} vs {cy:08x}");
        summary.push(format!("{name} {cx:08x}"));
    }
    Ok(summary.join(", "))
}
