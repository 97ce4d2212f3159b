use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;
use unitac::dataset::{
    load_dataset, save_dataset, stratified_split, unseen_object_ids, PairedSample,
};
use unitac::geometry::{
    build_geom_dataset, eval_geom, overlay_points, points_csv, train_geom, GeomModel, GeomSplit,
    GeomTrainConfig,
};
use unitac::metrics::{build_eval_report, SsimConstants};
use unitac::model::{Checkpoint, TrainConfig, TrainHistory, Trainer, UniTacModel};
use unitac::plot::{geometry_svg, quiver_svg};
use unitac::sensor::SensorKind;
use unitac::sim::{
    builtin_objects, find_object, generate_paired_dataset, ObjectOutline, PressGrid,
};

use crate::args::*;
use crate::manifest::{write_file, Manifest};

pub fn run(cli: Cli) -> Result<()> {
    let mut manifest = Manifest::new(&cli);
    let name = match &cli.command {
        Command::GenData(a) => {
            gen_data(&cli, a, &mut manifest)?;
            "gen-data"
        }
        Command::Split(a) => {
            split(&cli, a, &mut manifest)?;
            "split"
        }
        Command::Train(a) => {
            train(&cli, a, &mut manifest)?;
            "train"
        }
        Command::Eval(a) => {
            eval(&cli, a, &mut manifest)?;
            "eval"
        }
        Command::Transfer(a) => {
            transfer(&cli, a, &mut manifest)?;
            "transfer"
        }
        Command::Plot(a) => {
            plot(&cli, a, &mut manifest)?;
            "plot"
        }
        Command::TrainGeom(a) => {
            train_geom_cmd(&cli, a, &mut manifest)?;
            "train-geom"
        }
        Command::EvalGeom(a) => {
            eval_geom_cmd(&cli, a, &mut manifest)?;
            "eval-geom"
        }
        Command::PlotGeom(a) => {
            plot_geom(&cli, a, &mut manifest)?;
            "plot-geom"
        }
    };
    let path = manifest.write(name)?;
    eprintln!("manifest: {}", path.display());
    Ok(())
}

fn or_default(path: &Option<PathBuf>, cli: &Cli, file: &str) -> PathBuf {
    path.clone().unwrap_or_else(|| cli.out_dir.join(file))
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn load_samples(path: &Path) -> Result<Vec<PairedSample>> {
    Ok(load_dataset(path)
        .with_context(|| format!("loading {}", path.display()))?
        .samples)
}

fn load_model(path: &Path) -> Result<UniTacModel> {
    Ok(Checkpoint::load(path)
        .with_context(|| format!("loading checkpoint {}", path.display()))?
        .model)
}

fn select_objects(spec: &str) -> Result<Vec<ObjectOutline>> {
    let all = builtin_objects();
    Ok(match spec {
        "all" => all,
        "seen" => all.into_iter().filter(|o| o.seen).collect(),
        "unseen" => all.into_iter().filter(|o| !o.seen).collect(),
        list => {
            let mut picked = Vec::new();
            for id in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let known: Vec<&str> = all.iter().map(|o| o.id.as_str()).collect();
                let o = find_object(&all, id).map_err(|_| {
                    usage(format!(
                        "unknown object '{id}', known: {}",
                        known.join(", ")
                    ))
                })?;
                picked.push(o.clone());
            }
            if picked.is_empty() {
                return Err(usage("no objects selected"));
            }
            picked
        }
    })
}

fn gen_data(cli: &Cli, a: &GenDataArgs, m: &mut Manifest) -> Result<()> {
    let objects = select_objects(&a.objects)?;
    let grid = if a.fast {
        PressGrid::fast()
    } else {
        PressGrid::full()
    };
    let samples = generate_paired_dataset(&objects, &grid, cli.seed)?;
    let out = or_default(&a.out, cli, "data.utd");
    let header = save_dataset(&samples, cli.seed, &out)?;
    println!(
        "{} pairs → {} (crc32 {:08x})",
        header.sample_count,
        out.display(),
        header.payload_crc32
    );
    m.resolved = json!({
        "objects": objects.iter().map(|o| &o.id).collect::<Vec<_>>(),
        "grid": grid,
        "header": header,
    });
    m.outputs.push(out);
    Ok(())
}

fn split(cli: &Cli, a: &SplitArgs, m: &mut Manifest) -> Result<()> {
    let data = or_default(&a.data, cli, "data.utd");
    let samples = load_samples(&data)?;
    let unseen = unseen_object_ids(&builtin_objects());
    let result = stratified_split(&samples, a.test_fraction, cli.seed, &unseen)?;
    let train_out = or_default(&a.train_out, cli, "train.utd");
    let test_out = or_default(&a.test_out, cli, "test.utd");
    save_dataset(&result.train, cli.seed, &train_out)?;
    save_dataset(&result.test, cli.seed, &test_out)?;
    println!("train {} / test {}", result.train.len(), result.test.len());
    m.resolved = json!({ "data": data, "held_out_angles": result.held_out_angles });
    m.outputs.extend([train_out, test_out]);
    Ok(())
}

fn train(cli: &Cli, a: &TrainArgs, m: &mut Manifest) -> Result<()> {
    let train_set = load_samples(&or_default(&a.train, cli, "train.utd"))?;
    let test_set = load_samples(&or_default(&a.test, cli, "test.utd"))?;
    let mut trainer = match &a.resume {
        Some(path) => {
            let mut t = Checkpoint::load(path)
                .with_context(|| format!("loading checkpoint {}", path.display()))?
                .into_trainer();
            if let Some(e) = a.epochs {
                t.config.epochs = e;
            }
            t
        }
        None => {
            let base = if a.fast {
                TrainConfig::fast()
            } else {
                TrainConfig::default()
            };
            let config = TrainConfig {
                epochs: a.epochs.unwrap_or(base.epochs),
                lr: a.lr,
                dropout: a.dropout,
                batch_size: a.batch_size,
                seed: cli.seed,
                ..base
            };
            Trainer::new(&train_set, config)?
        }
    };
    if trainer.epochs_completed >= trainer.config.epochs {
        return Err(usage(format!(
            "checkpoint already has {} epochs; pass a larger --epochs",
            trainer.epochs_completed
        )));
    }
    let start = trainer.epochs_completed;
    let mut history = TrainHistory::default();
    while trainer.epochs_completed < trainer.config.epochs {
        let r = trainer.run_epoch(&train_set, &test_set)?;
        if r.epoch == 1 || r.epoch % 50 == 0 || r.epoch == trainer.config.epochs {
            eprintln!(
                "epoch {:>4}  loss {:.5}  latent L1 {:.4}",
                r.epoch, r.train_loss, r.test_latent_manhattan
            );
        }
        history.records.push(r);
    }

    let ck_path = or_default(&a.checkpoint, cli, "model.json");
    Checkpoint::from_trainer(&trainer)
        .save(&ck_path)
        .with_context(|| format!("writing {}", ck_path.display()))?;
    let hist_path = or_default(&a.history, cli, "history.csv");
    let csv = history.to_csv();
    let csv = match (start, std::fs::read_to_string(&hist_path)) {
        // appending to the earlier run's history: drop the header
        (1.., Ok(mut existing)) => {
            existing.push_str(csv.split_once('\n').map_or("", |(_, rows)| rows));
            existing
        }
        _ => csv,
    };
    write_file(&hist_path, csv.as_bytes())?;
    println!("checkpoint → {}", ck_path.display());
    m.resolved = json!({ "config": trainer.config, "resumed_from_epoch": start });
    m.outputs.extend([ck_path, hist_path]);
    Ok(())
}

fn eval(cli: &Cli, a: &EvalArgs, m: &mut Manifest) -> Result<()> {
    let model = load_model(&or_default(&a.checkpoint, cli, "model.json"))?;
    let test = load_samples(&or_default(&a.test, cli, "test.utd"))?;
    let consts = SsimConstants::default();
    let report = build_eval_report(
        &model,
        &test,
        &unseen_object_ids(&builtin_objects()),
        &consts,
    )?;
    let report_path = or_default(&a.report, cli, "report.csv");
    let table_path = or_default(&a.table, cli, "table.csv");
    write_file(&report_path, report.to_csv().as_bytes())?;
    write_file(&table_path, report.to_table_csv().as_bytes())?;
    print!("{}", report.to_pretty());
    m.resolved = json!({ "ssim_constants": consts });
    m.outputs.extend([report_path, table_path]);
    Ok(())
}

fn sample_at(samples: &[PairedSample], index: usize) -> Result<&PairedSample> {
    samples.get(index).ok_or_else(|| {
        usage(format!(
            "index {index} out of range, dataset has {} samples",
            samples.len()
        ))
    })
}

fn transfer(cli: &Cli, a: &TransferArgs, m: &mut Manifest) -> Result<()> {
    let model = load_model(&or_default(&a.checkpoint, cli, "model.json"))?;
    let samples = load_samples(&or_default(&a.data, cli, "test.utd"))?;
    let sample = sample_at(&samples, a.index)?;
    let from = SensorKind::from(a.from);
    let to = from.other();
    let source = sample.frame(from);
    let predicted = model.transfer(source, to)?;
    let measured = sample.frame(to);
    let nmae = unitac::metrics::nmae(measured, &predicted, model.norm(to))?;

    let out = or_default(&a.out, cli, "transfer.json");
    let svg_path = or_default(&a.svg, cli, "transfer.svg");
    let doc = json!({ "from": from, "to": to, "nmae": nmae, "source": source, "predicted": predicted, "measured": measured });
    write_file(&out, serde_json::to_string_pretty(&doc)?.as_bytes())?;
    let svg = quiver_svg(&[
        (&format!("{} input", from.label()), source),
        (&format!("{} predicted", to.label()), &predicted),
        (&format!("{} measured", to.label()), measured),
    ])?;
    write_file(&svg_path, svg.as_bytes())?;
    println!("{} → {}: NMAE {nmae:.4}", from.label(), to.label());
    m.resolved = json!({ "sample": sample.meta() });
    m.outputs.extend([out, svg_path]);
    Ok(())
}

fn plot(cli: &Cli, a: &PlotArgs, m: &mut Manifest) -> Result<()> {
    let samples = load_samples(&or_default(&a.data, cli, "test.utd"))?;
    let sample = sample_at(&samples, a.index)?;
    let kinds: Vec<SensorKind> = match a.sensor {
        Some(s) => vec![s.into()],
        None => SensorKind::ALL.to_vec(),
    };
    let labels: Vec<String> = kinds.iter().map(|k| k.label().to_string()).collect();
    let panels: Vec<(&str, _)> = kinds
        .iter()
        .zip(&labels)
        .map(|(&k, l)| (l.as_str(), sample.frame(k)))
        .collect();
    let out = or_default(&a.out, cli, "plot.svg");
    write_file(&out, quiver_svg(&panels)?.as_bytes())?;
    m.resolved = json!({ "sample": sample.meta() });
    m.outputs.push(out);
    Ok(())
}

fn geom_split(cli: &Cli, a: &GeomDataArgs) -> Result<GeomSplit> {
    let model = load_model(&or_default(&a.checkpoint, cli, "model.json"))?;
    let objects = builtin_objects();
    let unseen = unseen_object_ids(&objects);
    let samples: Vec<PairedSample> = load_samples(&or_default(&a.data, cli, "data.utd"))?
        .into_iter()
        .filter(|s| unseen.contains(&s.meta().object_id))
        .collect();
    if samples.is_empty() {
        return Err(usage(
            "dataset has no unseen-object presses; generate with --objects all or unseen",
        ));
    }
    Ok(build_geom_dataset(
        &model,
        &samples,
        &objects,
        a.test_fraction,
        cli.seed,
    )?)
}

fn geom_path(cli: &Cli, sensor: Sensor) -> PathBuf {
    cli.out_dir.join(format!("geom-{sensor}.json"))
}

fn train_geom_cmd(cli: &Cli, a: &TrainGeomArgs, m: &mut Manifest) -> Result<()> {
    let split = geom_split(cli, &a.data)?;
    let kind = SensorKind::from(a.sensor);
    let base = GeomTrainConfig::for_sensor(kind, cli.seed);
    let config = GeomTrainConfig {
        epochs: a.epochs,
        lr: a.lr,
        weight_decay: a.weight_decay,
        batch_size: a.batch_size,
        dropout: a.dropout.unwrap_or(base.dropout),
        ..base
    };
    let model = train_geom(kind, &split.get(kind).train, &config)?;
    let out = a.out.clone().unwrap_or_else(|| geom_path(cli, a.sensor));
    model.save(&out)?;
    let e = eval_geom(&model, &split.get(kind).test)?;
    println!(
        "{} regressor → {} (test error {:.4} mm)",
        kind.label(),
        out.display(),
        e.mean_error_mm
    );
    m.resolved = json!({ "config": config, "held_out_angles": split.held_out_angles });
    m.outputs.push(out);
    Ok(())
}

fn both_or(s: Option<Sensor>) -> Vec<Sensor> {
    s.map_or_else(|| vec![Sensor::Uskin, Sensor::Papill], |s| vec![s])
}

fn eval_geom_cmd(cli: &Cli, a: &EvalGeomArgs, m: &mut Manifest) -> Result<()> {
    let split = geom_split(cli, &a.data)?;
    let mut csv = String::from("train_sensor,test_sensor,samples,mean_error_mm\n");
    for train_s in both_or(a.train_sensor) {
        let model = GeomModel::load(geom_path(cli, train_s)).with_context(|| {
            format!(
                "loading {} (run train-geom --sensor {train_s})",
                geom_path(cli, train_s).display()
            )
        })?;
        for test_s in both_or(a.test_sensor) {
            let test = &split.get(test_s.into()).test;
            let e = eval_geom(&model, test)?;
            println!(
                "train {train_s:<6} test {test_s:<6} {:.4} mm",
                e.mean_error_mm
            );
            csv.push_str(&format!(
                "{train_s},{test_s},{},{}\n",
                test.len(),
                e.mean_error_mm
            ));
        }
    }
    let out = or_default(&a.report, cli, "geom_eval.csv");
    write_file(&out, csv.as_bytes())?;
    m.outputs.push(out);
    Ok(())
}

fn plot_geom(cli: &Cli, a: &PlotGeomArgs, m: &mut Manifest) -> Result<()> {
    let split = geom_split(cli, &a.data)?;
    let model = GeomModel::load(geom_path(cli, a.train_sensor))?;
    let test = &split.get(a.test_sensor.into()).test;
    let objects = builtin_objects();
    let overlay = overlay_points(&model, test, &objects)?;
    let out = or_default(&a.out, cli, "geom.svg");
    let csv_path = out.with_extension("csv");
    let svg = geometry_svg(overlay.outline, &overlay.predicted, Some(&overlay.truth));
    write_file(&out, svg.as_bytes())?;
    write_file(&csv_path, points_csv(&overlay.predicted).as_bytes())?;
    let ids: BTreeSet<&str> = test.iter().map(|s| s.object_id.as_str()).collect();
    m.resolved = json!({ "objects": ids, "points": overlay.predicted.len() });
    m.outputs.extend([out, csv_path]);
    Ok(())
}
