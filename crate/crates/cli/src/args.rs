use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use unitac::sensor::SensorKind;

/// Cross-sensor tactile representation learning on simulated uSkin and
/// PapillArray presses.
#[derive(Parser, Debug, Serialize)]
#[command(version, about)]
pub struct Cli {
    /// Seed for data noise, splits and training.
    #[arg(long, global = true, env = "UNITAC_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Directory that receives outputs and run manifests.
    #[arg(long, global = true, env = "UNITAC_OUT_DIR", default_value = "runs")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Simulate paired presses and write a `.utd` dataset.
    GenData(GenDataArgs),
    /// Split a dataset into train and test files by held-out approach angles.
    Split(SplitArgs),
    /// Train the shared encoder/decoder model.
    Train(TrainArgs),
    /// Per-object NMAE and SSIM for the four reconstruction directions.
    Eval(EvalArgs),
    /// Convert one frame into the other sensor's format.
    Transfer(TransferArgs),
    /// Quiver plot of a sample's frames.
    Plot(PlotArgs),
    /// Train a latent → local geometry regressor on the unseen object.
    TrainGeom(TrainGeomArgs),
    /// Mean geometry error for train/test sensor combinations.
    EvalGeom(EvalGeomArgs),
    /// Map predicted geometry back onto the unseen object's outline.
    PlotGeom(PlotGeomArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensor {
    Uskin,
    Papill,
}

impl From<Sensor> for SensorKind {
    fn from(s: Sensor) -> Self {
        match s {
            Sensor::Uskin => SensorKind::USkin,
            Sensor::Papill => SensorKind::Papill,
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sensor::Uskin => "uskin",
            Sensor::Papill => "papill",
        })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GenDataArgs {
    /// `all`, `seen`, `unseen` or a comma-separated list of object ids.
    #[arg(long, default_value = "all")]
    pub objects: String,
    /// Reduced grid: 31 angles (3° steps) × 9 forces (0.75 N steps).
    #[arg(long)]
    pub fast: bool,
    /// Output file [default: <out-dir>/data.utd].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SplitArgs {
    /// Dataset to split [default: <out-dir>/data.utd].
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Fraction of approach angles held out per seen object.
    #[arg(long, default_value_t = 0.1)]
    pub test_fraction: f64,
    /// [default: <out-dir>/train.utd]
    #[arg(long)]
    pub train_out: Option<PathBuf>,
    /// [default: <out-dir>/test.utd]
    #[arg(long)]
    pub test_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// [default: <out-dir>/train.utd]
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Evaluated after every epoch [default: <out-dir>/test.utd].
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Total epochs [default: 1000, or 200 with --fast].
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 5e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.007)]
    pub dropout: f64,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    /// 200-epoch profile.
    #[arg(long)]
    pub fast: bool,
    /// Continue from this checkpoint; its config and seed take precedence.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// [default: <out-dir>/model.json]
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Per-epoch loss and test metrics [default: <out-dir>/history.csv].
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    /// [default: <out-dir>/model.json]
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// [default: <out-dir>/test.utd]
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Long-format CSV [default: <out-dir>/report.csv].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// One row per object, one column per direction [default: <out-dir>/table.csv].
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TransferArgs {
    /// [default: <out-dir>/model.json]
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// [default: <out-dir>/test.utd]
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Sample index within the dataset.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Source sensor; the frame is converted into the other one.
    #[arg(long, default_value_t = Sensor::Papill)]
    pub from: Sensor,
    /// JSON with source, predicted and measured frames [default: <out-dir>/transfer.json].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Quiver plot of the three frames [default: <out-dir>/transfer.svg].
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PlotArgs {
    /// [default: <out-dir>/test.utd]
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Plot a single sensor instead of both.
    #[arg(long)]
    pub sensor: Option<Sensor>,
    /// [default: <out-dir>/plot.svg]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GeomDataArgs {
    /// Trained model [default: <out-dir>/model.json].
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Dataset containing unseen-object presses; seen objects are ignored
    /// [default: <out-dir>/data.utd].
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Fraction of approach angles held out for testing.
    #[arg(long, default_value_t = 0.1)]
    pub test_fraction: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainGeomArgs {
    #[command(flatten)]
    pub data: GeomDataArgs,
    #[arg(long, default_value_t = Sensor::Uskin)]
    pub sensor: Sensor,
    #[arg(long, default_value_t = 80)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5e-5)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    /// [default: 0.2 for uskin, 0.3 for papill]
    #[arg(long)]
    pub dropout: Option<f64>,
    /// [default: <out-dir>/geom-<sensor>.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalGeomArgs {
    #[command(flatten)]
    pub data: GeomDataArgs,
    /// Omit to evaluate both regressors.
    #[arg(long)]
    pub train_sensor: Option<Sensor>,
    /// Omit to evaluate on both sensors.
    #[arg(long)]
    pub test_sensor: Option<Sensor>,
    /// [default: <out-dir>/geom_eval.csv]
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PlotGeomArgs {
    #[command(flatten)]
    pub data: GeomDataArgs,
    #[arg(long, default_value_t = Sensor::Uskin)]
    pub train_sensor: Sensor,
    #[arg(long, default_value_t = Sensor::Uskin)]
    pub test_sensor: Sensor,
    /// [default: <out-dir>/geom.svg]; the point cloud goes next to it as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A request that cannot be satisfied as given.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
