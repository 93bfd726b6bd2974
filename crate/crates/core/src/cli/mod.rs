//! Command-line surface. Exit codes: 0 success, 1 input error, 2 computation
//! error.

mod agree;
mod measure;
mod output;
mod overlay;
mod prognose;
mod segeval;
mod synth;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::biostats::agreement::KappaWeights;
use crate::biostats::survival::Endpoint;
use crate::error::Error;
use crate::heterogeneity::RoiAggregation;
use crate::io::MaskMode;
use crate::morphometry::FilterConfig;

pub use output::{sha256_file, Manifest};

#[derive(Debug, Parser)]
#[command(name = "nucmorph", version, about = "Nuclear morphometry and prognostic statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure morphometric parameters per ROI and per case.
    Measure(MeasureArgs),
    /// Evaluate one parameter as a prognostic test.
    Prognose(PrognoseArgs),
    /// Rater agreement for categorical estimates and continuous measurements.
    Agree(AgreeArgs),
    /// Score predicted masks against ground-truth annotations.
    SegEval(SegEvalArgs),
    /// Draw region boundaries over a source image.
    Overlay(OverlayArgs),
    /// Generate synthetic ROIs with known nuclear size and shape.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    /// Regions smaller than this area are dropped.
    #[arg(long = "min-area-um2", default_value_t = 7.0)]
    pub min_area_um2: f64,
    /// Area cutoff for the fraction of large nuclei (repeatable).
    #[arg(long = "large-threshold", default_values_t = [37.8, 50.3])]
    pub large_threshold: Vec<f64>,
    /// Solidity cutoff for the fraction of indented nuclei (repeatable).
    #[arg(long = "indent-threshold", default_values_t = [0.913, 0.936, 0.943])]
    pub indent_threshold: Vec<f64>,
    /// Drop regions touching the image border.
    #[arg(long)]
    pub exclude_border: bool,
}

impl FilterArgs {
    pub fn config(&self) -> Result<FilterConfig, CliError> {
        let cfg = FilterConfig {
            min_area_um2: self.min_area_um2,
            large_thresholds_um2: self.large_threshold.clone(),
            indent_thresholds: self.indent_threshold.clone(),
            exclude_border_touching: self.exclude_border,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Every nucleus in the ROI.
    All,
    /// Complete grid fields, center out, until the target count.
    Grid,
    /// Four nuclei from each area tertile.
    Stratified12,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Mask images, annotation files, or directories of them.
    #[arg(required_unless_present = "cases")]
    pub inputs: Vec<PathBuf>,
    /// Case table whose `rois` column lists ROI files in selection order.
    #[arg(long)]
    pub cases: Option<PathBuf>,
    /// Resolution of mask images in µm per pixel.
    #[arg(long)]
    pub mpp: Option<f64>,
    /// binary or label.
    #[arg(long, default_value = "binary")]
    pub mask_mode: MaskMode,
    #[arg(long, value_enum, default_value = "all")]
    pub sampling: Sampling,
    /// Target nucleus count for grid sampling.
    #[arg(long, default_value_t = 100)]
    pub grid_min_count: usize,
    /// Seed for stratified sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Score each case by the parameter itself.
    Param,
    /// Score each case by the between-ROI variability of the parameter.
    Heterogeneity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HeteroStat {
    HotspotFraction,
    Sd,
    Cv,
}

#[derive(Debug, Args)]
pub struct PrognoseArgs {
    /// Feature table written by `measure`.
    #[arg(long)]
    pub features: PathBuf,
    /// Case table with outcomes.
    #[arg(long)]
    pub cases: PathBuf,
    /// Parameter column to evaluate.
    #[arg(long)]
    pub param: String,
    #[arg(long, value_enum, default_value = "param")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "hotspot-fraction")]
    pub hetero_stat: HeteroStat,
    /// ROI value at or above which an ROI counts as a hotspot.
    #[arg(long)]
    pub hotspot_threshold: Option<f64>,
    /// mean or max over the used ROIs (param mode).
    #[arg(long, default_value = "mean")]
    pub roi_aggregation: RoiAggregation,
    /// Use only the first k ROIs of each case.
    #[arg(long)]
    pub num_rois: Option<usize>,
    /// tumor_death_any_time, tumor_death_12mo or overall_death_12mo.
    #[arg(long, default_value = "tumor_death_any_time")]
    pub endpoint: Endpoint,
    /// Target sensitivity for threshold selection (repeatable).
    #[arg(long = "target-sens")]
    pub target_sens: Vec<f64>,
    /// Explicit cut for dichotomization (score >= cut is positive).
    #[arg(long)]
    pub cut: Option<f64>,
    /// Bootstrap resamples for the AUC interval; 0 disables it.
    #[arg(long, default_value_t = 2000)]
    pub bootstrap_n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    /// Categorical estimates (case_id, rater_id, timepoint, karyomegaly, anisokaryosis).
    #[arg(long)]
    pub estimates: Option<PathBuf>,
    /// Continuous measurements (case_id, rater_id, value).
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    /// linear or quadratic.
    #[arg(long, default_value = "linear")]
    pub kappa_weights: KappaWeights,
    /// Timepoint used for inter-rater statistics.
    #[arg(long, default_value_t = 1)]
    pub timepoint: u8,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SegEvalArgs {
    /// Directory of predicted masks named `<image id>.png`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth annotation files.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value = "binary")]
    pub mask_mode: MaskMode,
    /// Minimum IoU for an object match.
    #[arg(long, default_value_t = 0.5)]
    pub iou_min: f64,
    /// Fail when an image lacks its counterpart.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OverlayArgs {
    #[arg(long)]
    pub mask: PathBuf,
    /// Source image the boundaries are drawn on.
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, default_value = "binary")]
    pub mask_mode: MaskMode,
    /// Output PNG file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "synth")]
    pub case_id: String,
    #[arg(long, default_value_t = 5)]
    pub n_rois: usize,
    #[arg(long, default_value_t = 60)]
    pub n_nuclei: usize,
    #[arg(long, default_value_t = 688)]
    pub width: usize,
    #[arg(long, default_value_t = 516)]
    pub height: usize,
    #[arg(long, default_value_t = 0.25)]
    pub mpp: f64,
    /// Median nuclear area in µm².
    #[arg(long, default_value_t = 30.0)]
    pub area_median_um2: f64,
    /// Log-scale spread of the area distribution.
    #[arg(long, default_value_t = 0.3)]
    pub log_area_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub ecc_min: f64,
    #[arg(long, default_value_t = 0.9)]
    pub ecc_max: f64,
    #[arg(long, default_value_t = 2.0)]
    pub min_gap: f64,
    #[arg(long, default_value_t = 0.0)]
    pub min_semi_axis_px: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Computation,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Input,
            message: message.into(),
        }
    }

    pub fn computation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Computation,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Input => 1,
            ErrorKind::Computation => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Self::input(e.to_string())
        } else {
            Self::computation(e.to_string())
        }
    }
}

pub(crate) trait Context<T> {
    /// Prefixes the error with the stage and file it arose in.
    fn at(self, stage: &str, file: &Path) -> Result<T, CliError>;
    fn stage(self, stage: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, Error> {
    fn at(self, stage: &str, file: &Path) -> Result<T, CliError> {
        self.map_err(|e| {
            let mut c = CliError::from(e);
            c.message = format!("{stage} {}: {}", file.display(), c.message);
            c
        })
    }

    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| {
            let mut c = CliError::from(e);
            c.message = format!("{stage}: {}", c.message);
            c
        })
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Measure(a) => measure::run(a),
        Command::Prognose(a) => prognose::run(a),
        Command::Agree(a) => agree::run(a),
        Command::SegEval(a) => segeval::run(a),
        Command::Overlay(a) => overlay::run(a),
        Command::Synth(a) => synth::run(a),
    }
}

/// Parses `std::env::args`, runs the command and maps the outcome to an exit
/// code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
