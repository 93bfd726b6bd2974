use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::output::{Manifest, OutputDir};
use super::{CliError, Context, MeasureArgs, Sampling};
use crate::error::Error;
use crate::geometry::{rasterize_annotations, region_properties, NucleusRegion, PixelGrid};
use crate::io::mask::densify;
use crate::io::{load_annotations, load_case_table, load_mask, FeatureTable, MaskMode};
use crate::morphometry::{aggregate_case, features_from_regions, filter_regions, FilterConfig, RoiFeatureSet};
use crate::sampling::{grid_sample, stratified_sample_12, GridSpec};

#[derive(Debug, Clone)]
pub(crate) struct RoiInput {
    pub case_id: String,
    pub roi_id: String,
    pub path: PathBuf,
}

fn is_roi_file(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "json")
    )
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::from(Error::io(dir, e)))?
        .map(|e| e.map(|e| e.path()).map_err(|e| CliError::from(Error::io(dir, e))))
        .collect::<Result<_, _>>()?;
    entries.sort();
    Ok(entries)
}

/// Groups input files into cases. A directory holding ROI files is one case
/// named after the directory; a directory holding only subdirectories
/// contributes one case per subdirectory; a lone file is a one-ROI case.
pub(crate) fn discover(inputs: &[PathBuf]) -> Result<Vec<(String, Vec<RoiInput>)>, CliError> {
    let mut cases: Vec<(String, Vec<RoiInput>)> = Vec::new();
    let add_dir = |dir: &Path, cases: &mut Vec<(String, Vec<RoiInput>)>| -> Result<bool, CliError> {
        let files: Vec<PathBuf> = sorted_entries(dir)?.into_iter().filter(|p| p.is_file() && is_roi_file(p)).collect();
        if files.is_empty() {
            return Ok(false);
        }
        let case_id = dir
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| stem(dir));
        let rois = files
            .into_iter()
            .map(|path| RoiInput {
                case_id: case_id.clone(),
                roi_id: stem(&path),
                path,
            })
            .collect();
        cases.push((case_id, rois));
        Ok(true)
    };
    for input in inputs {
        if input.is_dir() {
            if !add_dir(input, &mut cases)? {
                for sub in sorted_entries(input)?.into_iter().filter(|p| p.is_dir()) {
                    add_dir(&sub, &mut cases)?;
                }
            }
        } else if input.is_file() {
            let case_id = stem(input);
            cases.push((
                case_id.clone(),
                vec![RoiInput {
                    case_id,
                    roi_id: stem(input),
                    path: input.clone(),
                }],
            ));
        } else {
            return Err(CliError::input(format!("{}: no such file or directory", input.display())));
        }
    }
    Ok(cases)
}

fn from_case_table(table: &Path) -> Result<Vec<(String, Vec<RoiInput>)>, CliError> {
    let records = load_case_table(table).stage("reading case table")?;
    let base = table.parent().unwrap_or(Path::new("."));
    Ok(records
        .into_iter()
        .filter(|r| !r.rois.is_empty())
        .map(|r| {
            let rois = r
                .rois
                .iter()
                .map(|roi| RoiInput {
                    case_id: r.case_id.clone(),
                    roi_id: stem(Path::new(roi)),
                    path: base.join(roi),
                })
                .collect();
            (r.case_id, rois)
        })
        .collect())
}

/// Loads a mask or annotation file as a dense label grid.
pub(crate) fn load_roi(path: &Path, mpp: Option<f64>, mode: MaskMode) -> Result<PixelGrid, CliError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let doc = load_annotations(path).at("loading annotations", path)?;
        let grid = rasterize_annotations(&doc.annotations, doc.image.width, doc.image.height, doc.image.mpp)
            .at("rasterizing", path)?;
        let (w, h, m) = (grid.width(), grid.height(), grid.mpp());
        let mut labels = grid.into_labels();
        densify(&mut labels);
        PixelGrid::new(w, h, m, labels).at("rasterizing", path)
    } else {
        let mpp = mpp.ok_or_else(|| CliError::input(format!("{}: mask inputs need --mpp", path.display())))?;
        Ok(load_mask(path, mpp, mode).at("loading mask", path)?.grid)
    }
}

#[derive(Debug, Serialize)]
struct RoiReport {
    case_id: String,
    roi_id: String,
    path: String,
    width: usize,
    height: usize,
    mpp: f64,
    n_regions: usize,
    n_kept: usize,
    n_selected: usize,
    grid_fields_used: Option<usize>,
    grid_reached_target: Option<bool>,
    selected_region_ids: Vec<u32>,
    features: RoiFeatureSet,
}

struct Job<'a> {
    args: &'a MeasureArgs,
    cfg: &'a FilterConfig,
}

impl Job<'_> {
    fn run(&self, roi: &RoiInput) -> Result<RoiReport, CliError> {
        let grid = load_roi(&roi.path, self.args.mpp, self.args.mask_mode)?;
        let regions = region_properties(&grid);
        let kept = filter_regions(&regions, self.cfg);
        let (mut fields_used, mut reached) = (None, None);
        let selected: Vec<NucleusRegion> = match self.args.sampling {
            Sampling::All => kept.clone(),
            Sampling::Grid => {
                let s = grid_sample(&grid, &kept, GridSpec::default(), self.args.grid_min_count)
                    .at("grid sampling", &roi.path)?;
                fields_used = Some(s.fields_used.len());
                reached = Some(s.reached_target);
                let by_id: HashMap<u32, &NucleusRegion> = kept.iter().map(|r| (r.id, r)).collect();
                s.selected_region_ids.iter().map(|id| by_id[id].clone()).collect()
            }
            Sampling::Stratified12 => {
                let seed = self.args.seed.expect("checked before dispatch");
                stratified_sample_12(&kept, seed).at("stratified sampling", &roi.path)?
            }
        };
        let features = features_from_regions(&selected, self.cfg).at("measuring", &roi.path)?;
        Ok(RoiReport {
            case_id: roi.case_id.clone(),
            roi_id: roi.roi_id.clone(),
            path: roi.path.display().to_string(),
            width: grid.width(),
            height: grid.height(),
            mpp: grid.mpp(),
            n_regions: regions.len(),
            n_kept: kept.len(),
            n_selected: selected.len(),
            grid_fields_used: fields_used,
            grid_reached_target: reached,
            selected_region_ids: selected.iter().map(|r| r.id).collect(),
            features,
        })
    }
}

/// Measures ROIs on worker threads; results keep input order.
fn measure_all(job: &Job<'_>, rois: &[RoiInput]) -> Vec<Result<RoiReport, CliError>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(rois.len()).max(1);
    let chunk = rois.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = rois
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|r| job.run(r)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("measurement worker panicked"))
            .collect()
    })
}

pub fn run(args: MeasureArgs) -> Result<(), CliError> {
    let cfg = args.filter.config()?;
    if args.sampling == Sampling::Stratified12 && args.seed.is_none() {
        return Err(CliError::input("stratified sampling needs --seed"));
    }
    if let Some(m) = args.mpp {
        if !(m.is_finite() && m > 0.0) {
            return Err(CliError::input(format!("--mpp must be > 0, got {m}")));
        }
    }
    let cases = match &args.cases {
        Some(table) => from_case_table(table)?,
        None => discover(&args.inputs)?,
    };
    if cases.iter().all(|(_, rois)| rois.is_empty()) {
        return Err(CliError::input("no inputs: no mask (.png) or annotation (.json) files found"));
    }
    let out = OutputDir::prepare(&args.out.out, args.out.force, &["features.csv", "measure.json"])?;

    let mut manifest = Manifest::new(
        "measure",
        json!({
            "filter": cfg,
            "mpp": args.mpp,
            "mask_mode": args.mask_mode,
            "sampling": args.sampling,
            "grid_min_count": args.grid_min_count,
            "seed": args.seed,
            "cases": args.cases.as_ref().map(|p| p.display().to_string()),
        }),
    );
    if let Some(t) = &args.cases {
        manifest.add_input(t)?;
    }
    let all: Vec<RoiInput> = cases.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    for roi in &all {
        manifest.add_input(&roi.path)?;
    }

    let job = Job { args: &args, cfg: &cfg };
    let mut reports = measure_all(&job, &all).into_iter();
    let mut case_sets = Vec::new();
    let mut roi_reports = Vec::new();
    for (case_id, rois) in &cases {
        let mut feats = Vec::new();
        let mut ids = Vec::new();
        for _ in rois {
            let r = reports.next().expect("one report per ROI")?;
            feats.push(r.features.clone());
            ids.push(r.roi_id.clone());
            roi_reports.push(r);
        }
        let agg = aggregate_case(case_id, &feats).stage(&format!("aggregating case {case_id}"))?;
        case_sets.push((agg, ids));
    }

    let table = FeatureTable::from_cases(&case_sets).stage("building feature table")?;
    let mut csv = Vec::new();
    table.write(&mut csv).stage("writing features")?;
    out.write("features.csv", &csv)?;
    out.write_json(
        "measure.json",
        &json!({
            "manifest": manifest,
            "rois": roi_reports,
            "cases": case_sets.iter().map(|(c, _)| json!({"case_id": c.case_id, "parameters": c.parameters})).collect::<Vec<_>>(),
        }),
    )?;
    Ok(())
}
