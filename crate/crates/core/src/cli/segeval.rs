use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::output::{csv_bytes, fmt_opt, Manifest, OutputDir};
use super::{CliError, Context, SegEvalArgs};
use crate::error::Error;
use crate::geometry::{rasterize_annotations, region_properties, PixelGrid};
use crate::io::mask::densify;
use crate::io::{load_annotations, load_mask};
use crate::morphometry::{features_from_regions, filter_regions, FilterConfig, Parameter};
use crate::seg_eval::{dice_macro, dice_micro, match_objects, overlap_counts, rmse, MatchReport, OverlapCounts};

fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::from(Error::io(dir, e)))?;
    let mut out = Vec::new();
    for entry in rd {
        let p = entry.map_err(|e| CliError::from(Error::io(dir, e)))?.path();
        if p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext)) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn parameters(grid: &PixelGrid, cfg: &FilterConfig) -> Vec<Parameter> {
    let kept = filter_regions(&region_properties(grid), cfg);
    features_from_regions(&kept, cfg).map(|f| f.parameters()).unwrap_or_default()
}

#[derive(Serialize)]
struct ImageResult {
    image_id: String,
    pred: String,
    gt: String,
    dice: f64,
    #[serde(skip)]
    counts: OverlapCounts,
    objects: MatchReport,
    #[serde(skip)]
    pred_params: Vec<Parameter>,
    #[serde(skip)]
    gt_params: Vec<Parameter>,
}

pub fn run(args: SegEvalArgs) -> Result<(), CliError> {
    let cfg = args.filter.config()?;
    if !(args.iou_min > 0.0 && args.iou_min <= 1.0) {
        return Err(CliError::input(format!("--iou-min must lie in (0, 1], got {}", args.iou_min)));
    }
    let mut gts = BTreeMap::new();
    for p in files_with_ext(&args.gt, "json")? {
        let doc = load_annotations(&p).at("loading annotations", &p)?;
        let id = if doc.image.id.is_empty() { stem(&p) } else { doc.image.id.clone() };
        if gts.insert(id.clone(), (p.clone(), doc)).is_some() {
            return Err(CliError::input(format!("{}: duplicate image id {id:?}", p.display())));
        }
    }
    let preds: BTreeMap<String, PathBuf> = files_with_ext(&args.pred, "png")?
        .into_iter()
        .map(|p| (stem(&p), p))
        .collect();
    let pred_only: Vec<&String> = preds.keys().filter(|k| !gts.contains_key(*k)).collect();
    let gt_only: Vec<&String> = gts.keys().filter(|k| !preds.contains_key(*k)).collect();
    if args.strict && !(pred_only.is_empty() && gt_only.is_empty()) {
        return Err(CliError::input(format!(
            "unpaired images: predictions without reference {pred_only:?}, references without prediction {gt_only:?}"
        )));
    }
    if preds.keys().all(|k| !gts.contains_key(k)) {
        return Err(CliError::input("no inputs: no prediction matches a reference annotation"));
    }
    let out = OutputDir::prepare(&args.out.out, args.out.force, &["seg_eval.json", "per_image.csv", "rmse.csv"])?;
    let mut manifest = Manifest::new(
        "seg-eval",
        json!({"filter": cfg, "mask_mode": args.mask_mode, "iou_min": args.iou_min, "strict": args.strict}),
    );

    let mut results = Vec::new();
    for (id, pred_path) in &preds {
        let Some((gt_path, doc)) = gts.get(id) else { continue };
        manifest.add_input(pred_path)?;
        manifest.add_input(gt_path)?;
        let (w, h, mpp) = (doc.image.width, doc.image.height, doc.image.mpp);
        let gt_grid = rasterize_annotations(&doc.annotations, w, h, mpp).at("rasterizing", gt_path)?;
        let mut labels = gt_grid.into_labels();
        densify(&mut labels);
        let gt_grid = PixelGrid::new(w, h, mpp, labels).at("rasterizing", gt_path)?;
        let pred_grid = load_mask(pred_path, mpp, args.mask_mode).at("loading mask", pred_path)?.grid;
        if pred_grid.dims() != gt_grid.dims() {
            return Err(CliError::input(format!(
                "{}: mask is {}x{} but the reference is {w}x{h}",
                pred_path.display(),
                pred_grid.width(),
                pred_grid.height()
            )));
        }
        let counts = overlap_counts(&pred_grid, &gt_grid).at("overlap", pred_path)?;
        let objects = match_objects(&pred_grid, &gt_grid, args.iou_min).at("matching", pred_path)?;
        results.push(ImageResult {
            image_id: id.clone(),
            pred: pred_path.display().to_string(),
            gt: gt_path.display().to_string(),
            dice: counts.dice(),
            counts,
            objects,
            pred_params: parameters(&pred_grid, &cfg),
            gt_params: parameters(&gt_grid, &cfg),
        });
    }

    let counts: Vec<OverlapCounts> = results.iter().map(|r| r.counts).collect();
    let macro_dice = dice_macro(&counts).stage("Dice")?;
    let micro_dice = dice_micro(&counts).stage("Dice")?;
    let (tp, fp, fn_) = results
        .iter()
        .fold((0, 0, 0), |(a, b, c), r| (a + r.objects.tp, b + r.objects.fp, c + r.objects.fn_));
    let pooled = MatchReport::from_counts(tp, fp, fn_, Vec::new());

    // Parameter names come from whichever side measured something.
    let names: Vec<String> = results
        .iter()
        .flat_map(|r| r.gt_params.iter().chain(&r.pred_params))
        .map(|p| p.name.clone())
        .fold(Vec::new(), |mut acc, n| {
            if !acc.contains(&n) {
                acc.push(n);
            }
            acc
        });
    let lookup = |ps: &[Parameter], name: &str| ps.iter().find(|p| p.name == name).and_then(|p| p.value);
    let mut rmse_rows = Vec::new();
    let mut rmse_json = Vec::new();
    for name in &names {
        let (pv, gv): (Vec<f64>, Vec<f64>) = results
            .iter()
            .filter_map(|r| Some((lookup(&r.pred_params, name)?, lookup(&r.gt_params, name)?)))
            .unzip();
        let value = rmse(&pv, &gv).ok();
        rmse_rows.push(vec![name.clone(), pv.len().to_string(), fmt_opt(value)]);
        rmse_json.push(json!({"param": name, "n_images": pv.len(), "rmse": value}));
    }

    out.write(
        "per_image.csv",
        &csv_bytes(
            &["image_id", "dice", "tp", "fp", "fn", "precision", "recall", "f1"],
            results.iter().map(|r| {
                vec![
                    r.image_id.clone(),
                    r.dice.to_string(),
                    r.objects.tp.to_string(),
                    r.objects.fp.to_string(),
                    r.objects.fn_.to_string(),
                    r.objects.precision.to_string(),
                    r.objects.recall.to_string(),
                    r.objects.f1.to_string(),
                ]
            }),
        ),
    )?;
    out.write("rmse.csv", &csv_bytes(&["param", "n_images", "rmse"], rmse_rows))?;
    out.write_json(
        "seg_eval.json",
        &json!({
            "manifest": manifest,
            "n_images": results.len(),
            "dice_macro": macro_dice,
            "dice_micro": micro_dice,
            "objects": pooled,
            "images": results,
            "rmse": rmse_json,
            "unpaired": {"pred_only": pred_only, "gt_only": gt_only},
        }),
    )?;
    Ok(())
}
