use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::output::{Manifest, OutputDir};
use super::{CliError, Context, SynthArgs};
use crate::error::Error;
use crate::io::{save_annotations, save_label_mask, AnnotatedImage, ImageMeta};
use crate::synth::{generate_roi, truth_annotations, SynthSpec};

/// Seeds for the ROIs of one run: the i-th draw of a generator keyed on the
/// run seed.
pub(crate) fn roi_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.next_u64()).collect()
}

pub fn run(args: SynthArgs) -> Result<(), CliError> {
    let seed = args.seed.ok_or_else(|| CliError::input("synth needs --seed"))?;
    if args.n_rois == 0 {
        return Err(CliError::input("--n-rois must be positive"));
    }
    if !(args.area_median_um2.is_finite() && args.area_median_um2 > 0.0) {
        return Err(CliError::input(format!(
            "--area-median-um2 must be > 0, got {}",
            args.area_median_um2
        )));
    }
    if args.case_id.is_empty() || args.case_id.contains(['/', '\\']) {
        return Err(CliError::input(format!("invalid case id {:?}", args.case_id)));
    }
    let base = SynthSpec {
        width: args.width,
        height: args.height,
        mpp: args.mpp,
        n_nuclei: args.n_nuclei,
        log_area_mu: args.area_median_um2.ln(),
        log_area_sigma: args.log_area_sigma,
        ecc_min: args.ecc_min,
        ecc_max: args.ecc_max,
        min_gap: args.min_gap,
        min_semi_axis_px: args.min_semi_axis_px,
        seed,
    };
    base.validate()?;

    let mask_dir = args.case_id.clone();
    let ann_dir = format!("{}_annotations", args.case_id);
    let roi_names: Vec<String> = (1..=args.n_rois).map(|i| format!("roi_{i:02}")).collect();
    let mut names: Vec<String> = vec!["truth.json".into(), "synth.json".into()];
    for r in &roi_names {
        names.push(format!("{mask_dir}/{r}.png"));
        names.push(format!("{ann_dir}/{r}.json"));
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let out = OutputDir::prepare(&args.out.out, args.out.force, &name_refs)?;
    for d in [&mask_dir, &ann_dir] {
        let p = out.path(d);
        std::fs::create_dir_all(&p).map_err(|e| CliError::from(Error::io(&p, e)))?;
    }

    let mut truth = Vec::new();
    for (name, roi_seed) in roi_names.iter().zip(roi_seeds(seed, args.n_rois)) {
        let spec = SynthSpec { seed: roi_seed, ..base.clone() };
        let (grid, t) = generate_roi(&spec).stage(&format!("generating {name}"))?;
        let png = out.path(&format!("{mask_dir}/{name}.png"));
        save_label_mask(&png, &grid).at("writing", &png)?;
        let doc = AnnotatedImage {
            image: ImageMeta {
                id: name.clone(),
                width: spec.width,
                height: spec.height,
                mpp: spec.mpp,
            },
            annotations: truth_annotations(&t),
        };
        let js = out.path(&format!("{ann_dir}/{name}.json"));
        save_annotations(&js, &doc).at("writing", &js)?;
        truth.push(json!({"roi_id": name, "seed": roi_seed, "nuclei": t.nuclei}));
    }

    out.write_json(
        "truth.json",
        &json!({"case_id": args.case_id, "area_sd_um2": base.area_sd_um2(), "rois": truth}),
    )?;
    out.write_json(
        "synth.json",
        &json!({"manifest": Manifest::new("synth", json!({"case_id": args.case_id, "n_rois": args.n_rois, "spec": base}))}),
    )?;
    Ok(())
}
