use serde_json::{json, Value};

use super::output::{csv_bytes, fmt_opt, Manifest, OutputDir};
use super::{AgreeArgs, CliError, Context};
use crate::biostats::agreement::{cohen_kappa_weighted, icc_2_1, lights_kappa, KappaWeights, LightsKappa};
use crate::io::tables::estimate_matrix;
use crate::io::{load_estimates, load_measurements, RaterEstimate};

const KARYOMEGALY: [bool; 2] = [false, true];
const ANISOKARYOSIS: [u8; 3] = [1, 2, 3];

/// Per-rater kappa between the first and second estimate of each case.
fn intra_rater<T: PartialEq + Copy + std::fmt::Debug>(
    estimates: &[RaterEstimate],
    value: impl Fn(&RaterEstimate) -> T,
    categories: &[T],
    weights: KappaWeights,
) -> Result<Vec<Value>, CliError> {
    let mut raters: Vec<&str> = estimates.iter().map(|e| e.rater_id.as_str()).collect();
    raters.sort_unstable();
    raters.dedup();
    let mut out = Vec::new();
    for rater in raters {
        let mine: Vec<&RaterEstimate> = estimates.iter().filter(|e| e.rater_id == rater).collect();
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for a in mine.iter().filter(|e| e.timepoint == 1) {
            if let Some(b) = mine.iter().find(|e| e.timepoint == 2 && e.case_id == a.case_id) {
                first.push(value(a));
                second.push(value(b));
            }
        }
        if first.is_empty() {
            continue;
        }
        let kappa = cohen_kappa_weighted(&first, &second, categories, weights).stage("intra-rater kappa")?;
        out.push(json!({"rater_id": rater, "n_cases": first.len(), "kappa": kappa}));
    }
    Ok(out)
}

fn pair_rows(feature: &str, lk: &LightsKappa) -> Vec<Vec<String>> {
    lk.pairwise
        .iter()
        .map(|p| vec![feature.to_string(), p.rater_a.clone(), p.rater_b.clone(), fmt_opt(p.kappa)])
        .collect()
}

pub fn run(args: AgreeArgs) -> Result<(), CliError> {
    if args.estimates.is_none() && args.measurements.is_none() {
        return Err(CliError::input("agree needs --estimates and/or --measurements"));
    }
    let out = OutputDir::prepare(&args.out.out, args.out.force, &["agree.json", "pairwise_kappa.csv"])?;
    let mut manifest = Manifest::new(
        "agree",
        json!({"kappa_weights": args.kappa_weights, "timepoint": args.timepoint}),
    );
    let mut report = serde_json::Map::new();
    let mut pair_csv = Vec::new();

    if let Some(path) = &args.estimates {
        manifest.add_input(path)?;
        let est = load_estimates(path).at("reading estimates", path)?;
        let kary = estimate_matrix(&est, args.timepoint, |e| e.karyomegaly).at("reading estimates", path)?;
        let aniso = estimate_matrix(&est, args.timepoint, |e| e.anisokaryosis).at("reading estimates", path)?;
        if kary.n_raters() < 2 {
            return Err(CliError::input(format!(
                "{}: timepoint {} has {} rater(s); agreement needs at least 2",
                path.display(),
                args.timepoint,
                kary.n_raters()
            )));
        }
        let lk_kary = lights_kappa(&kary, &KARYOMEGALY, args.kappa_weights).stage("karyomegaly kappa")?;
        let lk_aniso = lights_kappa(&aniso, &ANISOKARYOSIS, args.kappa_weights).stage("anisokaryosis kappa")?;
        pair_csv.extend(pair_rows("karyomegaly", &lk_kary));
        pair_csv.extend(pair_rows("anisokaryosis", &lk_aniso));
        report.insert(
            "inter_rater".into(),
            json!({"karyomegaly": lk_kary, "anisokaryosis": lk_aniso}),
        );
        report.insert(
            "intra_rater".into(),
            json!({
                "karyomegaly": intra_rater(&est, |e| e.karyomegaly, &KARYOMEGALY, args.kappa_weights)?,
                "anisokaryosis": intra_rater(&est, |e| e.anisokaryosis, &ANISOKARYOSIS, args.kappa_weights)?,
            }),
        );
    }

    if let Some(path) = &args.measurements {
        manifest.add_input(path)?;
        let m = load_measurements(path).at("reading measurements", path)?;
        if m.n_raters() < 2 {
            return Err(CliError::input(format!(
                "{}: {} rater(s); agreement needs at least 2",
                path.display(),
                m.n_raters()
            )));
        }
        report.insert("icc".into(), json!(icc_2_1(&m).stage("ICC")?));
    }

    report.insert("manifest".into(), json!(manifest));
    out.write(
        "pairwise_kappa.csv",
        &csv_bytes(&["feature", "rater_a", "rater_b", "kappa"], pair_csv),
    )?;
    out.write_json("agree.json", &Value::Object(report))?;
    Ok(())
}
