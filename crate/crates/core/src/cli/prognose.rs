use std::collections::HashMap;

use serde_json::json;

use super::output::{csv_bytes, fmt_opt, Manifest, OutputDir};
use super::{CliError, Context, HeteroStat, Mode, PrognoseArgs};
use crate::biostats::roc::{bootstrap_auc_ci, roc_auc};
use crate::biostats::survival::{cox_univariate, kaplan_meier, SurvivalRecord};
use crate::biostats::threshold::{classify, threshold_at_sensitivity, THRESHOLD_STEPS};
use crate::error::Error;
use crate::heterogeneity::{death_probability_table, hotspot_count, roi_variability, HotspotCase};
use crate::io::{load_case_table, CaseRecord, FeatureTable};

/// A case score and, in hotspot mode, `(hotspots, rois)`.
type CaseScore = (Option<f64>, Option<(usize, usize)>);

struct Scored<'a> {
    case: &'a CaseRecord,
    score: f64,
    label: bool,
    /// `(hotspots, rois)` in hotspot mode.
    hotspots: Option<(usize, usize)>,
}

fn case_score(
    args: &PrognoseArgs,
    table: &FeatureTable,
    param: usize,
    case_id: &str,
    roi_values: Option<&Vec<f64>>,
) -> Result<CaseScore, CliError> {
    let limit = |v: &[f64]| -> Vec<f64> { v[..args.num_rois.unwrap_or(v.len()).min(v.len())].to_vec() };
    match args.mode {
        Mode::Param => {
            let from_case_row = args.num_rois.is_none() && args.roi_aggregation == crate::heterogeneity::RoiAggregation::Mean;
            let case_row = table.case_rows().find(|r| r.case_id == case_id);
            if let (true, Some(row)) = (from_case_row, case_row) {
                Ok((row.values[param], None))
            } else {
                let Some(v) = roi_values else { return Ok((None, None)) };
                let used = limit(v);
                Ok((args.roi_aggregation.apply(&used).ok(), None))
            }
        }
        Mode::Heterogeneity => {
            let Some(v) = roi_values else { return Ok((None, None)) };
            let used = limit(v);
            if used.is_empty() {
                return Ok((None, None));
            }
            match args.hetero_stat {
                HeteroStat::HotspotFraction => {
                    let t = args.hotspot_threshold.expect("checked before scoring");
                    let n = hotspot_count(&used, t).stage("hotspot count")?;
                    Ok((Some(n as f64 / used.len() as f64), Some((n, used.len()))))
                }
                HeteroStat::Sd => Ok((roi_variability(&used).ok().map(|v| v.sd), None)),
                HeteroStat::Cv => Ok((roi_variability(&used).ok().and_then(|v| v.cv), None)),
            }
        }
    }
}

pub fn run(args: PrognoseArgs) -> Result<(), CliError> {
    if args.bootstrap_n > 0 && args.seed.is_none() {
        return Err(CliError::input("bootstrap needs --seed (or --bootstrap-n 0)"));
    }
    if args.mode == Mode::Heterogeneity && args.hetero_stat == HeteroStat::HotspotFraction && args.hotspot_threshold.is_none() {
        return Err(CliError::input("hotspot fraction needs --hotspot-threshold"));
    }
    if args.num_rois == Some(0) {
        return Err(CliError::input("--num-rois must be positive"));
    }
    if let Some(t) = args.target_sens.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(CliError::input(format!("--target-sens must lie in (0, 1], got {t}")));
    }

    let table = FeatureTable::load(&args.features).stage("reading features")?;
    let param = table.param_index(&args.param).stage("selecting parameter")?;
    let cases = load_case_table(&args.cases).stage("reading case table")?;
    let out = OutputDir::prepare(
        &args.out.out,
        args.out.force,
        &["prognose.json", "scores.csv", "roc.csv", "km.csv", "death_table.csv"],
    )?;

    let mut manifest = Manifest::new(
        "prognose",
        json!({
            "param": args.param,
            "mode": args.mode,
            "hetero_stat": args.hetero_stat,
            "hotspot_threshold": args.hotspot_threshold,
            "roi_aggregation": args.roi_aggregation,
            "num_rois": args.num_rois,
            "endpoint": args.endpoint,
            "target_sens": args.target_sens,
            "cut": args.cut,
            "bootstrap_n": args.bootstrap_n,
            "seed": args.seed,
            "threshold_steps": THRESHOLD_STEPS,
        }),
    );
    manifest.add_input(&args.features)?;
    manifest.add_input(&args.cases)?;

    let roi_values: HashMap<String, Vec<f64>> = table
        .roi_rows_by_case()
        .into_iter()
        .map(|(c, rows)| (c, rows.iter().filter_map(|r| r.values[param]).collect()))
        .collect();
    let mut feature_ids: Vec<&str> = table.case_rows().map(|r| r.case_id.as_str()).collect();
    feature_ids.extend(roi_values.keys().map(String::as_str));
    feature_ids.sort_unstable();
    feature_ids.dedup();
    let outcome_ids: std::collections::HashSet<&str> = cases.iter().map(|c| c.case_id.as_str()).collect();
    let missing_outcome: Vec<&str> = feature_ids.iter().copied().filter(|id| !outcome_ids.contains(id)).collect();

    let mut scored = Vec::new();
    let mut missing_features = Vec::new();
    let mut undefined_score = Vec::new();
    for case in &cases {
        if feature_ids.binary_search(&case.case_id.as_str()).is_err() {
            missing_features.push(case.case_id.as_str());
            continue;
        }
        match case_score(&args, &table, param, &case.case_id, roi_values.get(&case.case_id))? {
            (Some(score), hotspots) => scored.push(Scored {
                case,
                score,
                label: args.endpoint.label(&case.outcome),
                hotspots,
            }),
            (None, _) => undefined_score.push(case.case_id.as_str()),
        }
    }
    if scored.is_empty() {
        return Err(CliError::input("no case has both a defined score and an outcome"));
    }

    let scores: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let labels: Vec<bool> = scored.iter().map(|s| s.label).collect();
    let endpoint = args.endpoint.as_str();
    let single_class = |e: Error| match e {
        Error::SingleClass => CliError::computation(format!("endpoint {endpoint} has a single class among scored cases")),
        other => CliError::from(other),
    };
    let roc = roc_auc(&scores, &labels).map_err(single_class)?;
    let ci = match args.seed.filter(|_| args.bootstrap_n > 0) {
        Some(seed) => Some(bootstrap_auc_ci(&scores, &labels, args.bootstrap_n, seed).map_err(single_class)?),
        None => None,
    };
    let thresholds = args
        .target_sens
        .iter()
        .map(|&t| threshold_at_sensitivity(&scores, &labels, t, THRESHOLD_STEPS))
        .collect::<Result<Vec<_>, _>>()
        .stage("threshold selection")?;

    let cut = args.cut.or_else(|| thresholds.first().map(|t| t.threshold));
    let records: Vec<SurvivalRecord> = scored.iter().map(|s| s.case.outcome.clone()).collect();
    let event_def = args.endpoint.event_def();
    let mut km_rows = Vec::new();
    let mut dichotomy = serde_json::Value::Null;
    if let Some(cut) = cut {
        let metrics = classify(&scores, &labels, cut).stage("classification at cut")?;
        let group: Vec<f64> = scores.iter().map(|&s| f64::from(u8::from(s >= cut))).collect();
        for (name, flag) in [("high", 1.0), ("low", 0.0)] {
            let members: Vec<SurvivalRecord> =
                records.iter().zip(&group).filter(|(_, g)| **g == flag).map(|(r, _)| r.clone()).collect();
            if members.is_empty() {
                continue;
            }
            for step in kaplan_meier(&members, event_def).stage("Kaplan-Meier")? {
                km_rows.push(vec![
                    name.to_string(),
                    step.time.to_string(),
                    step.n_at_risk.to_string(),
                    step.n_events.to_string(),
                    step.n_censored.to_string(),
                    step.survival.to_string(),
                ]);
            }
        }
        let cox = match cox_univariate(&records, &group, event_def) {
            Ok(fit) => json!(fit),
            Err(e @ (Error::NoEvents | Error::DegenerateCovariate)) => json!({"error": e.to_string()}),
            Err(e) => return Err(CliError::from(e)),
        };
        dichotomy = json!({"cut": cut, "rule": "score >= cut", "metrics": metrics, "cox": cox});
    }

    let mut death_table = Vec::new();
    if scored.iter().all(|s| s.hotspots.is_some()) && args.mode == Mode::Heterogeneity {
        let hc: Vec<HotspotCase> = scored
            .iter()
            .map(|s| {
                let (h, n) = s.hotspots.expect("checked above");
                HotspotCase {
                    case_id: s.case.case_id.clone(),
                    hotspots: h,
                    n_rois: n,
                    tumor_death: s.label,
                }
            })
            .collect();
        death_table = death_probability_table(&hc).stage("death probability table")?;
    }

    out.write(
        "scores.csv",
        &csv_bytes(
            &["case_id", "score", "label", "time_months", "status"],
            scored.iter().map(|s| {
                vec![
                    s.case.case_id.clone(),
                    s.score.to_string(),
                    u8::from(s.label).to_string(),
                    s.case.outcome.time_months.to_string(),
                    s.case.outcome.status.to_string(),
                ]
            }),
        ),
    )?;
    out.write(
        "roc.csv",
        &csv_bytes(
            &["threshold", "fpr", "tpr"],
            roc.points.iter().map(|p| vec![p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()]),
        ),
    )?;
    out.write(
        "km.csv",
        &csv_bytes(&["group", "time", "n_at_risk", "n_events", "n_censored", "survival"], km_rows),
    )?;
    out.write(
        "death_table.csv",
        &csv_bytes(
            &["bucket", "fraction", "trm", "other", "death_probability"],
            death_table.iter().map(|b| {
                vec![
                    b.label.clone(),
                    b.fraction.to_string(),
                    b.n_trm.to_string(),
                    b.n_other.to_string(),
                    fmt_opt(Some(b.death_probability)),
                ]
            }),
        ),
    )?;
    out.write_json(
        "prognose.json",
        &json!({
            "manifest": manifest,
            "n_cases": scored.len(),
            "n_positive": roc.n_positive,
            "n_negative": roc.n_negative,
            "auc": roc.auc,
            "auc_ci95": ci,
            "thresholds": thresholds,
            "dichotomy": dichotomy,
            "death_table": death_table,
            "unmatched": {
                "features_without_outcome": missing_outcome,
                "outcomes_without_features": missing_features,
                "undefined_score": undefined_score,
            },
        }),
    )?;
    Ok(())
}
