use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    TumorDeath,
    OtherDeath,
    Censored,
}

impl Status {
    pub const TOKENS: [&'static str; 3] = ["tumor_death", "other_death", "censored"];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::TumorDeath => "tumor_death",
            Status::OtherDeath => "other_death",
            Status::Censored => "censored",
        }
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tumor_death" => Ok(Status::TumorDeath),
            "other_death" => Ok(Status::OtherDeath),
            "censored" => Ok(Status::Censored),
            other => Err(Error::InvalidArgument(format!(
                "unknown status {other:?}; expected one of {}",
                Status::TOKENS.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub case_id: String,
    pub time_months: f64,
    pub status: Status,
}

impl SurvivalRecord {
    pub fn new(case_id: impl Into<String>, time_months: f64, status: Status) -> Result<Self> {
        if !(time_months.is_finite() && time_months > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "follow-up time must be > 0, got {time_months}"
            )));
        }
        Ok(Self {
            case_id: case_id.into(),
            time_months,
            status,
        })
    }
}

/// Which statuses count as an event; all others are censored at their time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventDef {
    TumorDeath,
    AnyDeath,
}

impl EventDef {
    pub fn is_event(self, status: Status) -> bool {
        match self {
            EventDef::TumorDeath => status == Status::TumorDeath,
            EventDef::AnyDeath => status != Status::Censored,
        }
    }
}

/// Outcome definitions used to derive binary labels and event definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    TumorDeathAnyTime,
    TumorDeath12mo,
    OverallDeath12mo,
}

impl FromStr for Endpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Endpoint::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown endpoint {s:?}; expected one of {}",
                    Endpoint::ALL.map(Endpoint::as_str).join(", ")
                ))
            })
    }
}

impl Endpoint {
    pub const HORIZON_MONTHS: f64 = 12.0;
    pub const ALL: [Endpoint; 3] = [
        Endpoint::TumorDeathAnyTime,
        Endpoint::TumorDeath12mo,
        Endpoint::OverallDeath12mo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Endpoint::TumorDeathAnyTime => "tumor_death_any_time",
            Endpoint::TumorDeath12mo => "tumor_death_12mo",
            Endpoint::OverallDeath12mo => "overall_death_12mo",
        }
    }

    pub fn event_def(self) -> EventDef {
        match self {
            Endpoint::TumorDeathAnyTime | Endpoint::TumorDeath12mo => EventDef::TumorDeath,
            Endpoint::OverallDeath12mo => EventDef::AnyDeath,
        }
    }

    /// Binary outcome label; non-events (including deaths of other causes
    /// for the tumor endpoints) are negative.
    pub fn label(self, record: &SurvivalRecord) -> bool {
        let event = self.event_def().is_event(record.status);
        match self {
            Endpoint::TumorDeathAnyTime => event,
            _ => event && record.time_months <= Self::HORIZON_MONTHS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmStep {
    pub time: f64,
    pub n_at_risk: usize,
    pub n_events: usize,
    pub n_censored: usize,
    pub survival: f64,
}

/// Product-limit survival estimate, one row per distinct observed time.
///
/// Censorings at a time are removed from the risk set after the events at
/// that time.
pub fn kaplan_meier(records: &[SurvivalRecord], event_def: EventDef) -> Result<Vec<KmStep>> {
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut obs: Vec<(f64, bool)> = records
        .iter()
        .map(|r| (r.time_months, event_def.is_event(r.status)))
        .collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut at_risk = obs.len();
    let mut survival = 1.0;
    let mut steps = Vec::new();
    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let (mut events, mut censored) = (0, 0);
        while i < obs.len() && obs[i].0 == t {
            if obs[i].1 {
                events += 1;
            } else {
                censored += 1;
            }
            i += 1;
        }
        if events > 0 {
            survival *= (at_risk - events) as f64 / at_risk as f64;
        }
        steps.push(KmStep {
            time: t,
            n_at_risk: at_risk,
            n_events: events,
            n_censored: censored,
            survival,
        });
        at_risk -= events + censored;
    }
    Ok(steps)
}

/// Survival probability at `t` from a step list (right-continuous).
pub fn survival_at(steps: &[KmStep], t: f64) -> f64 {
    steps
        .iter()
        .take_while(|s| s.time <= t)
        .last()
        .map_or(1.0, |s| s.survival)
}

/// Direction in which a monotone partial likelihood increases without bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub coefficient: Option<f64>,
    pub hazard_ratio: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    pub std_error: Option<f64>,
    pub p_value: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the maximum lies at infinity; no numeric estimates are given.
    pub diverged: Option<Divergence>,
    pub n_events: usize,
}

/// Event-time groups for the Breslow partial likelihood.
struct RiskSets {
    /// Covariates sorted by descending time.
    x: Vec<f64>,
    /// (number at risk, covariate sum of the events, event count)
    groups: Vec<(usize, f64, usize)>,
}

impl RiskSets {
    fn build(records: &[SurvivalRecord], covariate: &[f64], event_def: EventDef) -> Result<Self> {
        if records.len() != covariate.len() {
            return Err(Error::LengthMismatch {
                left: records.len(),
                right: covariate.len(),
            });
        }
        if covariate.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("covariate must be finite".into()));
        }
        let mut idx: Vec<usize> = (0..records.len()).collect();
        idx.sort_by(|&a, &b| records[b].time_months.total_cmp(&records[a].time_months));
        let x: Vec<f64> = idx.iter().map(|&i| covariate[i]).collect();

        // the risk set of time t is every record with time >= t, i.e. a
        // prefix of the descending order
        let mut groups = Vec::new();
        let mut i = 0;
        while i < idx.len() {
            let t = records[idx[i]].time_months;
            let mut j = i;
            let (mut sx, mut d) = (0.0, 0);
            while j < idx.len() && records[idx[j]].time_months == t {
                if event_def.is_event(records[idx[j]].status) {
                    sx += covariate[idx[j]];
                    d += 1;
                }
                j += 1;
            }
            if d > 0 {
                groups.push((j, sx, d));
            }
            i = j;
        }
        if groups.is_empty() {
            return Err(Error::NoEvents);
        }
        Ok(Self { x, groups })
    }

    /// Log partial likelihood, score and observed information at `beta`.
    fn evaluate(&self, beta: f64) -> (f64, f64, f64) {
        let (mut ll, mut score, mut info) = (0.0, 0.0, 0.0);
        // cumulative sums over the descending prefix, shifted for stability
        let shift = if beta >= 0.0 {
            self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        } else {
            self.x.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        let mut filled = 0;
        for &(n_risk, sx, d) in &self.groups {
            while filled < n_risk {
                let xi = self.x[filled];
                let w = (beta * (xi - shift)).exp();
                s0 += w;
                s1 += w * xi;
                s2 += w * xi * xi;
                filled += 1;
            }
            let d = d as f64;
            let mean = s1 / s0;
            ll += beta * sx - d * (s0.ln() + beta * shift);
            score += sx - d * mean;
            info += d * (s2 / s0 - mean * mean);
        }
        (ll, score, info)
    }

    /// Whether the likelihood is monotone: each event's covariate sits at the
    /// extreme of its risk set.
    fn divergence(&self) -> Result<Option<Divergence>> {
        let (mut all_max, mut all_min, mut any_varying) = (true, true, false);
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        let mut filled = 0;
        for &(n_risk, sx, d) in &self.groups {
            while filled < n_risk {
                hi = hi.max(self.x[filled]);
                lo = lo.min(self.x[filled]);
                filled += 1;
            }
            if hi > lo {
                any_varying = true;
            }
            let d = d as f64;
            // the event covariates sum to d * extreme only when every event
            // carries that extreme
            if sx < d * hi - 1e-12 * hi.abs().max(1.0) {
                all_max = false;
            }
            if sx > d * lo + 1e-12 * lo.abs().max(1.0) {
                all_min = false;
            }
        }
        if !any_varying {
            return Err(Error::DegenerateCovariate);
        }
        Ok(match (all_max, all_min) {
            (true, _) => Some(Divergence::Positive),
            (_, true) => Some(Divergence::Negative),
            _ => None,
        })
    }
}

/// Breslow log partial likelihood of a single-covariate Cox model.
pub fn cox_log_likelihood(
    records: &[SurvivalRecord],
    covariate: &[f64],
    event_def: EventDef,
    beta: f64,
) -> Result<f64> {
    Ok(RiskSets::build(records, covariate, event_def)?.evaluate(beta).0)
}

pub const COX_MAX_ITER: usize = 50;
pub const COX_SCORE_TOL: f64 = 1e-8;

/// Univariate Cox proportional-hazards fit with Breslow ties.
///
/// Newton–Raphson from `beta = 0`, halving steps that decrease the
/// likelihood, until `|score| < 1e-8` or 50 iterations.
pub fn cox_univariate(records: &[SurvivalRecord], covariate: &[f64], event_def: EventDef) -> Result<CoxFit> {
    let sets = RiskSets::build(records, covariate, event_def)?;
    let n_events = sets.groups.iter().map(|g| g.2).sum();
    if let Some(direction) = sets.divergence()? {
        return Ok(CoxFit {
            coefficient: None,
            hazard_ratio: None,
            ci95: None,
            std_error: None,
            p_value: None,
            log_likelihood: None,
            iterations: 0,
            converged: false,
            diverged: Some(direction),
            n_events,
        });
    }

    let mut beta = 0.0;
    let (mut ll, mut score, mut info) = sets.evaluate(beta);
    let mut iterations = 0;
    let mut converged = score.abs() < COX_SCORE_TOL;
    while !converged && iterations < COX_MAX_ITER {
        iterations += 1;
        let mut step = if info > 0.0 { score / info } else { score.signum() };
        let mut next = sets.evaluate(beta + step);
        let mut halvings = 0;
        while next.0 < ll && halvings < 30 {
            step /= 2.0;
            next = sets.evaluate(beta + step);
            halvings += 1;
        }
        beta += step;
        (ll, score, info) = next;
        converged = score.abs() < COX_SCORE_TOL;
    }

    let se = (info > 0.0).then(|| 1.0 / info.sqrt());
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(CoxFit {
        coefficient: Some(beta),
        hazard_ratio: Some(beta.exp()),
        ci95: se.map(|se| ((beta - 1.96 * se).exp(), (beta + 1.96 * se).exp())),
        std_error: se,
        p_value: se.map(|se| 2.0 * (1.0 - normal.cdf((beta / se).abs()))),
        log_likelihood: Some(ll),
        iterations,
        converged,
        diverged: None,
        n_events,
    })
}
