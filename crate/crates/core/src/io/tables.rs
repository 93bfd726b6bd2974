use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::biostats::agreement::RaterMatrix;
use crate::biostats::survival::{Status, SurvivalRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Low,
    High,
}

impl FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Self::Low),
            "high" => Ok(Self::High),
            other => Err(Error::InvalidArgument(format!(
                "unknown grade {other:?}; expected low or high"
            ))),
        }
    }
}

impl Grade {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Low => "low",
            Self::High => "high",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: String,
    pub outcome: SurvivalRecord,
    pub grade: Option<Grade>,
    /// Mitotic figures per 2.37 mm².
    pub mitotic_count: Option<f64>,
    /// ROI files in selection order, relative to the table's directory.
    pub rois: Vec<String>,
}

/// Header-indexed view of one CSV table.
struct Table {
    file: String,
    columns: HashMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(reader: impl Read, file: &str, required: &[&str]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let table_err = |line: u64, message: String| Error::Table {
            file: file.to_string(),
            line,
            message,
        };
        let headers = rdr.headers().map_err(|e| table_err(1, e.to_string()))?.clone();
        let columns: HashMap<String, usize> = headers.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
        if let Some(missing) = required.iter().find(|c| !columns.contains_key(**c)) {
            return Err(table_err(1, format!("missing required column {missing:?}")));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                table_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Self {
            file: file.to_string(),
            columns,
            rows,
        })
    }

    fn err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Table {
            file: self.file.clone(),
            line,
            message: message.into(),
        }
    }

    fn cell<'a>(&self, rec: &'a csv::StringRecord, column: &str) -> Option<&'a str> {
        self.columns
            .get(column)
            .and_then(|&i| rec.get(i))
            .filter(|s| !s.is_empty())
    }

    fn required<'a>(&self, line: u64, rec: &'a csv::StringRecord, column: &str) -> Result<&'a str> {
        self.cell(rec, column)
            .ok_or_else(|| self.err(line, format!("empty {column}")))
    }

    fn parse<T: FromStr>(&self, line: u64, rec: &csv::StringRecord, column: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.cell(rec, column)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| self.err(line, format!("{column}: {e}")))
            })
            .transpose()
    }
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn parse_case_table(reader: impl Read, file: &str) -> Result<Vec<CaseRecord>> {
    let t = Table::read(reader, file, &["case_id", "time_months", "status"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let line = *line;
        let case_id = t.required(line, rec, "case_id")?.to_string();
        if !seen.insert(case_id.clone()) {
            return Err(t.err(line, format!("duplicate case_id {case_id:?}")));
        }
        let time: f64 = t
            .parse(line, rec, "time_months")?
            .ok_or_else(|| t.err(line, "empty time_months"))?;
        let status: Status = t
            .parse(line, rec, "status")?
            .ok_or_else(|| t.err(line, "empty status"))?;
        let outcome = SurvivalRecord::new(case_id.clone(), time, status).map_err(|e| t.err(line, e.to_string()))?;
        let mitotic_count: Option<f64> = t.parse(line, rec, "mitotic_count")?;
        if mitotic_count.is_some_and(|m| !(m.is_finite() && m >= 0.0)) {
            return Err(t.err(line, "mitotic_count must be >= 0"));
        }
        let rois = t
            .cell(rec, "rois")
            .map(|s| s.split(';').map(|r| r.trim().to_string()).filter(|r| !r.is_empty()).collect())
            .unwrap_or_default();
        out.push(CaseRecord {
            case_id,
            outcome,
            grade: t.parse(line, rec, "grade")?,
            mitotic_count,
            rois,
        });
    }
    Ok(out)
}

pub fn load_case_table(path: &Path) -> Result<Vec<CaseRecord>> {
    parse_case_table(open(path)?, &display(path))
}

pub fn write_case_table(writer: impl Write, cases: &[CaseRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
    w.write_record(["case_id", "time_months", "status", "grade", "mitotic_count", "rois"])
        .map_err(csv_err)?;
    for c in cases {
        w.write_record([
            c.case_id.clone(),
            c.outcome.time_months.to_string(),
            c.outcome.status.to_string(),
            c.grade.map(|g| g.as_str().to_string()).unwrap_or_default(),
            c.mitotic_count.map(|m| m.to_string()).unwrap_or_default(),
            c.rois.join(";"),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// One rater's categorical estimate for one case at one timepoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaterEstimate {
    pub case_id: String,
    pub rater_id: String,
    pub timepoint: u8,
    pub karyomegaly: bool,
    /// Three-tier anisokaryosis, 1 to 3.
    pub anisokaryosis: u8,
}

pub fn parse_estimates(reader: impl Read, file: &str) -> Result<Vec<RaterEstimate>> {
    let t = Table::read(
        reader,
        file,
        &["case_id", "rater_id", "timepoint", "karyomegaly", "anisokaryosis"],
    )?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let line = *line;
        let case_id = t.required(line, rec, "case_id")?.to_string();
        let rater_id = t.required(line, rec, "rater_id")?.to_string();
        let timepoint = match t.required(line, rec, "timepoint")? {
            "1" => 1,
            "2" => 2,
            other => return Err(t.err(line, format!("timepoint {other:?}; expected 1 or 2"))),
        };
        let karyomegaly = match t.required(line, rec, "karyomegaly")? {
            "absent" => false,
            "present" => true,
            other => return Err(t.err(line, format!("karyomegaly {other:?}; expected absent or present"))),
        };
        let anisokaryosis = match t.required(line, rec, "anisokaryosis")? {
            "1" => 1,
            "2" => 2,
            "3" => 3,
            other => return Err(t.err(line, format!("anisokaryosis {other:?}; expected 1, 2 or 3"))),
        };
        if !seen.insert((case_id.clone(), rater_id.clone(), timepoint)) {
            return Err(t.err(line, format!("duplicate estimate for {case_id}/{rater_id}/{timepoint}")));
        }
        out.push(RaterEstimate {
            case_id,
            rater_id,
            timepoint,
            karyomegaly,
            anisokaryosis,
        });
    }
    Ok(out)
}

pub fn load_estimates(path: &Path) -> Result<Vec<RaterEstimate>> {
    parse_estimates(open(path)?, &display(path))
}

pub fn write_estimates(writer: impl Write, rows: &[RaterEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
    w.write_record(["case_id", "rater_id", "timepoint", "karyomegaly", "anisokaryosis"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.case_id.as_str(),
            r.rater_id.as_str(),
            &r.timepoint.to_string(),
            if r.karyomegaly { "present" } else { "absent" },
            &r.anisokaryosis.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Cases × raters matrix from estimates at one timepoint, in first-seen
/// order; cells without an estimate stay empty.
pub fn estimate_matrix<T: Copy>(
    estimates: &[RaterEstimate],
    timepoint: u8,
    value: impl Fn(&RaterEstimate) -> T,
) -> Result<RaterMatrix<T>> {
    let rows: Vec<(String, String, T)> = estimates
        .iter()
        .filter(|e| e.timepoint == timepoint)
        .map(|e| (e.case_id.clone(), e.rater_id.clone(), value(e)))
        .collect();
    long_to_matrix(&rows)
}

fn long_to_matrix<T: Copy>(rows: &[(String, String, T)]) -> Result<RaterMatrix<T>> {
    let mut case_ids: Vec<String> = Vec::new();
    let mut rater_ids: Vec<String> = Vec::new();
    let mut case_ix = HashMap::new();
    let mut rater_ix = HashMap::new();
    for (c, r, _) in rows {
        if !case_ix.contains_key(c) {
            case_ix.insert(c.clone(), case_ids.len());
            case_ids.push(c.clone());
        }
        if !rater_ix.contains_key(r) {
            rater_ix.insert(r.clone(), rater_ids.len());
            rater_ids.push(r.clone());
        }
    }
    let mut cells = vec![vec![None; rater_ids.len()]; case_ids.len()];
    for (c, r, v) in rows {
        cells[case_ix[c]][rater_ix[r]] = Some(*v);
    }
    RaterMatrix::new(case_ids, rater_ids, cells)
}

/// Long-format continuous measurements `(case_id, rater_id, value)`.
pub fn parse_measurements(reader: impl Read, file: &str) -> Result<RaterMatrix<f64>> {
    let t = Table::read(reader, file, &["case_id", "rater_id", "value"])?;
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let line = *line;
        let case_id = t.required(line, rec, "case_id")?.to_string();
        let rater_id = t.required(line, rec, "rater_id")?.to_string();
        let value: f64 = t
            .parse(line, rec, "value")?
            .ok_or_else(|| t.err(line, "empty value"))?;
        if !value.is_finite() {
            return Err(t.err(line, "value must be finite"));
        }
        if !seen.insert((case_id.clone(), rater_id.clone())) {
            return Err(t.err(line, format!("duplicate measurement for {case_id}/{rater_id}")));
        }
        rows.push((case_id, rater_id, value));
    }
    long_to_matrix(&rows)
}

pub fn load_measurements(path: &Path) -> Result<RaterMatrix<f64>> {
    parse_measurements(open(path)?, &display(path))
}

pub fn write_measurements(writer: impl Write, matrix: &RaterMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
    w.write_record(["case_id", "rater_id", "value"]).map_err(csv_err)?;
    for (case, row) in matrix.case_ids.iter().zip(&matrix.cells) {
        for (rater, v) in matrix.rater_ids.iter().zip(row) {
            if let Some(v) = v {
                w.write_record([case.as_str(), rater.as_str(), &v.to_string()])
                    .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}
