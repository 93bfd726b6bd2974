use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphometry::CaseFeatureSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Roi,
    Case,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub level: Level,
    pub case_id: String,
    /// Empty on case rows.
    pub roi_id: String,
    pub values: Vec<Option<f64>>,
}

/// Long table of ROI rows followed by their case aggregate, per case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub params: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

const FIXED: [&str; 3] = ["level", "case_id", "roi_id"];

impl FeatureTable {
    /// Builds the table from cases and their ROI ids (same order as `rois`).
    pub fn from_cases(cases: &[(CaseFeatureSet, Vec<String>)]) -> Result<Self> {
        let Some((first, _)) = cases.first() else {
            return Ok(Self {
                params: Vec::new(),
                rows: Vec::new(),
            });
        };
        let params: Vec<String> = first.parameters.iter().map(|p| p.name.clone()).collect();
        let mut rows = Vec::new();
        for (case, roi_ids) in cases {
            if roi_ids.len() != case.rois.len() {
                return Err(Error::LengthMismatch {
                    left: case.rois.len(),
                    right: roi_ids.len(),
                });
            }
            let names: Vec<&String> = case.parameters.iter().map(|p| &p.name).collect();
            if names.len() != params.len() || names.iter().zip(&params).any(|(a, b)| *a != b) {
                return Err(Error::InvalidArgument(format!(
                    "case {} uses a different parameter set",
                    case.case_id
                )));
            }
            for (roi, id) in case.rois.iter().zip(roi_ids) {
                rows.push(FeatureRow {
                    level: Level::Roi,
                    case_id: case.case_id.clone(),
                    roi_id: id.clone(),
                    values: roi.parameters().into_iter().map(|p| p.value).collect(),
                });
            }
            rows.push(FeatureRow {
                level: Level::Case,
                case_id: case.case_id.clone(),
                roi_id: String::new(),
                values: case.parameters.iter().map(|p| p.value).collect(),
            });
        }
        Ok(Self { params, rows })
    }

    pub fn param_index(&self, name: &str) -> Result<usize> {
        self.params.iter().position(|p| p == name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown parameter {name:?}; available: {}",
                self.params.join(", ")
            ))
        })
    }

    pub fn case_rows(&self) -> impl Iterator<Item = &FeatureRow> {
        self.rows.iter().filter(|r| r.level == Level::Case)
    }

    /// Case ids in first-seen order with their ROI rows in stored order.
    pub fn roi_rows_by_case(&self) -> Vec<(String, Vec<&FeatureRow>)> {
        let mut out: Vec<(String, Vec<&FeatureRow>)> = Vec::new();
        for r in self.rows.iter().filter(|r| r.level == Level::Roi) {
            match out.iter_mut().find(|(c, _)| *c == r.case_id) {
                Some((_, v)) => v.push(r),
                None => out.push((r.case_id.clone(), vec![r])),
            }
        }
        out
    }

    pub fn write(&self, writer: impl Write) -> Result<()> {
        let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(FIXED.iter().copied().chain(self.params.iter().map(String::as_str)))
            .map_err(csv_err)?;
        for r in &self.rows {
            let level = match r.level {
                Level::Roi => "roi",
                Level::Case => "case",
            };
            let mut rec = vec![level.to_string(), r.case_id.clone(), r.roi_id.clone()];
            rec.extend(r.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn parse(reader: impl Read, file: &str) -> Result<Self> {
        let err = |line: u64, message: String| Error::Table {
            file: file.to_string(),
            line,
            message,
        };
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
        if headers.len() < FIXED.len() || headers.iter().zip(FIXED).any(|(h, f)| h != f) {
            return Err(err(1, format!("header must start with {}", FIXED.join(","))));
        }
        let params: Vec<String> = headers.iter().skip(FIXED.len()).map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let level = match &rec[0] {
                "roi" => Level::Roi,
                "case" => Level::Case,
                other => return Err(err(line, format!("level {other:?}; expected roi or case"))),
            };
            if rec[1].is_empty() {
                return Err(err(line, "empty case_id".into()));
            }
            let values = rec
                .iter()
                .skip(FIXED.len())
                .zip(&params)
                .map(|(cell, name)| {
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>()
                            .map(Some)
                            .map_err(|e| err(line, format!("{name}: {e}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(FeatureRow {
                level,
                case_id: rec[1].to_string(),
                roi_id: rec[2].to_string(),
                values,
            });
        }
        Ok(Self { params, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(f, &path.display().to_string())
    }
}
