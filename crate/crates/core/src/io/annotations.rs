use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PolygonAnnotation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub mpp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedImage {
    pub image: ImageMeta,
    pub annotations: Vec<PolygonAnnotation>,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    id: String,
    label: String,
    polygon: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct RawFile {
    image: ImageMeta,
    annotations: Vec<RawEntry>,
}

fn json_path(p: &serde_path_to_error::Path) -> String {
    let s = p.to_string();
    if s == "." {
        "$".into()
    } else {
        format!("$.{s}")
    }
}

pub fn parse_annotations(text: &str) -> Result<AnnotatedImage> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = json_path(e.path());
        Error::schema(path, e.into_inner().to_string())
    })?;

    let img = &raw.image;
    if !(img.mpp.is_finite() && img.mpp > 0.0) {
        return Err(Error::schema("$.image.mpp", format!("must be > 0, got {}", img.mpp)));
    }
    if img.width == 0 {
        return Err(Error::schema("$.image.width", "must be >= 1"));
    }
    if img.height == 0 {
        return Err(Error::schema("$.image.height", "must be >= 1"));
    }
    let mut annotations = Vec::with_capacity(raw.annotations.len());
    for (i, a) in raw.annotations.into_iter().enumerate() {
        if a.polygon.len() < 3 {
            return Err(Error::schema(
                format!("$.annotations[{i}].polygon"),
                format!("{} vertices, at least 3 required", a.polygon.len()),
            ));
        }
        if a.polygon.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::schema(format!("$.annotations[{i}].polygon"), "non-finite coordinate"));
        }
        annotations.push(PolygonAnnotation {
            id: a.id,
            label: a.label,
            vertices: a.polygon.into_iter().map(|[x, y]| (x, y)).collect(),
        });
    }
    Ok(AnnotatedImage {
        image: raw.image,
        annotations,
    })
}

pub fn to_json(doc: &AnnotatedImage) -> String {
    let raw = RawFile {
        image: doc.image.clone(),
        annotations: doc
            .annotations
            .iter()
            .map(|a| RawEntry {
                id: a.id.clone(),
                label: a.label.clone(),
                polygon: a.vertices.iter().map(|&(x, y)| [x, y]).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("annotation documents serialize")
}

pub fn load_annotations(path: &Path) -> Result<AnnotatedImage> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text)
}

pub fn save_annotations(path: &Path, doc: &AnnotatedImage) -> Result<()> {
    std::fs::write(path, to_json(doc)).map_err(|e| Error::io(path, e))
}
