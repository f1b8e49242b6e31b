//! Detection JSON: an array of `{"bbox": [x, y, w, h], "score"?, "category_id"?}`
//! records in pixels.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{FoveaError, Result};
use crate::geometry::{BBox, DetectionSet, Space};

pub fn ingest_detections(path: &Path, image_w: usize, image_h: usize) -> Result<DetectionSet> {
    let text = std::fs::read_to_string(path)?;
    parse_detections(&text, path, image_w, image_h)
}

pub fn parse_detections(
    text: &str,
    path: &Path,
    image_w: usize,
    image_h: usize,
) -> Result<DetectionSet> {
    let malformed = |message: String| FoveaError::MalformedJson {
        path: path.to_path_buf(),
        message,
    };
    let invalid = |index: usize, message: String| FoveaError::InvalidRecord {
        path: path.to_path_buf(),
        index,
        message,
    };

    let root: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let records = root
        .as_array()
        .ok_or_else(|| malformed("top level must be an array".into()))?;

    let mut boxes = Vec::with_capacity(records.len());
    let mut scores = Vec::with_capacity(records.len());
    let mut classes = Vec::with_capacity(records.len());
    let (mut any_score, mut any_class) = (false, false);

    for (index, rec) in records.iter().enumerate() {
        let obj = rec
            .as_object()
            .ok_or_else(|| invalid(index, "record must be an object".into()))?;
        let bbox = obj.get("bbox").ok_or(FoveaError::MissingKey {
            path: path.to_path_buf(),
            index,
            key: "bbox",
        })?;
        let xywh: Vec<f64> = bbox
            .as_array()
            .filter(|a| a.len() == 4)
            .and_then(|a| a.iter().map(Value::as_f64).collect())
            .ok_or_else(|| invalid(index, "`bbox` must be an array of four numbers".into()))?;
        let (w, h) = (xywh[2], xywh[3]);
        if !(w > 0.0 && h > 0.0) {
            return Err(FoveaError::NonPositiveSize {
                path: path.to_path_buf(),
                index,
                w,
                h,
            });
        }
        let b = BBox::from_pixel_xywh([xywh[0], xywh[1], w, h], image_w, image_h, Space::Original)
            .map_err(|e| invalid(index, e.to_string()))?;
        boxes.push(b);

        match obj.get("score") {
            Some(v) => {
                let s = v
                    .as_f64()
                    .filter(|s| (0.0..=1.0).contains(s))
                    .ok_or_else(|| invalid(index, "`score` must be a number in [0, 1]".into()))?;
                scores.push(s);
                any_score = true;
            }
            None => scores.push(1.0),
        }
        match obj.get("category_id") {
            Some(v) => {
                let c = v
                    .as_i64()
                    .ok_or_else(|| invalid(index, "`category_id` must be an integer".into()))?;
                classes.push(c);
                any_class = true;
            }
            None => classes.push(-1),
        }
    }

    DetectionSet::new(
        boxes,
        any_score.then_some(scores),
        any_class.then_some(classes),
    )
}

/// Serializes back to pixel `[x, y, w, h]` records.
pub fn detections_to_json(set: &DetectionSet, image_w: usize, image_h: usize) -> String {
    let (w, h) = (image_w as f64, image_h as f64);
    let records: Vec<Value> = set
        .boxes()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut rec = json!({
                "bbox": [b.x1 * w, b.y1 * h, b.width() * w, b.height() * h],
            });
            if set.scores().is_some() {
                rec["score"] = json!(set.score(i));
            }
            if let Some(c) = set.class_ids() {
                rec["category_id"] = json!(c[i]);
            }
            rec
        })
        .collect();
    Value::Array(records).to_string()
}
