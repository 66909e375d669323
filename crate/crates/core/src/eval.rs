//! COCO-style box evaluation: IoU, greedy matching and average precision
//! over a set of IoU thresholds, plus the per-category report.
//!
//! Matching and AP follow the published COCO detection procedure with a
//! single area range and at most [`MAX_DETECTIONS`] predictions per page
//! image and category. Recall points are compared exactly in integer
//! arithmetic, so `recall >= k/100` has no rounding slack.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::config::coco_iou_thresholds;
use crate::doctree::{self, DocTree, EntityCategory};
use crate::geom::BBox;
use crate::structure;

/// Predictions kept per page image and category, highest scores first.
pub const MAX_DETECTIONS: usize = 100;

/// Number of recall points used for interpolation (0, 0.01, ..., 1).
pub const RECALL_POINTS: u32 = 101;

/// Categories reported, in report order.
pub const REPORT_CATEGORIES: [EntityCategory; 4] = [
    EntityCategory::Table,
    EntityCategory::Tabular,
    EntityCategory::TableColumn,
    EntityCategory::TableRow,
];

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBox {
    pub category: EntityCategory,
    pub bbox: BBox,
    pub page: u32,
    pub doc_id: String,
    /// Present on predictions only.
    pub score: Option<f64>,
}

impl LabeledBox {
    fn image_key(&self) -> (&str, u32) {
        (&self.doc_id, self.page)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("boxes of different categories ({0} and {1}) cannot be matched together")]
    CategoryMismatch(EntityCategory, EntityCategory),
    #[error("boxes from different page images cannot be matched together")]
    ImageMismatch,
    #[error("document {0:?} has no counterpart in the other set")]
    UnpairedDocument(String),
    #[error("{doc}: {detail}")]
    MalformedInput { doc: String, detail: String },
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// `(prediction index, ground-truth index)` in the order matches were made.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_preds: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

/// Indices of `preds` sorted by descending score; ties keep input order.
fn score_order(preds: &[LabeledBox]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| score_of(&preds[b]).total_cmp(&score_of(&preds[a])));
    order
}

fn score_of(b: &LabeledBox) -> f64 {
    b.score.unwrap_or(1.0)
}

fn check_uniform(
    preds: &[LabeledBox],
    gts: &[LabeledBox],
    same_image: bool,
) -> Result<(), EvalError> {
    let mut all = preds.iter().chain(gts);
    if let Some(first) = all.next() {
        for b in all {
            if b.category != first.category {
                return Err(EvalError::CategoryMismatch(first.category, b.category));
            }
            if same_image && b.image_key() != first.image_key() {
                return Err(EvalError::ImageMismatch);
            }
        }
    }
    Ok(())
}

/// Greedy matching on one page image and category.
///
/// Predictions are visited by descending score (ties in input order); each
/// takes the still-unmatched ground truth with the highest IoU, provided
/// that IoU is at least `thresh`. Among equal IoUs the earliest ground
/// truth wins.
pub fn match_detections(
    preds: &[LabeledBox],
    gts: &[LabeledBox],
    thresh: f64,
) -> Result<Matching, EvalError> {
    check_uniform(preds, gts, true)?;
    let mut gt_taken = vec![false; gts.len()];
    let mut out = Matching::default();
    for p in score_order(preds) {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if gt_taken[g] {
                continue;
            }
            let v = iou(&preds[p].bbox, &gt.bbox);
            if v >= thresh && best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        match best {
            Some((g, _)) => {
                gt_taken[g] = true;
                out.matches.push((p, g));
            }
            None => out.unmatched_preds.push(p),
        }
    }
    out.unmatched_gts = (0..gts.len()).filter(|&g| !gt_taken[g]).collect();
    Ok(out)
}

/// A scored true/false positive, ordered for PR construction.
#[derive(Debug, Clone, PartialEq)]
struct Event<'a> {
    score: f64,
    image: (&'a str, u32),
    rank: usize,
    tp: bool,
}

/// Interpolated AP at one threshold from the sorted events.
fn ap_from_events(events: &[Event<'_>], n_gt: usize) -> f64 {
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut tps = Vec::with_capacity(events.len());
    let mut precision = Vec::with_capacity(events.len());
    for e in events {
        if e.tp {
            tp += 1;
        } else {
            fp += 1;
        }
        tps.push(tp);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    // Make precision non-increasing from the right.
    for i in (1..precision.len()).rev() {
        if precision[i] > precision[i - 1] {
            precision[i - 1] = precision[i];
        }
    }
    let n_gt = n_gt as u64;
    let mut sum = 0.0;
    let mut i = 0;
    for k in 0..RECALL_POINTS as u64 {
        // First point with recall >= k/100, i.e. tp * 100 >= k * n_gt.
        while i < tps.len() && tps[i] * 100 < k * n_gt {
            i += 1;
        }
        if i < tps.len() {
            sum += precision[i];
        }
    }
    sum / RECALL_POINTS as f64
}

type PredsAndGts = (Vec<LabeledBox>, Vec<LabeledBox>);

/// Per-threshold AP (fractions in `[0, 1]`) for one category across any
/// number of documents and pages.
///
/// Returns `None` when there is neither ground truth nor prediction; with
/// no ground truth but some predictions every threshold scores 0.
pub fn average_precision_curve(
    preds: &[LabeledBox],
    gts: &[LabeledBox],
    thresholds: &[f64],
) -> Result<Option<Vec<f64>>, EvalError> {
    check_uniform(preds, gts, false)?;
    if gts.is_empty() {
        return Ok((!preds.is_empty()).then(|| vec![0.0; thresholds.len()]));
    }

    let mut images: BTreeMap<(&str, u32), PredsAndGts> = BTreeMap::new();
    for p in preds {
        images.entry(p.image_key()).or_default().0.push(p.clone());
    }
    for g in gts {
        images.entry(g.image_key()).or_default().1.push(g.clone());
    }
    // Truncate to the top MAX_DETECTIONS per image.
    for (ps, _) in images.values_mut() {
        let keep: Vec<LabeledBox> = score_order(ps)
            .into_iter()
            .take(MAX_DETECTIONS)
            .map(|i| ps[i].clone())
            .collect();
        *ps = keep;
    }

    let mut curve = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let mut events = Vec::new();
        for (key, (ps, gs)) in &images {
            let m = match_detections(ps, gs, t)?;
            let mut tp = vec![false; ps.len()];
            for (p, _) in &m.matches {
                tp[*p] = true;
            }
            for (rank, p) in score_order(ps).into_iter().enumerate() {
                events.push(Event {
                    score: score_of(&ps[p]),
                    image: *key,
                    rank,
                    tp: tp[p],
                });
            }
        }
        events.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(a.image.cmp(&b.image))
                .then(a.rank.cmp(&b.rank))
        });
        curve.push(ap_from_events(&events, gts.len()));
    }
    Ok(Some(curve))
}

/// AP averaged over `thresholds`, as a fraction in `[0, 1]`.
pub fn average_precision(
    preds: &[LabeledBox],
    gts: &[LabeledBox],
    thresholds: &[f64],
) -> Result<Option<f64>, EvalError> {
    Ok(average_precision_curve(preds, gts, thresholds)?.map(|c| {
        if c.is_empty() {
            0.0
        } else {
            c.iter().sum::<f64>() / c.len() as f64
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryRow {
    pub category: EntityCategory,
    /// Ground-truth instances.
    pub count: usize,
    /// Percent, mean over the threshold set.
    pub ap: Option<f64>,
    /// Percent, at IoU 0.5.
    pub ap50: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApReport {
    pub rows: Vec<CategoryRow>,
    /// Mean of the defined per-category APs, in percent.
    pub mean_ap: Option<f64>,
    /// True when some predictions came from annotation trees (score 1.0).
    pub tree_derived_predictions: bool,
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

impl ApReport {
    /// Aligned plain-text table, percentages with three decimals.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16}{:>13}{:>11}{:>11}",
            "Category", "# instances", "AP", "AP50"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<16}{:>13}{:>11}{:>11}",
                r.category.as_str(),
                r.count,
                pct(r.ap),
                pct(r.ap50)
            );
        }
        let _ = writeln!(
            s,
            "{:<16}{:>13}{:>11}{:>11}",
            "mean",
            "",
            pct(self.mean_ap),
            ""
        );
        if self.tree_derived_predictions {
            s.push_str("note: some predictions were read from annotation trees and scored 1.0\n");
        }
        s
    }

    /// Machine-readable summary: category → {count, ap, ap50}.
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            count: usize,
            ap: Option<f64>,
            ap50: Option<f64>,
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            categories: BTreeMap<&'a str, Entry>,
            mean_ap: Option<f64>,
            tree_derived_predictions: bool,
        }
        let round = |v: Option<f64>| v.map(|x| (x * 1000.0).round() / 1000.0);
        let summary = Summary {
            categories: self
                .rows
                .iter()
                .map(|r| {
                    (
                        r.category.as_str(),
                        Entry {
                            count: r.count,
                            ap: round(r.ap),
                            ap50: round(r.ap50),
                        },
                    )
                })
                .collect(),
            mean_ap: round(self.mean_ap),
            tree_derived_predictions: self.tree_derived_predictions,
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}

/// Builds the report from already-extracted boxes.
pub fn evaluate_boxes(
    preds: &[LabeledBox],
    gts: &[LabeledBox],
    categories: &[EntityCategory],
    thresholds: &[f64],
    tree_derived_predictions: bool,
) -> Result<ApReport, EvalError> {
    let mut rows = Vec::new();
    for &cat in categories {
        let p: Vec<LabeledBox> = preds
            .iter()
            .filter(|b| b.category == cat)
            .cloned()
            .collect();
        let g: Vec<LabeledBox> = gts.iter().filter(|b| b.category == cat).cloned().collect();
        let ap = average_precision(&p, &g, thresholds)?.map(|v| v * 100.0);
        let ap50 = average_precision(&p, &g, &[0.5])?.map(|v| v * 100.0);
        rows.push(CategoryRow {
            category: cat,
            count: g.len(),
            ap,
            ap50,
        });
    }
    let defined: Vec<f64> = rows.iter().filter_map(|r| r.ap).collect();
    let mean_ap = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(ApReport {
        rows,
        mean_ap,
        tree_derived_predictions,
    })
}

/// Boxes of every semantic entity in `tree`, labelled with `doc_id`.
/// `score` is attached to each box (use `Some(1.0)` for tree-derived
/// predictions, `None` for ground truth).
pub fn tree_boxes(tree: &DocTree, doc_id: &str, score: Option<f64>) -> Vec<LabeledBox> {
    tree.entities()
        .filter(|e| e.category.is_semantic())
        .flat_map(|e| {
            tree.boxes_of(e.id).map(move |(page, bbox)| LabeledBox {
                category: e.category,
                bbox,
                page,
                doc_id: doc_id.to_string(),
                score,
            })
        })
        .collect()
}

/// Whether a prediction file holds detections or an annotation tree.
fn is_annotation_file(bytes: &[u8]) -> Result<bool, String> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    let arr = value.as_array().ok_or("expected a JSON array")?;
    Ok(arr
        .first()
        .is_some_and(|v| v.get("id").is_some() && v.get("score").is_none()))
}

/// Evaluates prediction files against ground-truth annotation files.
///
/// Both maps go from document id (file stem) to file bytes and must hold
/// the same ids. Prediction files may be detection files or annotation
/// trees; tree boxes are scored 1.0 and the report is flagged.
pub fn evaluate_dataset(
    pred_files: &BTreeMap<String, Vec<u8>>,
    gt_files: &BTreeMap<String, Vec<u8>>,
    categories: &[EntityCategory],
    thresholds: &[f64],
) -> Result<ApReport, EvalError> {
    if let Some(id) = gt_files.keys().find(|k| !pred_files.contains_key(*k)) {
        return Err(EvalError::UnpairedDocument(id.clone()));
    }
    if let Some(id) = pred_files.keys().find(|k| !gt_files.contains_key(*k)) {
        return Err(EvalError::UnpairedDocument(id.clone()));
    }
    let malformed = |doc: &str, detail: String| EvalError::MalformedInput {
        doc: doc.to_string(),
        detail,
    };

    let mut gts = Vec::new();
    for (id, bytes) in gt_files {
        let tree = doctree::parse_annotation(bytes).map_err(|e| malformed(id, e.to_string()))?;
        gts.extend(tree_boxes(&tree, id, None));
    }
    let mut preds = Vec::new();
    let mut tree_derived = false;
    for (id, bytes) in pred_files {
        if is_annotation_file(bytes).map_err(|e| malformed(id, e))? {
            let tree =
                doctree::parse_annotation(bytes).map_err(|e| malformed(id, e.to_string()))?;
            preds.extend(tree_boxes(&tree, id, Some(1.0)));
            tree_derived = true;
        } else {
            let dets =
                structure::parse_detections(bytes).map_err(|e| malformed(id, e.to_string()))?;
            preds.extend(dets.into_iter().map(|d| LabeledBox {
                category: d.category,
                bbox: d.bbox,
                page: d.page,
                doc_id: id.clone(),
                score: Some(d.score),
            }));
        }
    }
    evaluate_boxes(&preds, &gts, categories, thresholds, tree_derived)
}

/// [`evaluate_dataset`] with the report categories and COCO thresholds.
pub fn evaluate_dataset_default(
    pred_files: &BTreeMap<String, Vec<u8>>,
    gt_files: &BTreeMap<String, Vec<u8>>,
) -> Result<ApReport, EvalError> {
    evaluate_dataset(
        pred_files,
        gt_files,
        &REPORT_CATEGORIES,
        &coco_iou_thresholds(),
    )
}
