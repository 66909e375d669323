//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations: render a random sheet through the color raster and
//! recover its cell boxes; sweep AP against jittered or shifted
//! predictions; merge OCR tokens into a detected grid and export CSV.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;
use wasm_bindgen::prelude::*;

use tableparse::doctree::{self, DocTree};
use tableparse::eval::{self, REPORT_CATEGORIES};
use tableparse::geom::BBox;
use tableparse::structure::{self, Detection};
use tableparse::weaksup::{self, synth, CellValue};
use tableparse::{config, ocrmerge};

/// A synthetic sheet pushed through the weak-supervision pipeline.
#[wasm_bindgen]
pub struct SheetDemo {
    width: u32,
    height: u32,
    rgba: Vec<u8>,
    summary: String,
    annotation: String,
}

#[wasm_bindgen]
impl SheetDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(
        seed: u32,
        max_rows: u32,
        max_cols: u32,
        max_merges: usize,
    ) -> Result<SheetDemo, JsError> {
        sheet_demo(seed, max_rows, max_cols, max_merges).map_err(|e| JsError::new(&e))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Raster pixels, RGBA row-major, ready for `ImageData`.
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// `{rows, cols, merges, colors_used, regions, entities, violations}`.
    pub fn summary(&self) -> String {
        self.summary.clone()
    }

    pub fn annotation(&self) -> String {
        self.annotation.clone()
    }
}

pub fn sheet_demo(
    seed: u32,
    max_rows: u32,
    max_cols: u32,
    max_merges: usize,
) -> Result<SheetDemo, String> {
    let mut rng = StdRng::seed_from_u64(seed as u64);
    let params = synth::SynthParams {
        max_rows: max_rows.clamp(1, 40),
        max_cols: max_cols.clamp(1, 20),
        max_merges,
    };
    let sheet = synth::random_sheet(&mut rng, params);
    let ann = weaksup::annotate_sheet(&sheet, config::DEFAULT_DPI).map_err(|e| e.to_string())?;
    let regions = weaksup::recover_regions(&ann.raster).map_err(|e| e.to_string())?;
    let classes = weaksup::classify_cells(&sheet).map_err(|e| e.to_string())?;
    let regions: Vec<_> = regions
        .iter()
        .map(|r| {
            let anchor = ann
                .geometry
                .cells
                .iter()
                .find(|(_, b)| **b == r.bbox)
                .map(|(a, _)| *a);
            let class =
                anchor.map(|(row, col)| format!("{:?}", classes.get(row, col)).to_lowercase());
            json!({ "bbox": r.bbox, "rgb": r.rgb, "anchor": anchor, "class": class })
        })
        .collect();
    let entity_boxes: Vec<_> = eval::tree_boxes(&ann.tree, "demo", None)
        .iter()
        .map(|b| json!({ "category": b.category, "bbox": b.bbox }))
        .collect();
    let summary = json!({
        "rows": sheet.n_rows,
        "cols": sheet.n_cols,
        "merges": sheet.merged_ranges.len(),
        "colors_used": ann.colors.ids.values().max().map_or(0, |m| *m as usize + 1),
        "regions": regions,
        "entities": entity_boxes,
        "violations": doctree::validate(&ann.tree).len(),
    });
    let rgba = ann
        .raster
        .pixels()
        .flat_map(|p| [p[0], p[1], p[2], 255])
        .collect();
    Ok(SheetDemo {
        width: ann.raster.width(),
        height: ann.raster.height(),
        rgba,
        summary: summary.to_string(),
        annotation: String::from_utf8(doctree::serialize_annotation(&ann.tree))
            .expect("utf-8 json"),
    })
}

fn ground_truth(rows: u32, cols: u32, cell_px: u32) -> Result<DocTree, String> {
    let mut sheet = synth::uniform_sheet(rows + 1, cols, cell_px);
    for c in 0..cols {
        sheet.cells.remove(&(0, c));
    }
    sheet.set(0, 0, CellValue::Text("Caption".into()));
    Ok(weaksup::annotate_sheet(&sheet, config::DEFAULT_DPI)
        .map_err(|e| e.to_string())?
        .tree)
}

fn perturb(b: BBox, rng: &mut StdRng, jitter: u32, shift: u32) -> BBox {
    let j = jitter as i64;
    let mut d = |v: u32| (v as i64 + rng.gen_range(-j..=j)).max(0) as u32;
    let (x, y, w, h) = (d(b.x) + shift, d(b.y) + shift, d(b.w).max(1), d(b.h).max(1));
    BBox::new(x, y, w, h).expect("positive size")
}

/// AP of perturbed ground-truth boxes against the originals, for a table of
/// `rows x cols` square cells under a caption row. Returns the JSON
/// summary plus the text report under `"text"`.
pub fn ap_sweep(
    seed: u32,
    rows: u32,
    cols: u32,
    cell_px: u32,
    jitter_px: u32,
    shift_px: u32,
) -> Result<String, String> {
    let gt = ground_truth(rows.clamp(1, 30), cols.clamp(1, 30), cell_px.clamp(8, 200))?;
    let mut rng = StdRng::seed_from_u64(seed as u64);
    let dets: Vec<Detection> = eval::tree_boxes(&gt, "demo", None)
        .into_iter()
        .filter(|b| REPORT_CATEGORIES.contains(&b.category))
        .map(|b| Detection {
            category: b.category,
            bbox: perturb(b.bbox, &mut rng, jitter_px, shift_px),
            score: 1.0,
            page: 0,
        })
        .collect();
    let preds: BTreeMap<String, Vec<u8>> =
        [("demo".to_string(), structure::serialize_detections(&dets))].into();
    let gts: BTreeMap<String, Vec<u8>> =
        [("demo".to_string(), doctree::serialize_annotation(&gt))].into();
    let report = eval::evaluate_dataset_default(&preds, &gts).map_err(|e| e.to_string())?;
    let mut summary: serde_json::Value =
        serde_json::from_str(&report.summary_json()).expect("summary is json");
    summary["text"] = json!(report.render_text());
    Ok(summary.to_string())
}

#[wasm_bindgen(js_name = apSweep)]
pub fn ap_sweep_js(
    seed: u32,
    rows: u32,
    cols: u32,
    cell_px: u32,
    jitter_px: u32,
    shift_px: u32,
) -> Result<String, JsError> {
    ap_sweep(seed, rows, cols, cell_px, jitter_px, shift_px).map_err(|e| JsError::new(&e))
}

/// Infers a grid from a detection file, fills it with OCR tokens and
/// returns `{csv, assigned, unassigned, multi_candidate}` as JSON.
pub fn merge_csv(
    detections_json: &str,
    tokens_json: &str,
    threshold: f64,
    with_sums: bool,
) -> Result<String, String> {
    let dets =
        structure::parse_detections(detections_json.as_bytes()).map_err(|e| e.to_string())?;
    let kept = structure::filter_detections(&dets, threshold, config::DEFAULT_ENTITY_CAP);
    let tree = structure::infer_structure(&kept).map_err(|e| e.to_string())?;
    let tokens = ocrmerge::load_textboxes(tokens_json.as_bytes()).map_err(|e| e.to_string())?;
    let grid = ocrmerge::grid_from_tree(&tree).map_err(|e| e.to_string())?;
    let (filled, report) = ocrmerge::assign_text(&grid, &tokens);
    let export = ocrmerge::export_csv(&filled, with_sums);
    Ok(json!({
        "csv": String::from_utf8_lossy(&export.bytes),
        "assigned": report.assigned,
        "unassigned": report.unassigned.iter().map(|t| &t.text).collect::<Vec<_>>(),
        "multi_candidate": report.multi_candidate,
        "cells": filled
            .cells
            .iter()
            .map(|c| json!({ "bbox": c.bbox, "rows": [c.row_range.lo, c.row_range.hi], "cols": [c.col_range.lo, c.col_range.hi] }))
            .collect::<Vec<_>>(),
    })
    .to_string())
}

#[wasm_bindgen(js_name = mergeCsv)]
pub fn merge_csv_js(
    detections_json: &str,
    tokens_json: &str,
    threshold: f64,
    with_sums: bool,
) -> Result<String, JsError> {
    merge_csv(detections_json, tokens_json, threshold, with_sums).map_err(|e| JsError::new(&e))
}
