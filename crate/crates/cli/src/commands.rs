//! One function per pipeline command. Each returns the text to print on
//! success.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use tableparse::config::Config;
use tableparse::doctree;
use tableparse::eval::{self, EvalError};
use tableparse::ocrmerge::{self, MergeError};
use tableparse::structure;
use tableparse::weaksup::{self, WeakSupError};

use crate::store::{atomic_write, sanitize_id};
use crate::CliError;

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail =
        |e: std::io::Error| CliError::Processing(format!("cannot write {}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(fail)?;
    }
    atomic_write(path, bytes).map_err(fail)
}

fn weaksup_error(path: &Path, e: WeakSupError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    match e {
        WeakSupError::NotASpreadsheet(_)
        | WeakSupError::SheetNotFound(_)
        | WeakSupError::UnsupportedFeature(_)
        | WeakSupError::InvalidSheet(_)
        | WeakSupError::InvalidDpi(_) => CliError::Input(msg),
        _ => CliError::Processing(msg),
    }
}

/// Files written by [`weaksup`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeakSupOutputs {
    pub annotation: PathBuf,
    pub raster: PathBuf,
    pub manifest: PathBuf,
}

pub fn weaksup_paths(xlsx: &Path, sheet: &str, out_dir: &Path) -> WeakSupOutputs {
    let xlsx_stem = xlsx.file_stem().and_then(|s| s.to_str()).unwrap_or("sheet");
    let stem = sanitize_id(&format!("{xlsx_stem}-{sheet}"));
    WeakSupOutputs {
        annotation: out_dir.join(format!("{stem}.json")),
        raster: out_dir.join(format!("{stem}.page0.png")),
        manifest: out_dir.join(format!("{stem}.manifest.json")),
    }
}

pub fn weaksup(
    xlsx: &Path,
    sheet_name: &str,
    out_dir: &Path,
    dpi: f64,
) -> Result<String, CliError> {
    let bytes = read_input(xlsx)?;
    let sheet = weaksup::load_sheet(&bytes, sheet_name).map_err(|e| weaksup_error(xlsx, e))?;
    let ann = weaksup::annotate_sheet(&sheet, dpi).map_err(|e| weaksup_error(xlsx, e))?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Processing(format!("cannot create {}: {e}", out_dir.display())))?;
    let out = weaksup_paths(xlsx, sheet_name, out_dir);
    let file_name = |p: &Path| p.file_name().unwrap().to_string_lossy().into_owned();
    let manifest = json!({
        "source": xlsx.file_name().map(|n| n.to_string_lossy().into_owned()),
        "sheet": sheet_name,
        "dpi": dpi,
        "annotation": file_name(&out.annotation),
        "pages": [{
            "page": 0,
            "image": file_name(&out.raster),
            "width": ann.raster.width(),
            "height": ann.raster.height(),
        }],
        "entities": ann.tree.len(),
        "colors_used": ann.colors.ids.values().collect::<std::collections::BTreeSet<_>>().len(),
    });
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    manifest_bytes.push(b'\n');
    write_output(&out.annotation, &doctree::serialize_annotation(&ann.tree))?;
    write_output(&out.raster, &weaksup::encode_png(&ann.raster))?;
    write_output(&out.manifest, &manifest_bytes)?;
    Ok(format!(
        "wrote {} ({} entities), {}, {}",
        out.annotation.display(),
        ann.tree.len(),
        out.raster.display(),
        out.manifest.display()
    ))
}

pub fn infer(
    detections: &Path,
    out: &Path,
    threshold: f64,
    cap: usize,
) -> Result<String, CliError> {
    let bytes = read_input(detections)?;
    let dets = structure::parse_detections(&bytes)
        .map_err(|e| CliError::Input(format!("{}: {e}", detections.display())))?;
    let kept = structure::filter_detections(&dets, threshold, cap);
    let tree = structure::infer_structure(&kept)
        .map_err(|e| CliError::Processing(format!("{}: {e}", detections.display())))?;
    write_output(out, &doctree::serialize_annotation(&tree))?;
    let cells = tree.of_category(doctree::EntityCategory::TableCell).count();
    Ok(format!(
        "kept {} of {} detections; wrote {} with {cells} cells",
        kept.len(),
        dets.len(),
        out.display()
    ))
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".unassigned.json");
    PathBuf::from(s)
}

pub fn merge(
    tree_path: &Path,
    text_path: &Path,
    csv: &Path,
    with_sums: bool,
) -> Result<String, CliError> {
    let tree = doctree::parse_annotation(&read_input(tree_path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", tree_path.display())))?;
    let tokens = ocrmerge::load_textboxes(&read_input(text_path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", text_path.display())))?;
    let grid = ocrmerge::grid_from_tree(&tree).map_err(|e| match e {
        MergeError::MalformedInput(_) | MergeError::EmptyText { .. } => {
            CliError::Input(format!("{}: {e}", tree_path.display()))
        }
        _ => CliError::Processing(format!("{}: {e}", tree_path.display())),
    })?;
    let (filled, report) = ocrmerge::assign_text(&grid, &tokens);
    let export = ocrmerge::export_csv(&filled, with_sums);
    let mut sidecar = serde_json::to_vec_pretty(&report.unassigned).expect("textboxes serialize");
    sidecar.push(b'\n');
    write_output(csv, &export.bytes)?;
    write_output(&sidecar_path(csv), &sidecar)?;
    Ok(format!(
        "grid {}x{}; assigned {} of {} tokens; unassigned {}; multi-candidate {}; non-numeric cells {}\nwrote {}",
        filled.n_rows,
        filled.n_cols,
        report.assigned,
        tokens.len(),
        report.unassigned.len(),
        report.multi_candidate,
        export.non_numeric,
        csv.display()
    ))
}

/// Document id of a file name: everything before the first `.`.
pub fn doc_id(file_name: &str) -> &str {
    file_name.split('.').next().unwrap_or(file_name)
}

fn read_json_dir(dir: &Path) -> Result<Vec<(String, PathBuf)>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry =
            entry.map_err(|e| CliError::Input(format!("cannot read {}: {e}", dir.display())))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".json") && entry.path().is_file() {
            files.push((name, entry.path()));
        }
    }
    files.sort();
    Ok(files)
}

/// File bytes by document id.
pub type DocFiles = BTreeMap<String, Vec<u8>>;

/// Loads `{id}.json` ground truths and, per id, `{id}.detections.json` or
/// else `{id}.json` predictions.
pub fn load_eval_dirs(pred_dir: &Path, gt_dir: &Path) -> Result<(DocFiles, DocFiles), CliError> {
    let mut gts = BTreeMap::new();
    for (name, path) in read_json_dir(gt_dir)? {
        let id = doc_id(&name);
        if name == format!("{id}.json") {
            gts.insert(id.to_string(), read_input(&path)?);
        }
    }
    let mut preds = BTreeMap::new();
    let files = read_json_dir(pred_dir)?;
    let ids: std::collections::BTreeSet<&str> = files.iter().map(|(n, _)| doc_id(n)).collect();
    for id in ids {
        let pick = [format!("{id}.detections.json"), format!("{id}.json")]
            .into_iter()
            .find_map(|want| files.iter().find(|(n, _)| *n == want));
        if let Some((_, path)) = pick {
            preds.insert(id.to_string(), read_input(path)?);
        }
    }
    Ok((preds, gts))
}

pub fn eval(
    pred_dir: &Path,
    gt_dir: &Path,
    summary: Option<&Path>,
    config: &Config,
) -> Result<String, CliError> {
    let (preds, gts) = load_eval_dirs(pred_dir, gt_dir)?;
    let report = eval::evaluate_dataset(
        &preds,
        &gts,
        &eval::REPORT_CATEGORIES,
        &config.iou_thresholds,
    )
    .map_err(|e| match e {
        EvalError::UnpairedDocument(_) | EvalError::MalformedInput { .. } => {
            CliError::Input(e.to_string())
        }
        _ => CliError::Processing(e.to_string()),
    })?;
    if let Some(path) = summary {
        write_output(path, report.summary_json().as_bytes())?;
    }
    Ok(report.render_text().trim_end().to_string())
}
