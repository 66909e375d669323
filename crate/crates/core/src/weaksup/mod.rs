//! Weak supervision from spreadsheets.
//!
//! A worksheet is classified into caption/footnote text and a numeric
//! content block, laid out in pixels, and filled with one distinct color
//! per cell so that cell boxes can be recovered from the rendering alone.
//! The recovered boxes become a [`DocTree`] annotation.

mod classify;
mod color;
mod emit;
mod geometry;
mod raster;
mod sheet;
pub mod synth;
pub mod xlsx;

use thiserror::Error;

pub use classify::{classify_cells, CellClass, CellClasses};
pub use color::{adjacency, assign_colors, ColorMap, Rgb, BACKGROUND, PALETTE};
pub use emit::emit_annotations;
pub use geometry::{column_px, compute_geometry, row_px, Geometry};
pub use raster::{encode_png, recover_regions, render_color_raster, Region};
pub use sheet::{
    CellLayout, CellValue, LogicalCell, MergeRange, Sheet, DEFAULT_COL_WIDTH, DEFAULT_ROW_HEIGHT,
};
pub use xlsx::{load_sheet, write_xlsx};

use crate::doctree::DocTree;
use crate::geom::BBox;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeakSupError {
    #[error("not a spreadsheet: {0}")]
    NotASpreadsheet(String),
    #[error("sheet {0:?} not found")]
    SheetNotFound(String),
    #[error("unsupported spreadsheet feature: {0}")]
    UnsupportedFeature(String),
    #[error("invalid sheet: {0}")]
    InvalidSheet(String),
    #[error("invalid dpi {0}")]
    InvalidDpi(f64),
    #[error("no content: the sheet has no numeric cell to anchor a tabular region")]
    NoContent,
    #[error("palette exhausted: {needed} colors needed")]
    PaletteExhausted { needed: usize },
    #[error("region of color {rgb:?} at {bbox:?} is not rectangular ({pixels} pixels)")]
    NonRectangularRegion { rgb: Rgb, bbox: BBox, pixels: u64 },
    #[error("recovered regions do not match the computed geometry: {0}")]
    RecoveryMismatch(String),
}

/// Everything produced for one sheet.
#[derive(Debug, Clone)]
pub struct WeakAnnotation {
    pub tree: DocTree,
    pub geometry: Geometry,
    pub colors: ColorMap,
    pub raster: image::RgbImage,
}

/// Runs the full chain: classify, lay out, color, render, recover the boxes
/// from the rendering and emit the annotation tree.
///
/// Recovery must reproduce the computed geometry exactly; any difference
/// is reported as [`WeakSupError::RecoveryMismatch`].
pub fn annotate_sheet(sheet: &Sheet, dpi: f64) -> Result<WeakAnnotation, WeakSupError> {
    let geometry = compute_geometry(sheet, dpi)?;
    let classes = classify_cells(sheet)?;
    let colors = assign_colors(sheet)?;
    let raster = render_color_raster(&geometry, &colors);
    let recovered = recovered_geometry(&raster, &geometry, &colors)?;
    let tree = emit_annotations(sheet, &recovered, &classes)?;
    Ok(WeakAnnotation {
        tree,
        geometry,
        colors,
        raster,
    })
}

/// Rebuilds cell boxes from recovered regions: each logical cell takes the
/// region of its color covering its anchor pixel. The result must equal
/// `expected`.
fn recovered_geometry(
    raster: &image::RgbImage,
    expected: &Geometry,
    colors: &ColorMap,
) -> Result<Geometry, WeakSupError> {
    let regions = recover_regions(raster)?;
    if regions.len() != expected.cells.len() {
        return Err(WeakSupError::RecoveryMismatch(format!(
            "{} regions recovered, {} cells expected",
            regions.len(),
            expected.cells.len()
        )));
    }
    let mut cells = std::collections::BTreeMap::new();
    for &(r, c) in expected.cells.keys() {
        let (x, y) = (
            expected.col_edges[c as usize],
            expected.row_edges[r as usize],
        );
        let rgb = colors.rgb((r, c));
        let region = regions
            .iter()
            .find(|g| {
                Some(g.rgb) == rgb
                    && g.bbox.x <= x
                    && x < g.bbox.right()
                    && g.bbox.y <= y
                    && y < g.bbox.bottom()
            })
            .ok_or_else(|| {
                WeakSupError::RecoveryMismatch(format!("no region for cell ({r},{c})"))
            })?;
        cells.insert((r, c), region.bbox);
    }
    let recovered = Geometry {
        col_edges: expected.col_edges.clone(),
        row_edges: expected.row_edges.clone(),
        cells,
    };
    if &recovered != expected {
        return Err(WeakSupError::RecoveryMismatch(
            "recovered boxes differ from the layout".into(),
        ));
    }
    Ok(recovered)
}
