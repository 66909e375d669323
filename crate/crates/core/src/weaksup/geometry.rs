use std::collections::BTreeMap;

use crate::geom::BBox;

use super::sheet::{LogicalCell, Sheet};
use super::WeakSupError;

/// Maximum digit width of the default font at 96 DPI, in pixels.
pub const MAX_DIGIT_WIDTH_PX: f64 = 7.0;
/// Cell padding added to every column, in pixels at 96 DPI.
pub const COLUMN_PADDING_PX: f64 = 5.0;

/// Pixel layout of a sheet: grid-line positions and one box per logical
/// cell, keyed by anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Geometry {
    /// `n_cols + 1` vertical grid-line x positions, starting at 0.
    pub col_edges: Vec<u32>,
    /// `n_rows + 1` horizontal grid-line y positions, starting at 0.
    pub row_edges: Vec<u32>,
    pub cells: BTreeMap<(u32, u32), BBox>,
}

impl Geometry {
    pub fn width(&self) -> u32 {
        *self.col_edges.last().unwrap_or(&0)
    }

    pub fn height(&self) -> u32 {
        *self.row_edges.last().unwrap_or(&0)
    }

    /// Box of the inclusive block `rows × cols` of unit cells.
    pub fn block(&self, rows: (u32, u32), cols: (u32, u32)) -> BBox {
        BBox::from_edges(
            self.col_edges[cols.0 as usize],
            self.row_edges[rows.0 as usize],
            self.col_edges[cols.1 as usize + 1],
            self.row_edges[rows.1 as usize + 1],
        )
        .expect("grid lines strictly increase")
    }

    pub fn logical_box(&self, cell: &LogicalCell) -> BBox {
        self.block((cell.rows.lo, cell.rows.hi), (cell.cols.lo, cell.cols.hi))
    }
}

/// Pixel width of a column given in character units.
pub fn column_px(width_chars: f64, dpi: f64) -> u32 {
    let at_96 = (width_chars * MAX_DIGIT_WIDTH_PX + COLUMN_PADDING_PX).round();
    ((at_96 * dpi / 96.0).round() as u32).max(1)
}

/// Pixel height of a row given in points.
pub fn row_px(height_pt: f64, dpi: f64) -> u32 {
    ((height_pt * dpi / 72.0).round() as u32).max(1)
}

fn edges(sizes: impl Iterator<Item = u32>) -> Vec<u32> {
    let mut out = vec![0];
    let mut acc = 0;
    for s in sizes {
        acc += s;
        out.push(acc);
    }
    out
}

/// Lays out the sheet in pixels with its top-left corner at the origin.
///
/// Boxes tile the sheet without gaps or overlaps; merged cells get the
/// union of their range. Every column and row is at least one pixel.
pub fn compute_geometry(sheet: &Sheet, dpi: f64) -> Result<Geometry, WeakSupError> {
    if !(dpi.is_finite() && dpi > 0.0) {
        return Err(WeakSupError::InvalidDpi(dpi));
    }
    sheet.check()?;
    let col_edges = edges(sheet.col_widths.iter().map(|&w| column_px(w, dpi)));
    let row_edges = edges(sheet.row_heights.iter().map(|&h| row_px(h, dpi)));
    let mut geo = Geometry {
        col_edges,
        row_edges,
        cells: BTreeMap::new(),
    };
    for cell in sheet.layout().cells {
        let b = geo.logical_box(&cell);
        geo.cells.insert(cell.anchor(), b);
    }
    Ok(geo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctree::CellRange;
    use crate::weaksup::sheet::MergeRange;

    #[test]
    fn default_sizes() {
        assert_eq!(column_px(8.43, 96.0), 64);
        assert_eq!(row_px(15.0, 96.0), 20);
        assert_eq!(row_px(15.0, 144.0), 30);
        assert_eq!(column_px(8.43, 192.0), 128);
    }

    #[test]
    fn single_cell() {
        let s = Sheet::new(1, 1);
        let g = compute_geometry(&s, 96.0).unwrap();
        assert_eq!(g.cells[&(0, 0)], BBox::new(0, 0, 64, 20).unwrap());
        assert_eq!((g.width(), g.height()), (64, 20));
    }

    #[test]
    fn merges_take_union_and_tiling_holds() {
        let mut s = Sheet::new(3, 3);
        s.col_widths = vec![3.0, 10.0, 5.5];
        s.row_heights = vec![12.0, 30.0, 15.0];
        s.merged_ranges
            .push(MergeRange::new(CellRange::new(0, 1), CellRange::new(1, 2)));
        let g = compute_geometry(&s, 96.0).unwrap();
        assert_eq!(g.cells.len(), 6);
        let m = g.cells[&(0, 1)];
        assert_eq!(m, g.block((0, 1), (1, 2)));
        let total: u64 = g.cells.values().map(|b| b.area()).sum();
        assert_eq!(total, g.width() as u64 * g.height() as u64);
        let boxes: Vec<_> = g.cells.values().collect();
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                assert_eq!(a.intersection_area(b), 0);
            }
        }
    }

    #[test]
    fn bad_dpi() {
        assert!(matches!(
            compute_geometry(&Sheet::new(1, 1), 0.0),
            Err(WeakSupError::InvalidDpi(_))
        ));
    }
}
