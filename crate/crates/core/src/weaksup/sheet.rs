use std::collections::BTreeMap;

use crate::doctree::CellRange;

use super::WeakSupError;

/// Default column width in character units.
pub const DEFAULT_COL_WIDTH: f64 = 8.43;
/// Default row height in points.
pub const DEFAULT_ROW_HEIGHT: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Text(String),
    Number(f64),
}

impl CellValue {
    pub fn is_number(&self) -> bool {
        matches!(self, CellValue::Number(_))
    }
}

/// Inclusive rectangular block of cells merged into one logical cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MergeRange {
    pub rows: CellRange,
    pub cols: CellRange,
}

impl MergeRange {
    pub fn new(rows: CellRange, cols: CellRange) -> Self {
        MergeRange { rows, cols }
    }

    pub fn contains(&self, row: u32, col: u32) -> bool {
        self.rows.contains(row) && self.cols.contains(col)
    }

    fn overlaps(&self, other: &MergeRange) -> bool {
        self.rows.lo <= other.rows.hi
            && other.rows.lo <= self.rows.hi
            && self.cols.lo <= other.cols.hi
            && other.cols.lo <= self.cols.hi
    }
}

/// A worksheet reduced to what annotation needs: values, sizes and merges.
///
/// Empty cells are simply absent from `cells`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sheet {
    pub cells: BTreeMap<(u32, u32), CellValue>,
    pub n_rows: u32,
    pub n_cols: u32,
    /// Character units.
    pub col_widths: Vec<f64>,
    /// Points.
    pub row_heights: Vec<f64>,
    pub merged_ranges: Vec<MergeRange>,
}

/// One cell after merges are collapsed, keyed by its top-left anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicalCell {
    pub rows: CellRange,
    pub cols: CellRange,
}

impl LogicalCell {
    pub fn anchor(&self) -> (u32, u32) {
        (self.rows.lo, self.cols.lo)
    }
}

/// Logical cells of a sheet plus the owner of every unit cell.
#[derive(Debug, Clone)]
pub struct CellLayout {
    n_cols: u32,
    /// Row-major by anchor.
    pub cells: Vec<LogicalCell>,
    owner: Vec<usize>,
}

impl CellLayout {
    /// Index into `cells` of the logical cell covering `(row, col)`.
    pub fn owner(&self, row: u32, col: u32) -> usize {
        self.owner[(row * self.n_cols + col) as usize]
    }
}

impl Sheet {
    /// Empty sheet with default sizes.
    pub fn new(n_rows: u32, n_cols: u32) -> Self {
        Sheet {
            cells: BTreeMap::new(),
            n_rows,
            n_cols,
            col_widths: vec![DEFAULT_COL_WIDTH; n_cols as usize],
            row_heights: vec![DEFAULT_ROW_HEIGHT; n_rows as usize],
            merged_ranges: Vec::new(),
        }
    }

    pub fn set(&mut self, row: u32, col: u32, value: CellValue) {
        self.cells.insert((row, col), value);
    }

    pub fn value(&self, row: u32, col: u32) -> Option<&CellValue> {
        self.cells.get(&(row, col))
    }

    /// Checks extents, sizes and merge disjointness.
    pub fn check(&self) -> Result<(), WeakSupError> {
        let invalid = |msg: String| Err(WeakSupError::InvalidSheet(msg));
        if self.col_widths.len() != self.n_cols as usize
            || self.row_heights.len() != self.n_rows as usize
        {
            return invalid("size vectors do not match extents".into());
        }
        if let Some(w) = self
            .col_widths
            .iter()
            .find(|w| !(w.is_finite() && **w > 0.0))
        {
            return invalid(format!("column width {w} is not positive"));
        }
        if let Some(h) = self
            .row_heights
            .iter()
            .find(|h| !(h.is_finite() && **h > 0.0))
        {
            return invalid(format!("row height {h} is not positive"));
        }
        if let Some((r, c)) = self
            .cells
            .keys()
            .find(|(r, c)| *r >= self.n_rows || *c >= self.n_cols)
        {
            return invalid(format!("cell ({r},{c}) outside extents"));
        }
        for (i, m) in self.merged_ranges.iter().enumerate() {
            if m.rows.lo > m.rows.hi || m.cols.lo > m.cols.hi {
                return invalid(format!("merge {m:?} is inverted"));
            }
            if m.rows.hi >= self.n_rows || m.cols.hi >= self.n_cols {
                return invalid(format!("merge {m:?} outside extents"));
            }
            if let Some(other) = self.merged_ranges[..i].iter().find(|o| o.overlaps(m)) {
                return invalid(format!("merges {other:?} and {m:?} overlap"));
            }
        }
        Ok(())
    }

    /// Collapses merges into logical cells.
    pub fn layout(&self) -> CellLayout {
        let n = (self.n_rows * self.n_cols) as usize;
        let mut owner = vec![usize::MAX; n];
        let mut cells = Vec::new();
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                let idx = (r * self.n_cols + c) as usize;
                if owner[idx] != usize::MAX {
                    continue;
                }
                let cell = match self.merged_ranges.iter().find(|m| m.contains(r, c)) {
                    Some(m) => LogicalCell {
                        rows: m.rows,
                        cols: m.cols,
                    },
                    None => LogicalCell {
                        rows: CellRange::single(r),
                        cols: CellRange::single(c),
                    },
                };
                for rr in cell.rows.lo..=cell.rows.hi {
                    for cc in cell.cols.lo..=cell.cols.hi {
                        owner[(rr * self.n_cols + cc) as usize] = cells.len();
                    }
                }
                cells.push(cell);
            }
        }
        CellLayout {
            n_cols: self.n_cols,
            cells,
            owner,
        }
    }

    /// Value of the logical cell covering `(row, col)`: merged cells take
    /// the value stored at their anchor.
    pub fn logical_value(&self, layout: &CellLayout, row: u32, col: u32) -> Option<&CellValue> {
        let (ar, ac) = layout.cells[layout.owner(row, col)].anchor();
        self.value(ar, ac)
    }
}
