//! Synthetic worksheets for tests, demos and smoke runs.

use rand::Rng;

use crate::doctree::CellRange;

use super::sheet::{CellValue, MergeRange, Sheet};

/// Shape limits for [`random_sheet`].
#[derive(Debug, Clone, Copy)]
pub struct SynthParams {
    pub max_rows: u32,
    pub max_cols: u32,
    pub max_merges: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            max_rows: 20,
            max_cols: 10,
            max_merges: 3,
        }
    }
}

/// A random table-like sheet: optional caption rows, a numeric block with
/// a text row-header column and occasional gaps, optional footnote rows,
/// random sizes and up to `max_merges` disjoint merges.
pub fn random_sheet<R: Rng>(rng: &mut R, params: SynthParams) -> Sheet {
    let n_rows = rng.gen_range(1..=params.max_rows.max(1));
    let n_cols = rng.gen_range(1..=params.max_cols.max(1));
    let mut sheet = Sheet::new(n_rows, n_cols);
    for w in sheet.col_widths.iter_mut() {
        *w = rng.gen_range(1.0..30.0);
    }
    for h in sheet.row_heights.iter_mut() {
        *h = rng.gen_range(6.0..40.0);
    }

    let captions = if n_rows > 2 {
        rng.gen_range(0..=2.min(n_rows - 2))
    } else {
        0
    };
    let footnotes = if n_rows - captions > 2 {
        rng.gen_range(0..=1)
    } else {
        0
    };
    let body = captions..n_rows - footnotes;
    for r in 0..captions {
        sheet.set(r, 0, CellValue::Text(format!("Caption line {}", r + 1)));
    }
    for r in body.clone() {
        for c in 0..n_cols {
            if c == 0 && n_cols > 1 {
                sheet.set(r, c, CellValue::Text(format!("item {r}")));
            } else if rng.gen_bool(0.85) {
                sheet.set(r, c, CellValue::Number(rng.gen_range(0..10_000) as f64));
            }
        }
    }
    // Guarantee at least one number.
    let last_col = n_cols - 1;
    sheet.set(body.start, last_col, CellValue::Number(1.0));
    for r in body.end..n_rows {
        sheet.set(r, 0, CellValue::Text("Source: synthetic".into()));
    }

    let want = rng.gen_range(0..=params.max_merges);
    let mut attempts = 0;
    while sheet.merged_ranges.len() < want && attempts < 50 {
        attempts += 1;
        let r0 = rng.gen_range(0..n_rows);
        let c0 = rng.gen_range(0..n_cols);
        let r1 = (r0 + rng.gen_range(0..2)).min(n_rows - 1);
        let c1 = (c0 + rng.gen_range(0..3)).min(n_cols - 1);
        if (r0, c0) == (r1, c1) {
            continue;
        }
        let m = MergeRange::new(CellRange::new(r0, r1), CellRange::new(c0, c1));
        let clashes = sheet.merged_ranges.iter().any(|o| {
            o.rows.lo <= m.rows.hi
                && m.rows.lo <= o.rows.hi
                && o.cols.lo <= m.cols.hi
                && m.cols.lo <= o.cols.hi
        });
        if !clashes {
            sheet.merged_ranges.push(m);
        }
    }
    // Values under a merge other than at its anchor are dropped, as a
    // spreadsheet application would.
    let merges = sheet.merged_ranges.clone();
    sheet.cells.retain(|&(r, c), _| {
        merges
            .iter()
            .all(|m| !m.contains(r, c) || (m.rows.lo, m.cols.lo) == (r, c))
    });
    if !sheet.cells.values().any(CellValue::is_number) {
        // The guaranteed number sat under a merge: put one on an anchor.
        let layout = sheet.layout();
        let (r, c) = layout.cells[layout.owner(body.start, last_col)].anchor();
        sheet.set(r, c, CellValue::Number(1.0));
    }
    sheet
}

/// A `rows × cols` numeric block whose cells are `cell_px` pixels square at
/// 96 DPI.
pub fn uniform_sheet(rows: u32, cols: u32, cell_px: u32) -> Sheet {
    let mut sheet = Sheet::new(rows, cols);
    sheet.col_widths = vec![(cell_px as f64 - 5.0) / 7.0; cols as usize];
    sheet.row_heights = vec![cell_px as f64 * 0.75; rows as usize];
    for r in 0..rows {
        for c in 0..cols {
            sheet.set(r, c, CellValue::Number((r * cols + c + 1) as f64));
        }
    }
    sheet
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weaksup::geometry::compute_geometry;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn random_sheets_are_valid() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let s = random_sheet(&mut rng, SynthParams::default());
            s.check().unwrap();
            assert!(s.n_rows <= 20 && s.n_cols <= 10);
            assert!(s.merged_ranges.len() <= 3);
            assert!(s.cells.values().any(CellValue::is_number));
        }
    }

    #[test]
    fn uniform_cells_are_square() {
        let g = compute_geometry(&uniform_sheet(2, 3, 30), 96.0).unwrap();
        assert_eq!(g.col_edges, vec![0, 30, 60, 90]);
        assert_eq!(g.row_edges, vec![0, 30, 60]);
    }
}
