use super::sheet::{CellLayout, Sheet};
use super::WeakSupError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    Empty,
    Content,
    Meta,
}

/// Per-unit-cell classes plus the located content block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellClasses {
    pub n_rows: u32,
    pub n_cols: u32,
    classes: Vec<CellClass>,
    /// First and last rows holding a number (inclusive).
    pub content_rows: (u32, u32),
}

impl CellClasses {
    pub fn get(&self, row: u32, col: u32) -> CellClass {
        self.classes[(row * self.n_cols + col) as usize]
    }

    /// Column span of the Content cells inside the content rows.
    pub fn content_cols(&self) -> (u32, u32) {
        let (r0, r1) = self.content_rows;
        let cols = (r0..=r1)
            .flat_map(|r| (0..self.n_cols).filter(move |&c| self.get(r, c) == CellClass::Content));
        let (lo, hi) = cols.fold((u32::MAX, 0), |(lo, hi), c| (lo.min(c), hi.max(c)));
        (lo, hi)
    }

    /// Maximal runs of rows above (`leading = true`) or below the content
    /// rows that contain at least one Meta cell.
    pub fn meta_blocks(&self, leading: bool) -> Vec<(u32, u32)> {
        let (r0, r1) = self.content_rows;
        let rows: Vec<u32> = if leading {
            (0..r0).collect()
        } else {
            (r1 + 1..self.n_rows).collect()
        };
        let mut blocks: Vec<(u32, u32)> = Vec::new();
        for r in rows {
            if (0..self.n_cols).any(|c| self.get(r, c) == CellClass::Meta) {
                match blocks.last_mut() {
                    Some(b) if b.1 + 1 == r => b.1 = r,
                    _ => blocks.push((r, r)),
                }
            }
        }
        blocks
    }
}

/// Labels cells as caption/footnote text (Meta), tabular values (Content)
/// or Empty.
///
/// The content rows run from the first to the last row holding a number.
/// Valued cells above or below them are Meta. Merged cells take the class
/// of their anchor value, decided by the anchor's row.
pub fn classify_cells(sheet: &Sheet) -> Result<CellClasses, WeakSupError> {
    let layout = sheet.layout();
    classify_with_layout(sheet, &layout)
}

pub(crate) fn classify_with_layout(
    sheet: &Sheet,
    layout: &CellLayout,
) -> Result<CellClasses, WeakSupError> {
    // Values hidden under a merge (not at its anchor) are ignored.
    let numeric_rows = sheet
        .cells
        .iter()
        .filter(|((r, c), v)| {
            v.is_number()
                && *r < sheet.n_rows
                && *c < sheet.n_cols
                && layout.cells[layout.owner(*r, *c)].anchor() == (*r, *c)
        })
        .map(|((r, _), _)| *r);
    let (first, last) = numeric_rows
        .fold(None, |acc: Option<(u32, u32)>, r| {
            Some(acc.map_or((r, r), |(lo, hi)| (lo.min(r), hi.max(r))))
        })
        .ok_or(WeakSupError::NoContent)?;

    let mut classes = Vec::with_capacity((sheet.n_rows * sheet.n_cols) as usize);
    for r in 0..sheet.n_rows {
        for c in 0..sheet.n_cols {
            let anchor_row = layout.cells[layout.owner(r, c)].rows.lo;
            let class = match sheet.logical_value(layout, r, c) {
                None => CellClass::Empty,
                Some(_) if (first..=last).contains(&anchor_row) => CellClass::Content,
                Some(_) => CellClass::Meta,
            };
            classes.push(class);
        }
    }
    Ok(CellClasses {
        n_rows: sheet.n_rows,
        n_cols: sheet.n_cols,
        classes,
        content_rows: (first, last),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weaksup::sheet::CellValue;

    fn text(s: &str) -> CellValue {
        CellValue::Text(s.into())
    }

    #[test]
    fn caption_content_footnote_rows() {
        let mut s = Sheet::new(5, 2);
        s.set(0, 0, text("Population by canton"));
        for r in 1..4 {
            s.set(r, 0, text("canton"));
            s.set(r, 1, CellValue::Number(r as f64));
        }
        s.set(4, 0, text("Source: yearbook"));
        let cls = classify_cells(&s).unwrap();
        let row_class = |r| cls.get(r, 0);
        assert_eq!(
            (0..5).map(row_class).collect::<Vec<_>>(),
            vec![
                CellClass::Meta,
                CellClass::Content,
                CellClass::Content,
                CellClass::Content,
                CellClass::Meta
            ]
        );
        assert_eq!(cls.get(0, 1), CellClass::Empty);
        assert_eq!(cls.meta_blocks(true), vec![(0, 0)]);
        assert_eq!(cls.meta_blocks(false), vec![(4, 4)]);
        assert_eq!(cls.content_cols(), (0, 1));
    }

    #[test]
    fn all_empty_is_no_content() {
        assert_eq!(
            classify_cells(&Sheet::new(3, 3)),
            Err(WeakSupError::NoContent)
        );
        let mut s = Sheet::new(1, 1);
        s.set(0, 0, text("only text"));
        assert_eq!(classify_cells(&s), Err(WeakSupError::NoContent));
    }

    #[test]
    fn interior_empty_cell_matches_scan_oracle() {
        let mut s = Sheet::new(3, 3);
        for r in 0..3 {
            for c in 0..3 {
                if (r, c) != (1, 1) {
                    s.set(r, c, CellValue::Number(1.0));
                }
            }
        }
        let cls = classify_cells(&s).unwrap();
        // Scan oracle: no merges, so the class is a direct function of the value.
        for r in 0..3 {
            for c in 0..3 {
                let expected = if s.value(r, c).is_some() {
                    CellClass::Content
                } else {
                    CellClass::Empty
                };
                assert_eq!(cls.get(r, c), expected, "({r},{c})");
            }
        }
        assert_eq!(cls.content_rows, (0, 2));
    }
}
