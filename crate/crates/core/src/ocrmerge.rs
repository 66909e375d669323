//! Merging OCR text boxes into a cell grid and exporting CSV.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doctree::{DocTree, EntityCategory};
use crate::geom::BBox;
use crate::structure::{build_grid, CellGrid, GridCell, StructureError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextBox {
    pub text: String,
    pub bbox: BBox,
    #[serde(default)]
    pub page: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MergeError {
    #[error("malformed textbox file: {0}")]
    MalformedInput(String),
    #[error("textbox {index} has empty text")]
    EmptyText { index: usize },
    #[error("annotation has no tabular")]
    NoTabular,
    #[error("entity {0} has no box")]
    MissingGeometry(u64),
    #[error(transparent)]
    Grid(#[from] StructureError),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MergeReport {
    pub assigned: usize,
    pub unassigned: Vec<TextBox>,
    /// Tokens whose best overlap was shared by several cells.
    pub multi_candidate: usize,
    /// Anchor `(row, col)` of the receiving cell per input token.
    pub assignments: Vec<Option<(u32, u32)>>,
}

/// Parses a textbox file: a JSON array of `{text, bbox, page, score?}`.
pub fn load_textboxes(bytes: &[u8]) -> Result<Vec<TextBox>, MergeError> {
    let boxes: Vec<TextBox> =
        serde_json::from_slice(bytes).map_err(|e| MergeError::MalformedInput(e.to_string()))?;
    if let Some(index) = boxes.iter().position(|t| t.text.trim().is_empty()) {
        return Err(MergeError::EmptyText { index });
    }
    Ok(boxes)
}

/// Reconstructs the cell grid of the first tabular (lowest id) in `tree`.
///
/// Cells come from `table_cell` entities when present, otherwise from
/// intersecting the tabular's rows and columns.
pub fn grid_from_tree(tree: &DocTree) -> Result<CellGrid, MergeError> {
    let tabular = tree
        .of_category(EntityCategory::Tabular)
        .next()
        .ok_or(MergeError::NoTabular)?;
    let (page, tabular_bbox) = tree
        .boxes_of(tabular.id)
        .next()
        .ok_or(MergeError::MissingGeometry(tabular.id))?;
    let boxes_of = |category: EntityCategory| -> Result<Vec<BBox>, MergeError> {
        tree.children(tabular.id)
            .filter(|e| e.category == category)
            .map(|e| {
                tree.boxes_of(e.id)
                    .next()
                    .map(|(_, b)| b)
                    .ok_or(MergeError::MissingGeometry(e.id))
            })
            .collect()
    };
    let mut row_boxes = boxes_of(EntityCategory::TableRow)?;
    let mut col_boxes = boxes_of(EntityCategory::TableColumn)?;
    row_boxes.sort_by_key(|b| (b.y, b.x));
    col_boxes.sort_by_key(|b| (b.x, b.y));

    let mut cells = Vec::new();
    for e in tree
        .children(tabular.id)
        .filter(|e| e.category == EntityCategory::TableCell)
    {
        let (Some(row_range), Some(col_range)) = (e.row_range, e.col_range) else {
            continue;
        };
        let (_, bbox) = tree
            .boxes_of(e.id)
            .next()
            .ok_or(MergeError::MissingGeometry(e.id))?;
        cells.push(GridCell {
            bbox,
            row_range,
            col_range,
            content: None,
        });
    }
    if cells.is_empty() {
        let mut grid = build_grid(&row_boxes, &col_boxes, tabular_bbox)?;
        grid.page = page;
        return Ok(grid);
    }
    cells.sort_by_key(|c| (c.row_range.lo, c.col_range.lo));
    let n_rows = cells
        .iter()
        .map(|c| c.row_range.hi + 1)
        .max()
        .unwrap_or(0)
        .max(row_boxes.len() as u32);
    let n_cols = cells
        .iter()
        .map(|c| c.col_range.hi + 1)
        .max()
        .unwrap_or(0)
        .max(col_boxes.len() as u32);
    Ok(CellGrid {
        n_rows,
        n_cols,
        row_boxes,
        col_boxes,
        cells,
        tabular_bbox,
        page,
    })
}

/// Puts each token into the cell it overlaps most.
///
/// Ties go to the topmost, then leftmost cell. Tokens overlapping no cell,
/// or lying on another page, are reported as unassigned. Within a cell,
/// tokens are joined with single spaces in reading order (top, then left).
pub fn assign_text(grid: &CellGrid, tokens: &[TextBox]) -> (CellGrid, MergeReport) {
    let mut report = MergeReport {
        assignments: vec![None; tokens.len()],
        ..Default::default()
    };
    let mut per_cell: Vec<Vec<usize>> = vec![Vec::new(); grid.cells.len()];
    for (t, token) in tokens.iter().enumerate() {
        if token.page != grid.page {
            report.unassigned.push(token.clone());
            continue;
        }
        let mut best: Option<(u64, usize)> = None;
        let mut ties = 0;
        for (i, cell) in grid.cells.iter().enumerate() {
            let area = cell.bbox.intersection_area(&token.bbox);
            if area == 0 {
                continue;
            }
            match best {
                Some((a, _)) if area < a => {}
                Some((a, j)) if area == a => {
                    ties += 1;
                    let key = |c: &GridCell| (c.bbox.y, c.bbox.x, c.row_range.lo, c.col_range.lo);
                    if key(cell) < key(&grid.cells[j]) {
                        best = Some((a, i));
                    }
                }
                _ => {
                    ties = 0;
                    best = Some((area, i));
                }
            }
        }
        match best {
            Some((_, i)) => {
                if ties > 0 {
                    report.multi_candidate += 1;
                }
                report.assigned += 1;
                report.assignments[t] =
                    Some((grid.cells[i].row_range.lo, grid.cells[i].col_range.lo));
                per_cell[i].push(t);
            }
            None => report.unassigned.push(token.clone()),
        }
    }
    let mut out = grid.clone();
    for (cell, mut ids) in out.cells.iter_mut().zip(per_cell) {
        if ids.is_empty() {
            continue;
        }
        ids.sort_by_key(|&t| (tokens[t].bbox.y, tokens[t].bbox.x, t));
        let text: Vec<&str> = ids.iter().map(|&t| tokens[t].text.trim()).collect();
        cell.content = Some(text.join(" "));
    }
    (out, report)
}

/// A parsed number plus the count of digits after its decimal point.
fn parse_number(s: &str) -> Option<(f64, usize)> {
    let s = s.trim();
    let (sign, body) = match s.as_bytes().first()? {
        b'-' => ("-", &s[1..]),
        b'+' => ("", &s[1..]),
        _ => ("", s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let mut digits = String::from(sign);
    let mut prev_digit = false;
    let mut chars = int_part.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '0'..='9' => {
                digits.push(ch);
                prev_digit = true;
            }
            '\'' | ',' | '\u{2019}' => {
                // A separator sits between two digits.
                if !prev_digit || !chars.peek().is_some_and(|n| n.is_ascii_digit()) {
                    return None;
                }
                prev_digit = false;
            }
            _ => return None,
        }
    }
    let int_digits = digits.len() - sign.len();
    let decimals = match frac_part {
        Some(f) => {
            if !f.bytes().all(|b| b.is_ascii_digit()) || (f.is_empty() && int_digits == 0) {
                return None;
            }
            digits.push('.');
            digits.push_str(f);
            f.len()
        }
        None => 0,
    };
    if int_digits == 0 && decimals == 0 {
        return None;
    }
    digits.parse::<f64>().ok().map(|v| (v, decimals))
}

/// Parses a number with optional sign, thousands separators (`'`, `’` or
/// `,`) and decimal point, e.g. `"1'234.5"`.
pub fn numeric_parse(s: &str) -> Option<f64> {
    parse_number(s).map(|(v, _)| v)
}

fn format_sum(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // Avoid "-0" / "-0.00".
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvExport {
    pub bytes: Vec<u8>,
    /// Non-empty fields that did not parse as numbers (counted as 0 in sums).
    pub non_numeric: usize,
}

/// Exports the grid as RFC 4180 CSV with LF line endings.
///
/// Spanning cells write their content at the anchor and empty fields over
/// the rest of the span. With `with_sums`, a row-sum column and a
/// column-sum record are appended; the corner holds the grand total.
pub fn export_csv(grid: &CellGrid, with_sums: bool) -> CsvExport {
    let (rows, cols) = (grid.n_rows as usize, grid.n_cols as usize);
    let mut fields = vec![vec![String::new(); cols]; rows];
    for c in &grid.cells {
        let (r, k) = (c.row_range.lo as usize, c.col_range.lo as usize);
        if r < rows && k < cols {
            fields[r][k] = c.content.clone().unwrap_or_default();
        }
    }

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .flexible(false)
        .from_writer(Vec::new());
    let mut non_numeric = 0;
    if with_sums {
        let mut decimals = 0;
        let mut values = vec![vec![0.0; cols]; rows];
        for (r, row) in fields.iter().enumerate() {
            for (k, f) in row.iter().enumerate() {
                match parse_number(f) {
                    Some((v, d)) => {
                        values[r][k] = v;
                        decimals = decimals.max(d);
                    }
                    None if !f.trim().is_empty() => non_numeric += 1,
                    None => {}
                }
            }
        }
        let col_sums: Vec<f64> = (0..cols)
            .map(|k| values.iter().map(|row| row[k]).sum())
            .collect();
        let total: f64 = values.iter().flatten().sum();
        for (r, row) in fields.iter().enumerate() {
            let mut record = row.clone();
            record.push(format_sum(values[r].iter().sum(), decimals));
            writer.write_record(&record).expect("in-memory CSV");
        }
        let mut last: Vec<String> = col_sums.iter().map(|v| format_sum(*v, decimals)).collect();
        last.push(format_sum(total, decimals));
        writer.write_record(&last).expect("in-memory CSV");
    } else {
        for row in &fields {
            writer.write_record(row).expect("in-memory CSV");
        }
    }
    CsvExport {
        bytes: writer.into_inner().expect("in-memory CSV"),
        non_numeric,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctree::CellRange;
    use proptest::prelude::*;

    fn bb(x: u32, y: u32, w: u32, h: u32) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    fn tok(text: &str, b: BBox) -> TextBox {
        TextBox {
            text: text.into(),
            bbox: b,
            page: 0,
            score: None,
        }
    }

    fn grid(rows: u32, cols: u32) -> CellGrid {
        let r: Vec<_> = (0..rows).map(|i| bb(0, i * 10, cols * 10, 10)).collect();
        let c: Vec<_> = (0..cols).map(|j| bb(j * 10, 0, 10, rows * 10)).collect();
        build_grid(&r, &c, bb(0, 0, cols * 10, rows * 10)).unwrap()
    }

    fn with_content(mut g: CellGrid, content: &[&[&str]]) -> CellGrid {
        for c in g.cells.iter_mut() {
            c.content = Some(content[c.row_range.lo as usize][c.col_range.lo as usize].to_string());
        }
        g
    }

    #[test]
    fn load_cases() {
        let one = load_textboxes(br#"[{"text":"42","bbox":[1,1,5,5],"page":0}]"#).unwrap();
        assert_eq!(one, vec![tok("42", bb(1, 1, 5, 5))]);
        assert!(load_textboxes(b"[]").unwrap().is_empty());
        assert_eq!(
            load_textboxes(br#"[{"text":"","bbox":[1,1,5,5],"page":0}]"#),
            Err(MergeError::EmptyText { index: 0 })
        );
        assert!(matches!(
            load_textboxes(b"{"),
            Err(MergeError::MalformedInput(_))
        ));
    }

    #[test]
    fn containment_overlap_and_outside() {
        let g = grid(2, 2);
        let tokens = [
            tok("in", bb(12, 12, 4, 4)),
            // 6 columns in cell (0,0), 4 in cell (0,1): areas 60 vs 40.
            tok("lean", bb(4, 0, 10, 10)),
            tok("far", bb(100, 100, 3, 3)),
        ];
        assert_eq!(
            g.cell_at(0, 0)
                .unwrap()
                .bbox
                .intersection_area(&tokens[1].bbox),
            60
        );
        assert_eq!(
            g.cell_at(0, 1)
                .unwrap()
                .bbox
                .intersection_area(&tokens[1].bbox),
            40
        );
        let (out, report) = assign_text(&g, &tokens);
        assert_eq!(out.cell_at(1, 1).unwrap().content.as_deref(), Some("in"));
        assert_eq!(out.cell_at(0, 0).unwrap().content.as_deref(), Some("lean"));
        assert_eq!(report.unassigned, vec![tokens[2].clone()]);
        assert_eq!(report.assigned, 2);
        assert_eq!(report.assignments, vec![Some((1, 1)), Some((0, 0)), None]);
    }

    #[test]
    fn ties_go_top_left_and_reading_order() {
        let g = grid(2, 2);
        let (out, report) = assign_text(&g, &[tok("mid", bb(5, 5, 10, 10))]);
        assert_eq!(report.multi_candidate, 1);
        assert_eq!(out.cell_at(0, 0).unwrap().content.as_deref(), Some("mid"));

        let (out, _) = assign_text(
            &g,
            &[
                tok("b", bb(6, 1, 2, 2)),
                tok("c", bb(1, 6, 2, 2)),
                tok("a", bb(1, 1, 2, 2)),
            ],
        );
        assert_eq!(out.cell_at(0, 0).unwrap().content.as_deref(), Some("a b c"));
    }

    #[test]
    fn sums_two_by_two() {
        let g = with_content(grid(2, 2), &[&["1", "2"], &["3", "4"]]);
        let out = export_csv(&g, true);
        assert_eq!(
            String::from_utf8(out.bytes).unwrap(),
            "1,2,3\n3,4,7\n4,6,10\n"
        );
        assert_eq!(out.non_numeric, 0);
    }

    #[test]
    fn single_cell_and_quoting() {
        let g = with_content(grid(1, 1), &[&["x"]]);
        assert_eq!(export_csv(&g, false).bytes, b"x\n");
        let g = with_content(grid(1, 2), &[&["a,b", "say \"hi\""]]);
        assert_eq!(export_csv(&g, false).bytes, b"\"a,b\",\"say \"\"hi\"\"\"\n");
    }

    #[test]
    fn span_writes_anchor_only() {
        let mut g = grid(1, 3);
        g.cells = vec![
            GridCell {
                bbox: bb(0, 0, 20, 10),
                row_range: CellRange::single(0),
                col_range: CellRange::new(0, 1),
                content: Some("total".into()),
            },
            GridCell {
                bbox: bb(20, 0, 10, 10),
                row_range: CellRange::single(0),
                col_range: CellRange::single(2),
                content: None,
            },
        ];
        assert_eq!(export_csv(&g, false).bytes, b"total,,\n");
    }

    #[test]
    fn non_numeric_counted_and_decimals_kept() {
        let g = with_content(grid(2, 2), &[&["n/a", "0.1"], &["1'000", "0.2"]]);
        let out = export_csv(&g, true);
        assert_eq!(out.non_numeric, 1);
        assert_eq!(
            String::from_utf8(out.bytes).unwrap(),
            "n/a,0.1,0.1\n1'000,0.2,1000.2\n1000.0,0.3,1000.3\n"
        );
    }

    #[test]
    fn numeric_parse_cases() {
        assert_eq!(numeric_parse("1'234.5"), Some(1234.5));
        assert_eq!(numeric_parse("abc"), None);
        assert_eq!(numeric_parse("-7"), Some(-7.0));
        assert_eq!(numeric_parse("1,234,567"), Some(1234567.0));
        assert_eq!(numeric_parse(" +3.25 "), Some(3.25));
        assert_eq!(numeric_parse(".5"), Some(0.5));
        for bad in ["", "-", ".", "1..2", ",1", "1,", "1''2", "1e5", "12a"] {
            assert_eq!(numeric_parse(bad), None, "{bad:?}");
        }
    }

    proptest! {
        #[test]
        fn separators_match_strip_oracle(int in 0u64..10_000_000_000, frac in prop::option::of(0u32..1000), sep in prop::sample::select(vec!['\'', ','])) {
            // Group the integer part in threes.
            let plain = int.to_string();
            let mut grouped = String::new();
            for (i, ch) in plain.chars().enumerate() {
                if i > 0 && (plain.len() - i) % 3 == 0 {
                    grouped.push(sep);
                }
                grouped.push(ch);
            }
            let (text, oracle_src) = match frac {
                Some(f) => (format!("{grouped}.{f}"), format!("{plain}.{f}")),
                None => (grouped.clone(), plain.clone()),
            };
            let stripped: String = text.chars().filter(|c| *c != sep).collect();
            prop_assert_eq!(&stripped, &oracle_src);
            prop_assert_eq!(numeric_parse(&text), Some(oracle_src.parse::<f64>().unwrap()));
        }

        #[test]
        fn assignment_is_translation_equivariant(
            toks in prop::collection::vec((0u32..40, 0u32..40, 1u32..15, 1u32..15), 0..12),
            dx in 0u32..500, dy in 0u32..500,
        ) {
            let g = grid(3, 3);
            let tokens: Vec<_> = toks.iter().enumerate().map(|(i, (x, y, w, h))| tok(&format!("t{i}"), bb(*x, *y, *w, *h))).collect();
            let (_, a) = assign_text(&g, &tokens);
            let mut moved = g.clone();
            for c in moved.cells.iter_mut() {
                c.bbox = c.bbox.translate(dx, dy);
            }
            let shifted: Vec<_> = tokens.iter().map(|t| TextBox { bbox: t.bbox.translate(dx, dy), ..t.clone() }).collect();
            let (_, b) = assign_text(&moved, &shifted);
            prop_assert_eq!(a.assignments, b.assignments);
        }
    }
}
