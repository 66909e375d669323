//! Assembling detector output into a table structure.
//!
//! Detections arrive through a detection file (any detector can produce
//! one), are screened by confidence and count, deduplicated into ordered
//! rows and columns, intersected into a cell grid and emitted as a
//! [`DocTree`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doctree::{CellRange, DocTree, Entity, EntityCategory};
use crate::eval::iou;
use crate::geom::BBox;

/// Overlap above which two row (or column) detections are duplicates.
pub const DUPLICATE_IOU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub category: EntityCategory,
    pub bbox: BBox,
    pub score: f64,
    #[serde(default)]
    pub page: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("malformed detection file: {0}")]
    MalformedInput(String),
    #[error("detections mix categories {0} and {1}")]
    MixedCategories(EntityCategory, EntityCategory),
    #[error("detections span pages {0} and {1}")]
    MixedPages(u32, u32),
    #[error("no table rows")]
    NoRows,
    #[error("no table columns")]
    NoCols,
    #[error("row {row} and column {col} do not intersect inside the tabular")]
    EmptyIntersection { row: usize, col: usize },
    #[error("no tabular detection")]
    MissingTabular,
}

/// Parses a detection file: a JSON array of `{category, bbox, score, page}`.
pub fn parse_detections(bytes: &[u8]) -> Result<Vec<Detection>, StructureError> {
    let dets: Vec<Detection> =
        serde_json::from_slice(bytes).map_err(|e| StructureError::MalformedInput(e.to_string()))?;
    for (i, d) in dets.iter().enumerate() {
        if d.category == EntityCategory::Box {
            return Err(StructureError::MalformedInput(format!(
                "detection {i} has category box"
            )));
        }
        if !(0.0..=1.0).contains(&d.score) {
            return Err(StructureError::MalformedInput(format!(
                "detection {i} score {} outside [0,1]",
                d.score
            )));
        }
    }
    Ok(dets)
}

pub fn serialize_detections(dets: &[Detection]) -> Vec<u8> {
    serde_json::to_vec(dets).expect("detections serialize")
}

/// Drops detections scoring below `threshold`, then keeps at most `cap`
/// per page (highest scores, ties by input order). Output keeps input
/// order.
pub fn filter_detections(dets: &[Detection], threshold: f64, cap: usize) -> Vec<Detection> {
    let passing: Vec<usize> = (0..dets.len())
        .filter(|&i| dets[i].score >= threshold)
        .collect();
    let mut keep = vec![false; dets.len()];
    let mut pages: Vec<u32> = passing.iter().map(|&i| dets[i].page).collect();
    pages.sort_unstable();
    pages.dedup();
    for page in pages {
        let mut on_page: Vec<usize> = passing
            .iter()
            .copied()
            .filter(|&i| dets[i].page == page)
            .collect();
        on_page.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
        for &i in on_page.iter().take(cap) {
            keep[i] = true;
        }
    }
    (0..dets.len())
        .filter(|&i| keep[i])
        .map(|i| dets[i].clone())
        .collect()
}

/// Deduplicates and orders row (by y) or column (by x) detections.
///
/// Boxes are visited by descending score; a box overlapping an already kept
/// one with IoU above [`DUPLICATE_IOU`] is dropped.
pub fn order_lines(
    dets: &[Detection],
    category: EntityCategory,
) -> Result<Vec<BBox>, StructureError> {
    if let Some(d) = dets.iter().find(|d| d.category != category) {
        return Err(StructureError::MixedCategories(category, d.category));
    }
    if let Some(first) = dets.first() {
        if let Some(d) = dets.iter().find(|d| d.page != first.page) {
            return Err(StructureError::MixedPages(first.page, d.page));
        }
    }
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    let mut kept: Vec<BBox> = Vec::new();
    for i in order {
        let b = dets[i].bbox;
        if kept.iter().all(|k| iou(k, &b) <= DUPLICATE_IOU) {
            kept.push(b);
        }
    }
    if category == EntityCategory::TableColumn {
        kept.sort_by_key(|b| (b.x, b.y, b.w, b.h));
    } else {
        kept.sort_by_key(|b| (b.y, b.x, b.h, b.w));
    }
    Ok(kept)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub bbox: BBox,
    pub row_range: CellRange,
    pub col_range: CellRange,
    pub content: Option<String>,
}

/// Cells of one tabular. Cells are stored row-major by anchor; spanning
/// cells cover several grid positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    pub n_rows: u32,
    pub n_cols: u32,
    pub row_boxes: Vec<BBox>,
    pub col_boxes: Vec<BBox>,
    pub cells: Vec<GridCell>,
    pub tabular_bbox: BBox,
    pub page: u32,
}

impl CellGrid {
    /// The cell covering `(row, col)`.
    pub fn cell_at(&self, row: u32, col: u32) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.row_range.contains(row) && c.col_range.contains(col))
    }

    /// The cell anchored exactly at `(row, col)`.
    pub fn anchored_at(&self, row: u32, col: u32) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.row_range.lo == row && c.col_range.lo == col)
    }
}

/// Intersects every row with every column inside `tabular`.
pub fn build_grid(rows: &[BBox], cols: &[BBox], tabular: BBox) -> Result<CellGrid, StructureError> {
    if rows.is_empty() {
        return Err(StructureError::NoRows);
    }
    if cols.is_empty() {
        return Err(StructureError::NoCols);
    }
    let mut cells = Vec::with_capacity(rows.len() * cols.len());
    for (i, r) in rows.iter().enumerate() {
        for (j, c) in cols.iter().enumerate() {
            let bbox = r
                .intersection(c)
                .and_then(|b| b.intersection(&tabular))
                .ok_or(StructureError::EmptyIntersection { row: i, col: j })?;
            cells.push(GridCell {
                bbox,
                row_range: CellRange::single(i as u32),
                col_range: CellRange::single(j as u32),
                content: None,
            });
        }
    }
    Ok(CellGrid {
        n_rows: rows.len() as u32,
        n_cols: cols.len() as u32,
        row_boxes: rows.to_vec(),
        col_boxes: cols.to_vec(),
        cells,
        tabular_bbox: tabular,
        page: 0,
    })
}

fn best(dets: &[Detection], category: EntityCategory, page: Option<u32>) -> Option<&Detection> {
    dets.iter()
        .filter(|d| d.category == category && page.is_none_or(|p| d.page == p))
        .fold(None, |acc: Option<&Detection>, d| match acc {
            Some(a) if a.score >= d.score => Some(a),
            _ => Some(d),
        })
}

/// Assembles filtered detections into a table tree.
///
/// Uses the best-scoring tabular (clipped to the best-scoring table on the
/// same page, when there is one), the best caption and footnote, and all
/// rows and columns on that page that overlap the tabular.
pub fn infer_structure(dets: &[Detection]) -> Result<DocTree, StructureError> {
    let tabular_det =
        best(dets, EntityCategory::Tabular, None).ok_or(StructureError::MissingTabular)?;
    let page = tabular_det.page;
    let table_det = best(dets, EntityCategory::Table, Some(page));
    let tabular = match table_det {
        Some(t) => t
            .bbox
            .intersection(&tabular_det.bbox)
            .unwrap_or(tabular_det.bbox),
        None => tabular_det.bbox,
    };
    let caption = best(dets, EntityCategory::TableCaption, Some(page)).map(|d| d.bbox);
    let footnote = best(dets, EntityCategory::TableFootnote, Some(page)).map(|d| d.bbox);

    let lines = |category| -> Result<Vec<BBox>, StructureError> {
        let of: Vec<Detection> = dets
            .iter()
            .filter(|d| {
                d.category == category && d.page == page && d.bbox.intersection(&tabular).is_some()
            })
            .cloned()
            .collect();
        Ok(order_lines(&of, category)?
            .into_iter()
            .map(|b| b.intersection(&tabular).expect("overlap checked"))
            .collect())
    };
    let rows = lines(EntityCategory::TableRow)?;
    let cols = lines(EntityCategory::TableColumn)?;
    let mut grid = build_grid(&rows, &cols, tabular)?;
    grid.page = page;

    let table_box = [caption, footnote].into_iter().flatten().fold(
        table_det.map_or(tabular, |t| t.bbox.hull(&tabular)),
        |acc, b| acc.hull(&b),
    );

    Ok(grid_tree(&grid, table_box, caption, footnote))
}

/// Emits table → {caption?, tabular, footnote?} → {rows, columns, cells}.
pub fn grid_tree(
    grid: &CellGrid,
    table: BBox,
    caption: Option<BBox>,
    footnote: Option<BBox>,
) -> DocTree {
    let page = grid.page;
    let mut tree = DocTree::new();
    let table_id = tree.push_with_box(
        Entity::semantic(0, EntityCategory::Table, None),
        page,
        table,
    );
    if let Some(b) = caption {
        tree.push_with_box(
            Entity::semantic(0, EntityCategory::TableCaption, Some(table_id)),
            page,
            b,
        );
    }
    let tabular_id = tree.push_with_box(
        Entity::semantic(0, EntityCategory::Tabular, Some(table_id)),
        page,
        grid.tabular_bbox,
    );
    if let Some(b) = footnote {
        tree.push_with_box(
            Entity::semantic(0, EntityCategory::TableFootnote, Some(table_id)),
            page,
            b,
        );
    }
    for b in &grid.row_boxes {
        tree.push_with_box(
            Entity::semantic(0, EntityCategory::TableRow, Some(tabular_id)),
            page,
            *b,
        );
    }
    for b in &grid.col_boxes {
        tree.push_with_box(
            Entity::semantic(0, EntityCategory::TableColumn, Some(tabular_id)),
            page,
            *b,
        );
    }
    for c in &grid.cells {
        tree.push_with_box(
            Entity::cell(0, c.row_range, c.col_range, Some(tabular_id)),
            page,
            c.bbox,
        );
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctree::validate;
    use proptest::prelude::*;

    fn bb(x: u32, y: u32, w: u32, h: u32) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    fn det(category: EntityCategory, b: BBox, score: f64) -> Detection {
        Detection {
            category,
            bbox: b,
            score,
            page: 0,
        }
    }

    #[test]
    fn threshold_is_inclusive() {
        let dets = [
            det(EntityCategory::TableRow, bb(0, 0, 5, 5), 0.49),
            det(EntityCategory::TableRow, bb(0, 5, 5, 5), 0.50),
        ];
        let out = filter_detections(&dets, 0.5, 100);
        assert_eq!(out, vec![dets[1].clone()]);
        assert!(filter_detections(&[], 0.5, 100).is_empty());
    }

    #[test]
    fn cap_keeps_first_by_input_order_on_ties() {
        let dets: Vec<_> = (0..150)
            .map(|i| det(EntityCategory::TableRow, bb(0, i, 5, 1), 0.9))
            .collect();
        let out = filter_detections(&dets, 0.5, 100);
        assert_eq!(out, dets[..100].to_vec());
    }

    #[test]
    fn cap_is_per_page() {
        let mut dets: Vec<_> = (0..3)
            .map(|i| det(EntityCategory::TableRow, bb(0, i, 5, 1), 0.9))
            .collect();
        dets.push(Detection {
            page: 1,
            ..dets[0].clone()
        });
        assert_eq!(filter_detections(&dets, 0.5, 2).len(), 3);
    }

    #[test]
    fn order_and_dedup() {
        let rows = [
            det(EntityCategory::TableRow, bb(0, 10, 20, 10), 0.9),
            det(EntityCategory::TableRow, bb(0, 0, 20, 10), 0.9),
        ];
        assert_eq!(
            order_lines(&rows, EntityCategory::TableRow).unwrap(),
            vec![bb(0, 0, 20, 10), bb(0, 10, 20, 10)]
        );

        let a = bb(0, 0, 100, 10);
        let b = bb(0, 1, 100, 10);
        assert!(iou(&a, &b) > 0.8);
        let dup = [
            det(EntityCategory::TableRow, b, 0.6),
            det(EntityCategory::TableRow, a, 0.8),
        ];
        assert_eq!(
            order_lines(&dup, EntityCategory::TableRow).unwrap(),
            vec![a]
        );

        let one = [det(EntityCategory::TableColumn, a, 0.7)];
        assert_eq!(
            order_lines(&one, EntityCategory::TableColumn).unwrap(),
            vec![a]
        );

        assert!(matches!(
            order_lines(
                &[det(EntityCategory::TableColumn, a, 0.7)],
                EntityCategory::TableRow
            ),
            Err(StructureError::MixedCategories(..))
        ));
        let mut other_page = det(EntityCategory::TableRow, a, 0.7);
        other_page.page = 3;
        assert!(matches!(
            order_lines(
                &[det(EntityCategory::TableRow, a, 0.7), other_page],
                EntityCategory::TableRow
            ),
            Err(StructureError::MixedPages(0, 3))
        ));
    }

    #[test]
    fn grid_two_by_two() {
        let g = build_grid(
            &[bb(0, 0, 20, 10), bb(0, 10, 20, 10)],
            &[bb(0, 0, 8, 20), bb(8, 0, 12, 20)],
            bb(0, 0, 20, 20),
        )
        .unwrap();
        assert_eq!(g.cells.len(), 4);
        assert_eq!(g.cell_at(0, 0).unwrap().bbox, bb(0, 0, 8, 10));
        assert_eq!(g.cell_at(1, 1).unwrap().bbox, bb(8, 10, 12, 10));
    }

    #[test]
    fn grid_errors() {
        let tab = bb(10, 0, 20, 20);
        assert_eq!(
            build_grid(&[bb(0, 0, 40, 10)], &[bb(0, 0, 5, 20)], tab),
            Err(StructureError::EmptyIntersection { row: 0, col: 0 })
        );
        assert_eq!(build_grid(&[], &[tab], tab), Err(StructureError::NoRows));
        assert_eq!(build_grid(&[tab], &[], tab), Err(StructureError::NoCols));
    }

    fn two_by_two_dets() -> Vec<Detection> {
        use EntityCategory::*;
        vec![
            det(Table, bb(0, 0, 100, 60), 0.95),
            det(Tabular, bb(0, 20, 100, 40), 0.9),
            det(TableRow, bb(0, 20, 100, 20), 0.8),
            det(TableRow, bb(0, 40, 100, 20), 0.8),
            det(TableColumn, bb(0, 20, 50, 40), 0.8),
            det(TableColumn, bb(50, 20, 50, 40), 0.8),
        ]
    }

    #[test]
    fn infer_two_by_two() {
        let tree = infer_structure(&two_by_two_dets()).unwrap();
        assert!(validate(&tree).is_empty());
        let n = |c| tree.of_category(c).count();
        assert_eq!(n(EntityCategory::TableCell), 4);
        assert_eq!(n(EntityCategory::TableRow), 2);
        assert_eq!(n(EntityCategory::TableColumn), 2);
        assert_eq!(n(EntityCategory::Tabular), 1);
        assert_eq!(n(EntityCategory::Table), 1);
        let cell = tree.query_cell(1, 1).unwrap().unwrap();
        assert_eq!(tree.boxes_of(cell.id).next().unwrap().1, bb(50, 40, 50, 20));
    }

    #[test]
    fn infer_with_caption_and_missing_tabular() {
        let mut dets = two_by_two_dets();
        dets.push(det(EntityCategory::TableCaption, bb(0, 0, 100, 18), 0.7));
        let tree = infer_structure(&dets).unwrap();
        let cap = tree
            .of_category(EntityCategory::TableCaption)
            .next()
            .unwrap();
        assert_eq!(tree.boxes_of(cap.id).next().unwrap().1, bb(0, 0, 100, 18));
        assert!(validate(&tree).is_empty());

        let no_tab: Vec<_> = dets
            .into_iter()
            .filter(|d| d.category != EntityCategory::Tabular)
            .collect();
        assert_eq!(
            infer_structure(&no_tab),
            Err(StructureError::MissingTabular)
        );
    }

    #[test]
    fn detection_file_roundtrip_and_errors() {
        let dets = two_by_two_dets();
        assert_eq!(
            parse_detections(&serialize_detections(&dets)).unwrap(),
            dets
        );
        assert!(
            parse_detections(br#"[{"category":"box","bbox":[0,0,1,1],"score":0.5,"page":0}]"#)
                .is_err()
        );
        assert!(parse_detections(
            br#"[{"category":"table","bbox":[0,0,1,1],"score":1.5,"page":0}]"#
        )
        .is_err());
        assert!(parse_detections(
            br#"[{"category":"chart","bbox":[0,0,1,1],"score":0.5,"page":0}]"#
        )
        .is_err());
    }

    fn arb_dets() -> impl Strategy<Value = Vec<Detection>> {
        prop::collection::vec(
            (0u32..3, 0u32..200, 1u32..50, 0u32..=100).prop_map(|(page, y, h, s)| Detection {
                category: EntityCategory::TableRow,
                bbox: bb(0, y, 100, h),
                score: s as f64 / 100.0,
                page,
            }),
            0..40,
        )
    }

    proptest! {
        #[test]
        fn filter_idempotent(dets in arb_dets(), cap in 1usize..20) {
            let once = filter_detections(&dets, 0.5, cap);
            prop_assert_eq!(filter_detections(&once, 0.5, cap), once);
        }

        #[test]
        fn filter_ignores_subthreshold_detections(dets in arb_dets(), cap in 1usize..20) {
            let above: Vec<_> = dets.iter().filter(|d| d.score >= 0.5).cloned().collect();
            prop_assert_eq!(filter_detections(&dets, 0.5, cap), filter_detections(&above, 0.5, cap));
        }
    }
}
