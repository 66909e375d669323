use crate::doctree::{CellRange, DocTree, Entity, EntityCategory};
use crate::geom::{hull_all, BBox};

use super::classify::{CellClass, CellClasses};
use super::geometry::Geometry;
use super::sheet::Sheet;
use super::WeakSupError;

/// Builds the annotation tree for one sheet on page 0.
///
/// Node order (and therefore ids) is fixed: table, captions, tabular,
/// footnotes, rows, columns, cells, each semantic node followed by its box.
/// Cell ranges are relative to the tabular's top-left. Logical cells
/// straddling the tabular edge are clipped to it.
pub fn emit_annotations(
    sheet: &Sheet,
    geometry: &Geometry,
    classes: &CellClasses,
) -> Result<DocTree, WeakSupError> {
    let (r0, r1) = classes.content_rows;
    let (c0, c1) = classes.content_cols();
    if c0 > c1 {
        return Err(WeakSupError::NoContent);
    }
    let layout = sheet.layout();

    let meta_box = |(b0, b1): (u32, u32)| -> BBox {
        let boxes: Vec<BBox> = (b0..=b1)
            .flat_map(|r| (0..sheet.n_cols).map(move |c| (r, c)))
            .filter(|&(r, c)| classes.get(r, c) == CellClass::Meta)
            .map(|(r, c)| geometry.logical_box(&layout.cells[layout.owner(r, c)]))
            .collect();
        hull_all(&boxes).expect("meta block has a meta cell")
    };
    let captions: Vec<BBox> = classes
        .meta_blocks(true)
        .into_iter()
        .map(meta_box)
        .collect();
    let footnotes: Vec<BBox> = classes
        .meta_blocks(false)
        .into_iter()
        .map(meta_box)
        .collect();
    let tabular = geometry.block((r0, r1), (c0, c1));
    let table =
        hull_all(captions.iter().chain(footnotes.iter()).chain([&tabular])).expect("tabular");

    let mut tree = DocTree::new();
    let table_id = tree.push_with_box(Entity::semantic(0, EntityCategory::Table, None), 0, table);
    for b in &captions {
        tree.push_with_box(
            Entity::semantic(0, EntityCategory::TableCaption, Some(table_id)),
            0,
            *b,
        );
    }
    let tabular_id = tree.push_with_box(
        Entity::semantic(0, EntityCategory::Tabular, Some(table_id)),
        0,
        tabular,
    );
    for b in &footnotes {
        tree.push_with_box(
            Entity::semantic(0, EntityCategory::TableFootnote, Some(table_id)),
            0,
            *b,
        );
    }
    for r in r0..=r1 {
        let b = geometry.block((r, r), (c0, c1));
        tree.push_with_box(
            Entity::semantic(0, EntityCategory::TableRow, Some(tabular_id)),
            0,
            b,
        );
    }
    for c in c0..=c1 {
        let b = geometry.block((r0, r1), (c, c));
        tree.push_with_box(
            Entity::semantic(0, EntityCategory::TableColumn, Some(tabular_id)),
            0,
            b,
        );
    }
    for cell in &layout.cells {
        let rows = (cell.rows.lo.max(r0), cell.rows.hi.min(r1));
        let cols = (cell.cols.lo.max(c0), cell.cols.hi.min(c1));
        if rows.0 > rows.1 || cols.0 > cols.1 {
            continue;
        }
        let b = geometry.block(rows, cols);
        let entity = Entity::cell(
            0,
            CellRange::new(rows.0 - r0, rows.1 - r0),
            CellRange::new(cols.0 - c0, cols.1 - c0),
            Some(tabular_id),
        );
        tree.push_with_box(entity, 0, b);
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctree::validate;
    use crate::weaksup::classify::classify_cells;
    use crate::weaksup::geometry::compute_geometry;
    use crate::weaksup::sheet::{CellValue, MergeRange};

    fn count(tree: &DocTree, cat: EntityCategory) -> usize {
        tree.of_category(cat).count()
    }

    fn emit(s: &Sheet) -> DocTree {
        let g = compute_geometry(s, 96.0).unwrap();
        let tree = emit_annotations(s, &g, &classify_cells(s).unwrap()).unwrap();
        assert_eq!(validate(&tree), vec![]);
        tree
    }

    #[test]
    fn caption_plus_three_by_two() {
        let mut s = Sheet::new(4, 2);
        s.set(0, 0, CellValue::Text("Table 1".into()));
        for r in 1..4 {
            s.set(r, 0, CellValue::Text(format!("row {r}")));
            s.set(r, 1, CellValue::Number(r as f64));
        }
        let tree = emit(&s);
        assert_eq!(count(&tree, EntityCategory::Table), 1);
        assert_eq!(count(&tree, EntityCategory::Tabular), 1);
        assert_eq!(count(&tree, EntityCategory::TableCaption), 1);
        assert_eq!(count(&tree, EntityCategory::TableFootnote), 0);
        assert_eq!(count(&tree, EntityCategory::TableRow), 3);
        assert_eq!(count(&tree, EntityCategory::TableColumn), 2);
        assert_eq!(count(&tree, EntityCategory::TableCell), 6);
        let tabular = tree.of_category(EntityCategory::Tabular).next().unwrap();
        let (_, tb) = tree.boxes_of(tabular.id).next().unwrap();
        assert_eq!(tb, BBox::new(0, 20, 128, 60).unwrap());
        let caption = tree
            .of_category(EntityCategory::TableCaption)
            .next()
            .unwrap();
        assert_eq!(
            tree.boxes_of(caption.id).next().unwrap().1,
            BBox::new(0, 0, 64, 20).unwrap()
        );
        let table = tree.of_category(EntityCategory::Table).next().unwrap();
        assert_eq!(
            tree.boxes_of(table.id).next().unwrap().1,
            BBox::new(0, 0, 128, 80).unwrap()
        );
    }

    #[test]
    fn single_content_cell() {
        let mut s = Sheet::new(1, 1);
        s.set(0, 0, CellValue::Number(5.0));
        let tree = emit(&s);
        for (cat, n) in [
            (EntityCategory::Table, 1),
            (EntityCategory::Tabular, 1),
            (EntityCategory::TableRow, 1),
            (EntityCategory::TableColumn, 1),
            (EntityCategory::TableCell, 1),
            (EntityCategory::Box, 5),
        ] {
            assert_eq!(count(&tree, cat), n, "{cat}");
        }
    }

    #[test]
    fn merged_header_spans_two_columns() {
        let mut s = Sheet::new(2, 2);
        s.set(0, 0, CellValue::Number(100.0));
        s.set(1, 0, CellValue::Number(1.0));
        s.set(1, 1, CellValue::Number(2.0));
        s.merged_ranges
            .push(MergeRange::new(CellRange::single(0), CellRange::new(0, 1)));
        let tree = emit(&s);
        let spans: Vec<_> = tree
            .of_category(EntityCategory::TableCell)
            .filter(|e| e.col_range.unwrap().len() == 2)
            .collect();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].properties.as_deref(), Some("0-0,0-1"));
        assert_eq!(count(&tree, EntityCategory::TableCell), 3);
    }

    #[test]
    fn deterministic_bytes() {
        let mut s = Sheet::new(3, 3);
        s.set(1, 1, CellValue::Number(1.0));
        s.set(2, 0, CellValue::Text("note".into()));
        let a = crate::doctree::serialize_annotation(&emit(&s));
        let b = crate::doctree::serialize_annotation(&emit(&s));
        assert_eq!(a, b);
    }
}
