//! Hierarchical document tree: entity model, annotation-file format and
//! structural validation.
//!
//! The annotation file is a JSON array of flat node objects linked by
//! `parent` ids:
//!
//! ```text
//! [{"id":28,"category":"table_cell","properties":"1-1,1-1","row_range":[1,1],"col_range":[1,1],"parent":9},
//!  {"id":29,"category":"box","page":0,"bbox":[365,332,299,27],"parent":28}]
//! ```
//!
//! Semantic entities carry no geometry of their own; their location is given
//! by `box` children. Row and column ranges are 0-based and inclusive.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::geom::BBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityCategory {
    Table,
    Tabular,
    TableCaption,
    TableFootnote,
    TableRow,
    TableColumn,
    TableCell,
    Box,
    Meta,
}

impl EntityCategory {
    pub const ALL: [EntityCategory; 9] = [
        EntityCategory::Table,
        EntityCategory::Tabular,
        EntityCategory::TableCaption,
        EntityCategory::TableFootnote,
        EntityCategory::TableRow,
        EntityCategory::TableColumn,
        EntityCategory::TableCell,
        EntityCategory::Box,
        EntityCategory::Meta,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityCategory::Table => "table",
            EntityCategory::Tabular => "tabular",
            EntityCategory::TableCaption => "table_caption",
            EntityCategory::TableFootnote => "table_footnote",
            EntityCategory::TableRow => "table_row",
            EntityCategory::TableColumn => "table_column",
            EntityCategory::TableCell => "table_cell",
            EntityCategory::Box => "box",
            EntityCategory::Meta => "meta",
        }
    }

    /// Everything except `box`.
    pub fn is_semantic(&self) -> bool {
        *self != EntityCategory::Box
    }

    /// Parent categories this category may attach to. `None` means any
    /// semantic entity.
    fn allowed_parents(&self) -> Option<&'static [EntityCategory]> {
        use EntityCategory::*;
        match self {
            TableCell | TableRow | TableColumn => Some(&[Tabular]),
            Tabular | TableCaption | TableFootnote => Some(&[Table]),
            Table | Box | Meta => None,
        }
    }
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown entity category {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for EntityCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// Inclusive index range `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellRange {
    pub lo: u32,
    pub hi: u32,
}

impl CellRange {
    pub fn new(lo: u32, hi: u32) -> Self {
        CellRange { lo, hi }
    }

    pub fn single(i: u32) -> Self {
        CellRange { lo: i, hi: i }
    }

    pub fn contains(&self, i: u32) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn len(&self) -> u32 {
        self.hi.saturating_sub(self.lo) + 1
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// Formats the `properties` string of a cell, e.g. `"1-1,1-1"`.
pub fn format_properties(rows: CellRange, cols: CellRange) -> String {
    format!("{}-{},{}-{}", rows.lo, rows.hi, cols.lo, cols.hi)
}

/// Parses `"r1-r2,c1-c2"`. Whitespace after the comma is tolerated.
pub fn parse_properties(s: &str) -> Option<(CellRange, CellRange)> {
    let (rows, cols) = s.split_once(',')?;
    let range = |part: &str| -> Option<CellRange> {
        let (lo, hi) = part.split_once('-')?;
        let digits = |t: &str| -> Option<u32> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            t.parse().ok()
        };
        Some(CellRange::new(digits(lo)?, digits(hi)?))
    };
    Some((range(rows)?, range(cols.trim_start())?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: u64,
    pub category: EntityCategory,
    pub properties: Option<String>,
    pub page: Option<u32>,
    pub bbox: Option<BBox>,
    pub row_range: Option<CellRange>,
    pub col_range: Option<CellRange>,
    pub parent: Option<u64>,
}

impl Entity {
    /// A semantic entity without ranges or geometry.
    pub fn semantic(id: u64, category: EntityCategory, parent: Option<u64>) -> Self {
        Entity {
            id,
            category,
            properties: None,
            page: None,
            bbox: None,
            row_range: None,
            col_range: None,
            parent,
        }
    }

    pub fn cell(id: u64, rows: CellRange, cols: CellRange, parent: Option<u64>) -> Self {
        Entity {
            properties: Some(format_properties(rows, cols)),
            row_range: Some(rows),
            col_range: Some(cols),
            ..Entity::semantic(id, EntityCategory::TableCell, parent)
        }
    }

    pub fn bbox_node(id: u64, page: u32, bbox: BBox, parent: u64) -> Self {
        Entity {
            page: Some(page),
            bbox: Some(bbox),
            ..Entity::semantic(id, EntityCategory::Box, Some(parent))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed annotation: {0}")]
    MalformedInput(String),
    #[error("node {id}: unknown category {category:?}")]
    UnknownCategory { id: i64, category: String },
    #[error("node {id}: parent {parent} does not exist")]
    DanglingParent { id: u64, parent: u64 },
    #[error("duplicate node id {0}")]
    DuplicateId(u64),
    #[error("node {id}: {detail}")]
    RangeError { id: i64, detail: String },
}

/// One broken tree invariant. Violations are reported, never raised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DanglingParent {
        id: u64,
        parent: u64,
    },
    CycleDetected {
        ids: Vec<u64>,
    },
    RangeOnNonCell {
        id: u64,
    },
    MissingRange {
        id: u64,
    },
    InvertedRange {
        id: u64,
    },
    PropertiesMismatch {
        id: u64,
        properties: String,
    },
    BoxWithoutParent {
        id: u64,
    },
    BoxMissingGeometry {
        id: u64,
    },
    GeometryOnSemantic {
        id: u64,
    },
    InvalidNesting {
        id: u64,
        category: EntityCategory,
        parent_category: EntityCategory,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingParent { id, parent } => {
                write!(f, "node {id}: parent {parent} does not exist")
            }
            Violation::CycleDetected { ids } => write!(f, "parent cycle through {ids:?}"),
            Violation::RangeOnNonCell { id } => {
                write!(
                    f,
                    "node {id}: row/col ranges are only allowed on table_cell"
                )
            }
            Violation::MissingRange { id } => {
                write!(f, "node {id}: table_cell needs row_range and col_range")
            }
            Violation::InvertedRange { id } => write!(f, "node {id}: range has lo > hi"),
            Violation::PropertiesMismatch { id, properties } => {
                write!(
                    f,
                    "node {id}: properties {properties:?} disagree with ranges"
                )
            }
            Violation::BoxWithoutParent { id } => write!(f, "node {id}: box has no parent"),
            Violation::BoxMissingGeometry { id } => write!(f, "node {id}: box needs page and bbox"),
            Violation::GeometryOnSemantic { id } => {
                write!(f, "node {id}: only box nodes carry page/bbox")
            }
            Violation::InvalidNesting {
                id,
                category,
                parent_category,
            } => {
                write!(
                    f,
                    "node {id}: {category} cannot be a child of {parent_category}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("entity {0} does not exist")]
    UnknownEntity(u64),
    #[error("entity {0} is a box; boxes cannot own boxes")]
    BoxOnBox(u64),
    #[error("cells {first} and {second} both contain ({row}, {col})")]
    AmbiguousCell {
        row: u32,
        col: u32,
        first: u64,
        second: u64,
    },
}

/// Id-indexed forest of entities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocTree {
    nodes: BTreeMap<u64, Entity>,
}

/// Wire form of one node; field order is the canonical key order.
#[derive(Serialize, Deserialize)]
struct RawNode {
    id: i64,
    category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    properties: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    page: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bbox: Option<[i64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row_range: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    col_range: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<i64>,
}

fn non_negative(id: i64, what: &str, v: i64) -> Result<u32, ParseError> {
    u32::try_from(v).map_err(|_| ParseError::RangeError {
        id,
        detail: format!("{what} value {v} is negative or too large"),
    })
}

impl RawNode {
    fn into_entity(self) -> Result<Entity, ParseError> {
        let raw_id = self.id;
        let id = u64::try_from(raw_id).map_err(|_| ParseError::RangeError {
            id: raw_id,
            detail: "id must be non-negative".into(),
        })?;
        let category: EntityCategory =
            self.category
                .parse()
                .map_err(|_| ParseError::UnknownCategory {
                    id: raw_id,
                    category: self.category.clone(),
                })?;
        let range = |what: &str, r: Option<[i64; 2]>| -> Result<Option<CellRange>, ParseError> {
            r.map(|[lo, hi]| {
                let lo = non_negative(raw_id, what, lo)?;
                let hi = non_negative(raw_id, what, hi)?;
                if lo > hi {
                    return Err(ParseError::RangeError {
                        id: raw_id,
                        detail: format!("{what} [{lo},{hi}] has lo > hi"),
                    });
                }
                Ok(CellRange::new(lo, hi))
            })
            .transpose()
        };
        let row_range = range("row_range", self.row_range)?;
        let col_range = range("col_range", self.col_range)?;
        let page = self
            .page
            .map(|p| non_negative(raw_id, "page", p))
            .transpose()?;
        let bbox = match self.bbox {
            None => None,
            Some([x, y, w, h]) => {
                let x = non_negative(raw_id, "bbox", x)?;
                let y = non_negative(raw_id, "bbox", y)?;
                let w = non_negative(raw_id, "bbox", w)?;
                let h = non_negative(raw_id, "bbox", h)?;
                Some(BBox::new(x, y, w, h).ok_or_else(|| ParseError::RangeError {
                    id: raw_id,
                    detail: format!("bbox [{x},{y},{w},{h}] has zero area"),
                })?)
            }
        };
        let parent = self
            .parent
            .map(|p| {
                u64::try_from(p).map_err(|_| ParseError::RangeError {
                    id: raw_id,
                    detail: format!("parent {p} is negative"),
                })
            })
            .transpose()?;
        // Canonicalise well-formed cell properties ("1-1, 1-1" -> "1-1,1-1").
        let properties = match (category, self.properties) {
            (EntityCategory::TableCell, Some(p)) => Some(match parse_properties(&p) {
                Some((r, c)) => format_properties(r, c),
                None => p,
            }),
            (_, p) => p,
        };
        Ok(Entity {
            id,
            category,
            properties,
            page,
            bbox,
            row_range,
            col_range,
            parent,
        })
    }

    fn from_entity(e: &Entity) -> RawNode {
        RawNode {
            id: e.id as i64,
            category: e.category.as_str().to_string(),
            properties: e.properties.clone(),
            page: e.page.map(i64::from),
            bbox: e.bbox.map(|b| b.to_array().map(i64::from)),
            row_range: e.row_range.map(|r| [r.lo as i64, r.hi as i64]),
            col_range: e.col_range.map(|r| [r.lo as i64, r.hi as i64]),
            parent: e.parent.map(|p| p as i64),
        }
    }
}

/// Parses annotation-file bytes.
///
/// Rejects syntax errors, unknown categories, duplicate ids, negative or
/// inverted ranges and unresolved parent ids. A node without a `parent` key
/// is a root. Structural rules beyond that (nesting, cycles, cell ranges)
/// are left to [`validate`].
pub fn parse_annotation(bytes: &[u8]) -> Result<DocTree, ParseError> {
    let raw: Vec<RawNode> =
        serde_json::from_slice(bytes).map_err(|e| ParseError::MalformedInput(e.to_string()))?;
    let entities = raw
        .into_iter()
        .map(RawNode::into_entity)
        .collect::<Result<Vec<_>, _>>()?;
    DocTree::from_entities(entities)
}

/// Canonical annotation bytes: nodes sorted by id, one per line, keys in
/// the fixed order `id, category, properties, page, bbox, row_range,
/// col_range, parent`.
pub fn serialize_annotation(tree: &DocTree) -> Vec<u8> {
    if tree.is_empty() {
        return b"[]".to_vec();
    }
    let mut out = String::from("[\n");
    for (i, e) in tree.nodes.values().enumerate() {
        if i > 0 {
            out.push_str(",\n");
        }
        out.push_str(&serde_json::to_string(&RawNode::from_entity(e)).expect("node serializes"));
    }
    out.push_str("\n]");
    out.into_bytes()
}

impl DocTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a tree, rejecting duplicate ids and unresolved parents.
    pub fn from_entities(entities: impl IntoIterator<Item = Entity>) -> Result<Self, ParseError> {
        let mut nodes = BTreeMap::new();
        for e in entities {
            let id = e.id;
            if nodes.insert(id, e).is_some() {
                return Err(ParseError::DuplicateId(id));
            }
        }
        for e in nodes.values() {
            if let Some(parent) = e.parent {
                if !nodes.contains_key(&parent) {
                    return Err(ParseError::DanglingParent { id: e.id, parent });
                }
            }
        }
        Ok(DocTree { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Entity> {
        self.nodes.get(&id)
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.nodes.values()
    }

    pub fn roots(&self) -> impl Iterator<Item = &Entity> {
        self.nodes.values().filter(|e| e.parent.is_none())
    }

    pub fn children(&self, id: u64) -> impl Iterator<Item = &Entity> {
        self.nodes.values().filter(move |e| e.parent == Some(id))
    }

    pub fn of_category(&self, category: EntityCategory) -> impl Iterator<Item = &Entity> {
        self.nodes.values().filter(move |e| e.category == category)
    }

    /// Box children of `id` as `(page, bbox)` pairs, in id order.
    pub fn boxes_of(&self, id: u64) -> impl Iterator<Item = (u32, BBox)> + '_ {
        self.children(id)
            .filter_map(|e| match (e.category, e.page, e.bbox) {
                (EntityCategory::Box, Some(page), Some(bbox)) => Some((page, bbox)),
                _ => None,
            })
    }

    pub fn next_id(&self) -> u64 {
        self.nodes.keys().next_back().map_or(0, |m| m + 1)
    }

    /// Inserts or replaces a node without any checks. Callers building trees
    /// incrementally should finish with [`validate`].
    pub fn upsert(&mut self, entity: Entity) {
        self.nodes.insert(entity.id, entity);
    }

    /// Appends a semantic entity plus one box child for its geometry and
    /// returns the semantic entity's id.
    pub fn push_with_box(&mut self, mut entity: Entity, page: u32, bbox: BBox) -> u64 {
        let id = self.next_id();
        entity.id = id;
        self.nodes.insert(id, entity);
        self.nodes
            .insert(id + 1, Entity::bbox_node(id + 1, page, bbox, id));
        id
    }

    /// Returns the table_cell covering `(row, col)`, if any.
    pub fn query_cell(&self, row: u32, col: u32) -> Result<Option<&Entity>, TreeError> {
        let mut hits = self.of_category(EntityCategory::TableCell).filter(|e| {
            matches!((e.row_range, e.col_range), (Some(r), Some(c)) if r.contains(row) && c.contains(col))
        });
        let first = hits.next();
        if let (Some(a), Some(b)) = (first, hits.next()) {
            return Err(TreeError::AmbiguousCell {
                row,
                col,
                first: a.id,
                second: b.id,
            });
        }
        Ok(first)
    }

    /// Returns a new tree with a fresh box node (id = max + 1) under
    /// `entity_id`.
    pub fn attach_box(&self, entity_id: u64, page: u32, bbox: BBox) -> Result<DocTree, TreeError> {
        let target = self
            .get(entity_id)
            .ok_or(TreeError::UnknownEntity(entity_id))?;
        if !target.category.is_semantic() {
            return Err(TreeError::BoxOnBox(entity_id));
        }
        let mut next = self.clone();
        let id = self.next_id();
        next.nodes
            .insert(id, Entity::bbox_node(id, page, bbox, entity_id));
        Ok(next)
    }
}

/// Lists every broken invariant of `tree`; an empty list means valid.
pub fn validate(tree: &DocTree) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in tree.entities() {
        let parent = match e.parent {
            Some(p) => match tree.get(p) {
                Some(pe) => Some(pe),
                None => {
                    out.push(Violation::DanglingParent {
                        id: e.id,
                        parent: p,
                    });
                    None
                }
            },
            None => None,
        };

        if e.category == EntityCategory::TableCell {
            match (e.row_range, e.col_range) {
                (Some(r), Some(c)) => {
                    if r.lo > r.hi || c.lo > c.hi {
                        out.push(Violation::InvertedRange { id: e.id });
                    }
                    if let Some(p) = &e.properties {
                        if parse_properties(p) != Some((r, c)) {
                            out.push(Violation::PropertiesMismatch {
                                id: e.id,
                                properties: p.clone(),
                            });
                        }
                    }
                }
                _ => out.push(Violation::MissingRange { id: e.id }),
            }
        } else if e.row_range.is_some() || e.col_range.is_some() {
            out.push(Violation::RangeOnNonCell { id: e.id });
        }

        if e.category == EntityCategory::Box {
            if e.parent.is_none() {
                out.push(Violation::BoxWithoutParent { id: e.id });
            }
            if e.page.is_none() || e.bbox.is_none() {
                out.push(Violation::BoxMissingGeometry { id: e.id });
            }
        } else if e.page.is_some() || e.bbox.is_some() {
            out.push(Violation::GeometryOnSemantic { id: e.id });
        }

        if let Some(pe) = parent {
            let ok = if pe.category == EntityCategory::Box {
                false
            } else {
                e.category
                    .allowed_parents()
                    .is_none_or(|allowed| allowed.contains(&pe.category))
            };
            if !ok {
                out.push(Violation::InvalidNesting {
                    id: e.id,
                    category: e.category,
                    parent_category: pe.category,
                });
            }
        }
    }
    out.extend(find_cycles(tree));
    out
}

fn find_cycles(tree: &DocTree) -> Vec<Violation> {
    // 0 = unvisited, 1 = on current walk, 2 = done
    let mut state: BTreeMap<u64, u8> = BTreeMap::new();
    let mut cycles = Vec::new();
    for start in tree.nodes.keys().copied() {
        if state.contains_key(&start) {
            continue;
        }
        let mut walk = Vec::new();
        let mut cur = Some(start);
        while let Some(id) = cur {
            match state.get(&id) {
                Some(2) => break,
                Some(1) => {
                    let pos = walk.iter().position(|&w| w == id).expect("on walk");
                    let mut ids: Vec<u64> = walk[pos..].to_vec();
                    ids.sort_unstable();
                    cycles.push(Violation::CycleDetected { ids });
                    break;
                }
                _ => {
                    state.insert(id, 1);
                    walk.push(id);
                    cur = tree
                        .get(id)
                        .and_then(|e| e.parent)
                        .filter(|p| tree.nodes.contains_key(p));
                }
            }
        }
        for id in walk {
            state.insert(id, 2);
        }
    }
    cycles
}

/// Ids of `id` and all of its descendants.
pub fn subtree_ids(tree: &DocTree, id: u64) -> BTreeSet<u64> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![id];
    while let Some(cur) = stack.pop() {
        if seen.insert(cur) {
            stack.extend(tree.children(cur).map(|c| c.id));
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = r#"[{"id": 28,
  "category": "table_cell",
  "properties": "1-1,1-1",
  "row_range": [1,1],
  "col_range": [1,1],
  "parent": 9},
  {"id": 29,
  "category": "box",
  "page": 0,
  "bbox": [365,332,299,27],
  "parent": 28}]"#;

    fn listing_with_tabular() -> DocTree {
        let mut s = LISTING.trim_end_matches(']').to_string();
        s.push_str(r#", {"id": 9, "category": "tabular"}]"#);
        parse_annotation(s.as_bytes()).unwrap()
    }

    #[test]
    fn listing_alone_has_unresolved_parent() {
        assert_eq!(
            parse_annotation(LISTING.as_bytes()),
            Err(ParseError::DanglingParent { id: 28, parent: 9 })
        );
    }

    #[test]
    fn listing_with_tabular_parses_and_validates() {
        let tree = listing_with_tabular();
        assert_eq!(tree.len(), 3);
        let cell = tree.get(28).unwrap();
        assert_eq!(cell.category, EntityCategory::TableCell);
        assert_eq!(cell.row_range, Some(CellRange::single(1)));
        assert_eq!(cell.col_range, Some(CellRange::single(1)));
        assert_eq!(cell.parent, Some(9));
        let b = tree.get(29).unwrap();
        assert_eq!(b.page, Some(0));
        assert_eq!(b.bbox, BBox::new(365, 332, 299, 27));
        assert_eq!(b.parent, Some(28));
        assert!(validate(&tree).is_empty());
    }

    #[test]
    fn empty_array() {
        let tree = parse_annotation(b"[]").unwrap();
        assert!(tree.is_empty());
        assert_eq!(serialize_annotation(&tree), b"[]");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_annotation(br#"[{"id":1,"category":"table","parent":99}]"#),
            Err(ParseError::DanglingParent { id: 1, parent: 99 })
        );
        assert!(matches!(
            parse_annotation(br#"[{"id":1,"category":"figure"}]"#),
            Err(ParseError::UnknownCategory { id: 1, .. })
        ));
        assert_eq!(
            parse_annotation(br#"[{"id":1,"category":"table"},{"id":1,"category":"tabular"}]"#),
            Err(ParseError::DuplicateId(1))
        );
        assert!(matches!(
            parse_annotation(
                br#"[{"id":1,"category":"table_cell","row_range":[2,1],"col_range":[0,0]}]"#
            ),
            Err(ParseError::RangeError { id: 1, .. })
        ));
        assert!(matches!(
            parse_annotation(br#"[{"id":-3,"category":"table"}]"#),
            Err(ParseError::RangeError { id: -3, .. })
        ));
        assert!(matches!(
            parse_annotation(b"[{"),
            Err(ParseError::MalformedInput(_))
        ));
    }

    #[test]
    fn serialize_key_order_and_reparse() {
        let tree = listing_with_tabular();
        let bytes = serialize_annotation(&tree);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(
            text,
            "[\n{\"id\":9,\"category\":\"tabular\"},\n\
             {\"id\":28,\"category\":\"table_cell\",\"properties\":\"1-1,1-1\",\"row_range\":[1,1],\"col_range\":[1,1],\"parent\":9},\n\
             {\"id\":29,\"category\":\"box\",\"page\":0,\"bbox\":[365,332,299,27],\"parent\":28}\n]"
        );
        assert_eq!(parse_annotation(&bytes).unwrap(), tree);
    }

    #[test]
    fn properties_whitespace_tolerated_and_normalised() {
        let tree = parse_annotation(
            br#"[{"id":0,"category":"tabular"},{"id":1,"category":"table_cell","properties":"1-1, 1-1","row_range":[1,1],"col_range":[1,1],"parent":0}]"#,
        )
        .unwrap();
        assert_eq!(tree.get(1).unwrap().properties.as_deref(), Some("1-1,1-1"));
        assert!(validate(&tree).is_empty());
    }

    #[test]
    fn cycle_is_reported() {
        let tree = DocTree::from_entities([
            Entity::semantic(1, EntityCategory::Meta, Some(2)),
            Entity::semantic(2, EntityCategory::Meta, Some(1)),
        ])
        .unwrap();
        assert_eq!(
            validate(&tree),
            vec![Violation::CycleDetected { ids: vec![1, 2] }]
        );
    }

    #[test]
    fn range_on_row_is_reported() {
        let mut row = Entity::semantic(2, EntityCategory::TableRow, Some(1));
        row.row_range = Some(CellRange::single(0));
        let tree =
            DocTree::from_entities([Entity::semantic(1, EntityCategory::Tabular, None), row])
                .unwrap();
        assert_eq!(validate(&tree), vec![Violation::RangeOnNonCell { id: 2 }]);
    }

    #[test]
    fn nesting_and_geometry_rules() {
        let mut cell = Entity::cell(2, CellRange::single(0), CellRange::single(0), Some(1));
        cell.properties = Some("0-0,0-1".into());
        let tree = DocTree::from_entities([
            Entity::semantic(1, EntityCategory::Table, None),
            cell,
            Entity::semantic(3, EntityCategory::Box, None),
        ])
        .unwrap();
        let v = validate(&tree);
        assert!(v.contains(&Violation::InvalidNesting {
            id: 2,
            category: EntityCategory::TableCell,
            parent_category: EntityCategory::Table
        }));
        assert!(v.contains(&Violation::PropertiesMismatch {
            id: 2,
            properties: "0-0,0-1".into()
        }));
        assert!(v.contains(&Violation::BoxWithoutParent { id: 3 }));
        assert!(v.contains(&Violation::BoxMissingGeometry { id: 3 }));
    }

    #[test]
    fn query_cell_cases() {
        let tree = listing_with_tabular();
        assert_eq!(tree.query_cell(1, 1).unwrap().map(|e| e.id), Some(28));
        assert_eq!(tree.query_cell(5, 5).unwrap(), None);

        let span = DocTree::from_entities([
            Entity::semantic(0, EntityCategory::Tabular, None),
            Entity::cell(1, CellRange::new(0, 1), CellRange::single(0), Some(0)),
        ])
        .unwrap();
        assert_eq!(span.query_cell(1, 0).unwrap().map(|e| e.id), Some(1));

        let overlap = DocTree::from_entities([
            Entity::semantic(0, EntityCategory::Tabular, None),
            Entity::cell(1, CellRange::new(0, 1), CellRange::single(0), Some(0)),
            Entity::cell(2, CellRange::single(1), CellRange::new(0, 1), Some(0)),
        ])
        .unwrap();
        assert_eq!(
            overlap.query_cell(1, 0),
            Err(TreeError::AmbiguousCell {
                row: 1,
                col: 0,
                first: 1,
                second: 2
            })
        );
    }

    #[test]
    fn attach_box_cases() {
        let tree = listing_with_tabular();
        let b = BBox::new(0, 0, 10, 10).unwrap();
        let next = tree.attach_box(28, 0, b).unwrap();
        let added = next.get(30).unwrap();
        assert_eq!(added.parent, Some(28));
        assert_eq!(added.bbox, Some(b));
        assert!(validate(&next).is_empty());
        assert_eq!(tree.len(), 3, "input tree untouched");
        assert_eq!(tree.attach_box(77, 0, b), Err(TreeError::UnknownEntity(77)));
        assert_eq!(tree.attach_box(29, 0, b), Err(TreeError::BoxOnBox(29)));
    }
}
