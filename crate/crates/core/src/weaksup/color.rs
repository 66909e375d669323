use std::collections::{BTreeMap, BTreeSet};

use super::sheet::{CellLayout, Sheet};
use super::WeakSupError;

pub type Rgb = [u8; 3];

pub const BACKGROUND: Rgb = [255, 255, 255];

/// Fixed fill colors indexed by color id.
pub const PALETTE: [Rgb; 16] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
    [0, 0, 128],
];

/// Color id per logical cell, keyed by anchor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColorMap {
    pub ids: BTreeMap<(u32, u32), u8>,
}

impl ColorMap {
    pub fn id(&self, anchor: (u32, u32)) -> Option<u8> {
        self.ids.get(&anchor).copied()
    }

    pub fn rgb(&self, anchor: (u32, u32)) -> Option<Rgb> {
        self.id(anchor).map(|i| PALETTE[i as usize])
    }
}

/// Edges of the 4-adjacency graph between logical cells, as index pairs
/// `(a, b)` with `a < b`.
pub fn adjacency(sheet: &Sheet, layout: &CellLayout) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    let mut link = |a: usize, b: usize| {
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    };
    for r in 0..sheet.n_rows {
        for c in 0..sheet.n_cols {
            let here = layout.owner(r, c);
            if c + 1 < sheet.n_cols {
                link(here, layout.owner(r, c + 1));
            }
            if r + 1 < sheet.n_rows {
                link(here, layout.owner(r + 1, c));
            }
        }
    }
    edges
}

/// Greedy coloring of logical cells in row-major anchor order: each cell
/// takes the smallest id not used by an already-colored neighbor.
pub fn assign_colors(sheet: &Sheet) -> Result<ColorMap, WeakSupError> {
    let layout = sheet.layout();
    let mut neighbors = vec![Vec::new(); layout.cells.len()];
    for (a, b) in adjacency(sheet, &layout) {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    let mut assigned: Vec<Option<u8>> = vec![None; layout.cells.len()];
    for i in 0..layout.cells.len() {
        let used: BTreeSet<u8> = neighbors[i].iter().filter_map(|&n| assigned[n]).collect();
        let id = (0..PALETTE.len() as u8).find(|k| !used.contains(k)).ok_or(
            WeakSupError::PaletteExhausted {
                needed: PALETTE.len() + 1,
            },
        )?;
        assigned[i] = Some(id);
    }
    let ids = layout
        .cells
        .iter()
        .zip(assigned)
        .map(|(cell, id)| (cell.anchor(), id.expect("every cell colored")))
        .collect();
    Ok(ColorMap { ids })
}
