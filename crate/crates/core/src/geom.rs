//! Axis-aligned integer rectangles in page-image pixel space.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A rectangle with its top-left corner at `(x, y)`.
///
/// Width and height are always positive. Serialized as the 4-array
/// `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    /// Returns `None` when the box would be empty.
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Option<Self> {
        (w > 0 && h > 0).then_some(BBox { x, y, w, h })
    }

    /// Builds a box from half-open edges `[x0, x1) × [y0, y1)`.
    pub fn from_edges(x0: u32, y0: u32, x1: u32, y1: u32) -> Option<Self> {
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(BBox {
            x: x0,
            y: y0,
            w: x1 - x0,
            h: y1 - y0,
        })
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        BBox::from_edges(
            self.x.max(other.x),
            self.y.max(other.y),
            self.right().min(other.right()),
            self.bottom().min(other.bottom()),
        )
    }

    pub fn intersection_area(&self, other: &BBox) -> u64 {
        self.intersection(other).map_or(0, |b| b.area())
    }

    /// Smallest box covering both.
    pub fn hull(&self, other: &BBox) -> BBox {
        BBox {
            x: self.x.min(other.x),
            y: self.y.min(other.y),
            w: self.right().max(other.right()) - self.x.min(other.x),
            h: self.bottom().max(other.bottom()) - self.y.min(other.y),
        }
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.x <= other.x
            && self.y <= other.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    pub fn translate(&self, dx: u32, dy: u32) -> BBox {
        BBox {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }

    pub fn to_array(&self) -> [u32; 4] {
        [self.x, self.y, self.w, self.h]
    }
}

/// Hull of a non-empty sequence of boxes.
pub fn hull_all<'a>(boxes: impl IntoIterator<Item = &'a BBox>) -> Option<BBox> {
    boxes.into_iter().fold(None, |acc: Option<BBox>, b| {
        Some(match acc {
            Some(a) => a.hull(b),
            None => *b,
        })
    })
}

impl Serialize for BBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y, w, h] = <[i64; 4]>::deserialize(deserializer)?;
        let fits = |v: i64| u32::try_from(v).ok();
        match (fits(x), fits(y), fits(w), fits(h)) {
            (Some(x), Some(y), Some(w), Some(h)) => BBox::new(x, y, w, h).ok_or_else(|| {
                serde::de::Error::custom(format!("bbox [{x},{y},{w},{h}] has zero area"))
            }),
            _ => Err(serde::de::Error::custom(format!(
                "bbox [{x},{y},{w},{h}] has negative or oversized values"
            ))),
        }
    }
}
