pub mod config;
pub mod doctree;
pub mod eval;
pub mod geom;
pub mod ocrmerge;
pub mod structure;
pub mod weaksup;

pub use doctree::{DocTree, Entity, EntityCategory};
pub use geom::BBox;
