/// Pipeline defaults. Every field can be overridden from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub dpi: f64,
    /// Detections scoring below this are discarded.
    pub confidence_threshold: f64,
    /// Maximum entities kept per page.
    pub entity_cap: usize,
    pub iou_thresholds: Vec<f64>,
    pub port: u16,
}

pub const DEFAULT_DPI: f64 = 96.0;
pub const DEFAULT_CONFIDENCE: f64 = 0.5;
pub const DEFAULT_ENTITY_CAP: usize = 100;
pub const DEFAULT_PORT: u16 = 8080;

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn coco_iou_thresholds() -> Vec<f64> {
    (0..10).map(|k| (50 + 5 * k) as f64 / 100.0).collect()
}

impl Default for Config {
    fn default() -> Self {
        Config {
            dpi: DEFAULT_DPI,
            confidence_threshold: DEFAULT_CONFIDENCE,
            entity_cap: DEFAULT_ENTITY_CAP,
            iou_thresholds: coco_iou_thresholds(),
            port: DEFAULT_PORT,
        }
    }
}
