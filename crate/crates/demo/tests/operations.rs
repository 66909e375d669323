use serde_json::Value;
use tableparse_demo::{ap_sweep, merge_csv, sheet_demo};

#[test]
fn sheet_demo_recovers_every_cell() {
    for seed in 0..10 {
        let demo = sheet_demo(seed, 12, 8, 3).unwrap();
        assert_eq!(
            demo.rgba().len(),
            (demo.width() * demo.height() * 4) as usize
        );
        let s: Value = serde_json::from_str(&demo.summary()).unwrap();
        assert_eq!(s["violations"], 0);
        assert!(s["regions"]
            .as_array()
            .unwrap()
            .iter()
            .all(|r| !r["anchor"].is_null()));
        assert!(demo.annotation().starts_with('['));
    }
}

#[test]
fn sheet_demo_is_deterministic() {
    let (a, b) = (
        sheet_demo(7, 20, 10, 3).unwrap(),
        sheet_demo(7, 20, 10, 3).unwrap(),
    );
    assert_eq!(a.rgba(), b.rgba());
    assert_eq!(a.summary(), b.summary());
}

fn ap50(summary: &str, category: &str) -> f64 {
    let v: Value = serde_json::from_str(summary).unwrap();
    v["categories"][category]["ap50"].as_f64().unwrap()
}

#[test]
fn small_jitter_keeps_ap50_perfect() {
    let s = ap_sweep(1, 2, 2, 30, 2, 0).unwrap();
    for cat in ["table", "tabular", "table_column", "table_row"] {
        assert_eq!(ap50(&s, cat), 100.0, "{cat}");
    }
}

#[test]
fn shift_by_a_cell_on_two_by_two_drops_ap50() {
    let s = ap_sweep(1, 2, 2, 30, 0, 30).unwrap();
    for cat in ["table", "tabular", "table_column", "table_row"] {
        assert!(ap50(&s, cat) < 50.0, "{cat}");
    }
}

#[test]
fn merge_produces_csv() {
    let dets = r#"[
        {"category": "tabular", "bbox": [0, 0, 20, 20], "score": 0.9},
        {"category": "table_row", "bbox": [0, 0, 20, 10], "score": 0.9},
        {"category": "table_row", "bbox": [0, 10, 20, 10], "score": 0.9},
        {"category": "table_column", "bbox": [0, 0, 10, 20], "score": 0.9},
        {"category": "table_column", "bbox": [10, 0, 10, 20], "score": 0.9}
    ]"#;
    let tokens = r#"[
        {"text": "1", "bbox": [2, 2, 5, 5]}, {"text": "2", "bbox": [12, 2, 5, 5]},
        {"text": "3", "bbox": [2, 12, 5, 5]}, {"text": "4", "bbox": [12, 12, 5, 5]}
    ]"#;
    let out: Value = serde_json::from_str(&merge_csv(dets, tokens, 0.5, true).unwrap()).unwrap();
    assert_eq!(out["csv"], "1,2,3\n3,4,7\n4,6,10\n");
    assert_eq!(out["assigned"], 4);
    assert!(merge_csv(dets, tokens, 0.95, false).is_err());
}
