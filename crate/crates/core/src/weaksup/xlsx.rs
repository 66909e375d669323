//! Minimal OOXML (.xlsx) worksheet reader and writer.
//!
//! Only what geometry and classification need is read: cell values, column
//! widths, row heights and merged ranges. Formulas contribute their cached
//! value; styling is ignored.

use std::collections::BTreeMap;
use std::io::{Cursor, Read, Write};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use zip::write::SimpleFileOptions;
use zip::ZipArchive;

use crate::doctree::CellRange;

use super::geometry::{COLUMN_PADDING_PX, MAX_DIGIT_WIDTH_PX};
use super::sheet::{CellValue, MergeRange, Sheet, DEFAULT_COL_WIDTH, DEFAULT_ROW_HEIGHT};
use super::WeakSupError;

const OLE_MAGIC: [u8; 8] = [0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1];

/// Converts a stored `<col width>` value to character units.
fn stored_width_to_chars(width: f64) -> f64 {
    let px = ((256.0 * width + (128.0 / MAX_DIGIT_WIDTH_PX).trunc()) / 256.0 * MAX_DIGIT_WIDTH_PX)
        .trunc();
    let chars = ((px - COLUMN_PADDING_PX) / MAX_DIGIT_WIDTH_PX * 100.0).round() / 100.0;
    chars.max(0.01)
}

/// Converts character units to the value stored in `<col width>`.
fn chars_to_stored_width(chars: f64) -> f64 {
    ((chars * MAX_DIGIT_WIDTH_PX + COLUMN_PADDING_PX) / MAX_DIGIT_WIDTH_PX * 256.0).trunc() / 256.0
}

/// Parses an A1-style reference into 0-based `(row, col)`.
pub fn parse_cell_ref(s: &str) -> Option<(u32, u32)> {
    let split = s.find(|ch: char| ch.is_ascii_digit())?;
    let (letters, digits) = s.split_at(split);
    if letters.is_empty() || !letters.bytes().all(|b| b.is_ascii_alphabetic()) {
        return None;
    }
    let mut col: u32 = 0;
    for b in letters.bytes() {
        col = col
            .checked_mul(26)?
            .checked_add((b.to_ascii_uppercase() - b'A' + 1) as u32)?;
    }
    let row: u32 = digits.parse().ok()?;
    (row >= 1).then(|| (row - 1, col - 1))
}

pub fn format_cell_ref(row: u32, col: u32) -> String {
    let mut letters = Vec::new();
    let mut n = col + 1;
    while n > 0 {
        let rem = (n - 1) % 26;
        letters.push(b'A' + rem as u8);
        n = (n - 1) / 26;
    }
    letters.reverse();
    format!("{}{}", String::from_utf8(letters).expect("ascii"), row + 1)
}

fn read_entry(
    zip: &mut ZipArchive<Cursor<&[u8]>>,
    name: &str,
) -> Result<Option<String>, WeakSupError> {
    let mut file = match zip.by_name(name) {
        Ok(f) => f,
        Err(zip::result::ZipError::FileNotFound) => return Ok(None),
        Err(e) => return Err(WeakSupError::NotASpreadsheet(format!("{name}: {e}"))),
    };
    let mut s = String::new();
    file.read_to_string(&mut s)
        .map_err(|e| WeakSupError::NotASpreadsheet(format!("{name}: {e}")))?;
    Ok(Some(s))
}

fn attr(e: &BytesStart<'_>, key: &[u8]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.local_name().as_ref() == key)
        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()))
}

fn xml_error(part: &str, e: impl std::fmt::Display) -> WeakSupError {
    WeakSupError::NotASpreadsheet(format!("{part}: {e}"))
}

/// `(sheet name, relationship id)` in workbook order.
fn workbook_sheets(xml: &str) -> Result<Vec<(String, String)>, WeakSupError> {
    let mut reader = Reader::from_str(xml);
    let mut out = Vec::new();
    loop {
        match reader
            .read_event()
            .map_err(|e| xml_error("workbook.xml", e))?
        {
            Event::Start(e) | Event::Empty(e) if e.local_name().as_ref() == b"sheet" => {
                if let (Some(name), Some(rid)) = (attr(&e, b"name"), attr(&e, b"id")) {
                    out.push((name, rid));
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

fn relationship_target(xml: &str, rid: &str) -> Result<Option<String>, WeakSupError> {
    let mut reader = Reader::from_str(xml);
    loop {
        match reader
            .read_event()
            .map_err(|e| xml_error("workbook.xml.rels", e))?
        {
            Event::Start(e) | Event::Empty(e) if e.local_name().as_ref() == b"Relationship" => {
                if attr(&e, b"Id").as_deref() == Some(rid) {
                    return Ok(attr(&e, b"Target"));
                }
            }
            Event::Eof => return Ok(None),
            _ => {}
        }
    }
}

fn shared_strings(xml: &str) -> Result<Vec<String>, WeakSupError> {
    let mut reader = Reader::from_str(xml);
    let mut out = Vec::new();
    let mut current: Option<String> = None;
    let mut in_text = false;
    let mut in_phonetic = false;
    loop {
        match reader
            .read_event()
            .map_err(|e| xml_error("sharedStrings.xml", e))?
        {
            Event::Start(e) => match e.local_name().as_ref() {
                b"si" => current = Some(String::new()),
                b"t" => in_text = true,
                b"rPh" => in_phonetic = true,
                _ => {}
            },
            Event::Empty(e) if e.local_name().as_ref() == b"si" => out.push(String::new()),
            Event::Text(t) if in_text && !in_phonetic => {
                if let Some(s) = current.as_mut() {
                    s.push_str(
                        &t.unescape()
                            .map_err(|e| xml_error("sharedStrings.xml", e))?,
                    );
                }
            }
            Event::End(e) => match e.local_name().as_ref() {
                b"si" => out.push(current.take().unwrap_or_default()),
                b"t" => in_text = false,
                b"rPh" => in_phonetic = false,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

#[derive(Default)]
struct RawSheet {
    default_col_width: Option<f64>,
    default_row_height: Option<f64>,
    /// (first col, last col, stored width), 0-based.
    col_specs: Vec<(u32, u32, f64)>,
    row_heights: BTreeMap<u32, f64>,
    cells: BTreeMap<(u32, u32), CellValue>,
    merges: Vec<MergeRange>,
    /// Bottom-right cell of `<dimension ref>`.
    dimension: Option<(u32, u32)>,
}

fn parse_worksheet(xml: &str, strings: &[String]) -> Result<RawSheet, WeakSupError> {
    let part = "worksheet";
    let mut reader = Reader::from_str(xml);
    let mut raw = RawSheet::default();
    // Current cell: position, type attribute, collected text.
    let mut cell: Option<((u32, u32), Option<String>)> = None;
    let mut text = String::new();
    let mut capture = false;
    let mut value: Option<String> = None;
    let mut next_row: u32 = 0;
    let mut next_col: u32 = 0;

    loop {
        let event = reader.read_event().map_err(|e| xml_error(part, e))?;
        let (is_empty, e) = match &event {
            Event::Start(e) => (false, Some(e)),
            Event::Empty(e) => (true, Some(e)),
            _ => (false, None),
        };
        if let Some(e) = e {
            match e.local_name().as_ref() {
                b"dimension" => {
                    let reference = attr(e, b"ref").unwrap_or_default();
                    let last = reference.rsplit(':').next().unwrap_or_default();
                    raw.dimension = parse_cell_ref(last);
                }
                b"sheetFormatPr" => {
                    raw.default_col_width =
                        attr(e, b"defaultColWidth").and_then(|v| v.parse().ok());
                    if raw.default_col_width.is_none() {
                        // baseColWidth is in characters, excluding padding.
                        raw.default_col_width = attr(e, b"baseColWidth")
                            .and_then(|v| v.parse::<f64>().ok())
                            .map(|b| chars_to_stored_width(b + 0.43));
                    }
                    raw.default_row_height =
                        attr(e, b"defaultRowHeight").and_then(|v| v.parse().ok());
                }
                b"col" => {
                    let min: Option<u32> = attr(e, b"min").and_then(|v| v.parse().ok());
                    let max: Option<u32> = attr(e, b"max").and_then(|v| v.parse().ok());
                    let width: Option<f64> = attr(e, b"width").and_then(|v| v.parse().ok());
                    if let (Some(min), Some(max), Some(width)) = (min, max, width) {
                        if min >= 1 && max >= min {
                            raw.col_specs.push((min - 1, max - 1, width));
                        }
                    }
                }
                b"row" => {
                    let r = attr(e, b"r")
                        .and_then(|v| v.parse::<u32>().ok())
                        .map_or(next_row, |r| r - 1);
                    if let Some(ht) = attr(e, b"ht").and_then(|v| v.parse::<f64>().ok()) {
                        raw.row_heights.insert(r, ht);
                    }
                    next_row = r + 1;
                    next_col = 0;
                }
                b"c" => {
                    let pos = attr(e, b"r")
                        .and_then(|v| parse_cell_ref(&v))
                        .unwrap_or((next_row.saturating_sub(1), next_col));
                    next_col = pos.1 + 1;
                    if !is_empty {
                        cell = Some((pos, attr(e, b"t")));
                        value = None;
                    }
                }
                b"v" | b"t" if cell.is_some() && !is_empty => {
                    capture = true;
                    text.clear();
                }
                b"mergeCell" => {
                    let reference = attr(e, b"ref").unwrap_or_default();
                    let (a, b) = reference
                        .split_once(':')
                        .unwrap_or((&reference, &reference));
                    match (parse_cell_ref(a), parse_cell_ref(b)) {
                        (Some((r0, c0)), Some((r1, c1))) => raw.merges.push(MergeRange::new(
                            CellRange::new(r0.min(r1), r0.max(r1)),
                            CellRange::new(c0.min(c1), c0.max(c1)),
                        )),
                        _ => {
                            return Err(xml_error(
                                part,
                                format!("bad merge reference {reference:?}"),
                            ))
                        }
                    }
                }
                _ => {}
            }
            continue;
        }
        match event {
            Event::Text(t) if capture => {
                text.push_str(&t.unescape().map_err(|e| xml_error(part, e))?);
            }
            Event::CData(t) if capture => text.push_str(&String::from_utf8_lossy(&t)),
            Event::End(e) => match e.local_name().as_ref() {
                b"v" | b"t" if capture => {
                    capture = false;
                    value.get_or_insert_with(String::new).push_str(&text);
                }
                b"c" => {
                    if let Some((pos, kind)) = cell.take() {
                        if let Some(v) = value.take() {
                            if let Some(cv) = decode_value(kind.as_deref(), v, strings)? {
                                raw.cells.insert(pos, cv);
                            }
                        }
                    }
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(raw)
}

fn decode_value(
    kind: Option<&str>,
    v: String,
    strings: &[String],
) -> Result<Option<CellValue>, WeakSupError> {
    let text = |s: String| {
        if s.trim().is_empty() {
            None
        } else {
            Some(CellValue::Text(s))
        }
    };
    Ok(match kind {
        None | Some("n") => match v.trim().parse::<f64>() {
            Ok(n) => Some(CellValue::Number(n)),
            Err(_) => text(v),
        },
        Some("s") => {
            let idx: usize = v
                .trim()
                .parse()
                .map_err(|_| xml_error("worksheet", format!("bad shared string index {v:?}")))?;
            let s = strings
                .get(idx)
                .ok_or_else(|| xml_error("worksheet", format!("shared string {idx} missing")))?;
            text(s.clone())
        }
        Some("b") => Some(CellValue::Text(
            if v.trim() == "1" { "TRUE" } else { "FALSE" }.into(),
        )),
        Some(_) => text(v),
    })
}

/// Reads `sheet_name` from an .xlsx package.
pub fn load_sheet(bytes: &[u8], sheet_name: &str) -> Result<Sheet, WeakSupError> {
    if bytes.starts_with(&OLE_MAGIC) {
        return Err(WeakSupError::UnsupportedFeature(
            "encrypted or legacy binary workbook (OLE container)".into(),
        ));
    }
    let mut zip = ZipArchive::new(Cursor::new(bytes))
        .map_err(|e| WeakSupError::NotASpreadsheet(format!("not a zip package: {e}")))?;
    if read_entry(&mut zip, "EncryptionInfo")?.is_some() {
        return Err(WeakSupError::UnsupportedFeature(
            "encrypted workbook".into(),
        ));
    }
    let workbook = read_entry(&mut zip, "xl/workbook.xml")?
        .ok_or_else(|| WeakSupError::NotASpreadsheet("missing xl/workbook.xml".into()))?;
    let sheets = workbook_sheets(&workbook)?;
    let (_, rid) = sheets
        .iter()
        .find(|(name, _)| name == sheet_name)
        .ok_or_else(|| WeakSupError::SheetNotFound(sheet_name.to_string()))?;
    let rels = read_entry(&mut zip, "xl/_rels/workbook.xml.rels")?
        .ok_or_else(|| WeakSupError::NotASpreadsheet("missing workbook relationships".into()))?;
    let target = relationship_target(&rels, rid)?
        .ok_or_else(|| WeakSupError::NotASpreadsheet(format!("relationship {rid} missing")))?;
    let path = match target.strip_prefix('/') {
        Some(abs) => abs.to_string(),
        None => format!("xl/{target}"),
    };
    let strings = match read_entry(&mut zip, "xl/sharedStrings.xml")? {
        Some(xml) => shared_strings(&xml)?,
        None => Vec::new(),
    };
    let xml = read_entry(&mut zip, &path)?
        .ok_or_else(|| WeakSupError::NotASpreadsheet(format!("missing worksheet part {path}")))?;
    let raw = parse_worksheet(&xml, &strings)?;

    let n_rows = raw
        .cells
        .keys()
        .map(|(r, _)| r + 1)
        .chain(raw.merges.iter().map(|m| m.rows.hi + 1))
        .chain(raw.dimension.map(|(r, _)| r + 1))
        .max()
        .unwrap_or(0);
    let n_cols = raw
        .cells
        .keys()
        .map(|(_, c)| c + 1)
        .chain(raw.merges.iter().map(|m| m.cols.hi + 1))
        .chain(raw.dimension.map(|(_, c)| c + 1))
        .max()
        .unwrap_or(0);

    let default_width = raw
        .default_col_width
        .map_or(DEFAULT_COL_WIDTH, stored_width_to_chars);
    let mut col_widths = vec![default_width; n_cols as usize];
    for (lo, hi, width) in &raw.col_specs {
        for c in *lo..=(*hi).min(n_cols.saturating_sub(1)) {
            if let Some(slot) = col_widths.get_mut(c as usize) {
                *slot = stored_width_to_chars(*width);
            }
        }
    }
    let default_height = raw
        .default_row_height
        .filter(|h| *h > 0.0)
        .unwrap_or(DEFAULT_ROW_HEIGHT);
    let row_heights = (0..n_rows)
        .map(|r| {
            raw.row_heights
                .get(&r)
                .copied()
                .filter(|h| *h > 0.0)
                .unwrap_or(default_height)
        })
        .collect();

    let sheet = Sheet {
        cells: raw.cells,
        n_rows,
        n_cols,
        col_widths,
        row_heights,
        merged_ranges: raw.merges,
    };
    sheet.check()?;
    Ok(sheet)
}

fn escape(s: &str) -> String {
    quick_xml::escape::escape(s).into_owned()
}

fn worksheet_xml(sheet: &Sheet) -> String {
    let mut x = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n\
         <worksheet xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" \
         xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\">",
    );
    if sheet.n_rows > 0 && sheet.n_cols > 0 {
        x.push_str(&format!(
            "<dimension ref=\"A1:{}\"/>",
            format_cell_ref(sheet.n_rows - 1, sheet.n_cols - 1)
        ));
    }
    x.push_str(&format!(
        "<sheetFormatPr defaultRowHeight=\"{DEFAULT_ROW_HEIGHT}\"/>"
    ));
    if sheet.n_cols > 0 {
        x.push_str("<cols>");
        for (c, w) in sheet.col_widths.iter().enumerate() {
            x.push_str(&format!(
                "<col min=\"{n}\" max=\"{n}\" width=\"{}\" customWidth=\"1\"/>",
                chars_to_stored_width(*w),
                n = c + 1
            ));
        }
        x.push_str("</cols>");
    }
    x.push_str("<sheetData>");
    for r in 0..sheet.n_rows {
        x.push_str(&format!(
            "<row r=\"{}\" ht=\"{}\" customHeight=\"1\">",
            r + 1,
            sheet.row_heights[r as usize]
        ));
        for ((_, c), v) in sheet.cells.range((r, 0)..(r + 1, 0)) {
            let reference = format_cell_ref(r, *c);
            match v {
                CellValue::Number(n) => x.push_str(&format!("<c r=\"{reference}\"><v>{n}</v></c>")),
                CellValue::Text(t) => x.push_str(&format!(
                    "<c r=\"{reference}\" t=\"inlineStr\"><is><t xml:space=\"preserve\">{}</t></is></c>",
                    escape(t)
                )),
            }
        }
        x.push_str("</row>");
    }
    x.push_str("</sheetData>");
    if !sheet.merged_ranges.is_empty() {
        x.push_str(&format!(
            "<mergeCells count=\"{}\">",
            sheet.merged_ranges.len()
        ));
        for m in &sheet.merged_ranges {
            x.push_str(&format!(
                "<mergeCell ref=\"{}:{}\"/>",
                format_cell_ref(m.rows.lo, m.cols.lo),
                format_cell_ref(m.rows.hi, m.cols.hi)
            ));
        }
        x.push_str("</mergeCells>");
    }
    x.push_str("</worksheet>");
    x
}

/// Writes a minimal .xlsx package with one worksheet per `(name, sheet)`.
///
/// Text is stored inline; widths, heights and merges are preserved.
pub fn write_xlsx(sheets: &[(&str, &Sheet)]) -> Vec<u8> {
    let mut zip = zip::ZipWriter::new(Cursor::new(Vec::new()));
    let opts = SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    let mut put = |name: &str, body: &str| {
        zip.start_file(name, opts).expect("zip entry");
        zip.write_all(body.as_bytes()).expect("in-memory write");
    };

    let mut types = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n\
         <Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">\
         <Default Extension=\"rels\" ContentType=\"application/vnd.openxmlformats-package.relationships+xml\"/>\
         <Default Extension=\"xml\" ContentType=\"application/xml\"/>\
         <Override PartName=\"/xl/workbook.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml\"/>",
    );
    for i in 1..=sheets.len() {
        types.push_str(&format!(
            "<Override PartName=\"/xl/worksheets/sheet{i}.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml\"/>"
        ));
    }
    types.push_str("</Types>");
    put("[Content_Types].xml", &types);
    put(
        "_rels/.rels",
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n\
         <Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">\
         <Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument\" Target=\"xl/workbook.xml\"/>\
         </Relationships>",
    );

    let mut workbook = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n\
         <workbook xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" \
         xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\"><sheets>",
    );
    let mut rels = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n\
         <Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">",
    );
    for (i, (name, _)) in sheets.iter().enumerate() {
        let n = i + 1;
        workbook.push_str(&format!(
            "<sheet name=\"{}\" sheetId=\"{n}\" r:id=\"rId{n}\"/>",
            escape(name)
        ));
        rels.push_str(&format!(
            "<Relationship Id=\"rId{n}\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet\" Target=\"worksheets/sheet{n}.xml\"/>"
        ));
    }
    workbook.push_str("</sheets></workbook>");
    rels.push_str("</Relationships>");
    put("xl/workbook.xml", &workbook);
    put("xl/_rels/workbook.xml.rels", &rels);
    for (i, (_, sheet)) in sheets.iter().enumerate() {
        put(
            &format!("xl/worksheets/sheet{}.xml", i + 1),
            &worksheet_xml(sheet),
        );
    }
    zip.finish().expect("zip finish").into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weaksup::geometry::column_px;

    #[test]
    fn cell_refs() {
        assert_eq!(parse_cell_ref("A1"), Some((0, 0)));
        assert_eq!(parse_cell_ref("B1"), Some((0, 1)));
        assert_eq!(parse_cell_ref("AA10"), Some((9, 26)));
        assert_eq!(parse_cell_ref("A0"), None);
        assert_eq!(parse_cell_ref("12"), None);
        for (r, c) in [(0, 0), (5, 25), (3, 26), (99, 701), (0, 702)] {
            assert_eq!(parse_cell_ref(&format_cell_ref(r, c)), Some((r, c)));
        }
    }

    #[test]
    fn default_width_survives_storage() {
        assert_eq!(chars_to_stored_width(8.43), 9.140625);
        assert_eq!(stored_width_to_chars(9.140625), 8.43);
        for px in 6..200u32 {
            let chars = (px as f64 - 5.0) / 7.0;
            let back = stored_width_to_chars(chars_to_stored_width(chars));
            assert_eq!(column_px(back, 96.0), px, "px {px}");
        }
    }

    fn two_by_two() -> Sheet {
        let mut s = Sheet::new(2, 2);
        s.set(0, 0, CellValue::Text("a".into()));
        s.set(0, 1, CellValue::Text("b".into()));
        s.set(1, 0, CellValue::Text("c".into()));
        s.set(1, 1, CellValue::Text("d".into()));
        s
    }

    #[test]
    fn reads_values_and_extents() {
        let bytes = write_xlsx(&[("Data", &two_by_two())]);
        let s = load_sheet(&bytes, "Data").unwrap();
        assert_eq!((s.n_rows, s.n_cols), (2, 2));
        assert_eq!(s.cells.len(), 4);
        assert_eq!(s.value(1, 1), Some(&CellValue::Text("d".into())));
        assert!(s.merged_ranges.is_empty());
        assert_eq!(s.col_widths, vec![8.43, 8.43]);
        assert_eq!(s.row_heights, vec![15.0, 15.0]);
    }

    #[test]
    fn reads_merge() {
        let mut sheet = two_by_two();
        sheet.cells.remove(&(0, 1));
        sheet
            .merged_ranges
            .push(MergeRange::new(CellRange::single(0), CellRange::new(0, 1)));
        let s = load_sheet(&write_xlsx(&[("S", &sheet)]), "S").unwrap();
        assert_eq!(
            s.merged_ranges,
            vec![MergeRange::new(CellRange::new(0, 0), CellRange::new(0, 1))]
        );
    }

    #[test]
    fn missing_sheet_and_garbage() {
        let bytes = write_xlsx(&[("Data", &two_by_two())]);
        assert_eq!(
            load_sheet(&bytes, "X"),
            Err(WeakSupError::SheetNotFound("X".into()))
        );
        assert!(matches!(
            load_sheet(b"hello", "Data"),
            Err(WeakSupError::NotASpreadsheet(_))
        ));
        let mut ole = OLE_MAGIC.to_vec();
        ole.extend([0; 64]);
        assert!(matches!(
            load_sheet(&ole, "Data"),
            Err(WeakSupError::UnsupportedFeature(_))
        ));
    }

    #[test]
    fn shared_strings_and_numbers() {
        let sheet_xml = r#"<?xml version="1.0"?>
<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">
<sheetFormatPr baseColWidth="10" defaultRowHeight="16"/>
<cols><col min="2" max="3" width="20.7109375" customWidth="1"/></cols>
<sheetData>
<row r="1"><c r="A1" t="s"><v>0</v></c></row>
<row r="3" ht="30"><c r="A3" t="s"><v>1</v></c><c r="C3"><v>1234.5</v></c><c r="D3" s="1"/></row>
</sheetData>
</worksheet>"#;
        let strings = shared_strings(
            r#"<sst><si><t>Title &amp; more</t></si><si><r><t>ri</t></r><r><t>ch</t></r></si></sst>"#,
        )
        .unwrap();
        assert_eq!(
            strings,
            vec!["Title & more".to_string(), "rich".to_string()]
        );
        let raw = parse_worksheet(sheet_xml, &strings).unwrap();
        assert_eq!(raw.cells.get(&(2, 2)), Some(&CellValue::Number(1234.5)));
        assert_eq!(
            raw.cells.get(&(2, 0)),
            Some(&CellValue::Text("rich".into()))
        );
        assert_eq!(raw.cells.len(), 3);
        assert_eq!(raw.row_heights.get(&2), Some(&30.0));
        assert_eq!(raw.col_specs, vec![(1, 2, 20.7109375)]);
        assert_eq!(raw.default_row_height, Some(16.0));
    }
}
