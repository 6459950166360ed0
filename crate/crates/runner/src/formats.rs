//! Text formats for dictionaries, property codes, confusion matrices,
//! scenario points and cluster assignments.

use std::fs;
use std::path::Path;

use consensus_core::cluster::Clustering;
use consensus_core::pareto::ScenarioPoint;
use consensus_core::relation::{normalize_label, ConfusionMatrix, SynonymDictionary, SynonymGroup};

use crate::dataset::DataError;

pub const DICTIONARY_HEADER: &str = "#! synonym-groups v1";
pub const PCODE_HEADER: &str = "#! pcode-table v1";

fn read(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Io { path: path.into(), source })
}

fn schema(path: &Path, line: usize, message: impl Into<String>) -> DataError {
    DataError::Schema { path: path.into(), line, message: message.into() }
}

/// Content lines after a required header, skipping blanks and `#` comments.
fn body_lines<'a>(path: &Path, text: &'a str, header: &str) -> Result<Vec<(usize, &'a str)>, DataError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == header => {}
        _ => return Err(schema(path, 1, format!("expected header `{header}`"))),
    }
    Ok(lines
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

/// `group: label, label, ...` per line.
pub fn parse_dictionary(path: &Path, text: &str, version: &str) -> Result<SynonymDictionary, DataError> {
    let mut groups = Vec::new();
    for (line, content) in body_lines(path, text, DICTIONARY_HEADER)? {
        let (name, labels) = content
            .split_once(':')
            .ok_or_else(|| schema(path, line, "expected `group: label, label`"))?;
        let labels: std::collections::BTreeSet<String> =
            labels.split(',').map(normalize_label).filter(|l| !l.is_empty()).collect();
        if name.trim().is_empty() || labels.is_empty() {
            return Err(schema(path, line, "group needs a name and at least one label"));
        }
        groups.push(SynonymGroup { name: name.trim().to_string(), labels });
    }
    SynonymDictionary::new(version, groups).map_err(|e| schema(path, 1, e.to_string()))
}

pub fn read_dictionary(path: &Path) -> Result<SynonymDictionary, DataError> {
    let version = path.file_stem().map_or_else(|| "dictionary".into(), |s| s.to_string_lossy().into_owned());
    parse_dictionary(path, &read(path)?, &version)
}

pub fn render_dictionary(dict: &SynonymDictionary) -> String {
    let mut out = format!("{DICTIONARY_HEADER}\n");
    for g in dict.groups() {
        out.push_str(&format!("{}: {}\n", g.name, g.labels.iter().cloned().collect::<Vec<_>>().join(", ")));
    }
    out
}

/// `P131 located_in_admin` per line.
pub fn read_pcodes(path: &Path) -> Result<Vec<(String, String)>, DataError> {
    let text = read(path)?;
    body_lines(path, &text, PCODE_HEADER)?
        .into_iter()
        .map(|(line, content)| {
            let mut parts = content.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(code), Some(label), None) if consensus_core::relation::labels::is_property_code(code) => {
                    Ok((code.to_ascii_uppercase(), normalize_label(label)))
                }
                _ => Err(schema(path, line, "expected `P<digits> label`")),
            }
        })
        .collect()
}

/// Header row `predicted\gold,<labels>`, then one row per predicted label.
pub fn write_confusion(path: &Path, m: &ConfusionMatrix) -> Result<(), DataError> {
    let io = |source| DataError::Io { path: path.into(), source };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    let mut header = vec!["predicted\\gold".to_string()];
    header.extend(m.labels.iter().cloned());
    w.write_record(&header).map_err(|e| io(e.into()))?;
    for (label, row) in m.labels.iter().zip(&m.counts) {
        let mut record = vec![label.clone()];
        record.extend(row.iter().map(u64::to_string));
        w.write_record(&record).map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}

pub fn read_confusion(path: &Path) -> Result<ConfusionMatrix, DataError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| schema(path, 1, e.to_string()))?;
    let header = r.headers().map_err(|e| schema(path, 1, e.to_string()))?.clone();
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut counts = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| schema(path, i + 2, e.to_string()))?;
        if rec.get(0) != labels.get(i).map(String::as_str) {
            return Err(schema(path, i + 2, "row labels must follow the header order"));
        }
        let row: Result<Vec<u64>, _> = rec.iter().skip(1).map(str::parse).collect();
        counts.push(row.map_err(|e| schema(path, i + 2, format!("bad count: {e}")))?);
    }
    ConfusionMatrix::new(labels, counts).map_err(|e| schema(path, 1, e.to_string()))
}

/// Columns `name,relative_cost,em,vram_gb,model_count`; the last two may be blank.
pub fn read_points(path: &Path) -> Result<Vec<ScenarioPoint>, DataError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| schema(path, 1, e.to_string()))?;
    let mut points = Vec::new();
    for (i, rec) in r.deserialize::<ScenarioPoint>().enumerate() {
        let p = rec.map_err(|e| schema(path, i + 2, e.to_string()))?;
        p.validate().map_err(|e| schema(path, i + 2, e.to_string()))?;
        points.push(p);
    }
    if points.is_empty() {
        return Err(schema(path, 1, "no scenario points"));
    }
    Ok(points)
}

pub fn render_assignment(c: &Clustering) -> String {
    let mut out = String::from("label,cluster\n");
    for (label, id) in c.labels.iter().zip(&c.assignment) {
        out.push_str(&format!("{label},{id}\n"));
    }
    out
}
