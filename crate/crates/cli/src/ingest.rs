//! CSV inputs: a feature-by-subject data matrix, a subject-to-group label
//! file and a twin pair file.
//!
//! The matrix header row holds subject ids. When its first cell is empty,
//! the first column holds feature ids instead of data (the layout written by
//! most dataframe libraries). Label and pair files have two columns and may
//! contain `#` comment lines.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

fn reader(bytes: &[u8], has_headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes)
}

fn line_of(record: &csv::StringRecord) -> Option<u64> {
    record.position().map(|p| p.line())
}

fn csv_error(source: &str, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line());
    CliError::at(source, line, None, e)
}

/// Real-valued matrix with one row per feature and one column per subject.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    subjects: Vec<String>,
    features: Option<Vec<String>>,
    rows: Vec<Vec<f64>>,
}

impl DataMatrix {
    pub fn new(subjects: Vec<String>, features: Option<Vec<String>>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let source = "matrix";
        check_unique(&subjects)
            .map_err(|id| CliError::at(source, None, None, format!("duplicate subject id '{id}'")))?;
        if subjects.is_empty() || rows.is_empty() {
            return Err(CliError::at(
                source,
                None,
                None,
                "matrix has no subjects or no features",
            ));
        }
        if let Some(f) = &features {
            if f.len() != rows.len() {
                return Err(CliError::at(
                    source,
                    None,
                    None,
                    format!("{} feature ids for {} rows", f.len(), rows.len()),
                ));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != subjects.len() {
                return Err(CliError::at(
                    source,
                    None,
                    None,
                    format!("row {r} has {} values, expected {}", row.len(), subjects.len()),
                ));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(CliError::at(
                    source,
                    None,
                    None,
                    format!("row {r}, subject '{}': non-finite value", subjects[c]),
                ));
            }
        }
        Ok(Self {
            subjects,
            features,
            rows,
        })
    }

    pub fn parse(bytes: &[u8], source: &str) -> Result<Self> {
        let mut rdr = reader(bytes, true);
        let header = rdr.headers().map_err(|e| csv_error(source, e))?.clone();
        if header.is_empty() {
            return Err(CliError::at(source, Some(1), None, "missing header row of subject ids"));
        }
        let labelled = header.get(0) == Some("");
        let offset = usize::from(labelled);
        let subjects: Vec<String> = header.iter().skip(offset).map(str::to_string).collect();
        if subjects.is_empty() {
            return Err(CliError::at(source, Some(1), None, "header row names no subjects"));
        }
        for (c, id) in subjects.iter().enumerate() {
            if id.is_empty() {
                return Err(CliError::at(source, Some(1), Some(c + offset + 1), "empty subject id"));
            }
        }
        check_unique(&subjects)
            .map_err(|id| CliError::at(source, Some(1), None, format!("duplicate subject id '{id}'")))?;

        let mut features = labelled.then(Vec::new);
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| csv_error(source, e))?;
            let line = line_of(&record);
            if record.len() != subjects.len() + offset {
                return Err(CliError::at(
                    source,
                    line,
                    None,
                    format!("expected {} fields, found {}", subjects.len() + offset, record.len()),
                ));
            }
            if let Some(f) = features.as_mut() {
                f.push(record[0].to_string());
            }
            let mut row = Vec::with_capacity(subjects.len());
            for (c, cell) in record.iter().enumerate().skip(offset) {
                let subject = &subjects[c - offset];
                let v: f64 = cell.parse().map_err(|_| {
                    CliError::at(
                        source,
                        line,
                        Some(c + 1),
                        format!("subject '{subject}': cannot parse '{cell}' as a number"),
                    )
                })?;
                if !v.is_finite() {
                    return Err(CliError::at(
                        source,
                        line,
                        Some(c + 1),
                        format!("subject '{subject}': non-finite value '{cell}'"),
                    ));
                }
                row.push(v);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(CliError::at(source, None, None, "no feature rows after the header"));
        }
        Ok(Self {
            subjects,
            features,
            rows,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = Vec::with_capacity(self.subjects.len() + 1);
        if self.features.is_some() {
            header.push("");
        }
        header.extend(self.subjects.iter().map(String::as_str));
        w.write_record(&header).map_err(|e| CliError::Output(e.to_string()))?;
        for (r, row) in self.rows.iter().enumerate() {
            let mut cells: Vec<String> = Vec::with_capacity(row.len() + 1);
            if let Some(f) = &self.features {
                cells.push(f[r].clone());
            }
            cells.extend(row.iter().map(f64::to_string));
            w.write_record(&cells).map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn feature_ids(&self) -> Option<&[String]> {
        self.features.as_deref()
    }

    pub fn n_features(&self) -> usize {
        self.rows.len()
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn row(&self, feature: usize) -> &[f64] {
        &self.rows[feature]
    }

    pub fn feature_id(&self, feature: usize) -> Option<String> {
        self.features.as_ref().map(|f| f[feature].clone())
    }

    /// Values of `columns` for one feature, in the given order.
    pub fn select(&self, feature: usize, columns: &[usize]) -> Vec<f64> {
        columns.iter().map(|&c| self.rows[feature][c]).collect()
    }

    fn column_index(&self) -> HashMap<&str, usize> {
        self.subjects.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }
}

fn check_unique(ids: &[String]) -> std::result::Result<(), String> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(id.clone());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    X,
    Y,
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "x" | "X" => Ok(Group::X),
            "y" | "Y" => Ok(Group::Y),
            other => Err(format!("group must be 'x' or 'y', found '{other}'")),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::X => "x",
            Group::Y => "y",
        })
    }
}

/// Subject-to-group assignment, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLabels {
    labels: Vec<(String, Group)>,
}

/// Matrix columns of each group, in matrix order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupColumns {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl GroupLabels {
    pub fn new(labels: Vec<(String, Group)>) -> Result<Self> {
        let ids: Vec<String> = labels.iter().map(|(s, _)| s.clone()).collect();
        check_unique(&ids).map_err(|id| CliError::Input(format!("subject '{id}' labeled twice")))?;
        Ok(Self { labels })
    }

    /// Two columns, subject id then group (`x` or `y`). A first row whose
    /// group cell reads `group` is taken as a header.
    pub fn parse(bytes: &[u8], source: &str) -> Result<Self> {
        let mut labels = Vec::new();
        let mut seen: HashMap<String, u64> = HashMap::new();
        for (k, record) in reader(bytes, false).records().enumerate() {
            let record = record.map_err(|e| csv_error(source, e))?;
            let line = line_of(&record);
            if record.len() != 2 {
                return Err(CliError::at(
                    source,
                    line,
                    None,
                    format!("expected 2 fields (subject, group), found {}", record.len()),
                ));
            }
            if k == 0 && record[1].eq_ignore_ascii_case("group") {
                continue;
            }
            let id = record[0].to_string();
            if id.is_empty() {
                return Err(CliError::at(source, line, Some(1), "empty subject id"));
            }
            let group: Group = record[1].parse().map_err(|e| CliError::at(source, line, Some(2), e))?;
            if let Some(first) = seen.insert(id.clone(), line.unwrap_or(0)) {
                return Err(CliError::at(
                    source,
                    line,
                    Some(1),
                    format!("subject '{id}' already labeled on line {first}"),
                ));
            }
            labels.push((id, group));
        }
        Ok(Self { labels })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (id, g) in &self.labels {
            w.write_record([id.as_str(), &g.to_string()])
                .map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn labels(&self) -> &[(String, Group)] {
        &self.labels
    }

    /// Requires every matrix subject to be labeled, no label for an unknown
    /// subject, and at least two subjects per group.
    pub fn resolve(&self, matrix: &DataMatrix, source: &str) -> Result<GroupColumns> {
        let by_id: HashMap<&str, Group> = self.labels.iter().map(|(s, g)| (s.as_str(), *g)).collect();
        let columns = matrix.column_index();
        if let Some((id, _)) = self.labels.iter().find(|(s, _)| !columns.contains_key(s.as_str())) {
            return Err(CliError::at(
                source,
                None,
                None,
                format!("label for subject '{id}' which is not in the data matrix"),
            ));
        }
        let mut out = GroupColumns {
            x: Vec::new(),
            y: Vec::new(),
        };
        for (c, subject) in matrix.subjects().iter().enumerate() {
            match by_id.get(subject.as_str()) {
                Some(Group::X) => out.x.push(c),
                Some(Group::Y) => out.y.push(c),
                None => {
                    return Err(CliError::at(
                        source,
                        None,
                        None,
                        format!("subject '{subject}' (data column {}) has no group label", c + 1),
                    ))
                }
            }
        }
        for (name, cols) in [("x", &out.x), ("y", &out.y)] {
            if cols.len() < 2 {
                return Err(CliError::at(
                    source,
                    None,
                    None,
                    format!("group {name} has {} subjects, need at least 2", cols.len()),
                ));
            }
        }
        Ok(out)
    }
}

/// Twin pairs as (id A, id B).
#[derive(Debug, Clone, PartialEq)]
pub struct PairLabels {
    pairs: Vec<(String, String)>,
}

impl PairLabels {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (a, b) in &pairs {
            if a == b {
                return Err(CliError::Input(format!("subject '{a}' paired with itself")));
            }
            for id in [a, b] {
                if !seen.insert(id.as_str()) {
                    return Err(CliError::Input(format!("subject '{id}' appears in more than one pair")));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn parse(bytes: &[u8], source: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut seen: HashMap<String, u64> = HashMap::new();
        for record in reader(bytes, false).records() {
            let record = record.map_err(|e| csv_error(source, e))?;
            let line = line_of(&record);
            if record.len() != 2 {
                return Err(CliError::at(
                    source,
                    line,
                    None,
                    format!("expected 2 fields (id A, id B), found {}", record.len()),
                ));
            }
            let (a, b) = (record[0].to_string(), record[1].to_string());
            for (c, id) in [&a, &b].into_iter().enumerate() {
                if id.is_empty() {
                    return Err(CliError::at(source, line, Some(c + 1), "empty subject id"));
                }
            }
            if a == b {
                return Err(CliError::at(
                    source,
                    line,
                    None,
                    format!("subject '{a}' paired with itself"),
                ));
            }
            for (c, id) in [&a, &b].into_iter().enumerate() {
                if let Some(first) = seen.insert(id.clone(), line.unwrap_or(0)) {
                    return Err(CliError::at(
                        source,
                        line,
                        Some(c + 1),
                        format!("subject '{id}' already paired on line {first}"),
                    ));
                }
            }
            pairs.push((a, b));
        }
        if pairs.is_empty() {
            return Err(CliError::at(source, None, None, "no pairs"));
        }
        Ok(Self { pairs })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (a, b) in &self.pairs {
            w.write_record([a, b]).map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// Matrix columns `(a, b)` of each pair. Subjects in no pair are ignored.
    pub fn resolve(&self, matrix: &DataMatrix, source: &str) -> Result<Vec<(usize, usize)>> {
        let columns = matrix.column_index();
        self.pairs
            .iter()
            .map(|(a, b)| {
                let find = |id: &str| {
                    columns.get(id).copied().ok_or_else(|| {
                        CliError::at(
                            source,
                            None,
                            None,
                            format!("paired subject '{id}' is not in the data matrix"),
                        )
                    })
                };
                Ok((find(a)?, find(b)?))
            })
            .collect()
    }
}
