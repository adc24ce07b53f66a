//! Regression design assembly.
//!
//! Column order is fixed: `intercept`, `dem_debate`, `rep_debate`,
//! `followers_millions`, `weekend`, then one `topic_k` column per topic
//! except the baseline, then `hour_hh` dummies for every hour except the
//! baseline hour.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AnalysisRow;
use crate::matrix::Matrix;

pub const BASE_COLUMNS: [&str; 5] = [
    "intercept",
    "dem_debate",
    "rep_debate",
    "followers_millions",
    "weekend",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    pub baseline_topic: usize,
    pub baseline_hour: u32,
    pub hour_controls: bool,
    /// When false the topic columns are omitted entirely (the no-topic comparison model).
    pub include_topics: bool,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            baseline_topic: 0,
            baseline_hour: 0,
            hour_controls: true,
            include_topics: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub y: Vec<u64>,
    pub x: Matrix,
    pub column_names: Vec<String>,
    pub baseline_topic: Option<usize>,
    pub baseline_hour: Option<u32>,
    pub row_ids: Vec<String>,
}

pub fn topic_column(k: usize) -> String {
    format!("topic_{k}")
}

pub fn hour_column(h: u32) -> String {
    format!("hour_{h:02}")
}

impl DesignMatrix {
    pub fn new(
        y: Vec<u64>,
        x: Matrix,
        column_names: Vec<String>,
        row_ids: Vec<String>,
    ) -> Result<Self> {
        if y.len() != x.rows() || row_ids.len() != x.rows() {
            return Err(Error::Dimension(format!(
                "{} responses, {} row ids, {} matrix rows",
                y.len(),
                row_ids.len(),
                x.rows()
            )));
        }
        if column_names.len() != x.cols() {
            return Err(Error::Dimension(format!(
                "{} column names for {} columns",
                column_names.len(),
                x.cols()
            )));
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        Ok(Self {
            y,
            x,
            column_names,
            baseline_topic: None,
            baseline_hour: None,
            row_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Indices of columns that are identically zero.
    pub fn zero_columns(&self) -> Vec<usize> {
        (0..self.p())
            .filter(|&j| self.x.column(j).all(|v| v == 0.0))
            .collect()
    }

    pub fn drop_columns(&self, drop: &[usize]) -> DesignMatrix {
        let keep: Vec<usize> = (0..self.p()).filter(|j| !drop.contains(j)).collect();
        DesignMatrix {
            y: self.y.clone(),
            x: self.x.select_columns(&keep),
            column_names: keep.iter().map(|&j| self.column_names[j].clone()).collect(),
            baseline_topic: self.baseline_topic,
            baseline_hour: self.baseline_hour,
            row_ids: self.row_ids.clone(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> DesignMatrix {
        DesignMatrix {
            y: rows.iter().map(|&i| self.y[i]).collect(),
            x: self.x.select_rows(rows),
            column_names: self.column_names.clone(),
            baseline_topic: self.baseline_topic,
            baseline_hour: self.baseline_hour,
            row_ids: rows.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }

    /// Indices of the topic-weight columns, in column order.
    pub fn topic_columns(&self) -> Vec<usize> {
        (0..self.p())
            .filter(|&j| self.column_names[j].starts_with("topic_"))
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["row_id".to_string(), "y".to_string()];
        header.extend(self.column_names.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut record = vec![self.row_ids[i].clone(), self.y[i].to_string()];
            record.extend(self.x.row(i).iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io("<design csv>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    /// Parse the CSV export. Baseline metadata is not part of the CSV and
    /// comes back as `None`.
    pub fn from_csv(content: &str) -> Result<DesignMatrix> {
        let mut reader = csv::Reader::from_reader(content.as_bytes());
        let header = reader.headers()?.clone();
        if header.len() < 2 || &header[0] != "row_id" || &header[1] != "y" {
            return Err(Error::malformed(1, "header", "expected `row_id,y,...`"));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let (mut y, mut ids, mut data) = (Vec::new(), Vec::new(), Vec::new());
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            ids.push(record[0].to_string());
            y.push(
                record[1]
                    .parse()
                    .map_err(|_| Error::malformed(line, "y", "not a count"))?,
            );
            for (j, field) in record.iter().skip(2).enumerate() {
                data.push(
                    field
                        .parse::<f64>()
                        .map_err(|_| Error::malformed(line, &names[j], "not a number"))?,
                );
            }
        }
        let x = Matrix::from_row_major(y.len(), names.len(), data)?;
        DesignMatrix::new(y, x, names, ids)
    }
}

/// Rows that carry a follower value; the others cannot enter the regression.
pub fn complete_rows(rows: &[AnalysisRow]) -> Vec<AnalysisRow> {
    rows.iter()
        .filter(|r| r.followers_millions.is_some())
        .cloned()
        .collect()
}

/// Build the regression design. `theta` rows are matched to analysis rows
/// through `doc_ids` (the tweet ids the topic model was fitted on).
pub fn build_design(
    rows: &[AnalysisRow],
    doc_ids: &[String],
    theta: &Matrix,
    options: &DesignOptions,
) -> Result<DesignMatrix> {
    let k = theta.cols();
    if options.include_topics {
        if k < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 topics, got {k}"
            )));
        }
        if options.baseline_topic >= k {
            return Err(Error::InvalidConfig(format!(
                "baseline topic {} out of range for {k} topics",
                options.baseline_topic
            )));
        }
    }
    if options.baseline_hour > 23 {
        return Err(Error::InvalidConfig(format!(
            "baseline hour {} out of range",
            options.baseline_hour
        )));
    }
    if doc_ids.len() != theta.rows() {
        return Err(Error::Dimension(format!(
            "{} doc ids for {} theta rows",
            doc_ids.len(),
            theta.rows()
        )));
    }
    let position: HashMap<&str, usize> = doc_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut names: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    let topic_cols: Vec<usize> = if options.include_topics {
        (0..k).filter(|&t| t != options.baseline_topic).collect()
    } else {
        Vec::new()
    };
    names.extend(topic_cols.iter().map(|&t| topic_column(t)));
    let hours: Vec<u32> = if options.hour_controls {
        (0..24).filter(|&h| h != options.baseline_hour).collect()
    } else {
        Vec::new()
    };
    names.extend(hours.iter().map(|&h| hour_column(h)));

    let p = names.len();
    let mut data = Vec::with_capacity(rows.len() * p);
    let mut y = Vec::with_capacity(rows.len());
    let mut ids = Vec::with_capacity(rows.len());
    for row in rows {
        let followers = row.followers_millions.ok_or_else(|| {
            Error::Dimension(format!(
                "tweet {} has no follower value; drop incomplete rows first",
                row.tweet.id
            ))
        })?;
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        data.extend_from_slice(&[
            1.0,
            flag(row.dem_debate),
            flag(row.rep_debate),
            followers,
            flag(row.is_weekend),
        ]);
        if !topic_cols.is_empty() {
            let d = *position.get(row.tweet.id.as_str()).ok_or_else(|| {
                Error::Dimension(format!("tweet {} has no topic weights", row.tweet.id))
            })?;
            let weights = theta.row(d);
            data.extend(topic_cols.iter().map(|&t| weights[t]));
        }
        data.extend(hours.iter().map(|&h| flag(row.local_hour == h)));
        y.push(row.tweet.likes);
        ids.push(row.tweet.id.clone());
    }
    let x = Matrix::from_row_major(rows.len(), p, data)?;
    let mut design = DesignMatrix::new(y, x, names, ids)?;
    design.baseline_topic = options.include_topics.then_some(options.baseline_topic);
    design.baseline_hour = options.hour_controls.then_some(options.baseline_hour);
    let zero: Vec<&str> = design
        .zero_columns()
        .into_iter()
        .map(|j| design.column_names[j].as_str())
        .collect();
    if !zero.is_empty() {
        log::warn!("design has all-zero columns: {}", zero.join(", "));
    }
    Ok(design)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variable: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

fn summarize(variable: &str, values: &[f64]) -> SummaryRow {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    SummaryRow {
        variable: variable.to_string(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        sd,
        n,
    }
}

/// Min, max, mean, sample standard deviation and count of the main variables.
/// Followers are summarized over the rows that carry a value.
pub fn summary_stats(rows: &[AnalysisRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no rows to summarize".into()));
    }
    let likes: Vec<f64> = rows.iter().map(|r| r.tweet.likes as f64).collect();
    let dem: Vec<f64> = rows
        .iter()
        .map(|r| if r.dem_debate { 1.0 } else { 0.0 })
        .collect();
    let rep: Vec<f64> = rows
        .iter()
        .map(|r| if r.rep_debate { 1.0 } else { 0.0 })
        .collect();
    let followers: Vec<f64> = rows.iter().filter_map(|r| r.followers_millions).collect();
    let mut out = vec![
        summarize("Likes", &likes),
        summarize("Democratic Debates", &dem),
        summarize("Republican Debates", &rep),
    ];
    if !followers.is_empty() {
        out.push(summarize("Followers (million)", &followers));
    } else {
        out.push(SummaryRow {
            variable: "Followers (million)".into(),
            min: f64::NAN,
            max: f64::NAN,
            mean: f64::NAN,
            sd: f64::NAN,
            n: 0,
        });
    }
    Ok(out)
}
