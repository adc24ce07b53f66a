//! Text, CSV, Markdown and SVG renderings of fitted artifacts.
//!
//! Numbers are printed with three significant figures when their magnitude
//! is below one and with three decimals otherwise (`0.0456`, `0.545`,
//! `4.688`, `-1.270`). The CSV rendering carries the same printed strings as
//! the text rendering.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::countreg::{stars, wald, wald_from, NbFit};
use crate::design::SummaryRow;
use crate::error::{Error, Result};
use crate::lda::{top_words, TopicModel};
use crate::textproc::Vocabulary;

pub const STAR_LEGEND: &str = "* p<0.05, ** p<0.01, *** p<0.001";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Text,
    Csv,
    Markdown,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(format!("unknown table format `{other}`")),
        }
    }
}

pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return "n/a".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs();
    if magnitude < 1.0 {
        let decimals = (2 - magnitude.log10().floor() as i32).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.3}")
    }
}

/// Human-readable label for a design column.
pub fn default_label(column: &str) -> String {
    match column {
        "intercept" => "Constant".into(),
        "dem_debate" => "Democratic Debates".into(),
        "rep_debate" => "Republican Debates".into(),
        "followers_millions" => "Follower Count".into(),
        "weekend" => "Weekend".into(),
        other => {
            if let Some(k) = other.strip_prefix("topic_") {
                format!("Topic {k}")
            } else if let Some(h) = other.strip_prefix("hour_") {
                format!("Hour {h}")
            } else {
                other.to_string()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub name: String,
    pub label: String,
    pub coef: f64,
    pub se: f64,
    pub p_value: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTable {
    pub rows: Vec<TableRow>,
    pub ln_alpha: TableRow,
    pub n: usize,
    pub aic: f64,
    pub legend: String,
    pub warning: Option<String>,
}

fn table_row(name: &str, label: String, estimate: f64, se: Option<f64>) -> TableRow {
    match se {
        Some(se) => {
            let w = wald_from(estimate, se);
            TableRow {
                name: name.to_string(),
                label,
                coef: estimate,
                se,
                p_value: w.p_value,
                stars: stars(w.p_value).to_string(),
            }
        }
        None => TableRow {
            name: name.to_string(),
            label,
            coef: estimate,
            se: f64::NAN,
            p_value: f64::NAN,
            stars: String::new(),
        },
    }
}

pub fn regression_table(fit: &NbFit, labels: &HashMap<String, String>) -> Result<RegressionTable> {
    if fit.coef.is_empty() {
        return Err(Error::EmptyInput("fit has no coefficients".into()));
    }
    let warning = (!fit.cov_reliable).then(|| {
        "WARNING: covariance unreliable; standard errors and stars suppressed".to_string()
    });
    let label = |name: &str| {
        labels
            .get(name)
            .cloned()
            .unwrap_or_else(|| default_label(name))
    };
    let se = |j: usize| {
        fit.cov_reliable
            .then(|| wald(fit, j).map(|w| w.se))
            .transpose()
    };
    let rows = fit
        .column_names
        .iter()
        .enumerate()
        .map(|(j, name)| Ok(table_row(name, label(name), fit.coef[j], se(j)?)))
        .collect::<Result<Vec<_>>>()?;
    let alpha_se = if fit.ln_alpha_at_bound {
        None
    } else {
        se(fit.coef.len())?
    };
    Ok(RegressionTable {
        rows,
        ln_alpha: table_row("ln_alpha", "ln(alpha)".into(), fit.ln_alpha, alpha_se),
        n: fit.n,
        aic: fit.aic,
        legend: STAR_LEGEND.to_string(),
        warning,
    })
}

fn se_cell(row: &TableRow) -> String {
    if row.se.is_finite() {
        format!("({})", format_number(row.se))
    } else {
        "(n/a)".to_string()
    }
}

fn coef_cell(row: &TableRow) -> String {
    format!("{}{}", format_number(row.coef), row.stars)
}

impl RegressionTable {
    pub fn render(&self, format: TableFormat) -> Result<String> {
        match format {
            TableFormat::Text => Ok(self.render_text()),
            TableFormat::Markdown => Ok(self.render_markdown()),
            TableFormat::Csv => self.render_csv(),
        }
    }

    fn all_rows(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().chain(std::iter::once(&self.ln_alpha))
    }

    fn render_text(&self) -> String {
        let width = self
            .all_rows()
            .map(|r| r.label.chars().count())
            .max()
            .unwrap_or(0)
            .max(12)
            + 2;
        let mut out = String::new();
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "{w}");
        }
        let _ = writeln!(out, "Negative Binomial Regression");
        let _ = writeln!(out, "{:<width$}{:>12}  (s.e.)", "likes", "coef");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}{:>12}  {}",
                row.label,
                coef_cell(row),
                se_cell(row)
            );
        }
        let _ = writeln!(out, "{}", "-".repeat(width + 24));
        let r = &self.ln_alpha;
        let _ = writeln!(
            out,
            "{:<width$}{:>12}  {}",
            r.label,
            coef_cell(r),
            se_cell(r)
        );
        let _ = writeln!(out, "{}", "-".repeat(width + 24));
        let _ = writeln!(out, "{:<width$}{:>12}", "Observations", self.n);
        let _ = writeln!(out, "{:<width$}{:>12.1}", "AIC", self.aic);
        let _ = writeln!(out, "Standard errors in parentheses");
        let _ = writeln!(out, "{}", self.legend);
        out
    }

    fn render_markdown(&self) -> String {
        let mut out = String::new();
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "> {w}\n");
        }
        let _ = writeln!(out, "| likes | coef | s.e. |");
        let _ = writeln!(out, "|---|---:|---:|");
        for row in self.all_rows() {
            let stars = row.stars.replace('*', "\\*");
            let _ = writeln!(
                out,
                "| {} | {}{} | {} |",
                row.label,
                format_number(row.coef),
                stars,
                se_cell(row)
            );
        }
        let _ = writeln!(out, "| Observations | {} | |", self.n);
        let _ = writeln!(out, "| AIC | {:.1} | |", self.aic);
        let _ = writeln!(
            out,
            "\nStandard errors in parentheses. {}",
            self.legend.replace('*', "\\*")
        );
        out
    }

    fn render_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "label", "coef", "se", "p_value", "stars"])?;
        for row in self.all_rows() {
            let se = if row.se.is_finite() {
                format_number(row.se)
            } else {
                String::new()
            };
            let p = if row.p_value.is_finite() {
                format!("{:.3e}", row.p_value)
            } else {
                String::new()
            };
            w.write_record([
                row.name.as_str(),
                row.label.as_str(),
                &format_number(row.coef),
                &se,
                &p,
                row.stars.as_str(),
            ])?;
        }
        w.write_record([
            "observations",
            "Observations",
            &self.n.to_string(),
            "",
            "",
            "",
        ])?;
        w.write_record(["aic", "AIC", &format!("{:.1}", self.aic), "", "", ""])?;
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io("<table csv>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn render_regression_table(
    fit: &NbFit,
    format: TableFormat,
    labels: &HashMap<String, String>,
) -> Result<String> {
    regression_table(fit, labels)?.render(format)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiPoint {
    pub name: String,
    pub label: String,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn ci_points(
    fit: &NbFit,
    subset: &[String],
    labels: &HashMap<String, String>,
) -> Result<Vec<CiPoint>> {
    subset
        .iter()
        .map(|name| {
            let j = fit
                .column_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::InvalidConfig(format!("no coefficient named `{name}`")))?;
            let w = wald(fit, j)?;
            Ok(CiPoint {
                name: name.clone(),
                label: labels
                    .get(name)
                    .cloned()
                    .unwrap_or_else(|| default_label(name)),
                estimate: w.estimate,
                lo: w.ci_low,
                hi: w.ci_high,
            })
        })
        .collect()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Self-contained SVG: one point with a 95% whisker per coefficient and a
/// dashed zero line standing for the excluded baseline.
pub fn ci_svg(points: &[CiPoint], baseline_label: &str) -> String {
    let (width, height) = (120.0 + 110.0 * points.len().max(1) as f64, 360.0);
    let (top, bottom, left) = (40.0, 300.0, 70.0);
    let lo = points.iter().map(|p| p.lo).fold(0.0f64, f64::min);
    let hi = points.iter().map(|p| p.hi).fold(0.0f64, f64::max);
    let pad = ((hi - lo) * 0.1).max(1e-3);
    let (lo, hi) = (lo - pad, hi + pad);
    let y = |v: f64| bottom - (v - lo) / (hi - lo) * (bottom - top);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">Estimated Topic Coefficients (95% C.I.)</text>"#,
        width / 2.0
    );
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>"#
    );
    for tick in 0..=4 {
        let v = lo + (hi - lo) * tick as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y(v) + 4.0,
            xml_escape(&format_number(v))
        );
    }
    let _ = writeln!(
        s,
        r#"<line class="zero" x1="{left}" y1="{y0:.2}" x2="{:.1}" y2="{y0:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        width - 20.0,
        y0 = y(0.0)
    );
    let _ = writeln!(
        s,
        r#"<text class="baseline" x="{:.1}" y="{:.2}" text-anchor="end" fill="gray">{} = 0</text>"#,
        width - 20.0,
        y(0.0) - 4.0,
        xml_escape(baseline_label)
    );
    for (i, p) in points.iter().enumerate() {
        let x = left + 60.0 + 110.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line class="whisker" x1="{x:.1}" y1="{:.2}" x2="{x:.1}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            y(p.lo),
            y(p.hi)
        );
        for v in [p.lo, p.hi] {
            let _ = writeln!(
                s,
                r#"<line class="cap" x1="{:.1}" y1="{yv:.2}" x2="{:.1}" y2="{yv:.2}" stroke="black"/>"#,
                x - 8.0,
                x + 8.0,
                yv = y(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<circle class="estimate" cx="{x:.1}" cy="{:.2}" r="4" fill="black"/>"#,
            y(p.estimate)
        );
        let _ = writeln!(
            s,
            r#"<text class="label" x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            bottom + 20.0,
            xml_escape(&p.label)
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

pub fn ci_csv(points: &[CiPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "estimate", "lo", "hi"])?;
    for p in points {
        w.write_record([
            p.name.clone(),
            p.estimate.to_string(),
            p.lo.to_string(),
            p.hi.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<ci csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Write `<stem>.svg` and `<stem>.csv` for the selected coefficients.
pub fn render_ci_plot(
    fit: &NbFit,
    subset: &[String],
    labels: &HashMap<String, String>,
    baseline_label: &str,
    out_stem: &Path,
) -> Result<Vec<CiPoint>> {
    let points = ci_points(fit, subset, labels)?;
    let svg_path = out_stem.with_extension("svg");
    let csv_path = out_stem.with_extension("csv");
    fs::write(&svg_path, ci_svg(&points, baseline_label)).map_err(|e| Error::io(&svg_path, e))?;
    fs::write(&csv_path, ci_csv(&points)?).map_err(|e| Error::io(&csv_path, e))?;
    Ok(points)
}

pub fn render_topic_table(
    model: &TopicModel,
    vocab: &Vocabulary,
    n_words: usize,
    labels: &HashMap<usize, String>,
) -> String {
    let n = if n_words > vocab.len() {
        log::warn!(
            "requested {n_words} topic words but the vocabulary has {}; clamping",
            vocab.len()
        );
        vocab.len()
    } else {
        n_words
    };
    let mut out = String::new();
    for k in 0..model.topics {
        let words: Vec<String> = top_words(model, vocab, k, n)
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        match labels.get(&k) {
            Some(label) => {
                let _ = writeln!(out, "Topic {k} ({label}): {}", words.join(" "));
            }
            None => {
                let _ = writeln!(out, "Topic {k}: {}", words.join(" "));
            }
        }
    }
    out
}

fn summary_number(x: f64) -> String {
    if x.is_finite() && x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format_number(x)
    }
}

pub fn render_summary(rows: &[SummaryRow], format: TableFormat) -> Result<String> {
    let cells = |r: &SummaryRow| {
        [
            summary_number(r.min),
            summary_number(r.max),
            summary_number(r.mean),
            format_number(r.sd),
            r.n.to_string(),
        ]
    };
    match format {
        TableFormat::Text => {
            let mut out = String::from("Summary statistics\n");
            let _ = writeln!(
                out,
                "{:<22}{:>10}{:>10}{:>12}{:>10}{:>8}",
                "Variable", "Min", "Max", "Mean", "S.D.", "N"
            );
            for r in rows {
                let c = cells(r);
                let _ = writeln!(
                    out,
                    "{:<22}{:>10}{:>10}{:>12}{:>10}{:>8}",
                    r.variable, c[0], c[1], c[2], c[3], c[4]
                );
            }
            Ok(out)
        }
        TableFormat::Markdown => {
            let mut out = String::from(
                "| Variable | Min | Max | Mean | S.D. | N |\n|---|---:|---:|---:|---:|---:|\n",
            );
            for r in rows {
                let c = cells(r);
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} |",
                    r.variable, c[0], c[1], c[2], c[3], c[4]
                );
            }
            Ok(out)
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["variable", "min", "max", "mean", "sd", "n"])?;
            for r in rows {
                let c = cells(r);
                w.write_record([r.variable.as_str(), &c[0], &c[1], &c[2], &c[3], &c[4]])?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::io("<summary csv>", e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    /// A fit with the given estimates and standard errors, covariance diagonal.
    pub(crate) fn fake_fit(names: &[&str], coef: &[f64], se: &[f64], reliable: bool) -> NbFit {
        let p = coef.len();
        let mut cov = Matrix::zeros(p + 1, p + 1);
        for (j, s) in se.iter().enumerate() {
            cov.set(j, j, s * s);
        }
        NbFit {
            column_names: names.iter().map(|s| s.to_string()).collect(),
            columns: (0..p).collect(),
            dropped_columns: vec![],
            coef: coef.to_vec(),
            ln_alpha: -1.346,
            cov,
            cov_reliable: reliable,
            ln_alpha_at_bound: false,
            loglik: -18000.0,
            init_loglik: -18100.0,
            aic: 36148.2,
            n: 2063,
            converged: true,
            iterations: 7,
            score_norm: 1e-9,
        }
    }

    fn labels() -> HashMap<String, String> {
        [
            ("topic_1", "Republicans"),
            ("topic_2", "Democrats"),
            ("topic_3", "Trump Campaign"),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
    }

    fn table3_fit() -> NbFit {
        fake_fit(
            &["intercept", "dem_debate", "topic_1", "topic_2", "topic_3"],
            &[4.878, 0.286, 0.0368, 0.545, 0.0840],
            &[0.212, 0.0412, 0.0447, 0.0456, 0.0421, 0.0299],
            true,
        )
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.545), "0.545");
        assert_eq!(format_number(0.0456), "0.0456");
        assert_eq!(format_number(0.0840), "0.0840");
        assert_eq!(format_number(-0.225), "-0.225");
        assert_eq!(format_number(4.688), "4.688");
        assert_eq!(format_number(-1.27), "-1.270");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(f64::NAN), "n/a");
    }

    #[test]
    fn text_rows_match_table_layout() {
        let text = render_regression_table(&table3_fit(), TableFormat::Text, &labels()).unwrap();
        let norm: Vec<String> = text
            .lines()
            .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
            .collect();
        assert!(
            norm.contains(&"Democrats 0.545*** (0.0456)".to_string()),
            "{text}"
        );
        assert!(
            norm.contains(&"Republicans 0.0368 (0.0447)".to_string()),
            "{text}"
        );
        assert!(
            norm.contains(&"Trump Campaign 0.0840* (0.0421)".to_string()),
            "{text}"
        );
        assert!(
            norm.contains(&"ln(alpha) -1.346*** (0.0299)".to_string()),
            "{text}"
        );
        assert!(norm.contains(&"Observations 2063".to_string()));
        assert!(norm.contains(&"AIC 36148.2".to_string()));
        assert!(text.contains(STAR_LEGEND));
        // Design-column order.
        let pos = |s: &str| text.find(s).unwrap();
        assert!(
            pos("Constant") < pos("Democratic Debates") && pos("Republicans") < pos("Democrats")
        );
    }

    #[test]
    fn csv_agrees_with_text() {
        let table = regression_table(&table3_fit(), &labels()).unwrap();
        let text = table.render(TableFormat::Text).unwrap();
        let csv = table.render(TableFormat::Csv).unwrap();
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        for rec in reader
            .records()
            .map(|r| r.unwrap())
            .filter(|r| !r[3].is_empty())
        {
            let line = text
                .lines()
                .find(|l| l.trim_start().starts_with(&rec[1]))
                .unwrap();
            let fields: Vec<&str> = line.split_whitespace().collect();
            let se_text = fields
                .last()
                .unwrap()
                .trim_matches(|c| c == '(' || c == ')');
            let coef_text = fields[fields.len() - 2].trim_end_matches('*');
            assert_eq!(
                rec[2].parse::<f64>().unwrap(),
                coef_text.parse::<f64>().unwrap()
            );
            assert_eq!(
                rec[3].parse::<f64>().unwrap(),
                se_text.parse::<f64>().unwrap()
            );
            let orig = table.all_rows().find(|r| r.name == rec[0]).unwrap();
            assert!(
                (rec[2].parse::<f64>().unwrap() - orig.coef).abs()
                    <= 5e-4 * orig.coef.abs().max(1.0)
            );
            assert_eq!(&rec[5], orig.stars.as_str());
        }
        let md = table.render(TableFormat::Markdown).unwrap();
        assert!(md.contains("| Democrats | 0.545\\*\\*\\* | (0.0456) |"));
    }

    #[test]
    fn unreliable_covariance_and_empty_fit() {
        let fit = fake_fit(
            &["intercept", "topic_1"],
            &[1.0, 0.5],
            &[0.1, 0.1, 0.1],
            false,
        );
        let text = render_regression_table(&fit, TableFormat::Text, &HashMap::new()).unwrap();
        assert!(text.starts_with("WARNING"));
        assert!(!text.lines().skip(3).take(2).any(|l| l.contains('*')));
        let empty = fake_fit(&[], &[], &[], true);
        assert!(render_regression_table(&empty, TableFormat::Text, &HashMap::new()).is_err());
    }

    #[test]
    fn ci_plot_elements() {
        let fit = table3_fit();
        let subset: Vec<String> = ["topic_1", "topic_2", "topic_3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let points = render_ci_plot(
            &fit,
            &subset,
            &labels(),
            "News Media",
            &dir.path().join("ci"),
        )
        .unwrap();
        let svg = fs::read_to_string(dir.path().join("ci.svg")).unwrap();
        assert_eq!(svg.matches(r#"class="whisker""#).count(), 3);
        assert_eq!(svg.matches(r#"class="zero""#).count(), 1);
        assert!(svg.contains("News Media = 0"));
        let csv = fs::read_to_string(dir.path().join("ci.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 3);
        // Republicans straddle zero.
        assert!(points[0].lo < 0.0 && points[0].hi > 0.0);
        assert!(points[1].lo > 0.0);
    }

    #[test]
    fn topic_table_rows() {
        let vocab = Vocabulary::new(vec!["aa".into(), "bb".into(), "cc".into()]).unwrap();
        let model = TopicModel {
            topics: 2,
            phi: Matrix::from_rows(&[vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]]).unwrap(),
            theta: Matrix::zeros(0, 2),
            config: crate::lda::LdaConfig::new(2),
            loglik_trace: vec![],
            samples: 1,
            rng: "ChaCha8".into(),
            vocab_hash: vocab.hash(),
            doc_ids: vec![],
        };
        let t = render_topic_table(&model, &vocab, 1, &HashMap::new());
        assert_eq!(t, "Topic 0: bb\nTopic 1: aa\n");
        let t = render_topic_table(&model, &vocab, 20, &HashMap::new());
        assert_eq!(t.lines().next().unwrap(), "Topic 0: bb cc aa");
        assert_eq!(t, render_topic_table(&model, &vocab, 20, &HashMap::new()));
    }

    #[test]
    fn summary_rendering() {
        let rows = vec![SummaryRow {
            variable: "Likes".into(),
            min: 741.0,
            max: 30612.0,
            mean: 3411.0,
            sd: 2733.0,
            n: 2120,
        }];
        let text = render_summary(&rows, TableFormat::Text).unwrap();
        let line: Vec<&str> = text.lines().nth(2).unwrap().split_whitespace().collect();
        assert_eq!(
            line,
            vec!["Likes", "741", "30612", "3411", "2733.000", "2120"]
        );
    }
}
