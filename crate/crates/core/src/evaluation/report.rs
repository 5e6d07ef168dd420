use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::EvalSummary;

pub const SUMMARY_HEADER: &str = "problem,rejected,TR,FR,accuracy_boost";
pub const COMPARISON_HEADER: &str = "problem,flat,LCN,proposed";

/// Rejection statistics for one problem; the boost is in percentage points.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub problem: String,
    pub rejected: usize,
    pub true_rejections: usize,
    pub false_rejections: usize,
    pub accuracy_boost: f64,
}

impl SummaryRow {
    pub fn new(problem: impl Into<String>, summary: &EvalSummary) -> Self {
        SummaryRow {
            problem: problem.into(),
            rejected: summary.rejected,
            true_rejections: summary.true_rejections,
            false_rejections: summary.false_rejections,
            accuracy_boost: summary.accuracy_boost,
        }
    }
}

/// Recognition rates in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub problem: String,
    pub flat: f64,
    pub lcn: f64,
    pub proposed: f64,
}

impl ComparisonRow {
    /// Flat accuracy against the decoder without and with rejection.
    pub fn new(problem: impl Into<String>, flat_accuracy: f64, summary: &EvalSummary) -> Self {
        ComparisonRow {
            problem: problem.into(),
            flat: 100.0 * flat_accuracy,
            lcn: 100.0 * summary.overall_accuracy,
            proposed: 100.0 * summary.boosted_accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: String,
    pub summary_csv: String,
    /// Absent when no baseline rows were given.
    pub comparison_csv: Option<String>,
}

// Reals are rendered with one decimal, as in the published tables.
fn one_decimal(x: f64) -> String {
    let s = format!("{x:.1}");
    if s == "-0.0" {
        "0.0".to_string()
    } else {
        s
    }
}

pub fn render_report(summaries: &[SummaryRow], baselines: &[ComparisonRow]) -> Result<Report> {
    for name in summaries
        .iter()
        .map(|r| &r.problem)
        .chain(baselines.iter().map(|r| &r.problem))
    {
        if name.is_empty() || name.contains([',', '\n', '\r', '"']) {
            return Err(Error::InvalidValue(format!("problem name {name:?}")));
        }
    }

    let mut summary_csv = format!("{SUMMARY_HEADER}\n");
    let mut table = String::new();
    let width = summaries
        .iter()
        .map(|r| r.problem.len())
        .chain(baselines.iter().map(|r| r.problem.len()))
        .chain(["problem".len()])
        .max()
        .unwrap_or(7);

    writeln!(
        table,
        "{:<width$}  {:>16}  {:>6}  {:>6}  {:>14}",
        "problem", "rejected samples", "TR", "FR", "accuracy boost"
    )
    .unwrap();
    for r in summaries {
        let boost = one_decimal(r.accuracy_boost);
        writeln!(
            summary_csv,
            "{},{},{},{},{}",
            r.problem, r.rejected, r.true_rejections, r.false_rejections, boost
        )
        .unwrap();
        writeln!(
            table,
            "{:<width$}  {:>16}  {:>6}  {:>6}  {:>14}",
            r.problem, r.rejected, r.true_rejections, r.false_rejections, boost
        )
        .unwrap();
    }

    let comparison_csv = if baselines.is_empty() {
        None
    } else {
        let mut csv = format!("{COMPARISON_HEADER}\n");
        writeln!(table).unwrap();
        writeln!(
            table,
            "{:<width$}  {:>6}  {:>6}  {:>8}",
            "problem", "flat", "LCN", "proposed"
        )
        .unwrap();
        for r in baselines {
            let (flat, lcn, proposed) = (
                one_decimal(r.flat),
                one_decimal(r.lcn),
                one_decimal(r.proposed),
            );
            writeln!(csv, "{},{},{},{}", r.problem, flat, lcn, proposed).unwrap();
            writeln!(
                table,
                "{:<width$}  {:>6}  {:>6}  {:>8}",
                r.problem, flat, lcn, proposed
            )
            .unwrap();
        }
        Some(csv)
    };

    Ok(Report {
        table,
        summary_csv,
        comparison_csv,
    })
}

/// Parses a summary CSV written by [`render_report`].
pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(SUMMARY_HEADER) => {}
        other => {
            return Err(Error::MalformedLine {
                line: 1,
                reason: format!("expected header {SUMMARY_HEADER:?}, found {other:?}"),
            })
        }
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let bad = |reason: String| Error::MalformedLine {
                line: k + 2,
                reason,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(bad(format!("expected 5 fields, found {}", fields.len())));
            }
            let count = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("{s:?}: {e}")));
            Ok(SummaryRow {
                problem: fields[0].to_string(),
                rejected: count(fields[1])?,
                true_rejections: count(fields[2])?,
                false_rejections: count(fields[3])?,
                accuracy_boost: fields[4]
                    .parse()
                    .map_err(|e| bad(format!("{:?}: {e}", fields[4])))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(problem: &str, rejected: usize, tr: usize, fr: usize, boost: f64) -> SummaryRow {
        SummaryRow {
            problem: problem.into(),
            rejected,
            true_rejections: tr,
            false_rejections: fr,
            accuracy_boost: boost,
        }
    }

    #[test]
    fn renders_published_rows() {
        let rows = [
            row("topics", 740, 652, 88, 8.2),
            row("industry", 602, 580, 22, 6.5),
            row("regions", 794, 598, 196, 7.8),
        ];
        let report = render_report(&rows, &[]).unwrap();
        let lines: Vec<&str> = report.summary_csv.lines().collect();
        assert_eq!(lines[0], SUMMARY_HEADER);
        assert_eq!(lines[1], "topics,740,652,88,8.2");
        assert_eq!(lines[2], "industry,602,580,22,6.5");
        assert_eq!(lines[3], "regions,794,598,196,7.8");
        assert!(report.comparison_csv.is_none());
        assert!(report.table.contains("rejected samples"));
        assert!(!report.table.contains("proposed"));
    }

    #[test]
    fn renders_comparison_rows() {
        let cmp = [ComparisonRow {
            problem: "topics".into(),
            flat: 41.2,
            lcn: 40.1,
            proposed: 47.5,
        }];
        let report = render_report(&[row("topics", 740, 652, 88, 8.2)], &cmp).unwrap();
        let csv = report.comparison_csv.unwrap();
        assert_eq!(csv, "problem,flat,LCN,proposed\ntopics,41.2,40.1,47.5\n");
        assert!(report.table.contains("47.5"));
    }

    #[test]
    fn zero_boost_renders_as_zero_point_zero() {
        let report = render_report(&[row("p", 0, 0, 0, 0.0)], &[]).unwrap();
        assert_eq!(report.summary_csv.lines().nth(1), Some("p,0,0,0,0.0"));
        let report = render_report(&[row("p", 0, 0, 0, -0.0)], &[]).unwrap();
        assert_eq!(report.summary_csv.lines().nth(1), Some("p,0,0,0,0.0"));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row("topics", 740, 652, 88, 8.2), row("b", 3, 1, 2, -1.5)];
        let report = render_report(&rows, &[]).unwrap();
        assert_eq!(parse_summary_csv(&report.summary_csv).unwrap(), rows);
        assert!(parse_summary_csv("nope\n").is_err());
    }

    #[test]
    fn rejects_unsafe_problem_names() {
        assert!(render_report(&[row("a,b", 0, 0, 0, 0.0)], &[]).is_err());
    }
}
