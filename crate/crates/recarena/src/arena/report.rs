//! Report rendering: Markdown tables, full-precision JSON, and a CSV of
//! per-dimension tallies for stacked-bar plotting.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{ArenaReport, PairSection, QValue, ScopeStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Report(format!(
                "unknown report format {other:?} (expected markdown, json, or csv)"
            ))),
        }
    }
}

fn fmt_q(q: &Option<QValue>) -> String {
    match q {
        None => "-".to_string(),
        Some(v) if v.q.is_infinite() => "inf".to_string(),
        Some(v) => format!("{:.4}", v.q),
    }
}

fn fmt_pct(q: &Option<QValue>, index: usize) -> String {
    match q {
        None => "-".to_string(),
        Some(v) => {
            let value = match index {
                0 => v.percentages.0,
                1 => v.percentages.1,
                _ => v.percentages.2,
            };
            format!("{value:.1}")
        }
    }
}

fn fmt_count(n: f64) -> String {
    if n.fract() == 0.0 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}

/// Render the report in the requested format. Pure function of the
/// report value; identical inputs give byte-identical documents.
pub fn render_report(report: &ArenaReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Markdown => Ok(render_markdown(report)),
        ReportFormat::Json => {
            let mut doc = serde_json::to_string_pretty(report)
                .map_err(|e| Error::json("arena report", e))?;
            doc.push('\n');
            Ok(doc)
        }
        ReportFormat::Csv => Ok(render_csv(report)),
    }
}

fn overall_row(out: &mut String, section: &PairSection, report: &ArenaReport) {
    let stats = &section.overall;
    let rank_cell = report
        .ranking
        .iter()
        .find(|r| r.system_id == section.system_a_id)
        .map(|r| {
            if r.tied {
                format!("{} (tie)", r.rank)
            } else {
                r.rank.to_string()
            }
        })
        .unwrap_or_else(|| "-".to_string());
    let _ = write!(
        out,
        "| {} | {} | {} | {} | {} | {} |",
        section.system_a_id,
        fmt_pct(&stats.q, 0),
        fmt_pct(&stats.q, 1),
        fmt_pct(&stats.q, 2),
        fmt_q(&stats.q),
        rank_cell,
    );
    if let Some(absolute) = &report.absolute {
        let cell = absolute
            .get(&section.system_a_id)
            .map(|s| format!("{:.4}", s.normalized))
            .unwrap_or_else(|| "-".to_string());
        let _ = write!(out, " {cell} |");
    }
    out.push('\n');
}

fn render_markdown(report: &ArenaReport) -> String {
    let mut out = String::new();
    out.push_str("# Pair-wise arena report\n\n");
    match &report.baseline_id {
        Some(baseline) => {
            let _ = writeln!(out, "Baseline (system B in every pair): {baseline}\n");
        }
        None => out.push_str("No common baseline; ranking omitted.\n\n"),
    }

    out.push_str("## Overall\n\n");
    if report.absolute.is_some() {
        out.push_str("| System | Win% | Tie% | Lose% | Q | Rank | Normalized score |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
    } else {
        out.push_str("| System | Win% | Tie% | Lose% | Q | Rank |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|\n");
    }
    for section in &report.pairs {
        overall_row(&mut out, section, report);
    }
    out.push('\n');

    let dimension_keys: Vec<&String> = report
        .pairs
        .first()
        .map(|p| p.dimensions.keys().collect())
        .unwrap_or_default();
    for key in dimension_keys {
        let _ = writeln!(out, "## Dimension: {key}\n");
        out.push_str("| System | Win% | Tie% | Lose% | Q | Excluded |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|\n");
        for section in &report.pairs {
            let stats: Option<&ScopeStats> = section.dimensions.get(key);
            match stats {
                Some(stats) => {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} |",
                        section.system_a_id,
                        fmt_pct(&stats.q, 0),
                        fmt_pct(&stats.q, 1),
                        fmt_pct(&stats.q, 2),
                        fmt_q(&stats.q),
                        stats.tally.n_excluded,
                    );
                }
                None => {
                    let _ = writeln!(out, "| {} | - | - | - | - | - |", section.system_a_id);
                }
            }
        }
        out.push('\n');
    }

    if let Some(correlation) = &report.correlation {
        let _ = writeln!(out, "## Correlation vs {}\n", correlation.metric);
        let _ = writeln!(
            out,
            "Pearson r = {:.4} (p = {:.4}, n = {}).",
            correlation.result.r, correlation.result.p_value, correlation.result.n
        );
        if !correlation.excluded_systems.is_empty() {
            let _ = writeln!(
                out,
                "Excluded from correlation: {}.",
                correlation.excluded_systems.join(", ")
            );
        }
        out.push('\n');
    }

    if let Some(absolute) = &report.absolute {
        out.push_str("## Absolute scores\n\n");
        out.push_str("| System | Mean score | Normalized | Judgments |\n");
        out.push_str("|---|---:|---:|---:|\n");
        for (system_id, summary) in absolute {
            let _ = writeln!(
                out,
                "| {} | {:.4} | {:.4} | {} |",
                system_id, summary.mean, summary.normalized, summary.n
            );
        }
        out.push('\n');
    }

    if !report.analysis.is_empty() {
        out.push_str("## Analysis excerpts\n\n");
        for (key, excerpts) in &report.analysis {
            let _ = writeln!(out, "### {key}\n");
            for excerpt in excerpts {
                let flat = excerpt.text.split_whitespace().collect::<Vec<_>>().join(" ");
                let trimmed: String = if flat.chars().count() > 240 {
                    let mut s: String = flat.chars().take(240).collect();
                    s.push_str("...");
                    s
                } else {
                    flat
                };
                let _ = writeln!(
                    out,
                    "- {} (vs baseline, for {}): {}",
                    excerpt.user_id, excerpt.system_a_id, trimmed
                );
            }
            out.push('\n');
        }
    }

    if !report.failures.is_empty() {
        out.push_str("## Excluded judgments\n\n");
        for failure in &report.failures {
            let _ = writeln!(
                out,
                "- {} ({} vs {}): {}",
                failure.user_id, failure.system_a_id, failure.system_b_id, failure.error
            );
        }
        out.push('\n');
    }

    out
}

fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn render_csv(report: &ArenaReport) -> String {
    let mut out = String::from("system_a,system_b,scope,win,tie,lose,excluded\n");
    for section in &report.pairs {
        let mut rows: Vec<(&str, &ScopeStats)> = vec![("overall", &section.overall)];
        rows.extend(
            section
                .dimensions
                .iter()
                .map(|(k, v)| (k.as_str(), v)),
        );
        for (scope, stats) in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                csv_field(&section.system_a_id),
                csv_field(&section.system_b_id),
                csv_field(scope),
                fmt_count(stats.tally.n_win),
                fmt_count(stats.tally.n_tie),
                fmt_count(stats.tally.n_lose),
                stats.tally.n_excluded,
            );
        }
    }
    out
}
