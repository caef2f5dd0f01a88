//! Verdict aggregation: win/tie/lose tallies, the quantile Q, rankings,
//! and the cross-check of Q against offline metrics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{pearson, CorrelationResult};
use crate::verdict::{JudgmentFailure, Outcome, ScoreVerdict, VerdictLine};

mod report;

pub use report::{render_report, ReportFormat};

/// What a tally counts: the overall verdict or one dimension's.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TallyScope {
    Overall,
    Dimension(String),
}

impl fmt::Display for TallyScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TallyScope::Overall => f.write_str("overall"),
            TallyScope::Dimension(key) => f.write_str(key),
        }
    }
}

impl FromStr for TallyScope {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "overall" => TallyScope::Overall,
            key => TallyScope::Dimension(key.to_string()),
        })
    }
}

impl Serialize for TallyScope {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TallyScope {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(s.parse().expect("infallible"))
    }
}

/// Win/tie/lose counts for one (system A, system B) pair at one scope.
///
/// Wins are counted for system A. Counts are reals so percentage rows
/// from published tables can be fed straight into [`quantile_q`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaTally {
    pub system_a_id: String,
    pub system_b_id: String,
    pub scope: TallyScope,
    pub n_win: f64,
    pub n_tie: f64,
    pub n_lose: f64,
    /// Unparseable judgments, plus missing-dimension verdicts at
    /// dimension scopes. Never enters Q's numerator or denominator.
    pub n_excluded: usize,
}

impl ArenaTally {
    pub fn judged_total(&self) -> f64 {
        self.n_win + self.n_tie + self.n_lose
    }
}

mod q_serde {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if q.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(*q)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| D::Error::custom("q is not representable as f64")),
            serde_json::Value::String(s) if s == "inf" => Ok(f64::INFINITY),
            other => Err(D::Error::custom(format!("invalid q value: {other}"))),
        }
    }
}

/// The quantile Q with the percentages it was computed from.
///
/// An undefined Q (no losses and no ties) is the +infinity sentinel,
/// which serializes as the JSON string "inf".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QValue {
    #[serde(with = "q_serde")]
    pub q: f64,
    /// (win%, tie%, lose%) over judged samples.
    pub percentages: (f64, f64, f64),
}

/// Count outcomes at the given scope over verdicts for a single pair.
///
/// Failure lines count as excluded at every scope; verdicts missing the
/// dimension count as excluded at that dimension's scope.
pub fn tally(lines: &[VerdictLine], scope: &TallyScope) -> Result<ArenaTally> {
    let mut pair: Option<(String, String)> = None;
    let mut t = ArenaTally {
        system_a_id: String::new(),
        system_b_id: String::new(),
        scope: scope.clone(),
        n_win: 0.0,
        n_tie: 0.0,
        n_lose: 0.0,
        n_excluded: 0,
    };
    for line in lines {
        let (a, b) = match line {
            VerdictLine::Verdict(v) => (&v.verdict.system_a_id, &v.verdict.system_b_id),
            VerdictLine::Failure(f) => (&f.system_a_id, &f.system_b_id),
        };
        match &pair {
            None => {
                pair = Some((a.clone(), b.clone()));
                t.system_a_id = a.clone();
                t.system_b_id = b.clone();
            }
            Some((pa, pb)) if pa == a && pb == b => {}
            Some((pa, pb)) => {
                return Err(Error::Tally(format!(
                    "mixed system pairs in tally input: ({pa}, {pb}) and ({a}, {b})"
                )))
            }
        }
        let outcome = match line {
            VerdictLine::Failure(_) => {
                t.n_excluded += 1;
                continue;
            }
            VerdictLine::Verdict(v) => match scope {
                TallyScope::Overall => Some(v.verdict.overall),
                TallyScope::Dimension(key) => v.verdict.per_dimension.get(key).copied(),
            },
        };
        match outcome {
            Some(Outcome::A) => t.n_win += 1.0,
            Some(Outcome::Tie) => t.n_tie += 1.0,
            Some(Outcome::B) => t.n_lose += 1.0,
            None => t.n_excluded += 1,
        }
    }
    if pair.is_none() {
        return Err(Error::Tally("empty verdict collection".into()));
    }
    Ok(t)
}

/// Q = (n_win + n_tie) / (n_lose + n_tie).
///
/// Scale-invariant, so raw counts and percentages agree. A zero
/// denominator with wins present yields the +infinity sentinel and a
/// warning; an all-zero tally is an error.
pub fn quantile_q(t: &ArenaTally) -> Result<QValue> {
    if t.n_win < 0.0 || t.n_tie < 0.0 || t.n_lose < 0.0 {
        return Err(Error::Tally(format!(
            "negative counts in tally for ({}, {})",
            t.system_a_id, t.system_b_id
        )));
    }
    let total = t.judged_total();
    if total <= 0.0 {
        return Err(Error::Tally(format!(
            "all-zero tally for ({}, {}) at scope {}",
            t.system_a_id, t.system_b_id, t.scope
        )));
    }
    let percentages = (
        100.0 * t.n_win / total,
        100.0 * t.n_tie / total,
        100.0 * t.n_lose / total,
    );
    let denominator = t.n_lose + t.n_tie;
    let q = if denominator > 0.0 {
        (t.n_win + t.n_tie) / denominator
    } else {
        log::warn!(
            "Q undefined for ({}, {}): no losses or ties; reporting the +inf sentinel",
            t.system_a_id,
            t.system_b_id
        );
        f64::INFINITY
    };
    Ok(QValue { q, percentages })
}

/// One row of a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSystem {
    pub system_id: String,
    #[serde(with = "q_serde")]
    pub q: f64,
    /// Competition rank: ties share the better rank.
    pub rank: usize,
    pub tied: bool,
}

/// Rank systems by Q, descending. +infinity sorts first; exact Q ties
/// share the better rank and are flagged. Equal-Q rows order by id.
pub fn rank_by_q(q_map: &BTreeMap<String, QValue>) -> Vec<RankedSystem> {
    let mut rows: Vec<(&String, f64)> = q_map.iter().map(|(id, v)| (id, v.q)).collect();
    rows.sort_by(|(id_a, q_a), (id_b, q_b)| q_b.total_cmp(q_a).then(id_a.cmp(id_b)));
    let mut ranking: Vec<RankedSystem> = Vec::with_capacity(rows.len());
    for (i, (id, q)) in rows.iter().enumerate() {
        let rank = match ranking.last() {
            Some(prev) if prev.q == *q => prev.rank,
            _ => i + 1,
        };
        ranking.push(RankedSystem {
            system_id: (*id).clone(),
            q: *q,
            rank,
            tied: false,
        });
    }
    for i in 0..ranking.len() {
        let tied = ranking
            .iter()
            .enumerate()
            .any(|(j, other)| j != i && other.rank == ranking[i].rank);
        ranking[i].tied = tied;
    }
    ranking
}

/// Pearson correlation between systems' Q values and an offline metric,
/// aligned by system id. Infinite Q values and systems missing a metric
/// value are excluded with a warning; fewer than 3 usable pairs is an
/// error (via the metric layer's own check).
pub fn correlate_q_vs_metric(
    q_values: &BTreeMap<String, QValue>,
    metric_values: &BTreeMap<String, f64>,
) -> Result<(CorrelationResult, Vec<String>)> {
    let mut qs = Vec::new();
    let mut ms = Vec::new();
    let mut excluded = Vec::new();
    for (system_id, value) in q_values {
        if !value.q.is_finite() {
            log::warn!("excluding {system_id} from correlation: Q is not finite");
            excluded.push(system_id.clone());
            continue;
        }
        match metric_values.get(system_id) {
            Some(metric) => {
                qs.push(value.q);
                ms.push(*metric);
            }
            None => {
                log::warn!("excluding {system_id} from correlation: no metric value supplied");
                excluded.push(system_id.clone());
            }
        }
    }
    let result = pearson(&qs, &ms)?;
    Ok((result, excluded))
}

/// Tallies and Q for one scope; Q is absent when every judgment at this
/// scope was excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeStats {
    pub tally: ArenaTally,
    pub q: Option<QValue>,
}

/// All aggregates for one (system A, baseline) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSection {
    pub system_a_id: String,
    pub system_b_id: String,
    pub overall: ScopeStats,
    pub dimensions: BTreeMap<String, ScopeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSection {
    pub metric: String,
    pub result: CorrelationResult,
    pub excluded_systems: Vec<String>,
}

/// Mean absolute score for one system plus its min-max normalization
/// across the reported systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteSummary {
    pub mean: f64,
    pub normalized: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisExcerpt {
    pub user_id: String,
    pub system_a_id: String,
    pub text: String,
}

/// Everything the report renderers consume. Field order is stable and
/// all maps are ordered, so rendering is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaReport {
    /// The common system B, when all pairs share one.
    pub baseline_id: Option<String>,
    pub pairs: Vec<PairSection>,
    /// Ranking over overall Q; empty when no common baseline exists.
    pub ranking: Vec<RankedSystem>,
    pub correlation: Option<CorrelationSection>,
    /// Unparseable/failed judgments, reported separately from tallies.
    pub failures: Vec<JudgmentFailure>,
    pub absolute: Option<BTreeMap<String, AbsoluteSummary>>,
    /// Per-dimension qualitative excerpts; populated only on request.
    pub analysis: BTreeMap<String, Vec<AnalysisExcerpt>>,
}

/// Inputs joined into the report beyond the verdicts themselves.
#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Offline metric to correlate against: (metric name, value per system).
    pub correlate: Option<(String, BTreeMap<String, f64>)>,
    /// Absolute-mode scores to summarize per system.
    pub absolute_scores: Option<Vec<ScoreVerdict>>,
    pub include_analysis: bool,
    /// Excerpts kept per dimension when analysis is included.
    pub analysis_excerpts: usize,
}

impl ReportOptions {
    pub fn new() -> Self {
        ReportOptions {
            correlate: None,
            absolute_scores: None,
            include_analysis: false,
            analysis_excerpts: 3,
        }
    }
}

/// Aggregate verdict lines into a full report.
///
/// Lines are grouped by (system A, system B); each group is tallied
/// overall and per dimension. Ranking and correlation use overall Q and
/// require a single common baseline system B.
pub fn build_report(lines: &[VerdictLine], options: &ReportOptions) -> Result<ArenaReport> {
    if lines.is_empty() {
        return Err(Error::Report("no verdict lines to report on".into()));
    }
    let mut by_pair: BTreeMap<(String, String), Vec<VerdictLine>> = BTreeMap::new();
    let mut dimension_keys: BTreeSet<String> = BTreeSet::new();
    let mut failures = Vec::new();
    for line in lines {
        let key = match line {
            VerdictLine::Verdict(v) => {
                dimension_keys.extend(v.verdict.per_dimension.keys().cloned());
                (v.verdict.system_a_id.clone(), v.verdict.system_b_id.clone())
            }
            VerdictLine::Failure(f) => {
                failures.push(f.clone());
                (f.system_a_id.clone(), f.system_b_id.clone())
            }
        };
        by_pair.entry(key).or_default().push(line.clone());
    }

    let baselines: BTreeSet<&String> = by_pair.keys().map(|(_, b)| b).collect();
    let baseline_id = if baselines.len() == 1 {
        Some((*baselines.iter().next().expect("non-empty")).clone())
    } else {
        log::warn!(
            "verdicts span {} baseline systems; ranking and correlation are skipped",
            baselines.len()
        );
        None
    };

    let mut pairs = Vec::new();
    let mut q_map: BTreeMap<String, QValue> = BTreeMap::new();
    for ((a, _b), group) in &by_pair {
        let overall_tally = tally(group, &TallyScope::Overall)?;
        let overall_q = if overall_tally.judged_total() > 0.0 {
            Some(quantile_q(&overall_tally)?)
        } else {
            log::warn!("pair ({a}, _) has no judged overall verdicts");
            None
        };
        if baseline_id.is_some() {
            if let Some(q) = &overall_q {
                q_map.insert(a.clone(), q.clone());
            }
        }
        let mut dimensions = BTreeMap::new();
        for key in &dimension_keys {
            let t = tally(group, &TallyScope::Dimension(key.clone()))?;
            let q = if t.judged_total() > 0.0 {
                Some(quantile_q(&t)?)
            } else {
                None
            };
            dimensions.insert(key.clone(), ScopeStats { tally: t, q });
        }
        pairs.push(PairSection {
            system_a_id: overall_tally.system_a_id.clone(),
            system_b_id: overall_tally.system_b_id.clone(),
            overall: ScopeStats {
                tally: overall_tally,
                q: overall_q,
            },
            dimensions,
        });
    }

    let ranking = if q_map.len() >= 2 {
        rank_by_q(&q_map)
    } else {
        Vec::new()
    };

    let correlation = match &options.correlate {
        Some((metric_name, values)) => {
            let (result, excluded_systems) = correlate_q_vs_metric(&q_map, values)?;
            Some(CorrelationSection {
                metric: metric_name.clone(),
                result,
                excluded_systems,
            })
        }
        None => None,
    };

    let absolute = options.absolute_scores.as_ref().map(|scores| {
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for s in scores {
            let entry = sums.entry(s.system_id.clone()).or_insert((0.0, 0));
            entry.0 += s.score;
            entry.1 += 1;
        }
        let means: BTreeMap<String, (f64, usize)> = sums
            .into_iter()
            .map(|(id, (sum, n))| (id, (sum / n as f64, n)))
            .collect();
        let lo = means.values().map(|(m, _)| *m).fold(f64::INFINITY, f64::min);
        let hi = means.values().map(|(m, _)| *m).fold(f64::NEG_INFINITY, f64::max);
        means
            .into_iter()
            .map(|(id, (mean, n))| {
                let normalized = if hi > lo { (mean - lo) / (hi - lo) } else { 0.5 };
                (id, AbsoluteSummary { mean, normalized, n })
            })
            .collect()
    });

    let mut analysis: BTreeMap<String, Vec<AnalysisExcerpt>> = BTreeMap::new();
    if options.include_analysis {
        let budget = options.analysis_excerpts.max(1);
        for group in by_pair.values() {
            for line in group {
                if let VerdictLine::Verdict(v) = line {
                    for (key, text) in &v.verdict.analysis {
                        let excerpts = analysis.entry(key.clone()).or_default();
                        if excerpts.len() < budget {
                            excerpts.push(AnalysisExcerpt {
                                user_id: v.verdict.user_id.clone(),
                                system_a_id: v.verdict.system_a_id.clone(),
                                text: text.clone(),
                            });
                        }
                    }
                }
            }
        }
    }

    Ok(ArenaReport {
        baseline_id,
        pairs,
        ranking,
        correlation,
        failures,
        absolute,
        analysis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::{JudgedVerdict, PairVerdict};
    use crate::judge::ProviderMeta;

    fn meta() -> ProviderMeta {
        ProviderMeta {
            model_id: "mock".into(),
            latency_ms: 0,
            retries: 0,
            cache_hit: false,
        }
    }

    fn verdict_line(user: &str, overall: Outcome, dims: &[(&str, Outcome)]) -> VerdictLine {
        VerdictLine::Verdict(JudgedVerdict {
            verdict: PairVerdict {
                user_id: user.into(),
                system_a_id: "alpha".into(),
                system_b_id: "beta".into(),
                per_dimension: dims.iter().map(|(k, o)| (k.to_string(), *o)).collect(),
                overall,
                analysis: BTreeMap::new(),
                swap_corrected: false,
            },
            provider_meta: meta(),
        })
    }

    #[test]
    fn unanimous_tally() {
        let lines: Vec<_> = (0..3)
            .map(|i| verdict_line(&format!("u{i}"), Outcome::A, &[]))
            .collect();
        let t = tally(&lines, &TallyScope::Overall).unwrap();
        assert_eq!((t.n_win, t.n_tie, t.n_lose), (3.0, 0.0, 0.0));
        assert_eq!(t.n_excluded, 0);
    }

    #[test]
    fn one_of_each_tally() {
        let lines = vec![
            verdict_line("u0", Outcome::A, &[]),
            verdict_line("u1", Outcome::Tie, &[]),
            verdict_line("u2", Outcome::B, &[]),
        ];
        let t = tally(&lines, &TallyScope::Overall).unwrap();
        assert_eq!((t.n_win, t.n_tie, t.n_lose), (1.0, 1.0, 1.0));
    }

    #[test]
    fn missing_dimension_counts_as_excluded() {
        let mut lines = Vec::new();
        for i in 0..10 {
            let dims: &[(&str, Outcome)] = if i < 2 {
                &[("accuracy", Outcome::A)]
            } else {
                &[("accuracy", Outcome::A), ("inspiration", Outcome::B)]
            };
            lines.push(verdict_line(&format!("u{i}"), Outcome::A, dims));
        }
        let t = tally(&lines, &TallyScope::Dimension("inspiration".into())).unwrap();
        assert_eq!(t.judged_total(), 8.0);
        assert_eq!(t.n_excluded, 2);
        assert_eq!(t.n_lose, 8.0);
    }

    #[test]
    fn failures_count_as_excluded_in_every_scope() {
        let lines = vec![
            verdict_line("u0", Outcome::A, &[("accuracy", Outcome::A)]),
            VerdictLine::Failure(JudgmentFailure {
                user_id: "u1".into(),
                system_a_id: "alpha".into(),
                system_b_id: "beta".into(),
                error: "scripted".into(),
            }),
        ];
        let overall = tally(&lines, &TallyScope::Overall).unwrap();
        assert_eq!(overall.n_excluded, 1);
        assert_eq!(overall.judged_total(), 1.0);
        let dim = tally(&lines, &TallyScope::Dimension("accuracy".into())).unwrap();
        assert_eq!(dim.n_excluded, 1);
    }

    #[test]
    fn mixed_pairs_error() {
        let mut lines = vec![verdict_line("u0", Outcome::A, &[])];
        if let VerdictLine::Verdict(v) = &mut lines[0] {
            let mut other = v.clone();
            other.verdict.system_b_id = "gamma".into();
            lines.push(VerdictLine::Verdict(other));
        }
        assert!(matches!(
            tally(&lines, &TallyScope::Overall),
            Err(Error::Tally(_))
        ));
    }

    fn tally_of(win: f64, tie: f64, lose: f64) -> ArenaTally {
        ArenaTally {
            system_a_id: "a".into(),
            system_b_id: "b".into(),
            scope: TallyScope::Overall,
            n_win: win,
            n_tie: tie,
            n_lose: lose,
            n_excluded: 0,
        }
    }

    #[test]
    fn q_matches_published_rows() {
        let q = quantile_q(&tally_of(61.1, 14.7, 24.2)).unwrap();
        assert!((q.q - 1.9485).abs() < 1e-4, "got {}", q.q);
        let q = quantile_q(&tally_of(62.8, 8.4, 28.8)).unwrap();
        assert!((q.q - 1.9139).abs() < 1e-4, "got {}", q.q);
    }

    #[test]
    fn q_balance_point_is_exactly_one() {
        for tie in [1.0, 7.0, 123.0] {
            let q = quantile_q(&tally_of(41.0, tie, 41.0)).unwrap();
            assert_eq!(q.q, 1.0);
        }
    }

    #[test]
    fn q_scale_invariance() {
        let base = quantile_q(&tally_of(61.1, 14.7, 24.2)).unwrap();
        let scaled = quantile_q(&tally_of(611.0, 147.0, 242.0)).unwrap();
        assert!((base.q - scaled.q).abs() < 1e-12);
    }

    #[test]
    fn q_sentinel_and_errors() {
        let q = quantile_q(&tally_of(5.0, 0.0, 0.0)).unwrap();
        assert!(q.q.is_infinite());
        assert_eq!(q.percentages, (100.0, 0.0, 0.0));
        assert!(matches!(
            quantile_q(&tally_of(0.0, 0.0, 0.0)),
            Err(Error::Tally(_))
        ));
    }

    #[test]
    fn q_serializes_inf_as_string() {
        let value = QValue {
            q: f64::INFINITY,
            percentages: (100.0, 0.0, 0.0),
        };
        let json = serde_json::to_string(&value).unwrap();
        assert!(json.contains("\"inf\""));
        let back: QValue = serde_json::from_str(&json).unwrap();
        assert!(back.q.is_infinite());

        let finite = QValue {
            q: 1.9485,
            percentages: (61.1, 14.7, 24.2),
        };
        let back: QValue = serde_json::from_str(&serde_json::to_string(&finite).unwrap()).unwrap();
        assert_eq!(back, finite);
    }

    fn q_map(entries: &[(&str, f64)]) -> BTreeMap<String, QValue> {
        entries
            .iter()
            .map(|(id, q)| {
                (
                    id.to_string(),
                    QValue {
                        q: *q,
                        percentages: (0.0, 0.0, 0.0),
                    },
                )
            })
            .collect()
    }

    #[test]
    fn ranking_matches_published_order() {
        let ranking = rank_by_q(&q_map(&[
            ("NRMS", 1.9485),
            ("LightGCN", 1.9139),
            ("SASRec", 1.7884),
            ("DeepFM", 1.7237),
        ]));
        let order: Vec<(&str, usize)> = ranking
            .iter()
            .map(|r| (r.system_id.as_str(), r.rank))
            .collect();
        assert_eq!(
            order,
            vec![("NRMS", 1), ("LightGCN", 2), ("SASRec", 3), ("DeepFM", 4)]
        );
        assert!(ranking.iter().all(|r| !r.tied));

        let ranking = rank_by_q(&q_map(&[
            ("LightGCN", 1.7858),
            ("DeepFM", 1.7684),
            ("NRMS", 1.6138),
            ("SASRec", 1.3927),
        ]));
        let order: Vec<&str> = ranking.iter().map(|r| r.system_id.as_str()).collect();
        assert_eq!(order, vec!["LightGCN", "DeepFM", "NRMS", "SASRec"]);
    }

    #[test]
    fn ranking_ties_share_better_rank_and_flag() {
        let ranking = rank_by_q(&q_map(&[("x", 2.0), ("y", 2.0), ("z", 1.0)]));
        assert_eq!(ranking[0].rank, 1);
        assert_eq!(ranking[1].rank, 1);
        assert_eq!(ranking[2].rank, 3);
        assert!(ranking[0].tied && ranking[1].tied);
        assert!(!ranking[2].tied);
    }

    #[test]
    fn ranking_infinity_sorts_first() {
        let ranking = rank_by_q(&q_map(&[("finite", 99.0), ("undefeated", f64::INFINITY)]));
        assert_eq!(ranking[0].system_id, "undefeated");
        assert_eq!(ranking[0].rank, 1);
    }

    #[test]
    fn correlation_aligns_and_excludes() {
        let qs = q_map(&[("a", 1.0), ("b", 2.0), ("c", 3.0), ("inf", f64::INFINITY)]);
        let metrics: BTreeMap<String, f64> = [("a", 10.0), ("b", 20.0), ("c", 30.0), ("inf", 40.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let (result, excluded) = correlate_q_vs_metric(&qs, &metrics).unwrap();
        assert!((result.r - 1.0).abs() < 1e-12);
        assert_eq!(result.n, 3);
        assert_eq!(excluded, vec!["inf".to_string()]);
    }

    #[test]
    fn correlation_needs_three_finite_pairs() {
        let qs = q_map(&[("a", 1.0), ("b", 2.0), ("inf", f64::INFINITY)]);
        let metrics: BTreeMap<String, f64> = [("a", 1.0), ("b", 2.0), ("inf", 3.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert!(correlate_q_vs_metric(&qs, &metrics).is_err());
    }

    #[test]
    fn report_aggregates_and_ranks() {
        let mut lines = Vec::new();
        for i in 0..4 {
            lines.push(verdict_line(&format!("u{i}"), Outcome::A, &[("accuracy", Outcome::A)]));
        }
        let mut weaker = Vec::new();
        for line in &lines[..2] {
            if let VerdictLine::Verdict(v) = line {
                let mut other = v.clone();
                other.verdict.system_a_id = "gamma".into();
                other.verdict.overall = Outcome::B;
                weaker.push(VerdictLine::Verdict(other));
            }
        }
        weaker.push(verdict_line("u9", Outcome::Tie, &[]));
        if let VerdictLine::Verdict(v) = weaker.last_mut().unwrap() {
            v.verdict.system_a_id = "gamma".into();
        }
        lines.extend(weaker);
        let report = build_report(&lines, &ReportOptions::new()).unwrap();
        assert_eq!(report.baseline_id.as_deref(), Some("beta"));
        assert_eq!(report.pairs.len(), 2);
        assert_eq!(report.ranking.len(), 2);
        assert_eq!(report.ranking[0].system_id, "alpha");
        assert_eq!(report.ranking[0].rank, 1);
        assert_eq!(report.ranking[1].system_id, "gamma");
        assert!(report.failures.is_empty());
    }

    #[test]
    fn report_order_independence() {
        let mut lines = vec![
            verdict_line("u0", Outcome::A, &[("accuracy", Outcome::A)]),
            verdict_line("u1", Outcome::B, &[("accuracy", Outcome::Tie)]),
            verdict_line("u2", Outcome::Tie, &[]),
        ];
        let forward = build_report(&lines, &ReportOptions::new()).unwrap();
        lines.reverse();
        let backward = build_report(&lines, &ReportOptions::new()).unwrap();
        assert_eq!(forward, backward);
    }

    #[test]
    fn absolute_scores_normalize_min_max() {
        let lines = vec![verdict_line("u0", Outcome::A, &[])];
        let mut options = ReportOptions::new();
        options.absolute_scores = Some(vec![
            ScoreVerdict { user_id: "u0".into(), system_id: "x".into(), score: 0.2 },
            ScoreVerdict { user_id: "u0".into(), system_id: "y".into(), score: 0.5 },
            ScoreVerdict { user_id: "u0".into(), system_id: "z".into(), score: 0.8 },
        ]);
        let report = build_report(&lines, &options).unwrap();
        let absolute = report.absolute.unwrap();
        assert_eq!(absolute["x"].normalized, 0.0);
        assert!((absolute["y"].normalized - 0.5).abs() < 1e-12);
        assert_eq!(absolute["z"].normalized, 1.0);
    }
}
