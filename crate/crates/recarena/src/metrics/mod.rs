//! Offline reference metrics (AUC, nDCG@k, URD) and Pearson correlation
//! with a t-distribution significance test.
//!
//! All operations are pure functions over immutable inputs.

pub mod special;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Item, RecList};
use crate::error::{Error, Result};

/// One model score for a labeled user-item example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub user_id: String,
    pub item_id: String,
    /// Binary relevance: 1 = positive, 0 = negative.
    pub label: u8,
    pub score: f64,
}

/// Graded relevance of one item for one user (binary by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceJudgment {
    pub user_id: String,
    pub item_id: String,
    pub preference: f64,
}

/// Pearson coefficient with two-sided significance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// How AUC pools examples: one statistic over everything, or the mean of
/// per-user statistics (users lacking both classes are skipped).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AucScope {
    Global,
    PerUserMean,
}

impl std::str::FromStr for AucScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(AucScope::Global),
            "per-user-mean" => Ok(AucScope::PerUserMean),
            other => Err(Error::Input(format!(
                "unknown AUC scope {other:?}, expected \"global\" or \"per-user-mean\""
            ))),
        }
    }
}

/// Mann-Whitney AUC pooled over all examples: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties
/// counted one half.
pub fn auc(examples: &[ScoredExample]) -> Result<f64> {
    let pairs: Vec<(f64, u8)> = examples.iter().map(|e| (e.score, e.label)).collect();
    mann_whitney(&pairs)
}

/// AUC under the configured pooling scope.
pub fn auc_scoped(examples: &[ScoredExample], scope: AucScope) -> Result<f64> {
    match scope {
        AucScope::Global => auc(examples),
        AucScope::PerUserMean => {
            let mut per_user: BTreeMap<&str, Vec<(f64, u8)>> = BTreeMap::new();
            for e in examples {
                per_user.entry(e.user_id.as_str()).or_default().push((e.score, e.label));
            }
            let mut total = 0.0;
            let mut counted = 0usize;
            let mut skipped = 0usize;
            for pairs in per_user.values() {
                match mann_whitney(pairs) {
                    Ok(v) => {
                        total += v;
                        counted += 1;
                    }
                    Err(_) => skipped += 1,
                }
            }
            if counted == 0 {
                return Err(Error::UndefinedMetric(
                    "per-user AUC: no user has both a positive and a negative example".into(),
                ));
            }
            if skipped > 0 {
                log::warn!("per-user AUC skipped {skipped} single-class user(s)");
            }
            Ok(total / counted as f64)
        }
    }
}

/// Rank-sum form with midranks for ties; equivalent to exhaustive pair
/// counting but O(n log n).
fn mann_whitney(pairs: &[(f64, u8)]) -> Result<f64> {
    let n_pos = pairs.iter().filter(|(_, l)| *l == 1).count();
    let n_neg = pairs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUC needs both classes, got {n_pos} positive(s) and {n_neg} negative(s)"
        )));
    }
    if let Some((s, _)) = pairs.iter().find(|(s, _)| !s.is_finite()) {
        return Err(Error::Input(format!("non-finite score {s}")));
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].0.partial_cmp(&pairs[b].0).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pairs[order[j + 1]].0 == pairs[order[i]].0 {
            j += 1;
        }
        // 1-based average rank of the tied block [i, j]
        let midrank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if pairs[idx].1 == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Normalized discounted cumulative gain over the first k positions.
///
/// Gain at 1-based position i is (2^p − 1)/log2(i+1) where p is the
/// user's preference for the item (0 when unjudged). The ideal list is
/// the user's full relevant set (preference > 0) ordered by preference
/// descending, truncated at k. A user with no relevant items scores 0.
pub fn ndcg_at_k(rec: &RecList, judgments: &[RelevanceJudgment], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let mut pref: HashMap<&str, f64> = HashMap::new();
    for j in judgments.iter().filter(|j| j.user_id == rec.user_id) {
        let entry = pref.entry(j.item_id.as_str()).or_insert(0.0);
        if j.preference > *entry {
            *entry = j.preference;
        }
    }
    let dcg: f64 = rec
        .items
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, item_id)| {
            let p = pref.get(item_id.as_str()).copied().unwrap_or(0.0);
            gain(p) / discount(i)
        })
        .sum();
    let mut ideal: Vec<f64> = pref.values().copied().filter(|p| *p > 0.0).collect();
    ideal.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, p)| gain(*p) / discount(i))
        .sum();
    if idcg <= 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

fn gain(preference: f64) -> f64 {
    2f64.powf(preference) - 1.0
}

fn discount(zero_based_rank: usize) -> f64 {
    (zero_based_rank as f64 + 2.0).log2()
}

/// Binary relevance judgments derived from corpus interaction labels.
pub fn relevance_from_corpus(corpus: &Corpus) -> Vec<RelevanceJudgment> {
    corpus
        .interactions
        .iter()
        .map(|i| RelevanceJudgment {
            user_id: i.user_id.clone(),
            item_id: i.item_id.clone(),
            preference: f64::from(i.label),
        })
        .collect()
}

/// Intra-list diversity: 1 minus the mean pairwise similarity between the
/// list's items.
///
/// Similarity is the Jaccard index of the two items' category sets. When
/// both sets are empty it falls back to Jaccard over lowercased title
/// tokens; when exactly one is empty the pair counts as similarity 0 and
/// a warning is emitted. Result is in [0, 1]: identical sets everywhere
/// give 0, pairwise-disjoint sets give 1.
pub fn urd(rec: &RecList, corpus: &Corpus) -> Result<f64> {
    let n = rec.items.len();
    if n < 2 {
        return Err(Error::UndefinedMetric(format!(
            "URD needs a list of at least 2 items, got {n}"
        )));
    }
    let items: Vec<&Item> = rec
        .items
        .iter()
        .map(|item_id| {
            corpus.item(item_id).ok_or_else(|| {
                Error::RecListInvalid(format!(
                    "list for ({}, {}) references unknown item {:?}",
                    rec.system_id, rec.user_id, item_id
                ))
            })
        })
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    let mut mixed_empty = false;
    for a in 0..n {
        for b in (a + 1)..n {
            sum += item_similarity(items[a], items[b], &mut mixed_empty);
        }
    }
    if mixed_empty {
        log::warn!(
            "URD for ({}, {}): item(s) with empty category sets paired with categorized items count as similarity 0",
            rec.system_id,
            rec.user_id
        );
    }
    Ok(1.0 - 2.0 * sum / (n * (n - 1)) as f64)
}

fn item_similarity(a: &Item, b: &Item, mixed_empty: &mut bool) -> f64 {
    match (a.categories.is_empty(), b.categories.is_empty()) {
        (false, false) => jaccard(&a.categories, &b.categories),
        (true, true) => jaccard(&title_tokens(&a.title), &title_tokens(&b.title)),
        _ => {
            *mixed_empty = true;
            0.0
        }
    }
}

pub(crate) fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    if union == 0 {
        0.0
    } else {
        intersection as f64 / union as f64
    }
}

fn title_tokens(title: &str) -> BTreeSet<String> {
    title.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Sample Pearson coefficient with a two-sided p-value from the
/// t-distribution: t = r·sqrt((n−2)/(1−r²)) with n−2 degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    if xs.len() != ys.len() {
        return Err(Error::Input(format!(
            "series length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 3 samples, got {n}"
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite value in correlation input".into()));
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant series".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let one_minus_r2 = 1.0 - r * r;
    let p_value = if one_minus_r2 <= f64::EPSILON {
        0.0
    } else {
        special::t_two_sided_p(r * (dof / one_minus_r2).sqrt(), dof)
    };
    Ok(CorrelationResult { r, p_value, n })
}

/// Read JSON Lines of {user_id, item_id, label, score}.
pub fn read_scores(path: &Path) -> Result<Vec<ScoredExample>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut examples = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let example: ScoredExample = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{}:{}", path.display(), lineno + 1), e))?;
        if example.label > 1 {
            return Err(Error::Input(format!(
                "{}:{}: label {} is not binary",
                path.display(),
                lineno + 1,
                example.label
            )));
        }
        if !example.score.is_finite() {
            return Err(Error::Input(format!(
                "{}:{}: non-finite score",
                path.display(),
                lineno + 1
            )));
        }
        examples.push(example);
    }
    Ok(examples)
}

/// Write JSON Lines of scored examples.
pub fn write_scores(path: &Path, examples: &[ScoredExample]) -> Result<()> {
    let mut out = Vec::new();
    for example in examples {
        serde_json::to_writer(&mut out, example).map_err(|e| Error::json("scores", e))?;
        out.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))
}

/// Read JSON Lines of {user_id, item_id, preference} relevance overrides.
pub fn read_relevance(path: &Path) -> Result<Vec<RelevanceJudgment>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut judgments = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let judgment: RelevanceJudgment = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{}:{}", path.display(), lineno + 1), e))?;
        if !judgment.preference.is_finite() || judgment.preference < 0.0 {
            return Err(Error::Input(format!(
                "{}:{}: preference must be a non-negative number",
                path.display(),
                lineno + 1
            )));
        }
        judgments.push(judgment);
    }
    Ok(judgments)
}
