//! Parsing raw judge responses into structured verdicts.
//!
//! The primary path extracts the last well-formed fenced JSON block of
//! the response; dimensions it misses are recovered by a regex scan of
//! the prose under each dimension heading. Positional A/B labels are
//! inverted back to logical systems when the prompt presented the lists
//! swapped.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::judge::{ProviderMeta, RawJudgment};
use crate::promptkit::{AbsoluteBundle, PromptBundle};

/// Three-way pairwise outcome, always in logical-system terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "tie")]
    Tie,
}

impl Outcome {
    /// Normalize a judge-written label: case-insensitive, with "draw"
    /// accepted as a tie.
    pub fn parse(text: &str) -> Option<Outcome> {
        match text.trim().to_ascii_lowercase().as_str() {
            "a" => Some(Outcome::A),
            "b" => Some(Outcome::B),
            "tie" | "draw" => Some(Outcome::Tie),
            _ => None,
        }
    }

    /// Exchange the two systems' roles; ties are fixed points.
    pub fn invert(self) -> Outcome {
        match self {
            Outcome::A => Outcome::B,
            Outcome::B => Outcome::A,
            Outcome::Tie => Outcome::Tie,
        }
    }
}

/// Parsed verdict for one (user, system A, system B) judging session.
///
/// Outcomes are stored post-un-swap, naming logical systems. Dimension
/// keys absent from both the JSON block and the prose are simply absent
/// from `per_dimension` (recorded as missing, never coerced to a tie).
/// The `analysis` text is captured verbatim, so under a swapped
/// presentation its "A"/"B" wording refers to positions, not systems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub user_id: String,
    pub system_a_id: String,
    pub system_b_id: String,
    pub per_dimension: BTreeMap<String, Outcome>,
    pub overall: Outcome,
    #[serde(default)]
    pub analysis: BTreeMap<String, String>,
    pub swap_corrected: bool,
}

/// A single-list 0-1 score (absolute mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVerdict {
    pub user_id: String,
    pub system_id: String,
    pub score: f64,
}

/// One line of the verdicts file: a parsed verdict with provider audit
/// data, or the record of a judgment that failed or did not parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerdictLine {
    Verdict(JudgedVerdict),
    Failure(JudgmentFailure),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgedVerdict {
    #[serde(flatten)]
    pub verdict: PairVerdict,
    pub provider_meta: ProviderMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentFailure {
    pub user_id: String,
    pub system_a_id: String,
    pub system_b_id: String,
    pub error: String,
}

fn fence_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?s)```[a-zA-Z]*[ \t]*\r?\n?(.*?)```").expect("static regex")
    })
}

/// The last fenced code block whose content parses as one JSON object,
/// with the block's start offset in the text.
fn last_fenced_json(text: &str) -> Option<(usize, serde_json::Value)> {
    let mut found = None;
    for captures in fence_regex().captures_iter(text) {
        let body = captures.get(1).expect("fence capture").as_str().trim();
        if let Ok(value) = serde_json::from_str::<serde_json::Value>(body) {
            if value.is_object() {
                found = Some((captures.get(0).expect("fence match").start(), value));
            }
        }
    }
    found
}

/// First position of each dimension key at a line start (case-insensitive,
/// optional heading markup), mapped to the prose segment from that heading
/// to the next one (or to `end`).
fn dimension_segments<'t>(
    text: &'t str,
    dimension_keys: &[String],
    end: usize,
) -> BTreeMap<String, &'t str> {
    let prose = &text[..end];
    let mut starts: Vec<(usize, &String)> = Vec::new();
    for key in dimension_keys {
        let pattern = format!(r"(?im)^[ \t#*]*{}\s*[:.\-]", regex::escape(key));
        let re = Regex::new(&pattern).expect("escaped key regex");
        if let Some(m) = re.find(prose) {
            starts.push((m.start(), key));
        }
    }
    starts.sort_by_key(|(pos, _)| *pos);
    let mut segments = BTreeMap::new();
    for (i, (pos, key)) in starts.iter().enumerate() {
        let seg_end = starts.get(i + 1).map_or(end, |(next, _)| *next);
        segments.insert((*key).clone(), prose[*pos..seg_end].trim());
    }
    segments
}

/// Scan a prose segment for "A wins." / "B wins." / "Tie." style calls;
/// the earliest match decides.
fn scan_outcome(segment: &str) -> Option<Outcome> {
    static A_RE: OnceLock<Regex> = OnceLock::new();
    static B_RE: OnceLock<Regex> = OnceLock::new();
    static TIE_RE: OnceLock<Regex> = OnceLock::new();
    let a = A_RE.get_or_init(|| {
        Regex::new(r"(?i)\b(?:system\s+)?a\s+(?:wins|is\s+better)").expect("static regex")
    });
    let b = B_RE.get_or_init(|| {
        Regex::new(r"(?i)\b(?:system\s+)?b\s+(?:wins|is\s+better)").expect("static regex")
    });
    let tie = TIE_RE.get_or_init(|| Regex::new(r"(?i)\b(?:tie|tied|draw)\b").expect("static regex"));
    let candidates = [
        (a.find(segment).map(|m| m.start()), Outcome::A),
        (b.find(segment).map(|m| m.start()), Outcome::B),
        (tie.find(segment).map(|m| m.start()), Outcome::Tie),
    ];
    candidates
        .into_iter()
        .filter_map(|(pos, outcome)| pos.map(|p| (p, outcome)))
        .min_by_key(|(pos, _)| *pos)
        .map(|(_, outcome)| outcome)
}

/// Find the overall call in prose: the segment after the last "overall"
/// mention, scanned like a dimension segment.
fn scan_overall(text: &str, end: usize) -> Option<Outcome> {
    let prose = &text[..end];
    let lower = prose.to_ascii_lowercase();
    let pos = lower.rfind("overall")?;
    scan_outcome(&prose[pos..])
}

/// Parse one raw pairwise judgment against the bundle that produced it.
///
/// Extraction order: last well-formed fenced JSON block for per-dimension
/// and overall labels; regex scan of the prose under each dimension
/// heading for anything the JSON missed; per-dimension analysis text
/// captured verbatim. With `swap_applied` on the bundle, every label is
/// inverted so the stored verdict names logical systems.
pub fn parse_verdict(raw: &RawJudgment, bundle: &PromptBundle) -> Result<PairVerdict> {
    let text = &raw.response_text;
    if text.trim().is_empty() {
        return Err(Error::Unparseable {
            reason: "empty response".into(),
            response: text.clone(),
        });
    }

    let json_block = last_fenced_json(text);
    let prose_end = json_block.as_ref().map_or(text.len(), |(start, _)| *start);

    let mut per_dimension: BTreeMap<String, Outcome> = BTreeMap::new();
    let mut overall: Option<Outcome> = None;

    if let Some((_, value)) = &json_block {
        if let Some(dims_value) = value.get("dimensions") {
            let object = dims_value.as_object().ok_or_else(|| {
                Error::VerdictInvalid("\"dimensions\" is not a JSON object".into())
            })?;
            let unknown: Vec<&str> = object
                .keys()
                .filter(|k| !bundle.dimension_keys.contains(k))
                .map(String::as_str)
                .collect();
            if !unknown.is_empty() {
                return Err(Error::VerdictInvalid(format!(
                    "unknown dimension keys in verdict JSON: {}",
                    unknown.join(", ")
                )));
            }
            for (key, label) in object {
                let label = label.as_str().ok_or_else(|| {
                    Error::VerdictInvalid(format!("dimension {key:?}: label is not a string"))
                })?;
                let outcome = Outcome::parse(label).ok_or_else(|| {
                    Error::VerdictInvalid(format!(
                        "dimension {key:?}: unrecognized label {label:?}"
                    ))
                })?;
                per_dimension.insert(key.clone(), outcome);
            }
        }
        if let Some(label) = value.get("overall") {
            let label = label.as_str().ok_or_else(|| {
                Error::VerdictInvalid("\"overall\" is not a string".into())
            })?;
            overall = Some(Outcome::parse(label).ok_or_else(|| {
                Error::VerdictInvalid(format!("unrecognized overall label {label:?}"))
            })?);
        }
    }

    let segments = dimension_segments(text, &bundle.dimension_keys, prose_end);
    let mut analysis = BTreeMap::new();
    for key in &bundle.dimension_keys {
        if let Some(segment) = segments.get(key) {
            analysis.insert(key.clone(), (*segment).to_string());
            if !per_dimension.contains_key(key) {
                if let Some(outcome) = scan_outcome(segment) {
                    per_dimension.insert(key.clone(), outcome);
                }
            }
        }
    }

    let overall = match overall.or_else(|| scan_overall(text, prose_end)) {
        Some(outcome) => outcome,
        None => {
            return Err(Error::Unparseable {
                reason: "no verdict JSON block and no overall call in the prose".into(),
                response: text.clone(),
            })
        }
    };

    let swap_corrected = bundle.swap_applied;
    let (per_dimension, overall) = if swap_corrected {
        (
            per_dimension.into_iter().map(|(k, v)| (k, v.invert())).collect(),
            overall.invert(),
        )
    } else {
        (per_dimension, overall)
    };

    Ok(PairVerdict {
        user_id: bundle.user_id.clone(),
        system_a_id: bundle.system_a_id.clone(),
        system_b_id: bundle.system_b_id.clone(),
        per_dimension,
        overall,
        analysis,
        swap_corrected,
    })
}

/// Parse an absolute-mode judgment into its 0-1 score.
pub fn parse_score(raw: &RawJudgment, bundle: &AbsoluteBundle) -> Result<ScoreVerdict> {
    let text = &raw.response_text;
    let mut score: Option<f64> = None;
    if let Some((_, value)) = last_fenced_json(text) {
        if let Some(s) = value.get("score") {
            score = Some(s.as_f64().ok_or_else(|| {
                Error::VerdictInvalid("\"score\" is not a number".into())
            })?);
        }
    }
    if score.is_none() {
        static SCORE_RE: OnceLock<Regex> = OnceLock::new();
        let re = SCORE_RE.get_or_init(|| {
            Regex::new(r"(?i)\bscore\b[^0-9.]*([0-9]*\.?[0-9]+)").expect("static regex")
        });
        score = re
            .captures(text)
            .and_then(|c| c.get(1))
            .and_then(|m| m.as_str().parse::<f64>().ok());
    }
    let score = score.ok_or_else(|| Error::Unparseable {
        reason: "no score found in response".into(),
        response: text.clone(),
    })?;
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::VerdictInvalid(format!(
            "score {score} is outside [0, 1]"
        )));
    }
    Ok(ScoreVerdict {
        user_id: bundle.user_id.clone(),
        system_id: bundle.system_id.clone(),
        score,
    })
}

/// Write verdict lines as JSON Lines.
pub fn write_verdict_lines(path: &Path, lines: &[VerdictLine]) -> Result<()> {
    let mut out = Vec::new();
    for line in lines {
        serde_json::to_writer(&mut out, line).map_err(|e| Error::json("verdict line", e))?;
        out.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))
}

/// Read a verdicts JSON Lines file.
pub fn read_verdict_lines(path: &Path) -> Result<Vec<VerdictLine>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: VerdictLine = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{}:{}", path.display(), lineno + 1), e))?;
        lines.push(parsed);
    }
    Ok(lines)
}
