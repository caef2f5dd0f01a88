//! User-profile rendering and judging-prompt assembly.
//!
//! A prompt is assembled from five template sections in fixed order:
//! persona, viewing history, candidate lists, dimension instructions,
//! output instructions. Sections live in a template file (a default
//! ships in the binary), placeholders use `{name}` with `{{`/`}}` for
//! literal braces, and the evaluation dimensions come from a
//! configurable registry whose six defaults cover accuracy,
//! satisfaction, inspiration, content quality, transparency, and
//! impact.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, Item, RecList};
use crate::error::{Error, Result};

const DEFAULT_TEMPLATE: &str = include_str!("default_template.txt");

/// One evaluation dimension: a short key and the first-person statement
/// shown to the judge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    pub key: String,
    pub description: String,
}

impl Dimension {
    fn new(key: &str, description: &str) -> Self {
        Dimension {
            key: key.to_string(),
            description: description.to_string(),
        }
    }
}

/// Ordered set of evaluation dimensions with unique keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionRegistry {
    dimensions: Vec<Dimension>,
}

impl DimensionRegistry {
    /// The six default dimensions, in presentation order.
    pub fn defaults() -> Self {
        DimensionRegistry {
            dimensions: vec![
                Dimension::new(
                    "accuracy",
                    "This recommendation result list aligns well with my interests.",
                ),
                Dimension::new(
                    "satisfaction",
                    "I am satisfied with the recommendation results provided by this recommender system.",
                ),
                Dimension::new(
                    "inspiration",
                    "The recommended items inspire me to think, promote further exploration, and enhanced my willingness to interact with the recommendation platform.",
                ),
                Dimension::new("content_quality", "The recommended items are of high quality."),
                Dimension::new(
                    "transparency",
                    "The recommendation results are associated with one of my personal information or an interaction history, and it is evident which feature is relevant.",
                ),
                Dimension::new(
                    "impact",
                    "The impact of this recommendation result list on me is positive.",
                ),
            ],
        }
    }

    /// Build a registry, enforcing unique keys and non-empty fields.
    pub fn new(dimensions: Vec<Dimension>) -> Result<Self> {
        if dimensions.is_empty() {
            return Err(Error::Registry("registry needs at least one dimension".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for dim in &dimensions {
            if dim.key.is_empty() {
                return Err(Error::Registry("dimension with empty key".into()));
            }
            if dim.description.is_empty() {
                return Err(Error::Registry(format!("dimension {:?} has an empty description", dim.key)));
            }
            if !seen.insert(dim.key.as_str()) {
                return Err(Error::Registry(format!("duplicate dimension key {:?}", dim.key)));
            }
        }
        Ok(DimensionRegistry { dimensions })
    }

    /// Load a JSON array of {key, description} objects.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dimensions: Vec<Dimension> = serde_json::from_str(&text)
            .map_err(|e| Error::json(format!("dimension registry {}", path.display()), e))?;
        Self::new(dimensions)
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn keys(&self) -> Vec<String> {
        self.dimensions.iter().map(|d| d.key.clone()).collect()
    }

    pub fn get(&self, key: &str) -> Option<&Dimension> {
        self.dimensions.iter().find(|d| d.key == key)
    }

    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }

    /// The numbered dimension block substituted into the prompt.
    fn render_block(&self) -> String {
        self.dimensions
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{}. {}: {}", i + 1, d.key, d.description))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// The JSON skeleton the output instructions ask the judge to fill.
    fn render_schema(&self) -> String {
        let mut out = String::from("{\n  \"dimensions\": {\n");
        for (i, d) in self.dimensions.iter().enumerate() {
            let comma = if i + 1 < self.dimensions.len() { "," } else { "" };
            out.push_str(&format!("    {}: \"A|B|tie\"{comma}\n", json_quote(&d.key)));
        }
        out.push_str("  },\n  \"overall\": \"A|B|tie\"\n}");
        out
    }
}

fn json_quote(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

/// Knobs for profile and prompt rendering.
#[derive(Debug, Clone)]
pub struct PromptOptions {
    /// Most-recent positive interactions rendered into the history section.
    pub max_history: usize,
    /// Upper bound on prompt length in characters; history is dropped
    /// (oldest first) to fit, candidate lists never are.
    pub char_budget: usize,
    /// Append item abstracts when present.
    pub include_abstracts: bool,
}

impl Default for PromptOptions {
    fn default() -> Self {
        PromptOptions {
            max_history: 50,
            char_budget: 20_000,
            include_abstracts: false,
        }
    }
}

impl PromptOptions {
    fn with_max_history(&self, max_history: usize) -> Self {
        PromptOptions {
            max_history,
            ..self.clone()
        }
    }
}

/// A user-profile description in two renderable parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub user_id: String,
    /// Role-play paragraph built from the user's attributes.
    pub persona: String,
    /// Positive history, one item line per row, oldest first.
    pub history: String,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\n\n{}", self.persona, self.history)
    }
}

/// Render the persona paragraph and history block for one user.
///
/// Attributes render in a fixed order (gender, age range, occupation,
/// then any extras alphabetically); users with no attributes get a
/// neutral line. The history keeps the `max_history` most recent
/// positive interactions, rendered oldest first as "title (categories)".
pub fn build_profile(corpus: &Corpus, user_id: &str, options: &PromptOptions) -> Result<Profile> {
    let user = corpus
        .user(user_id)
        .ok_or_else(|| Error::UnknownUser(user_id.to_string()))?;

    let mut persona = String::from("You are a user of this platform.");
    if !user.attributes.is_empty() {
        let mut parts = Vec::new();
        for key in ["gender", "age_range", "occupation_label"] {
            if let Some(value) = user.attributes.get(key) {
                let phrase = match key {
                    "gender" => format!("gender {value}"),
                    "age_range" => format!("aged {value}"),
                    _ => format!("occupation {value}"),
                };
                parts.push(phrase);
            }
        }
        for (key, value) in &user.attributes {
            if !matches!(key.as_str(), "gender" | "age_range" | "occupation_label") {
                parts.push(format!("{key} {value}"));
            }
        }
        persona.push_str(&format!(" Your profile: {}.", parts.join(", ")));
    } else {
        persona.push_str(" No profile attributes are known; judge from your viewing history alone.");
    }

    let history = corpus.user_history(user_id);
    let start = history.len().saturating_sub(options.max_history);
    let mut lines = Vec::new();
    for interaction in &history[start..] {
        let item = corpus.item(&interaction.item_id).ok_or_else(|| {
            Error::CorpusInvariant(format!("history references unknown item {:?}", interaction.item_id))
        })?;
        lines.push(format!("- {}", item_line(item, options.include_abstracts)));
    }
    let history = if lines.is_empty() {
        "(no viewing history available)".to_string()
    } else {
        lines.join("\n")
    };

    Ok(Profile {
        user_id: user_id.to_string(),
        persona,
        history,
    })
}

fn item_line(item: &Item, include_abstract: bool) -> String {
    let mut line = item.title.clone();
    if !item.categories.is_empty() {
        let cats: Vec<&str> = item.categories.iter().map(String::as_str).collect();
        line.push_str(&format!(" ({})", cats.join(", ")));
    }
    if include_abstract {
        if let Some(text) = &item.abstract_text {
            line.push_str(&format!(": {text}"));
        }
    }
    line
}

fn render_list(corpus: &Corpus, items: &[String], include_abstracts: bool) -> Result<String> {
    let mut lines = Vec::new();
    for (i, item_id) in items.iter().enumerate() {
        let item = corpus
            .item(item_id)
            .ok_or_else(|| Error::RecListInvalid(format!("unknown item {item_id:?}")))?;
        lines.push(format!("{}. {}", i + 1, item_line(item, include_abstracts)));
    }
    Ok(lines.join("\n"))
}

const PAIR_SECTIONS: [&str; 5] = ["persona", "history", "candidates", "dimensions", "output"];
const ABSOLUTE_SECTIONS: [&str; 5] = [
    "persona",
    "history",
    "candidates_absolute",
    "dimensions_absolute",
    "output_absolute",
];

/// Named template sections with `{placeholder}` markers.
#[derive(Debug, Clone)]
pub struct PromptTemplate {
    sections: BTreeMap<String, String>,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::parse(DEFAULT_TEMPLATE).expect("bundled template is valid")
    }
}

impl PromptTemplate {
    /// Parse template text: `[section]` header lines introduce sections,
    /// `#` lines before the first header are comments, everything else is
    /// literal section body.
    pub fn parse(text: &str) -> Result<Self> {
        let known: Vec<&str> = PAIR_SECTIONS.iter().chain(ABSOLUTE_SECTIONS.iter()).copied().collect();
        let mut sections: BTreeMap<String, String> = BTreeMap::new();
        let mut current: Option<(String, Vec<&str>)> = None;
        for line in text.lines() {
            let trimmed = line.trim_end();
            if trimmed.starts_with('[') && trimmed.ends_with(']') && trimmed.len() > 2 {
                let name = &trimmed[1..trimmed.len() - 1];
                if !known.contains(&name) {
                    return Err(Error::Template(format!("unknown template section [{name}]")));
                }
                if let Some((prev, body)) = current.take() {
                    sections.insert(prev, finish_body(&body));
                }
                if sections.contains_key(name) {
                    return Err(Error::Template(format!("duplicate template section [{name}]")));
                }
                current = Some((name.to_string(), Vec::new()));
            } else if let Some((_, body)) = current.as_mut() {
                body.push(line);
            } else if !(line.trim().is_empty() || line.trim_start().starts_with('#')) {
                return Err(Error::Template(format!(
                    "text before the first [section] header: {line:?}"
                )));
            }
        }
        if let Some((prev, body)) = current.take() {
            sections.insert(prev, finish_body(&body));
        }
        if sections.is_empty() {
            return Err(Error::Template("template defines no sections".into()));
        }
        Ok(PromptTemplate { sections })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn section(&self, name: &str) -> Result<&str> {
        self.sections
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| Error::Template(format!("template is missing section [{name}]")))
    }

    /// Substitute placeholders in one section. Every `{name}` must
    /// resolve; `{{` and `}}` emit literal braces.
    fn render_section(&self, name: &str, subs: &BTreeMap<&str, &str>) -> Result<String> {
        let body = self.section(name)?;
        let mut out = String::with_capacity(body.len());
        let mut chars = body.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '{' => {
                    if chars.peek() == Some(&'{') {
                        chars.next();
                        out.push('{');
                        continue;
                    }
                    let mut key = String::new();
                    loop {
                        match chars.next() {
                            Some('}') => break,
                            Some(k) => key.push(k),
                            None => {
                                return Err(Error::Template(format!(
                                    "section [{name}]: unterminated placeholder {{{key}"
                                )))
                            }
                        }
                    }
                    match subs.get(key.as_str()) {
                        Some(value) => out.push_str(value),
                        None => {
                            return Err(Error::Template(format!(
                                "section [{name}]: unresolved placeholder {{{key}}}"
                            )))
                        }
                    }
                }
                '}' => {
                    if chars.peek() == Some(&'}') {
                        chars.next();
                        out.push('}');
                    } else {
                        return Err(Error::Template(format!(
                            "section [{name}]: unescaped }} outside a placeholder"
                        )));
                    }
                }
                _ => out.push(c),
            }
        }
        Ok(out)
    }

    fn assemble(&self, order: &[&str], subs: &BTreeMap<&str, &str>) -> Result<String> {
        let mut parts = Vec::with_capacity(order.len());
        for name in order {
            parts.push(self.render_section(name, subs)?);
        }
        Ok(parts.join("\n\n") + "\n")
    }
}

fn finish_body(lines: &[&str]) -> String {
    let start = lines.iter().position(|l| !l.trim().is_empty()).unwrap_or(lines.len());
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(start, |e| e + 1);
    lines[start..end].join("\n")
}

/// An assembled pairwise judging prompt plus the metadata the judge and
/// parser need: logical system ids, the positional item lists actually
/// shown as "A" and "B", and a content hash for caching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub user_id: String,
    pub system_a_id: String,
    pub system_b_id: String,
    pub prompt_text: String,
    /// True when the lists were presented in swapped positions: the text
    /// labels system B's list as "Recommender System A" and vice versa.
    pub swap_applied: bool,
    pub dimension_keys: Vec<String>,
    /// Hex SHA-256 of prompt_text.
    pub content_hash: String,
    /// Item ids shown under the "Recommender System A" heading.
    pub shown_a_items: Vec<String>,
    /// Item ids shown under the "Recommender System B" heading.
    pub shown_b_items: Vec<String>,
}

/// An assembled single-list scoring prompt (absolute mode).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsoluteBundle {
    pub user_id: String,
    pub system_id: String,
    pub prompt_text: String,
    pub dimension_keys: Vec<String>,
    /// Hex SHA-256 of prompt_text.
    pub content_hash: String,
    pub items: Vec<String>,
}

pub fn content_hash(prompt_text: &str) -> String {
    hex::encode(Sha256::digest(prompt_text.as_bytes()))
}

/// Assemble the five-part pairwise prompt for one user and two lists.
///
/// With `swap` set, the two lists exchange their presented positions and
/// the bundle records it so the verdict parser can invert labels back.
/// Errors if the two lists belong to different users or the assembled
/// prompt exceeds the character budget.
#[allow(clippy::too_many_arguments)]
pub fn build_prompt(
    corpus: &Corpus,
    profile: &Profile,
    rec_a: &RecList,
    rec_b: &RecList,
    registry: &DimensionRegistry,
    template: &PromptTemplate,
    options: &PromptOptions,
    swap: bool,
) -> Result<PromptBundle> {
    if rec_a.user_id != rec_b.user_id {
        return Err(Error::Prompt(format!(
            "cannot pair lists for different users {:?} and {:?}",
            rec_a.user_id, rec_b.user_id
        )));
    }
    if profile.user_id != rec_a.user_id {
        return Err(Error::Prompt(format!(
            "profile is for user {:?} but lists are for {:?}",
            profile.user_id, rec_a.user_id
        )));
    }
    rec_a.validate(corpus)?;
    rec_b.validate(corpus)?;

    let (shown_a, shown_b) = if swap { (rec_b, rec_a) } else { (rec_a, rec_b) };
    let list_a = render_list(corpus, &shown_a.items, options.include_abstracts)?;
    let list_b = render_list(corpus, &shown_b.items, options.include_abstracts)?;
    let dimensions = registry.render_block();
    let schema = registry.render_schema();

    let mut subs: BTreeMap<&str, &str> = BTreeMap::new();
    subs.insert("persona", &profile.persona);
    subs.insert("history", &profile.history);
    subs.insert("list_a", &list_a);
    subs.insert("list_b", &list_b);
    subs.insert("dimensions", &dimensions);
    subs.insert("dimension_schema", &schema);

    let prompt_text = template.assemble(&PAIR_SECTIONS, &subs)?;
    check_budget(&prompt_text, options)?;

    Ok(PromptBundle {
        user_id: rec_a.user_id.clone(),
        system_a_id: rec_a.system_id.clone(),
        system_b_id: rec_b.system_id.clone(),
        content_hash: content_hash(&prompt_text),
        prompt_text,
        swap_applied: swap,
        dimension_keys: registry.keys(),
        shown_a_items: shown_a.items.clone(),
        shown_b_items: shown_b.items.clone(),
    })
}

/// Assemble the single-list prompt for absolute 0-1 scoring.
pub fn build_absolute_prompt(
    corpus: &Corpus,
    profile: &Profile,
    rec: &RecList,
    registry: &DimensionRegistry,
    template: &PromptTemplate,
    options: &PromptOptions,
) -> Result<AbsoluteBundle> {
    if profile.user_id != rec.user_id {
        return Err(Error::Prompt(format!(
            "profile is for user {:?} but the list is for {:?}",
            profile.user_id, rec.user_id
        )));
    }
    rec.validate(corpus)?;

    let list = render_list(corpus, &rec.items, options.include_abstracts)?;
    let dimensions = registry.render_block();
    let schema = registry.render_schema();

    let mut subs: BTreeMap<&str, &str> = BTreeMap::new();
    subs.insert("persona", &profile.persona);
    subs.insert("history", &profile.history);
    subs.insert("list", &list);
    subs.insert("dimensions", &dimensions);
    subs.insert("dimension_schema", &schema);

    let prompt_text = template.assemble(&ABSOLUTE_SECTIONS, &subs)?;
    check_budget(&prompt_text, options)?;

    Ok(AbsoluteBundle {
        user_id: rec.user_id.clone(),
        system_id: rec.system_id.clone(),
        content_hash: content_hash(&prompt_text),
        prompt_text,
        dimension_keys: registry.keys(),
        items: rec.items.clone(),
    })
}

fn check_budget(prompt_text: &str, options: &PromptOptions) -> Result<()> {
    let len = prompt_text.chars().count();
    if len > options.char_budget {
        return Err(Error::Prompt(format!(
            "prompt is {len} characters, over the {} budget",
            options.char_budget
        )));
    }
    Ok(())
}

/// Build profile and pairwise prompt together, shrinking the rendered
/// history (never the candidate lists) until the prompt fits the
/// character budget. Errors only if the prompt cannot fit even with the
/// history fully dropped.
#[allow(clippy::too_many_arguments)]
pub fn build_pair_bundle(
    corpus: &Corpus,
    user_id: &str,
    rec_a: &RecList,
    rec_b: &RecList,
    registry: &DimensionRegistry,
    template: &PromptTemplate,
    options: &PromptOptions,
    swap: bool,
) -> Result<PromptBundle> {
    let attempt = |max_history: usize| -> Result<PromptBundle> {
        let opts = options.with_max_history(max_history);
        let profile = build_profile(corpus, user_id, &opts)?;
        build_prompt(corpus, &profile, rec_a, rec_b, registry, template, &opts, swap)
    };
    match attempt(options.max_history) {
        Err(Error::Prompt(_)) if options.max_history > 0 => {}
        other => return other,
    }
    // Over budget with the full history: find the largest count that fits.
    attempt(0)?;
    let (mut lo, mut hi) = (0usize, options.max_history);
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if attempt(mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    log::warn!(
        "prompt for user {user_id} over the {}-char budget; history truncated from {} to {lo} item(s)",
        options.char_budget,
        options.max_history
    );
    attempt(lo)
}

/// Build profile and absolute prompt together with the same
/// history-shrinking budget rule as [`build_pair_bundle`].
pub fn build_absolute_bundle(
    corpus: &Corpus,
    user_id: &str,
    rec: &RecList,
    registry: &DimensionRegistry,
    template: &PromptTemplate,
    options: &PromptOptions,
) -> Result<AbsoluteBundle> {
    let attempt = |max_history: usize| -> Result<AbsoluteBundle> {
        let opts = options.with_max_history(max_history);
        let profile = build_profile(corpus, user_id, &opts)?;
        build_absolute_prompt(corpus, &profile, rec, registry, template, &opts)
    };
    match attempt(options.max_history) {
        Err(Error::Prompt(_)) if options.max_history > 0 => {}
        other => return other,
    }
    attempt(0)?;
    let (mut lo, mut hi) = (0usize, options.max_history);
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if attempt(mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    log::warn!(
        "prompt for user {user_id} over the {}-char budget; history truncated from {} to {lo} item(s)",
        options.char_budget,
        options.max_history
    );
    attempt(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy::{toy_corpus, toy_systems};
    use crate::corpus::{Interaction, User};

    fn toy_pair() -> (Corpus, RecList, RecList) {
        let corpus = toy_corpus();
        let lists = toy_systems(&corpus, 5);
        let a = lists.iter().find(|l| l.system_id == "alpha" && l.user_id == "u01").unwrap().clone();
        let b = lists.iter().find(|l| l.system_id == "beta" && l.user_id == "u01").unwrap().clone();
        (corpus, a, b)
    }

    #[test]
    fn default_template_parses_with_all_sections() {
        let template = PromptTemplate::default();
        for name in PAIR_SECTIONS.iter().chain(ABSOLUTE_SECTIONS.iter()) {
            assert!(template.section(name).is_ok(), "missing [{name}]");
        }
    }

    #[test]
    fn profile_renders_attributes_and_neutral_fallback() {
        let corpus = toy_corpus();
        let options = PromptOptions::default();
        // u01 carries gender/age/occupation attributes
        let profile = build_profile(&corpus, "u01", &options).unwrap();
        assert!(profile.persona.contains("gender F"));
        assert!(profile.persona.contains("aged Under 18"));
        assert!(profile.persona.contains("occupation writer"));
        // u10 has an empty attribute map
        let profile = build_profile(&corpus, "u10", &options).unwrap();
        assert!(profile.persona.contains("a user of this platform"));
        assert!(!profile.persona.contains("Your profile"));
        assert!(profile.history.lines().count() == 6);
    }

    #[test]
    fn profile_unknown_user_errors() {
        let corpus = toy_corpus();
        assert!(matches!(
            build_profile(&corpus, "ghost", &PromptOptions::default()),
            Err(Error::UnknownUser(_))
        ));
    }

    #[test]
    fn history_keeps_most_recent() {
        // one user, 60 positive interactions with increasing timestamps
        let users = vec![User {
            user_id: "u".into(),
            attributes: Default::default(),
        }];
        let items: Vec<Item> = (0..60)
            .map(|i| Item {
                item_id: format!("i{i:02}"),
                title: format!("Title {i:02}"),
                categories: Default::default(),
                abstract_text: None,
            })
            .collect();
        let interactions: Vec<Interaction> = (0..60)
            .map(|i| Interaction {
                user_id: "u".into(),
                item_id: format!("i{i:02}"),
                label: 1,
                rating: None,
                timestamp: Some(i),
            })
            .collect();
        let corpus = Corpus::new(users, items, interactions).unwrap();
        let profile = build_profile(&corpus, "u", &PromptOptions::default()).unwrap();
        let lines: Vec<&str> = profile.history.lines().collect();
        assert_eq!(lines.len(), 50);
        assert_eq!(lines[0], "- Title 10");
        assert_eq!(lines[49], "- Title 59");
    }

    #[test]
    fn prompt_sections_appear_in_order() {
        let (corpus, a, b) = toy_pair();
        let registry = DimensionRegistry::defaults();
        let template = PromptTemplate::default();
        let options = PromptOptions::default();
        let profile = build_profile(&corpus, "u01", &options).unwrap();
        let bundle =
            build_prompt(&corpus, &profile, &a, &b, &registry, &template, &options, false).unwrap();
        let text = &bundle.prompt_text;
        let persona_at = text.find("You are a user of this platform").unwrap();
        let history_at = text.find("Your viewing history").unwrap();
        let cand_at = text.find("Recommender System A:").unwrap();
        let dims_at = text.find("1. accuracy:").unwrap();
        let out_at = text.find("fenced JSON code block").unwrap();
        assert!(persona_at < history_at && history_at < cand_at);
        assert!(cand_at < dims_at && dims_at < out_at);
        assert_eq!(bundle.content_hash.len(), 64);
        assert_eq!(bundle.dimension_keys.len(), 6);
    }

    #[test]
    fn prompt_contains_each_recommended_title_once_per_section() {
        let (corpus, a, b) = toy_pair();
        let registry = DimensionRegistry::defaults();
        let template = PromptTemplate::default();
        let options = PromptOptions::default();
        let profile = build_profile(&corpus, "u01", &options).unwrap();
        let bundle =
            build_prompt(&corpus, &profile, &a, &b, &registry, &template, &options, false).unwrap();
        let text = &bundle.prompt_text;
        let a_start = text.find("Recommender System A:").unwrap();
        let b_start = text.find("Recommender System B:").unwrap();
        let a_section = &text[a_start..b_start];
        for item_id in &a.items {
            let title = &corpus.item(item_id).unwrap().title;
            assert_eq!(a_section.matches(title.as_str()).count(), 1, "title {title:?}");
        }
    }

    #[test]
    fn swap_exchanges_positions_and_is_recorded() {
        let (corpus, a, b) = toy_pair();
        let registry = DimensionRegistry::defaults();
        let template = PromptTemplate::default();
        let options = PromptOptions::default();
        let profile = build_profile(&corpus, "u01", &options).unwrap();
        let plain =
            build_prompt(&corpus, &profile, &a, &b, &registry, &template, &options, false).unwrap();
        let swapped =
            build_prompt(&corpus, &profile, &a, &b, &registry, &template, &options, true).unwrap();
        assert!(!plain.swap_applied);
        assert!(swapped.swap_applied);
        assert_eq!(plain.system_a_id, swapped.system_a_id);
        assert_eq!(plain.shown_a_items, swapped.shown_b_items);
        assert_eq!(plain.shown_b_items, swapped.shown_a_items);
        assert_ne!(plain.prompt_text, swapped.prompt_text);
        assert_ne!(plain.content_hash, swapped.content_hash);
    }

    #[test]
    fn prompt_is_deterministic() {
        let (corpus, a, b) = toy_pair();
        let registry = DimensionRegistry::defaults();
        let template = PromptTemplate::default();
        let options = PromptOptions::default();
        let profile = build_profile(&corpus, "u01", &options).unwrap();
        let one =
            build_prompt(&corpus, &profile, &a, &b, &registry, &template, &options, false).unwrap();
        let two =
            build_prompt(&corpus, &profile, &a, &b, &registry, &template, &options, false).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn custom_registry_controls_dimension_block() {
        let (corpus, a, b) = toy_pair();
        let registry = DimensionRegistry::new(vec![
            Dimension::new("novelty", "The recommended items are new to me."),
            Dimension::new("trust", "I trust these recommendations."),
        ])
        .unwrap();
        let template = PromptTemplate::default();
        let options = PromptOptions::default();
        let profile = build_profile(&corpus, "u01", &options).unwrap();
        let bundle =
            build_prompt(&corpus, &profile, &a, &b, &registry, &template, &options, false).unwrap();
        assert!(bundle.prompt_text.contains("1. novelty:"));
        assert!(bundle.prompt_text.contains("2. trust:"));
        assert!(!bundle.prompt_text.contains("accuracy"));
        assert_eq!(bundle.dimension_keys, vec!["novelty", "trust"]);
        let defaults = DimensionRegistry::defaults();
        let bundle =
            build_prompt(&corpus, &profile, &a, &b, &defaults, &template, &options, false).unwrap();
        for (i, dim) in defaults.dimensions().iter().enumerate() {
            assert!(bundle.prompt_text.contains(&format!("{}. {}: {}", i + 1, dim.key, dim.description)));
        }
    }

    #[test]
    fn registry_rejects_duplicates_and_empties() {
        assert!(DimensionRegistry::new(vec![]).is_err());
        assert!(DimensionRegistry::new(vec![
            Dimension::new("a", "x"),
            Dimension::new("a", "y"),
        ])
        .is_err());
        assert!(DimensionRegistry::new(vec![Dimension::new("a", "")]).is_err());
    }

    #[test]
    fn template_errors_on_bad_placeholders_and_sections() {
        assert!(matches!(
            PromptTemplate::parse("[nonsense]\nhello"),
            Err(Error::Template(_))
        ));
        let template = PromptTemplate::parse("[persona]\nHello {bogus}").unwrap();
        let subs = BTreeMap::from([("persona", "p")]);
        assert!(matches!(
            template.render_section("persona", &subs),
            Err(Error::Template(_))
        ));
        let template = PromptTemplate::parse("[persona]\nbrace }").unwrap();
        assert!(template.render_section("persona", &subs).is_err());
    }

    #[test]
    fn template_escapes_literal_braces() {
        let template = PromptTemplate::parse("[persona]\n{{\"score\": {persona}}}").unwrap();
        let subs = BTreeMap::from([("persona", "0.5")]);
        let out = template.render_section("persona", &subs).unwrap();
        assert_eq!(out, "{\"score\": 0.5}");
    }

    #[test]
    fn budget_truncates_history_but_never_lists() {
        let (corpus, a, b) = toy_pair();
        let registry = DimensionRegistry::defaults();
        let template = PromptTemplate::default();
        // Find the full prompt size, then budget slightly under it.
        let options = PromptOptions::default();
        let full = build_pair_bundle(&corpus, "u01", &a, &b, &registry, &template, &options, false)
            .unwrap();
        let tight = PromptOptions {
            char_budget: full.prompt_text.chars().count() - 20,
            ..PromptOptions::default()
        };
        let truncated =
            build_pair_bundle(&corpus, "u01", &a, &b, &registry, &template, &tight, false).unwrap();
        assert!(truncated.prompt_text.chars().count() <= tight.char_budget);
        // candidate lists intact
        assert_eq!(truncated.shown_a_items, full.shown_a_items);
        assert_eq!(truncated.shown_b_items, full.shown_b_items);
        // impossible budget errors out
        let impossible = PromptOptions {
            char_budget: 10,
            ..PromptOptions::default()
        };
        assert!(matches!(
            build_pair_bundle(&corpus, "u01", &a, &b, &registry, &template, &impossible, false),
            Err(Error::Prompt(_))
        ));
    }

    #[test]
    fn absolute_prompt_renders_single_list() {
        let (corpus, a, _) = toy_pair();
        let registry = DimensionRegistry::defaults();
        let template = PromptTemplate::default();
        let options = PromptOptions::default();
        let bundle =
            build_absolute_bundle(&corpus, "u01", &a, &registry, &template, &options).unwrap();
        assert!(bundle.prompt_text.contains("Recommended list:"));
        assert!(bundle.prompt_text.contains("score between 0 and 1"));
        assert!(bundle.prompt_text.contains("{\"score\": 0.0}"));
        assert!(!bundle.prompt_text.contains("Recommender System B"));
        assert_eq!(bundle.system_id, "alpha");
    }

    #[test]
    fn registry_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dims.json");
        let dims = vec![Dimension::new("novelty", "New to me.")];
        std::fs::write(&path, serde_json::to_string(&dims).unwrap()).unwrap();
        let registry = DimensionRegistry::from_json_file(&path).unwrap();
        assert_eq!(registry.dimensions(), dims.as_slice());
    }
}
