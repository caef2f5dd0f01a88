//! Dataset ingestion and the canonical in-memory corpus.
//!
//! Raw MovieLens-style and MIND-style files are parsed into a validated
//! [`Corpus`] holding users, items, and labeled interactions. The corpus
//! round-trips through a single canonical JSON document so every
//! downstream module works from one format regardless of the source
//! dataset. Recommendation lists ([`RecList`]) are read and written as
//! JSON Lines, one list per (system, user).

mod baseline;
mod mind;
mod movielens;
pub mod toy;

pub use baseline::{baseline_recommend, BaselineMethod};
pub use mind::parse_mind;
pub use movielens::{parse_movielens, MovieLensOptions};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A platform user with optional profile attributes.
///
/// Attribute values are human-readable text (dataset codes are decoded at
/// parse time). MIND-style users carry an empty attribute map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub user_id: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

/// A recommendable item with title and category/genre sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: String,
    pub title: String,
    #[serde(default)]
    pub categories: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
}

/// One labeled user-item event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub user_id: String,
    pub item_id: String,
    /// Binary relevance: 1 = positive, 0 = negative.
    pub label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<i64>,
}

/// Validated in-memory dataset. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub users: Vec<User>,
    pub items: Vec<Item>,
    pub interactions: Vec<Interaction>,
}

impl Corpus {
    /// Build a corpus, enforcing id uniqueness and referential integrity.
    pub fn new(users: Vec<User>, items: Vec<Item>, interactions: Vec<Interaction>) -> Result<Self> {
        let corpus = Corpus {
            users,
            items,
            interactions,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    fn validate(&self) -> Result<()> {
        let mut user_ids = HashSet::new();
        for user in &self.users {
            if user.user_id.is_empty() {
                return Err(Error::CorpusInvariant("empty user_id".into()));
            }
            if !user_ids.insert(user.user_id.as_str()) {
                return Err(Error::CorpusInvariant(format!(
                    "duplicate user_id {:?}",
                    user.user_id
                )));
            }
        }
        let mut item_ids = HashSet::new();
        for item in &self.items {
            if item.item_id.is_empty() {
                return Err(Error::CorpusInvariant("empty item_id".into()));
            }
            if !item_ids.insert(item.item_id.as_str()) {
                return Err(Error::CorpusInvariant(format!(
                    "duplicate item_id {:?}",
                    item.item_id
                )));
            }
        }
        for (idx, interaction) in self.interactions.iter().enumerate() {
            if !user_ids.contains(interaction.user_id.as_str()) {
                return Err(Error::CorpusInvariant(format!(
                    "interaction #{idx} references unknown user {:?}",
                    interaction.user_id
                )));
            }
            if !item_ids.contains(interaction.item_id.as_str()) {
                return Err(Error::CorpusInvariant(format!(
                    "interaction #{idx} references unknown item {:?}",
                    interaction.item_id
                )));
            }
            if interaction.label > 1 {
                return Err(Error::CorpusInvariant(format!(
                    "interaction #{idx} label {} is not binary",
                    interaction.label
                )));
            }
        }
        Ok(())
    }

    pub fn user(&self, user_id: &str) -> Option<&User> {
        self.users.iter().find(|u| u.user_id == user_id)
    }

    pub fn item(&self, item_id: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.item_id == item_id)
    }

    /// All interactions of one user, ordered by timestamp when timestamps
    /// exist (file order breaks ties and orders timestamp-free rows).
    pub fn user_interactions(&self, user_id: &str) -> Vec<&Interaction> {
        let mut rows: Vec<(usize, &Interaction)> = self
            .interactions
            .iter()
            .enumerate()
            .filter(|(_, i)| i.user_id == user_id)
            .collect();
        rows.sort_by_key(|(pos, i)| (i.timestamp.unwrap_or(i64::MIN), *pos));
        rows.into_iter().map(|(_, i)| i).collect()
    }

    /// A user's positive (label-1) history, oldest first.
    pub fn user_history(&self, user_id: &str) -> Vec<&Interaction> {
        self.user_interactions(user_id)
            .into_iter()
            .filter(|i| i.label == 1)
            .collect()
    }

    /// Union of category sets over a user's positive history.
    pub fn user_history_categories(&self, user_id: &str) -> BTreeSet<String> {
        let mut cats = BTreeSet::new();
        for interaction in self.user_history(user_id) {
            if let Some(item) = self.item(&interaction.item_id) {
                cats.extend(item.categories.iter().cloned());
            }
        }
        cats
    }

    /// Serialize to the canonical JSON document.
    pub fn to_canonical_json(&self) -> String {
        // Struct field order is fixed, maps are BTree: output is deterministic.
        serde_json::to_string_pretty(self).expect("corpus serialization cannot fail")
    }

    /// Parse the canonical JSON document and re-validate.
    pub fn from_canonical_json(text: &str) -> Result<Self> {
        let corpus: Corpus =
            serde_json::from_str(text).map_err(|e| Error::json("canonical corpus", e))?;
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn write_canonical(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_canonical_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read_canonical(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_canonical_json(&text)
    }
}

/// One system's ranked recommendation list for one user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecList {
    pub system_id: String,
    pub user_id: String,
    pub items: Vec<String>,
}

impl RecList {
    /// Check list invariants against a corpus: non-empty, no duplicates,
    /// and every item resolvable.
    pub fn validate(&self, corpus: &Corpus) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::RecListInvalid(format!(
                "list for ({}, {}) is empty",
                self.system_id, self.user_id
            )));
        }
        let mut seen = HashSet::new();
        for item_id in &self.items {
            if !seen.insert(item_id.as_str()) {
                return Err(Error::RecListInvalid(format!(
                    "list for ({}, {}) repeats item {:?}",
                    self.system_id, self.user_id, item_id
                )));
            }
            if corpus.item(item_id).is_none() {
                return Err(Error::RecListInvalid(format!(
                    "list for ({}, {}) references unknown item {:?}",
                    self.system_id, self.user_id, item_id
                )));
            }
        }
        Ok(())
    }
}

/// Write lists as JSON Lines, one object per (system_id, user_id).
pub fn write_reclists(path: &Path, lists: &[RecList]) -> Result<()> {
    let mut out = Vec::new();
    for list in lists {
        serde_json::to_writer(&mut out, list).map_err(|e| Error::json("reclist", e))?;
        out.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))
}

/// Read a JSON Lines reclist file, validating each list against the corpus.
pub fn read_reclists(path: &Path, corpus: &Corpus) -> Result<Vec<RecList>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lists = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let list: RecList = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{}:{}", path.display(), lineno + 1), e))?;
        list.validate(corpus)?;
        lists.push(list);
    }
    Ok(lists)
}

/// Group lists by system id, preserving input order within each group.
pub fn group_by_system(lists: &[RecList]) -> BTreeMap<&str, Vec<&RecList>> {
    let mut groups: BTreeMap<&str, Vec<&RecList>> = BTreeMap::new();
    for list in lists {
        groups.entry(list.system_id.as_str()).or_default().push(list);
    }
    groups
}

/// Index lists of a single system by user id. Errors if the file mixes systems.
pub fn single_system_index(lists: &[RecList]) -> Result<(String, HashMap<&str, &RecList>)> {
    let mut system: Option<&str> = None;
    let mut by_user = HashMap::new();
    for list in lists {
        match system {
            None => system = Some(&list.system_id),
            Some(s) if s != list.system_id => {
                return Err(Error::Input(format!(
                    "expected a single system per list file, found both {:?} and {:?}",
                    s, list.system_id
                )))
            }
            _ => {}
        }
        if by_user.insert(list.user_id.as_str(), list).is_some() {
            return Err(Error::Input(format!(
                "duplicate list for user {:?}",
                list.user_id
            )));
        }
    }
    let system = system.ok_or_else(|| Error::Input("list file is empty".into()))?;
    Ok((system.to_string(), by_user))
}
