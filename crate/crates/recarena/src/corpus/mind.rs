//! MIND-style ingestion: news and behaviors TSV files.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use crate::corpus::{Corpus, Interaction, Item, User};
use crate::error::{Error, Result};

/// Parse a MIND-style directory (`news.tsv`, `behaviors.tsv`).
///
/// Users carry empty attribute maps; their profile comes entirely from
/// click history. History entries become label-1 interactions, impression
/// tokens (`<item>-1` / `<item>-0`) become labeled interactions, and both
/// category and subcategory enter an item's category set.
pub fn parse_mind(dir: &Path) -> Result<Corpus> {
    let items = parse_news(&dir.join("news.tsv"))?;
    let (users, interactions) = parse_behaviors(&dir.join("behaviors.tsv"))?;
    Corpus::new(users, items, interactions)
}

fn parse_news(path: &Path) -> Result<Vec<Item>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    let mut items = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        // id, category, subcategory, title, abstract, [url, entities...]
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            return Err(Error::MalformedRecord {
                file: path.to_path_buf(),
                line: lineno,
                message: format!("expected at least 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let mut categories = BTreeSet::new();
        for cat in [fields[1], fields[2]] {
            if !cat.is_empty() {
                categories.insert(cat.to_string());
            }
        }
        let abstract_text = fields
            .get(4)
            .filter(|a| !a.is_empty())
            .map(|a| a.to_string());
        items.push(Item {
            item_id: fields[0].to_string(),
            title: fields[3].to_string(),
            categories,
            abstract_text,
        });
    }
    Ok(items)
}

fn parse_behaviors(path: &Path) -> Result<(Vec<User>, Vec<Interaction>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    let mut users: Vec<User> = Vec::new();
    let mut seen_users: HashSet<String> = HashSet::new();
    // (user, item) pairs already recorded from a history field, so a user
    // appearing in several behavior rows does not duplicate history clicks.
    let mut seen_history: HashSet<(String, String)> = HashSet::new();
    let mut interactions = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        // impression id, user id, time, history, impressions
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::MalformedRecord {
                file: path.to_path_buf(),
                line: lineno,
                message: format!("expected 5 tab-separated fields, got {}", fields.len()),
            });
        }
        let user_id = fields[1].to_string();
        if seen_users.insert(user_id.clone()) {
            users.push(User {
                user_id: user_id.clone(),
                attributes: BTreeMap::new(),
            });
        }
        for item_id in fields[3].split_whitespace() {
            let key = (user_id.clone(), item_id.to_string());
            if seen_history.insert(key) {
                interactions.push(Interaction {
                    user_id: user_id.clone(),
                    item_id: item_id.to_string(),
                    label: 1,
                    rating: None,
                    timestamp: None,
                });
            }
        }
        for token in fields[4].split_whitespace() {
            let (item_id, label) = match token.rsplit_once('-') {
                Some((id, "1")) if !id.is_empty() => (id, 1),
                Some((id, "0")) if !id.is_empty() => (id, 0),
                _ => {
                    return Err(Error::MalformedRecord {
                        file: path.to_path_buf(),
                        line: lineno,
                        message: format!(
                            "impression token {token:?} lacks a \"-0\"/\"-1\" suffix"
                        ),
                    })
                }
            };
            interactions.push(Interaction {
                user_id: user_id.clone(),
                item_id: item_id.to_string(),
                label,
                rating: None,
                timestamp: None,
            });
        }
    }
    Ok((users, interactions))
}
