//! Bundled toy corpus: 12 users, 40 items, and synthetic recommendation
//! lists with a designed quality gap, so demos and end-to-end tests
//! produce non-trivial tallies without any external data or model.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::corpus::{Corpus, Interaction, Item, RecList, User};
use crate::metrics::ScoredExample;

const CATEGORIES: [&str; 8] = [
    "action",
    "comedy",
    "drama",
    "romance",
    "scifi",
    "thriller",
    "documentary",
    "animation",
];

const ADJECTIVES: [&str; 10] = [
    "Quiet", "Crimson", "Last", "Hidden", "Electric", "Golden", "Broken", "Silent", "Wild",
    "Distant",
];

const NOUNS: [&str; 4] = ["Harbor", "Signal", "Garden", "Frontier"];

/// The id of the stronger bundled synthetic system.
pub const TOY_SYSTEM_STRONG: &str = "alpha";
/// The id of the weaker bundled synthetic system.
pub const TOY_SYSTEM_WEAK: &str = "beta";

/// Deterministic 12-user, 40-item corpus. Nine users carry MovieLens-style
/// attributes; three carry empty attribute maps like MIND users.
pub fn toy_corpus() -> Corpus {
    let age_ranges = ["Under 18", "18-24", "25-34", "35-44", "45-49", "50-55", "56+"];
    let occupations = [
        "writer",
        "programmer",
        "clerical/admin",
        "scientist",
        "artist",
        "lawyer",
        "homemaker",
        "retired",
        "academic/educator",
    ];

    let mut users = Vec::new();
    for i in 0..12usize {
        let mut attributes = BTreeMap::new();
        if i < 9 {
            attributes.insert(
                "gender".to_string(),
                if i % 2 == 0 { "F" } else { "M" }.to_string(),
            );
            attributes.insert("age_range".to_string(), age_ranges[i % 7].to_string());
            attributes.insert("occupation_label".to_string(), occupations[i].to_string());
        }
        users.push(User {
            user_id: format!("u{:02}", i + 1),
            attributes,
        });
    }

    let mut items = Vec::new();
    for j in 0..40usize {
        let mut categories = BTreeSet::new();
        categories.insert(CATEGORIES[j % 8].to_string());
        if j % 3 == 0 {
            categories.insert(CATEGORIES[(j + 1) % 8].to_string());
        }
        if j % 5 == 0 {
            categories.insert(CATEGORIES[(j + 2) % 8].to_string());
        }
        items.push(Item {
            item_id: format!("m{:02}", j + 1),
            title: format!("The {} {}", ADJECTIVES[j % 10], NOUNS[j / 10]),
            categories,
            abstract_text: None,
        });
    }

    let mut interactions = Vec::new();
    for (i, user) in users.iter().enumerate() {
        let preferred = preferred_categories(i);
        let mut clock = 1_000_000 + (i as i64) * 1_000;
        let mut positives = 0;
        let mut negatives = 0;
        for item in &items {
            let matches = item.categories.iter().any(|c| preferred.contains(&c.as_str()));
            if matches && positives < 6 {
                positives += 1;
                clock += 10;
                interactions.push(Interaction {
                    user_id: user.user_id.clone(),
                    item_id: item.item_id.clone(),
                    label: 1,
                    rating: Some(if positives % 2 == 0 { 5.0 } else { 4.0 }),
                    timestamp: Some(clock),
                });
            } else if !matches && negatives < 3 {
                negatives += 1;
                clock += 10;
                interactions.push(Interaction {
                    user_id: user.user_id.clone(),
                    item_id: item.item_id.clone(),
                    label: 0,
                    rating: Some(2.0),
                    timestamp: Some(clock),
                });
            }
        }
    }

    Corpus::new(users, items, interactions).expect("toy corpus is valid by construction")
}

fn preferred_categories(user_index: usize) -> [&'static str; 2] {
    [CATEGORIES[user_index % 8], CATEGORIES[(user_index + 3) % 8]]
}

/// The two bundled synthetic systems: `alpha` built at quality 0.9 and
/// `beta` at quality 0.2, so the stronger one wins most pairwise sessions.
pub fn toy_systems(corpus: &Corpus, k: usize) -> Vec<RecList> {
    let mut lists = graded_reclists(corpus, TOY_SYSTEM_STRONG, 0.9, k);
    lists.extend(graded_reclists(corpus, TOY_SYSTEM_WEAK, 0.2, k));
    lists
}

/// Synthesize one list per user at a tunable quality level in [0, 1].
///
/// Quality controls how many of the k slots come from the "good" pool
/// (the user's positive history, then the catalog ordered by category
/// overlap with that history); the rest come from the least-overlapping
/// items. Quality 1.0 tracks the user's taste, 0.0 contradicts it.
pub fn graded_reclists(corpus: &Corpus, system_id: &str, quality: f64, k: usize) -> Vec<RecList> {
    let quality = quality.clamp(0.0, 1.0);
    let mut lists = Vec::with_capacity(corpus.users.len());
    for user in &corpus.users {
        let history_cats = corpus.user_history_categories(&user.user_id);
        let history_ids: Vec<&str> = corpus
            .user_history(&user.user_id)
            .into_iter()
            .rev() // most recent first
            .map(|i| i.item_id.as_str())
            .collect();
        let history_set: HashSet<&str> = history_ids.iter().copied().collect();

        let mut scored: Vec<(&str, f64)> = corpus
            .items
            .iter()
            .filter(|item| !history_set.contains(item.item_id.as_str()))
            .map(|item| {
                let inter = item.categories.iter().filter(|c| history_cats.contains(*c)).count();
                let union = item.categories.len() + history_cats.len() - inter;
                let jaccard = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
                (item.item_id.as_str(), jaccard)
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));

        let good: Vec<&str> = history_ids
            .iter()
            .copied()
            .chain(scored.iter().map(|(id, _)| *id))
            .collect();
        let bad: Vec<&str> = scored.iter().rev().map(|(id, _)| *id).collect();

        let n_good = ((quality * k as f64).round() as usize).min(k);
        let mut chosen: Vec<String> = Vec::with_capacity(k);
        let mut used: HashSet<&str> = HashSet::new();
        for id in &good {
            if chosen.len() >= n_good {
                break;
            }
            if used.insert(id) {
                chosen.push(id.to_string());
            }
        }
        for id in &bad {
            if chosen.len() >= k {
                break;
            }
            if used.insert(id) {
                chosen.push(id.to_string());
            }
        }
        lists.push(RecList {
            system_id: system_id.to_string(),
            user_id: user.user_id.clone(),
            items: chosen,
        });
    }
    lists
}

/// Synthetic scored examples for a system of the given quality: the score
/// tracks the label in proportion to quality, so AUC rises with quality.
/// Deterministic in (corpus, quality).
pub fn toy_scores(corpus: &Corpus, quality: f64) -> Vec<ScoredExample> {
    let quality = quality.clamp(0.0, 1.0);
    corpus
        .interactions
        .iter()
        .map(|i| {
            let noise = hash_fraction(&i.user_id, &i.item_id);
            ScoredExample {
                user_id: i.user_id.clone(),
                item_id: i.item_id.clone(),
                label: i.label,
                score: quality * f64::from(i.label) + (1.0 - quality) * noise,
            }
        })
        .collect()
}

fn hash_fraction(user_id: &str, item_id: &str) -> f64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in user_id.bytes().chain(std::iter::once(b'|')).chain(item_id.bytes()) {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    (hash % 10_000) as f64 / 10_000.0
}
