//! Baseline recommenders so the pipeline can run end to end without any
//! external model output.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, RecList};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    /// Top-k items by global positive-interaction count, ties broken by
    /// ascending item id.
    Popularity,
    /// Uniform sample without replacement, reproducible from the seed.
    Random,
}

impl BaselineMethod {
    pub fn system_id(&self) -> &'static str {
        match self {
            BaselineMethod::Popularity => "popularity",
            BaselineMethod::Random => "random",
        }
    }
}

/// Generate one list per user. The candidate pool is every item not in the
/// user's positive history; a pool smaller than `k` yields a truncated
/// list with a warning rather than an error.
///
/// Pure in (corpus, method, k, seed): repeated calls return identical lists.
pub fn baseline_recommend(
    corpus: &Corpus,
    method: BaselineMethod,
    k: usize,
    seed: u64,
) -> Result<Vec<RecList>> {
    let mut positive_counts: HashMap<&str, usize> = HashMap::new();
    for interaction in &corpus.interactions {
        if interaction.label == 1 {
            *positive_counts.entry(interaction.item_id.as_str()).or_default() += 1;
        }
    }
    let mut by_popularity: Vec<&str> = corpus.items.iter().map(|i| i.item_id.as_str()).collect();
    by_popularity.sort_by(|a, b| {
        let ca = positive_counts.get(a).copied().unwrap_or(0);
        let cb = positive_counts.get(b).copied().unwrap_or(0);
        cb.cmp(&ca).then_with(|| a.cmp(b))
    });

    let mut lists = Vec::with_capacity(corpus.users.len());
    for user in &corpus.users {
        let history: HashSet<&str> = corpus
            .user_history(&user.user_id)
            .into_iter()
            .map(|i| i.item_id.as_str())
            .collect();
        let items: Vec<String> = match method {
            BaselineMethod::Popularity => by_popularity
                .iter()
                .filter(|id| !history.contains(**id))
                .take(k)
                .map(|id| id.to_string())
                .collect(),
            BaselineMethod::Random => {
                let pool: Vec<&str> = corpus
                    .items
                    .iter()
                    .map(|i| i.item_id.as_str())
                    .filter(|id| !history.contains(*id))
                    .collect();
                // Seed each user independently so one user's pool size never
                // shifts another user's draws.
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(&user.user_id));
                pool.choose_multiple(&mut rng, k).map(|id| id.to_string()).collect()
            }
        };
        if items.len() < k {
            log::warn!(
                "candidate pool for user {} holds only {} items; list truncated from k={}",
                user.user_id,
                items.len(),
                k
            );
        }
        lists.push(RecList {
            system_id: method.system_id().to_string(),
            user_id: user.user_id.clone(),
            items,
        });
    }
    Ok(lists)
}

fn fnv1a64(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Interaction, Item, User};
    use std::collections::{BTreeMap, BTreeSet};

    fn corpus_with_counts(counts: &[(&str, usize)]) -> Corpus {
        let raters: usize = counts.iter().map(|(_, c)| *c).sum();
        let mut users: Vec<User> = (0..raters.max(1))
            .map(|i| User {
                user_id: format!("r{i}"),
                attributes: BTreeMap::new(),
            })
            .collect();
        users.push(User {
            user_id: "target".into(),
            attributes: BTreeMap::new(),
        });
        let items: Vec<Item> = counts
            .iter()
            .map(|(id, _)| Item {
                item_id: id.to_string(),
                title: format!("Item {id}"),
                categories: BTreeSet::new(),
                abstract_text: None,
            })
            .collect();
        let mut interactions = Vec::new();
        let mut rater = 0;
        for (id, count) in counts {
            for _ in 0..*count {
                interactions.push(Interaction {
                    user_id: format!("r{rater}"),
                    item_id: id.to_string(),
                    label: 1,
                    rating: None,
                    timestamp: None,
                });
                rater += 1;
            }
        }
        Corpus::new(users, items, interactions).unwrap()
    }

    #[test]
    fn dominant_item_tops_every_popularity_list() {
        let corpus = corpus_with_counts(&[("x", 10), ("a", 9), ("b", 3)]);
        let lists = baseline_recommend(&corpus, BaselineMethod::Popularity, 1, 0).unwrap();
        let target = lists.iter().find(|l| l.user_id == "target").unwrap();
        assert_eq!(target.items, vec!["x".to_string()]);
    }

    #[test]
    fn popularity_ties_break_on_ascending_id() {
        let corpus = corpus_with_counts(&[("B", 3), ("A", 3), ("C", 1)]);
        let lists = baseline_recommend(&corpus, BaselineMethod::Popularity, 2, 0).unwrap();
        let target = lists.iter().find(|l| l.user_id == "target").unwrap();
        assert_eq!(target.items, vec!["A".to_string(), "B".to_string()]);
    }

    #[test]
    fn random_is_reproducible_from_seed() {
        let corpus = corpus_with_counts(&[("a", 2), ("b", 2), ("c", 1), ("d", 0), ("e", 0)]);
        let first = baseline_recommend(&corpus, BaselineMethod::Random, 3, 42).unwrap();
        let second = baseline_recommend(&corpus, BaselineMethod::Random, 3, 42).unwrap();
        assert_eq!(first, second);
        let other_seed = baseline_recommend(&corpus, BaselineMethod::Random, 3, 43).unwrap();
        assert_ne!(first, other_seed);
    }

    #[test]
    fn short_pool_truncates_list() {
        let corpus = corpus_with_counts(&[("a", 1), ("b", 1)]);
        let lists = baseline_recommend(&corpus, BaselineMethod::Popularity, 10, 0).unwrap();
        let target = lists.iter().find(|l| l.user_id == "target").unwrap();
        assert_eq!(target.items.len(), 2);
        // r0 rated "a", so its pool is just "b".
        let rater = lists.iter().find(|l| l.user_id == "r0").unwrap();
        assert_eq!(rater.items, vec!["b".to_string()]);
    }
}
