//! Deterministic offline judge: a category-overlap rule standing in for
//! the LLM so the full pipeline runs and tests byte-reproducibly.

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::judge::{Provider, ProviderMeta, RawJudgment};
use crate::metrics::jaccard;
use crate::promptkit::{AbsoluteBundle, PromptBundle};

const TIE_EPSILON: f64 = 1e-9;

/// Judges by comparing each list's mean Jaccard similarity between item
/// categories and the union of the user's positive-history categories.
/// The rule is symmetric (exchanging the lists exchanges the labels) and
/// correlates with category overlap, so end-to-end demos produce
/// non-trivial tallies.
pub struct MockJudge<'a> {
    corpus: &'a Corpus,
}

impl<'a> MockJudge<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        MockJudge { corpus }
    }

    /// Mean Jaccard similarity between each item's categories and the
    /// user's history categories; in [0, 1].
    fn list_affinity(&self, user_id: &str, items: &[String]) -> Result<f64> {
        let history_cats = self.corpus.user_history_categories(user_id);
        if items.is_empty() {
            return Err(Error::Provider("mock judge got an empty list".into()));
        }
        let mut total = 0.0;
        for item_id in items {
            let item = self.corpus.item(item_id).ok_or_else(|| {
                Error::Provider(format!("mock judge: unknown item {item_id:?}"))
            })?;
            total += jaccard(&item.categories, &history_cats);
        }
        Ok(total / items.len() as f64)
    }
}

impl Provider for MockJudge<'_> {
    fn name(&self) -> &'static str {
        "mock"
    }

    fn judge_pair(&self, bundle: &PromptBundle) -> Result<RawJudgment> {
        let affinity_a = self.list_affinity(&bundle.user_id, &bundle.shown_a_items)?;
        let affinity_b = self.list_affinity(&bundle.user_id, &bundle.shown_b_items)?;
        let (verdict_word, sentence) = if (affinity_a - affinity_b).abs() <= TIE_EPSILON {
            ("tie", "Tie.")
        } else if affinity_a > affinity_b {
            ("A", "A wins.")
        } else {
            ("B", "B wins.")
        };

        let mut text = String::new();
        for key in &bundle.dimension_keys {
            text.push_str(&format!(
                "{key}: List A's mean category overlap with my history is {affinity_a:.4}; list B's is {affinity_b:.4}. {sentence}\n"
            ));
        }
        text.push('\n');
        match verdict_word {
            "A" => text.push_str("Overall, System A is better.\n"),
            "B" => text.push_str("Overall, System B is better.\n"),
            _ => text.push_str("Overall, the two systems are tied.\n"),
        }
        text.push_str("\n```json\n{\n  \"dimensions\": {\n");
        for (i, key) in bundle.dimension_keys.iter().enumerate() {
            let comma = if i + 1 < bundle.dimension_keys.len() { "," } else { "" };
            text.push_str(&format!("    \"{key}\": \"{verdict_word}\"{comma}\n"));
        }
        text.push_str(&format!("  }},\n  \"overall\": \"{verdict_word}\"\n}}\n```\n"));

        Ok(RawJudgment {
            bundle_hash: bundle.content_hash.clone(),
            response_text: text,
            provider_meta: ProviderMeta {
                model_id: "mock".into(),
                latency_ms: 0,
                retries: 0,
                cache_hit: false,
            },
        })
    }

    fn judge_absolute(&self, bundle: &AbsoluteBundle) -> Result<RawJudgment> {
        let affinity = self.list_affinity(&bundle.user_id, &bundle.items)?;
        let mut text = String::new();
        for key in &bundle.dimension_keys {
            text.push_str(&format!(
                "{key}: The list's mean category overlap with my history is {affinity:.4}.\n"
            ));
        }
        text.push_str(&format!("\n```json\n{{\"score\": {affinity:.4}}}\n```\n"));
        Ok(RawJudgment {
            bundle_hash: bundle.content_hash.clone(),
            response_text: text,
            provider_meta: ProviderMeta {
                model_id: "mock".into(),
                latency_ms: 0,
                retries: 0,
                cache_hit: false,
            },
        })
    }
}

/// Convenience for callers holding a bundle and corpus without a
/// provider instance.
pub fn mock_judge(bundle: &PromptBundle, corpus: &Corpus) -> Result<RawJudgment> {
    MockJudge::new(corpus).judge_pair(bundle)
}
