//! Judge dispatch: a chat-completions HTTP provider and a deterministic
//! mock, behind one trait, with response caching and bounded-parallel
//! batch orchestration.

mod cache;
mod http;
mod mock;

pub use cache::ResponseCache;
pub use http::HttpProvider;
pub use mock::{mock_judge, MockJudge};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::promptkit::{AbsoluteBundle, PromptBundle};

/// Connection and orchestration settings for an HTTP judge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    /// Endpoint root; requests go to {base_url}/chat/completions.
    pub base_url: String,
    pub model_id: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    /// Upper bound on simultaneous in-flight requests.
    pub max_in_flight: usize,
    pub max_retries: u32,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub retry_initial_ms: u64,
    pub retry_cap_ms: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            base_url: String::new(),
            model_id: String::new(),
            temperature: 0.0,
            timeout_secs: 120,
            max_in_flight: 4,
            max_retries: 3,
            api_key_env: "RECARENA_API_KEY".into(),
            retry_initial_ms: 1000,
            retry_cap_ms: 60_000,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperature < 0.0 {
            return Err(Error::Config(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be >= 1".into()));
        }
        Ok(())
    }
}

/// Request audit data carried alongside every judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderMeta {
    pub model_id: String,
    pub latency_ms: u64,
    pub retries: u32,
    pub cache_hit: bool,
}

/// A judge's raw response to one prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawJudgment {
    /// The prompt bundle's content hash.
    pub bundle_hash: String,
    pub response_text: String,
    pub provider_meta: ProviderMeta,
}

/// Whether a prompt asks for a pairwise verdict or an absolute score;
/// part of the cache key, since the same list can appear in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgeMode {
    Pairwise,
    Absolute,
}

impl std::fmt::Display for JudgeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            JudgeMode::Pairwise => "pairwise",
            JudgeMode::Absolute => "absolute",
        })
    }
}

/// Cache key over everything that determines a response: the prompt
/// text (via its hash), model, temperature, and judging mode.
pub fn cache_key(content_hash: &str, cfg: &ProviderConfig, mode: JudgeMode) -> String {
    let material = format!("{content_hash}\n{}\n{}\n{mode}", cfg.model_id, cfg.temperature);
    hex::encode(Sha256::digest(material.as_bytes()))
}

/// A judge backend: the HTTP provider or the deterministic mock.
pub trait Provider: Sync {
    fn name(&self) -> &'static str;
    fn judge_pair(&self, bundle: &PromptBundle) -> Result<RawJudgment>;
    fn judge_absolute(&self, bundle: &AbsoluteBundle) -> Result<RawJudgment>;
}

/// Outcome counts for one batch run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BatchSummary {
    pub ok: usize,
    pub failed: usize,
    pub cached: usize,
}

/// Judge a batch with at most `max_in_flight` calls outstanding.
///
/// Output order equals input order regardless of completion order, and
/// per-item failures are recorded in place rather than aborting the
/// batch.
pub fn run_batch<T, F>(
    items: &[T],
    max_in_flight: usize,
    judge_one: F,
) -> (Vec<Result<RawJudgment>>, BatchSummary)
where
    T: Sync,
    F: Fn(&T) -> Result<RawJudgment> + Sync,
{
    let workers = max_in_flight.max(1).min(items.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RawJudgment>>>> =
        Mutex::new((0..items.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= items.len() {
                    break;
                }
                let result = judge_one(&items[idx]);
                slots.lock().expect("result mutex")[idx] = Some(result);
            });
        }
    });

    let results: Vec<Result<RawJudgment>> = slots
        .into_inner()
        .expect("result mutex")
        .into_iter()
        .map(|slot| slot.expect("every index judged"))
        .collect();

    let mut summary = BatchSummary::default();
    for result in &results {
        match result {
            Ok(judgment) => {
                summary.ok += 1;
                if judgment.provider_meta.cache_hit {
                    summary.cached += 1;
                }
            }
            Err(_) => summary.failed += 1,
        }
    }
    (results, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy::{toy_corpus, toy_systems};
    use crate::promptkit::{build_pair_bundle, DimensionRegistry, PromptOptions, PromptTemplate};

    #[test]
    fn cache_key_covers_every_input() {
        let cfg = ProviderConfig {
            model_id: "m1".into(),
            ..ProviderConfig::default()
        };
        let base = cache_key("abc", &cfg, JudgeMode::Pairwise);
        assert_ne!(base, cache_key("abd", &cfg, JudgeMode::Pairwise));
        assert_ne!(base, cache_key("abc", &cfg, JudgeMode::Absolute));
        let other_model = ProviderConfig {
            model_id: "m2".into(),
            ..cfg.clone()
        };
        assert_ne!(base, cache_key("abc", &other_model, JudgeMode::Pairwise));
        let warmer = ProviderConfig {
            temperature: 0.7,
            ..cfg
        };
        assert_ne!(base, cache_key("abc", &warmer, JudgeMode::Pairwise));
    }

    #[test]
    fn config_validation() {
        let mut cfg = ProviderConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.max_in_flight = 0;
        assert!(cfg.validate().is_err());
        cfg.max_in_flight = 1;
        cfg.temperature = -0.1;
        assert!(cfg.validate().is_err());
    }

    fn toy_bundles() -> (crate::corpus::Corpus, Vec<PromptBundle>) {
        let corpus = toy_corpus();
        let lists = toy_systems(&corpus, 5);
        let registry = DimensionRegistry::defaults();
        let template = PromptTemplate::default();
        let options = PromptOptions::default();
        let mut bundles = Vec::new();
        for user in &corpus.users {
            let a = lists
                .iter()
                .find(|l| l.system_id == "alpha" && l.user_id == user.user_id)
                .unwrap();
            let b = lists
                .iter()
                .find(|l| l.system_id == "beta" && l.user_id == user.user_id)
                .unwrap();
            bundles.push(
                build_pair_bundle(&corpus, &user.user_id, a, b, &registry, &template, &options, false)
                    .unwrap(),
            );
        }
        (corpus, bundles)
    }

    #[test]
    fn batch_order_is_input_order_at_any_parallelism() {
        let (corpus, bundles) = toy_bundles();
        let judge = MockJudge::new(&corpus);
        let (serial, summary1) = run_batch(&bundles, 1, |b| judge.judge_pair(b));
        let (parallel, summary8) = run_batch(&bundles, 8, |b| judge.judge_pair(b));
        assert_eq!(summary1, summary8);
        assert_eq!(summary1.ok, bundles.len());
        let serial: Vec<_> = serial.into_iter().map(|r| r.unwrap()).collect();
        let parallel: Vec<_> = parallel.into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(serial, parallel);
        for (bundle, judgment) in bundles.iter().zip(&serial) {
            assert_eq!(bundle.content_hash, judgment.bundle_hash);
        }
    }

    #[test]
    fn batch_failures_are_recorded_in_place() {
        let (corpus, bundles) = toy_bundles();
        let judge = MockJudge::new(&corpus);
        let poison = bundles[3].content_hash.clone();
        let (results, summary) = run_batch(&bundles, 4, |b| {
            if b.content_hash == poison {
                Err(Error::Provider("scripted failure".into()))
            } else {
                judge.judge_pair(b)
            }
        });
        assert_eq!(summary.failed, 1);
        assert_eq!(summary.ok, bundles.len() - 1);
        assert!(results[3].is_err());
        assert!(results.iter().enumerate().all(|(i, r)| r.is_ok() != (i == 3)));
    }

    #[test]
    fn empty_batch_is_a_noop() {
        let bundles: Vec<PromptBundle> = Vec::new();
        let (results, summary) = run_batch(&bundles, 4, |_| unreachable!());
        assert!(results.is_empty());
        assert_eq!(summary, BatchSummary::default());
    }
}
