//! Chat-completions HTTP provider with caching and retry.

use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::judge::cache::ResponseCache;
use crate::judge::{cache_key, JudgeMode, Provider, ProviderConfig, ProviderMeta, RawJudgment};
use crate::promptkit::{AbsoluteBundle, PromptBundle};

/// Provider-agnostic client for any chat-completions-compatible endpoint:
/// POST {base_url}/chat/completions with a single user message, bearer
/// auth from the environment variable named in the config, a file cache
/// consulted before any network call, and exponential backoff on
/// transport errors and HTTP 429/5xx.
pub struct HttpProvider {
    cfg: ProviderConfig,
    cache: ResponseCache,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    /// Errors before any request when the API key variable is unset.
    pub fn new(cfg: ProviderConfig, cache: ResponseCache) -> Result<Self> {
        let api_key = std::env::var(&cfg.api_key_env).map_err(|_| {
            Error::Config(format!(
                "API key environment variable {:?} is not set",
                cfg.api_key_env
            ))
        })?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| Error::Config(format!("HTTP client: {e}")))?;
        Ok(HttpProvider {
            cfg,
            cache,
            api_key,
            client,
        })
    }

    fn judge(&self, content_hash: &str, prompt_text: &str, mode: JudgeMode) -> Result<RawJudgment> {
        let key = cache_key(content_hash, &self.cfg, mode);
        if let Some(body) = self.cache.get(&key)? {
            let response_text = extract_content(&body)?;
            return Ok(RawJudgment {
                bundle_hash: content_hash.to_string(),
                response_text,
                provider_meta: ProviderMeta {
                    model_id: self.cfg.model_id.clone(),
                    latency_ms: 0,
                    retries: 0,
                    cache_hit: true,
                },
            });
        }

        let started = Instant::now();
        let (body, retries) = self.post_with_retry(prompt_text)?;
        let response_text = extract_content(&body)?;
        self.cache.put(&key, &body)?;
        Ok(RawJudgment {
            bundle_hash: content_hash.to_string(),
            response_text,
            provider_meta: ProviderMeta {
                model_id: self.cfg.model_id.clone(),
                latency_ms: started.elapsed().as_millis() as u64,
                retries,
                cache_hit: false,
            },
        })
    }

    fn post_with_retry(&self, prompt_text: &str) -> Result<(String, u32)> {
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        let payload = json!({
            "model": self.cfg.model_id,
            "temperature": self.cfg.temperature,
            "messages": [{"role": "user", "content": prompt_text}],
        });
        let mut last_failure = String::new();
        for attempt in 0..=self.cfg.max_retries {
            if attempt > 0 {
                std::thread::sleep(retry_delay(attempt - 1, &self.cfg));
            }
            let sent = self
                .client
                .post(&url)
                .bearer_auth(&self.api_key)
                .json(&payload)
                .send();
            match sent {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let body = response
                            .text()
                            .map_err(|e| Error::Provider(format!("reading response body: {e}")))?;
                        return Ok((body, attempt));
                    }
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    let body = response.text().unwrap_or_default();
                    let snippet: String = body.chars().take(200).collect();
                    if !retryable {
                        return Err(Error::Provider(format!("HTTP {status}: {snippet}")));
                    }
                    last_failure = format!("HTTP {status}: {snippet}");
                }
                Err(e) => last_failure = format!("transport: {e}"),
            }
            log::warn!(
                "request attempt {}/{} failed: {last_failure}",
                attempt + 1,
                self.cfg.max_retries + 1
            );
        }
        Err(Error::Transport {
            retries: self.cfg.max_retries,
            message: last_failure,
        })
    }
}

impl Provider for HttpProvider {
    fn name(&self) -> &'static str {
        "http"
    }

    fn judge_pair(&self, bundle: &PromptBundle) -> Result<RawJudgment> {
        self.judge(&bundle.content_hash, &bundle.prompt_text, JudgeMode::Pairwise)
    }

    fn judge_absolute(&self, bundle: &AbsoluteBundle) -> Result<RawJudgment> {
        self.judge(&bundle.content_hash, &bundle.prompt_text, JudgeMode::Absolute)
    }
}

/// First choice's message content from a chat-completions response body.
fn extract_content(body: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| Error::Provider(format!("response is not JSON: {e}")))?;
    let content = value
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .ok_or_else(|| {
            Error::Provider("response has no choices[0].message.content string".into())
        })?;
    if content.is_empty() {
        return Err(Error::Provider("empty response content".into()));
    }
    Ok(content.to_string())
}

/// Exponential backoff with jitter: initial * 2^attempt, capped, then
/// +/-20% random spread.
fn retry_delay(attempt: u32, cfg: &ProviderConfig) -> Duration {
    let base = cfg
        .retry_initial_ms
        .saturating_mul(1u64 << attempt.min(16))
        .min(cfg.retry_cap_ms);
    let jitter = rand::thread_rng().gen_range(-0.2..=0.2);
    Duration::from_millis((base as f64 * (1.0 + jitter)).max(0.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_first_choice_content() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hello"}}]}"#;
        assert_eq!(extract_content(body).unwrap(), "hello");
        assert!(extract_content("{}").is_err());
        assert!(extract_content("not json").is_err());
        let empty = r#"{"choices":[{"message":{"content":""}}]}"#;
        assert!(extract_content(empty).is_err());
    }

    #[test]
    fn retry_delay_doubles_and_caps() {
        let cfg = ProviderConfig {
            retry_initial_ms: 1000,
            retry_cap_ms: 60_000,
            ..ProviderConfig::default()
        };
        // jitter is +/-20%, so bound each delay by [0.8, 1.2] of its base
        for (attempt, base) in [(0u32, 1000u64), (1, 2000), (2, 4000), (10, 60_000)] {
            let d = retry_delay(attempt, &cfg).as_millis() as f64;
            assert!(d >= base as f64 * 0.8 - 1.0, "attempt {attempt}: {d}");
            assert!(d <= base as f64 * 1.2 + 1.0, "attempt {attempt}: {d}");
        }
    }
}
