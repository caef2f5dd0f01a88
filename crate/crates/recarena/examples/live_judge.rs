//! Judge one toy pair against a real chat-completions endpoint, with the
//! on-disk response cache and retry/backoff in play.
//!
//! Network-gated: set ARENA_BASE_URL, ARENA_MODEL, and the API key in
//! RECARENA_API_KEY (or point ARENA_API_KEY_ENV at another variable),
//! otherwise this prints setup instructions and exits cleanly.
//!
//! Run: ARENA_BASE_URL=https://api.example.com/v1 ARENA_MODEL=some-model \
//!      RECARENA_API_KEY=sk-... cargo run --example live_judge

use recarena::corpus::toy;
use recarena::judge::{HttpProvider, Provider, ProviderConfig, ResponseCache};
use recarena::promptkit::{build_pair_bundle, DimensionRegistry, PromptOptions, PromptTemplate};
use recarena::verdict::parse_verdict;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (base_url, model_id) = match (std::env::var("ARENA_BASE_URL"), std::env::var("ARENA_MODEL"))
    {
        (Ok(url), Ok(model)) => (url, model),
        _ => {
            println!("live_judge is network-gated; set the following to run it:");
            println!("  ARENA_BASE_URL   chat-completions base URL");
            println!("  ARENA_MODEL      model identifier");
            println!("  RECARENA_API_KEY bearer token (or set ARENA_API_KEY_ENV)");
            return Ok(());
        }
    };
    let api_key_env =
        std::env::var("ARENA_API_KEY_ENV").unwrap_or_else(|_| "RECARENA_API_KEY".into());

    let config = ProviderConfig {
        base_url,
        model_id,
        temperature: 0.0,
        api_key_env,
        ..ProviderConfig::default()
    };
    config.validate()?;

    let cache_dir = tempfile::tempdir()?;
    let provider = HttpProvider::new(config, ResponseCache::new(cache_dir.path()))?;

    let corpus = toy::toy_corpus();
    let lists = toy::toy_systems(&corpus, 5);
    let user_id = &corpus.users[0].user_id;
    let a = lists
        .iter()
        .find(|l| l.system_id == "alpha" && &l.user_id == user_id)
        .expect("toy list");
    let b = lists
        .iter()
        .find(|l| l.system_id == "beta" && &l.user_id == user_id)
        .expect("toy list");
    let bundle = build_pair_bundle(
        &corpus,
        user_id,
        a,
        b,
        &DimensionRegistry::defaults(),
        &PromptTemplate::default(),
        &PromptOptions::default(),
        false,
    )?;

    println!("judging one pair for {user_id}...");
    let raw = provider.judge_pair(&bundle)?;
    println!(
        "response in {} ms ({} retries, cache hit: {})",
        raw.provider_meta.latency_ms, raw.provider_meta.retries, raw.provider_meta.cache_hit
    );
    let verdict = parse_verdict(&raw, &bundle)?;
    println!("overall: {:?}", verdict.overall);
    for (key, outcome) in &verdict.per_dimension {
        println!("{key}: {outcome:?}");
    }

    // Same bundle again: this time the response must come from the cache.
    let again = provider.judge_pair(&bundle)?;
    println!("second call cache hit: {}", again.provider_meta.cache_hit);
    Ok(())
}
