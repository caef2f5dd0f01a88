//! Assemble a judging prompt: persona and history profile, the two
//! candidate lists, the six dimension instructions, and the output
//! contract. Prints the full prompt text plus the swapped variant's
//! bookkeeping.
//!
//! Run: cargo run --example prompt_preview

use recarena::corpus::toy;
use recarena::promptkit::{
    build_pair_bundle, build_profile, DimensionRegistry, PromptOptions, PromptTemplate,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = toy::toy_corpus();
    let lists = toy::toy_systems(&corpus, 5);
    let user_id = &corpus.users[0].user_id;
    let list_a = lists
        .iter()
        .find(|l| l.system_id == "alpha" && &l.user_id == user_id)
        .expect("toy list");
    let list_b = lists
        .iter()
        .find(|l| l.system_id == "beta" && &l.user_id == user_id)
        .expect("toy list");

    let options = PromptOptions::default();
    let profile = build_profile(&corpus, user_id, &options)?;
    println!("--- profile ---\n{profile}\n");

    let registry = DimensionRegistry::defaults();
    let template = PromptTemplate::default();
    let bundle = build_pair_bundle(
        &corpus, user_id, list_a, list_b, &registry, &template, &options, false,
    )?;
    println!("--- full prompt ({} chars) ---", bundle.prompt_text.len());
    println!("{}", bundle.prompt_text);
    println!("content hash: {}", bundle.content_hash);

    let swapped = build_pair_bundle(
        &corpus, user_id, list_a, list_b, &registry, &template, &options, true,
    )?;
    println!(
        "\nswapped variant: swap_applied={}, shown A items come from {} (hash {})",
        swapped.swap_applied, swapped.system_b_id, swapped.content_hash
    );
    Ok(())
}
