//! Generate recommendation lists: the popularity and random baselines,
//! plus graded lists with a chosen history-affinity quality.
//!
//! Run: cargo run --example baseline_lists

use recarena::corpus::{baseline_recommend, toy, BaselineMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = toy::toy_corpus();
    let k = 5;

    for method in [BaselineMethod::Popularity, BaselineMethod::Random] {
        let lists = baseline_recommend(&corpus, method, k, 42)?;
        let first = &lists[0];
        println!("{} list for {}:", first.system_id, first.user_id);
        for item_id in &first.items {
            let item = corpus.item(item_id).expect("validated");
            println!("  {} {:?}", item.title, item.categories);
        }
        println!();
    }

    // Graded lists interpolate between best-affinity and worst-affinity
    // picks; the two toy systems are graded at 0.9 (alpha) and 0.2 (beta).
    for (system, quality) in [("alpha", 0.9), ("beta", 0.2)] {
        let lists = toy::graded_reclists(&corpus, system, quality, k);
        let first = &lists[0];
        println!("{} (quality {quality}) list for {}:", system, first.user_id);
        for item_id in &first.items {
            let item = corpus.item(item_id).expect("validated");
            println!("  {} {:?}", item.title, item.categories);
        }
        println!();
    }
    Ok(())
}
