//! Absolute-mode evaluation: score each system's list on its own 0-1
//! scale instead of head-to-head, then min-max normalize across systems.
//!
//! Run: cargo run --example absolute_scores

use recarena::corpus::toy;
use recarena::judge::{run_batch, MockJudge, Provider};
use recarena::promptkit::{build_absolute_bundle, DimensionRegistry, PromptOptions, PromptTemplate};
use recarena::verdict::{parse_score, ScoreVerdict};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = toy::toy_corpus();
    let lists = toy::toy_systems(&corpus, 5);
    let registry = DimensionRegistry::defaults();
    let template = PromptTemplate::default();
    let options = PromptOptions::default();
    let judge = MockJudge::new(&corpus);

    let bundles = lists
        .iter()
        .map(|list| {
            build_absolute_bundle(&corpus, &list.user_id, list, &registry, &template, &options)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (results, _) = run_batch(&bundles, 4, |b| judge.judge_absolute(b));

    let mut scores: Vec<ScoreVerdict> = Vec::new();
    for (bundle, result) in bundles.iter().zip(results) {
        scores.push(parse_score(&result?, bundle)?);
    }

    for system in ["alpha", "beta"] {
        let system_scores: Vec<f64> = scores
            .iter()
            .filter(|s| s.system_id == system)
            .map(|s| s.score)
            .collect();
        let mean = system_scores.iter().sum::<f64>() / system_scores.len() as f64;
        println!(
            "{system}: mean score {mean:.4} over {} users",
            system_scores.len()
        );
    }

    let means: Vec<f64> = ["alpha", "beta"]
        .iter()
        .map(|system| {
            let s: Vec<f64> = scores
                .iter()
                .filter(|v| &v.system_id == system)
                .map(|v| v.score)
                .collect();
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let (lo, hi) = (means[0].min(means[1]), means[0].max(means[1]));
    println!("\nmin-max normalized:");
    for (system, mean) in ["alpha", "beta"].iter().zip(&means) {
        let normalized = if hi > lo { (mean - lo) / (hi - lo) } else { 0.5 };
        println!("{system}: {normalized:.4}");
    }
    Ok(())
}
