//! Position-swap debiasing: judge each pair twice with the lists'
//! on-screen positions exchanged, then reconcile. Agreement survives;
//! disagreement is demoted to a tie.
//!
//! Run: cargo run --example debias_swap

use recarena::corpus::toy;
use recarena::judge::{MockJudge, Provider};
use recarena::promptkit::{build_pair_bundle, DimensionRegistry, PromptOptions, PromptTemplate};
use recarena::verdict::{parse_verdict, Outcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = toy::toy_corpus();
    let lists = toy::toy_systems(&corpus, 5);
    let registry = DimensionRegistry::defaults();
    let template = PromptTemplate::default();
    let options = PromptOptions::default();
    let judge = MockJudge::new(&corpus);

    let user_id = &corpus.users[0].user_id;
    let a = lists
        .iter()
        .find(|l| l.system_id == "alpha" && &l.user_id == user_id)
        .expect("toy list");
    let b = lists
        .iter()
        .find(|l| l.system_id == "beta" && &l.user_id == user_id)
        .expect("toy list");

    let mut passes = Vec::new();
    for swap in [false, true] {
        let bundle = build_pair_bundle(
            &corpus, user_id, a, b, &registry, &template, &options, swap,
        )?;
        let raw = judge.judge_pair(&bundle)?;
        let verdict = parse_verdict(&raw, &bundle)?;
        println!(
            "swap={swap}: judged overall {:?} (labels corrected back to logical systems: {})",
            verdict.overall, verdict.swap_corrected
        );
        passes.push(verdict);
    }

    // Both passes are expressed in logical-system terms, so reconciling
    // is a per-key comparison.
    let (plain, swapped) = (&passes[0], &passes[1]);
    let overall = if plain.overall == swapped.overall {
        plain.overall
    } else {
        Outcome::Tie
    };
    println!("\nreconciled overall: {overall:?}");
    for (key, outcome) in &plain.per_dimension {
        let merged = match swapped.per_dimension.get(key) {
            Some(other) if other == outcome => *outcome,
            Some(_) => Outcome::Tie,
            None => *outcome,
        };
        println!("{key}: {merged:?}");
    }
    println!("\n(the mock judge is position-symmetric, so both passes agree;");
    println!(" a position-biased judge would show demotions to Tie here)");
    Ok(())
}
