//! Compute the offline reference metrics on the toy corpus: AUC over
//! scored examples, nDCG@k and URD over recommendation lists, and the
//! Pearson correlation between two metric vectors.
//!
//! Run: cargo run --example offline_metrics

use recarena::corpus::toy;
use recarena::metrics::{
    auc_scoped, ndcg_at_k, pearson, relevance_from_corpus, urd, AucScope,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = toy::toy_corpus();
    let relevance = relevance_from_corpus(&corpus);

    println!("system   auc(global)  auc(per-user)  ndcg@5   urd");
    let mut qualities = Vec::new();
    let mut ndcgs = Vec::new();
    for (system, quality) in [("alpha", 0.9), ("mid", 0.6), ("beta", 0.2)] {
        let scores = toy::toy_scores(&corpus, quality);
        let global = auc_scoped(&scores, AucScope::Global)?;
        let per_user = auc_scoped(&scores, AucScope::PerUserMean)?;

        let lists = toy::graded_reclists(&corpus, system, quality, 5);
        let mean_ndcg: f64 =
            lists.iter().map(|l| ndcg_at_k(l, &relevance, 5)).sum::<f64>() / lists.len() as f64;
        let mean_urd: f64 = lists
            .iter()
            .map(|l| urd(l, &corpus))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .sum::<f64>()
            / lists.len() as f64;
        println!(
            "{system:<8} {global:^11.4}  {per_user:^13.4}  {mean_ndcg:.4}   {mean_urd:.4}"
        );
        qualities.push(quality);
        ndcgs.push(mean_ndcg);
    }

    let correlation = pearson(&qualities, &ndcgs)?;
    println!(
        "\npearson(quality, ndcg@5): r = {:.4}, p = {:.4}, n = {}",
        correlation.r, correlation.p_value, correlation.n
    );
    Ok(())
}
