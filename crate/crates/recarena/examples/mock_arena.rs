//! End-to-end pair-wise arena on the toy corpus with the deterministic
//! mock judge: build prompts, judge a batch, parse verdicts, tally,
//! compute Q, rank, and print the Markdown report.
//!
//! Run: cargo run --example mock_arena

use recarena::arena::{build_report, render_report, ReportFormat, ReportOptions};
use recarena::corpus::{baseline_recommend, toy, BaselineMethod, RecList};
use recarena::judge::{run_batch, MockJudge, Provider};
use recarena::promptkit::{build_pair_bundle, DimensionRegistry, PromptOptions, PromptTemplate};
use recarena::verdict::{parse_verdict, JudgedVerdict, JudgmentFailure, VerdictLine};

fn per_user(lists: &[RecList], system: &str) -> Vec<RecList> {
    let mut out: Vec<RecList> = lists
        .iter()
        .filter(|l| l.system_id == system)
        .cloned()
        .collect();
    out.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    out
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = toy::toy_corpus();
    let k = 5;

    // Challengers: the strong graded system and the popularity baseline,
    // both judged against the weak graded system as the common baseline.
    let toy_lists = toy::toy_systems(&corpus, k);
    let mut challengers = vec![per_user(&toy_lists, "alpha")];
    challengers.push(baseline_recommend(&corpus, BaselineMethod::Popularity, k, 0)?);
    let baseline = per_user(&toy_lists, "beta");

    let registry = DimensionRegistry::defaults();
    let template = PromptTemplate::default();
    let options = PromptOptions::default();
    let judge = MockJudge::new(&corpus);

    let mut lines: Vec<VerdictLine> = Vec::new();
    for challenger in &challengers {
        let bundles = challenger
            .iter()
            .zip(&baseline)
            .map(|(a, b)| {
                build_pair_bundle(
                    &corpus, &a.user_id, a, b, &registry, &template, &options, false,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (results, summary) = run_batch(&bundles, 4, |b| judge.judge_pair(b));
        eprintln!(
            "{} vs {}: {} ok, {} failed, {} cached",
            challenger[0].system_id, baseline[0].system_id, summary.ok, summary.failed,
            summary.cached
        );
        for (bundle, result) in bundles.iter().zip(results) {
            lines.push(match result.and_then(|raw| {
                let meta = raw.provider_meta.clone();
                parse_verdict(&raw, bundle).map(|v| (v, meta))
            }) {
                Ok((verdict, provider_meta)) => VerdictLine::Verdict(JudgedVerdict {
                    verdict,
                    provider_meta,
                }),
                Err(err) => VerdictLine::Failure(JudgmentFailure {
                    user_id: bundle.user_id.clone(),
                    system_a_id: bundle.system_a_id.clone(),
                    system_b_id: bundle.system_b_id.clone(),
                    error: err.to_string(),
                }),
            });
        }
    }

    let mut report_options = ReportOptions::new();
    report_options.include_analysis = true;
    report_options.analysis_excerpts = 2;
    let report = build_report(&lines, &report_options)?;
    println!("{}", render_report(&report, ReportFormat::Markdown)?);
    Ok(())
}
