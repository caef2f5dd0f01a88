//! Judge with a custom dimension registry and a custom prompt template
//! instead of the built-in six dimensions.
//!
//! Run: cargo run --example custom_dimensions

use recarena::corpus::toy;
use recarena::judge::{MockJudge, Provider};
use recarena::promptkit::{
    build_pair_bundle, Dimension, DimensionRegistry, PromptOptions, PromptTemplate,
};
use recarena::verdict::parse_verdict;

const TEMPLATE: &str = "\
[persona]
{persona}

[history]
Previously watched: {history}

[candidates]
List A:
{list_a}
List B:
{list_b}

[dimensions]
Judge each dimension; end every line with \"A wins.\", \"B wins.\", or \"Tie.\".
{dimensions}

[output]
Close with a fenced JSON block shaped like:
```json
{dimension_schema}
```

[candidates_absolute]
List:
{list}

[dimensions_absolute]
{dimensions}

[output_absolute]
Close with ```json {{\"score\": 0.0}} ```
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = DimensionRegistry::new(vec![
        Dimension {
            key: "novelty".into(),
            description: "The recommended items feel new to me rather than repeats.".into(),
        },
        Dimension {
            key: "coverage".into(),
            description: "The list covers the breadth of my interests.".into(),
        },
    ])?;
    let template = PromptTemplate::parse(TEMPLATE)?;

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
        &registry,
        &template,
        &PromptOptions::default(),
        false,
    )?;
    println!("--- prompt with custom dimensions ---\n{}", bundle.prompt_text);

    let judge = MockJudge::new(&corpus);
    let raw = judge.judge_pair(&bundle)?;
    let verdict = parse_verdict(&raw, &bundle)?;
    println!("--- parsed verdict ---");
    for (key, outcome) in &verdict.per_dimension {
        println!("{key}: {outcome:?}");
    }
    println!("overall: {:?}", verdict.overall);
    Ok(())
}
