//! Build the bundled toy corpus, persist it as canonical JSON, and read
//! it back byte-identically.
//!
//! Run: cargo run --example corpus_ingest

use recarena::corpus::{toy::toy_corpus, Corpus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = toy_corpus();
    println!(
        "toy corpus: {} users, {} items, {} interactions",
        corpus.users.len(),
        corpus.items.len(),
        corpus.interactions.len()
    );

    let user = &corpus.users[0];
    println!("\nfirst user: {} {:?}", user.user_id, user.attributes);
    println!("positive history (oldest first):");
    for interaction in corpus.user_history(&user.user_id) {
        let item = corpus.item(&interaction.item_id).expect("validated corpus");
        println!("  {} {:?}", item.title, item.categories);
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("corpus.json");
    corpus.write_canonical(&path)?;
    let reread = Corpus::read_canonical(&path)?;
    assert_eq!(reread.to_canonical_json(), corpus.to_canonical_json());
    println!(
        "\ncanonical JSON round trip ok ({} bytes)",
        corpus.to_canonical_json().len()
    );
    Ok(())
}
