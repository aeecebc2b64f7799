//! Generate a synthetic corpus, write it as standoff files, and summarize it.
//!
//! `cargo run --example synthetic_corpus [out_dir]`

use std::collections::BTreeMap;
use std::path::PathBuf;

use cacer::model::EventType;
use cacer::standoff::write_note;
use cacer::synth::{corpus_digest, generate_corpus, GenConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GenConfig {
        seed: 2024,
        n_notes: 100,
        ..Default::default()
    };
    let docs = generate_corpus(&cfg)?;
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cacer-synthetic"));
    std::fs::create_dir_all(&out)?;
    for d in &docs {
        write_note(&out, d)?;
    }

    let mut relations = BTreeMap::new();
    for r in docs.iter().flat_map(|d| &d.relations) {
        *relations.entry(r.rel_type).or_insert(0usize) += 1;
    }
    let count = |t| docs.iter().flat_map(|d| &d.events).filter(|e| e.event_type == t).count();
    println!("wrote {} notes to {}", docs.len(), out.display());
    println!("digest {}", corpus_digest(&docs));
    println!("Problems {}, Drugs {}", count(EventType::Problem), count(EventType::Drug));
    for (t, n) in relations {
        println!("  {:<16} {n}", t.to_string());
    }
    println!("\nfirst note:\n{}", docs[0].text.as_str());
    Ok(())
}
