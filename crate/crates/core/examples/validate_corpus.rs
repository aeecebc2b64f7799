//! Validate annotated notes and print each violation.
//!
//! `cargo run --example validate_corpus [corpus_dir]`; without an argument a
//! small synthetic corpus is generated and one note is broken on purpose.

use std::path::PathBuf;

use cacer::model::{Argument, ArgumentType, EventType};
use cacer::segment::RuleSplitter;
use cacer::standoff::read_corpus;
use cacer::synth::{generate_corpus, GenConfig};
use cacer::validate::{blocks, validate_document};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = match std::env::args().nth(1) {
        Some(dir) => read_corpus(&PathBuf::from(dir), &RuleSplitter)?,
        None => {
            let mut docs = generate_corpus(&GenConfig {
                seed: 1,
                n_notes: 5,
                ..Default::default()
            })?;
            let d = &mut docs[2];
            let span = d.events.iter().find(|e| e.event_type == EventType::Problem).unwrap().trigger.clone();
            let drug = d.events.iter_mut().find(|e| e.event_type == EventType::Drug).unwrap();
            drug.arguments.push(Argument::span_only(ArgumentType::Anatomy, span));
            d.relations.push(d.relations[0].clone());
            docs
        }
    };

    let mut failing = 0;
    for d in &docs {
        let v = validate_document(d);
        let verdict = if blocks(&v, false) { "FAIL" } else { "ok" };
        println!("{:<14} {verdict:<4} {} event(s), {} relation(s)", d.doc_id, d.events.len(), d.relations.len());
        for x in &v {
            println!("    {x}");
        }
        failing += usize::from(blocks(&v, false));
    }
    println!("{failing} of {} note(s) failing", docs.len());
    Ok(())
}
