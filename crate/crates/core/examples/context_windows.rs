//! Candidate pairs, their minimal windows, and how many gold relations fit
//! the sentence and token limits.

use cacer::synth::{generate_corpus, GenConfig};
use cacer::window::{coverage_report, enumerate_candidate_pairs, relation_window, SubwordEstimate, WindowLimits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = generate_corpus(&GenConfig {
        seed: 7,
        n_notes: 200,
        ..Default::default()
    })?;
    let tok = SubwordEstimate::default();
    let limits = WindowLimits::default();

    let d = &docs[0];
    let c = enumerate_candidate_pairs(d, &tok, limits);
    println!("{}: {} candidate pair(s), {} excluded by the limits", d.doc_id, c.pairs.len(), c.excluded);
    for r in &d.relations {
        match relation_window(d, r, &tok, limits) {
            Ok(w) => println!(
                "  {} {}->{}: sentences {}..={} ({} tokens)",
                r.rel_type, r.head, r.tail, w.first, w.last, w.token_count
            ),
            Err(e) => println!("  {} {}->{}: {e}", r.rel_type, r.head, r.tail),
        }
    }

    let cov = coverage_report(&docs, &tok, limits);
    println!(
        "\n{} relation(s): {:.1}% within {} sentences / {} tokens, {:.1}% intra-sentence",
        cov.overall.total,
        cov.coverage() * 100.0,
        limits.max_sentences,
        limits.max_tokens,
        cov.intra_fraction() * 100.0
    );
    for (ty, t) in &cov.by_type {
        println!("  {:<16} {:>5} total {:>5} covered {:>5} intra", ty.to_string(), t.total, t.within_limits, t.intra_sentence);
    }
    Ok(())
}
