//! Score a noisy system against gold annotations with relaxed matching.

use cacer::score::{score, score_notes, Micro, ScoreOptions};
use cacer::synth::{generate_corpus, perturb, GenConfig, NoiseSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gold = generate_corpus(&GenConfig {
        seed: 3,
        n_notes: 50,
        ..Default::default()
    })?;
    let noise = NoiseSpec {
        drop_triggers: 1,
        spurious_triggers: 1,
        jitter_spans: 2,
        flip_assertions: 1,
        flip_relations: 1,
        drop_relations: 0,
    };
    let pred: Vec<_> = gold.iter().enumerate().map(|(i, d)| perturb(d, &noise, i as u64)).collect();

    let report = score(&gold, &pred, ScoreOptions::default())?;
    print!("{}", report.to_table());

    let notes = score_notes(&gold, &pred, ScoreOptions::default())?;
    let worst = notes
        .iter()
        .min_by(|a, b| a.report.micro(Micro::Overall).f1().total_cmp(&b.report.micro(Micro::Overall).f1()))
        .unwrap();
    println!("\nlowest note: {} (F1 {:.3})", worst.doc_id, worst.report.micro(Micro::Overall).f1());
    Ok(())
}
