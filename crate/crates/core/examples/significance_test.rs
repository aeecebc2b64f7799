//! Paired bootstrap test between two systems scored on the same notes.

use cacer::score::{bootstrap_test, per_note_f1, score_notes, Micro, ScoreOptions, DEFAULT_ITERATIONS};
use cacer::synth::{generate_corpus, perturb, GenConfig, NoiseSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gold = generate_corpus(&GenConfig {
        seed: 11,
        n_notes: 60,
        ..Default::default()
    })?;
    let system = |drop: usize, seed: u64| -> Vec<_> {
        let noise = NoiseSpec {
            drop_triggers: drop,
            spurious_triggers: 1,
            ..Default::default()
        };
        gold.iter().enumerate().map(|(i, d)| perturb(d, &noise, seed + i as u64)).collect()
    };
    let (a, b) = (system(1, 100), system(3, 200));
    let fa = per_note_f1(&score_notes(&gold, &a, ScoreOptions::default())?, Micro::Overall);
    let fb = per_note_f1(&score_notes(&gold, &b, ScoreOptions::default())?, Micro::Overall);

    let r = bootstrap_test(&fa, &fb, DEFAULT_ITERATIONS, 42)?;
    println!(
        "A mean F1 {:.4}, B mean F1 {:.4}, diff {:+.4}\np = {} over {} resamples ({:?}); significant at 0.05: {}",
        r.mean_a, r.mean_b, r.observed_diff, r.p_value, r.resamples, r.method, r.significant
    );
    let reverse = bootstrap_test(&fb, &fa, DEFAULT_ITERATIONS, 42)?;
    println!("B over A: p = {}", reverse.p_value);
    Ok(())
}
