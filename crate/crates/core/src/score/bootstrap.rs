//! Paired bootstrap over notes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ScoreError;

pub const DEFAULT_ITERATIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMethod {
    /// Every one of the n^n resamples, used when that is no more than the
    /// requested iteration count.
    Exhaustive,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigTestResult {
    pub n: usize,
    pub doc_ids: Vec<String>,
    pub scores_a: Vec<f64>,
    pub scores_b: Vec<f64>,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Mean of A − B over the original sample.
    pub observed_diff: f64,
    /// Share of resamples whose mean difference is ≤ 0.
    pub p_value: f64,
    pub iterations: usize,
    pub resamples: usize,
    pub method: ResampleMethod,
    pub seed: u64,
    pub significant: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn align(a: &[(String, f64)], b: &[(String, f64)]) -> Result<(Vec<String>, Vec<f64>, Vec<f64>), ScoreError> {
    if a.len() != b.len() {
        return Err(ScoreError::MisalignedSamples(format!(
            "{} scores for A, {} for B",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(ScoreError::MisalignedSamples(format!(
            "need at least 2 notes, got {}",
            a.len()
        )));
    }
    let mut ids = Vec::with_capacity(a.len());
    for ((ia, _), (ib, _)) in a.iter().zip(b) {
        if ia != ib {
            return Err(ScoreError::MisalignedSamples(format!("note {ia:?} paired with {ib:?}")));
        }
        ids.push(ia.clone());
    }
    let mut sorted = ids.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(ScoreError::MisalignedSamples(format!("note {:?} listed twice", w[0])));
    }
    Ok((
        ids,
        a.iter().map(|x| x.1).collect(),
        b.iter().map(|x| x.1).collect(),
    ))
}

/// Sum of paired differences over a resample; `≤ 0` iff the mean is.
fn resample_sum(diffs: &[f64], idx: impl Iterator<Item = usize>) -> f64 {
    idx.map(|i| diffs[i]).sum()
}

fn exhaustive_count(diffs: &[f64]) -> (usize, usize) {
    let n = diffs.len();
    let total = n.pow(n as u32);
    let hits = (0..total)
        .into_par_iter()
        .filter(|&k| {
            let mut k = k;
            let idx = (0..n).map(move |_| {
                let i = k % n;
                k /= n;
                i
            });
            resample_sum(diffs, idx) <= 0.0
        })
        .count();
    (hits, total)
}

fn monte_carlo_count(diffs: &[f64], iterations: usize, seed: u64) -> usize {
    let n = diffs.len();
    (0..iterations as u64)
        .into_par_iter()
        .filter(|&it| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(it);
            let idx = (0..n).map(|_| rng.random_range(0..n)).collect::<Vec<_>>();
            resample_sum(diffs, idx.into_iter()) <= 0.0
        })
        .count()
}

/// One-sided test that system A beats system B, resampling notes with
/// replacement. Iteration `i` draws from its own ChaCha stream derived from
/// `seed`, so the result does not depend on thread count.
pub fn bootstrap_test(
    a: &[(String, f64)],
    b: &[(String, f64)],
    iterations: usize,
    seed: u64,
) -> Result<SigTestResult, ScoreError> {
    let (doc_ids, scores_a, scores_b) = align(a, b)?;
    if iterations == 0 {
        return Err(ScoreError::MisalignedSamples("iterations must be positive".into()));
    }
    let n = doc_ids.len();
    let diffs: Vec<f64> = scores_a.iter().zip(&scores_b).map(|(x, y)| x - y).collect();
    let exhaustive = n.checked_pow(n as u32).is_some_and(|t| t <= iterations);
    let (hits, resamples, method) = if exhaustive {
        let (h, t) = exhaustive_count(&diffs);
        (h, t, ResampleMethod::Exhaustive)
    } else {
        (monte_carlo_count(&diffs, iterations, seed), iterations, ResampleMethod::MonteCarlo)
    };
    let p_value = hits as f64 / resamples as f64;
    Ok(SigTestResult {
        n,
        mean_a: mean(&scores_a),
        mean_b: mean(&scores_b),
        observed_diff: mean(&diffs),
        doc_ids,
        scores_a,
        scores_b,
        p_value,
        iterations,
        resamples,
        method,
        seed,
        significant: p_value < 0.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(xs: &[f64]) -> Vec<(String, f64)> {
        xs.iter().enumerate().map(|(i, &x)| (format!("n{i}"), x)).collect()
    }

    #[test]
    fn identical_systems() {
        let a = scores(&[0.5, 0.7, 0.9, 0.1, 0.3, 0.2, 0.8]);
        let r = bootstrap_test(&a, &a, 2000, 1).unwrap();
        assert_eq!(r.method, ResampleMethod::MonteCarlo);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn dominating_system() {
        let a = scores(&[0.6, 0.8, 1.0, 0.2, 0.4, 0.3, 0.9]);
        let b = scores(&[0.5, 0.7, 0.9, 0.1, 0.3, 0.2, 0.8]);
        let r = bootstrap_test(&a, &b, 2000, 1).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.significant);
    }

    #[test]
    fn small_n_is_exhaustive() {
        let a = scores(&[0.9, 0.2, 0.6]);
        let b = scores(&[0.5, 0.5, 0.5]);
        let r = bootstrap_test(&a, &b, 10_000, 0).unwrap();
        assert_eq!(r.method, ResampleMethod::Exhaustive);
        assert_eq!(r.resamples, 27);
        // diffs 0.4, -0.3, 0.1
        let d = [0.4, -0.3, 0.1];
        let mut hits = 0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if d[i] + d[j] + d[k] <= 0.0 {
                        hits += 1;
                    }
                }
            }
        }
        assert!((r.p_value - hits as f64 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn misaligned() {
        let a = scores(&[0.1, 0.2]);
        let mut b = scores(&[0.1, 0.2]);
        b[1].0 = "other".into();
        assert!(bootstrap_test(&a, &b, 100, 0).is_err());
        assert!(bootstrap_test(&a[..1], &a[..1], 100, 0).is_err());
        assert!(bootstrap_test(&a, &a[..1], 100, 0).is_err());
    }

    #[test]
    fn seeded() {
        let a = scores(&[0.6, 0.1, 0.9, 0.4, 0.5, 0.3, 0.2, 0.7]);
        let b = scores(&[0.5, 0.3, 0.8, 0.5, 0.4, 0.4, 0.1, 0.6]);
        let r1 = bootstrap_test(&a, &b, 3000, 42).unwrap();
        let r2 = bootstrap_test(&a, &b, 3000, 42).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.p_value > 0.0 && r1.p_value < 1.0);
    }
}
