use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    Argument, AssertionValue, Document, Event, EventId, EventType, PairKind, RelationType, Source, Span, SubtypeLabel,
};

/// Exact numbers of each error to inject. Counts larger than the number of
/// eligible elements are capped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Remove triggers together with the relations that use them.
    pub drop_triggers: usize,
    /// Add Problem or Drug triggers over text no trigger covers.
    pub spurious_triggers: usize,
    /// Change the Assertion value of Problems.
    pub flip_assertions: usize,
    /// Move one trigger boundary by one character, keeping the overlap.
    pub jitter_spans: usize,
    pub drop_relations: usize,
    /// Change a Drug-Problem relation's type, or reverse a PIP.
    pub flip_relations: usize,
}

fn choose_k(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(k.min(n));
    idx.sort_unstable();
    idx
}

/// Turns a gold document into a prediction with a controlled set of
/// errors. Ids of surviving events are kept.
pub fn perturb(doc: &Document, noise: &NoiseSpec, seed: u64) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = doc.clone();
    out.source = Source::Predicted;

    let dropped: HashSet<EventId> = choose_k(&mut rng, out.events.len(), noise.drop_triggers)
        .into_iter()
        .map(|i| out.events[i].id.clone())
        .collect();
    out.events.retain(|e| !dropped.contains(&e.id));
    out.relations
        .retain(|r| !dropped.contains(&r.head) && !dropped.contains(&r.tail));

    let problems: Vec<usize> = (0..out.events.len())
        .filter(|&i| out.events[i].assertion().is_some())
        .collect();
    for pick in choose_k(&mut rng, problems.len(), noise.flip_assertions) {
        let e = &mut out.events[problems[pick]];
        let current = e.assertion().expect("filtered on assertion");
        let others: Vec<AssertionValue> = AssertionValue::ALL.iter().copied().filter(|v| *v != current).collect();
        let next = *others.choose(&mut rng).expect("more than one assertion value");
        for a in &mut e.arguments {
            if a.label == Some(SubtypeLabel::Assertion(current)) {
                a.label = Some(SubtypeLabel::Assertion(next));
                break;
            }
        }
    }

    for i in choose_k(&mut rng, out.events.len(), noise.jitter_spans) {
        let t = out.events[i].trigger.clone();
        let (start, end) = if t.len() > 1 {
            if rng.random_bool(0.5) {
                (t.start + 1, t.end)
            } else {
                (t.start, t.end - 1)
            }
        } else {
            (t.start, (t.end + 1).min(doc.text.char_len()))
        };
        if let Ok(span) = doc.text.span(start, end) {
            out.events[i].trigger = span;
        }
    }

    for i in choose_k(&mut rng, out.relations.len(), noise.flip_relations) {
        let r = &mut out.relations[i];
        match r.rel_type.pair_kind() {
            PairKind::ProblemProblem => std::mem::swap(&mut r.head, &mut r.tail),
            PairKind::DrugProblem => {
                let others: Vec<RelationType> = RelationType::ALL
                    .iter()
                    .copied()
                    .filter(|t| t.pair_kind() == PairKind::DrugProblem && *t != r.rel_type)
                    .collect();
                r.rel_type = *others.choose(&mut rng).expect("several drug relations");
            }
        }
    }

    let drop = choose_k(&mut rng, out.relations.len(), noise.drop_relations);
    let mut k = 0;
    out.relations.retain(|_| {
        let keep = !drop.contains(&k);
        k += 1;
        keep
    });

    let mut free = free_words(&out);
    free.shuffle(&mut rng);
    for (n, span) in free.into_iter().take(noise.spurious_triggers).enumerate() {
        let ty = if rng.random_bool(0.5) {
            EventType::Problem
        } else {
            EventType::Drug
        };
        let mut e = Event::new(format!("S{}", n + 1), ty, span);
        if ty == EventType::Problem {
            e.arguments.push(Argument::assertion(AssertionValue::Present));
        }
        out.events.push(e);
    }
    out
}

/// Alphabetic words of three or more letters inside sentences, touching no
/// trigger or argument span.
fn free_words(doc: &Document) -> Vec<Span> {
    let mut busy: Vec<Span> = Vec::new();
    for e in &doc.events {
        busy.push(e.trigger.clone());
        busy.extend(e.arguments.iter().filter_map(|a| a.span.clone()));
    }
    let mut out = Vec::new();
    for s in &doc.sentences {
        let mut start = None;
        let chars: Vec<char> = s.text.chars().collect();
        for i in 0..=chars.len() {
            let alpha = chars.get(i).is_some_and(|c| c.is_alphabetic());
            match (alpha, start) {
                (true, None) => start = Some(i),
                (false, Some(b)) => {
                    start = None;
                    if i - b >= 3 {
                        if let Ok(span) = doc.text.span(s.start + b, s.start + i) {
                            if !busy.iter().any(|x| x.overlaps(&span)) {
                                out.push(span);
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}
