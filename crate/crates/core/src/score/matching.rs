//! One-to-one alignment of gold and predicted annotations under relaxed
//! equivalence: same type plus overlapping spans for triggers and span
//! arguments, same label for labeled arguments, same type plus matched
//! endpoints for relations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::{Argument, Document, Event, EventId, Span};

use super::report::{Category, CountTable};
use super::ScoreError;

/// How trigger pairs are assigned once equivalence is known.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Gold triggers in document order each take the best free prediction.
    #[default]
    Greedy,
    /// Maximum-cardinality bipartite matching.
    Optimal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOptions {
    pub strategy: Strategy,
    /// Require identical offsets instead of overlap.
    pub exact_spans: bool,
}

fn spans_match(a: &Span, b: &Span, exact: bool) -> bool {
    if exact {
        a.same_offsets(b)
    } else {
        a.overlaps(b)
    }
}

/// Same event type and at least one shared character offset.
pub fn triggers_equivalent(a: &Event, b: &Event) -> bool {
    a.event_type == b.event_type && a.trigger.overlaps(&b.trigger)
}

fn equivalent(a: &Event, b: &Event, exact: bool) -> bool {
    a.event_type == b.event_type && spans_match(&a.trigger, &b.trigger, exact)
}

/// Pairs are indices into the gold and predicted documents' lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    /// (gold event, predicted event)
    pub triggers: Vec<(usize, usize)>,
    /// ((gold event, gold argument), (predicted event, predicted argument))
    pub arguments: Vec<((usize, usize), (usize, usize))>,
    /// (gold relation, predicted relation)
    pub relations: Vec<(usize, usize)>,
    pub counts: CountTable,
}

impl Matching {
    pub fn unmatched_gold_triggers(&self, gold: &Document) -> Vec<usize> {
        let hit: Vec<usize> = self.triggers.iter().map(|p| p.0).collect();
        (0..gold.events.len()).filter(|i| !hit.contains(i)).collect()
    }

    pub fn unmatched_pred_triggers(&self, pred: &Document) -> Vec<usize> {
        let hit: Vec<usize> = self.triggers.iter().map(|p| p.1).collect();
        (0..pred.events.len()).filter(|i| !hit.contains(i)).collect()
    }

    /// True positives over all categories.
    pub fn tp(&self) -> usize {
        self.counts.values().map(|c| c.tp).sum()
    }
}

/// Gold events in document order.
fn doc_order(events: &[Event]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| (events[i].trigger.start, events[i].trigger.end, i));
    order
}

/// Preference among equivalent candidates: larger overlap, then earlier start.
fn preference(gold: &Span, pred: &Span) -> (std::cmp::Reverse<usize>, usize) {
    (std::cmp::Reverse(gold.overlap(pred)), pred.start)
}

fn greedy_triggers(gold: &[Event], pred: &[Event], exact: bool) -> Vec<(usize, usize)> {
    let mut used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    for g in doc_order(gold) {
        let best = (0..pred.len())
            .filter(|&p| !used[p] && equivalent(&gold[g], &pred[p], exact))
            .min_by_key(|&p| (preference(&gold[g].trigger, &pred[p].trigger), p));
        if let Some(p) = best {
            used[p] = true;
            pairs.push((g, p));
        }
    }
    pairs
}

fn optimal_triggers(gold: &[Event], pred: &[Event], exact: bool) -> Vec<(usize, usize)> {
    let order = doc_order(gold);
    let adj: Vec<Vec<usize>> = gold
        .iter()
        .map(|g| {
            let mut c: Vec<usize> = (0..pred.len()).filter(|&p| equivalent(g, &pred[p], exact)).collect();
            c.sort_by_key(|&p| (preference(&g.trigger, &pred[p].trigger), p));
            c
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; pred.len()];

    fn augment(g: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &p in &adj[g] {
            if seen[p] {
                continue;
            }
            seen[p] = true;
            if owner[p].is_none_or(|h| augment(h, adj, seen, owner)) {
                owner[p] = Some(g);
                return true;
            }
        }
        false
    }

    for &g in &order {
        let mut seen = vec![false; pred.len()];
        augment(g, &adj, &mut seen, &mut owner);
    }
    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .filter_map(|(p, g)| g.map(|g| (g, p)))
        .collect();
    pairs.sort_unstable();
    pairs
}

fn match_arguments(gold: &[Argument], pred: &[Argument], exact: bool) -> Vec<(usize, usize)> {
    let mut used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    let mut order: Vec<usize> = (0..gold.len()).collect();
    order.sort_by_key(|&i| (gold[i].arg_type, gold[i].span.as_ref().map(|s| s.start), i));
    for g in order {
        let ga = &gold[g];
        let best = (0..pred.len())
            .filter(|&p| !used[p] && pred[p].arg_type == ga.arg_type)
            .filter_map(|p| {
                let pa = &pred[p];
                if ga.arg_type.is_labeled() {
                    (ga.label.is_some() && ga.label == pa.label).then_some(((std::cmp::Reverse(0), 0), p))
                } else {
                    match (&ga.span, &pa.span) {
                        (Some(gs), Some(ps)) if spans_match(gs, ps, exact) => Some((preference(gs, ps), p)),
                        _ => None,
                    }
                }
            })
            .min();
        if let Some((_, p)) = best {
            used[p] = true;
            pairs.push((g, p));
        }
    }
    pairs
}

/// Aligns `pred` against `gold` for one note.
pub fn match_documents(gold: &Document, pred: &Document, opts: MatchOptions) -> Result<Matching, ScoreError> {
    if gold.text.as_str() != pred.text.as_str() {
        return Err(ScoreError::TextMismatch {
            doc_id: gold.doc_id.clone(),
        });
    }
    let exact = opts.exact_spans;
    let triggers = match opts.strategy {
        Strategy::Greedy => greedy_triggers(&gold.events, &pred.events, exact),
        Strategy::Optimal => optimal_triggers(&gold.events, &pred.events, exact),
    };

    let mut m = Matching::default();
    let counts = &mut m.counts;
    for e in &gold.events {
        counts.entry(Category::Trigger(e.event_type)).or_default().fn_ += 1;
        for a in &e.arguments {
            counts.entry(Category::Argument(a.arg_type)).or_default().fn_ += 1;
        }
    }
    for e in &pred.events {
        counts.entry(Category::Trigger(e.event_type)).or_default().fp += 1;
        for a in &e.arguments {
            counts.entry(Category::Argument(a.arg_type)).or_default().fp += 1;
        }
    }
    for r in &gold.relations {
        counts.entry(Category::Relation(r.rel_type)).or_default().fn_ += 1;
    }
    for r in &pred.relations {
        counts.entry(Category::Relation(r.rel_type)).or_default().fp += 1;
    }
    let mut hit = |cat: Category| {
        let c = counts.get_mut(&cat).expect("category counted above");
        c.tp += 1;
        c.fp -= 1;
        c.fn_ -= 1;
    };

    for &(g, p) in &triggers {
        hit(Category::Trigger(gold.events[g].event_type));
        let (ga, pa) = (&gold.events[g].arguments, &pred.events[p].arguments);
        for (gi, pi) in match_arguments(ga, pa, exact) {
            hit(Category::Argument(ga[gi].arg_type));
            m.arguments.push(((g, gi), (p, pi)));
        }
    }

    // first occurrence of an id wins, as in the document index
    let index = |d: &Document| -> HashMap<EventId, usize> {
        let mut idx = HashMap::new();
        for (i, e) in d.events.iter().enumerate() {
            idx.entry(e.id.clone()).or_insert(i);
        }
        idx
    };
    let (gidx, pidx) = (index(gold), index(pred));
    let g2p: HashMap<usize, usize> = triggers.iter().copied().collect();
    let mut used = vec![false; pred.relations.len()];
    for (gi, gr) in gold.relations.iter().enumerate() {
        let (Some(gh), Some(gt)) = (gidx.get(&gr.head), gidx.get(&gr.tail)) else {
            continue;
        };
        let (Some(&ph), Some(&pt)) = (g2p.get(gh), g2p.get(gt)) else {
            continue;
        };
        let found = pred.relations.iter().enumerate().position(|(pi, pr)| {
            !used[pi]
                && pr.rel_type == gr.rel_type
                && pidx.get(&pr.head) == Some(&ph)
                && pidx.get(&pr.tail) == Some(&pt)
        });
        if let Some(pi) = found {
            used[pi] = true;
            hit(Category::Relation(gr.rel_type));
            m.relations.push((gi, pi));
        }
    }
    m.triggers = triggers;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArgumentType, AssertionValue, EventType, NoteText, Relation, RelationType};

    fn doc(events: Vec<Event>) -> Document {
        let text = NoteText::new("Lupron was given for back pain and bone pain in the hip.");
        let sentences = vec![text.span(0, text.char_len()).unwrap()];
        let mut d = Document::new("n1", text, sentences);
        d.events = events;
        d
    }

    fn ev(id: &str, ty: EventType, start: usize, end: usize) -> Event {
        let text = NoteText::new("Lupron was given for back pain and bone pain in the hip.");
        Event::new(id, ty, text.span(start, end).unwrap())
    }

    #[test]
    fn equivalence_rule() {
        let pain = ev("a", EventType::Problem, 26, 30);
        let back_pain = ev("b", EventType::Problem, 21, 30);
        assert!(triggers_equivalent(&pain, &pain));
        assert!(triggers_equivalent(&pain, &back_pain));
        assert!(!triggers_equivalent(&ev("c", EventType::Drug, 26, 30), &pain));
        assert!(!triggers_equivalent(&pain, &ev("d", EventType::Problem, 30, 34)));
    }

    #[test]
    fn identity_has_no_misses() {
        let mut g = doc(vec![
            ev("E1", EventType::Drug, 0, 6),
            ev("E2", EventType::Problem, 26, 30)
                .with_argument(Argument::assertion(AssertionValue::Present))
                .with_argument(Argument::span_only(
                    ArgumentType::Anatomy,
                    Span::new(21, 25, "back"),
                )),
        ]);
        g.relations.push(Relation::new(RelationType::AdminFor, "E1".into(), "E2".into()));
        for strategy in [Strategy::Greedy, Strategy::Optimal] {
            let m = match_documents(&g, &g, MatchOptions { strategy, exact_spans: false }).unwrap();
            assert!(m.counts.values().all(|c| c.fp == 0 && c.fn_ == 0));
            assert_eq!(m.tp(), 5);
        }
    }

    #[test]
    fn partial_recall() {
        let g = doc(vec![ev("E1", EventType::Problem, 26, 30), ev("E2", EventType::Problem, 40, 44)]);
        let p = doc(vec![ev("X", EventType::Problem, 40, 44)]);
        let m = match_documents(&g, &p, MatchOptions::default()).unwrap();
        assert_eq!(m.triggers, vec![(1, 0)]);
        assert_eq!(m.unmatched_gold_triggers(&g), vec![0]);
        let c = m.counts[&Category::Trigger(EventType::Problem)];
        assert_eq!((c.tp, c.fp, c.fn_), (1, 0, 1));
    }

    #[test]
    fn competing_predictions() {
        let g = doc(vec![ev("E1", EventType::Problem, 21, 30)]);
        let p = doc(vec![ev("X", EventType::Problem, 24, 30), ev("Y", EventType::Problem, 21, 25)]);
        let m = match_documents(&g, &p, MatchOptions::default()).unwrap();
        assert_eq!(m.triggers.len(), 1);
        assert_eq!(m.unmatched_pred_triggers(&p).len(), 1);
        // larger overlap wins
        assert_eq!(m.triggers[0], (0, 0));
    }

    #[test]
    fn greedy_can_lose_where_optimal_does_not() {
        let g = doc(vec![ev("A", EventType::Problem, 21, 30), ev("B", EventType::Problem, 26, 34)]);
        let p = doc(vec![ev("X", EventType::Problem, 24, 30), ev("Y", EventType::Problem, 21, 23)]);
        let greedy = match_documents(&g, &p, MatchOptions::default()).unwrap();
        let optimal = match_documents(
            &g,
            &p,
            MatchOptions {
                strategy: Strategy::Optimal,
                exact_spans: false,
            },
        )
        .unwrap();
        assert_eq!(greedy.triggers.len(), 1);
        assert_eq!(optimal.triggers.len(), 2);
    }

    #[test]
    fn exact_toggle() {
        let g = doc(vec![ev("E1", EventType::Problem, 21, 30)]);
        let p = doc(vec![ev("X", EventType::Problem, 26, 30)]);
        let exact = MatchOptions {
            strategy: Strategy::Greedy,
            exact_spans: true,
        };
        assert_eq!(match_documents(&g, &p, exact).unwrap().tp(), 0);
        assert_eq!(match_documents(&g, &p, MatchOptions::default()).unwrap().tp(), 1);
    }

    #[test]
    fn text_mismatch() {
        let g = doc(vec![]);
        let mut p = doc(vec![]);
        p.text = NoteText::new("other");
        assert!(matches!(
            match_documents(&g, &p, MatchOptions::default()),
            Err(ScoreError::TextMismatch { .. })
        ));
    }
}
