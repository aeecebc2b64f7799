use std::collections::{BTreeMap, BTreeSet};

use cacer::codec::{encode_marker_input, strip_markers};
use cacer::model::{
    Argument, ArgumentType, AssertionValue, Document, EventType, NoteText, Relation, RelationType, SubtypeLabel,
};
use cacer::score::{bootstrap_test, match_documents, Category, MatchOptions, Micro, ScoreReport, Strategy};
use cacer::segment::RuleSplitter;
use cacer::standoff::{parse_standoff, write_standoff, StandoffFilePair};
use cacer::synth::{generate_corpus, perturb, GenConfig, NoiseSpec};
use cacer::validate::{validate_document, Violation};
use cacer::window::{enumerate_candidate_pairs, SubwordEstimate, WindowLimits};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn note(seed: u64) -> Document {
    generate_corpus(&GenConfig {
        seed,
        n_notes: 1,
        ..Default::default()
    })
    .unwrap()
    .remove(0)
}

/// Breaks a valid note in several ways at once.
fn corrupt(mut d: Document, seed: u64) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let some_span = d.events[0].trigger.clone();
    for e in d.events.iter_mut() {
        match (e.event_type, rand::Rng::random_range(&mut rng, 0..4)) {
            (EventType::Drug, 0) => e.arguments.push(Argument::span_only(ArgumentType::Anatomy, some_span.clone())),
            (EventType::Problem, 0) => e.arguments.clear(),
            (EventType::Problem, 1) => e.arguments.push(Argument::assertion(AssertionValue::Absent)),
            (EventType::Problem, 2) => e.arguments.push(Argument::span_only(ArgumentType::Change, some_span.clone())),
            _ => {}
        }
    }
    if let Some(r) = d.relations.first().cloned() {
        d.relations.push(r.clone());
        d.relations.push(Relation::new(RelationType::Causes, r.tail.clone(), r.head.clone()));
        d.relations.push(Relation::new(r.rel_type, r.head, "E999".into()));
    }
    d
}

fn sorted(mut v: Vec<Violation>) -> Vec<Violation> {
    v.sort();
    v
}

fn shuffled(mut d: Document, seed: u64) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    d.events.shuffle(&mut rng);
    for e in d.events.iter_mut() {
        e.arguments.shuffle(&mut rng);
    }
    d.relations.shuffle(&mut rng);
    d
}

fn pair_set(d: &Document) -> BTreeSet<(String, String, usize, usize, usize)> {
    enumerate_candidate_pairs(d, &SubwordEstimate::default(), WindowLimits::default())
        .pairs
        .iter()
        .map(|c| {
            (
                c.head.id.to_string(),
                c.tail.id.to_string(),
                c.window.first,
                c.window.last,
                c.window.token_count,
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn validation_ignores_list_order(seed in any::<u64>(), bad in any::<u64>(), perm in any::<u64>()) {
        let d = corrupt(note(seed), bad);
        let v = sorted(validate_document(&d));
        prop_assert!(!v.is_empty());
        prop_assert_eq!(sorted(validate_document(&shuffled(d.clone(), perm))), v.clone());
        prop_assert_eq!(sorted(validate_document(&d)), v);
    }

    #[test]
    fn standoff_round_trip_preserves_document_and_violations(seed in any::<u64>(), bad in any::<u64>()) {
        let d = note(seed);
        let pair = write_standoff(&d).unwrap();
        let back = parse_standoff(&d.doc_id, &pair, &RuleSplitter).unwrap();
        prop_assert_eq!(back.canonical(), d.canonical());
        prop_assert_eq!(back.text.as_str(), d.text.as_str());
        prop_assert_eq!(write_standoff(&back).unwrap(), pair);

        let broken = corrupt(d, bad);
        if let Ok(pair) = write_standoff(&broken) {
            if let Ok(back) = parse_standoff(&broken.doc_id, &pair, &RuleSplitter) {
                let again = parse_standoff(&broken.doc_id, &write_standoff(&back).unwrap(), &RuleSplitter).unwrap();
                prop_assert_eq!(sorted(validate_document(&again)), sorted(validate_document(&back)));
            }
        }
    }

    #[test]
    fn note_text_is_kept_bit_exact(text in "[a-zé \t\r\n.,;:!?😀-]{0,120}") {
        let pair = StandoffFilePair { text: text.clone(), ann: String::new() };
        let d = parse_standoff("t", &pair, &RuleSplitter).unwrap();
        prop_assert_eq!(d.text.as_str(), text.as_str());
        prop_assert_eq!(write_standoff(&d).unwrap().text, text);
    }

    #[test]
    fn marker_stripping_inverts_marking(seed in any::<u64>()) {
        let d = note(seed);
        for c in enumerate_candidate_pairs(&d, &SubwordEstimate::default(), WindowLimits::default()).pairs.iter().take(40) {
            let marked = encode_marker_input(&c.window);
            prop_assert!(marked.issues.is_empty());
            prop_assert_eq!(strip_markers(&marked.text), c.window.text());
        }
    }

    #[test]
    fn windows_are_minimal_and_order_independent(seed in any::<u64>(), perm in any::<u64>()) {
        let d = note(seed);
        let sentence = |id| d.trigger_sentence(d.event(id).unwrap()).unwrap();
        for c in enumerate_candidate_pairs(&d, &SubwordEstimate::default(), WindowLimits::default()).pairs {
            let (h, t) = (sentence(&c.head.id), sentence(&c.tail.id));
            prop_assert_eq!((c.window.first, c.window.last), (h.min(t), h.max(t)));
        }
        prop_assert_eq!(pair_set(&shuffled(d.clone(), perm)), pair_set(&d));
    }

    #[test]
    fn matching_is_symmetric(seed in any::<u64>(), noise in 0usize..4) {
        let gold = note(seed);
        let spec = NoiseSpec {
            drop_triggers: noise,
            spurious_triggers: noise,
            jitter_spans: noise,
            flip_assertions: noise,
            flip_relations: noise.min(1),
            drop_relations: noise.min(1),
        };
        let pred = perturb(&gold, &spec, seed ^ 1);
        for strategy in [Strategy::Greedy, Strategy::Optimal] {
            let opts = MatchOptions { strategy, exact_spans: false };
            let ab = match_documents(&gold, &pred, opts).unwrap();
            let ba = match_documents(&pred, &gold, opts).unwrap();
            prop_assert_eq!(ab.triggers.len(), ba.triggers.len());
            if strategy == Strategy::Optimal {
                for (cat, c) in &ab.counts {
                    let r = ba.counts.get(cat).copied().unwrap_or_default();
                    prop_assert_eq!((c.tp, c.fp, c.fn_), (r.tp, r.fn_, r.fp), "{}", cat);
                }
            }
        }
    }

    #[test]
    fn scores_are_monotone(seed in any::<u64>(), k in 1usize..4) {
        let gold = note(seed);
        let base = perturb(&gold, &NoiseSpec { drop_triggers: k, ..Default::default() }, seed);
        let report = |p: &Document| ScoreReport::from_counts(match_documents(&gold, p, MatchOptions::default()).unwrap().counts);
        let before = report(&base);

        // restore one dropped gold event as a correct prediction
        let mut better = base.clone();
        let missing = gold.events.iter().find(|e| better.event(&e.id).is_none()).unwrap().clone();
        better.events.push(missing);
        let after = report(&better);
        for cat in gold_categories(&gold) {
            prop_assert!(after.get(cat).recall() >= before.get(cat).recall(), "{}", cat);
        }

        let spurious = perturb(&base, &NoiseSpec { spurious_triggers: 2, ..Default::default() }, seed ^ 7);
        let worse = report(&spurious);
        for cat in gold_categories(&gold) {
            prop_assert!(worse.get(cat).recall() >= before.get(cat).recall(), "{}", cat);
            prop_assert!(worse.get(cat).precision() <= before.get(cat).precision(), "{}", cat);
        }
    }

    #[test]
    fn micro_counts_are_category_sums(seed in any::<u64>()) {
        let gold = note(seed);
        let pred = perturb(&gold, &NoiseSpec { drop_triggers: 1, spurious_triggers: 2, flip_relations: 1, ..Default::default() }, seed);
        let r = ScoreReport::from_counts(match_documents(&gold, &pred, MatchOptions::default()).unwrap().counts);
        let mut events = (0, 0, 0);
        let mut relations = (0, 0, 0);
        for (cat, c) in &r.counts {
            let slot = if matches!(cat, Category::Relation(_)) { &mut relations } else { &mut events };
            slot.0 += c.tp;
            slot.1 += c.fp;
            slot.2 += c.fn_;
        }
        let m = |w| { let c = r.micro(w); (c.tp, c.fp, c.fn_) };
        prop_assert_eq!(m(Micro::Events), events);
        prop_assert_eq!(m(Micro::Relations), relations);
        prop_assert_eq!(m(Micro::Overall), (events.0 + relations.0, events.1 + relations.1, events.2 + relations.2));
    }

    #[test]
    fn bootstrap_is_pure(xs in prop::collection::vec(0.0f64..1.0, 5..30), seed in any::<u64>()) {
        let a: Vec<(String, f64)> = xs.iter().enumerate().map(|(i, &x)| (format!("n{i}"), x)).collect();
        let b: Vec<(String, f64)> = xs.iter().enumerate().map(|(i, &x)| (format!("n{i}"), 1.0 - x)).collect();
        let r1 = serde_json::to_string(&bootstrap_test(&a, &b, 500, seed).unwrap()).unwrap();
        let r2 = serde_json::to_string(&bootstrap_test(&a, &b, 500, seed).unwrap()).unwrap();
        prop_assert_eq!(r1, r2);
    }
}

/// Categories with at least one gold item.
fn gold_categories(gold: &Document) -> Vec<Category> {
    let r = ScoreReport::from_counts(match_documents(gold, gold, MatchOptions::default()).unwrap().counts);
    r.counts.keys().copied().collect()
}

#[test]
fn subtype_labels_outside_vocabulary_are_rejected() {
    assert!(SubtypeLabel::parse(ArgumentType::Assertion, "maybe").is_err());
    assert!(SubtypeLabel::parse(ArgumentType::Change, "present").is_err());
    assert!(SubtypeLabel::parse(ArgumentType::Anatomy, "left").is_err());
    let text = "Pain today.";
    let ann = "T1\tProblem 0 4\tPain\nE1\tProblem:T1\nA1\tAssertion E1 maybe\n";
    let pair = StandoffFilePair { text: text.into(), ann: ann.into() };
    assert!(parse_standoff("v", &pair, &RuleSplitter).is_err());
    let _ = NoteText::new(text);
}

fn share<K: Ord + Copy>(counts: &BTreeMap<K, usize>) -> BTreeMap<K, f64> {
    let total: usize = counts.values().sum();
    counts.iter().map(|(k, &n)| (*k, n as f64 / total as f64)).collect()
}

#[test]
fn generated_distributions_match_config() {
    let cfg = GenConfig {
        seed: 12,
        n_notes: 600,
        ..Default::default()
    };
    let docs = generate_corpus(&cfg).unwrap();
    let mut relations = BTreeMap::new();
    let mut assertions = BTreeMap::new();
    let mut problems = 0usize;
    let mut with_arg: BTreeMap<ArgumentType, usize> = BTreeMap::new();
    for d in &docs {
        for r in &d.relations {
            *relations.entry(r.rel_type).or_insert(0) += 1;
        }
        for e in d.events.iter().filter(|e| e.event_type == EventType::Problem) {
            problems += 1;
            *assertions.entry(e.assertion().unwrap()).or_insert(0) += 1;
            let types: BTreeSet<ArgumentType> = e.arguments.iter().map(|a| a.arg_type).collect();
            for t in types {
                *with_arg.entry(t).or_insert(0) += 1;
            }
        }
    }
    assert!(relations.values().sum::<usize>() >= 2000);
    assert!(problems >= 2000);
    for (t, p) in share(&relations) {
        assert!((p - cfg.relation_mix[&t]).abs() <= 0.03, "{t}: {p}");
    }
    for (v, p) in share(&assertions) {
        assert!((p - cfg.assertion_mix[&v]).abs() <= 0.03, "{v}: {p}");
    }
    for (t, target) in &cfg.argument_probability {
        let p = *with_arg.get(t).unwrap_or(&0) as f64 / problems as f64;
        assert!((p - target).abs() <= 0.03, "{t}: {p} vs {target}");
    }
}
