//! Seeded synthetic corpora with gold events and relations.
//!
//! Notes are built from template sentences filled with lexicon phrases, so
//! every span occurs verbatim and every trigger text is unique within its
//! note. Each relation gets its own sentences: intra-sentence relations a
//! single sentence, the rest a problem sentence and a drug (or second
//! problem) sentence separated by fillers and, sometimes, a section header.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::{decode_events, encode_events};
use crate::model::{
    Argument, ArgumentType, AssertionValue, CanonicalEvent, ChangeValue, Document, Event, EventType, NoteText,
    Relation, RelationType, SeverityValue, Source, Span, SubtypeLabel,
};
use crate::segment::segment_sentences;
use crate::standoff::write_standoff;

mod config;
mod lexicon;
mod perturb;

pub use config::GenConfig;
pub use lexicon::Lexicon;
pub use perturb::{perturb, NoiseSpec};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("INVALID_CONFIG: {0}")]
    InvalidConfig(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("note {note}: {reason}")]
    Exhausted { note: usize, reason: String },
}

const MAX_ATTEMPTS: usize = 50;
const PLAN_HEADER: &str = "ASSESSMENT AND PLAN:";
const OPENING_HEADER: &str = "HISTORY OF PRESENT ILLNESS:";

/// Generates `cfg.n_notes` notes. The result depends only on `cfg`.
pub fn generate_corpus(cfg: &GenConfig) -> Result<Vec<Document>, GenError> {
    cfg.validate()?;
    let lexicon = match &cfg.lexicon_dir {
        Some(dir) => Lexicon::load_dir(dir)?,
        None => Lexicon::builtin(),
    };
    let tables = Tables::new(cfg);
    (0..cfg.n_notes)
        .into_par_iter()
        .map(|i| NoteGen::new(cfg, &lexicon, &tables, i).run())
        .collect()
}

/// SHA-256 over every note's id, text and standoff annotations, in order.
pub fn corpus_digest(docs: &[Document]) -> String {
    let mut h = Sha256::new();
    for d in docs {
        h.update(d.doc_id.as_bytes());
        h.update([0]);
        h.update(d.text.as_str().as_bytes());
        h.update([0]);
        match write_standoff(d) {
            Ok(pair) => h.update(pair.ann.as_bytes()),
            Err(e) => h.update(e.to_string().as_bytes()),
        }
        h.update([0]);
    }
    hex::encode(h.finalize())
}

struct Mix<T> {
    items: Vec<T>,
    index: WeightedIndex<f64>,
}

impl<T: Copy> Mix<T> {
    fn new(map: &BTreeMap<T, f64>) -> Self {
        Mix {
            items: map.keys().copied().collect(),
            index: WeightedIndex::new(map.values().copied()).expect("validated mix"),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> T {
        self.items[self.index.sample(rng)]
    }
}

struct Tables {
    relations: Mix<RelationType>,
    assertion: Mix<AssertionValue>,
    change: Mix<ChangeValue>,
    severity: Mix<SeverityValue>,
    distance: WeightedIndex<f64>,
    standalone_problem: f64,
}

impl Tables {
    fn new(cfg: &GenConfig) -> Self {
        Tables {
            relations: Mix::new(&cfg.relation_mix),
            assertion: Mix::new(&cfg.assertion_mix),
            change: Mix::new(&cfg.change_mix),
            severity: Mix::new(&cfg.severity_mix),
            distance: WeightedIndex::new(cfg.inter_distance_weights.iter().copied()).expect("validated weights"),
            standalone_problem: cfg.standalone_problem_fraction().clamp(0.0, 1.0),
        }
    }
}

/// One sentence under construction, offsets local to the sentence.
#[derive(Clone, Debug, Default)]
struct Piece {
    text: String,
    len: usize,
    events: Vec<Event>,
    header: bool,
}

impl Piece {
    fn fixed(text: &str, header: bool) -> Self {
        Piece {
            text: text.to_string(),
            len: text.chars().count(),
            events: Vec::new(),
            header,
        }
    }

    fn push(&mut self, s: &str) {
        self.text.push_str(s);
        self.len += s.chars().count();
    }

    fn span(&mut self, s: &str) -> Span {
        let start = self.len;
        self.push(s);
        Span::new(start, self.len, s)
    }

    fn round_trips(&self) -> bool {
        let sentence = Span::new(0, self.len, self.text.as_str());
        let Ok(encoded) = encode_events(&sentence, &self.events) else {
            return false;
        };
        let (decoded, issues) = decode_events(&sentence, &encoded);
        let canon = |evs: &[Event]| {
            let mut v: Vec<CanonicalEvent> = evs.iter().map(CanonicalEvent::from).collect();
            v.sort();
            v
        };
        issues.is_empty() && canon(&decoded) == canon(&self.events)
    }
}

/// Endpoint of a relation: (piece within unit, event within piece).
type Slot = (usize, usize);

struct Unit {
    pieces: Vec<Piece>,
    relation: Option<(RelationType, Slot, Slot)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Head,
    Tail,
}

fn intra_templates(t: RelationType) -> &'static [&'static str] {
    match t {
        RelationType::AdminFor => &["{H} was started for {T}.", "Continue {H} for {T}.", "{T} is treated with {H}."],
        RelationType::NotAdminBecause => &["{H} was held due to {T}.", "{H} is deferred given {T}."],
        RelationType::Causes => &["{T} is attributed to {H}.", "{H} has caused {T}."],
        RelationType::Improves => &["{T} improved with {H}.", "{H} has controlled {T}."],
        RelationType::Worsens => &["{T} persists despite {H}.", "{T} progressed on {H}."],
        RelationType::Pip => &["{H} with {T}.", "{H} consistent with {T}."],
    }
}

fn head_templates(t: RelationType) -> &'static [&'static str] {
    match t {
        RelationType::AdminFor => &["Continue {H}.", "Start {H}."],
        RelationType::NotAdminBecause => &["Hold {H}.", "Stopped {H}."],
        RelationType::Causes => &["Recently received {H}."],
        RelationType::Improves => &["Tolerating {H} well."],
        RelationType::Worsens => &["Remains on {H}."],
        RelationType::Pip => &["Also notes {H}."],
    }
}

const TAIL_TEMPLATES: &[&str] = &["She reports {T}.", "History of {T}.", "He has {T}."];
const PROBLEM_TEMPLATES: &[&str] = &["Notes {T}.", "Reports {T}."];
const DRUG_TEMPLATES: &[&str] = &["Takes {H} as needed.", "Prescribed {H}."];

fn assertion_cue(a: AssertionValue) -> &'static str {
    match a {
        AssertionValue::Present | AssertionValue::Conditional => "",
        AssertionValue::Absent => "no ",
        AssertionValue::Possible => "possible ",
        AssertionValue::Hypothetical => "risk of ",
        AssertionValue::NotPatient => "family history of ",
    }
}

fn change_cue(c: ChangeValue) -> &'static str {
    match c {
        ChangeValue::Improving => "improving",
        ChangeValue::Worsening => "worsening",
        ChangeValue::NoChange => "unchanged",
        ChangeValue::Resolved => "resolved",
    }
}

struct NoteGen<'a> {
    cfg: &'a GenConfig,
    lex: &'a Lexicon,
    tables: &'a Tables,
    index: usize,
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl<'a> NoteGen<'a> {
    fn new(cfg: &'a GenConfig, lex: &'a Lexicon, tables: &'a Tables, index: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        NoteGen {
            cfg,
            lex,
            tables,
            index,
            rng,
            used: HashSet::new(),
        }
    }

    fn exhausted(&self, reason: impl Into<String>) -> GenError {
        GenError::Exhausted {
            note: self.index,
            reason: reason.into(),
        }
    }

    /// A trigger text not yet used in this note.
    fn fresh(&mut self, ty: EventType) -> Option<String> {
        let list = match ty {
            EventType::Problem => &self.lex.problems,
            EventType::Drug => &self.lex.drugs,
        };
        let free: Vec<&String> = list.iter().filter(|p| !self.used.contains(*p)).collect();
        let pick = (*free.get(self.rng.random_range(0..free.len().max(1)))?).clone();
        self.used.insert(pick.clone());
        Some(pick)
    }

    fn pick<'l>(&mut self, list: &'l [String], taken: &mut HashSet<&'l str>) -> Option<&'l str> {
        let free: Vec<&'l str> = list.iter().map(String::as_str).filter(|p| !taken.contains(p)).collect();
        let p = *free.get(self.rng.random_range(0..free.len().max(1)))?;
        taken.insert(p);
        Some(p)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p.clamp(0.0, 1.0))
    }

    fn arg_p(&self, t: ArgumentType) -> f64 {
        self.cfg.argument_probability.get(&t).copied().unwrap_or(0.0)
    }

    /// Renders a Problem phrase with its arguments into `piece`.
    fn problem(&mut self, piece: &mut Piece, trigger: &str, taken: &mut HashSet<&'a str>) -> usize {
        let lex = self.lex;
        let assertion = self.tables.assertion.sample(&mut self.rng);
        let mut args = vec![Argument::assertion(assertion)];
        piece.push(assertion_cue(assertion));
        if self.chance(self.arg_p(ArgumentType::Severity)) {
            let s = self.tables.severity.sample(&mut self.rng);
            piece.push(s.as_str());
            piece.push(" ");
            args.push(Argument::labeled(SubtypeLabel::Severity(s)));
        }
        if self.chance(self.arg_p(ArgumentType::Characteristics)) {
            let mut n = 1;
            while n < 3 && self.chance(self.cfg.extra_characteristic_probability) {
                n += 1;
            }
            for i in 0..n {
                let Some(c) = self.pick(&lex.characteristics, taken) else {
                    break;
                };
                if i > 0 {
                    piece.push(" and ");
                }
                let span = piece.span(c);
                args.push(Argument::span_only(ArgumentType::Characteristics, span));
            }
            piece.push(" ");
        }
        let trigger = piece.span(trigger);
        for (ty, lead, list) in [
            (ArgumentType::Anatomy, " in the ", &lex.anatomy),
            (ArgumentType::Duration, " for ", &lex.durations),
            (ArgumentType::Frequency, " ", &lex.frequencies),
        ] {
            if self.chance(self.arg_p(ty)) {
                if let Some(v) = self.pick(list, taken) {
                    piece.push(lead);
                    let span = piece.span(v);
                    args.push(Argument::span_only(ty, span));
                }
            }
        }
        if self.chance(self.arg_p(ArgumentType::Change)) {
            let c = self.tables.change.sample(&mut self.rng);
            piece.push(", now ");
            piece.push(change_cue(c));
            args.push(Argument::labeled(SubtypeLabel::Change(c)));
        }
        let mut event = Event::new("", EventType::Problem, trigger);
        event.arguments = args;
        piece.events.push(event);
        piece.events.len() - 1
    }

    fn drug(&mut self, piece: &mut Piece, trigger: &str) -> usize {
        let span = piece.span(trigger);
        piece.events.push(Event::new("", EventType::Drug, span));
        piece.events.len() - 1
    }

    /// Fills `{H}` / `{T}` in `template`; returns the event index of each.
    fn render(
        &mut self,
        template: &str,
        head: Option<(EventType, &str)>,
        tail: Option<&str>,
    ) -> Result<(Piece, Option<usize>, Option<usize>), GenError> {
        for _ in 0..MAX_ATTEMPTS {
            let mut piece = Piece::default();
            let mut taken: HashSet<&'a str> = HashSet::new();
            let (mut h, mut t) = (None, None);
            let mut rest = template;
            while let Some(open) = rest.find('{') {
                piece.push(&rest[..open]);
                let role = if rest[open..].starts_with("{H}") { Role::Head } else { Role::Tail };
                match (role, head, tail) {
                    (Role::Head, Some((EventType::Drug, text)), _) => h = Some(self.drug(&mut piece, text)),
                    (Role::Head, Some((EventType::Problem, text)), _) => {
                        h = Some(self.problem(&mut piece, text, &mut taken))
                    }
                    (Role::Tail, _, Some(text)) => t = Some(self.problem(&mut piece, text, &mut taken)),
                    _ => unreachable!("template slots match the call"),
                }
                rest = &rest[open + 3..];
            }
            piece.push(rest);
            if piece.round_trips() {
                return Ok((piece, h, t));
            }
        }
        Err(self.exhausted(format!("no sentence for {template:?} survives the event codec")))
    }

    fn choose(&mut self, templates: &[&'static str]) -> &'static str {
        templates[self.rng.random_range(0..templates.len())]
    }

    fn filler(&mut self) -> Piece {
        let f = &self.lex.fillers[self.rng.random_range(0..self.lex.fillers.len())];
        Piece::fixed(f, false)
    }

    fn relation_unit(&mut self) -> Result<Unit, GenError> {
        let ty = self.tables.relations.sample(&mut self.rng);
        let head_ty = ty.head_type();
        let head = self
            .fresh(head_ty)
            .ok_or_else(|| self.exhausted(format!("{head_ty} lexicon exhausted")))?;
        let tail = self
            .fresh(EventType::Problem)
            .ok_or_else(|| self.exhausted("Problem lexicon exhausted"))?;

        let u: f64 = self.rng.random();
        let distance = if u < self.cfg.intra_fraction {
            0
        } else if u < self.cfg.intra_fraction + self.cfg.out_of_window_fraction {
            self.rng.random_range(5..=6)
        } else {
            1 + self.tables.distance.sample(&mut self.rng)
        };

        if distance == 0 {
            let tpl = self.choose(intra_templates(ty));
            let (piece, h, t) = self.render(tpl, Some((head_ty, &head)), Some(&tail))?;
            return Ok(Unit {
                pieces: vec![piece],
                relation: Some((ty, (0, h.expect("head slot")), (0, t.expect("tail slot")))),
            });
        }

        let tpl = self.choose(head_templates(ty));
        let (head_piece, h, _) = self.render(tpl, Some((head_ty, &head)), None)?;
        let tpl = self.choose(TAIL_TEMPLATES);
        let (tail_piece, _, t) = self.render(tpl, None, Some(&tail))?;
        let mut gap: Vec<Piece> = (1..distance).map(|_| self.filler()).collect();
        if !gap.is_empty() && self.chance(self.cfg.header_probability) {
            let at = self.rng.random_range(0..gap.len());
            gap[at] = Piece::fixed(PLAN_HEADER, true);
        }
        let last = distance;
        let (h, t) = (h.expect("head slot"), t.expect("tail slot"));
        let (first, second, relation) = if self.rng.random_bool(0.5) {
            (tail_piece, head_piece, (ty, (last, h), (0, t)))
        } else {
            (head_piece, tail_piece, (ty, (0, h), (last, t)))
        };
        let mut pieces = vec![first];
        pieces.extend(gap);
        pieces.push(second);
        Ok(Unit {
            pieces,
            relation: Some(relation),
        })
    }

    fn standalone_unit(&mut self) -> Result<Option<Unit>, GenError> {
        let ty = if self.chance(self.tables.standalone_problem) {
            EventType::Problem
        } else {
            EventType::Drug
        };
        let Some(text) = self.fresh(ty) else {
            return Ok(None);
        };
        let piece = match ty {
            EventType::Problem => {
                let tpl = self.choose(PROBLEM_TEMPLATES);
                self.render(tpl, None, Some(&text))?.0
            }
            EventType::Drug => {
                let tpl = self.choose(DRUG_TEMPLATES);
                self.render(tpl, Some((ty, &text)), None)?.0
            }
        };
        Ok(Some(Unit {
            pieces: vec![piece],
            relation: None,
        }))
    }

    fn run(mut self) -> Result<Document, GenError> {
        let [lo, hi] = self.cfg.relations_per_note;
        let n_rel = self.rng.random_range(lo..=hi);
        let mut units = Vec::new();
        for _ in 0..n_rel {
            units.push(self.relation_unit()?);
        }
        let expected = self.cfg.standalone_per_relation * n_rel as f64;
        let n_standalone = expected.floor() as usize + usize::from(self.chance(expected.fract()));
        for _ in 0..n_standalone {
            units.extend(self.standalone_unit()?);
        }
        let [flo, fhi] = self.cfg.filler_sentences;
        for _ in 0..self.rng.random_range(flo..=fhi) {
            let filler = self.filler();
            units.push(Unit {
                pieces: vec![filler],
                relation: None,
            });
        }
        units.shuffle(&mut self.rng);
        if self.chance(self.cfg.header_probability) {
            units.insert(
                0,
                Unit {
                    pieces: vec![Piece::fixed(OPENING_HEADER, true)],
                    relation: None,
                },
            );
        }
        self.assemble(units)
    }

    fn assemble(&self, units: Vec<Unit>) -> Result<Document, GenError> {
        let doc_id = format!("synth-{:05}", self.index);
        let mut text = String::new();
        let mut len = 0usize;
        let mut push = |text: &mut String, s: &str| {
            text.push_str(s);
            len += s.chars().count();
            len
        };
        let mut sentences = Vec::new();
        let mut events = Vec::new();
        let mut ids: HashMap<(usize, usize, usize), String> = HashMap::new();
        let mut pending = Vec::new();
        for (ui, unit) in units.into_iter().enumerate() {
            for (pi, piece) in unit.pieces.into_iter().enumerate() {
                let base = if text.is_empty() {
                    0
                } else if piece.header || text.ends_with(':') {
                    push(&mut text, "\n")
                } else {
                    push(&mut text, " ")
                };
                push(&mut text, &piece.text);
                sentences.push(Span::new(base, base + piece.len, piece.text.as_str()));
                let mut order: Vec<usize> = (0..piece.events.len()).collect();
                order.sort_by_key(|&i| piece.events[i].trigger.start);
                for ei in order {
                    let mut e = piece.events[ei].clone();
                    let id = format!("E{}", events.len() + 1);
                    shift(&mut e, base);
                    e.id = id.as_str().into();
                    ids.insert((ui, pi, ei), id);
                    events.push(e);
                }
            }
            if let Some((ty, h, t)) = unit.relation {
                pending.push((ty, (ui, h.0, h.1), (ui, t.0, t.1)));
            }
        }
        let relations = pending
            .into_iter()
            .map(|(ty, h, t)| Relation::new(ty, ids[&h].as_str().into(), ids[&t].as_str().into()))
            .collect();

        let split = segment_sentences(&text);
        if split != sentences {
            return Err(self.exhausted("planned sentences disagree with the splitter"));
        }
        let mut doc = Document::new(doc_id, NoteText::new(text), sentences);
        doc.events = events;
        doc.relations = relations;
        doc.source = Source::Gold;
        Ok(doc)
    }
}

fn shift(e: &mut Event, by: usize) {
    e.trigger.start += by;
    e.trigger.end += by;
    for a in &mut e.arguments {
        if let Some(s) = &mut a.span {
            s.start += by;
            s.end += by;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate_document;

    fn small(seed: u64, n: usize) -> GenConfig {
        GenConfig {
            seed,
            n_notes: n,
            ..Default::default()
        }
    }

    #[test]
    fn zero_notes() {
        assert!(generate_corpus(&small(1, 0)).unwrap().is_empty());
    }

    #[test]
    fn deterministic() {
        let a = generate_corpus(&small(9, 20)).unwrap();
        let b = generate_corpus(&small(9, 20)).unwrap();
        assert_eq!(corpus_digest(&a), corpus_digest(&b));
        let c = generate_corpus(&small(10, 20)).unwrap();
        assert_ne!(corpus_digest(&a), corpus_digest(&c));
    }

    #[test]
    fn notes_are_schema_valid() {
        for doc in generate_corpus(&small(3, 60)).unwrap() {
            let v = validate_document(&doc);
            assert!(v.is_empty(), "{}: {:?}\n{}", doc.doc_id, v, doc.text.as_str());
        }
    }

    #[test]
    fn trigger_texts_are_unique() {
        for doc in generate_corpus(&small(4, 30)).unwrap() {
            let texts: HashSet<&str> = doc.events.iter().map(|e| e.trigger.text.as_str()).collect();
            assert_eq!(texts.len(), doc.events.len());
        }
    }

    #[test]
    fn rejects_invalid_config() {
        let cfg = GenConfig {
            intra_fraction: -0.1,
            ..Default::default()
        };
        assert!(matches!(generate_corpus(&cfg), Err(GenError::InvalidConfig(_))));
    }
}
