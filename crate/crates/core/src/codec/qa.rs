//! Multiple-choice relation prompts, one per candidate pair.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::{Event, EventId, PairKind, Relation, RelationType};
use crate::window::ContextWindow;

use super::marker::mark;
use super::{prompts, CodecError};

/// A rendered question about one ordered (head, tail) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QaPrompt {
    pub pair_kind: PairKind,
    pub head: EventId,
    pub tail: EventId,
    pub text: String,
}

impl QaPrompt {
    /// Option letters offered, in order.
    pub fn letters(&self) -> &'static [char] {
        letters(self.pair_kind)
    }
}

fn letters(kind: PairKind) -> &'static [char] {
    match kind {
        PairKind::DrugProblem => &['A', 'B', 'C', 'D', 'E', 'F'],
        PairKind::ProblemProblem => &['A', 'B', 'C'],
    }
}

/// Builds the question for `head` → `tail`. Only the two events of the
/// pair are marked in the window text.
pub fn build_qa_prompt(head: &Event, tail: &Event, window: &ContextWindow<'_>) -> Result<QaPrompt, CodecError> {
    let pair_kind = PairKind::of(head.event_type, tail.event_type).ok_or_else(|| CodecError::InvalidPairTypes {
        head: head.event_type.to_string(),
        tail: tail.event_type.to_string(),
    })?;
    let template = match pair_kind {
        PairKind::DrugProblem => prompts::QA_DRUG_PROBLEM,
        PairKind::ProblemProblem => prompts::QA_PROBLEM_PROBLEM,
    };
    let note = mark(window, &[head, tail]).text;
    let text = prompts::render(
        template,
        &[("A", &head.trigger.text), ("B", &tail.trigger.text), ("NOTE", &note)],
    );
    Ok(QaPrompt {
        pair_kind,
        head: head.id.clone(),
        tail: tail.id.clone(),
        text,
    })
}

/// Option letter → relation type for Drug-Problem questions. The last
/// option is always "none of the above". Problem-Problem questions are
/// fixed: A is head → tail, B is tail → head, C is none.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaMapping {
    pub drug_problem: [Option<RelationType>; 6],
}

impl Default for QaMapping {
    fn default() -> Self {
        use RelationType::*;
        QaMapping {
            drug_problem: [
                Some(AdminFor),
                Some(NotAdminBecause),
                Some(Worsens),
                Some(Causes),
                Some(Improves),
                None,
            ],
        }
    }
}

impl QaMapping {
    /// The relation an answer letter stands for, or `None` for "none of
    /// the above".
    pub fn relation(
        &self,
        kind: PairKind,
        letter: char,
        head: &EventId,
        tail: &EventId,
    ) -> Result<Option<Relation>, CodecError> {
        let idx = letters(kind)
            .iter()
            .position(|&l| l == letter)
            .ok_or(CodecError::InvalidOption { letter })?;
        Ok(match kind {
            PairKind::DrugProblem => self.drug_problem[idx].map(|t| Relation::new(t, head.clone(), tail.clone())),
            PairKind::ProblemProblem => match idx {
                0 => Some(Relation::new(RelationType::Pip, head.clone(), tail.clone())),
                1 => Some(Relation::new(RelationType::Pip, tail.clone(), head.clone())),
                _ => None,
            },
        })
    }

    /// The correct letter for a pair given the gold relations. When several
    /// relations link the pair, the earliest option wins.
    pub fn answer_letter(&self, kind: PairKind, head: &EventId, tail: &EventId, gold: &[Relation]) -> char {
        let opts = letters(kind);
        opts.iter()
            .copied()
            .find(|&l| {
                self.relation(kind, l, head, tail)
                    .ok()
                    .flatten()
                    .is_some_and(|r| gold.contains(&r))
            })
            .unwrap_or(opts[opts.len() - 1])
    }
}

/// Gold answer letter under the default mapping.
pub fn option_letter(kind: PairKind, head: &EventId, tail: &EventId, gold: &[Relation]) -> char {
    QaMapping::default().answer_letter(kind, head, tail, gold)
}

static PREFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:the\s+(?:correct\s+)?answer\s+is|correct\s+answer|answer|option|choice)\s*[:\-]?\s*")
        .expect("valid regex")
});
static LEADING: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:\(\s*([A-Za-z])\s*\)|([A-Za-z])\s*\))").expect("valid regex"));
static ANYWHERE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\(\s*([A-Za-z])\s*\)").expect("valid regex"));

fn trim_noise(s: &str) -> &str {
    s.trim_start_matches(|c: char| c.is_whitespace() || "*\"'`-#>:".contains(c))
}

fn extract_letter(answer: &str, kind: PairKind) -> Result<char, CodecError> {
    let offered = letters(kind);
    let check = |l: char| {
        let l = l.to_ascii_uppercase();
        if offered.contains(&l) {
            Ok(l)
        } else {
            Err(CodecError::InvalidOption { letter: l })
        }
    };
    let mut s = trim_noise(answer);
    let mut prefixed = false;
    while let Some(m) = PREFIX.find(s) {
        if m.end() == 0 {
            break;
        }
        prefixed = true;
        s = trim_noise(&s[m.end()..]);
    }
    if let Some(c) = LEADING.captures(s) {
        let l = c.get(1).or(c.get(2)).expect("one group matches").as_str();
        return check(l.chars().next().expect("one letter"));
    }
    let mut chars = s.chars();
    if let Some(first) = chars.next() {
        let bounded = chars.next().is_none_or(|c| !c.is_alphanumeric());
        // after "Answer:" a lone lowercase letter is still an option
        let first = if prefixed { first.to_ascii_uppercase() } else { first };
        if bounded && offered.contains(&first) {
            return Ok(first);
        }
    }
    if let Some(c) = ANYWHERE.captures(s) {
        return check(c[1].chars().next().expect("one letter"));
    }
    Err(CodecError::UnparseableAnswer(answer.chars().take(80).collect()))
}

/// Maps a model answer to a relation under the default option mapping.
pub fn parse_qa_answer(answer: &str, kind: PairKind, head: &Event, tail: &Event) -> Result<Option<Relation>, CodecError> {
    parse_qa_answer_with(&QaMapping::default(), answer, kind, head, tail)
}

/// Maps a model answer to a relation. The letter is the leading `(X)`,
/// `X)` or bare `X`, else the first parenthesized letter anywhere.
pub fn parse_qa_answer_with(
    mapping: &QaMapping,
    answer: &str,
    kind: PairKind,
    head: &Event,
    tail: &Event,
) -> Result<Option<Relation>, CodecError> {
    let letter = extract_letter(answer, kind)?;
    mapping.relation(kind, letter, &head.id, &tail.id)
}
