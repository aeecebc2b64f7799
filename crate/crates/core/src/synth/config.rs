use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::model::{ArgumentType, AssertionValue, ChangeValue, RelationType, SeverityValue};

use super::GenError;

// Training-split label counts the defaults are derived from.
const PROBLEMS: f64 = 21_453.0;
const DRUGS: f64 = 11_118.0;
const RELATIONS: [(RelationType, f64); 6] = [
    (RelationType::AdminFor, 3715.0),
    (RelationType::NotAdminBecause, 130.0),
    (RelationType::Causes, 729.0),
    (RelationType::Improves, 502.0),
    (RelationType::Worsens, 257.0),
    (RelationType::Pip, 1257.0),
];
const ARGUMENTS: [(ArgumentType, f64); 6] = [
    (ArgumentType::Anatomy, 9880.0),
    (ArgumentType::Characteristics, 4749.0),
    (ArgumentType::Duration, 930.0),
    (ArgumentType::Frequency, 245.0),
    (ArgumentType::Change, 1440.0),
    (ArgumentType::Severity, 775.0),
];

/// Generator settings. Every field has a default, so a TOML file only
/// needs the fields it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub n_notes: usize,
    /// Inclusive range of relations per note.
    pub relations_per_note: [usize; 2],
    /// Events outside any relation, per relation.
    pub standalone_per_relation: f64,
    /// Share of all triggers that are Problems.
    pub problem_fraction: f64,
    /// Share of relations whose endpoints share a sentence.
    pub intra_fraction: f64,
    /// Share of relations whose endpoints are too far apart for a window.
    pub out_of_window_fraction: f64,
    /// Weights of sentence distances 1, 2, ... for the remaining relations.
    pub inter_distance_weights: Vec<f64>,
    pub relation_mix: BTreeMap<RelationType, f64>,
    /// Chance that a Problem carries each optional argument.
    pub argument_probability: BTreeMap<ArgumentType, f64>,
    /// Chance of each further Characteristics span once one is present.
    pub extra_characteristic_probability: f64,
    pub assertion_mix: BTreeMap<AssertionValue, f64>,
    pub change_mix: BTreeMap<ChangeValue, f64>,
    pub severity_mix: BTreeMap<SeverityValue, f64>,
    /// Inclusive range of event-free filler sentences per note.
    pub filler_sentences: [usize; 2],
    /// Chance that a multi-sentence gap contains a section header.
    pub header_probability: f64,
    /// Directory of replacement lexicon files.
    pub lexicon_dir: Option<PathBuf>,
}

impl Default for GenConfig {
    fn default() -> Self {
        let rel_total: f64 = RELATIONS.iter().map(|r| r.1).sum();
        let events = PROBLEMS + DRUGS;
        GenConfig {
            seed: 0,
            n_notes: 100,
            relations_per_note: [2, 8],
            standalone_per_relation: events / rel_total - 2.0,
            problem_fraction: PROBLEMS / events,
            intra_fraction: 0.707,
            out_of_window_fraction: 0.013,
            inter_distance_weights: vec![0.55, 0.25, 0.13, 0.07],
            relation_mix: RELATIONS.iter().map(|&(t, n)| (t, n / rel_total)).collect(),
            argument_probability: ARGUMENTS.iter().map(|&(t, n)| (t, n / PROBLEMS)).collect(),
            extra_characteristic_probability: 0.1,
            assertion_mix: [
                (AssertionValue::Present, 0.80),
                (AssertionValue::Absent, 0.09),
                (AssertionValue::Possible, 0.05),
                (AssertionValue::Conditional, 0.02),
                (AssertionValue::Hypothetical, 0.03),
                (AssertionValue::NotPatient, 0.01),
            ]
            .into_iter()
            .collect(),
            change_mix: [
                (ChangeValue::Improving, 0.35),
                (ChangeValue::Worsening, 0.25),
                (ChangeValue::NoChange, 0.25),
                (ChangeValue::Resolved, 0.15),
            ]
            .into_iter()
            .collect(),
            severity_mix: [
                (SeverityValue::Mild, 0.45),
                (SeverityValue::Moderate, 0.35),
                (SeverityValue::Severe, 0.20),
            ]
            .into_iter()
            .collect(),
            filler_sentences: [1, 4],
            header_probability: 0.5,
            lexicon_dir: None,
        }
    }
}

fn prob(name: &str, p: f64) -> Result<(), GenError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GenError::InvalidConfig(format!("{name} = {p} is not a probability")))
    }
}

fn mix<K>(name: &str, m: impl IntoIterator<Item = (K, f64)>) -> Result<(), GenError> {
    let mut sum = 0.0;
    let mut any = false;
    for (_, w) in m {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(GenError::InvalidConfig(format!("{name} has a negative or non-finite weight")));
        }
        sum += w;
        any = true;
    }
    if !any || (sum - 1.0).abs() > 1e-6 {
        return Err(GenError::InvalidConfig(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

fn range(name: &str, r: [usize; 2]) -> Result<(), GenError> {
    if r[0] > r[1] {
        return Err(GenError::InvalidConfig(format!("{name} = {r:?} is empty")));
    }
    Ok(())
}

impl GenConfig {
    /// Probability that a standalone event is a Problem, chosen so the
    /// overall Problem share hits `problem_fraction`. Drug-Problem relations
    /// contribute one of each, PIP relations two Problems.
    pub fn standalone_problem_fraction(&self) -> f64 {
        let pip = self.relation_mix.get(&RelationType::Pip).copied().unwrap_or(0.0);
        let from_relations = 1.0 + pip;
        let total = 2.0 + self.standalone_per_relation;
        if self.standalone_per_relation == 0.0 {
            return 0.0;
        }
        (self.problem_fraction * total - from_relations) / self.standalone_per_relation
    }

    pub fn validate(&self) -> Result<(), GenError> {
        range("relations_per_note", self.relations_per_note)?;
        range("filler_sentences", self.filler_sentences)?;
        for (name, p) in [
            ("problem_fraction", self.problem_fraction),
            ("intra_fraction", self.intra_fraction),
            ("out_of_window_fraction", self.out_of_window_fraction),
            ("extra_characteristic_probability", self.extra_characteristic_probability),
            ("header_probability", self.header_probability),
        ] {
            prob(name, p)?;
        }
        for (t, p) in &self.argument_probability {
            if *t == ArgumentType::Assertion {
                return Err(GenError::InvalidConfig("Assertion is required, not optional".into()));
            }
            prob(&format!("argument_probability.{t}"), *p)?;
        }
        if self.intra_fraction + self.out_of_window_fraction > 1.0 + 1e-9 {
            return Err(GenError::InvalidConfig(
                "intra_fraction + out_of_window_fraction exceeds 1".into(),
            ));
        }
        if !(self.standalone_per_relation >= 0.0 && self.standalone_per_relation.is_finite()) {
            return Err(GenError::InvalidConfig("standalone_per_relation must be >= 0".into()));
        }
        mix("inter_distance_weights", self.inter_distance_weights.iter().map(|&w| ((), w)))?;
        if self.inter_distance_weights.len() > 4 {
            return Err(GenError::InvalidConfig(
                "inter_distance_weights covers at most distances 1..=4".into(),
            ));
        }
        mix("relation_mix", self.relation_mix.iter().map(|(k, v)| (*k, *v)))?;
        mix("assertion_mix", self.assertion_mix.iter().map(|(k, v)| (*k, *v)))?;
        mix("change_mix", self.change_mix.iter().map(|(k, v)| (*k, *v)))?;
        mix("severity_mix", self.severity_mix.iter().map(|(k, v)| (*k, *v)))?;
        let p = self.standalone_problem_fraction();
        if self.standalone_per_relation > 0.0 && !(0.0..=1.0).contains(&p) {
            return Err(GenError::InvalidConfig(format!(
                "problem_fraction {} is unreachable with this relation mix",
                self.problem_fraction
            )));
        }
        Ok(())
    }
}
