use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::{ArgumentType, EventType, RelationType};

/// A scored row: triggers by event type, arguments by type, relations by
/// type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Trigger(EventType),
    Argument(ArgumentType),
    Relation(RelationType),
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Trigger(t) => write!(f, "Trigger/{t}"),
            Category::Argument(t) => write!(f, "Argument/{t}"),
            Category::Relation(t) => write!(f, "Relation/{t}"),
        }
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn add(&mut self, other: &Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    fn is_empty(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

pub type CountTable = BTreeMap<Category, Counts>;

/// Pooled aggregate rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Micro {
    /// Triggers plus arguments.
    Events,
    Relations,
    Overall,
}

impl Micro {
    pub const ALL: &'static [Micro] = &[Micro::Events, Micro::Relations, Micro::Overall];

    fn includes(self, cat: &Category) -> bool {
        match self {
            Micro::Events => !matches!(cat, Category::Relation(_)),
            Micro::Relations => matches!(cat, Category::Relation(_)),
            Micro::Overall => true,
        }
    }
}

impl fmt::Display for Micro {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Micro::Events => "Micro/Events",
            Micro::Relations => "Micro/Relations",
            Micro::Overall => "Micro/Overall",
        })
    }
}

/// One line of the structured report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreRow {
    pub category: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreRow {
    fn new(category: String, c: &Counts) -> Self {
        ScoreRow {
            category,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            precision: c.precision(),
            recall: c.recall(),
            f1: c.f1(),
        }
    }
}

/// Counts pooled over notes, per category plus micro aggregates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScoreReport {
    pub counts: CountTable,
}

impl ScoreReport {
    pub fn from_counts(counts: CountTable) -> Self {
        let mut r = ScoreReport::default();
        r.merge(&counts);
        r
    }

    pub fn merge(&mut self, counts: &CountTable) {
        for (cat, c) in counts {
            if !c.is_empty() {
                self.counts.entry(*cat).or_default().add(c);
            }
        }
    }

    pub fn get(&self, cat: Category) -> Counts {
        self.counts.get(&cat).copied().unwrap_or_default()
    }

    pub fn micro(&self, which: Micro) -> Counts {
        let mut total = Counts::default();
        for (cat, c) in &self.counts {
            if which.includes(cat) {
                total.add(c);
            }
        }
        total
    }

    /// Non-empty categories in a fixed order, followed by the micro rows.
    pub fn rows(&self) -> Vec<ScoreRow> {
        let mut rows: Vec<ScoreRow> = self
            .counts
            .iter()
            .filter(|(_, c)| !c.is_empty())
            .map(|(cat, c)| ScoreRow::new(cat.to_string(), c))
            .collect();
        rows.extend(Micro::ALL.iter().map(|m| ScoreRow::new(m.to_string(), &self.micro(*m))));
        rows
    }

    /// Aligned-column text table, scores as percentages.
    pub fn to_table(&self) -> String {
        let rows = self.rows();
        let width = rows.iter().map(|r| r.category.len()).max().unwrap_or(8).max(8);
        let mut out = format!(
            "{:<width$} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}\n",
            "Category", "TP", "FP", "FN", "P", "R", "F1"
        );
        out.push_str(&"-".repeat(width + 42));
        out.push('\n');
        let mut in_micro = false;
        for r in rows {
            if r.category.starts_with("Micro/") && !in_micro {
                in_micro = true;
                out.push_str(&"-".repeat(width + 42));
                out.push('\n');
            }
            out.push_str(&format!(
                "{:<width$} {:>6} {:>6} {:>6} {:>6.1} {:>6.1} {:>6.1}\n",
                r.category,
                r.tp,
                r.fp,
                r.fn_,
                100.0 * r.precision,
                100.0 * r.recall,
                100.0 * r.f1
            ));
        }
        out
    }
}
