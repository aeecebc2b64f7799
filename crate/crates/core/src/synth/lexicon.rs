use std::fs;
use std::path::Path;

use super::GenError;

/// Phrase lists the generator draws from, one phrase per line in the
/// resource files. Blank lines and `#` comments are skipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lexicon {
    pub problems: Vec<String>,
    pub drugs: Vec<String>,
    pub anatomy: Vec<String>,
    pub characteristics: Vec<String>,
    pub durations: Vec<String>,
    pub frequencies: Vec<String>,
    /// Whole sentences without events.
    pub fillers: Vec<String>,
}

const FILES: [&str; 7] = [
    "problems",
    "drugs",
    "anatomy",
    "characteristics",
    "durations",
    "frequencies",
    "fillers",
];

const BUILTIN: [&str; 7] = [
    include_str!("../../resources/lexicons/problems.txt"),
    include_str!("../../resources/lexicons/drugs.txt"),
    include_str!("../../resources/lexicons/anatomy.txt"),
    include_str!("../../resources/lexicons/characteristics.txt"),
    include_str!("../../resources/lexicons/durations.txt"),
    include_str!("../../resources/lexicons/frequencies.txt"),
    include_str!("../../resources/lexicons/fillers.txt"),
];

fn parse(s: &str) -> Vec<String> {
    s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

impl Lexicon {
    fn from_lists(mut lists: Vec<Vec<String>>) -> Result<Self, GenError> {
        for (name, list) in FILES.iter().zip(&lists) {
            if list.is_empty() {
                return Err(GenError::InvalidConfig(format!("lexicon `{name}` is empty")));
            }
        }
        let mut take = || lists.remove(0);
        Ok(Lexicon {
            problems: take(),
            drugs: take(),
            anatomy: take(),
            characteristics: take(),
            durations: take(),
            frequencies: take(),
            fillers: take(),
        })
    }

    pub fn builtin() -> Self {
        Self::from_lists(BUILTIN.iter().map(|s| parse(s)).collect()).expect("builtin lexicons are non-empty")
    }

    /// Reads `<name>.txt` files from `dir`; any missing file falls back to
    /// the builtin list.
    pub fn load_dir(dir: &Path) -> Result<Self, GenError> {
        let mut lists = Vec::new();
        for (name, builtin) in FILES.iter().zip(BUILTIN) {
            let path = dir.join(format!("{name}.txt"));
            let list = match fs::read_to_string(&path) {
                Ok(s) => parse(&s),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => parse(builtin),
                Err(source) => return Err(GenError::Io { path, source }),
            };
            lists.push(list);
        }
        Self::from_lists(lists)
    }

    /// Every span-bearing phrase.
    #[cfg(test)]
    pub(crate) fn span_phrases(&self) -> impl Iterator<Item = &String> {
        self.problems
            .iter()
            .chain(&self.drugs)
            .chain(&self.anatomy)
            .chain(&self.characteristics)
            .chain(&self.durations)
            .chain(&self.frequencies)
    }
}
