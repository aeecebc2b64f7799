//! Tag tokenizer and verbatim span lookup shared by the decoders.

use std::sync::LazyLock;

use regex::Regex;

use crate::model::{NoteText, Span};

static TAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"<\s*(/?)\s*([A-Za-z_]+)\s*>|\[SEP\]").expect("valid regex"));

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Token<'a> {
    Open(&'a str),
    Close(&'a str),
    Sep,
    Text(&'a str),
}

/// Splits `s` into `<Tag>`, `</Tag>`, `[SEP]` and the text between them.
/// Whitespace-only text is dropped; other text is trimmed.
pub(crate) fn tokenize(s: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut last = 0;
    for m in TAG.captures_iter(s) {
        let whole = m.get(0).expect("match");
        let text = s[last..whole.start()].trim();
        if !text.is_empty() {
            out.push(Token::Text(text));
        }
        last = whole.end();
        if whole.as_str() == "[SEP]" {
            out.push(Token::Sep);
        } else {
            let name = m.get(2).expect("tag name").as_str();
            if m.get(1).is_some_and(|c| !c.as_str().is_empty()) {
                out.push(Token::Close(name));
            } else {
                out.push(Token::Open(name));
            }
        }
    }
    let rest = s[last..].trim();
    if !rest.is_empty() {
        out.push(Token::Text(rest));
    }
    out
}

/// A sentence (or window) in which decoded spans are located verbatim.
pub(crate) struct Haystack {
    text: NoteText,
    base: usize,
}

/// One verbatim occurrence, in absolute note offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Occurrence {
    pub start: usize,
    pub end: usize,
    /// Not glued to a letter or digit on either side.
    pub word_bounded: bool,
}

impl Haystack {
    pub fn new(span: &Span) -> Self {
        Haystack {
            text: NoteText::new(span.text.as_str()),
            base: span.start,
        }
    }

    /// Every (possibly overlapping) occurrence of `needle`, left to right.
    pub fn occurrences(&self, needle: &str) -> Vec<Occurrence> {
        let hay = self.text.as_str();
        let mut out = Vec::new();
        if needle.is_empty() {
            return out;
        }
        let mut from = 0;
        while let Some(pos) = hay[from..].find(needle) {
            let b0 = from + pos;
            let b1 = b0 + needle.len();
            let start = self.text.char_offset(b0).expect("match starts on a char boundary");
            let end = self.text.char_offset(b1).expect("match ends on a char boundary");
            let glued_before = needle.starts_with(|c: char| c.is_alphanumeric())
                && hay[..b0].chars().next_back().is_some_and(|c| c.is_alphanumeric());
            let glued_after = needle.ends_with(|c: char| c.is_alphanumeric())
                && hay[b1..].chars().next().is_some_and(|c| c.is_alphanumeric());
            out.push(Occurrence {
                start: self.base + start,
                end: self.base + end,
                word_bounded: !glued_before && !glued_after,
            });
            let step = hay[b0..].chars().next().map_or(1, char::len_utf8);
            from = b0 + step;
        }
        // prefer whole-word matches when there are any
        if out.iter().any(|o| o.word_bounded) {
            out.retain(|o| o.word_bounded);
        }
        out
    }

    pub fn span(&self, occ: Occurrence, text: &str) -> Span {
        Span::new(occ.start, occ.end, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_tags_and_separators() {
        let t = tokenize("<Problem> pain <Assertion>present<s> x [SEP] </Drug> y");
        assert_eq!(
            t,
            vec![
                Token::Open("Problem"),
                Token::Text("pain"),
                Token::Open("Assertion"),
                Token::Text("present"),
                Token::Open("s"),
                Token::Text("x"),
                Token::Sep,
                Token::Close("Drug"),
                Token::Text("y"),
            ]
        );
        assert_eq!(tokenize("PSA < 0.1"), vec![Token::Text("PSA < 0.1")]);
    }

    #[test]
    fn occurrences_prefer_whole_words() {
        let h = Haystack::new(&Span::new(10, 30, "painful pain, pain"));
        let occ = h.occurrences("pain");
        assert_eq!(occ.iter().map(|o| o.start).collect::<Vec<_>>(), vec![18, 24]);
        let occ = h.occurrences("ain");
        assert_eq!(occ.len(), 3);
        assert!(h.occurrences("xyz").is_empty());
        assert!(h.occurrences("").is_empty());
    }

    #[test]
    fn occurrences_overlap_and_unicode() {
        let h = Haystack::new(&Span::new(0, 5, "ïaaa"));
        let occ = h.occurrences("aa");
        assert_eq!(occ.iter().map(|o| (o.start, o.end)).collect::<Vec<_>>(), vec![(1, 3), (2, 4)]);
    }
}
