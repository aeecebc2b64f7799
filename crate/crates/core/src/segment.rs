//! Sentence segmentation.

use crate::model::{NoteText, Span};

/// Splits a note into sorted, disjoint sentence spans.
pub trait SentenceSplitter {
    fn split(&self, text: &NoteText) -> Vec<Span>;
}

impl<F> SentenceSplitter for F
where
    F: Fn(&NoteText) -> Vec<Span>,
{
    fn split(&self, text: &NoteText) -> Vec<Span> {
        self(text)
    }
}

/// Deterministic rule-based splitter.
///
/// Breaks after `.`, `!` or `?` when followed by whitespace or the end of
/// the text, at blank lines, and around section-header lines (a line whose
/// trimmed content ends in `:`), which become segments of their own.
/// Segments are trimmed, so every non-whitespace character is covered and
/// no segment starts or ends with whitespace.
#[derive(Clone, Copy, Debug, Default)]
pub struct RuleSplitter;

impl SentenceSplitter for RuleSplitter {
    fn split(&self, text: &NoteText) -> Vec<Span> {
        let chars: Vec<char> = text.as_str().chars().collect();
        let mut bounds: Vec<(usize, usize)> = Vec::new();
        let mut open: Option<(usize, usize)> = None; // (start, last non-ws)

        let flush = |open: &mut Option<(usize, usize)>, bounds: &mut Vec<(usize, usize)>| {
            if let Some((s, last)) = open.take() {
                bounds.push((s, last + 1));
            }
        };

        let mut line_start = 0;
        while line_start <= chars.len() {
            let line_end = chars[line_start..]
                .iter()
                .position(|&c| c == '\n')
                .map_or(chars.len(), |p| line_start + p);
            let line = &chars[line_start..line_end];
            let first = line.iter().position(|c| !c.is_whitespace());
            let last = line.iter().rposition(|c| !c.is_whitespace());

            match (first, last) {
                (Some(f), Some(l)) if line[l] == ':' => {
                    flush(&mut open, &mut bounds);
                    bounds.push((line_start + f, line_start + l + 1));
                }
                (Some(f), Some(l)) => {
                    for i in (line_start + f)..=(line_start + l) {
                        let c = chars[i];
                        if c.is_whitespace() {
                            continue;
                        }
                        match &mut open {
                            Some((_, last)) => *last = i,
                            None => open = Some((i, i)),
                        }
                        let next_is_space = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
                        if matches!(c, '.' | '!' | '?') && next_is_space {
                            flush(&mut open, &mut bounds);
                        }
                    }
                }
                _ => flush(&mut open, &mut bounds),
            }
            line_start = line_end + 1;
        }
        flush(&mut open, &mut bounds);

        bounds
            .into_iter()
            .map(|(s, e)| text.span(s, e).expect("segment within text"))
            .collect()
    }
}

/// Segments `text` with the default [`RuleSplitter`].
pub fn segment_sentences(text: &str) -> Vec<Span> {
    RuleSplitter.split(&NoteText::new(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(text: &str) -> Vec<String> {
        segment_sentences(text).into_iter().map(|s| s.text).collect()
    }

    #[test]
    fn empty() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("  \n\n ").is_empty());
    }

    #[test]
    fn terminal_punctuation() {
        assert_eq!(texts("A. B."), vec!["A.", "B."]);
        assert_eq!(texts("Is it? Yes! ok"), vec!["Is it?", "Yes!", "ok"]);
        // no split without following whitespace
        assert_eq!(texts("PSA 0.1 today."), vec!["PSA 0.1 today."]);
    }

    #[test]
    fn section_header() {
        let s = segment_sentences("ASSESSMENT AND PLAN:\nLupron is given.");
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].start, s[0].end), (0, 20));
        assert_eq!(s[0].text, "ASSESSMENT AND PLAN:");
        assert_eq!((s[1].start, s[1].end), (21, 37));
        assert_eq!(s[1].text, "Lupron is given.");
    }

    #[test]
    fn header_closes_running_sentence() {
        assert_eq!(
            texts("no period here\nPLAN:\n  Continue meds"),
            vec!["no period here", "PLAN:", "Continue meds"]
        );
    }

    #[test]
    fn blank_lines_split_but_single_newlines_do_not() {
        assert_eq!(
            texts("History of cancer\nwith mets\n\nStable"),
            vec!["History of cancer\nwith mets", "Stable"]
        );
    }

    #[test]
    fn unicode_offsets_are_chars() {
        let s = segment_sentences("Naïve. Ok.");
        assert_eq!((s[1].start, s[1].end), (7, 10));
    }

    proptest! {
        #[test]
        fn covers_non_whitespace_and_is_sorted(text in "[a-z .?!:\n\t]{0,80}") {
            let note = NoteText::new(text.as_str());
            let spans = RuleSplitter.split(&note);
            let mut covered = vec![false; note.char_len()];
            let mut prev_end = 0;
            for s in &spans {
                prop_assert!(s.start < s.end);
                prop_assert!(s.start >= prev_end);
                prev_end = s.end;
                prop_assert_eq!(Some(s.text.as_str()), note.slice(s.start, s.end));
                prop_assert!(!s.text.starts_with(char::is_whitespace));
                prop_assert!(!s.text.ends_with(char::is_whitespace));
                for c in covered.iter_mut().take(s.end).skip(s.start) {
                    *c = true;
                }
            }
            for (i, ch) in text.chars().enumerate() {
                if !ch.is_whitespace() {
                    prop_assert!(covered[i], "char {} uncovered", i);
                }
            }
        }
    }
}
