//! Prompt templates, stored as text resources and emitted as-is.
//!
//! Placeholders are `{NOTE}` for the note or window text and `{A}` / `{B}`
//! for the two trigger texts of a QA question.

/// Bumped whenever a template's bytes change.
pub const TEMPLATE_VERSION: &str = "1";

pub const EVENT_EXTRACTION: &str = include_str!("../../resources/prompts/event_extraction.txt");
pub const EVENT_GUIDELINE: &str = include_str!("../../resources/prompts/event_guideline.txt");
pub const RELATION_MARKER: &str = include_str!("../../resources/prompts/relation_marker.txt");
pub const QA_DRUG_PROBLEM: &str = include_str!("../../resources/prompts/qa_drug_problem.txt");
pub const QA_PROBLEM_PROBLEM: &str = include_str!("../../resources/prompts/qa_problem_problem.txt");

/// Substitutes `{NAME}` placeholders in a single left-to-right pass, so
/// substituted text is never re-expanded. Unknown placeholders are kept.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let template = template.strip_suffix('\n').unwrap_or(template);
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            vars.iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_single_pass() {
        assert_eq!(render("{A} and {B}\n", &[("A", "{B}"), ("B", "x")]), "{B} and x");
        assert_eq!(render("{span} {A", &[("A", "1")]), "{span} {A");
    }

    #[test]
    fn templates_keep_original_wording() {
        assert!(QA_DRUG_PROBLEM.contains("(E) {A} improves, cures, stablize {B}."));
        assert!(QA_DRUG_PROBLEM.contains("(D) {A} is not given as a treatment for {B}, but it causes {B}."));
        assert!(QA_PROBLEM_PROBLEM.contains("(C) None of the above."));
        assert!(EVENT_EXTRACTION.starts_with("You are a medical expert. Extract all drug and medical problem events"));
        assert!(EVENT_EXTRACTION.contains("All events constraints span-only arguments"));
        assert!(RELATION_MARKER.starts_with("Extract all relations related to drug and medical problems"));
    }
}
