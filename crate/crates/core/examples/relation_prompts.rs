//! The two relation formats: a marked window listing every relation, and one
//! multiple-choice question per candidate pair.

use cacer::codec::{
    build_qa_prompt, decode_marker_output, encode_marker_input, encode_marker_output, option_letter, parse_qa_answer,
    render_marker_prompt,
};
use cacer::model::{AssertionValue, Argument, Document, Event, EventType, NoteText, Relation, RelationType};
use cacer::segment::segment_sentences;
use cacer::window::{enumerate_candidate_pairs, ContextWindow, SubwordEstimate, WindowLimits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "Started lupron for prostate cancer. Now reports hot flashes.";
    let note = NoteText::new(text);
    let mut doc = Document::new("rel", note.clone(), segment_sentences(text));
    let problem = |id: &str, s, e| -> Result<Event, cacer::model::ModelError> {
        Ok(Event::new(id, EventType::Problem, note.span(s, e)?).with_argument(Argument::assertion(AssertionValue::Present)))
    };
    doc.events = vec![
        Event::new("E1", EventType::Drug, note.span(8, 14)?),
        problem("E2", 19, 34)?,
        problem("E3", 48, 59)?,
    ];
    doc.relations = vec![
        Relation::new(RelationType::AdminFor, "E1".into(), "E2".into()),
        Relation::new(RelationType::Causes, "E1".into(), "E3".into()),
    ];
    let tok = SubwordEstimate::default();

    let window = ContextWindow::over(&doc, 0, 1, &tok);
    let marked = encode_marker_input(&window);
    println!("{}\n", render_marker_prompt(&marked.text));
    let target = encode_marker_output(&window, &doc.relations);
    println!("target:\n{target}\n");
    let (relations, issues) = decode_marker_output(&target, &window);
    println!("decoded {} relation(s), {} issue(s)\n", relations.len(), issues.len());

    for c in enumerate_candidate_pairs(&doc, &tok, WindowLimits::default()).pairs {
        let q = build_qa_prompt(c.head, c.tail, &c.window)?;
        let gold = option_letter(q.pair_kind, &c.head.id, &c.tail.id, &doc.relations);
        let answer = format!("({gold})");
        let parsed = parse_qa_answer(&answer, q.pair_kind, c.head, c.tail)?;
        println!(
            "{} -> {}: gold answer {answer} parses to {:?}",
            c.head.id,
            c.tail.id,
            parsed.map(|r| r.rel_type)
        );
    }
    let first = enumerate_candidate_pairs(&doc, &tok, WindowLimits::default()).pairs.remove(0);
    println!("\n{}", build_qa_prompt(first.head, first.tail, &first.window)?.text);
    Ok(())
}
