//! Event extraction format: render a sentence's events as the model target,
//! then decode a noisy model output.

use cacer::codec::{decode_events, encode_events, render_event_prompt};
use cacer::model::{Argument, ArgumentType, AssertionValue, ChangeValue, Event, EventType, NoteText, SubtypeLabel};
use cacer::segment::segment_sentences;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "Pain in back and neck improved after ibuprofen.";
    let note = NoteText::new(text);
    let sentence = segment_sentences(text).remove(0);
    let events = [
        Event::new("E1", EventType::Problem, note.span(0, 4)?)
            .with_argument(Argument::assertion(AssertionValue::Present))
            .with_argument(Argument::span_only(ArgumentType::Anatomy, note.span(8, 12)?))
            .with_argument(Argument::span_only(ArgumentType::Anatomy, note.span(17, 21)?))
            .with_argument(Argument::labeled(SubtypeLabel::Change(ChangeValue::Improving))),
        Event::new("E2", EventType::Drug, note.span(37, 46)?),
    ];

    println!("{}\n", render_event_prompt(&sentence.text));
    let target = encode_events(&sentence, &events)?;
    println!("target: {target}");

    let (decoded, issues) = decode_events(&sentence, &target);
    println!("decoded {} event(s), {} issue(s)", decoded.len(), issues.len());

    let noisy = "<Problem> pain <Assertion> present <Anatomy> back <Anatomy> knee [SEP] <Drug> ibuprofen <Severity> mild";
    let (decoded, issues) = decode_events(&sentence, noisy);
    println!("\nnoisy output: {noisy}");
    for e in &decoded {
        println!("  {} {:?} at [{}, {})", e.event_type, e.trigger.text, e.trigger.start, e.trigger.end);
    }
    for i in &issues {
        println!("  issue {i}");
    }
    Ok(())
}
