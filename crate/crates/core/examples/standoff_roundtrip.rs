//! Parse a standoff note, inspect it, and write it back.

use cacer::segment::RuleSplitter;
use cacer::standoff::{parse_standoff, write_standoff, StandoffFilePair};

const TEXT: &str = "Started lupron for prostate cancer.\nComplains of severe back pain for 3 days, improving.";
const ANN: &str = "\
T1\tDrug 8 14\tlupron
E1\tDrug:T1
T2\tProblem 19 34\tprostate cancer
E2\tProblem:T2
A1\tAssertion E2 present
T3\tProblem 61 65\tpain
T4\tAnatomy 56 60\tback
T5\tDuration 66 76\tfor 3 days
E3\tProblem:T3 Anatomy:T4 Duration:T5
A2\tAssertion E3 present
A3\tSeverity E3 severe
A4\tChange E3 improving
R1\tAdminFor Arg1:E1 Arg2:E2
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pair = StandoffFilePair {
        text: TEXT.into(),
        ann: ANN.into(),
    };
    let doc = parse_standoff("example", &pair, &RuleSplitter)?;
    for (i, s) in doc.sentences.iter().enumerate() {
        println!("sentence {i} [{}, {}): {:?}", s.start, s.end, s.text);
    }
    for e in &doc.events {
        println!("{} {} {:?}", e.id, e.event_type, e.trigger.text);
        for a in e.sorted_arguments() {
            match (&a.label, &a.span) {
                (Some(l), _) => println!("    {} = {}", a.arg_type, l.as_str()),
                (None, Some(s)) => println!("    {} = {:?}", a.arg_type, s.text),
                _ => {}
            }
        }
    }
    for r in &doc.relations {
        println!("{} {} -> {}", r.rel_type, r.head, r.tail);
    }

    let written = write_standoff(&doc)?;
    let again = parse_standoff("example", &written, &RuleSplitter)?;
    assert_eq!(again.canonical(), doc.canonical());
    println!("\nre-written .ann:\n{}", written.ann);
    Ok(())
}
