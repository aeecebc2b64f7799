use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::corpus::{for_each_note, jsonl_writer, write_record};
use super::{io_err, CliError, Format, Run};
use crate::codec::{
    build_qa_prompt, decode_events, decode_marker_output, encode_events, encode_marker_input, encode_marker_output,
    option_letter, parse_qa_answer, render_event_prompt, render_marker_prompt, DecodeIssue,
};
use crate::model::{Document, EventId, PairKind, Relation, Source};
use crate::standoff::write_note;
use crate::window::{build_window, enumerate_candidate_pairs, validity_filter, ContextWindow, SubwordEstimate, WindowLimits};

/// Locates one model call inside a note. Which fields are set depends on
/// the format: `sentence` for events, `first`/`last` for marker, and
/// `head`/`tail` for QA.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct Key {
    doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentence: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    first: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    last: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    head: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<String>,
}

#[derive(Serialize)]
struct EncodedRecord {
    #[serde(flatten)]
    key: Key,
    prompt: String,
    target: String,
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

/// Distinct sentence ranges of all candidate windows, in order.
fn windows_of<'a>(doc: &'a Document, tok: &SubwordEstimate, limits: WindowLimits) -> Vec<ContextWindow<'a>> {
    let c = enumerate_candidate_pairs(doc, tok, limits);
    let mut seen = BTreeSet::new();
    let mut out: Vec<ContextWindow<'a>> = c
        .pairs
        .into_iter()
        .filter(|p| seen.insert((p.window.first, p.window.last)))
        .map(|p| p.window)
        .collect();
    out.sort_by_key(|w| (w.first, w.last));
    out
}

pub(super) fn encode(
    corpus: &Path,
    format: Format,
    limits: WindowLimits,
    dir: &Path,
    run: &mut Run,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let tok = SubwordEstimate::default();
    let path = dir.join(match format {
        Format::Events => "events.jsonl",
        Format::Marker => "marker.jsonl",
        Format::Qa => "qa.jsonl",
    });
    let mut w = jsonl_writer(&path)?;
    let (mut records, mut warnings) = (0usize, 0usize);
    for_each_note(corpus, |doc| {
        let base = Key {
            doc_id: doc.doc_id.clone(),
            ..Key::default()
        };
        match format {
            Format::Events => {
                for (i, s) in doc.sentences.iter().enumerate() {
                    let events = doc.events.iter().filter(|e| s.contains(&e.trigger));
                    let target = encode_events(s, events).map_err(|e| CliError::Input(format!("{}: {e}", doc.doc_id)))?;
                    let key = Key {
                        sentence: Some(i),
                        ..base.clone()
                    };
                    write_record(
                        &mut w,
                        &path,
                        &EncodedRecord {
                            key,
                            prompt: render_event_prompt(&s.text),
                            target,
                        },
                    )?;
                    records += 1;
                }
            }
            Format::Marker => {
                for win in windows_of(&doc, &tok, limits) {
                    let input = encode_marker_input(&win);
                    warnings += input.issues.len();
                    let gold = doc.relations.iter().filter(|r| validity_filter(&win, r));
                    let key = Key {
                        first: Some(win.first),
                        last: Some(win.last),
                        ..base.clone()
                    };
                    write_record(
                        &mut w,
                        &path,
                        &EncodedRecord {
                            key,
                            prompt: render_marker_prompt(&input.text),
                            target: encode_marker_output(&win, gold),
                        },
                    )?;
                    records += 1;
                }
            }
            Format::Qa => {
                for p in enumerate_candidate_pairs(&doc, &tok, limits).pairs {
                    let q = build_qa_prompt(p.head, p.tail, &p.window)
                        .map_err(|e| CliError::Input(format!("{}: {e}", doc.doc_id)))?;
                    let key = Key {
                        head: Some(p.head.id.to_string()),
                        tail: Some(p.tail.id.to_string()),
                        ..base.clone()
                    };
                    let target = option_letter(q.pair_kind, &p.head.id, &p.tail.id, &doc.relations);
                    write_record(
                        &mut w,
                        &path,
                        &EncodedRecord {
                            key,
                            prompt: q.text,
                            target: target.to_string(),
                        },
                    )?;
                    records += 1;
                }
            }
        }
        Ok(())
    })?;
    w.flush().map_err(io_err(&path))?;
    run.output(&path);
    writeln!(out, "{records} record(s) written to {}", path.display()).map_err(stdout_err)?;
    if warnings > 0 {
        writeln!(out, "{warnings} overlapping trigger(s) left unmarked").map_err(stdout_err)?;
    }
    Ok(())
}

struct Output {
    line: usize,
    key: Key,
    text: String,
}

fn read_outputs(path: &Path, field: &str) -> Result<BTreeMap<String, Vec<Output>>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut by_doc: BTreeMap<String, Vec<Output>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::Input(format!("{}:{}: {msg}", path.display(), i + 1));
        let value: Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let text = value
            .get(field)
            .and_then(Value::as_str)
            .ok_or_else(|| bad(format!("missing string field {field:?}")))?
            .to_string();
        let key: Key = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        by_doc.entry(key.doc_id.clone()).or_default().push(Output {
            line: i + 1,
            key,
            text,
        });
    }
    Ok(by_doc)
}

#[derive(Serialize)]
struct IssueRecord<'a> {
    doc_id: &'a str,
    line: usize,
    #[serde(flatten)]
    issue: &'a DecodeIssue,
}

#[derive(Serialize)]
struct FailureRecord<'a> {
    doc_id: &'a str,
    line: usize,
    error: String,
}

#[allow(clippy::too_many_arguments)]
pub(super) fn decode(
    corpus: &Path,
    outputs: &Path,
    format: Format,
    field: &str,
    limits: WindowLimits,
    dir: &Path,
    run: &mut Run,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let tok = SubwordEstimate::default();
    let mut by_doc = read_outputs(outputs, field)?;
    let issues_path = dir.join("issues.jsonl");
    let mut issues = jsonl_writer(&issues_path)?;
    let (mut notes, mut events, mut relations, mut problems) = (0usize, 0usize, 0usize, 0usize);

    for_each_note(corpus, |doc| {
        notes += 1;
        let records = by_doc.remove(&doc.doc_id).unwrap_or_default();
        let mut pred = Document::new(doc.doc_id.clone(), doc.text.clone(), doc.sentences.clone());
        pred.source = Source::Predicted;
        let mut fail = |line: usize, error: String| -> Result<(), CliError> {
            problems += 1;
            write_record(
                &mut issues,
                &issues_path,
                &FailureRecord {
                    doc_id: &doc.doc_id,
                    line,
                    error,
                },
            )
        };
        let mut found: Vec<(usize, Vec<DecodeIssue>)> = Vec::new();
        match format {
            Format::Events => {
                let mut decoded = Vec::new();
                for r in &records {
                    let Some(s) = r.key.sentence.and_then(|i| doc.sentences.get(i)) else {
                        fail(r.line, "missing or out-of-range `sentence`".into())?;
                        continue;
                    };
                    let (evs, iss) = decode_events(s, &r.text);
                    decoded.extend(evs);
                    found.push((r.line, iss));
                }
                decoded.sort_by_key(|e| (e.trigger.start, e.trigger.end));
                for (i, mut e) in decoded.into_iter().enumerate() {
                    e.id = EventId::new(format!("E{}", i + 1));
                    pred.events.push(e);
                }
            }
            Format::Marker | Format::Qa => {
                pred.events = doc.events.clone();
                let mut seen = HashSet::new();
                let mut keep = |rel: Relation, rels: &mut Vec<Relation>| {
                    if seen.insert((rel.rel_type, rel.head.clone(), rel.tail.clone())) {
                        rels.push(rel);
                    }
                };
                let mut rels = Vec::new();
                for r in &records {
                    if format == Format::Marker {
                        let range = r.key.first.zip(r.key.last).filter(|(f, l)| f <= l && *l < doc.sentences.len());
                        let Some((first, last)) = range else {
                            fail(r.line, "missing or out-of-range `first`/`last`".into())?;
                            continue;
                        };
                        let win = ContextWindow::over(&doc, first, last, &tok);
                        let (found_rels, iss) = decode_marker_output(&r.text, &win);
                        for rel in found_rels.into_iter().filter(|rel| validity_filter(&win, rel)) {
                            keep(rel, &mut rels);
                        }
                        found.push((r.line, iss));
                    } else {
                        let ends = r.key.head.as_ref().zip(r.key.tail.as_ref()).and_then(|(h, t)| {
                            doc.event(&EventId::new(h.as_str())).zip(doc.event(&EventId::new(t.as_str())))
                        });
                        let Some((head, tail)) = ends else {
                            fail(r.line, "missing or unknown `head`/`tail`".into())?;
                            continue;
                        };
                        if PairKind::of(head.event_type, tail.event_type).is_none() {
                            fail(r.line, format!("{} -> {} is not a valid pair", head.id, tail.id))?;
                            continue;
                        }
                        if let Err(e) = build_window(&doc, head, tail, &tok, limits) {
                            fail(r.line, e.to_string())?;
                            continue;
                        }
                        let kind = PairKind::of(head.event_type, tail.event_type).expect("checked above");
                        match parse_qa_answer(&r.text, kind, head, tail) {
                            Ok(Some(rel)) => keep(rel, &mut rels),
                            Ok(None) => {}
                            Err(e) => fail(r.line, e.to_string())?,
                        }
                    }
                }
                pred.relations = rels;
            }
        }
        for (line, iss) in &found {
            for issue in iss {
                problems += 1;
                write_record(
                    &mut issues,
                    &issues_path,
                    &IssueRecord {
                        doc_id: &doc.doc_id,
                        line: *line,
                        issue,
                    },
                )?;
            }
        }
        events += pred.events.len();
        relations += pred.relations.len();
        write_note(dir, &pred)?;
        run.output(&dir.join(format!("{}.ann", pred.doc_id)));
        Ok(())
    })?;
    issues.flush().map_err(io_err(&issues_path))?;
    run.output(&issues_path);
    if !by_doc.is_empty() {
        let unknown: Vec<&String> = by_doc.keys().collect();
        return Err(CliError::Input(format!("outputs name notes not in the corpus: {unknown:?}")));
    }
    writeln!(
        out,
        "{notes} note(s): {events} event(s), {relations} relation(s), {problems} issue(s)"
    )
    .map_err(stdout_err)
}
