use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{io_err, CliError, Run};
use crate::model::{Document, EventType, RelationType};
use crate::segment::RuleSplitter;
use crate::standoff::{list_corpus, read_note, write_note};
use crate::synth::{corpus_digest, generate_corpus, GenConfig};
use crate::validate::{blocks, validate_document, Level, Violation};
use crate::window::{enumerate_candidate_pairs, CoverageStats, SubwordEstimate, WindowLimits};

/// Reads notes one at a time in doc-id order.
pub(super) fn for_each_note(
    dir: &Path,
    mut f: impl FnMut(Document) -> Result<(), CliError>,
) -> Result<(), CliError> {
    for paths in list_corpus(dir)? {
        f(read_note(&paths, &RuleSplitter)?)?;
    }
    Ok(())
}

pub(super) fn jsonl_writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

pub(super) fn write_record(w: &mut impl Write, path: &Path, record: &impl Serialize) -> Result<(), CliError> {
    let line = serde_json::to_string(record).expect("records serialize");
    writeln!(w, "{line}").map_err(io_err(path))
}

#[derive(Serialize)]
struct ViolationRecord<'a> {
    doc_id: &'a str,
    #[serde(flatten)]
    violation: &'a Violation,
}

pub(super) fn validate(
    corpus: &Path,
    strict: bool,
    dir: Option<&Path>,
    run: &mut Run,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let path = dir.map(|d| d.join("violations.jsonl"));
    let mut sink = path.as_deref().map(jsonl_writer).transpose()?;
    let (mut notes, mut failing, mut errors, mut warnings) = (0usize, 0usize, 0usize, 0usize);
    let stdout = |e| CliError::Io {
        path: "<stdout>".into(),
        source: e,
    };
    for_each_note(corpus, |doc| {
        notes += 1;
        let v = validate_document(&doc);
        let e = v.iter().filter(|x| x.level == Level::Error).count();
        errors += e;
        warnings += v.len() - e;
        if blocks(&v, strict) {
            failing += 1;
        }
        if !v.is_empty() {
            writeln!(out, "{}: {} error(s), {} warning(s)", doc.doc_id, e, v.len() - e).map_err(stdout)?;
            for x in &v {
                writeln!(out, "  {x}").map_err(stdout)?;
            }
        }
        if let (Some(w), Some(p)) = (sink.as_mut(), path.as_deref()) {
            for x in &v {
                write_record(
                    w,
                    p,
                    &ViolationRecord {
                        doc_id: &doc.doc_id,
                        violation: x,
                    },
                )?;
            }
        }
        Ok(())
    })?;
    if let (Some(mut w), Some(p)) = (sink, path.as_deref()) {
        w.flush().map_err(io_err(p))?;
        run.output(p);
    }
    writeln!(
        out,
        "{notes} note(s): {errors} error(s), {warnings} warning(s), {failing} failing{}",
        if strict { " (strict)" } else { "" }
    )
    .map_err(stdout)?;
    Ok(if failing > 0 { 1 } else { 0 })
}

#[derive(Serialize)]
struct CandidateRecord<'a> {
    doc_id: &'a str,
    head: &'a str,
    tail: &'a str,
    head_type: EventType,
    tail_type: EventType,
    first: usize,
    last: usize,
    tokens: usize,
    /// Gold relation type linking head to tail, if any.
    gold: Option<RelationType>,
}

#[derive(Serialize)]
struct CoverageRecord {
    limits: WindowLimits,
    notes: usize,
    candidates: usize,
    excluded_pairs: usize,
    coverage: f64,
    intra_fraction: f64,
    stats: CoverageStats,
}

pub(super) fn windows(
    corpus: &Path,
    limits: WindowLimits,
    dir: &Path,
    run: &mut Run,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let tok = SubwordEstimate::default();
    let cand_path = dir.join("candidates.jsonl");
    let mut w = jsonl_writer(&cand_path)?;
    let mut stats = CoverageStats::default();
    let (mut notes, mut candidates, mut excluded) = (0, 0, 0);
    for_each_note(corpus, |doc| {
        notes += 1;
        let gold: HashMap<(&str, &str), RelationType> = doc
            .relations
            .iter()
            .map(|r| ((r.head.as_str(), r.tail.as_str()), r.rel_type))
            .collect();
        let c = enumerate_candidate_pairs(&doc, &tok, limits);
        excluded += c.excluded;
        for p in &c.pairs {
            candidates += 1;
            let rec = CandidateRecord {
                doc_id: &doc.doc_id,
                head: p.head.id.as_str(),
                tail: p.tail.id.as_str(),
                head_type: p.head.event_type,
                tail_type: p.tail.event_type,
                first: p.window.first,
                last: p.window.last,
                tokens: p.window.token_count,
                gold: gold.get(&(p.head.id.as_str(), p.tail.id.as_str())).copied(),
            };
            write_record(&mut w, &cand_path, &rec)?;
        }
        stats.merge(&CoverageStats::of_document(&doc, &tok, limits));
        Ok(())
    })?;
    w.flush().map_err(io_err(&cand_path))?;
    run.output(&cand_path);

    let rec = CoverageRecord {
        limits,
        notes,
        candidates,
        excluded_pairs: excluded,
        coverage: stats.coverage(),
        intra_fraction: stats.intra_fraction(),
        stats,
    };
    let cov_path = dir.join("coverage.json");
    run.write(&cov_path, serde_json::to_string_pretty(&rec).expect("coverage serializes") + "\n")?;
    writeln!(
        out,
        "{notes} note(s), {candidates} candidate pair(s); {} gold relation(s), coverage {:.4}, intra-sentence {:.4}",
        rec.stats.overall.total, rec.coverage, rec.intra_fraction
    )
    .map_err(io_err(Path::new("<stdout>")))
}

pub(super) fn generate(cfg: &GenConfig, dir: &Path, run: &mut Run, out: &mut dyn Write) -> Result<(), CliError> {
    let docs = generate_corpus(cfg)?;
    for d in &docs {
        write_note(dir, d)?;
        run.output(&dir.join(format!("{}.txt", d.doc_id)));
        run.output(&dir.join(format!("{}.ann", d.doc_id)));
    }
    let relations: usize = docs.iter().map(|d| d.relations.len()).sum();
    writeln!(
        out,
        "{} note(s), {relations} relation(s), sha256 {}",
        docs.len(),
        corpus_digest(&docs)
    )
    .map_err(io_err(Path::new("<stdout>")))
}
