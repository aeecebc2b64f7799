use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{io_err, CliError, Run};
use crate::score::{bootstrap_test, match_documents, Micro, ScoreError, ScoreOptions, ScoreReport};
use crate::segment::RuleSplitter;
use crate::standoff::{list_corpus, read_note};
use crate::validate::{blocks, validate_document};
use crate::model::Document;

fn check(doc: &Document, which: &str) -> Result<(), CliError> {
    let v = validate_document(doc);
    if blocks(&v, false) {
        return Err(CliError::Failed(format!(
            "{which} note `{}` has {} schema error(s) and --strict is set",
            doc.doc_id,
            v.iter().filter(|x| x.is_error()).count()
        )));
    }
    Ok(())
}

/// Scores `pred` against `gold` note by note and writes the report files.
/// Returns the overall micro F1.
pub(super) fn score(
    gold: &Path,
    pred: &Path,
    opts: ScoreOptions,
    dir: &Path,
    run: &mut Run,
    out: &mut dyn Write,
) -> Result<f64, CliError> {
    let g = list_corpus(gold)?;
    let p = list_corpus(pred)?;
    let gi: Vec<&str> = g.iter().map(|n| n.doc_id.as_str()).collect();
    let pi: Vec<&str> = p.iter().map(|n| n.doc_id.as_str()).collect();
    if gi != pi {
        return Err(ScoreError::UnalignedCorpora {
            missing_pred: gi.iter().filter(|d| !pi.contains(d)).map(|d| d.to_string()).collect(),
            missing_gold: pi.iter().filter(|d| !gi.contains(d)).map(|d| d.to_string()).collect(),
        }
        .into());
    }

    let mut total = ScoreReport::default();
    let mut tsv = String::from("doc_id\tevents\trelations\toverall\n");
    for (gp, pp) in g.iter().zip(&p) {
        let gd = read_note(gp, &RuleSplitter)?;
        let pd = read_note(pp, &RuleSplitter)?;
        if opts.strict {
            check(&gd, "gold")?;
            check(&pd, "predicted")?;
        }
        let m = match_documents(&gd, &pd, opts.matching)?;
        let note = ScoreReport::from_counts(m.counts);
        let _ = writeln!(
            tsv,
            "{}\t{:.6}\t{:.6}\t{:.6}",
            gd.doc_id,
            note.micro(Micro::Events).f1(),
            note.micro(Micro::Relations).f1(),
            note.micro(Micro::Overall).f1()
        );
        total.merge(&note.counts);
    }

    let table = total.to_table();
    let json = serde_json::to_string_pretty(&total.rows()).expect("rows serialize");
    run.write(&dir.join("report.json"), json + "\n")?;
    run.write(&dir.join("report.txt"), &table)?;
    run.write(&dir.join("per_note.tsv"), tsv)?;
    write!(out, "{table}").map_err(io_err(Path::new("<stdout>")))?;
    Ok(total.micro(Micro::Overall).f1())
}

/// Reads `doc_id<TAB>score` rows. With a header row, `column` picks the
/// score column by name.
pub(crate) fn read_scores(path: &Path, column: &str) -> Result<Vec<(String, f64)>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |line: usize, msg: String| CliError::Input(format!("{}:{line}: {msg}", path.display()));
    let mut rows = Vec::new();
    let mut col = 1;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if rows.is_empty() && i == 0 && fields.get(1).is_none_or(|f| f.trim().parse::<f64>().is_err()) {
            col = fields
                .iter()
                .position(|f| f.trim() == column)
                .ok_or_else(|| bad(1, format!("no column named {column:?}")))?;
            continue;
        }
        let value = fields
            .get(col)
            .ok_or_else(|| bad(i + 1, format!("expected at least {} fields", col + 1)))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| bad(i + 1, format!("{value:?} is not a number")))?;
        rows.push((fields[0].trim().to_string(), value));
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
pub(super) fn sigtest(
    a: &Path,
    b: &Path,
    column: &str,
    iterations: usize,
    seed: u64,
    dir: Option<&Path>,
    run: &mut Run,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let r = bootstrap_test(&read_scores(a, column)?, &read_scores(b, column)?, iterations, seed)?;
    if let Some(d) = dir {
        let json = serde_json::to_string_pretty(&r).expect("result serializes");
        run.write(&d.join("sigtest.json"), json + "\n")?;
    }
    writeln!(
        out,
        "n={} mean_a={:.6} mean_b={:.6} diff={:.6} resamples={} p_value={}",
        r.n, r.mean_a, r.mean_b, r.observed_diff, r.resamples, r.p_value
    )
    .map_err(io_err(Path::new("<stdout>")))
}
