//! Tab-separated lexicon files: one row per verb, a label column per aspect
//! in canonical order and optionally a `score_<aspect>` column per aspect.
//!
//! Lines starting with `#` are comments. Columns the reader does not know
//! (for example per-class probabilities) are ignored.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{parse_polarity, AspectId, ConnotationFrame, Polarity};

enum Column {
    Verb,
    Label(AspectId),
    Score(AspectId),
    Ignored,
}

fn classify(name: &str) -> Column {
    if name == "verb" {
        return Column::Verb;
    }
    if let Some(a) = AspectId::from_name(name) {
        return Column::Label(a);
    }
    if let Some(a) = name.strip_prefix("score_").and_then(AspectId::from_name) {
        return Column::Score(a);
    }
    Column::Ignored
}

/// Reads a lexicon. Rows may omit aspects only if the header omits them.
pub fn read_lexicon<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<ConnotationFrame>> {
    let mut columns: Option<Vec<Column>> = None;
    let mut frames = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let Some(cols) = &columns else {
            let cols: Vec<Column> = fields.iter().map(|f| classify(f.trim())).collect();
            if !matches!(cols.first(), Some(Column::Verb)) {
                return Err(Error::parse(
                    origin,
                    lineno,
                    "lexicon header must start with a `verb` column",
                ));
            }
            columns = Some(cols);
            continue;
        };
        if fields.len() != cols.len() {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        let mut verb = String::new();
        let mut labels = BTreeMap::new();
        let mut scores = BTreeMap::new();
        for (col, field) in cols.iter().zip(&fields) {
            let field = field.trim();
            match col {
                Column::Verb => verb = field.to_string(),
                Column::Label(a) => {
                    let p = parse_polarity(field)
                        .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
                    labels.insert(*a, p);
                }
                Column::Score(a) => {
                    let s: f64 = field.parse().map_err(|_| {
                        Error::parse(origin, lineno, format!("bad score `{field}` for {a}"))
                    })?;
                    scores.insert(*a, s);
                }
                Column::Ignored => {}
            }
        }
        if verb.is_empty() {
            return Err(Error::parse(origin, lineno, "empty verb"));
        }
        frames.push(ConnotationFrame {
            verb,
            labels,
            scores: if scores.is_empty() { None } else { Some(scores) },
        });
    }
    if columns.is_none() {
        return Err(Error::Format(format!(
            "{}: lexicon has no header row",
            origin.display()
        )));
    }
    Ok(frames)
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Vec<ConnotationFrame>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_lexicon(BufReader::new(file), path)
}

/// Per-class probabilities for every aspect, written as extra columns.
pub type AspectProbs = [[f64; 3]; 9];

/// Writes `frames` with the given comment lines first. Score columns are
/// written when any frame carries scores; probability columns when `probs`
/// is given (one entry per frame).
pub fn write_lexicon<W: Write>(
    mut w: W,
    comments: &[String],
    frames: &[ConnotationFrame],
    probs: Option<&[AspectProbs]>,
) -> Result<()> {
    let io = |e| Error::io("<lexicon output>", e);
    if let Some(p) = probs {
        if p.len() != frames.len() {
            return Err(Error::Shape {
                expected: frames.len(),
                actual: p.len(),
            });
        }
    }
    for c in comments {
        writeln!(w, "# {c}").map_err(io)?;
    }
    let with_scores = frames.iter().any(|f| f.scores.is_some());
    let mut header = vec!["verb".to_string()];
    header.extend(AspectId::ALL.iter().map(|a| a.name().to_string()));
    if with_scores {
        header.extend(AspectId::ALL.iter().map(|a| format!("score_{a}")));
    }
    if probs.is_some() {
        for a in AspectId::ALL {
            for p in Polarity::ALL {
                header.push(format!("prob_{a}_{}", class_suffix(p)));
            }
        }
    }
    writeln!(w, "{}", header.join("\t")).map_err(io)?;

    for (i, f) in frames.iter().enumerate() {
        let mut row = vec![f.verb.clone()];
        for a in AspectId::ALL {
            let label = f.label(a).ok_or_else(|| {
                Error::Input(format!("frame for `{}` has no label for {a}", f.verb))
            })?;
            row.push(label.symbol().to_string());
        }
        if with_scores {
            for a in AspectId::ALL {
                row.push(f.score(a).map(|s| s.to_string()).unwrap_or_else(|| {
                    f.label(a).map(|l| l.sign().to_string()).unwrap_or_default()
                }));
            }
        }
        if let Some(p) = probs {
            for dist in &p[i] {
                row.extend(dist.iter().map(|x| x.to_string()));
            }
        }
        writeln!(w, "{}", row.join("\t")).map_err(io)?;
    }
    Ok(())
}

fn class_suffix(p: Polarity) -> &'static str {
    match p {
        Polarity::Negative => "neg",
        Polarity::Neutral => "neu",
        Polarity::Positive => "pos",
    }
}

/// Reads a verb list: one verb per line in the first tab-separated field.
/// Comment lines and a leading `verb` header are skipped, so lexicon files
/// work as verb lists too.
pub fn read_verb_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut verbs = Vec::new();
    let mut seen_content = false;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let first = line.split('\t').next().unwrap_or("").trim();
        if !seen_content && first == "verb" {
            seen_content = true;
            continue;
        }
        seen_content = true;
        if !first.is_empty() {
            verbs.push(first.to_string());
        }
    }
    Ok(verbs)
}
