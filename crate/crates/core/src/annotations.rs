//! Crowd annotation records: aggregation into gold labels and agreement
//! statistics.
//!
//! Numeric convention for responses: `pos` 1, `pos_or_neu` 0.5, `neu` 0,
//! `neg_or_neu` -0.5, `neg` -1, `yes` 1, `no` 0. Means are cut at ±0.25
//! with both boundaries counted as neutral.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{AspectId, ConnotationFrame, Polarity, ResponseScale};

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotationRecord {
    pub verb: String,
    pub sentence_id: u8,
    pub worker_id: String,
    pub aspect: AspectId,
    pub response: ResponseScale,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregatedLabel {
    pub verb: String,
    pub aspect: AspectId,
    pub mean_score: f64,
    pub label: Polarity,
    pub n: usize,
}

pub fn response_to_score(r: ResponseScale) -> f64 {
    match r {
        ResponseScale::Positive | ResponseScale::Yes => 1.0,
        ResponseScale::PositiveOrNeutral => 0.5,
        ResponseScale::Neutral | ResponseScale::No => 0.0,
        ResponseScale::NegativeOrNeutral => -0.5,
        ResponseScale::Negative => -1.0,
    }
}

/// Reads `verb,sentence_id,worker_id,aspect,response` rows. A header row
/// and `#` comment lines are skipped. Duplicate (verb, sentence, worker,
/// aspect) keys are rejected.
pub fn read_annotations<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    let mut keys = BTreeSet::new();
    let mut first_row = true;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if std::mem::take(&mut first_row) && fields.first() == Some(&"verb") {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::parse(origin, lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let sentence_id: u8 = fields[1]
            .parse()
            .ok()
            .filter(|s| (1..=5).contains(s))
            .ok_or_else(|| Error::parse(origin, lineno, format!("sentence id `{}` is not in 1..=5", fields[1])))?;
        let aspect = fields[3]
            .parse::<AspectId>()
            .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        let response =
            ResponseScale::parse(fields[4]).map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        let rec = AnnotationRecord {
            verb: fields[0].to_string(),
            sentence_id,
            worker_id: fields[2].to_string(),
            aspect,
            response,
        };
        if !keys.insert((rec.verb.clone(), sentence_id, rec.worker_id.clone(), aspect)) {
            return Err(Error::parse(origin, lineno, "duplicate response for (verb, sentence, worker, aspect)"));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_annotations(BufReader::new(file), path)
}

/// Mean score and cutoff label for the records of one (verb, aspect).
pub fn aggregate(records: &[AnnotationRecord]) -> Result<AggregatedLabel> {
    let first = records
        .first()
        .ok_or_else(|| Error::Input("no records to aggregate".into()))?;
    if records.iter().any(|r| r.verb != first.verb || r.aspect != first.aspect) {
        return Err(Error::Input("records span more than one (verb, aspect)".into()));
    }
    let mean = records.iter().map(|r| response_to_score(r.response)).sum::<f64>() / records.len() as f64;
    Ok(AggregatedLabel {
        verb: first.verb.clone(),
        aspect: first.aspect,
        mean_score: mean,
        label: Polarity::from_score(mean),
        n: records.len(),
    })
}

/// Aggregates every (verb, aspect) group, ordered by verb then aspect.
pub fn aggregate_all(records: &[AnnotationRecord]) -> Vec<AggregatedLabel> {
    let mut groups: BTreeMap<(&str, AspectId), Vec<AnnotationRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.verb.as_str(), r.aspect)).or_default().push(r.clone());
    }
    groups
        .values()
        .map(|g| aggregate(g).expect("groups are nonempty and homogeneous"))
        .collect()
}

/// Frames for verbs with all nine aspects aggregated; the second list names
/// verbs left out for missing aspects.
pub fn gold_frames(aggs: &[AggregatedLabel]) -> (Vec<ConnotationFrame>, Vec<String>) {
    let mut by_verb: BTreeMap<&str, Vec<&AggregatedLabel>> = BTreeMap::new();
    for a in aggs {
        by_verb.entry(a.verb.as_str()).or_default().push(a);
    }
    let mut frames = Vec::new();
    let mut incomplete = Vec::new();
    for (verb, rows) in by_verb {
        if rows.len() != 9 || AspectId::ALL.iter().any(|a| !rows.iter().any(|r| r.aspect == *a)) {
            incomplete.push(verb.to_string());
            continue;
        }
        frames.push(ConnotationFrame {
            verb: verb.to_string(),
            labels: rows.iter().map(|r| (r.aspect, r.label)).collect(),
            scores: Some(rows.iter().map(|r| (r.aspect, r.mean_score)).collect()),
        });
    }
    (frames, incomplete)
}

type ItemKey<'a> = (&'a str, u8, AspectId);

fn items(records: &[AnnotationRecord]) -> BTreeMap<ItemKey<'_>, Vec<ResponseScale>> {
    let mut m: BTreeMap<ItemKey<'_>, Vec<ResponseScale>> = BTreeMap::new();
    for r in records {
        m.entry((r.verb.as_str(), r.sentence_id, r.aspect))
            .or_default()
            .push(r.response);
    }
    m
}

fn pairwise_percent(records: &[AnnotationRecord], agree: impl Fn(ResponseScale, ResponseScale) -> bool) -> Result<f64> {
    let mut pairs = 0usize;
    let mut hits = 0usize;
    for responses in items(records).values() {
        for i in 0..responses.len() {
            for j in i + 1..responses.len() {
                pairs += 1;
                if agree(responses[i], responses[j]) {
                    hits += 1;
                }
            }
        }
    }
    if pairs == 0 {
        return Err(Error::Undefined("no item has two or more responses".into()));
    }
    Ok(100.0 * hits as f64 / pairs as f64)
}

/// Pairwise percent agreement over three classes; an "or neutral" answer
/// agrees with its polar class and with neutral.
pub fn strict_agreement(records: &[AnnotationRecord]) -> Result<f64> {
    pairwise_percent(records, ResponseScale::agrees_with)
}

/// Which side of neutral a response leans to: +1, 0 or -1. For yes/no
/// answers `yes` is +1 and `no` -1, so differing answers conflict.
fn polar_side(r: ResponseScale) -> i8 {
    match r {
        ResponseScale::Positive | ResponseScale::PositiveOrNeutral | ResponseScale::Yes => 1,
        ResponseScale::Neutral => 0,
        ResponseScale::Negative | ResponseScale::NegativeOrNeutral | ResponseScale::No => -1,
    }
}

/// Pairwise percent agreement where only opposite polarities conflict.
pub fn nc_agreement(records: &[AnnotationRecord]) -> Result<f64> {
    pairwise_percent(records, |a, b| polar_side(a) * polar_side(b) >= 0)
}

/// Where "or neutral" answers go when collapsing to three classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CollapseRule {
    #[default]
    Polar,
    Neutral,
}

impl CollapseRule {
    pub fn name(self) -> &'static str {
        match self {
            CollapseRule::Polar => "or-neutral counted as polar",
            CollapseRule::Neutral => "or-neutral counted as neutral",
        }
    }
}

pub fn collapse(r: ResponseScale, rule: CollapseRule) -> Polarity {
    use ResponseScale::*;
    match (r, rule) {
        (Positive | Yes, _) | (PositiveOrNeutral, CollapseRule::Polar) => Polarity::Positive,
        (Negative, _) | (NegativeOrNeutral, CollapseRule::Polar) => Polarity::Negative,
        _ => Polarity::Neutral,
    }
}

/// Nominal Krippendorff's alpha over units of class indices. Units with
/// fewer than two values are not pairable and are ignored.
pub fn krippendorff_alpha_nominal(units: &[Vec<usize>], n_classes: usize) -> Result<f64> {
    let mut o = vec![vec![0.0f64; n_classes]; n_classes];
    for u in units {
        let m = u.len();
        if m < 2 {
            continue;
        }
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    o[u[i]][u[j]] += 1.0 / (m - 1) as f64;
                }
            }
        }
    }
    let nc: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = nc.iter().sum();
    if n == 0.0 {
        return Err(Error::Undefined("alpha needs at least one co-annotated item".into()));
    }
    let mut d_o = 0.0;
    let mut d_e = 0.0;
    for c in 0..n_classes {
        for k in 0..n_classes {
            if c != k {
                d_o += o[c][k];
                d_e += nc[c] * nc[k];
            }
        }
    }
    if d_o == 0.0 {
        return Ok(1.0);
    }
    d_o /= n;
    d_e /= n * (n - 1.0);
    Ok(1.0 - d_o / d_e)
}

/// Alpha per aspect over (verb, sentence) items, averaged across the
/// aspects where it is defined.
pub fn krippendorff_alpha(records: &[AnnotationRecord], rule: CollapseRule) -> Result<f64> {
    let per = krippendorff_alpha_by_aspect(records, rule);
    let defined: Vec<f64> = per.values().filter_map(|r| r.as_ref().ok().copied()).collect();
    if defined.is_empty() {
        return Err(Error::Undefined("alpha needs at least one co-annotated item".into()));
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

pub fn krippendorff_alpha_by_aspect(records: &[AnnotationRecord], rule: CollapseRule) -> BTreeMap<AspectId, Result<f64>> {
    let mut units: BTreeMap<AspectId, Vec<Vec<usize>>> = BTreeMap::new();
    for ((_, _, aspect), responses) in items(records) {
        units
            .entry(aspect)
            .or_default()
            .push(responses.iter().map(|r| collapse(*r, rule).index()).collect());
    }
    units
        .into_iter()
        .map(|(a, u)| (a, krippendorff_alpha_nominal(&u, 3)))
        .collect()
}

/// Per-aspect agreement table with the distribution of aggregated labels.
pub fn agreement_report(records: &[AnnotationRecord], rule: CollapseRule) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<6}{:>9}{:>9}{:>9}{:>8}{:>8}{:>8}{:>7}",
        "aspect", "strict%", "NC%", "alpha", "+%", "-%", "=%", "verbs"
    );
    let alphas = krippendorff_alpha_by_aspect(records, rule);
    let aggs = aggregate_all(records);
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
    let mut any = false;
    for a in AspectId::ALL {
        let sub: Vec<AnnotationRecord> = records.iter().filter(|r| r.aspect == a).cloned().collect();
        if sub.is_empty() {
            continue;
        }
        any = true;
        let strict = strict_agreement(&sub).ok();
        let nc = if a.is_value() { None } else { nc_agreement(&sub).ok() };
        let alpha = alphas.get(&a).and_then(|r| r.as_ref().ok().copied());
        let labels: Vec<Polarity> = aggs.iter().filter(|g| g.aspect == a).map(|g| g.label).collect();
        let pct = |p: Polarity| 100.0 * labels.iter().filter(|l| **l == p).count() as f64 / labels.len() as f64;
        let _ = writeln!(
            s,
            "{:<6}{:>9}{:>9}{:>9}{:>8.2}{:>8.2}{:>8.2}{:>7}",
            a.name(),
            fmt_opt(strict),
            fmt_opt(nc),
            fmt_opt(alpha),
            pct(Polarity::Positive),
            pct(Polarity::Negative),
            pct(Polarity::Neutral),
            labels.len()
        );
    }
    if !any {
        return Err(Error::Input("no annotation records".into()));
    }
    let _ = writeln!(
        s,
        "overall strict%={} NC%={} mean alpha={}",
        fmt_opt(strict_agreement(records).ok()),
        fmt_opt(nc_agreement(records).ok()),
        fmt_opt(krippendorff_alpha(records, rule).ok())
    );
    let _ = writeln!(
        s,
        "conventions: scores pos=1 pos_or_neu=0.5 neu=0 neg_or_neu=-0.5 neg=-1 yes=1 no=0; cutoffs [-1,-0.25) [-0.25,0.25] (0.25,1]; nominal alpha, {}",
        rule.name()
    );
    let _ = writeln!(s, "NC is not reported for value aspects (yes/no questions).");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ResponseScale::*;

    fn rec(verb: &str, sentence: u8, worker: &str, aspect: AspectId, r: ResponseScale) -> AnnotationRecord {
        AnnotationRecord {
            verb: verb.into(),
            sentence_id: sentence,
            worker_id: worker.into(),
            aspect,
            response: r,
        }
    }

    #[test]
    fn scores() {
        assert_eq!(response_to_score(Positive), 1.0);
        assert_eq!(response_to_score(Neutral), 0.0);
        assert_eq!(response_to_score(PositiveOrNeutral), 0.5);
        assert_eq!(response_to_score(NegativeOrNeutral), -0.5);
        assert_eq!(response_to_score(No), 0.0);
    }

    #[test]
    fn aggregate_mean_and_label() {
        // mean 0.3 = (1 + 0.5 + 0 + 0 + 0 - 0 ...) built from 10 records
        let mut rs = Vec::new();
        for (i, r) in [Positive, Positive, PositiveOrNeutral, Neutral, Neutral, Neutral, Neutral, Neutral, Neutral, NegativeOrNeutral]
            .into_iter()
            .enumerate()
        {
            rs.push(rec("v", 1 + (i % 5) as u8, &format!("w{i}"), AspectId::Et, r));
        }
        let a = aggregate(&rs).unwrap();
        assert_abs_diff_eq!(a.mean_score, 0.2, epsilon = 1e-12);
        assert_eq!(a.label, Polarity::Neutral);
        rs[3].response = PositiveOrNeutral;
        let a = aggregate(&rs).unwrap();
        assert_abs_diff_eq!(a.mean_score, 0.25, epsilon = 1e-12);
        assert_eq!(a.label, Polarity::Neutral);
        rs[4].response = Positive;
        let a = aggregate(&rs).unwrap();
        assert_eq!(a.label, Polarity::Positive);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn mixed_groups_rejected() {
        let rs = vec![rec("a", 1, "w", AspectId::Et, Positive), rec("b", 1, "w", AspectId::Et, Positive)];
        assert!(aggregate(&rs).is_err());
    }

    #[test]
    fn pair_rules() {
        let pair = |a, b| vec![rec("v", 1, "w1", AspectId::Et, a), rec("v", 1, "w2", AspectId::Et, b)];
        assert_eq!(strict_agreement(&pair(Positive, PositiveOrNeutral)).unwrap(), 100.0);
        assert_eq!(strict_agreement(&pair(Positive, Negative)).unwrap(), 0.0);
        assert_eq!(nc_agreement(&pair(Positive, Neutral)).unwrap(), 100.0);
        assert_eq!(strict_agreement(&pair(Positive, Neutral)).unwrap(), 0.0);
        assert_eq!(nc_agreement(&pair(Positive, Negative)).unwrap(), 0.0);
        assert_eq!(nc_agreement(&pair(PositiveOrNeutral, NegativeOrNeutral)).unwrap(), 0.0);
    }

    #[test]
    fn single_worker_is_undefined() {
        let rs = vec![rec("v", 1, "w1", AspectId::Et, Positive), rec("v", 2, "w1", AspectId::Et, Negative)];
        assert!(strict_agreement(&rs).is_err());
        assert!(nc_agreement(&rs).is_err());
        assert!(krippendorff_alpha(&rs, CollapseRule::Polar).is_err());
    }

    #[test]
    fn perfect_alpha() {
        let rs = vec![
            rec("v", 1, "w1", AspectId::Et, Positive),
            rec("v", 1, "w2", AspectId::Et, Positive),
            rec("v", 2, "w1", AspectId::Et, Negative),
            rec("v", 2, "w2", AspectId::Et, NegativeOrNeutral),
        ];
        assert_eq!(krippendorff_alpha(&rs, CollapseRule::Polar).unwrap(), 1.0);
    }

    #[test]
    fn csv_parsing() {
        let text = "verb,sentence_id,worker_id,aspect,response\nhelp,1,w1,E_t,pos\nhelp,1,w2,E_t,pos_or_neu\n";
        let rs = read_annotations(text.as_bytes(), Path::new("a.csv")).unwrap();
        assert_eq!(rs.len(), 2);
        assert_eq!(rs[1].response, PositiveOrNeutral);
        let dup = "help,1,w1,E_t,pos\nhelp,1,w1,E_t,neg\n";
        assert!(read_annotations(dup.as_bytes(), Path::new("a.csv")).is_err());
        let bad = "help,9,w1,E_t,pos\n";
        assert!(read_annotations(bad.as_bytes(), Path::new("a.csv")).is_err());
    }

    #[test]
    fn gold_frames_need_all_aspects() {
        let mut rs = Vec::new();
        for a in AspectId::ALL {
            rs.push(rec("full", 1, "w", a, Positive));
        }
        rs.push(rec("partial", 1, "w", AspectId::Et, Negative));
        let (frames, incomplete) = gold_frames(&aggregate_all(&rs));
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].verb, "full");
        assert!(crate::types::validate_frame(&frames[0]).is_empty());
        assert_eq!(incomplete, vec!["partial".to_string()]);
    }
}
