//! Applying a lexicon to (source, subject, verb, object, count) tuple dumps.
//!
//! Tuple files are read as a stream; aggregations are commutative monoids
//! so shards can be processed independently and merged.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::types::{parse_polarity, AspectId, ConnotationFrame, Polarity};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SvoTuple {
    pub source: String,
    pub subject: String,
    pub verb: String,
    pub object: String,
    pub count: u64,
}

/// Streaming reader over `source<TAB>subject<TAB>verb<TAB>object<TAB>count`
/// lines. Malformed lines (wrong field count, empty verb, count that is not
/// a positive integer) are skipped and counted.
pub struct TupleReader<R> {
    reader: R,
    buf: String,
    malformed: u64,
    lines: u64,
    origin: PathBuf,
}

impl<R: BufRead> TupleReader<R> {
    pub fn new(reader: R, origin: impl Into<PathBuf>) -> Self {
        TupleReader {
            reader,
            buf: String::new(),
            malformed: 0,
            lines: 0,
            origin: origin.into(),
        }
    }

    pub fn malformed(&self) -> u64 {
        self.malformed
    }

    pub fn lines_read(&self) -> u64 {
        self.lines
    }

    fn parse_line(line: &str) -> Option<SvoTuple> {
        let mut it = line.split('\t');
        let source = it.next()?;
        let subject = it.next()?;
        let verb = it.next()?;
        let object = it.next()?;
        let count = it.next()?;
        if it.next().is_some() || verb.trim().is_empty() {
            return None;
        }
        let count: u64 = count.trim().parse().ok().filter(|&c| c >= 1)?;
        Some(SvoTuple {
            source: source.trim().to_string(),
            subject: subject.trim().to_string(),
            verb: verb.trim().to_string(),
            object: object.trim().to_string(),
            count,
        })
    }
}

impl<R: BufRead> Iterator for TupleReader<R> {
    type Item = Result<SvoTuple>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::io(&self.origin, e))),
            }
            self.lines += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match Self::parse_line(line) {
                Some(t) => return Some(Ok(t)),
                None => self.malformed += 1,
            }
        }
    }
}

pub fn load_tuples(path: impl AsRef<Path>) -> Result<TupleReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(TupleReader::new(BufReader::new(file), path))
}

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Case-folded, token-level containment of `pattern` in `phrase`.
pub fn phrase_contains(phrase: &str, pattern: &[String]) -> bool {
    if pattern.is_empty() {
        return true;
    }
    let p = tokens(phrase);
    p.windows(pattern.len()).any(|w| w == pattern)
}

/// P(a→t) score per verb: the numeric score when the lexicon has one, else
/// the label mapped to -1, 0 or +1.
pub fn verb_scores(lexicon: &[ConnotationFrame], aspect: AspectId) -> HashMap<String, f64> {
    lexicon
        .iter()
        .filter_map(|f| {
            f.score(aspect)
                .or_else(|| f.label(aspect).map(Polarity::sign))
                .map(|s| (f.verb.clone(), s))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Weighting {
    /// Each tuple contributes its count.
    #[default]
    Count,
    /// Each tuple contributes once.
    Unweighted,
}

/// Running sums for one agent/theme pair; merging is order-independent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairAccumulator {
    pub weighted_sum: f64,
    pub weight: f64,
    pub support: u64,
    /// Matching tuples whose verb has no lexicon score.
    pub skipped: u64,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl PairAccumulator {
    pub fn add(&mut self, score: f64, count: u64, weighting: Weighting) {
        let w = match weighting {
            Weighting::Count => count as f64,
            Weighting::Unweighted => 1.0,
        };
        self.weighted_sum += w * score;
        self.weight += w;
        self.support += count;
        self.min = Some(self.min.map_or(score, |m| m.min(score)));
        self.max = Some(self.max.map_or(score, |m| m.max(score)));
    }

    pub fn merge(&mut self, other: &PairAccumulator) {
        self.weighted_sum += other.weighted_sum;
        self.weight += other.weight;
        self.support += other.support;
        self.skipped += other.skipped;
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max = match (self.max, other.max) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }

    pub fn score(&self) -> Option<f64> {
        (self.weight > 0.0).then(|| self.weighted_sum / self.weight)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntitySentimentRow {
    pub agent_pattern: String,
    pub theme_pattern: String,
    pub score: f64,
    pub support: u64,
    pub skipped: u64,
}

/// Agent/theme patterns, pre-tokenized.
#[derive(Clone, Debug)]
pub struct PairQuery {
    pub agent: String,
    pub theme: String,
    agent_tokens: Vec<String>,
    theme_tokens: Vec<String>,
}

impl PairQuery {
    pub fn new(agent: &str, theme: &str) -> Self {
        PairQuery {
            agent: agent.to_string(),
            theme: theme.to_string(),
            agent_tokens: tokens(agent),
            theme_tokens: tokens(theme),
        }
    }

    pub fn matches(&self, t: &SvoTuple) -> bool {
        !self.agent_tokens.is_empty()
            && phrase_contains(&t.subject, &self.agent_tokens)
            && phrase_contains(&t.object, &self.theme_tokens)
    }
}

/// Accumulates every query over one pass of `tuples`.
pub fn accumulate_pairs<I>(
    queries: &[PairQuery],
    tuples: I,
    scores: &HashMap<String, f64>,
    weighting: Weighting,
) -> Result<Vec<PairAccumulator>>
where
    I: IntoIterator<Item = Result<SvoTuple>>,
{
    let mut acc = vec![PairAccumulator::default(); queries.len()];
    for t in tuples {
        let t = t?;
        let score = scores.get(&t.verb).copied();
        for (q, a) in queries.iter().zip(acc.iter_mut()) {
            if q.matches(&t) {
                match score {
                    Some(s) => a.add(s, t.count, weighting),
                    None => a.skipped += 1,
                }
            }
        }
    }
    Ok(acc)
}

pub fn finish_pair(q: &PairQuery, acc: &PairAccumulator) -> Result<EntitySentimentRow> {
    let score = acc.score().ok_or_else(|| {
        Error::Undefined(format!(
            "no scored tuples match agent `{}` and theme `{}`",
            q.agent, q.theme
        ))
    })?;
    Ok(EntitySentimentRow {
        agent_pattern: q.agent.clone(),
        theme_pattern: q.theme.clone(),
        score,
        support: acc.support,
        skipped: acc.skipped,
    })
}

/// Count-weighted mean verb score over tuples whose subject contains
/// `agent` and (when nonempty) whose object contains `theme`.
pub fn entity_pair_score<I>(
    agent: &str,
    theme: &str,
    tuples: I,
    scores: &HashMap<String, f64>,
) -> Result<EntitySentimentRow>
where
    I: IntoIterator<Item = Result<SvoTuple>>,
{
    let q = PairQuery::new(agent, theme);
    let acc = accumulate_pairs(std::slice::from_ref(&q), tuples, scores, Weighting::Count)?;
    finish_pair(&q, &acc[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Leaning {
    Left,
    Right,
    Unknown,
}

impl Leaning {
    pub fn parse(s: &str) -> Result<Leaning> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Leaning::Left),
            "right" => Ok(Leaning::Right),
            "unknown" => Ok(Leaning::Unknown),
            _ => Err(Error::Format(format!("unknown leaning `{s}`"))),
        }
    }
}

/// Source → leaning; unlisted sources are `Unknown`.
#[derive(Clone, Debug, Default)]
pub struct LeaningMap {
    map: HashMap<String, Leaning>,
}

impl LeaningMap {
    pub fn insert(&mut self, source: impl Into<String>, leaning: Leaning) {
        self.map.insert(source.into(), leaning);
    }

    pub fn get(&self, source: &str) -> Leaning {
        self.map.get(source).copied().unwrap_or(Leaning::Unknown)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut m = LeaningMap::default();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (src, lean) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected source<TAB>leaning"))?;
            m.insert(
                src.trim(),
                Leaning::parse(lean).map_err(|e| Error::parse(path, i + 1, e.to_string()))?,
            );
        }
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Agent,
    Theme,
}

impl Role {
    pub fn parse(s: &str) -> Result<Role> {
        match s.trim().to_ascii_lowercase().as_str() {
            "agent" | "subject" => Ok(Role::Agent),
            "theme" | "object" => Ok(Role::Theme),
            _ => Err(Error::Format(format!("unknown role `{s}`"))),
        }
    }

    fn phrase(self, t: &SvoTuple) -> &str {
        match self {
            Role::Agent => &t.subject,
            Role::Theme => &t.object,
        }
    }
}

/// Summed counts of the phrases filling `role` of `verb` in sources of the
/// given leaning.
pub fn role_counts<I>(
    verb: &str,
    role: Role,
    leaning: Leaning,
    leanings: &LeaningMap,
    tuples: I,
) -> Result<BTreeMap<String, u64>>
where
    I: IntoIterator<Item = Result<SvoTuple>>,
{
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for t in tuples {
        let t = t?;
        if t.verb == verb && leanings.get(&t.source) == leaning {
            let phrase = role.phrase(&t).trim().to_lowercase();
            if !phrase.is_empty() {
                *counts.entry(phrase).or_default() += t.count;
            }
        }
    }
    Ok(counts)
}

/// Top `n` of a phrase-count map by count, ties in lexicographic order.
pub fn top_n(counts: &BTreeMap<String, u64>, n: usize) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts.iter().map(|(k, c)| (k.clone(), *c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(n);
    v
}

pub fn leaning_contrast<I>(
    verb: &str,
    role: Role,
    leaning: Leaning,
    leanings: &LeaningMap,
    tuples: I,
    n: usize,
) -> Result<Vec<(String, u64)>>
where
    I: IntoIterator<Item = Result<SvoTuple>>,
{
    Ok(top_n(&role_counts(verb, role, leaning, leanings, tuples)?, n))
}

/// Word → polarity list (`word<TAB>{+,-,=}`).
pub fn load_word_polarities(path: impl AsRef<Path>) -> Result<HashMap<String, Polarity>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut m = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (w, p) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected word<TAB>polarity"))?;
        let p = parse_polarity(p).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        m.insert(w.trim().to_lowercase(), p);
    }
    Ok(m)
}

/// Count-weighted polarity make-up of the head words (last token) filling
/// a role of a verb. Unlisted words land in the neutral bucket and are also
/// counted in `unlisted`.
#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    pub positive_pct: f64,
    pub negative_pct: f64,
    pub neutral_pct: f64,
    pub total: u64,
    pub unlisted: u64,
    pub lexicon_empty: bool,
}

pub fn subjectivity_composition<I>(
    verb: &str,
    role: Role,
    tuples: I,
    words: &HashMap<String, Polarity>,
) -> Result<Composition>
where
    I: IntoIterator<Item = Result<SvoTuple>>,
{
    let mut counts = [0u64; 3];
    let mut unlisted = 0;
    for t in tuples {
        let t = t?;
        if t.verb != verb {
            continue;
        }
        let Some(head) = role.phrase(&t).split_whitespace().last() else {
            continue;
        };
        match words.get(&head.to_lowercase()) {
            Some(p) => counts[p.index()] += t.count,
            None => {
                counts[Polarity::Neutral.index()] += t.count;
                unlisted += t.count;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    let pct = |c: u64| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 };
    Ok(Composition {
        positive_pct: pct(counts[Polarity::Positive.index()]),
        negative_pct: pct(counts[Polarity::Negative.index()]),
        neutral_pct: pct(counts[Polarity::Neutral.index()]),
        total,
        unlisted,
        lexicon_empty: words.is_empty(),
    })
}
