//! Polarities, the nine typed relations of a connotation frame, and the
//! per-verb frame record.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound (inclusive) of the neutral band for aggregated scores.
pub const NEUTRAL_BAND: f64 = 0.25;

/// Three-valued connotative polarity.
///
/// The derived ordering `Negative < Neutral < Positive` is the tie-breaking
/// order used everywhere a deterministic choice between labels is needed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Negative, Polarity::Neutral, Polarity::Positive];

    /// Position in the fixed class order (Negative, Neutral, Positive).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Polarity> {
        Polarity::ALL.get(i).copied()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Polarity::Negative => "-",
            Polarity::Neutral => "=",
            Polarity::Positive => "+",
        }
    }

    pub fn opposite(self) -> Polarity {
        match self {
            Polarity::Negative => Polarity::Positive,
            Polarity::Neutral => Polarity::Neutral,
            Polarity::Positive => Polarity::Negative,
        }
    }

    /// -1, 0 or +1.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Negative => -1.0,
            Polarity::Neutral => 0.0,
            Polarity::Positive => 1.0,
        }
    }

    /// Label for an averaged score in [-1, 1]: `[-1,-0.25)` is negative,
    /// `[-0.25,0.25]` neutral and `(0.25,1]` positive.
    pub fn from_score(score: f64) -> Polarity {
        if score > NEUTRAL_BAND {
            Polarity::Positive
        } else if score < -NEUTRAL_BAND {
            Polarity::Negative
        } else {
            Polarity::Neutral
        }
    }

    /// Index of the largest entry; ties go to the lowest polarity.
    pub fn argmax(probs: &[f64; 3]) -> Polarity {
        let mut best = 0;
        for i in 1..3 {
            if probs[i] > probs[best] {
                best = i;
            }
        }
        Polarity::ALL[best]
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_polarity(s)
    }
}

/// Accepts `-`, `=`, `+` and the aliases `neg`, `neu`, `pos` (any case).
pub fn parse_polarity(text: &str) -> Result<Polarity> {
    let t = text.trim();
    match t {
        "-" | "\u{2212}" => return Ok(Polarity::Negative),
        "=" => return Ok(Polarity::Neutral),
        "+" => return Ok(Polarity::Positive),
        _ => {}
    }
    match t.to_ascii_lowercase().as_str() {
        "neg" => Ok(Polarity::Negative),
        "neu" => Ok(Polarity::Neutral),
        "pos" => Ok(Polarity::Positive),
        _ => Err(Error::Format(format!("unrecognized polarity `{text}`"))),
    }
}

/// The nine typed relations, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AspectId {
    /// Writer's perspective toward the theme.
    PWt,
    /// Writer's perspective toward the agent.
    PWa,
    /// Agent's perspective toward the theme (assumed reciprocal).
    PAt,
    /// Effect on the theme.
    Et,
    /// Effect on the agent.
    Ea,
    /// Value presupposed of the theme.
    Vt,
    /// Value presupposed of the agent.
    Va,
    /// Mental state of the theme.
    St,
    /// Mental state of the agent.
    Sa,
}

impl AspectId {
    pub const ALL: [AspectId; 9] = [
        AspectId::PWt,
        AspectId::PWa,
        AspectId::PAt,
        AspectId::Et,
        AspectId::Ea,
        AspectId::Vt,
        AspectId::Va,
        AspectId::St,
        AspectId::Sa,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AspectId::PWt => "P_wt",
            AspectId::PWa => "P_wa",
            AspectId::PAt => "P_at",
            AspectId::Et => "E_t",
            AspectId::Ea => "E_a",
            AspectId::Vt => "V_t",
            AspectId::Va => "V_a",
            AspectId::St => "S_t",
            AspectId::Sa => "S_a",
        }
    }

    pub fn from_name(name: &str) -> Option<AspectId> {
        AspectId::ALL.iter().copied().find(|a| a.name() == name.trim())
    }

    /// True for the value relations, which were collected as yes/no questions.
    pub fn is_value(self) -> bool {
        matches!(self, AspectId::Vt | AspectId::Va)
    }
}

impl fmt::Display for AspectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AspectId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AspectId::from_name(s).ok_or_else(|| Error::Format(format!("unknown aspect `{s}`")))
    }
}

/// Connotation frame of a single verb.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnotationFrame {
    pub verb: String,
    pub labels: BTreeMap<AspectId, Polarity>,
    pub scores: Option<BTreeMap<AspectId, f64>>,
}

impl ConnotationFrame {
    pub fn new(verb: impl Into<String>, labels: [Polarity; 9]) -> Self {
        ConnotationFrame {
            verb: verb.into(),
            labels: AspectId::ALL.iter().copied().zip(labels).collect(),
            scores: None,
        }
    }

    pub fn with_scores(mut self, scores: [f64; 9]) -> Self {
        self.scores = Some(AspectId::ALL.iter().copied().zip(scores).collect());
        self
    }

    pub fn label(&self, aspect: AspectId) -> Option<Polarity> {
        self.labels.get(&aspect).copied()
    }

    pub fn score(&self, aspect: AspectId) -> Option<f64> {
        self.scores.as_ref().and_then(|s| s.get(&aspect).copied())
    }

    /// Labels in canonical aspect order; fails if any aspect is missing.
    pub fn label_array(&self) -> Result<[Polarity; 9]> {
        let mut out = [Polarity::Neutral; 9];
        for a in AspectId::ALL {
            out[a.index()] = self.label(a).ok_or_else(|| {
                Error::Input(format!("frame for `{}` has no label for {a}", self.verb))
            })?;
        }
        Ok(out)
    }
}

/// A single violated frame invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum FrameIssue {
    MissingAspect(AspectId),
    ScoreOutOfRange { aspect: AspectId, score: f64 },
    ScoreLabelMismatch {
        aspect: AspectId,
        label: Polarity,
        score: f64,
    },
    ScoreWithoutLabel(AspectId),
}

impl fmt::Display for FrameIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameIssue::MissingAspect(a) => write!(f, "missing label for {a}"),
            FrameIssue::ScoreOutOfRange { aspect, score } => {
                write!(f, "score {score} for {aspect} is outside [-1, 1]")
            }
            FrameIssue::ScoreLabelMismatch {
                aspect,
                label,
                score,
            } => write!(
                f,
                "score {score} for {aspect} falls in the {} band but label is {label}",
                Polarity::from_score(*score)
            ),
            FrameIssue::ScoreWithoutLabel(a) => write!(f, "score present for unlabeled {a}"),
        }
    }
}

/// Lists every invariant the frame violates; an empty list means valid.
pub fn validate_frame(frame: &ConnotationFrame) -> Vec<FrameIssue> {
    let mut issues = Vec::new();
    for a in AspectId::ALL {
        if !frame.labels.contains_key(&a) {
            issues.push(FrameIssue::MissingAspect(a));
        }
    }
    if let Some(scores) = &frame.scores {
        for (&aspect, &score) in scores {
            if !(-1.0..=1.0).contains(&score) {
                issues.push(FrameIssue::ScoreOutOfRange { aspect, score });
                continue;
            }
            match frame.labels.get(&aspect) {
                None => issues.push(FrameIssue::ScoreWithoutLabel(aspect)),
                Some(&label) if Polarity::from_score(score) != label => {
                    issues.push(FrameIssue::ScoreLabelMismatch {
                        aspect,
                        label,
                        score,
                    })
                }
                Some(_) => {}
            }
        }
    }
    issues
}

/// Crowd response scale: five-way sentiment answers plus yes/no for value
/// questions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResponseScale {
    Positive,
    PositiveOrNeutral,
    Neutral,
    NegativeOrNeutral,
    Negative,
    Yes,
    No,
}

impl ResponseScale {
    pub fn token(self) -> &'static str {
        match self {
            ResponseScale::Positive => "pos",
            ResponseScale::PositiveOrNeutral => "pos_or_neu",
            ResponseScale::Neutral => "neu",
            ResponseScale::NegativeOrNeutral => "neg_or_neu",
            ResponseScale::Negative => "neg",
            ResponseScale::Yes => "yes",
            ResponseScale::No => "no",
        }
    }

    pub fn parse(text: &str) -> Result<ResponseScale> {
        Ok(match text.trim().to_ascii_lowercase().as_str() {
            "pos" => ResponseScale::Positive,
            "pos_or_neu" => ResponseScale::PositiveOrNeutral,
            "neu" => ResponseScale::Neutral,
            "neg_or_neu" => ResponseScale::NegativeOrNeutral,
            "neg" => ResponseScale::Negative,
            "yes" => ResponseScale::Yes,
            "no" => ResponseScale::No,
            _ => return Err(Error::Format(format!("unrecognized response `{text}`"))),
        })
    }

    /// Whether two responses count as agreeing under the strict three-class
    /// reading, where an "or neutral" answer agrees with its polar class and
    /// with neutral.
    pub fn agrees_with(self, other: ResponseScale) -> bool {
        use ResponseScale::*;
        if self == other {
            return true;
        }
        matches!(
            (self, other),
            (PositiveOrNeutral, Positive | Neutral)
                | (Positive | Neutral, PositiveOrNeutral)
                | (NegativeOrNeutral, Negative | Neutral)
                | (Negative | Neutral, NegativeOrNeutral)
        )
    }
}
