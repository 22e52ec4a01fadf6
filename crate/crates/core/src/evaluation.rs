//! Dataset splitting, per-aspect accuracy and macro-F1, and the report that
//! averages them over the nine aspects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{AspectId, ConnotationFrame, Polarity};

/// Default partition sizes once at least 900 verbs are available.
pub const DEFAULT_SPLIT: (usize, usize, usize) = (300, 300, 300);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded shuffle, then partition. Without explicit sizes: 300/300/300 when
/// there are at least 900 items, otherwise equal thirds with any remainder
/// (at most two items) added to the training part.
pub fn split<T: Clone>(items: &[T], seed: u64, sizes: Option<(usize, usize, usize)>) -> Result<Split<T>> {
    let n = items.len();
    let (a, b, c) = match sizes {
        Some(s) => {
            if s.0 + s.1 + s.2 > n {
                return Err(Error::Input(format!(
                    "split sizes {}+{}+{} exceed the {n} available items",
                    s.0, s.1, s.2
                )));
            }
            s
        }
        None if n >= 900 => DEFAULT_SPLIT,
        None => (n / 3 + n % 3, n / 3, n / 3),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |r: std::ops::Range<usize>| order[r].iter().map(|&i| items[i].clone()).collect();
    Ok(Split {
        train: pick(0..a),
        dev: pick(a..a + b),
        test: pick(a + b..a + b + c),
    })
}

fn check_lengths<T>(gold: &[T], pred: &[T]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::Shape {
            expected: gold.len(),
            actual: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::Input("no labels to score".into()));
    }
    Ok(())
}

/// Percentage of positions where `pred` equals `gold`.
pub fn accuracy(gold: &[Polarity], pred: &[Polarity]) -> Result<f64> {
    check_lengths(gold, pred)?;
    let hits = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    Ok(100.0 * hits as f64 / gold.len() as f64)
}

/// 3×3 counts indexed `[gold][pred]`.
pub fn confusion(gold: &[Polarity], pred: &[Polarity]) -> Result<[[usize; 3]; 3]> {
    check_lengths(gold, pred)?;
    let mut m = [[0usize; 3]; 3];
    for (g, p) in gold.iter().zip(pred) {
        m[g.index()][p.index()] += 1;
    }
    Ok(m)
}

/// Per-class F1 in class order. A zero denominator gives 0.
pub fn per_class_f1(gold: &[Polarity], pred: &[Polarity]) -> Result<[f64; 3]> {
    let m = confusion(gold, pred)?;
    let mut out = [0.0; 3];
    for (c, f1) in out.iter_mut().enumerate() {
        let tp = m[c][c] as f64;
        let gold_c: usize = m[c].iter().sum();
        let pred_c: usize = (0..3).map(|g| m[g][c]).sum();
        let denom = (gold_c + pred_c) as f64;
        *f1 = if denom == 0.0 { 0.0 } else { 2.0 * tp / denom };
    }
    Ok(out)
}

/// Unweighted mean of the three per-class F1 values, as a percentage.
/// Classes absent from both sequences stay in the mean with F1 = 0.
pub fn macro_f1(gold: &[Polarity], pred: &[Polarity]) -> Result<f64> {
    let f = per_class_f1(gold, pred)?;
    Ok(100.0 * f.iter().sum::<f64>() / 3.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AspectScore {
    pub aspect: AspectId,
    pub accuracy: f64,
    pub avg_f1: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<AspectScore>,
    pub overall_accuracy: f64,
    pub overall_f1: f64,
    pub n_verbs: usize,
}

impl EvalReport {
    pub fn to_text(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{title}");
        let _ = writeln!(s, "{:<8}{:>10}{:>10}{:>8}", "aspect", "Acc.", "Avg F1", "n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<8}{:>10.2}{:>10.2}{:>8}",
                r.aspect.name(),
                r.accuracy,
                r.avg_f1,
                r.n
            );
        }
        let _ = writeln!(
            s,
            "{:<8}{:>10.2}{:>10.2}{:>8}",
            "mean", self.overall_accuracy, self.overall_f1, self.n_verbs
        );
        let _ = writeln!(
            s,
            "F1 is the unweighted mean over (-, =, +); a class with no gold and no predicted items contributes 0."
        );
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("aspect,accuracy,avg_f1,n\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.aspect, r.accuracy, r.avg_f1, r.n);
        }
        let _ = writeln!(
            s,
            "mean,{},{},{}",
            self.overall_accuracy, self.overall_f1, self.n_verbs
        );
        s
    }
}

/// Scores `pred` against `gold`, matched by verb, for the given aspects
/// (all nine when `aspects` is empty).
pub fn evaluate_aspects(
    gold: &[ConnotationFrame],
    pred: &[ConnotationFrame],
    aspects: &[AspectId],
) -> Result<EvalReport> {
    let g: BTreeMap<&str, &ConnotationFrame> = gold.iter().map(|f| (f.verb.as_str(), f)).collect();
    let p: BTreeMap<&str, &ConnotationFrame> = pred.iter().map(|f| (f.verb.as_str(), f)).collect();
    let gk: BTreeSet<&str> = g.keys().copied().collect();
    let pk: BTreeSet<&str> = p.keys().copied().collect();
    if gk != pk {
        let only_gold: Vec<&str> = gk.difference(&pk).copied().collect();
        let only_pred: Vec<&str> = pk.difference(&gk).copied().collect();
        return Err(Error::Input(format!(
            "verb sets differ; only in gold: {only_gold:?}; only in predictions: {only_pred:?}"
        )));
    }
    if gk.is_empty() {
        return Err(Error::Input("no verbs to evaluate".into()));
    }
    let aspects: Vec<AspectId> = if aspects.is_empty() {
        AspectId::ALL.to_vec()
    } else {
        AspectId::ALL
            .iter()
            .copied()
            .filter(|a| aspects.contains(a))
            .collect()
    };
    let mut rows = Vec::new();
    for a in aspects {
        let mut gl = Vec::with_capacity(gk.len());
        let mut pl = Vec::with_capacity(gk.len());
        for v in &gk {
            let missing = |who: &str| Error::Input(format!("{who} frame for `{v}` lacks {a}"));
            gl.push(g[v].label(a).ok_or_else(|| missing("gold"))?);
            pl.push(p[v].label(a).ok_or_else(|| missing("predicted"))?);
        }
        rows.push(AspectScore {
            aspect: a,
            accuracy: accuracy(&gl, &pl)?,
            avg_f1: macro_f1(&gl, &pl)?,
            n: gl.len(),
        });
    }
    let k = rows.len() as f64;
    Ok(EvalReport {
        overall_accuracy: rows.iter().map(|r| r.accuracy).sum::<f64>() / k,
        overall_f1: rows.iter().map(|r| r.avg_f1).sum::<f64>() / k,
        n_verbs: gk.len(),
        rows,
    })
}

pub fn evaluate(gold: &[ConnotationFrame], pred: &[ConnotationFrame]) -> Result<EvalReport> {
    evaluate_aspects(gold, pred, &[])
}
