//! Reference implementations written independently of the library, used
//! as oracles by the integration tests.

#![allow(dead_code)]

use connotation::factor_graph::FactorGraph;
use connotation::Polarity;

/// Exact marginals by visiting every joint assignment, indexed like the
/// graph's variable list.
pub fn brute_marginals(g: &FactorGraph) -> Vec<[f64; 3]> {
    let n = g.variables().len();
    let total = 3usize.pow(n as u32);
    let mut scores = Vec::with_capacity(total);
    for s in 0..total {
        let assign = digits(s, n);
        let mut lp = 0.0;
        for f in g.factors() {
            let mut idx = 0;
            for &v in &f.scope {
                idx = idx * 3 + assign[v];
            }
            lp += f.log_potential[idx];
        }
        scores.push(lp);
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = vec![[0.0; 3]; n];
    let mut z = 0.0;
    for (s, lp) in scores.iter().enumerate() {
        let w = (lp - max).exp();
        z += w;
        for (v, x) in digits(s, n).into_iter().enumerate() {
            out[v][x] += w;
        }
    }
    for m in out.iter_mut() {
        for p in m.iter_mut() {
            *p /= z;
        }
    }
    out
}

/// Base-3 digits of `s`, first variable most significant.
pub fn digits(mut s: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for i in (0..n).rev() {
        d[i] = s % 3;
        s /= 3;
    }
    d
}

pub fn max_diff_vs_brute(g: &FactorGraph, m: &connotation::factor_graph::MarginalSet) -> f64 {
    let oracle = brute_marginals(g);
    let mut worst: f64 = 0.0;
    for (i, v) in g.variables().iter().enumerate() {
        let got = m.get(&v.id).expect("marginal for every variable");
        for x in 0..3 {
            worst = worst.max((got[x] - oracle[i][x]).abs());
        }
    }
    worst
}

/// Nominal alpha from its pairable-values definition: observed disagreement
/// over within-unit ordered pairs (each unit weighted by 1/(m-1)) against
/// expected disagreement over all ordered pairs of pairable values.
pub fn alpha_oracle(units: &[Vec<usize>]) -> f64 {
    let pairable: Vec<&Vec<usize>> = units.iter().filter(|u| u.len() >= 2).collect();
    let values: Vec<usize> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    let n = values.len() as f64;
    let mut d_o = 0.0;
    for u in &pairable {
        let m = u.len() as f64;
        let mut dis = 0.0;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j && u[i] != u[j] {
                    dis += 1.0;
                }
            }
        }
        d_o += dis / (m - 1.0);
    }
    d_o /= n;
    let mut dis = 0.0;
    for i in 0..values.len() {
        for j in 0..values.len() {
            if i != j && values[i] != values[j] {
                dis += 1.0;
            }
        }
    }
    let d_e = dis / (n * (n - 1.0));
    1.0 - d_o / d_e
}

/// Macro-F1 in percent from explicit true/false positive counting; a class
/// with an undefined F1 contributes zero.
pub fn macro_f1_oracle(gold: &[Polarity], pred: &[Polarity]) -> f64 {
    let mut total = 0.0;
    for c in Polarity::ALL {
        let tp = gold.iter().zip(pred).filter(|(g, p)| **g == c && **p == c).count() as f64;
        let fp = gold.iter().zip(pred).filter(|(g, p)| **g != c && **p == c).count() as f64;
        let fn_ = gold.iter().zip(pred).filter(|(g, p)| **g == c && **p != c).count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    100.0 * total / 3.0
}

pub fn pol(s: &str) -> Vec<Polarity> {
    s.chars()
        .map(|c| match c {
            '+' => Polarity::Positive,
            '-' => Polarity::Negative,
            '=' => Polarity::Neutral,
            _ => panic!("bad polarity char {c}"),
        })
        .collect()
}
