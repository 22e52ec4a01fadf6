//! Reference systems: per-aspect majority label, k-nearest-neighbor vote
//! over embedding similarity, and label propagation over a verb similarity
//! graph with loopy belief propagation.

use std::collections::{BTreeMap, BTreeSet};

use crate::embeddings::{cosine, nearest_neighbors, EmbeddingTable};
use crate::error::{Error, Result};
use crate::factor_graph::{loopy_sum_product, max_marginal_decode, FactorGraph, LoopyConfig};
use crate::types::{AspectId, ConnotationFrame, Polarity};

/// Most frequent training label per aspect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MajorityModel {
    pub labels: [Polarity; 9],
}

impl MajorityModel {
    pub fn predict(&self, verb: &str) -> ConnotationFrame {
        ConnotationFrame::new(verb, self.labels)
    }
}

/// Most frequent label; count ties go to the lowest polarity.
pub fn majority_label(labels: impl IntoIterator<Item = Polarity>) -> Option<Polarity> {
    let mut counts = [0usize; 3];
    let mut any = false;
    for l in labels {
        counts[l.index()] += 1;
        any = true;
    }
    if !any {
        return None;
    }
    let mut best = 0;
    for c in 1..3 {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    Some(Polarity::ALL[best])
}

pub fn majority_train(train: &[ConnotationFrame]) -> Result<MajorityModel> {
    if train.is_empty() {
        return Err(Error::Input("empty training data".into()));
    }
    let mut labels = [Polarity::Neutral; 9];
    for a in AspectId::ALL {
        labels[a.index()] = majority_label(train.iter().filter_map(|f| f.label(a)))
            .ok_or_else(|| Error::Input(format!("no training labels for {a}")))?;
    }
    Ok(MajorityModel { labels })
}

/// Per aspect, the majority vote of the `k` training verbs nearest to
/// `verb`. Vote ties go to the nearest neighbor's label when it is among
/// the tied labels, otherwise to the lowest tied polarity.
pub fn knn_predict(
    verb: &str,
    k: usize,
    train: &[ConnotationFrame],
    table: &EmbeddingTable,
) -> Result<ConnotationFrame> {
    if k == 0 {
        return Err(Error::Input("k must be positive".into()));
    }
    table.lookup(verb)?;
    let by_verb: BTreeMap<&str, &ConnotationFrame> =
        train.iter().map(|f| (f.verb.as_str(), f)).collect();
    let embedded = by_verb.keys().filter(|v| table.contains(v)).count();
    if embedded < k {
        return Err(Error::Input(format!(
            "need at least {k} embedded training verbs, found {embedded}"
        )));
    }
    let neighbors = nearest_neighbors(verb, k, by_verb.keys().copied(), table)?;
    let frames: Vec<&ConnotationFrame> = neighbors.iter().map(|(v, _)| by_verb[v.as_str()]).collect();

    let mut labels = [Polarity::Neutral; 9];
    for a in AspectId::ALL {
        let votes: Vec<Polarity> = frames
            .iter()
            .map(|f| {
                f.label(a)
                    .ok_or_else(|| Error::Input(format!("training frame `{}` lacks {a}", f.verb)))
            })
            .collect::<Result<_>>()?;
        labels[a.index()] = vote(&votes);
    }
    Ok(ConnotationFrame::new(verb, labels))
}

/// `votes` ordered nearest first.
fn vote(votes: &[Polarity]) -> Polarity {
    let mut counts = [0usize; 3];
    for v in votes {
        counts[v.index()] += 1;
    }
    let top = *counts.iter().max().expect("three classes");
    let winners: Vec<Polarity> = Polarity::ALL
        .iter()
        .copied()
        .filter(|p| counts[p.index()] == top)
        .collect();
    if winners.len() == 1 {
        return winners[0];
    }
    if winners.contains(&votes[0]) {
        votes[0]
    } else {
        winners[0]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphPropConfig {
    /// Edges kept per verb, to its most similar other verbs.
    pub top_k: usize,
    /// Minimum cosine for an edge.
    pub sim_floor: f64,
    /// Agreement log-potential per unit of cosine.
    pub potential_scale: f64,
    /// Log-potential on a seed verb's own label.
    pub seed_strength: f64,
    pub loopy: LoopyConfig,
}

impl Default for GraphPropConfig {
    fn default() -> Self {
        GraphPropConfig {
            top_k: 10,
            sim_floor: 0.0,
            potential_scale: 1.0,
            seed_strength: 5.0,
            loopy: LoopyConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphPropResult {
    pub labels: BTreeMap<String, Polarity>,
    /// Unseeded verbs with no edges, labeled neutral.
    pub isolated: Vec<String>,
    pub converged: bool,
    pub iterations: usize,
    pub n_edges: usize,
}

/// Propagates seed labels for one aspect over a similarity graph: one
/// variable per verb, an agreement factor (`potential_scale * cosine` on
/// the diagonal) from each verb to its `top_k` most similar verbs with
/// cosine at least `sim_floor`, and a unary factor on each seed.
pub fn graph_prop(
    aspect: AspectId,
    seeds: &BTreeMap<String, Polarity>,
    all_verbs: &[String],
    table: &EmbeddingTable,
    cfg: &GraphPropConfig,
) -> Result<GraphPropResult> {
    if seeds.is_empty() {
        return Err(Error::Input(format!("no seed labels for {aspect}")));
    }
    if cfg.top_k == 0 {
        return Err(Error::Input("top_k must be at least 1".into()));
    }
    let verbs: Vec<&str> = all_verbs
        .iter()
        .map(String::as_str)
        .chain(seeds.keys().map(String::as_str))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let vectors: Vec<&[f64]> = verbs
        .iter()
        .map(|v| table.lookup(v))
        .collect::<Result<_>>()?;

    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..verbs.len() {
        let mut sims: Vec<(usize, f64)> = (0..verbs.len())
            .filter(|&j| j != i)
            .filter_map(|j| cosine(vectors[i], vectors[j]).ok().map(|s| (j, s)))
            .filter(|&(_, s)| s >= cfg.sim_floor)
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(j, s) in sims.iter().take(cfg.top_k) {
            edges.insert((i.min(j), i.max(j)), s);
        }
    }

    let mut g = FactorGraph::new();
    for v in &verbs {
        g.add_variable(*v)?;
    }
    let mut has_edge = vec![false; verbs.len()];
    for (&(i, j), &s) in &edges {
        let mut t = vec![0.0; 9];
        for c in 0..3 {
            t[c * 3 + c] = cfg.potential_scale * s;
        }
        g.add_factor_by_index(format!("sim:{}~{}", verbs[i], verbs[j]), vec![i, j], t)?;
        has_edge[i] = true;
        has_edge[j] = true;
    }
    for (v, p) in seeds {
        let idx = g.variable_index(v).expect("seeds are variables");
        let mut t = vec![0.0; 3];
        t[p.index()] = cfg.seed_strength;
        g.add_factor_by_index(format!("seed:{v}"), vec![idx], t)?;
    }

    let marginals = loopy_sum_product(&g, &cfg.loopy)?;
    let mut labels = max_marginal_decode(&marginals);
    let mut isolated = Vec::new();
    for (i, v) in verbs.iter().enumerate() {
        if !has_edge[i] && !seeds.contains_key(*v) {
            labels.insert(v.to_string(), Polarity::Neutral);
            isolated.push(v.to_string());
        }
    }
    Ok(GraphPropResult {
        labels,
        isolated,
        converged: marginals.converged,
        iterations: marginals.iterations,
        n_edges: edges.len(),
    })
}
