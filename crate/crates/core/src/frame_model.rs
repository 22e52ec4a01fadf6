//! Frame-level model: a nine-node factor graph over one verb's aspects.
//!
//! Each aspect node carries a unary "embedding" factor whose table is the
//! 3×3 weight slice selected by the aspect-level prediction (rows are
//! aspect-level labels, columns node polarities). Seven interdependency
//! factors couple the nodes:
//!
//! | factor | scope                |
//! |--------|----------------------|
//! | PV_a   | (P_wa, V_a)          |
//! | PV_t   | (P_wt, V_t)          |
//! | PE_a   | (P_at, E_a)          |
//! | PE_t   | (P_at, E_t)          |
//! | ES_a   | (E_a, S_a)           |
//! | ES_t   | (E_t, S_t)           |
//! | PT     | (P_wt, P_wa, P_at)   |
//!
//! The graph is a tree, so inference is exact. Weights are trained
//! piecewise: each factor is fitted as its own local log-linear model.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::factor_graph::{increment, sum_product_tree, FactorGraph, MarginalSet};
use crate::maxent::AspectModels;
use crate::types::{AspectId, ConnotationFrame, Polarity};

/// One factor of the frame graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameFactor {
    Emb(AspectId),
    PvA,
    PvT,
    PeA,
    PeT,
    EsA,
    EsT,
    Pt,
}

impl FrameFactor {
    pub const INTERDEPENDENCY: [FrameFactor; 7] = [
        FrameFactor::PvA,
        FrameFactor::PvT,
        FrameFactor::PeA,
        FrameFactor::PeT,
        FrameFactor::EsA,
        FrameFactor::EsT,
        FrameFactor::Pt,
    ];

    /// All sixteen factors: the nine unary ones first.
    pub fn all() -> Vec<FrameFactor> {
        AspectId::ALL
            .iter()
            .map(|&a| FrameFactor::Emb(a))
            .chain(Self::INTERDEPENDENCY)
            .collect()
    }

    pub fn name(self) -> String {
        match self {
            FrameFactor::Emb(a) => format!("emb:{a}"),
            FrameFactor::PvA => "PV_a".into(),
            FrameFactor::PvT => "PV_t".into(),
            FrameFactor::PeA => "PE_a".into(),
            FrameFactor::PeT => "PE_t".into(),
            FrameFactor::EsA => "ES_a".into(),
            FrameFactor::EsT => "ES_t".into(),
            FrameFactor::Pt => "PT".into(),
        }
    }

    pub fn from_name(name: &str) -> Option<FrameFactor> {
        if let Some(a) = name.strip_prefix("emb:") {
            return AspectId::from_name(a).map(FrameFactor::Emb);
        }
        Self::INTERDEPENDENCY.into_iter().find(|f| f.name() == name)
    }

    /// Node scope in table order.
    pub fn scope(self) -> Vec<AspectId> {
        use AspectId::*;
        match self {
            FrameFactor::Emb(a) => vec![a],
            FrameFactor::PvA => vec![PWa, Va],
            FrameFactor::PvT => vec![PWt, Vt],
            FrameFactor::PeA => vec![PAt, Ea],
            FrameFactor::PeT => vec![PAt, Et],
            FrameFactor::EsA => vec![Ea, Sa],
            FrameFactor::EsT => vec![Et, St],
            FrameFactor::Pt => vec![PWt, PWa, PAt],
        }
    }

    /// Axis labels of the weight table (the unary tables are indexed by
    /// the aspect-level prediction, then the node polarity).
    pub fn axes(self) -> Vec<String> {
        match self {
            FrameFactor::Emb(a) => vec![format!("pred({a})"), a.name().to_string()],
            other => other.scope().iter().map(|a| a.name().to_string()).collect(),
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            FrameFactor::Pt => 27,
            _ => 9,
        }
    }
}

/// All factor weights of the frame graph: 9 unary 3×3 tables, six pairwise
/// 3×3 tables and one 3×3×3 table (162 numbers).
#[derive(Clone, Debug, PartialEq)]
pub struct FrameWeights {
    emb: [[f64; 9]; 9],
    pair: [[f64; 9]; 6],
    pt: [f64; 27],
}

impl Default for FrameWeights {
    fn default() -> Self {
        FrameWeights {
            emb: [[0.0; 9]; 9],
            pair: [[0.0; 9]; 6],
            pt: [0.0; 27],
        }
    }
}

impl FrameWeights {
    pub const N_PARAMS: usize = 162;

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn table(&self, f: FrameFactor) -> &[f64] {
        match f {
            FrameFactor::Emb(a) => &self.emb[a.index()],
            FrameFactor::Pt => &self.pt,
            other => &self.pair[pair_slot(other)],
        }
    }

    pub fn table_mut(&mut self, f: FrameFactor) -> &mut [f64] {
        match f {
            FrameFactor::Emb(a) => &mut self.emb[a.index()],
            FrameFactor::Pt => &mut self.pt,
            other => &mut self.pair[pair_slot(other)],
        }
    }

    /// Entry of a 3×3 table at `(row, col)`.
    pub fn get2(&self, f: FrameFactor, row: Polarity, col: Polarity) -> f64 {
        self.table(f)[row.index() * 3 + col.index()]
    }

    pub fn get_pt(&self, wt: Polarity, wa: Polarity, at: Polarity) -> f64 {
        self.pt[wt.index() * 9 + wa.index() * 3 + at.index()]
    }

    pub fn is_finite(&self) -> bool {
        FrameFactor::all()
            .into_iter()
            .all(|f| self.table(f).iter().all(|v| v.is_finite()))
    }

    /// Unary tables with `strength` on the diagonal (prediction equals node
    /// polarity), everything else zero.
    pub fn with_identity_emb(mut self, strength: f64) -> Self {
        for a in AspectId::ALL {
            let t = self.table_mut(FrameFactor::Emb(a));
            for c in 0..3 {
                t[c * 3 + c] = strength;
            }
        }
        self
    }

    /// Text format: one line per entry, `factor<TAB>index symbols…<TAB>value`.
    pub fn to_text(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        for f in FrameFactor::all() {
            let _ = writeln!(s, "# {} axes: {}", f.name(), f.axes().join(" "));
            let arity = f.axes().len();
            for (i, v) in self.table(f).iter().enumerate() {
                let idx = index_symbols(i, arity);
                let _ = writeln!(s, "{}\t{}\t{v}", f.name(), idx.join("\t"));
            }
        }
        s
    }

    pub fn read_text<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut w = FrameWeights::zeros();
        let mut seen: BTreeMap<(FrameFactor, usize), ()> = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let f = FrameFactor::from_name(fields[0])
                .ok_or_else(|| Error::parse(origin, lineno, format!("unknown factor `{}`", fields[0])))?;
            let arity = f.axes().len();
            if fields.len() != arity + 2 {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("factor {} needs {} index fields", f.name(), arity),
                ));
            }
            let mut idx = 0;
            for sym in &fields[1..=arity] {
                let p = sym
                    .parse::<Polarity>()
                    .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
                idx = idx * 3 + p.index();
            }
            let v: f64 = fields[arity + 1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, lineno, "bad weight value"))?;
            if !v.is_finite() {
                return Err(Error::parse(origin, lineno, "weight is not finite"));
            }
            if seen.insert((f, idx), ()).is_some() {
                return Err(Error::parse(origin, lineno, "duplicate weight entry"));
            }
            w.table_mut(f)[idx] = v;
        }
        if seen.len() != Self::N_PARAMS {
            return Err(Error::Format(format!(
                "{}: expected {} weights, found {}",
                origin.display(),
                Self::N_PARAMS,
                seen.len()
            )));
        }
        Ok(w)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(std::io::BufReader::new(file), path)
    }

    /// 3×3 tables as CSV (`table,row,-,=,+`); the ternary table is written
    /// as three slices by its first axis.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("table,row_axis,col_axis,row,-,=,+\n");
        let mut block = |name: &str, rows: &str, cols: &str, t: &[f64]| {
            for r in Polarity::ALL {
                let _ = writeln!(
                    s,
                    "{name},{rows},{cols},{r},{},{},{}",
                    t[r.index() * 3],
                    t[r.index() * 3 + 1],
                    t[r.index() * 3 + 2]
                );
            }
        };
        for f in FrameFactor::all() {
            let axes = f.axes();
            if f == FrameFactor::Pt {
                for wt in Polarity::ALL {
                    let slice = &self.pt[wt.index() * 9..wt.index() * 9 + 9];
                    block(&format!("PT[P_wt={wt}]"), &axes[1], &axes[2], slice);
                }
            } else {
                block(&f.name(), &axes[0], &axes[1], self.table(f));
            }
        }
        s
    }
}

fn pair_slot(f: FrameFactor) -> usize {
    match f {
        FrameFactor::PvA => 0,
        FrameFactor::PvT => 1,
        FrameFactor::PeA => 2,
        FrameFactor::PeT => 3,
        FrameFactor::EsA => 4,
        FrameFactor::EsT => 5,
        _ => unreachable!("not a pairwise factor"),
    }
}

fn index_symbols(mut i: usize, arity: usize) -> Vec<&'static str> {
    let mut out = vec![""; arity];
    for slot in (0..arity).rev() {
        out[slot] = Polarity::ALL[i % 3].symbol();
        i /= 3;
    }
    out
}

/// Aspect-level output for one verb: a distribution per aspect. Hard labels
/// are one-hot rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AspectEvidence(pub [[f64; 3]; 9]);

impl AspectEvidence {
    pub fn from_labels(labels: [Polarity; 9]) -> Self {
        AspectEvidence(labels.map(one_hot))
    }

    pub fn from_map(preds: &BTreeMap<AspectId, Polarity>) -> Result<Self> {
        let mut labels = [Polarity::Neutral; 9];
        for a in AspectId::ALL {
            labels[a.index()] = *preds
                .get(&a)
                .ok_or_else(|| Error::Input(format!("missing aspect-level prediction for {a}")))?;
        }
        Ok(Self::from_labels(labels))
    }

    /// One-hot at each row's argmax (ties to the lowest polarity).
    pub fn hardened(&self) -> Self {
        Self::from_labels(self.labels())
    }

    pub fn labels(&self) -> [Polarity; 9] {
        self.0.map(|p| Polarity::argmax(&p))
    }
}

fn one_hot(p: Polarity) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[p.index()] = 1.0;
    v
}

/// Unary log-potential of node `a`: `sum_c q_c * theta[c][y]`.
fn unary_log_potential(weights: &FrameWeights, a: AspectId, q: &[f64; 3]) -> [f64; 3] {
    let t = weights.table(FrameFactor::Emb(a));
    let mut lp = [0.0; 3];
    for (y, l) in lp.iter_mut().enumerate() {
        *l = (0..3).map(|c| q[c] * t[c * 3 + y]).sum();
    }
    lp
}

/// Builds the nine-variable, sixteen-factor tree for one verb.
pub fn build_frame_graph_from_evidence(evidence: &AspectEvidence, weights: &FrameWeights) -> Result<FactorGraph> {
    let mut g = FactorGraph::new();
    for a in AspectId::ALL {
        g.add_variable(a.name())?;
    }
    for a in AspectId::ALL {
        let lp = unary_log_potential(weights, a, &evidence.0[a.index()]);
        g.add_factor_by_index(FrameFactor::Emb(a).name(), vec![a.index()], lp.to_vec())?;
    }
    for f in FrameFactor::INTERDEPENDENCY {
        let scope = f.scope().iter().map(|a| a.index()).collect();
        g.add_factor_by_index(f.name(), scope, weights.table(f).to_vec())?;
    }
    if !g.is_acyclic() {
        return Err(Error::Structure("frame graph is not a tree".into()));
    }
    Ok(g)
}

/// Graph for hard aspect-level labels; every aspect must be present.
pub fn build_frame_graph(preds: &BTreeMap<AspectId, Polarity>, weights: &FrameWeights) -> Result<FactorGraph> {
    build_frame_graph_from_evidence(&AspectEvidence::from_map(preds)?, weights)
}

/// Gold frame plus the aspect-level evidence for the same verb.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameExample {
    pub verb: String,
    pub gold: [Polarity; 9],
    pub evidence: AspectEvidence,
}

impl FrameExample {
    pub fn new(gold: &ConnotationFrame, preds: &BTreeMap<AspectId, Polarity>) -> Result<Self> {
        Ok(FrameExample {
            verb: gold.verb.clone(),
            gold: gold.label_array()?,
            evidence: AspectEvidence::from_map(preds)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    pub shuffle: bool,
    /// Per-example steps in epoch `e` use `learning_rate / (1 + decay * e)`.
    pub decay: f64,
    /// Use the exact mean gradient per epoch instead of per-example steps.
    pub full_batch: bool,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: 0.1,
            epochs: 50,
            l2: 0.01,
            seed: 1,
            shuffle: true,
            decay: 0.1,
            full_batch: false,
        }
    }
}

fn gold_index(f: FrameFactor, gold: &[Polarity; 9]) -> usize {
    f.scope().iter().fold(0, |acc, a| acc * 3 + gold[a.index()].index())
}

/// Log-likelihood of one example under factor `f`'s local model and its
/// gradient with respect to that factor's table.
fn local_loglik(f: FrameFactor, theta: &[f64], ex: &FrameExample) -> (f64, Vec<f64>) {
    match f {
        FrameFactor::Emb(a) => {
            let q = &ex.evidence.0[a.index()];
            let mut z = [0.0; 3];
            for (y, zy) in z.iter_mut().enumerate() {
                *zy = (0..3).map(|c| q[c] * theta[c * 3 + y]).sum();
            }
            let (ll, p) = log_softmax_at(&z, ex.gold[a.index()].index());
            let g = ex.gold[a.index()].index();
            let mut grad = vec![0.0; 9];
            for c in 0..3 {
                for y in 0..3 {
                    let target = if y == g { 1.0 } else { 0.0 };
                    grad[c * 3 + y] = q[c] * (target - p[y]);
                }
            }
            (ll, grad)
        }
        _ => {
            let g = gold_index(f, &ex.gold);
            let (ll, p) = log_softmax_at(theta, g);
            let grad = p
                .iter()
                .enumerate()
                .map(|(k, pk)| if k == g { 1.0 - pk } else { -pk })
                .collect();
            (ll, grad)
        }
    }
}

fn log_softmax_at(z: &[f64], at: usize) -> (f64, Vec<f64>) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    (z[at] - lse, z.iter().map(|v| (v - lse).exp()).collect())
}

/// Piecewise objective of a single factor: mean local log-likelihood minus
/// `l2 / 2 * ||theta||^2`. Concave in `theta`.
pub struct PiecewiseObjective<'a> {
    pub factor: FrameFactor,
    pub data: &'a [FrameExample],
    pub l2: f64,
}

impl PiecewiseObjective<'_> {
    pub fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let n = self.data.len().max(1) as f64;
        let mut value = 0.0;
        let mut grad = vec![0.0; theta.len()];
        for ex in self.data {
            let (ll, g) = local_loglik(self.factor, theta, ex);
            value += ll / n;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b / n;
            }
        }
        for (gi, ti) in grad.iter_mut().zip(theta) {
            value -= 0.5 * self.l2 * ti * ti;
            *gi -= self.l2 * ti;
        }
        (value, grad)
    }
}

/// Sum over all sixteen factors of their piecewise objectives.
pub fn piecewise_objective(weights: &FrameWeights, data: &[FrameExample], l2: f64) -> f64 {
    FrameFactor::all()
        .into_iter()
        .map(|f| {
            PiecewiseObjective { factor: f, data, l2 }
                .value_and_gradient(weights.table(f))
                .0
        })
        .sum()
}

/// Trains every factor independently by stochastic gradient ascent on its
/// local likelihood, starting from zeros. Returns the weights and the total
/// piecewise objective after each epoch.
pub fn train_piecewise_with_trace(train: &[FrameExample], cfg: &SgdConfig) -> Result<(FrameWeights, Vec<f64>)> {
    if train.is_empty() {
        return Err(Error::Input("empty training set".into()));
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(Error::Input("learning rate must be positive".into()));
    }
    if !(cfg.decay >= 0.0) {
        return Err(Error::Input("decay must be nonnegative".into()));
    }
    let mut w = FrameWeights::zeros();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let factors = FrameFactor::all();
    for epoch in 0..cfg.epochs {
        if cfg.full_batch {
            for &f in &factors {
                let (_, g) = PiecewiseObjective {
                    factor: f,
                    data: train,
                    l2: cfg.l2,
                }
                .value_and_gradient(w.table(f));
                for (t, gi) in w.table_mut(f).iter_mut().zip(g) {
                    *t += cfg.learning_rate * gi;
                }
            }
        } else {
            if cfg.shuffle {
                order.shuffle(&mut rng);
            }
            let lr = cfg.learning_rate / (1.0 + cfg.decay * epoch as f64);
            for &i in &order {
                let ex = &train[i];
                for &f in &factors {
                    let (_, g) = local_loglik(f, w.table(f), ex);
                    for (t, gi) in w.table_mut(f).iter_mut().zip(g) {
                        *t += lr * (gi - cfg.l2 * *t);
                    }
                }
            }
        }
        trace.push(piecewise_objective(&w, train, cfg.l2));
    }
    if !w.is_finite() {
        return Err(Error::Input("training diverged; lower the learning rate".into()));
    }
    Ok((w, trace))
}

pub fn train_piecewise(train: &[FrameExample], cfg: &SgdConfig) -> Result<FrameWeights> {
    train_piecewise_with_trace(train, cfg).map(|(w, _)| w)
}

/// Frame-level decode for one verb: exact marginals, per-node argmax, and
/// the signed score `p(+) - p(-)` per aspect.
#[derive(Clone, Debug)]
pub struct FrameDecode {
    pub labels: [Polarity; 9],
    pub scores: [f64; 9],
    pub marginals: MarginalSet,
}

pub fn decode_frame(evidence: &AspectEvidence, weights: &FrameWeights) -> Result<FrameDecode> {
    let graph = build_frame_graph_from_evidence(evidence, weights)?;
    let marginals = sum_product_tree(&graph)?;
    let mut labels = [Polarity::Neutral; 9];
    let mut scores = [0.0; 9];
    for a in AspectId::ALL {
        let m = marginals.get(a.name()).expect("frame graph has every aspect");
        labels[a.index()] = Polarity::argmax(m);
        scores[a.index()] = m[2] - m[0];
    }
    Ok(FrameDecode {
        labels,
        scores,
        marginals,
    })
}

/// Whether unary factors consume hard aspect-level labels or their full
/// probability vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvidenceMode {
    #[default]
    Hard,
    Soft,
}

/// Aspect-level evidence for a verb from the trained classifiers.
pub fn aspect_evidence(
    verb: &str,
    models: &AspectModels,
    table: &EmbeddingTable,
    mode: EvidenceMode,
) -> Result<AspectEvidence> {
    let ev = AspectEvidence(models.predict_probs(verb, table)?);
    Ok(match mode {
        EvidenceMode::Hard => ev.hardened(),
        EvidenceMode::Soft => ev,
    })
}

/// Full frame for one verb; `scores` holds `p(+) - p(-)` of each node.
pub fn predict_frame(
    verb: &str,
    models: &AspectModels,
    table: &EmbeddingTable,
    weights: &FrameWeights,
    mode: EvidenceMode,
) -> Result<ConnotationFrame> {
    let ev = aspect_evidence(verb, models, table, mode)?;
    let d = decode_frame(&ev, weights)?;
    Ok(ConnotationFrame::new(verb, d.labels).with_scores(d.scores))
}

/// Exact joint distribution over the 3^9 frames under the interdependency
/// factors only, as cumulative weights in odometer order (last aspect
/// fastest).
fn prior_cdf(weights: &FrameWeights) -> Vec<f64> {
    let total = 3usize.pow(9);
    let mut scores = Vec::with_capacity(total);
    let mut assign = [0usize; 9];
    for _ in 0..total {
        let s: f64 = FrameFactor::INTERDEPENDENCY
            .iter()
            .map(|&f| {
                let idx = f.scope().iter().fold(0, |acc, a| acc * 3 + assign[a.index()]);
                weights.table(f)[idx]
            })
            .sum();
        scores.push(s);
        increment(&mut assign);
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    scores
        .iter()
        .map(|s| {
            acc += (s - max).exp();
            acc
        })
        .collect()
}

fn decode_state(mut i: usize) -> [Polarity; 9] {
    let mut out = [Polarity::Negative; 9];
    for slot in (0..9).rev() {
        out[slot] = Polarity::ALL[i % 3];
        i /= 3;
    }
    out
}

/// Samples gold frames from the interdependency part of `weights` by exact
/// enumeration, then corrupts each aspect independently with probability
/// `noise` (replacing it by one of the other two labels, uniformly) to form
/// hard aspect-level evidence.
pub fn generate_synthetic(weights: &FrameWeights, n: usize, seed: u64, noise: f64) -> Result<Vec<FrameExample>> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Input(format!("noise {noise} is outside [0, 1]")));
    }
    let cdf = prior_cdf(weights);
    let total = *cdf.last().expect("nonempty state space");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n.to_string().len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let u = rng.gen::<f64>() * total;
        let state = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        let gold = decode_state(state);
        let mut preds = gold;
        for p in preds.iter_mut() {
            if rng.gen::<f64>() < noise {
                let shift = rng.gen_range(1..3);
                *p = Polarity::ALL[(p.index() + shift) % 3];
            }
        }
        out.push(FrameExample {
            verb: format!("synthetic{i:0width$}"),
            gold,
            evidence: AspectEvidence::from_labels(preds),
        });
    }
    Ok(out)
}

/// Interdependency weights that favor the expected tendencies: agreement
/// on the PV, PE and ES diagonals, and `sign(P_wt) = sign(P_wa) * sign(P_at)`
/// for non-neutral perspective triples.
pub fn agreement_weights(strength: f64) -> FrameWeights {
    let mut w = FrameWeights::zeros();
    for f in [
        FrameFactor::PvA,
        FrameFactor::PvT,
        FrameFactor::PeA,
        FrameFactor::PeT,
        FrameFactor::EsA,
        FrameFactor::EsT,
    ] {
        let t = w.table_mut(f);
        for c in 0..3 {
            t[c * 3 + c] = strength;
        }
    }
    for wt in Polarity::ALL {
        for wa in Polarity::ALL {
            for at in Polarity::ALL {
                if triad_consistent(wt, wa, at) == Some(true) {
                    w.pt[wt.index() * 9 + wa.index() * 3 + at.index()] = strength;
                }
            }
        }
    }
    w
}

/// For a non-neutral triple, whether the writer's view of the theme equals
/// the product of its views along agent and agent-to-theme; `None` when any
/// member is neutral.
pub fn triad_consistent(wt: Polarity, wa: Polarity, at: Polarity) -> Option<bool> {
    if [wt, wa, at].contains(&Polarity::Neutral) {
        return None;
    }
    Some(wt.sign() == wa.sign() * at.sign())
}
