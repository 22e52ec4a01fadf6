//! Discrete factor graphs over three-valued variables.
//!
//! Factors are log-linear tables over one to three variables. Inference is
//! sum-product message passing: an exact two-pass schedule for trees and a
//! damped synchronous (flooding) schedule for graphs with cycles. A
//! brute-force enumerator provides exact marginals for small graphs.
//!
//! Tables are stored row-major with the first scope variable most
//! significant, so entry `9 * x0 + 3 * x1 + x2` holds the log-potential of
//! the assignment `(x0, x1, x2)`. Messages live in probability space and are
//! normalized after every update.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::types::Polarity;

/// Every variable takes one of three values.
pub const DOMAIN: usize = 3;

/// Largest joint state space the enumerator will visit.
pub const MAX_ENUMERATION_VARS: usize = 12;

type Msg = [f64; DOMAIN];

const UNIFORM: Msg = [1.0 / 3.0; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub id: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub id: String,
    /// Indices into the graph's variable list.
    pub scope: Vec<usize>,
    pub log_potential: Vec<f64>,
}

impl Factor {
    pub fn arity(&self) -> usize {
        self.scope.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactorGraph {
    variables: Vec<Variable>,
    factors: Vec<Factor>,
    by_id: HashMap<String, usize>,
    /// For each variable, the (factor, slot) pairs it appears in.
    adjacency: Vec<Vec<(usize, usize)>>,
}

/// Per-variable marginal distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalSet {
    pub marginals: BTreeMap<String, [f64; 3]>,
    pub converged: bool,
    pub iterations: usize,
}

impl MarginalSet {
    pub fn get(&self, id: &str) -> Option<&[f64; 3]> {
        self.marginals.get(id)
    }

    /// Largest absolute difference against another set over shared ids.
    pub fn max_abs_diff(&self, other: &MarginalSet) -> f64 {
        self.marginals
            .iter()
            .filter_map(|(k, a)| other.marginals.get(k).map(|b| (a, b)))
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

fn normalize(m: &mut Msg) {
    let s: f64 = m.iter().sum();
    if s > 0.0 && s.is_finite() {
        for v in m.iter_mut() {
            *v /= s;
        }
    } else {
        *m = UNIFORM;
    }
}

impl FactorGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, id: impl Into<String>) -> Result<usize> {
        let id = id.into();
        if self.by_id.contains_key(&id) {
            return Err(Error::Structure(format!("duplicate variable id `{id}`")));
        }
        let idx = self.variables.len();
        self.by_id.insert(id.clone(), idx);
        self.variables.push(Variable { id });
        self.adjacency.push(Vec::new());
        Ok(idx)
    }

    pub fn variable_index(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Adds a factor over the named variables.
    pub fn add_factor(&mut self, id: impl Into<String>, scope: &[&str], log_potential: Vec<f64>) -> Result<usize> {
        let idx = scope
            .iter()
            .map(|v| {
                self.variable_index(v)
                    .ok_or_else(|| Error::Structure(format!("unknown variable `{v}` in factor scope")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.add_factor_by_index(id, idx, log_potential)
    }

    pub fn add_factor_by_index(&mut self, id: impl Into<String>, scope: Vec<usize>, log_potential: Vec<f64>) -> Result<usize> {
        let id = id.into();
        if scope.is_empty() || scope.len() > 3 {
            return Err(Error::Structure(format!(
                "factor `{id}` has arity {}, expected 1 to 3",
                scope.len()
            )));
        }
        if let Some(&bad) = scope.iter().find(|&&v| v >= self.variables.len()) {
            return Err(Error::Structure(format!("factor `{id}` refers to variable #{bad}")));
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(Error::Structure(format!(
                    "factor `{id}` repeats variable `{}`",
                    self.variables[*v].id
                )));
            }
        }
        let expected = DOMAIN.pow(scope.len() as u32);
        if log_potential.len() != expected {
            return Err(Error::Shape {
                expected,
                actual: log_potential.len(),
            });
        }
        if log_potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::Structure(format!("factor `{id}` has a non-finite log-potential")));
        }
        let f = self.factors.len();
        for (slot, &v) in scope.iter().enumerate() {
            self.adjacency[v].push((f, slot));
        }
        self.factors.push(Factor {
            id,
            scope,
            log_potential,
        });
        Ok(f)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor_mut(&mut self, f: usize) -> &mut Factor {
        &mut self.factors[f]
    }

    /// True when the bipartite variable/factor graph has no cycle.
    pub fn is_acyclic(&self) -> bool {
        let nv = self.variables.len();
        let mut parent: Vec<usize> = (0..nv + self.factors.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (f, factor) in self.factors.iter().enumerate() {
            for &v in &factor.scope {
                let (a, b) = (find(&mut parent, v), find(&mut parent, nv + f));
                if a == b {
                    return false;
                }
                parent[a] = b;
            }
        }
        true
    }

    fn uniform_marginals(&self, converged: bool, iterations: usize) -> MarginalSet {
        MarginalSet {
            marginals: self
                .variables
                .iter()
                .map(|v| (v.id.clone(), UNIFORM))
                .collect(),
            converged,
            iterations,
        }
    }

    /// Human-readable listing of variables, factors and tables.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variables ({}):", self.variables.len());
        for v in &self.variables {
            let _ = writeln!(s, "  {}", v.id);
        }
        let _ = writeln!(s, "factors ({}):", self.factors.len());
        for f in &self.factors {
            let names: Vec<&str> = f.scope.iter().map(|&v| self.variables[v].id.as_str()).collect();
            let _ = writeln!(s, "  {} ({})", f.id, names.join(", "));
            for (i, lp) in f.log_potential.iter().enumerate() {
                let assign: Vec<&str> = decode(i, f.arity())[..f.arity()]
                    .iter()
                    .map(|&x| Polarity::ALL[x].symbol())
                    .collect();
                let _ = writeln!(s, "    {} {lp}", assign.join(" "));
            }
        }
        s
    }

    /// Message from factor `f` to the variable in `target` slot, given the
    /// incoming variable-to-factor messages of the factor's other slots.
    fn factor_message(&self, f: usize, target: usize, incoming: &[Msg]) -> Msg {
        let factor = &self.factors[f];
        let arity = factor.arity();
        let max = factor
            .log_potential
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut out = [0.0; 3];
        for (i, lp) in factor.log_potential.iter().enumerate() {
            let x = decode(i, arity);
            let mut w = (lp - max).exp();
            for slot in 0..arity {
                if slot != target {
                    w *= incoming[slot][x[slot]];
                }
            }
            out[x[target]] += w;
        }
        normalize(&mut out);
        out
    }
}

/// Splits a table index into per-slot values (first slot most significant).
fn decode(mut i: usize, arity: usize) -> [usize; 3] {
    let mut x = [0usize; 3];
    for slot in (0..arity).rev() {
        x[slot] = i % DOMAIN;
        i /= DOMAIN;
    }
    x
}

/// Message store keyed by edge. Edge `e` joins factor `edges[e].0` and the
/// variable in its slot `edges[e].1`.
struct Messages {
    edge_of: Vec<Vec<usize>>,
    var_to_fac: Vec<Msg>,
    fac_to_var: Vec<Msg>,
}

impl Messages {
    fn new(g: &FactorGraph) -> Self {
        let mut edge_of = Vec::with_capacity(g.factors.len());
        let mut n = 0;
        for f in &g.factors {
            edge_of.push((n..n + f.arity()).collect());
            n += f.arity();
        }
        Messages {
            edge_of,
            var_to_fac: vec![UNIFORM; n],
            fac_to_var: vec![UNIFORM; n],
        }
    }

    fn edge(&self, f: usize, slot: usize) -> usize {
        self.edge_of[f][slot]
    }

    /// Product of factor messages into `v`, leaving out `skip`.
    fn var_product(&self, g: &FactorGraph, v: usize, skip: Option<usize>) -> Msg {
        let mut m = [1.0; 3];
        for &(f, slot) in &g.adjacency[v] {
            if Some(f) == skip {
                continue;
            }
            let e = self.edge(f, slot);
            for x in 0..3 {
                m[x] *= self.fac_to_var[e][x];
            }
        }
        normalize(&mut m);
        m
    }

    fn factor_inputs(&self, g: &FactorGraph, f: usize) -> Vec<Msg> {
        (0..g.factors[f].arity())
            .map(|slot| self.var_to_fac[self.edge(f, slot)])
            .collect()
    }

    fn marginals(&self, g: &FactorGraph, converged: bool, iterations: usize) -> MarginalSet {
        MarginalSet {
            marginals: (0..g.variables.len())
                .map(|v| (g.variables[v].id.clone(), self.var_product(g, v, None)))
                .collect(),
            converged,
            iterations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Var(usize),
    Fac(usize),
}

/// Exact marginals on an acyclic graph by leaves-to-root then
/// root-to-leaves message passing. Each connected component is rooted at
/// its variable with the lowest id.
pub fn sum_product_tree(graph: &FactorGraph) -> Result<MarginalSet> {
    if !graph.is_acyclic() {
        return Err(Error::Structure(
            "graph contains a cycle; use loopy_sum_product instead".into(),
        ));
    }
    let mut msgs = Messages::new(graph);
    let nv = graph.variables.len();

    let mut roots: Vec<usize> = (0..nv).collect();
    roots.sort_by(|&a, &b| graph.variables[a].id.cmp(&graph.variables[b].id));

    let mut visited_var = vec![false; nv];
    let mut visited_fac = vec![false; graph.factors.len()];
    for root in roots {
        if visited_var[root] {
            continue;
        }
        // BFS order with parent edges.
        let mut order: Vec<(Node, Option<(usize, usize)>)> = Vec::new();
        let mut queue = VecDeque::new();
        visited_var[root] = true;
        queue.push_back((Node::Var(root), None));
        while let Some((node, parent)) = queue.pop_front() {
            order.push((node, parent));
            match node {
                Node::Var(v) => {
                    for &(f, slot) in &graph.adjacency[v] {
                        if !visited_fac[f] {
                            visited_fac[f] = true;
                            queue.push_back((Node::Fac(f), Some((f, slot))));
                        }
                    }
                }
                Node::Fac(f) => {
                    for (slot, &v) in graph.factors[f].scope.iter().enumerate() {
                        if !visited_var[v] {
                            visited_var[v] = true;
                            queue.push_back((Node::Var(v), Some((f, slot))));
                        }
                    }
                }
            }
        }

        // Upward pass: each node sends to its parent along the parent edge.
        for &(node, parent) in order.iter().rev() {
            let Some((f, slot)) = parent else { continue };
            let e = msgs.edge(f, slot);
            match node {
                Node::Var(v) => msgs.var_to_fac[e] = msgs.var_product(graph, v, Some(f)),
                Node::Fac(_) => {
                    let inputs = msgs.factor_inputs(graph, f);
                    msgs.fac_to_var[e] = graph.factor_message(f, slot, &inputs);
                }
            }
        }
        // Downward pass: each node sends to all of its children.
        for &(node, parent) in &order {
            match node {
                Node::Var(v) => {
                    for &(f, slot) in &graph.adjacency[v] {
                        if parent.map(|p| p.0) == Some(f) {
                            continue;
                        }
                        let e = msgs.edge(f, slot);
                        msgs.var_to_fac[e] = msgs.var_product(graph, v, Some(f));
                    }
                }
                Node::Fac(f) => {
                    let inputs = msgs.factor_inputs(graph, f);
                    for slot in 0..graph.factors[f].arity() {
                        if parent.map(|p| p.1) == Some(slot) {
                            continue;
                        }
                        let e = msgs.edge(f, slot);
                        msgs.fac_to_var[e] = graph.factor_message(f, slot, &inputs);
                    }
                }
            }
        }
    }
    Ok(msgs.marginals(graph, true, 1))
}

/// Damping and stopping rule for [`loopy_sum_product`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopyConfig {
    pub max_iters: usize,
    /// Weight kept on the previous message, in [0, 1).
    pub damping: f64,
    pub tol: f64,
}

impl Default for LoopyConfig {
    fn default() -> Self {
        LoopyConfig {
            max_iters: 100,
            damping: 0.1,
            tol: 1e-6,
        }
    }
}

/// Synchronous sum-product on any graph. Each iteration recomputes every
/// variable-to-factor message from the previous factor-to-variable
/// messages, then every factor-to-variable message; each new message is
/// blended as `damping * old + (1 - damping) * new`. Stops when no message
/// moves by `tol` or more. Non-convergence is reported in the result.
pub fn loopy_sum_product(graph: &FactorGraph, cfg: &LoopyConfig) -> Result<MarginalSet> {
    if !(0.0..1.0).contains(&cfg.damping) {
        return Err(Error::Input(format!("damping {} is outside [0, 1)", cfg.damping)));
    }
    if cfg.max_iters == 0 {
        return Ok(graph.uniform_marginals(false, 0));
    }
    let mut msgs = Messages::new(graph);
    let d = cfg.damping;
    let blend = |old: &Msg, new: Msg| -> Msg {
        let mut m = [0.0; 3];
        for x in 0..3 {
            m[x] = d * old[x] + (1.0 - d) * new[x];
        }
        normalize(&mut m);
        m
    };
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let mut delta: f64 = 0.0;

        let mut next_vf = msgs.var_to_fac.clone();
        for (v, adj) in graph.adjacency.iter().enumerate() {
            for &(f, slot) in adj {
                let e = msgs.edge(f, slot);
                let m = blend(&msgs.var_to_fac[e], msgs.var_product(graph, v, Some(f)));
                delta = delta.max(max_change(&m, &msgs.var_to_fac[e]));
                next_vf[e] = m;
            }
        }
        msgs.var_to_fac = next_vf;

        let mut next_fv = msgs.fac_to_var.clone();
        for f in 0..graph.factors.len() {
            let inputs = msgs.factor_inputs(graph, f);
            for slot in 0..graph.factors[f].arity() {
                let e = msgs.edge(f, slot);
                let m = blend(&msgs.fac_to_var[e], graph.factor_message(f, slot, &inputs));
                delta = delta.max(max_change(&m, &msgs.fac_to_var[e]));
                next_fv[e] = m;
            }
        }
        msgs.fac_to_var = next_fv;

        if delta < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(msgs.marginals(graph, converged, iterations))
}

fn max_change(a: &Msg, b: &Msg) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Exact marginals by summing over every joint assignment, stabilized with
/// log-sum-exp. Refuses graphs with more than [`MAX_ENUMERATION_VARS`]
/// variables.
pub fn enumerate_marginals(graph: &FactorGraph) -> Result<MarginalSet> {
    let n = graph.variables.len();
    if n > MAX_ENUMERATION_VARS {
        return Err(Error::Input(format!(
            "{n} variables give 3^{n} joint states; the enumerator is limited to 3^{MAX_ENUMERATION_VARS}"
        )));
    }
    let total = DOMAIN.pow(n as u32);
    let mut scores = Vec::with_capacity(total);
    let mut assign = vec![0usize; n];
    for _ in 0..total {
        scores.push(log_score(graph, &assign));
        increment(&mut assign);
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut marg = vec![[0.0; 3]; n];
    let mut assign = vec![0usize; n];
    for s in &scores {
        let w = (s - max).exp();
        for (m, &x) in marg.iter_mut().zip(&assign) {
            m[x] += w;
        }
        increment(&mut assign);
    }
    Ok(MarginalSet {
        marginals: graph
            .variables
            .iter()
            .zip(marg)
            .map(|(v, mut m)| {
                normalize(&mut m);
                (v.id.clone(), m)
            })
            .collect(),
        converged: true,
        iterations: 0,
    })
}

/// Sum of log-potentials for a full assignment (indexed like the variable list).
pub fn log_score(graph: &FactorGraph, assign: &[usize]) -> f64 {
    graph
        .factors
        .iter()
        .map(|f| {
            let idx = f.scope.iter().fold(0, |acc, &v| acc * DOMAIN + assign[v]);
            f.log_potential[idx]
        })
        .sum()
}

/// Odometer increment with the last position fastest.
pub(crate) fn increment(assign: &mut [usize]) {
    for x in assign.iter_mut().rev() {
        *x += 1;
        if *x < DOMAIN {
            return;
        }
        *x = 0;
    }
}

/// Per-variable argmax of the marginals; ties go to the lowest polarity.
pub fn max_marginal_decode(marginals: &MarginalSet) -> BTreeMap<String, Polarity> {
    marginals
        .marginals
        .iter()
        .map(|(k, m)| (k.clone(), Polarity::argmax(m)))
        .collect()
}
