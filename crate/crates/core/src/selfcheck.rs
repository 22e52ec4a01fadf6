//! Built-in numerical checks: tree sum-product against enumeration, and
//! analytic gradients against central finite differences.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::factor_graph::{enumerate_marginals, sum_product_tree, FactorGraph, MAX_ENUMERATION_VARS};
use crate::frame_model::{
    agreement_weights, build_frame_graph_from_evidence, generate_synthetic, AspectEvidence, FrameFactor,
    FrameWeights, PiecewiseObjective,
};
use crate::maxent::MaxEntObjective;
use crate::optim::Objective;
use crate::types::Polarity;

/// Random acyclic graph with `n_vars` variables (1..=12). Factors have
/// arity 1 to 3 and log-potentials uniform in `[-scale, scale]`; the
/// graph may have several components.
pub fn random_tree(rng: &mut impl Rng, n_vars: usize, scale: f64) -> FactorGraph {
    let n_vars = n_vars.clamp(1, MAX_ENUMERATION_VARS);
    let mut g = FactorGraph::new();
    let table = |rng: &mut dyn rand::RngCore, arity: usize| -> Vec<f64> {
        (0..3usize.pow(arity as u32))
            .map(|_| rng.gen_range(-scale..=scale))
            .collect()
    };
    g.add_variable("v00").expect("fresh graph");
    let mut n = 1;
    let mut k = 0;
    while n < n_vars {
        let new = rng.gen_range(1..=2).min(n_vars - n);
        // occasionally start a new component instead of attaching
        let attach = rng.gen_bool(0.9);
        let mut scope: Vec<usize> = Vec::new();
        if attach {
            scope.push(rng.gen_range(0..n));
        }
        for _ in 0..new {
            scope.push(g.add_variable(format!("v{n:02}")).expect("unique id"));
            n += 1;
        }
        scope.shuffle(rng);
        let t = table(rng, scope.len());
        g.add_factor_by_index(format!("f{k}"), scope, t).expect("valid factor");
        k += 1;
    }
    for v in 0..n {
        if rng.gen_bool(0.6) {
            let t = table(rng, 1);
            g.add_factor_by_index(format!("u{v}"), vec![v], t).expect("valid factor");
        }
    }
    g
}

/// Random complete frame graph with weights uniform in `[-scale, scale]`.
pub fn random_frame_graph(rng: &mut impl Rng, scale: f64) -> FactorGraph {
    let mut w = FrameWeights::zeros();
    for f in FrameFactor::all() {
        for v in w.table_mut(f) {
            *v = rng.gen_range(-scale..=scale);
        }
    }
    let mut labels = [Polarity::Neutral; 9];
    for l in labels.iter_mut() {
        *l = Polarity::ALL[rng.gen_range(0..3)];
    }
    build_frame_graph_from_evidence(&AspectEvidence::from_labels(labels), &w).expect("frame graph is a tree")
}

/// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)` over
/// all coordinates, with central differences of step `h`.
pub fn max_relative_gradient_error<F>(f: F, x: &[f64], h: f64, floor: f64) -> f64
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (_, g) = f(x);
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f(&xp).0;
        xp[i] = x[i] - h;
        let fm = f(&xp).0;
        xp[i] = x[i];
        let num = (fp - fm) / (2.0 * h);
        let denom = g[i].abs().max(num.abs()).max(floor);
        worst = worst.max((g[i] - num).abs() / denom);
    }
    worst
}

/// Relative-error floor used by the gradient checks.
pub const GRADIENT_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs the BP and gradient checks with the given seed.
pub fn run(seed: u64) -> Vec<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=MAX_ENUMERATION_VARS);
        let g = random_tree(&mut rng, n, 2.0);
        let bp = sum_product_tree(&g).expect("generated graph is a tree");
        let ex = enumerate_marginals(&g).expect("within guard");
        worst = worst.max(bp.max_abs_diff(&ex));
    }
    let g = random_frame_graph(&mut rng, 2.0);
    let frame_err = sum_product_tree(&g)
        .expect("tree")
        .max_abs_diff(&enumerate_marginals(&g).expect("9 variables"));
    worst = worst.max(frame_err);
    lines.push(CheckLine {
        name: "tree sum-product vs enumeration".into(),
        passed: worst < 1e-9,
        detail: format!("max abs error {worst:.3e} (limit 1e-9)"),
    });

    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let dim = rng.gen_range(1..=4);
        let n = rng.gen_range(3..=10);
        let feats: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                v.push(1.0);
                v
            })
            .collect();
        let labels: Vec<Polarity> = (0..n).map(|_| Polarity::ALL[rng.gen_range(0..3)]).collect();
        let cw = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
        let obj = MaxEntObjective::new(feats, labels, cw, 0.7).expect("consistent shapes");
        let x: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(max_relative_gradient_error(
            |w| obj.value_and_gradient(w),
            &x,
            1e-5,
            GRADIENT_FLOOR,
        ));
    }
    lines.push(CheckLine {
        name: "aspect-model gradient vs finite differences".into(),
        passed: worst < 1e-4,
        detail: format!("max relative error {worst:.3e} (limit 1e-4)"),
    });

    let data = generate_synthetic(&agreement_weights(1.0), 40, seed, 0.2).expect("valid noise");
    let mut worst: f64 = 0.0;
    for f in FrameFactor::all() {
        let obj = PiecewiseObjective {
            factor: f,
            data: &data,
            l2: 0.05,
        };
        let x: Vec<f64> = (0..f.n_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(max_relative_gradient_error(
            |t| obj.value_and_gradient(t),
            &x,
            1e-5,
            GRADIENT_FLOOR,
        ));
    }
    lines.push(CheckLine {
        name: "piecewise factor gradients vs finite differences".into(),
        passed: worst < 1e-4,
        detail: format!("max relative error {worst:.3e} (limit 1e-4)"),
    });
    lines
}
