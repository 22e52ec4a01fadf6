//! Batch minimizers for smooth objectives: limited-memory BFGS with a strong
//! Wolfe line search, and plain gradient descent with backtracking.
//!
//! Every accepted step satisfies the sufficient-decrease condition, so the
//! recorded loss trace is non-increasing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// A differentiable function of a flat parameter vector.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Lbfgs,
    GradientDescent,
}

#[derive(Clone, Debug)]
pub struct OptimConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Stop once the infinity norm of the gradient falls below this.
    pub grad_tol: f64,
    pub memory: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            method: Method::Lbfgs,
            max_iters: 500,
            grad_tol: 1e-6,
            memory: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value at the start and after every accepted iteration.
    pub loss_trace: Vec<f64>,
    /// Iterations where the Wolfe search failed and a gradient step was used.
    pub fallbacks: usize,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_EVALS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn step(x: &[f64], d: &[f64], a: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

struct Point {
    a: f64,
    f: f64,
    dphi: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

fn eval<O: Objective + ?Sized>(obj: &O, x: &[f64], d: &[f64], a: f64) -> Point {
    let xn = step(x, d, a);
    let (f, g) = obj.value_and_gradient(&xn);
    let dphi = dot(&g, d);
    Point {
        a,
        f,
        dphi,
        x: xn,
        g,
    }
}

fn interpolate(lo: &Point, hi: &Point) -> f64 {
    let (a_lo, a_hi) = (lo.a, hi.a);
    let d1 = lo.dphi + hi.dphi - 3.0 * (lo.f - hi.f) / (a_lo - a_hi);
    let disc = d1 * d1 - lo.dphi * hi.dphi;
    let (left, right) = (a_lo.min(a_hi), a_lo.max(a_hi));
    let width = right - left;
    let mid = 0.5 * (a_lo + a_hi);
    if disc < 0.0 {
        return mid;
    }
    let d2 = (a_hi - a_lo).signum() * disc.sqrt();
    let a = a_hi - (a_hi - a_lo) * (hi.dphi + d2 - d1) / (hi.dphi - lo.dphi + 2.0 * d2);
    if a.is_finite() && a > left + 0.1 * width && a < right - 0.1 * width {
        a
    } else {
        mid
    }
}

enum Search {
    /// Strong Wolfe conditions hold.
    Wolfe(Point),
    /// Only sufficient decrease holds.
    Armijo(Point),
    Failed,
}

fn strong_wolfe<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    a_init: f64,
) -> Search {
    let dphi0 = dot(g0, d);
    if !(dphi0 < 0.0) {
        return Search::Failed;
    }
    let armijo = |p: &Point| p.f.is_finite() && p.f <= f0 + C1 * p.a * dphi0;
    let curvature = |p: &Point| p.dphi.abs() <= -C2 * dphi0;

    let zoom = |mut lo: Point, mut hi: Point, evals: &mut usize| -> Search {
        while *evals < MAX_EVALS {
            *evals += 1;
            let a = interpolate(&lo, &hi);
            if !(a > 0.0) || (hi.a - lo.a).abs() < 1e-16 {
                break;
            }
            let p = eval(obj, x, d, a);
            if !armijo(&p) || p.f >= lo.f {
                hi = p;
            } else {
                if curvature(&p) {
                    return Search::Wolfe(p);
                }
                if p.dphi * (hi.a - lo.a) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
        if lo.a > 0.0 && lo.f < f0 {
            Search::Armijo(lo)
        } else {
            Search::Failed
        }
    };

    let mut prev = Point {
        a: 0.0,
        f: f0,
        dphi: dphi0,
        x: x.to_vec(),
        g: g0.to_vec(),
    };
    let mut a = a_init;
    let mut evals = 0;
    while evals < MAX_EVALS {
        evals += 1;
        let p = eval(obj, x, d, a);
        if !armijo(&p) || (evals > 1 && p.f >= prev.f) {
            return zoom(prev, p, &mut evals);
        }
        if curvature(&p) {
            return Search::Wolfe(p);
        }
        if p.dphi >= 0.0 {
            return zoom(p, prev, &mut evals);
        }
        a = (2.0 * a).min(1e10);
        prev = p;
    }
    if prev.a > 0.0 {
        Search::Armijo(prev)
    } else {
        Search::Failed
    }
}

fn backtracking<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    a_init: f64,
) -> Option<Point> {
    let dphi0 = dot(g0, d);
    if !(dphi0 < 0.0) {
        return None;
    }
    let mut a = a_init;
    for _ in 0..60 {
        let p = eval(obj, x, d, a);
        if p.f.is_finite() && p.f <= f0 + C1 * a * dphi0 {
            return Some(p);
        }
        a *= 0.5;
    }
    None
}

/// Minimizes `obj` from `x0`.
pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &OptimConfig) -> OptimResult {
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut fallbacks = 0;
    let mut last_step: f64 = 1.0;
    let mut converged = inf_norm(&g) < cfg.grad_tol;
    let mut iterations = 0;

    while !converged && iterations < cfg.max_iters {
        let gd_dir: Vec<f64> = g.iter().map(|v| -v).collect();
        let accepted = match cfg.method {
            Method::Lbfgs => {
                let d = lbfgs_direction(&g, &history);
                let a_init = if history.is_empty() {
                    (1.0 / inf_norm(&g).max(1e-12)).min(1.0)
                } else {
                    1.0
                };
                match strong_wolfe(obj, &x, f, &g, &d, a_init) {
                    Search::Wolfe(p) | Search::Armijo(p) => Some(p),
                    Search::Failed => {
                        fallbacks += 1;
                        history.clear();
                        backtracking(obj, &x, f, &g, &gd_dir, last_step.max(1e-8))
                    }
                }
            }
            Method::GradientDescent => {
                backtracking(obj, &x, f, &g, &gd_dir, (2.0 * last_step).min(1e6))
            }
        };
        let Some(p) = accepted else {
            break;
        };
        iterations += 1;
        last_step = p.a;
        let s: Vec<f64> = p.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = p.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if cfg.method == Method::Lbfgs && sy > 1e-12 * dot(&y, &y).max(f64::MIN_POSITIVE) {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > cfg.memory.max(1) {
                history.pop_front();
            }
        }
        x = p.x;
        f = p.f;
        g = p.g;
        trace.push(f);
        converged = inf_norm(&g) < cfg.grad_tol;
    }

    OptimResult {
        x,
        value: f,
        iterations,
        converged,
        loss_trace: trace,
        fallbacks,
    }
}

fn lbfgs_direction(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            (f, g)
        }
    }

    struct Quadratic(Vec<f64>);

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
            let f = x
                .iter()
                .zip(&self.0)
                .map(|(xi, ci)| ci * (xi - 1.0).powi(2))
                .sum::<f64>();
            let g = x
                .iter()
                .zip(&self.0)
                .map(|(xi, ci)| 2.0 * ci * (xi - 1.0))
                .collect();
            (f, g)
        }
    }

    fn assert_monotone(trace: &[f64]) {
        for w in trace.windows(2) {
            assert!(w[1] <= w[0], "loss increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn lbfgs_solves_rosenbrock() {
        let r = minimize(&Rosenbrock, &[-1.2, 1.0], &OptimConfig::default());
        assert!(r.converged, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
        assert_monotone(&r.loss_trace);
    }

    #[test]
    fn gradient_descent_solves_quadratic() {
        let cfg = OptimConfig {
            method: Method::GradientDescent,
            max_iters: 5000,
            ..OptimConfig::default()
        };
        let r = minimize(&Quadratic(vec![1.0, 3.0, 0.5]), &[0.0; 3], &cfg);
        assert!(r.converged);
        assert_monotone(&r.loss_trace);
    }

    #[test]
    fn zero_iterations_leaves_start() {
        let cfg = OptimConfig {
            max_iters: 0,
            ..OptimConfig::default()
        };
        let r = minimize(&Quadratic(vec![1.0]), &[3.0], &cfg);
        assert_eq!(r.x, vec![3.0]);
        assert_eq!(r.iterations, 0);
    }
}
