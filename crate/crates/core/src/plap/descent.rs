//! Projected descent with a backtracking (Armijo) line search.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// How the search direction is formed from the gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Direction {
    /// Negative gradient with the fixed initial trial step every iteration.
    Steepest,
    /// Limited-memory BFGS two-loop recursion over the last `memory` steps.
    Lbfgs { memory: usize },
}

pub(crate) trait Objective {
    /// Value at `x`, with the gradient written into `grad`.
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
}

pub(crate) struct DescentConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub initial_step: f64,
    pub direction: Direction,
    /// Gradient norm the tolerance is relative to; the start's own when `None`.
    pub grad_ref: Option<f64>,
}

pub(crate) struct DescentOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the projected seed.
    pub history: Vec<f64>,
    pub clip_events: usize,
}

const MAX_BACKTRACKS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lbfgs_direction(g: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, out: &mut Vec<f64>) {
    out.clear();
    out.extend(g.iter().map(|v| -v));
    let mut alpha = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, out);
        for (o, yi) in out.iter_mut().zip(y) {
            *o -= a * yi;
        }
        alpha.push(a);
    }
    if let Some((s, y, _)) = mem.back() {
        let gamma = dot(s, y) / dot(y, y);
        out.iter_mut().for_each(|o| *o *= gamma);
    }
    for ((s, y, rho), a) in mem.iter().zip(alpha.iter().rev()) {
        let b = rho * dot(y, out);
        for (o, si) in out.iter_mut().zip(s) {
            *o += (a - b) * si;
        }
    }
}

/// Minimizes `obj` from `x0`; `project` maps trial points back onto the feasible
/// set and returns how many components it clipped.
pub(crate) fn minimize<O: Objective>(
    obj: &mut O,
    x0: Vec<f64>,
    cfg: &DescentConfig,
    mut project: impl FnMut(&mut [f64]) -> usize,
) -> DescentOutcome {
    let n = x0.len();
    let mut x = x0;
    let mut clip_events = project(&mut x);
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, &mut g);
    let g0 = dot(&g, &g).sqrt();
    let g_ref = cfg.grad_ref.unwrap_or(g0);
    let mut history = vec![f];
    let memory = match cfg.direction {
        Direction::Lbfgs { memory } => memory,
        Direction::Steepest => 0,
    };
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    let mut d = Vec::with_capacity(n);
    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut iterations = 0;
    let mut gnorm = g0;
    let mut converged = g0 <= cfg.grad_tol * g_ref || !f.is_finite();

    while !converged && iterations < cfg.max_iters {
        if mem.is_empty() {
            d.clear();
            d.extend(g.iter().map(|v| -v));
        } else {
            lbfgs_direction(&g, &mem, &mut d);
            if dot(&g, &d) >= 0.0 {
                mem.clear();
                d.clear();
                d.extend(g.iter().map(|v| -v));
            }
        }
        let mut t = if mem.is_empty() { cfg.initial_step } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for ((xi, x), di) in xt.iter_mut().zip(&x).zip(&d) {
                *xi = x + t * di;
            }
            let clipped = project(&mut xt);
            let ft = obj.eval(&xt, &mut gt);
            let decrease: f64 = g.iter().zip(xt.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if ft.is_finite() && decrease < 0.0 && ft <= f + cfg.armijo * decrease {
                accepted = Some((ft, clipped));
                break;
            }
            t *= cfg.backtrack;
        }

        let Some((ft, clipped)) = accepted else {
            if mem.is_empty() {
                // no descent left along the gradient at working precision
                break;
            }
            mem.clear();
            continue;
        };
        iterations += 1;
        clip_events += clipped;

        if memory > 0 {
            let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                if mem.len() == memory {
                    mem.pop_front();
                }
                mem.push_back((s, y, 1.0 / sy));
            }
        }
        std::mem::swap(&mut x, &mut xt);
        std::mem::swap(&mut g, &mut gt);
        f = ft;
        history.push(f);
        gnorm = dot(&g, &g).sqrt();
        converged = gnorm <= cfg.grad_tol * g_ref;
    }

    DescentOutcome { x, f, grad_norm: gnorm, iterations, converged, history, clip_events }
}
