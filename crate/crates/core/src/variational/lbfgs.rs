//! Limited-memory BFGS with a strong-Wolfe line search (Moré–Thuente style
//! bracketing and zoom with safeguarded cubic interpolation).

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iters: usize,
    /// Stop once `‖g‖_∞` falls below this.
    pub grad_tol: f64,
    /// Stop once an iteration changes `f` by less than this, relatively.
    pub rel_tol: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iters: 10_000,
            grad_tol: 1e-8,
            rel_tol: 1e-12,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    GradTol,
    RelTol,
    MaxIters,
    LineSearch,
}

impl Stop {
    pub fn converged(self) -> bool {
        matches!(self, Stop::GradTol | Stop::RelTol)
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iters: usize,
    pub evals: usize,
    pub stop: Stop,
    /// Objective value after each iteration.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Point {
    alpha: f64,
    f: f64,
    d: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

struct Objective<'a, F> {
    f: &'a mut F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> Objective<'_, F> {
    fn at(&mut self, x0: &[f64], p: &[f64], alpha: f64) -> Point {
        let x: Vec<f64> = x0.iter().zip(p).map(|(x, p)| x + alpha * p).collect();
        let (f, g) = (self.f)(&x);
        self.evals += 1;
        Point {
            alpha,
            f,
            d: dot(&g, p),
            x,
            g,
        }
    }
}

fn cubic_min(lo: &Point, hi: &Point) -> Option<f64> {
    let d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
    let disc = d1 * d1 - lo.d * hi.d;
    if disc < 0.0 {
        return None;
    }
    let d2 = (hi.alpha - lo.alpha).signum() * disc.sqrt();
    let a = hi.alpha - (hi.alpha - lo.alpha) * (hi.d + d2 - d1) / (hi.d - lo.d + 2.0 * d2);
    a.is_finite().then_some(a)
}

/// Returns a point satisfying the strong Wolfe conditions, or the best
/// sufficient-decrease point seen, or `None`.
fn line_search<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
    obj: &mut Objective<'_, F>,
    x0: &[f64],
    f0: f64,
    d0: f64,
    p: &[f64],
    alpha0: f64,
    opts: &LbfgsOptions,
) -> Option<Point> {
    const MAX_BRACKET: usize = 40;
    const MAX_ZOOM: usize = 40;
    let armijo = |pt: &Point| pt.f <= f0 + opts.c1 * pt.alpha * d0;
    let curvature = |pt: &Point| pt.d.abs() <= -opts.c2 * d0;

    let mut best: Option<Point> = None;
    let keep = |pt: &Point, best: &mut Option<Point>| {
        if armijo(pt) && best.as_ref().is_none_or(|b| pt.f < b.f) {
            *best = Some(Point {
                alpha: pt.alpha,
                f: pt.f,
                d: pt.d,
                x: pt.x.clone(),
                g: pt.g.clone(),
            });
        }
    };

    let mut prev = Point {
        alpha: 0.0,
        f: f0,
        d: d0,
        x: x0.to_vec(),
        g: Vec::new(),
    };
    let mut alpha = alpha0;
    let bracket = 'outer: {
        for i in 0..MAX_BRACKET {
            let cur = obj.at(x0, p, alpha);
            if !cur.f.is_finite() {
                alpha = 0.5 * (prev.alpha + alpha);
                continue;
            }
            keep(&cur, &mut best);
            if !armijo(&cur) || (i > 0 && cur.f >= prev.f) {
                break 'outer (prev, cur);
            }
            if curvature(&cur) {
                return Some(cur);
            }
            if cur.d >= 0.0 {
                break 'outer (cur, prev);
            }
            prev = cur;
            alpha *= 2.0;
        }
        return best;
    };

    let (mut lo, mut hi) = bracket;
    for _ in 0..MAX_ZOOM {
        let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
        let width = b - a;
        if width <= f64::EPSILON * b.max(1e-300) {
            break;
        }
        let trial = cubic_min(&lo, &hi)
            .filter(|t| *t > a + 0.1 * width && *t < b - 0.1 * width)
            .unwrap_or(0.5 * (a + b));
        let cur = obj.at(x0, p, trial);
        keep(&cur, &mut best);
        if !armijo(&cur) || cur.f >= lo.f {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Some(cur);
            }
            if cur.d * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    best
}

/// A coordinate where the objective has a convex kink at every integer:
/// near an integer `k` it behaves like `smooth(x) + φ(|x_i - k|)` with
/// `φ'(0⁺) = slope`. The objective's gradient must report subgradient 0 there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kink {
    pub index: usize,
    pub slope: f64,
}

/// Steepest-descent direction of a kinked objective (the orthant-wise
/// pseudo-gradient): one-sided derivatives at kinks, `g` elsewhere.
fn pseudo_gradient(x: &[f64], g: &[f64], kinks: &[Kink]) -> Vec<f64> {
    let mut pg = g.to_vec();
    for k in kinks {
        let i = k.index;
        if x[i] == x[i].round() {
            let (right, left) = (g[i] + k.slope, g[i] - k.slope);
            pg[i] = if right < 0.0 {
                right
            } else if left > 0.0 {
                left
            } else {
                0.0
            };
        }
    }
    pg
}

fn two_loop(hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(q, y)| *q -= a * y);
        alphas.push(a);
    }
    let scale = hist
        .back()
        .map(|(s, y, _)| dot(s, y) / dot(y, y))
        .unwrap_or(1.0);
    q.iter_mut().for_each(|q| *q *= scale);
    for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(q, s)| *q += (a - b) * s);
    }
    q.into_iter().map(|v| -v).collect()
}

/// Backtracking search along `p`, projecting kinked coordinates back onto
/// their kink when a step would cross it.
#[allow(clippy::too_many_arguments)]
fn orthant_search<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
    obj: &mut Objective<'_, F>,
    x0: &[f64],
    f0: f64,
    pg: &[f64],
    p: &[f64],
    alpha0: f64,
    kinks: &[Kink],
    opts: &LbfgsOptions,
) -> Option<Point> {
    let sides: Vec<(usize, f64, f64)> = kinks
        .iter()
        .map(|k| {
            let i = k.index;
            let anchor = x0[i].round();
            let side = if x0[i] != anchor {
                (x0[i] - anchor).signum()
            } else {
                -pg[i].signum()
            };
            (i, anchor, side)
        })
        .collect();
    let mut alpha = alpha0;
    for _ in 0..60 {
        let mut x: Vec<f64> = x0.iter().zip(p).map(|(x, p)| x + alpha * p).collect();
        for &(i, anchor, side) in &sides {
            if (x[i] - anchor) * side <= 0.0 {
                x[i] = anchor;
            }
        }
        let (f, g) = (obj.f)(&x);
        obj.evals += 1;
        let decrease: f64 = x
            .iter()
            .zip(x0)
            .zip(pg)
            .map(|((a, b), g)| (a - b) * g)
            .sum();
        if f.is_finite() && f <= f0 + opts.c1 * decrease && decrease < 0.0 {
            return Some(Point {
                alpha,
                f,
                d: 0.0,
                x,
                g,
            });
        }
        alpha *= 0.5;
    }
    None
}

/// Minimizes `f`, which returns the value and gradient at a point.
///
/// Without `kinks` this is L-BFGS with a strong-Wolfe line search. With
/// `kinks` the listed coordinates are handled orthant-wise: directions use the
/// pseudo-gradient, are restricted to its orthant, and the search projects
/// onto kinks instead of stepping across them.
///
/// When a line search fails, `on_stall` may modify the current point and
/// return `true` to restart from it with an empty curvature memory; it is
/// offered each failure until it returns `false`.
pub fn minimize<F, S>(
    x0: Vec<f64>,
    mut f: F,
    opts: &LbfgsOptions,
    kinks: &[Kink],
    mut on_stall: S,
) -> Outcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    S: FnMut(&mut Vec<f64>) -> bool,
{
    let mut obj = Objective {
        f: &mut f,
        evals: 0,
    };
    let mut x = x0;
    let (mut fx, mut g) = (obj.f)(&x);
    obj.evals += 1;
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iters = 0;
    let mut history = Vec::new();

    let stop = loop {
        let pg = pseudo_gradient(&x, &g, kinks);
        if inf_norm(&pg) < opts.grad_tol {
            break Stop::GradTol;
        }
        if iters >= opts.max_iters {
            break Stop::MaxIters;
        }

        let mut p = two_loop(&hist, &pg);
        if !kinks.is_empty() {
            p.iter_mut().zip(&pg).for_each(|(p, g)| {
                if *p * *g >= 0.0 {
                    *p = 0.0;
                }
            });
        }
        let mut d0 = dot(&pg, &p);
        if !(d0 < 0.0) {
            hist.clear();
            p = pg.iter().map(|v| -v).collect();
            d0 = dot(&pg, &p);
        }
        let alpha0 = if hist.is_empty() {
            (1.0 / dot(&p, &p).sqrt()).min(1.0)
        } else {
            1.0
        };

        iters += 1;
        let step = if kinks.is_empty() {
            line_search(&mut obj, &x, fx, d0, &p, alpha0, opts)
        } else {
            orthant_search(&mut obj, &x, fx, &pg, &p, alpha0, kinks, opts)
        };
        match step {
            Some(pt) => {
                let s: Vec<f64> = pt.x.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = pt.g.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
                    if hist.len() == opts.memory {
                        hist.pop_front();
                    }
                    hist.push_back((s, y, 1.0 / sy));
                }
                let change = (fx - pt.f).abs();
                let rel = change <= opts.rel_tol * fx.abs().max(pt.f.abs()).max(f64::MIN_POSITIVE);
                x = pt.x;
                fx = pt.f;
                g = pt.g;
                history.push(fx);
                if rel {
                    break Stop::RelTol;
                }
            }
            None if !hist.is_empty() => hist.clear(),
            None => {
                if on_stall(&mut x) {
                    let (v, gr) = (obj.f)(&x);
                    obj.evals += 1;
                    fx = v;
                    g = gr;
                } else {
                    break Stop::LineSearch;
                }
            }
        }
    };

    Outcome {
        x,
        f: fx,
        grad: g,
        iters,
        evals: obj.evals,
        stop,
        history,
    }
}
