use serde::{Deserialize, Serialize};

use super::bracket::{bracket_core, BracketOutcome};
use super::brent::{brent_core, nan_high};
use super::{OptimError, SearchReport};

/// Half-width of the line-search range along an unbounded coordinate.
const UNBOUNDED_REACH: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowellOptions {
    /// Converged when one full sweep moves no coordinate by more than this.
    pub x_tol: f64,
    pub max_iter: usize,
    /// First bracketing step of every line search.
    pub initial_step: f64,
    /// Per-coordinate box; `None` means unbounded.
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl Default for PowellOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-6,
            max_iter: 200,
            initial_step: 0.5,
            bounds: None,
        }
    }
}

/// Derivative-free minimization with Powell's conjugate direction set.
///
/// The direction set is reset to the coordinate axes every `n + 1`
/// iterations so it cannot collapse onto a subspace.
pub fn powell_min<F>(mut f: F, x0: &[f64], opts: &PowellOptions) -> Result<SearchReport<Vec<f64>>, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    powell_min_ctl(|x| Some(f(x)), x0, opts)
}

/// [`powell_min`] with an objective that may stop the search by returning
/// `None`.
pub fn powell_min_ctl<F>(f: F, x0: &[f64], opts: &PowellOptions) -> Result<SearchReport<Vec<f64>>, OptimError>
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    powell_min_monitored(f, x0, opts, |_, _| true)
}

/// [`powell_min_ctl`] that also calls `monitor(iteration, best_value)` after
/// every non-final iteration; returning `false` aborts the search.
pub fn powell_min_monitored<F, M>(
    f: F,
    x0: &[f64],
    opts: &PowellOptions,
    mut monitor: M,
) -> Result<SearchReport<Vec<f64>>, OptimError>
where
    F: FnMut(&[f64]) -> Option<f64>,
    M: FnMut(usize, f64) -> bool,
{
    let n = x0.len();
    if n == 0 {
        return Err(OptimError::EmptyStart);
    }
    if !(opts.x_tol > 0.0 && opts.x_tol.is_finite()) {
        return Err(OptimError::InvalidTolerance(opts.x_tol));
    }
    if !(opts.initial_step > 0.0 && opts.initial_step.is_finite()) {
        return Err(OptimError::InvalidStep(opts.initial_step));
    }
    let bounds: Vec<(f64, f64)> = match &opts.bounds {
        Some(b) if b.len() != n => {
            return Err(OptimError::DimensionMismatch {
                expected: n,
                found: b.len(),
            })
        }
        Some(b) => {
            for (i, &(lo, hi)) in b.iter().enumerate() {
                if !(lo < hi) || !(lo..=hi).contains(&x0[i]) {
                    return Err(OptimError::InvalidBounds { lo, hi, x0: x0[i] });
                }
            }
            b.clone()
        }
        None => vec![(f64::NEG_INFINITY, f64::INFINITY); n],
    };

    let mut run = Run {
        f,
        evaluations: 0,
        best: (x0.to_vec(), f64::INFINITY),
        bounds,
        step: opts.initial_step,
        line_tol: opts.x_tol / 4.0,
    };
    let mut x = x0.to_vec();
    let Some(mut fx) = run.eval(&x) else {
        return Ok(run.finish(0, false, true));
    };
    let mut dirs = axes(n);
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let (x_start, f_start) = (x.clone(), fx);
        let (mut big_drop, mut big_i) = (0.0, 0);
        for (i, d) in dirs.iter().enumerate() {
            let Some((nx, nf)) = run.line_min(&x, fx, d) else {
                return Ok(run.finish(iterations, false, true));
            };
            if fx - nf > big_drop {
                big_drop = fx - nf;
                big_i = i;
            }
            (x, fx) = (nx, nf);
        }
        let moved = x.iter().zip(&x_start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if moved <= opts.x_tol {
            return Ok(run.finish(iterations, true, false));
        }
        if iterations % (n + 1) == 0 {
            dirs = axes(n);
            if !monitor(iterations, run.best.1) {
                return Ok(run.finish(iterations, false, true));
            }
            continue;
        }
        let extrap: Vec<f64> = x
            .iter()
            .zip(&x_start)
            .zip(&run.bounds)
            .map(|((a, b), &(lo, hi))| (2.0 * a - b).clamp(lo, hi))
            .collect();
        let Some(f_ext) = run.eval(&extrap) else {
            return Ok(run.finish(iterations, false, true));
        };
        if f_ext < f_start {
            let t = 2.0 * (f_start - 2.0 * fx + f_ext) * (f_start - fx - big_drop).powi(2)
                - big_drop * (f_start - f_ext).powi(2);
            if t < 0.0 {
                let mut new_dir: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
                let norm = new_dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                new_dir.iter_mut().for_each(|v| *v /= norm);
                let Some((nx, nf)) = run.line_min(&x, fx, &new_dir) else {
                    return Ok(run.finish(iterations, false, true));
                };
                (x, fx) = (nx, nf);
                dirs[big_i] = dirs[n - 1].clone();
                dirs[n - 1] = new_dir;
            }
        }
        if !monitor(iterations, run.best.1) {
            return Ok(run.finish(iterations, false, true));
        }
    }
    Ok(run.finish(iterations, false, false))
}

fn axes(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

struct Run<F> {
    f: F,
    evaluations: usize,
    best: (Vec<f64>, f64),
    bounds: Vec<(f64, f64)>,
    step: f64,
    line_tol: f64,
}

impl<F: FnMut(&[f64]) -> Option<f64>> Run<F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        self.evaluations += 1;
        let v = nan_high((self.f)(x)?);
        if v < self.best.1 {
            self.best = (x.to_vec(), v);
        }
        Some(v)
    }

    fn point(&self, x: &[f64], d: &[f64], t: f64) -> Vec<f64> {
        x.iter()
            .zip(d)
            .zip(&self.bounds)
            .map(|((xi, di), &(lo, hi))| (xi + t * di).clamp(lo, hi))
            .collect()
    }

    /// Feasible range of `t` for `x + t·d` inside the box.
    fn t_range(&self, x: &[f64], d: &[f64]) -> (f64, f64) {
        let (mut lo_t, mut hi_t) = (-UNBOUNDED_REACH, UNBOUNDED_REACH);
        for ((xi, di), &(lo, hi)) in x.iter().zip(d).zip(&self.bounds) {
            if *di == 0.0 {
                continue;
            }
            let (p, q) = ((lo - xi) / di, (hi - xi) / di);
            lo_t = lo_t.max(p.min(q));
            hi_t = hi_t.min(p.max(q));
        }
        (lo_t.min(0.0), hi_t.max(0.0))
    }

    /// Minimize along `d` from `x`; `None` if the objective aborted. The
    /// returned point is never worse than `(x, fx)`.
    fn line_min(&mut self, x: &[f64], fx: f64, d: &[f64]) -> Option<(Vec<f64>, f64)> {
        let (lo_t, hi_t) = self.t_range(x, d);
        if !(hi_t > lo_t) {
            return Some((x.to_vec(), fx));
        }
        let (step, tol) = (self.step, self.line_tol);
        let mut g = |t: f64| {
            let p = self.point(x, d, t);
            self.eval(&p)
        };
        let outcome = bracket_core(&mut g, 0.0, Some(fx), step, (lo_t, hi_t)).ok()?;
        let (t, ft) = match outcome {
            BracketOutcome::Interior { bracket, .. } => {
                let r = brent_core(&mut g, &bracket, Some(bracket.fb), tol, 200);
                if r.aborted {
                    return None;
                }
                (r.argmin, r.min_value)
            }
            BracketOutcome::Boundary { x: t, fx: ft, .. } => (t, ft),
            BracketOutcome::Aborted { .. } => return None,
        };
        if ft < fx {
            Some((self.point(x, d, t), ft))
        } else {
            Some((x.to_vec(), fx))
        }
    }

    fn finish(self, iterations: usize, converged: bool, aborted: bool) -> SearchReport<Vec<f64>> {
        SearchReport {
            argmin: self.best.0,
            min_value: self.best.1,
            evaluations: self.evaluations,
            iterations,
            converged,
            aborted,
        }
    }
}
