use serde::{Deserialize, Serialize};

use super::brent::nan_high;
use super::OptimError;

const GOLD: f64 = 1.618_033_988_749_895;
const MAX_EXPANSIONS: usize = 64;
/// Fraction of the last interval probed just inside a bound before a
/// boundary minimum is declared.
const BOUND_PROBE: f64 = 1e-3;

/// Three abscissae `a < b < c` with `f(b) <= f(a)` and `f(b) <= f(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub fa: f64,
    pub fb: f64,
    pub fc: f64,
}

impl Bracket {
    /// Build from three evaluated points in any order.
    pub fn from_points(p: [(f64, f64); 3]) -> Result<Self, OptimError> {
        let mut p = p;
        p.sort_by(|x, y| x.0.total_cmp(&y.0));
        let [(a, fa), (b, fb), (c, fc)] = p;
        if !(a < b && b < c) || !(fb <= fa && fb <= fc) {
            return Err(OptimError::InvalidBracket { a, b, c });
        }
        Ok(Self { a, b, c, fa, fb, fc })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BracketOutcome {
    /// An interior minimum is enclosed.
    Interior { bracket: Bracket, evaluations: usize },
    /// `f` keeps decreasing up to a bound (or is monotone over the range);
    /// the bound is the constrained minimizer.
    Boundary { x: f64, fx: f64, evaluations: usize },
    /// The objective asked to stop before a bracket was found.
    Aborted { x: f64, fx: f64, evaluations: usize },
}

impl BracketOutcome {
    pub fn evaluations(&self) -> usize {
        match *self {
            BracketOutcome::Interior { evaluations, .. }
            | BracketOutcome::Boundary { evaluations, .. }
            | BracketOutcome::Aborted { evaluations, .. } => evaluations,
        }
    }
}

/// Bracket a minimum of `f` by golden-ratio expansion from `x0` inside
/// `bounds`.
pub fn bracket_minimum<F>(mut f: F, x0: f64, step: f64, bounds: (f64, f64)) -> Result<BracketOutcome, OptimError>
where
    F: FnMut(f64) -> f64,
{
    bracket_core(|x| Some(f(x)), x0, None, step, bounds)
}

/// Bracketing with an abortable objective (`None` stops the search) and an
/// optional already-known `f(x0)`.
// The best-point bookkeeping in `eval!` is dead on paths that return a bracket.
#[allow(unused_assignments)]
pub(crate) fn bracket_core<F>(
    mut f: F,
    x0: f64,
    f0: Option<f64>,
    step: f64,
    bounds: (f64, f64),
) -> Result<BracketOutcome, OptimError>
where
    F: FnMut(f64) -> Option<f64>,
{
    let (lo, hi) = bounds;
    if !(step > 0.0) || !step.is_finite() {
        return Err(OptimError::InvalidStep(step));
    }
    if !(lo < hi) || !(lo..=hi).contains(&x0) {
        return Err(OptimError::InvalidBounds { lo, hi, x0 });
    }
    let clamp = |x: f64| x.clamp(lo, hi);
    let mut evals = 0usize;
    let mut best = (x0, f64::INFINITY);
    macro_rules! eval {
        ($x:expr) => {{
            let x = $x;
            evals += 1;
            match f(x).map(nan_high) {
                Some(v) => {
                    if v < best.1 {
                        best = (x, v);
                    }
                    v
                }
                None => {
                    return Ok(BracketOutcome::Aborted {
                        x: best.0,
                        fx: best.1,
                        evaluations: evals,
                    })
                }
            }
        }};
    }

    // `b` is on a bound with f(b) <= f(a): probe just inside the bound to
    // tell a boundary minimum from an interior one between a and b.
    macro_rules! settle {
        ($a:expr, $fa:expr, $b:expr, $fb:expr) => {{
            let (a, fa, b, fb) = ($a, $fa, $b, $fb);
            let m = b + BOUND_PROBE * (a - b);
            let fm = eval!(m);
            if fm < fb && m != b {
                let bracket = Bracket::from_points([(a, fa), (m, fm), (b, fb)])?;
                return Ok(BracketOutcome::Interior {
                    bracket,
                    evaluations: evals,
                });
            }
            return Ok(BracketOutcome::Boundary {
                x: b,
                fx: fb,
                evaluations: evals,
            });
        }};
    }

    let fx0 = match f0 {
        Some(v) => {
            best = (x0, v);
            v
        }
        None => eval!(x0),
    };

    // Probe both sides of x0 for a strictly downhill direction.
    let up = clamp(x0 + step);
    let f_up = if up != x0 { Some(eval!(up)) } else { None };
    let (mut a, mut fa, mut b, mut fb) = match f_up {
        Some(fu) if fu < fx0 => (x0, fx0, up, fu),
        _ => {
            let down = clamp(x0 - step);
            // x0 sits on the lower bound with no descent upward.
            if down == x0 {
                let fu = f_up.expect("lo < hi so one side is free");
                settle!(up, fu, x0, fx0);
            }
            let f_down = eval!(down);
            if f_down < fx0 {
                (x0, fx0, down, f_down)
            } else {
                match f_up {
                    Some(fu) => {
                        return Ok(BracketOutcome::Interior {
                            bracket: Bracket {
                                a: down,
                                b: x0,
                                c: up,
                                fa: f_down,
                                fb: fx0,
                                fc: fu,
                            },
                            evaluations: evals,
                        })
                    }
                    // x0 on the upper bound, no descent downward.
                    None => settle!(down, f_down, x0, fx0),
                }
            }
        }
    };

    for _ in 0..MAX_EXPANSIONS {
        let c = clamp(b + GOLD * (b - a));
        if c == b {
            settle!(a, fa, b, fb);
        }
        let fc = eval!(c);
        if fc > fb {
            let bracket = Bracket::from_points([(a, fa), (b, fb), (c, fc)])?;
            return Ok(BracketOutcome::Interior {
                bracket,
                evaluations: evals,
            });
        }
        a = b;
        fa = fb;
        b = c;
        fb = fc;
    }
    Ok(BracketOutcome::Boundary {
        x: b,
        fx: fb,
        evaluations: evals,
    })
}
