use super::bracket::{bracket_core, Bracket, BracketOutcome};
use super::{OptimError, SearchReport};

const CGOLD: f64 = 0.381_966_011_250_105_1;

/// Minimize `f` inside `bracket` with Brent's parabolic interpolation,
/// falling back to golden-section steps.
///
/// Every evaluation lies in `[bracket.a, bracket.c]`. `f(bracket.b)` is
/// re-evaluated, so `evaluations >= iterations >= 1`.
pub fn brent_min<F>(mut f: F, bracket: &Bracket, x_tol: f64, max_iter: usize) -> Result<SearchReport<f64>, OptimError>
where
    F: FnMut(f64) -> f64,
{
    check_tol(x_tol)?;
    check_bracket(bracket)?;
    Ok(brent_core(|x| Some(f(x)), bracket, None, x_tol, max_iter.max(1)))
}

/// Bracket from `x0` then refine; a minimum on a bound is returned as is.
pub fn minimize_bounded<F>(
    mut f: F,
    x0: f64,
    step: f64,
    bounds: (f64, f64),
    x_tol: f64,
    max_iter: usize,
) -> Result<SearchReport<f64>, OptimError>
where
    F: FnMut(f64) -> f64,
{
    minimize_bounded_ctl(|x| Some(f(x)), x0, step, bounds, x_tol, max_iter)
}

/// [`minimize_bounded`] with an objective that may stop the search by
/// returning `None`; the best point seen so far is reported with
/// `aborted = true`.
pub fn minimize_bounded_ctl<F>(
    mut f: F,
    x0: f64,
    step: f64,
    bounds: (f64, f64),
    x_tol: f64,
    max_iter: usize,
) -> Result<SearchReport<f64>, OptimError>
where
    F: FnMut(f64) -> Option<f64>,
{
    check_tol(x_tol)?;
    let mut evals = 0usize;
    let mut counted = |x: f64| {
        evals += 1;
        f(x)
    };
    let outcome = bracket_core(&mut counted, x0, None, step, bounds)?;
    let bracket_evals = outcome.evaluations();
    let report = match outcome {
        BracketOutcome::Interior { bracket, .. } => {
            let mut r = brent_core(&mut counted, &bracket, Some(bracket.fb), x_tol, max_iter.max(1));
            r.evaluations += bracket_evals;
            r
        }
        BracketOutcome::Boundary { x, fx, .. } => SearchReport {
            argmin: x,
            min_value: fx,
            evaluations: bracket_evals,
            iterations: 1,
            converged: true,
            aborted: false,
        },
        BracketOutcome::Aborted { x, fx, .. } => SearchReport {
            argmin: x,
            min_value: fx,
            evaluations: bracket_evals,
            iterations: 1,
            converged: false,
            aborted: true,
        },
    };
    debug_assert_eq!(report.evaluations, evals);
    Ok(report)
}

fn check_tol(x_tol: f64) -> Result<(), OptimError> {
    if x_tol > 0.0 && x_tol.is_finite() {
        Ok(())
    } else {
        Err(OptimError::InvalidTolerance(x_tol))
    }
}

fn check_bracket(br: &Bracket) -> Result<(), OptimError> {
    if br.a < br.b && br.b < br.c && br.fb <= br.fa && br.fb <= br.fc {
        Ok(())
    } else {
        Err(OptimError::InvalidBracket {
            a: br.a,
            b: br.b,
            c: br.c,
        })
    }
}

pub(crate) fn brent_core<F>(
    mut f: F,
    br: &Bracket,
    fb_known: Option<f64>,
    x_tol: f64,
    max_iter: usize,
) -> SearchReport<f64>
where
    F: FnMut(f64) -> Option<f64>,
{
    let (mut a, mut b) = (br.a, br.c);
    let mut evaluations = 0usize;
    let mut x = br.b;
    let mut fx = match fb_known {
        Some(v) => v,
        None => {
            evaluations += 1;
            match f(x) {
                Some(v) => nan_high(v),
                None => return SearchReport::aborted(x, br.fb, 1, 0),
            }
        }
    };
    let (mut w, mut v) = (x, x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let tol1 = x_tol / 3.0;
    let tol2 = 2.0 * tol1;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let xm = 0.5 * (a + b);
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            converged = true;
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if !(p.abs() >= (0.5 * q * e_prev).abs() || p <= q * (a - x) || p >= q * (b - x)) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let u = u.clamp(a, b);
        evaluations += 1;
        let fu = match f(u) {
            Some(v) => nan_high(v),
            None => return SearchReport::aborted(x, fx, evaluations, iterations),
        };
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    SearchReport {
        argmin: x,
        min_value: fx,
        evaluations,
        iterations,
        converged,
        aborted: false,
    }
}

pub(crate) fn nan_high(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}
