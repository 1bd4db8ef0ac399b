//! Derivative-free one-dimensional minimization on an open interval.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 − 1)/2

/// A triple `a < b < c` with `f(b) ≤ min(f(a), f(c))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub fb: f64,
}

/// Finds a bracketing triple for a function that tends to +∞ at both ends of
/// the open interval `(lo, hi)`. Either endpoint may be infinite.
///
/// Moves towards a finite endpoint halve the remaining distance; moves
/// towards an infinite endpoint double the step.
pub fn bracket_minimum<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    start: f64,
    max_expansions: usize,
) -> Result<Bracket>
where
    F: FnMut(f64) -> f64,
{
    if !(start > lo && start < hi) {
        return Err(Error::Domain(format!(
            "bracket start {start} outside ({lo}, {hi})"
        )));
    }
    let scale = 0.25 * start.abs().max(1.0);
    let step_towards = |x: f64, up: bool, step: f64| -> f64 {
        let end = if up { hi } else { lo };
        if end.is_finite() {
            x + 0.5 * (end - x)
        } else if up {
            x + step
        } else {
            x - step
        }
    };

    let f0 = f(start);
    let up_x = step_towards(start, true, scale);
    let down_x = step_towards(start, false, scale);
    let f_up = f(up_x);
    let f_down = f(down_x);
    if f0 <= f_up && f0 <= f_down {
        return Ok(Bracket {
            a: down_x,
            b: start,
            c: up_x,
            fb: f0,
        });
    }
    let up = f_up < f_down;
    let (mut prev, mut cur, mut f_cur) = if up {
        (start, up_x, f_up)
    } else {
        (start, down_x, f_down)
    };
    let mut step = 2.0 * scale;
    for _ in 0..max_expansions {
        let next = step_towards(cur, up, step);
        step *= 2.0;
        if next == cur {
            break;
        }
        let f_next = f(next);
        if f_next >= f_cur {
            let (a, c) = if up { (prev, next) } else { (next, prev) };
            return Ok(Bracket {
                a,
                b: cur,
                c,
                fb: f_cur,
            });
        }
        prev = cur;
        cur = next;
        f_cur = f_next;
    }
    Err(Error::Convergence(format!(
        "no bracketing triple within {max_expansions} expansions on ({lo}, {hi})"
    )))
}

/// Golden-section search inside a bracket until `c − a ≤ xtol·max(1, |b|)`.
/// Returns the best abscissa and its value.
pub fn golden_section<F>(mut f: F, bracket: Bracket, xtol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut c) = (bracket.a, bracket.c);
    let mut x1 = c - INV_PHI * (c - a);
    let mut x2 = a + INV_PHI * (c - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let (mut best_x, mut best_f) = (bracket.b, bracket.fb);
    for _ in 0..max_iter {
        if (c - a) <= xtol * best_x.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - INV_PHI * (c - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (c - a);
            f2 = f(x2);
        }
        if f1 < best_f {
            best_x = x1;
            best_f = f1;
        }
        if f2 < best_f {
            best_x = x2;
            best_f = f2;
        }
    }
    (best_x, best_f)
}

/// Brackets then refines; convenience wrapper used by the measure solvers.
pub fn minimize_on_interval<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    start: f64,
    xtol: f64,
    max_expansions: usize,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let bracket = bracket_minimum(&mut f, lo, hi, start, max_expansions)?;
    Ok(golden_section(f, bracket, xtol, 400))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_on_half_line() {
        let (x, fx) =
            minimize_on_interval(|x| (x + 5.3).powi(2) + 1.0, f64::NEG_INFINITY, 10.0, 0.0, 1e-10, 200)
                .unwrap();
        assert!((x + 5.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn barrier_function_near_finite_endpoint() {
        // f(x) = x − ln(x − 1) on (1, ∞), minimum at x = 2.
        let f = |x: f64| if x > 1.0 { x - (x - 1.0).ln() } else { f64::INFINITY };
        let (x, _) = minimize_on_interval(f, 1.0, f64::INFINITY, 50.0, 1e-10, 200).unwrap();
        assert!((x - 2.0).abs() < 1e-5);
    }

    #[test]
    fn start_outside_interval_is_rejected() {
        assert!(bracket_minimum(|x| x * x, 0.0, 1.0, 2.0, 10).is_err());
    }
}
