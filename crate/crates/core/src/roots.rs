//! Bracketing root search: logarithmic pre-scan for sign changes followed
//! by bisection. Bisection is used for every solve so repeated runs give
//! bit-identical roots.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

/// `count` points spaced evenly in `ln x` over `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Samples `f` on a log grid and returns every sub-interval whose endpoint
/// values differ in sign (exact zeros bracket themselves).
pub fn log_prescan<F>(f: F, lo: f64, hi: f64, count: usize, exec: Execution) -> Result<Vec<Bracket>>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid("bracket", format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    if count < 2 {
        return Err(invalid("prescan points", "need at least 2"));
    }
    let xs = log_grid(lo, hi, count);
    let values = exec.map(&xs, |&x| f(x));
    let mut ys = Vec::with_capacity(values.len());
    for v in values {
        ys.push(v?);
    }
    Ok(sign_changes(&xs, &ys))
}

pub fn sign_changes(xs: &[f64], ys: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        let (a, b) = (ys[i], ys[i + 1]);
        if a == 0.0 {
            out.push(Bracket { lo: xs[i], hi: xs[i] });
        } else if a.signum() != b.signum() && b != 0.0 {
            out.push(Bracket { lo: xs[i], hi: xs[i + 1] });
        }
    }
    if let (Some(&x), Some(&y)) = (xs.last(), ys.last()) {
        if y == 0.0 {
            out.push(Bracket { lo: x, hi: x });
        }
    }
    out
}

/// Bisection until the bracket width is at most `rel_width * |midpoint|`.
pub fn bisect<F>(f: F, bracket: Bracket, rel_width: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let Bracket { mut lo, mut hi } = bracket;
    if lo == hi {
        return Ok(lo);
    }
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket {
            what: "function",
            lo,
            hi,
        });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_width * mid.abs() || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pre-scan plus bisection of every bracket; roots are returned in
/// ascending order.
pub fn all_roots<F>(
    f: F,
    lo: f64,
    hi: f64,
    count: usize,
    rel_width: f64,
    exec: Execution,
    what: &'static str,
) -> Result<Vec<(f64, Bracket)>>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let brackets = log_prescan(&f, lo, hi, count, exec)?;
    if brackets.is_empty() {
        return Err(Error::NoBracket { what, lo, hi });
    }
    brackets
        .into_iter()
        .map(|b| bisect(&f, b, rel_width).map(|r| (r, b)))
        .collect()
}
