//! Bracketed scalar root finding.

use crate::{Error, Result};

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops when the bracket is narrower than `x_tol` or cannot shrink further
/// in floating point. Returns the midpoint of the final bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Convergence(format!(
            "no sign change on [{lo}, {hi}] ({f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= x_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection in `ln(d)` for a root `d > 0` known to lie in `[d_lo, d_hi]`,
/// suited to roots spanning many orders of magnitude. Stops at relative
/// width `rel_tol`.
pub fn bisect_log<F: FnMut(f64) -> f64>(mut f: F, d_lo: f64, d_hi: f64, rel_tol: f64) -> Result<f64> {
    let mut lo = d_lo.ln();
    let mut hi = d_hi.ln();
    let mut f_lo = f(d_lo);
    let f_hi = f(d_hi);
    if f_lo == 0.0 {
        return Ok(d_lo);
    }
    if f_hi == 0.0 {
        return Ok(d_hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Convergence(format!(
            "no sign change on [{d_lo:.3e}, {d_hi:.3e}] ({f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol || mid == lo || mid == hi {
            return Ok(mid.exp());
        }
        let fm = f(mid.exp());
        if fm == 0.0 {
            return Ok(mid.exp());
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
