//! Pole-aware bracketing and bisection for the characteristic functions.

use crate::error::{Error, Result};
use crate::specfun::bessel_j;

/// Bisection stops once the bracket is narrower than this (in `u`).
pub(crate) const BISECT_TOL: f64 = 2e-13;

/// Scan points per pole-free subinterval.
const SCAN_POINTS: usize = 64;

/// Step of the coarse scan used to locate zeros of `J_n`. Adjacent zeros
/// are separated by more than 2.4, so this never straddles two of them.
const ZERO_SCAN_STEP: f64 = 0.05;

/// Zeros of `J_n` in `(0, upper)`, ascending, refined to full precision.
pub(crate) fn bessel_j_zeros(n: u32, upper: f64) -> Result<Vec<f64>> {
    let mut zeros = Vec::new();
    if upper <= 0.0 {
        return Ok(zeros);
    }
    // J_n has no zeros below n.
    let mut a = (n as f64).max(ZERO_SCAN_STEP);
    if a >= upper {
        return Ok(zeros);
    }
    let j = |x: f64| bessel_j(n, x);
    let mut fa = j(a)?;
    while a < upper {
        let b = (a + ZERO_SCAN_STEP).min(upper);
        let fb = j(b)?;
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(bisect(&j, a, b, fa, fb, 0.0)?);
        }
        a = b;
        fa = fb;
    }
    zeros.retain(|&z| z < upper);
    Ok(zeros)
}

/// All sign changes of `f` on `(lo, hi)`, treating `poles` as bracket
/// edges. Points where `f` reports a pole are skipped during the scan.
pub(crate) fn roots_between_poles<F>(f: &F, lo: f64, hi: f64, poles: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut edges = Vec::with_capacity(poles.len() + 2);
    edges.push(lo);
    edges.extend(poles.iter().copied().filter(|&p| p > lo && p < hi));
    edges.push(hi);

    let mut roots = Vec::new();
    for (k, pair) in edges.windows(2).enumerate() {
        let nudge_lo = if k == 0 { 0.0 } else { 1e-10 * pair[0].max(1.0) };
        let nudge_hi = if k + 2 == edges.len() { 0.0 } else { 1e-10 * pair[1].max(1.0) };
        let a = pair[0] + nudge_lo;
        let b = pair[1] - nudge_hi;
        if b <= a {
            continue;
        }
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=SCAN_POINTS {
            let x = if i == SCAN_POINTS { b } else { a + (b - a) * i as f64 / SCAN_POINTS as f64 };
            let fx = match f(x) {
                Ok(v) => v,
                Err(Error::Pole { .. }) => continue,
                Err(e) => return Err(e),
            };
            if !fx.is_finite() {
                return Err(Error::NoConvergence {
                    lo: a,
                    hi: b,
                    reason: format!("non-finite residual at u = {x}"),
                });
            }
            if let Some((px, pf)) = prev {
                if pf == 0.0 {
                    roots.push(px);
                } else if pf * fx < 0.0 {
                    roots.push(bisect(f, px, x, pf, fx, BISECT_TOL)?);
                }
            }
            prev = Some((x, fx));
        }
        if let Some((px, 0.0)) = prev {
            roots.push(px);
        }
    }
    roots.dedup();
    Ok(roots)
}

/// Bisection on a sign-changing bracket. `tol = 0` runs to adjacent floats.
pub(crate) fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, mut flo: f64, fhi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo0, hi0) = (lo, hi);
    if (flo * fhi).is_nan() || flo * fhi >= 0.0 {
        return Err(Error::NoConvergence {
            lo,
            hi,
            reason: format!("bracket has no sign change (f(lo) = {flo}, f(hi) = {fhi})"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = match f(mid) {
            Ok(v) => v,
            Err(Error::Pole { .. }) => {
                return Err(Error::NoConvergence {
                    lo: lo0,
                    hi: hi0,
                    reason: format!("pole encountered at u = {mid} while refining"),
                })
            }
            Err(e) => return Err(e),
        };
        if !fm.is_finite() {
            return Err(Error::NoConvergence {
                lo: lo0,
                hi: hi0,
                reason: format!("non-finite residual at u = {mid}"),
            });
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence { lo: lo0, hi: hi0, reason: "iteration limit".into() })
}
