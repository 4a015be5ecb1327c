//! Reference computations that share no code path with the library.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

const FIXED_BITS: u32 = 600;

/// `J_n(x)` from the ascending series summed in 600-bit fixed point.
///
/// `x` is converted exactly, so the only error is the final rounding to f64.
pub fn bessel_j_exact(n: u32, x: f64) -> f64 {
    assert!(x > 0.0 && x < 1e5);
    let scale = 2f64.powi(FIXED_BITS as i32);
    let half = BigInt::from_f64(x * scale * 0.5).expect("finite");
    let y = (&half * &half) >> FIXED_BITS;

    let mut lead = BigInt::from(1) << FIXED_BITS;
    for k in 1..=n {
        lead = ((lead * &half) >> FIXED_BITS) / BigInt::from(k);
    }
    let mut term = lead.clone();
    let mut sum = lead;
    let mut k: u64 = 1;
    loop {
        term = -((term * &y) >> FIXED_BITS) / BigInt::from(k * (k + n as u64));
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    sum.to_f64().expect("fits") / scale
}

/// `K_n(x) = ∫_0^∞ exp(-x cosh t) cosh(n t) dt` by the trapezoid rule,
/// which converges geometrically for this analytic, rapidly decaying integrand.
pub fn bessel_k_quadrature(n: u32, x: f64) -> f64 {
    let h = 0.01;
    let nf = n as f64;
    let f = |t: f64| (-x * t.cosh() + nf * t).exp() * 0.5 * (1.0 + (-2.0 * nf * t).exp());
    let peak = (nf / x).asinh();
    let mut sum = 0.5 * f(0.0);
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let v = f(t);
        sum += v;
        if t > peak && v < 1e-25 * sum {
            break;
        }
        k += 1;
    }
    h * sum
}

/// Bisection on the high-precision series; returns the root to ~1 ulp.
pub fn bisect_j_zero(n: u32, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = bessel_j_exact(n, lo);
    assert!(flo * bessel_j_exact(n, hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = bessel_j_exact(n, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `N² a²` for the piecewise `J_m(uρ)` / `K_m(wρ)` profile (ρ in units of a),
/// by direct quadrature of `∫ |ψ|² 2πρ dρ`.
pub fn normalization_by_quadrature(m: u32, u: f64, w: f64) -> f64 {
    use std::f64::consts::PI;
    let j = |r: f64| bessel_j_exact(m, u * r);
    let k = |r: f64| bessel_k_quadrature(m, w * r);
    let match_ratio = j(1.0) / k(1.0);
    let inside = integrate(&|r: f64| if r == 0.0 { 0.0 } else { 2.0 * PI * r * j(r).powi(2) }, 0.0, 1.0, 1e-14);
    let end = 1.0 + 60.0 / w;
    let outside = integrate(&|r: f64| 2.0 * PI * r * (match_ratio * k(r)).powi(2), 1.0, end, 1e-14);
    1.0 / (inside + outside)
}

/// Cheap f64 power series for `J_n`, accurate for small `x`.
pub fn bessel_j_f64_series(n: u32, x: f64) -> f64 {
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= 0.5 * x / k as f64;
    }
    let y = -0.25 * x * x;
    let (mut term, mut sum) = (lead, lead);
    for k in 1..80u32 {
        term *= y / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}
