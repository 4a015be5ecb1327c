//! Cylinder functions of integer order and real positive argument.
//!
//! `J_n` uses the ascending series for small arguments and Miller's
//! backward recurrence (normalized by `J_0 + 2 Σ J_2k = 1`) elsewhere.
//! `K_0`, `K_1` come from their logarithmic series for `x <= 2` and from
//! Steed's continued fraction above; higher orders follow by forward
//! recurrence, which is the stable direction for `K`.
//!
//! Negative orders are not accepted here. Callers fold them with
//! [`CylOrder::reflect`], i.e. `J_{-n} = (-1)^n J_n` and `K_{-n} = K_n`.

use crate::error::{Error, Result};

/// Relative pole guard for [`jratio`]: `J_n(x)` counts as zero when it is
/// smaller than this fraction of the local amplitude `hypot(J_n, J_{n+1})`.
pub const POLE_GUARD: f64 = 1e-13;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const RESCALE_ABOVE: f64 = 1e250;

/// Non-negative integer order of a cylinder function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CylOrder(u32);

impl CylOrder {
    pub fn new(n: u32) -> Self {
        Self(n)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Folds a signed order onto `|n|`, returning the factor `(-1)^n` that
    /// `J` (and the Hankel functions) pick up under `n -> -n`.
    pub fn reflect(n: i32) -> (Self, f64) {
        let abs = n.unsigned_abs();
        let sign = if n < 0 && abs % 2 == 1 { -1.0 } else { 1.0 };
        (Self(abs), sign)
    }
}

impl From<u32> for CylOrder {
    fn from(n: u32) -> Self {
        Self(n)
    }
}

fn check_arg(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("cylinder function argument must be finite and > 0, got {x}")))
    }
}

/// `J_n(x)` for `n >= 0`, `x > 0`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    Ok(bessel_j_seq(n, x)?[n as usize])
}

/// `J_n(x)` for a signed order.
pub fn bessel_j_signed(n: i32, x: f64) -> Result<f64> {
    let (order, sign) = CylOrder::reflect(n);
    Ok(sign * bessel_j(order.get(), x)?)
}

/// `[J_0(x), ..., J_nmax(x)]`.
pub fn bessel_j_seq(nmax: u32, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    if x <= SERIES_LIMIT {
        Ok((0..=nmax).map(|n| j_series(n, x)).collect())
    } else {
        Ok(j_miller(nmax as usize, x))
    }
}

fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= half / k as f64;
    }
    let y = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..200 {
        term *= y / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
            break;
        }
    }
    sum
}

fn j_miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = nmax.max(x.ceil() as usize);
    let mut start = top + 40 + (6.0 * (top as f64).cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let mut out = vec![0.0; nmax + 1];
    let mut upper = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k, arbitrary seed at k = start
    let mut norm = 2.0 * cur;
    for k in (1..=start).rev() {
        let lower = (2.0 * k as f64 / x) * cur - upper;
        upper = cur;
        cur = lower;
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = cur;
        }
        if idx == 0 {
            norm += cur;
        } else if idx % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            cur *= s;
            upper *= s;
            norm *= s;
            for v in out.iter_mut().skip(idx) {
                *v *= s;
            }
        }
    }
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// `K_n(x)` for `n >= 0`, `x > 0`.
pub fn bessel_k(n: u32, x: f64) -> Result<f64> {
    let scaled = bessel_k_seq_scaled(n, x)?[n as usize];
    let value = scaled * (-x).exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("K_{n}({x}) overflows")))
    }
}

/// `[e^x K_0(x), ..., e^x K_nmax(x)]`.
pub fn bessel_k_seq_scaled(nmax: u32, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let (k0, k1) = k01_scaled(x);
    let mut out = Vec::with_capacity(nmax as usize + 1);
    out.push(k0);
    if nmax >= 1 {
        out.push(k1);
    }
    for n in 1..nmax as usize {
        let next = out[n - 1] + (2.0 * n as f64 / x) * out[n];
        out.push(next);
    }
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Domain(format!("K_{nmax}({x}) overflows")))
    }
}

/// `(e^x K_0(x), e^x K_1(x))`.
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed(x)
    }
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // K_0 = -ln(x/2) I_0 + Σ ψ(k+1) y^k / (k!)^2
    let mut term = 1.0;
    let mut psi = -EULER_GAMMA;
    let mut i0 = term;
    let mut s0 = psi * term;
    // K_1 = 1/x + ln(x/2) I_1 - (x/4) Σ [ψ(k+1) + ψ(k+2)] y^k / (k! (k+1)!)
    let mut term1 = 1.0;
    let mut i1 = term1;
    let mut s1 = (psi + psi + 1.0) * term1;
    for k in 1..100 {
        let kf = k as f64;
        term *= y / (kf * kf);
        term1 *= y / (kf * (kf + 1.0));
        psi += 1.0 / kf;
        let psi_next = psi + 1.0 / (kf + 1.0);
        i0 += term;
        s0 += psi * term;
        i1 += term1;
        s1 += (psi + psi_next) * term1;
        if term1 < f64::EPSILON * 1e-3 * i1 && term < f64::EPSILON * 1e-3 * i0 {
            break;
        }
    }
    let k0 = -log_half * i0 + s0;
    let k1 = 1.0 / x + log_half * (0.5 * x * i1) - 0.25 * x * s1;
    (k0, k1)
}

/// Steed's continued fraction (Temme's CF2) for order zero.
fn k01_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON * 0.5 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `J'_n(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2`.
pub fn bessel_j_deriv(n: u32, x: f64) -> Result<f64> {
    let seq = bessel_j_seq(n + 1, x)?;
    let n = n as usize;
    let below = if n == 0 { -seq[1] } else { seq[n - 1] };
    Ok(0.5 * (below - seq[n + 1]))
}

/// `K'_n(x) = -(K_{n-1}(x) + K_{n+1}(x)) / 2`.
pub fn bessel_k_deriv(n: u32, x: f64) -> Result<f64> {
    let seq = bessel_k_seq_scaled(n + 1, x)?;
    let n = n as usize;
    let below = if n == 0 { seq[1] } else { seq[n - 1] };
    Ok(-0.5 * (below + seq[n + 1]) * (-x).exp())
}

/// `J_{n+1}(x) / J_n(x)`, or [`Error::Pole`] when `J_n(x)` is numerically zero.
pub fn jratio(n: u32, x: f64) -> Result<f64> {
    let seq = bessel_j_seq(n + 1, x)?;
    let (jn, jn1) = (seq[n as usize], seq[n as usize + 1]);
    if jn == 0.0 || jn.abs() < POLE_GUARD * jn.hypot(jn1) {
        return Err(Error::Pole { order: n, x });
    }
    Ok(jn1 / jn)
}

/// `K_{n+1}(x) / K_n(x)`; always greater than one.
pub fn kratio(n: u32, x: f64) -> Result<f64> {
    let seq = bessel_k_seq_scaled(n + 1, x)?;
    Ok(seq[n as usize + 1] / seq[n as usize])
}
