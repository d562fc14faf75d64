//! Bessel functions: `J_m` and its zeros for the disk cross-section, `K_0` and `I_0`
//! for the two-dimensional free Green's function.

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument `J_m` is summed from its power series; above it Miller's
/// downward recurrence is used. Both branches agree to ~1e-15 at the switch.
const J_SERIES_LIMIT: f64 = 2.0;

/// Below this argument `K_0` is summed from its logarithmic series, above it
/// from Steed's continued fraction.
const K0_SERIES_LIMIT: f64 = 2.0;

/// Bessel function of the first kind `J_m(x)` for `m >= 0`, `x >= 0`.
pub fn bessel_j(m: usize, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if x <= J_SERIES_LIMIT {
        j_series(m, x)
    } else {
        j_miller(m, x)
    }
}

fn j_series(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=m {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn j_miller(m: usize, x: f64) -> f64 {
    let top = (m as f64).max(x);
    let mut start = (top + 40.0 + 10.0 * x.cbrt()).ceil() as usize;
    start += start % 2;
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // f_{k+1}
    let mut cur = 1e-30; // f_k
    let mut norm = 0.0;
    let mut saved = 0.0;
    for k in (1..=start).rev() {
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        if k == m {
            saved = cur;
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            saved *= 1e-250;
        }
    }
    // cur = f_0
    norm += cur;
    if m == 0 {
        saved = cur;
    }
    saved / norm
}

/// Derivative `J_m'(x)`.
pub fn bessel_j_derivative(m: usize, x: f64) -> f64 {
    if m == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x))
    }
}

/// The `k`-th positive zero `j_{m,k}` (1-based) of `J_m`, located by a sign-change
/// scan followed by bisection to machine precision.
pub fn bessel_j_zero(m: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("Bessel zero index is 1-based".into()));
    }
    let step = 0.25;
    let mut lo = (m as f64).max(step);
    let mut f_lo = bessel_j(m, lo);
    let limit = m as f64 + (k as f64 + 2.0) * std::f64::consts::PI * 1.5 + 10.0;
    let mut found = 0;
    while lo < limit {
        let hi = lo + step;
        let f_hi = bessel_j(m, hi);
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            found += 1;
            if found == k {
                return Ok(bisect(|x| bessel_j(m, x), lo, hi));
            }
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::BesselZero { order: m, index: k })
}

pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Modified Bessel function `I_0(x)` from its (positive-term) power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the second kind `K_0(x)`, `x > 0`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidArgument(format!("K0 needs x > 0, got {x}")));
    }
    Ok(k0(x))
}

/// Unchecked `K_0` for internal hot loops.
#[inline]
pub(crate) fn k0(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= K0_SERIES_LIMIT {
        k0_series(x)
    } else if x > 740.0 {
        0.0
    } else {
        k0_continued_fraction(x)
    }
}

/// `K_0(x) = -(ln(x/2) + gamma) I_0(x) + sum_k (x^2/4)^k / (k!)^2 H_k`.
fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let lead = -((0.5 * x).ln() + EULER_GAMMA);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = lead;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        let add = term * (lead + harmonic);
        sum += add;
        if add.abs() < 1e-17 * sum.abs() && term < 1e-17 {
            break;
        }
    }
    sum
}

/// Steed's continued fraction (Temme's CF2) for `K_nu` at `nu = 0`.
fn k0_continued_fraction(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s
}
