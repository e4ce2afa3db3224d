//! Bessel functions of the first kind for integer order and the positive
//! zeros of their derivatives.

use crate::error::{Error, Result};

/// Below this argument the ascending series is used; above it Miller's
/// backward recurrence. The series loses about log10(I_n(x)) digits, which
/// stays under three for x < 5.
const SERIES_LIMIT: f64 = 5.0;

/// J_n(x) for n ≥ 0, x ≥ 0.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(triplet(n, x).1)
}

/// d/dx J_n(x).
pub fn bessel_jprime(n: u32, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(jprime_unchecked(n, x))
}

fn check_arg(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidParams(format!("Bessel argument must be >= 0, got {x}")));
    }
    if !x.is_finite() {
        return Err(Error::InvalidParams("Bessel argument must be finite".into()));
    }
    Ok(())
}

pub(crate) fn j_unchecked(n: u32, x: f64) -> f64 {
    triplet(n, x).1
}

pub(crate) fn jprime_unchecked(n: u32, x: f64) -> f64 {
    let (jm, _, jp) = triplet(n, x);
    if n == 0 {
        -jp
    } else {
        0.5 * (jm - jp)
    }
}

/// Second derivative from Bessel's equation; x must be > 0.
fn jsecond(n: u32, x: f64) -> f64 {
    let (jm, j, jp) = triplet(n, x);
    let d = if n == 0 { -jp } else { 0.5 * (jm - jp) };
    let nn = (n as f64) * (n as f64);
    -d / x - (1.0 - nn / (x * x)) * j
}

/// (J_{n−1}(x), J_n(x), J_{n+1}(x)) with J_{−1} = −J_1.
pub(crate) fn triplet(n: u32, x: f64) -> (f64, f64, f64) {
    if x == 0.0 {
        return match n {
            0 => (0.0, 1.0, 0.0),
            1 => (1.0, 0.0, 0.0),
            _ => (0.0, 0.0, 0.0),
        };
    }
    if x < SERIES_LIMIT {
        let jm = if n == 0 { -series(1, x) } else { series(n - 1, x) };
        (jm, series(n, x), series(n + 1, x))
    } else {
        miller(n, x)
    }
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    // (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Miller's backward recurrence normalised with J_0 + 2 Σ J_{2k} = 1.
fn miller(n: u32, x: f64) -> (f64, f64, f64) {
    let top = (n as f64 + 1.0).max(x);
    let mut start = (top + 30.0 + 6.0 * top.sqrt()).ceil() as u32;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0_f64; // J_{k+1}
    let mut cur = 1e-300_f64; // J_k
    let mut norm = 0.0;
    let (mut jm, mut j, mut jp) = (0.0, 0.0, 0.0);
    let mut k = start;
    loop {
        if k == n + 1 {
            jp = cur;
        } else if k == n {
            j = cur;
        } else if n > 0 && k == n - 1 {
            jm = cur;
        }
        if k % 2 == 0 {
            norm += if k == 0 { cur } else { 2.0 * cur };
        }
        if k == 0 {
            break;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            jm *= s;
            j *= s;
            jp *= s;
        }
    }
    if n == 0 {
        // J_{-1} = -J_1
        jm = -jp;
    }
    (jm / norm, j / norm, jp / norm)
}

/// The first `count` positive zeros of J_n′, strictly increasing.
///
/// Sign changes of J_n′ are bracketed on a 0.1 grid starting at max(n, 0.5),
/// bisected, then polished with Newton steps using J_n″.
pub fn bessel_jprime_zeros(n: u32, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let step = 0.1;
    let mut a = (n as f64).max(0.5);
    let mut fa = jprime_unchecked(n, a);
    while zeros.len() < count {
        let b = a + step;
        let fb = jprime_unchecked(n, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(polish(n, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    zeros
}

fn polish(n: u32, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let mut flo = flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = jprime_unchecked(n, mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let f = jprime_unchecked(n, x);
        let df = jsecond(n, x);
        if df == 0.0 {
            break;
        }
        let dx = f / df;
        x -= dx;
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    x
}
