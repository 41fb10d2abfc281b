// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Special functions: log-factorials, generalized Laguerre polynomials and
//! the Kummer confluent hypergeometric function `₁F₁(a; b; z)` for real
//! arguments.

use std::sync::OnceLock;

const LN_FACTORIAL_TABLE: usize = 1024;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE);
        let mut acc = 0.0_f64;
        t.push(0.0);
        for n in 1..LN_FACTORIAL_TABLE {
            acc += (n as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACTORIAL_TABLE {
        return ln_factorial_table()[n];
    }
    // Stirling series; n ≥ 1024 keeps the truncation below 1e-16.
    let x = n as f64 + 1.0;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by forward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// A value stored as `mantissa · exp(log_scale)` so that huge or tiny
/// exponential factors can be combined before they overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.log_scale.exp()
        }
    }
}

const RESCALE: f64 = 1e250;

/// Power series of `₁F₁(a; b; z)`. Terminates exactly when `a` is a
/// non-positive integer.
fn kummer_series(a: f64, b: f64, z: f64) -> Scaled {
    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    let mut log_scale = 0.0_f64;
    let terminating = a <= 0.0 && a.fract() == 0.0;
    for j in 0..200_000usize {
        let jf = j as f64;
        if terminating && a + jf == 0.0 {
            break;
        }
        term *= (a + jf) / (b + jf) * z / (jf + 1.0);
        sum += term;
        if sum.abs() > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_scale += RESCALE.ln();
        }
        let decaying = jf > z.abs() && jf > a.abs();
        if decaying && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    Scaled {
        mantissa: sum,
        log_scale,
    }
}

/// Terminating `₁F₁(−n; b; x)` for `x > 0` through
/// `₁F₁(−n; b; x) = n!/(b)ₙ · L_n^{(b−1)}(x)`. The alternating power series
/// cancels catastrophically once `x` is comparable to `n`; the Laguerre
/// recurrence does not.
fn terminating_laguerre(n: usize, b: f64, x: f64) -> Scaled {
    let mut log_scale = ln_factorial(n);
    let mut sign = 1.0;
    for j in 0..n {
        let f = b + j as f64;
        log_scale -= f.abs().ln();
        if f < 0.0 {
            sign = -sign;
        }
    }
    Scaled {
        mantissa: sign * laguerre(n, b - 1.0, x),
        log_scale,
    }
}

fn series_or_polynomial(a: f64, b: f64, z: f64) -> Scaled {
    if z > 0.0 && a <= 0.0 && a.fract() == 0.0 && -a < 1e6 {
        terminating_laguerre(-a as usize, b, z)
    } else {
        kummer_series(a, b, z)
    }
}

/// Kummer confluent hypergeometric function `₁F₁(a; b; z)` in scaled form.
///
/// Negative arguments go through Kummer's transformation
/// `₁F₁(a; b; z) = e^z ₁F₁(b−a; b; −z)`; the `e^z` factor is returned in
/// `log_scale` rather than applied, so callers can cancel it against their
/// own exponential prefactors. When the (transformed) first parameter is a
/// non-positive integer the function is a polynomial and is evaluated by
/// Laguerre recurrence.
///
/// # Panics
///
/// If `b` is zero or a negative integer (the function is undefined there).
pub fn hyp1f1_scaled(a: f64, b: f64, z: f64) -> Scaled {
    assert!(
        !(b <= 0.0 && b.fract() == 0.0),
        "1F1 undefined for non-positive integer b = {b}"
    );
    if z < 0.0 {
        let s = series_or_polynomial(b - a, b, -z);
        Scaled {
            mantissa: s.mantissa,
            log_scale: s.log_scale + z,
        }
    } else {
        series_or_polynomial(a, b, z)
    }
}

/// `₁F₁(a; b; z)` as a plain float.
pub fn hyp1f1(a: f64, b: f64, z: f64) -> f64 {
    hyp1f1_scaled(a, b, z).value()
}
