// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweep specifications.
//!
//! - `start:stop:N` gives `N` evenly spaced values, endpoints included.
//! - `start:stop:logN` gives `N` log-spaced values (`0 < start`, `0 < stop`).
//! - `a,b,c` gives an explicit list.
//! - A single number gives one point.

use crate::error::{Error, Result};

/// Upper bound on the number of generated points.
pub const MAX_POINTS: usize = 100_000;

fn number(s: &str) -> Result<f64> {
    let t = s.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::Parse(format!("sweep: '{t}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("sweep: '{t}' is not finite")));
    }
    Ok(v)
}

fn count(s: &str) -> Result<usize> {
    let t = s.trim();
    let n: usize = t
        .parse()
        .map_err(|_| Error::Parse(format!("sweep: '{t}' is not a point count")))?;
    if n == 0 || n > MAX_POINTS {
        return Err(Error::Parse(format!("sweep: point count must be in 1..={MAX_POINTS}, got {n}")));
    }
    Ok(n)
}

pub fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Parse("sweep: empty specification".into()));
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(number).collect(),
        [start, stop, n] => {
            let (a, b) = (number(start)?, number(stop)?);
            let n_trim = n.trim();
            if let Some(rest) = n_trim.strip_prefix("log") {
                let n = count(rest)?;
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::Parse("sweep: log spacing needs positive endpoints".into()));
                }
                let mut v: Vec<f64> = spaced(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect();
                v[0] = a;
                if n > 1 {
                    v[n - 1] = b;
                }
                Ok(v)
            } else {
                Ok(spaced(a, b, count(n_trim)?))
            }
        }
        _ => Err(Error::Parse(format!("sweep: expected start:stop:N, got '{spec}'"))),
    }
}

fn spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * step }).collect()
}
