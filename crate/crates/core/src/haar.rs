// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Haar-random states and unitaries, and the benchmark of the synthesis
//! pipeline against the analytic fidelity distribution.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, QuantumState};
use crate::io;
use crate::linalg::{CMatrix, CVector};
use crate::pipeline::{self, DriveConfig};

/// Generator for stream `stream` of `seed`. Sample `i` of a run always
/// draws from stream `i`, so results do not depend on scheduling.
pub fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Vector of i.i.d. standard complex normal entries.
pub fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    CVector::from_fn(d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-random state on the first `d` levels of `space`, zero elsewhere.
pub fn sample_haar_state(space: FockSpace, d: usize, seed: u64, index: u64) -> Result<QuantumState> {
    if d < 2 {
        return Err(Error::param("d", format!("need d ≥ 2, got {d}")));
    }
    if d > space.dim() {
        return Err(Error::InsufficientDimension {
            dim: space.dim(),
            needed: d,
        });
    }
    let mut rng = sample_rng(seed, index);
    let g = gaussian_vector(d, &mut rng);
    let mut v = CVector::zeros(space.dim());
    v.rows_mut(0, d).copy_from(&g);
    QuantumState::normalized(space, v)
}

/// Haar-random `d × d` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Levels added above `d` for leakage headroom.
pub const BENCHMARK_PADDING: usize = 8;
pub const HISTOGRAM_BINS: usize = 20;

/// `P(F ≤ f) = 1 − (1 − f)^{d−1}` for the overlap of a Haar state with a
/// fixed reference.
pub fn haar_fidelity_cdf(d: usize, f: f64) -> f64 {
    1.0 - (1.0 - f.clamp(0.0, 1.0)).powi(d as i32 - 1)
}

/// `(d − 1)(1 − f)^{d−2}`.
pub fn haar_fidelity_pdf(d: usize, f: f64) -> f64 {
    (d as f64 - 1.0) * (1.0 - f.clamp(0.0, 1.0)).powi(d as i32 - 2)
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value for statistic `d` at effective sample
/// size `n` (for two samples, `n = n_a n_b/(n_a + n_b)`).
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let sq = n.sqrt();
    let lam = (sq + 0.12 + 0.11 / sq) * d;
    if lam < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lam * lam).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins on `[0, 1]`; the last bin is closed.
    pub fn unit_interval(values: &[f64], bins: usize) -> Self {
        let edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let b = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Histogram { edges, counts }
    }

    /// CSV `bin_lo,bin_hi,count,density,analytic_density`.
    pub fn to_csv(&self, d: usize) -> String {
        let total: usize = self.counts.iter().sum();
        let rows = self.counts.iter().enumerate().map(|(i, &c)| {
            let (lo, hi) = (self.edges[i], self.edges[i + 1]);
            let width = hi - lo;
            let density = if total > 0 { c as f64 / (total as f64 * width) } else { 0.0 };
            let analytic = (haar_fidelity_cdf(d, hi) - haar_fidelity_cdf(d, lo)) / width;
            [lo, hi, c as f64, density, analytic]
        });
        io::csv_string(&["bin_lo", "bin_hi", "count", "density", "analytic_density"], rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub d: usize,
    pub drive: DriveConfig,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarBenchmarkReport {
    pub d: usize,
    pub n_t: usize,
    pub n_k: usize,
    pub k_f: f64,
    /// Photon cutoff of the simulation space.
    pub dim: usize,
    pub samples: usize,
    pub failures: usize,
    /// Mean `F = |⟨ψ_QLG|ψ_ref⟩|²`.
    pub mean_fidelity_to_ref: f64,
    /// Mean `F_QLG = |⟨ψ_QLG|ψ_Haar⟩|²`.
    pub mean_prep_fidelity: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub pdf_histogram: Histogram,
    pub prep_fidelities: Vec<f64>,
    pub ref_fidelities: Vec<f64>,
}

impl HaarBenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn histogram_csv(&self) -> String {
        self.pdf_histogram.to_csv(self.d)
    }
}

/// Prepares `samples` Haar states from vacuum. Sample `i` is drawn from
/// stream `i + 1`; the reference state from stream 0.
pub fn benchmark(cfg: &BenchmarkConfig) -> Result<HaarBenchmarkReport> {
    cfg.drive.validate()?;
    if cfg.samples == 0 {
        return Err(Error::param("samples", "must be ≥ 1"));
    }
    let space = FockSpace::new(cfg.d + BENCHMARK_PADDING, 1.0)?;
    let reference = sample_haar_state(space, cfg.d, cfg.seed, 0)?;
    let table = cfg.drive.kernel_table(space)?;
    let vac = QuantumState::vacuum(space);
    let outcomes: Vec<Option<(f64, f64)>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<(f64, f64)> {
                let target = sample_haar_state(space, cfg.d, cfg.seed, i + 1)?;
                let prep = pipeline::prepare_state(&vac, &target, cfg.drive, Some(&table))?;
                Ok((prep.fidelity, fock::fidelity_state(&reference, &prep.output)?))
            };
            run().ok()
        })
        .collect();
    let ok: Vec<(f64, f64)> = outcomes.iter().flatten().copied().collect();
    let failures = cfg.samples - ok.len();
    let prep: Vec<f64> = ok.iter().map(|p| p.0).collect();
    let refs: Vec<f64> = ok.iter().map(|p| p.1).collect();
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let ks = ks_statistic(&refs, |f| haar_fidelity_cdf(cfg.d, f));
    Ok(HaarBenchmarkReport {
        d: cfg.d,
        n_t: cfg.drive.n_t,
        n_k: cfg.drive.n_k,
        k_f: cfg.drive.k_f,
        dim: space.dim(),
        samples: cfg.samples,
        failures,
        mean_fidelity_to_ref: mean(&refs),
        mean_prep_fidelity: mean(&prep),
        ks_statistic: ks,
        ks_p_value: ks_p_value(ks, refs.len() as f64),
        pdf_histogram: Histogram::unit_interval(&refs, HISTOGRAM_BINS),
        prep_fidelities: prep,
        ref_fidelities: refs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    #[test]
    fn d_one_rejected() {
        let s = FockSpace::new(4, 1.0).unwrap();
        assert!(sample_haar_state(s, 1, 0, 0).is_err());
        assert!(sample_haar_state(s, 5, 0, 0).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = FockSpace::new(6, 1.0).unwrap();
        let a = sample_haar_state(s, 4, 7, 3).unwrap();
        let b = sample_haar_state(s, 4, 7, 3).unwrap();
        let c = sample_haar_state(s, 4, 7, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.amplitudes().rows(4, 2).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = sample_rng(1, 0);
        for d in [2, 5, 16] {
            assert!(unitarity_defect(&haar_unitary(d, &mut rng)) < 1e-13);
        }
    }

    #[test]
    fn fidelity_to_reference_statistics() {
        for (d, want) in [(2usize, 0.5), (8, 0.125)] {
            let s = FockSpace::new(d, 1.0).unwrap();
            let reference = sample_haar_state(s, d, 99, 0).unwrap();
            let f: Vec<f64> = (1..=10_000)
                .map(|i| fock::fidelity_state(&reference, &sample_haar_state(s, d, 99, i).unwrap()).unwrap())
                .collect();
            let mean = f.iter().sum::<f64>() / f.len() as f64;
            let sigma = (want * (1.0 - want) / (d as f64 + 1.0)).sqrt() / 100.0;
            assert!((mean - want).abs() < 3.0 * sigma, "d={d}: {mean}");
            assert!(ks_statistic(&f, |x| haar_fidelity_cdf(d, x)) < 0.02);
        }
    }

    #[test]
    fn unitary_invariance_of_fidelity_histogram() {
        let d = 4;
        let s = FockSpace::new(d, 1.0).unwrap();
        let reference = sample_haar_state(s, d, 5, 0).unwrap();
        let u = haar_unitary(d, &mut sample_rng(5, 1 << 40));
        let plain: Vec<f64> = (1..=2000)
            .map(|i| fock::fidelity_state(&reference, &sample_haar_state(s, d, 5, i).unwrap()).unwrap())
            .collect();
        let rotated: Vec<f64> = (1..=2000)
            .map(|i| {
                let psi = sample_haar_state(s, d, 5, 5000 + i).unwrap();
                let moved = QuantumState::normalized(s, &u * psi.amplitudes()).unwrap();
                fock::fidelity_state(&reference, &moved).unwrap()
            })
            .collect();
        let d_ks = ks_two_sample(&plain, &rotated);
        assert!(ks_p_value(d_ks, 1000.0) > 0.01, "{d_ks}");
    }

    #[test]
    fn ks_helpers() {
        let uniform: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&uniform, |x| x) <= 0.5e-3 + 1e-12);
        assert_eq!(ks_two_sample(&uniform, &uniform), 0.0);
        assert!(ks_two_sample(&[0.0, 0.1], &[0.8, 0.9]) == 1.0);
        assert!(ks_p_value(0.0, 100.0) == 1.0);
        assert!(ks_p_value(0.3, 1000.0) < 1e-10);
        let p = ks_p_value(1.36 / 1000f64.sqrt(), 1000.0);
        assert!((p - 0.05).abs() < 0.01, "{p}");
        assert!((haar_fidelity_pdf(4, 0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn histogram_counts_and_csv() {
        let h = Histogram::unit_interval(&[0.0, 0.05, 0.5, 1.0, 1.0], 10);
        assert_eq!(h.counts.iter().sum::<usize>(), 5);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[9], 2);
        let csv = h.to_csv(2);
        assert!(csv.starts_with("bin_lo,bin_hi,count,density,analytic_density\n"));
        assert_eq!(csv.lines().count(), 11);
    }

    #[test]
    fn small_benchmark_is_reproducible() {
        let cfg = BenchmarkConfig {
            d: 2,
            drive: DriveConfig {
                n_t: 16,
                n_k: 12,
                k_f: 8.0,
                ..DriveConfig::default()
            },
            samples: 6,
            seed: 3,
        };
        let a = benchmark(&cfg).unwrap();
        let b = benchmark(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim, 10);
        assert_eq!(a.pdf_histogram.counts.iter().sum::<usize>(), 6);
        assert!(a.prep_fidelities.iter().chain(&a.ref_fidelities).all(|f| (0.0..=1.0 + 1e-12).contains(f)));
        assert!(a.mean_prep_fidelity > 0.5);
    }
}
