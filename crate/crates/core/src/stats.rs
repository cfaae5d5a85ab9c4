//! Streaming mean/variance and distribution distances.

use serde::{Deserialize, Serialize};

/// Monte Carlo mean with its standard error and sample count.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl MetricEstimate {
    pub fn exact(value: f64) -> Self {
        Self { mean: value, stderr: 0.0, n: 0 }
    }

    /// Standard error of `self - other` for independent estimates.
    pub fn combined_stderr(&self, other: &MetricEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

/// Welford accumulator; mergeable so sharded runs reduce order-insensitively.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.mean = mean;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn estimate(&self) -> MetricEstimate {
        let stderr = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        MetricEstimate { mean: self.mean, stderr, n: self.n }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// One-sample Kolmogorov-Smirnov distance between `samples` and `cdf`.
///
/// Left limits of `cdf` are approximated just below each sample so atoms in
/// the reference distribution are handled.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        let left = cdf(x - 1e-12 * x.abs().max(1.0));
        d = d.max((at - cdf(x)).abs()).max((below - left).abs());
        i = j;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_stream_has_exact_mean_and_zero_stderr() {
        let s: RunningStats = std::iter::repeat(1.0).take(1000).collect();
        let e = s.estimate();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n, 1000);
    }

    #[test]
    fn stderr_matches_two_pass_formula() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let e: MetricEstimate = xs.iter().copied().collect::<RunningStats>().estimate();
        let mean = 3.5;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 3.0;
        assert!((e.mean - mean).abs() < 1e-15);
        assert!((e.stderr - (var / 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
    }

    #[test]
    fn ks_respects_atoms() {
        let xs = vec![0.0; 10];
        let step = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
        assert!(ks_distance(&xs, step) < 1e-15);
    }

    proptest! {
        #[test]
        fn merge_equals_sequential(xs in prop::collection::vec(-100.0f64..100.0, 0..60), split in 0usize..60) {
            let k = split.min(xs.len());
            let all: RunningStats = xs.iter().copied().collect();
            let mut a: RunningStats = xs[..k].iter().copied().collect();
            let b: RunningStats = xs[k..].iter().copied().collect();
            a.merge(&b);
            let (ea, eb) = (a.estimate(), all.estimate());
            prop_assert_eq!(ea.n, eb.n);
            prop_assert!((ea.mean - eb.mean).abs() < 1e-9);
            prop_assert!((ea.stderr - eb.stderr).abs() < 1e-9);
        }
    }
}
