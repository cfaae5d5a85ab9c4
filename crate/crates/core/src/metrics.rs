//! Downstream platform metrics at equilibrium (consumed quality, realized
//! engagement, user welfare) and closed-form oracles for them.

use std::cell::RefCell;

use rand::Rng;
use serde::Serialize;

use crate::equilibrium::MixedStrategy;
use crate::error::{Error, Result};
use crate::game::{play_round, Metric, RoundOutcome};
use crate::model::ModelInstance;
use crate::numeric::integrate_with_breaks;
use crate::stats::{MetricEstimate, RunningStats};

pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

fn estimate_with<R, F>(inst: &ModelInstance, metric: Metric, strategy: &MixedStrategy, p: usize, n: usize, rng: &mut R, f: F) -> Result<MetricEstimate>
where
    R: Rng + ?Sized,
    F: Fn(&RoundOutcome) -> f64,
{
    if n == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    Ok((0..n).map(|_| f(&play_round(inst, metric, strategy, p, rng))).collect::<RunningStats>().estimate())
}

/// User consumption of quality: winner quality when consumed.
pub fn estimate_ucq<R: Rng + ?Sized>(inst: &ModelInstance, metric: Metric, strategy: &MixedStrategy, p: usize, n: usize, rng: &mut R) -> Result<MetricEstimate> {
    estimate_with(inst, metric, strategy, p, n, rng, |o| o.quality)
}

/// Realized engagement: winner engagement when consumed.
pub fn estimate_re<R: Rng + ?Sized>(inst: &ModelInstance, metric: Metric, strategy: &MixedStrategy, p: usize, n: usize, rng: &mut R) -> Result<MetricEstimate> {
    estimate_with(inst, metric, strategy, p, n, rng, |o| o.engagement)
}

/// User welfare: winner utility when consumed.
pub fn estimate_uw<R: Rng + ?Sized>(inst: &ModelInstance, metric: Metric, strategy: &MixedStrategy, p: usize, n: usize, rng: &mut R) -> Result<MetricEstimate> {
    estimate_with(inst, metric, strategy, p, n, rng, |o| o.user_utility)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MetricTriple {
    pub ucq: MetricEstimate,
    pub re: MetricEstimate,
    pub uw: MetricEstimate,
}

/// All three metrics from one shared stream of rounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct TripleStats {
    pub ucq: RunningStats,
    pub re: RunningStats,
    pub uw: RunningStats,
}

impl TripleStats {
    pub fn push(&mut self, o: &RoundOutcome) {
        self.ucq.push(o.quality);
        self.re.push(o.engagement);
        self.uw.push(o.user_utility);
    }

    pub fn merge(&mut self, other: &TripleStats) {
        self.ucq.merge(&other.ucq);
        self.re.merge(&other.re);
        self.uw.merge(&other.uw);
    }

    pub fn estimate(&self) -> MetricTriple {
        MetricTriple { ucq: self.ucq.estimate(), re: self.re.estimate(), uw: self.uw.estimate() }
    }
}

pub fn estimate_all<R: Rng + ?Sized>(inst: &ModelInstance, metric: Metric, strategy: &MixedStrategy, p: usize, n: usize, rng: &mut R) -> TripleStats {
    let mut acc = TripleStats::default();
    for _ in 0..n {
        acc.push(&play_round(inst, metric, strategy, p, rng));
    }
    acc
}

/// CDF of reparameterized engagement under quality ranking with unit
/// baseline utility and no gaming cost: uniform on `[1, 2]`.
pub fn investment_engagement_cdf(v: f64) -> f64 {
    (v - 1.0).clamp(0.0, 1.0)
}

/// Large-`N` limit of the reparameterized engagement CDF under engagement
/// ranking with well-separated types:
/// `ln(1 / (1 - ln(v / (1+eps))))` on `[1+eps, (1+eps) e^(1-1/e)]`.
pub fn limit_engagement_cdf(v: f64, eps: f64) -> f64 {
    let lo = 1.0 + eps;
    let hi = lo * (1.0 - (-1.0f64).exp()).exp();
    if v <= lo {
        return 0.0;
    }
    if v >= hi {
        return 1.0;
    }
    (1.0 / (1.0 - (v / lo).ln())).ln().clamp(0.0, 1.0)
}

/// `E[max of p i.i.d. draws] = int_0^upper (1 - F^p)` for a CDF on `[0, upper]`.
pub fn expected_max_from_cdf<F: Fn(f64) -> f64>(cdf: F, p: usize, upper: f64, tol: f64) -> Result<f64> {
    expected_max_with_breaks(cdf, p, upper, &[], tol)
}

/// As [`expected_max_from_cdf`], splitting panels at known kinks of the CDF.
/// Fails if the CDF decreases anywhere on the quadrature nodes.
pub fn expected_max_with_breaks<F: Fn(f64) -> f64>(cdf: F, p: usize, upper: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let nodes = RefCell::new(Vec::new());
    let integrand = |v: f64| {
        let f = cdf(v);
        nodes.borrow_mut().push((v, f));
        1.0 - f.clamp(0.0, 1.0).powi(p as i32)
    };
    let value = integrate_with_breaks(integrand, 0.0, upper, breaks, tol);
    let mut nodes = nodes.into_inner();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = nodes.windows(2).find(|w| w[1].1 < w[0].1 - 1e-12) {
        return Err(Error::NonMonotoneCdf { x: w[1].0 });
    }
    Ok(value)
}

/// Quality CDF of the single-type engagement equilibrium in the linear
/// family: an atom of `(-alpha)^(1/(p-1))` on `[0, -alpha]` when
/// `alpha < 0`, then `min(1, w + gamma t (w + alpha))^(1/(p-1))`.
pub fn homogeneous_quality_cdf(alpha: f64, gamma: f64, t: f64, p: usize, w: f64) -> f64 {
    if w < 0.0 {
        return 0.0;
    }
    let e = 1.0 / (p - 1) as f64;
    if alpha < 0.0 && w < -alpha {
        return (-alpha).min(1.0).powf(e);
    }
    (w + gamma * t * (w + alpha)).clamp(0.0, 1.0).powf(e)
}

/// Expected winner quality under engagement ranking with one user type: the
/// expected maximum of `p` equilibrium qualities.
pub fn closed_form_ucq_homogeneous(alpha: f64, gamma: f64, t: f64, p: usize) -> Result<f64> {
    if !(alpha > -1.0) || !(0.0..1.0).contains(&gamma) || p < 2 {
        return Err(Error::InvalidParameter(format!("alpha={alpha}, gamma={gamma}, P={p}")));
    }
    let top = ((1.0 - gamma * t * alpha) / (1.0 + gamma * t)).max(0.0).max(-alpha);
    let breaks = [-alpha, top];
    expected_max_with_breaks(|w| homogeneous_quality_cdf(alpha, gamma, t, p, w), p, top, &breaks, 1e-12)
}
