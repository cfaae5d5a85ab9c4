//! Numerical equilibrium certification and structural checks on samples.
//!
//! Deviation payoffs are estimated with common random numbers: one pool of
//! opponent landscapes and user types is drawn once and every candidate is
//! scored against the same pool, so differences between candidates are not
//! swamped by independent sampling noise.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::MixedStrategy;
use crate::error::{Error, Result};
use crate::game::{scores_tie, Metric};
use crate::model::{Content, ModelInstance};
use crate::numeric::{bisect_nondecreasing, bracket_upper};
use crate::stats::{MetricEstimate, RunningStats};

/// Curve cost beyond which content cannot beat the zero payoff of opting out.
pub const CURVE_COST_CAP: f64 = 1.2;
pub const PROBE_COUNT: usize = 32;
pub const GAP_FLOOR: f64 = 0.02;
pub const GAP_STDERR_MULT: f64 = 4.0;

#[derive(Debug, Clone, Serialize)]
pub struct CandidateUtility {
    pub content: Content,
    pub utility: MetricEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestResponseReport {
    pub eq_utility: MetricEstimate,
    pub best_deviation_utility: MetricEstimate,
    pub gap: f64,
    pub argmax_candidate: Content,
    pub grid_size: usize,
    pub samples_per_candidate: usize,
    /// `max(GAP_FLOOR, GAP_STDERR_MULT * combined stderr)`.
    pub threshold: f64,
    pub passed: bool,
    pub candidates: Vec<CandidateUtility>,
    pub probes: Vec<CandidateUtility>,
}

fn uniform_grid(lo: f64, hi: f64, k: usize) -> impl Iterator<Item = f64> {
    (0..k).map(move |i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
}

/// The origin plus `k` points on each type's curve, uniform in `w_cheap` from
/// the end of the curve's zero-marginal-cost stretch to where its cost reaches
/// [`CURVE_COST_CAP`].
pub fn candidate_deviations(inst: &ModelInstance, k: usize) -> Vec<Content> {
    let k = k.max(2);
    let mut out = vec![Content::ORIGIN];
    for &t in inst.types() {
        let lo = inst.cost_free_extent(t);
        let hi = inst.curve_cost_inverse(t, CURVE_COST_CAP).max(lo);
        out.extend(uniform_grid(lo, hi, k).map(|x| inst.curve_point(t, x)));
    }
    out
}

/// Candidates scored by [`best_response_gap`]: the curve grid, plus `k`
/// quality-only points when ranking by quality. Off the curves those points
/// reach a given quality at lower cost whenever gaming is costly.
pub fn deviation_set(inst: &ModelInstance, metric: Metric, k: usize) -> Vec<Content> {
    let mut out = candidate_deviations(inst, k);
    if metric == Metric::Investment {
        let cost = |w: f64| inst.investment_cost(w);
        let top = bisect_nondecreasing(cost, CURVE_COST_CAP, 0.0, bracket_upper(cost, CURVE_COST_CAP, 1.0));
        out.extend(uniform_grid(0.0, top, k.max(2)).map(|w| Content::new(w, 0.0)));
    }
    out
}

/// Opponent landscapes and user types shared by every candidate. Opponent
/// scores are stored per round, with ineligible opponents marked `-inf`.
struct Pool {
    types: Vec<f64>,
    scores: Vec<f64>,
    width: usize,
}

impl Pool {
    fn draw<R: Rng + ?Sized>(
        inst: &ModelInstance,
        metric: Metric,
        strategy: &MixedStrategy,
        p: usize,
        n: usize,
        rng: &mut R,
    ) -> Self {
        let width = p - 1;
        let all = inst.types();
        let mut types = Vec::with_capacity(n);
        let mut scores = Vec::with_capacity(n * width);
        for _ in 0..n {
            let t = all[rng.gen_range(0..all.len())];
            for _ in 0..width {
                let o = strategy.sample(rng);
                scores.push(if inst.is_eligible(o, t) { metric.score(inst, o) } else { f64::NEG_INFINITY });
            }
            types.push(t);
        }
        Pool { types, scores, width }
    }

    fn credit(&self, inst: &ModelInstance, metric: Metric, w: Content, round: usize) -> f64 {
        let t = self.types[round];
        if !inst.is_eligible(w, t) {
            return 0.0;
        }
        let s = metric.score(inst, w);
        let mut ties = 0usize;
        for &so in &self.scores[round * self.width..(round + 1) * self.width] {
            if so == f64::NEG_INFINITY {
                continue;
            }
            if scores_tie(s, so) {
                ties += 1;
            } else if so > s {
                return 0.0;
            }
        }
        1.0 / (1 + ties) as f64
    }

    fn utility(&self, inst: &ModelInstance, metric: Metric, w: Content) -> MetricEstimate {
        let cost = inst.cost(w);
        (0..self.types.len())
            .map(|i| self.credit(inst, metric, w, i) - cost)
            .collect::<RunningStats>()
            .estimate()
    }
}

/// Estimates how much a single creator can gain by deviating from
/// `strategy` when all others play it.
pub fn best_response_gap<R: Rng + ?Sized>(
    inst: &ModelInstance,
    metric: Metric,
    strategy: &MixedStrategy,
    p: usize,
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<BestResponseReport> {
    if p < 2 || n == 0 || k < 2 {
        return Err(Error::Precondition(format!(
            "best_response_gap needs P >= 2, K >= 2 and n >= 1 (got P={p}, K={k}, n={n})"
        )));
    }
    let pool = Pool::draw(inst, metric, strategy, p, n, rng);

    // On-support play: a fresh own draw for every pooled round.
    let eq_utility = (0..n)
        .map(|i| {
            let w = strategy.sample(rng);
            pool.credit(inst, metric, w, i) - inst.cost(w)
        })
        .collect::<RunningStats>()
        .estimate();

    let probe_points: Vec<Content> = (0..PROBE_COUNT).map(|_| strategy.sample(rng)).collect();
    let score = |pts: &[Content]| -> Vec<CandidateUtility> {
        pts.par_iter()
            .map(|&w| CandidateUtility { content: w, utility: pool.utility(inst, metric, w) })
            .collect()
    };
    let candidates = score(&deviation_set(inst, metric, k));
    let probes = score(&probe_points);

    let best = candidates
        .iter()
        .max_by(|a, b| a.utility.mean.total_cmp(&b.utility.mean))
        .expect("candidate set contains the origin");
    let gap = best.utility.mean - eq_utility.mean;
    let threshold = GAP_FLOOR.max(GAP_STDERR_MULT * best.utility.combined_stderr(&eq_utility));
    Ok(BestResponseReport {
        eq_utility,
        best_deviation_utility: best.utility,
        gap,
        argmax_candidate: best.content,
        grid_size: k,
        samples_per_candidate: n,
        threshold,
        passed: gap <= threshold,
        candidates: candidates.clone(),
        probes,
    })
}

/// Ordered pairs `(i, j)` with `w_cheap[j] >= w_cheap[i]` but
/// `w_costly[j] < w_costly[i] - tol`.
pub fn check_positive_correlation(samples: &[Content], tol: f64) -> Vec<(usize, usize)> {
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.sort_by(|&a, &b| {
        samples[a]
            .w_cheap
            .total_cmp(&samples[b].w_cheap)
            .then(samples[a].w_costly.total_cmp(&samples[b].w_costly))
    });
    let q = |k: usize| samples[idx[k]].w_costly;
    let x = |k: usize| samples[idx[k]].w_cheap;
    let n = idx.len();
    let mut suffix_min = vec![f64::INFINITY; n + 1];
    for k in (0..n).rev() {
        suffix_min[k] = suffix_min[k + 1].min(q(k));
    }
    let mut out = Vec::new();
    for a in 0..n {
        if q(a) - tol > suffix_min[a + 1] {
            for b in a + 1..n {
                if q(b) < q(a) - tol {
                    out.push((idx[a], idx[b]));
                }
            }
        }
        // Equal gaming levels compare in both directions.
        for b in a + 1..n {
            if x(b) != x(a) {
                break;
            }
            if q(a) < q(b) - tol {
                out.push((idx[b], idx[a]));
            }
        }
    }
    out
}

/// Indices of samples farther than `tol` from the origin and from every
/// type's curve `{(f_t(x), x)}`.
pub fn support_containment(samples: &[Content], inst: &ModelInstance, tol: f64) -> Vec<usize> {
    samples
        .iter()
        .enumerate()
        .filter(|(_, w)| {
            let near_origin = w.w_costly.hypot(w.w_cheap) <= tol;
            let near_curve = inst
                .types()
                .iter()
                .any(|&t| (w.w_costly - inst.min_investment(t, w.w_cheap)).abs() <= tol);
            !(near_origin || near_curve)
        })
        .map(|(i, _)| i)
        .collect()
}
