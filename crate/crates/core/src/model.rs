//! Content, user types, the linear and watch-time model families, and the
//! curve machinery built on top of them: minimum investment `f_t`, curve cost
//! `C_t`, induced engagement cost `C^E_t` and the `(v, t) -> content` map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect_nondecreasing, bracket_upper};

/// Slack below zero still counted as nonnegative user utility. Points built on
/// the `u = 0` curve land there only up to rounding.
pub const ELIGIBILITY_TOL: f64 = 1e-9;

/// A creator action: quality effort and gaming effort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Content {
    pub w_costly: f64,
    pub w_cheap: f64,
}

impl Content {
    pub const ORIGIN: Content = Content { w_costly: 0.0, w_cheap: 0.0 };

    pub fn new(w_costly: f64, w_cheap: f64) -> Self {
        debug_assert!(w_costly >= 0.0 && w_cheap >= 0.0, "content must be nonnegative");
        Content { w_costly, w_cheap }
    }

    pub fn try_new(w_costly: f64, w_cheap: f64) -> Result<Self> {
        if !(w_costly.is_finite() && w_cheap.is_finite() && w_costly >= 0.0 && w_cheap >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "content ({w_costly}, {w_cheap}) must be finite and nonnegative"
            )));
        }
        Ok(Content { w_costly, w_cheap })
    }
}

/// Finite, strictly increasing list of user types drawn uniformly.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TypeSpace {
    types: Vec<f64>,
}

impl TypeSpace {
    pub fn new(types: Vec<f64>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::InvalidParameter("type space is empty".into()));
        }
        if let Some(t) = types.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidParameter(format!("type {t} must be finite and >= 0")));
        }
        if let Some(w) = types.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "types must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(TypeSpace { types })
    }

    pub fn single(t: f64) -> Result<Self> {
        Self::new(vec![t])
    }

    /// `t_i = (1+eps)(1+1/N)^(i-1) - 1`, the geometrically spaced family whose
    /// coefficients `1/(1+t)` shrink by exactly `1+1/N` per step.
    pub fn well_separated(n: usize, eps: f64) -> Result<Self> {
        if n == 0 || !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "well-separated types need N >= 1 and eps > 0 (got N={n}, eps={eps})"
            )));
        }
        let step = 1.0 + 1.0 / n as f64;
        Self::new((0..n).map(|i| (1.0 + eps) * step.powi(i as i32) - 1.0).collect())
    }

    /// `{eps, c(1+eps) - 1}`: two types whose coefficient ratio is `c`.
    pub fn ratio_pair(eps: f64, c: f64) -> Result<Self> {
        if !(eps > 0.0) || !(c > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ratio pair needs eps > 0 and c > 1 (got eps={eps}, c={c})"
            )));
        }
        Self::new(vec![eps, c * (1.0 + eps) - 1.0])
    }

    pub fn types(&self) -> &[f64] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.types.len() == 1
    }

    pub fn get(&self, i: usize) -> f64 {
        self.types[i]
    }
}

/// The two concrete model families.
///
/// `LinearTwitter`: `u = w_costly - w_cheap/t + alpha`, `M^E = w_costly + w_cheap`.
/// `Kmr`: `u = W t (w_costly - w_cheap/t + 1)`, `M^E = w_costly + w_cheap + 1`.
/// Both use `c = w_costly + gamma * w_cheap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    LinearTwitter { alpha: f64, gamma: f64 },
    Kmr { w: f64, gamma: f64 },
}

impl Family {
    pub fn gamma(&self) -> f64 {
        match *self {
            Family::LinearTwitter { gamma, .. } | Family::Kmr { gamma, .. } => gamma,
        }
    }

    /// Baseline offset in the normalized utility `w_costly - w_cheap/t + offset`.
    fn offset(&self) -> f64 {
        match *self {
            Family::LinearTwitter { alpha, .. } => alpha,
            Family::Kmr { .. } => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let gamma = self.gamma();
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must lie in [0, 1)")));
        }
        match *self {
            Family::LinearTwitter { alpha, .. } if !(alpha > -1.0 && alpha.is_finite()) => {
                Err(Error::InvalidParameter(format!("alpha = {alpha} must be finite and > -1")))
            }
            Family::Kmr { w, .. } if !(w > 0.0 && w.is_finite()) => {
                Err(Error::InvalidParameter(format!("W = {w} must be finite and > 0")))
            }
            _ => Ok(()),
        }
    }
}

/// Coefficients of the induced cost `C^E_t(m) = max(0, a_t (m + s) - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearityParams {
    /// `a[i]` belongs to the i-th type of the instance.
    pub a: Vec<f64>,
    pub s: f64,
}

impl LinearityParams {
    pub fn induced_cost(&self, type_index: usize, m: f64) -> f64 {
        (self.a[type_index] * (m + self.s) - 1.0).max(0.0)
    }
}

/// A model family paired with its type space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelInstance {
    family: Family,
    types: TypeSpace,
}

impl ModelInstance {
    pub fn new(family: Family, types: TypeSpace) -> Result<Self> {
        family.validate()?;
        if let Some(t) = types.types().iter().find(|t| **t <= 0.0) {
            return Err(Error::InvalidParameter(format!("type {t} must be > 0 for this family")));
        }
        Ok(ModelInstance { family, types })
    }

    /// Skips parameter validation; for auditing hypothetical instances.
    pub fn new_unchecked(family: Family, types: TypeSpace) -> Self {
        ModelInstance { family, types }
    }

    pub fn linear(alpha: f64, gamma: f64, types: &[f64]) -> Result<Self> {
        Self::new(Family::LinearTwitter { alpha, gamma }, TypeSpace::new(types.to_vec())?)
    }

    pub fn kmr(w: f64, gamma: f64, types: &[f64]) -> Result<Self> {
        Self::new(Family::Kmr { w, gamma }, TypeSpace::new(types.to_vec())?)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn type_space(&self) -> &TypeSpace {
        &self.types
    }

    pub fn types(&self) -> &[f64] {
        self.types.types()
    }

    pub fn gamma(&self) -> f64 {
        self.family.gamma()
    }

    pub fn cost(&self, w: Content) -> f64 {
        w.w_costly + self.gamma() * w.w_cheap
    }

    pub fn engagement(&self, w: Content) -> f64 {
        match self.family {
            Family::LinearTwitter { .. } => w.w_costly + w.w_cheap,
            Family::Kmr { .. } => w.w_costly + w.w_cheap + 1.0,
        }
    }

    pub fn utility(&self, w: Content, t: f64) -> f64 {
        match self.family {
            Family::LinearTwitter { alpha, .. } => w.w_costly - w.w_cheap / t + alpha,
            Family::Kmr { w: scale, .. } => scale * (t * (w.w_costly + 1.0) - w.w_cheap),
        }
    }

    /// Utility divided by its positive per-type scale, so the eligibility
    /// tolerance means the same thing in both families.
    fn normalized_utility(&self, w: Content, t: f64) -> f64 {
        w.w_costly - w.w_cheap / t + self.family.offset()
    }

    /// `u(w, t) >= 0`, up to [`ELIGIBILITY_TOL`].
    pub fn is_eligible(&self, w: Content, t: f64) -> bool {
        self.normalized_utility(w, t) >= -ELIGIBILITY_TOL
    }

    /// `f_t(w_cheap)`: least quality keeping type `t` at or above its outside option.
    pub fn min_investment(&self, t: f64, w_cheap: f64) -> f64 {
        (w_cheap / t - self.family.offset()).max(0.0)
    }

    /// Point of the cost-efficient curve for type `t` at gaming level `w_cheap`.
    pub fn curve_point(&self, t: f64, w_cheap: f64) -> Content {
        Content::new(self.min_investment(t, w_cheap), w_cheap)
    }

    /// `C_t(w_cheap)`.
    pub fn curve_cost(&self, t: f64, w_cheap: f64) -> f64 {
        self.cost(self.curve_point(t, w_cheap))
    }

    pub fn curve_engagement(&self, t: f64, w_cheap: f64) -> f64 {
        self.engagement(self.curve_point(t, w_cheap))
    }

    /// Smallest gaming level whose curve cost reaches `y`.
    pub fn curve_cost_inverse(&self, t: f64, y: f64) -> f64 {
        if y <= self.curve_cost(t, 0.0) {
            return 0.0;
        }
        let hi = bracket_upper(|x| self.curve_cost(t, x), y, 1.0);
        bisect_nondecreasing(|x| self.curve_cost(t, x), y, 0.0, hi)
    }

    /// Largest gaming level still at the curve's starting cost.
    pub fn cost_free_extent(&self, t: f64) -> f64 {
        let c0 = self.curve_cost(t, 0.0);
        let above = |x: f64| if self.curve_cost(t, x) > c0 { 1.0 } else { 0.0 };
        let hi = bracket_upper(above, 1.0, 1.0);
        bisect_nondecreasing(above, 1.0, 0.0, hi)
    }

    /// `beta_t = f_t(0)`.
    pub fn beta_t(&self, t: f64) -> f64 {
        self.min_investment(t, 0.0)
    }

    /// Cost of the cheapest quality-only content eligible for type `t`,
    /// evaluated at quality `w`.
    pub fn investment_cost(&self, w_costly: f64) -> f64 {
        self.cost(Content::new(w_costly, 0.0))
    }

    /// `C^E_t(m)`: cheapest eligible way to reach engagement `m`, found by
    /// bisection along the curve. Below the curve's minimum engagement the
    /// curve-minimum cost is returned.
    pub fn induced_cost(&self, t: f64, m: f64) -> f64 {
        if m <= self.curve_engagement(t, 0.0) {
            return self.curve_cost(t, 0.0);
        }
        let hi = bracket_upper(|x| self.curve_engagement(t, x), m, 1.0);
        let x = bisect_nondecreasing(|x| self.curve_engagement(t, x), m, 0.0, hi);
        self.curve_cost(t, x)
    }

    /// Coefficients making the induced cost piecewise linear, when they exist.
    pub fn linearity_params(&self) -> Option<LinearityParams> {
        let s = match self.family {
            Family::LinearTwitter { alpha, gamma } if alpha == 1.0 && gamma == 0.0 => 1.0,
            Family::Kmr { gamma: 0.0, .. } => 0.0,
            _ => return None,
        };
        let a = self.types().iter().map(|t| 1.0 / (1.0 + t)).collect();
        Some(LinearityParams { a, s })
    }

    /// `h(v, t)`: the curve point with reparameterized engagement
    /// `V = M^E + s` equal to `v`.
    pub fn reparam_to_content(&self, v: f64, t: f64) -> Result<Content> {
        let params = self.linearity_params().ok_or_else(|| {
            Error::Precondition("reparameterization needs linear induced costs".into())
        })?;
        let m = v - params.s;
        let m0 = self.curve_engagement(t, 0.0);
        if m < m0 - 1e-12 {
            return Err(Error::Domain { v, t, min: m0 + params.s });
        }
        if m <= m0 {
            return Ok(self.curve_point(t, 0.0));
        }
        let hi = bracket_upper(|x| self.curve_engagement(t, x), m, 1.0);
        let x = bisect_nondecreasing(|x| self.curve_engagement(t, x), m, 0.0, hi);
        Ok(self.curve_point(t, x))
    }

    /// Reparameterized engagement `M^E(w) + s`.
    pub fn reparam_engagement(&self, w: Content) -> Option<f64> {
        self.linearity_params().map(|p| self.engagement(w) + p.s)
    }
}

/// Grid for the assumption audit: `points` per axis over `[0, max]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: 50, max: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Grid point with the smallest margin, or `None` if the check has no grid.
    pub worst_point: Option<Content>,
    /// Smallest margin seen; negative (or zero for strict checks) means failure.
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tracker {
    name: &'static str,
    strict: bool,
    worst: f64,
    at: Option<Content>,
}

impl Tracker {
    fn new(name: &'static str, strict: bool) -> Self {
        Tracker { name, strict, worst: f64::INFINITY, at: None }
    }

    fn see(&mut self, margin: f64, w: Content) {
        if margin < self.worst {
            self.worst = margin;
            self.at = Some(w);
        }
    }

    fn finish(self) -> AssumptionCheck {
        let passed = if self.strict { self.worst > 0.0 } else { self.worst >= 0.0 };
        AssumptionCheck { name: self.name, passed, worst_point: self.at, worst_margin: self.worst }
    }
}

/// Finite-difference audit of the structural assumptions on cost, utility and
/// engagement. Failures are reported, never raised.
pub fn check_assumptions(inst: &ModelInstance, grid: GridSpec) -> AssumptionReport {
    let n = grid.points.max(2);
    let step = grid.max / (n - 1) as f64;
    let pts: Vec<Content> = (0..n)
        .flat_map(|i| (0..n).map(move |j| Content { w_costly: i as f64 * step, w_cheap: j as f64 * step }))
        .collect();
    let h = |x: f64| 1e-6 * x.abs().max(1.0);
    let d_costly = |f: &dyn Fn(Content) -> f64, w: Content| {
        let e = h(w.w_costly);
        (f(Content { w_costly: w.w_costly + e, ..w }) - f(Content { w_costly: w.w_costly - e, ..w })) / (2.0 * e)
    };
    let d_cheap = |f: &dyn Fn(Content) -> f64, w: Content| {
        let e = h(w.w_cheap);
        (f(Content { w_cheap: w.w_cheap + e, ..w }) - f(Content { w_cheap: w.w_cheap - e, ..w })) / (2.0 * e)
    };
    let cost = |w: Content| inst.cost(w);
    let eng = |w: Content| inst.engagement(w);

    let mut cost_nonneg = Tracker::new("cost_nonnegative", false);
    let mut cost_up = Tracker::new("cost_increasing_in_quality", true);
    let mut eng_nonneg = Tracker::new("engagement_nonnegative", false);
    let mut eng_costly = Tracker::new("engagement_increasing_in_quality", true);
    let mut eng_cheap = Tracker::new("engagement_increasing_in_gaming", true);
    let mut u_costly = Tracker::new("utility_increasing_in_quality", true);
    let mut u_cheap = Tracker::new("utility_decreasing_in_gaming", true);
    let mut type_mono = Tracker::new("type_monotonicity", false);
    let mut effective = Tracker::new("cost_effectiveness", true);
    let mut gaming_slopes = Vec::with_capacity(pts.len());

    for &w in &pts {
        cost_nonneg.see(cost(w), w);
        cost_up.see(d_costly(&cost, w), w);
        eng_nonneg.see(eng(w), w);
        eng_costly.see(d_costly(&eng, w), w);
        eng_cheap.see(d_cheap(&eng, w), w);
        for &t in inst.types() {
            let u = |w: Content| inst.utility(w, t);
            u_costly.see(d_costly(&u, w), w);
            u_cheap.see(-d_cheap(&u, w), w);
        }
        for pair in inst.types().windows(2) {
            if inst.utility(w, pair[0]) >= 0.0 {
                type_mono.see(inst.utility(w, pair[1]), w);
            }
        }
        let (c1, c2) = (d_costly(&cost, w), d_cheap(&cost, w));
        let (m1, m2) = (d_costly(&eng, w), d_cheap(&eng, w));
        effective.see(m2 / m1 - c2 / c1, w);
        gaming_slopes.push(c2);
    }
    if type_mono.at.is_none() {
        type_mono.worst = 0.0;
    }

    let origin = cost(Content::ORIGIN);
    let origin_check = AssumptionCheck {
        name: "cost_zero_at_origin",
        passed: origin == 0.0,
        worst_point: Some(Content::ORIGIN),
        worst_margin: -origin.abs(),
    };
    // Gaming cost must be either strictly positive everywhere or identically zero.
    let all_zero = gaming_slopes.iter().all(|s| s.abs() < 1e-9);
    let min_slope = gaming_slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let gaming_check = AssumptionCheck {
        name: "gaming_cost_sign",
        passed: all_zero || min_slope > 0.0,
        worst_point: None,
        worst_margin: if all_zero { 0.0 } else { min_slope },
    };

    AssumptionReport {
        checks: vec![
            cost_nonneg.finish(),
            origin_check,
            cost_up.finish(),
            gaming_check,
            u_costly.finish(),
            u_cheap.finish(),
            type_mono.finish(),
            eng_nonneg.finish(),
            eng_costly.finish(),
            eng_cheap.finish(),
            effective.finish(),
        ],
    }
}

/// Types given as a list, or generated from a named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TypesConfig {
    List(Vec<f64>),
    WellSeparated { well_separated: WellSeparatedSpec },
    RatioPair { ratio_pair: RatioPairSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellSeparatedSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioPairSpec {
    pub epsilon: f64,
    pub c: f64,
}

impl TypesConfig {
    pub fn build(&self) -> Result<TypeSpace> {
        match self {
            TypesConfig::List(v) => TypeSpace::new(v.clone()),
            TypesConfig::WellSeparated { well_separated: s } => TypeSpace::well_separated(s.n, s.epsilon),
            TypesConfig::RatioPair { ratio_pair: s } => TypeSpace::ratio_pair(s.epsilon, s.c),
        }
    }
}

/// JSON form: `{"family": "linear"|"kmr", "alpha"|"W": x, "gamma": g, "types": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    pub gamma: f64,
    pub types: TypesConfig,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelInstance> {
        let family = match self.family.as_str() {
            "linear" => {
                if self.w.is_some() {
                    return Err(Error::Config("linear family takes \"alpha\", not \"W\"".into()));
                }
                let alpha = self.alpha.ok_or_else(|| Error::Config("linear family needs \"alpha\"".into()))?;
                Family::LinearTwitter { alpha, gamma: self.gamma }
            }
            "kmr" => {
                if self.alpha.is_some() {
                    return Err(Error::Config("kmr family takes \"W\", not \"alpha\"".into()));
                }
                let w = self.w.ok_or_else(|| Error::Config("kmr family needs \"W\"".into()))?;
                Family::Kmr { w, gamma: self.gamma }
            }
            other => return Err(Error::Config(format!("unknown family {other:?}"))),
        };
        ModelInstance::new(family, self.types.build()?)
    }

    pub fn from_json(s: &str) -> Result<ModelInstance> {
        let cfg: ModelConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.build()
    }
}
