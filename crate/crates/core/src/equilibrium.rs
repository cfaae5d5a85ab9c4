//! Samplable representations of the closed-form symmetric equilibria: under
//! engagement ranking (one type, two types, well-separated types), under
//! quality ranking, and under random ranking.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Content, ModelInstance, TypeSpace};
use crate::numeric::{bisect_nondecreasing, bracket_upper};

/// Lower edge of the overlapping two-type regime, `(5 - sqrt 5) / 2`.
pub const CASE2_LOW: f64 = 1.381_966_011_250_105;

/// CDF of the form `(min(1, scale * C(x))^exponent - floor) / (1 - floor)`,
/// clamped to `[0, 1]`, where `C` is a nondecreasing cost along some axis.
/// `floor` removes an atom that is represented separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostPowerCdf {
    pub scale: f64,
    pub exponent: f64,
    pub floor: f64,
}

impl CostPowerCdf {
    fn eval(&self, cost: f64) -> f64 {
        let g = (self.scale * cost).clamp(0.0, 1.0).powf(self.exponent);
        ((g - self.floor) / (1.0 - self.floor)).clamp(0.0, 1.0)
    }

    /// Cost level at which the CDF takes the value `u`.
    fn cost_at(&self, u: f64) -> f64 {
        let g = self.floor + u * (1.0 - self.floor);
        g.powf(1.0 / self.exponent) / self.scale
    }
}

/// Interval of constant density in reparameterized engagement `V`, with the
/// probability that content drawn there targets the first type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VtPiece {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    pub p_first: f64,
}

impl VtPiece {
    pub fn density(&self) -> f64 {
        self.mass / (self.hi - self.lo)
    }

    fn cdf(&self, v: f64) -> f64 {
        if self.hi <= self.lo {
            return f64::from(u8::from(v >= self.lo));
        }
        ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    /// All mass on one content.
    Atom { content: Content },
    /// Content on the type-`t` curve with gaming level distributed as `cdf` of `C_t`.
    Curve { t: f64, cdf: CostPowerCdf },
    /// Quality-only content with quality distributed as `cdf` of `c(w, 0)`.
    QualityAxis { cdf: CostPowerCdf },
    /// Joint law of `(V, T)` over two types, mapped to content by `h(v, t)`.
    VtDensity { types: [f64; 2], pieces: Vec<VtPiece> },
}

/// Which construction produced a strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Construction {
    PointMass,
    EngagementHomogeneous { players: usize },
    EngagementTwoTypes { case: u8, ratio: f64 },
    EngagementWellSeparated { n_prime: usize },
    Investment { players: usize },
    Random { players: usize, nu: f64 },
}

/// A symmetric mixed strategy: a finite mixture of components.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    model: ModelInstance,
    components: Vec<(f64, Component)>,
    cumulative: Vec<f64>,
    construction: Construction,
}

impl MixedStrategy {
    pub fn new(model: ModelInstance, components: Vec<(f64, Component)>, construction: Construction) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("strategy has no components".into()));
        }
        if components.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("component weights must be nonnegative".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("component weights sum to {total}, not 1")));
        }
        for (_, c) in &components {
            if let Component::VtDensity { pieces, .. } = c {
                let m: f64 = pieces.iter().map(|p| p.mass).sum();
                if (m - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!("density pieces carry mass {m}, not 1")));
                }
            }
        }
        let mut acc = 0.0;
        let cumulative = components
            .iter()
            .map(|(w, _)| {
                acc += w;
                acc
            })
            .collect();
        Ok(MixedStrategy { model, components, cumulative, construction })
    }

    pub fn point_mass(model: ModelInstance, content: Content) -> Self {
        MixedStrategy {
            model,
            components: vec![(1.0, Component::Atom { content })],
            cumulative: vec![1.0],
            construction: Construction::PointMass,
        }
    }

    pub fn model(&self) -> &ModelInstance {
        &self.model
    }

    pub fn components(&self) -> &[(f64, Component)] {
        &self.components
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// Draws one content.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Content {
        self.sample_labeled(rng).0
    }

    /// Draws one content together with the type whose curve it lies on, if any.
    pub fn sample_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> (Content, Option<f64>) {
        let u: f64 = rng.gen();
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.components.len() - 1);
        let m = &self.model;
        match &self.components[k].1 {
            Component::Atom { content } => (*content, None),
            Component::Curve { t, cdf } => {
                let x = m.curve_cost_inverse(*t, cdf.cost_at(rng.gen()));
                (m.curve_point(*t, x), Some(*t))
            }
            Component::QualityAxis { cdf } => {
                let y = cdf.cost_at(rng.gen());
                let q = if y <= 0.0 {
                    0.0
                } else {
                    let hi = bracket_upper(|w| m.investment_cost(w), y, 1.0);
                    bisect_nondecreasing(|w| m.investment_cost(w), y, 0.0, hi)
                };
                (Content::new(q, 0.0), None)
            }
            Component::VtDensity { types, pieces } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut piece = pieces[pieces.len() - 1];
                for p in pieces {
                    acc += p.mass;
                    if u < acc {
                        piece = *p;
                        break;
                    }
                }
                let v = piece.lo + rng.gen::<f64>() * (piece.hi - piece.lo);
                let t = if rng.gen::<f64>() < piece.p_first { types[0] } else { types[1] };
                let w = m
                    .reparam_to_content(v, t)
                    .expect("density pieces lie inside the curve's engagement range");
                (w, Some(t))
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Content> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// Exact mixture CDF of the gaming coordinate.
    pub fn cheap_marginal_cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let m = &self.model;
        let total: f64 = self
            .components
            .iter()
            .map(|(w, c)| {
                w * match c {
                    Component::Atom { content } => f64::from(u8::from(x >= content.w_cheap)),
                    Component::Curve { t, cdf } => cdf.eval(m.curve_cost(*t, x)),
                    Component::QualityAxis { .. } => 1.0,
                    Component::VtDensity { types, pieces } => {
                        let s = m.linearity_params().map_or(0.0, |p| p.s);
                        let v1 = m.curve_engagement(types[0], x) + s;
                        let v2 = m.curve_engagement(types[1], x) + s;
                        pieces
                            .iter()
                            .map(|p| p.mass * (p.p_first * p.cdf(v1) + (1.0 - p.p_first) * p.cdf(v2)))
                            .sum()
                    }
                }
            })
            .sum();
        total.clamp(0.0, 1.0)
    }

    /// Component list with CDF breakpoints, for display and plotting.
    pub fn describe(&self) -> StrategyDescription {
        let m = &self.model;
        let components = self
            .components
            .iter()
            .map(|(weight, c)| {
                let breakpoints = match c {
                    Component::Atom { content } => vec![[content.w_cheap, 1.0]],
                    Component::Curve { t, cdf } => {
                        let top = m.curve_cost_inverse(*t, cdf.cost_at(1.0));
                        grid(top, 16).map(|x| [x, cdf.eval(m.curve_cost(*t, x))]).collect()
                    }
                    Component::QualityAxis { cdf } => {
                        let y = cdf.cost_at(1.0);
                        let hi = bracket_upper(|w| m.investment_cost(w), y, 1.0);
                        let top = bisect_nondecreasing(|w| m.investment_cost(w), y, 0.0, hi);
                        grid(top, 16).map(|w| [w, cdf.eval(m.investment_cost(w))]).collect()
                    }
                    Component::VtDensity { pieces, .. } => {
                        let mut acc = 0.0;
                        pieces
                            .iter()
                            .map(|p| {
                                acc += p.mass;
                                [p.hi, acc]
                            })
                            .collect()
                    }
                };
                ComponentDescription { weight: *weight, component: c.clone(), breakpoints }
            })
            .collect();
        StrategyDescription { construction: self.construction, model: m.clone(), components }
    }
}

fn grid(top: f64, k: usize) -> impl Iterator<Item = f64> {
    (0..=k).map(move |i| top * i as f64 / k as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentDescription {
    pub weight: f64,
    #[serde(flatten)]
    pub component: Component,
    /// `[x, F(x)]` pairs of the component's own CDF (over `V` for densities).
    pub breakpoints: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyDescription {
    pub construction: Construction,
    pub model: ModelInstance,
    pub components: Vec<ComponentDescription>,
}

fn check_players(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::Precondition(format!("need at least 2 creators, got {p}")));
    }
    Ok(())
}

/// Engagement-ranking equilibrium for a single user type and `p` creators:
/// `P[W_cheap <= x] = min(1, C_t(x))^(1/(p-1))` along the type's curve, with
/// an atom at the origin when the curve starts at positive cost.
pub fn engagement_eq_homogeneous(inst: &ModelInstance, p: usize) -> Result<MixedStrategy> {
    check_players(p)?;
    if !inst.type_space().is_homogeneous() {
        return Err(Error::Precondition("homogeneous construction needs exactly one type".into()));
    }
    let t = inst.types()[0];
    let exponent = 1.0 / (p - 1) as f64;
    let atom = inst.curve_cost(t, 0.0).min(1.0).powf(exponent);
    let construction = Construction::EngagementHomogeneous { players: p };
    if atom >= 1.0 {
        return Ok(MixedStrategy { construction, ..MixedStrategy::point_mass(inst.clone(), Content::ORIGIN) });
    }
    let curve = Component::Curve { t, cdf: CostPowerCdf { scale: 1.0, exponent, floor: atom } };
    let components = if atom > 0.0 {
        vec![(atom, Component::Atom { content: Content::ORIGIN }), (1.0 - atom, curve)]
    } else {
        vec![(1.0, curve)]
    };
    MixedStrategy::new(inst.clone(), components, construction)
}

/// Shared preconditions of the heterogeneous engagement constructions.
fn heterogeneous_checks(inst: &ModelInstance) -> Result<Vec<f64>> {
    if inst.gamma() != 0.0 {
        return Err(Error::Precondition("heterogeneous construction needs costless gaming (gamma = 0)".into()));
    }
    if let Some(t) = inst.types().iter().find(|&&t| inst.utility(Content::ORIGIN, t) < 0.0) {
        return Err(Error::Precondition(format!("type {t} rejects the origin")));
    }
    let params = inst
        .linearity_params()
        .ok_or_else(|| Error::Precondition("induced costs are not linear for this instance".into()))?;
    Ok(params.a)
}

/// Engagement-ranking equilibrium for two user types and two creators, in
/// `(V, T)` coordinates. The regime is chosen by `r = a_1 / a_2`:
/// disjoint supports for `r >= 1.5`, overlapping for `r` in
/// `[CASE2_LOW, 1.5)`, nested below.
pub fn engagement_eq_two_types(inst: &ModelInstance) -> Result<MixedStrategy> {
    if inst.types().len() != 2 {
        return Err(Error::Precondition("two-type construction needs exactly two types".into()));
    }
    let a = heterogeneous_checks(inst)?;
    let (a1, a2) = (a[0], a[1]);
    let r = a1 / a2;
    if !(r > 1.0) {
        return Err(Error::Precondition(format!("coefficient ratio {r} must exceed 1")));
    }
    let piece = |lo: f64, hi: f64, density: f64, p_first: f64| VtPiece { lo, hi, mass: density * (hi - lo), p_first };
    let (case, pieces) = if r >= 1.5 {
        (1, vec![piece(1.0 / a1, 1.5 / a1, a1, 1.0), piece(1.0 / a2, 1.25 / a2, 2.0 * a2, 0.0)])
    } else if r >= CASE2_LOW {
        let mid = 1.0 / (2.0 * a2 * (r - 1.0));
        (
            2,
            vec![
                piece(1.0 / a1, 1.0 / a2, a1, 1.0),
                piece(1.0 / a2, mid, 2.0 * a2, r - 1.0),
                piece(mid, (2.0 - r / 2.0) / a2, 2.0 * a2, 0.0),
            ],
        )
    } else {
        let x3 = (3.0 - r) / (2.0 * a2 * (2.0 - r));
        let x4 = 1.0 / a1 + (1.0 / a1 - 1.0 / (2.0 * a2)) * (3.0 - r) / (2.0 - r);
        (
            3,
            vec![
                piece(1.0 / a1, 1.0 / a2, a1, 1.0),
                piece(1.0 / a2, x3, 2.0 * a2, r - 1.0),
                piece(x3, x4, a1, 1.0),
            ],
        )
    };
    let types = [inst.types()[0], inst.types()[1]];
    MixedStrategy::new(
        inst.clone(),
        vec![(1.0, Component::VtDensity { types, pieces })],
        Construction::EngagementTwoTypes { case, ratio: r },
    )
}

/// Minimal `N'` with `sum_{i=1}^{N'} 1/(N-i+1) >= 1`.
pub fn n_prime(n: usize) -> usize {
    assert!(n >= 1, "n_prime needs N >= 1");
    let mut acc = 0.0;
    for i in 1..=n {
        acc += 1.0 / (n - i + 1) as f64;
        if acc >= 1.0 - 1e-12 {
            return i;
        }
    }
    n
}

/// Mixture weights of the well-separated construction: `1/(N-i+1)` for
/// `i < N'` and the residual for `i = N'`.
pub fn mix_weights(n: usize) -> Vec<f64> {
    let np = n_prime(n);
    let mut w: Vec<f64> = (1..np).map(|i| 1.0 / (n - i + 1) as f64).collect();
    let used: f64 = w.iter().sum();
    w.push(1.0 - used);
    w
}

pub fn make_well_separated_types(n: usize, eps: f64) -> Result<TypeSpace> {
    TypeSpace::well_separated(n, eps)
}

/// Engagement-ranking equilibrium for two creators and `N` well-separated
/// types: the first `N'` types each get a curve component whose gaming level
/// has CDF `min(N C_t(x), 1)`, the last with a rescaled slope.
pub fn engagement_eq_well_separated(inst: &ModelInstance) -> Result<MixedStrategy> {
    let a = heterogeneous_checks(inst)?;
    let n = a.len();
    let np = n_prime(n);
    let sep = 1.0 + 1.0 / n as f64;
    for i in 0..np.saturating_sub(1) {
        if a[i] < sep * a[i + 1] * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "types {} and {} are not separated: a ratio {} < {}",
                inst.types()[i],
                inst.types()[i + 1],
                a[i] / a[i + 1],
                sep
            )));
        }
    }
    let weights = mix_weights(n);
    let residual = weights[np - 1];
    let components = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let scale = if i + 1 < np { n as f64 } else { n as f64 / (n - np + 1) as f64 / residual };
            (w, Component::Curve { t: inst.types()[i], cdf: CostPowerCdf { scale, exponent: 1.0, floor: 0.0 } })
        })
        .collect();
    MixedStrategy::new(inst.clone(), components, Construction::EngagementWellSeparated { n_prime: np })
}

/// Quality-ranking equilibrium: no gaming, quality CDF
/// `min(1, c(w, 0))^(1/(p-1))` above the minimum viable investment.
pub fn investment_eq(inst: &ModelInstance, p: usize) -> Result<MixedStrategy> {
    check_players(p)?;
    let beta = if inst.type_space().is_homogeneous() {
        inst.beta_t(inst.types()[0])
    } else if inst.types().iter().all(|&t| inst.beta_t(t) == 0.0) {
        0.0
    } else {
        return Err(Error::Precondition("heterogeneous types with positive minimum investment".into()));
    };
    let exponent = 1.0 / (p - 1) as f64;
    let atom = inst.investment_cost(beta).min(1.0).powf(exponent);
    let construction = Construction::Investment { players: p };
    if atom >= 1.0 {
        return Ok(MixedStrategy { construction, ..MixedStrategy::point_mass(inst.clone(), Content::ORIGIN) });
    }
    let axis = Component::QualityAxis { cdf: CostPowerCdf { scale: 1.0, exponent, floor: atom } };
    let components = if atom > 0.0 {
        vec![(atom, Component::Atom { content: Content::ORIGIN }), (1.0 - atom, axis)]
    } else {
        vec![(1.0, axis)]
    };
    MixedStrategy::new(inst.clone(), components, construction)
}

/// Opt-out probability `nu` of the random-ranking equilibrium: zero when
/// `kappa <= 1/p`, otherwise the root of `sum_{i<p} nu^i = p kappa` on `[0, 1]`.
pub fn opt_out_probability(kappa: f64, p: usize) -> f64 {
    let target = p as f64 * kappa;
    if kappa <= 1.0 / p as f64 {
        return 0.0;
    }
    let poly = |nu: f64| (0..p).map(|i| nu.powi(i as i32)).sum::<f64>();
    bisect_nondecreasing(poly, target, 0.0, 1.0)
}

/// Random-ranking equilibrium: opt out at the origin with probability `nu`,
/// otherwise play the cheapest eligible content `(beta_t, 0)`.
pub fn random_eq(inst: &ModelInstance, p: usize) -> Result<MixedStrategy> {
    check_players(p)?;
    if !inst.type_space().is_homogeneous() {
        if inst.types().iter().all(|&t| inst.beta_t(t) == 0.0) {
            return Ok(MixedStrategy {
                construction: Construction::Random { players: p, nu: 0.0 },
                ..MixedStrategy::point_mass(inst.clone(), Content::ORIGIN)
            });
        }
        return Err(Error::Precondition("heterogeneous types with positive minimum investment".into()));
    }
    let beta = inst.beta_t(inst.types()[0]);
    let kappa = inst.investment_cost(beta).min(1.0);
    let nu = if beta > 0.0 { opt_out_probability(kappa, p) } else { 0.0 };
    let construction = Construction::Random { players: p, nu };
    let viable = Content::new(beta, 0.0);
    let mut components = Vec::new();
    if nu > 0.0 {
        components.push((nu, Component::Atom { content: Content::ORIGIN }));
    }
    if nu < 1.0 {
        components.push((1.0 - nu, Component::Atom { content: viable }));
    }
    MixedStrategy::new(inst.clone(), components, construction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::rng_from_seed;
    use crate::stats::ks_distance;
    use crate::verify::support_containment;
    use proptest::prelude::*;

    fn lin(alpha: f64, gamma: f64, types: &[f64]) -> ModelInstance {
        ModelInstance::linear(alpha, gamma, types).unwrap()
    }

    fn weights_sum(s: &MixedStrategy) -> f64 {
        s.components().iter().map(|(w, _)| w).sum()
    }

    #[test]
    fn homogeneous_zero_offset_is_uniform_diagonal() {
        let s = engagement_eq_homogeneous(&lin(0.0, 0.0, &[1.0]), 2).unwrap();
        let mut rng = rng_from_seed(1);
        let xs = s.sample_n(100_000, &mut rng);
        assert!(xs.iter().all(|w| w.w_costly == w.w_cheap));
        let mean = xs.iter().map(|w| w.w_cheap).sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.005);
        let cheap: Vec<f64> = xs.iter().map(|w| w.w_cheap).collect();
        assert!(ks_distance(&cheap, |x| x.clamp(0.0, 1.0)) < 0.01);
        assert!((s.cheap_marginal_cdf(0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_atom_at_origin_for_negative_baseline() {
        let s = engagement_eq_homogeneous(&lin(-0.5, 0.5, &[1.0]), 2).unwrap();
        let (w, c) = &s.components()[0];
        assert!((w - 0.5).abs() < 1e-15);
        assert_eq!(*c, Component::Atom { content: Content::ORIGIN });
        assert!((s.cheap_marginal_cdf(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_unit_offset_is_shifted_uniform() {
        let s = engagement_eq_homogeneous(&lin(1.0, 0.0, &[1.0]), 2).unwrap();
        let mut rng = rng_from_seed(2);
        let xs = s.sample_n(50_000, &mut rng);
        for w in &xs {
            assert!((w.w_costly - (w.w_cheap - 1.0)).abs() < 1e-12);
            assert!(w.w_cheap >= 1.0 - 1e-12 && w.w_cheap <= 2.0 + 1e-12);
        }
        let cheap: Vec<f64> = xs.iter().map(|w| w.w_cheap).collect();
        assert!(ks_distance(&cheap, |x| (x - 1.0).clamp(0.0, 1.0)) < 0.01);
    }

    #[test]
    fn homogeneous_full_atom_when_curve_starts_at_unit_cost() {
        // C_t(0) = 1 exactly at alpha = -1 (boundary); just inside the domain the
        // atom is close to but below 1.
        let s = engagement_eq_homogeneous(&lin(-0.999, 0.0, &[1.0]), 3).unwrap();
        assert!(s.components()[0].0 > 0.999);
        let inst = ModelInstance::new_unchecked(
            crate::model::Family::LinearTwitter { alpha: -1.5, gamma: 0.0 },
            TypeSpace::single(1.0).unwrap(),
        );
        let s = engagement_eq_homogeneous(&inst, 2).unwrap();
        assert_eq!(s.components().len(), 1);
        assert_eq!(s.sample(&mut rng_from_seed(0)), Content::ORIGIN);
    }

    #[test]
    fn homogeneous_rejects_heterogeneous_types() {
        assert!(matches!(
            engagement_eq_homogeneous(&lin(1.0, 0.0, &[1.0, 2.0]), 2),
            Err(Error::Precondition(_))
        ));
        assert!(engagement_eq_homogeneous(&lin(1.0, 0.0, &[1.0]), 1).is_err());
    }

    fn two_type(c: f64) -> MixedStrategy {
        let inst = ModelInstance::new(crate::model::Family::LinearTwitter { alpha: 1.0, gamma: 0.0 },
            TypeSpace::ratio_pair(0.01, c).unwrap()).unwrap();
        engagement_eq_two_types(&inst).unwrap()
    }

    #[test]
    fn two_type_case_dispatch() {
        let case = |c: f64| match two_type(c).construction() {
            Construction::EngagementTwoTypes { case, .. } => case,
            _ => unreachable!(),
        };
        assert_eq!(case(2.0), 1);
        assert_eq!(case(1.5), 1);
        assert_eq!(case(1.45), 2);
        assert_eq!(case(CASE2_LOW), 2);
        assert_eq!(case(1.38), 3);
        assert_eq!(case(1.2), 3);
    }

    #[test]
    fn two_type_case_one_first_piece() {
        let s = two_type(2.0);
        let Component::VtDensity { pieces, .. } = &s.components()[0].1 else { unreachable!() };
        let a1 = 1.0 / 1.01;
        assert!((pieces[0].lo - 1.0 / a1).abs() < 1e-12);
        assert!((pieces[0].hi - 1.5 / a1).abs() < 1e-12);
        assert!((pieces[0].density() - a1).abs() < 1e-12);
        assert_eq!(pieces[0].p_first, 1.0);
    }

    #[test]
    fn two_type_first_type_probability() {
        for &c in &[1.2, 1.3, 1.45, 1.49] {
            let s = two_type(c);
            let Component::VtDensity { pieces, .. } = &s.components()[0].1 else { unreachable!() };
            let p1: f64 = pieces.iter().map(|p| p.mass * p.p_first).sum();
            assert!((p1 - (2.0 - c)).abs() < 1e-9, "c={c} p1={p1}");
            let t1 = s.model().types()[0];
            let mut rng = rng_from_seed(9);
            let n = 40_000;
            let hits = (0..n).filter(|_| s.sample_labeled(&mut rng).1 == Some(t1)).count() as f64;
            let phat = hits / n as f64;
            let se = ((2.0 - c) * (c - 1.0) / n as f64).sqrt();
            assert!((phat - (2.0 - c)).abs() < 3.0 * se + 1e-12, "c={c} phat={phat}");
        }
    }

    #[test]
    fn two_type_boundary_densities_agree() {
        // At ratio 1.5 the overlapping-regime formulas reduce to the disjoint regime.
        let a2: f64 = 1.0 / (1.5 * 1.01);
        let mid = 1.0 / (2.0 * a2 * 0.5);
        assert!((mid - 1.0 / a2).abs() < 1e-12);
        assert!(((2.0 - 0.75) / a2 - 1.25 / a2).abs() < 1e-12);
    }

    #[test]
    fn two_type_preconditions() {
        assert!(engagement_eq_two_types(&lin(1.0, 0.1, &[0.5, 2.0])).is_err());
        assert!(engagement_eq_two_types(&lin(0.5, 0.0, &[0.5, 2.0])).is_err());
        assert!(engagement_eq_two_types(&lin(1.0, 0.0, &[0.5])).is_err());
        assert!(engagement_eq_two_types(&ModelInstance::kmr(1.0, 0.0, &[0.5, 2.0]).unwrap()).is_ok());
    }

    #[test]
    fn n_prime_examples_and_weights() {
        assert_eq!(n_prime(1), 1);
        assert_eq!(n_prime(2), 2);
        assert_eq!(n_prime(3), 3);
        assert_eq!(n_prime(4), 3);
        let w = mix_weights(4);
        let expect = [0.25, 1.0 / 3.0, 5.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(mix_weights(2), vec![0.5, 0.5]);
        assert_eq!(mix_weights(1), vec![1.0]);
    }

    #[test]
    fn n_prime_sandwich_for_large_n() {
        for n in [50usize, 100, 500, 1000] {
            let k = (n - n_prime(n) + 1) as f64;
            let nf = n as f64;
            let e = std::f64::consts::E;
            assert!((nf + 1.0) / e - 1.0 < k, "N={n}");
            assert!(k < nf / e.powf(1.0 - 3.0 / (nf + 1.0)), "N={n}");
        }
    }

    /// Independent route to `N'`: exact rational partial sums via a common denominator.
    fn n_prime_exact(n: u64) -> usize {
        let (mut num, mut den) = (0u128, 1u128);
        for i in 1..=n {
            let d = (n - i + 1) as u128;
            num = num * d + den;
            den *= d;
            let g = gcd(num, den);
            num /= g;
            den /= g;
            if num >= den {
                return i as usize;
            }
        }
        n as usize
    }

    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    #[test]
    fn n_prime_matches_exact_rationals() {
        for n in 1..=30u64 {
            assert_eq!(n_prime(n as usize), n_prime_exact(n), "N={n}");
        }
    }

    #[test]
    fn well_separated_structure() {
        let inst = ModelInstance::new(
            crate::model::Family::LinearTwitter { alpha: 1.0, gamma: 0.0 },
            make_well_separated_types(4, 0.01).unwrap(),
        )
        .unwrap();
        let s = engagement_eq_well_separated(&inst).unwrap();
        assert_eq!(s.components().len(), 3);
        assert!((weights_sum(&s) - 1.0).abs() < 1e-12);
        // V-supports of the components are disjoint and ordered.
        let a: Vec<f64> = inst.types().iter().map(|t| 1.0 / (1.0 + t)).collect();
        let w = mix_weights(4);
        let mut prev_hi = 0.0;
        for i in 0..3 {
            let lo = 1.0 / a[i];
            let hi = if i < 2 { lo * 1.25 } else { lo * (1.0 + 2.0 / 4.0 * w[2]) };
            assert!(lo >= prev_hi - 1e-12);
            prev_hi = hi;
        }
        let mut rng = rng_from_seed(4);
        let xs = s.sample_n(20_000, &mut rng);
        assert!(support_containment(&xs, &inst, 1e-9).is_empty());
    }

    #[test]
    fn well_separated_rejects_crowded_types() {
        let inst = lin(1.0, 0.0, &[1.0, 1.1, 1.2]);
        let err = engagement_eq_well_separated(&inst).unwrap_err();
        assert!(err.to_string().contains("not separated"), "{err}");
    }

    #[test]
    fn well_separated_single_type_matches_homogeneous_cdf() {
        let inst = lin(1.0, 0.0, &[1.0]);
        let ws = engagement_eq_well_separated(&inst).unwrap();
        let h = engagement_eq_homogeneous(&inst, 2).unwrap();
        for i in 0..50 {
            let x = i as f64 * 0.05;
            assert!((ws.cheap_marginal_cdf(x) - h.cheap_marginal_cdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn investment_examples() {
        let s = investment_eq(&lin(1.0, 0.0, &[1.0]), 2).unwrap();
        let mut rng = rng_from_seed(5);
        let q: Vec<f64> = s.sample_n(50_000, &mut rng).iter().map(|w| w.w_costly).collect();
        assert!(ks_distance(&q, |w| w.clamp(0.0, 1.0)) < 0.01);

        let s = investment_eq(&lin(-0.5, 0.0, &[1.0]), 2).unwrap();
        assert!((s.components()[0].0 - 0.5).abs() < 1e-15);
        let xs = s.sample_n(50_000, &mut rng);
        assert!(xs.iter().all(|w| w.w_cheap == 0.0 && (w.w_costly == 0.0 || w.w_costly >= 0.5)));
        let q: Vec<f64> = xs.iter().map(|w| w.w_costly).collect();
        let cdf = |w: f64| if w < 0.0 { 0.0 } else if w < 0.5 { 0.5 } else { w.min(1.0) };
        assert!(ks_distance(&q, cdf) < 0.01);

        let s = investment_eq(&lin(1.0, 0.0, &[1.0]), 3).unwrap();
        let q: Vec<f64> = s.sample_n(50_000, &mut rng).iter().map(|w| w.w_costly).collect();
        assert!(ks_distance(&q, |w| w.clamp(0.0, 1.0).sqrt()) < 0.01);
    }

    #[test]
    fn investment_heterogeneous() {
        assert!(investment_eq(&lin(0.5, 0.0, &[1.0, 2.0]), 2).is_ok());
        assert!(matches!(investment_eq(&lin(-0.5, 0.0, &[1.0, 2.0]), 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn opt_out_examples() {
        assert!((opt_out_probability(0.75, 2) - 0.5).abs() < 1e-11);
        assert_eq!(opt_out_probability(0.3, 2), 0.0);
        assert_eq!(opt_out_probability(0.5, 2), 0.0);
        assert!((opt_out_probability(1.0, 3) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn random_eq_shapes() {
        let s = random_eq(&lin(1.0, 0.0, &[1.0]), 2).unwrap();
        assert_eq!(s.components().len(), 1);
        assert_eq!(s.sample(&mut rng_from_seed(0)), Content::ORIGIN);
        let s = random_eq(&lin(-0.75, 0.0, &[1.0]), 2).unwrap();
        assert_eq!(s.components().len(), 2);
        assert!((s.components()[0].0 - 0.5).abs() < 1e-11);
        assert_eq!(s.components()[1].1, Component::Atom { content: Content::new(0.75, 0.0) });
        let s = random_eq(&lin(0.5, 0.0, &[1.0, 3.0]), 2).unwrap();
        assert_eq!(s.components().len(), 1);
        assert!(random_eq(&lin(-0.5, 0.0, &[1.0, 3.0]), 2).is_err());
    }

    #[test]
    fn cheap_cdf_limits() {
        let strategies = [
            engagement_eq_homogeneous(&lin(0.3, 0.4, &[2.0]), 3).unwrap(),
            two_type(1.3),
            investment_eq(&lin(1.0, 0.0, &[1.0]), 2).unwrap(),
        ];
        for s in &strategies {
            assert_eq!(s.cheap_marginal_cdf(-0.1), 0.0);
            assert_eq!(s.cheap_marginal_cdf(1e6), 1.0);
        }
    }

    #[test]
    fn describe_serializes() {
        let s = two_type(1.3);
        let json = serde_json::to_string(&s.describe()).unwrap();
        assert!(json.contains("vt_density"));
        let s = engagement_eq_homogeneous(&lin(-0.5, 0.5, &[1.0]), 2).unwrap();
        let d = s.describe();
        assert_eq!(d.components.len(), 2);
        let last = d.components[1].breakpoints.last().unwrap();
        assert!((last[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_type_cheap_cdf_matches_samples() {
        let s = two_type(1.3);
        let mut rng = rng_from_seed(11);
        let xs: Vec<f64> = s.sample_n(40_000, &mut rng).iter().map(|w| w.w_cheap).collect();
        assert!(ks_distance(&xs, |x| s.cheap_marginal_cdf(x)) < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn homogeneous_invariants(alpha in -0.9f64..2.0, gamma in 0.0f64..0.9, t in 0.2f64..4.0, p in 2usize..5, seed in any::<u64>()) {
            let inst = lin(alpha, gamma, &[t]);
            let s = engagement_eq_homogeneous(&inst, p).unwrap();
            prop_assert!((weights_sum(&s) - 1.0).abs() < 1e-12);
            let mut prev = 0.0;
            for i in 0..1000 {
                let f = s.cheap_marginal_cdf(i as f64 * 0.01 * (t * (alpha.max(0.0) + 2.0)));
                prop_assert!(f >= prev - 1e-15);
                prev = f;
            }
            let mut rng = rng_from_seed(seed);
            let xs = s.sample_n(500, &mut rng);
            prop_assert!(support_containment(&xs, &inst, 1e-9).is_empty());
            prop_assert!(crate::verify::check_positive_correlation(&xs, 1e-9).is_empty());
        }

        #[test]
        fn two_type_invariants(c in 1.01f64..3.0, kmr in any::<bool>(), seed in any::<u64>()) {
            let types = TypeSpace::ratio_pair(0.05, c).unwrap();
            let family = if kmr {
                crate::model::Family::Kmr { w: 1.0, gamma: 0.0 }
            } else {
                crate::model::Family::LinearTwitter { alpha: 1.0, gamma: 0.0 }
            };
            let inst = ModelInstance::new(family, types).unwrap();
            let s = engagement_eq_two_types(&inst).unwrap();
            let Component::VtDensity { pieces, .. } = &s.components()[0].1 else { unreachable!() };
            for p in pieces {
                prop_assert!(p.hi >= p.lo - 1e-12 && p.mass >= -1e-12);
            }
            let mut rng = rng_from_seed(seed);
            let xs = s.sample_n(300, &mut rng);
            prop_assert!(support_containment(&xs, &inst, 1e-9).is_empty());
        }
    }
}
