//! One round of the game: creators' content is realized, a user type is
//! drawn, the platform shows the best eligible item under its metric, and the
//! user consumes it.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::equilibrium::MixedStrategy;
use crate::error::{Error, Result};
use crate::model::{Content, ModelInstance};
use crate::stats::{MetricEstimate, RunningStats};

/// Scores within this relative distance are tied.
pub const TIE_TOL: f64 = 1e-12;

/// Platform ranking metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Engagement,
    Investment,
    Random,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Engagement, Metric::Investment, Metric::Random];

    pub fn score(self, inst: &ModelInstance, w: Content) -> f64 {
        match self {
            Metric::Engagement => inst.engagement(w),
            Metric::Investment => w.w_costly,
            Metric::Random => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Engagement => "engagement",
            Metric::Investment => "investment",
            Metric::Random => "random",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "engagement" => Ok(Metric::Engagement),
            "investment" => Ok(Metric::Investment),
            "random" => Ok(Metric::Random),
            other => Err(Error::Config(format!("unknown recommender {other:?}"))),
        }
    }
}

pub fn scores_tie(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOL * a.abs().max(b.abs())
}

/// Index of the item shown to a type-`t` user: uniformly among the eligible
/// items of maximal score, or `None` when nothing is eligible.
pub fn recommend<R: Rng + ?Sized>(
    inst: &ModelInstance,
    metric: Metric,
    landscape: &[Content],
    t: f64,
    rng: &mut R,
) -> Result<Option<usize>> {
    if landscape.is_empty() {
        return Err(Error::Precondition("empty landscape".into()));
    }
    let scored: Vec<(usize, f64)> = landscape
        .iter()
        .enumerate()
        .filter(|(_, w)| inst.is_eligible(**w, t))
        .map(|(i, w)| (i, metric.score(inst, *w)))
        .collect();
    let Some(best) = scored.iter().map(|s| s.1).reduce(f64::max) else {
        return Ok(None);
    };
    let tied: Vec<usize> = scored.iter().filter(|s| scores_tie(s.1, best)).map(|s| s.0).collect();
    if tied.len() == 1 {
        return Ok(Some(tied[0]));
    }
    Ok(Some(tied[rng.gen_range(0..tied.len())]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundOutcome {
    pub winner: Option<usize>,
    pub consumed: bool,
    pub engagement: f64,
    pub quality: f64,
    pub user_utility: f64,
    pub user_type: f64,
}

/// Plays one round with `p` creators drawing i.i.d. from `strategy`.
pub fn play_round<R: Rng + ?Sized>(
    inst: &ModelInstance,
    metric: Metric,
    strategy: &MixedStrategy,
    p: usize,
    rng: &mut R,
) -> RoundOutcome {
    let landscape: Vec<Content> = (0..p.max(1)).map(|_| strategy.sample(rng)).collect();
    let types = inst.types();
    let t = types[rng.gen_range(0..types.len())];
    let winner = recommend(inst, metric, &landscape, t, rng).expect("landscape is nonempty");
    match winner {
        Some(i) => {
            let w = landscape[i];
            RoundOutcome {
                winner,
                consumed: true,
                engagement: inst.engagement(w),
                quality: w.w_costly,
                // Eligible content sits at u >= 0 up to rounding.
                user_utility: inst.utility(w, t).max(0.0),
                user_type: t,
            }
        }
        None => RoundOutcome {
            winner: None,
            consumed: false,
            engagement: 0.0,
            quality: 0.0,
            user_utility: 0.0,
            user_type: t,
        },
    }
}

/// Expected share of a type-`t` user won by `w` against `opponents`: zero if
/// `w` is ineligible or strictly beaten by an eligible opponent, otherwise one
/// over the number of tied eligible items.
pub fn win_credit(inst: &ModelInstance, metric: Metric, w: Content, opponents: &[Content], t: f64) -> f64 {
    if !inst.is_eligible(w, t) {
        return 0.0;
    }
    let s = metric.score(inst, w);
    let mut ties = 0usize;
    for &o in opponents {
        if !inst.is_eligible(o, t) {
            continue;
        }
        let so = metric.score(inst, o);
        if scores_tie(s, so) {
            ties += 1;
        } else if so > s {
            return 0.0;
        }
    }
    1.0 / (1 + ties) as f64
}

/// Monte Carlo estimate of a creator's expected utility from playing `w`
/// against `p - 1` opponents drawing from `opponent`.
pub fn expected_creator_utility<R: Rng + ?Sized>(
    inst: &ModelInstance,
    metric: Metric,
    w: Content,
    opponent: &MixedStrategy,
    p: usize,
    n: usize,
    rng: &mut R,
) -> Result<MetricEstimate> {
    if n == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let cost = inst.cost(w);
    let types = inst.types();
    let mut opps = vec![Content::ORIGIN; p.saturating_sub(1)];
    let mut stats = RunningStats::new();
    for _ in 0..n {
        for o in opps.iter_mut() {
            *o = opponent.sample(rng);
        }
        let t = types[rng.gen_range(0..types.len())];
        stats.push(win_credit(inst, metric, w, &opps, t) - cost);
    }
    Ok(stats.estimate())
}

/// Writes a round log with one row per outcome.
pub fn write_round_log<W: Write>(out: W, outcomes: &[RoundOutcome]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["round", "user_type", "winner", "consumed", "engagement", "quality", "user_utility"])?;
    for (i, o) in outcomes.iter().enumerate() {
        wtr.write_record([
            i.to_string(),
            o.user_type.to_string(),
            o.winner.map(|w| w.to_string()).unwrap_or_default(),
            o.consumed.to_string(),
            o.engagement.to_string(),
            o.quality.to_string(),
            o.user_utility.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
