//! Feed-survey analysis: conditional distributions of log favorites by
//! angriness, pairwise stochastic-dominance fractions, and one-sided Spearman
//! rank correlation between angriness and favorites.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

pub const ANGRINESS_LEVELS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmpiricsError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("no records match angriness {angriness}, feed {feed}, genres {genres}")]
    EmptyConditional { angriness: u8, feed: Feed, genres: String },
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feed {
    /// Engagement-ranked timeline.
    E,
    /// Chronological timeline.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Genre {
    /// Political.
    P,
    /// Non-political.
    NP,
}

impl fmt::Display for Feed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feed::E => "E",
            Feed::C => "C",
        })
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Genre::P => "P",
            Genre::NP => "NP",
        })
    }
}

impl FromStr for Feed {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "E" => Ok(Feed::E),
            "C" => Ok(Feed::C),
            other => Err(format!("feed must be E or C, got {other:?}")),
        }
    }
}

impl FromStr for Genre {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "P" => Ok(Genre::P),
            "NP" => Ok(Genre::NP),
            other => Err(format!("genre must be P or NP, got {other:?}")),
        }
    }
}

pub fn genres_label(genres: &[Genre]) -> String {
    match genres {
        [] => "none".into(),
        [g] => g.to_string(),
        _ if genres.contains(&Genre::P) && genres.contains(&Genre::NP) => "all".into(),
        _ => genres[0].to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub feed: Feed,
    pub genre: Genre,
    pub angriness: u8,
    pub favorites: u64,
}

impl TweetRecord {
    pub fn log_favorites(&self) -> f64 {
        (self.favorites as f64).ln_1p()
    }
}

fn parse_row(rec: &csv::StringRecord, line: u64) -> Result<TweetRecord, EmpiricsError> {
    let err = |reason: String| EmpiricsError::Row { line, reason };
    if rec.len() != 4 {
        return Err(err(format!("expected 4 fields, found {}", rec.len())));
    }
    let feed = rec[0].parse().map_err(err)?;
    let genre = rec[1].parse().map_err(err)?;
    let angriness: i64 = rec[2].trim().parse().map_err(|_| err(format!("angriness {:?} is not an integer", &rec[2])))?;
    if !(0..ANGRINESS_LEVELS as i64).contains(&angriness) {
        return Err(err(format!("angriness {angriness} outside 0..=4")));
    }
    let favorites: i64 = rec[3].trim().parse().map_err(|_| err(format!("favorites {:?} is not an integer", &rec[3])))?;
    if favorites < 0 {
        return Err(err(format!("favorites {favorites} is negative")));
    }
    Ok(TweetRecord { feed, genre, angriness: angriness as u8, favorites: favorites as u64 })
}

/// Parses records from CSV text with header `feed,genre,angriness,favorites`.
pub fn parse_records<R: std::io::Read>(input: R) -> Result<Vec<TweetRecord>, EmpiricsError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| EmpiricsError::Row { line: 1, reason: e.to_string() })?
        .clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if !names.is_empty() && names != ["feed", "genre", "angriness", "favorites"] {
        return Err(EmpiricsError::Row { line: 1, reason: format!("unexpected header {names:?}") });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| EmpiricsError::Row {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        out.push(parse_row(&row, line)?);
    }
    Ok(out)
}

pub fn load_records(path: &Path) -> Result<Vec<TweetRecord>, EmpiricsError> {
    let file = std::fs::File::open(path)
        .map_err(|e| EmpiricsError::Io { path: path.display().to_string(), reason: e.to_string() })?;
    parse_records(std::io::BufReader::new(file))
}

/// Empirical CDF over a sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Ecdf { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `(x, F(x))` at each distinct sample value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let n = self.sorted.len() as f64;
        for (i, &v) in self.sorted.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = (i + 1) as f64 / n,
                _ => out.push((v, (i + 1) as f64 / n)),
            }
        }
        out
    }

    pub fn max(&self) -> Option<f64> {
        self.sorted.last().copied()
    }

    pub fn min(&self) -> Option<f64> {
        self.sorted.first().copied()
    }
}

fn matching<'a>(records: &'a [TweetRecord], f: Feed, genres: &'a [Genre]) -> impl Iterator<Item = &'a TweetRecord> + 'a {
    records.iter().filter(move |r| r.feed == f && genres.contains(&r.genre))
}

/// ECDF of `ln(1 + favorites)` among records with angriness `a`, feed `f`
/// and genre in `genres`.
pub fn conditional_ecdf(records: &[TweetRecord], a: u8, f: Feed, genres: &[Genre]) -> Result<Ecdf, EmpiricsError> {
    let values: Vec<f64> = matching(records, f, genres).filter(|r| r.angriness == a).map(TweetRecord::log_favorites).collect();
    if values.is_empty() {
        return Err(EmpiricsError::EmptyConditional { angriness: a, feed: f, genres: genres_label(genres) });
    }
    Ok(Ecdf::new(values))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceMatrix {
    /// `entries[a][b]`: share of grid points with `ECDF_a <= ECDF_b`; `None`
    /// when either level has no data.
    pub entries: [[Option<f64>; ANGRINESS_LEVELS]; ANGRINESS_LEVELS],
    pub missing: Vec<u8>,
}

/// Pairwise dominance fractions between angriness levels on `grid`.
pub fn dominance_matrix(records: &[TweetRecord], f: Feed, genres: &[Genre], grid: &[f64]) -> DominanceMatrix {
    let ecdfs: Vec<Option<Ecdf>> = (0..ANGRINESS_LEVELS as u8).map(|a| conditional_ecdf(records, a, f, genres).ok()).collect();
    let missing = (0..ANGRINESS_LEVELS as u8).filter(|&a| ecdfs[a as usize].is_none()).collect();
    let mut entries = [[None; ANGRINESS_LEVELS]; ANGRINESS_LEVELS];
    for (a, ea) in ecdfs.iter().enumerate() {
        for (b, eb) in ecdfs.iter().enumerate() {
            if let (Some(ea), Some(eb)) = (ea, eb) {
                let hits = grid.iter().filter(|&&x| ea.eval(x) <= eb.eval(x)).count();
                entries[a][b] = Some(if grid.is_empty() { 1.0 } else { hits as f64 / grid.len() as f64 });
            }
        }
    }
    DominanceMatrix { entries, missing }
}

/// Evenly spaced grid spanning the log-favorite range of the selection.
pub fn default_grid(records: &[TweetRecord], f: Feed, genres: &[Genre], points: usize) -> Vec<f64> {
    let vals: Vec<f64> = matching(records, f, genres).map(TweetRecord::log_favorites).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || points == 0 {
        return Vec::new();
    }
    if points == 1 || hi == lo {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpearmanResult {
    pub rho: f64,
    /// One-sided p-value against positive association.
    pub p: f64,
    pub n: usize,
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn mid_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman correlation of paired samples with a one-sided t-approximation
/// p-value (`n - 2` degrees of freedom).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<SpearmanResult, EmpiricsError> {
    if x.len() != y.len() {
        return Err(EmpiricsError::UndefinedCorrelation("samples differ in length".into()));
    }
    let n = x.len();
    if n < 3 {
        return Err(EmpiricsError::UndefinedCorrelation(format!("need at least 3 pairs, got {n}")));
    }
    let rho = pearson(&mid_ranks(x), &mid_ranks(y))
        .ok_or_else(|| EmpiricsError::UndefinedCorrelation("a coordinate has zero variance".into()))?;
    let df = (n - 2) as f64;
    let p = if rho >= 1.0 {
        0.0
    } else if rho <= -1.0 {
        1.0
    } else {
        let t = rho * (df / ((1.0 - rho) * (1.0 + rho))).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        dist.sf(t)
    };
    Ok(SpearmanResult { rho, p, n })
}

/// Spearman correlation between angriness and favorites within a feed and
/// genre selection.
pub fn spearman_rho(records: &[TweetRecord], f: Feed, genres: &[Genre]) -> Result<SpearmanResult, EmpiricsError> {
    let (a, l): (Vec<f64>, Vec<f64>) = matching(records, f, genres).map(|r| (r.angriness as f64, r.favorites as f64)).unzip();
    spearman(&a, &l)
}
