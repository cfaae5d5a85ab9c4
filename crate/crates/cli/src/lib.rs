//! Command implementations for the `rankgame` binary.
//!
//! Every command parses and validates its inputs and computes all results in
//! memory first. Files are written only after that succeeds, so a bad config
//! never leaves partial output behind.

use std::fmt;
use std::path::{Path, PathBuf};

use rankgame::empirics::{self, Feed, Genre, TweetRecord};
use rankgame::equilibrium::{
    engagement_eq_homogeneous, engagement_eq_two_types, engagement_eq_well_separated, investment_eq, random_eq,
};
use rankgame::game::{play_round, write_round_log};
use rankgame::metrics::{estimate_all, MetricTriple, TripleStats};
use rankgame::model::{check_assumptions, GridSpec, TypesConfig, WellSeparatedSpec};
use rankgame::parallel::{rng_from_seed, substream, SimRng};
use rankgame::verify::best_response_gap;
use rankgame::{Metric, MixedStrategy, ModelConfig, ModelInstance};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_GRID: usize = 200;
pub const DEFAULT_VERIFY_SAMPLES: usize = 100_000;
pub const DEFAULT_ECDF_GRID: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input. Exit code 2.
    Config(String),
    /// Failure while writing results. Exit code 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rankgame::Error> for CliError {
    fn from(e: rankgame::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumChoice {
    #[default]
    Auto,
    Homogeneous,
    TwoType,
    WellSeparated,
    Investment,
    Random,
}

/// A single recommender name, a list of names, or `"all"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecommenderSpec {
    One(String),
    Many(Vec<String>),
}

impl Default for RecommenderSpec {
    fn default() -> Self {
        RecommenderSpec::One("all".into())
    }
}

impl RecommenderSpec {
    pub fn metrics(&self) -> CliResult<Vec<Metric>> {
        let names: Vec<&str> = match self {
            RecommenderSpec::One(s) if s == "all" => return Ok(Metric::ALL.to_vec()),
            RecommenderSpec::One(s) => vec![s.as_str()],
            RecommenderSpec::Many(v) => v.iter().map(String::as_str).collect(),
        };
        if names.is_empty() {
            return Err(CliError::Config("recommender list is empty".into()));
        }
        names.into_iter().map(|n| n.parse().map_err(CliError::from)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Gamma { gamma: Vec<f64> },
    NTypes { n_types: Vec<usize>, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub recommender: RecommenderSpec,
    #[serde(rename = "P", default = "default_players")]
    pub players: usize,
    #[serde(default)]
    pub equilibrium: EquilibriumChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

fn default_players() -> usize {
    2
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.players < 2 {
            return Err(CliError::Config(format!("P must be at least 2, got {}", cfg.players)));
        }
        match &cfg.sweep {
            Some(Sweep::Gamma { gamma }) if gamma.is_empty() => return Err(CliError::Config("empty gamma sweep".into())),
            Some(Sweep::NTypes { n_types, .. }) if n_types.is_empty() => {
                return Err(CliError::Config("empty n_types sweep".into()))
            }
            _ => {}
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_json(&read_text(path)?)
    }

    /// Model configs for each sweep point, in order.
    pub fn model_points(&self) -> Vec<ModelConfig> {
        match &self.sweep {
            None => vec![self.model.clone()],
            Some(Sweep::Gamma { gamma }) => {
                gamma.iter().map(|&g| ModelConfig { gamma: g, ..self.model.clone() }).collect()
            }
            Some(Sweep::NTypes { n_types, epsilon }) => n_types
                .iter()
                .map(|&n| ModelConfig {
                    types: TypesConfig::WellSeparated { well_separated: WellSeparatedSpec { n, epsilon: *epsilon } },
                    ..self.model.clone()
                })
                .collect(),
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Accepts either a bare model config or a full experiment config.
pub fn load_model_config(path: &Path) -> CliResult<ModelConfig> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if value.get("model").is_some() {
        Ok(ExperimentConfig::from_json(&text)?.model)
    } else {
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Flag values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl RunOptions {
    fn seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED)
    }

    fn samples(&self, cfg: &ExperimentConfig) -> usize {
        self.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| cfg.output.clone())
    }

    /// The config with flag overrides folded in, echoed into outputs. The
    /// output directory is left out so reruns elsewhere stay byte-identical.
    fn effective(&self, cfg: &ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            seed: Some(self.seed(cfg)),
            samples: Some(self.samples(cfg)),
            output: None,
            ..cfg.clone()
        }
    }
}

/// Results of a command, not yet written anywhere.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub stdout: String,
    pub files: Vec<(String, Vec<u8>)>,
    pub out_dir: Option<PathBuf>,
    /// Set when a verification check failed (exit code 3).
    pub verification_failed: bool,
}

impl CommandOutput {
    pub fn exit_code(&self) -> i32 {
        if self.verification_failed {
            3
        } else {
            0
        }
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes files into `out_dir` (when set) and prints stdout.
    pub fn emit(&self) -> CliResult<()> {
        if let Some(dir) = &self.out_dir {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for (name, bytes) in &self.files {
                let path = dir.join(name);
                std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
        }
        if !self.stdout.is_empty() {
            print!("{}", self.stdout);
        }
        Ok(())
    }
}

/// Resolves `auto` and builds the equilibrium strategy for one recommender.
pub fn build_strategy(
    inst: &ModelInstance,
    types: &TypesConfig,
    metric: Metric,
    choice: EquilibriumChoice,
    p: usize,
) -> CliResult<(EquilibriumChoice, MixedStrategy)> {
    let resolved = match choice {
        EquilibriumChoice::Auto => match metric {
            Metric::Investment => EquilibriumChoice::Investment,
            Metric::Random => EquilibriumChoice::Random,
            Metric::Engagement => match (types, inst.types().len()) {
                (_, 1) => EquilibriumChoice::Homogeneous,
                (TypesConfig::WellSeparated { .. }, _) => EquilibriumChoice::WellSeparated,
                (_, 2) => EquilibriumChoice::TwoType,
                _ => EquilibriumChoice::WellSeparated,
            },
        },
        other => other,
    };
    let strategy = match resolved {
        EquilibriumChoice::Homogeneous => engagement_eq_homogeneous(inst, p)?,
        EquilibriumChoice::TwoType => {
            require_two_players(p, "two_type")?;
            engagement_eq_two_types(inst)?
        }
        EquilibriumChoice::WellSeparated => {
            require_two_players(p, "well_separated")?;
            engagement_eq_well_separated(inst)?
        }
        EquilibriumChoice::Investment => investment_eq(inst, p)?,
        EquilibriumChoice::Random => random_eq(inst, p)?,
        EquilibriumChoice::Auto => unreachable!("auto resolved above"),
    };
    Ok((resolved, strategy))
}

fn require_two_players(p: usize, name: &str) -> CliResult<()> {
    if p != 2 {
        return Err(CliError::Config(format!("{name} equilibrium is characterized for P = 2 only, got P = {p}")));
    }
    Ok(())
}

fn choice_name(c: EquilibriumChoice) -> &'static str {
    match c {
        EquilibriumChoice::Auto => "auto",
        EquilibriumChoice::Homogeneous => "homogeneous",
        EquilibriumChoice::TwoType => "two_type",
        EquilibriumChoice::WellSeparated => "well_separated",
        EquilibriumChoice::Investment => "investment",
        EquilibriumChoice::Random => "random",
    }
}

struct Scenario {
    model: ModelConfig,
    inst: ModelInstance,
    metric: Metric,
    equilibrium: EquilibriumChoice,
    strategy: MixedStrategy,
}

/// Builds every (sweep point, recommender) scenario up front.
fn scenarios(cfg: &ExperimentConfig) -> CliResult<Vec<Scenario>> {
    let metrics = cfg.recommender.metrics()?;
    let mut out = Vec::new();
    for model in cfg.model_points() {
        let inst = model.build()?;
        for &metric in &metrics {
            let (equilibrium, strategy) = build_strategy(&inst, &model.types, metric, cfg.equilibrium, cfg.players)?;
            out.push(Scenario { model: model.clone(), inst: inst.clone(), metric, equilibrium, strategy });
        }
    }
    Ok(out)
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn types_param(t: &TypesConfig) -> String {
    match t {
        TypesConfig::List(v) => v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join("|"),
        TypesConfig::WellSeparated { well_separated: s } => format!("well_separated(N={} eps={})", s.n, fmt_num(s.epsilon)),
        TypesConfig::RatioPair { ratio_pair: s } => format!("ratio_pair(eps={} c={})", fmt_num(s.epsilon), fmt_num(s.c)),
    }
}

/// `;`-separated parameter summary used in the `params` column.
pub fn params_string(model: &ModelConfig, p: usize, eq: EquilibriumChoice) -> String {
    let mut parts = vec![format!("family={}", model.family)];
    if let Some(a) = model.alpha {
        parts.push(format!("alpha={}", fmt_num(a)));
    }
    if let Some(w) = model.w {
        parts.push(format!("W={}", fmt_num(w)));
    }
    parts.push(format!("gamma={}", fmt_num(model.gamma)));
    parts.push(format!("types={}", types_param(&model.types)));
    parts.push(format!("P={p}"));
    parts.push(format!("equilibrium={}", choice_name(eq)));
    parts.join(";")
}

fn config_comment(cfg: &impl Serialize) -> CliResult<String> {
    let json = serde_json::to_string(cfg).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(format!("# config: {json}\n"))
}

fn csv_bytes(comment: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut buf = comment.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(buf)
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Io(e.to_string()))
}

/// Audits the model assumptions on the default grid. Failing checks are a
/// validation error (exit 2) but the report is still printed.
pub fn cmd_check_model(model: &ModelConfig, out: Option<PathBuf>) -> CliResult<CommandOutput> {
    let inst = model.build()?;
    let report = check_assumptions(&inst, GridSpec::default());
    let json = to_json(&report)?;
    if !report.all_passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        eprint!("{json}");
        return Err(CliError::Config(format!("assumption checks failed: {}", failed.join(", "))));
    }
    Ok(CommandOutput { files: vec![("assumptions.json".into(), json.clone().into_bytes())], stdout: json, out_dir: out, ..Default::default() })
}

fn single_scenario(cfg: &ExperimentConfig, what: &str) -> CliResult<Scenario> {
    if cfg.sweep.is_some() {
        return Err(CliError::Config(format!("{what} does not support sweeps")));
    }
    let mut all = scenarios(cfg)?;
    if all.len() != 1 {
        return Err(CliError::Config(format!("{what} needs exactly one recommender, config selects {}", all.len())));
    }
    Ok(all.remove(0))
}

/// Draws `samples` contents from the configured equilibrium.
pub fn cmd_sample(cfg: &ExperimentConfig, opts: &RunOptions) -> CliResult<CommandOutput> {
    let sc = single_scenario(cfg, "sample")?;
    let eff = opts.effective(cfg);
    let mut rng = rng_from_seed(opts.seed(cfg));
    let rows: Vec<Vec<String>> = sc
        .strategy
        .sample_n(opts.samples(cfg), &mut rng)
        .into_iter()
        .map(|w| vec![fmt_num(w.w_costly), fmt_num(w.w_cheap)])
        .collect();
    let bytes = csv_bytes(&config_comment(&eff)?, &["w_costly", "w_cheap"], &rows)?;
    Ok(stdout_or_file(bytes, "samples.csv", opts.out_dir(cfg)))
}

fn stdout_or_file(bytes: Vec<u8>, name: &str, out_dir: Option<PathBuf>) -> CommandOutput {
    let stdout = if out_dir.is_none() { String::from_utf8_lossy(&bytes).into_owned() } else { String::new() };
    CommandOutput { stdout, files: vec![(name.into(), bytes)], out_dir, verification_failed: false }
}

/// JSON description of the equilibrium components and CDF breakpoints.
pub fn cmd_describe(cfg: &ExperimentConfig, opts: &RunOptions) -> CliResult<CommandOutput> {
    let descs: Vec<_> = scenarios(cfg)?.iter().map(|s| s.strategy.describe()).collect();
    let json = if descs.len() == 1 { to_json(&descs[0])? } else { to_json(&descs)? };
    Ok(stdout_or_file(json.into_bytes(), "strategy.json", opts.out_dir(cfg)))
}

#[derive(Debug, Serialize)]
struct VerifyEntry<'a> {
    recommender: Metric,
    params: String,
    report: &'a rankgame::BestResponseReport,
}

/// Best-response verification for each scenario; exit 3 when any gap
/// exceeds its threshold.
pub fn cmd_verify(cfg: &ExperimentConfig, grid: usize, opts: &RunOptions) -> CliResult<CommandOutput> {
    let scs = scenarios(cfg)?;
    if grid < 2 {
        return Err(CliError::Config(format!("grid must be at least 2, got {grid}")));
    }
    let n = opts.samples.or(cfg.samples).unwrap_or(DEFAULT_VERIFY_SAMPLES);
    if n == 0 {
        return Err(CliError::Config("verification needs at least one sample".into()));
    }
    let seed = opts.seed(cfg);
    let mut reports = Vec::with_capacity(scs.len());
    for (j, sc) in scs.iter().enumerate() {
        let mut rng = substream(seed, j as u64);
        reports.push(best_response_gap(&sc.inst, sc.metric, &sc.strategy, cfg.players, grid, n, &mut rng)?);
    }
    let entries: Vec<VerifyEntry> = scs
        .iter()
        .zip(&reports)
        .map(|(sc, r)| VerifyEntry {
            recommender: sc.metric,
            params: params_string(&sc.model, cfg.players, sc.equilibrium),
            report: r,
        })
        .collect();
    let json = if entries.len() == 1 { to_json(&entries[0])? } else { to_json(&entries)? };
    let mut out = stdout_or_file(json.into_bytes(), "verify.json", opts.out_dir(cfg));
    out.verification_failed = reports.iter().any(|r| !r.passed);
    Ok(out)
}

fn run_triple(sc: &Scenario, p: usize, n: usize, seed: u64, row: usize, threads: usize) -> CliResult<MetricTriple> {
    if threads <= 1 {
        let mut rng = substream(seed, row as u64);
        return Ok(estimate_all(&sc.inst, sc.metric, &sc.strategy, p, n, &mut rng).estimate());
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let parts: Vec<TripleStats> = pool.install(|| {
        (0..threads)
            .into_par_iter()
            .map(|k| {
                let count = n / threads + usize::from(k < n % threads);
                let mut rng = substream(seed, ((row as u64) << 32) | (k as u64 + 1));
                estimate_all(&sc.inst, sc.metric, &sc.strategy, p, count, &mut rng)
            })
            .collect()
    });
    let mut total = TripleStats::default();
    for part in &parts {
        total.merge(part);
    }
    Ok(total.estimate())
}

/// UCQ, RE and UW for every (sweep point, recommender) pair.
pub fn cmd_metrics(cfg: &ExperimentConfig, opts: &RunOptions) -> CliResult<CommandOutput> {
    let scs = scenarios(cfg)?;
    let n = opts.samples(cfg);
    if n == 0 {
        return Err(CliError::Config("metrics need at least one sample".into()));
    }
    let seed = opts.seed(cfg);
    let mut rows = Vec::with_capacity(3 * scs.len());
    for (j, sc) in scs.iter().enumerate() {
        let t = run_triple(sc, cfg.players, n, seed, j, opts.threads)?;
        let params = params_string(&sc.model, cfg.players, sc.equilibrium);
        for (name, est) in [("UCQ", t.ucq), ("RE", t.re), ("UW", t.uw)] {
            rows.push(vec![
                name.to_string(),
                sc.metric.name().to_string(),
                params.clone(),
                fmt_num(est.mean),
                fmt_num(est.stderr),
                est.n.to_string(),
            ]);
        }
    }
    let header = ["metric", "recommender", "params", "mean", "stderr", "n"];
    let bytes = csv_bytes(&config_comment(&opts.effective(cfg))?, &header, &rows)?;
    Ok(stdout_or_file(bytes, "metrics.csv", opts.out_dir(cfg)))
}

/// Per-round log of simulated play.
pub fn cmd_rounds(cfg: &ExperimentConfig, opts: &RunOptions) -> CliResult<CommandOutput> {
    let sc = single_scenario(cfg, "rounds")?;
    let mut rng: SimRng = rng_from_seed(opts.seed(cfg));
    let outcomes: Vec<_> =
        (0..opts.samples(cfg)).map(|_| play_round(&sc.inst, sc.metric, &sc.strategy, cfg.players, &mut rng)).collect();
    let mut bytes = config_comment(&opts.effective(cfg))?.into_bytes();
    write_round_log(&mut bytes, &outcomes).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(stdout_or_file(bytes, "rounds.csv", opts.out_dir(cfg)))
}

const GENRE_SETS: [(&str, &[Genre]); 3] = [("P", &[Genre::P]), ("NP", &[Genre::NP]), ("all", &[Genre::P, Genre::NP])];
const FEEDS: [Feed; 2] = [Feed::E, Feed::C];

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt_num)
}

/// Spearman table, conditional ECDF point files and dominance matrices for a
/// feed-survey CSV.
pub fn cmd_empirics(data: &Path, grid_points: usize, out: Option<PathBuf>) -> CliResult<CommandOutput> {
    let records: Vec<TweetRecord> = empirics::load_records(data).map_err(|e| CliError::Config(e.to_string()))?;
    if records.is_empty() {
        return Err(CliError::Config(format!("{} contains no records", data.display())));
    }
    let comment = format!("# config: {}\n", serde_json::json!({ "data": data, "grid_points": grid_points }));
    let mut files = Vec::new();

    let mut header = vec!["feed".to_string()];
    for (label, _) in GENRE_SETS {
        header.push(format!("rho_{label}"));
        header.push(format!("p_{label}"));
        header.push(format!("n_{label}"));
    }
    let mut table = Vec::new();
    for f in FEEDS {
        let mut row = vec![f.to_string()];
        for (_, genres) in GENRE_SETS {
            let r = empirics::spearman_rho(&records, f, genres).ok();
            row.push(fmt_opt(r.map(|r| r.rho)));
            row.push(fmt_opt(r.map(|r| r.p)));
            row.push(r.map_or_else(|| "NA".into(), |r| r.n.to_string()));
        }
        table.push(row);
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let table_bytes = csv_bytes(&comment, &header_refs, &table)?;
    files.push(("table1.csv".to_string(), table_bytes.clone()));

    for f in FEEDS {
        for (label, genres) in GENRE_SETS {
            for a in 0..empirics::ANGRINESS_LEVELS as u8 {
                if let Ok(e) = empirics::conditional_ecdf(&records, a, f, genres) {
                    let rows: Vec<Vec<String>> = e.steps().into_iter().map(|(x, y)| vec![fmt_num(x), fmt_num(y)]).collect();
                    files.push((format!("ecdf_{f}_{label}_a{a}.csv"), csv_bytes(&comment, &["log_favorites", "cdf"], &rows)?));
                }
            }
            let grid = empirics::default_grid(&records, f, genres, grid_points);
            let m = empirics::dominance_matrix(&records, f, genres, &grid);
            let rows: Vec<Vec<String>> = m
                .entries
                .iter()
                .enumerate()
                .map(|(a, row)| std::iter::once(a.to_string()).chain(row.iter().map(|&v| fmt_opt(v))).collect())
                .collect();
            let head = ["a", "vs_0", "vs_1", "vs_2", "vs_3", "vs_4"];
            files.push((format!("dominance_{f}_{label}.csv"), csv_bytes(&comment, &head, &rows)?));
        }
    }
    let stdout = String::from_utf8_lossy(&table_bytes).into_owned();
    Ok(CommandOutput { stdout, files, out_dir: out, verification_failed: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    const HOM: &str = r#"{"model": {"family": "linear", "alpha": 1, "gamma": 0, "types": [1]}, "P": 2}"#;

    #[test]
    fn parses_defaults() {
        let c = cfg(HOM);
        assert_eq!(c.players, 2);
        assert_eq!(c.equilibrium, EquilibriumChoice::Auto);
        assert_eq!(c.recommender.metrics().unwrap(), Metric::ALL.to_vec());
        assert!(ExperimentConfig::from_json(r#"{"model": {"family": "linear", "alpha": 1, "gamma": 0}}"#).is_err());
        assert!(ExperimentConfig::from_json(&HOM.replace("\"P\": 2", "\"P\": 1")).is_err());
        assert!(ExperimentConfig::from_json(&HOM.replace("\"P\": 2", "\"P\": 2, \"bogus\": 1")).is_err());
    }

    #[test]
    fn auto_resolution() {
        let c = cfg(r#"{"model": {"family": "linear", "alpha": 1, "gamma": 0,
            "types": {"well_separated": {"N": 3, "epsilon": 0.01}}}, "recommender": "engagement"}"#);
        let sc = scenarios(&c).unwrap();
        assert_eq!(sc[0].equilibrium, EquilibriumChoice::WellSeparated);
        let c = cfg(r#"{"model": {"family": "linear", "alpha": 1, "gamma": 0,
            "types": {"ratio_pair": {"epsilon": 0.01, "c": 1.2}}}, "recommender": "engagement"}"#);
        assert_eq!(scenarios(&c).unwrap()[0].equilibrium, EquilibriumChoice::TwoType);
        let c = cfg(HOM);
        let names: Vec<_> = scenarios(&c).unwrap().iter().map(|s| s.equilibrium).collect();
        assert_eq!(names, vec![EquilibriumChoice::Homogeneous, EquilibriumChoice::Investment, EquilibriumChoice::Random]);
    }

    #[test]
    fn incompatible_equilibrium_is_config_error() {
        let c = cfg(r#"{"model": {"family": "linear", "alpha": 1, "gamma": 0, "types": [1, 2]},
            "recommender": "engagement", "equilibrium": "homogeneous"}"#);
        assert!(matches!(scenarios(&c), Err(CliError::Config(_))));
        let c = cfg(r#"{"model": {"family": "linear", "alpha": 1, "gamma": 0,
            "types": {"ratio_pair": {"epsilon": 0.01, "c": 1.2}}}, "recommender": "engagement", "P": 3}"#);
        assert!(matches!(scenarios(&c), Err(CliError::Config(_))));
    }

    #[test]
    fn params_column() {
        let c = cfg(HOM);
        assert_eq!(
            params_string(&c.model, 2, EquilibriumChoice::Homogeneous),
            "family=linear;alpha=1;gamma=0;types=1;P=2;equilibrium=homogeneous"
        );
    }

    #[test]
    fn gamma_sweep_points() {
        let c = cfg(r#"{"model": {"family": "linear", "alpha": 0.5, "gamma": 0, "types": [1]},
            "sweep": {"gamma": [0, 0.2, 0.4]}}"#);
        let g: Vec<f64> = c.model_points().iter().map(|m| m.gamma).collect();
        assert_eq!(g, vec![0.0, 0.2, 0.4]);
        let c = cfg(r#"{"model": {"family": "linear", "alpha": 1, "gamma": 0, "types": [1]},
            "sweep": {"n_types": [2, 4], "epsilon": 0.01}}"#);
        assert_eq!(c.model_points()[1].build().unwrap().types().len(), 4);
    }

    #[test]
    fn metrics_rows_and_threads() {
        let c = cfg(HOM);
        let opts = RunOptions { samples: Some(2000), ..Default::default() };
        let out = cmd_metrics(&c, &opts).unwrap();
        let text = String::from_utf8(out.file("metrics.csv").unwrap().to_vec()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# config: {"));
        assert_eq!(lines[1], "metric,recommender,params,mean,stderr,n");
        assert_eq!(lines.len(), 2 + 9);
        let threaded = cmd_metrics(&c, &RunOptions { threads: 3, ..opts.clone() }).unwrap();
        let ttext = String::from_utf8(threaded.file("metrics.csv").unwrap().to_vec()).unwrap();
        assert_eq!(ttext.lines().count(), lines.len());
        let again = cmd_metrics(&c, &RunOptions { threads: 3, ..opts }).unwrap();
        assert_eq!(threaded.file("metrics.csv"), again.file("metrics.csv"));
    }

    #[test]
    fn sample_header_only_for_zero() {
        let c = cfg(&HOM.replace("\"P\": 2", "\"P\": 2, \"recommender\": \"engagement\""));
        let out = cmd_sample(&c, &RunOptions { samples: Some(0), ..Default::default() }).unwrap();
        let text = String::from_utf8(out.file("samples.csv").unwrap().to_vec()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1), Some("w_costly,w_cheap"));
    }
}
