//! Command-line front end: loads measure and family files, runs one library
//! operation and renders the result as JSON or CSV.

pub mod format;
pub mod io;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sperner_lab::antichain::{self, enumerate_antichains, max_weight_antichain, sperner_check};
use sperner_lab::anticoncentration::{bound_closed, level_bound_check};
use sperner_lab::{ClosedMode, Error, GofMethod, Harness, Kernel, Measure, Sampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use format::{format_sig, num};

/// Environment variable capping the number of sampling threads.
pub const THREADS_ENV: &str = "SPERNER_LAB_THREADS";

/// Logical sampling workers; fixed so results depend only on the seed.
pub const LOGICAL_WORKERS: usize = 16;

/// Residual above which `verify` reports a broken identity.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Slack for `maxantichain`'s optimum against the best level.
pub const TIGHTNESS_TOL: f64 = 1e-9;

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const STATISTICAL: i32 = 2;
    pub const VIOLATION: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("theorem violation (implementation bug): {0}")]
    Violation(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Violation(_) => exit::VIOLATION,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Violation(m) => CliError::Violation(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Subcommand)]
pub enum Command {
    /// Level distribution Pr[|z| = l].
    Levels,
    /// Sample maximal chains, one per line as hex masks c_1..c_n.
    ChainSample,
    /// Residuals of the kernel's row and column identities.
    Verify,
    /// LYM sum of a family.
    Lym,
    /// Measure of a family against the largest level.
    Sperner,
    /// Exact maximum-weight antichain (n <= 14).
    Maxantichain,
    /// Anti-concentration bounds against the exact level maximum.
    Bound,
    /// Goodness of fit of sampled chains at one level.
    McCheck,
    /// Count antichains of {0,1}^n (n <= 5).
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum BoundMode {
    Paper,
    #[default]
    Tight,
}

#[derive(Debug, Parser)]
#[command(name = "sperner-lab", version, about = "Antichains under product measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Measure file: {"p": [...], "name": "..."}.
    #[arg(long, global = true)]
    pub measure: Option<PathBuf>,
    /// Family file: {"n": N, "members": ["0x..", ...]}.
    #[arg(long, global = true)]
    pub family: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Significant digits of every emitted real number.
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: u8,
    #[arg(long, global = true)]
    pub level: Option<usize>,
    /// Universe size for `enumerate` when no measure is given.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Closed-form bound reported by `bound`.
    #[arg(long, global = true, value_enum, default_value_t = BoundMode::Tight)]
    pub mode: BoundMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub measure_path: Option<PathBuf>,
    pub family_path: Option<PathBuf>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub output: OutputFormat,
    pub precision: usize,
    pub level: Option<usize>,
    pub n: Option<usize>,
    pub mode: BoundMode,
    pub threads: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            measure_path: None,
            family_path: None,
            seed: 0,
            trials: None,
            output: OutputFormat::Json,
            precision: 12,
            level: None,
            n: None,
            mode: BoundMode::Tight,
            threads: 1,
        }
    }
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        RunConfig {
            command: c.command,
            measure_path: c.measure,
            family_path: c.family,
            seed: c.seed,
            trials: c.trials,
            output: c.output,
            precision: c.precision as usize,
            level: c.level,
            n: c.n,
            mode: c.mode,
            threads: thread_cap(),
        }
    }
}

/// Threads allowed by the environment, defaulting to every core.
pub fn thread_cap() -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .map_or(cores, |t| t.min(cores))
}

/// Exit code and rendered report of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = Ctx { config };
    match config.command {
        Command::Levels => ctx.levels(),
        Command::ChainSample => ctx.chain_sample(),
        Command::Verify => ctx.verify(),
        Command::Lym => ctx.lym(),
        Command::Sperner => ctx.sperner(),
        Command::Maxantichain => ctx.maxantichain(),
        Command::Bound => ctx.bound(),
        Command::McCheck => ctx.mc_check(),
        Command::Enumerate => ctx.enumerate(),
    }
}

struct Ctx<'a> {
    config: &'a RunConfig,
}

fn csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn ok(stdout: String) -> Result<Outcome, CliError> {
    Ok(Outcome {
        code: exit::OK,
        stdout,
    })
}

impl Ctx<'_> {
    fn digits(&self) -> usize {
        self.config.precision
    }

    fn num(&self, x: f64) -> Value {
        num(x, self.digits())
    }

    fn fmt(&self, x: f64) -> String {
        format_sig(x, self.digits())
    }

    fn measure(&self) -> Result<Measure, CliError> {
        let path = self
            .config
            .measure_path
            .as_deref()
            .ok_or_else(|| CliError::Usage("--measure is required".into()))?;
        io::load_measure(path)
    }

    fn family(&self) -> Result<sperner_lab::AntichainFamily, CliError> {
        let path = self
            .config
            .family_path
            .as_deref()
            .ok_or_else(|| CliError::Usage("--family is required".into()))?;
        io::load_family(path)
    }

    fn json(&self, mut fields: Map<String, Value>, measure: Option<&Measure>) -> String {
        if let Some(name) = measure.and_then(|m| m.name()) {
            fields.insert("name".into(), Value::String(name.into()));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(fields)).expect("serializable");
        s.push('\n');
        s
    }

    fn levels(&self) -> Result<Outcome, CliError> {
        let p = self.measure()?;
        let pmf = p.level_pmf();
        let (arg, max) = pmf.max();
        match self.config.output {
            OutputFormat::Csv => ok(csv(
                &["level", "probability"],
                pmf.probs()
                    .iter()
                    .enumerate()
                    .map(|(l, &x)| vec![l.to_string(), self.fmt(x)])
                    .collect(),
            )),
            OutputFormat::Json => {
                let levels: Vec<Value> = pmf
                    .probs()
                    .iter()
                    .zip(pmf.log_probs())
                    .enumerate()
                    .map(|(l, (&x, &lx))| {
                        json!({"level": l, "probability": self.num(x), "log_probability": self.num(lx)})
                    })
                    .collect();
                let mut m = Map::new();
                m.insert("n".into(), json!(p.n()));
                m.insert("levels".into(), Value::Array(levels));
                m.insert("max_level".into(), json!(arg));
                m.insert("max_probability".into(), self.num(max));
                ok(self.json(m, Some(&p)))
            }
        }
    }

    fn chain_sample(&self) -> Result<Outcome, CliError> {
        let p = self.measure()?;
        let trials = self.config.trials.unwrap_or(10);
        let mut sampler = Sampler::new(&p)?.with_memo(sperner_lab::chain::DEFAULT_MEMO_ROWS);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut out = String::new();
        for _ in 0..trials {
            let chain = sampler.sample_chain(&mut rng);
            writeln!(out, "{chain}").expect("write to string");
        }
        ok(out)
    }

    fn verify(&self) -> Result<Outcome, CliError> {
        let p = self.measure()?;
        let kernel = Kernel::new(&p)?;
        let n = p.n();
        let levels: Vec<usize> = match self.config.level {
            Some(l) if l >= n => {
                return Err(CliError::Usage(format!("level {l} must be below n = {n}")))
            }
            Some(l) => vec![l],
            None => (0..n).collect(),
        };
        let exhaustive = n <= sperner_lab::chain::MAX_ENUMERATION_N;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let samples = self.config.trials.unwrap_or(100);
        let reports = levels
            .iter()
            .map(|&l| {
                if exhaustive {
                    kernel.identity_residuals(l)
                } else {
                    kernel.identity_residuals_sampled(l, samples, &mut rng)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let max = reports.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
        let pass = max <= IDENTITY_TOL;
        let code = if pass { exit::OK } else { exit::VIOLATION };
        let stdout = match self.config.output {
            OutputFormat::Csv => csv(
                &["level", "row_residual", "column_residual", "rows_checked", "columns_checked"],
                reports
                    .iter()
                    .map(|r| {
                        vec![
                            r.level.to_string(),
                            self.fmt(r.row_residual),
                            self.fmt(r.column_residual),
                            r.rows_checked.to_string(),
                            r.columns_checked.to_string(),
                        ]
                    })
                    .collect(),
            ),
            OutputFormat::Json => {
                let rows: Vec<Value> = reports
                    .iter()
                    .map(|r| {
                        json!({
                            "level": r.level,
                            "row_residual": self.num(r.row_residual),
                            "column_residual": self.num(r.column_residual),
                            "rows_checked": r.rows_checked,
                            "columns_checked": r.columns_checked,
                        })
                    })
                    .collect();
                let mut m = Map::new();
                m.insert("n".into(), json!(n));
                m.insert("mode".into(), json!(if exhaustive { "exhaustive" } else { "sampled" }));
                m.insert("levels".into(), Value::Array(rows));
                m.insert("max_residual".into(), self.num(max));
                m.insert("tolerance".into(), self.num(IDENTITY_TOL));
                m.insert("pass".into(), json!(pass));
                self.json(m, Some(&p))
            }
        };
        Ok(Outcome { code, stdout })
    }

    fn lym(&self) -> Result<Outcome, CliError> {
        let p = self.measure()?;
        let family = self.family()?.check()?;
        let total = antichain::lym_sum(&p, &family)?;
        let satisfied = total <= 1.0 + antichain::THEOREM_SLACK;
        match self.config.output {
            OutputFormat::Csv => ok(csv(
                &["lym_sum", "satisfied"],
                vec![vec![self.fmt(total), satisfied.to_string()]],
            )),
            OutputFormat::Json => {
                let mut m = Map::new();
                m.insert("lym_sum".into(), self.num(total));
                m.insert("bound".into(), self.num(1.0));
                m.insert("members".into(), json!(family.len()));
                m.insert("satisfied".into(), json!(satisfied));
                ok(self.json(m, Some(&p)))
            }
        }
    }

    fn sperner(&self) -> Result<Outcome, CliError> {
        let p = self.measure()?;
        let family = self.family()?;
        let r = sperner_check(&p, &family)?;
        let code = if r.satisfied { exit::OK } else { exit::VIOLATION };
        let stdout = match self.config.output {
            OutputFormat::Csv => csv(
                &["measure", "max_level", "satisfied"],
                vec![vec![self.fmt(r.measure), self.fmt(r.max_level), r.satisfied.to_string()]],
            ),
            OutputFormat::Json => {
                let mut m = Map::new();
                m.insert("measure".into(), self.num(r.measure));
                m.insert("max_level".into(), self.num(r.max_level));
                m.insert("satisfied".into(), json!(r.satisfied));
                self.json(m, Some(&p))
            }
        };
        Ok(Outcome { code, stdout })
    }

    fn maxantichain(&self) -> Result<Outcome, CliError> {
        let p = self.measure()?;
        let best = max_weight_antichain(&p)?;
        let (_, max_level) = p.level_pmf().max();
        let tight = (best.weight - max_level).abs() <= TIGHTNESS_TOL;
        let code = if tight { exit::OK } else { exit::VIOLATION };
        let stdout = match self.config.output {
            OutputFormat::Csv => csv(
                &["member", "point_mass"],
                best.family
                    .members()
                    .iter()
                    .map(|a| Ok(vec![a.to_string(), self.fmt(p.point_mass(a)?)]))
                    .collect::<Result<_, Error>>()?,
            ),
            OutputFormat::Json => {
                let mut m = Map::new();
                m.insert("n".into(), json!(p.n()));
                m.insert("weight".into(), self.num(best.weight));
                m.insert("min_flow".into(), self.num(best.min_flow));
                m.insert("max_level".into(), self.num(max_level));
                m.insert("tight".into(), json!(tight));
                m.insert(
                    "members".into(),
                    json!(io::FamilyFile::from(&best.family).members),
                );
                self.json(m, Some(&p))
            }
        };
        Ok(Outcome { code, stdout })
    }

    fn bound(&self) -> Result<Outcome, CliError> {
        let p = self.measure()?;
        let mode = match self.config.mode {
            BoundMode::Paper => ClosedMode::Paper,
            BoundMode::Tight => ClosedMode::Tight,
        };
        let r = level_bound_check(&p, mode)?;
        let tight = bound_closed(r.sigma, ClosedMode::Tight)?;
        let paper = bound_closed(r.sigma, ClosedMode::Paper)?;
        let ordered = r.is_ordered(antichain::THEOREM_SLACK)
            && tight <= paper + antichain::THEOREM_SLACK;
        let code = if ordered { exit::OK } else { exit::VIOLATION };
        let stdout = match self.config.output {
            OutputFormat::Csv => csv(
                &["sigma", "exact_max", "quadrature_bound", "closed_bound", "constant_used", "mode"],
                vec![vec![
                    self.fmt(r.sigma.sigma),
                    self.fmt(r.exact_max),
                    self.fmt(r.quadrature_bound),
                    self.fmt(r.closed_bound),
                    self.fmt(r.constant_used),
                    mode.name().to_string(),
                ]],
            ),
            OutputFormat::Json => {
                let mut m = Map::new();
                m.insert("sigma2".into(), self.num(r.sigma.sigma2));
                m.insert("sigma".into(), self.num(r.sigma.sigma));
                m.insert("exact_max".into(), self.num(r.exact_max));
                m.insert("quadrature_bound".into(), self.num(r.quadrature_bound));
                m.insert("closed_bound".into(), self.num(r.closed_bound));
                m.insert("constant_used".into(), self.num(r.constant_used));
                m.insert("mode".into(), json!(mode.name()));
                m.insert("tight_bound".into(), self.num(tight));
                m.insert("paper_bound".into(), self.num(paper));
                m.insert("ordered".into(), json!(ordered));
                self.json(m, Some(&p))
            }
        };
        Ok(Outcome { code, stdout })
    }

    fn mc_check(&self) -> Result<Outcome, CliError> {
        let p = self.measure()?;
        let level = self
            .config
            .level
            .ok_or_else(|| CliError::Usage("--level is required".into()))?;
        let trials = self.config.trials.unwrap_or(100_000);
        let harness = Harness::new(self.config.seed, LOGICAL_WORKERS).with_threads(self.config.threads);
        let r = harness.level_marginal(&p, level, trials)?;
        let code = if r.pass { exit::OK } else { exit::STATISTICAL };
        let method = match r.method {
            GofMethod::Histogram => "histogram",
            GofMethod::Inclusion => "inclusion",
        };
        let tv = r.tv_distance.map_or(Value::Null, |x| self.num(x));
        let stdout = match self.config.output {
            OutputFormat::Csv => csv(
                &["method", "level", "trials", "statistic", "dof", "threshold", "pass", "tv_distance"],
                vec![vec![
                    method.into(),
                    r.level.to_string(),
                    r.trials.to_string(),
                    self.fmt(r.statistic),
                    r.dof.to_string(),
                    self.fmt(r.threshold),
                    r.pass.to_string(),
                    r.tv_distance.map_or(String::new(), |x| self.fmt(x)),
                ]],
            ),
            OutputFormat::Json => {
                let mut m = Map::new();
                m.insert("method".into(), json!(method));
                m.insert("level".into(), json!(r.level));
                m.insert("trials".into(), json!(r.trials));
                m.insert("statistic".into(), self.num(r.statistic));
                m.insert("dof".into(), json!(r.dof));
                m.insert("threshold".into(), self.num(r.threshold));
                m.insert("pass".into(), json!(r.pass));
                m.insert("tv_distance".into(), tv);
                m.insert("seed".into(), json!(self.config.seed));
                self.json(m, Some(&p))
            }
        };
        Ok(Outcome { code, stdout })
    }

    fn enumerate(&self) -> Result<Outcome, CliError> {
        let n = match (self.config.n, &self.config.measure_path) {
            (Some(n), _) => n,
            (None, Some(_)) => self.measure()?.n(),
            (None, None) => return Err(CliError::Usage("--n or --measure is required".into())),
        };
        let count = enumerate_antichains(n)?.count();
        match self.config.output {
            OutputFormat::Csv => ok(csv(&["n", "antichains"], vec![vec![n.to_string(), count.to_string()]])),
            OutputFormat::Json => {
                let mut m = Map::new();
                m.insert("n".into(), json!(n));
                m.insert("antichains".into(), json!(count));
                ok(self.json(m, None))
            }
        }
    }
}
