use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use dicke_core::operators::DEFAULT_MAX_DIM;
use dicke_core::thermo::DEFAULT_CUTOFF_TOL;
use dicke_core::ModelKind;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "dicke", version, about = "Exact-diagonalization workbench for the Dicke model and its effective Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Free energy, energy, entropy and expectations per spin.
    Thermo {
        /// Leave the expectation columns empty (skips eigenvectors).
        #[arg(long)]
        no_expectations: bool,
    },
    /// Free-energy gaps between two kinds and their decay with N.
    Gap,
    /// Coefficient limit assertions and the LZ prefactor blow-up.
    Limits,
    /// Ground-state pairwise concurrence over a lambda grid.
    Concurrence,
    /// Cross-checks against the brute-force full-space oracle.
    OracleCheck {
        /// Largest N in the spectrum comparisons.
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Thermo { .. } => "thermo",
            Command::Gap => "gap",
            Command::Limits => "limits",
            Command::Concurrence => "concurrence",
            Command::OracleCheck { .. } => "oracle-check",
        }
    }
}

/// Flags shared by every command. Each can also come from `--config`.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Comma list or start:stop:step.
    #[arg(long, global = true)]
    pub n_list: Option<String>,
    #[arg(long, global = true)]
    pub beta_list: Option<String>,
    #[arg(long, global = true)]
    pub lambda_list: Option<String>,
    #[arg(long, global = true)]
    pub epsilon: Option<String>,
    /// Comma list of DICKE, CT, LZ, AH.
    #[arg(long, global = true)]
    pub kinds: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<String>,
    #[arg(long, global = true)]
    pub tol_cutoff: Option<String>,
    #[arg(long, global = true)]
    pub max_dim: Option<String>,
    /// key=value file; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

const FILE_KEYS: [&str; 10] = [
    "n-list", "beta-list", "lambda-list", "epsilon", "kinds", "out", "threads", "tol-cutoff", "max-dim", "max-n",
];

/// Validated settings for one command.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub kinds: Vec<ModelKind>,
    pub n_list: Vec<usize>,
    pub beta_list: Vec<f64>,
    pub lambda_list: Vec<f64>,
    pub epsilon: f64,
    pub tol_cutoff: f64,
    pub max_dim: usize,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub max_n: usize,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("{}:{}: expected key=value", path.display(), no + 1)))?;
        let k = k.trim().replace('_', "-");
        if !FILE_KEYS.contains(&k.as_str()) {
            return Err(config_err(format!("{}:{}: unknown key {k}", path.display(), no + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn parse_scalar<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| config_err(format!("{key}: cannot parse {s:?}")))
}

/// Rounds away the last few bits of `start + i·step` so grid points print as
/// the decimals the user typed.
fn tidy(x: f64) -> f64 {
    format!("{x:.12e}").parse().expect("formatted float parses")
}

/// `a,b,c` or `start:stop:step` (stop included).
pub fn parse_float_grid(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((start, rest)) = s.split_once(':') {
        let (stop, step) = rest
            .split_once(':')
            .ok_or_else(|| config_err(format!("{key}: range needs start:stop:step")))?;
        let (start, stop, step): (f64, f64, f64) =
            (parse_scalar(key, start)?, parse_scalar(key, stop)?, parse_scalar(key, step)?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(config_err(format!("{key}: range step must be positive")));
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Ok(Vec::new());
        }
        return Ok((0..=count as usize).map(|i| tidy(start + i as f64 * step)).collect());
    }
    s.split(',').map(|x| parse_scalar(key, x)).collect()
}

pub fn parse_n_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((start, rest)) = s.split_once(':') {
        let (stop, step) = rest
            .split_once(':')
            .ok_or_else(|| config_err("n-list: range needs start:stop:step"))?;
        let (start, stop, step): (usize, usize, usize) =
            (parse_scalar("n-list", start)?, parse_scalar("n-list", stop)?, parse_scalar("n-list", step)?);
        if step == 0 {
            return Err(config_err("n-list: range step must be positive"));
        }
        return Ok((start..=stop).step_by(step).collect());
    }
    s.split(',').map(|x| parse_scalar("n-list", x)).collect()
}

pub fn parse_kinds(s: &str) -> Result<Vec<ModelKind>, CliError> {
    s.split(',')
        .filter(|k| !k.trim().is_empty())
        .map(|k| k.trim().parse::<ModelKind>().map_err(|e| config_err(format!("kinds: {e}"))))
        .collect()
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<RunConfig, CliError> {
        let file = match &cli.common.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let c = &cli.common;
        let pick = |flag: &Option<String>, key: &str| -> Option<String> {
            flag.clone().or_else(|| file.get(key).cloned())
        };
        let command = cli.command;
        let kinds = match pick(&c.kinds, "kinds") {
            Some(s) => parse_kinds(&s)?,
            None => match command {
                Command::Thermo { .. } => ModelKind::ALL.to_vec(),
                Command::Concurrence => vec![ModelKind::Dicke, ModelKind::Ah],
                _ => Vec::new(),
            },
        };
        let n_list = match pick(&c.n_list, "n-list") {
            Some(s) => parse_n_grid(&s)?,
            None => Vec::new(),
        };
        let beta_list = match pick(&c.beta_list, "beta-list") {
            Some(s) => parse_float_grid("beta-list", &s)?,
            None => Vec::new(),
        };
        let lambda_list = match pick(&c.lambda_list, "lambda-list") {
            Some(s) => parse_float_grid("lambda-list", &s)?,
            None => Vec::new(),
        };
        let epsilon = pick(&c.epsilon, "epsilon").map_or(Ok(1.0), |s| parse_scalar("epsilon", &s))?;
        let tol_cutoff =
            pick(&c.tol_cutoff, "tol-cutoff").map_or(Ok(DEFAULT_CUTOFF_TOL), |s| parse_scalar("tol-cutoff", &s))?;
        let max_dim = pick(&c.max_dim, "max-dim").map_or(Ok(DEFAULT_MAX_DIM), |s| parse_scalar("max-dim", &s))?;
        let threads = pick(&c.threads, "threads").map(|s| parse_scalar::<usize>("threads", &s)).transpose()?;
        let out = c.out.clone().or_else(|| file.get("out").map(PathBuf::from));
        let max_n = match command {
            Command::OracleCheck { max_n: Some(m), .. } => m,
            _ => file.get("max-n").map_or(Ok(3), |s| parse_scalar("max-n", s))?,
        };
        let cfg = RunConfig {
            command,
            kinds,
            n_list,
            beta_list,
            lambda_list,
            epsilon,
            tol_cutoff,
            max_dim,
            threads,
            out,
            max_n,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(config_err(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.tol_cutoff > 0.0) {
            return Err(config_err(format!("tol-cutoff must be positive, got {}", self.tol_cutoff)));
        }
        if self.max_dim == 0 {
            return Err(config_err("max-dim must be positive"));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be positive"));
        }
        if self.n_list.contains(&0) {
            return Err(config_err("n-list: N must be at least 1"));
        }
        if let Some(b) = self.beta_list.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(config_err(format!("beta-list: beta must be positive, got {b}")));
        }
        if let Some(l) = self.lambda_list.iter().find(|l| !l.is_finite()) {
            return Err(config_err(format!("lambda-list: {l} is not finite")));
        }
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(config_err(format!("empty grid: {what}"))) };
        match self.command {
            Command::Thermo { .. } => {
                need(!self.kinds.is_empty(), "kinds")?;
                need(!self.n_list.is_empty(), "N")?;
                need(!self.beta_list.is_empty(), "beta")?;
                need(!self.lambda_list.is_empty(), "lambda")?;
            }
            Command::Gap => {
                if self.kinds.len() != 2 {
                    return Err(config_err(format!("gap needs exactly two kinds, got {}", self.kinds.len())));
                }
                need(!self.n_list.is_empty(), "N")?;
                need(!self.beta_list.is_empty(), "beta")?;
                need(!self.lambda_list.is_empty(), "lambda")?;
                if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(config_err("n-list must be strictly increasing for gap"));
                }
            }
            Command::Concurrence => {
                need(!self.kinds.is_empty(), "kinds")?;
                if let Some(k) = self.kinds.iter().find(|k| !matches!(k, ModelKind::Dicke | ModelKind::Ah)) {
                    return Err(config_err(format!("concurrence supports DICKE and AH only, got {k}")));
                }
                need(!self.n_list.is_empty(), "N")?;
                need(!self.lambda_list.is_empty(), "lambda")?;
                if self.n_list.contains(&1) {
                    return Err(config_err("concurrence needs N >= 2"));
                }
            }
            Command::Limits => {}
            Command::OracleCheck { .. } => {
                if !(1..=dicke_core::oracle::MAX_N).contains(&self.max_n) {
                    return Err(config_err(format!("max-n must lie in 1..={}", dicke_core::oracle::MAX_N)));
                }
            }
        }
        Ok(())
    }

    /// `#` lines echoing everything that affects the numbers, so thread
    /// count and output path are left out.
    pub fn metadata(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = format!("# dicke {}\n# command: {}\n", env!("CARGO_PKG_VERSION"), self.command.name());
        s += &format!("# kinds: {}\n", join(self.kinds.iter().map(|k| k.to_string()).collect()));
        s += &format!("# n-list: {}\n", join(self.n_list.iter().map(|n| n.to_string()).collect()));
        s += &format!("# beta-list: {}\n", join(self.beta_list.iter().map(|b| b.to_string()).collect()));
        s += &format!("# lambda-list: {}\n", join(self.lambda_list.iter().map(|l| l.to_string()).collect()));
        s += &format!("# epsilon: {}\n# tol-cutoff: {:e}\n# max-dim: {}\n", self.epsilon, self.tol_cutoff, self.max_dim);
        if let Command::OracleCheck { .. } = self.command {
            s += &format!("# max-n: {}\n", self.max_n);
        }
        s
    }
}
