//! Command-line flags, the optional TOML config file and their merge into a
//! [`RunConfig`]. Flags win over the file; the file wins over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use hvsim::ensemble::DEFAULT_BUDGET;

/// Seed used when none is given, so unattended runs are reproducible.
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(name = "hvsim", version, about = "Crossing-point automata and the quantum flows they mimic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check a spec file and print the report.
    Validate,
    /// Cycle spectrum of a permutation, or of a spec's one-step map.
    Spectrum,
    /// Build an automaton approximating a target generator.
    Synth,
    /// Classical marginals over the fast ensemble, or one trajectory.
    RunClassical,
    /// Quantum marginals of a spec's generator or of a target.
    RunQuantum,
    /// Classical versus quantum marginals.
    Compare,
    /// Precision sweep over lambda for a target.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Spectrum => "spectrum",
            Command::Synth => "synth",
            Command::RunClassical => "run-classical",
            Command::RunQuantum => "run-quantum",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    /// Exact within the budget, Monte Carlo above it.
    Auto,
    Exact,
    Mc,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Model spec (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Target matrix (CSV): an antisymmetric real generator, or with
    /// --hermitian the real then imaginary halves of a Hamiltonian.
    #[arg(long, global = true)]
    pub target: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub t_max: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// One value, or a comma-separated list for sweeps.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambda: Option<Vec<u64>>,
    /// Work budget for exact enumeration (state-steps); accepts `1e9`.
    #[arg(long, global = true, value_parser = parse_budget)]
    pub budget: Option<u128>,
    #[arg(long, global = true, conflicts_with = "mc")]
    pub exact: bool,
    #[arg(long, global = true)]
    pub mc: bool,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plots: bool,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with defaults for any of these options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Initial distribution over primary states, comma-separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub p0: Option<Vec<f64>>,
    /// Initial primary state (1-based); shorthand for a basis `p0`.
    #[arg(long, global = true)]
    pub initial: Option<usize>,
    /// Fast coordinates of a single trajectory (run-classical).
    #[arg(long, global = true, value_delimiter = ',')]
    pub fast: Option<Vec<u64>>,
    /// Permutation images, 1-based and comma-separated (spectrum).
    #[arg(long, global = true, value_delimiter = ',')]
    pub perm: Option<Vec<usize>>,
    /// Read --target as a Hermitian matrix and synthesize its c-bit double.
    #[arg(long, global = true)]
    pub hermitian: bool,
    /// Remove the trace of a Hermitian target first.
    #[arg(long, global = true)]
    pub subtract_trace: bool,
    /// Time quantum for a target, e.g. `1` or `1/2`.
    #[arg(long, global = true)]
    pub delta_t: Option<String>,
    /// Previously written classical marginals (compare).
    #[arg(long, global = true)]
    pub classical: Option<PathBuf>,
    /// Previously written quantum marginals (compare).
    #[arg(long, global = true)]
    pub quantum: Option<PathBuf>,
}

fn parse_budget(s: &str) -> Result<u128, String> {
    if let Ok(v) = s.parse::<u128>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 3.4e38 => Ok(v as u128),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    spec: Option<PathBuf>,
    target: Option<PathBuf>,
    out: Option<PathBuf>,
    t_max: Option<u64>,
    samples: Option<u64>,
    seed: Option<u64>,
    lambda: Option<Vec<u64>>,
    budget: Option<u64>,
    method: Option<MethodChoice>,
    plots: Option<bool>,
    threads: Option<usize>,
    p0: Option<Vec<f64>>,
    initial: Option<usize>,
    fast: Option<Vec<u64>>,
    perm: Option<Vec<usize>>,
    hermitian: Option<bool>,
    subtract_trace: Option<bool>,
    delta_t: Option<String>,
    classical: Option<PathBuf>,
    quantum: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub spec: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub samples: u64,
    pub t_max: Option<u64>,
    pub lambdas: Vec<u64>,
    pub budget: u128,
    pub method: MethodChoice,
    pub emit_plots: bool,
    pub threads: Option<usize>,
    pub p0: Option<Vec<f64>>,
    pub initial: Option<usize>,
    pub fast: Option<Vec<u64>>,
    pub perm: Option<Vec<usize>>,
    pub hermitian: bool,
    pub subtract_trace: bool,
    pub delta_t: Option<String>,
    pub classical: Option<PathBuf>,
    pub quantum: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, String> {
        let Cli { command, flags: f } = cli;
        let file = match &f.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let method = if f.exact {
            MethodChoice::Exact
        } else if f.mc {
            MethodChoice::Mc
        } else {
            file.method.unwrap_or(MethodChoice::Auto)
        };
        Ok(RunConfig {
            command,
            spec: f.spec.or(file.spec),
            target: f.target.or(file.target),
            out: f.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            seed: f.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            samples: f.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            t_max: f.t_max.or(file.t_max),
            lambdas: f.lambda.or(file.lambda).unwrap_or_default(),
            budget: f.budget.or(file.budget.map(u128::from)).unwrap_or(DEFAULT_BUDGET),
            method,
            emit_plots: f.plots || file.plots.unwrap_or(false),
            threads: f.threads.or(file.threads),
            p0: f.p0.or(file.p0),
            initial: f.initial.or(file.initial),
            fast: f.fast.or(file.fast),
            perm: f.perm.or(file.perm),
            hermitian: f.hermitian || file.hermitian.unwrap_or(false),
            subtract_trace: f.subtract_trace || file.subtract_trace.unwrap_or(false),
            delta_t: f.delta_t.or(file.delta_t),
            classical: f.classical.or(file.classical),
            quantum: f.quantum.or(file.quantum),
        })
    }

    pub fn require_spec(&self) -> Result<&Path, String> {
        self.spec.as_deref().ok_or_else(|| format!("`{}` needs --spec", self.command.name()))
    }

    pub fn require_target(&self) -> Result<&Path, String> {
        self.target.as_deref().ok_or_else(|| format!("`{}` needs --target", self.command.name()))
    }
}

fn read_config(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("malformed config {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::resolve(Cli::try_parse_from(args).unwrap()).unwrap()
    }

    #[test]
    fn defaults() {
        let c = parse(&["hvsim", "validate", "--spec", "a.json"]);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.samples, DEFAULT_SAMPLES);
        assert_eq!(c.budget, DEFAULT_BUDGET);
        assert_eq!(c.method, MethodChoice::Auto);
        assert_eq!(c.out, PathBuf::from("."));
        assert!(!c.emit_plots);
    }

    #[test]
    fn lists_and_budget_forms() {
        let c = parse(&["hvsim", "sweep", "--lambda", "5,10,20", "--budget", "1e6", "--p0", "0.5,0.5"]);
        assert_eq!(c.lambdas, vec![5, 10, 20]);
        assert_eq!(c.budget, 1_000_000);
        assert_eq!(c.p0, Some(vec![0.5, 0.5]));
        assert!(Cli::try_parse_from(["hvsim", "sweep", "--budget", "-3"]).is_err());
        assert!(Cli::try_parse_from(["hvsim", "compare", "--exact", "--mc"]).is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 7\nsamples = 50\nmethod = \"mc\"\nlambda = [3, 4]\nplots = true\n").unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["hvsim", "compare", "--config", p, "--seed", "9"]);
        assert_eq!(c.seed, 9);
        assert_eq!(c.samples, 50);
        assert_eq!(c.method, MethodChoice::Mc);
        assert_eq!(c.lambdas, vec![3, 4]);
        assert!(c.emit_plots);
        assert_eq!(parse(&["hvsim", "compare", "--config", p, "--exact"]).method, MethodChoice::Exact);

        std::fs::write(&path, "sede = 7\n").unwrap();
        let err = RunConfig::resolve(Cli::try_parse_from(["hvsim", "compare", "--config", p]).unwrap()).unwrap_err();
        assert!(err.contains("sede"), "{err}");
    }
}
