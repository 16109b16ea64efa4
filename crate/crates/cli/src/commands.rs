use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use hvsim::analysis::{
    checkpoint_period, classical_marginals, compare, compare_spec, convergence_sweep, ClassicalMethod,
    ComparisonReport, Horizon, SweepOptions,
};
use hvsim::automaton::{run_trajectory, step_permutation, ClassicalState};
use hvsim::ensemble::{enumeration_cost, MarginalSeries};
use hvsim::io;
use hvsim::model::{parse_spec, serialize_spec, validate_spec};
use hvsim::plot::{line_chart, Line};
use hvsim::quantum::{build_generator, complexify, cycle_spectrum, quantum_marginals, Generator, HermitianMatrix};
use hvsim::synthesis::{choose_periods, synthesize};
use hvsim::{ModelSpec, TimeQuantum};

use crate::config::{Command, MethodChoice, RunConfig};

/// Tolerance for accepting a target CSV as antisymmetric or Hermitian.
const MATRIX_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum Failure {
    /// The input parsed but does not describe a valid model (exit 1).
    Invalid(String),
    /// Anything else: unreadable input, malformed file, budget, I/O (exit 2).
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<hvsim::Error> for Failure {
    fn from(e: hvsim::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(m: String) -> Self {
        Failure::Runtime(m)
    }
}

type Outcome = Result<(), Failure>;

pub fn run_command(cfg: &RunConfig) -> Outcome {
    match cfg.command {
        Command::Validate => validate(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Synth => synth(cfg),
        Command::RunClassical => run_classical(cfg),
        Command::RunQuantum => run_quantum(cfg),
        Command::Compare => compare_cmd(cfg),
        Command::Sweep => sweep(cfg),
    }
}

fn read(path: &Path, what: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("cannot read {what} {}: {e}", path.display())))
}

fn parse_spec_file(path: &Path) -> Result<ModelSpec, Failure> {
    parse_spec(&read(path, "spec")?).map_err(|e| Failure::Runtime(format!("malformed spec {}: {e}", path.display())))
}

/// Parses and validates; warnings go to stderr.
fn load_spec(cfg: &RunConfig) -> Result<ModelSpec, Failure> {
    let path = cfg.require_spec()?;
    let spec = parse_spec_file(path)?;
    let report = validate_spec(&spec);
    if !report.ok {
        return Err(Failure::Invalid(format!("invalid spec {}:\n{}", path.display(), report.to_string().trim_end())));
    }
    for w in report.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(spec)
}

fn delta_t(cfg: &RunConfig) -> Result<Option<TimeQuantum>, Failure> {
    cfg.delta_t
        .as_deref()
        .map(|s| {
            let dt: TimeQuantum = s.parse().map_err(|e| Failure::Runtime(format!("bad --delta-t: {e}")))?;
            if dt.is_positive() {
                Ok(dt)
            } else {
                Err(Failure::Runtime("--delta-t must be positive".into()))
            }
        })
        .transpose()
}

fn load_matrix(cfg: &RunConfig) -> Result<DMatrix<f64>, Failure> {
    let path = cfg.require_target()?;
    io::read_matrix_csv(&read(path, "target")?)
        .map_err(|e| Failure::Runtime(format!("malformed target {}: {e}", path.display())))
}

fn load_hermitian(m: &DMatrix<f64>) -> Result<HermitianMatrix, Failure> {
    let n = m.nrows();
    if m.ncols() != 2 * n {
        return Err(Failure::Runtime(format!(
            "a Hermitian target needs {n} rows of {} columns (real part, then imaginary part), got {} columns",
            2 * n,
            m.ncols()
        )));
    }
    Ok(HermitianMatrix::new(m.columns(0, n).into_owned(), m.columns(n, n).into_owned())?)
}

/// The target as a real generator; Hermitian targets are complexified.
/// The flag reports whether the result is c-bit doubled.
fn load_target(cfg: &RunConfig) -> Result<(Generator, bool), Failure> {
    let m = load_matrix(cfg)?;
    let (g, doubled) = if cfg.hermitian {
        let h = load_hermitian(&m)?;
        let h = if cfg.subtract_trace { h.trace_subtracted() } else { h };
        (complexify(&h), true)
    } else {
        (Generator::from_matrix(&m, MATRIX_TOL)?, false)
    };
    Ok(match delta_t(cfg)? {
        Some(dt) => (g.with_delta_t(dt), doubled),
        None => (g, doubled),
    })
}

fn initial_distribution(cfg: &RunConfig, n: usize) -> Result<Vec<f64>, Failure> {
    if let Some(p0) = &cfg.p0 {
        if cfg.initial.is_some() {
            return Err(Failure::Runtime("give either --p0 or --initial, not both".into()));
        }
        return Ok(p0.clone());
    }
    let i = cfg.initial.unwrap_or(1);
    if i == 0 || i > n {
        return Err(Failure::Runtime(format!("--initial must be in 1..={n}, got {i}")));
    }
    let mut p0 = vec![0.0; n];
    p0[i - 1] = 1.0;
    Ok(p0)
}

/// Two checkpoint periods: a single crossing swaps and swaps back.
fn default_t_max(cfg: &RunConfig, spec: &ModelSpec) -> Result<u64, Failure> {
    match cfg.t_max {
        Some(t) => Ok(t),
        None => checkpoint_period(spec)?
            .checked_mul(2)
            .ok_or_else(|| Failure::Runtime("default horizon overflows; pass --t-max".into())),
    }
}

fn classical_method(cfg: &RunConfig, spec: &ModelSpec, t_max: u64) -> Result<ClassicalMethod, Failure> {
    let mc = ClassicalMethod::MonteCarlo { samples: cfg.samples, seed: cfg.seed };
    let exact = ClassicalMethod::Exact { budget: cfg.budget };
    Ok(match cfg.method {
        MethodChoice::Exact => exact,
        MethodChoice::Mc => mc,
        MethodChoice::Auto if enumeration_cost(spec, t_max)? <= cfg.budget => exact,
        MethodChoice::Auto => mc,
    })
}

struct Artifacts<'a> {
    dir: &'a Path,
    plots: bool,
}

impl<'a> Artifacts<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, Failure> {
        fs::create_dir_all(&cfg.out)
            .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", cfg.out.display())))?;
        Ok(Artifacts { dir: &cfg.out, plots: cfg.emit_plots })
    }

    fn write(&self, name: &str, contents: &str) -> Outcome {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn plot(&self, name: &str, title: &str, x: &str, y: &str, lines: &[Line]) -> Outcome {
        if self.plots {
            self.write(name, &line_chart(title, x, y, lines))?;
        }
        Ok(())
    }
}

fn marginal_lines(series: &MarginalSeries, prefix: &str, dashed: bool) -> Vec<Line> {
    (0..series.dim())
        .map(|i| {
            let pts = series.times.iter().zip(&series.probs).map(|(&t, p)| (t as f64, p[i])).collect();
            let line = Line::new(format!("{prefix}_{}", i + 1), pts);
            if dashed {
                line.dashed()
            } else {
                line
            }
        })
        .collect()
}

fn validate(cfg: &RunConfig) -> Outcome {
    let path = cfg.require_spec()?;
    let spec = parse_spec_file(path)?;
    let report = validate_spec(&spec);
    print!("{report}");
    if report.ok {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("{} failed validation", path.display())))
    }
}

fn spectrum(cfg: &RunConfig) -> Outcome {
    let (images, dt) = match (&cfg.perm, &cfg.spec) {
        (Some(_), Some(_)) => return Err(Failure::Runtime("give either --perm or --spec, not both".into())),
        (Some(perm), None) => {
            let images = perm
                .iter()
                .map(|&p| p.checked_sub(1).ok_or_else(|| Failure::Runtime("--perm images are 1-based".into())))
                .collect::<Result<Vec<_>, _>>()?;
            (images, delta_t(cfg)?.unwrap_or_default())
        }
        (None, Some(_)) => {
            let spec = load_spec(cfg)?;
            let cap = u64::try_from(cfg.budget).unwrap_or(u64::MAX);
            (step_permutation(&spec, cap)?, spec.delta_t)
        }
        (None, None) => return Err(Failure::Runtime("`spectrum` needs --perm or --spec".into())),
    };
    let spectrum = cycle_spectrum(&images, dt, None)?;
    let out = Artifacts::new(cfg)?;
    out.write("spectrum.csv", &io::spectrum_csv(&spectrum)?)?;
    let lines: Vec<Line> = spectrum
        .cycles
        .iter()
        .enumerate()
        .map(|(r, c)| {
            Line::new(format!("cycle {}", r + 1), c.energies.iter().enumerate().map(|(n, &e)| (n as f64, e)).collect())
        })
        .collect();
    out.plot("spectrum.svg", "Cycle spectrum", "n", "E", &lines)?;
    println!(
        "{} states, {} cycles, eigenvector residual {:e}",
        images.len(),
        spectrum.cycles.len(),
        spectrum.max_residual
    );
    Ok(())
}

fn single_lambda(cfg: &RunConfig) -> Result<u64, Failure> {
    match cfg.lambdas.as_slice() {
        [l] => Ok(*l),
        [] => Err(Failure::Runtime(format!("`{}` needs --lambda", cfg.command.name()))),
        _ => Err(Failure::Runtime(format!("`{}` takes a single --lambda; use `sweep` for lists", cfg.command.name()))),
    }
}

fn synth(cfg: &RunConfig) -> Outcome {
    let lambda = single_lambda(cfg)?;
    let (target, doubled) = load_target(cfg)?;
    let mut report = synthesize(&target, lambda)?;
    report.spec.cbit_doubled = doubled;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let out = Artifacts::new(cfg)?;
    out.write("spec.json", &serialize_spec(&report.spec))?;
    out.write("synth_report.csv", &io::synthesis_csv(&report)?)?;
    out.write("generator.csv", &io::generator_csv(&report.achieved)?)?;
    println!(
        "periods {:?}, {} crossings, max entry error {:e}, perturbativity {:.4}",
        report.spec.periods,
        report.spec.crossings.len(),
        report.max_error(),
        report.perturbativity
    );
    Ok(())
}

fn fold(series: MarginalSeries, doubled: bool) -> Result<MarginalSeries, Failure> {
    Ok(if doubled { series.fold_cbit()? } else { series })
}

fn run_classical(cfg: &RunConfig) -> Outcome {
    let spec = load_spec(cfg)?;
    let t_max = default_t_max(cfg, &spec)?;
    let out = Artifacts::new(cfg)?;
    if let Some(fast) = &cfg.fast {
        if cfg.p0.is_some() {
            return Err(Failure::Runtime("a trajectory starts from --initial, not --p0".into()));
        }
        let initial = cfg.initial.unwrap_or(1);
        if initial == 0 {
            return Err(Failure::Runtime("--initial is 1-based".into()));
        }
        let series = run_trajectory(&ClassicalState::new(initial - 1, fast.clone()), &spec, t_max)?;
        out.write("trajectory.csv", &io::trajectory_csv(&series)?)?;
        let pts = series.values.iter().enumerate().map(|(k, &p)| ((series.t0 + k as u64) as f64, (p + 1) as f64));
        out.plot("trajectory.svg", "Primary state", "t", "state", &[Line::new("primary", pts.collect())])?;
        return Ok(());
    }
    let p0 = initial_distribution(cfg, spec.n_primary)?;
    let series = classical_marginals(&spec, &p0, t_max, classical_method(cfg, &spec, t_max)?)?;
    let series = fold(series, spec.cbit_doubled)?;
    out.write("marginals_classical.csv", &io::marginals_csv(&series, "P_classical")?)?;
    out.plot("marginals_classical.svg", "Classical marginals", "t", "P", &marginal_lines(&series, "P", false))?;
    println!("method {}, {} time points", series.method.as_str(), series.len());
    Ok(())
}

fn run_quantum(cfg: &RunConfig) -> Outcome {
    let (g, doubled, t_max) = match (&cfg.spec, &cfg.target) {
        (Some(_), Some(_)) => return Err(Failure::Runtime("give either --spec or --target, not both".into())),
        (Some(_), None) => {
            let spec = load_spec(cfg)?;
            (build_generator(&spec)?, spec.cbit_doubled, default_t_max(cfg, &spec)?)
        }
        (None, Some(_)) => {
            let (g, doubled) = load_target(cfg)?;
            let t = cfg.t_max.unwrap_or_else(|| hvsim::analysis::horizon_steps(&g, Horizon::QuantumPeriod));
            (g, doubled, t)
        }
        (None, None) => return Err(Failure::Runtime("`run-quantum` needs --spec or --target".into())),
    };
    let p0 = initial_distribution(cfg, g.dim())?;
    let times: Vec<u64> = (0..=t_max).collect();
    let series = fold(quantum_marginals(&g, &p0, &times)?, doubled)?;
    let out = Artifacts::new(cfg)?;
    out.write("marginals_quantum.csv", &io::marginals_csv(&series, "P_quantum")?)?;
    out.write("generator.csv", &io::generator_csv(&g)?)?;
    out.plot("marginals_quantum.svg", "Quantum marginals", "t", "P", &marginal_lines(&series, "P", true))?;
    println!("{} time points", series.len());
    Ok(())
}

fn print_comparison(report: &ComparisonReport) {
    println!("max_tv {} at t = {}", io::fmt_f64(report.max_tv), report.argmax_t);
    for c in &report.checkpoints {
        println!("checkpoint t = {}: max |dP| = {}", c.t, io::fmt_f64(c.max_abs_dev));
    }
}

fn compare_cmd(cfg: &RunConfig) -> Outcome {
    let report = match (&cfg.classical, &cfg.quantum) {
        (Some(c), Some(q)) => {
            let c = io::read_marginals_csv(&read(c, "classical series")?)?;
            let q = io::read_marginals_csv(&read(q, "quantum series")?)?;
            let period = match cfg.spec {
                Some(_) => Some(checkpoint_period(&load_spec(cfg)?)?),
                None => None,
            };
            compare(&c, &q, period)?
        }
        (None, None) => {
            let spec = load_spec(cfg)?;
            let t_max = default_t_max(cfg, &spec)?;
            let p0 = initial_distribution(cfg, spec.n_primary)?;
            compare_spec(&spec, &p0, t_max, classical_method(cfg, &spec, t_max)?)?
        }
        _ => return Err(Failure::Runtime("--classical and --quantum must be given together".into())),
    };
    let out = Artifacts::new(cfg)?;
    out.write("comparison.csv", &io::comparison_csv(&report)?)?;
    let mut lines = marginal_lines(&report.classical, "P_c", false);
    lines.extend(marginal_lines(&report.quantum, "P_q", true));
    out.plot("comparison.svg", "Classical (solid) vs quantum (dashed)", "t", "P", &lines)?;
    let tv: Vec<(f64, f64)> = report.times.iter().zip(&report.tv).map(|(&t, &d)| (t as f64, d)).collect();
    out.plot("tv.svg", "Total variation distance", "t", "TV", &[Line::new("TV", tv)])?;
    print_comparison(&report);
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Outcome {
    let (target, _) = load_target(cfg)?;
    let horizon = cfg.t_max.map_or(Horizon::QuantumPeriod, Horizon::Steps);
    let budget = match cfg.method {
        MethodChoice::Mc => 0,
        MethodChoice::Auto => cfg.budget,
        MethodChoice::Exact => {
            let t_max = hvsim::analysis::horizon_steps(&target, horizon);
            for &lambda in &cfg.lambdas {
                let periods = choose_periods(target.dim(), lambda)?;
                let probe = ModelSpec::new(periods, Vec::new());
                let cost = enumeration_cost(&probe, t_max)?;
                if cost > cfg.budget {
                    return Err(hvsim::Error::BudgetExceeded { required: cost, allowed: cfg.budget }.into());
                }
            }
            cfg.budget
        }
    };
    let p0 = initial_distribution(cfg, target.dim())?;
    let options = SweepOptions { horizon, budget, samples: cfg.samples, seed: cfg.seed };
    let table = convergence_sweep(&target, &cfg.lambdas, &p0, options)?;
    let out = Artifacts::new(cfg)?;
    out.write("sweep.csv", &io::sweep_csv(&table)?)?;
    let pts = |f: fn(&hvsim::analysis::SweepRow) -> f64| -> Vec<(f64, f64)> {
        table.rows.iter().map(|r| ((r.lambda as f64).log10(), f(r))).collect()
    };
    out.plot(
        "sweep.svg",
        "Precision sweep",
        "log10 lambda",
        "",
        &[
            Line::new("max_tv", pts(|r| r.max_tv)),
            Line::new("log10 max_entry_err", pts(|r| r.max_entry_err.log10())).dashed(),
        ],
    )?;
    println!("horizon {} steps", table.horizon);
    for r in &table.rows {
        println!(
            "lambda {}: max_entry_err {}, max_tv {}, {} in {:.3}s",
            r.lambda,
            io::fmt_f64(r.max_entry_err),
            io::fmt_f64(r.max_tv),
            r.method.as_str(),
            r.runtime.as_secs_f64()
        );
    }
    Ok(())
}
