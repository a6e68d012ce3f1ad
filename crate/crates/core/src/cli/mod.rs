//! The `qprob` command line.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 input validation,
//! 3 numerical failure. Values are resolved as flags, then the `--config`
//! file, then built-in defaults; the effective values are echoed into every
//! report.

pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::becsim::{self, Regime};
use crate::error::Error;
use crate::events::{self, DensityOperator, Observable};
use crate::linalg::{ComplexVector, DEFAULT_TOL};
use crate::prospects::{self, CompositeState, Normalization, ProspectResult};
use crate::quarterlaw::{self, BetaPairDistribution};
use crate::uncertain::{self, ModeWeights, UncertainProbability, UncertainUnion};
use config::{
    BecSimConfig, ComplexValue, MeasureConfig, Preset, ProspectConfig, QuarterLawConfig, QuarterRow, StateSpec,
    VerifyConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// How far from unit norm strict-mode weights may be; typed-in amplitudes
/// such as `0.7071` pass and are then rescaled exactly.
pub const WEIGHT_INPUT_TOL: f64 = 1e-4;

/// Axiom tolerance for reported invariant checks.
pub const CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "qprob", version, about = "Quantum probabilities, interference factors and condensate simulations")]
pub struct Cli {
    /// JSON file with the command's parameters.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "QPROB_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Event, union and uncertain-union probabilities for one state.
    Measure(MeasureArgs),
    /// Prospect probabilities p, f, q for a composite state.
    Prospect(ProspectArgs),
    /// Table of q₊, q₋ for beta-pair priors.
    QuarterLaw(QuarterLawArgs),
    /// Stochastic two-mode condensate ensemble.
    BecSim(BecArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Comma-separated weights; each entry `re` or `re:im`.
    #[arg(long, value_delimiter = ',', value_parser = parse_complex)]
    pub weights: Option<Vec<ComplexValue>>,
    /// Rescale non-normalized weights instead of rejecting them.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct ProspectArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Modes per factor for the product and max-entangled presets.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_complex)]
    pub weights: Option<Vec<ComplexValue>>,
    #[arg(long)]
    pub lenient: bool,
    /// Report the normalized family as the primary result.
    #[arg(long, conflicts_with = "raw")]
    pub normalized: bool,
    /// Report the raw family as the primary result.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct QuarterLawArgs {
    /// Symmetric shapes `α = β = μ = ν`, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct BecArgs {
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Output sample spacing in steps.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Also write an SVG chart of q1(t) next to the CSV.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run a single suite.
    #[arg(long, value_name = "SUITE")]
    pub filter: Option<String>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub sweep_paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, hide = true)]
    pub corrupt_state: bool,
}

fn parse_complex(s: &str) -> Result<ComplexValue, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}"));
    match s.split_once(':') {
        Some((re, im)) => Ok(ComplexValue::Pair([num(re)?, num(im)?])),
        None => Ok(ComplexValue::Real(num(s)?)),
    }
}

/// A failed command: exit code plus message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL };
        Self { code, message: e.to_string() }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| dispatch(&cli)),
        Ok(None) => dispatch(&cli),
        Err(f) => Err(f),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("qprob: {}", f.message);
            f.code
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, Failure> {
    let Ok(raw) = std::env::var("QPROB_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::validation(format!("QPROB_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Failure { code: EXIT_NUMERICAL, message: format!("cannot start worker pool: {e}") })
}

fn dispatch(cli: &Cli) -> CmdResult {
    let cfg_path = cli.config.as_deref();
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Measure(a) => cmd_measure(load(cfg_path)?, a, out),
        Command::Prospect(a) => cmd_prospect(load(cfg_path)?, a, out),
        Command::QuarterLaw(a) => cmd_quarter_law(load(cfg_path)?, a, out),
        Command::BecSim(a) => cmd_bec_sim(load(cfg_path)?, a, cli.seed, out),
        Command::Verify(a) => cmd_verify(load(cfg_path)?, a, cli.seed, out),
    }
}

fn load<T: for<'de> serde::Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, Failure> {
    config::load(path).map_err(Failure::validation)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::validation(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Run-independent facts kept apart from the results.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub program: &'static str,
    pub version: &'static str,
}

const METADATA: Metadata = Metadata { program: "qprob", version: env!("CARGO_PKG_VERSION") };

fn weights_from(values: &[ComplexValue], strict: bool) -> Result<ModeWeights, Failure> {
    let w: Vec<Complex64> = config::complex_list(values);
    let norm_sq: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    if strict && (norm_sq - 1.0).abs() > WEIGHT_INPUT_TOL {
        return Err(Failure::validation(format!(
            "weights violate Σ|b|² = 1 (got {norm_sq}); pass --lenient to rescale"
        )));
    }
    Ok(ModeWeights::normalize(w)?)
}

#[derive(Debug, Serialize)]
struct UnionEntry {
    indices: Vec<usize>,
    p: f64,
}

#[derive(Debug, Serialize)]
struct MeasureChecks {
    probabilities_sum_to_one: bool,
    uncertain_decomposition: Option<bool>,
}

#[derive(Debug, Serialize)]
struct MeasureReport {
    command: &'static str,
    config: MeasureConfig,
    dim: usize,
    purity: f64,
    eigenvalues: Vec<f64>,
    probabilities: Vec<f64>,
    unions: Vec<UnionEntry>,
    uncertain: Option<UncertainProbability>,
    checks: MeasureChecks,
    metadata: Metadata,
}

fn cmd_measure(mut cfg: MeasureConfig, a: &MeasureArgs, out: Option<&Path>) -> CmdResult {
    if let Some(w) = &a.weights {
        cfg.weights = Some(w.clone());
    }
    if a.lenient {
        cfg.strict = false;
    }
    let rho = cfg.state.build()?;
    let obs = match &cfg.observable {
        Some(rows) => Observable::from_hermitian(&config::matrix_from_rows(rows)?, DEFAULT_TOL)?,
        None => Observable::standard(rho.dim())?,
    };
    let probabilities =
        (0..rho.dim()).map(|n| events::event_probability(&rho, &obs, n)).collect::<crate::Result<Vec<f64>>>()?;
    let unions = cfg
        .unions
        .iter()
        .map(|idx| Ok(UnionEntry { indices: idx.clone(), p: events::union_probability(&rho, &obs, idx)? }))
        .collect::<crate::Result<Vec<_>>>()?;
    let uncertain = match &cfg.weights {
        Some(w) => {
            let u = UncertainUnion::new(obs.clone(), weights_from(w, cfg.strict)?)?;
            Some(uncertain::uncertain_probability(&rho, &u)?)
        }
        None => None,
    };
    let checks = MeasureChecks {
        probabilities_sum_to_one: (probabilities.iter().sum::<f64>() - 1.0).abs() <= CHECK_TOL,
        uncertain_decomposition: uncertain.map(|u| (u.p - u.diag - u.q).abs() <= CHECK_TOL),
    };
    let ok = checks.probabilities_sum_to_one && checks.uncertain_decomposition.unwrap_or(true);
    let report = MeasureReport {
        command: "measure",
        dim: rho.dim(),
        purity: rho.purity(),
        eigenvalues: obs.spectral().eigenvalues().to_vec(),
        probabilities,
        unions,
        uncertain,
        checks,
        config: cfg,
        metadata: METADATA,
    };
    emit(out, &to_json(&report))?;
    Ok(if ok { EXIT_OK } else { EXIT_INVARIANT })
}

#[derive(Debug, Serialize)]
struct ProspectChecks {
    /// `p = f + q` in raw mode.
    raw_decomposition: bool,
    /// `Σp = Σf = 1`, `Σq = 0` and the bounds in normalized mode.
    normalized_axioms: Option<bool>,
    /// `q = 0` where a zero-interference theorem applies to the preset
    /// (normalized family for product states, raw for the max-entangled one).
    zero_interference: Option<bool>,
}

#[derive(Debug, Serialize)]
struct ProspectReport {
    command: &'static str,
    config: ProspectConfig,
    dim_a: usize,
    dim_b: usize,
    primary: Normalization,
    raw: ProspectResult,
    normalized: Option<ProspectResult>,
    /// Why the normalized family is absent.
    normalized_error: Option<String>,
    entanglement_measure: Option<f64>,
    checks: ProspectChecks,
    metadata: Metadata,
}

fn uniform_superposition(m: usize) -> crate::Result<DensityOperator> {
    let amp = 1.0 / (m as f64).sqrt();
    DensityOperator::pure(&ComplexVector::from_real(&vec![amp; m])?)
}

fn build_composite(cfg: &ProspectConfig) -> Result<CompositeState, Failure> {
    let m = cfg.modes;
    Ok(match cfg.preset {
        Preset::BellLike => {
            let psi = ComplexVector::from_real(&[0.5, 0.5, 0.5, -0.5])?;
            CompositeState::new(DensityOperator::pure(&psi)?, 2, 2)?
        }
        Preset::MaxEntangled => prospects::max_entangled_state(m)?,
        Preset::Product => {
            let a = cfg.rho_a.as_ref().map(StateSpec::build).transpose()?;
            let b = cfg.rho_b.as_ref().map(StateSpec::build).transpose()?;
            let a = match a {
                Some(a) => a,
                None => uniform_superposition(m)?,
            };
            let b = match b {
                Some(b) => b,
                None => uniform_superposition(m)?,
            };
            prospects::product_state(&a, &b)
        }
        Preset::File => {
            let (Some(state), Some(da), Some(db)) = (&cfg.state, cfg.dim_a, cfg.dim_b) else {
                return Err(Failure::validation("preset file needs state, dim_a and dim_b in the config"));
            };
            CompositeState::new(state.build()?, da, db)?
        }
    })
}

fn cmd_prospect(mut cfg: ProspectConfig, a: &ProspectArgs, out: Option<&Path>) -> CmdResult {
    if let Some(p) = a.preset {
        cfg.preset = p;
    }
    if let Some(m) = a.m {
        cfg.modes = m;
    }
    if let Some(w) = &a.weights {
        cfg.weights = Some(w.clone());
    }
    if a.lenient {
        cfg.strict = false;
    }
    if a.normalized {
        cfg.normalized = true;
    }
    if a.raw {
        cfg.normalized = false;
    }
    if cfg.modes < 2 {
        return Err(Failure::validation(format!("need at least 2 modes, got {}", cfg.modes)));
    }
    let state = build_composite(&cfg)?;
    let weights = match &cfg.weights {
        Some(w) => weights_from(w, cfg.strict)?,
        None => ModeWeights::uniform(state.dim_b())?,
    };
    let raw = prospects::prospect_probabilities(&state, &weights, Normalization::Raw)?;
    let (normalized, normalized_error) =
        match prospects::prospect_probabilities(&state, &weights, Normalization::Normalized) {
            Ok(r) => (Some(r), None),
            Err(e) if !cfg.normalized => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        };
    let checks = ProspectChecks {
        raw_decomposition: raw.p.iter().zip(&raw.f).zip(&raw.q).all(|((p, f), q)| (p - f - q).abs() <= CHECK_TOL),
        normalized_axioms: normalized.as_ref().map(|r| r.axiom_violation() <= CHECK_TOL),
        zero_interference: match cfg.preset {
            Preset::MaxEntangled => Some(raw.max_abs_q() <= 1e-12),
            Preset::Product => normalized.as_ref().map(|r| r.max_abs_q() <= 1e-12),
            _ => None,
        },
    };
    let ok = checks.raw_decomposition
        && checks.normalized_axioms.unwrap_or(true)
        && checks.zero_interference.unwrap_or(true);
    let entanglement_measure = match cfg.preset {
        Preset::MaxEntangled => Some(prospects::entanglement_measure_maxstate(cfg.modes)?),
        _ => None,
    };
    let report = ProspectReport {
        command: "prospect",
        dim_a: state.dim_a(),
        dim_b: state.dim_b(),
        primary: if cfg.normalized { Normalization::Normalized } else { Normalization::Raw },
        raw,
        normalized,
        normalized_error,
        entanglement_measure,
        checks,
        config: cfg,
        metadata: METADATA,
    };
    emit(out, &to_json(&report))?;
    if !ok {
        eprintln!("qprob: prospect invariant check failed, see the checks field");
    }
    Ok(if ok { EXIT_OK } else { EXIT_INVARIANT })
}

fn cmd_quarter_law(mut cfg: QuarterLawConfig, a: &QuarterLawArgs, out: Option<&Path>) -> CmdResult {
    if let Some(alphas) = &a.alphas {
        cfg.alphas = alphas.clone();
        cfg.rows.clear();
    }
    let rows: Vec<QuarterRow> = cfg
        .alphas
        .iter()
        .map(|&x| QuarterRow { alpha: x, beta: x, mu: x, nu: x, lambda_plus: 0.5 })
        .chain(cfg.rows.iter().copied())
        .collect();
    if rows.is_empty() {
        return Err(Failure::validation("quarter-law needs at least one row"));
    }
    let mut text = String::from(output::QUARTER_HEADER);
    text.push('\n');
    for r in &rows {
        let d = BetaPairDistribution::new(r.alpha, r.beta, r.mu, r.nu, r.lambda_plus, 1.0 - r.lambda_plus)?;
        let s = quarterlaw::q_split_closed(&d);
        text.push_str(&output::csv_row(&[
            r.alpha,
            r.beta,
            r.mu,
            r.nu,
            r.lambda_plus,
            s.q_plus,
            s.q_minus,
            s.residual(),
        ]));
        text.push('\n');
    }
    emit(out, &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct BecSummary {
    max_abs_q1: f64,
    q1_time_variance: f64,
    max_abs_q1_plus_q2: f64,
}

#[derive(Debug, Serialize)]
struct BecOutputs {
    csv: Option<String>,
    svg: Option<String>,
}

#[derive(Debug, Serialize)]
struct BecReport {
    command: &'static str,
    config: BecSimConfig,
    regime: Regime,
    critical_amplitude: f64,
    n_steps: usize,
    rows: usize,
    summary: BecSummary,
    outputs: BecOutputs,
    metadata: Metadata,
}

fn cmd_bec_sim(mut cfg: BecSimConfig, a: &BecArgs, seed: Option<u64>, out: Option<&Path>) -> CmdResult {
    let p = &mut cfg.params;
    let set = |dst: &mut f64, src: Option<f64>| {
        if let Some(v) = src {
            *dst = v;
        }
    };
    set(&mut p.b, a.b);
    set(&mut p.sigma, a.sigma);
    set(&mut p.s0, a.s0);
    set(&mut p.x0, a.x0);
    set(&mut p.dt, a.dt);
    set(&mut p.t_max, a.tmax);
    if let Some(n) = a.paths {
        p.n_paths = n;
    }
    if let Some(s) = seed {
        p.seed = s;
    }
    if let Some(s) = a.stride {
        cfg.stride = s;
    }
    if cfg.stride == 0 {
        return Err(Failure::validation("stride must be at least 1"));
    }
    if a.plot && out.is_none() {
        return Err(Failure::validation("--plot needs --out to place the SVG next to the CSV"));
    }
    cfg.params.validate()?;
    let p = cfg.params;
    let bc = becsim::critical_amplitude(p.s0, p.x0)?;
    let regime = becsim::regime_classify(p.b, p.s0, p.x0)?;
    let result = becsim::ensemble_interference(&p, cfg.stride)?;

    emit(out, &output::ensemble_csv(&result))?;
    let Some(csv_path) = out else {
        return Ok(EXIT_OK);
    };
    let svg_path = a.plot.then(|| csv_path.with_extension("svg"));
    if let Some(svg) = &svg_path {
        let relation = match regime {
            Regime::Rabi => "<",
            Regime::Josephson => ">",
            Regime::Critical => "=",
        };
        let caption = format!("q1(t), b = {} {relation} b_c = {bc:.3}, sigma = {}, {} paths", p.b, p.sigma, p.n_paths);
        let chart = output::line_chart(&result.times, &result.q1, "t", "q1", &caption);
        std::fs::write(svg, chart).map_err(|e| Failure::validation(format!("cannot write {}: {e}", svg.display())))?;
    }
    let file_name = |path: &Path| path.file_name().map(|n| n.to_string_lossy().into_owned());
    let report = BecReport {
        command: "bec-sim",
        regime,
        critical_amplitude: bc,
        n_steps: p.n_steps(),
        rows: result.len(),
        summary: BecSummary {
            max_abs_q1: result.q1.iter().fold(0.0, |m, q| m.max(q.abs())),
            q1_time_variance: result.q1_time_variance(),
            max_abs_q1_plus_q2: result.q1.iter().zip(&result.q2).fold(0.0, |m, (a, b)| m.max((a + b).abs())),
        },
        outputs: BecOutputs { csv: file_name(csv_path), svg: svg_path.as_deref().and_then(file_name) },
        config: cfg,
        metadata: METADATA,
    };
    emit(Some(&csv_path.with_extension("json")), &to_json(&report))?;
    Ok(EXIT_OK)
}

fn cmd_verify(mut cfg: VerifyConfig, a: &VerifyArgs, seed: Option<u64>, out: Option<&Path>) -> CmdResult {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = a.paths {
        cfg.paths = n;
    }
    if let Some(n) = a.sweep_paths {
        cfg.sweep_paths = n;
    }
    if let Some(v) = a.dt {
        cfg.dt = v;
    }
    if let Some(v) = a.tmax {
        cfg.t_max = v;
    }
    if let Some(v) = a.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = a.stride {
        cfg.stride = v;
    }
    let filter = a.filter.as_deref();
    let report = verify::run_verify(&cfg, filter, a.corrupt_state)?;
    let text = report.render(&cfg, filter);
    if let Some(path) = out {
        std::fs::write(path, &text)
            .map_err(|e| Failure::validation(format!("cannot write {}: {e}", path.display())))?;
    }
    print!("{text}");
    match report.first_failure() {
        None => Ok(EXIT_OK),
        Some(c) => {
            eprintln!("qprob: invariant failed: {} ({})", c.name, c.relation);
            Ok(EXIT_INVARIANT)
        }
    }
}
