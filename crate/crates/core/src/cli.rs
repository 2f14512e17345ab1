//! Command-line front end. `dispatch` parses an argument vector, runs one subcommand and returns
//! the exit code with everything that would go to stdout and stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::channels::{apply_local, luders_outcomes, post_select, read_channel, read_luders, KrausChannel, LocalOutput, LudersOperation};
use crate::decompositions::schmidt_decompose;
use crate::demo::post_selection_demo;
use crate::entropy::{relative_entropy, relative_entropy_upper, shannon, svn_entropy};
use crate::error::{Error, Result};
use crate::gamma::{
    gamma_bracket, gamma_bracket_multi, gamma_pure, measure_bracket, read_witness, separable_from_witness,
    separable_witness, write_witness, GammaBracket, MeasureSpec, OptimizerConfig, Strategy,
};
use crate::linalg::{trace, FactorDims};
use crate::sampling::rng_from_seed;
use crate::states::{basis_vector, make_state, read_state, validate_density, write_state, CoeffMatrix, DensityOperator, Generated, Generator, State};
use crate::verify::{run_suite, PropertyId};

#[derive(Debug, Parser)]
#[command(name = "crossnorm", version, about = "Certified cross-norm brackets and entanglement measures")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long = "max-iter", global = true, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl GlobalArgs {
    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig { seed: self.seed, restarts: self.restarts, max_iter: self.max_iter, tol: self.tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKindArg {
    Bell,
    Ghz,
    Product,
    Schmidt,
    RhoEps,
    Coeff,
    RandomPure,
    RandomDensity,
    RandomSeparable,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Egamma,
    F1,
    F2,
    F3,
    Svn,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated state to a state file.
    MakeState(MakeStateArgs),
    /// Schmidt coefficients of a pure bipartite state.
    Schmidt {
        #[arg(long)]
        input: PathBuf,
    },
    /// Certified lower and upper bounds on the cross norm, with a witness file.
    GammaBounds {
        #[arg(long)]
        input: PathBuf,
        /// Witness path; defaults to `<input>.witness.json`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long = "no-witness")]
        no_witness: bool,
        /// Decomposition files offered to the minimizer.
        #[arg(long = "candidate")]
        candidates: Vec<PathBuf>,
    },
    /// Entanglement measure over the cross-norm bracket, or the reduced entropy.
    Measure {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        measure: MeasureArg,
        /// Rate of `f3`.
        #[arg(long)]
        a: Option<f64>,
        /// Factor traced out for `svn`.
        #[arg(long = "traced-factor", default_value_t = 1)]
        traced_factor: usize,
    },
    /// Apply a channel, or a local pair of channels, to a state.
    ApplyChannel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        /// Second local channel; `--channel` then acts on the first factor only.
        #[arg(long)]
        channel2: Option<PathBuf>,
        /// Renormalize the output to unit trace.
        #[arg(long = "post-select")]
        post_select: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lüders measurement pair: branch brackets and their weighted average.
    Luders {
        #[arg(long)]
        input: PathBuf,
        /// Projectors on the first factor; defaults to the identity.
        #[arg(long)]
        projectors: Option<PathBuf>,
        /// Projectors on the second factor; defaults to the identity.
        #[arg(long)]
        projectors2: Option<PathBuf>,
    },
    /// Relative entropy to reference states, and the bound from separable decompositions.
    RelEntropy {
        #[arg(long)]
        input: PathBuf,
        /// State files.
        #[arg(long = "reference")]
        references: Vec<PathBuf>,
        /// Decomposition files with positive factors.
        #[arg(long = "separable")]
        separable: Vec<PathBuf>,
    },
    /// Run the seeded property suite.
    Verify {
        /// Comma-separated property ids; all when omitted.
        #[arg(long, value_delimiter = ',')]
        properties: Vec<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Post-selection raises entanglement: the worked example on `(3, 3)`.
    DemoExample8 {
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
}

#[derive(Debug, Args)]
pub struct MakeStateArgs {
    #[arg(long, value_enum)]
    pub kind: StateKindArg,
    #[arg(long)]
    pub output: PathBuf,
    /// Local dimensions, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Local dimension for `bell` and `ghz`.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub parties: usize,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 3)]
    pub terms: usize,
    /// Rank of the coefficient matrix for `coeff`.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Basis index per factor for `product`.
    #[arg(long, value_delimiter = ',')]
    pub digits: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub coeffs: Vec<f64>,
    /// Component state files for `mixture`.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    /// Also write the generating decomposition of a `random-separable` state.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

/// Exit code and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// What a subcommand reports: the JSON record and its human-readable rendering.
struct Report {
    json: Vec<Value>,
    text: String,
    code: i32,
}

impl Report {
    fn new(json: Value, text: String) -> Self {
        Report { json: vec![json], text, code: 0 }
    }
}

pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: rendered, stderr: String::new() }
                }
                _ => Outcome { code: 1, stdout: String::new(), stderr: rendered },
            };
        }
    };
    match run(&cli) {
        Ok(report) => {
            let stdout = match cli.global.format {
                Format::Text => report.text,
                Format::Json => report.json.iter().map(|v| format!("{v}\n")).collect(),
            };
            Outcome { code: report.code, stdout, stderr: String::new() }
        }
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn run(cli: &Cli) -> Result<Report> {
    let cfg = cli.global.optimizer();
    match &cli.command {
        Command::MakeState(args) => make_state_cmd(args, cli.global.seed),
        Command::Schmidt { input } => schmidt_cmd(input),
        Command::GammaBounds { input, output, no_witness, candidates } => {
            let witness_path = (!no_witness).then(|| output.clone().unwrap_or_else(|| default_witness_path(input)));
            gamma_bounds_cmd(input, witness_path.as_deref(), candidates, &cfg)
        }
        Command::Measure { input, measure, a, traced_factor } => measure_cmd(input, *measure, *a, *traced_factor, &cfg),
        Command::ApplyChannel { input, channel, channel2, post_select, output } => {
            apply_channel_cmd(input, channel, channel2.as_deref(), *post_select, output.as_deref())
        }
        Command::Luders { input, projectors, projectors2 } => luders_cmd(input, projectors.as_deref(), projectors2.as_deref(), &cfg),
        Command::RelEntropy { input, references, separable } => rel_entropy_cmd(input, references, separable),
        Command::Verify { properties, trials } => verify_cmd(properties, *trials, cli.global.seed, &cfg),
        Command::DemoExample8 { epsilon } => demo_cmd(*epsilon, &cfg),
    }
}

fn default_witness_path(input: &Path) -> PathBuf {
    let mut s = input.as_os_str().to_owned();
    s.push(".witness.json");
    PathBuf::from(s)
}

fn read_density(path: &Path) -> Result<DensityOperator> {
    Ok(read_state(path)?.to_density())
}

fn bracket(rho: &DensityOperator, cfg: &OptimizerConfig, candidates: &[crate::gamma::TensorDecomposition]) -> Result<GammaBracket> {
    if rho.dims().parties() >= 3 {
        gamma_bracket_multi(rho, cfg, candidates)
    } else {
        gamma_bracket(rho, cfg, candidates)
    }
}

fn strategy_name(s: Strategy) -> String {
    match s {
        Strategy::OperatorSchmidt => "operator-schmidt".into(),
        Strategy::EigenMixture => "eigen-mixture".into(),
        Strategy::LocalSearch => "local-search".into(),
        Strategy::Hierarchical => "hierarchical".into(),
        Strategy::Bipartition => "bipartition".into(),
        Strategy::Candidate(i) => format!("candidate-{i}"),
    }
}

fn dims_text(d: &FactorDims) -> String {
    d.as_slice().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg.into()))
    }
}

fn make_state_cmd(args: &MakeStateArgs, seed: u64) -> Result<Report> {
    let dims = || FactorDims::new(args.dims.clone());
    let generator = match args.kind {
        StateKindArg::Bell => Generator::Bell { d: args.d },
        StateKindArg::Ghz => Generator::Ghz { parties: args.parties, d: args.d },
        StateKindArg::Product => {
            let dims = dims()?;
            require(args.digits.len() == dims.parties(), "--digits needs one index per factor")?;
            let mut factors = Vec::new();
            for (&d, &i) in dims.as_slice().iter().zip(&args.digits) {
                require(i < d, "--digits index exceeds the local dimension")?;
                factors.push(basis_vector(d, i));
            }
            Generator::Product { factors }
        }
        StateKindArg::Schmidt => Generator::Schmidt { coeffs: args.coeffs.clone() },
        StateKindArg::RhoEps => Generator::RhoEps { epsilon: args.epsilon },
        StateKindArg::Coeff => {
            let (d1, d2) = dims()?.require_bipartite()?;
            let rank = args.rank.unwrap_or(d1.min(d2));
            Generator::Coeff(CoeffMatrix::random(d1, d2, rank, &mut rng_from_seed(seed))?)
        }
        StateKindArg::RandomPure => Generator::RandomPure { dims: dims()?, seed },
        StateKindArg::RandomDensity => Generator::RandomDensity { dims: dims()?, seed },
        StateKindArg::RandomSeparable => Generator::RandomSeparable { dims: dims()?, terms: args.terms, seed },
        StateKindArg::Mixture => {
            let states = args.inputs.iter().map(|p| read_density(p)).collect::<Result<Vec<_>>>()?;
            Generator::Mixture { states, weights: args.weights.clone() }
        }
    };
    let generated = make_state(&generator)?;
    let mut witness = Value::Null;
    if let Some(path) = &args.witness {
        let Generated::Separable(s) = &generated else {
            return Err(Error::InvalidInput("--witness is only available for random-separable".into()));
        };
        write_witness(&separable_witness(s)?, path)?;
        witness = json!(path);
    }
    let state = generated.into_state();
    write_state(&state, &args.output)?;
    let kind = match state {
        State::Pure(_) => "pure",
        State::Density(_) => "density",
    };
    let dims = state.dims().as_slice().to_vec();
    let mut text = format!("wrote {kind} state on dims ({}) to {}\n", dims_text(state.dims()), args.output.display());
    if let Some(path) = &args.witness {
        let _ = writeln!(text, "wrote generating decomposition to {}", path.display());
    }
    Ok(Report::new(json!({ "kind": kind, "dims": dims, "output": args.output, "witness": witness }), text))
}

fn schmidt_cmd(input: &Path) -> Result<Report> {
    let State::Pure(psi) = read_state(input)? else {
        return Err(Error::InvalidInput("schmidt needs a pure state file".into()));
    };
    let s = schmidt_decompose(&psi)?;
    let gamma = gamma_pure(&psi)?;
    let entropy = shannon(&s.coeffs);
    let rank = s.coeffs.iter().filter(|&&p| p > crate::tol::SCHMIDT_DROP).count();
    let coeffs: Vec<String> = s.coeffs.iter().map(|p| format!("{p:.6}")).collect();
    let text = format!(
        "schmidt coefficients [{}]\nschmidt rank {rank}\ngamma {gamma:.6}\nentropy {entropy:.6}\n",
        coeffs.join(", ")
    );
    Ok(Report::new(json!({ "coeffs": s.coeffs, "rank": rank, "gamma": gamma, "entropy": entropy }), text))
}

fn gamma_bounds_cmd(input: &Path, witness_path: Option<&Path>, candidates: &[PathBuf], cfg: &OptimizerConfig) -> Result<Report> {
    let rho = read_density(input)?;
    let candidates = candidates.iter().map(read_witness).collect::<Result<Vec<_>>>()?;
    let b = bracket(&rho, cfg, &candidates)?;
    if let Some(p) = witness_path {
        write_witness(&b.witness, p)?;
    }
    let mut text = format!(
        "bracket [{:.6}, {:.6}]\nverdict {}\nstrategy {}\nterms {}\n",
        b.lower,
        b.upper,
        b.verdict.as_str(),
        strategy_name(b.strategy),
        b.witness.len()
    );
    match witness_path {
        Some(p) => {
            let _ = writeln!(text, "witness {}", p.display());
        }
        None => text.push_str("witness not written\n"),
    }
    let json = json!({
        "dims": rho.dims().as_slice(),
        "lower": b.lower,
        "upper": b.upper,
        "verdict": b.verdict.as_str(),
        "strategy": strategy_name(b.strategy),
        "terms": b.witness.len(),
        "witness": witness_path,
        "diagnostics": b.diagnostics,
    });
    Ok(Report::new(json, text))
}

fn measure_cmd(input: &Path, measure: MeasureArg, a: Option<f64>, traced_factor: usize, cfg: &OptimizerConfig) -> Result<Report> {
    let rho = read_density(input)?;
    if measure == MeasureArg::Svn {
        let e = svn_entropy(&rho, traced_factor)?;
        let text = format!("svn {:.6} (traced factor {})\n", e.value, e.traced_factor);
        let json = json!({
            "measure": "svn",
            "lower": e.value,
            "upper": e.value,
            "gamma": Value::Null,
            "traced_factor": e.traced_factor,
        });
        return Ok(Report::new(json, text));
    }
    let spec = match measure {
        MeasureArg::Egamma => MeasureSpec::parse("egamma", a)?,
        MeasureArg::F1 => MeasureSpec::parse("f1", a)?,
        MeasureArg::F2 => MeasureSpec::parse("f2", a)?,
        _ => MeasureSpec::parse("f3", a)?,
    };
    let name = spec.name();
    let b = bracket(&rho, cfg, &[])?;
    let m = measure_bracket(&b, &spec)?;
    let text = if (m.upper - m.lower).abs() < 5e-7 {
        format!("{name} {:.6}\n", m.lower)
    } else {
        format!("{name} [{:.6}, {:.6}]\n", m.lower, m.upper)
    } + &format!("gamma [{:.6}, {:.6}]\n", b.lower, b.upper);
    let json = json!({
        "measure": name,
        "lower": m.lower,
        "upper": m.upper,
        "gamma": { "lower": b.lower, "upper": b.upper },
        "traced_factor": Value::Null,
    });
    Ok(Report::new(json, text))
}

fn apply_channel_cmd(input: &Path, channel: &Path, channel2: Option<&Path>, select: bool, output: Option<&Path>) -> Result<Report> {
    let rho = read_density(input)?;
    let t1 = read_channel(channel)?;
    let mut warnings: Vec<String> = t1.warnings().to_vec();
    let (matrix, dims, normalized) = match channel2 {
        Some(p) => {
            let t2 = read_channel(p)?;
            warnings.extend(t2.warnings().iter().cloned());
            match apply_local(&t1, &t2, &rho)? {
                LocalOutput::State(s) => {
                    let dims = s.dims().clone();
                    (s.into_matrix(), dims, true)
                }
                LocalOutput::Subnormalized { matrix, dims } => (matrix, dims, false),
            }
        }
        None => global_image(&t1, &rho)?,
    };
    let probability = trace(&matrix).re;
    let state = if select {
        let dims = if channel2.is_some() { Some(dims.clone()) } else { None };
        Some(match dims {
            Some(d) => {
                if !(probability > crate::tol::BRANCH) {
                    return Err(Error::DegenerateBranch(probability));
                }
                validate_density(matrix.unscale(probability), d)?
            }
            None => post_select(&t1, &rho)?,
        })
    } else if normalized || (probability - 1.0).abs() <= crate::tol::TRACE {
        Some(validate_density(matrix, dims.clone())?)
    } else {
        None
    };
    if let Some(path) = output {
        let Some(s) = &state else {
            return Err(Error::InvalidInput(format!(
                "output has trace {probability}; pass --post-select to renormalize it before writing"
            )));
        };
        write_state(&State::Density(s.clone()), path)?;
    }
    let mut text = format!("output dims ({})\ntrace {probability:.6}\n", dims_text(&dims));
    if select {
        text.push_str("post-selected to unit trace\n");
    }
    if let Some(p) = output {
        let _ = writeln!(text, "wrote {}", p.display());
    }
    for w in &warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let json = json!({
        "dims_out": dims.as_slice(),
        "trace": probability,
        "post_selected": select,
        "output": output,
        "warnings": warnings,
    });
    Ok(Report::new(json, text))
}

/// Image under a channel on the whole space; keeps the factor structure when the channel is square.
fn global_image(t: &KrausChannel, rho: &DensityOperator) -> Result<(crate::linalg::CMatrix, FactorDims, bool)> {
    let matrix = t.apply(rho.matrix())?;
    let dims = if t.dims_out() == t.dims_in() { rho.dims().clone() } else { FactorDims::new(vec![t.dims_out()])? };
    Ok((matrix, dims, false))
}

fn luders_cmd(input: &Path, p1: Option<&Path>, p2: Option<&Path>, cfg: &OptimizerConfig) -> Result<Report> {
    let rho = read_density(input)?;
    let (d1, d2) = rho.dims().require_bipartite()?;
    let l1 = p1.map(read_luders).transpose()?.unwrap_or_else(|| LudersOperation::trivial(d1));
    let l2 = p2.map(read_luders).transpose()?.unwrap_or_else(|| LudersOperation::trivial(d2));
    let outcome = luders_outcomes(&l1, &l2, &rho)?;
    let whole = gamma_bracket(&rho, cfg, &[])?;
    let mut text = String::new();
    let mut branches = Vec::new();
    let mut average = 0.0;
    for br in &outcome.branches {
        let b = gamma_bracket(&br.state, cfg, &[])?;
        average += br.probability * (b.lower - 1.0);
        let _ = writeln!(
            text,
            "branch ({}, {}) probability {:.6} bracket [{:.6}, {:.6}]",
            br.labels.0, br.labels.1, br.probability, b.lower, b.upper
        );
        branches.push(json!({
            "labels": [br.labels.0, br.labels.1],
            "probability": br.probability,
            "lower": b.lower,
            "upper": b.upper,
        }));
    }
    let bound = whole.upper - 1.0;
    let holds = average <= bound + 1e-8;
    let _ = writeln!(text, "average gain {average:.6}\nbound {bound:.6}\nmonotone {}", if holds { "yes" } else { "no" });
    let json = json!({
        "branches": branches,
        "average": average,
        "bound": bound,
        "lower": whole.lower,
        "upper": whole.upper,
        "monotone": holds,
    });
    let mut r = Report::new(json, text);
    if !holds {
        r.code = 2;
    }
    Ok(r)
}

fn rel_entropy_cmd(input: &Path, references: &[PathBuf], separable: &[PathBuf]) -> Result<Report> {
    require(!references.is_empty() || !separable.is_empty(), "pass at least one --reference or --separable file")?;
    let sigma = read_density(input)?;
    let mut text = String::new();
    let mut values = Vec::new();
    for p in references {
        let v = relative_entropy(&sigma, &read_density(p)?)?;
        let _ = writeln!(text, "D(input || {}) = {}", p.display(), fmt_entropy(v.value()));
        values.push(json!({ "reference": p, "value": v }));
    }
    let mut bound = Value::Null;
    if !separable.is_empty() {
        let states = separable
            .iter()
            .map(|p| separable_from_witness(&read_witness(p)?))
            .collect::<Result<Vec<_>>>()?;
        let b = relative_entropy_upper(&sigma, &states)?;
        let _ = writeln!(text, "relative entropy of entanglement <= {}", fmt_entropy(b.value()));
        bound = json!(b);
    }
    Ok(Report::new(json!({ "references": values, "bound": bound }), text))
}

fn fmt_entropy(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "inf".into()
    }
}

fn verify_cmd(properties: &[String], trials: usize, seed: u64, cfg: &OptimizerConfig) -> Result<Report> {
    let ids = if properties.is_empty() {
        PropertyId::ALL.to_vec()
    } else {
        properties.iter().map(|s| s.trim().parse()).collect::<Result<Vec<PropertyId>>>()?
    };
    let reports = run_suite(&ids, trials, seed, cfg)?;
    let mut text = String::new();
    for r in &reports {
        let margin = r.worst_margin.map_or("error".to_string(), |m| format!("{m:.3e}"));
        let _ = writeln!(
            text,
            "{} {} trials {} failures {} worst margin {margin}",
            r.id,
            if r.passed() { "pass" } else { "FAIL" },
            r.trials,
            r.failures
        );
        if !r.failing_seeds.is_empty() {
            let seeds: Vec<String> = r.failing_seeds.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(text, "  failing seeds {}", seeds.join(","));
        }
    }
    let failed = reports.iter().any(|r| !r.passed());
    Ok(Report {
        json: reports.iter().map(|r| serde_json::to_value(r).expect("report is plain data")).collect(),
        text,
        code: if failed { 2 } else { 0 },
    })
}

fn demo_cmd(epsilon: f64, cfg: &OptimizerConfig) -> Result<Report> {
    let r = post_selection_demo(epsilon, cfg)?;
    let mut text = String::new();
    let _ = writeln!(text, "rho_eps with epsilon {epsilon:.6}");
    let _ = writeln!(text, "gamma bracket [{:.6}, {:.6}] ({})", r.before.lower, r.before.upper, r.before.verdict);
    let _ = writeln!(text, "E_gamma [{:.6}, {:.6}]", r.before.egamma.lower, r.before.egamma.upper);
    let _ = writeln!(
        text,
        "rel-entropy bound {:.7} (epsilon ln 2 = {:.7})",
        r.relative_entropy_bound.value(),
        epsilon * std::f64::consts::LN_2
    );
    let _ = writeln!(text, "post-select on not |00>: kept probability {:.6}", r.kept_probability);
    let _ = writeln!(text, "post-selected gamma bracket [{:.6}, {:.6}] ({})", r.after.lower, r.after.upper, r.after.verdict);
    let _ = writeln!(text, "post-selected E_gamma [{:.6}, {:.6}]", r.after.egamma.lower, r.after.egamma.upper);
    let _ = writeln!(text, "post-selected relative entropy {:.6} (ln 2), reduced entropy {:.6}", r.relative_entropy_after.value(), r.entropy_after);
    let _ = writeln!(
        text,
        "increase: {:.6} > {:.7} and E_gamma {:.6} > {:.6}: {}",
        r.relative_entropy_after.value(),
        r.relative_entropy_bound.value(),
        r.after.egamma.lower,
        r.before.egamma.upper,
        if r.increased() { "yes" } else { "no" }
    );
    let mut json = serde_json::to_value(&r).expect("report is plain data");
    json["increased"] = json!(r.increased());
    let mut report = Report::new(json, text);
    if !r.increased() {
        report.code = 2;
    }
    Ok(report)
}
