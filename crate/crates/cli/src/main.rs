use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use ising_core::circuit::TruthTable;
use ising_core::classify::{self, ClassifyOptions};
use ising_core::dynamics::{self, GlauberOptions};
use ising_core::hamiltonian as ham;
use ising_core::lp::SolverOptions;
use ising_core::residual::ResidualPartition;
use ising_core::synth::{self, AuxOptions, Mode, StopReason, Strategy, SynthOptions};
use ising_core::voronoi::{self, AffineEmbedding};
use ising_core::{oracle, Circuit, Convention, Execution, Hamiltonian, SpinState};

#[derive(Debug, Parser)]
#[command(name = "ising", version, about = "Synthesize and verify Ising Hamiltonians that encode Boolean circuits")]
struct Cli {
    /// Worker threads for parallel sweeps (0 = one per core, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0, env = "ISING_JOBS")]
    jobs: usize,

    /// Energy comparison tolerance.
    #[arg(long, global = true, default_value_t = ising_core::DEFAULT_TOL)]
    tol: f64,

    /// Value convention for printed states and truth tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Spin)]
    format: Format,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Spin,
    Bool,
}

impl Format {
    fn convention(self) -> Convention {
        match self {
            Format::Spin => Convention::Spin,
            Format::Bool => Convention::Boolean,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize an L1-minimal Hamiltonian for a truth table.
    Synth(SynthArgs),
    /// Certify that a Hamiltonian encodes a truth table.
    Check(CheckArgs),
    /// Classify every circuit of a shape and count feasible ones per type.
    Classify(ClassifyArgs),
    /// Rasterize the minimizing-cell partition of a two-output coupling.
    Diagram(DiagramArgs),
    /// Run greedy descent or Glauber dynamics at a pinned input.
    Simulate(SimulateArgs),
    /// Spanning-tree refinement of a local-minimum-free Hamiltonian.
    Refine(RefineArgs),
    /// Search for auxiliary outputs that make a circuit feasible.
    AuxSearch(AuxArgs),
    /// Build a Hamiltonian from an affine Voronoi embedding.
    VoronoiBuild(VoronoiArgs),
}

#[derive(Debug, Args)]
struct LpArgs {
    /// Right-hand side of every constraint row.
    #[arg(long, default_value_t = 1.0)]
    margin: f64,

    /// Simplex pivot cap per solve.
    #[arg(long, default_value_t = 100_000, env = "ISING_MAX_PIVOTS")]
    max_pivots: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Truth table file.
    table: PathBuf,

    /// Also forbid spurious local minima at every input level.
    #[arg(long)]
    no_local_minima: bool,

    /// Perturb the result until all energy levels are distinct.
    #[arg(long)]
    generic: bool,

    /// Write the Hamiltonian here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Write the constraint system dump here.
    #[arg(long)]
    dump_constraints: Option<PathBuf>,

    #[command(flatten)]
    lp: LpArgs,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Hamiltonian file.
    hamiltonian: PathBuf,
    /// Truth table file.
    table: PathBuf,

    /// Also require that f(x) is the only local minimum at every input level.
    #[arg(long)]
    no_local_minima: bool,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    n: usize,
    m: usize,

    /// Emit CSV instead of a text table.
    #[arg(long)]
    csv: bool,

    /// Resumable per-circuit cache file.
    #[arg(long)]
    cache: Option<PathBuf>,

    /// Largest log2 of the number of circuits to enumerate.
    #[arg(long, default_value_t = 20, env = "ISING_MAX_BITS")]
    max_bits: u32,

    /// Circuits classified between cache flushes.
    #[arg(long, default_value_t = 4096)]
    chunk: u64,

    /// For n = 2, also compare every circuit with the (2, m) characterization.
    #[arg(long)]
    check_2m: bool,
}

#[derive(Debug, Args)]
struct DiagramArgs {
    /// Coupling J12 between the two outputs.
    #[arg(long, allow_hyphen_values = true)]
    j: f64,

    /// Half-width of the square window.
    #[arg(long, default_value_t = 3.0)]
    radius: f64,

    /// Pixels per side.
    #[arg(long, default_value_t = 201)]
    resolution: usize,

    /// PPM output path (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Legend output path (stderr if omitted).
    #[arg(long)]
    legend: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Hamiltonian file.
    hamiltonian: PathBuf,

    /// Pinned input, e.g. "+1 -1" (or "1 0" with --format bool).
    #[arg(long, allow_hyphen_values = true)]
    input: String,

    /// Initial output state; greedy descent runs from every state if omitted.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,

    /// Use Glauber dynamics instead of greedy descent.
    #[arg(long)]
    glauber: bool,

    /// Inverse temperature for Glauber dynamics.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,

    /// Steps (Glauber) or step cap (greedy).
    #[arg(long, default_value_t = 10_000)]
    steps: usize,

    /// Glauber steps excluded from occupancy counts.
    #[arg(long, default_value_t = 0)]
    burn_in: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct RefineArgs {
    /// Truth table file.
    table: PathBuf,

    #[arg(long, default_value_t = 20)]
    max_iters: usize,

    /// Write the final Hamiltonian here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,

    #[command(flatten)]
    lp: LpArgs,
}

#[derive(Debug, Args)]
struct AuxArgs {
    /// Truth table file.
    table: PathBuf,

    /// Number of auxiliary spins.
    #[arg(short, long)]
    k: usize,

    /// Sample random maps instead of enumerating all of them.
    #[arg(long)]
    random: bool,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of random maps to try.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,

    /// Cap on the number of maps an exhaustive search may enumerate.
    #[arg(long, default_value_t = 1 << 20, env = "ISING_MAX_CANDIDATES")]
    max_candidates: u64,

    /// Write the Hamiltonian of f x g here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,

    #[command(flatten)]
    lp: LpArgs,
}

#[derive(Debug, Args)]
struct VoronoiArgs {
    /// Embedding file (`emb n m`, rows of T, then b).
    embedding: PathBuf,
    /// Truth table file.
    table: PathBuf,

    /// Seed for the injectivity perturbation.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the Hamiltonian here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] ising_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: ising_core::Error,
    },
    #[error("{0}")]
    Usage(String),
}

/// Result of a subcommand that completed without error.
enum Verdict {
    Ok,
    /// Certified negative answer (infeasible, does not encode, ...).
    Negative,
}

type CliResult = Result<Verdict, CliError>;

struct Ctx {
    tol: f64,
    format: Format,
    execution: Execution,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn parsed<T>(path: &Path, parse: impl Fn(&str) -> ising_core::Result<T>) -> Result<T, CliError> {
    parse(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solver(lp: &LpArgs) -> SolverOptions {
    SolverOptions {
        max_iterations: lp.max_pivots,
        ..SolverOptions::default()
    }
}

fn synth_options(ctx: &Ctx, lp: &LpArgs) -> SynthOptions {
    SynthOptions {
        solver: solver(lp),
        tol: ctx.tol,
        margin: lp.margin,
    }
}

fn render_state(s: SpinState, format: Format) -> String {
    let tokens: Vec<String> = s
        .spins()
        .into_iter()
        .map(|v| match format {
            Format::Spin if v > 0 => "+1".to_string(),
            Format::Spin => "-1".to_string(),
            Format::Bool => ising_core::circuit::spin_to_bool(v).to_string(),
        })
        .collect();
    format!("({})", tokens.join(","))
}

fn parse_state(text: &str, dim: usize, format: Format) -> Result<SpinState, CliError> {
    let spins = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| match (format, t) {
            (Format::Spin, "+1" | "1") => Ok(1),
            (Format::Spin, "-1") => Ok(-1),
            (Format::Bool, "1") => Ok(1),
            (Format::Bool, "0") => Ok(-1),
            _ => Err(CliError::Usage(format!("bad {format:?} value `{t}` in state `{text}`"))),
        })
        .collect::<Result<Vec<i8>, _>>()?;
    if spins.len() != dim {
        return Err(CliError::Usage(format!("state `{text}` has {} values, expected {dim}", spins.len())));
    }
    Ok(SpinState::from_spins(&spins)?)
}

fn summarize_certificate(h: &Hamiltonian, c: &Circuit) -> Result<String, CliError> {
    let margin = oracle::encoding_margin(h, c);
    let most = c
        .rows()
        .map(|(x, _)| oracle::local_minima(h, x).map(|v| v.len()))
        .collect::<ising_core::Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let minima = if most == 1 {
        "1 local minimum per input level".to_string()
    } else {
        format!("up to {most} local minima per input level")
    };
    Ok(format!(
        "certified: encodes all {} inputs, margin {margin:.6}, L1 {:.6}, {minima}",
        1usize << c.n(),
        h.l1_norm()
    ))
}

fn run_synth(ctx: &Ctx, a: &SynthArgs) -> CliResult {
    let c = parsed(&a.table, Circuit::parse)?;
    let mode = if a.no_local_minima { Mode::LocalFree } else { Mode::Global };
    let opts = synth_options(ctx, &a.lp);
    if let Some(path) = &a.dump_constraints {
        let sys = synth::system_for(&c, mode)?.with_margin(a.lp.margin);
        emit(Some(path), &sys.to_text())?;
    }
    let r = synth::synthesize_with(&c, mode, &opts)?;
    let Some(mut h) = r.hamiltonian else {
        eprintln!("infeasible: no Hamiltonian satisfies the {mode} constraints for this circuit");
        return Ok(Verdict::Negative);
    };
    if a.generic {
        let trace = ham::make_generic_traced(&h, &c, ctx.tol)?;
        info!("degeneracy history {:?}", trace.degeneracy_history);
        h = trace.hamiltonian;
        synth::certify(&h, &c, mode, &opts)?;
    }
    eprintln!("feasible ({mode}); {}", summarize_certificate(&h, &c)?);
    emit(a.output.as_deref(), &h.to_text())?;
    Ok(Verdict::Ok)
}

fn run_check(ctx: &Ctx, a: &CheckArgs) -> CliResult {
    let h = parsed(&a.hamiltonian, Hamiltonian::parse)?;
    let c = parsed(&a.table, Circuit::parse)?;
    if h.shape() != c.shape() {
        return Err(CliError::Usage(format!(
            "Hamiltonian shape {:?} does not match truth table shape {:?}",
            h.shape(),
            c.shape()
        )));
    }
    let failures = oracle::encoding_failures(&h, &c, ctx.tol)?;
    for x in &failures {
        let g = oracle::ground_level(&h, *x, ctx.tol)?;
        let found: Vec<String> = g.minimizers.iter().map(|s| render_state(*s, ctx.format)).collect();
        println!(
            "input {}: expected {}, ground states {}",
            render_state(*x, ctx.format),
            render_state(c.output(*x), ctx.format),
            found.join(" ")
        );
    }
    let spurious = if a.no_local_minima { oracle::spurious_minimum(&h, &c)? } else { None };
    if let Some((x, y)) = spurious {
        println!(
            "input {}: spurious local minimum {}",
            render_state(x, ctx.format),
            render_state(y, ctx.format)
        );
    }
    if failures.is_empty() && spurious.is_none() {
        println!("{}", summarize_certificate(&h, &c)?);
        Ok(Verdict::Ok)
    } else {
        println!("FAILED: {} input(s) not encoded", failures.len());
        Ok(Verdict::Negative)
    }
}

fn run_classify(ctx: &Ctx, a: &ClassifyArgs) -> CliResult {
    let opts = ClassifyOptions {
        solver: SolverOptions::default(),
        execution: ctx.execution,
        max_bits: a.max_bits,
        cache: a.cache.clone(),
        chunk: a.chunk,
    };
    let report = classify::classify_shape(a.n, a.m, &opts)?;
    print!("{}", if a.csv { report.to_csv() } else { report.to_table() });
    if a.check_2m {
        if a.n != 2 {
            return Err(CliError::Usage("--check-2m needs n = 2".into()));
        }
        let check = classify::check_2m_theorem(a.m, &opts.solver, ctx.execution)?;
        println!(
            "(2, {}) characterization: {} circuits checked, {} mismatches",
            a.m,
            check.checked,
            check.mismatches.len()
        );
        for mm in &check.mismatches {
            println!("  circuit {}: feasible {}, predicted {}", mm.index, mm.feasible, mm.predicted);
        }
    }
    Ok(Verdict::Ok)
}

fn run_diagram(ctx: &Ctx, a: &DiagramArgs) -> CliResult {
    let part = ResidualPartition::pair(a.j);
    let raster = part.rasterize(a.radius, a.resolution, ctx.tol, ctx.execution)?;
    emit(a.output.as_deref(), &raster.to_ppm())?;
    let mut legend = raster.legend();
    let present = raster.cells_present();
    let mut pairs = Vec::new();
    for (i, &p) in present.iter().enumerate() {
        for &q in &present[i + 1..] {
            if raster.cells_adjacent(p, q) {
                pairs.push(format!("{p}-{q}"));
            }
        }
    }
    legend.push_str(&format!("# cells {present:?}, adjacent {}\n", pairs.join(" ")));
    match &a.legend {
        Some(path) => emit(Some(path), &legend)?,
        None => eprint!("{legend}"),
    }
    info!("rasterized J12 = {} at {}x{}", a.j, a.resolution, a.resolution);
    Ok(Verdict::Ok)
}

fn run_simulate(ctx: &Ctx, a: &SimulateArgs) -> CliResult {
    let h = parsed(&a.hamiltonian, Hamiltonian::parse)?;
    let x = parse_state(&a.input, h.n(), ctx.format)?;
    if a.glauber {
        let y0 = match &a.start {
            Some(s) => parse_state(s, h.m(), ctx.format)?,
            None => SpinState::all_down(h.m()),
        };
        let opts = GlauberOptions {
            beta: a.beta,
            steps: a.steps,
            burn_in: a.burn_in,
            seed: a.seed,
            record: true,
        };
        let run = dynamics::glauber_sample(&h, x, y0, &opts)?;
        print!("{}", run.trajectory.to_text());
        for y in SpinState::all(h.m()) {
            eprintln!("occupancy {} {:.6}", render_state(y, ctx.format), run.occupancy_of(y));
        }
        return Ok(Verdict::Ok);
    }
    let starts: Vec<SpinState> = match &a.start {
        Some(s) => vec![parse_state(s, h.m(), ctx.format)?],
        None => SpinState::all(h.m()).collect(),
    };
    for y0 in starts {
        let t = dynamics::greedy_descend(&h, x, y0, a.steps)?;
        print!("{}", t.to_text());
        eprintln!(
            "start {} -> {} after {} steps",
            render_state(y0, ctx.format),
            render_state(t.final_state(), ctx.format),
            t.steps()
        );
    }
    Ok(Verdict::Ok)
}

fn run_refine(ctx: &Ctx, a: &RefineArgs) -> CliResult {
    let c = parsed(&a.table, Circuit::parse)?;
    let opts = synth_options(ctx, &a.lp);
    if !synth::synthesize_with(&c, Mode::LocalFree, &opts)?.feasible() {
        eprintln!("infeasible: the local-minimum-free system has no solution, nothing to refine");
        return Ok(Verdict::Negative);
    }
    let r = synth::refine_spanning_trees(&c, a.max_iters, &opts)?;
    for (k, (it, fp)) in r.iterates.iter().zip(&r.fingerprints).enumerate() {
        println!("iterate {k} mode {} L1 {:.6} trees {fp:016x}", it.mode, it.l1_norm);
    }
    let l1 = r.l1_history();
    let reason = match r.stop {
        StopReason::TreesRepeated => "tree set repeated",
        StopReason::IterationCap => "iteration cap reached",
    };
    eprintln!(
        "stopped: {reason}; L1 {:.6} -> {:.6} (ratio {:.4})",
        l1[0],
        l1[l1.len() - 1],
        l1[l1.len() - 1] / l1[0]
    );
    let h = r.last().hamiltonian.as_ref().expect("refinement iterates are feasible");
    eprintln!("{}", summarize_certificate(h, &c)?);
    emit(a.output.as_deref(), &h.to_text())?;
    Ok(Verdict::Ok)
}

fn run_aux(ctx: &Ctx, a: &AuxArgs) -> CliResult {
    let c = parsed(&a.table, Circuit::parse)?;
    let strategy = if a.random {
        Strategy::Random {
            seed: a.seed,
            trials: a.trials,
        }
    } else {
        Strategy::Exhaustive
    };
    let opts = AuxOptions {
        synth: synth_options(ctx, &a.lp),
        max_candidates: a.max_candidates,
        execution: ctx.execution,
    };
    let Some(found) = synth::auxiliary_search(&c, a.k, strategy, &opts)? else {
        eprintln!("infeasible: no map to {} auxiliary spin(s) makes this circuit feasible", a.k);
        return Ok(Verdict::Negative);
    };
    let glued = c.glue(&found.map)?;
    let h = found.result.hamiltonian.as_ref().expect("search returns feasible results");
    eprintln!("found auxiliary map (candidate {}); {}", found.candidate, summarize_certificate(h, &glued)?);
    let table: TruthTable = found.map.to_table(ctx.format.convention());
    println!("# auxiliary map");
    print!("{}", table.to_text());
    match &a.output {
        Some(path) => emit(Some(path), &h.to_text())?,
        None => {
            println!("# Hamiltonian of the circuit with auxiliary outputs");
            print!("{}", h.to_text());
        }
    }
    Ok(Verdict::Ok)
}

fn run_voronoi(ctx: &Ctx, a: &VoronoiArgs) -> CliResult {
    let mut e = parsed(&a.embedding, AffineEmbedding::parse)?;
    let c = parsed(&a.table, Circuit::parse)?;
    if !voronoi::is_voronoi_solution(&c, &e)? {
        eprintln!(
            "not a solution: Voronoi slack {:.6} (must be positive)",
            voronoi::voronoi_slack(&c, &e)?
        );
        return Ok(Verdict::Negative);
    }
    if !e.is_injective() {
        e = voronoi::perturb_to_injective(&c, &e, a.seed)?;
        eprintln!("embedding was not injective; perturbed copy:\n{}", e.to_text().trim_end());
    }
    let h = voronoi::hamiltonian_from_voronoi(&c, &e)?;
    synth::certify(&h, &c, Mode::Global, &SynthOptions { tol: ctx.tol, ..SynthOptions::default() })?;
    eprintln!("{}", summarize_certificate(&h, &c)?);
    emit(a.output.as_deref(), &h.to_text())?;
    Ok(Verdict::Ok)
}

fn configure_threads(jobs: usize) -> Execution {
    if jobs == 1 {
        return Execution::Sequential;
    }
    #[cfg(feature = "rayon")]
    if jobs > 1 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    Execution::Parallel
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    eprintln!("# config: {cli:?}");

    let ctx = Ctx {
        tol: cli.tol,
        format: cli.format,
        execution: configure_threads(cli.jobs),
    };
    let result = match &cli.command {
        Command::Synth(a) => run_synth(&ctx, a),
        Command::Check(a) => run_check(&ctx, a),
        Command::Classify(a) => run_classify(&ctx, a),
        Command::Diagram(a) => run_diagram(&ctx, a),
        Command::Simulate(a) => run_simulate(&ctx, a),
        Command::Refine(a) => run_refine(&ctx, a),
        Command::AuxSearch(a) => run_aux(&ctx, a),
        Command::VoronoiBuild(a) => run_voronoi(&ctx, a),
    };
    match result {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
