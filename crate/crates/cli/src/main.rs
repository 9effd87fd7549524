use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cfe_core::exploration::{generate_sequence, verify_sequence, ExplorationSequence, GenerateOptions, Verdict, VerifyOptions};
use cfe_core::graph::{parse_graph, write_graph, PortGraph};
use cfe_core::protocol::{KMode, Mutation};
use cfe_core::sequences::bundled;
use cfe_core::sim::{run_with, time_measure, RunOptions, Scenario};
use cfe_core::verify::{check_trace, demos, sweep, GraphMode, SweepSpec};

/// Collision-free exploration by two agents: simulate, sweep, certify, demonstrate.
#[derive(Parser)]
#[command(name = "cfe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace.
    Run(RunArgs),
    /// Run an adversarial sweep and write the property report.
    Sweep(SweepArgs),
    /// Re-run a saved scenario and check every property on it.
    Replay(ReplayArgs),
    /// Generate or verify exploration sequences.
    Uxs {
        #[command(subcommand)]
        command: UxsCommand,
    },
    /// Show that simple strategies fail outside the supported model.
    Demo {
        #[command(subcommand)]
        command: DemoCommand,
    },
}

#[derive(Args)]
struct GraphSource {
    /// Graph file.
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Generated graph: ring:K, star:K (K leaves), path:K or random:K.
    #[arg(long)]
    gen: Option<String>,
    /// Seed for the random generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SequenceSource {
    /// Sequence file.
    #[arg(long, conflicts_with = "n")]
    seq: Option<PathBuf>,
    /// Size bound; uses the bundled sequence for it, or generates one.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KModeArg {
    Uniform,
    Strict,
}

impl From<KModeArg> for KMode {
    fn from(k: KModeArg) -> KMode {
        match k {
            KModeArg::Uniform => KMode::Uniform,
            KModeArg::Strict => KMode::Strict,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    DropInitialWait,
    DropTerminalWait,
    SkipCompulsoryWaitLeaf,
    WrongK,
    NoLeaderAlternation,
}

impl From<MutationArg> for Mutation {
    fn from(m: MutationArg) -> Mutation {
        match m {
            MutationArg::DropInitialWait => Mutation::DropInitialWait,
            MutationArg::DropTerminalWait => Mutation::DropTerminalWait,
            MutationArg::SkipCompulsoryWaitLeaf => Mutation::SkipCompulsoryWaitLeaf,
            MutationArg::WrongK => Mutation::WrongK,
            MutationArg::NoLeaderAlternation => Mutation::NoLeaderAlternation,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphSource,
    /// Start nodes of the two agents.
    #[arg(long, value_parser = pair::<usize>)]
    starts: [usize; 2],
    /// Wake rounds of the two agents.
    #[arg(long, value_parser = pair::<u64>, default_value = "0,0")]
    wake: [u64; 2],
    #[command(flatten)]
    seq: SequenceSource,
    /// Trace output (JSON lines).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "uniform")]
    k_mode: KModeArg,
    #[arg(long)]
    max_rounds: Option<u64>,
    #[arg(long, value_enum)]
    mutation: Option<MutationArg>,
    /// Per-agent seeds for shuffling the node handles agents see.
    #[arg(long, value_parser = pair::<u64>)]
    handle_seeds: Option<[u64; 2]>,
}

#[derive(Args)]
struct SweepArgs {
    /// Largest graph size.
    #[arg(long)]
    n: usize,
    /// Sequence file; defaults to the bundled one for `n`.
    #[arg(long)]
    seq: Option<PathBuf>,
    /// Sample this many random scenarios on exactly `n` nodes instead of
    /// enumerating everything up to `n`.
    #[arg(long)]
    sampled: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Wake offsets; defaults to 0..=8 and sigma-1, sigma, sigma+1.
    #[arg(long, value_delimiter = ',')]
    offsets: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value = "uniform")]
    k_mode: KModeArg,
    #[arg(long, value_enum)]
    mutation: Option<MutationArg>,
    #[arg(long)]
    stop_at_first_failure: bool,
    #[arg(long)]
    max_scenarios: Option<u64>,
    /// Report output (JSON). The first failure, if any, is written next to
    /// it as `<stem>.failure.graph` and `<stem>.failure.scenario.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Scenario sidecar written by a sweep.
    #[arg(long)]
    scenario: PathBuf,
    /// Trace output (JSON lines).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum UxsCommand {
    /// Build a sequence certified for graphs of at most `n` nodes.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for sampled certification above five nodes.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Check a sequence file against every graph of at most `n` nodes.
    Verify {
        #[arg(long)]
        seq: PathBuf,
        /// Defaults to the size the file claims.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Two-node graph against every wait-then-move strategy with x <= max.
    K2 {
        #[arg(long, default_value_t = 20)]
        max: u64,
        /// Directory for the witness traces.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radius-1 vision on a star, every wait pair up to max.
    Star {
        #[arg(long, default_value_t = 10)]
        max: u64,
        #[arg(long, default_value_t = 3)]
        leaves: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stop-after-j strategies on rings of j + 2 nodes, j = 1..=max.
    Ring {
        #[arg(long, default_value_t = 10)]
        max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Uxs { command } => cmd_uxs(command),
        Command::Demo { command } => cmd_demo(command),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn pair<T: std::str::FromStr>(s: &str) -> Result<[T; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected two values A,B")?;
    let parse = |x: &str| x.trim().parse::<T>().map_err(|_| format!("bad value {x:?}"));
    Ok([parse(a)?, parse(b)?])
}

fn load_graph(src: &GraphSource) -> Result<PortGraph> {
    match (&src.graph, &src.gen) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_graph(&text).with_context(|| format!("in {}", path.display()))
        }
        (None, Some(spec)) => generate_graph(spec, src.seed),
        _ => bail!("give exactly one of --graph and --gen"),
    }
}

fn generate_graph(spec: &str, seed: u64) -> Result<PortGraph> {
    let (kind, k) = spec.split_once(':').context("generator spec is KIND:K")?;
    let k: usize = k.parse().with_context(|| format!("bad size in {spec:?}"))?;
    Ok(match kind {
        "ring" => PortGraph::ring(k)?,
        "star" => PortGraph::star(k)?,
        "path" => PortGraph::path(k)?,
        "random" => PortGraph::random(k, seed)?,
        _ => bail!("unknown generator {kind:?}; expected ring, star, path or random"),
    })
}

fn read_sequence(path: &Path) -> Result<ExplorationSequence> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExplorationSequence::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn sequence_for(n: usize) -> Result<ExplorationSequence> {
    if let Some(s) = bundled(n) {
        return Ok(s);
    }
    eprintln!("no bundled sequence for n = {n}; generating one");
    Ok(generate_sequence(n, &GenerateOptions::default())?)
}

fn load_sequence(src: &SequenceSource, nodes: usize) -> Result<ExplorationSequence> {
    match (&src.seq, src.n) {
        (Some(path), _) => read_sequence(path),
        (None, Some(n)) => sequence_for(n),
        (None, None) => sequence_for(nodes.max(3)),
    }
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let graph = load_graph(&a.graph)?;
    let sequence = load_sequence(&a.seq, graph.node_count())?;
    let mut s = Scenario::new(graph, a.starts, a.wake, sequence);
    s.k_mode = a.k_mode.into();
    s.mutation = a.mutation.map(Into::into);
    s.max_rounds = a.max_rounds;
    s.handle_seeds = a.handle_seeds;
    s.validate()?;
    let trace = run_with(&s, RunOptions::default())?;
    if let Some(out) = &a.out {
        write_file(out, &trace.to_jsonl())?;
    }
    let sum = &trace.summary;
    println!("rounds simulated: {}", sum.last_round);
    println!("stop rounds: {:?}", sum.stop_round);
    println!("termination rounds: {:?}", sum.termination);
    match time_measure(&trace) {
        Ok(t) => println!("time: {t} (bound {})", 3 * s.config().sigma() + 64),
        Err(_) => println!("time: not terminated"),
    }
    for i in 0..2 {
        let seen = sum.first_visit[i].iter().flatten().count();
        println!("agent {i} visited {seen}/{} nodes", s.graph.node_count());
    }
    println!("collisions: {}", sum.collisions);
    if let Some(v) = &sum.violation {
        println!("violation: {v}");
    }
    if sum.timed_out {
        println!("timed out at round {}", sum.last_round);
    }
    Ok(!sum.collided() && !sum.timed_out && sum.violation.is_none())
}

fn cmd_sweep(a: SweepArgs) -> Result<bool> {
    let sequence = match &a.seq {
        Some(path) => read_sequence(path)?,
        None => sequence_for(a.n)?,
    };
    let mut spec = match a.sampled {
        Some(count) => SweepSpec::sampled(a.n, sequence, a.seed, count),
        None => SweepSpec::exhaustive(a.n, sequence),
    };
    if let Some(o) = a.offsets {
        spec.offsets = o;
    }
    spec.k_mode = a.k_mode.into();
    spec.mutation = a.mutation.map(Into::into);
    spec.stop_at_first_failure = a.stop_at_first_failure;
    spec.max_scenarios = a.max_scenarios;
    let report = sweep(&spec)?;
    print!("{}", report.to_text());
    if let Some(out) = &a.out {
        write_file(out, &report.to_json())?;
        if let Some(f) = &report.first_failure {
            let dir = out.parent().unwrap_or(Path::new("."));
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
            let (g, side) = f.to_scenario().save(dir, &format!("{stem}.failure"))?;
            println!("failing scenario: {} {}", g.display(), side.display());
        }
    }
    if let GraphMode::Sampled { .. } = report.mode {
        println!("note: sampled sweep; scenarios are random draws, not every case");
    }
    Ok(report.passed())
}

fn cmd_replay(a: ReplayArgs) -> Result<bool> {
    let s = Scenario::load(&a.graph, &a.scenario)?;
    let trace = run_with(&s, RunOptions::default())?;
    if let Some(out) = &a.out {
        write_file(out, &trace.to_jsonl())?;
    }
    let outcome = check_trace(&trace, &s);
    for (p, r) in &outcome.results {
        match r {
            Ok(()) => println!("{:<24} pass", p.name()),
            Err(m) => println!("{:<24} FAIL  {m}", p.name()),
        }
    }
    Ok(outcome.passed())
}

fn cmd_uxs(cmd: UxsCommand) -> Result<bool> {
    match cmd {
        UxsCommand::Gen { n, out, seed } => {
            let mut opts = GenerateOptions::default();
            opts.verify.sample.seed = seed;
            let s = generate_sequence(n, &opts)?;
            let text = s.to_text();
            match out {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
            eprintln!("n = {n}: {} terms, {:?}", s.len(), s.certification);
            Ok(true)
        }
        UxsCommand::Verify { seq, n, seed } => {
            let s = read_sequence(&seq)?;
            let n = n.unwrap_or(s.certified_n);
            let mut opts = VerifyOptions::default();
            opts.sample.seed = seed;
            match verify_sequence(&s.terms, n, &opts)? {
                Verdict::Certified { certification, instances, max_cover } => {
                    println!("certified for n = {n} ({certification:?}): {instances} instances, longest cover {max_cover} steps");
                    Ok(true)
                }
                Verdict::Counterexample(c) => {
                    println!("counterexample: start {}, node {} never visited", c.start, c.unvisited);
                    print!("{}", write_graph(&c.graph));
                    Ok(false)
                }
            }
        }
    }
}

fn save_trace(dir: &Option<PathBuf>, name: &str, trace: &cfe_core::sim::Trace) -> Result<()> {
    if let Some(dir) = dir {
        let path = dir.join(format!("{name}.jsonl"));
        write_file(&path, &trace.to_jsonl())?;
    }
    Ok(())
}

fn cmd_demo(cmd: DemoCommand) -> Result<bool> {
    let mut all = true;
    match cmd {
        DemoCommand::K2 { max, out } => {
            for x in 0..=max {
                let w = demos::demo_k2(x)?;
                save_trace(&out, &format!("k2-x{x}"), &w.trace)?;
                match w.collision {
                    Some((r, v)) => println!("x={x}: wake offset {}, collision at node {v} in round {r}", w.wakes[1]),
                    None => {
                        println!("x={x}: no collision");
                        all = false;
                    }
                }
            }
        }
        DemoCommand::Star { max, leaves, out } => {
            for x0 in 0..=max {
                for x1 in 0..=max {
                    let w = demos::demo_star_radius1(leaves, [x0, x1])?;
                    save_trace(&out, &format!("star-{x0}-{x1}"), &w.trace)?;
                    match w.collision {
                        Some((r, 0)) => println!("x=({x0},{x1}): wakes {:?}, collision at the centre in round {r}", w.wakes),
                        other => {
                            println!("x=({x0},{x1}): no centre collision ({other:?})");
                            all = false;
                        }
                    }
                }
            }
        }
        DemoCommand::Ring { max, out } => {
            for j in 1..=max {
                let w = demos::demo_ring_unbounded(j)?;
                save_trace(&out, &format!("ring-j{j}"), &w.trace)?;
                println!(
                    "j={j}: ring of {}, {} strategies, best covers {} nodes, sweep visited {:?}",
                    w.graph.node_count(),
                    w.strategies_checked,
                    w.best_coverage,
                    w.visited
                );
                all &= w.incomplete();
            }
        }
    }
    Ok(all)
}
