//! `mfnet`: graphs, discrepancies, spectra, stochastic runs and mean-field
//! comparisons from the command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use clap::{Args, Parser, Subcommand};
use mfnet_core::discrepancy::{brute_force_discrepancies, BruteForceRequest, DEFAULT_BRUTE_FORCE_CAP};
use mfnet_core::dynamics::{simulate, ModelSpec};
use mfnet_core::experiments::{
    compare, convergence_study, initial_condition, quasirandom_audit, write_compare_artifacts,
    write_convergence_artifacts, AuditThresholds, ConvergenceConfig, ExperimentConfig, InitRule,
};
use mfnet_core::graph::{
    gen_erdos_renyi, gen_named, gen_random_regular, graph_stats, read_edge_list_file,
    write_edge_list_file, Graph, NamedKind,
};
use mfnet_core::meanfield::solve_hmfa;
use mfnet_core::spectral::{extract_core_with, spectral_report, CoreOptions, SpectralOptions};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mfnet", version, about = "Markov population dynamics on graphs: simulation, mean-field ODEs, discrepancy and spectral diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Summary statistics of a graph.
    Stats(GraphInput),
    /// Exact discrepancy maxima (2^N sweep, capped).
    Discrepancy(DiscrepancyArgs),
    /// Eigenvalue extremes of the normalized adjacency matrix.
    Spectral(GraphInput),
    /// Core extraction (degree seed + outside-neighbor eviction).
    Core(CoreArgs),
    /// One stochastic trajectory, written as CSV.
    Simulate(SimulateArgs),
    /// Mean-field ODE solution, written as CSV.
    Hmfa(HmfaArgs),
    /// Simulation-vs-ODE comparison from a JSON config.
    Compare(ConfigArgs),
    /// Convergence study across a graph family from a JSON config.
    Convergence(ConfigArgs),
    /// Quasi-randomness audit flags with witnesses.
    Audit(AuditArgs),
}

#[derive(Args)]
struct GraphInput {
    /// Edge-list file (one `u v` per line, 0-indexed).
    #[arg(long)]
    graph: PathBuf,
    /// Treat the graph as having at least this many vertices.
    #[arg(long)]
    min_vertices: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// er | regular | star | complete | path | cycle | perfect_matching | complete_bipartite
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    /// Edge probability (er only).
    #[arg(long)]
    p: Option<f64>,
    /// Degree (regular only).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiscrepancyArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    cap: usize,
}

#[derive(Args)]
struct CoreArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Target mean degree ⟨d⟩ (defaults to the graph's own mean degree).
    #[arg(long)]
    target: Option<f64>,
    /// Eviction threshold on outside neighbors.
    #[arg(long, default_value_t = 100)]
    threshold: usize,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// sis | sir | si | degree
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// JSON file with a custom model (states, q0 matrix, sparse q1 entries).
    #[arg(long)]
    model_file: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    min_vertices: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
    /// fraction:I=0.2 | exact:I=0,3,5 | v_minus:a,b | isolated:I,S | star_hub:I,S
    #[arg(long)]
    init: String,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HmfaArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial fractions, e.g. S=0.8,I=0.2 (unlisted states get the rest).
    #[arg(long)]
    u0: String,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config document.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 0.05)]
    theta_threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha_ratio_threshold: f64,
    #[arg(long, default_value_t = 32.0)]
    degree_threshold: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the error path too
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Stats(input) => {
            let g = load(&input)?;
            let stats = graph_stats(&g);
            if input.json {
                println!("{}", serde_json::to_string_pretty(&stats).map_err(runtime)?);
            } else {
                println!("n                {}", stats.n);
                println!("mean_degree      {}", stats.mean_degree);
                println!("theta            {}", stats.theta);
                println!("caro_wei_bound   {}", stats.alpha_lower_caro_wei);
                println!("turan_bound      {}", stats.alpha_lower_turan);
                println!("bipartite        {}", stats.is_bipartite);
            }
            Ok(())
        }
        Command::Discrepancy(args) => {
            let g = load(&args.input)?;
            let report = brute_force_discrepancies(&g, BruteForceRequest::all(), args.cap)
                .map_err(runtime)?;
            if args.input.json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(runtime)?);
            } else {
                println!("del_star   {}", report.del_star);
                println!("del_max    {} witness A {:?} B {:?}", report.del_max.unwrap(), report.del_max_witness_a.as_ref().unwrap(), report.del_max_witness_b.as_ref().unwrap());
                println!("del_1      {} witness {:?}", report.del_1.unwrap(), report.del_1_witness.as_ref().unwrap());
                println!("del_2      {}", report.del_2.unwrap());
                println!("del_tilde  {}", report.del_tilde.unwrap());
            }
            Ok(())
        }
        Command::Spectral(input) => {
            let g = load(&input)?;
            let report = spectral_report(&g, None).map_err(runtime)?;
            if input.json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(runtime)?);
            } else {
                println!("lambda           {}", report.lambda_second);
                println!("spectral_gap     {}", report.spectral_gap);
                println!(
                    "extremes         ({}, {}, {})",
                    report.eigenvalue_extremes.0, report.eigenvalue_extremes.1, report.eigenvalue_extremes.2
                );
                println!("method           {:?}", report.method);
                println!("isolated_dropped {}", report.excluded_isolated.len());
            }
            Ok(())
        }
        Command::Core(args) => {
            let g = load(&args.input)?;
            let target = args.target.unwrap_or_else(|| g.mean_degree());
            let result = extract_core_with(
                &g,
                target,
                &CoreOptions { external_threshold: args.threshold },
                &SpectralOptions::default(),
            );
            println!("{}", serde_json::to_string_pretty(&result).map_err(runtime)?);
            Ok(())
        }
        Command::Simulate(args) => {
            let g = read_edge_list_file(&args.graph, args.min_vertices).map_err(usage)?;
            let model = build_model(&args.model)?;
            let rule = parse_init(&args.init, &model)?;
            let init = initial_condition(&rule, &g, &model, args.seed).map_err(usage)?;
            let traj =
                simulate(&g, &model, &init, args.horizon, args.dt, args.seed).map_err(runtime)?;
            let mut w = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
            traj.write_csv(&mut w)?;
            eprintln!("wrote {} ({} events)", args.out.display(), traj.event_count);
            Ok(())
        }
        Command::Hmfa(args) => {
            let model = build_model(&args.model)?;
            let u0 = parse_fractions(&args.u0, &model)?;
            let sol = solve_hmfa(&model, &u0, args.horizon, args.dt).map_err(runtime)?;
            let mut w = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
            sol.write_csv(&mut w)?;
            eprintln!("wrote {}", args.out.display());
            Ok(())
        }
        Command::Compare(args) => {
            let text = std::fs::read_to_string(&args.config)
                .map_err(|e| CliError::Usage(format!("{}: {e}", args.config.display())))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(usage)?;
            if let Some(dir) = args.out_dir {
                cfg.output_dir = Some(dir);
            }
            let dir = cfg
                .output_dir
                .clone()
                .ok_or_else(|| CliError::Usage("no output directory (config output_dir or --out-dir)".into()))?;
            let outcomes = compare(&cfg).map_err(runtime)?;
            let files = write_compare_artifacts(&outcomes, &cfg, &dir).map_err(runtime)?;
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            for o in &outcomes {
                println!(
                    "seed {}: sup_error {} (budget {})",
                    o.summary.graph_seed, o.summary.sup_error, o.summary.budget.total
                );
            }
            Ok(())
        }
        Command::Convergence(args) => {
            let text = std::fs::read_to_string(&args.config)
                .map_err(|e| CliError::Usage(format!("{}: {e}", args.config.display())))?;
            let mut cfg: ConvergenceConfig = serde_json::from_str(&text).map_err(usage)?;
            if let Some(dir) = args.out_dir {
                cfg.output_dir = Some(dir);
            }
            let dir = cfg
                .output_dir
                .clone()
                .ok_or_else(|| CliError::Usage("no output directory (config output_dir or --out-dir)".into()))?;
            let table = convergence_study(&cfg).map_err(runtime)?;
            let files = write_convergence_artifacts(&table, &cfg, &dir).map_err(runtime)?;
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            println!(
                "slope_sup_error {} slope_fluctuation {}",
                table.slope_sup_error, table.slope_fluctuation
            );
            Ok(())
        }
        Command::Audit(args) => {
            let g = load(&args.input)?;
            let thresholds = AuditThresholds {
                theta: args.theta_threshold,
                alpha_ratio: args.alpha_ratio_threshold,
                mean_degree: args.degree_threshold,
            };
            let report = quasirandom_audit(&g, &thresholds, args.cap);
            if args.input.json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(runtime)?);
            } else {
                println!("bipartite          {}", report.flag_bipartite);
                println!("theta              {} (θ = {})", report.flag_theta, report.theta);
                println!(
                    "independent_ratio  {} (caro_wei/N = {}, turan/N = {})",
                    report.flag_independent_ratio, report.caro_wei_ratio, report.turan_ratio
                );
                println!(
                    "bounded_degree     {} (d̄ = {})",
                    report.flag_bounded_degree, report.mean_degree
                );
            }
            Ok(())
        }
    }
}

fn load(input: &GraphInput) -> Result<Graph, CliError> {
    read_edge_list_file(&input.graph, input.min_vertices)
        .map_err(|e| CliError::Usage(format!("{}: {e}", input.graph.display())))
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let g = match args.kind.as_str() {
        "er" => {
            let p = args.p.ok_or_else(|| CliError::Usage("er needs --p".into()))?;
            gen_erdos_renyi(args.n, p, args.seed).map_err(runtime)?
        }
        "regular" => {
            let d = args.d.ok_or_else(|| CliError::Usage("regular needs --d".into()))?;
            gen_random_regular(args.n, d, args.seed).map_err(runtime)?
        }
        other => {
            let kind: NamedKind = other.parse().map_err(usage)?;
            gen_named(kind, args.n).map_err(usage)?
        }
    };
    write_edge_list_file(&g, &args.out).map_err(runtime)?;
    eprintln!("wrote {} ({} vertices, {} edges)", args.out.display(), g.n(), g.edge_total());
    Ok(())
}

fn build_model(args: &ModelArgs) -> Result<ModelSpec, CliError> {
    if let Some(path) = &args.model_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(usage);
    }
    let kind = args.model.as_deref().ok_or_else(|| CliError::Usage("--model or --model-file required".into()))?;
    let beta = args.beta;
    let gamma = args.gamma;
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::Usage(format!("{kind} needs --{name}")));
    let m = match kind {
        "sis" => ModelSpec::sis(need(beta, "beta")?, need(gamma, "gamma")?),
        "sir" => ModelSpec::sir(need(beta, "beta")?, need(gamma, "gamma")?),
        "si" => ModelSpec::si(need(beta, "beta")?),
        "degree" => ModelSpec::degree_process(),
        other => return Err(CliError::Usage(format!("unknown model `{other}`"))),
    };
    m.map_err(usage)
}

/// `fraction:I=0.2` / `exact:I=0,3,5` / `v_minus:a,b` / `isolated:I,S` /
/// `star_hub:I,S`. For fraction rules, unlisted states share the remaining
/// mass is not supported — the remainder goes to the first unlisted state.
fn parse_init(text: &str, model: &ModelSpec) -> Result<InitRule, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("init rule `{text}` needs the form kind:args")))?;
    match kind {
        "fraction" => {
            let mut fractions: BTreeMap<String, f64> = BTreeMap::new();
            for part in rest.split(',') {
                let (label, value) = part
                    .split_once('=')
                    .ok_or_else(|| CliError::Usage(format!("bad fraction `{part}`")))?;
                let v: f64 = value.parse().map_err(usage)?;
                fractions.insert(label.trim().to_string(), v);
            }
            let assigned: f64 = fractions.values().sum();
            if assigned < 1.0 - 1e-12 {
                let leftover = model
                    .labels()
                    .iter()
                    .find(|l| !fractions.contains_key(*l))
                    .ok_or_else(|| CliError::Usage("fractions must sum to 1".into()))?;
                fractions.insert(leftover.clone(), 1.0 - assigned);
            }
            Ok(InitRule::FractionRandom { fractions })
        }
        "exact" => {
            let (label, list) = rest
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("bad exact rule `{rest}`")))?;
            let vertices: Vec<usize> = list
                .split(',')
                .map(|v| v.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(usage)?;
            let rest_state = model
                .labels()
                .iter()
                .find(|l| l.as_str() != label)
                .ok_or_else(|| CliError::Usage("exact rule needs a second state".into()))?
                .clone();
            Ok(InitRule::ExactSet { state: label.to_string(), vertices, rest: rest_state })
        }
        "v_minus" => {
            let (lo, hi) = rest
                .split_once(',')
                .ok_or_else(|| CliError::Usage("v_minus needs `low,high` states".into()))?;
            Ok(InitRule::VMinus { low_state: lo.trim().into(), high_state: hi.trim().into() })
        }
        "isolated" => {
            let (inf, rest_state) = rest
                .split_once(',')
                .ok_or_else(|| CliError::Usage("isolated needs `infected,rest` states".into()))?;
            Ok(InitRule::IsolatedInfected {
                infected_state: inf.trim().into(),
                rest_state: rest_state.trim().into(),
            })
        }
        "star_hub" => {
            let (hub, rest_state) = rest
                .split_once(',')
                .ok_or_else(|| CliError::Usage("star_hub needs `hub,rest` states".into()))?;
            Ok(InitRule::StarHub { hub_state: hub.trim().into(), rest_state: rest_state.trim().into() })
        }
        other => Err(CliError::Usage(format!("unknown init rule `{other}`"))),
    }
}

fn parse_fractions(text: &str, model: &ModelSpec) -> Result<Vec<f64>, CliError> {
    let mut u0 = vec![0.0; model.num_states()];
    let mut assigned = 0.0;
    let mut seen = vec![false; model.num_states()];
    for part in text.split(',') {
        let (label, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("bad fraction `{part}`")))?;
        let idx = model
            .state_index(label.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown state `{label}`")))?;
        u0[idx] = value.parse().map_err(usage)?;
        seen[idx] = true;
        assigned += u0[idx];
    }
    if assigned < 1.0 - 1e-12 {
        if let Some(idx) = seen.iter().position(|&s| !s) {
            u0[idx] = 1.0 - assigned;
        }
    }
    Ok(u0)
}
