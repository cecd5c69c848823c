use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use inflated_selftest::commands::{self, KindChoice, RunConfig};
use inflated_selftest::io::{self, Artifact, Correlations, LhvVerdict};
use inflated_selftest::selftest::{BoundKind, BoundParams, Verdict};
use inflated_selftest::experiments::ReferenceExperiment;
use inflated_selftest::simulator::{DENSE_LIMIT_ENV, MAX_DENSE_LIMIT};
use inflated_selftest::Graph;

/// Inflated graph-state self-testing: build reference experiments, simulate
/// them, check them against classical models and certify devices.
#[derive(Parser)]
#[command(name = "inflst", version)]
struct Cli {
    /// Print the result artifact as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Largest qubit count simulated with dense state vectors.
    #[arg(long, global = true, env = DENSE_LIMIT_ENV, value_name = "QUBITS")]
    dense_limit: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the result artifact to this file.
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Replace every edge by a chain of 2d vertices.
    Inflate {
        graph: PathBuf,
        #[arg(short, long)]
        d: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Build a reference experiment for a graph.
    GenRe {
        /// Graph artifact; omit with --honeycomb.
        graph: Option<PathBuf>,
        #[arg(short, long)]
        d: usize,
        /// auto, re0, re1, re2, re3 or re4.
        #[arg(long, default_value = "auto")]
        kind: KindChoice,
        /// Build RE5 on a ROWSxCOLS honeycomb torus instead.
        #[arg(long, value_name = "ROWSxCOLS", conflicts_with_all = ["graph", "kind"])]
        honeycomb: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Correlations of the ideal graph state under depolarizing noise.
    Simulate {
        re: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Also write the state's amplitudes (little-endian f64 re/im pairs).
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Decide whether a d-LHV* model reproduces the experiment.
    LhvCheck {
        re: PathBuf,
        /// Keep only the generator constraints f_u / g_u.
        #[arg(long)]
        generators_only: bool,
        /// Limit on enumerated variables (after peeling and merging).
        #[arg(long, default_value_t = 24)]
        max_vars: usize,
        /// Export the parity system as XOR clauses.
        #[arg(long, value_name = "PATH")]
        dimacs: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Self-test against measured or ideal correlations.
    Selftest {
        re: PathBuf,
        /// Correlations artifact to test.
        #[arg(long, value_name = "PATH", required_unless_present = "ideal")]
        correlations: Option<PathBuf>,
        /// Use the ideal correlations.
        #[arg(long, conflicts_with = "correlations")]
        ideal: bool,
        /// Depolarizing noise on the state used for the isometry check
        /// [default: the noise recorded in the correlations, else 0].
        #[arg(long)]
        noise: Option<f64>,
        /// seed:N samples one branch, all enumerates every branch.
        #[arg(long, default_value = "seed:0")]
        outcomes: String,
        #[arg(long, default_value_t = 1e-6)]
        epsilon_threshold: f64,
        #[arg(long, default_value_t = 1e-6)]
        fidelity_slack: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Robustness bounds δ(ε).
    Bounds {
        /// re0, re1, re2-two-leaf, re2-star, re3, or all.
        #[arg(long, default_value = "all", conflicts_with = "re")]
        kind: String,
        /// Take kind and parameters from an experiment.
        #[arg(long, value_name = "PATH")]
        re: Option<PathBuf>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, required_unless_present = "re")]
        vertices: Option<usize>,
        #[arg(long, required_unless_present = "re")]
        edges: Option<usize>,
        /// Odd-cycle length m (RE1).
        #[arg(long)]
        circle: Option<usize>,
        /// |N(v_c)| (RE2 star).
        #[arg(long)]
        center_degree: Option<usize>,
        /// Largest distance l from the first certified vertex.
        #[arg(long, default_value_t = 1)]
        distance: usize,
        #[command(flatten)]
        out: Output,
    },
}

fn read<T: Artifact>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Writes the artifact file and/or the JSON on stdout.
fn emit<T: Artifact>(cli: &Cli, out: &Output, value: &T) -> Result<()> {
    let text = io::to_json(value);
    if let Some(path) = &out.output {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.json {
        print!("{text}");
    }
    Ok(())
}

fn parse_honeycomb(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s.split_once(['x', 'X']).context("--honeycomb expects ROWSxCOLS")?;
    Ok((r.trim().parse()?, c.trim().parse()?))
}

/// Exit status of a successful run: whether the verdict holds.
fn run(cli: &Cli) -> Result<bool> {
    if let Some(s) = &cli.dense_limit {
        match s.trim().parse::<usize>() {
            Ok(n) if (1..=MAX_DENSE_LIMIT).contains(&n) => std::env::set_var(DENSE_LIMIT_ENV, n.to_string()),
            _ => bail!("dense limit {s:?} must be an integer in 1..={MAX_DENSE_LIMIT}"),
        }
    }
    match &cli.command {
        Command::Inflate { graph, d, out } => {
            let g: Graph = read(graph)?;
            let ig = commands::cmd_inflate(&g, *d);
            if !cli.json {
                println!(
                    "inflated {} vertices / {} edges to {} vertices / {} edges (d={d})",
                    g.n(),
                    g.edge_count(),
                    ig.graph.n(),
                    ig.graph.edge_count()
                );
            }
            emit(cli, out, &ig)?;
            Ok(true)
        }
        Command::GenRe { graph, d, kind, honeycomb, out } => {
            let re = match (honeycomb, graph) {
                (Some(h), _) => {
                    let (rows, cols) = parse_honeycomb(h)?;
                    commands::cmd_gen_honeycomb(rows, cols, *d)?
                }
                (None, Some(path)) => commands::cmd_gen_re(&read(path)?, *d, *kind)?,
                (None, None) => bail!("gen-re needs a graph file or --honeycomb"),
            };
            if !cli.json {
                println!(
                    "{} at d={} on {} qubits: {} measurements, {} submeasurements",
                    re.kind,
                    re.d,
                    re.graph.n(),
                    re.measurements.len(),
                    re.submeasurements().count()
                );
            }
            emit(cli, out, &re)?;
            Ok(true)
        }
        Command::Simulate { re, noise, dump, out } => {
            let re: ReferenceExperiment = read(re)?;
            let (corr, state) = commands::cmd_simulate(&re, *noise)?;
            if let Some(path) = dump {
                let state = state.context("--dump needs the dense backend; raise the dense limit")?;
                let f = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
                state.write_dump(BufWriter::new(f))?;
            }
            if !cli.json {
                println!("{} d={} p={} ({:?} backend)", corr.kind, corr.d, corr.noise, corr.backend);
                for (label, v) in &corr.values {
                    println!("  {label:<32} {v:+.12}");
                }
            }
            emit(cli, out, &corr)?;
            Ok(true)
        }
        Command::LhvCheck { re, generators_only, max_vars, dimacs, out } => {
            let re: ReferenceExperiment = read(re)?;
            let (report, sys) = commands::cmd_lhv_check(&re, *generators_only, *max_vars)?;
            if let Some(path) = dimacs {
                fs::write(path, sys.to_dimacs_xor()).with_context(|| format!("writing {}", path.display()))?;
            }
            if !cli.json {
                let verdict = match report.verdict {
                    LhvVerdict::Infeasible => "infeasible",
                    LhvVerdict::ParityInconclusive => "parity-inconclusive",
                    LhvVerdict::Feasible => "feasible",
                };
                println!(
                    "{} d={}: {} constraints on {} view variables: {verdict}",
                    report.kind, report.d, report.constraints, report.variables
                );
                if !report.certificate_labels.is_empty() {
                    println!("  certificate: {}", report.certificate_labels.join(" + "));
                }
                match (&report.enumeration, &report.enumeration_skipped) {
                    (Some(e), _) => println!(
                        "  exhaustive: best {}/{} constraints, classical value {:.6} vs quantum {:.6} ({} free variables)",
                        e.best_satisfied, e.constraints, e.classical_value, e.quantum_value, e.free_variables
                    ),
                    (None, Some(why)) => println!("  exhaustive search skipped: {why}"),
                    (None, None) => {}
                }
                println!("  nonlocal: {}", report.nonlocal);
            }
            emit(cli, out, &report)?;
            Ok(report.nonlocal)
        }
        Command::Selftest { re, correlations, ideal: _, noise, outcomes, epsilon_threshold, fidelity_slack, out } => {
            let re: ReferenceExperiment = read(re)?;
            let corr: Option<Correlations> = correlations.as_deref().map(read).transpose()?;
            let config = RunConfig {
                d: re.d,
                noise: noise.or(corr.as_ref().map(|c| c.noise)).unwrap_or(0.0),
                outcomes: commands::parse_outcomes(outcomes)?,
                epsilon_threshold: *epsilon_threshold,
                fidelity_slack: *fidelity_slack,
                ..RunConfig::default()
            };
            let report = commands::cmd_selftest(&re, corr.as_ref(), &config)?;
            if !cli.json {
                let opt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
                println!("{} d={}: epsilon {:.3e}", report.kind, report.d, report.epsilon);
                println!(
                    "  delta measured {} (bound {}), worst fidelity {}, {} branch(es)",
                    opt(report.delta_measured),
                    opt(report.delta_bound),
                    report.isometry_fidelity.map_or("n/a".into(), |f| format!("{f:.12}")),
                    report.branches.len()
                );
                if let Some(why) = &report.skipped {
                    println!("  dense checks skipped: {why}");
                }
                println!("  verdict: {:?}", report.verdict);
            }
            emit(cli, out, &report)?;
            Ok(report.verdict == Verdict::Pass)
        }
        Command::Bounds { kind, re, epsilon, vertices, edges, circle, center_degree, distance, out } => {
            let table = match re {
                Some(path) => commands::cmd_bounds_for(&read(path)?, *epsilon)?,
                None => {
                    let kind = match kind.as_str() {
                        "all" => None,
                        k => Some(k.parse::<BoundKind>()?),
                    };
                    let params = BoundParams {
                        vertices: vertices.expect("required by clap"),
                        edges: edges.expect("required by clap"),
                        circle: *circle,
                        center_degree: *center_degree,
                        distance: *distance,
                    };
                    commands::cmd_bounds(kind, params, *epsilon)?
                }
            };
            if !cli.json {
                println!("{:<14} {:>12} {:>14} {:>14}", "kind", "c", "table", "general");
                for b in &table.rows {
                    println!("{:<14} {:>12.6} {:>14.6} {:>14.6}", b.kind.to_string(), b.c, b.table, b.general);
                }
            }
            emit(cli, out, &table)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
