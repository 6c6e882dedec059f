use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use alp_core::bench::{self, BenchOptions, Method, ReportFormat, Stratification, WorkloadSpec};
use alp_core::embedding::{
    build_alt_embedding, build_distributed_embedding, space_accounting, Embedding, LandmarkSet,
    LandmarkStrategy,
};
use alp_core::graph::{self, Graph, VertexId};
use alp_core::heuristics::{AlpConfig, AlpHeuristic, AltHeuristic, CountingMode};
use alp_core::search::{astar, dijkstra_query, QueryResult};
use alp_core::{derive_seed, seeds};

#[derive(Parser)]
#[command(
    name = "alp",
    version,
    about = "Landmark A* shortest paths: ALT, ALP and Dijkstra"
)]
struct Cli {
    /// Top-level seed; generation, landmark selection and workloads derive
    /// their own streams from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph and write it as DIMACS.
    Gen {
        /// grid:RxC, random:N:EXTRA or path:N
        #[arg(long)]
        graph: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an embedding, report its size, and optionally serialize it.
    Preprocess {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_enum)]
        method: EmbeddingMethod,
        #[command(flatten)]
        landmarks: LandmarkArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer one source-target query.
    Query {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Alp)]
        method: MethodArg,
        #[command(flatten)]
        landmarks: LandmarkArgs,
        /// Use a serialized embedding instead of building one.
        #[arg(long, conflicts_with_all = ["landmarks", "strategy"])]
        embedding: Option<PathBuf>,
        #[command(flatten)]
        heuristic: HeuristicArgs,
        #[arg(long)]
        source: u32,
        #[arg(long)]
        target: u32,
    },
    /// Run a query workload with several methods and emit a report.
    Bench {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        landmarks: LandmarkArgs,
        #[command(flatten)]
        heuristic: HeuristicArgs,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, value_enum, default_value_t = WorkloadArg::Uniform)]
        workload: WorkloadArg,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Dijkstra, MethodArg::Alt, MethodArg::Alp])]
        methods: Vec<MethodArg>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Report file; stdout when omitted (the summary then goes to stderr).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record per-query wall time. Reports are no longer reproducible.
        #[arg(long)]
        timing: bool,
    },
    /// Check every distance in a report against exact shortest paths.
    Verify {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        report: PathBuf,
        /// Defaults to the report's extension, then csv.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

#[derive(Args)]
struct GraphArg {
    /// Graph file (DIMACS or edge list) or generator spec grid:RxC,
    /// random:N:EXTRA, path:N.
    #[arg(long)]
    graph: String,
}

#[derive(Args)]
struct LandmarkArgs {
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    landmarks: u32,
    #[arg(long, default_value_t = LandmarkStrategy::Farthest)]
    strategy: LandmarkStrategy,
}

#[derive(Args)]
struct HeuristicArgs {
    #[arg(long, default_value_t = CountingMode::Literal)]
    mode: CountingMode,
    /// Drop the Ptolemy candidate from the dual-landmark bound.
    #[arg(long)]
    no_ptolemy: bool,
}

impl HeuristicArgs {
    fn config(&self) -> AlpConfig {
        AlpConfig {
            mode: self.mode,
            ptolemy: !self.no_ptolemy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbeddingMethod {
    Alt,
    Alp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dijkstra,
    Alt,
    Alp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Dijkstra => Method::Dijkstra,
            MethodArg::Alt => Method::Alt,
            MethodArg::Alp => Method::Alp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WorkloadArg {
    Uniform,
    Decile,
    /// Grid generators only.
    Corners,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> ReportFormat {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

/// Where a graph comes from, and its grid shape when it has one.
struct LoadedGraph {
    graph: Graph,
    grid_shape: Option<(usize, usize)>,
}

enum Generator {
    Grid(usize, usize),
    Random(usize, usize),
    Path(usize),
}

fn parse_generator(spec: &str) -> Result<Option<Generator>> {
    let Some((kind, rest)) = spec.split_once(':') else {
        return Ok(None);
    };
    let num = |s: &str| -> Result<usize> {
        s.parse()
            .with_context(|| format!("bad number `{s}` in generator spec `{spec}`"))
    };
    let generator = match kind {
        "grid" => {
            let (r, c) = rest
                .split_once('x')
                .with_context(|| format!("expected grid:RxC, got `{spec}`"))?;
            Generator::Grid(num(r)?, num(c)?)
        }
        "random" => {
            let (n, extra) = rest
                .split_once(':')
                .with_context(|| format!("expected random:N:EXTRA, got `{spec}`"))?;
            Generator::Random(num(n)?, num(extra)?)
        }
        "path" => Generator::Path(num(rest)?),
        _ => return Ok(None),
    };
    Ok(Some(generator))
}

fn generate(generator: &Generator, seed: u64) -> Result<LoadedGraph> {
    let (graph, grid_shape) = match *generator {
        Generator::Grid(r, c) => (graph::grid(r, c)?, Some((r, c))),
        Generator::Random(n, extra) => (
            graph::random_connected(n, extra, derive_seed(seed, seeds::GRAPH))?,
            None,
        ),
        Generator::Path(n) => {
            if n == 0 {
                bail!("path graph needs at least one vertex");
            }
            (Graph::from_edges(n, (1..n).map(|v| (v - 1, v, 1.0)))?, None)
        }
    };
    Ok(LoadedGraph { graph, grid_shape })
}

fn load(source: &str, seed: u64) -> Result<LoadedGraph> {
    // An existing file wins over a generator spec of the same name.
    if !Path::new(source).exists() {
        if let Some(generator) = parse_generator(source)? {
            return generate(&generator, seed);
        }
    }
    let file = File::open(source).with_context(|| format!("cannot open graph `{source}`"))?;
    let graph = graph::load_graph(BufReader::new(file))
        .with_context(|| format!("cannot read graph `{source}`"))?;
    Ok(LoadedGraph {
        graph,
        grid_shape: None,
    })
}

fn select_landmarks(g: &Graph, args: &LandmarkArgs, seed: u64) -> Result<LandmarkSet> {
    Ok(args.strategy.select(
        g,
        args.landmarks as usize,
        derive_seed(seed, seeds::LANDMARKS),
    )?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create `{}`", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn join_ids(ids: &[VertexId]) -> String {
    ids.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn print_result(r: &QueryResult) {
    match r.distance {
        Some(d) => println!("distance: {d}"),
        None => println!("distance: unreachable"),
    }
    println!("path: {}", join_ids(&r.path));
    println!(
        "settled: {}  expanded: {}  reopened: {}  heuristic_evals: {}",
        r.settled, r.expanded, r.reopened, r.heuristic_evals
    );
    let ops = &r.op_totals;
    println!(
        "subs: {}  muls: {}  divs: {}  max_operands (summed): {}",
        ops.subtractions, ops.multiplications, ops.divisions, ops.max_arity
    );
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen { graph, out } => {
            let generator = parse_generator(&graph)?
                .with_context(|| format!("`{graph}` is not a generator spec"))?;
            let loaded = generate(&generator, seed)?;
            let mut sink = output(out.as_deref())?;
            loaded.graph.write_dimacs(&mut sink)?;
            sink.flush()?;
        }

        Command::Preprocess {
            graph,
            method,
            landmarks,
            out,
        } => {
            let g = load(&graph.graph, seed)?.graph;
            let l = select_landmarks(&g, &landmarks, seed)?;
            let (embedding, account) = match method {
                EmbeddingMethod::Alt => {
                    let e = build_alt_embedding(&g, &l)?;
                    let a = space_accounting(&e);
                    (Embedding::Full(e), a)
                }
                EmbeddingMethod::Alp => {
                    let e = build_distributed_embedding(&g, &l)?;
                    let a = space_accounting(&e);
                    (Embedding::Distributed(e), a)
                }
            };
            println!("landmarks: {}", join_ids(l.ids()));
            println!("entries: {}", account.entries);
            if let Some(path) = out {
                let mut sink = output(Some(&path))?;
                embedding.write_to(&mut sink)?;
                println!("wrote {}", path.display());
            }
        }

        Command::Query {
            graph,
            method,
            landmarks,
            embedding,
            heuristic,
            source,
            target,
        } => {
            let g = load(&graph.graph, seed)?.graph;
            let (s, t) = (VertexId(source), VertexId(target));
            let stored = match &embedding {
                Some(path) => {
                    let file = File::open(path)
                        .with_context(|| format!("cannot open embedding `{}`", path.display()))?;
                    let e = Embedding::read_from(BufReader::new(file))
                        .with_context(|| format!("cannot read embedding `{}`", path.display()))?;
                    Some(e)
                }
                None => None,
            };
            let result = match method {
                MethodArg::Dijkstra => dijkstra_query(&g, s, t)?,
                MethodArg::Alt => {
                    let e = match stored {
                        Some(Embedding::Full(e)) => e,
                        Some(Embedding::Distributed(_)) => bail!("alt needs a full embedding"),
                        None => build_alt_embedding(&g, &select_landmarks(&g, &landmarks, seed)?)?,
                    };
                    check_size(e.vertex_count(), &g)?;
                    astar(&g, s, t, &AltHeuristic(&e))?
                }
                MethodArg::Alp => {
                    let e = match stored {
                        Some(Embedding::Distributed(e)) => e,
                        Some(Embedding::Full(_)) => bail!("alp needs a distributed embedding"),
                        None => build_distributed_embedding(
                            &g,
                            &select_landmarks(&g, &landmarks, seed)?,
                        )?,
                    };
                    check_size(e.vertex_count(), &g)?;
                    let h = AlpHeuristic {
                        embedding: &e,
                        config: heuristic.config(),
                    };
                    astar(&g, s, t, &h)?
                }
            };
            print_result(&result);
        }

        Command::Bench {
            graph,
            landmarks,
            heuristic,
            queries,
            workload,
            methods,
            format,
            out,
            timing,
        } => {
            let loaded = load(&graph.graph, seed)?;
            let g = &loaded.graph;
            let stratification = match workload {
                WorkloadArg::Uniform => Stratification::None,
                WorkloadArg::Decile => Stratification::ByDistanceDecile,
                WorkloadArg::Corners => {
                    let (rows, cols) = loaded
                        .grid_shape
                        .context("the corners workload needs a grid:RxC graph")?;
                    Stratification::Corners { rows, cols }
                }
            };
            let spec = WorkloadSpec {
                query_count: queries,
                seed: derive_seed(seed, seeds::WORKLOAD),
                stratification,
            };
            let qs = bench::generate_queries(g, &spec);
            let methods: Vec<Method> = methods.into_iter().map(Method::from).collect();
            let wants_landmarks = methods.iter().any(|m| *m != Method::Dijkstra);
            let l = if wants_landmarks {
                select_landmarks(g, &landmarks, seed)?
            } else {
                // Unused by Dijkstra rows; any valid set will do.
                LandmarkSet::new(g, vec![VertexId(0)])?
            };
            let options = BenchOptions {
                alp: heuristic.config(),
                timing,
            };
            let rows = bench::run_workload(g, &l, &qs, &methods, &options)?;
            let mut sink = output(out.as_deref())?;
            bench::emit_report(&rows, format.into(), &mut sink)?;
            drop(sink);

            let summary = bench::summarize(&rows);
            if out.is_some() {
                bench::write_summary(&summary, io::stdout().lock())?;
            } else {
                bench::write_summary(&summary, io::stderr().lock())?;
            }
        }

        Command::Verify {
            graph,
            report,
            format,
        } => {
            let g = load(&graph.graph, seed)?.graph;
            let format =
                format.unwrap_or_else(|| match report.extension().and_then(|e| e.to_str()) {
                    Some("json") => FormatArg::Json,
                    _ => FormatArg::Csv,
                });
            let file = File::open(&report)
                .with_context(|| format!("cannot open report `{}`", report.display()))?;
            let rows = bench::parse_report(format.into(), BufReader::new(file))
                .with_context(|| format!("cannot parse report `{}`", report.display()))?;
            let result = bench::verify_workload(&g, &rows);
            println!("checked: {}", result.checked);
            println!("violations: {}", result.violations.len());
            for v in &result.violations {
                let expected = v
                    .expected
                    .map_or_else(|| "out of range".to_string(), |d| d.to_string());
                println!(
                    "  row {}: {} {} -> {} reported {} expected {}",
                    v.row, v.method, v.source, v.target, v.reported, expected
                );
            }
            if !result.is_clean() {
                bail!(
                    "{} of {} rows disagree with the oracle",
                    result.violations.len(),
                    result.checked
                );
            }
        }
    }
    Ok(())
}

fn check_size(embedded: usize, g: &Graph) -> Result<()> {
    if embedded != g.vertex_count() {
        bail!(
            "embedding covers {embedded} vertices but the graph has {}",
            g.vertex_count()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
