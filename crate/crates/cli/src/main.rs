use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperorc::bound::OverlapRule;
use hyperorc::curvature::{AggKind, CurvatureConfig, CurvatureEngine, EstimatorKind};
use hyperorc::generators::parse_spec;
use hyperorc::harness::{run_agreement, run_support_scaling, run_timing, TimingConfig, SCALING_SIZES};
use hyperorc::hypergraph::{parse_hyperedge_list, parse_labeled_hyperedge_list, Hypergraph};
use hyperorc::measure::MeasureKind;
use hyperorc::report::{
    agreement_histogram_svg, agreement_scatter_svg, edge_rows, node_rows, write_agreement_csv, write_edge_csv,
    write_json, write_node_csv,
};
use hyperorc::transport::{SinkhornConfig, DEFAULT_SUPPORT_CAP};

#[derive(Parser)]
#[command(name = "hyperorc", version, about = "Ollivier-Ricci curvature bounds for graphs and hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Edge and node curvature of a hyperedge list.
    Compute {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        curvature: CurvatureArgs,
        /// W1 estimator.
        #[arg(long, default_value = "bound")]
        estimator: EstimatorKind,
    },
    /// Edge curvature under the bound against a baseline estimator, with
    /// scatter and histogram plots.
    Compare {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        curvature: CurvatureArgs,
        /// Estimator the bound is compared against.
        #[arg(long, default_value = "exact")]
        baseline: EstimatorKind,
        /// Histogram bin count.
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Time the bound against Sinkhorn on every adjacent pair.
    Bench {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "we")]
        measure: MeasureKind,
        #[arg(long, default_value = "a")]
        agg: AggKind,
        #[command(flatten)]
        sinkhorn: SinkhornArgs,
        /// Worker threads for the pair loop.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Skip the untimed warm-up pass.
        #[arg(long)]
        no_warmup: bool,
        /// Also measure bound cost against support size.
        #[arg(long)]
        scaling: bool,
    },
    /// Generate a synthetic hypergraph from a spec file.
    Generate {
        model: Model,
        /// Key-value spec file.
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the seed in the spec file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Hcm,
    Hsbm,
}

#[derive(Args)]
struct Input {
    /// Hyperedge list, one hyperedge per line.
    file: PathBuf,
    /// Treat vertex tokens as arbitrary labels rather than integer ids.
    #[arg(long)]
    labels: bool,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SinkhornArgs {
    /// Sinkhorn regularization, relative to the largest ground cost.
    #[arg(long, default_value_t = SinkhornConfig::default().reg)]
    reg: f64,
    /// Sinkhorn iteration limit.
    #[arg(long, default_value_t = SinkhornConfig::default().max_iters)]
    iters: usize,
    /// Sinkhorn stopping threshold on the scaling-vector change.
    #[arg(long, default_value_t = SinkhornConfig::default().threshold)]
    threshold: f64,
}

impl SinkhornArgs {
    fn config(&self) -> Result<SinkhornConfig> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.reg) || !positive(self.threshold) || self.iters == 0 {
            bail!(Usage("--reg and --threshold must be positive and --iters nonzero".into()));
        }
        Ok(SinkhornConfig { reg: self.reg, max_iters: self.iters, threshold: self.threshold })
    }
}

#[derive(Args)]
struct CurvatureArgs {
    #[arg(long, default_value = "en")]
    measure: MeasureKind,
    #[arg(long, default_value = "a")]
    agg: AggKind,
    /// Mix this much laziness into every measure, in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    sinkhorn: SinkhornArgs,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Largest measure support the exact solver accepts.
    #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
    support_cap: usize,
    /// Count singleton hyperedges in the edge-based node curvature.
    #[arg(long)]
    include_singletons: bool,
    /// Take overlap sums over every vertex instead of the common support.
    /// The result is then not guaranteed to bound W1 from above.
    #[arg(long)]
    all_points_overlap: bool,
}

impl CurvatureArgs {
    fn config(&self, estimator: EstimatorKind) -> Result<CurvatureConfig> {
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                bail!(Usage(format!("--alpha must lie in (0, 1), got {a}")));
            }
        }
        if self.threads == Some(0) {
            bail!(Usage("--threads must be positive".into()));
        }
        Ok(CurvatureConfig {
            measure: self.measure,
            agg: self.agg,
            estimator,
            alpha: self.alpha,
            sinkhorn: self.sinkhorn.config()?,
            overlap: if self.all_points_overlap { OverlapRule::AllPoints } else { OverlapRule::CommonSupport },
            support_cap: self.support_cap,
            singletons_in_node_degree: self.include_singletons,
            threads: self.threads,
        })
    }
}

/// An error the user can fix by changing the invocation.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn load(input: &Input) -> Result<(String, Hypergraph)> {
    if !input.file.is_file() {
        bail!(Usage(format!("no such file: {}", input.file.display())));
    }
    let reader = BufReader::new(File::open(&input.file).with_context(|| format!("opening {}", input.file.display()))?);
    let parsed = if input.labels { parse_labeled_hyperedge_list(reader) } else { parse_hyperedge_list(reader) }
        .with_context(|| format!("reading {}", input.file.display()))?;
    if parsed.duplicates_collapsed > 0 {
        eprintln!("note: dropped {} repeated vertex ids within hyperedges", parsed.duplicates_collapsed);
    }
    let name = input.file.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
    Ok((name, parsed.hypergraph))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn make_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compute { input, curvature, estimator } => {
            let config = curvature.config(estimator)?;
            let (_, h) = load(&input)?;
            let engine = CurvatureEngine::new(&h, config)?;
            let report = engine.report();
            make_dir(&input.out)?;
            write_edge_csv(create(&input.out, "edges.csv")?, &edge_rows(&report))?;
            write_node_csv(create(&input.out, "nodes.csv")?, &node_rows(&report))?;
            write_json(create(&input.out, "report.json")?, &report)?;
            let done = report.edges.iter().filter(|e| e.curvature.is_some()).count();
            println!(
                "{} hyperedges ({} with curvature), {} vertices -> {}",
                report.edges.len(),
                done,
                report.nodes.len(),
                input.out.display()
            );
        }
        Command::Compare { input, curvature, baseline, bins } => {
            let config = curvature.config(EstimatorKind::Bound)?;
            if baseline == EstimatorKind::Bound {
                bail!(Usage("--baseline must be exact or sinkhorn".into()));
            }
            let (name, h) = load(&input)?;
            let result = run_agreement(&name, &h, &config, baseline, bins)?;
            make_dir(&input.out)?;
            write_json(create(&input.out, "agreement.json")?, &result)?;
            write_agreement_csv(create(&input.out, "agreement.csv")?, &result)?;
            write_text(&input.out, "scatter.svg", &agreement_scatter_svg(&result))?;
            write_text(&input.out, "histogram.svg", &agreement_histogram_svg(&result))?;
            let s = &result.summary;
            println!(
                "{} edges compared, {} skipped; spearman {}, mean shift {:.6}",
                s.count,
                result.skipped.len(),
                s.spearman.map_or("n/a".into(), |r| format!("{r:.4}")),
                s.mean_shift
            );
        }
        Command::Bench { input, measure, agg, sinkhorn, threads, no_warmup, scaling } => {
            if threads == 0 {
                bail!(Usage("--threads must be positive".into()));
            }
            let config =
                TimingConfig { measure, agg, sinkhorn: sinkhorn.config()?, threads: Some(threads), warmup: !no_warmup };
            let (name, h) = load(&input)?;
            let result = run_timing(&name, &h, &config)?;
            make_dir(&input.out)?;
            write_json(create(&input.out, "bench.json")?, &result)?;
            println!(
                "{} pairs timed ({} failed); bound {} ns, sinkhorn {} ns, speedup {}",
                result.pairs_timed,
                result.pairs_failed,
                result.bound.total_ns,
                result.sinkhorn.total_ns,
                result.speedup.map_or("n/a".into(), |s| format!("{s:.1}x"))
            );
            if scaling {
                let s = run_support_scaling(&SCALING_SIZES, measure, 7, 2_000_000)?;
                write_json(create(&input.out, "scaling.json")?, &s)?;
                println!("bound cost vs support: log-log slope {:.3}", s.log_log_slope);
            }
        }
        Command::Generate { model, spec, seed, out } => {
            if !spec.is_file() {
                bail!(Usage(format!("no such file: {}", spec.display())));
            }
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut parsed = parse_spec(&text).with_context(|| format!("parsing {}", spec.display()))?;
            let wanted = match model {
                Model::Hcm => "hcm",
                Model::Hsbm => "hsbm",
            };
            if parsed.model() != wanted {
                bail!(Usage(format!("spec describes model {}, not {wanted}", parsed.model())));
            }
            if let Some(seed) = seed {
                parsed.set_seed(seed);
            }
            let (h, meta) = parsed.generate()?;
            make_dir(&out)?;
            write_text(&out, "hypergraph.txt", &h.to_hyperedge_list())?;
            write_json(create(&out, "meta.json")?, &meta)?;
            println!("{} vertices, {} hyperedges -> {}", meta.num_vertices, meta.num_edges, out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
