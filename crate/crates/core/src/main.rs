use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geopca::ingest::{ColumnRef, ColumnSelector, CsvOptions, Divisor};
use geopca::pcacore::Criterion;
use geopca::report::{self, AnalysisInput, AnalyzeOptions, KChoice, OutputFormat};
use geopca::varcluster::{Method, Metric, DEFAULT_NAIVE_THRESHOLD};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INPUT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "geopca", version, about = "Geometric principal component analysis of tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis and write the report files.
    Analyze(AnalyzeArgs),
    /// Check every tensor relation; exit 0 when all hold, 1 otherwise.
    Verify(InputArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV data file, or a `.json` correlation fixture.
    input: PathBuf,
    /// The CSV file starts with a header line.
    #[arg(long)]
    header: bool,
    /// Analysis columns, e.g. `1-4` or `Sepal Length,Petal Width`.
    #[arg(long)]
    columns: Option<ColumnSelector>,
    /// Column kept as a text label instead of being analysed.
    #[arg(long)]
    label_column: Option<ColumnRef>,
    #[arg(long, default_value = "population")]
    divisor: Divisor,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// percentage | scree | eigenvalue | per-variable
    #[arg(long, default_value = "per-variable")]
    criterion: Criterion,
    /// Threshold in (0, 1] for the percentage and per-variable criteria.
    #[arg(long, default_value_t = 0.80)]
    threshold: f64,
    /// Number of components kept, or `auto` to use the criterion.
    #[arg(long, default_value = "auto")]
    k: KChoice,
    /// naive | kmeans
    #[arg(long, default_value = "naive")]
    clusters: Method,
    /// l1 | l2 | linf | cosine (k-means only)
    #[arg(long, default_value = "l2")]
    metric: Metric,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Similarity a variable needs to join a component's cluster (naive only).
    #[arg(long, default_value_t = DEFAULT_NAIVE_THRESHOLD)]
    naive_threshold: f64,
    /// md | csv | json; also controls what is printed to stdout.
    #[arg(long, default_value = "md")]
    format: OutputFormat,
    /// Output directory.
    #[arg(long, default_value = "geopca-out")]
    out: PathBuf,
}

impl InputArgs {
    fn load(&self) -> geopca::Result<AnalysisInput> {
        let csv = CsvOptions {
            has_header: self.header,
            columns: self.columns.clone(),
            label_column: self.label_column.clone(),
        };
        AnalysisInput::load(&self.input, &csv)
    }
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

fn analyze(args: &AnalyzeArgs) -> geopca::Result<()> {
    let input = args.input.load()?;
    let opts = AnalyzeOptions {
        divisor: args.input.divisor,
        criterion: args.criterion,
        threshold: args.threshold,
        k: args.k,
        clusters: args.clusters,
        metric: args.metric,
        seed: args.seed,
        naive_threshold: args.naive_threshold,
    };
    let rep = report::analyze(&input, &label(&args.input.input), &opts)?;
    let written = report::write_outputs(&rep, &args.out, args.format)?;
    for (name, why) in &written.skipped {
        eprintln!("warning: {name} not written: {why}");
    }
    for f in &written.files {
        eprintln!("wrote {}", f.display());
    }
    print!("{}", report::render(&rep, args.format));
    if !rep.relations_pass() {
        eprintln!("warning: some tensor relations exceed the tolerance");
    }
    Ok(())
}

fn verify(args: &InputArgs) -> geopca::Result<bool> {
    let input = args.load()?;
    let opts = AnalyzeOptions {
        divisor: args.divisor,
        ..AnalyzeOptions::default()
    };
    let rep = report::analyze(&input, &label(&args.input), &opts)?;
    for r in &rep.relations {
        println!(
            "{}  {:<18} max |dev| = {:.3e}",
            if r.pass { "ok  " } else { "FAIL" },
            r.relation,
            r.max_abs_dev
        );
    }
    let passed = rep.relations.iter().filter(|r| r.pass).count();
    println!("{passed}/{} relations hold", rep.relations.len());
    Ok(rep.relations_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze(args) => analyze(args).map(|()| true),
        Command::Verify(args) => verify(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
