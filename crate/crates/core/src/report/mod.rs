//! End-to-end pipeline and the self-contained analysis report.

mod render;
mod svg;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::corrstats::{self, CorrelationMatrix, DerivedMatrices};
use crate::eigensolve::{eigen_symmetric, EigenSystem};
use crate::error::{Error, Result};
use crate::ingest::{self, ColumnSummary, CsvOptions, DataMatrix, Divisor};
use crate::linalg::Matrix;
use crate::pcacore::{
    explanation_table, project_scores, scree_data, select_components, variance_explained, Criterion,
    ExplanationTable, SelectionResult, VarianceExplained,
};
use crate::tensorops::{build_virtual, verify_relations, RelationCheck, VirtualRepresentation};
use crate::varcluster::{
    cluster_kmeans, cluster_naive, similarity_profiles, ClusterAssignment, KmeansOptions, Method, Metric,
    SimilarityProfile,
};

pub use render::{render_csv, render_markdown, tables, Cell, CellFormat, Table};
pub use svg::{render_svg_scree, render_svg_similarity};

/// Leading score rows and per-component summaries.
pub const SCORE_PREVIEW_ROWS: usize = 3;
pub const UNAVAILABLE_SCORES: &str = "unavailable (no raw data)";

/// Where the analysis starts: raw observations or a correlation matrix.
#[derive(Debug, Clone)]
pub enum AnalysisInput {
    Data(DataMatrix),
    Correlation(CorrelationMatrix),
}

impl AnalysisInput {
    /// `.json` files are correlation fixtures; anything else is CSV.
    pub fn load(path: &Path, csv: &CsvOptions) -> Result<Self> {
        let is_json = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            CorrelationMatrix::load_json(path).map(AnalysisInput::Correlation)
        } else {
            ingest::load_csv(path, csv).map(AnalysisInput::Data)
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            AnalysisInput::Data(_) => "csv",
            AnalysisInput::Correlation(_) => "correlation_fixture",
        }
    }
}

/// Number of retained components: fixed, or chosen by the criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

impl KChoice {
    fn to_json(self) -> serde_json::Value {
        match self {
            KChoice::Auto => "auto".into(),
            KChoice::Fixed(k) => k.into(),
        }
    }
}

impl FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(KChoice::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(KChoice::Fixed(k)),
            _ => Err(format!("invalid --k '{s}' (expected a positive integer or 'auto')")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub divisor: Divisor,
    pub criterion: Criterion,
    pub threshold: f64,
    pub k: KChoice,
    pub clusters: Method,
    pub metric: Metric,
    pub seed: u64,
    pub naive_threshold: f64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            divisor: Divisor::Population,
            criterion: Criterion::PerVariable,
            threshold: 0.80,
            k: KChoice::Auto,
            clusters: Method::Naive,
            metric: Metric::L2,
            seed: 0,
            naive_threshold: crate::varcluster::DEFAULT_NAIVE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub input: String,
    pub input_kind: &'static str,
    pub divisor: Divisor,
    pub criterion: Criterion,
    pub threshold: f64,
    pub k_requested: serde_json::Value,
    pub k: usize,
    pub clusters: Method,
    pub metric: Metric,
    pub seed: u64,
    pub naive_threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoresBlock {
    /// Divisor used for the score summaries.
    pub summary_divisor: Divisor,
    pub first_rows: Matrix,
    pub summaries: Vec<ColumnSummary>,
}

/// A report block that may be missing when the input carries no raw data.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Section<T> {
    Available(T),
    Unavailable(String),
}

impl<T> Section<T> {
    pub fn available(&self) -> Option<&T> {
        match self {
            Section::Available(t) => Some(t),
            Section::Unavailable(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub provenance: Provenance,
    pub variables: Vec<String>,
    pub n_obs: usize,
    pub column_summaries: Section<Vec<ColumnSummary>>,
    pub correlation: Matrix,
    pub p_values: Matrix,
    pub angles_deg: Matrix,
    pub determination: Matrix,
    pub eigen: EigenSystem,
    pub variance_explained: VarianceExplained,
    pub scores: Section<ScoresBlock>,
    pub virtual_representation: VirtualRepresentation,
    pub explanation_full: ExplanationTable,
    pub explanation_truncated: ExplanationTable,
    pub selection: Vec<SelectionResult>,
    pub similarity: Vec<SimilarityProfile>,
    pub clusters: ClusterAssignment,
    pub relations: Vec<RelationCheck>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn scree_series(&self) -> Vec<(usize, f64)> {
        scree_data(self.eigen.eigenvalues())
    }

    pub fn relations_pass(&self) -> bool {
        self.relations.iter().all(|r| r.pass)
    }
}

/// Runs the whole pipeline.
pub fn analyze(input: &AnalysisInput, input_label: &str, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let (corr, column_summaries, standardized) = match input {
        AnalysisInput::Data(data) => {
            let z = ingest::standardize(data, opts.divisor)?;
            let c = corrstats::correlation_matrix(&z)?;
            (c, Section::Available(ingest::summarize(data, opts.divisor)), Some(z))
        }
        AnalysisInput::Correlation(c) => (c.clone(), Section::Unavailable(UNAVAILABLE_SCORES.into()), None),
    };
    let n = corr.dim();
    let derived = DerivedMatrices::from_correlation(&corr)?;
    let eigen = eigen_symmetric(&corr)?;
    let ve = variance_explained(eigen.eigenvalues());
    let vr = build_virtual(&eigen);
    let full = explanation_table(&vr, None)?;

    let selection: Vec<SelectionResult> = Criterion::ALL
        .iter()
        .map(|&c| select_components(eigen.eigenvalues(), &full, c, opts.threshold))
        .collect::<Result<_>>()?;
    let k = match opts.k {
        KChoice::Fixed(k) => {
            if k > n {
                return Err(Error::InvalidComponentCount { k, n });
            }
            k
        }
        KChoice::Auto => selection
            .iter()
            .find(|s| s.criterion == opts.criterion)
            .map(|s| s.k)
            .unwrap(),
    };
    let truncated = full.truncated(k)?;

    let scores = match &standardized {
        Some(z) => {
            let s = project_scores(z, eigen.rotation())?;
            Section::Available(ScoresBlock {
                summary_divisor: s.divisor,
                first_rows: s.scores.truncate_rows(SCORE_PREVIEW_ROWS),
                summaries: s.summaries,
            })
        }
        None => Section::Unavailable(UNAVAILABLE_SCORES.into()),
    };

    let profiles = similarity_profiles(&truncated, corr.names())?;
    let clusters = match opts.clusters {
        Method::Naive => cluster_naive(&profiles, opts.naive_threshold)?,
        Method::Kmeans => cluster_kmeans(&profiles, k, opts.metric, opts.seed, KmeansOptions::default())?,
    };
    let relations = verify_relations(&vr, &eigen, &corr);

    Ok(AnalysisReport {
        provenance: Provenance {
            input: input_label.to_string(),
            input_kind: input.kind(),
            divisor: opts.divisor,
            criterion: opts.criterion,
            threshold: opts.threshold,
            k_requested: opts.k.to_json(),
            k,
            clusters: opts.clusters,
            metric: opts.metric,
            seed: opts.seed,
            naive_threshold: opts.naive_threshold,
        },
        variables: corr.names().to_vec(),
        n_obs: corr.n_obs(),
        column_summaries,
        correlation: corr.matrix().clone(),
        p_values: derived.p_values,
        angles_deg: derived.angles_deg,
        determination: derived.determination,
        eigen,
        variance_explained: ve,
        scores,
        virtual_representation: vr,
        explanation_full: full,
        explanation_truncated: truncated,
        selection,
        similarity: profiles,
        clusters,
        relations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Markdown,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected md|csv|json)")),
        }
    }
}

pub fn render(report: &AnalysisReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => render_markdown(report),
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Json => report.to_json(),
    }
}

/// Files produced by [`write_outputs`].
#[derive(Debug, Clone, Default)]
pub struct WrittenFiles {
    pub files: Vec<PathBuf>,
    /// Outputs that could not be produced, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// Writes `report.json`, `report.md`, `scree.svg` and `similarity.svg`
/// (plus `report.csv` when `format` is CSV) into `dir`.
pub fn write_outputs(report: &AnalysisReport, dir: &Path, format: OutputFormat) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = WrittenFiles::default();
    let mut put = |name: &str, contents: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        written.files.push(path);
        Ok(())
    };
    put("report.json", &report.to_json())?;
    put("report.md", &render_markdown(report))?;
    if format == OutputFormat::Csv {
        put("report.csv", &render_csv(report))?;
    }
    put("scree.svg", &render_svg_scree(&report.scree_series())?)?;
    match render_svg_similarity(&report.similarity, &report.clusters) {
        Ok(svg) => put("similarity.svg", &svg)?,
        Err(e) => written.skipped.push(("similarity.svg".into(), e.to_string())),
    }
    Ok(written)
}
