//! Principal component scores, variance tables, variable-vs-component
//! explanation tables and the component-count selection criteria.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{summarize_matrix, ColumnSummary, Divisor, StandardizedMatrix};
use crate::linalg::Matrix;
use crate::tensorops::VirtualRepresentation;

/// Slack allowed when comparing cumulative sums against a threshold, so that
/// e.g. a threshold of 1.0 is reached by sums that equal 1 up to rounding.
const THRESHOLD_SLACK: f64 = 1e-12;

/// Points in the principal component space; column i is component i.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreMatrix {
    pub scores: Matrix,
    /// Summaries use the sample divisor.
    pub summaries: Vec<ColumnSummary>,
    pub divisor: Divisor,
}

/// `pᵀ = R aᵀ` for every standardized row `a`.
pub fn project_scores(z: &StandardizedMatrix, r: &Matrix) -> Result<ScoreMatrix> {
    if !r.is_square() || r.cols() != z.n_cols() {
        return Err(Error::Dimension {
            context: "pcacore",
            expected: r.cols(),
            got: z.n_cols(),
        });
    }
    // rows of Z·Rᵀ are (R·aᵀ)ᵀ
    let scores = z.values() * &r.transpose();
    let summaries = summarize_matrix(&scores, Divisor::Sample);
    Ok(ScoreMatrix {
        scores,
        summaries,
        divisor: Divisor::Sample,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub eigenvalue: f64,
    pub cumulative_eigenvalue: f64,
    pub percent: f64,
    pub cumulative_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceExplained {
    pub rows: Vec<VarianceRow>,
}

impl VarianceExplained {
    pub fn cumulative_fraction(&self, k: usize) -> f64 {
        self.rows[k - 1].cumulative_percent / 100.0
    }
}

/// Percentages are relative to the number of variables (the trace of a
/// correlation matrix).
pub fn variance_explained(eigenvalues: &[f64]) -> VarianceExplained {
    let trace = eigenvalues.len() as f64;
    let mut cumulative = 0.0;
    let rows = eigenvalues
        .iter()
        .map(|&eigenvalue| {
            cumulative += eigenvalue;
            VarianceRow {
                eigenvalue,
                cumulative_eigenvalue: cumulative,
                percent: eigenvalue / trace * 100.0,
                cumulative_percent: cumulative / trace * 100.0,
            }
        })
        .collect();
    VarianceExplained { rows }
}

/// Correlations (loadings) and determination coefficients between the
/// components (rows) and the variables (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplanationTable {
    pub loading: Matrix,
    pub determination: Matrix,
    /// Σ over variables: the part of each component's variance.
    pub row_sums: Vec<f64>,
    /// Σ over the kept components: reconstruction level of each variable.
    pub column_sums: Vec<f64>,
    /// Row sums divided by the number of variables.
    pub row_averages: Vec<f64>,
    /// Average of the column sums.
    pub overall_average: f64,
}

impl ExplanationTable {
    pub fn n_components(&self) -> usize {
        self.loading.rows()
    }

    pub fn n_variables(&self) -> usize {
        self.loading.cols()
    }

    /// Same table restricted to the first `k` components.
    pub fn truncated(&self, k: usize) -> Result<ExplanationTable> {
        check_k(k, self.n_components())?;
        Ok(Self::from_loading(self.loading.truncate_rows(k)))
    }

    /// Cumulative determination of variable `j` over the first `k` rows.
    pub fn reconstruction(&self, j: usize, k: usize) -> f64 {
        (0..k).map(|i| self.determination[(i, j)]).sum()
    }

    fn from_loading(loading: Matrix) -> Self {
        let determination = loading.map(|x| x * x);
        let (k, n) = (determination.rows(), determination.cols());
        let row_sums: Vec<f64> = (0..k).map(|i| determination.row(i).iter().sum()).collect();
        let column_sums: Vec<f64> = (0..n)
            .map(|j| (0..k).map(|i| determination[(i, j)]).sum())
            .collect();
        let row_averages = row_sums.iter().map(|s| s / n as f64).collect();
        let overall_average = column_sums.iter().sum::<f64>() / n as f64;
        Self {
            loading,
            determination,
            row_sums,
            column_sums,
            row_averages,
            overall_average,
        }
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidComponentCount { k, n })
    } else {
        Ok(())
    }
}

/// Loading rows are the rows of `A'`. With `k`, only the first `k`
/// components are kept.
pub fn explanation_table(vr: &VirtualRepresentation, k: Option<usize>) -> Result<ExplanationTable> {
    let full = ExplanationTable::from_loading(vr.a_prime.clone());
    match k {
        Some(k) => full.truncated(k),
        None => Ok(full),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Smallest k whose cumulative variance fraction reaches the threshold.
    Percentage,
    /// Elbow of the scree plot.
    Scree,
    /// Number of eigenvalues not less than one.
    EigenvalueGeOne,
    /// Smallest k for which every variable's reconstruction level reaches
    /// the threshold.
    PerVariable,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::Percentage,
        Criterion::Scree,
        Criterion::EigenvalueGeOne,
        Criterion::PerVariable,
    ];

    pub fn uses_threshold(self) -> bool {
        matches!(self, Criterion::Percentage | Criterion::PerVariable)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Percentage => "percentage",
            Criterion::Scree => "scree",
            Criterion::EigenvalueGeOne => "eigenvalue",
            Criterion::PerVariable => "per-variable",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "percentage" => Ok(Criterion::Percentage),
            "scree" => Ok(Criterion::Scree),
            "eigenvalue" | "eigenvalue-ge-1" => Ok(Criterion::EigenvalueGeOne),
            "per-variable" | "per_variable" => Ok(Criterion::PerVariable),
            other => Err(format!(
                "unknown criterion '{other}' (expected percentage|scree|eigenvalue|per-variable)"
            )),
        }
    }
}

/// Evidence behind a selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionDetail {
    Percentage {
        threshold: f64,
        cumulative_fraction: Vec<f64>,
    },
    Scree {
        /// λ_k − 2λ_{k+1} + λ_{k+2} for k = 1..=n−2.
        second_differences: Vec<f64>,
        /// 1-based vertex of maximal curvature; `None` when there is no elbow.
        elbow: Option<usize>,
        no_elbow: bool,
    },
    EigenvalueGeOne {
        count: usize,
    },
    PerVariable {
        threshold: f64,
        /// For each k = 1..=n, the weakest variable's reconstruction level.
        min_reconstruction: Vec<f64>,
        /// Reconstruction level of every variable at the selected k.
        per_variable_at_k: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub criterion: Criterion,
    pub k: usize,
    pub detail: SelectionDetail,
}

/// Curvature below this is treated as a straight (or convex-free) run.
const FLAT_CURVATURE: f64 = 1e-12;

pub fn select_components(
    eigenvalues: &[f64],
    expl: &ExplanationTable,
    criterion: Criterion,
    threshold: f64,
) -> Result<SelectionResult> {
    let n = eigenvalues.len();
    if n == 0 {
        return Err(Error::InvalidComponentCount { k: 0, n: 0 });
    }
    if criterion.uses_threshold() && !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidThreshold {
            context: "pcacore",
            value: threshold,
            range: "(0, 1]",
        });
    }
    let (k, detail) = match criterion {
        Criterion::Percentage => {
            let ve = variance_explained(eigenvalues);
            let cumulative_fraction: Vec<f64> = ve.rows.iter().map(|r| r.cumulative_percent / 100.0).collect();
            let k = first_reaching(&cumulative_fraction, threshold);
            (
                k,
                SelectionDetail::Percentage {
                    threshold,
                    cumulative_fraction,
                },
            )
        }
        Criterion::EigenvalueGeOne => {
            let count = eigenvalues.iter().filter(|&&l| l >= 1.0 - THRESHOLD_SLACK).count();
            (count.max(1), SelectionDetail::EigenvalueGeOne { count })
        }
        Criterion::Scree => {
            let second_differences: Vec<f64> = eigenvalues
                .windows(3)
                .map(|w| w[0] - 2.0 * w[1] + w[2])
                .collect();
            let elbow = scree_elbow(&second_differences);
            // the elbow vertex is the last point still on the slope
            let k = elbow.unwrap_or(1);
            (
                k,
                SelectionDetail::Scree {
                    second_differences,
                    elbow,
                    no_elbow: elbow.is_none(),
                },
            )
        }
        Criterion::PerVariable => {
            if expl.n_components() < n || expl.n_variables() == 0 {
                return Err(Error::InvalidComponentCount {
                    k: expl.n_components(),
                    n,
                });
            }
            let n_vars = expl.n_variables();
            let min_reconstruction: Vec<f64> = (1..=n)
                .map(|k| {
                    (0..n_vars)
                        .map(|j| expl.reconstruction(j, k))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let k = first_reaching(&min_reconstruction, threshold);
            let per_variable_at_k = (0..n_vars).map(|j| expl.reconstruction(j, k)).collect();
            (
                k,
                SelectionDetail::PerVariable {
                    threshold,
                    min_reconstruction,
                    per_variable_at_k,
                },
            )
        }
    };
    Ok(SelectionResult { criterion, k, detail })
}

/// 1-based index of the first entry reaching `threshold`; the last index if
/// none does.
fn first_reaching(cumulative: &[f64], threshold: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| c >= threshold - THRESHOLD_SLACK)
        .map_or(cumulative.len(), |i| i + 1)
}

/// Vertex (1-based) with the largest second difference; ties go to the
/// earliest. `second_differences[i]` is centred on vertex i + 2.
fn scree_elbow(second_differences: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &d) in second_differences.iter().enumerate() {
        if d <= FLAT_CURVATURE {
            continue;
        }
        if best.is_none_or(|(_, b)| d > b) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i + 2)
}

/// Points of the scree plot: (component number, eigenvalue).
pub fn scree_data(eigenvalues: &[f64]) -> Vec<(usize, f64)> {
    eigenvalues.iter().enumerate().map(|(i, &l)| (i + 1, l)).collect()
}
