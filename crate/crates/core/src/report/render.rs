//! One table model feeding both the Markdown and the CSV renderers.
//!
//! Every numeric cell remembers the JSON pointer of the value it displays in
//! `report.json`, so a rendered cell can always be traced back to (and
//! re-derived from) the full-precision report.

use std::fmt::Write as _;

use crate::linalg::Matrix;
use crate::pcacore::{ExplanationTable, SelectionDetail};

use super::{AnalysisReport, Section};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFormat {
    Fixed(usize),
    Scientific(usize),
}

impl CellFormat {
    pub fn format(self, x: f64) -> String {
        match self {
            CellFormat::Fixed(d) => {
                let s = format!("{x:.d$}");
                // a rounded-away negative sign carries no information
                if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
                    s[1..].to_string()
                } else {
                    s
                }
            }
            CellFormat::Scientific(d) => format!("{x:.d$e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num {
        value: f64,
        format: CellFormat,
        /// JSON pointer into the serialized report.
        pointer: String,
    },
    Text(String),
}

impl Cell {
    pub fn text(&self) -> String {
        match self {
            Cell::Num { value, format, .. } => format.format(*value),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Stable identifier, used as the first CSV column.
    pub id: String,
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<(String, Vec<Cell>)>,
}

impl Table {
    fn new(id: &str, title: &str, corner: &str, columns: &[String]) -> Self {
        let mut header = vec![corner.to_string()];
        header.extend(columns.iter().cloned());
        Self {
            id: id.into(),
            title: title.into(),
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, label: impl Into<String>, cells: Vec<Cell>) {
        self.rows.push((label.into(), cells));
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "## {}\n", self.title);
        let esc = |s: &str| s.replace('|', "\\|");
        let header: Vec<String> = self.header.iter().map(|h| esc(h)).collect();
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let rule: Vec<&str> = std::iter::once("---")
            .chain(std::iter::repeat_n("---:", self.header.len() - 1))
            .collect();
        let _ = writeln!(out, "|{}|", rule.join("|"));
        for (label, cells) in &self.rows {
            let mut parts = vec![esc(label)];
            parts.extend(cells.iter().map(|c| esc(&c.text())));
            let _ = writeln!(out, "| {} |", parts.join(" | "));
        }
        out
    }
}

fn num(value: f64, format: CellFormat, pointer: String) -> Cell {
    Cell::Num { value, format, pointer }
}

const F3: CellFormat = CellFormat::Fixed(3);
const F2: CellFormat = CellFormat::Fixed(2);
const SCI: CellFormat = CellFormat::Scientific(2);

fn pc_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("pc{i}")).collect()
}

fn matrix_table(
    id: &str,
    title: &str,
    m: &Matrix,
    row_labels: &[String],
    col_labels: &[String],
    pointer: &str,
    format: CellFormat,
) -> Table {
    let mut t = Table::new(id, title, "", col_labels);
    for (i, label) in row_labels.iter().enumerate() {
        let cells = (0..m.cols())
            .map(|j| num(m[(i, j)], format, format!("{pointer}/{i}/{j}")))
            .collect();
        t.push(label.clone(), cells);
    }
    t
}

fn explanation_tables(id: &str, label: &str, e: &ExplanationTable, names: &[String], ptr: &str) -> Vec<Table> {
    let pcs = pc_names(e.n_components());
    let loading = matrix_table(
        &format!("{id}_loading"),
        &format!("Correlation between components and variables ({label})"),
        &e.loading,
        &pcs,
        names,
        &format!("{ptr}/loading"),
        F3,
    );
    let mut cols = names.to_vec();
    cols.push("Sum".into());
    cols.push("Average".into());
    let mut det = Table::new(
        &format!("{id}_determination"),
        &format!("Determination between components and variables ({label})"),
        "",
        &cols,
    );
    for (i, pc) in pcs.iter().enumerate() {
        let mut cells: Vec<Cell> = (0..e.n_variables())
            .map(|j| num(e.determination[(i, j)], F3, format!("{ptr}/determination/{i}/{j}")))
            .collect();
        cells.push(num(e.row_sums[i], F3, format!("{ptr}/row_sums/{i}")));
        cells.push(num(e.row_averages[i], F3, format!("{ptr}/row_averages/{i}")));
        det.push(pc.clone(), cells);
    }
    let mut sums: Vec<Cell> = e
        .column_sums
        .iter()
        .enumerate()
        .map(|(j, &s)| num(s, F3, format!("{ptr}/column_sums/{j}")))
        .collect();
    sums.push(Cell::Text(String::new()));
    sums.push(num(e.overall_average, F3, format!("{ptr}/overall_average")));
    det.push("Sum", sums);
    vec![loading, det]
}

fn summary_table(id: &str, title: &str, rows: &[(String, &crate::ingest::ColumnSummary)], ptr: &str) -> Table {
    let cols = ["Mean", "Std dev", "Variance"].map(String::from);
    let mut t = Table::new(id, title, "", &cols);
    for (j, (label, s)) in rows.iter().enumerate() {
        t.push(
            label.clone(),
            vec![
                num(s.mean, F3, format!("{ptr}/{j}/mean")),
                num(s.std_dev, F3, format!("{ptr}/{j}/std_dev")),
                num(s.variance, F3, format!("{ptr}/{j}/variance")),
            ],
        );
    }
    t
}

fn selection_note(detail: &SelectionDetail) -> String {
    match detail {
        SelectionDetail::Percentage { threshold, .. } => format!("cumulative variance >= {threshold}"),
        SelectionDetail::Scree { elbow: Some(e), .. } => format!("elbow at component {e}"),
        SelectionDetail::Scree { .. } => "no elbow".into(),
        SelectionDetail::EigenvalueGeOne { count } => format!("{count} eigenvalue(s) >= 1"),
        SelectionDetail::PerVariable { threshold, .. } => {
            format!("every variable reconstructed >= {threshold}")
        }
    }
}

/// Every table of the report, in presentation order.
pub fn tables(report: &AnalysisReport) -> Vec<Table> {
    let names = &report.variables;
    let n = names.len();
    let pcs = pc_names(n);
    let mut out = Vec::new();

    if let Section::Available(summaries) = &report.column_summaries {
        let rows: Vec<_> = names.iter().cloned().zip(summaries.iter()).collect();
        out.push(summary_table(
            "variables",
            "Variable summaries",
            &rows,
            "/column_summaries",
        ));
    }
    out.push(matrix_table("correlation", "Correlation matrix", &report.correlation, names, names, "/correlation", F3));
    out.push(matrix_table("p_values", "Two-tailed p-values", &report.p_values, names, names, "/p_values", F3));
    out.push(matrix_table("angles", "Angles between variables (degrees)", &report.angles_deg, names, names, "/angles_deg", F3));
    out.push(matrix_table(
        "determination",
        "Determination coefficients",
        &report.determination,
        names,
        names,
        "/determination",
        F3,
    ));

    let mut ve = Table::new(
        "variance",
        "Variance explained",
        "",
        &["Eigenvalue", "Cumulative", "Percent", "Cumulative percent"].map(String::from),
    );
    for (i, row) in report.variance_explained.rows.iter().enumerate() {
        let p = format!("/variance_explained/rows/{i}");
        ve.push(
            pcs[i].clone(),
            vec![
                num(row.eigenvalue, F3, format!("{p}/eigenvalue")),
                num(row.cumulative_eigenvalue, F3, format!("{p}/cumulative_eigenvalue")),
                num(row.percent, F2, format!("{p}/percent")),
                num(row.cumulative_percent, F2, format!("{p}/cumulative_percent")),
            ],
        );
    }
    out.push(ve);
    out.push(matrix_table("eigenvectors", "Eigenvectors (columns)", report.eigen.u(), names, &pcs, "/eigen/u", F3));
    out.push(matrix_table("rotation", "Rotation matrix R", report.eigen.rotation(), &pcs, names, "/eigen/r", F3));

    if let Section::Available(scores) = &report.scores {
        let rows: Vec<String> = (1..=scores.first_rows.rows()).map(|i| format!("obs {i}")).collect();
        out.push(matrix_table(
            "scores",
            "Principal component scores (first observations)",
            &scores.first_rows,
            &rows,
            &pcs,
            "/scores/first_rows",
            F3,
        ));
        let rows: Vec<_> = pcs.iter().cloned().zip(scores.summaries.iter()).collect();
        out.push(summary_table("score_summaries", "Score summaries", &rows, "/scores/summaries"));
    }

    let vr = &report.virtual_representation;
    // rows of A and P are the standard-base axes
    let axes: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    out.push(matrix_table("a_prime", "Variables in the eigenvector base (A')", &vr.a_prime, &pcs, names, "/virtual_representation/a_prime", F3));
    out.push(matrix_table("a", "Variables in the standard base (A)", &vr.a, &axes, names, "/virtual_representation/a", F3));
    out.push(matrix_table("p", "Components in the standard base (P)", &vr.p, &axes, &pcs, "/virtual_representation/p", F3));
    out.push(matrix_table("p_prime", "Components in the eigenvector base (P')", &vr.p_prime, &pcs, &pcs, "/virtual_representation/p_prime", F3));

    out.extend(explanation_tables("full", "all components", &report.explanation_full, names, "/explanation_full"));
    let k = report.explanation_truncated.n_components();
    out.extend(explanation_tables(
        "kept",
        &format!("first {k} components"),
        &report.explanation_truncated,
        names,
        "/explanation_truncated",
    ));

    let mut sel = Table::new("selection", "Component selection", "Criterion", &["k".into(), "Basis".into()]);
    for s in &report.selection {
        sel.push(s.criterion.to_string(), vec![Cell::Text(s.k.to_string()), Cell::Text(selection_note(&s.detail))]);
    }
    out.push(sel);

    let kp = pc_names(k);
    let mut sim = Table::new("similarity", "Similarity of variables to kept components", "", &kp);
    for (j, p) in report.similarity.iter().enumerate() {
        let cells = p
            .similarity
            .iter()
            .enumerate()
            .map(|(i, &s)| num(s, F3, format!("/similarity/{j}/similarity/{i}")))
            .collect();
        sim.push(p.variable.clone(), cells);
    }
    out.push(sim);

    let mut cl = Table::new("clusters", "Variable clusters", "Cluster", &["Variables".into()]);
    for (name, members) in report.clusters.clusters() {
        cl.push(name, vec![Cell::Text(members.join(", "))]);
    }
    out.push(cl);

    let mut rel = Table::new("relations", "Tensor relation checks", "Relation", &["Max deviation".into(), "Pass".into()]);
    for (i, r) in report.relations.iter().enumerate() {
        rel.push(
            r.relation.clone(),
            vec![
                num(r.max_abs_dev, SCI, format!("/relations/{i}/max_abs_dev")),
                Cell::Text(if r.pass { "yes" } else { "no" }.into()),
            ],
        );
    }
    out.push(rel);
    out
}

pub fn render_markdown(report: &AnalysisReport) -> String {
    let p = &report.provenance;
    let mut out = String::from("# Geometric PCA report\n\n");
    let _ = writeln!(out, "- input: `{}` ({})", p.input, p.input_kind);
    let _ = writeln!(out, "- variables: {}", report.variables.len());
    let _ = writeln!(out, "- observations: {}", report.n_obs);
    let _ = writeln!(out, "- divisor: {:?}", p.divisor);
    let _ = writeln!(out, "- criterion: {} (threshold {})", p.criterion, p.threshold);
    let _ = writeln!(out, "- components kept: {} (requested {})", p.k, p.k_requested);
    match report.clusters.method {
        crate::varcluster::Method::Naive => {
            let _ = writeln!(out, "- clustering: naive (threshold {})", p.naive_threshold);
        }
        crate::varcluster::Method::Kmeans => {
            let _ = writeln!(out, "- clustering: kmeans (metric {}, seed {})", p.metric, p.seed);
        }
    }
    let _ = writeln!(
        out,
        "- relation checks: {}/{} pass",
        report.relations.iter().filter(|r| r.pass).count(),
        report.relations.len()
    );
    out.push('\n');
    if let Section::Unavailable(why) = &report.column_summaries {
        let _ = writeln!(out, "Variable summaries: {why}\n");
    }
    if let Section::Unavailable(why) = &report.scores {
        let _ = writeln!(out, "Scores: {why}\n");
    }
    for t in tables(report) {
        out.push_str(&t.to_markdown());
        out.push('\n');
    }
    out
}

/// Long-format CSV: one line per cell with columns table, row, column, value.
pub fn render_csv(report: &AnalysisReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["table", "row", "column", "value"]).expect("in-memory write");
    for t in tables(report) {
        for (label, cells) in &t.rows {
            for (col, cell) in t.header[1..].iter().zip(cells) {
                w.write_record([t.id.as_str(), label, col, &cell.text()])
                    .expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
