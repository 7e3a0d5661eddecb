//! Clustering of variables (columns) by their similarity to the retained
//! principal components.
//!
//! A variable's similarity profile is its column of determination
//! coefficients against the first k components. Two clustering rules are
//! offered: the threshold rule, which puts a variable in the cluster of the
//! component it shares at least half its variance with, and k-means over the
//! profiles with a choice of metric.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::pcacore::ExplanationTable;

pub const DEFAULT_NAIVE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 100;
pub const UNASSIGNED: &str = "unassigned";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityProfile {
    pub variable: String,
    /// Determination against pc1..pck.
    pub similarity: Vec<f64>,
}

/// One profile per variable, in column order.
pub fn similarity_profiles(expl: &ExplanationTable, names: &[String]) -> Result<Vec<SimilarityProfile>> {
    if names.len() != expl.n_variables() {
        return Err(Error::Dimension {
            context: "varcluster",
            expected: expl.n_variables(),
            got: names.len(),
        });
    }
    if expl.n_components() == 0 {
        return Err(Error::InvalidComponentCount {
            k: 0,
            n: expl.n_variables(),
        });
    }
    Ok(names
        .iter()
        .enumerate()
        .map(|(j, name)| SimilarityProfile {
            variable: name.clone(),
            similarity: expl.determination.column(j),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Kmeans,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "naive" => Ok(Method::Naive),
            "kmeans" | "k-means" => Ok(Method::Kmeans),
            other => Err(format!("unknown clustering method '{other}' (expected naive|kmeans)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    L2,
    Linf,
    Cosine,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::L1, Metric::L2, Metric::Linf, Metric::Cosine];

    /// Per-point cost minimized by k-means: squared distance for l2, plain
    /// distance for l1 and linf, 1 − cosine similarity for cosine.
    pub fn cost(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            Metric::Linf => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
            Metric::Cosine => {
                let denom = norm(a) * norm(b);
                if denom == 0.0 {
                    1.0
                } else {
                    1.0 - dot(a, b) / denom
                }
            }
        }
    }

    /// Candidate centre for a cluster under this metric.
    fn centre(self, members: &[&[f64]]) -> Vec<f64> {
        let dim = members[0].len();
        match self {
            Metric::L1 => (0..dim)
                .map(|d| {
                    let mut v: Vec<f64> = members.iter().map(|m| m[d]).collect();
                    v.sort_by(f64::total_cmp);
                    let mid = v.len() / 2;
                    if v.len() % 2 == 1 {
                        v[mid]
                    } else {
                        0.5 * (v[mid - 1] + v[mid])
                    }
                })
                .collect(),
            Metric::L2 | Metric::Linf => mean(members, dim),
            Metric::Cosine => {
                let units: Vec<Vec<f64>> = members
                    .iter()
                    .map(|m| {
                        let l = norm(m);
                        m.iter().map(|x| x / l).collect()
                    })
                    .collect();
                let refs: Vec<&[f64]> = units.iter().map(Vec::as_slice).collect();
                let mut c = mean(&refs, dim);
                let l = norm(&c);
                if l > 0.0 {
                    c.iter_mut().for_each(|x| *x /= l);
                }
                c
            }
        }
    }
}

fn mean(members: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for m in members {
        for (o, x) in out.iter_mut().zip(m.iter()) {
            *o += x;
        }
    }
    out.iter_mut().for_each(|x| *x /= members.len() as f64);
    out
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::L1 => "l1",
            Metric::L2 => "l2",
            Metric::Linf => "linf",
            Metric::Cosine => "cosine",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "l1" | "manhattan" => Ok(Metric::L1),
            "l2" | "euclidean" => Ok(Metric::L2),
            "linf" | "chebyshev" => Ok(Metric::Linf),
            "cosine" => Ok(Metric::Cosine),
            other => Err(format!("unknown metric '{other}' (expected l1|l2|linf|cosine)")),
        }
    }
}

/// Variable → cluster mapping. `None` marks the leftover "unassigned" group.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub method: Method,
    pub metric: Option<Metric>,
    pub variables: Vec<String>,
    pub assignments: Vec<Option<usize>>,
    /// Name of cluster id i.
    pub cluster_names: Vec<String>,
    /// k-means only: within-cluster cost of the kept restart.
    pub objective: Option<f64>,
    /// Variables excluded from k-means (zero profile under cosine).
    pub flagged: Vec<String>,
}

impl ClusterAssignment {
    /// Named clusters in id order, followed by "unassigned" when non-empty.
    pub fn clusters(&self) -> IndexMap<String, Vec<String>> {
        let mut out: IndexMap<String, Vec<String>> = IndexMap::new();
        for name in &self.cluster_names {
            out.insert(name.clone(), Vec::new());
        }
        let mut leftovers = Vec::new();
        for (var, a) in self.variables.iter().zip(&self.assignments) {
            match a {
                Some(id) => out[*id].push(var.clone()),
                None => leftovers.push(var.clone()),
            }
        }
        if !leftovers.is_empty() {
            out.insert(UNASSIGNED.to_string(), leftovers);
        }
        out
    }

    /// Clusters as sets of variable indices (empty clusters dropped), for
    /// comparing partitions irrespective of naming.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut groups: IndexMap<Option<usize>, Vec<usize>> = IndexMap::new();
        for (i, a) in self.assignments.iter().enumerate() {
            groups.entry(*a).or_default().push(i);
        }
        let mut parts: Vec<Vec<usize>> = groups.into_values().collect();
        parts.sort();
        parts
    }
}

#[derive(Serialize)]
struct AssignmentJson<'a> {
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<Metric>,
    clusters: IndexMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    flagged: &'a [String],
}

impl Serialize for ClusterAssignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AssignmentJson {
            method: self.method,
            metric: self.metric,
            clusters: self.clusters(),
            objective: self.objective,
            flagged: &self.flagged,
        }
        .serialize(s)
    }
}

/// Threshold rule: a variable joins the cluster of pc_i when its similarity
/// to pc_i is not less than `threshold`. Several qualifying components are
/// resolved by largest similarity, then lowest index.
pub fn cluster_naive(profiles: &[SimilarityProfile], threshold: f64) -> Result<ClusterAssignment> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidThreshold {
            context: "varcluster",
            value: threshold,
            range: "(0, 1]",
        });
    }
    let k = profiles.first().map_or(0, |p| p.similarity.len());
    let assignments = profiles
        .iter()
        .map(|p| {
            let mut best: Option<(usize, f64)> = None;
            for (i, &s) in p.similarity.iter().enumerate() {
                if s >= threshold && best.is_none_or(|(_, b)| s > b) {
                    best = Some((i, s));
                }
            }
            best.map(|(i, _)| i)
        })
        .collect();
    Ok(ClusterAssignment {
        method: Method::Naive,
        metric: None,
        variables: profiles.iter().map(|p| p.variable.clone()).collect(),
        assignments,
        cluster_names: (1..=k).map(|i| format!("pc{i}")).collect(),
        objective: None,
        flagged: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmeansOptions {
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// Result of one seeded Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct KmeansRun {
    pub seed: u64,
    /// Cluster index per point, before canonical relabelling.
    pub labels: Vec<usize>,
    pub objective: f64,
    /// Objective after initialisation and after every iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Within-cluster cost of `labels` with the best available centres.
pub fn partition_objective(points: &[Vec<f64>], labels: &[usize], k: usize, metric: Metric) -> f64 {
    (0..k)
        .map(|c| {
            let members: Vec<&[f64]> = points
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p.as_slice())
                .collect();
            if members.is_empty() {
                return 0.0;
            }
            let centre = metric.centre(&members);
            members.iter().map(|m| metric.cost(m, &centre)).sum::<f64>()
        })
        .sum()
}

/// One k-means run: farthest-point initialisation from a seed-chosen start,
/// then Lloyd iterations until the assignment stops changing.
pub fn kmeans_run(points: &[Vec<f64>], k: usize, metric: Metric, seed: u64, max_iterations: usize) -> KmeansRun {
    let start = seeded_start(seed, points.len());
    kmeans_from_start(points, k, metric, seed, start, max_iterations)
}

fn seeded_start(seed: u64, n: usize) -> usize {
    ChaCha8Rng::seed_from_u64(seed).gen_range(0..n)
}

fn kmeans_from_start(
    points: &[Vec<f64>],
    k: usize,
    metric: Metric,
    seed: u64,
    start: usize,
    max_iterations: usize,
) -> KmeansRun {
    let n = points.len();
    assert!(k >= 1 && k <= n && start < n);

    let mut centres: Vec<Vec<f64>> = vec![points[start].clone()];
    while centres.len() < k {
        let mut far = 0;
        let mut far_d = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            let d = centres.iter().map(|c| metric.cost(p, c)).fold(f64::INFINITY, f64::min);
            if d > far_d {
                far = i;
                far_d = d;
            }
        }
        centres.push(points[far].clone());
    }

    let cost_of = |labels: &[usize], centres: &[Vec<f64>]| -> f64 {
        labels
            .iter()
            .zip(points)
            .map(|(&l, p)| metric.cost(p, &centres[l]))
            .sum()
    };

    let mut labels = assign(points, &centres, metric);
    refill_empty(points, &mut labels, &mut centres, metric);
    let mut history = vec![cost_of(&labels, &centres)];
    let mut converged = false;

    for _ in 0..max_iterations {
        // update: a cluster adopts its candidate centre only if that does not
        // raise its cost, which keeps the objective monotone for every metric
        for c in 0..k {
            let members: Vec<&[f64]> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p.as_slice())
                .collect();
            if members.is_empty() {
                continue;
            }
            let candidate = metric.centre(&members);
            let old: f64 = members.iter().map(|m| metric.cost(m, &centres[c])).sum();
            let new: f64 = members.iter().map(|m| metric.cost(m, &candidate)).sum();
            if new <= old {
                centres[c] = candidate;
            }
        }
        let mut next = assign_sticky(points, &centres, &labels, metric);
        refill_empty(points, &mut next, &mut centres, metric);
        let objective = cost_of(&next, &centres);
        let prev = *history.last().unwrap();
        debug_assert!(objective <= prev + 1e-12 * prev.abs().max(1.0), "k-means objective increased");
        history.push(objective);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }

    KmeansRun {
        seed,
        objective: *history.last().unwrap(),
        labels,
        history,
        converged,
    }
}

fn assign(points: &[Vec<f64>], centres: &[Vec<f64>], metric: Metric) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centre) in centres.iter().enumerate() {
                let d = metric.cost(p, centre);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Reassignment that keeps a point in its current cluster unless another
/// centre is strictly closer, so equal-cost ties cannot cycle.
fn assign_sticky(points: &[Vec<f64>], centres: &[Vec<f64>], current: &[usize], metric: Metric) -> Vec<usize> {
    points
        .iter()
        .zip(current)
        .map(|(p, &cur)| {
            let mut best = cur;
            let mut best_d = metric.cost(p, &centres[cur]);
            for (c, centre) in centres.iter().enumerate() {
                let d = metric.cost(p, centre);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Gives every empty cluster the point farthest from its own centre, taken
/// from clusters that can spare one.
fn refill_empty(points: &[Vec<f64>], labels: &mut [usize], centres: &mut [Vec<f64>], metric: Metric) {
    let k = centres.len();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = metric.cost(p, &centres[labels[i]]);
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        let Some(i) = far else { return };
        labels[i] = empty;
        centres[empty] = points[i].clone();
    }
}

/// Relabels clusters so ids follow the lowest member index.
fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: IndexMap<usize, usize> = IndexMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// k-means over similarity profiles; the best of `opts.restarts` runs is
/// kept, ties going to the earliest restart.
pub fn cluster_kmeans(
    profiles: &[SimilarityProfile],
    k_clusters: usize,
    metric: Metric,
    seed: u64,
    opts: KmeansOptions,
) -> Result<ClusterAssignment> {
    let variables: Vec<String> = profiles.iter().map(|p| p.variable.clone()).collect();
    // zero profiles have no direction under the cosine metric
    let (usable, flagged): (Vec<usize>, Vec<usize>) = (0..profiles.len())
        .partition(|&i| metric != Metric::Cosine || norm(&profiles[i].similarity) > 0.0);

    if k_clusters == 0 || k_clusters > profiles.len() {
        return Err(Error::InvalidClusterCount {
            k: k_clusters,
            n: profiles.len(),
        });
    }
    let k_eff = k_clusters.min(usable.len());
    let points: Vec<Vec<f64>> = usable.iter().map(|&i| profiles[i].similarity.clone()).collect();

    let mut assignments = vec![None; profiles.len()];
    let mut objective = None;
    if k_eff > 0 {
        // restart r starts from point (base + r) mod n, so restarts cycle
        // through every possible start before repeating one
        let base = seeded_start(seed, points.len());
        let best = (0..opts.restarts.max(1))
            .map(|r| {
                let start = (base + r) % points.len();
                kmeans_from_start(&points, k_eff, metric, seed.wrapping_add(r as u64), start, opts.max_iterations)
            })
            .reduce(|best, run| if run.objective < best.objective { run } else { best })
            .unwrap();
        for (&i, l) in usable.iter().zip(canonical_labels(&best.labels)) {
            assignments[i] = Some(l);
        }
        objective = Some(best.objective);
    }

    Ok(ClusterAssignment {
        method: Method::Kmeans,
        metric: Some(metric),
        variables: variables.clone(),
        assignments,
        cluster_names: (1..=k_eff).map(|i| format!("cluster{i}")).collect(),
        objective,
        flagged: flagged.iter().map(|&i| variables[i].clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles(rows: &[(&str, &[f64])]) -> Vec<SimilarityProfile> {
        rows.iter()
            .map(|(n, s)| SimilarityProfile {
                variable: n.to_string(),
                similarity: s.to_vec(),
            })
            .collect()
    }

    fn table14() -> Vec<SimilarityProfile> {
        profiles(&[
            ("Sepal Length", &[0.812, 0.097]),
            ("Sepal Width", &[0.129, 0.863]),
            ("Petal Length", &[0.972, 0.001]),
            ("Petal Width", &[0.936, 0.001]),
        ])
    }

    #[test]
    fn naive_on_printed_similarities() {
        let a = cluster_naive(&table14(), 0.5).unwrap();
        let c = a.clusters();
        assert_eq!(c["pc1"], ["Sepal Length", "Petal Length", "Petal Width"]);
        assert_eq!(c["pc2"], ["Sepal Width"]);
        assert!(!c.contains_key(UNASSIGNED));
    }

    #[test]
    fn naive_boundary_and_leftovers() {
        let a = cluster_naive(&profiles(&[("a", &[0.3, 0.3]), ("b", &[0.5, 0.2])]), 0.5).unwrap();
        assert_eq!(a.assignments, vec![None, Some(0)]);
        assert_eq!(a.clusters()[UNASSIGNED], ["a"]);
        // low threshold: largest similarity wins, then lowest index
        let a = cluster_naive(&profiles(&[("a", &[0.3, 0.4]), ("b", &[0.35, 0.35])]), 0.3).unwrap();
        assert_eq!(a.assignments, vec![Some(1), Some(0)]);
        assert!(cluster_naive(&table14(), 0.0).is_err());
    }

    #[test]
    fn json_layout() {
        let a = cluster_naive(&table14(), 0.5).unwrap();
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["method"], "naive");
        assert_eq!(v["clusters"]["pc2"][0], "Sepal Width");
        let keys: Vec<_> = v["clusters"].as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["pc1", "pc2"]);
    }

    #[test]
    fn kmeans_identical_points_single_cluster() {
        let p = profiles(&[("a", &[0.4, 0.2]), ("b", &[0.4, 0.2]), ("c", &[0.4, 0.2])]);
        let a = cluster_kmeans(&p, 1, Metric::L2, 3, KmeansOptions::default()).unwrap();
        assert_eq!(a.assignments, vec![Some(0); 3]);
        assert_eq!(a.objective, Some(0.0));
    }

    #[test]
    fn kmeans_one_cluster_per_variable() {
        let a = cluster_kmeans(&table14(), 4, Metric::L1, 0, KmeansOptions::default()).unwrap();
        assert_eq!(a.partition(), vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(a.assignments, vec![Some(0), Some(1), Some(2), Some(3)]);
    }

    #[test]
    fn kmeans_rejects_bad_k() {
        assert!(cluster_kmeans(&table14(), 0, Metric::L2, 0, KmeansOptions::default()).is_err());
        assert!(cluster_kmeans(&table14(), 5, Metric::L2, 0, KmeansOptions::default()).is_err());
    }

    #[test]
    fn cosine_flags_zero_profiles() {
        let p = profiles(&[("a", &[1.0]), ("b", &[0.0]), ("c", &[0.0])]);
        let a = cluster_kmeans(&p, 1, Metric::Cosine, 0, KmeansOptions::default()).unwrap();
        assert_eq!(a.flagged, ["b", "c"]);
        assert_eq!(a.assignments, vec![Some(0), None, None]);
        assert_eq!(a.clusters()[UNASSIGNED], ["b", "c"]);
    }

    #[test]
    fn empty_cluster_refilled() {
        // three points coincide: farthest-point init picks duplicates for k = 2
        let pts = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]];
        let run = kmeans_run(&pts, 2, Metric::L2, 1, 100);
        let mut counts = [0; 2];
        run.labels.iter().for_each(|&l| counts[l] += 1);
        assert!(counts.iter().all(|&c| c > 0));
    }

    #[test]
    fn canonical_relabelling() {
        assert_eq!(canonical_labels(&[2, 0, 2, 1]), vec![0, 1, 0, 2]);
    }
}
