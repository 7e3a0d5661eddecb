//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use geopca::corrstats::CorrelationMatrix;
use geopca::ingest::{self, ColumnRef, ColumnSelector, CsvOptions, DataMatrix};
use geopca::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NAMES: [&str; 4] = ["Sepal Length", "Sepal Width", "Petal Length", "Petal Width"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn printed_correlation() -> CorrelationMatrix {
    CorrelationMatrix::load_json(fixture_path("paper_corr.json")).expect("fixture loads")
}

pub fn iris() -> DataMatrix {
    let opts = CsvOptions {
        has_header: true,
        columns: Some("1-4".parse::<ColumnSelector>().unwrap()),
        label_column: Some(ColumnRef::Index(5)),
    };
    ingest::load_csv(fixture_path("iris.csv"), &opts).expect("iris loads")
}

/// Correlation matrix of `n` random unit vectors in `dim` dimensions.
pub fn random_correlation(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> CorrelationMatrix {
    let vs: Vec<Vec<f64>> = (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if l > 1e-3 {
                break v.into_iter().map(|x| x / l).collect();
            }
        })
        .collect();
    let mut m = Matrix::from_fn(n, n, |i, j| vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum());
    for i in 0..n {
        m[(i, i)] = 1.0;
    }
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    let names = (0..n).map(|i| format!("x{i}")).collect();
    CorrelationMatrix::new(names, 30, m).expect("valid correlation")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Number of eigenvalues of symmetric `m` strictly below `sigma`, from the
/// inertia of the LDLᵀ factorization of `m − σI`.
pub fn count_below(m: &Matrix, sigma: f64) -> usize {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)] - if i == j { sigma } else { 0.0 }).collect())
        .collect();
    let mut negatives = 0;
    for k in 0..n {
        let mut d = a[k][k];
        if d == 0.0 {
            d = -1e-300;
        }
        if d < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let l = a[i][k] / d;
            for j in k + 1..n {
                a[i][j] -= l * a[k][j];
            }
        }
    }
    negatives
}

/// All eigenvalues, descending, by bisection on the inertia count.
pub fn bisection_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let bound = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    // the i-th smallest eigenvalue is the σ where the count passes i
    let mut ascending: Vec<f64> = (0..n)
        .map(|i| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(m, mid) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    ascending.reverse();
    ascending
}

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Γ((df+1)/2) / Γ(df/2) for integer df, by the half-step recurrence.
fn gamma_half_ratio(df: u32) -> f64 {
    // Γ(x+1) = xΓ(x); start from Γ(1)/Γ(1/2) or Γ(3/2)/Γ(1)
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let (mut ratio, mut d) = if df % 2 == 1 { (1.0 / sqrt_pi, 1) } else { (sqrt_pi / 2.0, 2) };
    while d < df {
        // ratio(d + 2) = ratio(d) · ((d+1)/2) / (d/2)
        ratio *= (d as f64 + 1.0) / d as f64;
        d += 2;
    }
    ratio
}

pub fn t_density(x: f64, df: u32) -> f64 {
    let v = df as f64;
    gamma_half_ratio(df) / (v * std::f64::consts::PI).sqrt() * (1.0 + x * x / v).powf(-(v + 1.0) / 2.0)
}

pub fn t_cdf_by_quadrature(t: f64, df: u32) -> f64 {
    let half = simpson(&|x| t_density(x, df), 0.0, t.abs(), 1e-13);
    0.5 + t.signum() * half
}

/// Every assignment of `n` items to exactly `k` non-empty labelled groups,
/// with group ids in order of first appearance.
pub fn set_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, k: usize, used: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            if used == k {
                out.push(cur.clone());
            }
            return;
        }
        for g in 0..(used + 1).min(k) {
            cur.push(g);
            go(i + 1, n, k, used.max(g + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Within-group sum of squared distances to the group mean.
pub fn sse(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    (0..k)
        .map(|g| {
            let members: Vec<&Vec<f64>> = points.iter().zip(labels).filter(|(_, &l)| l == g).map(|(p, _)| p).collect();
            let dim = points[0].len();
            (0..dim)
                .map(|d| {
                    let mean = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
                    members.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum()
}

/// Within-group sum of absolute deviations from the coordinate-wise median.
pub fn sad(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    (0..k)
        .map(|g| {
            let members: Vec<&Vec<f64>> = points.iter().zip(labels).filter(|(_, &l)| l == g).map(|(p, _)| p).collect();
            let dim = points[0].len();
            (0..dim)
                .map(|d| {
                    let mut v: Vec<f64> = members.iter().map(|p| p[d]).collect();
                    v.sort_by(f64::total_cmp);
                    let med = v[(v.len() - 1) / 2];
                    v.iter().map(|x| (x - med).abs()).sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum()
}

/// Minimum of `cost` over every partition into exactly `k` groups.
pub fn exhaustive_minimum(points: &[Vec<f64>], k: usize, cost: fn(&[Vec<f64>], &[usize], usize) -> f64) -> f64 {
    set_partitions(points.len(), k)
        .iter()
        .map(|labels| cost(points, labels, k))
        .fold(f64::INFINITY, f64::min)
}
