//! Pairwise correlations and the matrices derived from them: two-tailed
//! significance levels, angles between centered variables, and coefficients
//! of determination.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DataMatrix, StandardizedMatrix, MIN_ROWS};
use crate::linalg::{dot, Matrix};
use crate::special::student_t_two_tailed;

const FIXTURE_TOLERANCE: f64 = 1e-12;

/// Cosine of the angle between the centered vectors `x` and `y`.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            context: "corrstats",
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < MIN_ROWS {
        return Err(Error::Correlation(format!(
            "need at least {MIN_ROWS} observations, got {}",
            x.len()
        )));
    }
    let cx = centered(x);
    let cy = centered(y);
    let nx = dot(&cx, &cx).sqrt();
    let ny = dot(&cy, &cy).sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::Correlation("constant vector has no direction".into()));
    }
    Ok((dot(&cx, &cy) / (nx * ny)).clamp(-1.0, 1.0))
}

fn centered(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// Symmetric correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    names: Vec<String>,
    n_obs: usize,
    r: Matrix,
}

#[derive(Deserialize)]
struct FixtureFile {
    names: Vec<String>,
    n_obs: usize,
    r: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Validates a supplied matrix. The upper triangle is mirrored into the
    /// lower one after checking symmetry.
    pub fn new(names: Vec<String>, n_obs: usize, r: Matrix) -> Result<Self> {
        let n = r.rows();
        if !r.is_square() || n == 0 {
            return Err(Error::Fixture(format!("matrix must be square, got {}x{}", r.rows(), r.cols())));
        }
        if names.len() != n {
            return Err(Error::Fixture(format!("{} names for a {n}x{n} matrix", names.len())));
        }
        if n_obs < MIN_ROWS {
            return Err(Error::Fixture(format!("n_obs must be at least {MIN_ROWS}, got {n_obs}")));
        }
        let mut m = r;
        for i in 0..n {
            if !m[(i, i)].is_finite() || (m[(i, i)] - 1.0).abs() > FIXTURE_TOLERANCE {
                return Err(Error::Fixture(format!("diagonal entry {} is {}, expected 1", i + 1, m[(i, i)])));
            }
            m[(i, i)] = 1.0;
            for j in i + 1..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::Fixture(format!("entry ({}, {}) is not finite", i + 1, j + 1)));
                }
                if (a - b).abs() > FIXTURE_TOLERANCE {
                    return Err(Error::Fixture(format!("not symmetric at ({}, {}): {a} vs {b}", i + 1, j + 1)));
                }
                if a.abs() > 1.0 + FIXTURE_TOLERANCE {
                    return Err(Error::Fixture(format!("entry ({}, {}) = {a} outside [-1, 1]", i + 1, j + 1)));
                }
                let a = a.clamp(-1.0, 1.0);
                m[(i, j)] = a;
                m[(j, i)] = a;
            }
        }
        Ok(Self { names, n_obs, r: m })
    }

    /// Parses `{ "names": [...], "n_obs": int, "r": [[...]] }`.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: FixtureFile = serde_json::from_str(text)?;
        let width = f.r.first().map_or(0, Vec::len);
        if f.r.iter().any(|row| row.len() != width) {
            return Err(Error::Fixture("ragged matrix rows".into()));
        }
        Self::new(f.names, f.n_obs, Matrix::from_rows(&f.r))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }

    /// Correlations straight from raw columns.
    pub fn from_data(data: &DataMatrix) -> Result<Self> {
        Self::from_columns(data.values(), data.column_names())
    }

    fn from_columns(values: &Matrix, names: &[String]) -> Result<Self> {
        let n = values.cols();
        let cols: Vec<Vec<f64>> = (0..n).map(|j| values.column(j)).collect();
        let mut r = Matrix::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                let v = correlation(&cols[i], &cols[j])?;
                r[(i, j)] = v;
                r[(j, i)] = v;
            }
        }
        Ok(Self {
            names: names.to_vec(),
            n_obs: values.rows(),
            r,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn matrix(&self) -> &Matrix {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.r.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[(i, j)]
    }
}

/// Correlation matrix of the standardized variables. Identical to the one of
/// the raw variables, whatever divisor was used.
pub fn correlation_matrix(z: &StandardizedMatrix) -> Result<CorrelationMatrix> {
    CorrelationMatrix::from_columns(z.values(), z.column_names())
}

/// Two-tailed p-value for H0: ρ = 0, via t = r·sqrt((n-2)/(1-r²)) with n-2
/// degrees of freedom.
pub fn significance(r: f64, n_obs: usize) -> Result<f64> {
    if n_obs < MIN_ROWS {
        return Err(Error::Correlation(format!(
            "significance needs at least {MIN_ROWS} observations, got {n_obs}"
        )));
    }
    if !(r.abs() <= 1.0) {
        return Err(Error::Correlation(format!("correlation {r} outside [-1, 1]")));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    let df = (n_obs - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    Ok(student_t_two_tailed(t, df).clamp(0.0, 1.0))
}

/// Angle in degrees between two variables with correlation `r`.
pub fn angle_deg(r: f64) -> f64 {
    r.clamp(-1.0, 1.0).acos().to_degrees()
}

pub fn angle_matrix(c: &CorrelationMatrix) -> Matrix {
    let n = c.dim();
    Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { angle_deg(c.get(i, j)) })
}

pub fn determination_matrix(c: &CorrelationMatrix) -> Matrix {
    c.matrix().map(|r| r * r)
}

pub fn p_value_matrix(c: &CorrelationMatrix) -> Result<Matrix> {
    let n = c.dim();
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = significance(c.get(i, j), c.n_obs())?;
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedMatrices {
    pub p_values: Matrix,
    pub angles_deg: Matrix,
    pub determination: Matrix,
}

impl DerivedMatrices {
    pub fn from_correlation(c: &CorrelationMatrix) -> Result<Self> {
        Ok(Self {
            p_values: p_value_matrix(c)?,
            angles_deg: angle_matrix(c),
            determination: determination_matrix(c),
        })
    }
}
