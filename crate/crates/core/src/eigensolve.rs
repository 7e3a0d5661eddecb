//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Output conventions, relied upon by every downstream table:
//!
//! * eigenvalues descending;
//! * eigenvalues equal within [`TIE_TOLERANCE`] are ordered by the index of
//!   their eigenvector's largest-magnitude component, ascending;
//! * the first eigenvector component with magnitude above [`SIGN_EPS`] is
//!   positive.
//!
//! The rotation matrix `R = Uᵀ` has the eigenvectors as rows, so `R·v`
//! expresses a standard-base vector in the eigenvector base.

use serde::Serialize;

use crate::corrstats::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MAX_SWEEPS: usize = 100;
pub const RELATIVE_OFF_TOLERANCE: f64 = 1e-12;
pub const TIE_TOLERANCE: f64 = 1e-10;
pub const SIGN_EPS: f64 = 1e-9;
/// Eigenvalues of a correlation matrix above `-NEGATIVE_CLAMP` are clamped
/// to zero; anything lower is rejected.
pub const NEGATIVE_CLAMP: f64 = 1e-10;
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-8;

/// Sorted eigenpairs of a real symmetric matrix. Columns of `vectors` are
/// the unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

/// Diagonalizes a symmetric matrix.
pub fn jacobi(m: &Matrix) -> Result<SymmetricEigen> {
    if !m.is_square() {
        return Err(Error::Dimension {
            context: "eigensolve",
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let threshold = RELATIVE_OFF_TOLERANCE * m.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let raw: Vec<f64> = a.diagonal();
    Ok(order_eigenpairs(&raw, &v, sweeps))
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating a[p][q]: a ← Gᵀ a G, v ← v G.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn dominant_index(col: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > col[best].abs() {
            best = i;
        }
    }
    best
}

fn order_eigenpairs(values: &[f64], vectors: &Matrix, sweeps: usize) -> SymmetricEigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    // within each block of tied eigenvalues order by dominant component
    let mut start = 0;
    while start < n {
        let lead = values[order[start]];
        let mut end = start + 1;
        while end < n && (lead - values[order[end]]).abs() <= TIE_TOLERANCE {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| (dominant_index(&vectors.column(k)), k));
        start = end;
    }

    let mut sorted = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = vectors.column(src);
        let sign = match col.iter().find(|x| x.abs() > SIGN_EPS) {
            Some(x) if *x < 0.0 => -1.0,
            _ => 1.0,
        };
        for i in 0..n {
            sorted[(i, dst)] = sign * col[i];
        }
    }
    SymmetricEigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: sorted,
        sweeps,
    }
}

/// Eigen-structure of a correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    /// Unit eigenvectors in columns.
    u: Matrix,
    /// Rotation into the eigenvector base, `Uᵀ`.
    r: Matrix,
    /// The correlation matrix in the eigenvector base, `diag(λ)`.
    c_prime: Matrix,
    #[serde(skip)]
    sweeps: usize,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn rotation(&self) -> &Matrix {
        &self.r
    }

    pub fn c_prime(&self) -> &Matrix {
        &self.c_prime
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }
}

/// Diagonalizes a correlation matrix.
pub fn eigen_symmetric(c: &CorrelationMatrix) -> Result<EigenSystem> {
    let dec = jacobi(c.matrix())?;
    let mut eigenvalues = dec.values;
    for lambda in &mut eigenvalues {
        if *lambda < -NEGATIVE_CLAMP {
            return Err(Error::NotPositiveSemidefinite(*lambda));
        }
        if *lambda < 0.0 {
            *lambda = 0.0;
        }
    }
    let r = rotation_from_eigenvectors(&dec.vectors)?;
    Ok(EigenSystem {
        c_prime: Matrix::from_diagonal(&eigenvalues),
        eigenvalues,
        u: dec.vectors,
        r,
        sweeps: dec.sweeps,
    })
}

/// `R = Uᵀ` for an orthonormal `U`.
pub fn rotation_from_eigenvectors(u: &Matrix) -> Result<Matrix> {
    if !u.is_square() {
        return Err(Error::Dimension {
            context: "eigensolve",
            expected: u.rows(),
            got: u.cols(),
        });
    }
    let err = u.orthonormality_error();
    if !(err <= ORTHONORMAL_TOLERANCE) {
        return Err(Error::NotOrthonormal(err));
    }
    Ok(u.transpose())
}
