//! Rank-one and rank-two transformations between the standard base and the
//! eigenvector base, and the vector pictures of variables and components.
//!
//! A rank-zero quantity is unchanged by a change of base, so only vectors and
//! second-rank tensors get an operation here:
//!
//! | rank | to the new base | back to the old base |
//! |------|-----------------|----------------------|
//! | 1    | `v' = R v`      | `v = Rᵀ v'`          |
//! | 2    | `C' = R C Rᵀ`   | `C = Rᵀ C' R`        |

use serde::{Deserialize, Serialize};

use crate::corrstats::CorrelationMatrix;
use crate::eigensolve::EigenSystem;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const RELATION_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// standard base → eigenvector base
    ToNew,
    /// eigenvector base → standard base
    ToOld,
}

pub fn transform_vector(v: &[f64], r: &Matrix, direction: Direction) -> Result<Vec<f64>> {
    if !r.is_square() || r.cols() != v.len() {
        return Err(Error::Dimension {
            context: "tensorops",
            expected: r.cols(),
            got: v.len(),
        });
    }
    Ok(match direction {
        Direction::ToNew => r.mul_vec(v),
        Direction::ToOld => r.transpose().mul_vec(v),
    })
}

pub fn transform_rank2(m: &Matrix, r: &Matrix, direction: Direction) -> Result<Matrix> {
    if !r.is_square() || !m.is_square() || m.rows() != r.rows() {
        return Err(Error::Dimension {
            context: "tensorops",
            expected: r.rows(),
            got: m.rows(),
        });
    }
    let rt = r.transpose();
    Ok(match direction {
        Direction::ToNew => &(r * m) * &rt,
        Direction::ToOld => &(&rt * m) * r,
    })
}

/// Best-fitting plane rotation between two 2-D descriptions of one point.
///
/// The rotation maps old coordinates to new ones as `R(θ)·from` with
/// `R(θ) = [[cos θ, sin θ], [-sin θ, cos θ]]` (rows are the new axes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneRotationFit {
    pub angle_rad: f64,
    /// `‖R(θ)·from − to‖` at the optimum.
    pub residual: f64,
}

impl PlaneRotationFit {
    pub fn matrix(&self) -> Matrix {
        let (s, c) = self.angle_rad.sin_cos();
        Matrix::from_rows(&[vec![c, s], vec![-s, c]])
    }
}

/// Least-squares angle θ minimizing `‖R(θ)·from − to‖`.
pub fn fit_plane_rotation(from: [f64; 2], to: [f64; 2]) -> PlaneRotationFit {
    // ‖Rv − w‖² = ‖v‖² + ‖w‖² − 2 wᵀRv
    // wᵀRv = cos θ (v1 w1 + v2 w2) + sin θ (v2 w1 − v1 w2)
    let [v1, v2] = from;
    let [w1, w2] = to;
    let along = v1 * w1 + v2 * w2;
    let across = v2 * w1 - v1 * w2;
    let angle_rad = across.atan2(along);
    let fit = PlaneRotationFit {
        angle_rad,
        residual: 0.0,
    };
    let mapped = fit.matrix().mul_vec(&from);
    PlaneRotationFit {
        angle_rad,
        residual: ((mapped[0] - w1).powi(2) + (mapped[1] - w2).powi(2)).sqrt(),
    }
}

/// Vector pictures of the standardized variables (`A`, `A'`) and of the
/// principal components (`P`, `P'`) in both bases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirtualRepresentation {
    /// Variables in the eigenvector base; entry (i, j) is the loading of
    /// variable j on component i.
    pub a_prime: Matrix,
    /// Variables in the standard base; symmetric square root of C.
    pub a: Matrix,
    /// Components in the standard base, `(A')ᵀ`.
    pub p: Matrix,
    /// Components in the eigenvector base, `diag(√λ)`.
    pub p_prime: Matrix,
}

pub fn build_virtual(eigen: &EigenSystem) -> VirtualRepresentation {
    let n = eigen.dim();
    let u = eigen.u();
    let r = eigen.rotation();
    let roots: Vec<f64> = eigen.eigenvalues().iter().map(|l| l.sqrt()).collect();
    let a_prime = Matrix::from_fn(n, n, |i, j| u[(j, i)] * roots[i]);
    let a = &r.transpose() * &a_prime;
    let p = a_prime.transpose();
    let p_prime = r * &p;
    VirtualRepresentation {
        a_prime,
        a,
        p,
        p_prime,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub relation: String,
    pub max_abs_dev: f64,
    pub pass: bool,
}

/// Evaluates every expression of the tensor relationship table against the
/// stored matrices and reports the max elementwise deviation of each.
pub fn verify_relations(vr: &VirtualRepresentation, eigen: &EigenSystem, c: &CorrelationMatrix) -> Vec<RelationCheck> {
    let r = eigen.rotation();
    let rt = r.transpose();
    let a = &vr.a;
    let a_p = &vr.a_prime;
    let p = &vr.p;
    let p_p = &vr.p_prime;
    let cm = c.matrix();
    let c_p = eigen.c_prime();

    let at = a.transpose();
    let a_pt = a_p.transpose();
    let pt = p.transpose();
    let p_pt = p_p.transpose();

    let mul3 = |x: &Matrix, y: &Matrix, z: &Matrix| -> Matrix { &(x * y) * z };

    let checks: Vec<(&str, Matrix, &Matrix)> = vec![
        // from A
        ("A' = RA", r * a, a_p),
        ("P = ART", a * &rt, p),
        ("P' = RART", mul3(r, a, &rt), p_p),
        ("C = ATA", &at * a, cm),
        ("C' = RATART", mul3(r, &(&at * a), &rt), c_p),
        // from A'
        ("A = RTA'", &rt * a_p, a),
        ("P = (A')T", a_pt.clone(), p),
        ("P' = R(A')T", r * &a_pt, p_p),
        ("C = (A')TA'", &a_pt * a_p, cm),
        ("C' = R(A')TA'RT", mul3(r, &(&a_pt * a_p), &rt), c_p),
        // from P
        ("A = PR", p * r, a),
        ("A' = PT", pt.clone(), a_p),
        ("P' = RP", r * p, p_p),
        ("C = RTPTPR", mul3(&rt, &(&pt * p), r), cm),
        ("C' = PTP", &pt * p, c_p),
        // from P'
        ("A = RTP'R", mul3(&rt, p_p, r), a),
        ("A' = P'R", p_p * r, a_p),
        ("P = RTP'", &rt * p_p, p),
        ("C = RT(P')TP'R", mul3(&rt, &(&p_pt * p_p), r), cm),
        ("C' = (P')TP'", &p_pt * p_p, c_p),
        // rank-two change of base
        ("C' = RCRT", mul3(r, cm, &rt), c_p),
        ("C = RTC'R", mul3(&rt, c_p, r), cm),
    ];

    checks
        .into_iter()
        .map(|(name, lhs, rhs)| {
            let dev = lhs.max_abs_diff(rhs);
            RelationCheck {
                relation: name.to_string(),
                max_abs_dev: dev,
                pass: dev <= RELATION_TOLERANCE,
            }
        })
        .collect()
}
