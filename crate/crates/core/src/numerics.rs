//! Small dense linear algebra shared by the solvers: rank-revealing
//! nullspaces, minimum-norm least squares and subspace comparison.
//!
//! Rank decisions are singular-value based and deterministic; the relative
//! tolerance is a parameter because the conditioning of assembled systems
//! depends on the law.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative singular-value cutoff for rank decisions.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// A linear subspace of R^ambient_dim with an orthonormal column basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub ambient_dim: usize,
    /// ambient_dim x k, orthonormal columns.
    pub basis: DMatrix<f64>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Distance of a unit vector to the subspace (sine of the angle).
    pub fn sin_angle(&self, v: &DVector<f64>) -> f64 {
        let norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let residual = v - self.project(v);
        (residual.norm() / norm).min(1.0)
    }
}

/// Orthonormal basis of {v : A v = 0}; singular values below
/// `rel_tol * sigma_max` count as zero. An all-zero (or empty) matrix yields
/// the full ambient space.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> Subspace {
    let p = a.ncols();
    // nalgebra only returns min(m, p) right singular vectors; pad with zero
    // rows so the full V factor is available.
    let m = a.nrows();
    let work = if m < p {
        let mut padded = DMatrix::zeros(p, p);
        padded.view_mut((0, 0), (m, p)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = svd.singular_values.max();
    let cut = rel_tol * sigma_max;
    let mut rows: Vec<usize> = Vec::new();
    for (idx, s) in svd.singular_values.iter().enumerate() {
        if sigma_max == 0.0 || *s < cut {
            rows.push(idx);
        }
    }
    // right singular vectors beyond the computed spectrum (never happens
    // after padding, kept for safety)
    for idx in svd.singular_values.len()..v_t.nrows() {
        rows.push(idx);
    }
    let mut basis = DMatrix::zeros(p, rows.len());
    for (col, &r) in rows.iter().enumerate() {
        basis.set_column(col, &v_t.row(r).transpose());
    }
    Subspace {
        ambient_dim: p,
        basis,
    }
}

/// Orthonormal basis of the column space of `a`.
pub fn column_space(a: &DMatrix<f64>, rel_tol: f64) -> Subspace {
    let ambient = a.nrows();
    if a.ncols() == 0 {
        return Subspace {
            ambient_dim: ambient,
            basis: DMatrix::zeros(ambient, 0),
        };
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("svd requested u");
    let sigma_max = svd.singular_values.max();
    let cut = DEFAULT_REL_TOL.max(rel_tol) * sigma_max;
    let mut cols = Vec::new();
    for (idx, s) in svd.singular_values.iter().enumerate() {
        if sigma_max > 0.0 && *s >= cut {
            cols.push(idx);
        }
    }
    let mut basis = DMatrix::zeros(ambient, cols.len());
    for (col, &c) in cols.iter().enumerate() {
        basis.set_column(col, &u.column(c));
    }
    Subspace {
        ambient_dim: ambient,
        basis,
    }
}

/// Minimum-norm minimizer of ||A v + b||_2 and the achieved residual.
///
/// Note the sign: system rows are written `residual = row . v + constant`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    assert_eq!(a.nrows(), b.len());
    let svd = a.clone().svd(true, true);
    let rhs = -b;
    let sol = svd
        .solve(&rhs, DEFAULT_REL_TOL * svd.singular_values.max().max(f64::MIN_POSITIVE))
        .expect("svd solve");
    let residual = (a * &sol + b).norm();
    (sol, residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceRelation {
    Equal,
    USubsetV,
    VSubsetU,
    Incomparable,
}

/// Largest principal angle (radians) of the span of `small` into `large`.
fn containment_angle(small: &Subspace, large: &Subspace) -> f64 {
    if small.dim() == 0 {
        return 0.0;
    }
    if small.dim() > large.dim() {
        return std::f64::consts::FRAC_PI_2;
    }
    let m = small.basis.transpose() * &large.basis;
    let sv = m.svd(false, false).singular_values;
    // cos of the largest principal angle is the smallest singular value
    let c = sv.min().clamp(-1.0, 1.0);
    c.acos()
}

/// Classify two subspaces by principal angles at tolerance `tol` (radians).
pub fn subspace_compare(u: &Subspace, v: &Subspace, tol: f64) -> Result<SubspaceRelation> {
    if u.ambient_dim != v.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "subspace ambient dims {} vs {}",
            u.ambient_dim, v.ambient_dim
        )));
    }
    let u_in_v = containment_angle(u, v) < tol;
    let v_in_u = containment_angle(v, u) < tol;
    Ok(match (u_in_v, v_in_u) {
        (true, true) => SubspaceRelation::Equal,
        (true, false) => SubspaceRelation::USubsetV,
        (false, true) => SubspaceRelation::VSubsetU,
        (false, false) => SubspaceRelation::Incomparable,
    })
}
