//! Dense helpers shared by the projection modules.
//!
//! All rank decisions use a relative cutoff: a singular value counts as zero
//! when it is below `RANK_TOL` times the largest singular value.

use nalgebra::{DMatrix, DVector, SVD};

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Euclidean operator norm (largest singular value). Zero for empty matrices.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Singular values sorted in decreasing order.
pub fn singular_values_desc(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values_desc(m);
    match s.first() {
        None => 0,
        Some(&top) if top == 0.0 => 0,
        Some(&top) => s.iter().filter(|&&x| x > RANK_TOL * top).count(),
    }
}

/// Singular value decomposition `m = U diag(sigma) V^t` by one-sided
/// (Hestenes) Jacobi rotations on the columns of `m`.
///
/// `u` is `rows x cols` with unit columns wherever `sigma > 0` (zero columns
/// otherwise), `v` is a full `cols x cols` orthogonal matrix. Values are not
/// sorted. Used wherever singular vectors matter: the bidiagonal SVD in
/// nalgebra 0.35 returns inaccurate vectors for nearly singular inputs.
#[derive(Debug, Clone)]
pub struct JacobiSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

pub fn jacobi_svd(m: &DMatrix<f64>) -> JacobiSvd {
    let (rows, cols) = m.shape();
    let mut u = m.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut u, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = DVector::zeros(cols);
    for j in 0..cols {
        let norm = u.column(j).norm();
        sigma[j] = norm;
        if norm > 0.0 {
            u.column_mut(j).unscale_mut(norm);
        }
    }
    debug_assert_eq!(u.nrows(), rows);
    JacobiSvd { u, sigma, v }
}

/// Thin SVD from nalgebra when it reconstructs `m` to near working
/// precision, otherwise [`jacobi_svd`]. `v` is thin in the first case.
fn checked_svd(m: &DMatrix<f64>) -> JacobiSvd {
    if let Some(svd) = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0) {
        if let (Some(u), Some(v_t)) = (svd.u, svd.v_t) {
            let scale = m.amax().max(f64::MIN_POSITIVE);
            let rebuilt = &u * DMatrix::from_diagonal(&svd.singular_values) * &v_t;
            let tol = 64.0 * f64::EPSILON * scale * (m.nrows().max(m.ncols()) as f64).sqrt();
            if (rebuilt - m).amax() <= tol {
                return JacobiSvd {
                    u,
                    sigma: svd.singular_values,
                    v: v_t.transpose(),
                };
            }
        }
    }
    jacobi_svd(m)
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = c * a - s * b;
        m[(i, q)] = s * a + c * b;
    }
}

/// Orthonormal basis of the column space of `m`, ordered by decreasing
/// singular value.
pub fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = checked_svd(m);
    let order = sorted_indices(&svd.sigma);
    let top = svd.sigma[order[0]];
    if top == 0.0 {
        return DMatrix::zeros(rows, 0);
    }
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.sigma[i] > RANK_TOL * top)
        .collect();
    DMatrix::from_fn(rows, keep.len(), |r, c| svd.u[(r, keep[c])])
}

/// Orthonormal basis of the null space of `m` (possibly with zero columns),
/// ordered by increasing singular value.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    let svd = jacobi_svd(m);
    let top = svd.sigma.iter().fold(0.0_f64, |a, &s| a.max(s));
    let mut null: Vec<usize> = (0..cols)
        .filter(|&i| top == 0.0 || svd.sigma[i] <= RANK_TOL * top)
        .collect();
    null.sort_by(|&a, &b| svd.sigma[a].total_cmp(&svd.sigma[b]));
    DMatrix::from_fn(cols, null.len(), |r, c| svd.v[(r, null[c])])
}

/// Orthonormal basis of the orthogonal complement of the column space of `basis`.
pub fn orthogonal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    if basis.ncols() == 0 {
        return DMatrix::identity(basis.nrows(), basis.nrows());
    }
    null_space(&basis.transpose())
}

/// Horizontal concatenation of equally tall matrices.
pub fn hstack(blocks: &[&DMatrix<f64>], rows: usize) -> DMatrix<f64> {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Vertical concatenation of equally wide matrices.
pub fn vstack(blocks: &[&DMatrix<f64>], cols: usize) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

/// `||P^2 - P||` in the Euclidean operator norm.
pub fn idempotence_defect(p: &DMatrix<f64>) -> f64 {
    op_norm(&(p * p - p))
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol * m.amax().max(1.0)
}

/// Largest absolute coordinate of `v - w`.
pub fn max_abs_diff(v: &DVector<f64>, w: &DVector<f64>) -> f64 {
    (v - w).amax()
}

fn sorted_indices(values: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let n = null_space(&m);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).amax() < 1e-14);
        assert!((n.transpose() * &n - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn column_space_drops_dependent_columns() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(column_space(&m).ncols(), 2);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn zero_matrix_has_empty_column_space() {
        let m = DMatrix::<f64>::zeros(4, 2);
        assert_eq!(column_space(&m).ncols(), 0);
        assert_eq!(null_space(&m).ncols(), 2);
        assert_eq!(op_norm(&m), 0.0);
    }

    #[test]
    fn jacobi_reconstructs_nearly_singular_matrix() {
        // I - E for a symmetric E rescaled to spectral radius one.
        let m = DMatrix::from_row_slice(3, 3, &[1.0, -0.5, -0.5, -0.5, 1.0, -0.5, -0.5, -0.5, 1.0]);
        let svd = jacobi_svd(&m);
        let rebuilt = &svd.u * DMatrix::from_diagonal(&svd.sigma) * svd.v.transpose();
        assert!((rebuilt - &m).amax() < 1e-14);
        assert!((svd.v.transpose() * &svd.v - DMatrix::identity(3, 3)).amax() < 1e-14);
        let null = null_space(&m);
        assert_eq!(null.ncols(), 1);
        assert!((&m * null).amax() < 1e-14);
    }

    #[test]
    fn op_norm_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -3.0, 2.0]));
        assert!((op_norm(&m) - 3.0).abs() < 1e-14);
    }
}
