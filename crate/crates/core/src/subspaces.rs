//! Finite-dimensional subspaces, projections onto them, and the quantities
//! that feed the interaction matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_TOL};
use crate::specmat::InteractionMatrix;

/// Relative tolerance for `||P^2 - P||` on constructed projections.
pub const IDEMPOTENCE_TOL: f64 = 1e-10;

/// A subspace of `R^d` given by a full-column-rank basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() == 0 {
            return Err(Error::Dimension(
                "ambient dimension must be positive".into(),
            ));
        }
        if basis.ncols() == 0 {
            return Err(Error::Dimension(
                "a subspace basis needs at least one column".into(),
            ));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension("basis has non-finite entries".into()));
        }
        let rank = linalg::rank(&basis);
        if rank < basis.ncols() {
            return Err(Error::Rank {
                rank,
                expected: basis.ncols(),
            });
        }
        Ok(Self { basis })
    }

    /// Subspace spanned by the given vectors (one column each).
    pub fn from_vectors(vectors: &[DVector<f64>]) -> Result<Self> {
        let d = vectors.first().map_or(0, |v| v.len());
        if vectors.iter().any(|v| v.len() != d) {
            return Err(Error::Dimension("spanning vectors differ in length".into()));
        }
        Self::new(DMatrix::from_columns(vectors))
    }

    /// The zero subspace; only produced by [`kernel_intersection`].
    fn zero(ambient_dim: usize) -> Self {
        Self {
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.ncols() == 0
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        if self.is_zero() {
            return v.norm();
        }
        let q = linalg::column_space(&self.basis);
        (v - &q * (q.transpose() * v)).norm()
    }
}

/// Same subspace with an orthonormal basis (`Q^t Q = I`), obtained from a
/// Householder QR with column signs fixed so that `diag(R) > 0`.
pub fn orthonormal_basis(s: &Subspace) -> Result<Subspace> {
    let qr = s.basis.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    let k = s.dim();
    let scale = r.diagonal().amax();
    for c in 0..k {
        let rc = r[(c, c)];
        if !(rc.abs() > RANK_TOL * scale) {
            return Err(Error::Rank {
                rank: c,
                expected: k,
            });
        }
        if rc < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    Ok(Subspace { basis: q })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Orthogonal,
    Oblique,
}

/// A square idempotent matrix together with an orthonormal basis of its range.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOperator {
    matrix: DMatrix<f64>,
    range_basis: DMatrix<f64>,
    kind: ProjectionKind,
    norm: f64,
}

impl ProjectionOperator {
    /// Validates idempotence (`||P^2 - P|| <= 1e-10 max(1, ||P||)`) and
    /// records the range. The kind is orthogonal when `P` is symmetric.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "projection must be a nonempty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = linalg::idempotence_defect(&matrix);
        if !(defect <= IDEMPOTENCE_TOL * linalg::op_norm(&matrix).max(1.0)) {
            return Err(Error::NotIdempotent { defect });
        }
        Ok(Self::from_matrix_unchecked(matrix))
    }

    /// Builds the operator without the idempotence check; used for limits
    /// of iterations whose accuracy is tracked separately.
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        let kind = if linalg::is_symmetric(&matrix, 1e-12) {
            ProjectionKind::Orthogonal
        } else {
            ProjectionKind::Oblique
        };
        let range_basis = linalg::column_space(&matrix);
        let norm = linalg::op_norm(&matrix);
        Self {
            matrix,
            range_basis,
            kind,
            norm,
        }
    }

    /// Builds the operator from a matrix whose orthonormal range basis and
    /// operator norm are already known.
    pub(crate) fn from_parts_unchecked(
        matrix: DMatrix<f64>,
        range_basis: DMatrix<f64>,
        norm: f64,
    ) -> Self {
        let kind = if linalg::is_symmetric(&matrix, 1e-12) {
            ProjectionKind::Orthogonal
        } else {
            ProjectionKind::Oblique
        };
        Self {
            matrix,
            range_basis,
            kind,
            norm,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn range_basis(&self) -> &DMatrix<f64> {
        &self.range_basis
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.range_basis.ncols()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn idempotence_defect(&self) -> f64 {
        linalg::idempotence_defect(&self.matrix)
    }

    /// Range as a [`Subspace`]; fails for the zero projection.
    pub fn range(&self) -> Result<Subspace> {
        Subspace::new(self.range_basis.clone())
    }
}

pub fn orthogonal_projection(s: &Subspace) -> Result<ProjectionOperator> {
    let q = orthonormal_basis(s)?;
    let p = &q.basis * q.basis.transpose();
    Ok(ProjectionOperator {
        matrix: p,
        range_basis: q.basis,
        kind: ProjectionKind::Orthogonal,
        norm: 1.0,
    })
}

/// Projection onto `range` along `kernel`, where the two subspaces together
/// span the ambient space: with `M = [B_range | B_kernel]`,
/// `P = B_range * (first k rows of M^-1)`.
pub fn oblique_projection(range: &Subspace, kernel: &Subspace) -> Result<ProjectionOperator> {
    let d = range.ambient_dim();
    if kernel.ambient_dim() != d {
        return Err(Error::Dimension(
            "range and kernel live in different spaces".into(),
        ));
    }
    if range.dim() + kernel.dim() != d {
        return Err(Error::Dimension(format!(
            "dim(range) + dim(kernel) = {} + {} != {d}",
            range.dim(),
            kernel.dim()
        )));
    }
    let q_range = orthonormal_basis(range)?;
    let q_kernel = if kernel.is_zero() {
        kernel.clone()
    } else {
        orthonormal_basis(kernel)?
    };
    let m = linalg::hstack(&[&q_range.basis, &q_kernel.basis], d);
    let sv = linalg::singular_values_desc(&m);
    let smallest = sv.last().copied().unwrap_or(0.0);
    if !(smallest > RANK_TOL * sv[0]) {
        return Err(Error::Singular);
    }
    let inv = m.try_inverse().ok_or(Error::Singular)?;
    let k = range.dim();
    let p = &q_range.basis * inv.rows(0, k);
    let norm = linalg::op_norm(&p);
    Ok(ProjectionOperator {
        matrix: p,
        range_basis: q_range.basis,
        kind: ProjectionKind::Oblique,
        norm,
    })
}

/// Projection onto `target` that vanishes on `annihilate`: oblique projection
/// along `annihilate + (target + annihilate)^perp`.
pub fn annihilating_projection(
    target: &Subspace,
    annihilate: &Subspace,
) -> Result<ProjectionOperator> {
    let d = target.ambient_dim();
    if annihilate.ambient_dim() != d {
        return Err(Error::Dimension(
            "subspaces live in different spaces".into(),
        ));
    }
    let joint = linalg::hstack(&[&target.basis, &annihilate.basis], d);
    if linalg::rank(&joint) < target.dim() + annihilate.dim() {
        return Err(Error::Intersection);
    }
    let complement = linalg::orthogonal_complement(&joint);
    let kernel_basis = linalg::hstack(&[&annihilate.basis, &complement], d);
    let kernel = Subspace::new(kernel_basis)?;
    oblique_projection(target, &kernel).map_err(|e| match e {
        Error::Singular => Error::Intersection,
        other => other,
    })
}

/// `||P|_S||`: the largest singular value of `P Q` with `Q` an orthonormal
/// basis of `S`. This is the exact restricted norm, not an upper bound.
pub fn restricted_norm(p: &ProjectionOperator, s: &Subspace) -> Result<f64> {
    if p.ambient_dim() != s.ambient_dim() {
        return Err(Error::Dimension(
            "projection and subspace dimensions differ".into(),
        ));
    }
    let q = orthonormal_basis(s)?;
    Ok(linalg::op_norm(&(&p.matrix * &q.basis)))
}

/// Subspaces `X_1..X_n` of a common `R^d` with projections `P_i` onto them.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSystem {
    ambient_dim: usize,
    subspaces: Vec<Subspace>,
    projections: Vec<ProjectionOperator>,
}

impl SubspaceSystem {
    /// Checks that every `P_i` has range exactly `X_i`.
    pub fn new(subspaces: Vec<Subspace>, projections: Vec<ProjectionOperator>) -> Result<Self> {
        if subspaces.is_empty() {
            return Err(Error::Dimension(
                "a system needs at least one subspace".into(),
            ));
        }
        if subspaces.len() != projections.len() {
            return Err(Error::Dimension(format!(
                "{} subspaces but {} projections",
                subspaces.len(),
                projections.len()
            )));
        }
        let d = subspaces[0].ambient_dim();
        for (i, (s, p)) in subspaces.iter().zip(&projections).enumerate() {
            if s.ambient_dim() != d || p.ambient_dim() != d {
                return Err(Error::Dimension(format!("subspace {i} is not in R^{d}")));
            }
            if p.rank() != s.dim() {
                return Err(Error::Dimension(format!(
                    "projection {i} has rank {} but subspace {i} has dimension {}",
                    p.rank(),
                    s.dim()
                )));
            }
            let fixed = (&p.matrix * &s.basis - &s.basis).amax();
            let scale = s.basis.amax() * p.norm().max(1.0);
            if fixed > 1e-9 * scale {
                return Err(Error::Dimension(format!(
                    "projection {i} does not fix subspace {i} (defect {fixed:e})"
                )));
            }
        }
        Ok(Self {
            ambient_dim: d,
            subspaces,
            projections,
        })
    }

    /// System with the orthogonal projections onto the given subspaces.
    pub fn orthogonal(subspaces: Vec<Subspace>) -> Result<Self> {
        let projections = subspaces
            .iter()
            .map(orthogonal_projection)
            .collect::<Result<Vec<_>>>()?;
        Self::new(subspaces, projections)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn n(&self) -> usize {
        self.subspaces.len()
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn projections(&self) -> &[ProjectionOperator] {
        &self.projections
    }

    /// The system restricted to `indices`, in that order.
    pub fn subsystem(&self, indices: &[usize]) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            subspaces: indices.iter().map(|&i| self.subspaces[i].clone()).collect(),
            projections: indices
                .iter()
                .map(|&i| self.projections[i].clone())
                .collect(),
        }
    }

    /// Concatenated bases `[B_1 | ... | B_n]`.
    pub fn concatenated_bases(&self) -> DMatrix<f64> {
        let refs: Vec<&DMatrix<f64>> = self.subspaces.iter().map(|s| &s.basis).collect();
        linalg::hstack(&refs, self.ambient_dim)
    }

    /// Orthonormal basis of `X_1 + ... + X_n`.
    pub fn sum_basis(&self) -> DMatrix<f64> {
        linalg::column_space(&self.concatenated_bases())
    }

    pub fn sum_dim(&self) -> usize {
        linalg::rank(&self.concatenated_bases())
    }

    pub fn total_dim(&self) -> usize {
        self.subspaces.iter().map(Subspace::dim).sum()
    }
}

/// Restricted norms at or below this multiple of `max(1, ||P_i||)` are
/// rounding noise and stored as exact zeros, so that the zero pattern (and
/// with it the block structure) of `E` is not destroyed by roundoff.
pub const INTERACTION_NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// `e_ij = ||P_i|_{X_j}||` for `i != j`, zero diagonal.
pub fn interaction_matrix(sys: &SubspaceSystem) -> Result<InteractionMatrix> {
    let n = sys.n();
    let mut e = DMatrix::zeros(n, n);
    for i in 0..n {
        let floor = INTERACTION_NOISE_FLOOR * sys.projections[i].norm().max(1.0);
        for j in 0..n {
            if i != j {
                let value = restricted_norm(&sys.projections[i], &sys.subspaces[j])?;
                e[(i, j)] = if value <= floor { 0.0 } else { value };
            }
        }
    }
    InteractionMatrix::new(e)
}

/// `ker(P_1) ∩ ... ∩ ker(P_n)` as the null space of the stacked matrix;
/// the result may be the zero subspace.
pub fn kernel_intersection(projections: &[ProjectionOperator]) -> Result<Subspace> {
    let first = projections
        .first()
        .ok_or_else(|| Error::Dimension("no projections given".into()))?;
    let d = first.ambient_dim();
    if projections.iter().any(|p| p.ambient_dim() != d) {
        return Err(Error::Dimension(
            "projections act on different spaces".into(),
        ));
    }
    let refs: Vec<&DMatrix<f64>> = projections.iter().map(|p| &p.matrix).collect();
    let stacked = linalg::vstack(&refs, d);
    let null = linalg::null_space(&stacked);
    if null.ncols() == 0 {
        Ok(Subspace::zero(d))
    } else {
        Ok(Subspace { basis: null })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_subspace, rng};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn col(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    fn span(vs: &[&[f64]]) -> Subspace {
        Subspace::from_vectors(&vs.iter().map(|v| col(v)).collect::<Vec<_>>()).unwrap()
    }

    fn line_at(theta: f64) -> Subspace {
        span(&[&[theta.cos(), theta.sin()]])
    }

    #[test]
    fn subspace_rejects_dependent_columns() {
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(
            Subspace::new(b),
            Err(Error::Rank {
                rank: 1,
                expected: 2
            })
        ));
    }

    #[test]
    fn orthonormal_basis_examples() {
        let s = orthonormal_basis(&span(&[&[2.0, 0.0]])).unwrap();
        assert_eq!(s.basis(), &DMatrix::from_row_slice(2, 1, &[1.0, 0.0]));
        let id = Subspace::new(DMatrix::identity(3, 3)).unwrap();
        let q = orthonormal_basis(&id).unwrap();
        assert!((q.basis() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn orthonormal_basis_matches_normal_equations() {
        let mut r = rng(7);
        let s = random_subspace(&mut r, 5, 2);
        let q = orthonormal_basis(&s).unwrap();
        let qtq = q.basis().transpose() * q.basis();
        assert!((qtq - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        let b = s.basis();
        let gram_inv = (b.transpose() * b).try_inverse().unwrap();
        let oracle = b * gram_inv * b.transpose();
        assert!(linalg::op_norm(&(q.basis() * q.basis().transpose() - oracle)) < 1e-10);
    }

    #[test]
    fn orthogonal_projection_examples() {
        let p = orthogonal_projection(&span(&[&[1.0, 0.0]])).unwrap();
        assert!((p.matrix() - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-15);
        let p = orthogonal_projection(&span(&[&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]])).unwrap();
        assert!((p.matrix() - DMatrix::from_element(2, 2, 0.5)).amax() < 1e-15);
        assert_eq!(p.kind(), ProjectionKind::Orthogonal);
    }

    #[test]
    fn orthogonal_projection_is_symmetric_idempotent() {
        let mut r = rng(11);
        for k in 1..=5 {
            let p = orthogonal_projection(&random_subspace(&mut r, 6, k)).unwrap();
            assert!(p.idempotence_defect() <= 1e-12);
            assert!((p.matrix() - p.matrix().transpose()).amax() <= 1e-14);
            assert_eq!(p.rank(), k);
        }
    }

    #[test]
    fn oblique_projection_examples() {
        let p = oblique_projection(&span(&[&[1.0, 0.0]]), &span(&[&[0.0, 1.0]])).unwrap();
        assert!((p.matrix() - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-15);
        let p = oblique_projection(&span(&[&[1.0, 0.0]]), &span(&[&[1.0, 1.0]])).unwrap();
        assert!(
            (p.matrix() - DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0])).amax() < 1e-14
        );
        assert_eq!(p.kind(), ProjectionKind::Oblique);
    }

    #[test]
    fn oblique_projection_defining_equations() {
        let mut r = rng(3);
        let range = random_subspace(&mut r, 5, 2);
        let kernel = random_subspace(&mut r, 5, 3);
        let p = oblique_projection(&range, &kernel).unwrap();
        assert!((p.matrix() * range.basis() - range.basis()).amax() < 1e-10);
        assert!((p.matrix() * kernel.basis()).amax() < 1e-10);
        assert!(p.idempotence_defect() < 1e-10);
    }

    #[test]
    fn oblique_projection_rejects_overlap() {
        let a = span(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let b = span(&[&[1.0, 1.0, 0.0]]);
        assert!(matches!(oblique_projection(&a, &b), Err(Error::Singular)));
    }

    #[test]
    fn annihilating_projection_examples() {
        let t = span(&[&[1.0, 0.0, 0.0]]);
        let a = span(&[&[0.0, 1.0, 0.0]]);
        let p = annihilating_projection(&t, &a).unwrap();
        assert!((p.matrix() * col(&[0.0, 1.0, 0.0])).amax() < 1e-15);
        assert!((p.matrix() * col(&[0.0, 0.0, 1.0])).amax() < 1e-15);
        assert!((p.matrix() * col(&[1.0, 0.0, 0.0]) - col(&[1.0, 0.0, 0.0])).amax() < 1e-15);

        assert!(matches!(
            annihilating_projection(&t, &t),
            Err(Error::Intersection)
        ));
    }

    #[test]
    fn annihilating_projection_random_lines() {
        let mut r = rng(5);
        for _ in 0..20 {
            let t = random_subspace(&mut r, 3, 1);
            let a = random_subspace(&mut r, 3, 1);
            let p = annihilating_projection(&t, &a).unwrap();
            assert!((p.matrix() * t.basis() - t.basis()).amax() < 1e-10);
            assert!((p.matrix() * a.basis()).amax() < 1e-10);
            assert!(p.idempotence_defect() < 1e-10);
            let pa = orthogonal_projection(&a).unwrap();
            assert!(linalg::op_norm(&(p.matrix() * pa.matrix())) < 1e-10);
        }
    }

    #[test]
    fn restricted_norm_examples() {
        let p = orthogonal_projection(&span(&[&[1.0, 0.0]])).unwrap();
        assert!(restricted_norm(&p, &span(&[&[0.0, 1.0]])).unwrap() < 1e-15);

        let a = -1.7;
        let p1 =
            ProjectionOperator::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, a, 0.0, 0.0]))
                .unwrap();
        let n = restricted_norm(&p1, &span(&[&[0.0, 1.0]])).unwrap();
        assert!((n - a.abs()).abs() < 1e-14);

        let p = orthogonal_projection(&line_at(0.0)).unwrap();
        let n = restricted_norm(&p, &line_at(PI / 3.0)).unwrap();
        assert!((n - 0.5).abs() < 1e-14);
    }

    #[test]
    fn interaction_matrix_of_skew_axes() {
        let (a, b) = (2.0, -3.0);
        let p1 =
            ProjectionOperator::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, a, 0.0, 0.0]))
                .unwrap();
        let p2 =
            ProjectionOperator::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, b, 1.0]))
                .unwrap();
        let sys = SubspaceSystem::new(
            vec![span(&[&[1.0, 0.0]]), span(&[&[0.0, 1.0]])],
            vec![p1, p2],
        )
        .unwrap();
        let e = interaction_matrix(&sys).unwrap();
        assert!((e.get(0, 1) - 2.0).abs() < 1e-14);
        assert!((e.get(1, 0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn interaction_matrix_of_orthogonal_lines_is_zero() {
        let sys = SubspaceSystem::orthogonal(vec![
            span(&[&[1.0, 0.0, 0.0]]),
            span(&[&[0.0, 1.0, 0.0]]),
            span(&[&[0.0, 0.0, 1.0]]),
        ])
        .unwrap();
        assert_eq!(interaction_matrix(&sys).unwrap().entries().amax(), 0.0);
    }

    #[test]
    fn interaction_matrix_of_lines_is_pairwise_cosines() {
        let mut r = rng(13);
        let lines: Vec<Subspace> = (0..3).map(|_| random_subspace(&mut r, 3, 1)).collect();
        let units: Vec<DVector<f64>> = lines
            .iter()
            .map(|l| l.basis().column(0).normalize())
            .collect();
        let sys = SubspaceSystem::orthogonal(lines).unwrap();
        let e = interaction_matrix(&sys).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((e.get(i, j) - units[i].dot(&units[j]).abs()).abs() < 1e-12);
                    assert!((e.get(i, j) - e.get(j, i)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn kernel_intersection_examples() {
        let p = orthogonal_projection(&span(&[&[1.0, 0.0, 0.0]])).unwrap();
        let k = kernel_intersection(std::slice::from_ref(&p)).unwrap();
        assert_eq!(k.dim(), 2);
        assert!(k.distance(&col(&[0.0, 1.0, 0.0])) < 1e-14);
        assert!(k.distance(&col(&[0.0, 0.0, 1.0])) < 1e-14);

        let q = orthogonal_projection(&span(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]])).unwrap();
        let k = kernel_intersection(&[p, q]).unwrap();
        assert!(k.is_zero());
    }

    #[test]
    fn kernel_intersection_rank_nullity() {
        let mut r = rng(17);
        let sys = SubspaceSystem::orthogonal(vec![
            random_subspace(&mut r, 7, 2),
            random_subspace(&mut r, 7, 1),
        ])
        .unwrap();
        let k = kernel_intersection(sys.projections()).unwrap();
        let refs: Vec<&DMatrix<f64>> = sys.projections().iter().map(|p| p.matrix()).collect();
        let stacked = linalg::vstack(&refs, 7);
        assert_eq!(k.dim(), 7 - linalg::rank(&stacked));
        for p in sys.projections() {
            assert!((p.matrix() * k.basis()).amax() < 1e-10);
        }
    }

    #[test]
    fn system_rejects_mismatched_projection() {
        let s1 = span(&[&[1.0, 0.0]]);
        let p2 = orthogonal_projection(&span(&[&[0.0, 1.0]])).unwrap();
        assert!(SubspaceSystem::new(vec![s1], vec![p2]).is_err());
    }
}
