//! Extremal systems with `r(E) = 1`: for a nonnegative zero-diagonal `E` of
//! spectral radius one, builds subspaces and projections with
//! `||P_i x|| = e_ij ||x||` for every `x` in `X_j`.
//!
//! The model space is `Y^(n-1) x Z` with `Y = R^y_dim` sitting in the first
//! `y_dim` coordinates of `Z = R^z_dim`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::random::{gaussian_vector, rng};
use crate::specmat::{spectral_radius, InteractionMatrix};
use crate::subspaces::{restricted_norm, ProjectionOperator, Subspace, SubspaceSystem};

/// Accepted distance of `r(E)` from one.
pub const UNIT_RADIUS_TOL: f64 = 1e-8;

/// Relative smallest-singular-value cutoff for treating `I - E` as singular.
const SINGULAR_TOL: f64 = 1e-7;

/// Samples per pair in [`verify_norm_identities`] by default.
pub const DEFAULT_SAMPLES: usize = 1000;

const SAMPLE_TOL: f64 = 1e-9;
const RESTRICTED_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SharpExample {
    pub e: InteractionMatrix,
    /// `u_i = T f_i`.
    pub u_vectors: Vec<DVector<f64>>,
    /// `v_j = T e_j`; orthonormal.
    pub v_vectors: Vec<DVector<f64>>,
    pub rotation: DMatrix<f64>,
    pub y_dim: usize,
    pub z_dim: usize,
    pub system: SubspaceSystem,
}

/// Deviations of the vector identities from their exact values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// `max_i |<v_i, u_i> - 1|`.
    pub pairing: f64,
    /// `max_{i != j} ||<v_j, u_i>| - e_ij|`.
    pub cross: f64,
    /// `max_i |(u_i)_n|`.
    pub last_coordinate: f64,
}

impl SharpExample {
    pub fn n(&self) -> usize {
        self.e.n()
    }

    pub fn ambient_dim(&self) -> usize {
        self.system.ambient_dim()
    }

    pub fn invariants(&self) -> InvariantReport {
        let n = self.n();
        let mut report = InvariantReport {
            pairing: 0.0,
            cross: 0.0,
            last_coordinate: 0.0,
        };
        for i in 0..n {
            let u = &self.u_vectors[i];
            report.pairing = report.pairing.max((self.v_vectors[i].dot(u) - 1.0).abs());
            report.last_coordinate = report.last_coordinate.max(u[n - 1].abs());
            for j in (0..n).filter(|&j| j != i) {
                let dev = (self.v_vectors[j].dot(u).abs() - self.e.get(i, j)).abs();
                report.cross = report.cross.max(dev);
            }
        }
        report
    }
}

/// `E / r(E)`.
pub fn rescale_to_unit_radius(e: &InteractionMatrix) -> Result<InteractionMatrix> {
    let r = spectral_radius(e, 1e-14)?;
    if !(r > 0.0) {
        return Err(Error::Precondition(
            "cannot rescale a matrix with zero spectral radius".into(),
        ));
    }
    e.scaled(1.0 / r)
}

/// The rows `f_i` of `I - E`, after checking `|r(E) - 1| <= 1e-8` and that
/// `I - E` is singular.
pub fn row_vectors(e: &InteractionMatrix) -> Result<Vec<DVector<f64>>> {
    let r = spectral_radius(e, 1e-13)?;
    if (r - 1.0).abs() > UNIT_RADIUS_TOL {
        return Err(Error::Precondition(format!(
            "spectral radius is {r}, expected 1; rescale the matrix by 1/r(E) first"
        )));
    }
    let n = e.n();
    let m = DMatrix::<f64>::identity(n, n) - e.entries();
    let sv = linalg::singular_values_desc(&m);
    if sv[n - 1] > SINGULAR_TOL * sv[0] {
        return Err(Error::Precondition(format!(
            "I - E is nonsingular (smallest singular value {})",
            sv[n - 1]
        )));
    }
    Ok((0..n).map(|i| m.row(i).transpose()).collect())
}

/// Orthogonal `T` (a Householder reflection) with `(T f)_n = 0` for every
/// `f` in `f_list`: it sends a unit normal of their span to `±e_n`.
pub fn hyperplane_rotation(f_list: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let Some(first) = f_list.first() else {
        return Err(Error::Precondition("no vectors given".into()));
    };
    let n = first.len();
    if n == 0 || f_list.iter().any(|f| f.len() != n) {
        return Err(Error::Dimension(
            "vectors must share a positive length".into(),
        ));
    }
    let cols: Vec<DMatrix<f64>> = f_list
        .iter()
        .map(|f| DMatrix::from_column_slice(n, 1, f.as_slice()))
        .collect();
    let refs: Vec<&DMatrix<f64>> = cols.iter().collect();
    let f = linalg::hstack(&refs, n);
    let normal = unit_normal(&f)?;

    let identity = DMatrix::<f64>::identity(n, n);
    if 1.0 - normal[n - 1].abs() <= f64::EPSILON {
        return Ok(identity);
    }
    // h = normal - s e_n with s = -sign(normal_n) so that ||h|| >= 1.
    let s = if normal[n - 1] >= 0.0 { -1.0 } else { 1.0 };
    let mut h = normal;
    h[n - 1] -= s;
    let hh = h.dot(&h);
    Ok(identity - (&h * h.transpose()) * (2.0 / hh))
}

/// Left singular vector of the smallest singular value, provided the
/// columns of `f` do not span everything.
fn unit_normal(f: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = f.nrows();
    // Singular vectors of F^t: its right vectors are the left vectors of F,
    // and the square shape gives all n of them.
    let mut square = DMatrix::zeros(n.max(f.ncols()), n);
    square
        .view_mut((0, 0), (f.ncols(), n))
        .copy_from(&f.transpose());
    let svd = linalg::jacobi_svd(&square);
    let top = svd.sigma.iter().fold(0.0_f64, |a, &s| a.max(s));
    let (idx, &smallest) = svd
        .sigma
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("n >= 1");
    if top > 0.0 && smallest > SINGULAR_TOL * top {
        return Err(Error::Precondition(format!(
            "vectors span all of R^{n} (smallest singular value {smallest})"
        )));
    }
    Ok(svd.v.column(idx).into_owned())
}

/// `L_v : R^y -> Y^(n-1) x Z`, `y -> (v_1 y, ..., v_(n-1) y, v_n y)` with
/// the last block embedded in the first `y_dim` coordinates of `Z`.
fn block_embedding(v: &DVector<f64>, y_dim: usize, z_dim: usize) -> DMatrix<f64> {
    let n = v.len();
    let d = (n - 1) * y_dim + z_dim;
    let mut l = DMatrix::zeros(d, y_dim);
    for k in 0..n {
        for c in 0..y_dim {
            l[(k * y_dim + c, c)] = v[k];
        }
    }
    l
}

/// Builds the extremal system for `E` with `r(E) = 1`.
pub fn build_sharp_example(
    e: &InteractionMatrix,
    y_dim: usize,
    z_dim: usize,
) -> Result<SharpExample> {
    if y_dim == 0 {
        return Err(Error::Precondition("y_dim must be at least 1".into()));
    }
    if z_dim < y_dim {
        return Err(Error::Precondition(format!(
            "z_dim = {z_dim} must be at least y_dim = {y_dim}"
        )));
    }
    let n = e.n();
    let f = row_vectors(e)?;
    let t = hyperplane_rotation(&f)?;
    let u_vectors: Vec<DVector<f64>> = f.iter().map(|fi| &t * fi).collect();
    let v_vectors: Vec<DVector<f64>> = (0..n).map(|j| t.column(j).into_owned()).collect();

    let mut subspaces = Vec::with_capacity(n);
    let mut projections = Vec::with_capacity(n);
    for (u, v) in u_vectors.iter().zip(&v_vectors) {
        let lv = block_embedding(v, y_dim, z_dim);
        let lu = block_embedding(u, y_dim, z_dim);
        let p = &lv * lu.transpose();
        projections.push(ProjectionOperator::from_matrix(p)?);
        subspaces.push(Subspace::new(lv)?);
    }
    let system = SubspaceSystem::new(subspaces, projections)?;
    Ok(SharpExample {
        e: e.clone(),
        u_vectors,
        v_vectors,
        rotation: t,
        y_dim,
        z_dim,
        system,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairIdentity {
    pub i: usize,
    pub j: usize,
    pub expected: f64,
    pub restricted_norm: f64,
    /// Largest `|‖P_i x‖ - e_ij ‖x‖| / ‖x‖` over the samples.
    pub max_sample_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormIdentityReport {
    pub samples_per_pair: usize,
    pub invariants: InvariantReport,
    pub pairs: Vec<PairIdentity>,
    pub max_sample_deviation: f64,
    pub max_restricted_deviation: f64,
    pub passed: bool,
}

/// Checks `||P_i x|| = e_ij ||x||` on random `x` in `X_j` and via the exact
/// restricted norm, for every pair `i != j`.
pub fn verify_norm_identities(
    ex: &SharpExample,
    samples: usize,
    seed: u64,
) -> Result<NormIdentityReport> {
    let mut rng = rng(seed);
    verify_with_rng(ex, samples, &mut rng)
}

fn verify_with_rng<R: Rng + ?Sized>(
    ex: &SharpExample,
    samples: usize,
    rng: &mut R,
) -> Result<NormIdentityReport> {
    let n = ex.n();
    let subspaces = ex.system.subspaces();
    let projections = ex.system.projections();
    let mut pairs = Vec::with_capacity(n * (n - 1));
    let mut max_sample_deviation = 0.0_f64;
    let mut max_restricted_deviation = 0.0_f64;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let expected = ex.e.get(i, j);
            let p = projections[i].matrix();
            let basis = subspaces[j].basis();
            let mut worst = 0.0_f64;
            for _ in 0..samples {
                let x = basis * gaussian_vector(rng, ex.y_dim);
                let norm = x.norm();
                if norm == 0.0 {
                    continue;
                }
                worst = worst.max(((p * &x).norm() - expected * norm).abs() / norm);
            }
            let rn = restricted_norm(&projections[i], &subspaces[j])?;
            max_sample_deviation = max_sample_deviation.max(worst);
            max_restricted_deviation = max_restricted_deviation.max((rn - expected).abs());
            pairs.push(PairIdentity {
                i,
                j,
                expected,
                restricted_norm: rn,
                max_sample_deviation: worst,
            });
        }
    }
    let invariants = ex.invariants();
    let passed = max_sample_deviation <= SAMPLE_TOL
        && max_restricted_deviation <= RESTRICTED_TOL
        && invariants.pairing <= 1e-10
        && invariants.cross <= 1e-10
        && invariants.last_coordinate <= 1e-12;
    Ok(NormIdentityReport {
        samples_per_pair: samples,
        invariants,
        pairs,
        max_sample_deviation,
        max_restricted_deviation,
        passed,
    })
}
