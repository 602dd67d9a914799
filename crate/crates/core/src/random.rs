//! Seeded random instance generators used by tests, the acceptance suite and
//! the CLI's sampling checks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::specmat::InteractionMatrix;
use crate::subspaces::{
    oblique_projection, orthogonal_projection, ProjectionOperator, Subspace, SubspaceSystem,
};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// Uniformly distributed point on the unit sphere of `R^len`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, len);
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Random `k`-dimensional subspace of `R^d` (Gaussian basis, full rank with
/// probability one; resampled otherwise).
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Subspace {
    loop {
        if let Ok(s) = Subspace::new(gaussian_matrix(rng, d, k)) {
            return s;
        }
    }
}

/// Nonnegative zero-diagonal matrix with off-diagonal entries uniform in
/// `[0, scale)`.
pub fn random_interaction<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> InteractionMatrix {
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            scale * rng.random::<f64>()
        }
    });
    InteractionMatrix::new(m).expect("nonnegative zero-diagonal by construction")
}

/// Symmetric nonnegative zero-diagonal matrix with entries uniform in `[0, 1)`.
pub fn random_symmetric_interaction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> InteractionMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.random();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    InteractionMatrix::new(m).expect("nonnegative zero-diagonal by construction")
}

/// Subspaces `X_i` obtained by tilting disjoint blocks of coordinate axes by
/// `coupling` times a Gaussian matrix. Small couplings give nearly
/// independent systems; large ones strongly interacting systems.
///
/// With `oblique`, each `P_i` projects along a tilted copy of the remaining
/// coordinate axes instead of orthogonally.
pub fn coupled_system<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    dims: &[usize],
    coupling: f64,
    oblique: bool,
) -> SubspaceSystem {
    let total: usize = dims.iter().sum();
    assert!(
        total <= d,
        "subspace dimensions exceed the ambient dimension"
    );
    loop {
        let mut subspaces = Vec::with_capacity(dims.len());
        let mut offset = 0;
        for &k in dims {
            let mut b = gaussian_matrix(rng, d, k) * coupling;
            for c in 0..k {
                b[(offset + c, c)] += 1.0;
            }
            offset += k;
            subspaces.push(b);
        }
        let subspaces: Option<Vec<Subspace>> = subspaces
            .into_iter()
            .map(|b| Subspace::new(b).ok())
            .collect();
        let Some(subspaces) = subspaces else { continue };
        let projections: Option<Vec<ProjectionOperator>> = if oblique {
            subspaces
                .iter()
                .map(|s| {
                    let k = s.dim();
                    let mut kernel = gaussian_matrix(rng, d, d - k) * (0.3 * coupling);
                    // Complement: the coordinate axes not dominating `s`,
                    // tilted a little.
                    let dominant: Vec<usize> =
                        (0..k).map(|c| s.basis().column(c).iamax()).collect();
                    let mut col = 0;
                    for axis in 0..d {
                        if !dominant.contains(&axis) && col < d - k {
                            kernel[(axis, col)] += 1.0;
                            col += 1;
                        }
                    }
                    let kernel = Subspace::new(kernel).ok()?;
                    oblique_projection(s, &kernel).ok()
                })
                .collect()
        } else {
            subspaces
                .iter()
                .map(|s| orthogonal_projection(s).ok())
                .collect()
        };
        let Some(projections) = projections else {
            continue;
        };
        if let Ok(sys) = SubspaceSystem::new(subspaces, projections) {
            return sys;
        }
    }
}

/// Random partition of `0..m` into exactly `blocks` nonempty blocks.
pub fn random_partition_labels<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    blocks: usize,
) -> Vec<usize> {
    assert!(blocks >= 1 && blocks <= m);
    let mut labels: Vec<usize> = (0..m)
        .map(|k| {
            if k < blocks {
                k
            } else {
                rng.random_range(0..blocks)
            }
        })
        .collect();
    // Fisher–Yates shuffle keeps every block nonempty.
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    labels
}

/// Positive probability weights summing to one.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}
