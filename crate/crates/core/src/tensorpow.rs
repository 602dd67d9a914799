//! Tensor powers of subspace systems under the Euclidean (Hilbert) tensor
//! norm, where `||A ⊗ B|| = ||A|| ||B||` and minimal-angle cosines
//! multiply.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::specmat::{
    criterion_verdict, perron_certificate_auto, InteractionMatrix, Side, Verdict,
};
use crate::subspaces::{
    annihilating_projection, orthogonal_projection, orthonormal_basis, ProjectionOperator,
    Subspace, SubspaceSystem, INTERACTION_NOISE_FLOOR,
};
use crate::sumproj::{default_max_steps, iterate_sum_projection, IterationTrace};

/// Largest admissible tensor dimension `d^m`.
pub const DEFAULT_SIZE_CAP: usize = 4096;

/// Tolerance for `||Q_i Q_j|| = c_0(X_i, X_j)^m`.
pub const NORM_IDENTITY_TOL: f64 = 1e-10;

/// Tolerance for range and annihilation checks of tensor factors.
const FACTOR_TOL: f64 = 1e-9;

/// `c_0(Y, Z) = sup |<y, z>|` over unit vectors, i.e. `||Q_Y^t Q_Z||` for
/// orthonormal bases.
pub fn min_angle_cosine(y: &Subspace, z: &Subspace) -> Result<f64> {
    if y.ambient_dim() != z.ambient_dim() {
        return Err(Error::Dimension(
            "subspaces live in different spaces".into(),
        ));
    }
    let qy = orthonormal_basis(y)?;
    let qz = orthonormal_basis(z)?;
    Ok(linalg::op_norm(&(qy.basis().transpose() * qz.basis())).min(1.0))
}

/// `d^m`, or a size error when it exceeds `cap`.
pub fn tensor_dim(d: usize, m: usize, cap: usize) -> Result<usize> {
    let exp = u32::try_from(m).map_err(|_| Error::SizeCap {
        dim: usize::MAX,
        cap,
    })?;
    match d.checked_pow(exp) {
        Some(dim) if dim <= cap => Ok(dim),
        Some(dim) => Err(Error::SizeCap { dim, cap }),
        None => Err(Error::SizeCap {
            dim: usize::MAX,
            cap,
        }),
    }
}

/// `m`-fold Kronecker product of `a` with itself.
pub fn kron_power_matrix(a: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    kron_all(&vec![a; m.max(1)])
}

/// `f_1 ⊗ f_2 ⊗ ... ⊗ f_k`.
fn kron_all(factors: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = out.kronecker(f);
    }
    out
}

/// `P ⊗ ... ⊗ P` (`m` factors), a projection onto `X^{⊗m}`.
pub fn kron_power(p: &ProjectionOperator, m: usize, cap: usize) -> Result<ProjectionOperator> {
    if m == 0 {
        return Err(Error::Precondition(
            "tensor power must be at least 1".into(),
        ));
    }
    tensor_dim(p.ambient_dim(), m, cap)?;
    if m == 1 {
        return Ok(p.clone());
    }
    // Range and norm are multiplicative under Kronecker products.
    let exp = i32::try_from(m).map_err(|_| Error::Precondition(format!("power {m} too large")))?;
    Ok(ProjectionOperator::from_parts_unchecked(
        kron_power_matrix(p.matrix(), m),
        kron_power_matrix(p.range_basis(), m),
        p.norm().powi(exp),
    ))
}

/// `X^{⊗m}` with the Kronecker power of an orthonormal basis.
pub fn subspace_power(s: &Subspace, m: usize, cap: usize) -> Result<Subspace> {
    if m == 0 {
        return Err(Error::Precondition(
            "tensor power must be at least 1".into(),
        ));
    }
    tensor_dim(s.ambient_dim(), m, cap)?;
    let q = orthonormal_basis(s)?;
    Subspace::new(kron_power_matrix(q.basis(), m))
}

/// `e^(m)_ij = c_0(X_i, X_j)^m`.
pub fn tensor_interaction(sys: &SubspaceSystem, m: usize) -> Result<InteractionMatrix> {
    let n = sys.n();
    let exp = i32::try_from(m).map_err(|_| Error::Precondition(format!("power {m} too large")))?;
    let mut e = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut c = min_angle_cosine(&sys.subspaces()[i], &sys.subspaces()[j])?;
            if c <= INTERACTION_NOISE_FLOOR {
                c = 0.0;
            }
            let c = c.powi(exp);
            e[(i, j)] = c;
            e[(j, i)] = c;
        }
    }
    InteractionMatrix::new(e)
}

/// `X_1^{⊗m}, ..., X_n^{⊗m}` with the tensor powers of the orthogonal
/// projections.
#[derive(Debug, Clone)]
pub struct TensorSystem {
    pub base: SubspaceSystem,
    pub m: usize,
    pub system: SubspaceSystem,
}

impl TensorSystem {
    pub fn new(base: &SubspaceSystem, m: usize, cap: usize) -> Result<Self> {
        tensor_dim(base.ambient_dim(), m, cap)?;
        let mut subspaces = Vec::with_capacity(base.n());
        let mut projections = Vec::with_capacity(base.n());
        for s in base.subspaces() {
            let q = orthonormal_basis(s)?;
            subspaces.push(Subspace::new(kron_power_matrix(q.basis(), m))?);
            projections.push(kron_power(&orthogonal_projection(s)?, m, cap)?);
        }
        Ok(Self {
            base: base.clone(),
            m,
            system: SubspaceSystem::new(subspaces, projections)?,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.system.ambient_dim()
    }
}

#[derive(Debug, Clone)]
pub struct TensorIteration {
    pub tensor: TensorSystem,
    pub interaction: InteractionMatrix,
    pub radius: f64,
    pub trace: IterationTrace,
    /// `max_{i != j} | ||Q_i Q_j|| - c_0(X_i, X_j)^m |`.
    pub norm_identity_deviation: f64,
    pub sum_dim: usize,
}

/// Iterates on the tensor powers after checking `r(E^(m)) < 1`.
pub fn tensor_sum_projection_e(
    sys: &SubspaceSystem,
    m: usize,
    tol: f64,
    cap: usize,
) -> Result<TensorIteration> {
    let interaction = tensor_interaction(sys, m)?;
    let (verdict, bracket) = criterion_verdict(&interaction)?;
    if verdict != Verdict::CriterionHolds {
        return Err(Error::CriterionFails {
            radius: bracket.midpoint(),
        });
    }
    let tensor = TensorSystem::new(sys, m, cap)?;

    // Q_i are orthogonal with orthonormal range bases U_i, so
    // ||Q_i Q_j|| = ||U_i^t U_j||.
    let bases: Vec<&DMatrix<f64>> = tensor
        .system
        .subspaces()
        .iter()
        .map(Subspace::basis)
        .collect();
    let mut norm_identity_deviation = 0.0_f64;
    for i in 0..sys.n() {
        for j in (0..sys.n()).filter(|&j| j != i) {
            let measured = linalg::op_norm(&(bases[i].transpose() * bases[j]));
            norm_identity_deviation =
                norm_identity_deviation.max((measured - interaction.get(i, j)).abs());
        }
    }
    if norm_identity_deviation > NORM_IDENTITY_TOL {
        return Err(Error::Precondition(format!(
            "tensor norms deviate from powered cosines by {norm_identity_deviation}"
        )));
    }

    let alpha = perron_certificate_auto(&interaction, Side::Row)
        .ok()
        .map(|c| c.alpha);
    let trace = iterate_sum_projection(&tensor.system, tol, default_max_steps(alpha))?;
    let sum_dim = tensor.system.sum_dim();
    if sum_dim != tensor.system.total_dim() {
        return Err(Error::Intersection);
    }
    Ok(TensorIteration {
        tensor,
        interaction,
        radius: bracket.midpoint(),
        trace,
        norm_identity_deviation,
        sum_dim,
    })
}

#[derive(Debug, Clone)]
pub struct PairwiseConstruction {
    pub m: usize,
    /// `Q_i`, each a projection onto `X_i^{⊗m}` vanishing on the other powers.
    pub factors: Vec<ProjectionOperator>,
    /// `Q_1 + ... + Q_n`.
    pub projection: ProjectionOperator,
    pub powers: Vec<Subspace>,
    /// `max_i ||Q_i U_i - U_i||` over orthonormal bases `U_i` of `X_i^{⊗m}`.
    pub range_defect: f64,
    /// `max_{i != j} ||Q_i U_j||`.
    pub annihilation_defect: f64,
}

/// `Q_i = P_{i1} ⊗ ... ⊗ P_{in} ⊗ P_i ⊗ ... ⊗ P_i` (the `j = i` factor
/// omitted), where `P_ij` projects onto `X_i` and vanishes on `X_j`, and the
/// `m - (n - 1)` trailing factors are the orthogonal projection onto `X_i`.
/// Needs `m >= n - 1` and pairwise trivial intersections.
pub fn tensor_sum_projection_pairwise(
    sys: &SubspaceSystem,
    m: usize,
    cap: usize,
) -> Result<PairwiseConstruction> {
    let n = sys.n();
    if m == 0 || m + 1 < n {
        return Err(Error::Precondition(format!(
            "tensor power {m} is below n - 1 = {}",
            n - 1
        )));
    }
    tensor_dim(sys.ambient_dim(), m, cap)?;
    let subspaces = sys.subspaces();
    let mut factors = Vec::with_capacity(n);
    let mut powers = Vec::with_capacity(n);
    for i in 0..n {
        let mut mats: Vec<DMatrix<f64>> = Vec::with_capacity(m);
        for j in (0..n).filter(|&j| j != i) {
            mats.push(
                annihilating_projection(&subspaces[i], &subspaces[j])?
                    .matrix()
                    .clone(),
            );
        }
        let own = orthogonal_projection(&subspaces[i])?;
        while mats.len() < m {
            mats.push(own.matrix().clone());
        }
        let refs: Vec<&DMatrix<f64>> = mats.iter().collect();
        let matrix = kron_all(&refs);
        let power = subspace_power(&subspaces[i], m, cap)?;
        let norm = linalg::op_norm(&matrix);
        factors.push(ProjectionOperator::from_parts_unchecked(
            matrix,
            power.basis().clone(),
            norm,
        ));
        powers.push(power);
    }

    let mut range_defect = 0.0_f64;
    let mut annihilation_defect = 0.0_f64;
    for (i, q) in factors.iter().enumerate() {
        for (j, u) in powers.iter().enumerate() {
            let image = q.matrix() * u.basis();
            if i == j {
                range_defect = range_defect.max(linalg::op_norm(&(image - u.basis())));
            } else {
                annihilation_defect = annihilation_defect.max(linalg::op_norm(&image));
            }
        }
    }
    if range_defect > FACTOR_TOL || annihilation_defect > FACTOR_TOL {
        return Err(Error::Precondition(format!(
            "tensor factors are inconsistent (range defect {range_defect}, annihilation defect {annihilation_defect})"
        )));
    }
    let dim = factors[0].ambient_dim();
    let sum = factors
        .iter()
        .fold(DMatrix::zeros(dim, dim), |acc, q| acc + q.matrix());
    let bases: Vec<&DMatrix<f64>> = powers.iter().map(Subspace::basis).collect();
    let range = linalg::column_space(&linalg::hstack(&bases, dim));
    let norm = linalg::op_norm(&sum);
    Ok(PairwiseConstruction {
        m,
        factors,
        projection: ProjectionOperator::from_parts_unchecked(sum, range, norm),
        powers,
        range_defect,
        annihilation_defect,
    })
}
