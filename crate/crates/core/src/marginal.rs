//! Marginal subspaces over a finite probability space.
//!
//! A sub-sigma-algebra of a finite space is generated by a partition of the
//! atoms, so each `F_i` is given as a [`Partition`]. `L^p_0(F)` is the space of
//! mean-zero functions that are constant on the blocks of `F`; the centered
//! conditional expectation `E(.|F) - E(.)` projects onto it.
//!
//! In `L^2(mu)` every computation is done in coordinates `x_k = sqrt(mu_k) xi_k`,
//! which turns the weighted norm into the Euclidean one and conditional
//! expectations into orthogonal projections.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::random::{gaussian_vector, rng};
use crate::specmat::{criterion_verdict, InteractionMatrix, Verdict};
use crate::subspaces::{ProjectionOperator, Subspace, SubspaceSystem};
use crate::sumproj::{default_max_steps, iterate_sum_projection, IterationTrace};

/// Accepted deviation of the total mass from one.
pub const MASS_TOL: f64 = 1e-12;

/// Slack for the sampled inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// `psi'` values within this of 1 are reported as exactly 1.
const INDEPENDENCE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteProbabilitySpace {
    weights: Vec<f64>,
}

impl FiniteProbabilitySpace {
    /// Strictly positive weights summing to one within [`MASS_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Precondition(
                "probability space needs at least one atom".into(),
            ));
        }
        if let Some(k) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Precondition(format!(
                "atom {k} has weight {}; weights must be positive (merge or drop null atoms)",
                weights[k]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Precondition(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Divides positive weights by their total.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Precondition(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn expectation(&self, xi: &DVector<f64>) -> f64 {
        self.weights.iter().zip(xi.iter()).map(|(w, x)| w * x).sum()
    }

    pub fn norm(&self, xi: &DVector<f64>, p: Exponent) -> f64 {
        match p {
            Exponent::One => self
                .weights
                .iter()
                .zip(xi.iter())
                .map(|(w, x)| w * x.abs())
                .sum(),
            Exponent::Two => self
                .weights
                .iter()
                .zip(xi.iter())
                .map(|(w, x)| w * x * x)
                .sum::<f64>()
                .sqrt(),
            Exponent::Infinity => xi.amax(),
        }
    }

    fn sqrt_weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.size(), self.weights.iter().map(|w| w.sqrt()))
    }

    /// `D^(1/2) M D^(-1/2)`: the matrix of `M` in scaled coordinates.
    fn to_scaled(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let s = self.sqrt_weights();
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| s[i] * m[(i, j)] / s[j])
    }

    fn from_scaled(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let s = self.sqrt_weights();
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s[j] / s[i])
    }
}

/// Atom `k` lies in block `block_of[k]`; blocks are numbered `0..block_count`
/// and all nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    block_of: Vec<usize>,
    block_count: usize,
}

impl Partition {
    pub fn new(block_of: Vec<usize>) -> Result<Self> {
        if block_of.is_empty() {
            return Err(Error::Precondition("partition of an empty set".into()));
        }
        let block_count = block_of.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; block_count];
        for &b in &block_of {
            seen[b] = true;
        }
        if let Some(b) = seen.iter().position(|s| !s) {
            return Err(Error::Precondition(format!(
                "block {b} of {block_count} is empty"
            )));
        }
        Ok(Self {
            block_of,
            block_count,
        })
    }

    /// One block containing everything.
    pub fn trivial(m: usize) -> Self {
        Self {
            block_of: vec![0; m],
            block_count: 1,
        }
    }

    /// Every atom its own block.
    pub fn discrete(m: usize) -> Self {
        Self {
            block_of: (0..m).collect(),
            block_count: m,
        }
    }

    pub fn size(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn is_trivial(&self) -> bool {
        self.block_count == 1
    }

    /// `dim L^2_0(F) = block_count - 1`.
    pub fn centered_dim(&self) -> usize {
        self.block_count - 1
    }

    pub fn block_masses(&self, sp: &FiniteProbabilitySpace) -> Vec<f64> {
        let mut masses = vec![0.0; self.block_count];
        for (k, &b) in self.block_of.iter().enumerate() {
            masses[b] += sp.weights[k];
        }
        masses
    }

    /// `m x block_count` 0/1 matrix of block indicators.
    fn indicators(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size(), self.block_count, |k, b| {
            if self.block_of[k] == b {
                1.0
            } else {
                0.0
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    One,
    Two,
    Infinity,
}

impl Exponent {
    pub const ALL: [Exponent; 3] = [Exponent::One, Exponent::Two, Exponent::Infinity];

    /// `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::One => Exponent::Infinity,
            Exponent::Two => Exponent::Two,
            Exponent::Infinity => Exponent::One,
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Exponent::One),
            "2" => Ok(Exponent::Two),
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => Err(Error::Precondition(format!(
                "exponent must be 1, 2 or inf, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSystem {
    pub space: FiniteProbabilitySpace,
    pub partitions: Vec<Partition>,
    pub p: Exponent,
}

impl MarginalSystem {
    pub fn new(
        space: FiniteProbabilitySpace,
        partitions: Vec<Partition>,
        p: Exponent,
    ) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::Precondition("no partitions given".into()));
        }
        if let Some(i) = partitions.iter().position(|a| a.size() != space.size()) {
            return Err(Error::Dimension(format!(
                "partition {i} covers {} atoms, the space has {}",
                partitions[i].size(),
                space.size()
            )));
        }
        Ok(Self {
            space,
            partitions,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.partitions.len()
    }
}

/// Joint masses `mu(a ∩ b)` over blocks `a` of `A` and `b` of `B`.
fn joint_masses(a: &Partition, b: &Partition, sp: &FiniteProbabilitySpace) -> DMatrix<f64> {
    let mut joint = DMatrix::zeros(a.block_count, b.block_count);
    for k in 0..sp.size() {
        joint[(a.block_of[k], b.block_of[k])] += sp.weights[k];
    }
    joint
}

/// `inf mu(A ∩ B) / (mu(A) mu(B))` over events of the two partitions.
///
/// For events that are unions of blocks, the ratio is a weighted average of
/// block-pair ratios (weights `mu(a) mu(b) / (mu(A) mu(B))`), so the
/// infimum is attained at a pair of blocks.
pub fn psi_prime(a: &Partition, b: &Partition, sp: &FiniteProbabilitySpace) -> f64 {
    let joint = joint_masses(a, b, sp);
    let ma = a.block_masses(sp);
    let mb = b.block_masses(sp);
    let mut best = f64::INFINITY;
    for i in 0..a.block_count {
        for j in 0..b.block_count {
            best = best.min(joint[(i, j)] / (ma[i] * mb[j]));
        }
    }
    if best >= 1.0 - INDEPENDENCE_FLOOR {
        return 1.0;
    }
    best.clamp(0.0, 1.0)
}

/// `(M xi)_k` is the `mu`-average of `xi` over the block containing `k`.
pub fn conditional_expectation(a: &Partition, sp: &FiniteProbabilitySpace) -> DMatrix<f64> {
    let masses = a.block_masses(sp);
    let m = sp.size();
    DMatrix::from_fn(m, m, |k, j| {
        if a.block_of[k] == a.block_of[j] {
            sp.weights[j] / masses[a.block_of[k]]
        } else {
            0.0
        }
    })
}

/// `E(.|A) - E(.)`, projecting onto mean-zero `A`-measurable functions.
pub fn centered_projection(a: &Partition, sp: &FiniteProbabilitySpace) -> DMatrix<f64> {
    let m = sp.size();
    let mean = DMatrix::from_fn(m, m, |_, j| sp.weights[j]);
    conditional_expectation(a, sp) - mean
}

/// `e_ij = 1 - psi'(F_i, F_j)`.
pub fn interaction_from_psi(ms: &MarginalSystem) -> InteractionMatrix {
    let n = ms.n();
    let mut e = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 1.0 - psi_prime(&ms.partitions[i], &ms.partitions[j], &ms.space);
            e[(i, j)] = v;
            e[(j, i)] = v;
        }
    }
    InteractionMatrix::new(e).expect("entries in [0, 1] with zero diagonal")
}

/// Orthonormal basis, in scaled coordinates, of `L^2_0(A)` (or of `L^2(A)`
/// when `centered` is false).
fn scaled_measurable_basis(
    a: &Partition,
    sp: &FiniteProbabilitySpace,
    centered: bool,
) -> DMatrix<f64> {
    let s = sp.sqrt_weights();
    let mut ind = a.indicators();
    for k in 0..sp.size() {
        ind.row_mut(k).scale_mut(s[k]);
    }
    if centered {
        // Remove the constant direction sqrt(mu).
        let unit = &s / s.norm();
        let coeffs = ind.transpose() * &unit;
        ind -= &unit * coeffs.transpose();
        // The dimension is known; rounding residue must not add a direction.
        let basis = linalg::column_space(&ind);
        let keep = a.centered_dim().min(basis.ncols());
        return basis.columns(0, keep).into_owned();
    }
    linalg::column_space(&ind)
}

/// Uniform random point on the unit sphere of the span of `basis`, mapped
/// back to unscaled coordinates. `None` for a zero-dimensional span.
fn sample_unscaled<R: Rng + ?Sized>(
    rng: &mut R,
    basis: &DMatrix<f64>,
    sp: &FiniteProbabilitySpace,
) -> Option<DVector<f64>> {
    if basis.ncols() == 0 {
        return None;
    }
    let g = gaussian_vector(rng, basis.ncols());
    let x = basis * (&g / g.norm());
    let s = sp.sqrt_weights();
    Some(x.component_div(&s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityViolation {
    pub sample: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub p: Exponent,
    pub psi_prime: f64,
    pub bound: f64,
    pub samples: usize,
    /// Largest `||E(xi|B)||_p / ||xi||_p` seen.
    pub max_ratio: f64,
    /// `||E(.|B)|_{L^2_0(A)}||`, only for `p = 2`.
    pub exact_norm: Option<f64>,
    pub violations: Vec<InequalityViolation>,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
            && self
                .exact_norm
                .is_none_or(|n| n <= self.bound + INEQUALITY_SLACK)
    }
}

/// Samples `||E(xi|B)||_p <= (1 - psi'(A, B)) ||xi||_p` over mean-zero
/// `A`-measurable `xi`.
pub fn lemma_bound_check(
    a: &Partition,
    b: &Partition,
    sp: &FiniteProbabilitySpace,
    p: Exponent,
    samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    check_pair(a, b, sp, samples)?;
    let mut rng = rng(seed);
    let psi = psi_prime(a, b, sp);
    let bound = 1.0 - psi;
    let ce_b = conditional_expectation(b, sp);
    let basis = scaled_measurable_basis(a, sp, true);
    let mut violations = Vec::new();
    let mut max_ratio = 0.0_f64;
    for sample in 0..samples {
        let Some(xi) = sample_unscaled(&mut rng, &basis, sp) else {
            break;
        };
        let lhs = sp.norm(&(&ce_b * &xi), p);
        let norm = sp.norm(&xi, p);
        let rhs = bound * norm;
        if norm > 0.0 {
            max_ratio = max_ratio.max(lhs / norm);
        }
        if lhs > rhs + INEQUALITY_SLACK {
            violations.push(InequalityViolation { sample, lhs, rhs });
        }
    }
    let exact_norm = (p == Exponent::Two).then(|| {
        let scaled = sp.to_scaled(&ce_b);
        linalg::op_norm(&(scaled * &basis))
    });
    Ok(LemmaReport {
        p,
        psi_prime: psi,
        bound,
        samples,
        max_ratio,
        exact_norm,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub p: Exponent,
    pub psi_prime: f64,
    pub samples: usize,
    /// Largest `|E(xi eta)| / (||xi||_p ||eta||_q)` seen.
    pub max_ratio: f64,
    pub violations: Vec<InequalityViolation>,
}

impl CovarianceReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `|E(xi eta)| <= (1 - psi') ||xi||_p ||eta||_q` over mean-zero
/// `A`-measurable `xi` and `B`-measurable `eta`.
pub fn covariance_inequality_check(
    a: &Partition,
    b: &Partition,
    sp: &FiniteProbabilitySpace,
    p: Exponent,
    samples: usize,
    seed: u64,
) -> Result<CovarianceReport> {
    check_pair(a, b, sp, samples)?;
    let mut rng = rng(seed);
    let psi = psi_prime(a, b, sp);
    let q = p.conjugate();
    let basis_a = scaled_measurable_basis(a, sp, true);
    let basis_b = scaled_measurable_basis(b, sp, false);
    let mut violations = Vec::new();
    let mut max_ratio = 0.0_f64;
    for sample in 0..samples {
        let Some(xi) = sample_unscaled(&mut rng, &basis_a, sp) else {
            break;
        };
        let eta = sample_unscaled(&mut rng, &basis_b, sp).expect("L^2(B) contains the constants");
        let lhs = sp.expectation(&xi.component_mul(&eta)).abs();
        let scale = sp.norm(&xi, p) * sp.norm(&eta, q);
        if scale > 0.0 {
            max_ratio = max_ratio.max(lhs / scale);
        }
        let rhs = (1.0 - psi) * scale;
        if lhs > rhs + INEQUALITY_SLACK {
            violations.push(InequalityViolation { sample, lhs, rhs });
        }
    }
    Ok(CovarianceReport {
        p,
        psi_prime: psi,
        samples,
        max_ratio,
        violations,
    })
}

fn check_pair(
    a: &Partition,
    b: &Partition,
    sp: &FiniteProbabilitySpace,
    samples: usize,
) -> Result<()> {
    if a.size() != sp.size() || b.size() != sp.size() {
        return Err(Error::Dimension(
            "partitions and space have different sizes".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::Precondition(
            "at least one sample is required".into(),
        ));
    }
    Ok(())
}

/// Result of the projection onto `L^2_0(F_1) + ... + L^2_0(F_n)`.
#[derive(Debug, Clone)]
pub struct MarginalProjection {
    pub interaction: InteractionMatrix,
    pub radius: f64,
    /// Indices of the nontrivial partitions that enter the iteration;
    /// trivial ones contribute the zero subspace.
    pub included: Vec<usize>,
    /// Trace of the iteration in scaled coordinates, where it is the
    /// Euclidean iteration for orthogonal projections.
    pub trace: IterationTrace,
    /// The limit as a matrix acting on functions `xi`.
    pub projection: DMatrix<f64>,
    pub sum_dim: usize,
}

/// Scaled-coordinate system of centered subspaces and centered conditional
/// expectations; trivial partitions are skipped.
pub fn scaled_system(ms: &MarginalSystem) -> Result<(SubspaceSystem, Vec<usize>)> {
    let mut subspaces = Vec::new();
    let mut projections = Vec::new();
    let mut included = Vec::new();
    for (i, a) in ms.partitions.iter().enumerate() {
        if a.is_trivial() {
            continue;
        }
        let basis = scaled_measurable_basis(a, &ms.space, true);
        subspaces.push(Subspace::new(basis)?);
        projections.push(ProjectionOperator::from_matrix(
            ms.space.to_scaled(&centered_projection(a, &ms.space)),
        )?);
        included.push(i);
    }
    if included.is_empty() {
        return Err(Error::Precondition(
            "all partitions are trivial; the sum is zero".into(),
        ));
    }
    Ok((SubspaceSystem::new(subspaces, projections)?, included))
}

/// Runs the sum-projection iteration on the marginal subspaces at `p = 2`
/// after checking `r(E) < 1`, and confirms the sum is direct.
pub fn marginal_sum_projection(ms: &MarginalSystem, tol: f64) -> Result<MarginalProjection> {
    let interaction = interaction_from_psi(ms);
    let (verdict, bracket) = criterion_verdict(&interaction)?;
    if verdict != Verdict::CriterionHolds {
        return Err(Error::CriterionFails {
            radius: bracket.midpoint(),
        });
    }
    let (sys, included) = scaled_system(ms)?;
    let alpha = crate::specmat::perron_certificate_auto(&interaction, crate::specmat::Side::Row)
        .ok()
        .map(|c| c.alpha);
    let trace = iterate_sum_projection(&sys, tol, default_max_steps(alpha))?;
    let expected: usize = ms.partitions.iter().map(Partition::centered_dim).sum();
    let sum_dim = sys.sum_dim();
    if sum_dim != expected {
        return Err(Error::Intersection);
    }
    let projection = ms.space.from_scaled(trace.limit.matrix());
    Ok(MarginalProjection {
        interaction,
        radius: bracket.midpoint(),
        included,
        trace,
        projection,
        sum_dim,
    })
}
