//! Projection onto `X_1 + ... + X_n`: the iteration `I - (I - A)^N` with
//! `A = P_1 + ... + P_n`, the Gram-solve formula `P = S G^-1 J`, certified
//! rate bounds, and composition across reducible blocks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::specmat::{
    minor_test, perron_certificate_auto, spectral_radius, BlockStructure, InteractionMatrix,
    PerronCertificate, Side,
};
use crate::subspaces::{interaction_matrix, orthonormal_basis, ProjectionOperator, SubspaceSystem};

/// Default gap tolerance for the iteration.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Step budget when no certificate is available.
pub const FALLBACK_MAX_STEPS: usize = 10_000;

/// Gaps above this are treated as divergence without waiting for the budget.
const DIVERGENCE_CEILING: f64 = 1e150;

/// Slack allowed when comparing residuals against rate bounds.
pub const DOMINATION_SLACK: f64 = 1e-9;

/// `A = P_1 + ... + P_n`.
pub fn sum_operator(sys: &SubspaceSystem) -> DMatrix<f64> {
    let d = sys.ambient_dim();
    sys.projections()
        .iter()
        .fold(DMatrix::zeros(d, d), |acc, p| acc + p.matrix())
}

/// `100 * ceil(1 / (1 - alpha))` with a certificate, else
/// [`FALLBACK_MAX_STEPS`].
pub fn default_max_steps(alpha: Option<f64>) -> usize {
    match alpha {
        Some(a) if (0.0..1.0).contains(&a) => {
            let steps = 100.0 * (1.0 / (1.0 - a)).ceil();
            if steps.is_finite() && steps < 1e8 {
                steps as usize
            } else {
                100_000_000
            }
        }
        _ => FALLBACK_MAX_STEPS,
    }
}

/// Per-step record of a converged run. Index `k` of `gaps` and `residuals`
/// refers to step `N = k + 1`.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    /// `||P_N - P_{N+1}||`.
    pub gaps: Vec<f64>,
    /// `||P_N - P_limit||`.
    pub residuals: Vec<f64>,
    pub steps: usize,
    pub limit: ProjectionOperator,
}

impl IterationTrace {
    /// Whether the residuals are nonincreasing from some step on, up to
    /// `slack`.
    pub fn eventually_monotone(&self, slack: f64) -> bool {
        // The tail where residuals are not yet at rounding level must be
        // nonincreasing; check from the last increase backwards.
        let r = &self.residuals;
        let mut start = r.len();
        while start > 1 && r[start - 1] <= r[start - 2] + slack {
            start -= 1;
        }
        start < r.len() || r.len() <= 1
    }
}

/// Runs `R_N = (I - A)^N` and stops at the first `N` with
/// `||R_{N+1} - R_N|| <= tol`, returning `P = I - R_N`.
///
/// Every difference of iterates vanishes on `ker P_1 ∩ ... ∩ ker P_n`, so
/// its operator norm equals that of its restriction to the orthogonal
/// complement of that kernel, spanned by the orthonormal columns of `Q`
/// (built from `P_i^t B_i`). The loop therefore carries only the thin
/// `K x d` matrices `(R_N Q)^t = Q^t (I - A^t)^N`, one `K x d x d` product
/// per step, and forms `R_N` once at the end.
pub fn iterate_sum_projection(
    sys: &SubspaceSystem,
    tol: f64,
    max_steps: usize,
) -> Result<IterationTrace> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if max_steps == 0 {
        return Err(Error::Precondition("max_steps must be at least 1".into()));
    }
    let d = sys.ambient_dim();
    let identity = DMatrix::<f64>::identity(d, d);
    let step = &identity - sum_operator(sys);
    let step_t = step.transpose();
    let row_space_t = joint_row_space(sys).transpose();

    let mut v = &row_space_t * &step_t;
    let mut history = vec![v.clone()];
    let mut gaps = Vec::new();
    for n in 1..=max_steps {
        let v_next = &v * &step_t;
        let gap = linalg::op_norm(&(&v_next - &v));
        gaps.push(gap);
        if !gap.is_finite() || gap > DIVERGENCE_CEILING {
            return Err(Error::Divergence {
                steps: n,
                last_gap: gap,
                gaps,
            });
        }
        if gap <= tol {
            let residuals = history
                .iter()
                .map(|vk| linalg::op_norm(&(&v - vk)))
                .collect();
            let exponent =
                u32::try_from(n).map_err(|_| Error::Precondition(format!("N = {n} too large")))?;
            let limit = ProjectionOperator::from_matrix_unchecked(&identity - step.pow(exponent));
            return Ok(IterationTrace {
                gaps,
                residuals,
                steps: n,
                limit,
            });
        }
        v = v_next;
        history.push(v.clone());
    }
    let last_gap = gaps.last().copied().unwrap_or(f64::NAN);
    Err(Error::Divergence {
        steps: max_steps,
        last_gap,
        gaps,
    })
}

/// Orthonormal basis of the row space of the stacked projections, i.e. of
/// the orthogonal complement of `ker P_1 ∩ ... ∩ ker P_n`.
pub(crate) fn joint_row_space(sys: &SubspaceSystem) -> DMatrix<f64> {
    let pieces: Vec<DMatrix<f64>> = sys
        .projections()
        .iter()
        .map(|p| p.matrix().transpose() * p.range_basis())
        .collect();
    let refs: Vec<&DMatrix<f64>> = pieces.iter().collect();
    linalg::column_space(&linalg::hstack(&refs, sys.ambient_dim()))
}

/// `P = S G^-1 J`, with `S = [Q_1 .. Q_n]` the inclusion of orthonormal
/// bases, `J` the stack of `Q_i^t P_i`, and `G = J S` whose blocks are
/// `Q_i^t P_i Q_j` (identity on the diagonal).
pub fn direct_sum_projection(sys: &SubspaceSystem) -> Result<ProjectionOperator> {
    let d = sys.ambient_dim();
    let bases = sys
        .subspaces()
        .iter()
        .map(|s| orthonormal_basis(s).map(|q| q.basis().clone()))
        .collect::<Result<Vec<_>>>()?;
    let s_refs: Vec<&DMatrix<f64>> = bases.iter().collect();
    let s = linalg::hstack(&s_refs, d);
    let j_blocks: Vec<DMatrix<f64>> = bases
        .iter()
        .zip(sys.projections())
        .map(|(q, p)| q.transpose() * p.matrix())
        .collect();
    let j_refs: Vec<&DMatrix<f64>> = j_blocks.iter().collect();
    let j = linalg::vstack(&j_refs, d);
    let g = &j * &s;
    let sv = linalg::singular_values_desc(&g);
    let sigma_min = sv.last().copied().unwrap_or(0.0);
    if !(sigma_min > 1e-12 * sv[0]) {
        return Err(Error::GramSingular { sigma_min });
    }
    let g_inv_j = g.lu().solve(&j).ok_or(Error::GramSingular { sigma_min })?;
    Ok(ProjectionOperator::from_matrix_unchecked(&s * g_inv_j))
}

/// Which of the two rate estimates to use: the weighted sup-norm bound
/// (needs `E w <= alpha w`) or the weighted 1-norm bound (needs
/// `E^t w <= alpha w`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateVariant {
    WeightedInf,
    WeightedOne,
}

impl RateVariant {
    pub fn side(self) -> Side {
        match self {
            RateVariant::WeightedInf => Side::Row,
            RateVariant::WeightedOne => Side::Column,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBound {
    pub certificate: PerronCertificate,
    pub projection_norms: Vec<f64>,
    pub variant: RateVariant,
}

impl RateBound {
    pub fn new(
        certificate: PerronCertificate,
        projection_norms: Vec<f64>,
        variant: RateVariant,
    ) -> Result<Self> {
        if certificate.side != variant.side() {
            return Err(Error::InvalidCertificate(format!(
                "{variant:?} needs a {:?} certificate, got {:?}",
                variant.side(),
                certificate.side
            )));
        }
        if projection_norms.len() != certificate.w.len() {
            return Err(Error::Dimension(format!(
                "{} projection norms for {} weights",
                projection_norms.len(),
                certificate.w.len()
            )));
        }
        Ok(Self {
            certificate,
            projection_norms,
            variant,
        })
    }

    /// Certificate for `e` on the side the variant requires, with the
    /// Euclidean norms of the system's projections.
    pub fn for_system(
        sys: &SubspaceSystem,
        e: &InteractionMatrix,
        variant: RateVariant,
    ) -> Result<Self> {
        let cert = perron_certificate_auto(e, variant.side())?;
        let norms = sys
            .projections()
            .iter()
            .map(ProjectionOperator::norm)
            .collect();
        Self::new(cert, norms, variant)
    }

    /// The `N`-independent factor in front of `alpha^N / (1 - alpha)`.
    pub fn constant(&self) -> f64 {
        let w = &self.certificate.w;
        let norms = &self.projection_norms;
        match self.variant {
            RateVariant::WeightedInf => {
                let total: f64 = w.iter().sum();
                let worst = w
                    .iter()
                    .zip(norms)
                    .map(|(wi, p)| p / wi)
                    .fold(0.0, f64::max);
                total * worst
            }
            RateVariant::WeightedOne => {
                let total: f64 = w.iter().zip(norms).map(|(wi, p)| wi * p).sum();
                let worst = w.iter().map(|wi| 1.0 / wi).fold(0.0, f64::max);
                total * worst
            }
        }
    }
}

/// Upper bound on `||I - (I - A)^N - P||`.
pub fn rate_bound(rb: &RateBound, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("rate bounds start at N = 1".into()));
    }
    let alpha = rb.certificate.alpha;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidCertificate(format!(
            "alpha = {alpha} is outside [0, 1)"
        )));
    }
    let exponent =
        i32::try_from(n).map_err(|_| Error::Precondition(format!("N = {n} too large")))?;
    Ok(rb.constant() * alpha.powi(exponent) / (1.0 - alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationViolation {
    pub step: usize,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub variant: RateVariant,
    pub checked: usize,
    /// Largest `residual - bound` over the trace.
    pub worst_margin: f64,
    pub violations: Vec<DominationViolation>,
}

impl DominationReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `residual_N <= bound(N) + 1e-9` at every recorded step.
pub fn verify_rate_domination(trace: &IterationTrace, rb: &RateBound) -> Result<DominationReport> {
    let mut violations = Vec::new();
    let mut worst_margin = f64::NEG_INFINITY;
    for (k, &residual) in trace.residuals.iter().enumerate() {
        let step = k + 1;
        let bound = rate_bound(rb, step)?;
        worst_margin = worst_margin.max(residual - bound);
        if residual > bound + DOMINATION_SLACK {
            violations.push(DominationViolation {
                step,
                residual,
                bound,
            });
        }
    }
    Ok(DominationReport {
        variant: rb.variant,
        checked: trace.residuals.len(),
        worst_margin,
        violations,
    })
}

/// Projection onto the full sum for a reducible interaction pattern: each
/// block `b` of `blocks` is iterated separately to `P̃_b`, then the blocks
/// are combined as `I - (I - P̃_1) ... (I - P̃_m)`.
pub fn compose_reducible(
    sys: &SubspaceSystem,
    blocks: &BlockStructure,
    tol: f64,
) -> Result<ProjectionOperator> {
    let d = sys.ambient_dim();
    let e = interaction_matrix(sys)?;
    let identity = DMatrix::<f64>::identity(d, d);
    let mut product = identity.clone();
    for (b, indices) in blocks.blocks.iter().enumerate() {
        let sub_e = e.principal(indices);
        let radius = spectral_radius(&sub_e, 1e-12)?;
        if !minor_test(&sub_e) || radius >= 1.0 {
            return Err(Error::BlockFailure {
                block: b,
                indices: indices.clone(),
                radius,
            });
        }
        let sub = sys.subsystem(indices);
        let block_projection = if indices.len() == 1 {
            sub.projections()[0].matrix().clone()
        } else {
            let alpha = perron_certificate_auto(&sub_e, Side::Row)
                .ok()
                .map(|c| c.alpha);
            iterate_sum_projection(&sub, tol, default_max_steps(alpha))?
                .limit
                .matrix()
                .clone()
        };
        product *= &identity - block_projection;
    }
    Ok(ProjectionOperator::from_matrix_unchecked(
        identity - product,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{coupled_system, rng};
    use crate::specmat::block_structure;
    use crate::subspaces::{
        annihilating_projection, kernel_intersection, orthogonal_projection, Subspace,
    };
    use nalgebra::DVector;

    fn line(v: &[f64]) -> Subspace {
        Subspace::from_vectors(&[DVector::from_row_slice(v)]).unwrap()
    }

    fn sixty_degree_lines() -> SubspaceSystem {
        let t = std::f64::consts::FRAC_PI_3;
        SubspaceSystem::orthogonal(vec![line(&[1.0, 0.0, 0.0]), line(&[t.cos(), t.sin(), 0.0])])
            .unwrap()
    }

    /// Lines `e_1` and `e_2`, with `P_i` annihilating the other line.
    fn annihilating_pair() -> SubspaceSystem {
        let x1 = line(&[1.0, 0.0, 0.0]);
        let x2 = line(&[0.0, 1.0, 1.0]);
        let p1 = annihilating_projection(&x1, &x2).unwrap();
        let p2 = annihilating_projection(&x2, &x1).unwrap();
        SubspaceSystem::new(vec![x1, x2], vec![p1, p2]).unwrap()
    }

    #[test]
    fn sum_operator_of_single_projection() {
        let sys = SubspaceSystem::orthogonal(vec![line(&[1.0, 2.0])]).unwrap();
        let a = sum_operator(&sys);
        assert!((&a * &a - &a).amax() < 1e-15);
    }

    #[test]
    fn sum_operator_of_annihilating_projections_is_idempotent() {
        let a = sum_operator(&annihilating_pair());
        assert!((&a * &a - &a).amax() < 1e-14);
    }

    #[test]
    fn sum_operator_eigenvalues_for_sixty_degrees() {
        let a = sum_operator(&sixty_degree_lines());
        let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        assert!((ev[0] - 1.5).abs() < 1e-14);
        assert!((ev[1] - 0.5).abs() < 1e-14);
        assert!(ev[2].abs() < 1e-14);
    }

    #[test]
    fn annihilating_system_converges_in_one_step() {
        let sys = annihilating_pair();
        let trace = iterate_sum_projection(&sys, DEFAULT_TOL, 100).unwrap();
        assert_eq!(trace.steps, 1);
        assert!((trace.limit.matrix() - sum_operator(&sys)).amax() < 1e-14);
        assert_eq!(trace.residuals, vec![0.0]);
    }

    #[test]
    fn sixty_degree_limit_is_orthogonal_projection_onto_plane() {
        let sys = sixty_degree_lines();
        let trace = iterate_sum_projection(&sys, DEFAULT_TOL, 1000).unwrap();
        let plane = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(linalg::op_norm(&(trace.limit.matrix() - &plane)) < 1e-8);
        let direct = direct_sum_projection(&sys).unwrap();
        assert!(linalg::op_norm(&(trace.limit.matrix() - direct.matrix())) < 1e-8);
    }

    #[test]
    fn triangular_system_matches_product_formula() {
        let x1 = line(&[1.0, 0.2, 0.0]);
        let x2 = line(&[0.3, 1.0, 0.1]);
        let x3 = line(&[0.2, 0.4, 1.0]);
        let p1 = orthogonal_projection(&x1).unwrap();
        // P_2 vanishes on X_1; P_3 vanishes on X_1 + X_2.
        let p2 = annihilating_projection(&x2, &x1).unwrap();
        let x12 = Subspace::new(crate::linalg::hstack(&[x1.basis(), x2.basis()], 3)).unwrap();
        let p3 = annihilating_projection(&x3, &x12).unwrap();
        let id = DMatrix::<f64>::identity(3, 3);
        let product = &id - (&id - p1.matrix()) * (&id - p2.matrix()) * (&id - p3.matrix());
        let sys = SubspaceSystem::new(vec![x1, x2, x3], vec![p1, p2, p3]).unwrap();
        let trace = iterate_sum_projection(&sys, DEFAULT_TOL, 1000).unwrap();
        assert!(linalg::op_norm(&(trace.limit.matrix() - &product)) < 1e-8);
    }

    #[test]
    fn direct_projection_single_subspace() {
        let sys = SubspaceSystem::orthogonal(vec![line(&[1.0, 1.0, 0.0])]).unwrap();
        let p = direct_sum_projection(&sys).unwrap();
        assert!((p.matrix() - sys.projections()[0].matrix()).amax() < 1e-14);
    }

    #[test]
    fn direct_projection_annihilating_system_is_sum() {
        let sys = annihilating_pair();
        let p = direct_sum_projection(&sys).unwrap();
        assert!((p.matrix() - sum_operator(&sys)).amax() < 1e-13);
    }

    #[test]
    fn direct_projection_reports_singular_gram() {
        let a = line(&[1.0, 0.0]);
        let sys = SubspaceSystem::orthogonal(vec![a.clone(), a]).unwrap();
        assert!(matches!(
            direct_sum_projection(&sys),
            Err(Error::GramSingular { .. })
        ));
    }

    #[test]
    fn identical_lines_diverge_or_stall() {
        let a = line(&[1.0, 0.0]);
        let sys = SubspaceSystem::orthogonal(vec![a.clone(), a]).unwrap();
        // (I - 2P)^N oscillates with norm 1 on the line.
        assert!(matches!(
            iterate_sum_projection(&sys, 1e-12, 50),
            Err(Error::Divergence { steps: 50, .. })
        ));
    }

    #[test]
    fn restricted_norms_match_full_norms() {
        let mut r = rng(21);
        let sys = coupled_system(&mut r, 6, &[2, 1, 2], 0.4, true);
        let trace = iterate_sum_projection(&sys, 1e-13, 5000).unwrap();
        // Recompute the residuals with full SVD norms.
        let d = sys.ambient_dim();
        let id = DMatrix::<f64>::identity(d, d);
        let step = &id - sum_operator(&sys);
        let mut rn = step.clone();
        for k in 0..trace.steps {
            let full = linalg::op_norm(&(&id - &rn - trace.limit.matrix()));
            assert!(
                (full - trace.residuals[k]).abs() < 1e-11,
                "step {}: {full} vs {}",
                k + 1,
                trace.residuals[k]
            );
            rn = &rn * &step;
        }
    }

    #[test]
    fn rate_bound_substitution() {
        let cert = PerronCertificate::new(0.5, DVector::from_element(1, 1.0), Side::Row).unwrap();
        let rb = RateBound::new(cert, vec![1.0], RateVariant::WeightedInf).unwrap();
        assert!((rate_bound(&rb, 1).unwrap() - 1.0).abs() < 1e-15);

        let cert = PerronCertificate::new(0.5, DVector::from_element(2, 1.0), Side::Row).unwrap();
        let rb = RateBound::new(cert, vec![1.0, 1.0], RateVariant::WeightedInf).unwrap();
        assert!((rate_bound(&rb, 3).unwrap() - 0.5).abs() < 1e-15);
        assert!(rate_bound(&rb, 0).is_err());
    }

    #[test]
    fn rate_bound_rejects_side_mismatch() {
        let cert =
            PerronCertificate::new(0.5, DVector::from_element(2, 1.0), Side::Column).unwrap();
        assert!(RateBound::new(cert, vec![1.0, 1.0], RateVariant::WeightedInf).is_err());
    }

    #[test]
    fn rate_bound_decays_by_alpha() {
        let cert =
            PerronCertificate::new(0.37, DVector::from_vec(vec![0.4, 1.3, 2.0]), Side::Column)
                .unwrap();
        let rb = RateBound::new(cert, vec![1.2, 3.4, 1.0], RateVariant::WeightedOne).unwrap();
        for n in 1..40 {
            let ratio = rate_bound(&rb, n + 1).unwrap() / rate_bound(&rb, n).unwrap();
            assert!((ratio - 0.37).abs() <= 1e-14 * 0.37);
        }
    }

    #[test]
    fn domination_for_annihilating_system() {
        let sys = annihilating_pair();
        let trace = iterate_sum_projection(&sys, DEFAULT_TOL, 10).unwrap();
        let e = interaction_matrix(&sys).unwrap();
        let rb = RateBound::for_system(&sys, &e, RateVariant::WeightedInf).unwrap();
        assert!(verify_rate_domination(&trace, &rb).unwrap().holds());
    }

    #[test]
    fn domination_for_sixty_degrees_with_hand_certificate() {
        let sys = sixty_degree_lines();
        let trace = iterate_sum_projection(&sys, DEFAULT_TOL, 1000).unwrap();
        for (variant, side) in [
            (RateVariant::WeightedInf, Side::Row),
            (RateVariant::WeightedOne, Side::Column),
        ] {
            let cert = PerronCertificate::new(0.5, DVector::from_element(2, 1.0), side).unwrap();
            let rb = RateBound::new(cert, vec![1.0, 1.0], variant).unwrap();
            let report = verify_rate_domination(&trace, &rb).unwrap();
            assert!(report.holds(), "{report:?}");
        }
        assert!(trace.eventually_monotone(1e-15));
    }

    #[test]
    fn domination_near_the_boundary() {
        let c: f64 = 0.99;
        let s = (1.0 - c * c).sqrt();
        let sys = SubspaceSystem::orthogonal(vec![line(&[1.0, 0.0]), line(&[c, s])]).unwrap();
        let e = interaction_matrix(&sys).unwrap();
        assert!((spectral_radius(&e, 1e-13).unwrap() - 0.99).abs() < 1e-12);
        let rb = RateBound::for_system(&sys, &e, RateVariant::WeightedInf).unwrap();
        let trace = iterate_sum_projection(
            &sys,
            DEFAULT_TOL,
            default_max_steps(Some(rb.certificate.alpha)),
        )
        .unwrap();
        assert!(trace.steps > 100);
        assert!(verify_rate_domination(&trace, &rb).unwrap().holds());
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(linalg::op_norm(&(trace.limit.matrix() - id)) < 1e-8);
    }

    #[test]
    fn limit_kernel_is_kernel_intersection() {
        let mut r = rng(9);
        let sys = coupled_system(&mut r, 7, &[1, 2, 1], 0.3, true);
        let trace = iterate_sum_projection(&sys, DEFAULT_TOL, 5000).unwrap();
        let k = kernel_intersection(sys.projections()).unwrap();
        assert_eq!(k.dim(), 7 - 4);
        assert!((trace.limit.matrix() * k.basis()).amax() < 1e-9);
        for s in sys.subspaces() {
            assert!((trace.limit.matrix() * s.basis() - s.basis()).amax() < 1e-9);
        }
    }

    #[test]
    fn compose_singletons_is_product_formula() {
        let x1 = line(&[1.0, 0.0, 0.0]);
        let x2 = line(&[0.5, 1.0, 0.0]);
        let x3 = line(&[0.3, 0.2, 1.0]);
        let p1 = orthogonal_projection(&x1).unwrap();
        let p2 = annihilating_projection(&x2, &x1).unwrap();
        let x12 = Subspace::new(crate::linalg::hstack(&[x1.basis(), x2.basis()], 3)).unwrap();
        let p3 = annihilating_projection(&x3, &x12).unwrap();
        let sys = SubspaceSystem::new(vec![x1, x2, x3], vec![p1, p2, p3]).unwrap();
        let e = interaction_matrix(&sys).unwrap();
        let blocks = block_structure(&e);
        assert_eq!(blocks.blocks.len(), 3);
        let p = compose_reducible(&sys, &blocks, DEFAULT_TOL).unwrap();
        assert!(p.idempotence_defect() < 1e-10);
        for s in sys.subspaces() {
            assert!((p.matrix() * s.basis() - s.basis()).amax() < 1e-10);
        }
    }

    #[test]
    fn compose_single_block_equals_iteration() {
        let mut r = rng(4);
        let sys = coupled_system(&mut r, 5, &[1, 1, 2], 0.3, false);
        let e = interaction_matrix(&sys).unwrap();
        let blocks = BlockStructure {
            permutation: vec![0, 1, 2],
            blocks: vec![vec![0, 1, 2]],
        };
        let p = compose_reducible(&sys, &blocks, DEFAULT_TOL).unwrap();
        assert!(spectral_radius(&e, 1e-12).unwrap() < 1.0);
        let trace = iterate_sum_projection(&sys, DEFAULT_TOL, 5000).unwrap();
        assert!(linalg::op_norm(&(p.matrix() - trace.limit.matrix())) < 1e-12);
    }

    #[test]
    fn compose_names_failing_block() {
        let a = line(&[1.0, 0.0, 0.0]);
        let sys = SubspaceSystem::orthogonal(vec![a.clone(), a, line(&[0.0, 0.0, 1.0])]).unwrap();
        let e = interaction_matrix(&sys).unwrap();
        let blocks = block_structure(&e);
        match compose_reducible(&sys, &blocks, DEFAULT_TOL) {
            Err(Error::BlockFailure { indices, .. }) => assert_eq!(indices, vec![0, 1]),
            other => panic!("expected block failure, got {other:?}"),
        }
    }
}
