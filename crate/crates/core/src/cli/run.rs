//! Pipelines behind the `subsum` subcommands. Each returns the artifacts to
//! write plus an optional failure that still lets the artifacts be written.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::format::{trace_rows, ProbabilityModel, SubspaceProblem};
use super::report::{
    finite, rows_of, AnalysisReport, Artifact, BoundSummary, CertificateSummary, IterationReport,
    MarginalIteration, MarginalReport, PairChecks, PairwiseReport, Report, SharpReport,
    TensorReport,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::marginal::{
    covariance_inequality_check, interaction_from_psi, lemma_bound_check, marginal_sum_projection,
    psi_prime, scaled_system, Exponent, Partition,
};
use crate::sharpness::{
    build_sharp_example, rescale_to_unit_radius, verify_norm_identities, UNIT_RADIUS_TOL,
};
use crate::specmat::{
    block_structure, criterion_verdict, minor_test, perron_certificate, perron_certificate_auto,
    InteractionMatrix, PerronCertificate, Side, Verdict,
};
use crate::subspaces::{interaction_matrix, SubspaceSystem};
use crate::sumproj::{
    default_max_steps, iterate_sum_projection, verify_rate_domination, IterationTrace, RateBound,
    RateVariant, DEFAULT_TOL,
};
use crate::tensorpow::{
    min_angle_cosine, tensor_dim, tensor_interaction, tensor_sum_projection_e,
    tensor_sum_projection_pairwise, DEFAULT_SIZE_CAP,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    /// `None` selects a budget from the certified contraction factor.
    pub max_steps: Option<usize>,
    /// `None` selects the default certificate perturbation.
    pub delta: Option<f64>,
    pub seed: u64,
    pub size_cap: usize,
    pub force: bool,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_steps: None,
            delta: None,
            seed: DEFAULT_SEED,
            size_cap: DEFAULT_SIZE_CAP,
            force: false,
            samples: crate::sharpness::DEFAULT_SAMPLES,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Precondition(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_steps == Some(0) {
            return Err(Error::Precondition("max-steps must be at least 1".into()));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Precondition(format!(
                    "delta must be positive, got {d}"
                )));
            }
        }
        if self.samples == 0 {
            return Err(Error::Precondition("samples must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorMode {
    ECriterion,
    Pairwise,
}

impl FromStr for TensorMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "e-criterion" | "e_criterion" | "E_criterion" => Ok(Self::ECriterion),
            "pairwise" => Ok(Self::Pairwise),
            other => Err(format!(
                "unknown tensor mode `{other}` (expected e-criterion or pairwise)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Iterate,
    Sharp { y_dim: usize, z_dim: usize },
    Marginal,
    Tensor { m: usize, mode: TensorMode },
}

#[derive(Debug)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    /// Human-readable messages for stderr.
    pub notices: Vec<String>,
    /// Set when the artifacts describe a failed run.
    pub failure: Option<Error>,
}

impl RunOutput {
    fn ok(artifacts: Vec<Artifact>, notices: Vec<String>) -> Self {
        Self {
            artifacts,
            notices,
            failure: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, exit_code)
    }
}

/// 0 success, 2 parse error, 3 criterion failure, 4 divergence, 5 size
/// cap, 1 anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 2,
        Error::CriterionFails { .. }
        | Error::BlockFailure { .. }
        | Error::NoCertificate { .. }
        | Error::Intersection => 3,
        Error::Divergence { .. } | Error::NoConvergence { .. } => 4,
        Error::SizeCap { .. } => 5,
        _ => 1,
    }
}

pub fn run(cmd: Command, input: &str, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cmd {
        Command::Analyze => run_analyze(&SubspaceProblem::parse(input)?, cfg),
        Command::Iterate => run_iterate(&SubspaceProblem::parse(input)?, cfg),
        Command::Sharp { y_dim, z_dim } => {
            run_sharp(&super::format::parse_interaction(input)?, y_dim, z_dim, cfg)
        }
        Command::Marginal => run_marginal(&ProbabilityModel::parse(input)?, cfg),
        Command::Tensor { m, mode } => run_tensor(&SubspaceProblem::parse(input)?, m, mode, cfg),
    }
}

/// Writes every artifact under `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), a.render()?)?;
    }
    Ok(())
}

fn certificate(e: &InteractionMatrix, side: Side, cfg: &RunConfig) -> Option<PerronCertificate> {
    match cfg.delta {
        Some(delta) => perron_certificate(e, delta, side).ok(),
        None => perron_certificate_auto(e, side).ok(),
    }
}

fn rate_bounds(
    sys: &SubspaceSystem,
    e: &InteractionMatrix,
    cfg: &RunConfig,
) -> (Option<RateBound>, Option<RateBound>) {
    let norms: Vec<f64> = sys.projections().iter().map(|p| p.norm()).collect();
    let bound = |variant: RateVariant| {
        certificate(e, variant.side(), cfg)
            .and_then(|c| RateBound::new(c, norms.clone(), variant).ok())
    };
    (
        bound(RateVariant::WeightedInf),
        bound(RateVariant::WeightedOne),
    )
}

fn max_steps(cfg: &RunConfig, inf: Option<&RateBound>) -> usize {
    cfg.max_steps
        .unwrap_or_else(|| default_max_steps(inf.map(|rb| rb.certificate.alpha)))
}

fn bound_summaries(
    trace: &IterationTrace,
    bounds: [Option<&RateBound>; 2],
) -> Result<Vec<BoundSummary>> {
    bounds
        .into_iter()
        .flatten()
        .map(|rb| Ok(BoundSummary::new(rb, &verify_rate_domination(trace, rb)?)))
        .collect()
}

fn resolve_interaction(
    problem: &SubspaceProblem,
    sys: &SubspaceSystem,
) -> Result<(InteractionMatrix, bool)> {
    match problem.epsilon_override()? {
        Some(e) => Ok((e, true)),
        None => Ok((interaction_matrix(sys)?, false)),
    }
}

pub fn run_analyze(problem: &SubspaceProblem, cfg: &RunConfig) -> Result<RunOutput> {
    let sys = problem.to_system()?;
    let (e, overridden) = resolve_interaction(problem, &sys)?;
    let (verdict, bracket) = criterion_verdict(&e)?;
    let blocks = block_structure(&e);
    let sum_dim = sys.sum_dim();
    let total_dim = sys.total_dim();
    let mut notes = Vec::new();
    if overridden {
        notes.push("interaction matrix taken from the epsilon override".to_string());
    }
    match verdict {
        Verdict::CriterionFails if sum_dim == total_dim => {
            let whole = if sum_dim == sys.ambient_dim() {
                ", the whole space"
            } else {
                ""
            };
            notes.push(format!(
                "criterion fails, yet the subspaces are linearly independent and sum to a subspace of dimension {sum_dim}{whole}; r(E) < 1 is sufficient, not necessary"
            ));
        }
        Verdict::Boundary => notes.push(format!(
            "spectral radius is within {} of 1; iterate requires --force",
            crate::specmat::BOUNDARY_TOL
        )),
        _ => {}
    }
    if !blocks.is_irreducible() {
        notes.push(format!(
            "E is reducible with {} irreducible blocks",
            blocks.blocks.len()
        ));
    }
    let report = AnalysisReport {
        ambient_dim: sys.ambient_dim(),
        subspace_dims: sys.subspaces().iter().map(|s| s.dim()).collect(),
        e: rows_of(e.entries()),
        e_overridden: overridden,
        radius: bracket.midpoint(),
        radius_lower: bracket.lower,
        radius_upper: bracket.upper,
        minor_test: minor_test(&e),
        verdict,
        row_certificate: certificate(&e, Side::Row, cfg)
            .as_ref()
            .map(CertificateSummary::from),
        column_certificate: certificate(&e, Side::Column, cfg)
            .as_ref()
            .map(CertificateSummary::from),
        blocks: blocks.blocks.clone(),
        sum_dim,
        total_dim,
        notes: notes.clone(),
    };
    Ok(RunOutput::ok(
        vec![
            Artifact::matrix("e.mat", e.entries().clone()),
            Artifact::report("report.json", Report::Analysis(report)),
        ],
        notes,
    ))
}

pub fn run_iterate(problem: &SubspaceProblem, cfg: &RunConfig) -> Result<RunOutput> {
    let sys = problem.to_system()?;
    let (e, _) = resolve_interaction(problem, &sys)?;
    let (verdict, bracket) = criterion_verdict(&e)?;
    let mut notices = Vec::new();
    if verdict != Verdict::CriterionHolds {
        if !cfg.force {
            return Err(Error::CriterionFails {
                radius: bracket.midpoint(),
            });
        }
        notices.push(format!(
            "verdict is {verdict}; iterating anyway because of --force"
        ));
    }
    let (inf, one) = rate_bounds(&sys, &e, cfg);
    let trace = iterate_sum_projection(&sys, cfg.tol, max_steps(cfg, inf.as_ref()))?;
    let rows = trace_rows(&trace, inf.as_ref(), one.as_ref())?;
    let bounds = bound_summaries(&trace, [inf.as_ref(), one.as_ref()])?;
    for b in bounds.iter().filter(|b| !b.dominated) {
        notices.push(format!(
            "{:?} bound is violated by {:?}",
            b.variant, b.worst_margin
        ));
    }
    let report = IterationReport {
        verdict,
        radius: bracket.midpoint(),
        forced: verdict != Verdict::CriterionHolds,
        steps: trace.steps,
        final_gap: trace.gaps.last().copied().unwrap_or(0.0),
        idempotence_defect: trace.limit.idempotence_defect(),
        sum_dim: sys.sum_dim(),
        total_dim: sys.total_dim(),
        bounds,
    };
    Ok(RunOutput::ok(
        vec![
            Artifact::trace("trace.csv", rows),
            Artifact::matrix("projection.mat", trace.limit.matrix().clone()),
            Artifact::report("report.json", Report::Iteration(report)),
        ],
        notices,
    ))
}

pub fn run_sharp(
    e: &InteractionMatrix,
    y_dim: usize,
    z_dim: usize,
    cfg: &RunConfig,
) -> Result<RunOutput> {
    let radius = crate::specmat::spectral_radius(e, 1e-14)?;
    let mut notices = Vec::new();
    let (e, rescaled_from) = if (radius - 1.0).abs() > UNIT_RADIUS_TOL {
        notices.push(format!("r(E) = {radius}; using E / r(E)"));
        (rescale_to_unit_radius(e)?, Some(radius))
    } else {
        (e.clone(), None)
    };
    let ex = build_sharp_example(&e, y_dim, z_dim)?;
    let identities = verify_norm_identities(&ex, cfg.samples, cfg.seed)?;
    let n = ex.n();
    let stack = |vs: &[nalgebra::DVector<f64>]| DMatrix::from_fn(n, n, |i, k| vs[i][k]);
    let mut artifacts = vec![
        Artifact::matrix("e.mat", e.entries().clone()),
        Artifact::matrix("u.mat", stack(&ex.u_vectors)),
        Artifact::matrix("v.mat", stack(&ex.v_vectors)),
    ];
    for (i, p) in ex.system.projections().iter().enumerate() {
        artifacts.push(Artifact::matrix(
            format!("projection_{}.mat", i + 1),
            p.matrix().clone(),
        ));
    }
    let passed = identities.passed;
    artifacts.push(Artifact::report(
        "report.json",
        Report::Sharp(SharpReport {
            rescaled_from,
            e: rows_of(e.entries()),
            y_dim,
            z_dim,
            ambient_dim: ex.ambient_dim(),
            identities,
        }),
    ));
    let failure = (!passed)
        .then(|| Error::Precondition("norm identities of the sharp example failed".into()));
    Ok(RunOutput {
        artifacts,
        notices,
        failure,
    })
}

/// Independent stream for check `tag` under `seed`.
fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ (tag + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run_marginal(model: &ProbabilityModel, cfg: &RunConfig) -> Result<RunOutput> {
    let ms = model.to_system(Exponent::Two)?;
    let n = ms.n();
    let psi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            psi_prime(&ms.partitions[i], &ms.partitions[j], &ms.space)
        }
    });
    let e = interaction_from_psi(&ms);
    let (verdict, bracket) = criterion_verdict(&e)?;

    let mut checks = Vec::new();
    let mut tag = 0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let (a, b) = (&ms.partitions[i], &ms.partitions[j]);
            let mut lemma = Vec::new();
            let mut covariance = Vec::new();
            for p in Exponent::ALL {
                lemma.push(lemma_bound_check(
                    a,
                    b,
                    &ms.space,
                    p,
                    cfg.samples,
                    sub_seed(cfg.seed, tag),
                )?);
                covariance.push(covariance_inequality_check(
                    a,
                    b,
                    &ms.space,
                    p,
                    cfg.samples,
                    sub_seed(cfg.seed, tag + 1),
                )?);
                tag += 2;
            }
            checks.push(PairChecks {
                i,
                j,
                lemma,
                covariance,
            });
        }
    }
    let checks_hold = checks
        .iter()
        .all(|c| c.lemma.iter().all(|r| r.holds()) && c.covariance.iter().all(|r| r.holds()));

    let mut artifacts = vec![
        Artifact::matrix("psi_prime.mat", psi.clone()),
        Artifact::matrix("e.mat", e.entries().clone()),
    ];
    let mut notices = Vec::new();
    let mut iteration = None;
    let all_trivial = ms.partitions.iter().all(Partition::is_trivial);
    if verdict == Verdict::CriterionHolds && !all_trivial {
        let mp = marginal_sum_projection(&ms, cfg.tol)?;
        let (sys, included) = scaled_system(&ms)?;
        let sub_e = e.principal(&included);
        let (inf, one) = rate_bounds(&sys, &sub_e, cfg);
        artifacts.push(Artifact::trace(
            "trace.csv",
            trace_rows(&mp.trace, inf.as_ref(), one.as_ref())?,
        ));
        artifacts.push(Artifact::matrix("projection.mat", mp.projection.clone()));
        iteration = Some(MarginalIteration {
            steps: mp.trace.steps,
            final_gap: mp.trace.gaps.last().copied().unwrap_or(0.0),
            sum_dim: mp.sum_dim,
        });
    } else if verdict != Verdict::CriterionHolds {
        notices.push(format!("verdict is {verdict}; no iteration run"));
    }
    if !checks_hold {
        notices.push("a sampled inequality check failed; see report.json".into());
    }
    artifacts.push(Artifact::report(
        "report.json",
        Report::Marginal(MarginalReport {
            atoms: ms.space.size(),
            block_counts: ms.partitions.iter().map(Partition::block_count).collect(),
            psi_prime: rows_of(&psi),
            e: rows_of(e.entries()),
            radius: bracket.midpoint(),
            verdict,
            checks,
            checks_hold,
            iteration,
        }),
    ));
    let failure =
        (!checks_hold).then(|| Error::Precondition("marginal inequality check failed".into()));
    Ok(RunOutput {
        artifacts,
        notices,
        failure,
    })
}

pub fn run_tensor(
    problem: &SubspaceProblem,
    m: usize,
    mode: TensorMode,
    cfg: &RunConfig,
) -> Result<RunOutput> {
    if m == 0 {
        return Err(Error::Precondition(
            "tensor power must be at least 1".into(),
        ));
    }
    let sys = problem.to_system()?;
    let dim = tensor_dim(sys.ambient_dim(), m, cfg.size_cap)?;
    match mode {
        TensorMode::ECriterion => run_tensor_e(&sys, m, dim, cfg),
        TensorMode::Pairwise => {
            let pc = tensor_sum_projection_pairwise(&sys, m, cfg.size_cap)?;
            let report = PairwiseReport {
                m,
                tensor_dim: dim,
                factor_ranks: pc.powers.iter().map(|s| s.dim()).collect(),
                range_defect: pc.range_defect,
                annihilation_defect: pc.annihilation_defect,
                idempotence_defect: pc.projection.idempotence_defect(),
                rank: linalg::rank(pc.projection.matrix()),
            };
            Ok(RunOutput::ok(
                vec![
                    Artifact::matrix("projection.mat", pc.projection.matrix().clone()),
                    Artifact::report("report.json", Report::Pairwise(report)),
                ],
                Vec::new(),
            ))
        }
    }
}

fn run_tensor_e(sys: &SubspaceSystem, m: usize, dim: usize, cfg: &RunConfig) -> Result<RunOutput> {
    let n = sys.n();
    let mut cosines = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = min_angle_cosine(&sys.subspaces()[i], &sys.subspaces()[j])?;
            cosines[(i, j)] = c;
            cosines[(j, i)] = c;
        }
    }
    let e_m = tensor_interaction(sys, m)?;
    let (verdict, bracket) = criterion_verdict(&e_m)?;
    let mut report = TensorReport {
        m,
        tensor_dim: dim,
        cosines: rows_of(&cosines),
        e_m: rows_of(e_m.entries()),
        radius: bracket.midpoint(),
        verdict,
        steps: None,
        sum_dim: None,
        norm_identity_deviation: None,
    };
    let mut artifacts = vec![Artifact::matrix("e_m.mat", e_m.entries().clone())];
    if verdict != Verdict::CriterionHolds {
        artifacts.push(Artifact::report("report.json", Report::Tensor(report)));
        return Ok(RunOutput {
            artifacts,
            notices: vec![format!(
                "r(E^(m)) = {} at m = {m}; no iteration run",
                bracket.midpoint()
            )],
            failure: Some(Error::CriterionFails {
                radius: bracket.midpoint(),
            }),
        });
    }
    let it = tensor_sum_projection_e(sys, m, cfg.tol, cfg.size_cap)?;
    let (inf, one) = rate_bounds(&it.tensor.system, &it.interaction, cfg);
    artifacts.push(Artifact::trace(
        "trace.csv",
        trace_rows(&it.trace, inf.as_ref(), one.as_ref())?,
    ));
    report.steps = Some(it.trace.steps);
    report.sum_dim = Some(it.sum_dim);
    report.norm_identity_deviation = finite(it.norm_identity_deviation);
    artifacts.push(Artifact::report("report.json", Report::Tensor(report)));
    Ok(RunOutput::ok(artifacts, Vec::new()))
}
