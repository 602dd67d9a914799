//! JSON reports and the artifact container written by each pipeline.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::format::{format_matrix, format_trace_csv, parse_matrix, parse_trace_csv, TraceRow};
use crate::error::{Error, Result};
use crate::marginal::{CovarianceReport, LemmaReport};
use crate::sharpness::NormIdentityReport;
use crate::specmat::{PerronCertificate, Side, Verdict};
use crate::sumproj::{DominationReport, RateBound, RateVariant};

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

/// Non-finite values have no JSON representation; they become `None`.
pub(crate) fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub side: Side,
    pub alpha: f64,
    pub w: Vec<f64>,
}

impl From<&PerronCertificate> for CertificateSummary {
    fn from(c: &PerronCertificate) -> Self {
        Self {
            side: c.side,
            alpha: c.alpha,
            w: c.w.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub ambient_dim: usize,
    pub subspace_dims: Vec<usize>,
    pub e: Vec<Vec<f64>>,
    pub e_overridden: bool,
    pub radius: f64,
    pub radius_lower: f64,
    pub radius_upper: f64,
    pub minor_test: bool,
    pub verdict: Verdict,
    pub row_certificate: Option<CertificateSummary>,
    pub column_certificate: Option<CertificateSummary>,
    pub blocks: Vec<Vec<usize>>,
    pub sum_dim: usize,
    pub total_dim: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub variant: RateVariant,
    pub alpha: f64,
    pub constant: f64,
    pub checked: usize,
    pub worst_margin: Option<f64>,
    pub dominated: bool,
}

impl BoundSummary {
    pub fn new(rb: &RateBound, report: &DominationReport) -> Self {
        Self {
            variant: rb.variant,
            alpha: rb.certificate.alpha,
            constant: rb.constant(),
            checked: report.checked,
            worst_margin: finite(report.worst_margin),
            dominated: report.holds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub verdict: Verdict,
    pub radius: f64,
    pub forced: bool,
    pub steps: usize,
    pub final_gap: f64,
    pub idempotence_defect: f64,
    pub sum_dim: usize,
    pub total_dim: usize,
    pub bounds: Vec<BoundSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpReport {
    /// Radius of the input matrix when it had to be rescaled.
    pub rescaled_from: Option<f64>,
    pub e: Vec<Vec<f64>>,
    pub y_dim: usize,
    pub z_dim: usize,
    pub ambient_dim: usize,
    pub identities: NormIdentityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairChecks {
    pub i: usize,
    pub j: usize,
    pub lemma: Vec<LemmaReport>,
    pub covariance: Vec<CovarianceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalIteration {
    pub steps: usize,
    pub final_gap: f64,
    pub sum_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub atoms: usize,
    pub block_counts: Vec<usize>,
    pub psi_prime: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
    pub radius: f64,
    pub verdict: Verdict,
    pub checks: Vec<PairChecks>,
    pub checks_hold: bool,
    pub iteration: Option<MarginalIteration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorReport {
    pub m: usize,
    pub tensor_dim: usize,
    pub cosines: Vec<Vec<f64>>,
    pub e_m: Vec<Vec<f64>>,
    pub radius: f64,
    pub verdict: Verdict,
    pub steps: Option<usize>,
    pub sum_dim: Option<usize>,
    pub norm_identity_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub m: usize,
    pub tensor_dim: usize,
    pub factor_ranks: Vec<usize>,
    pub range_defect: f64,
    pub annihilation_defect: f64,
    pub idempotence_defect: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Analysis(AnalysisReport),
    Iteration(IterationReport),
    Sharp(SharpReport),
    Marginal(MarginalReport),
    Tensor(TensorReport),
    Pairwise(PairwiseReport),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Matrix(DMatrix<f64>),
    Trace(Vec<TraceRow>),
    Report(Box<Report>),
}

/// A named output file. The extension selects the format: `.mat`, `.csv`
/// or `.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub payload: Payload,
}

impl Artifact {
    pub fn matrix(name: impl Into<String>, m: DMatrix<f64>) -> Self {
        Self {
            name: name.into(),
            payload: Payload::Matrix(m),
        }
    }

    pub fn trace(name: impl Into<String>, rows: Vec<TraceRow>) -> Self {
        Self {
            name: name.into(),
            payload: Payload::Trace(rows),
        }
    }

    pub fn report(name: impl Into<String>, report: Report) -> Self {
        Self {
            name: name.into(),
            payload: Payload::Report(Box::new(report)),
        }
    }

    pub fn render(&self) -> Result<String> {
        match &self.payload {
            Payload::Matrix(m) => Ok(format_matrix(m)),
            Payload::Trace(rows) => format_trace_csv(rows),
            Payload::Report(r) => {
                let mut s = serde_json::to_string_pretty(r)?;
                s.push('\n');
                Ok(s)
            }
        }
    }

    /// Reads back a rendered artifact of the given file name.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let payload = match Path::new(name).extension().and_then(|e| e.to_str()) {
            Some("mat") => Payload::Matrix(parse_matrix(text)?),
            Some("csv") => Payload::Trace(parse_trace_csv(text)?),
            Some("json") => Payload::Report(Box::new(serde_json::from_str(text)?)),
            _ => {
                return Err(Error::Precondition(format!(
                    "unknown artifact type: {name}"
                )))
            }
        };
        Ok(Self {
            name: name.to_string(),
            payload,
        })
    }
}
