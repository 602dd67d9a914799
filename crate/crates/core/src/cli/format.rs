//! Text formats: dense matrices, subspace problems, probability models and
//! iteration traces.
//!
//! Numbers are emitted with 17 significant digits so that every `f64`
//! survives a write/read cycle bit for bit.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::{Exponent, FiniteProbabilitySpace, MarginalSystem, Partition};
use crate::specmat::InteractionMatrix;
use crate::subspaces::{orthogonal_projection, ProjectionOperator, Subspace, SubspaceSystem};
use crate::sumproj::{rate_bound, IterationTrace, RateBound};

/// Accepted deviation of model weights from total mass one; the weights are
/// renormalized afterwards.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Non-blank, non-comment lines with their 1-based line numbers. `#`
/// starts a comment that runs to the end of the line.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let iter: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
                .filter(|(_, l)| !l.trim().is_empty()),
        );
        Self {
            inner: iter.peekable(),
            last_line: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last_line = n;
                Ok((n, l))
            }
            None => Err(Error::parse(
                self.last_line + 1,
                1,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn peek(&mut self) -> Option<(usize, &'a str)> {
        self.inner.peek().copied()
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(move |(s, t)| (line[..s].chars().count() + 1, t))
}

fn parse_numbers<T: std::str::FromStr>(
    line_no: usize,
    line: &str,
    expected: usize,
    what: &str,
) -> Result<Vec<T>> {
    let mut values = Vec::with_capacity(expected);
    let mut last_col = 1;
    for (col, tok) in tokens(line) {
        last_col = col + tok.chars().count();
        if values.len() == expected {
            return Err(Error::parse(
                line_no,
                col,
                format!("too many entries, expected {expected} {what}"),
            ));
        }
        let v = tok
            .parse::<T>()
            .map_err(|_| Error::parse(line_no, col, format!("cannot parse {tok:?} as {what}")))?;
        values.push(v);
    }
    if values.len() < expected {
        return Err(Error::parse(
            line_no,
            last_col,
            format!("found {} entries, expected {expected} {what}", values.len()),
        ));
    }
    Ok(values)
}

fn parse_finite_row(line_no: usize, line: &str, expected: usize) -> Result<Vec<f64>> {
    let row: Vec<f64> = parse_numbers(line_no, line, expected, "numbers")?;
    if let Some((col, _)) = tokens(line)
        .zip(&row)
        .find(|(_, v)| !v.is_finite())
        .map(|(t, _)| t)
    {
        return Err(Error::parse(line_no, col, "entries must be finite"));
    }
    Ok(row)
}

fn read_matrix(lines: &mut Lines<'_>) -> Result<DMatrix<f64>> {
    let (line_no, header) = lines.next("a \"rows cols\" header")?;
    let dims: Vec<usize> = parse_numbers(line_no, header, 2, "dimensions")?;
    let (rows, cols) = (dims[0], dims[1]);
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        let (n, line) = lines.next("a matrix row")?;
        let row = parse_finite_row(n, line, cols)?;
        for (c, v) in row.into_iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    Ok(m)
}

fn write_matrix(out: &mut String, m: &DMatrix<f64>) {
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_f64(m[(r, c)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// `rows cols` header followed by the rows.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    write_matrix(&mut out, m);
    out
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = Lines::new(text);
    let m = read_matrix(&mut lines)?;
    if let Some((n, _)) = lines.peek() {
        return Err(Error::parse(n, 1, "trailing content after matrix"));
    }
    Ok(m)
}

/// Square nonnegative zero-diagonal matrix in matrix text format.
pub fn parse_interaction(text: &str) -> Result<InteractionMatrix> {
    let m = parse_matrix(text)?;
    InteractionMatrix::new(m).map_err(|e| Error::parse(1, 1, e.to_string()))
}

/// A subspace problem:
///
/// ```text
/// ambient <d>
/// subspace <k>
/// <k lines of d numbers, each a spanning vector>
/// ...
/// projections          # optional: one d x d matrix per subspace
/// <d d header and rows> ...
/// epsilon              # optional: n x n override of the interaction matrix
/// <n n header and rows>
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceProblem {
    pub ambient: usize,
    /// Spanning vectors of each subspace as the columns of a `d x k` matrix.
    pub bases: Vec<DMatrix<f64>>,
    pub projections: Option<Vec<DMatrix<f64>>>,
    pub epsilon: Option<DMatrix<f64>>,
}

fn keyword(line_no: usize, line: &str) -> Result<(&str, Option<(usize, &str)>)> {
    let mut toks = tokens(line);
    let (_, word) = toks
        .next()
        .ok_or_else(|| Error::parse(line_no, 1, "empty line"))?;
    let arg = toks.next();
    if let Some((col, _)) = toks.next() {
        return Err(Error::parse(line_no, col, "unexpected token"));
    }
    Ok((word, arg))
}

fn keyword_arg(line_no: usize, arg: Option<(usize, &str)>, word: &str) -> Result<usize> {
    let (col, tok) = arg.ok_or_else(|| {
        Error::parse(
            line_no,
            word.len() + 2,
            format!("`{word}` needs a dimension"),
        )
    })?;
    tok.parse()
        .map_err(|_| Error::parse(line_no, col, format!("cannot parse {tok:?} as a dimension")))
}

impl SubspaceProblem {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let (n0, first) = lines.next("`ambient <d>`")?;
        let (word, arg) = keyword(n0, first)?;
        if word != "ambient" {
            return Err(Error::parse(
                n0,
                1,
                format!("expected `ambient`, found `{word}`"),
            ));
        }
        let ambient = keyword_arg(n0, arg, "ambient")?;
        if ambient == 0 {
            return Err(Error::parse(n0, 9, "ambient dimension must be positive"));
        }
        let mut bases = Vec::new();
        let mut projections = None;
        let mut epsilon = None;
        while let Some((n, line)) = lines.peek() {
            let (word, arg) = keyword(n, line)?;
            lines.next("a section")?;
            match word {
                "subspace" if projections.is_none() && epsilon.is_none() => {
                    let k = keyword_arg(n, arg, "subspace")?;
                    if k == 0 {
                        return Err(Error::parse(n, 10, "subspace dimension must be positive"));
                    }
                    let mut b = DMatrix::zeros(ambient, k);
                    for c in 0..k {
                        let (rn, row) = lines.next("a spanning vector")?;
                        let v = parse_finite_row(rn, row, ambient)?;
                        b.set_column(c, &nalgebra::DVector::from_vec(v));
                    }
                    bases.push(b);
                }
                "projections" if projections.is_none() && epsilon.is_none() => {
                    if bases.is_empty() {
                        return Err(Error::parse(n, 1, "projections given before any subspace"));
                    }
                    let mut ps = Vec::with_capacity(bases.len());
                    for _ in 0..bases.len() {
                        let (hn, _) = lines
                            .peek()
                            .ok_or_else(|| Error::parse(n + 1, 1, "missing projection matrix"))?;
                        let p = read_matrix(&mut lines)?;
                        if p.shape() != (ambient, ambient) {
                            return Err(Error::parse(
                                hn,
                                1,
                                format!("projection must be {ambient}x{ambient}"),
                            ));
                        }
                        ps.push(p);
                    }
                    projections = Some(ps);
                }
                "epsilon" if epsilon.is_none() => {
                    let (hn, _) = lines
                        .peek()
                        .ok_or_else(|| Error::parse(n + 1, 1, "missing epsilon matrix"))?;
                    let e = read_matrix(&mut lines)?;
                    let count = bases.len();
                    if e.shape() != (count, count) {
                        return Err(Error::parse(
                            hn,
                            1,
                            format!("epsilon must be {count}x{count}"),
                        ));
                    }
                    InteractionMatrix::new(e.clone())
                        .map_err(|err| Error::parse(hn, 1, err.to_string()))?;
                    epsilon = Some(e);
                }
                other => return Err(Error::parse(n, 1, format!("unexpected section `{other}`"))),
            }
        }
        if bases.is_empty() {
            return Err(Error::parse(n0, 1, "no subspaces given"));
        }
        Ok(Self {
            ambient,
            bases,
            projections,
            epsilon,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ambient {}", self.ambient);
        for b in &self.bases {
            let _ = writeln!(out, "subspace {}", b.ncols());
            for c in 0..b.ncols() {
                let row: Vec<String> = b.column(c).iter().map(|&x| fmt_f64(x)).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        if let Some(ps) = &self.projections {
            let _ = writeln!(out, "projections");
            for p in ps {
                write_matrix(&mut out, p);
            }
        }
        if let Some(e) = &self.epsilon {
            let _ = writeln!(out, "epsilon");
            write_matrix(&mut out, e);
        }
        out
    }

    /// Orthogonal projections unless explicit ones were given.
    pub fn to_system(&self) -> Result<SubspaceSystem> {
        let subspaces = self
            .bases
            .iter()
            .cloned()
            .map(Subspace::new)
            .collect::<Result<Vec<_>>>()?;
        let projections = match &self.projections {
            Some(ps) => ps
                .iter()
                .cloned()
                .map(ProjectionOperator::from_matrix)
                .collect::<Result<Vec<_>>>()?,
            None => subspaces
                .iter()
                .map(orthogonal_projection)
                .collect::<Result<Vec<_>>>()?,
        };
        SubspaceSystem::new(subspaces, projections)
    }

    pub fn epsilon_override(&self) -> Result<Option<InteractionMatrix>> {
        self.epsilon.clone().map(InteractionMatrix::new).transpose()
    }
}

/// Probability model: `m`, then `m` weights, then one line of block labels
/// per partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityModel {
    pub weights: Vec<f64>,
    pub partitions: Vec<Vec<usize>>,
}

impl ProbabilityModel {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let (n0, first) = lines.next("the number of atoms")?;
        let m: usize = parse_numbers(n0, first, 1, "atom count")?[0];
        if m == 0 {
            return Err(Error::parse(n0, 1, "the space needs at least one atom"));
        }
        let (n1, wline) = lines.next("the weights")?;
        let weights = parse_finite_row(n1, wline, m)?;
        for (w, (col, _)) in weights.iter().zip(tokens(wline)) {
            if !(*w > 0.0) {
                return Err(Error::parse(n1, col, "weights must be positive"));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::parse(
                n1,
                1,
                format!("weights sum to {total}, expected 1 within {WEIGHT_SUM_TOL:e}"),
            ));
        }
        let mut partitions = Vec::new();
        while lines.peek().is_some() {
            let (n, line) = lines.next("a partition")?;
            let labels: Vec<usize> = parse_numbers(n, line, m, "block labels")?;
            Partition::new(labels.clone()).map_err(|e| Error::parse(n, 1, e.to_string()))?;
            partitions.push(labels);
        }
        if partitions.is_empty() {
            return Err(Error::parse(n1 + 1, 1, "no partitions given"));
        }
        Ok(Self {
            weights,
            partitions,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.weights.len());
        let w: Vec<String> = self.weights.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(out, "{}", w.join(" "));
        for p in &self.partitions {
            let labels: Vec<String> = p.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{}", labels.join(" "));
        }
        out
    }

    pub fn to_system(&self, p: Exponent) -> Result<MarginalSystem> {
        let space = FiniteProbabilitySpace::normalized(self.weights.clone())?;
        let partitions = self
            .partitions
            .iter()
            .cloned()
            .map(Partition::new)
            .collect::<Result<Vec<_>>>()?;
        MarginalSystem::new(space, partitions, p)
    }
}

/// One CSV row per iteration step. The bounds are empty when no
/// certificate of the corresponding side exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub gap: f64,
    pub residual: f64,
    pub bound_part1: Option<f64>,
    pub bound_part2: Option<f64>,
}

pub fn trace_rows(
    trace: &IterationTrace,
    inf: Option<&RateBound>,
    one: Option<&RateBound>,
) -> Result<Vec<TraceRow>> {
    let bound = |rb: Option<&RateBound>, n: usize| rb.map(|rb| rate_bound(rb, n)).transpose();
    trace
        .gaps
        .iter()
        .zip(&trace.residuals)
        .enumerate()
        .map(|(k, (&gap, &residual))| {
            Ok(TraceRow {
                n: k + 1,
                gap,
                residual,
                bound_part1: bound(inf, k + 1)?,
                bound_part2: bound(one, k + 1)?,
            })
        })
        .collect()
}

pub fn format_trace_csv(rows: &[TraceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["N", "gap", "residual", "bound_part1", "bound_part2"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["N", "gap", "residual", "bound_part1", "bound_part2"]
    {
        return Err(Error::parse(1, 1, "unexpected CSV header"));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = DMatrix::from_row_slice(
            2,
            3,
            &[
                0.1,
                -1.0 / 3.0,
                1e-300,
                std::f64::consts::PI,
                -0.0,
                12345.678,
            ],
        );
        let text = format_matrix(&m);
        assert!(text.starts_with("2 3\n"));
        let back = parse_matrix(&text).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn matrix_parse_errors_have_positions() {
        match parse_matrix("2 2\n1 0\n0 x\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
        match parse_matrix("2 2\n1 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_matrix("1 1\n1 2\n"),
            Err(Error::Parse {
                line: 2,
                column: 3,
                ..
            })
        ));
        assert!(matches!(
            parse_matrix("1 1\ninf\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn subspace_problem_round_trip() {
        let text = "# two lines\nambient 2\nsubspace 1\n1 0\nsubspace 1\n0 1\nprojections\n2 2\n1 2\n0 0\n2 2\n0 0\n2 1\nepsilon\n2 2\n0 2\n2 0\n";
        let p = SubspaceProblem::parse(text).unwrap();
        assert_eq!(p.bases.len(), 2);
        let canonical = p.to_text();
        let again = SubspaceProblem::parse(&canonical).unwrap();
        assert_eq!(again, p);
        assert_eq!(again.to_text(), canonical);
        let sys = p.to_system().unwrap();
        assert_eq!(sys.n(), 2);
        assert_eq!(p.epsilon_override().unwrap().unwrap().get(0, 1), 2.0);
    }

    #[test]
    fn subspace_problem_errors() {
        assert!(matches!(
            SubspaceProblem::parse("ambient 2\nsubspace 1\n1 0 0\n"),
            Err(Error::Parse {
                line: 3,
                column: 5,
                ..
            })
        ));
        assert!(matches!(
            SubspaceProblem::parse("ambient 2\nsubspace x\n"),
            Err(Error::Parse {
                line: 2,
                column: 10,
                ..
            })
        ));
        assert!(matches!(
            SubspaceProblem::parse("ambient 2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            SubspaceProblem::parse("dim 2\n"),
            Err(Error::Parse {
                line: 1,
                column: 1,
                ..
            })
        ));
    }

    #[test]
    fn probability_model_round_trip_and_validation() {
        let text = "4\n0.25 0.25 0.25 0.25\n0 0 1 1\n0 1 0 1\n";
        let m = ProbabilityModel::parse(text).unwrap();
        assert_eq!(ProbabilityModel::parse(&m.to_text()).unwrap(), m);
        assert!(matches!(
            ProbabilityModel::parse("2\n0.5 0.6\n0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            ProbabilityModel::parse("2\n1 0\n0 1\n"),
            Err(Error::Parse {
                line: 2,
                column: 3,
                ..
            })
        ));
        assert!(matches!(
            ProbabilityModel::parse("3\n0.2 0.3 0.5\n0 2 2\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        // Within 1e-9 of one is accepted and renormalized.
        let m = ProbabilityModel::parse("2\n0.5 0.5000000001\n0 1\n").unwrap();
        let sys = m.to_system(Exponent::Two).unwrap();
        assert!((sys.space.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_csv_round_trip() {
        let rows = vec![
            TraceRow {
                n: 1,
                gap: 0.5,
                residual: 1.0 / 3.0,
                bound_part1: Some(2.0),
                bound_part2: None,
            },
            TraceRow {
                n: 2,
                gap: 1e-17,
                residual: 0.0,
                bound_part1: Some(1.0),
                bound_part2: Some(0.1),
            },
        ];
        let text = format_trace_csv(&rows).unwrap();
        assert!(text.starts_with("N,gap,residual,bound_part1,bound_part2\n"));
        assert_eq!(parse_trace_csv(&text).unwrap(), rows);
    }
}
