//! Nonnegative zero-diagonal interaction matrices: spectral radius with
//! Collatz–Wielandt brackets, the M-matrix minor test, Perron certificates
//! and the irreducible block decomposition.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iteration budget for the power iterations in this module.
const MAX_POWER_ITERS: usize = 200_000;

/// Half-width of the band around 1 where the criterion is reported as
/// `boundary` instead of a yes/no verdict.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Halvings of `delta` attempted before giving up on a certificate.
const MAX_DELTA_HALVINGS: usize = 64;

/// Matrix of restricted-norm bounds `e_ij`: square, zero diagonal,
/// nonnegative off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    entries: DMatrix<f64>,
}

impl InteractionMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidInteraction(format!(
                "expected a nonempty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..entries.nrows() {
            for j in 0..entries.ncols() {
                let v = entries[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidInteraction(format!(
                        "entry ({i},{j}) is not finite"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidInteraction(format!(
                        "diagonal entry ({i},{i}) = {v} is not 0"
                    )));
                }
                if v < 0.0 {
                    return Err(Error::InvalidInteraction(format!(
                        "entry ({i},{j}) = {v} is negative"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} values for a {n}x{n} matrix",
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.transpose(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.entries * factor)
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn principal(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        Self {
            entries: DMatrix::from_fn(k, k, |r, c| self.entries[(indices[r], indices[c])]),
        }
    }

    /// `E + delta * (J - I)`: every off-diagonal entry raised by `delta`.
    pub fn perturbed(&self, delta: f64) -> Result<Self> {
        let n = self.n();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                self.entries[(i, j)] + delta
            }
        }))
    }

    fn oriented(&self, side: Side) -> Self {
        match side {
            Side::Row => self.clone(),
            Side::Column => self.transpose(),
        }
    }
}

/// Two-sided enclosure `lower <= r(E) <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusBracket {
    pub lower: f64,
    pub upper: f64,
}

impl RadiusBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Collatz–Wielandt enclosure of the spectral radius, refined until its width
/// is at most `tol`.
///
/// The radius of a reducible matrix is the largest radius of its irreducible
/// diagonal blocks; singleton blocks contribute 0. Each irreducible block is
/// handled by a shifted power iteration `x <- (s I + B) x`, which converges
/// to the positive Perron vector because `s I + B` is primitive.
pub fn spectral_bracket(e: &InteractionMatrix, tol: f64) -> Result<RadiusBracket> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let blocks = block_structure(e);
    let mut out = RadiusBracket {
        lower: 0.0,
        upper: 0.0,
    };
    for block in &blocks.blocks {
        if block.len() < 2 {
            continue;
        }
        let sub = e.principal(block);
        let (_, b) = perron_iteration(sub.entries(), tol)?;
        out.lower = out.lower.max(b.lower);
        out.upper = out.upper.max(b.upper);
    }
    Ok(out)
}

/// Spectral radius of `e` to within `tol` (midpoint of the enclosure).
pub fn spectral_radius(e: &InteractionMatrix, tol: f64) -> Result<f64> {
    spectral_bracket(e, tol).map(|b| b.midpoint())
}

/// Shifted power iteration on an irreducible nonnegative matrix. Returns the
/// normalized positive iterate and the Collatz–Wielandt bracket it certifies.
fn perron_iteration(b: &DMatrix<f64>, tol: f64) -> Result<(DVector<f64>, RadiusBracket)> {
    let n = b.nrows();
    let mut x = DVector::from_element(n, 1.0);
    let mut bracket = RadiusBracket {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    for _ in 0..MAX_POWER_ITERS {
        let bx = b * &x;
        let (lo, hi) = ratio_range(&bx, &x);
        bracket = RadiusBracket {
            lower: bracket.lower.max(lo),
            upper: bracket.upper.min(hi),
        };
        let floor = 8.0 * f64::EPSILON * bracket.upper.abs();
        if bracket.width() <= tol.max(floor) {
            return Ok((x, bracket));
        }
        // Shift by the current upper estimate: keeps the iteration matrix
        // primitive and damps eigenvalues near -r(B).
        let shift = hi.max(f64::MIN_POSITIVE);
        let mut y = bx + &x * shift;
        let top = y.max();
        y /= top;
        x = y;
    }
    Err(Error::NoConvergence {
        iterations: MAX_POWER_ITERS,
        lower: bracket.lower,
        upper: bracket.upper,
        iterate: x.iter().copied().collect(),
    })
}

fn ratio_range(bx: &DVector<f64>, x: &DVector<f64>) -> (f64, f64) {
    bx.iter()
        .zip(x.iter())
        .map(|(a, b)| a / b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        })
}

/// `true` iff `r(E) < 1`, decided by positivity of the leading principal
/// minors of the Z-matrix `I - E` (Gaussian elimination without pivoting;
/// the leading minors are the running products of the pivots).
pub fn minor_test(e: &InteractionMatrix) -> bool {
    let n = e.n();
    let mut m = DMatrix::<f64>::identity(n, n) - e.entries();
    for k in 0..n {
        let pivot = m[(k, k)];
        if !(pivot > 0.0) {
            return false;
        }
        for i in (k + 1)..n {
            let factor = m[(i, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                let v = m[(k, j)];
                m[(i, j)] -= factor * v;
            }
        }
    }
    true
}

/// Positivity of all `2^n - 1` principal minors of `I - E`. Exponential in
/// `n`; used to cross-check [`minor_test`].
pub fn principal_minors_positive(e: &InteractionMatrix) -> bool {
    let n = e.n();
    assert!(n < 26, "principal minor enumeration is exponential in n");
    let full = DMatrix::<f64>::identity(n, n) - e.entries();
    (1u32..(1u32 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        let sub = DMatrix::from_fn(k, k, |r, c| full[(idx[r], idx[c])]);
        sub.determinant() > 0.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CriterionHolds,
    CriterionFails,
    Boundary,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CriterionHolds => "criterion_holds",
            Verdict::CriterionFails => "criterion_fails",
            Verdict::Boundary => "boundary",
        })
    }
}

/// Three-way verdict on `r(E) < 1`; radii within [`BOUNDARY_TOL`] of 1 are
/// reported as [`Verdict::Boundary`].
pub fn criterion_verdict(e: &InteractionMatrix) -> Result<(Verdict, RadiusBracket)> {
    let bracket = spectral_bracket(e, 1e-12)?;
    let verdict = if bracket.upper < 1.0 - BOUNDARY_TOL {
        Verdict::CriterionHolds
    } else if bracket.lower > 1.0 + BOUNDARY_TOL {
        Verdict::CriterionFails
    } else {
        Verdict::Boundary
    };
    Ok((verdict, bracket))
}

/// Which inequality a certificate witnesses: `E w <= alpha w` (row) or
/// `E^t w <= alpha w` (column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Row,
    Column,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronCertificate {
    pub alpha: f64,
    pub w: DVector<f64>,
    pub side: Side,
}

impl PerronCertificate {
    pub fn new(alpha: f64, w: DVector<f64>, side: Side) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidCertificate(format!(
                "alpha = {alpha} is outside [0, 1)"
            )));
        }
        if w.is_empty() || w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidCertificate(
                "weights must be finite and strictly positive".into(),
            ));
        }
        Ok(Self { alpha, w, side })
    }

    /// Largest `(Mw)_i - alpha w_i` with `M = E` or `E^t` per side; the
    /// certificate holds for `e` iff this is `<= 0`.
    pub fn max_excess(&self, e: &InteractionMatrix) -> f64 {
        let m = e.oriented(self.side);
        let mw = m.entries() * &self.w;
        mw.iter()
            .zip(self.w.iter())
            .map(|(a, w)| a - self.alpha * w)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn certifies(&self, e: &InteractionMatrix) -> bool {
        e.n() == self.w.len() && self.max_excess(e) <= 0.0
    }
}

/// Default perturbation for [`perron_certificate`]: `1e-6 (1 - r(E))`.
pub fn default_delta(radius: f64) -> f64 {
    1e-6 * (1.0 - radius).max(f64::EPSILON)
}

/// Perron certificate built from `E' = E + delta (J - I)`, which is
/// irreducible: `w` is its Perron vector and `alpha` the Collatz–Wielandt
/// upper value `max_i (E'w)_i / w_i`. `delta` is halved until `alpha < 1`
/// and the inequality holds for `E` in floating point.
pub fn perron_certificate(
    e: &InteractionMatrix,
    delta: f64,
    side: Side,
) -> Result<PerronCertificate> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let bracket = spectral_bracket(e, 1e-13)?;
    if bracket.lower >= 1.0 {
        return Err(Error::NoCertificate {
            radius: bracket.midpoint(),
        });
    }
    let oriented = e.oriented(side);
    if oriented.n() == 1 {
        return PerronCertificate::new(0.0, DVector::from_element(1, 1.0), side);
    }
    let mut delta = delta;
    for _ in 0..MAX_DELTA_HALVINGS {
        let shifted = oriented.perturbed(delta)?;
        let w = match perron_iteration(shifted.entries(), 1e-15) {
            Ok((w, _)) => w,
            Err(Error::NoConvergence { iterate, .. }) => DVector::from_vec(iterate),
            Err(other) => return Err(other),
        };
        let (_, alpha) = ratio_range(&(shifted.entries() * &w), &w);
        if alpha < 1.0 {
            if let Ok(cert) = PerronCertificate::new(alpha, w, side) {
                if cert.certifies(e) {
                    return Ok(cert);
                }
            }
        }
        delta *= 0.5;
    }
    Err(Error::NoCertificate {
        radius: bracket.midpoint(),
    })
}

/// Certificate with the default `delta` for the radius of `e`.
pub fn perron_certificate_auto(e: &InteractionMatrix, side: Side) -> Result<PerronCertificate> {
    let r = spectral_radius(e, 1e-13)?;
    perron_certificate(e, default_delta(r), side)
}

/// Strongly connected components of the digraph `i -> j iff e_ij > 0`,
/// ordered so that the permuted matrix is block upper-triangular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    pub permutation: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

impl BlockStructure {
    pub fn permuted(&self, e: &InteractionMatrix) -> InteractionMatrix {
        e.principal(&self.permutation)
    }

    /// Block index of each original subspace index.
    pub fn block_of(&self) -> Vec<usize> {
        let n = self.permutation.len();
        let mut out = vec![0; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }

    /// No positive entry of `e` points from a later block to an earlier one.
    pub fn is_block_upper_triangular(&self, e: &InteractionMatrix) -> bool {
        let block_of = self.block_of();
        let n = e.n();
        (0..n).all(|i| (0..n).all(|j| block_of[i] <= block_of[j] || e.get(i, j) == 0.0))
    }

    pub fn is_irreducible(&self) -> bool {
        self.blocks.len() == 1
    }
}

pub fn block_structure(e: &InteractionMatrix) -> BlockStructure {
    let n = e.n();
    let mut graph = DiGraph::<usize, ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|i| graph.add_node(i)).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && e.get(i, j) > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    // tarjan_scc yields components in reverse topological order.
    let blocks: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .rev()
        .map(|comp| {
            let mut idx: Vec<usize> = comp.into_iter().map(|nx| graph[nx]).collect();
            idx.sort_unstable();
            idx
        })
        .collect();
    let permutation = blocks.iter().flatten().copied().collect();
    BlockStructure {
        permutation,
        blocks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense eigen-solve oracle: largest modulus among all complex eigenvalues.
    fn dense_radius(e: &InteractionMatrix) -> f64 {
        e.entries()
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn mat(n: usize, data: &[f64]) -> InteractionMatrix {
        InteractionMatrix::from_row_slice(n, data).unwrap()
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(InteractionMatrix::from_row_slice(2, &[0.1, 0.2, 0.3, 0.0]).is_err());
        assert!(InteractionMatrix::from_row_slice(2, &[0.0, -0.2, 0.3, 0.0]).is_err());
        assert!(InteractionMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn radius_of_zero_matrix() {
        assert_eq!(
            spectral_radius(&InteractionMatrix::zeros(2), 1e-12).unwrap(),
            0.0
        );
    }

    #[test]
    fn radius_of_two_by_two_is_geometric_mean() {
        for (a, b) in [(2.0, 2.0), (0.3, 0.7), (5.0, 0.01), (1e-3, 1e-3)] {
            let e = mat(2, &[0.0, a, b, 0.0]);
            let r = spectral_radius(&e, 1e-13).unwrap();
            assert!((r - f64::sqrt(a * b)).abs() < 1e-12, "{a} {b} -> {r}");
        }
    }

    #[test]
    fn radius_matches_dense_eigensolve() {
        let e = mat(
            4,
            &[
                0.0, 0.3, 0.9, 0.1, 0.5, 0.0, 0.2, 0.7, 0.05, 0.6, 0.0, 0.4, 0.8, 0.0, 0.3, 0.0,
            ],
        );
        let r = spectral_radius(&e, 1e-12).unwrap();
        assert!((r - dense_radius(&e)).abs() < 1e-9);
    }

    #[test]
    fn radius_of_nilpotent_is_zero() {
        let e = mat(3, &[0.0, 0.9, 0.4, 0.0, 0.0, 0.7, 0.0, 0.0, 0.0]);
        assert_eq!(spectral_radius(&e, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn minor_test_examples() {
        assert!(minor_test(&mat(2, &[0.0, 0.5, 0.5, 0.0])));
        assert!(!minor_test(&mat(2, &[0.0, 1.0, 1.0, 0.0])));
        let e = mat(3, &[0.0, 0.4, 0.4, 0.4, 0.0, 0.4, 0.4, 0.4, 0.0]);
        let five_term = 3.0 * 0.16 + 2.0 * 0.064;
        assert!((five_term - 0.608_f64).abs() < 1e-15);
        assert!(minor_test(&e));
    }

    #[test]
    fn certificate_for_symmetric_pair() {
        let e = mat(2, &[0.0, 0.5, 0.5, 0.0]);
        let c = perron_certificate_auto(&e, Side::Row).unwrap();
        assert!((c.alpha - 0.5).abs() < 1e-6);
        assert!((c.w[0] / c.w[1] - 1.0).abs() < 1e-9);
        assert!(c.certifies(&e));
    }

    #[test]
    fn certificate_for_zero_matrix_is_scaled_ones() {
        for n in 2..6 {
            let e = InteractionMatrix::zeros(n);
            let c = perron_certificate(&e, 0.01, Side::Row).unwrap();
            assert!((c.alpha - (n as f64 - 1.0) * 0.01).abs() < 1e-15);
            let w0 = c.w[0];
            assert!(c.w.iter().all(|&x| (x / w0 - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn certificate_for_reducible_matrix() {
        let e = mat(2, &[0.0, 0.9, 0.0, 0.0]);
        for side in [Side::Row, Side::Column] {
            let c = perron_certificate(&e, 1e-3, side).unwrap();
            assert!(c.alpha < 1.0);
            assert!(c.w.iter().all(|&x| x > 0.0));
            assert!(c.certifies(&e));
        }
    }

    #[test]
    fn certificate_refused_at_or_above_one() {
        let e = mat(2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            perron_certificate(&e, 1e-3, Side::Row),
            Err(Error::NoCertificate { .. })
        ));
        let e = mat(2, &[0.0, 2.0, 3.0, 0.0]);
        assert!(matches!(
            perron_certificate(&e, 1e-3, Side::Column),
            Err(Error::NoCertificate { .. })
        ));
    }

    #[test]
    fn certificate_new_validates() {
        assert!(PerronCertificate::new(1.0, DVector::from_element(2, 1.0), Side::Row).is_err());
        assert!(PerronCertificate::new(0.5, DVector::from_vec(vec![1.0, 0.0]), Side::Row).is_err());
    }

    #[test]
    fn blocks_of_complete_digraph() {
        let e = mat(3, &[0.0, 0.1, 0.2, 0.3, 0.0, 0.4, 0.5, 0.6, 0.0]);
        let b = block_structure(&e);
        assert_eq!(b.blocks, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn blocks_of_upper_triangular() {
        let e = mat(3, &[0.0, 0.1, 0.2, 0.0, 0.0, 0.4, 0.0, 0.0, 0.0]);
        let b = block_structure(&e);
        assert_eq!(b.blocks, vec![vec![0], vec![1], vec![2]]);
        assert!(b.is_block_upper_triangular(&e));
    }

    #[test]
    fn blocks_match_exhaustive_permutation_search() {
        let e = mat(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = block_structure(&e);
        // Oracle: permutations for which the permuted matrix is block upper
        // triangular with blocks {0,1} and {2} in some order.
        let feasible: Vec<Vec<usize>> = permutations(3)
            .into_iter()
            .filter(|p| {
                let pe = e.principal(p);
                (0..3).all(|i| {
                    (0..3).all(|j| {
                        let same = (p[i] < 2) == (p[j] < 2);
                        i <= j || same || pe.get(i, j) == 0.0
                    })
                })
            })
            .collect();
        assert!(feasible.contains(&b.permutation));
        assert_eq!(b.blocks.len(), 2);
        assert!(b.blocks.contains(&vec![0, 1]) && b.blocks.contains(&vec![2]));
        assert!(b.is_block_upper_triangular(&e));
    }

    fn zero_diag_matrix(max_n: usize) -> impl Strategy<Value = InteractionMatrix> {
        (2..=max_n, 0.05f64..1.2).prop_flat_map(|(n, scale)| {
            proptest::collection::vec(0.0f64..1.0, n * n).prop_map(move |v| {
                let m =
                    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { scale * v[i * n + j] });
                InteractionMatrix::new(m).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn minor_test_agrees_with_radius(e in zero_diag_matrix(6)) {
            let r = spectral_radius(&e, 1e-10).unwrap();
            prop_assume!((r - 1.0).abs() > 1e-6);
            prop_assert_eq!(minor_test(&e), r < 1.0);
            prop_assert_eq!(principal_minors_positive(&e), r < 1.0);
            prop_assert!((r - dense_radius(&e)).abs() < 1e-8);
        }

        #[test]
        fn certificate_is_valid(e in zero_diag_matrix(6)) {
            let r = spectral_radius(&e, 1e-12).unwrap();
            prop_assume!(r < 1.0 - 1e-6);
            for side in [Side::Row, Side::Column] {
                let c = perron_certificate_auto(&e, side).unwrap();
                prop_assert!(c.max_excess(&e) <= 1e-12);
                prop_assert!(c.alpha >= r - 1e-9);
                prop_assert!(c.alpha < 1.0);
            }
        }

        #[test]
        fn block_structure_is_upper_triangular(e in zero_diag_matrix(7), cut in 0.0f64..0.9) {
            // Sparsify so that reducible patterns occur.
            let n = e.n();
            let sparse = InteractionMatrix::new(DMatrix::from_fn(n, n, |i, j| {
                let v = e.get(i, j);
                if v < cut { 0.0 } else { v }
            })).unwrap();
            let b = block_structure(&sparse);
            prop_assert!(b.is_block_upper_triangular(&sparse));
            let mut all: Vec<usize> = b.permutation.clone();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            for block in &b.blocks {
                let sub = sparse.principal(block);
                prop_assert_eq!(block_structure(&sub).blocks.len(), 1);
            }
        }

        #[test]
        fn two_by_two_criterion(a in 0.0f64..3.0, b in 0.0f64..3.0) {
            prop_assume!((a * b - 1.0).abs() > 1e-9);
            prop_assert_eq!(minor_test(&mat(2, &[0.0, a, b, 0.0])), a * b < 1.0);
        }
    }
}
