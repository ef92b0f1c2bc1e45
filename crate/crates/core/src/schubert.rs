//! Flags, Schubert cells and spectral inequalities for bipartite marginals.
//!
//! A non-degenerate Hermitian operator induces a complete flag through its
//! eigenvectors ordered by decreasing eigenvalue. A binary sequence pi
//! selects the Schubert cell of subspaces V whose intersections with the
//! flag grow exactly at the positions where pi_i = 1. The minimum of
//! Tr[P_V rho] over that cell equals sum_j pi_j lambda_j; that identity is
//! checked here by an explicit minimizer plus random cell samples.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QmargError, Result};
use crate::linalg::{hermitian_eigen, orthonormalize_columns, singular_values, trace, CMatrix};
use crate::random::{complex_normal, random_density_matrix, random_pure_density, rng_for};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;
/// Default minimum eigenvalue gap for flag construction.
pub const FLAG_GAP_TOL: f64 = 1e-10;
/// Allowed undershoot of sampled traces below the Hersch-Zwahlen target.
pub const HZ_SAMPLE_TOL: f64 = 1e-9;
/// Allowed mismatch between the candidate subspace value and the target.
pub const HZ_CANDIDATE_TOL: f64 = 1e-10;
/// Slack used when testing a spectral inequality on a sample.
pub const INEQUALITY_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-10;

/// Orthonormal basis v_1..v_d; F_i is the span of the first i columns.
#[derive(Debug, Clone)]
pub struct Flag {
    basis: CMatrix,
}

impl Flag {
    pub fn new(basis: CMatrix) -> Result<Self> {
        let dev = crate::linalg::unitarity_deviation(&basis);
        if dev > 1e-10 {
            return Err(QmargError::NotUnitary { deviation: dev });
        }
        Ok(Self { basis })
    }

    pub fn standard(d: usize) -> Self {
        Self { basis: CMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Frame of F_i.
    pub fn component(&self, i: usize) -> CMatrix {
        self.basis.columns(0, i).clone_owned()
    }

    /// The flag with its basis order reversed, i.e. the flag of -A.
    pub fn reversed(&self) -> Self {
        let d = self.dim();
        Self { basis: CMatrix::from_fn(d, d, |r, c| self.basis[(r, d - 1 - c)]) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinarySequence(Vec<bool>);

impl BinarySequence {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// All 2^d sequences of length d, counting upward with bit 1 first.
    pub fn all(d: usize) -> Vec<Self> {
        (0u64..(1u64 << d))
            .map(|m| Self((0..d).map(|i| m >> (d - 1 - i) & 1 == 1).collect()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Positions (0-based) where the sequence is 1.
    pub fn ones(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    /// Reversed sequence: dual_k = pi_{d-k+1}.
    pub fn dual(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    /// sum_j pi_j w_j
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().zip(w).filter(|(&b, _)| b).map(|(_, &x)| x).sum()
    }
}

impl FromStr for BinarySequence {
    type Err = QmargError;
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QmargError::Parse(format!("binary sequence '{s}' contains '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(QmargError::Parse("empty binary sequence".into()));
        }
        Ok(Self(bits))
    }
}

impl fmt::Display for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Orthonormal frame (d x k) of a subspace.
#[derive(Debug, Clone)]
pub struct Subspace {
    frame: CMatrix,
}

impl Subspace {
    pub fn new(frame: CMatrix) -> Result<Self> {
        let k = frame.ncols();
        let gram = frame.adjoint() * &frame;
        let dev = (gram - CMatrix::identity(k, k)).iter().map(|x| x.norm()).fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(QmargError::invalid(format!("subspace frame not orthonormal (deviation {dev:.3e})")));
        }
        Ok(Self { frame })
    }

    /// Orthonormalizes the given spanning columns.
    pub fn span_of(columns: &CMatrix) -> Self {
        Self { frame: orthonormalize_columns(columns) }
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    /// Tr[P_V A]
    pub fn projected_trace(&self, a: &CMatrix) -> f64 {
        trace(&(self.frame.adjoint() * a * &self.frame)).re
    }
}

pub fn induced_flag(a: &CMatrix, tol: f64) -> Result<Flag> {
    let eig = hermitian_eigen(a, 1e-10)?;
    let gap = min_gap(&eig.values);
    if gap <= tol {
        return Err(QmargError::Degenerate { gap, tol });
    }
    Ok(Flag { basis: eig.vectors })
}

fn min_gap(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[0] - w[1]).abs()).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Member,
    NotMember,
    /// Some rank decision fell within two decades of the threshold.
    Indeterminate,
}

impl Membership {
    pub fn is_member(self) -> bool {
        self == Membership::Member
    }
}

/// dim(V ∩ F_i) for i = 0..=d, from ranks of stacked frames.
fn intersection_dims(v: &Subspace, flag: &Flag, rel_tol: f64) -> (Vec<usize>, bool) {
    let d = flag.dim();
    let k = v.dim();
    let mut dims = vec![0usize; d + 1];
    let mut borderline = false;
    for (i, dim) in dims.iter_mut().enumerate().skip(1) {
        let mut stacked = CMatrix::zeros(d, k + i);
        stacked.columns_mut(0, k).copy_from(v.frame());
        stacked.columns_mut(k, i).copy_from(&flag.basis.columns(0, i));
        let s = singular_values(&stacked);
        let smax = s.first().copied().unwrap_or(0.0);
        let threshold = rel_tol * smax;
        let rank = s.iter().filter(|&&x| x > threshold).count();
        if s.iter().any(|&x| x > threshold * 1e-2 && x < threshold * 1e2) {
            borderline = true;
        }
        *dim = k + i - rank;
    }
    (dims, borderline)
}

/// Whether V lies in the Schubert cell of `pi` relative to `flag`.
pub fn schubert_membership(v: &Subspace, flag: &Flag, pi: &BinarySequence, rel_tol: f64) -> Result<Membership> {
    if pi.len() != flag.dim() || v.ambient_dim() != flag.dim() {
        return Err(QmargError::DimensionMismatch { expected: flag.dim(), found: pi.len() });
    }
    if pi.weight() != v.dim() {
        return Err(QmargError::invalid(format!(
            "sequence weight {} differs from subspace dimension {}",
            pi.weight(),
            v.dim()
        )));
    }
    let (dims, borderline) = intersection_dims(v, flag, rel_tol);
    let matches = (1..=flag.dim()).all(|i| dims[i] - dims[i - 1] == usize::from(pi.bits()[i - 1]));
    Ok(match (matches, borderline) {
        (_, true) => Membership::Indeterminate,
        (true, false) => Membership::Member,
        (false, false) => Membership::NotMember,
    })
}

/// Random element of the cell: reduced row-echelon coordinates in the flag
/// basis with pivots at the ones of `pi` and Gaussian free entries before
/// each pivot.
pub fn sample_schubert_cell(flag: &Flag, pi: &BinarySequence, seed: u64) -> Result<Subspace> {
    sample_schubert_cell_stream(flag, pi, seed, 0)
}

pub(crate) fn sample_schubert_cell_stream(flag: &Flag, pi: &BinarySequence, seed: u64, stream: u64) -> Result<Subspace> {
    let d = flag.dim();
    if pi.len() != d {
        return Err(QmargError::DimensionMismatch { expected: d, found: pi.len() });
    }
    let pivots = pi.ones();
    let mut rng = rng_for(seed, stream);
    let mut coords = CMatrix::zeros(d, pivots.len());
    for (m, &p) in pivots.iter().enumerate() {
        coords[(p, m)] = C64::new(1.0, 0.0);
        for j in 0..p {
            if !pi.bits()[j] {
                coords[(j, m)] = complex_normal(&mut rng);
            }
        }
    }
    Ok(Subspace::span_of(&(flag.basis() * coords)))
}

#[derive(Debug, Clone, Serialize)]
pub struct HerschZwahlenReport {
    pub pi: String,
    pub target: f64,
    pub candidate_value: f64,
    pub candidate_in_cell: bool,
    pub trials: usize,
    pub min_sampled: Option<f64>,
    pub samples_below_target: usize,
    pub passed: bool,
}

/// Compares sum_j pi_j lambda_j with Tr[P_V rho] on the candidate
/// span{v_j : pi_j = 1} and on `trials` random cell members.
pub fn hersch_zwahlen_check(rho: &CMatrix, pi: &BinarySequence, trials: usize, seed: u64) -> Result<HerschZwahlenReport> {
    let eig = hermitian_eigen(rho, 1e-10)?;
    let gap = min_gap(&eig.values);
    if gap <= FLAG_GAP_TOL {
        return Err(QmargError::Degenerate { gap, tol: FLAG_GAP_TOL });
    }
    if pi.len() != rho.nrows() {
        return Err(QmargError::DimensionMismatch { expected: rho.nrows(), found: pi.len() });
    }
    let flag = Flag { basis: eig.vectors };
    let target = pi.dot(&eig.values);

    let ones = pi.ones();
    let cand_cols = CMatrix::from_fn(flag.dim(), ones.len(), |r, c| flag.basis[(r, ones[c])]);
    let candidate = Subspace::new(cand_cols)?;
    let candidate_value = candidate.projected_trace(rho);
    let candidate_in_cell = schubert_membership(&candidate, &flag, pi, RANK_TOL)?.is_member();

    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| sample_schubert_cell_stream(&flag, pi, seed, t).map(|v| v.projected_trace(rho)))
        .collect::<Result<Vec<_>>>()?;
    let min_sampled = values.iter().copied().reduce(f64::min);
    let samples_below_target = values.iter().filter(|&&x| x < target - HZ_SAMPLE_TOL).count();
    let passed = candidate_in_cell
        && (candidate_value - target).abs() <= HZ_CANDIDATE_TOL
        && samples_below_target == 0;
    Ok(HerschZwahlenReport {
        pi: pi.to_string(),
        target,
        candidate_value,
        candidate_in_cell,
        trials,
        min_sampled,
        samples_below_target,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Keep {
    A,
    B,
}

/// Reduced state of subsystem A or B of a d_A d_B density matrix indexed
/// as (a * d_B + b).
pub fn partial_trace(rho_ab: &CMatrix, d_a: usize, d_b: usize, keep: Keep) -> Result<CMatrix> {
    let dim = d_a * d_b;
    if rho_ab.nrows() != dim || rho_ab.ncols() != dim {
        return Err(QmargError::DimensionMismatch { expected: dim, found: rho_ab.nrows() });
    }
    let tr = trace(rho_ab).re;
    if (tr - 1.0).abs() > DENSITY_TOL {
        return Err(QmargError::invalid(format!("density matrix trace {tr} differs from 1")));
    }
    let eig = hermitian_eigen(rho_ab, DENSITY_TOL)?;
    if let Some(&min) = eig.values.last() {
        if min < -DENSITY_TOL {
            return Err(QmargError::invalid(format!("density matrix has negative eigenvalue {min:.3e}")));
        }
    }
    Ok(partial_trace_unchecked(rho_ab, d_a, d_b, keep))
}

pub(crate) fn partial_trace_unchecked(rho_ab: &CMatrix, d_a: usize, d_b: usize, keep: Keep) -> CMatrix {
    match keep {
        Keep::A => CMatrix::from_fn(d_a, d_a, |a, a2| (0..d_b).map(|b| rho_ab[(a * d_b + b, a2 * d_b + b)]).sum()),
        Keep::B => CMatrix::from_fn(d_b, d_b, |b, b2| (0..d_a).map(|a| rho_ab[(a * d_b + b, a * d_b + b2)]).sum()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub trial: u64,
    pub pure: bool,
    pub lambda_a: Vec<f64>,
    pub lambda_ab: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityVerdict {
    pub pi: String,
    pub sigma: String,
    pub d_a: usize,
    pub d_b: usize,
    pub samples: usize,
    pub never_violated: bool,
    /// max over samples of lhs - rhs
    pub max_excess: f64,
    pub witness: Option<Witness>,
}

/// Monte-Carlo test of sum_j pi_j lambda^A_j <= sum_i sigma_i lambda^AB_i.
///
/// Even trials draw Haar-random pure states, odd trials full-rank
/// normalized Wishart matrices. Trial t uses stream t of `seed`. A clean
/// run is evidence, not proof, that the pair is valid.
pub fn test_spectral_inequality(
    pi: &BinarySequence,
    sigma: &BinarySequence,
    d_a: usize,
    d_b: usize,
    samples: usize,
    seed: u64,
) -> Result<InequalityVerdict> {
    if pi.len() != d_a {
        return Err(QmargError::DimensionMismatch { expected: d_a, found: pi.len() });
    }
    if sigma.len() != d_a * d_b {
        return Err(QmargError::DimensionMismatch { expected: d_a * d_b, found: sigma.len() });
    }
    let results: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = (0..samples as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, t);
            let rho = if t % 2 == 0 {
                random_pure_density(d_a * d_b, &mut rng)
            } else {
                random_density_matrix(d_a * d_b, d_a * d_b, &mut rng)
            };
            let lambda_ab = hermitian_eigen(&rho, 1e-10)?.values;
            let rho_a = partial_trace_unchecked(&rho, d_a, d_b, Keep::A);
            let lambda_a = hermitian_eigen(&rho_a, 1e-10)?.values;
            Ok((pi.dot(&lambda_a), sigma.dot(&lambda_ab), lambda_a, lambda_ab))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_excess = f64::NEG_INFINITY;
    let mut witness = None;
    for (t, (lhs, rhs, la, lab)) in results.into_iter().enumerate() {
        max_excess = max_excess.max(lhs - rhs);
        if witness.is_none() && lhs > rhs + INEQUALITY_TOL {
            witness = Some(Witness { trial: t as u64, pure: t % 2 == 0, lambda_a: la, lambda_ab: lab, lhs, rhs });
        }
    }
    Ok(InequalityVerdict {
        pi: pi.to_string(),
        sigma: sigma.to_string(),
        d_a,
        d_b,
        samples,
        never_violated: witness.is_none(),
        max_excess,
        witness,
    })
}
