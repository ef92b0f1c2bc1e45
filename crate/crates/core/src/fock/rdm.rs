use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{annihilate, create, enumerate_slaters, FermionState};
use crate::error::{QmargError, Result};
use crate::linalg::{hermitian_eigen, hermiticity_deviation, trace, CMatrix};

pub const RDM_HERMITIAN_TOL: f64 = 1e-12;
pub const RDM_TRACE_TOL: f64 = 1e-10;

/// One-particle reduced density matrix, trace-normalized to N.
#[derive(Debug, Clone)]
pub struct OneRdm {
    n: usize,
    matrix: CMatrix,
}

impl OneRdm {
    /// Validates Hermiticity and the trace.
    pub fn new(n_particles: usize, matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d {
            return Err(QmargError::DimensionMismatch { expected: d, found: matrix.ncols() });
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > RDM_HERMITIAN_TOL {
            return Err(QmargError::NotHermitian { deviation });
        }
        let tr = trace(&matrix).re;
        if (tr - n_particles as f64).abs() > RDM_TRACE_TOL {
            return Err(QmargError::invalid(format!(
                "1-RDM trace {tr} differs from N = {n_particles}"
            )));
        }
        Ok(Self { n: n_particles, matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Natural occupation numbers, decreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NonVector {
    lambdas: Vec<f64>,
}

impl NonVector {
    pub const ORDER_TOL: f64 = 1e-9;

    /// Checks ordering and the Pauli bounds 0 <= lambda <= 1.
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(QmargError::invalid("empty occupation vector"));
        }
        for w in lambdas.windows(2) {
            if w[1] > w[0] + Self::ORDER_TOL {
                return Err(QmargError::invalid(format!(
                    "occupation numbers not decreasing: {} < {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(x) = lambdas.iter().find(|&&x| !(-Self::ORDER_TOL..=1.0 + Self::ORDER_TOL).contains(&x)) {
            return Err(QmargError::invalid(format!("occupation number {x} outside [0, 1]")));
        }
        Ok(Self { lambdas })
    }

    /// Sorts into decreasing order first.
    pub fn from_unsorted(mut lambdas: Vec<f64>) -> Result<Self> {
        lambdas.sort_by(|a, b| b.total_cmp(a));
        Self::new(lambdas)
    }

    pub(crate) fn from_eigenvalues(lambdas: Vec<f64>) -> Self {
        Self { lambdas }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// Copy extended with zeros up to length `d`.
    pub fn padded(&self, d: usize) -> Self {
        let mut l = self.lambdas.clone();
        l.resize(d.max(l.len()), 0.0);
        Self { lambdas: l }
    }
}

/// (rho)_{jk} = <Psi| a†_k a_j |Psi>.
pub fn one_rdm(state: &FermionState) -> Result<OneRdm> {
    state.require_normalized()?;
    let space = state.space();
    let d = space.d();
    let basis = enumerate_slaters(space)?;
    let amps = state.amplitudes();
    let mut rho = CMatrix::zeros(d, d);
    for (det, &c) in basis.iter().zip(amps) {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        for j in det.iter_orbitals() {
            rho[(j - 1, j - 1)] += C64::new(c.norm_sqr(), 0.0);
            let (s1, hole) = annihilate(*det, j).expect("orbital j occupied");
            for k in 1..=d {
                if k == j {
                    continue;
                }
                if let Some((s2, target)) = create(hole, k) {
                    let ck = amps[target.rank()];
                    if ck.norm_sqr() != 0.0 {
                        rho[(j - 1, k - 1)] += ck.conj() * c * f64::from(s1 * s2);
                    }
                }
            }
        }
    }
    // remove rounding asymmetry
    let herm = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    OneRdm::new(space.n(), herm)
}

/// Hole matrix (1 - rho)_{jk} = <Psi| a_j a†_k |Psi>, accumulated from
/// amplitude products so that holes of nearly filled orbitals keep full
/// relative precision.
pub fn one_hole_rdm(state: &FermionState) -> Result<CMatrix> {
    state.require_normalized()?;
    let space = state.space();
    let d = space.d();
    let basis = enumerate_slaters(space)?;
    let amps = state.amplitudes();
    let mut hole = CMatrix::zeros(d, d);
    for (det, &c) in basis.iter().zip(amps) {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        for k in 1..=d {
            let Some((s1, added)) = create(*det, k) else { continue };
            hole[(k - 1, k - 1)] += C64::new(c.norm_sqr(), 0.0);
            for j in added.iter_orbitals() {
                if j == k {
                    continue;
                }
                let (s2, target) = annihilate(added, j).expect("orbital j occupied");
                let cj = amps[target.rank()];
                if cj.norm_sqr() != 0.0 {
                    hole[(j - 1, k - 1)] += cj.conj() * c * f64::from(s1 * s2);
                }
            }
        }
    }
    Ok((&hole + hole.adjoint()) * C64::new(0.5, 0.0))
}

/// Eigen-decomposition of the 1-RDM: occupations in decreasing order and
/// the natural orbitals as columns of a unitary in matching order.
pub fn natural_occupations(rdm: &OneRdm) -> Result<(NonVector, CMatrix)> {
    let eig = hermitian_eigen(rdm.matrix(), RDM_HERMITIAN_TOL)?;
    Ok((NonVector::from_eigenvalues(eig.values), eig.vectors))
}

/// Convenience: occupation numbers of a state.
pub fn occupations_of(state: &FermionState) -> Result<NonVector> {
    Ok(natural_occupations(&one_rdm(state)?)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{OrbitalSpace, SlaterDeterminant};

    fn det(o: &[usize]) -> SlaterDeterminant {
        SlaterDeterminant::from_orbitals(o, 6).unwrap()
    }

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn single_determinant_is_diagonal_projector() {
        let space = OrbitalSpace::new(3, 6).unwrap();
        let psi = FermionState::basis_state(space, det(&[1, 2, 3])).unwrap();
        let rho = one_rdm(&psi).unwrap();
        for j in 0..6 {
            for k in 0..6 {
                let expect = if j == k && j < 3 { 1.0 } else { 0.0 };
                assert!((rho.matrix()[(j, k)] - r(expect)).norm() < 1e-15);
            }
        }
        let (lam, _) = natural_occupations(&rho).unwrap();
        assert_eq!(lam.as_slice(), &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let space = OrbitalSpace::new(1, 2).unwrap();
        let psi = FermionState::from_raw(space, vec![r(1.0), r(1.0)]).unwrap();
        assert!(matches!(one_rdm(&psi), Err(QmargError::Unnormalized { .. })));
    }

    #[test]
    fn half_filling_superposition() {
        let space = OrbitalSpace::new(3, 6).unwrap();
        let psi = FermionState::from_determinants(
            space,
            &[(det(&[1, 2, 3]), r(1.0)), (det(&[4, 5, 6]), r(1.0))],
        )
        .unwrap();
        let (lam, _) = natural_occupations(&one_rdm(&psi).unwrap()).unwrap();
        for x in lam.as_slice() {
            assert!((x - 0.5).abs() < 1e-14);
        }
        assert!((lam.as_slice()[0] + lam.as_slice()[5] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hole_matrix_complements_rdm() {
        let space = OrbitalSpace::new(3, 7).unwrap();
        let psi = crate::random::random_state(space, &mut crate::random::rng_for(9, 0));
        let rho = one_rdm(&psi).unwrap();
        let hole = one_hole_rdm(&psi).unwrap();
        let sum = rho.matrix() + hole;
        assert!((sum - CMatrix::identity(7, 7)).norm() < 1e-13);
    }

    #[test]
    fn non_vector_validation() {
        assert!(NonVector::new(vec![0.5, 0.7]).is_err());
        assert!(NonVector::new(vec![1.2, 0.0]).is_err());
        assert!(NonVector::new(vec![]).is_err());
        let v = NonVector::from_unsorted(vec![0.4, 0.9, 0.7]).unwrap();
        assert_eq!(v.as_slice(), &[0.9, 0.7, 0.4]);
        assert_eq!(v.padded(5).as_slice(), &[0.9, 0.7, 0.4, 0.0, 0.0]);
    }
}
