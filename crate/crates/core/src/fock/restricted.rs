use num_complex::Complex64 as C64;

use super::{FermionState, OrbitalSpace, SlaterDeterminant};
use crate::error::{QmargError, Result};
use crate::linalg::{hermitian_eigen, CMatrix};

const HAMILTONIAN_HERMITIAN_TOL: f64 = 1e-10;

/// Lowest eigenpair of `h` (a matrix over the full Slater basis of
/// `space`) restricted to the span of `allowed`.
///
/// Orbitals stay fixed; only the configuration coefficients are
/// optimized, so the energy is a variational upper bound that can only
/// decrease as `allowed` grows.
pub fn restricted_ground_state(
    h: &CMatrix,
    space: OrbitalSpace,
    allowed: &[SlaterDeterminant],
) -> Result<(f64, FermionState)> {
    if allowed.is_empty() {
        return Err(QmargError::EmptySubset);
    }
    let dim = space.basis_len();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(QmargError::DimensionMismatch { expected: dim, found: h.nrows() });
    }
    let mut idx: Vec<usize> = Vec::with_capacity(allowed.len());
    for det in allowed {
        if det.particle_count() != space.n() || det.orbitals().last().is_some_and(|&k| k > space.d()) {
            return Err(QmargError::invalid(format!("{det} is not in the basis of {space:?}")));
        }
        idx.push(det.rank());
    }
    idx.sort_unstable();
    idx.dedup();
    let sub = CMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
    let eig = hermitian_eigen(&sub, HAMILTONIAN_HERMITIAN_TOL)?;
    let last = idx.len() - 1;
    let energy = eig.values[last];
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (i, &k) in idx.iter().enumerate() {
        amps[k] = eig.vectors[(i, last)];
    }
    Ok((energy, FermionState::from_amplitudes_normalized(space, amps)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_slaters;
    use crate::random::{random_hermitian, rng_for};

    #[test]
    fn full_basis_gives_exact_ground_state() {
        let space = OrbitalSpace::new(2, 4).unwrap();
        let h = random_hermitian(6, &mut rng_for(9, 0));
        let basis = enumerate_slaters(space).unwrap();
        let (e, psi) = restricted_ground_state(&h, space, &basis).unwrap();
        let mut reference: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        assert!((e - reference[0]).abs() < 1e-12);
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let hv = &h * &v;
        assert!((hv - v * C64::new(e, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn single_determinant_gives_diagonal_element() {
        let space = OrbitalSpace::new(2, 4).unwrap();
        let h = random_hermitian(6, &mut rng_for(9, 1));
        let basis = enumerate_slaters(space).unwrap();
        let (e, _) = restricted_ground_state(&h, space, &basis[2..3]).unwrap();
        assert!((e - h[(2, 2)].re).abs() < 1e-15);
    }

    #[test]
    fn empty_subset_rejected() {
        let space = OrbitalSpace::new(2, 4).unwrap();
        let h = CMatrix::identity(6, 6);
        assert!(matches!(restricted_ground_state(&h, space, &[]), Err(QmargError::EmptySubset)));
    }
}
