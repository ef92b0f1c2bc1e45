use num_complex::Complex64 as C64;

use super::{enumerate_slaters, FermionState};
use crate::error::{QmargError, Result};
use crate::linalg::{det, unitarity_deviation, CMatrix};

pub const UNITARY_TOL: f64 = 1e-10;

/// Re-expresses `state` in the orbital basis whose k-th orbital is the
/// k-th column of `u` (given in the current basis).
///
/// The new amplitude of |K> is sum_I conj(det U[I, K]) c_I, where U[I, K]
/// is the N x N minor with rows I and columns K. The 1-RDM transforms as
/// U† rho U, so passing the natural-orbital unitary diagonalizes it.
pub fn rotate_orbitals(state: &FermionState, u: &CMatrix) -> Result<FermionState> {
    let space = state.space();
    let d = space.d();
    if u.nrows() != d || u.ncols() != d {
        return Err(QmargError::DimensionMismatch { expected: d, found: u.nrows() });
    }
    let deviation = unitarity_deviation(u);
    if deviation > UNITARY_TOL {
        return Err(QmargError::NotUnitary { deviation });
    }
    let basis = enumerate_slaters(space)?;
    let n = space.n();
    let src: Vec<(Vec<usize>, C64)> = basis
        .iter()
        .zip(state.amplitudes())
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(s, &c)| (s.orbitals(), c))
        .collect();
    let mut minor = CMatrix::zeros(n, n);
    let mut out = Vec::with_capacity(basis.len());
    for target in &basis {
        let cols = target.orbitals();
        let mut acc = C64::new(0.0, 0.0);
        for (rows, c) in &src {
            for (a, &r) in rows.iter().enumerate() {
                for (b, &k) in cols.iter().enumerate() {
                    minor[(a, b)] = u[(r - 1, k - 1)];
                }
            }
            acc += det(&minor).conj() * c;
        }
        out.push(acc);
    }
    FermionState::from_raw(space, out)
}
