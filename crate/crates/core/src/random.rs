//! Reproducible random sampling of states, unitaries and density matrices.
//!
//! Every sampler draws from a ChaCha stream keyed by `(seed, stream)`, so
//! Monte-Carlo trials can be evaluated in any order (or concurrently) and
//! still give identical results.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::StandardNormal;

use crate::fock::{FermionState, OrbitalSpace};
use crate::linalg::{orthonormalize_columns, CMatrix};

pub const DEFAULT_SEED: u64 = 0x5EED_0001;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// I.i.d. complex Gaussian amplitudes over the Slater basis, normalized.
pub fn random_state<R: Rng + ?Sized>(space: OrbitalSpace, rng: &mut R) -> FermionState {
    let dim = space.basis_len();
    let amps: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
    FermionState::from_amplitudes_normalized(space, amps).expect("nonzero gaussian vector")
}

/// Haar-random unitary from Gram-Schmidt of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    orthonormalize_columns(&ginibre(n, n, rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// rho = G G^dagger / Tr(G G^dagger) with G of shape n x rank.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, rank.max(1), rng);
    let rho = &g * g.adjoint();
    let tr = crate::linalg::trace(&rho).re;
    rho / C64::new(tr, 0.0)
}

pub fn random_pure_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut psi = DVector::from_fn(n, |_, _| complex_normal(rng));
    let norm = psi.norm();
    psi.unscale_mut(norm);
    &psi * psi.adjoint()
}
