//! Finite fermionic Fock space over `d` orbitals.
//!
//! A Slater determinant |k1,...,kN> with k1 < ... < kN is the ordered
//! product of creators a†_{k1} ... a†_{kN} acting on the vacuum. Creators
//! and annihilators pick up a sign (-1)^m, where m counts occupied orbitals
//! with a strictly smaller index.

mod io;
pub mod rdm;
mod restricted;
mod rotate;

pub use io::{read_state, read_state_file, write_state, AmplitudeEntry, StateFile};
pub use rdm::{natural_occupations, occupations_of, one_hole_rdm, one_rdm, NonVector, OneRdm};
pub use restricted::restricted_ground_state;
pub use rotate::rotate_orbitals;

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QmargError, Result};

/// Default cap on the number of Slater determinants a basis may contain.
pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

/// Tolerated deviation of a state norm from one before it is rejected.
pub const NORM_TOL: f64 = 1e-8;

static BINOMIAL: std::sync::LazyLock<[[u64; 65]; 65]> = std::sync::LazyLock::new(|| {
    let mut t = [[0u64; 65]; 65];
    for n in 0..65 {
        t[n][0] = 1;
        for k in 1..=n {
            t[n][k] = t[n - 1][k - 1].saturating_add(if k < n { t[n - 1][k] } else { 0 });
        }
    }
    t
});

/// Binomial coefficient C(n, k) for n <= 64.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n || n > 64 {
        return 0;
    }
    BINOMIAL[n][k]
}

/// One-particle dimension `d` and particle number `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitalSpace {
    n: usize,
    d: usize,
}

impl OrbitalSpace {
    pub const MAX_ORBITALS: usize = 64;

    pub fn new(n_particles: usize, n_orbitals: usize) -> Result<Self> {
        if n_particles == 0 {
            return Err(QmargError::InvalidSpace("particle number must be positive".into()));
        }
        if n_orbitals > Self::MAX_ORBITALS {
            return Err(QmargError::InvalidSpace(format!(
                "d = {n_orbitals} exceeds the bitmask capacity of {}",
                Self::MAX_ORBITALS
            )));
        }
        if n_particles > n_orbitals {
            return Err(QmargError::InvalidSpace(format!(
                "N = {n_particles} exceeds d = {n_orbitals}"
            )));
        }
        Ok(Self { n: n_particles, d: n_orbitals })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// C(d, N).
    pub fn basis_len(&self) -> usize {
        binomial(self.d, self.n) as usize
    }

    pub fn check_capacity(&self, cap: usize) -> Result<usize> {
        let size = binomial(self.d, self.n);
        if size as u128 > cap as u128 {
            return Err(QmargError::Capacity { size: size as u128, cap });
        }
        Ok(size as usize)
    }

    fn full_mask(&self) -> u64 {
        if self.d == 64 {
            u64::MAX
        } else {
            (1u64 << self.d) - 1
        }
    }
}

/// Occupation bitmask; bit `i - 1` holds orbital `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlaterDeterminant(u64);

impl SlaterDeterminant {
    pub const fn from_mask(mask: u64) -> Self {
        Self(mask)
    }

    /// Builds a determinant from 1-based orbital indices (any order, no repeats).
    pub fn from_orbitals(orbitals: &[usize], d: usize) -> Result<Self> {
        let mut mask = 0u64;
        for &k in orbitals {
            if k == 0 || k > d {
                return Err(QmargError::OrbitalOutOfRange { index: k, d });
            }
            let bit = 1u64 << (k - 1);
            if mask & bit != 0 {
                return Err(QmargError::invalid(format!("orbital {k} listed twice")));
            }
            mask |= bit;
        }
        Ok(Self(mask))
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn particle_count(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn occupies(self, k: usize) -> bool {
        (1..=64).contains(&k) && self.0 & (1u64 << (k - 1)) != 0
    }

    /// Occupied orbitals, ascending, 1-based.
    pub fn orbitals(self) -> Vec<usize> {
        OccupiedIter(self.0).collect()
    }

    pub fn iter_orbitals(self) -> impl Iterator<Item = usize> {
        OccupiedIter(self.0)
    }

    /// Position of this determinant in [`enumerate_slaters`] order.
    pub fn rank(self) -> usize {
        let mut r = 0u64;
        for (i, k) in OccupiedIter(self.0).enumerate() {
            r += binomial(k - 1, i + 1);
        }
        r as usize
    }

    /// Number of occupied orbitals strictly below `k`.
    #[inline]
    fn occupied_below(self, k: usize) -> u32 {
        (self.0 & ((1u64 << (k - 1)) - 1)).count_ones()
    }
}

struct OccupiedIter(u64);

impl Iterator for OccupiedIter {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(tz + 1)
    }
}

impl fmt::Display for SlaterDeterminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter_orbitals().map(|k| k.to_string()).collect();
        write!(f, "|{}>", parts.join(","))
    }
}

/// All C(d, N) determinants in increasing bitmask order.
pub fn enumerate_slaters(space: OrbitalSpace) -> Result<Vec<SlaterDeterminant>> {
    enumerate_slaters_capped(space, DEFAULT_BASIS_CAP)
}

pub fn enumerate_slaters_capped(space: OrbitalSpace, cap: usize) -> Result<Vec<SlaterDeterminant>> {
    let len = space.check_capacity(cap)?;
    let mut out = Vec::with_capacity(len);
    let mut mask: u64 = if space.n == 64 { u64::MAX } else { (1u64 << space.n) - 1 };
    for i in 0..len {
        out.push(SlaterDeterminant(mask));
        if i + 1 == len {
            break;
        }
        // next integer with the same popcount
        let c = mask & mask.wrapping_neg();
        let r = mask.wrapping_add(c);
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    debug_assert!(out.iter().all(|s| s.0 & !space.full_mask() == 0));
    Ok(out)
}

/// Applies `a_k`. Returns `None` when orbital `k` is empty.
pub fn apply_annihilator(
    det: SlaterDeterminant,
    k: usize,
    d: usize,
) -> Result<Option<(i8, SlaterDeterminant)>> {
    if k == 0 || k > d {
        return Err(QmargError::OrbitalOutOfRange { index: k, d });
    }
    Ok(annihilate(det, k))
}

/// Applies `a†_k`. Returns `None` when orbital `k` is already filled.
pub fn apply_creator(
    det: SlaterDeterminant,
    k: usize,
    d: usize,
) -> Result<Option<(i8, SlaterDeterminant)>> {
    if k == 0 || k > d {
        return Err(QmargError::OrbitalOutOfRange { index: k, d });
    }
    Ok(create(det, k))
}

#[inline]
pub(crate) fn annihilate(det: SlaterDeterminant, k: usize) -> Option<(i8, SlaterDeterminant)> {
    let bit = 1u64 << (k - 1);
    if det.0 & bit == 0 {
        return None;
    }
    let sign = if det.occupied_below(k).is_multiple_of(2) { 1 } else { -1 };
    Some((sign, SlaterDeterminant(det.0 & !bit)))
}

#[inline]
pub(crate) fn create(det: SlaterDeterminant, k: usize) -> Option<(i8, SlaterDeterminant)> {
    let bit = 1u64 << (k - 1);
    if det.0 & bit != 0 {
        return None;
    }
    let sign = if det.occupied_below(k).is_multiple_of(2) { 1 } else { -1 };
    Some((sign, SlaterDeterminant(det.0 | bit)))
}

/// Pure N-fermion state as dense amplitudes over [`enumerate_slaters`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionState {
    space: OrbitalSpace,
    amplitudes: Vec<C64>,
}

impl FermionState {
    /// Accepts amplitudes whose norm is within [`NORM_TOL`] of one, then
    /// rescales to unit norm.
    pub fn new(space: OrbitalSpace, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::from_raw(space, amplitudes)?;
        let deviation = (state.norm_sqr() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(QmargError::Unnormalized { deviation });
        }
        Ok(state.normalized())
    }

    /// Normalizes any nonzero amplitude vector.
    pub fn from_amplitudes_normalized(space: OrbitalSpace, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::from_raw(space, amplitudes)?;
        if state.norm_sqr() == 0.0 || !state.norm_sqr().is_finite() {
            return Err(QmargError::invalid("state has zero or non-finite norm"));
        }
        Ok(state.normalized())
    }

    /// No normalization check; operations that require a unit vector
    /// validate on entry.
    pub fn from_raw(space: OrbitalSpace, amplitudes: Vec<C64>) -> Result<Self> {
        let len = space.check_capacity(DEFAULT_BASIS_CAP)?;
        if amplitudes.len() != len {
            return Err(QmargError::DimensionMismatch { expected: len, found: amplitudes.len() });
        }
        Ok(Self { space, amplitudes })
    }

    /// Superposition of the given determinants, normalized.
    pub fn from_determinants(
        space: OrbitalSpace,
        terms: &[(SlaterDeterminant, C64)],
    ) -> Result<Self> {
        let len = space.check_capacity(DEFAULT_BASIS_CAP)?;
        let mut amps = vec![C64::new(0.0, 0.0); len];
        for &(det, c) in terms {
            if det.particle_count() != space.n || det.0 & !space.full_mask() != 0 {
                return Err(QmargError::invalid(format!("{det} does not belong to {space:?}")));
            }
            amps[det.rank()] += c;
        }
        Self::from_amplitudes_normalized(space, amps)
    }

    pub fn basis_state(space: OrbitalSpace, det: SlaterDeterminant) -> Result<Self> {
        Self::from_determinants(space, &[(det, C64::new(1.0, 0.0))])
    }

    pub fn space(&self) -> OrbitalSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, det: SlaterDeterminant) -> C64 {
        if det.particle_count() != self.space.n || det.0 & !self.space.full_mask() != 0 {
            return C64::new(0.0, 0.0);
        }
        self.amplitudes[det.rank()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        for c in &mut self.amplitudes {
            *c /= norm;
        }
        self
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        let deviation = (self.norm_sqr() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(QmargError::Unnormalized { deviation });
        }
        Ok(())
    }

    /// Determinants with nonzero amplitude paired with the amplitude.
    pub fn terms(&self) -> Vec<(SlaterDeterminant, C64)> {
        let basis = enumerate_slaters(self.space).expect("capacity checked on construction");
        basis
            .into_iter()
            .zip(self.amplitudes.iter().copied())
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .collect()
    }

    /// <self|other>
    pub fn inner(&self, other: &FermionState) -> Result<C64> {
        if self.space != other.space {
            return Err(QmargError::invalid("states live in different spaces"));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }
}
