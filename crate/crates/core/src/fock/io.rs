use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{FermionState, OrbitalSpace, SlaterDeterminant};
use crate::error::{QmargError, Result};

/// Amplitudes below this magnitude are not written.
pub const WRITE_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub d: usize,
    pub n: usize,
    pub amplitudes: Vec<AmplitudeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeEntry {
    pub orbitals: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Parses, validates and normalizes a state document.
pub fn read_state(text: &str) -> Result<FermionState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| {
        QmargError::Parse(e.to_string())
    })?;
    let space = OrbitalSpace::new(file.n, file.d)?;
    let len = space.check_capacity(super::DEFAULT_BASIS_CAP)?;
    let mut amps = vec![C64::new(0.0, 0.0); len];
    let mut seen = vec![false; len];
    for (i, entry) in file.amplitudes.iter().enumerate() {
        if entry.orbitals.len() != space.n() {
            return Err(QmargError::Parse(format!(
                "amplitude {i}: {} orbitals listed, expected {}",
                entry.orbitals.len(),
                space.n()
            )));
        }
        if !entry.re.is_finite() || !entry.im.is_finite() {
            return Err(QmargError::Parse(format!("amplitude {i}: non-finite value")));
        }
        let det = SlaterDeterminant::from_orbitals(&entry.orbitals, space.d())
            .map_err(|e| QmargError::Parse(format!("amplitude {i}: {e}")))?;
        let r = det.rank();
        if seen[r] {
            return Err(QmargError::Parse(format!("amplitude {i}: duplicate determinant {det}")));
        }
        seen[r] = true;
        amps[r] = C64::new(entry.re, entry.im);
    }
    FermionState::from_amplitudes_normalized(space, amps)
}

pub fn read_state_file(path: &Path) -> Result<FermionState> {
    read_state(&std::fs::read_to_string(path)?)
}

pub fn to_state_file(state: &FermionState) -> StateFile {
    let space = state.space();
    let amplitudes = state
        .terms()
        .into_iter()
        .filter(|(_, c)| c.norm() > WRITE_CUTOFF)
        .map(|(det, c)| AmplitudeEntry { orbitals: det.orbitals(), re: c.re, im: c.im })
        .collect();
    StateFile { d: space.d(), n: space.n(), amplitudes }
}

pub fn write_state(state: &FermionState) -> String {
    serde_json::to_string_pretty(&to_state_file(state)).expect("state file serializes")
}
