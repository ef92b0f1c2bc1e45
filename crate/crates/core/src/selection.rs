//! Selection rules for pinned states.
//!
//! For a constraint D(lambda) = kappa0 + sum_j kappa_j lambda_j the operator
//! D^ = kappa0 + sum_j kappa_j n_j (n_j counting occupation of the j-th
//! natural orbital) is diagonal in the natural-orbital Slater basis with
//! integer eigenvalues. A state pinned by D satisfies D^|Psi> = 0, so only
//! determinants in the kernel of D^ can carry weight.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{QmargError, Result};
use crate::fock::{
    enumerate_slaters, natural_occupations, one_rdm, rotate_orbitals, FermionState, OrbitalSpace,
    SlaterDeterminant,
};
use crate::gpc::{evaluate, ConstraintCatalog, ConstraintKind, PauliConstraint, PinningReport};

/// Occupation gap below which natural orbitals are considered degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Diagonal of D^ over the Slater basis of `space`.
#[derive(Debug, Clone)]
pub struct DOperator {
    pub constraint: PauliConstraint,
    pub space: OrbitalSpace,
    pub values: Vec<i64>,
}

impl DOperator {
    pub fn value(&self, det: SlaterDeterminant) -> i64 {
        value_on(&self.constraint, det)
    }

    /// max - min of the integer spectrum.
    pub fn spectral_width(&self) -> i64 {
        let max = self.values.iter().copied().max().unwrap_or(0);
        let min = self.values.iter().copied().min().unwrap_or(0);
        max - min
    }

    /// || D^ |Psi> || for a state already written in natural orbitals.
    pub fn residual(&self, state: &FermionState) -> Result<f64> {
        if state.space() != self.space {
            return Err(QmargError::invalid("state and operator live in different spaces"));
        }
        Ok(self
            .values
            .iter()
            .zip(state.amplitudes())
            .map(|(&v, c)| (v as f64).powi(2) * c.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

fn value_on(c: &PauliConstraint, det: SlaterDeterminant) -> i64 {
    c.kappa0 + det.iter_orbitals().map(|k| c.kappas[k - 1]).sum::<i64>()
}

pub fn d_operator(c: &PauliConstraint, space: OrbitalSpace) -> Result<DOperator> {
    if c.d() != space.d() {
        return Err(QmargError::DimensionMismatch { expected: space.d(), found: c.d() });
    }
    let values = enumerate_slaters(space)?.into_iter().map(|s| value_on(c, s)).collect();
    Ok(DOperator { constraint: c.clone(), space, values })
}

/// Determinants annihilated by every D^ in `constraints`, in basis order.
/// An empty list imposes no restriction.
pub fn zero_eigenspace_slaters(
    constraints: &[&PauliConstraint],
    space: OrbitalSpace,
) -> Result<Vec<SlaterDeterminant>> {
    for c in constraints {
        if c.d() != space.d() {
            return Err(QmargError::DimensionMismatch { expected: space.d(), found: c.d() });
        }
    }
    Ok(enumerate_slaters(space)?
        .into_iter()
        .filter(|&s| constraints.iter().all(|c| value_on(c, s) == 0))
        .collect())
}

/// Support allowed by the saturated constraints of a pinning report.
///
/// Ordering constraints are skipped: a tie lambda_i = lambda_{i+1} says
/// nothing about the support.
pub fn reconstruct_ansatz(report: &PinningReport, cat: &ConstraintCatalog) -> Result<Vec<SlaterDeterminant>> {
    if report.n != cat.n || report.d != cat.d {
        return Err(QmargError::invalid("report and catalog describe different settings"));
    }
    let space = OrbitalSpace::new(cat.n, cat.d)?;
    let mut active = Vec::new();
    for label in &report.saturated {
        let c = cat
            .get(label)
            .ok_or_else(|| QmargError::invalid(format!("unknown constraint label '{label}'")))?;
        if c.kind != ConstraintKind::Ordering {
            active.push(c);
        }
    }
    zero_eigenspace_slaters(&active, space)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub label: String,
    /// D(lambda) on the sorted occupation numbers.
    pub constraint_value: f64,
    /// || D^ |Psi> || with D^ built on the state's natural orbitals.
    pub residual: f64,
    /// Allowed residual^2 when pinned: spectral width of D^ times tol.
    pub bound: f64,
    /// A degenerate block of occupations mixes different coefficients.
    pub degenerate: bool,
    /// `None` when unpinned or degenerate.
    pub consistent: Option<bool>,
}

/// State expressed in its own natural-orbital basis, ordered by decreasing
/// occupation, with the occupations.
pub fn natural_orbital_frame(state: &FermionState) -> Result<(FermionState, Vec<f64>)> {
    let (lambda, orbitals) = natural_occupations(&one_rdm(state)?)?;
    Ok((rotate_orbitals(state, &orbitals)?, lambda.as_slice().to_vec()))
}

/// Checks D(lambda) <= tol  =>  D^|Psi> = 0 numerically.
pub fn verify_pinning_lemma(state: &FermionState, c: &PauliConstraint, tol: f64) -> Result<LemmaReport> {
    state.require_normalized()?;
    let space = state.space();
    let (rotated, lambda) = natural_orbital_frame(state)?;
    lemma_in_frame(&rotated, &lambda, c, tol, space)
}

pub(crate) fn lemma_in_frame(
    rotated: &FermionState,
    lambda: &[f64],
    c: &PauliConstraint,
    tol: f64,
    space: OrbitalSpace,
) -> Result<LemmaReport> {
    let op = d_operator(c, space)?;
    let constraint_value = evaluate(c, lambda)?;
    let residual = op.residual(rotated)?;
    let degenerate = degenerate_block_mixes(lambda, &c.kappas);
    let bound = op.spectral_width() as f64 * tol.max(0.0);
    let consistent = if degenerate || constraint_value > tol {
        None
    } else {
        Some(residual * residual <= bound)
    };
    Ok(LemmaReport { label: c.label.clone(), constraint_value, residual, bound, degenerate, consistent })
}

fn degenerate_block_mixes(lambda: &[f64], kappas: &[i64]) -> bool {
    let mut start = 0;
    for i in 1..=lambda.len() {
        if i == lambda.len() || lambda[i - 1] - lambda[i] >= DEGENERACY_GAP {
            if kappas[start..i].windows(2).any(|w| w[0] != w[1]) {
                return true;
            }
            start = i;
        }
    }
    false
}

/// Weight of the state outside the given determinant set.
pub fn out_of_support_weight(state: &FermionState, support: &[SlaterDeterminant]) -> f64 {
    let inside: f64 = support.iter().map(|&s| state.amplitude(s).norm_sqr()).sum();
    (state.norm_sqr() - inside).max(0.0)
}

/// alpha|1,2,3> + beta|1,4,5> + gamma|2,4,6> in three fermions over six
/// orbitals, the general state pinned to the Borland-Dennis facet.
///
/// The coefficients must make the occupations (which are the diagonal of
/// the 1-RDM) decreasing: |beta| >= |gamma| and |alpha|^2 >= |beta|^2 + |gamma|^2.
pub fn pinned_facet_state(alpha: C64, beta: C64, gamma: C64) -> Result<FermionState> {
    let space = OrbitalSpace::new(3, 6)?;
    let det = |o: &[usize]| SlaterDeterminant::from_orbitals(o, 6);
    let state = FermionState::from_determinants(
        space,
        &[(det(&[1, 2, 3])?, alpha), (det(&[1, 4, 5])?, beta), (det(&[2, 4, 6])?, gamma)],
    )?;
    let (a, b, g) = (
        state.amplitude(det(&[1, 2, 3])?).norm_sqr(),
        state.amplitude(det(&[1, 4, 5])?).norm_sqr(),
        state.amplitude(det(&[2, 4, 6])?).norm_sqr(),
    );
    let occ = [a + b, a + g, a, b + g, b, g];
    if occ.windows(2).any(|w| w[1] > w[0]) {
        return Err(QmargError::invalid(format!(
            "coefficients give unordered occupations {occ:?}"
        )));
    }
    Ok(state)
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub n: usize,
    pub d: usize,
    pub saturated: Vec<String>,
    pub ansatz: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma: Option<Vec<LemmaReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_of_support_weight: Option<f64>,
}

/// Ansatz for the given saturated labels, plus lemma residuals and the
/// out-of-support weight when a state is supplied.
pub fn selection_report(
    cat: &ConstraintCatalog,
    saturated: &[String],
    state: Option<&FermionState>,
    tol: f64,
) -> Result<SelectionReport> {
    let space = OrbitalSpace::new(cat.n, cat.d)?;
    let mut active = Vec::new();
    for label in saturated {
        let c = cat
            .get(label)
            .ok_or_else(|| QmargError::invalid(format!("unknown constraint label '{label}' (known: {})", cat.labels().join(", "))))?;
        if c.kind != ConstraintKind::Ordering {
            active.push(c);
        }
    }
    let ansatz = zero_eigenspace_slaters(&active, space)?;
    let (lemma, weight) = match state {
        Some(psi) => {
            if psi.space() != space {
                return Err(QmargError::invalid("state does not match the catalog setting"));
            }
            let (rotated, lambda) = natural_orbital_frame(psi)?;
            let reports = active
                .iter()
                .map(|c| lemma_in_frame(&rotated, &lambda, c, tol, space))
                .collect::<Result<Vec<_>>>()?;
            (Some(reports), Some(out_of_support_weight(&rotated, &ansatz)))
        }
        None => (None, None),
    };
    Ok(SelectionReport {
        n: cat.n,
        d: cat.d,
        saturated: saturated.to_vec(),
        ansatz: ansatz.iter().map(|s| s.orbitals()).collect(),
        lemma,
        out_of_support_weight: weight,
    })
}
