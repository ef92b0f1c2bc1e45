//! Generalized Pauli constraints: catalogs per (N, d), affine evaluation
//! on occupation vectors and pinning / quasipinning reports.
//!
//! Every catalog carries the Pauli hypercube (0 <= lambda <= 1), the
//! ordering of the occupation numbers and the normalization. Settings with
//! known additional constraints are read from an embedded table.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{QmargError, Result};
use crate::fock::{NonVector, OrbitalSpace};
use crate::linalg::compensated_sum;

pub const DEFAULT_PIN_TOL: f64 = 1e-8;
pub const DEFAULT_QUASI_THRESHOLDS: [f64; 3] = [1e-2, 1e-4, 1e-6];

const EMBEDDED_TABLE: &str = include_str!("../data/catalogs.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    #[serde(rename = "eq")]
    Equality,
    #[serde(rename = "ineq")]
    Inequality,
    /// lambda_i - lambda_{i+1} >= 0; a labelling convention rather than a
    /// facet of the spectral polytope.
    #[serde(rename = "order")]
    Ordering,
}

impl ConstraintKind {
    pub fn is_inequality(self) -> bool {
        !matches!(self, ConstraintKind::Equality)
    }
}

/// kappa0 + sum_j kappas[j] * lambda_{j+1}, compared with zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliConstraint {
    pub kappa0: i64,
    pub kappas: Vec<i64>,
    pub kind: ConstraintKind,
    pub label: String,
}

impl PauliConstraint {
    pub fn new(kappa0: i64, kappas: Vec<i64>, kind: ConstraintKind, label: impl Into<String>) -> Result<Self> {
        let c = Self { kappa0, kappas, kind, label: label.into() };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.kappa0 == 0 && self.kappas.iter().all(|&k| k == 0) {
            return Err(QmargError::invalid(format!("constraint '{}' has all coefficients zero", self.label)));
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.kappas.len()
    }

    /// Sum of |kappa_j| over j >= 1; bounds the value shift caused by
    /// dropping spectral weight epsilon as |kappa|_1 * epsilon.
    pub fn l1_norm(&self) -> i64 {
        self.kappas.iter().map(|k| k.abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Completeness {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCatalog {
    pub n: usize,
    pub d: usize,
    #[serde(default = "partial")]
    pub completeness: Completeness,
    pub constraints: Vec<PauliConstraint>,
}

fn partial() -> Completeness {
    Completeness::Partial
}

#[derive(Debug, Deserialize)]
struct EmbeddedTable {
    settings: Vec<ConstraintCatalog>,
}

static EXTRA_CONSTRAINTS: LazyLock<BTreeMap<(usize, usize), ConstraintCatalog>> = LazyLock::new(|| {
    let table: EmbeddedTable = serde_json::from_str(EMBEDDED_TABLE).expect("embedded catalog table parses");
    table.settings.into_iter().map(|c| ((c.n, c.d), c)).collect()
});

impl ConstraintCatalog {
    pub fn get(&self, label: &str) -> Option<&PauliConstraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.constraints.iter().map(|c| c.label.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cat: ConstraintCatalog = serde_json::from_str(text)
            .map_err(|e| QmargError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        OrbitalSpace::new(cat.n, cat.d)?;
        for c in &cat.constraints {
            if c.d() != cat.d {
                return Err(QmargError::DimensionMismatch { expected: cat.d, found: c.d() });
            }
            c.validate()?;
        }
        Ok(cat)
    }
}

/// Constraint catalog for N fermions in d orbitals.
pub fn catalog(n: usize, d: usize) -> Result<ConstraintCatalog> {
    if n > d {
        return Err(QmargError::InvalidSpace(format!("N = {n} exceeds d = {d}")));
    }
    OrbitalSpace::new(n, d)?;
    let mut constraints = Vec::with_capacity(d + 3);
    for i in 0..d.saturating_sub(1) {
        let mut k = vec![0; d];
        k[i] = 1;
        k[i + 1] = -1;
        constraints.push(PauliConstraint { kappa0: 0, kappas: k, kind: ConstraintKind::Ordering, label: format!("order-{}", i + 1) });
    }
    let mut upper = vec![0; d];
    upper[0] = -1;
    constraints.push(PauliConstraint { kappa0: 1, kappas: upper, kind: ConstraintKind::Inequality, label: "pauli-upper".into() });
    let mut lower = vec![0; d];
    lower[d - 1] = 1;
    constraints.push(PauliConstraint { kappa0: 0, kappas: lower, kind: ConstraintKind::Inequality, label: "pauli-lower".into() });
    constraints.push(PauliConstraint {
        kappa0: -(n as i64),
        kappas: vec![1; d],
        kind: ConstraintKind::Equality,
        label: "normalization".into(),
    });

    let mut completeness = if n == 1 { Completeness::Complete } else { Completeness::Partial };
    if let Some(extra) = EXTRA_CONSTRAINTS.get(&(n, d)) {
        constraints.extend(extra.constraints.iter().cloned());
        completeness = extra.completeness;
    }
    Ok(ConstraintCatalog { n, d, completeness, constraints })
}

/// Affine value of the constraint, accumulated with compensated summation.
pub fn evaluate(c: &PauliConstraint, lambda: &[f64]) -> Result<f64> {
    if lambda.len() != c.d() {
        return Err(QmargError::DimensionMismatch { expected: c.d(), found: lambda.len() });
    }
    let terms = c.kappas.iter().zip(lambda).filter(|(&k, _)| k != 0).map(|(&k, &l)| k as f64 * l);
    Ok(compensated_sum(std::iter::once(c.kappa0 as f64).chain(terms)))
}

/// First `d_target` occupations unchanged plus the dropped weight
/// N - sum(kept).
pub fn truncate_spectrum(lambda: &[f64], d_target: usize, n_particles: usize) -> (Vec<f64>, f64) {
    let kept: Vec<f64> = lambda.iter().copied().take(d_target).collect();
    let eps = n_particles as f64 - kept.iter().sum::<f64>();
    (kept, eps)
}

/// l2 distance of the occupations to (1,...,1,0,...) with N ones.
pub fn hartree_fock_distance(lambda: &[f64], n_particles: usize) -> f64 {
    lambda
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let target = if i < n_particles { 1.0 } else { 0.0 };
            (l - target).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinningOptions {
    pub pin_tol: f64,
    pub quasi_thresholds: Vec<f64>,
}

impl Default for PinningOptions {
    fn default() -> Self {
        Self { pin_tol: DEFAULT_PIN_TOL, quasi_thresholds: DEFAULT_QUASI_THRESHOLDS.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintValue {
    pub label: String,
    pub kind: ConstraintKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasipinLevel {
    pub threshold: f64,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinningReport {
    pub n: usize,
    pub d: usize,
    pub pin_tol: f64,
    pub values: Vec<ConstraintValue>,
    /// Smallest value over the inequality facets (ordering excluded).
    pub min_inequality_value: f64,
    pub min_inequality_label: String,
    /// Constraints with |value| <= pin_tol, ordering constraints included.
    pub saturated: Vec<String>,
    pub equality_residuals: Vec<ConstraintValue>,
    /// Equalities off by more than pin_tol and inequalities below -pin_tol.
    pub violations: Vec<String>,
    pub quasipinned: Vec<QuasipinLevel>,
    pub truncation_weight: Option<f64>,
    pub hf_distance: f64,
}

impl PinningReport {
    pub fn is_pinned(&self) -> bool {
        self.min_inequality_value.abs() <= self.pin_tol
    }

    pub fn is_violated(&self) -> bool {
        !self.violations.is_empty()
    }

    pub fn value(&self, label: &str) -> Option<f64> {
        self.values.iter().find(|v| v.label == label).map(|v| v.value)
    }
}

pub fn pinning_report(lambda: &NonVector, cat: &ConstraintCatalog, pin_tol: f64) -> Result<PinningReport> {
    pinning_report_with(lambda, cat, &PinningOptions { pin_tol, ..Default::default() })
}

/// Evaluates every constraint of `cat` on `lambda`. Vectors longer than
/// the catalog dimension are truncated and the dropped weight reported.
pub fn pinning_report_with(lambda: &NonVector, cat: &ConstraintCatalog, opts: &PinningOptions) -> Result<PinningReport> {
    let full = lambda.as_slice();
    if full.len() < cat.d {
        return Err(QmargError::DimensionMismatch { expected: cat.d, found: full.len() });
    }
    let (kept, eps) = truncate_spectrum(full, cat.d, cat.n);
    let truncation_weight = (full.len() > cat.d).then_some(eps);

    let mut values = Vec::with_capacity(cat.constraints.len());
    let mut saturated = Vec::new();
    let mut equality_residuals = Vec::new();
    let mut violations = Vec::new();
    let mut min_val = f64::INFINITY;
    let mut min_label = String::new();
    for c in &cat.constraints {
        let value = evaluate(c, &kept)?;
        let cv = ConstraintValue { label: c.label.clone(), kind: c.kind, value };
        if value.abs() <= opts.pin_tol {
            saturated.push(c.label.clone());
        }
        match c.kind {
            ConstraintKind::Equality => {
                if value.abs() > opts.pin_tol {
                    violations.push(c.label.clone());
                }
                equality_residuals.push(cv.clone());
            }
            ConstraintKind::Inequality | ConstraintKind::Ordering => {
                if value < -opts.pin_tol {
                    violations.push(c.label.clone());
                }
                if c.kind == ConstraintKind::Inequality && value < min_val {
                    min_val = value;
                    min_label = c.label.clone();
                }
            }
        }
        values.push(cv);
    }
    let quasipinned = opts
        .quasi_thresholds
        .iter()
        .map(|&threshold| QuasipinLevel {
            threshold,
            labels: cat
                .constraints
                .iter()
                .zip(&values)
                .filter(|(c, v)| c.kind == ConstraintKind::Inequality && v.value.abs() <= threshold)
                .map(|(c, _)| c.label.clone())
                .collect(),
        })
        .collect();
    Ok(PinningReport {
        n: cat.n,
        d: cat.d,
        pin_tol: opts.pin_tol,
        values,
        min_inequality_value: min_val,
        min_inequality_label: min_label,
        saturated,
        equality_residuals,
        violations,
        quasipinned,
        truncation_weight,
        hf_distance: hartree_fock_distance(full, cat.n),
    })
}
