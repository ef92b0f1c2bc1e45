//! N spinless fermions in a 1-D harmonic trap with harmonic pair coupling.
//!
//! H = sum_i (p_i^2/2 + x_i^2/2) + K sum_{i<j} (x_i - x_j)^2 with K = kappa/N
//! in units hbar = m = omega = 1. The centre of mass oscillates at
//! frequency 1 and the N - 1 relative modes at w = sqrt(1 + 2 kappa), so
//! the ground state is
//!
//!   Psi = c0 prod_{i<j} (x_i - x_j) exp(-c1 X^2 - c2 |x|^2),
//!   c2 = w/2, c1 = (1 - w)/(2N), X = x_1 + ... + x_N,
//!
//! with energy 1/2 + w (N-1)/2 + w N(N-1)/2.
//!
//! The state is expanded over Slater determinants of Hermite functions by
//! Gauss-Hermite quadrature in principal-axis coordinates, which is exact
//! because every integrand is a polynomial times exp(-|z|^2). Occupations
//! close to 1 are obtained from the hole matrix so that D(kappa) ~ kappa^8
//! stays resolvable well below 1e-13.

pub mod quadrature;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QmargError, Result};
use crate::fock::{binomial, one_hole_rdm, one_rdm, FermionState, OrbitalSpace, SlaterDeterminant};
use crate::gpc::{catalog, PauliConstraint};
use crate::linalg::{compensated_sum, hermitian_eigen, CMatrix};
use crate::C64;
use quadrature::{hermite_functions, nodes_for_degree, PrincipalGrid};

pub const DEFAULT_BASIS: usize = 28;
/// Largest tolerated basis-truncation weight 1 - |c|^2.
pub const MAX_NORM_DEFICIT: f64 = 1e-6;
/// D below this multiple of its error estimate is reported as a precision floor.
pub const PRECISION_FLOOR_FACTOR: f64 = 100.0;
pub const SCAN_KAPPA_MIN: f64 = 0.01;
pub const SCAN_KAPPA_MAX: f64 = 0.5;
/// Number of occupations kept for the Borland-Dennis analysis.
pub const TRUNCATION: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmoniumParams {
    n: usize,
    kappa: f64,
}

impl HarmoniumParams {
    pub fn new(n: usize, kappa: f64) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(QmargError::invalid(format!("harmonium supports N = 2, 3, 4 (got {n})")));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(QmargError::invalid(format!("kappa must be finite and >= 0 (got {kappa})")));
        }
        Ok(Self { n, kappa })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroundStateSpec {
    pub n: usize,
    pub kappa: f64,
    pub omega_rel: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub energy: f64,
}

fn vandermonde(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            v *= x[i] - x[j];
        }
    }
    v
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

impl GroundStateSpec {
    /// Psi(x).
    pub fn value(&self, x: &[f64]) -> f64 {
        self.c0 * vandermonde(x) * self.gaussian(x)
    }

    fn gaussian(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().sum();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        (-self.c2 * sq - self.c1 * s * s).exp()
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let n = self.n as f64;
        let s: f64 = x.iter().sum();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        0.5 * sq + self.kappa / n * (n * sq - s * s)
    }

    /// (H Psi)(x), with derivatives of the Vandermonde factor expanded
    /// over pair products (no division by x_i - x_j).
    pub fn apply_hamiltonian(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let ps = pairs(n);
        let factors: Vec<f64> = ps.iter().map(|&(a, b)| x[a] - x[b]).collect();
        let prod_except = |skip: &[usize]| -> f64 {
            factors.iter().enumerate().filter(|(q, _)| !skip.contains(q)).map(|(_, f)| f).product()
        };
        let slope = |i: usize, p: usize| -> f64 {
            let (a, b) = ps[p];
            if i == a {
                1.0
            } else if i == b {
                -1.0
            } else {
                0.0
            }
        };
        let s: f64 = x.iter().sum();
        let v = vandermonde(x);
        let mut lap = 0.0;
        for (i, &xi) in x.iter().enumerate().take(n) {
            let g = -2.0 * self.c2 * xi - 2.0 * self.c1 * s;
            let mut dv = 0.0;
            let mut d2v = 0.0;
            for p in 0..ps.len() {
                let sp = slope(i, p);
                if sp == 0.0 {
                    continue;
                }
                dv += sp * prod_except(&[p]);
                for q in 0..ps.len() {
                    let sq = slope(i, q);
                    if q != p && sq != 0.0 {
                        d2v += sp * sq * prod_except(&[p, q]);
                    }
                }
            }
            lap += d2v + 2.0 * dv * g + v * (g * g - 2.0 * self.c2 - 2.0 * self.c1);
        }
        self.c0 * self.gaussian(x) * (-0.5 * lap + self.potential(x) * v)
    }

    fn density_grid(&self, degree: usize) -> PrincipalGrid {
        // |Psi|^2 carries exp(-x^T Q x) with eigenvalues 1 (centre of mass) and w
        PrincipalGrid::new(self.n, 1.0, self.omega_rel, nodes_for_degree(degree))
    }
}

pub fn ground_state_spec(params: HarmoniumParams) -> GroundStateSpec {
    let n = params.n;
    let nf = n as f64;
    let w = (1.0 + 2.0 * params.kappa).sqrt();
    let mut spec = GroundStateSpec {
        n,
        kappa: params.kappa,
        omega_rel: w,
        c0: 1.0,
        c1: (1.0 - w) / (2.0 * nf),
        c2: w / 2.0,
        energy: 0.5 + w * (nf - 1.0) / 2.0 + w * nf * (nf - 1.0) / 2.0,
    };
    let norm = spec.density_grid(n * (n - 1)).integrate(|x| spec.value(x).powi(2));
    spec.c0 = norm.sqrt().recip();
    spec
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualReport {
    pub exact_energy: f64,
    pub rayleigh_energy: f64,
    /// <(H - E)^2> / E^2 with E the Rayleigh quotient
    pub relative_variance: f64,
}

/// Eigenfunction check of the closed-form ground state by exact quadrature.
pub fn eigen_residual(spec: &GroundStateSpec) -> ResidualReport {
    let deg = spec.n * (spec.n - 1) / 2;
    let grid = spec.density_grid(2 * deg + 4);
    let norm = grid.integrate(|x| spec.value(x).powi(2));
    let e = grid.integrate(|x| spec.value(x) * spec.apply_hamiltonian(x)) / norm;
    let var = grid.integrate(|x| (spec.apply_hamiltonian(x) - e * spec.value(x)).powi(2)) / norm;
    ResidualReport { exact_energy: spec.energy, rayleigh_energy: e, relative_variance: var / (e * e) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadratureSpec {
    pub basis_size: usize,
    pub nodes: usize,
}

impl QuadratureSpec {
    /// Node count defaults to the exactness threshold 2G - 1 >= N (d - 1).
    pub fn new(n: usize, basis_size: usize) -> Result<Self> {
        if basis_size < n {
            return Err(QmargError::invalid(format!("basis size {basis_size} smaller than N = {n}")));
        }
        if basis_size > OrbitalSpace::MAX_ORBITALS {
            return Err(QmargError::invalid(format!("basis size {basis_size} exceeds 64")));
        }
        Ok(Self { basis_size, nodes: nodes_for_degree(n * (basis_size - 1)) })
    }

    pub fn with_nodes(self, nodes: usize) -> Self {
        Self { nodes, ..self }
    }
}

#[derive(Debug, Clone)]
pub struct Expansion {
    /// Renormalized truncated state.
    pub state: FermionState,
    /// Raw amplitudes before renormalization, in basis order.
    pub amplitudes: Vec<f64>,
    pub norm_deficit: f64,
}

/// Amplitudes <phi_{k1} ^ ... ^ phi_{kN} | Psi> over the first `basis_size`
/// Hermite functions, signed so that the lowest determinant is >= 0.
pub fn hermite_amplitudes(spec: &GroundStateSpec, quad: &QuadratureSpec) -> Result<Vec<f64>> {
    let n = spec.n;
    let d = quad.basis_size;
    let space = OrbitalSpace::new(n, d)?;
    let len = space.basis_len();
    // integrand Gaussian: exp(-|x|^2/2) from the orbitals times that of Psi
    let grid = PrincipalGrid::new(n, 1.0, 0.5 + spec.c2, quad.nodes);
    let g = grid.rule.len();
    let inner = g.pow(n as u32 - 1);
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let scale = fact.sqrt();

    let partials: Vec<Vec<f64>> = (0..g)
        .into_par_iter()
        .map(|i0| {
            let mut acc = vec![0.0; len];
            let mut x = vec![0.0; n];
            let mut phi = vec![0.0; n * d];
            for r in 0..inner {
                let w = grid.point(i0 * inner + r, &mut x);
                let a = w * scale * spec.value(&x);
                if a == 0.0 {
                    continue;
                }
                for i in 0..n {
                    hermite_functions(x[i], d - 1, &mut phi[i * d..(i + 1) * d]);
                }
                contract(0, 0, a, 0, n, d, &phi, &mut acc);
            }
            acc
        })
        .collect();
    let mut amps = vec![0.0; len];
    for part in &partials {
        for (a, p) in amps.iter_mut().zip(part) {
            *a += p;
        }
    }
    if amps[0] < 0.0 {
        amps.iter_mut().for_each(|a| *a = -*a);
    }
    Ok(amps)
}

/// acc[rank(k_1 < ... < k_N)] += prefix * prod_i phi_i[k_i], recursing over i.
#[allow(clippy::too_many_arguments)]
fn contract(level: usize, start: usize, prefix: f64, rank: usize, n: usize, d: usize, phi: &[f64], acc: &mut [f64]) {
    for k in start..=d - (n - level) {
        let p = prefix * phi[level * d + k];
        let r = rank + binomial(k, level + 1) as usize;
        if level + 1 == n {
            acc[r] += p;
        } else {
            contract(level + 1, k + 1, p, r, n, d, phi, acc);
        }
    }
}

pub fn expand_in_hermite_basis(params: HarmoniumParams, quad: &QuadratureSpec) -> Result<Expansion> {
    let spec = ground_state_spec(params);
    let amplitudes = hermite_amplitudes(&spec, quad)?;
    let norm_sqr = compensated_sum(amplitudes.iter().map(|a| a * a));
    let norm_deficit = 1.0 - norm_sqr;
    if norm_deficit > MAX_NORM_DEFICIT {
        return Err(QmargError::NormDeficit { deficit: norm_deficit });
    }
    let space = OrbitalSpace::new(params.n, quad.basis_size)?;
    let inv = norm_sqr.sqrt().recip();
    let state = FermionState::from_raw(space, amplitudes.iter().map(|&a| C64::new(a * inv, 0.0)).collect())?;
    Ok(Expansion { state, amplitudes, norm_deficit })
}

/// Natural occupations with the N largest also stored as holes 1 - lambda_i
/// evaluated to full relative precision.
#[derive(Debug, Clone, Serialize)]
pub struct SplitSpectrum {
    pub n: usize,
    /// Decreasing occupations.
    pub lambdas: Vec<f64>,
    /// 1 - lambda_i for i < N.
    pub holes: Vec<f64>,
}

fn rayleigh(a: &CMatrix, v: &[C64]) -> f64 {
    let d = v.len();
    compensated_sum((0..d).flat_map(|j| (0..d).map(move |k| (v[j].conj() * a[(j, k)] * v[k]).re)))
}

pub fn split_spectrum(state: &FermionState) -> Result<SplitSpectrum> {
    let n = state.space().n();
    let rho = one_rdm(state)?;
    let hole = one_hole_rdm(state)?;
    let eig = hermitian_eigen(rho.matrix(), crate::fock::rdm::RDM_HERMITIAN_TOL)?;
    let d = rho.d();
    let mut lambdas = Vec::with_capacity(d);
    let mut holes = Vec::with_capacity(n);
    for i in 0..d {
        let v: Vec<C64> = eig.vectors.column(i).iter().copied().collect();
        if i < n {
            let h = rayleigh(&hole, &v);
            holes.push(h);
            lambdas.push(1.0 - h);
        } else {
            lambdas.push(rayleigh(rho.matrix(), &v));
        }
    }
    Ok(SplitSpectrum { n, lambdas, holes })
}

impl SplitSpectrum {
    /// Constraint value and an absolute rounding-error estimate. The top N
    /// terms enter through their holes so no cancellation against 1 occurs.
    pub fn evaluate(&self, c: &PauliConstraint) -> Result<(f64, f64)> {
        if c.d() > self.lambdas.len() {
            return Err(QmargError::DimensionMismatch { expected: c.d(), found: self.lambdas.len() });
        }
        let mut integer = c.kappa0;
        let mut terms = Vec::with_capacity(c.d());
        for (i, &k) in c.kappas.iter().enumerate() {
            if k == 0 {
                continue;
            }
            if i < self.n {
                integer += k;
                terms.push(-(k as f64) * self.holes[i]);
            } else {
                terms.push(k as f64 * self.lambdas[i]);
            }
        }
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        let value = compensated_sum(std::iter::once(integer as f64).chain(terms));
        // rounding in the eigen-solve plus bilinear amplitude error
        let err = 64.0 * f64::EPSILON * scale + 16.0 * f64::EPSILON * scale.sqrt();
        Ok((value, err))
    }

    /// l2 distance to (1,..,1,0,..) over the full spectrum.
    pub fn hf_distance(&self) -> f64 {
        let holes = self.holes.iter().map(|h| h * h);
        let tail = self.lambdas[self.n..].iter().map(|l| l * l);
        compensated_sum(holes.chain(tail)).sqrt()
    }

    /// Weight beyond the first `keep` occupations.
    pub fn tail_weight(&self, keep: usize) -> f64 {
        compensated_sum(self.lambdas.iter().skip(keep).copied())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NonPoint {
    pub kappa: f64,
    pub lambdas: Vec<f64>,
    pub eps6: f64,
    pub norm_deficit: f64,
}

/// Occupation curves over a kappa grid, in grid order.
pub fn non_curve(kappas: &[f64], n: usize, quad: &QuadratureSpec) -> Result<Vec<NonPoint>> {
    if kappas.is_empty() {
        return Err(QmargError::invalid("empty kappa grid"));
    }
    kappas
        .par_iter()
        .map(|&kappa| {
            let exp = expand_in_hermite_basis(HarmoniumParams::new(n, kappa)?, quad)?;
            let spec = split_spectrum(&exp.state)?;
            Ok(NonPoint {
                kappa,
                eps6: spec.tail_weight(TRUNCATION),
                lambdas: spec.lambdas,
                norm_deficit: exp.norm_deficit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub kappa: f64,
    /// Borland-Dennis inequality value on the six largest occupations.
    pub d: f64,
    pub d_error: f64,
    pub hf_dist: f64,
    pub eps6: f64,
    pub norm_deficit: f64,
    pub precision_floor: bool,
    pub lambdas: Vec<f64>,
}

pub fn quasipinning_point(kappa: f64, quad: &QuadratureSpec) -> Result<ScanPoint> {
    let cat = catalog(3, TRUNCATION)?;
    let bd = cat.get("bd-ineq").expect("Borland-Dennis catalog has bd-ineq");
    let exp = expand_in_hermite_basis(HarmoniumParams::new(3, kappa)?, quad)?;
    let spec = split_spectrum(&exp.state)?;
    let (d, d_error) = spec.evaluate(bd)?;
    let hf_dist = spec.hf_distance();
    // at the Hartree-Fock point D = 0 is exact, not a resolution limit
    let resolved_away_from_hf = hf_dist >= PRECISION_FLOOR_FACTOR * d_error;
    Ok(ScanPoint {
        kappa,
        d,
        d_error,
        hf_dist,
        eps6: spec.tail_weight(TRUNCATION),
        norm_deficit: exp.norm_deficit,
        precision_floor: resolved_away_from_hf && d < PRECISION_FLOOR_FACTOR * d_error,
        lambdas: spec.lambdas,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub n: usize,
    pub basis_size: usize,
    pub nodes: usize,
    pub points: Vec<ScanPoint>,
    /// Least-squares slope of log D against log kappa.
    pub slope_d: Option<f64>,
    pub slope_hf: Option<f64>,
    pub floor_reached: bool,
}

/// D(kappa) and the Hartree-Fock distance over a grid (N = 3), with fitted
/// power laws. Points are evaluated concurrently and returned in grid order.
pub fn quasipinning_scan(kappas: &[f64], quad: &QuadratureSpec) -> Result<ScanSummary> {
    if kappas.is_empty() {
        return Err(QmargError::invalid("empty kappa grid"));
    }
    if let Some(k) = kappas.iter().find(|k| !(SCAN_KAPPA_MIN..=SCAN_KAPPA_MAX).contains(*k)) {
        return Err(QmargError::invalid(format!(
            "scan kappa {k} outside [{SCAN_KAPPA_MIN}, {SCAN_KAPPA_MAX}]"
        )));
    }
    let points: Vec<ScanPoint> =
        kappas.par_iter().map(|&k| quasipinning_point(k, quad)).collect::<Result<_>>()?;
    let slope_d = log_log_slope(points.iter().map(|p| (p.kappa, p.d)));
    let slope_hf = log_log_slope(points.iter().map(|p| (p.kappa, p.hf_dist)));
    let floor_reached = points.iter().any(|p| p.precision_floor);
    Ok(ScanSummary { n: 3, basis_size: quad.basis_size, nodes: quad.nodes, points, slope_d, slope_hf, floor_reached })
}

/// Least-squares slope of log y against log x over points with x, y > 0.
pub fn log_log_slope<I: IntoIterator<Item = (f64, f64)>>(pts: I) -> Option<f64> {
    let logs: Vec<(f64, f64)> = pts.into_iter().filter(|&(x, y)| x > 0.0 && y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if logs.len() < 2 {
        return None;
    }
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Evenly spaced grid a, ..., b with `count` points.
pub fn linear_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Lowest determinant |1, ..., N>.
pub fn hartree_fock_determinant(n: usize, d: usize) -> Result<SlaterDeterminant> {
    SlaterDeterminant::from_orbitals(&(1..=n).collect::<Vec<_>>(), d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(HarmoniumParams::new(1, 0.1).is_err());
        assert!(HarmoniumParams::new(5, 0.1).is_err());
        assert!(HarmoniumParams::new(3, -0.1).is_err());
        assert!(HarmoniumParams::new(3, f64::NAN).is_err());
    }

    #[test]
    fn exponents_closed_form() {
        let s = ground_state_spec(HarmoniumParams::new(3, 0.0).unwrap());
        assert_eq!((s.omega_rel, s.c1, s.c2), (1.0, 0.0, 0.5));
        let s = ground_state_spec(HarmoniumParams::new(3, 1.0 / 3.0).unwrap());
        let w = (5.0f64 / 3.0).sqrt();
        assert!((s.omega_rel - w).abs() < 1e-15);
        assert!((s.c2 - w / 2.0).abs() < 1e-15);
        assert!((s.c1 - (1.0 - w) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_is_an_eigenfunction() {
        for n in 2..=4 {
            for kappa in [0.0, 0.1, 1.0 / 3.0, 0.5] {
                let s = ground_state_spec(HarmoniumParams::new(n, kappa).unwrap());
                let r = eigen_residual(&s);
                assert!(r.relative_variance < 1e-18, "n={n} kappa={kappa}: {}", r.relative_variance);
                assert!((r.rayleigh_energy - s.energy).abs() < 1e-12 * s.energy);
            }
        }
    }

    #[test]
    fn wavefunction_is_antisymmetric() {
        let s = ground_state_spec(HarmoniumParams::new(3, 0.2).unwrap());
        let x = [0.3, -0.7, 1.1];
        let swapped = [-0.7, 0.3, 1.1];
        assert!((s.value(&x) + s.value(&swapped)).abs() < 1e-15);
    }

    #[test]
    fn non_interacting_limit_is_single_determinant() {
        let quad = QuadratureSpec::new(3, 10).unwrap();
        let e = expand_in_hermite_basis(HarmoniumParams::new(3, 0.0).unwrap(), &quad).unwrap();
        let a = e.state.amplitudes();
        assert!((a[0].re - 1.0).abs() < 1e-12);
        assert!(a[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.4].iter().map(|&k: &f64| (k, 3.0 * k.powi(8))).collect();
        assert!((log_log_slope(pts).unwrap() - 8.0).abs() < 1e-12);
        assert!(log_log_slope(vec![(0.1, 1.0)]).is_none());
    }

    #[test]
    fn grid_spacing() {
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linear_grid(0.2, 0.9, 1), vec![0.2]);
    }
}
