use nalgebra::{DMatrix, SymmetricEigen};
use qmarg::gpc::catalog;
use qmarg::harmonium::{
    expand_in_hermite_basis, ground_state_spec, hermite_amplitudes, non_curve, quasipinning_point, split_spectrum,
    HarmoniumParams, QuadratureSpec,
};
use qmarg::{OrbitalSpace, SlaterDeterminant};

/// Gauss-Hermite nodes from the Jacobi matrix and scaled weights
/// w e^{z^2} = 1 / (G psi_{G-1}(z)^2).
fn oracle_rule(g: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::from_fn(g, g, |a, b| if a.abs_diff(b) == 1 { (a.max(b) as f64 / 2.0).sqrt() } else { 0.0 });
    let mut z: Vec<f64> = SymmetricEigen::new(j).eigenvalues.iter().copied().collect();
    z.sort_by(f64::total_cmp);
    let w = z
        .iter()
        .map(|&x| {
            let mut p0 = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
            let mut p1 = std::f64::consts::SQRT_2 * x * p0;
            if g == 1 {
                return 1.0 / p0.powi(2);
            }
            for k in 1..g - 1 {
                let kf = k as f64;
                let p2 = (2.0 / (kf + 1.0)).sqrt() * x * p1 - (kf / (kf + 1.0)).sqrt() * p0;
                p0 = p1;
                p1 = p2;
            }
            1.0 / (g as f64 * p1 * p1)
        })
        .collect();
    (z, w)
}

/// rho_1(x, y) up to normalization for three particles, by completing the
/// square in the centre-of-mass coordinate of the two traced particles.
fn kernel(x: f64, y: f64, c1: f64, c2: f64, inner: &(Vec<f64>, Vec<f64>)) -> f64 {
    let vdm = |a: f64, b: f64, c: f64| (a - b) * (a - c) * (b - c);
    let alpha = 2.0 * c2 + 4.0 * c1;
    let beta = 2.0 * c2;
    let t0 = -std::f64::consts::SQRT_2 * c1 * (x + y) / alpha;
    let (z, w) = inner;
    let mut acc = 0.0;
    for (za, wa) in z.iter().zip(w) {
        for (zb, wb) in z.iter().zip(w) {
            let t = t0 + za / alpha.sqrt();
            let r = zb / beta.sqrt();
            let u = (t + r) / std::f64::consts::SQRT_2;
            let v = (t - r) / std::f64::consts::SQRT_2;
            let weight = wa * (-za * za).exp() * wb * (-zb * zb).exp();
            acc += weight * vdm(x, u, v) * vdm(y, u, v);
        }
    }
    let prefactor = (-(c2 + c1) * (x * x + y * y) + alpha * t0 * t0).exp() / (alpha * beta).sqrt();
    prefactor * acc
}

#[test]
fn occupations_match_direct_kernel_diagonalization() {
    let kappa = 0.2;
    let w = (1.0f64 + 2.0 * kappa).sqrt();
    let (c1, c2) = ((1.0 - w) / 6.0, w / 2.0);
    let inner = oracle_rule(8);
    let (z, sw) = oracle_rule(90);
    let g = z.len();
    let mut m = DMatrix::<f64>::zeros(g, g);
    for a in 0..g {
        for b in a..g {
            let val = (sw[a] * sw[b]).sqrt() * kernel(z[a], z[b], c1, c2, &inner);
            m[(a, b)] = val;
            m[(b, a)] = val;
        }
    }
    let trace: f64 = (0..g).map(|a| m[(a, a)]).sum();
    m *= 3.0 / trace;
    let mut oracle: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    oracle.sort_by(|a, b| b.total_cmp(a));

    let quad = QuadratureSpec::new(3, 28).unwrap();
    let exp = expand_in_hermite_basis(HarmoniumParams::new(3, kappa).unwrap(), &quad).unwrap();
    let lambdas = split_spectrum(&exp.state).unwrap().lambdas;
    for i in 0..6 {
        assert!((lambdas[i] - oracle[i]).abs() < 1e-8, "lambda_{}: {} vs {}", i + 1, lambdas[i], oracle[i]);
    }
}

#[test]
fn amplitudes_obey_parity_selection() {
    let quad = QuadratureSpec::new(3, 16).unwrap();
    let spec = ground_state_spec(HarmoniumParams::new(3, 0.3).unwrap());
    let amps = hermite_amplitudes(&spec, &quad).unwrap();
    let space = OrbitalSpace::new(3, 16).unwrap();
    for (det, a) in qmarg::fock::enumerate_slaters(space).unwrap().iter().zip(&amps) {
        let quanta: usize = det.orbitals().iter().map(|k| k - 1).sum();
        if quanta % 2 != 1 {
            assert!(a.abs() < 1e-12, "{det}: {a}");
        }
    }
}

#[test]
fn two_particle_occupations_are_paired() {
    let quad = QuadratureSpec::new(2, 20).unwrap();
    for point in non_curve(&[0.05, 0.2, 0.5], 2, &quad).unwrap() {
        let l = &point.lambdas;
        for pair in l[..10].chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-9, "kappa {}: {:?}", point.kappa, pair);
        }
    }
}

#[test]
fn weak_coupling_truncation_is_small() {
    let quad = QuadratureSpec::new(3, 28).unwrap();
    let curve = non_curve(&[0.1], 3, &quad).unwrap();
    let p = &curve[0];
    assert!(p.norm_deficit < 1e-8);
    assert!(p.eps6 < 1e-6);
    let beyond_seven: f64 = p.lambdas[7..].iter().sum();
    assert!(beyond_seven < 1e-5);
}

#[test]
fn borland_dennis_equalities_hold_up_to_truncation() {
    let quad = QuadratureSpec::new(3, 24).unwrap();
    let cat = catalog(3, 6).unwrap();
    for kappa in [0.05, 0.15, 0.3, 0.5] {
        let exp = expand_in_hermite_basis(HarmoniumParams::new(3, kappa).unwrap(), &quad).unwrap();
        let s = split_spectrum(&exp.state).unwrap();
        let eps6 = s.tail_weight(6);
        for label in ["bd-eq1", "bd-eq2", "bd-eq3"] {
            let (v, _) = s.evaluate(cat.get(label).unwrap()).unwrap();
            assert!(v.abs() <= eps6 + 1e-9, "{label} at {kappa}: {v}");
        }
    }
}

#[test]
fn leading_occupation_decreases_with_coupling() {
    let quad = QuadratureSpec::new(3, 20).unwrap();
    let curve = non_curve(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5], 3, &quad).unwrap();
    for w in curve.windows(2) {
        assert!(w[1].lambdas[0] < w[0].lambdas[0] + 1e-15);
    }
}

#[test]
fn non_interacting_point_is_hartree_fock() {
    let quad = QuadratureSpec::new(3, 12).unwrap();
    let p = quasipinning_point(0.0, &quad).unwrap();
    assert!(p.d.abs() < 1e-15 && p.hf_dist < 1e-12);
    assert!(!p.precision_floor);
    let exp = expand_in_hermite_basis(HarmoniumParams::new(3, 0.0).unwrap(), &quad).unwrap();
    let hf = SlaterDeterminant::from_orbitals(&[1, 2, 3], 12).unwrap();
    assert!(exp.state.amplitude(hf).norm_sqr() > 1.0 - 1e-12);
}

#[test]
fn four_particles_supported() {
    let quad = QuadratureSpec::new(4, 10).unwrap();
    let curve = non_curve(&[0.1], 4, &quad).unwrap();
    let sum: f64 = curve[0].lambdas.iter().sum();
    assert!((sum - 4.0).abs() < 1e-10);
    assert!(curve[0].lambdas[3] > 0.99);
}

#[test]
fn scan_rejects_out_of_range_kappa() {
    let quad = QuadratureSpec::new(3, 12).unwrap();
    assert!(qmarg::harmonium::quasipinning_scan(&[0.6], &quad).is_err());
    assert!(qmarg::harmonium::quasipinning_scan(&[], &quad).is_err());
    assert!(QuadratureSpec::new(3, 2).is_err());
}
