use qmarg::fock::occupations_of;
use qmarg::gpc::{catalog, evaluate, pinning_report, DEFAULT_PIN_TOL};
use qmarg::random::{complex_normal, rng_for};
use qmarg::selection::{pinned_facet_state, reconstruct_ansatz, selection_report, verify_pinning_lemma};
use qmarg::{FermionState, NonVector, OrbitalSpace, SlaterDeterminant, C64};
use rand::Rng;

fn det(o: &[usize]) -> SlaterDeterminant {
    SlaterDeterminant::from_orbitals(o, 6).unwrap()
}

/// sqrt(a)|1,2,3> + sqrt(b)|1,4,5> + sqrt(c)|2,4,6> + sqrt(e)|3,5,6> realizes
/// every Borland-Dennis spectrum: the 1-RDM is diagonal with entries
/// (a+b, a+c, a+e, b+c, b+e, c+e).
fn realizing_state(l: &[f64; 3]) -> FermionState {
    let a = (l[0] + l[1] + l[2] - 1.0) / 2.0;
    let (b, c, e) = (l[0] - a, l[1] - a, l[2] - a);
    let space = OrbitalSpace::new(3, 6).unwrap();
    let r = |x: f64| C64::new(x.max(0.0).sqrt(), 0.0);
    FermionState::from_determinants(
        space,
        &[(det(&[1, 2, 3]), r(a)), (det(&[1, 4, 5]), r(b)), (det(&[2, 4, 6]), r(c)), (det(&[3, 5, 6]), r(e))],
    )
    .unwrap()
}

#[test]
fn every_borland_dennis_spectrum_is_realized() {
    let mut rng = rng_for(404, 0);
    let mut tested = 0;
    while tested < 300 {
        let mut top: [f64; 3] = [rng.random_range(0.5..1.0), rng.random_range(0.5..1.0), rng.random_range(0.5..1.0)];
        top.sort_by(|a, b| b.total_cmp(a));
        if top[0] + top[1] - top[2] > 1.0 {
            continue;
        }
        let psi = realizing_state(&top);
        let lam = occupations_of(&psi).unwrap();
        let expect = [top[0], top[1], top[2], 1.0 - top[2], 1.0 - top[1], 1.0 - top[0]];
        for (x, y) in lam.as_slice().iter().zip(expect) {
            assert!((x - y).abs() < 1e-12, "{:?} vs {expect:?}", lam.as_slice());
        }
        tested += 1;
    }
}

#[test]
fn facet_states_satisfy_the_lemma() {
    let cat = catalog(3, 6).unwrap();
    let bd = cat.get("bd-ineq").unwrap();
    let mut rng = rng_for(99, 0);
    let mut tested = 0;
    while tested < 200 {
        let (x, y, z) = (complex_normal(&mut rng), complex_normal(&mut rng), complex_normal(&mut rng));
        let mut c = [x, y, z];
        c.sort_by(|p, q| q.norm().total_cmp(&p.norm()));
        let Ok(psi) = pinned_facet_state(c[0], c[1], c[2]) else { continue };
        let r = verify_pinning_lemma(&psi, bd, DEFAULT_PIN_TOL).unwrap();
        assert!(r.constraint_value.abs() < 1e-10);
        assert!(r.residual < 1e-10);
        tested += 1;
    }
}

#[test]
fn unpinned_state_has_nonzero_residual() {
    let space = OrbitalSpace::new(3, 6).unwrap();
    let psi = qmarg::random::random_state(space, &mut rng_for(3, 3));
    let cat = catalog(3, 6).unwrap();
    let r = verify_pinning_lemma(&psi, cat.get("bd-ineq").unwrap(), DEFAULT_PIN_TOL).unwrap();
    assert!(r.constraint_value > 1e-6);
    assert!(r.residual > 1e-6);
    assert_eq!(r.consistent, None);
}

#[test]
fn ansatz_from_pinned_report() {
    let cat = catalog(3, 6).unwrap();
    let lam = NonVector::new(vec![0.9, 0.7, 0.6, 0.4, 0.3, 0.1]).unwrap();
    let report = pinning_report(&lam, &cat, DEFAULT_PIN_TOL).unwrap();
    let ansatz = reconstruct_ansatz(&report, &cat).unwrap();
    let expect = vec![det(&[1, 2, 3]), det(&[1, 4, 5]), det(&[2, 4, 6])];
    assert_eq!(ansatz, expect);
    assert!(evaluate(cat.get("bd-ineq").unwrap(), lam.as_slice()).unwrap().abs() < 1e-15);
}

#[test]
fn quasipinned_state_reports_small_leakage() {
    let cat = catalog(3, 6).unwrap();
    let eps = 1e-3;
    let space = OrbitalSpace::new(3, 6).unwrap();
    let r = |x: f64| C64::new(x.sqrt(), 0.0);
    let psi = FermionState::from_determinants(
        space,
        &[
            (det(&[1, 2, 3]), r(0.6 - eps)),
            (det(&[1, 4, 5]), r(0.3)),
            (det(&[2, 4, 6]), r(0.1)),
            (det(&[3, 5, 6]), r(eps)),
        ],
    )
    .unwrap();
    let labels: Vec<String> = ["bd-eq1", "bd-eq2", "bd-eq3", "bd-ineq"].iter().map(|s| s.to_string()).collect();
    let report = selection_report(&cat, &labels, Some(&psi), DEFAULT_PIN_TOL).unwrap();
    let w = report.out_of_support_weight.unwrap();
    assert!((w - eps).abs() < 1e-12, "{w}");
}
