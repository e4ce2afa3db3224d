mod common;

use common::*;
use taxis_hopf::lineal::hopf_points;
use taxis_hopf::model::*;
use taxis_hopf::normalform::*;
use taxis_hopf::spectrum::eigenmode;

fn reports(p: &ModelParams, n: u32) -> Vec<NormalFormReport> {
    let ss = steady_state(p).unwrap();
    let forms = kinetic_forms(&ss, p);
    let hp = hopf_points(p, &ss, &eigenmode(n, 1, p.radius).unwrap(), 0).unwrap()[0];
    [Branch::RotatingCw, Branch::RotatingCcw, Branch::Standing]
        .iter()
        .map(|&b| analyze(p, &ss, &forms, &hp, b, &NormalFormConfig::default()).unwrap())
        .collect()
}

#[test]
fn rotating_branches_are_mirror_images() {
    for (p, n) in [(case1(), 1), (case2(), 2)] {
        let r = reports(&p, n);
        let (cw, ccw) = (&r[0].result, &r[1].result);
        assert!((cw.g21 - ccw.g21).norm() < 1e-12 * cw.g21.norm());
        assert!((cw.tau_prime0 - ccw.tau_prime0).abs() < 1e-12 * cw.tau_prime0.abs());
    }
}

#[test]
fn consistent_reading_is_supercritical() {
    for (p, n) in [(case1(), 1), (case2(), 2)] {
        for r in reports(&p, n) {
            assert!(r.result.tau_prime0 < 0.0 && r.result.supercritical, "{:?}", r.result);
            assert!(r.pairing_error < 1e-10);
            assert!(r.w20_residual < 1e-8 && r.w11_residual < 1e-8);
        }
    }
}

#[test]
fn case_one_values() {
    let r = reports(&case1(), 1);
    assert!((r[0].result.tau_prime0 + 0.02305).abs() < 5e-5);
    assert!((r[2].result.tau_prime0 + 0.05474).abs() < 5e-5);
}
