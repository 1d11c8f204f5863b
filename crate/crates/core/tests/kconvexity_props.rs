use khessian_lab::cones::{gamma_k_margin, ConeSpec};
use khessian_lab::grid::{mollify, sample, FunctionSpec, GridFunction};
use khessian_lab::kconvexity::{
    combine, spectral_test, viscosity_test, weak_integral_test, ConvexityReport, Location, Method, Verdict, DEFAULT_TOL,
};
use khessian_lab::linalg::{eigenvalues_default, SymMatrix};
use khessian_lab::Error;
use proptest::prelude::*;

const CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [0.4, 0.0], [0.0, -0.4]];

fn centers() -> Vec<Vec<f64>> {
    CENTERS.iter().map(|c| c.to_vec()).collect()
}

fn square(m: usize, spec: &FunctionSpec) -> GridFunction {
    sample(spec, &[-1.0; 2], 2.0 / (m - 1) as f64, &[m, m]).unwrap()
}

fn quad(q: &SymMatrix) -> GridFunction {
    square(65, &FunctionSpec::quadratic(q, &[0.0; 2], 0.0))
}

fn sym2() -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-1.0..=1.0_f64, 3).prop_map(|u| SymMatrix::from_upper(2, u).unwrap())
}

fn psd2() -> impl Strategy<Value = SymMatrix> {
    (prop::collection::vec(-1.0..=1.0_f64, 4), 0.01..1.0_f64).prop_map(|(a, s)| {
        // A A^T + s I
        let m = SymMatrix::from_upper(2, vec![a[0] * a[0] + a[1] * a[1] + s, a[0] * a[2] + a[1] * a[3], a[2] * a[2] + a[3] * a[3] + s]);
        m.unwrap()
    })
}

fn mollified_radial(beta: f64) -> GridFunction {
    mollify(&square(65, &FunctionSpec::radial(1.0, beta)), 4.0 / 32.0).unwrap()
}

fn all_three(u: &GridFunction, k: usize) -> [ConvexityReport; 3] {
    [
        spectral_test(u, k, DEFAULT_TOL).unwrap(),
        weak_integral_test(u, k, &centers(), 0.2, DEFAULT_TOL, 3).unwrap(),
        viscosity_test(u, k, 100, 3, DEFAULT_TOL).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn spectral_on_quadratics_is_cone_membership(q in sym2()) {
        let u = quad(&q);
        let lam = eigenvalues_default(&q).unwrap();
        for k in 1..=2 {
            let rep = spectral_test(&u, k, DEFAULT_TOL).unwrap();
            let margin = gamma_k_margin(lam.values(), k);
            // well away from the boundary the verdict is the membership
            if margin.abs() > 1e-6 {
                prop_assert_eq!(rep.verdict == Verdict::Pass, margin > 0.0, "k={} λ={:?}", k, lam);
            }
        }
    }

    #[test]
    fn monotone_in_k(q in prop::collection::vec(-1.0..=1.0_f64, 6), w in 0.0..3.0_f64) {
        let qm = SymMatrix::from_upper(3, q).unwrap();
        let u = GridFunction::centered_cube(3, 1.0, 9, |x| 0.5 * qm.quad_form(x) + w * (x[0] * x[1]).sin()).unwrap();
        let v: Vec<Verdict> = (1..=3).map(|k| spectral_test(&u, k, DEFAULT_TOL).unwrap().verdict).collect();
        for k in 1..3 {
            if v[k] == Verdict::Pass {
                prop_assert_eq!(v[k - 1], Verdict::Pass);
            }
        }
    }

    #[test]
    fn sum_with_convex_quadratic_stays_k_convex(q in psd2(), beta in 1.0..2.0_f64) {
        let u = mollified_radial(beta);
        let v = u.map(|x, val| val + 0.5 * q.quad_form(x)).unwrap();
        prop_assert_eq!(spectral_test(&u, 2, DEFAULT_TOL).unwrap().verdict, Verdict::Pass);
        prop_assert_eq!(spectral_test(&v, 2, DEFAULT_TOL).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn verdicts_ignore_affine(b0 in -3.0..3.0_f64, b1 in -3.0..3.0_f64, c in -3.0..3.0_f64, beta in 0.6..1.6_f64) {
        let u = mollified_radial(beta);
        let v = u.plus_affine(&[b0, b1], c).unwrap();
        let a = all_three(&u, 2);
        let b = all_three(&v, 2);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.verdict, y.verdict, "{:?}", x.method);
        }
        prop_assert!((a[1].worst_margin - b[1].worst_margin).abs() <= 1e-10);
    }

    #[test]
    fn spectral_pass_implies_weak_pass(q in psd2(), seed in 0u64..100) {
        let u = quad(&q);
        prop_assert_eq!(spectral_test(&u, 2, DEFAULT_TOL).unwrap().verdict, Verdict::Pass);
        let w = weak_integral_test(&u, 2, &centers(), 0.2, DEFAULT_TOL, seed).unwrap();
        prop_assert_eq!(w.verdict, Verdict::Pass, "{:?}", w.worst_margin);
        prop_assert!(w.evidence_only);
    }

    #[test]
    fn viscosity_fail_implies_spectral_fail(q in sym2(), seed in 0u64..100) {
        let u = quad(&q);
        let v = viscosity_test(&u, 2, 50, seed, DEFAULT_TOL).unwrap();
        if v.verdict == Verdict::Fail {
            prop_assert_eq!(spectral_test(&u, 2, DEFAULT_TOL).unwrap().verdict, Verdict::Fail);
            let Some(Location::Quadratic(t)) = &v.worst_location else { panic!("fail without a touching quadratic") };
            prop_assert!(t.s_values.iter().any(|s| *s < 0.0));
        }
    }
}

#[test]
fn method_consistency_over_beta_sweep() {
    for beta in [0.5, 0.8, 1.0, 1.3, 1.8] {
        let [s, w, v] = all_three(&mollified_radial(beta), 2);
        if s.verdict == Verdict::Pass {
            assert_eq!(w.verdict, Verdict::Pass, "β={beta}");
        }
        if v.verdict == Verdict::Fail {
            assert_eq!(s.verdict, Verdict::Fail, "β={beta}");
        }
    }
}

#[test]
fn abs_x_passes_weak_test() {
    let u = mollified_radial(1.0);
    let w = weak_integral_test(&u, 2, &centers(), 0.2, DEFAULT_TOL, 1).unwrap();
    assert_eq!(w.verdict, Verdict::Pass, "{}", w.worst_margin);
    assert_eq!(w.method, Method::WeakIntegral);
}

#[test]
fn concave_function_fails_with_location() {
    let u = square(65, &FunctionSpec::radial(-1.0, 2.0));
    let [s, w, v] = all_three(&u, 1);
    assert_eq!(combine(&[&s, &w, &v]), Verdict::Fail);
    assert!(matches!(s.worst_location, Some(Location::Lattice { .. })));
    assert!(matches!(w.worst_location, Some(Location::TestFunction { .. })));
    assert!(matches!(v.worst_location, Some(Location::Quadratic(_))));
    assert!(!s.evidence_only && !w.evidence_only);
}

#[test]
fn intermediate_sign_pattern_is_reported() {
    // λ = (3, 1, -0.5): S_1, S_2 > 0, S_3 < 0
    let q = SymMatrix::diagonal(&[3.0, 1.0, -0.5]).unwrap();
    let u = sample(&FunctionSpec::quadratic(&q, &[0.0; 3], 0.0), &[-1.0; 3], 0.25, &[9; 3]).unwrap();
    let r2 = spectral_test(&u, 2, DEFAULT_TOL).unwrap();
    let r3 = spectral_test(&u, 3, DEFAULT_TOL).unwrap();
    assert_eq!(r2.verdict, Verdict::Pass);
    assert_eq!(r3.verdict, Verdict::Fail);
    // λ = (1, -0.9, -0.9): S_3 > 0 but S_1 < 0, so k-only disagrees
    let q = SymMatrix::diagonal(&[1.0, -0.9, -0.9]).unwrap();
    let u = sample(&FunctionSpec::quadratic(&q, &[0.0; 3], 0.0), &[-1.0; 3], 0.25, &[9; 3]).unwrap();
    let r3 = spectral_test(&u, 3, DEFAULT_TOL).unwrap();
    assert_eq!(r3.verdict, Verdict::Fail);
    assert_eq!(r3.k_only_verdict, Verdict::Pass);
    assert!(r3.k_only_differs());
    assert!(ConeSpec::new(3, 3).is_ok());
}

#[test]
fn reproducible_with_seed() {
    let u = mollified_radial(0.8);
    assert_eq!(
        weak_integral_test(&u, 2, &centers(), 0.2, DEFAULT_TOL, 5).unwrap(),
        weak_integral_test(&u, 2, &centers(), 0.2, DEFAULT_TOL, 5).unwrap()
    );
    assert_eq!(viscosity_test(&u, 2, 64, 5, DEFAULT_TOL).unwrap(), viscosity_test(&u, 2, 64, 5, DEFAULT_TOL).unwrap());
}

#[test]
fn errors() {
    let u = quad(&SymMatrix::identity(2).unwrap());
    assert_eq!(spectral_test(&u, 3, DEFAULT_TOL).unwrap_err(), Error::KOutOfRange { k: 3, n: 2 });
    assert!(matches!(weak_integral_test(&u, 2, &[vec![0.9, 0.0]], 0.3, DEFAULT_TOL, 1), Err(Error::PhiOutOfDomain(_))));
    assert_eq!(weak_integral_test(&u, 2, &centers(), 0.0, DEFAULT_TOL, 1).unwrap_err(), Error::NonpositiveRadius(0.0));
    assert_eq!(viscosity_test(&u, 2, 0, 1, DEFAULT_TOL).unwrap_err(), Error::BudgetZero);
    let coarse = square(33, &FunctionSpec::radial(1.0, 2.0));
    assert!(matches!(weak_integral_test(&coarse, 2, &centers(), 0.2, DEFAULT_TOL, 1), Err(Error::PhiUnderResolved { .. })));
}
