use khessian_lab::grid::{sample, FunctionSpec, GridFunction};
use khessian_lab::khessian::RadialSpectrumFormula;
use khessian_lab::linalg::SymMatrix;
use khessian_lab::measures::{
    decomposition_report, default_schedule, density_probe, hessian_measure_ball, union_mass, unit_ball_volume, EpsRule,
    ProbeOutcome,
};
use khessian_lab::Error;
use proptest::prelude::*;

fn square(m: usize, spec: &FunctionSpec) -> GridFunction {
    sample(spec, &[-1.0; 2], 2.0 / (m - 1) as f64, &[m, m]).unwrap()
}

fn psd2() -> impl Strategy<Value = SymMatrix> {
    (prop::collection::vec(-1.0..=1.0_f64, 4), 0.0..0.5_f64).prop_map(|(a, s)| {
        SymMatrix::from_upper(2, vec![a[0] * a[0] + a[1] * a[1] + s, a[0] * a[2] + a[1] * a[3], a[2] * a[2] + a[3] * a[3] + s])
            .unwrap()
    })
}

const H: f64 = 1.0 / 32.0;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn masses_nonnegative_and_monotone(q in psd2(), beta in 1.0..2.5_f64, cx in -0.3..0.3_f64, cy in -0.3..0.3_f64) {
        let u = square(65, &FunctionSpec::Sum { terms: vec![
            FunctionSpec::quadratic(&q, &[0.0; 2], 0.0),
            FunctionSpec::radial(1.0, beta),
        ]});
        let radii = [0.1, 0.2, 0.3, 0.4];
        let est = hessian_measure_ball(&u, 2, &[cx, cy], &radii, &[4.0 * H, 6.0 * H]).unwrap();
        for row in &est.masses {
            for m in row {
                prop_assert!(*m >= -1e-12);
            }
            for w in row.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12 * w[1].abs());
            }
        }
    }

    #[test]
    fn union_of_disjoint_balls_is_additive(q in psd2(), beta in 1.0..2.0_f64) {
        let u = square(65, &FunctionSpec::Sum { terms: vec![
            FunctionSpec::quadratic(&q, &[0.0; 2], 0.0),
            FunctionSpec::radial(1.0, beta),
        ]});
        let eps = 4.0 * H;
        let balls = vec![(vec![-0.3, 0.0], 0.2), (vec![0.3, 0.1], 0.25), (vec![0.0, -0.45], 0.1)];
        let total = union_mass(&u, 2, eps, &balls).unwrap();
        let parts: f64 = balls
            .iter()
            .map(|(c, r)| hessian_measure_ball(&u, 2, c, &[*r], &[eps]).unwrap().masses[0][0])
            .sum();
        prop_assert!((total - parts).abs() <= 1e-10 * (1.0 + parts.abs()), "{} vs {}", total, parts);
    }
}

#[test]
fn quadratic_ball_mass_is_det_times_volume() {
    let q = SymMatrix::diagonal(&[1.0, 3.0]).unwrap();
    let u = square(129, &FunctionSpec::quadratic(&q, &[0.5, -1.0], 2.0));
    let est = hessian_measure_ball(&u, 2, &[0.1, 0.0], &[0.5], &[4.0 / 64.0]).unwrap();
    // lattice points in the closed ball times the cell area
    let count = u.ball_indices(&[0.1, 0.0], 0.5).len() as f64;
    let want = 3.0 * count * u.cell_volume();
    assert!((est.masses[0][0] - want).abs() <= 1e-9 * want);
    assert!((want - 3.0 * std::f64::consts::PI * 0.25).abs() < 0.02 * want);
}

#[test]
fn weak_continuity_in_beta() {
    let c = [0.0, 0.0];
    let eps = [4.0 * H];
    let mass = |beta: f64| hessian_measure_ball(&square(65, &FunctionSpec::radial(1.0, beta)), 2, &c, &[0.4], &eps).unwrap().masses[0][0];
    let base = mass(1.5);
    let mut prev = f64::INFINITY;
    for m in 1..=6 {
        let d = 2f64.powi(-m);
        let gap = (mass(1.5 + d) - base).abs().max((mass(1.5 - d) - base).abs());
        assert!(gap < prev, "gap {gap} did not shrink at m={m}");
        prev = gap;
    }
    assert!(prev <= 0.02 * base);
}

#[test]
fn fatou_direction_on_smooth_ball() {
    let u = square(129, &FunctionSpec::radial(1.0, 1.5));
    let f = RadialSpectrumFormula::new(2, 1.0, 1.5).unwrap();
    let (c, r) = ([0.5, 0.0], 0.2);
    let direct: f64 = u
        .ball_indices(&c, r)
        .iter()
        .map(|&i| {
            let x = u.point(&u.unflat(i));
            f.s_j(2, x[0].hypot(x[1])).unwrap()
        })
        .sum::<f64>()
        * u.cell_volume();
    let est = hessian_measure_ball(&u, 2, &c, &[r], &[8.0 / 64.0, 4.0 / 64.0]).unwrap();
    let finest = *est.masses.last().unwrap().first().unwrap();
    assert!(finest >= 0.95 * direct, "{finest} vs {direct}");
}

#[test]
fn density_of_quadratic_is_det() {
    let q = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let u = square(257, &FunctionSpec::quadratic(&q, &[0.0; 2], 0.0));
    let rule = EpsRule::default();
    let p = [0.1, 0.2];
    let d = density_probe(&u, 2, &p, &default_schedule(&u, &p, rule), rule).unwrap();
    assert!((d.f_k_value - 1.75).abs() < 1e-9);
    assert!(d.relative_gap <= 0.05 && !d.singular_flag, "{d:?}");
}

#[test]
fn decomposition_flags_the_origin_of_abs_x() {
    let u = square(257, &FunctionSpec::radial(1.0, 1.0));
    let rule = EpsRule::default();
    let rep = decomposition_report(&u, 2, &[vec![0.0, 0.0], vec![0.5, 0.0]], None, rule).unwrap();
    assert!(matches!(rep.probes[0], ProbeOutcome::Singular(_)), "{:?}", rep.probes[0]);
    assert_eq!(rep.singular, 1);
    assert_eq!(rep.regular + rep.inconclusive, 1);
}

#[test]
fn ball_volumes() {
    assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
    assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-15);
    assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
}

#[test]
fn errors() {
    let concave = square(65, &FunctionSpec::radial(-1.0, 2.0));
    assert!(matches!(hessian_measure_ball(&concave, 1, &[0.0, 0.0], &[0.2], &[4.0 * H]), Err(Error::NotKConvex(_))));
    let u = square(65, &FunctionSpec::radial(1.0, 2.0));
    assert!(matches!(hessian_measure_ball(&u, 2, &[0.8, 0.0], &[0.2], &[4.0 * H]), Err(Error::BallOutOfDomain { .. })));
    assert!(matches!(hessian_measure_ball(&u, 2, &[0.0, 0.0], &[0.2], &[H]), Err(Error::EpsilonTooSmall { .. })));
    assert_eq!(hessian_measure_ball(&u, 2, &[0.0, 0.0], &[-0.2], &[4.0 * H]).unwrap_err(), Error::NonpositiveRadius(-0.2));
    assert!(matches!(
        density_probe(&u, 2, &[0.0, 0.0], &[0.2], EpsRule::default()),
        Err(Error::InvalidSpec(_))
    ));
}
