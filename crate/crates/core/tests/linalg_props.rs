use khessian_lab::linalg::{
    eigenvalues_default, elementary_symmetric, elementary_symmetric_all, k_trace, k_trace_minors, Spectrum, SymMatrix,
};
use khessian_lab::Error;
use proptest::prelude::*;

fn sym(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-1.0..=1.0_f64, n * (n + 1) / 2).prop_map(move |u| SymMatrix::from_upper(n, u).unwrap())
}

fn any_sym() -> impl Strategy<Value = SymMatrix> {
    (1usize..=6).prop_flat_map(sym)
}

// e_k as a sum over all k-subsets
fn subset_oracle(v: &[f64], k: usize) -> f64 {
    let n = v.len();
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| v[i]).product::<f64>())
        .sum()
}

// product of Givens rotations with the given angles over all (i, j) pairs
fn givens(n: usize, angles: &[f64]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut a = angles.iter().cycle();
    for i in 0..n {
        for j in i + 1..n {
            let t = *a.next().unwrap();
            let (s, c) = t.sin_cos();
            for row in q.iter_mut() {
                let (x, y) = (row[i], row[j]);
                row[i] = c * x - s * y;
                row[j] = s * x + c * y;
            }
        }
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn k_trace_matches_spectrum(m in any_sym()) {
        let spec = eigenvalues_default(&m).unwrap();
        for k in 1..=m.dim() {
            let t = k_trace(&m, k).unwrap();
            let e = elementary_symmetric(&spec, k).unwrap();
            prop_assert!((t - e).abs() <= 1e-9 * (1.0 + t.abs()));
            let minors = k_trace_minors(&m, k).unwrap();
            prop_assert!((t - minors).abs() <= 1e-9 * (1.0 + minors.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rotation_preserves_spectrum(
        m in any_sym(),
        angles in prop::collection::vec(-std::f64::consts::PI..std::f64::consts::PI, 15),
    ) {
        let q = givens(m.dim(), &angles);
        let a = eigenvalues_default(&m).unwrap();
        let b = eigenvalues_default(&m.congruence(&q).unwrap()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-9, "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn elementary_symmetric_matches_subsets(v in prop::collection::vec(-2.0..=2.0_f64, 1..=8)) {
        let e = elementary_symmetric_all(&v, v.len());
        prop_assert_eq!(e[0], 1.0);
        for k in 1..=v.len() {
            let o = subset_oracle(&v, k);
            // absolute floor: cancellation in the subset sum itself
            let scale: f64 = subset_oracle(&v.iter().map(|x| x.abs()).collect::<Vec<_>>(), k);
            prop_assert!((e[k] - o).abs() <= 1e-12 * o.abs().max(scale), "k={} {} vs {}", k, e[k], o);
        }
    }

    #[test]
    fn trace_and_determinant(m in any_sym()) {
        let spec = eigenvalues_default(&m).unwrap();
        let n = m.dim();
        let sum: f64 = spec.values().iter().sum();
        let prod: f64 = spec.values().iter().product();
        prop_assert!((sum - m.trace()).abs() <= 1e-9 * (1.0 + m.trace().abs()));
        let det = k_trace(&m, n).unwrap();
        prop_assert!((prod - det).abs() <= 1e-9 * (1.0 + det.abs()));
    }

    #[test]
    fn spectrum_is_sorted(m in any_sym()) {
        let v = eigenvalues_default(&m).unwrap();
        prop_assert!(v.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn scaling_spectrum(m in any_sym(), s in 0.1..10.0_f64) {
        let a = eigenvalues_default(&m).unwrap().scaled(s).unwrap();
        let b = eigenvalues_default(&m.scaled(s)).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-9 * s);
        }
    }
}

#[test]
fn diagonal_is_its_own_spectrum() {
    let m = SymMatrix::diagonal(&[3.0, -1.0, 2.0]).unwrap();
    assert_eq!(eigenvalues_default(&m).unwrap().values(), &[3.0, 2.0, -1.0]);
}

#[test]
fn known_k_traces() {
    // [[2,1],[1,2]]: S_1 = 4, S_2 = 3
    let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    assert!((k_trace(&m, 1).unwrap() - 4.0).abs() < 1e-12);
    assert!((k_trace(&m, 2).unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(k_trace(&m, 3), Err(Error::KOutOfRange { k: 3, n: 2 }));
}

#[test]
fn rejects_bad_input() {
    assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).is_err());
    assert!(SymMatrix::zeros(17).is_err());
    assert!(Spectrum::new(vec![1.0, f64::NAN]).is_err());
    assert!(k_trace_minors(&SymMatrix::identity(9).unwrap(), 2).is_err());
}

#[test]
fn serde_round_trip() {
    let m = SymMatrix::from_rows(&[vec![1.0, 0.1], vec![0.1, -2.5]]).unwrap();
    let s = serde_json::to_string(&m).unwrap();
    assert_eq!(serde_json::from_str::<SymMatrix>(&s).unwrap(), m);
    assert!(serde_json::from_str::<SymMatrix>("[[1.0, 2.0], [0.0, 1.0]]").is_err());
}
