//! Gårding cones `Γ_k` and their duals `Γ_k*`.
//!
//! `Γ_k = {λ : S_j(λ) >= 0, j = 1..k}`. The dual `Γ_k*` has closed forms for
//! k = 1 (the ray through (1,…,1)), k = 2 (a circular cone inside the
//! positive orthant) and k = n (the orthant itself); other k go through a
//! sampled minimisation of `<λ, μ>` over unit `μ ∈ Γ_k`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{elementary_symmetric_all, Spectrum, SymMatrix};
use crate::rng;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_BUDGET: usize = 4096;
/// Coordinate-descent step at which the numeric dual search stops halving.
pub const MIN_DESCENT_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSpec {
    n: usize,
    k: usize,
}

impl ConeSpec {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Outcome of a membership test.
///
/// `margin` is the minimal `S_j` for `Γ_k` and the minimal inner product
/// found for `Γ_k*`. A margin inside `[-tol, 0)` still reports `member`; the
/// negative sign marks the point as lying on the boundary from outside.
///
/// `certified` is false when the verdict is evidence only: a numeric dual
/// test that found no violating direction. A numeric `member == false`
/// always carries a `witness` with `<λ, witness> = margin < -tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub member: bool,
    pub margin: f64,
    pub witness: Option<Vec<f64>>,
    pub certified: bool,
}

impl ConeVerdict {
    fn exact(margin: f64, tol: f64) -> Self {
        Self { member: margin >= -tol, margin, witness: None, certified: true }
    }

    pub fn on_boundary(&self, tol: f64) -> bool {
        self.margin.abs() <= tol
    }
}

fn check_spectrum(lambda: &Spectrum, cone: ConeSpec) -> Result<()> {
    if lambda.dim() != cone.n {
        return Err(Error::DimensionMismatch { expected: cone.n, got: lambda.dim() });
    }
    Ok(())
}

/// Minimal `S_j`, `1 <= j <= k`, of a raw vector.
pub fn gamma_k_margin(values: &[f64], k: usize) -> f64 {
    elementary_symmetric_all(values, k)[1..].iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn in_gamma_k(lambda: &Spectrum, cone: ConeSpec, tol: f64) -> Result<ConeVerdict> {
    check_spectrum(lambda, cone)?;
    Ok(ConeVerdict::exact(gamma_k_margin(lambda.values(), cone.k), tol))
}

/// Closed-form dual membership for k ∈ {1, 2, n}.
pub fn in_gamma_star_exact(lambda: &Spectrum, cone: ConeSpec, tol: f64) -> Result<ConeVerdict> {
    check_spectrum(lambda, cone)?;
    let v = lambda.values();
    let n = cone.n as f64;
    let sum: f64 = v.iter().sum();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let margin = match cone.k {
        1 => {
            let mean = sum / n;
            let dev = v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
            mean.min(-dev)
        }
        2 => {
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            let quad = if cone.n == 1 { f64::INFINITY } else { sum * sum / (n - 1.0) - norm2 };
            min.min(quad)
        }
        k if k == cone.n => min,
        k => return Err(Error::UnsupportedK { k, n: cone.n }),
    };
    Ok(ConeVerdict::exact(margin, tol))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn in_cone(mu: &[f64], k: usize) -> bool {
    gamma_k_margin(mu, k) >= 0.0
}

/// Pulls `p` back into `Γ_k` along the segment towards the cone axis point of
/// the same norm; the axis lies in the interior of every `Γ_k`.
fn retract(p: &[f64], k: usize) -> Vec<f64> {
    if in_cone(p, k) {
        return p.to_vec();
    }
    let n = p.len();
    let a = norm(p) / (n as f64).sqrt();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let at = |s: f64| p.iter().map(|x| a + s * (x - a)).collect::<Vec<_>>();
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if in_cone(&at(mid), k) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

/// Sampled dual membership: minimises `<λ, μ>` over unit `μ ∈ Γ_k`.
///
/// The minimiser starts from the best of the axis, the coordinate vectors and
/// `budget` random unit directions that land in `Γ_k`, then runs projected
/// descent (gradient and coordinate moves, retracted into the cone) with step
/// halving down to [`MIN_DESCENT_STEP`].
pub fn in_gamma_star_numeric(
    lambda: &Spectrum,
    cone: ConeSpec,
    budget: usize,
    tol: f64,
    seed: u64,
) -> Result<ConeVerdict> {
    check_spectrum(lambda, cone)?;
    if budget == 0 {
        return Err(Error::BudgetZero);
    }
    let n = cone.n;
    let k = cone.k;
    let lam = lambda.values();
    let objective = |mu: &[f64]| dot(lam, mu) / norm(mu);

    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    candidates.push(vec![1.0 / (n as f64).sqrt(); n]);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        candidates.push(e);
    }
    let mut best = candidates
        .into_iter()
        .map(|c| (objective(&c), c))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least the axis candidate");

    let mut r = rng::stream(seed, rng::tag("gamma-star-numeric"));
    for _ in 0..budget {
        let mut mu: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let len = norm(&mu);
        if len == 0.0 {
            continue;
        }
        mu.iter_mut().for_each(|x| *x /= len);
        if !in_cone(&mu, k) {
            continue;
        }
        let f = objective(&mu);
        if f < best.0 {
            best = (f, mu);
        }
    }

    let (mut fbest, mut mu) = best;
    let mut step = 0.5;
    let mut iterations = 0;
    while step >= MIN_DESCENT_STEP && iterations < 20_000 {
        iterations += 1;
        let along = dot(lam, &mu);
        let mut grad: Vec<f64> = lam.iter().zip(&mu).map(|(l, m)| l - along * m).collect();
        let gnorm = norm(&grad);
        let mut directions: Vec<Vec<f64>> = Vec::with_capacity(2 * n + 1);
        if gnorm > 0.0 {
            grad.iter_mut().for_each(|g| *g = -*g / gnorm);
            directions.push(grad);
        }
        for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut d = vec![0.0; n];
                d[i] = s;
                directions.push(d);
            }
        }
        let mut improved = false;
        for d in &directions {
            let trial: Vec<f64> = mu.iter().zip(d).map(|(m, x)| m + step * x).collect();
            let trial = retract(&trial, k);
            let len = norm(&trial);
            if len == 0.0 {
                continue;
            }
            let f = objective(&trial);
            if f < fbest - 1e-16 {
                fbest = f;
                mu = trial.iter().map(|x| x / len).collect();
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let member = fbest >= -tol;
    Ok(ConeVerdict {
        member,
        margin: fbest,
        witness: if member { None } else { Some(mu) },
        certified: !member,
    })
}

/// Upper bound on `t` keeping `λ(A_ij(t))` inside `Γ_2*`.
pub fn pair_t_bound(n: usize) -> f64 {
    (n as f64 / (2.0 * (n as f64 - 1.0))).sqrt()
}

/// `I_n + t (e_i ⊗ e_j + e_j ⊗ e_i)`, no range check on `t`.
pub fn pair_matrix(n: usize, i: usize, j: usize, t: f64) -> Result<SymMatrix> {
    let mut m = SymMatrix::identity(n)?;
    if i >= n || j >= n || i == j {
        return Err(Error::InvalidSpec(format!("pair ({i},{j}) invalid for n = {n}")));
    }
    m.set(i, j, t);
    Ok(m)
}

/// Identity with the `i`-th diagonal entry zeroed.
pub fn drop_matrix(n: usize, i: usize) -> Result<SymMatrix> {
    let mut m = SymMatrix::identity(n)?;
    if i >= n {
        return Err(Error::InvalidSpec(format!("index {i} invalid for n = {n}")));
    }
    m.set(i, i, 0.0);
    Ok(m)
}

/// A test matrix with a human-readable label (`I`, `A_2`, `A_13`, …, 1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub label: String,
    pub matrix: SymMatrix,
}

/// `I_n`, the `n` matrices `A_i` and the `n(n-1)/2` matrices `A_ij(t)`.
pub fn test_matrix_family_labeled(n: usize, t: f64) -> Result<Vec<LabeledMatrix>> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let bound = pair_t_bound(n);
    if !(t > 0.0 && t < bound) {
        return Err(Error::TOutOfRange { t, bound });
    }
    let mut out = vec![LabeledMatrix { label: "I".into(), matrix: SymMatrix::identity(n)? }];
    for i in 0..n {
        out.push(LabeledMatrix { label: format!("A_{}", i + 1), matrix: drop_matrix(n, i)? });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(LabeledMatrix {
                label: format!("A_{}{}", i + 1, j + 1),
                matrix: pair_matrix(n, i, j, t)?,
            });
        }
    }
    Ok(out)
}

pub fn test_matrix_family(n: usize, t: f64) -> Result<Vec<SymMatrix>> {
    Ok(test_matrix_family_labeled(n, t)?.into_iter().map(|m| m.matrix).collect())
}

/// Haar-random orthogonal matrix (rows) by Gram–Schmidt on Gaussian rows.
pub fn random_rotation(n: usize, r: &mut rng::Rng) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        for q in &rows {
            let c = dot(&v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let len = norm(&v);
        if len > 1e-8 {
            v.iter_mut().for_each(|x| *x /= len);
            rows.push(v);
        }
    }
    rows
}

/// Random matrix whose spectrum sits on the boundary of `Γ_2*` (an extreme
/// ray of the circular cone), in a Haar-random eigenbasis.
pub fn random_gamma2_star_matrix(n: usize, r: &mut rng::Rng) -> Result<SymMatrix> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let nf = n as f64;
    let axis = vec![1.0 / nf.sqrt(); n];
    let mut w: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
    let c = dot(&w, &axis);
    w.iter_mut().zip(&axis).for_each(|(x, a)| *x -= c * a);
    let len = norm(&w);
    let w: Vec<f64> = if len > 1e-12 { w.iter().map(|x| x / len).collect() } else { vec![0.0; n] };
    let cos = ((nf - 1.0) / nf).sqrt();
    let sin = (1.0 / nf).sqrt();
    let mu: Vec<f64> = axis.iter().zip(&w).map(|(a, x)| (cos * a + sin * x).max(0.0)).collect();
    let q = random_rotation(n, r);
    SymMatrix::diagonal(&mu)?.congruence(&q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues_default;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gamma_k_examples() {
        let v = in_gamma_k(&spec(&[0.0, 1.0, 1.0]), ConeSpec::new(3, 3).unwrap(), DEFAULT_TOL).unwrap();
        assert!(v.member);
        assert_eq!(v.margin, 0.0);
        let v = in_gamma_k(&spec(&[3.0, -1.0]), ConeSpec::new(2, 2).unwrap(), DEFAULT_TOL).unwrap();
        assert!(!v.member);
        assert_eq!(v.margin, -3.0);
        // all-ones: margin is min_j C(n, j)
        let v = in_gamma_k(&spec(&[1.0; 4]), ConeSpec::new(4, 4).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(v.margin, 1.0);
        let v = in_gamma_k(&spec(&[1.0; 4]), ConeSpec::new(4, 2).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(v.margin, 4.0);
    }

    #[test]
    fn errors() {
        assert_eq!(ConeSpec::new(3, 4), Err(Error::KOutOfRange { k: 4, n: 3 }));
        assert_eq!(ConeSpec::new(3, 0), Err(Error::KOutOfRange { k: 0, n: 3 }));
        let c = ConeSpec::new(3, 2).unwrap();
        assert!(matches!(in_gamma_k(&spec(&[1.0, 1.0]), c, 0.0), Err(Error::DimensionMismatch { .. })));
        let c4 = ConeSpec::new(4, 3).unwrap();
        assert_eq!(
            in_gamma_star_exact(&spec(&[1.0; 4]), c4, 0.0),
            Err(Error::UnsupportedK { k: 3, n: 4 })
        );
        assert_eq!(in_gamma_star_numeric(&spec(&[1.0; 3]), c, 0, 0.0, 1), Err(Error::BudgetZero));
        assert!(matches!(test_matrix_family(2, 1.2), Err(Error::TOutOfRange { .. })));
        assert!(matches!(test_matrix_family(3, 0.0), Err(Error::TOutOfRange { .. })));
    }

    #[test]
    fn exact_dual_examples() {
        let c = ConeSpec::new(3, 2).unwrap();
        let v = in_gamma_star_exact(&spec(&[1.0, 1.0, 0.0]), c, DEFAULT_TOL).unwrap();
        assert!(v.member);
        assert_eq!(v.margin, 0.0);
        // n = 2 boundary at t = (n / 2(n-1))^{1/2} = 1
        let c = ConeSpec::new(2, 2).unwrap();
        let v = in_gamma_star_exact(&spec(&[2.0, 0.0]), c, DEFAULT_TOL).unwrap();
        assert!(v.member && v.on_boundary(DEFAULT_TOL));
        let c = ConeSpec::new(4, 1).unwrap();
        assert!(in_gamma_star_exact(&spec(&[2.0; 4]), c, DEFAULT_TOL).unwrap().member);
        assert!(!in_gamma_star_exact(&spec(&[2.0, 2.0, 2.0, 1.0]), c, DEFAULT_TOL).unwrap().member);
        let c = ConeSpec::new(3, 3).unwrap();
        assert!(!in_gamma_star_exact(&spec(&[1.0, 1.0, -0.1]), c, DEFAULT_TOL).unwrap().member);
    }

    #[test]
    fn numeric_dual_examples() {
        let c = ConeSpec::new(3, 2).unwrap();
        assert!(in_gamma_star_numeric(&spec(&[1.0, 1.0, 0.0]), c, DEFAULT_BUDGET, DEFAULT_TOL, 3).unwrap().member);
        let c = ConeSpec::new(2, 2).unwrap();
        let v = in_gamma_star_numeric(&spec(&[1.0, -1.0]), c, DEFAULT_BUDGET, DEFAULT_TOL, 3).unwrap();
        assert!(!v.member && v.certified);
        let w = v.witness.unwrap();
        assert!((w[0]).abs() < 1e-6 && (w[1] - 1.0).abs() < 1e-6, "{w:?}");
        assert!((v.margin + 1.0).abs() < 1e-9);
    }

    #[test]
    fn family_shape_and_membership() {
        let fam = test_matrix_family_labeled(2, 0.5).unwrap();
        let labels: Vec<_> = fam.iter().map(|m| m.label.as_str()).collect();
        assert_eq!(labels, ["I", "A_1", "A_2", "A_12"]);
        assert_eq!(fam[1].matrix.to_rows(), vec![vec![0.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(fam[3].matrix.to_rows(), vec![vec![1.0, 0.5], vec![0.5, 1.0]]);
        let fam = test_matrix_family(3, 0.5).unwrap();
        assert_eq!(fam.len(), 1 + 3 + 3);
        let c = ConeSpec::new(3, 2).unwrap();
        for m in &fam {
            let s = eigenvalues_default(m).unwrap();
            assert!(in_gamma_star_exact(&s, c, DEFAULT_TOL).unwrap().member);
        }
    }

    #[test]
    fn random_gamma2_star_on_boundary() {
        let mut r = rng::stream(11, 0);
        for n in 2..=5 {
            let c = ConeSpec::new(n, 2).unwrap();
            for _ in 0..20 {
                let m = random_gamma2_star_matrix(n, &mut r).unwrap();
                let s = eigenvalues_default(&m).unwrap();
                let v = in_gamma_star_exact(&s, c, 1e-12).unwrap();
                assert!(v.member && v.margin.abs() < 1e-12, "{:?}", v);
            }
        }
    }
}
