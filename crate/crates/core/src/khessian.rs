//! k-Hessian operators `F_k[u] = S_k(λ(∇²u))` on grids, and closed forms for
//! the radial power family `u = σ|x|^β`.
//!
//! # Radial Hessian
//!
//! For `u(x) = f(|x|)` and `r = |x| > 0`,
//!
//! ```text
//! ∇²u = f''(r) x̂⊗x̂ + (f'(r)/r) (I - x̂⊗x̂)
//! ```
//!
//! so the eigenvalues are `f''(r)` once (radial direction) and `f'(r)/r`
//! with multiplicity `n-1` (tangential directions). With `f = σ r^β`:
//! radial `σβ(β-1) r^{β-2}`, tangential `σβ r^{β-2}`. Writing `b` for the
//! tangential and `a` for the radial eigenvalue,
//!
//! ```text
//! S_j = C(n-1, j) b^j + C(n-1, j-1) a b^{j-1}
//!     = (σβ r^{β-2})^j [C(n-1, j) + (β-1) C(n-1, j-1)].
//! ```
//!
//! For `σ > 0` the bracket is non-negative iff `β >= 2 - n/j`, and that bound
//! grows with `j`; the binding condition among `j <= k` is `j = k`, giving the
//! threshold `β* = 2 - n/k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{hessian_at_flat, GridFunction};
use crate::linalg::{binomial, elementary_symmetric_all, eigenvalues_default, k_trace, Spectrum};

/// β step of the threshold sweep.
pub const BETA_SWEEP_STEP: f64 = 1e-3;

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::KOutOfRange { k, n })
    } else {
        Ok(())
    }
}

/// `F_k[u]` at a lattice index, from the centred-difference Hessian.
pub fn f_k_at(u: &GridFunction, idx: &[usize], k: usize) -> Result<f64> {
    check_k(k, u.n())?;
    if !u.is_interior(idx, 1) {
        return Err(Error::BoundaryViolation(idx.to_vec()));
    }
    k_trace(&hessian_at_flat(u, u.flat(idx)), k)
}

/// `S_1..=S_k` of the difference Hessian at a flat interior index.
pub(crate) fn s_values_at_flat(u: &GridFunction, flat: usize, k: usize) -> Result<Vec<f64>> {
    let spec = eigenvalues_default(&hessian_at_flat(u, flat))?;
    Ok(elementary_symmetric_all(spec.values(), k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrumFormula {
    pub n: usize,
    pub sigma: f64,
    pub beta: f64,
}

impl RadialSpectrumFormula {
    pub fn new(n: usize, sigma: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(beta > 0.0) || !beta.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidSpec(format!("radial formula needs β > 0, got β = {beta}")));
        }
        Ok(Self { n, sigma, beta })
    }

    /// (radial, tangential) eigenvalues at radius `r`.
    pub fn eigen_pair(&self, r: f64) -> Result<(f64, f64)> {
        if !(r > 0.0) {
            return Err(Error::NonpositiveRadius(r));
        }
        let base = self.sigma * self.beta * r.powf(self.beta - 2.0);
        Ok((base * (self.beta - 1.0), base))
    }

    /// Closed-form `S_j` at radius `r`.
    pub fn s_j(&self, j: usize, r: f64) -> Result<f64> {
        check_k(j, self.n)?;
        let (_, b) = self.eigen_pair(r)?;
        let bracket = binomial(self.n - 1, j) + (self.beta - 1.0) * binomial(self.n - 1, j - 1);
        Ok(b.powi(j as i32) * bracket)
    }
}

/// Sorted Hessian eigenvalues of `σ|x|^β` at radius `r`.
pub fn radial_spectrum(f: &RadialSpectrumFormula, r: f64) -> Result<Spectrum> {
    let (a, b) = f.eigen_pair(r)?;
    let mut v = vec![b; f.n];
    v[0] = a;
    Spectrum::new(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub beta: f64,
    /// `min_{j<=k} S_j(radial_spectrum(β, r = 1))`, numerically.
    pub min_s: f64,
    /// Same minimum from the closed-form coefficient.
    pub min_s_closed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: usize,
    pub k: usize,
    /// `2 - n/k`
    pub beta_star: f64,
    /// Smallest swept β from which every larger swept β is k-convex.
    pub measured: f64,
    /// Rows of the sweep (every `BETA_SWEEP_STEP` on `(0, beta_max]`).
    pub table: Vec<ThresholdRow>,
}

/// `2 - n/k`, with a β sweep that locates the same value numerically.
///
/// The sweep evaluates `S_j` of the radial spectrum at `r = 1` (signs do not
/// depend on `r`) for `β = step, 2·step, …, beta_max`, treating values
/// above `-1e-12` as non-negative.
pub fn radial_kconvexity_threshold(n: usize, k: usize) -> Result<ThresholdReport> {
    check_k(k, n)?;
    let beta_star = 2.0 - n as f64 / k as f64;
    let beta_max = 3.0;
    let steps = (beta_max / BETA_SWEEP_STEP).round() as usize;
    let mut table = Vec::with_capacity(steps);
    for i in 1..=steps {
        let beta = i as f64 * BETA_SWEEP_STEP;
        let f = RadialSpectrumFormula::new(n, 1.0, beta)?;
        let spec = radial_spectrum(&f, 1.0)?;
        let s = elementary_symmetric_all(spec.values(), k);
        let min_s = s[1..].iter().copied().fold(f64::INFINITY, f64::min);
        let min_s_closed = (1..=k).map(|j| f.s_j(j, 1.0)).collect::<Result<Vec<_>>>()?.into_iter().fold(f64::INFINITY, f64::min);
        table.push(ThresholdRow { beta, min_s, min_s_closed });
    }
    let mut measured = table.last().map(|r| r.beta).unwrap_or(beta_max);
    for row in table.iter().rev() {
        if row.min_s >= -1e-12 {
            measured = row.beta;
        } else {
            break;
        }
    }
    Ok(ThresholdReport { n, k, beta_star, measured, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, FunctionSpec};
    use crate::linalg::SymMatrix;

    #[test]
    fn f_k_on_quadratics() {
        let id = FunctionSpec::quadratic(&SymMatrix::identity(3).unwrap(), &[0.0; 3], 0.0);
        let u = sample(&id, &[-1.0; 3], 0.25, &[9, 9, 9]).unwrap();
        for idx in [[1, 1, 1], [4, 4, 4], [7, 2, 5]] {
            assert!((f_k_at(&u, &idx, 3).unwrap() - 1.0).abs() < 1e-12);
        }
        let q = FunctionSpec::quadratic(&SymMatrix::diagonal(&[2.0, 3.0]).unwrap(), &[0.0; 2], 0.0);
        let u = sample(&q, &[-1.0; 2], 0.25, &[9, 9]).unwrap();
        assert!((f_k_at(&u, &[4, 4], 1).unwrap() - 5.0).abs() < 1e-12);
        assert!((f_k_at(&u, &[4, 4], 2).unwrap() - 6.0).abs() < 1e-12);
        assert!(matches!(f_k_at(&u, &[4, 4], 3), Err(Error::KOutOfRange { .. })));
        assert!(matches!(f_k_at(&u, &[0, 4], 1), Err(Error::BoundaryViolation(_))));
    }

    #[test]
    fn radial_spectrum_examples() {
        let f = RadialSpectrumFormula::new(4, 1.0, 2.0).unwrap();
        assert_eq!(radial_spectrum(&f, 0.3).unwrap().values(), &[2.0; 4]);
        let f = RadialSpectrumFormula::new(3, 1.0, 1.0).unwrap();
        assert_eq!(radial_spectrum(&f, 2.0).unwrap().values(), &[0.5, 0.5, 0.0]);
        let f = RadialSpectrumFormula::new(3, 1.0, 0.5).unwrap();
        assert_eq!(radial_spectrum(&f, 1.0).unwrap().values(), &[0.5, 0.5, -0.25]);
        assert_eq!(radial_spectrum(&f, 0.0), Err(Error::NonpositiveRadius(0.0)));
    }

    #[test]
    fn threshold_values() {
        for (n, k, want) in [(3, 2, 0.5), (2, 2, 1.0), (5, 5, 1.0), (4, 3, 2.0 - 4.0 / 3.0)] {
            let rep = radial_kconvexity_threshold(n, k).unwrap();
            assert_eq!(rep.beta_star, want);
            assert!((rep.measured - want).abs() <= BETA_SWEEP_STEP + 1e-12, "{n},{k}: {}", rep.measured);
        }
        // k <= n/2: every β > 0 is k-convex and the sweep starts at its first step
        let rep = radial_kconvexity_threshold(4, 2).unwrap();
        assert_eq!(rep.beta_star, 0.0);
        assert_eq!(rep.measured, BETA_SWEEP_STEP);
        assert!(radial_kconvexity_threshold(3, 4).is_err());
    }

    #[test]
    fn closed_form_matches_elementary_symmetric() {
        for n in 1..=6 {
            for &beta in &[0.3, 0.5, 1.0, 1.7, 2.5] {
                let f = RadialSpectrumFormula::new(n, 1.3, beta).unwrap();
                for &r in &[0.2, 1.0, 3.0] {
                    let s = elementary_symmetric_all(radial_spectrum(&f, r).unwrap().values(), n);
                    for j in 1..=n {
                        let c = f.s_j(j, r).unwrap();
                        assert!((s[j] - c).abs() <= 1e-12 * (1.0 + c.abs()), "n={n} β={beta} j={j}");
                    }
                }
            }
        }
    }
}
