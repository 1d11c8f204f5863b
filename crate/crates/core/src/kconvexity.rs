//! Three independent k-convexity verdicts for grid functions.
//!
//! * spectral: `λ(∇²u) ∈ Γ_k` at every interior lattice point;
//! * weak integral: `∫ u Σ a^{ij} ∂_ij φ >= 0` for bumps `φ >= 0` and
//!   constant matrices `A` with `λ(A) ∈ Γ_2*`;
//! * viscosity: a randomized search for quadratics touching `u` from above
//!   whose Hessian leaves `Γ_k`.
//!
//! Only the spectral verdict on smooth data is close to a certificate. A pass
//! from the other two only means no counterexample was found.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump::Bump;
use crate::cones::{pair_t_bound, random_gamma2_star_matrix, test_matrix_family_labeled, LabeledMatrix};
use crate::error::{Error, Result};
use crate::grid::{for_each_in_box, gradient_at_flat, hessian_at_flat, GridFunction};
use crate::khessian::s_values_at_flat;
use crate::linalg::{eigenvalues_default, elementary_symmetric_all, SymMatrix};
use crate::rng;

pub use crate::grid::QuadraticPolynomial;

/// Relative tolerance shared by the three tests.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Random `Γ_2*` matrices added per bump in the weak test.
pub const WEAK_RANDOM_MATRICES: usize = 32;
/// Perturbation scale, relative to the local Hessian norm, in the viscosity search.
pub const VISCOSITY_PERTURBATION: f64 = 0.1;
/// Smallest bump radius, in grid spacings, the weak test accepts; narrower
/// bumps give quadrature errors larger than the integral itself.
pub const MIN_PHI_CELLS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    /// pass is evidence only
    WeakIntegral,
    /// pass is evidence only
    Viscosity,
}

impl Method {
    pub fn pass_is_evidence_only(self) -> bool {
        !matches!(self, Method::Spectral)
    }
}

/// Quadratic touching `u` from above at a lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouchingQuadratic {
    pub index: Vec<usize>,
    pub point: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
    /// `S_1..=S_k` of `Q`.
    pub s_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Lattice { index: Vec<usize>, point: Vec<f64> },
    TestFunction { center: Vec<f64>, radius: f64, matrix: String },
    Quadratic(TouchingQuadratic),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub method: Method,
    pub evidence_only: bool,
    pub verdict: Verdict,
    pub k: usize,
    pub tol: f64,
    /// Dimensionless worst margin; `fail` iff it is below `-tol`.
    pub worst_margin: f64,
    pub worst_location: Option<Location>,
    /// Verdict had only `S_k` (not every `S_j`, `j <= k`) been checked.
    pub k_only_verdict: Verdict,
    pub evaluations: usize,
}

impl ConvexityReport {
    fn finish(
        method: Method,
        k: usize,
        tol: f64,
        worst_margin: f64,
        worst_location: Option<Location>,
        k_only_margin: f64,
        evaluations: usize,
    ) -> Self {
        let verdict = if worst_margin >= -tol { Verdict::Pass } else { Verdict::Fail };
        let k_only_verdict = if k_only_margin >= -tol { Verdict::Pass } else { Verdict::Fail };
        let worst_location = if verdict == Verdict::Fail || worst_location.is_some() { worst_location } else { None };
        Self {
            method,
            evidence_only: method.pass_is_evidence_only() && verdict == Verdict::Pass,
            verdict,
            k,
            tol,
            worst_margin,
            worst_location,
            k_only_verdict,
            evaluations,
        }
    }

    /// True when checking only `S_k` would have produced a different verdict.
    pub fn k_only_differs(&self) -> bool {
        self.k_only_verdict != self.verdict
    }
}

/// Pass/fail when every report agrees, inconclusive otherwise.
pub fn combine(reports: &[&ConvexityReport]) -> Verdict {
    if reports.iter().all(|r| r.verdict == Verdict::Pass) {
        Verdict::Pass
    } else if reports.iter().all(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::KOutOfRange { k, n })
    } else {
        Ok(())
    }
}

fn min_index(values: &[f64]) -> Option<(usize, f64)> {
    values.iter().copied().enumerate().fold(None, |best, (i, v)| match best {
        Some((_, b)) if b <= v => best,
        _ => Some((i, v)),
    })
}

// ---------------------------------------------------------------------------
// spectral

/// `λ(∇²u) ∈ Γ_k` at every interior lattice point.
///
/// Each `S_j` is normalised by its largest magnitude over the grid, so the
/// margin is dimensionless and `tol` is relative.
pub fn spectral_test(u: &GridFunction, k: usize, tol: f64) -> Result<ConvexityReport> {
    check_k(k, u.n())?;
    let interior = u.interior_indices();
    if interior.is_empty() {
        return Err(Error::GridTooSmall("no interior points".into()));
    }
    let s: Vec<Vec<f64>> = interior
        .par_iter()
        .map(|&flat| s_values_at_flat(u, flat, k))
        .collect::<Result<_>>()?;
    let mut scale = vec![0.0_f64; k + 1];
    for row in &s {
        for j in 1..=k {
            scale[j] = scale[j].max(row[j].abs());
        }
    }
    let norm = |j: usize, v: f64| if scale[j] > 0.0 { v / scale[j] } else { 0.0 };
    let margins: Vec<f64> = s
        .iter()
        .map(|row| (1..=k).map(|j| norm(j, row[j])).fold(f64::INFINITY, f64::min))
        .collect();
    let k_only = s.iter().map(|row| norm(k, row[k])).fold(f64::INFINITY, f64::min);
    let (at, worst) = min_index(&margins).expect("interior is non-empty");
    let idx = u.unflat(interior[at]);
    let loc = Location::Lattice { point: u.point(&idx), index: idx };
    Ok(ConvexityReport::finish(Method::Spectral, k, tol, worst, Some(loc), k_only, interior.len()))
}

// ---------------------------------------------------------------------------
// weak integral

/// Extreme diagonal points of `Γ_2*` with one dominant entry: weight
/// `2(n-1)/(n-2)` on axis `i` and 1 elsewhere (`e_i ⊗ e_i` for `n = 2`).
pub fn axis_extreme_matrices(n: usize) -> Result<Vec<LabeledMatrix>> {
    (0..n)
        .map(|i| {
            let mut d = vec![if n == 2 { 0.0 } else { 1.0 }; n];
            d[i] = if n == 2 { 1.0 } else { 2.0 * (n as f64 - 1.0) / (n as f64 - 2.0) };
            Ok(LabeledMatrix { label: format!("B_{}", i + 1), matrix: SymMatrix::diagonal(&d)? })
        })
        .collect()
}

/// Matrices used by the weak test for one bump: the proof family
/// `{I, A_i, A_ij(t)}` with `t` at half its admissible bound, the axis
/// extremes `B_i` of [`axis_extreme_matrices`] and
/// [`WEAK_RANDOM_MATRICES`] random boundary points of `Γ_2*`.
pub fn weak_test_matrices(n: usize, k: usize, r: &mut rng::Rng) -> Result<Vec<LabeledMatrix>> {
    if k == 1 || n == 1 {
        return Ok(vec![LabeledMatrix { label: "I".into(), matrix: SymMatrix::identity(n)? }]);
    }
    let mut out = test_matrix_family_labeled(n, 0.5 * pair_t_bound(n))?;
    out.extend(axis_extreme_matrices(n)?);
    for i in 0..WEAK_RANDOM_MATRICES {
        out.push(LabeledMatrix { label: format!("random_{i}"), matrix: random_gamma2_star_matrix(n, r)? });
    }
    Ok(out)
}

/// Least-squares quadratic through `(y, u)` samples, `y` relative to the bump
/// centre and scaled by `rho`. Returns the coefficients on
/// `1, z_a, z_a z_b (a <= b)` with `z = y / rho`.
fn fit_quadratic(samples: &[(Vec<f64>, f64)], n: usize) -> Option<Vec<f64>> {
    let basis = |z: &[f64]| {
        let mut b = Vec::with_capacity(1 + n + n * (n + 1) / 2);
        b.push(1.0);
        b.extend_from_slice(z);
        for a in 0..n {
            for c in a..n {
                b.push(z[a] * z[c]);
            }
        }
        b
    };
    let p = 1 + n + n * (n + 1) / 2;
    let mut g = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for (z, v) in samples {
        let b = basis(z);
        for i in 0..p {
            rhs[i] += b[i] * v;
            for j in 0..=i {
                g[i * p + j] += b[i] * b[j];
            }
        }
    }
    // Cholesky, lower triangle in place
    for j in 0..p {
        let d = g[j * p + j] - (0..j).map(|l| g[j * p + l] * g[j * p + l]).sum::<f64>();
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        g[j * p + j] = d;
        for i in j + 1..p {
            g[i * p + j] = (g[i * p + j] - (0..j).map(|l| g[i * p + l] * g[j * p + l]).sum::<f64>()) / d;
        }
    }
    for i in 0..p {
        rhs[i] = (rhs[i] - (0..i).map(|l| g[i * p + l] * rhs[l]).sum::<f64>()) / g[i * p + i];
    }
    for i in (0..p).rev() {
        rhs[i] = (rhs[i] - (i + 1..p).map(|l| g[l * p + i] * rhs[l]).sum::<f64>()) / g[i * p + i];
    }
    Some(rhs)
}

/// Weak dual-cone criterion with bump test functions.
///
/// For each bump, `u` is split as `q + w` with `q` the least-squares
/// quadratic over the bump support. The `q` part integrates exactly,
/// `∫ q Σ a^{ij} ∂_ij φ = (A : ∇²q) ∫ φ`, and only the remainder `w` goes
/// through the lattice sum against the analytic `∂_ij φ`. The value is
/// divided by `Σ |v| |Σ a^{ij} ∂_ij φ| h^n`, with `v` the non-affine part of
/// `u` (`u` minus the affine part of `q`), and the test fails if any such
/// ratio is below `-tol`.
pub fn weak_integral_test(
    u: &GridFunction,
    k: usize,
    phi_centers: &[Vec<f64>],
    phi_radius: f64,
    tol: f64,
    seed: u64,
) -> Result<ConvexityReport> {
    let n = u.n();
    check_k(k, n)?;
    if phi_centers.is_empty() {
        return Err(Error::InvalidSpec("weak test needs at least one bump".into()));
    }
    if !(phi_radius > 0.0) {
        return Err(Error::NonpositiveRadius(phi_radius));
    }
    if phi_radius < MIN_PHI_CELLS * u.spacing() * (1.0 - 1e-12) {
        return Err(Error::PhiUnderResolved { radius: phi_radius, min_cells: MIN_PHI_CELLS });
    }
    // the common factor h^n cancels in the ratio
    let per_bump: Vec<(f64, String, f64, usize)> = phi_centers
        .par_iter()
        .enumerate()
        .map(|(b, center)| -> Result<(f64, String, f64, usize)> {
            if center.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: center.len() });
            }
            let Some((lo, hi)) = u.index_box(center, phi_radius, 0) else {
                return Err(Error::PhiOutOfDomain(center.clone()));
            };
            let mut r = rng::stream(seed, rng::tag("weak-integral").wrapping_add(b as u64));
            let matrices = weak_test_matrices(n, k, &mut r)?;
            let bump = Bump::new(center.clone(), phi_radius);
            let mut samples: Vec<(Vec<f64>, f64)> = Vec::new();
            let mut phis: Vec<(f64, Vec<f64>)> = Vec::new();
            for_each_in_box(&lo, &hi, |idx| {
                let x = u.point(idx);
                let phi = bump.value(&x);
                if phi > 0.0 {
                    let z = x.iter().zip(center).map(|(a, c)| (a - c) / phi_radius).collect();
                    samples.push((z, u.value(idx)));
                    phis.push((phi, bump.hessian(&x)));
                }
            });
            let coef = fit_quadratic(&samples, n).ok_or(Error::PhiUnderResolved { radius: phi_radius, min_cells: MIN_PHI_CELLS })?;
            let r2 = phi_radius * phi_radius;
            let mut hq = vec![0.0; n * n];
            let mut c = 1 + n;
            for a in 0..n {
                for b in a..n {
                    let v = if a == b { 2.0 * coef[c] } else { coef[c] } / r2;
                    hq[a * n + b] = v;
                    hq[b * n + a] = v;
                    c += 1;
                }
            }
            let phi_mass: f64 = phis.iter().map(|p| p.0).sum();
            // (non-affine part, remainder) per support point
            let parts: Vec<(f64, f64)> = samples
                .iter()
                .map(|(z, val)| {
                    let affine = coef[0] + z.iter().zip(&coef[1..=n]).map(|(a, b)| a * b).sum::<f64>();
                    let mut quad = 0.0;
                    let mut c = 1 + n;
                    for a in 0..n {
                        for b in a..n {
                            quad += coef[c] * z[a] * z[b];
                            c += 1;
                        }
                    }
                    (val - affine, val - affine - quad)
                })
                .collect();
            let mut worst = (f64::INFINITY, String::new());
            for m in &matrices {
                let a = m.matrix.to_rows();
                let contract = |h: &[f64]| (0..n).map(|i| (0..n).map(|j| a[i][j] * h[i * n + j]).sum::<f64>()).sum::<f64>();
                let mut val = contract(&hq) * phi_mass;
                let mut abs = 0.0;
                for ((v, w), (_, hess)) in parts.iter().zip(&phis) {
                    let t = contract(hess);
                    val += w * t;
                    abs += (v * t).abs();
                }
                let ratio = if abs > 0.0 { val / abs } else { 0.0 };
                if ratio < worst.0 {
                    worst = (ratio, m.label.clone());
                }
            }
            Ok((worst.0, worst.1, phi_radius, matrices.len()))
        })
        .collect::<Result<_>>()?;
    let margins: Vec<f64> = per_bump.iter().map(|p| p.0).collect();
    let (at, worst) = min_index(&margins).expect("at least one bump");
    let loc = Location::TestFunction { center: phi_centers[at].clone(), radius: per_bump[at].2, matrix: per_bump[at].1.clone() };
    let evaluations = per_bump.iter().map(|p| p.3).sum();
    Ok(ConvexityReport::finish(Method::WeakIntegral, k, tol, worst, Some(loc), worst, evaluations))
}

// ---------------------------------------------------------------------------
// viscosity

fn stencil_offsets(n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for_each_in_box(&vec![0; n], &vec![2; n], |m| {
        if m.iter().any(|&v| v != 1) {
            out.push(m.iter().map(|&v| v as i64 - 1).collect());
        }
    });
    out
}

fn random_symmetric(n: usize, scale: f64, r: &mut rng::Rng) -> Result<SymMatrix> {
    let mut m = SymMatrix::zeros(n)?;
    for i in 0..n {
        for j in i..n {
            let g: f64 = r.sample(StandardNormal);
            m.set(i, j, scale * if i == j { g } else { g / std::f64::consts::SQRT_2 });
        }
    }
    Ok(m)
}

/// Randomized search for a quadratic `q` touching `u` from above at a lattice
/// point (strict maximum of `u - q` over the `3^n` neighbourhood) with some
/// `S_j(λ(∇²q)) < 0`, `j <= k`.
///
/// Candidate Hessians are `Q = H + P + m I` with `H` the local difference
/// Hessian, `P` a random symmetric perturbation (zero on every fourth trial)
/// and `m` the smallest shift, no smaller than `-λ_min(P)`, that makes the
/// maximum strict; the linear part is the centred-difference gradient.
pub fn viscosity_test(u: &GridFunction, k: usize, budget: usize, seed: u64, tol: f64) -> Result<ConvexityReport> {
    let n = u.n();
    check_k(k, n)?;
    if budget == 0 {
        return Err(Error::BudgetZero);
    }
    let interior = u.interior_indices();
    if interior.is_empty() {
        return Err(Error::GridTooSmall("no interior points".into()));
    }
    let offsets = stencil_offsets(n);
    let flat_offsets: Vec<isize> = offsets
        .iter()
        .map(|d| d.iter().zip(u.strides()).map(|(&a, &s)| a as isize * s as isize).sum())
        .collect();
    let h = u.spacing();
    let mut r = rng::stream(seed, rng::tag("viscosity"));

    let mut worst = f64::INFINITY;
    let mut worst_k_only = f64::INFINITY;
    let mut witness: Option<TouchingQuadratic> = None;
    for trial in 0..budget {
        let flat = interior[r.random_range(0..interior.len())];
        let hess = hessian_at_flat(u, flat);
        let grad = gradient_at_flat(u, flat);
        let hnorm = hess.frobenius_norm();
        let pert = if trial % 4 == 0 {
            SymMatrix::zeros(n)?
        } else {
            let s: f64 = r.random::<f64>() * VISCOSITY_PERTURBATION * hnorm;
            random_symmetric(n, s, &mut r)?
        };
        let base = hess.add(&pert)?;
        let p_min = eigenvalues_default(&pert)?.values().last().copied().unwrap_or(0.0);
        let u0 = u.values()[flat];
        let mut m_req = f64::NEG_INFINITY;
        for (d, &off) in offsets.iter().zip(&flat_offsets) {
            let df: Vec<f64> = d.iter().map(|&v| v as f64).collect();
            let lin: f64 = grad.iter().zip(&df).map(|(g, v)| g * v).sum();
            let rise = u.values()[(flat as isize + off) as usize] - u0 - h * lin;
            let norm2: f64 = df.iter().map(|v| v * v).sum();
            m_req = m_req.max((2.0 * rise / (h * h) - base.quad_form(&df)) / norm2);
        }
        let strict = 1e-9 * (1.0 + hnorm);
        let shift = m_req.max(-p_min) + strict;
        let q = base.shifted(shift);
        let spec = eigenvalues_default(&q)?;
        let s = elementary_symmetric_all(spec.values(), k);
        let qn = q.frobenius_norm().max(f64::MIN_POSITIVE);
        let margin = (1..=k).map(|j| s[j] / qn.powi(j as i32)).fold(f64::INFINITY, f64::min);
        worst_k_only = worst_k_only.min(s[k] / qn.powi(k as i32));
        if margin < worst {
            worst = margin;
            let idx = u.unflat(flat);
            witness = Some(TouchingQuadratic {
                point: u.point(&idx),
                index: idx,
                q: q.to_rows(),
                b: grad,
                c: u0,
                s_values: s[1..].to_vec(),
            });
        }
    }
    let loc = witness.map(Location::Quadratic);
    Ok(ConvexityReport::finish(Method::Viscosity, k, tol, worst, loc, worst_k_only, budget))
}
