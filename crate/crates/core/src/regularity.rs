//! Desk-scale measurements of the regularity estimates satisfied by
//! k-convex functions with `k > n/2`: interior Hölder continuity with
//! exponent `α = 2 - n/k`, `L^q` gradient bounds, bounded variation of the
//! gradient, Taylor remainder decay and the scaled oscillation bound for the
//! second-order remainder.
//!
//! The estimates have unspecified constants, so every check reports a
//! measured ratio `lhs / rhs` and, where meaningful, its values on dyadically
//! coarsened copies of the grid (`refinement_trend`, coarse to fine).

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{for_each_in_box, gradient_at_flat, hessian_at_flat, mollify_window, GridFunction, Kernel, MIN_EXTENT};
use crate::linalg::SymMatrix;
use crate::rng;

/// Upper bound on the stratified points used for pair suprema.
pub const MAX_PAIR_POINTS: usize = 2000;
/// Mollification scale, in cells, applied before differencing in the `L^q` check.
pub const LQ_MOLLIFY_CELLS: f64 = 4.0;
/// Dyadic coarsenings reported in `refinement_trend`.
pub const TREND_LEVELS: usize = 2;
/// Noise floor of the Taylor scan, in units of `h²`.
pub const TAYLOR_FLOOR_H2: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub lhs: f64,
    pub rhs_functional: f64,
    pub measured_constant: f64,
    pub refinement_trend: Vec<f64>,
}

impl EstimateReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        let c = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self { lhs, rhs_functional: rhs, measured_constant: c, refinement_trend: vec![c] }
    }

    /// Largest relative change between consecutive trend entries.
    pub fn max_relative_change(&self) -> f64 {
        self.refinement_trend
            .windows(2)
            .map(|p| {
                let s = p[0].abs().max(p[1].abs());
                if s == 0.0 { 0.0 } else { (p[1] - p[0]).abs() / s }
            })
            .fold(0.0, f64::max)
    }
}

pub fn holder_exponent(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if 2 * k <= n {
        return Err(Error::KTooSmall { k, n });
    }
    Ok(2.0 - n as f64 / k as f64)
}

/// Every other lattice point, if the grid has odd extents large enough.
pub fn coarsen(u: &GridFunction) -> Option<GridFunction> {
    if u.dims().iter().any(|&d| d % 2 == 0 || (d - 1) / 2 + 1 < MIN_EXTENT) {
        return None;
    }
    let dims: Vec<usize> = u.dims().iter().map(|d| (d - 1) / 2 + 1).collect();
    let lo = vec![0; u.n()];
    let hi: Vec<usize> = dims.iter().map(|d| d - 1).collect();
    let mut values = Vec::with_capacity(dims.iter().product());
    for_each_in_box(&lo, &hi, |idx| {
        let fine: Vec<usize> = idx.iter().map(|i| 2 * i).collect();
        values.push(u.value(&fine));
    });
    GridFunction::new(u.origin().to_vec(), 2.0 * u.spacing(), dims, values).ok()
}

fn with_trend<F>(u: &GridFunction, f: F) -> Result<EstimateReport>
where
    F: Fn(&GridFunction) -> Result<EstimateReport>,
{
    let mut rep = f(u)?;
    let mut trend = vec![rep.measured_constant];
    let mut g = u.clone();
    for _ in 0..TREND_LEVELS {
        let Some(c) = coarsen(&g) else { break };
        match f(&c) {
            Ok(r) => trend.push(r.measured_constant),
            Err(_) => break,
        }
        g = c;
    }
    trend.reverse();
    rep.refinement_trend = trend;
    Ok(rep)
}

/// Index box and physical box of the sub-domain at distance `margin` from
/// the grid boundary.
fn inner_box(u: &GridFunction, margin: f64) -> Result<(Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>)> {
    if !(margin >= 0.0) {
        return Err(Error::InvalidSpec(format!("margin must be non-negative, got {margin}")));
    }
    let h = u.spacing();
    let upper = u.upper();
    let (mut lo, mut hi, mut a, mut b) = (vec![], vec![], vec![], vec![]);
    for d in 0..u.n() {
        let ad = u.origin()[d] + margin;
        let bd = upper[d] - margin;
        let l = ((ad - u.origin()[d]) / h - 1e-9).ceil().max(0.0) as usize;
        let r = ((bd - u.origin()[d]) / h + 1e-9).floor();
        if r < l as f64 {
            return Err(Error::GridTooSmall(format!("margin {margin} leaves no points")));
        }
        lo.push(l);
        hi.push(r as usize);
        a.push(ad);
        b.push(bd);
    }
    Ok((lo, hi, a, b))
}

fn abs_integral(u: &GridFunction, lo: &[usize], hi: &[usize]) -> f64 {
    let mut s = 0.0;
    for_each_in_box(lo, hi, |idx| s += u.value(idx).abs());
    s * u.cell_volume()
}

/// Stratified lattice points of `[lo, hi]`: every `s`-th point per axis, `s`
/// the smallest stride giving at most [`MAX_PAIR_POINTS`] points.
fn stratified(lo: &[usize], hi: &[usize]) -> Vec<Vec<usize>> {
    let count = |s: usize| lo.iter().zip(hi).map(|(a, b)| (b - a) / s + 1).product::<usize>();
    let mut s = 1;
    while count(s) > MAX_PAIR_POINTS {
        s += 1;
    }
    let slo = vec![0; lo.len()];
    let shi: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| (b - a) / s).collect();
    let mut out = Vec::new();
    for_each_in_box(&slo, &shi, |m| out.push(m.iter().zip(lo).map(|(j, a)| a + s * j).collect()));
    out
}

fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn holder_single(u: &GridFunction, k: usize, inner_margin: f64) -> Result<EstimateReport> {
    let n = u.n();
    let alpha = holder_exponent(n, k)?;
    let (lo, hi, a, b) = inner_box(u, inner_margin)?;
    let pts: Vec<(Vec<f64>, f64, f64)> = stratified(&lo, &hi)
        .into_iter()
        .map(|idx| {
            let x = u.point(&idx);
            let d = (0..n).map(|i| (x[i] - a[i]).min(b[i] - x[i])).fold(f64::INFINITY, f64::min).max(0.0);
            (x, d, u.value(&idx))
        })
        .collect();
    let lhs = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let (x, dx, ux) = &pts[i];
            let mut best = 0.0_f64;
            for (y, dy, uy) in &pts[i + 1..] {
                let d = dx.min(*dy);
                if d == 0.0 {
                    continue;
                }
                let v = d.powf(n as f64 + alpha) * (ux - uy).abs() / dist2(x, y).sqrt().powf(alpha);
                best = best.max(v);
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(EstimateReport::new(lhs, abs_integral(u, &lo, &hi)))
}

/// `max d_{x,y}^{n+α} |u(x) - u(y)| / |x - y|^α` over pairs of stratified
/// points of `Ω'` against `Σ_{Ω'} |u| h^n`, with `Ω'` the box at distance
/// `inner_margin` from the grid boundary and `d_x` the distance to `∂Ω'`.
pub fn holder_check(u: &GridFunction, k: usize, inner_margin: f64) -> Result<EstimateReport> {
    holder_exponent(u.n(), k)?;
    with_trend(u, |g| holder_single(g, k, inner_margin))
}

fn check_q(q: f64, n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let ok = q > 0.0 && q.is_finite() && (k == n || q < (n * k) as f64 / (n - k) as f64);
    if ok { Ok(()) } else { Err(Error::QOutOfRange { q, n, k }) }
}

fn lq_single(u: &GridFunction, q: f64, inner_margin: f64, outer_margin: f64) -> Result<EstimateReport> {
    let (lo, hi, _, _) = inner_box(u, inner_margin)?;
    let (olo, ohi, _, _) = inner_box(u, outer_margin)?;
    let eps = LQ_MOLLIFY_CELLS * u.spacing();
    let reach = Kernel::new(u, eps)?.reach;
    let wlo: Vec<usize> = lo.iter().map(|&l| l.saturating_sub(1)).collect();
    let whi: Vec<usize> = hi.iter().map(|&h| h + 1).collect();
    if wlo.iter().any(|&l| l < reach) || whi.iter().zip(u.dims()).any(|(&h, &d)| h + reach >= d) || lo.iter().any(|&l| l == 0) {
        return Err(Error::GridTooSmall(format!("inner margin {inner_margin} leaves no room to mollify")));
    }
    let w = mollify_window(u, eps, &wlo, &whi)?;
    let mut s = 0.0;
    let off: Vec<usize> = lo.iter().zip(&wlo).map(|(a, b)| a - b).collect();
    let rel: Vec<usize> = hi.iter().zip(&wlo).map(|(a, b)| a - b).collect();
    for_each_in_box(&off, &rel, |idx| {
        let g = gradient_at_flat(&w, w.flat(idx));
        s += g.iter().map(|v| v * v).sum::<f64>().sqrt().powf(q);
    });
    let lhs = (s * u.cell_volume()).powf(1.0 / q);
    Ok(EstimateReport::new(lhs, abs_integral(u, &olo, &ohi)))
}

/// `(Σ_{Ω'} |∇u_ε|^q h^n)^{1/q}` against `Σ_{Ω''} |u| h^n`, with `u_ε` the
/// mollification at `ε = 4h` and `Ω' ⊂ Ω''` the boxes at the two margins.
///
/// Admissible `q`: `0 < q < nk/(n-k)` for `k < n`, any `q > 0` for `k = n`.
pub fn gradient_lq_check(u: &GridFunction, k: usize, q: f64, inner_margin: f64, outer_margin: f64) -> Result<EstimateReport> {
    check_q(q, u.n(), k)?;
    if !(inner_margin > outer_margin) {
        return Err(Error::InvalidSpec(format!(
            "inner margin {inner_margin} must exceed outer margin {outer_margin}"
        )));
    }
    with_trend(u, |g| lq_single(g, q, inner_margin, outer_margin))
}

/// Random smooth vector field on a box: a product-bump envelope that vanishes
/// on the box boundary times a random quadratic polynomial per component, in
/// coordinates scaled to `[-1, 1]^n`.
#[derive(Debug, Clone)]
struct Field {
    center: Vec<f64>,
    half: Vec<f64>,
    // per component: constant, linear (n), quadratic (n x n row-major)
    coef: Vec<(f64, Vec<f64>, Vec<f64>)>,
    scale: f64,
}

impl Field {
    fn random(center: Vec<f64>, half: Vec<f64>, r: &mut rng::Rng) -> Self {
        let n = center.len();
        let mut g = || r.sample::<f64, _>(StandardNormal);
        let coef = (0..n)
            .map(|_| ((g)(), (0..n).map(|_| g()).collect(), (0..n * n).map(|_| g()).collect()))
            .collect();
        Self { center, half, coef, scale: 1.0 }
    }

    /// Envelope value and `∂_j` of the envelope.
    fn envelope(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let n = y.len();
        let mut e = 1.0;
        let mut logd = vec![0.0; n];
        for d in 0..n {
            let s = y[d] * y[d];
            if s >= 1.0 {
                return (0.0, vec![0.0; n]);
            }
            let w = 1.0 / (1.0 - s);
            e *= (1.0 - w).exp();
            // d/dx_d log g(y_d²) = g'/g · 2 y_d / half_d
            logd[d] = -w * w * 2.0 * y[d] / self.half[d];
        }
        (e, logd.iter().map(|l| l * e).collect())
    }

    fn value_and_div(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let n = x.len();
        let y: Vec<f64> = (0..n).map(|d| (x[d] - self.center[d]) / self.half[d]).collect();
        let (e, de) = self.envelope(y.as_slice());
        let mut val = vec![0.0; n];
        let mut div = 0.0;
        for (j, (c0, lin, quad)) in self.coef.iter().enumerate() {
            let mut p = *c0;
            let mut dp = lin[j];
            for a in 0..n {
                p += lin[a] * y[a];
                for b in 0..n {
                    p += quad[a * n + b] * y[a] * y[b];
                }
                dp += (quad[j * n + a] + quad[a * n + j]) * y[a];
            }
            dp /= self.half[j];
            val[j] = self.scale * e * p;
            div += self.scale * (de[j] * p + e * dp);
        }
        (val, div)
    }
}

fn bv_fields(center: &[f64], half: &[f64], budget: usize, seed: u64) -> Vec<Field> {
    (0..budget)
        .map(|i| {
            let mut r = rng::stream(seed, rng::tag("bv-field").wrapping_add(i as u64));
            Field::random(center.to_vec(), half.to_vec(), &mut r)
        })
        .collect()
}

fn bv_single(u: &GridFunction, inner_margin: f64, fields: &[Field]) -> Result<EstimateReport> {
    let n = u.n();
    let (mut lo, mut hi, _, _) = inner_box(u, inner_margin)?;
    for d in 0..n {
        lo[d] = lo[d].max(1);
        hi[d] = hi[d].min(u.dims()[d] - 2);
        if lo[d] > hi[d] {
            return Err(Error::GridTooSmall("BV sub-domain has no interior points".into()));
        }
    }
    let mut pts = Vec::new();
    for_each_in_box(&lo, &hi, |idx| pts.push(u.flat(idx)));
    let hn = u.cell_volume();
    let lhs = fields
        .par_iter()
        .map(|f| {
            // rescale so the lattice sup of |φ| is 1
            let mut sup = 0.0_f64;
            let mut acc = vec![0.0; n];
            let mut divs = Vec::with_capacity(pts.len());
            for &p in &pts {
                let (v, dv) = f.value_and_div(&u.point(&u.unflat(p)));
                sup = sup.max(v.iter().map(|a| a * a).sum::<f64>().sqrt());
                divs.push(dv);
            }
            if sup == 0.0 {
                return 0.0;
            }
            for (&p, dv) in pts.iter().zip(&divs) {
                let g = gradient_at_flat(u, p);
                for i in 0..n {
                    acc[i] += g[i] * dv;
                }
            }
            acc.iter().map(|a| (a * hn / sup).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(EstimateReport::new(lhs, abs_integral(u, &lo, &hi)))
}

/// `max_i max_φ |Σ_{Ω'} ∂_i u div φ h^n|` over `field_budget` random smooth
/// fields supported in `Ω'` with lattice sup `|φ| = 1`, against
/// `Σ_{Ω'} |u| h^n`. The fields are drawn from `seed` in physical coordinates,
/// so refinements of the same box reuse them.
pub fn bv_check(u: &GridFunction, inner_margin: f64, field_budget: usize, seed: u64) -> Result<EstimateReport> {
    if field_budget == 0 {
        return Err(Error::BudgetZero);
    }
    let (_, _, a, b) = inner_box(u, inner_margin)?;
    let center: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
    let half: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (y - x)).collect();
    if half.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::GridTooSmall(format!("margin {inner_margin} leaves an empty box")));
    }
    let fields = bv_fields(&center, &half, field_budget, seed);
    with_trend(u, |g| bv_single(g, inner_margin, &fields))
}

// ---------------------------------------------------------------------------
// second-order remainder

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    /// Lattice point nearest to the requested point.
    pub point: Vec<f64>,
    pub grad: Vec<f64>,
    pub hess: SymMatrix,
    pub radii: Vec<f64>,
    /// `max_{B(r/2)} |h| / r²`
    pub sup_ratio: Vec<f64>,
    /// `mean_{B(r)} |h| / r²`
    pub mean_ratio: Vec<f64>,
    pub noise_floor: f64,
    pub decays: bool,
}

/// Second-order Taylor remainder of the lattice data around a lattice point.
#[derive(Debug, Clone)]
pub struct Remainder {
    pub index: Vec<usize>,
    pub point: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: SymMatrix,
}

impl Remainder {
    pub fn at(u: &GridFunction, point: &[f64]) -> Result<Self> {
        if point.len() != u.n() {
            return Err(Error::DimensionMismatch { expected: u.n(), got: point.len() });
        }
        let index = u.nearest_index(point).ok_or_else(|| Error::BoundaryViolation(vec![]))?;
        if !u.is_interior(&index, 1) {
            return Err(Error::BoundaryViolation(index));
        }
        let flat = u.flat(&index);
        Ok(Self {
            point: u.point(&index),
            value: u.values()[flat],
            grad: gradient_at_flat(u, flat),
            hess: hessian_at_flat(u, flat),
            index,
        })
    }

    /// `h(y) = u(y) - u(x) - <∇u(x), y-x> - ½ <∇²u(x)(y-x), y-x>`
    pub fn eval(&self, y: &[f64], uy: f64) -> f64 {
        let d: Vec<f64> = y.iter().zip(&self.point).map(|(a, b)| a - b).collect();
        let lin: f64 = self.grad.iter().zip(&d).map(|(g, v)| g * v).sum();
        uy - self.value - lin - 0.5 * self.hess.quad_form(&d)
    }

    /// `|h|` at the lattice points of the closed ball `B(point, r)`.
    fn abs_on_ball(&self, u: &GridFunction, r: f64) -> Result<Vec<(Vec<f64>, f64)>> {
        if u.index_box(&self.point, r, 0).is_none() {
            return Err(Error::BoundaryViolation(self.index.clone()));
        }
        Ok(u.ball_indices(&self.point, r)
            .into_iter()
            .map(|f| {
                let y = u.point(&u.unflat(f));
                let hv = self.eval(&y, u.values()[f]);
                (y, hv)
            })
            .collect())
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidSpec("radii must be non-empty".into()));
    }
    if let Some(&r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::NonpositiveRadius(r));
    }
    if radii.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::InvalidSpec(format!("radii must be strictly decreasing: {radii:?}")));
    }
    Ok(())
}

fn decays(seq: &[f64], floor: f64) -> bool {
    seq.windows(2).all(|p| p[1] <= p[0] || p[1] <= floor)
}

/// Mean and sup ratios of the second-order remainder over shrinking closed
/// balls. `decays` is true iff both sequences are non-increasing, except
/// for entries already below `10 h²`.
pub fn taylor_remainder_scan(u: &GridFunction, k: usize, point: &[f64], radii: &[f64]) -> Result<RemainderReport> {
    holder_exponent(u.n(), k)?;
    check_radii(radii)?;
    let rem = Remainder::at(u, point)?;
    let mut sup_ratio = Vec::with_capacity(radii.len());
    let mut mean_ratio = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = rem.abs_on_ball(u, r)?;
        let mean = ball.iter().map(|(_, v)| v.abs()).sum::<f64>() / ball.len() as f64;
        let r2 = 0.25 * r * r * (1.0 + 1e-12);
        let sup = ball
            .iter()
            .filter(|(y, _)| dist2(y, &rem.point) <= r2)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        sup_ratio.push(sup / (r * r));
        mean_ratio.push(mean / (r * r));
    }
    let noise_floor = TAYLOR_FLOOR_H2 * u.spacing() * u.spacing();
    let ok = decays(&sup_ratio, noise_floor) && decays(&mean_ratio, noise_floor);
    Ok(RemainderReport {
        point: rem.point,
        grad: rem.grad,
        hess: rem.hess,
        radii: radii.to_vec(),
        sup_ratio,
        mean_ratio,
        noise_floor,
        decays: ok,
    })
}

/// `max |h(y) - h(z)| / |y - z|^α` over sampled pairs of `B(point, r)`
/// against `r^{-α} mean_{B(2r)} |h| + r^{2-α}`, at `r`, `r/2` and `r/4`.
/// `measured_constant` is the value at `r`; the trend lists `r/4, r/2, r`.
pub fn lemma31_check(u: &GridFunction, k: usize, point: &[f64], r: f64, pair_budget: usize, seed: u64) -> Result<EstimateReport> {
    let alpha = holder_exponent(u.n(), k)?;
    if !(r > 0.0) {
        return Err(Error::NonpositiveRadius(r));
    }
    if pair_budget == 0 {
        return Err(Error::BudgetZero);
    }
    let rem = Remainder::at(u, point)?;
    let mut reports = Vec::new();
    for (level, rr) in [r, 0.5 * r, 0.25 * r].into_iter().enumerate() {
        let outer = rem.abs_on_ball(u, 2.0 * rr)?;
        let mean = outer.iter().map(|(_, v)| v.abs()).sum::<f64>() / outer.len() as f64;
        let inner = rem.abs_on_ball(u, rr)?;
        let m = inner.len();
        let pair_value = |i: usize, j: usize| {
            let (y, hy) = &inner[i];
            let (z, hz) = &inner[j];
            (hy - hz).abs() / dist2(y, z).sqrt().powf(alpha)
        };
        let total_pairs = m * m.saturating_sub(1) / 2;
        let lhs = if total_pairs <= pair_budget {
            (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).map(|(i, j)| pair_value(i, j)).fold(0.0, f64::max)
        } else {
            let mut g = rng::stream(seed, rng::tag("lemma31").wrapping_add(level as u64));
            (0..pair_budget)
                .map(|_| {
                    let ij = sample_indices(&mut g, m, 2);
                    pair_value(ij.index(0), ij.index(1))
                })
                .fold(0.0, f64::max)
        };
        let rhs = rr.powf(-alpha) * mean + rr.powf(2.0 - alpha);
        reports.push(EstimateReport::new(lhs, rhs));
    }
    let mut rep = reports[0].clone();
    rep.refinement_trend = reports.iter().rev().map(|r| r.measured_constant).collect();
    Ok(rep)
}

/// `g(y) = h(y) + (Λ/2)|y - x|²` with `Λ` the spectral norm of the difference
/// Hessian at `point`, sampled on the lattice of `u`.
pub fn lemma31_auxiliary(u: &GridFunction, point: &[f64]) -> Result<GridFunction> {
    let rem = Remainder::at(u, point)?;
    let lam = rem.hess.spectral_norm()?;
    let values: Vec<f64> = (0..u.len())
        .map(|f| {
            let y = u.point(&u.unflat(f));
            rem.eval(&y, u.values()[f]) + 0.5 * lam * dist2(&y, &rem.point)
        })
        .collect();
    GridFunction::new(u.origin().to_vec(), u.spacing(), u.dims().to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, FunctionSpec};

    fn cube(n: usize, m: usize, spec: &FunctionSpec) -> GridFunction {
        sample(spec, &vec![-1.0; n], 2.0 / (m - 1) as f64, &vec![m; n]).unwrap()
    }

    #[test]
    fn exponent_and_ranges() {
        assert_eq!(holder_exponent(2, 2).unwrap(), 1.0);
        assert_eq!(holder_exponent(3, 2).unwrap(), 0.5);
        assert_eq!(holder_exponent(4, 2), Err(Error::KTooSmall { k: 2, n: 4 }));
        assert!(check_q(5.9, 3, 2).is_ok());
        assert!(check_q(6.0, 3, 2).is_err());
        assert!(check_q(100.0, 2, 2).is_ok());
        assert!(check_q(0.0, 2, 2).is_err());
    }

    #[test]
    fn constant_has_zero_oscillation() {
        let u = GridFunction::centered_cube(2, 1.0, 33, |_| 3.0).unwrap();
        let r = holder_check(&u, 2, 0.25).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.measured_constant, 0.0);
        let b = bv_check(&u, 0.25, 4, 1).unwrap();
        assert!(b.lhs < 1e-12);
    }

    #[test]
    fn linear_gradient_norm() {
        let u = GridFunction::centered_cube(2, 1.0, 65, |x| 3.0 * x[0] - 4.0 * x[1]).unwrap();
        let r = gradient_lq_check(&u, 2, 3.0, 0.5, 0.25).unwrap();
        let count = 33.0 * 33.0;
        let want = 5.0 * (count * u.cell_volume()).powf(1.0 / 3.0);
        assert!((r.lhs - want).abs() < 1e-9 * want, "{} vs {want}", r.lhs);
    }

    #[test]
    fn quadratic_remainder_vanishes() {
        let q = SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        let u = cube(2, 129, &FunctionSpec::quadratic(&q, &[0.1, 0.2], 1.0));
        let rep = taylor_remainder_scan(&u, 2, &[0.25, 0.0], &[0.5, 0.25, 0.125]).unwrap();
        assert!(rep.sup_ratio.iter().chain(&rep.mean_ratio).all(|v| *v <= 1e-10), "{rep:?}");
        assert!(rep.decays);
        let l = lemma31_check(&u, 2, &[0.0, 0.0], 0.2, 2000, 3).unwrap();
        assert!(l.measured_constant < 1e-9);
    }

    #[test]
    fn cubic_sup_ratio() {
        let h = 1.0 / 64.0;
        let u = GridFunction::new(vec![-1.0], h, vec![129], (0..129).map(|i| (-1.0 + i as f64 * h).powi(3)).collect()).unwrap();
        let rep = taylor_remainder_scan(&u, 1, &[0.0], &[0.5, 0.25]).unwrap();
        for (r, s) in rep.radii.iter().zip(&rep.sup_ratio) {
            // FD gradient of x³ at 0 is h², so h(y) = y³ - h² y
            let want = (r / 2.0).powi(3) / (r * r) - h * h * (r / 2.0) / (r * r);
            assert!((s - want).abs() < 1e-14);
        }
    }

    #[test]
    fn coarsen_halves() {
        let u = GridFunction::centered_cube(2, 1.0, 17, |x| x[0] + 2.0 * x[1]).unwrap();
        let c = coarsen(&u).unwrap();
        assert_eq!(c.dims(), &[9, 9]);
        assert_eq!(c.value(&[1, 2]), u.value(&[2, 4]));
        assert!(coarsen(&c).is_some() && coarsen(&coarsen(&c).unwrap()).is_none());
    }

    #[test]
    fn auxiliary_is_convex_for_convex_quadratic() {
        let q = SymMatrix::diagonal(&[1.0, 3.0]).unwrap();
        let u = cube(2, 33, &FunctionSpec::quadratic(&q, &[0.0; 2], 0.0));
        let g = lemma31_auxiliary(&u, &[0.0, 0.0]).unwrap();
        // h ≡ 0, so g = (3/2)|y|²
        let idx = [20, 9];
        let y = g.point(&idx);
        assert!((g.value(&idx) - 1.5 * (y[0] * y[0] + y[1] * y[1])).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let u = cube(2, 33, &FunctionSpec::radial(1.0, 1.0));
        assert_eq!(bv_check(&u, 0.2, 0, 1), Err(Error::BudgetZero));
        assert!(matches!(taylor_remainder_scan(&u, 2, &[0.8, 0.0], &[0.5]), Err(Error::BoundaryViolation(_))));
        assert!(matches!(gradient_lq_check(&u, 2, -1.0, 0.5, 0.2), Err(Error::QOutOfRange { .. })));
    }
}
