//! Hessian-measure estimation by mollification: ball masses, density probes
//! and a per-point regular/singular classification.
//!
//! The mass of a ball is `Σ F_k[u_ε](x) h^n` over the lattice points of the
//! closed ball, with `u_ε` the discrete mollification. Sums run in lattice
//! order so results are reproducible bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{hessian_at_flat, mollify_window, GridFunction, Kernel};
use crate::kconvexity::{spectral_test, Verdict, DEFAULT_TOL};
use crate::linalg::k_trace;

/// Cauchy tolerance between the last two mass/volume ratios of a probe.
pub const STABLE_REL: f64 = 0.05;
/// Per-halving growth of the ratio that marks a singular point.
pub const SINGULAR_GROWTH: f64 = 2.0;

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub center: Vec<f64>,
    pub k: usize,
    pub radii: Vec<f64>,
    pub eps_levels: Vec<f64>,
    /// `masses[e][r]` for `eps_levels[e]`, `radii[r]`.
    pub masses: Vec<Vec<f64>>,
    /// `|masses[e+1][r] - masses[e][r]|`.
    pub cauchy_differences: Vec<Vec<f64>>,
    /// Worst spectral margin of the finest mollification.
    pub precheck_margin: f64,
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::KOutOfRange { k, n })
    } else {
        Ok(())
    }
}

/// Mollified copy of `u` on the box of points within sup-distance `radius`
/// of `center`, padded by one cell for differencing.
fn mollified_patch(u: &GridFunction, eps: f64, center: &[f64], radius: f64) -> Result<GridFunction> {
    let reach = Kernel::new(u, eps)?.reach;
    let out = || Error::BallOutOfDomain { center: center.to_vec(), radius: radius + eps };
    u.index_box(center, radius, 1 + reach).ok_or_else(out)?;
    let (lo, hi) = u.index_box(center, radius, 1).ok_or_else(out)?;
    mollify_window(u, eps, &lo, &hi)
}

/// `F_k` at the given flat indices, then summed in order, times `h^n`.
fn mass_at(w: &GridFunction, flats: &[usize], k: usize) -> Result<f64> {
    let vals: Vec<f64> = flats.par_iter().map(|&f| k_trace(&hessian_at_flat(w, f), k)).collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() * w.cell_volume())
}

fn validate_center(u: &GridFunction, center: &[f64]) -> Result<()> {
    if center.len() != u.n() {
        return Err(Error::DimensionMismatch { expected: u.n(), got: center.len() });
    }
    if center.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteValue(format!("center {center:?}")));
    }
    Ok(())
}

/// Ball masses `m[ε][r] = Σ_{x ∈ B(center, r)} F_k[u_ε](x) h^n`.
///
/// The input must pass [`spectral_test`] on its finest mollification,
/// otherwise `NotKConvex` is returned.
pub fn hessian_measure_ball(
    u: &GridFunction,
    k: usize,
    center: &[f64],
    radii: &[f64],
    eps_levels: &[f64],
) -> Result<MeasureEstimate> {
    check_k(k, u.n())?;
    validate_center(u, center)?;
    if radii.is_empty() || eps_levels.is_empty() {
        return Err(Error::InvalidSpec("radii and eps_levels must be non-empty".into()));
    }
    if let Some(&r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::NonpositiveRadius(r));
    }
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let finest = eps_levels.iter().copied().fold(f64::INFINITY, f64::min);

    let mut masses = Vec::with_capacity(eps_levels.len());
    let mut precheck_margin = f64::NAN;
    for &eps in eps_levels {
        let w = mollified_patch(u, eps, center, r_max)?;
        if eps == finest && precheck_margin.is_nan() {
            let rep = spectral_test(&w, k, DEFAULT_TOL)?;
            if rep.verdict == Verdict::Fail {
                return Err(Error::NotKConvex(rep.worst_margin));
            }
            precheck_margin = rep.worst_margin;
        }
        let row = radii
            .iter()
            .map(|&r| mass_at(&w, &w.ball_indices(center, r), k))
            .collect::<Result<Vec<_>>>()?;
        masses.push(row);
    }
    let cauchy_differences = masses
        .windows(2)
        .map(|p| p[1].iter().zip(&p[0]).map(|(a, b)| (a - b).abs()).collect())
        .collect();
    Ok(MeasureEstimate {
        center: center.to_vec(),
        k,
        radii: radii.to_vec(),
        eps_levels: eps_levels.to_vec(),
        masses,
        cauchy_differences,
        precheck_margin,
    })
}

/// Mass of a union of closed balls at one mollification scale, each lattice
/// point counted once.
pub fn union_mass(u: &GridFunction, k: usize, eps: f64, balls: &[(Vec<f64>, f64)]) -> Result<f64> {
    check_k(k, u.n())?;
    if balls.is_empty() {
        return Ok(0.0);
    }
    let n = u.n();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (c, r) in balls {
        validate_center(u, c)?;
        if !(*r > 0.0) {
            return Err(Error::NonpositiveRadius(*r));
        }
        for d in 0..n {
            lo[d] = lo[d].min(c[d] - r);
            hi[d] = hi[d].max(c[d] + r);
        }
    }
    let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max);
    let w = mollified_patch(u, eps, &mid, half)?;
    let mut inside = vec![false; w.len()];
    for (c, r) in balls {
        for f in w.ball_indices(c, *r) {
            inside[f] = true;
        }
    }
    let flats: Vec<usize> = (0..w.len()).filter(|&f| inside[f]).collect();
    mass_at(&w, &flats, k)
}

// ---------------------------------------------------------------------------
// density probes

/// Ties the mollification scale to the ball radius, `ε = fraction · r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsRule {
    pub fraction: f64,
}

impl Default for EpsRule {
    fn default() -> Self {
        Self { fraction: 0.125 }
    }
}

impl EpsRule {
    pub fn eps(&self, r: f64) -> f64 {
        self.fraction * r
    }
}

/// Dyadic radii starting at half the distance from `point` to the grid
/// boundary, halving while `ε(r)` stays at least three cells.
pub fn default_schedule(u: &GridFunction, point: &[f64], rule: EpsRule) -> Vec<f64> {
    let upper = u.upper();
    let dist = point
        .iter()
        .zip(u.origin())
        .zip(&upper)
        .map(|((x, a), b)| (x - a).min(b - x))
        .fold(f64::INFINITY, f64::min);
    let min_eps = crate::grid::MIN_EPS_CELLS * u.spacing();
    let mut out = Vec::new();
    let mut r = 0.5 * dist;
    while r > 0.0 && rule.eps(r) >= min_eps * (1.0 - 1e-12) {
        out.push(r);
        r *= 0.5;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProbe {
    pub point: Vec<f64>,
    pub k: usize,
    pub radii: Vec<f64>,
    pub eps: Vec<f64>,
    /// `m[ε(r)][r] / (ω_n r^n)` per radius.
    pub ratios: Vec<f64>,
    pub h_estimate: f64,
    pub f_k_value: f64,
    pub relative_gap: f64,
    pub singular_flag: bool,
}

/// Growth of `ratios[i+1]/ratios[i]` rescaled to one radius halving.
fn growth_per_halving(radii: &[f64], ratios: &[f64], i: usize) -> f64 {
    let q = ratios[i + 1] / ratios[i];
    let halvings = (radii[i] / radii[i + 1]).log2();
    if ratios[i] > 0.0 && ratios[i + 1] > 0.0 {
        q.powf(1.0 / halvings)
    } else {
        0.0
    }
}

/// Mass/volume ratios along a shrinking radius schedule.
///
/// A point is singular when the last (up to two) ratio steps each grow by at
/// least [`SINGULAR_GROWTH`] per halving of `r`; regular when the last two
/// ratios agree to [`STABLE_REL`] (relative to `max(1, |ratio|)`); otherwise
/// the schedule is exhausted.
pub fn density_probe(u: &GridFunction, k: usize, point: &[f64], radii_schedule: &[f64], rule: EpsRule) -> Result<DensityProbe> {
    check_k(k, u.n())?;
    validate_center(u, point)?;
    if radii_schedule.len() < 2 {
        return Err(Error::InvalidSpec(format!("density probe needs at least two radii, got {radii_schedule:?}")));
    }
    if radii_schedule.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::InvalidSpec(format!("radii must be strictly decreasing: {radii_schedule:?}")));
    }
    let n = u.n();
    let omega = unit_ball_volume(n);
    let eps: Vec<f64> = radii_schedule.iter().map(|&r| rule.eps(r)).collect();
    let ratios = radii_schedule
        .iter()
        .zip(&eps)
        .map(|(&r, &e)| {
            let m = hessian_measure_ball(u, k, point, &[r], &[e])?.masses[0][0];
            Ok(m / (omega * r.powi(n as i32)))
        })
        .collect::<Result<Vec<f64>>>()?;

    let last = ratios.len() - 1;
    let tail = last.min(2);
    let singular_flag = (last - tail..last).all(|i| growth_per_halving(radii_schedule, &ratios, i) >= SINGULAR_GROWTH);
    let stable = (ratios[last] - ratios[last - 1]).abs() <= STABLE_REL * ratios[last].abs().max(1.0);
    if !singular_flag && !stable {
        return Err(Error::ScheduleExhausted { radii: radii_schedule.to_vec(), ratios });
    }

    let e_min = eps[last];
    let w = mollified_patch(u, e_min, point, 2.0 * u.spacing())?;
    let idx = w.nearest_index(point).ok_or_else(|| Error::BallOutOfDomain { center: point.to_vec(), radius: 0.0 })?;
    let f_k_value = k_trace(&hessian_at_flat(&w, w.flat(&idx)), k)?;
    let h_estimate = ratios[last];
    Ok(DensityProbe {
        point: point.to_vec(),
        k,
        radii: radii_schedule.to_vec(),
        eps,
        relative_gap: (h_estimate - f_k_value).abs() / f_k_value.abs().max(1.0),
        h_estimate,
        f_k_value,
        ratios,
        singular_flag,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Regular(DensityProbe),
    Singular(DensityProbe),
    Inconclusive { point: Vec<f64>, error: String, radii: Vec<f64>, ratios: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub probes: Vec<ProbeOutcome>,
    pub regular: usize,
    pub singular: usize,
    pub inconclusive: usize,
    /// Largest `relative_gap` over regular points (0 if none).
    pub max_gap: f64,
}

/// Runs [`density_probe`] at every point; a shared schedule if given, the
/// per-point [`default_schedule`] otherwise. Per-point errors become
/// inconclusive entries.
pub fn decomposition_report(
    u: &GridFunction,
    k: usize,
    probe_points: &[Vec<f64>],
    radii_schedule: Option<&[f64]>,
    rule: EpsRule,
) -> Result<DecompositionReport> {
    check_k(k, u.n())?;
    let mut probes = Vec::with_capacity(probe_points.len());
    for p in probe_points {
        let sched = match radii_schedule {
            Some(s) => s.to_vec(),
            None => default_schedule(u, p, rule),
        };
        probes.push(match density_probe(u, k, p, &sched, rule) {
            Ok(d) if d.singular_flag => ProbeOutcome::Singular(d),
            Ok(d) => ProbeOutcome::Regular(d),
            Err(Error::ScheduleExhausted { radii, ratios }) => ProbeOutcome::Inconclusive {
                point: p.clone(),
                error: "schedule exhausted".into(),
                radii,
                ratios,
            },
            Err(e) => ProbeOutcome::Inconclusive { point: p.clone(), error: e.to_string(), radii: sched, ratios: vec![] },
        });
    }
    let count = |f: fn(&ProbeOutcome) -> bool| probes.iter().filter(|p| f(p)).count();
    let max_gap = probes
        .iter()
        .filter_map(|p| match p {
            ProbeOutcome::Regular(d) => Some(d.relative_gap),
            _ => None,
        })
        .fold(0.0, f64::max);
    Ok(DecompositionReport {
        regular: count(|p| matches!(p, ProbeOutcome::Regular(_))),
        singular: count(|p| matches!(p, ProbeOutcome::Singular(_))),
        inconclusive: count(|p| matches!(p, ProbeOutcome::Inconclusive { .. })),
        max_gap,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, FunctionSpec};
    use crate::linalg::SymMatrix;

    fn cube(n: usize, m: usize, spec: &FunctionSpec) -> GridFunction {
        sample(spec, &vec![-1.0; n], 2.0 / (m - 1) as f64, &vec![m; n]).unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
        assert_eq!(unit_ball_volume(1), 2.0);
    }

    #[test]
    fn identity_hessian_mass_is_ball_area() {
        let u = cube(2, 129, &FunctionSpec::quadratic(&SymMatrix::identity(2).unwrap(), &[0.0; 2], 0.0));
        let m = hessian_measure_ball(&u, 2, &[0.0, 0.0], &[0.25, 0.5], &[0.05, 0.1]).unwrap();
        let count = u.ball_indices(&[0.0, 0.0], 0.5).len() as f64;
        for row in &m.masses {
            assert!((row[1] - count * u.cell_volume()).abs() < 1e-9);
            assert!((row[1] - std::f64::consts::PI / 4.0).abs() < 0.01);
            assert!(row[0] <= row[1]);
        }
        assert!(m.cauchy_differences[0][1] < 1e-9);
    }

    #[test]
    fn measure_errors() {
        let u = cube(2, 65, &FunctionSpec::quadratic(&SymMatrix::identity(2).unwrap(), &[0.0; 2], 0.0));
        assert!(matches!(
            hessian_measure_ball(&u, 2, &[0.0, 0.0], &[0.9], &[0.1]),
            Err(Error::BallOutOfDomain { .. })
        ));
        let neg = cube(2, 65, &FunctionSpec::quadratic(&SymMatrix::diagonal(&[1.0, -1.0]).unwrap(), &[0.0; 2], 0.0));
        assert!(matches!(hessian_measure_ball(&neg, 2, &[0.0, 0.0], &[0.3], &[0.1]), Err(Error::NotKConvex(_))));
    }

    #[test]
    fn union_of_disjoint_balls_adds() {
        let u = cube(2, 129, &FunctionSpec::radial(1.0, 1.5));
        let a = (vec![-0.3, 0.0], 0.2);
        let b = (vec![0.3, 0.1], 0.2);
        let eps = 0.1;
        let ma = union_mass(&u, 2, eps, &[a.clone()]).unwrap();
        let mb = union_mass(&u, 2, eps, &[b.clone()]).unwrap();
        let mab = union_mass(&u, 2, eps, &[a, b]).unwrap();
        assert!((mab - ma - mb).abs() < 1e-10);
    }

    #[test]
    fn quadratic_density() {
        let u = cube(2, 257, &FunctionSpec::quadratic(&SymMatrix::diagonal(&[1.0, 2.0]).unwrap(), &[0.0; 2], 0.0));
        let p = [0.2, -0.1];
        let d = density_probe(&u, 2, &p, &default_schedule(&u, &p, EpsRule::default()), EpsRule::default()).unwrap();
        assert!(!d.singular_flag);
        assert!((d.f_k_value - 2.0).abs() < 1e-9);
        assert!(d.relative_gap < 0.05, "{d:?}");
    }

    #[test]
    fn schedule_validation() {
        let u = cube(2, 65, &FunctionSpec::radial(1.0, 2.0));
        assert!(density_probe(&u, 2, &[0.0, 0.0], &[0.4], EpsRule::default()).is_err());
        assert!(density_probe(&u, 2, &[0.0, 0.0], &[0.2, 0.4], EpsRule::default()).is_err());
    }
}
