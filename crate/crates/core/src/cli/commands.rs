use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::RunConfig;
use super::Outcome;
use crate::cones::{self, in_gamma_k, in_gamma_star_exact, in_gamma_star_numeric, ConeSpec};
use crate::error::{Error, Result};
use crate::grid::{mollify, GridFunction};
use crate::json::format_f64;
use crate::kconvexity::{self, combine, spectral_test, viscosity_test, weak_integral_test, Verdict};
use crate::linalg::{eigenvalues, eigenvalues_default, k_trace, k_trace_minors, SymMatrix, MAX_MINOR_DIM};
use crate::measures::{decomposition_report, hessian_measure_ball, EpsRule};
use crate::regularity::{bv_check, gradient_lq_check, holder_check, taylor_remainder_scan};

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn joined(v: &[f64]) -> String {
    v.iter().map(|x| format_f64(*x)).collect::<Vec<_>>().join(";")
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::ConfigInvalid(format!("params.{field}: {msg}"))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(invalid("k", format!("{k} outside 1..={n}")));
    }
    Ok(())
}

fn maybe_mollify(u: GridFunction, eps: Option<f64>) -> Result<GridFunction> {
    match eps {
        Some(e) => mollify(&u, e).map_err(|err| invalid("mollify_eps", err)),
        None => Ok(u),
    }
}

// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EigParams {
    matrices: Vec<SymMatrix>,
    #[serde(default)]
    tol: Option<f64>,
}

pub fn eig(cfg: &RunConfig) -> Result<Outcome> {
    let p: EigParams = cfg.params()?;
    let mut spectra = Vec::new();
    let mut rows = Vec::new();
    for (i, m) in p.matrices.iter().enumerate() {
        let s = match p.tol {
            Some(t) => eigenvalues(m, t)?,
            None => eigenvalues_default(m)?,
        };
        for (j, v) in s.values().iter().enumerate() {
            rows.push(vec![i.to_string(), j.to_string(), format_f64(*v)]);
        }
        spectra.push(json!({ "values": s.values(), "trace": m.trace(), "frobenius_norm": m.frobenius_norm() }));
    }
    Ok(Outcome::new(json!({ "spectra": spectra }), true, &["matrix", "index", "eigenvalue"], rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmParams {
    matrices: Vec<SymMatrix>,
    #[serde(default)]
    k: Option<usize>,
}

#[derive(Serialize)]
struct SymmRow {
    matrix: usize,
    k: usize,
    s_k: f64,
    k_trace_minors: Option<f64>,
}

pub fn symm(cfg: &RunConfig) -> Result<Outcome> {
    let p: SymmParams = cfg.params()?;
    let mut table = Vec::new();
    for (i, m) in p.matrices.iter().enumerate() {
        let n = m.dim();
        let kmax = p.k.unwrap_or(n);
        check_k(kmax, n)?;
        for k in 1..=kmax {
            let minors = if n <= MAX_MINOR_DIM { Some(k_trace_minors(m, k)?) } else { None };
            table.push(SymmRow { matrix: i, k, s_k: k_trace(m, k)?, k_trace_minors: minors });
        }
    }
    let rows = table
        .iter()
        .map(|r| {
            vec![r.matrix.to_string(), r.k.to_string(), format_f64(r.s_k), r.k_trace_minors.map(format_f64).unwrap_or_default()]
        })
        .collect();
    Ok(Outcome::new(json!({ "rows": to_value(&table) }), true, &["matrix", "k", "s_k", "k_trace_minors"], rows))
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum DualMethod {
    Exact,
    Numeric,
}

fn default_dual_method() -> DualMethod {
    DualMethod::Exact
}
fn default_cone_budget() -> usize {
    cones::DEFAULT_BUDGET
}
fn default_cone_tol() -> f64 {
    cones::DEFAULT_TOL
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeParams {
    lambdas: Vec<Vec<f64>>,
    k: usize,
    #[serde(default)]
    dual: bool,
    #[serde(default = "default_dual_method")]
    method: DualMethod,
    #[serde(default = "default_cone_budget")]
    budget: usize,
    #[serde(default = "default_cone_tol")]
    tol: f64,
}

pub fn cone(cfg: &RunConfig) -> Result<Outcome> {
    let p: ConeParams = cfg.params()?;
    let mut out = Vec::new();
    let mut rows = Vec::new();
    let mut passed = true;
    let cone_name = if p.dual { "gamma_k_star" } else { "gamma_k" };
    for lam in &p.lambdas {
        let spec = ConeSpec::new(lam.len(), p.k).map_err(|e| invalid("k", e))?;
        let s = crate::linalg::Spectrum::new(lam.clone()).map_err(|e| invalid("lambdas", e))?;
        let v = match (p.dual, p.method) {
            (false, _) => in_gamma_k(&s, spec, p.tol)?,
            (true, DualMethod::Exact) => in_gamma_star_exact(&s, spec, p.tol)?,
            (true, DualMethod::Numeric) => in_gamma_star_numeric(&s, spec, p.budget, p.tol, cfg.seed)?,
        };
        passed &= v.member;
        rows.push(vec![joined(lam), p.k.to_string(), cone_name.to_string(), v.member.to_string(), format_f64(v.margin)]);
        out.push(json!({ "lambda": lam, "k": p.k, "cone": cone_name, "verdict": to_value(&v) }));
    }
    Ok(Outcome::new(json!({ "verdicts": out }), passed, &["lambda", "k", "cone", "member", "margin"], rows))
}

fn default_check_tol() -> f64 {
    kconvexity::DEFAULT_TOL
}
fn default_viscosity_budget() -> usize {
    2000
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckParams {
    k: usize,
    #[serde(default = "default_check_tol")]
    tol: f64,
    #[serde(default)]
    mollify_eps: Option<f64>,
    #[serde(default)]
    weak_centers: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    weak_radius: Option<f64>,
    #[serde(default = "default_viscosity_budget")]
    viscosity_budget: usize,
}

/// Grid centre and a quarter of the shortest side.
fn default_bump(u: &GridFunction) -> (Vec<f64>, f64) {
    let up = u.upper();
    let c = u.origin().iter().zip(&up).map(|(a, b)| 0.5 * (a + b)).collect();
    let side = u.origin().iter().zip(&up).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    (c, 0.25 * side)
}

pub fn check(cfg: &RunConfig) -> Result<Outcome> {
    let p: CheckParams = cfg.params()?;
    let u = cfg.grid_function()?;
    check_k(p.k, u.n())?;
    let u = maybe_mollify(u, p.mollify_eps)?;
    let (c0, r0) = default_bump(&u);
    let centers = p.weak_centers.clone().unwrap_or_else(|| vec![c0]);
    let radius = p.weak_radius.unwrap_or(r0);
    let s = spectral_test(&u, p.k, p.tol)?;
    let w = weak_integral_test(&u, p.k, &centers, radius, p.tol, cfg.seed)?;
    let v = viscosity_test(&u, p.k, p.viscosity_budget, cfg.seed, p.tol)?;
    let combined = combine(&[&s, &w, &v]);
    let rows = [("spectral", &s), ("weak_integral", &w), ("viscosity", &v)]
        .iter()
        .map(|(name, r)| {
            vec![
                name.to_string(),
                to_value(&r.verdict).as_str().unwrap_or_default().to_string(),
                format_f64(r.worst_margin),
                r.evidence_only.to_string(),
            ]
        })
        .collect();
    let report = json!({
        "spectral": to_value(&s),
        "weak_integral": to_value(&w),
        "viscosity": to_value(&v),
        "combined": to_value(&combined),
    });
    Ok(Outcome::new(report, combined == Verdict::Pass, &["method", "verdict", "worst_margin", "evidence_only"], rows))
}

fn default_eps_fraction() -> f64 {
    EpsRule::default().fraction
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureParams {
    k: usize,
    center: Vec<f64>,
    radii: Vec<f64>,
    eps_levels: Vec<f64>,
    #[serde(default)]
    probes: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    schedule: Option<Vec<f64>>,
    #[serde(default = "default_eps_fraction")]
    eps_fraction: f64,
}

pub fn measure(cfg: &RunConfig) -> Result<Outcome> {
    let p: MeasureParams = cfg.params()?;
    let u = cfg.grid_function()?;
    check_k(p.k, u.n())?;
    if !(p.eps_fraction > 0.0) {
        return Err(invalid("eps_fraction", "must be positive"));
    }
    let est = hessian_measure_ball(&u, p.k, &p.center, &p.radii, &p.eps_levels)?;
    let decomposition = match &p.probes {
        Some(points) => {
            let rule = EpsRule { fraction: p.eps_fraction };
            Some(decomposition_report(&u, p.k, points, p.schedule.as_deref(), rule)?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for (e, row) in est.eps_levels.iter().zip(&est.masses) {
        for (r, m) in est.radii.iter().zip(row) {
            rows.push(vec![format_f64(*e), format_f64(*r), format_f64(*m)]);
        }
    }
    let report = json!({ "estimate": to_value(&est), "decomposition": to_value(&decomposition) });
    Ok(Outcome::new(report, true, &["eps", "r", "mass"], rows))
}

fn default_field_budget() -> usize {
    16
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegularityParams {
    k: usize,
    inner_margin: f64,
    #[serde(default)]
    outer_margin: Option<f64>,
    #[serde(default)]
    q: Option<f64>,
    #[serde(default = "default_field_budget")]
    field_budget: usize,
    #[serde(default)]
    mollify_eps: Option<f64>,
}

pub fn regularity(cfg: &RunConfig) -> Result<Outcome> {
    let p: RegularityParams = cfg.params()?;
    let u = maybe_mollify(cfg.grid_function()?, p.mollify_eps)?;
    let n = u.n();
    check_k(p.k, n)?;
    let q = p.q.unwrap_or(if p.k == n { 3.0 } else { (0.5 * (n * p.k) as f64 / (n - p.k) as f64).min(3.0) });
    let outer = p.outer_margin.unwrap_or(0.5 * p.inner_margin);
    let holder = holder_check(&u, p.k, p.inner_margin)?;
    let lq = gradient_lq_check(&u, p.k, q, p.inner_margin, outer)?;
    let bv = bv_check(&u, p.inner_margin, p.field_budget, cfg.seed)?;
    let reports = [("holder", &holder), ("gradient_lq", &lq), ("bv", &bv)];
    let passed = reports.iter().all(|(_, r)| r.measured_constant.is_finite());
    let rows = reports
        .iter()
        .map(|(name, r)| vec![name.to_string(), format_f64(r.lhs), format_f64(r.rhs_functional), format_f64(r.measured_constant)])
        .collect();
    let report = json!({ "q": q, "holder": to_value(&holder), "gradient_lq": to_value(&lq), "bv": to_value(&bv) });
    Ok(Outcome::new(report, passed, &["check", "lhs", "rhs_functional", "measured_constant"], rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaylorParams {
    k: usize,
    points: Vec<Vec<f64>>,
    radii: Vec<f64>,
    #[serde(default)]
    mollify_eps: Option<f64>,
}

pub fn taylor(cfg: &RunConfig) -> Result<Outcome> {
    let p: TaylorParams = cfg.params()?;
    let u = maybe_mollify(cfg.grid_function()?, p.mollify_eps)?;
    check_k(p.k, u.n())?;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for x in &p.points {
        let rep = taylor_remainder_scan(&u, p.k, x, &p.radii)?;
        for i in 0..rep.radii.len() {
            rows.push(vec![joined(&rep.point), format_f64(rep.radii[i]), format_f64(rep.mean_ratio[i]), format_f64(rep.sup_ratio[i])]);
        }
        reports.push(rep);
    }
    let passed = reports.iter().all(|r| r.decays);
    Ok(Outcome::new(json!({ "scans": to_value(&reports) }), passed, &["point", "r", "mean_ratio", "sup_ratio"], rows))
}
