//! Reduced end-to-end run of the acceptance scenarios, sized to finish in a
//! few seconds.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::RunConfig;
use super::Outcome;
use crate::cones::{in_gamma_star_exact, pair_matrix, pair_t_bound, test_matrix_family, ConeSpec};
use crate::error::Result;
use crate::grid::{mollify, sample, FunctionSpec, GridFunction};
use crate::json::format_f64;
use crate::kconvexity::{combine, spectral_test, viscosity_test, weak_integral_test, Verdict, DEFAULT_TOL};
use crate::khessian::radial_kconvexity_threshold;
use crate::linalg::{eigenvalues_default, k_trace, k_trace_minors, SymMatrix};
use crate::measures::{default_schedule, density_probe, EpsRule};
use crate::regularity::taylor_remainder_scan;
use crate::rng;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemoParams {
    #[serde(default)]
    matrices: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Scenario {
    name: &'static str,
    passed: bool,
    value: f64,
    detail: serde_json::Value,
}

fn algebra(seed: u64, count: usize) -> Result<Scenario> {
    let mut r = rng::stream(seed, rng::tag("demo-algebra"));
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let n = r.random_range(1..=6);
        let mut m = SymMatrix::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                m.set(i, j, r.random_range(-1.0..=1.0));
            }
        }
        for k in 1..=n {
            let a = k_trace(&m, k)?;
            let b = k_trace_minors(&m, k)?;
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    Ok(Scenario { name: "algebra", passed: worst <= 1e-9, value: worst, detail: json!({ "matrices": count }) })
}

fn constructions() -> Result<Scenario> {
    let mut worst_spec = 0.0_f64;
    let mut all_members = true;
    let mut worst_boundary = 0.0_f64;
    for n in [2usize, 3, 4, 6] {
        let tb = pair_t_bound(n);
        let t = 0.5 * tb;
        let cone = ConeSpec::new(n, 2)?;
        for m in test_matrix_family(n, t)? {
            all_members &= in_gamma_star_exact(&eigenvalues_default(&m)?, cone, 1e-12)?.member;
        }
        let s = eigenvalues_default(&pair_matrix(n, 0, n - 1, t)?)?;
        let mut want = vec![1.0; n];
        want[0] = 1.0 + t;
        want[n - 1] = 1.0 - t;
        worst_spec = s.values().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst_spec, f64::max);
        let edge = eigenvalues_default(&pair_matrix(n, 0, n - 1, tb)?)?;
        worst_boundary = worst_boundary.max(in_gamma_star_exact(&edge, cone, 1e-12)?.margin.abs());
    }
    Ok(Scenario {
        name: "constructions",
        passed: worst_spec <= 1e-12 && all_members && worst_boundary <= 1e-12,
        value: worst_spec.max(worst_boundary),
        detail: json!({ "family_in_dual_cone": all_members, "boundary_margin": worst_boundary }),
    })
}

fn threshold() -> Result<Scenario> {
    let mut worst = 0.0_f64;
    let mut table = Vec::new();
    for (n, k) in [(2, 2), (3, 2), (3, 3), (4, 3)] {
        let rep = radial_kconvexity_threshold(n, k)?;
        worst = worst.max((rep.measured - rep.beta_star).abs());
        table.push(json!({ "n": n, "k": k, "beta_star": rep.beta_star, "measured": rep.measured }));
    }
    Ok(Scenario { name: "threshold", passed: worst <= 1e-3 + 1e-12, value: worst, detail: json!(table) })
}

fn cube(n: usize, m: usize, spec: &FunctionSpec) -> Result<GridFunction> {
    sample(spec, &vec![-1.0; n], 2.0 / (m - 1) as f64, &vec![m; n])
}

fn check(seed: u64) -> Result<Scenario> {
    let mut verdicts = Vec::new();
    let mut consistent = true;
    for beta in [0.8, 1.5] {
        let u = mollify(&cube(2, 65, &FunctionSpec::radial(1.0, beta))?, 4.0 / 32.0)?;
        let s = spectral_test(&u, 2, DEFAULT_TOL)?;
        let w = weak_integral_test(&u, 2, &[vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, -0.5]], 0.2, DEFAULT_TOL, seed)?;
        let v = viscosity_test(&u, 2, 200, seed, DEFAULT_TOL)?;
        let c = combine(&[&s, &w, &v]);
        let expect = if beta >= 1.0 { Verdict::Pass } else { Verdict::Fail };
        consistent &= s.verdict == expect && c != Verdict::Inconclusive;
        verdicts.push(json!({ "beta": beta, "spectral": s.verdict, "weak_integral": w.verdict, "viscosity": v.verdict, "combined": c }));
    }
    Ok(Scenario { name: "check", passed: consistent, value: 0.0, detail: json!(verdicts) })
}

fn density() -> Result<Scenario> {
    let q = SymMatrix::diagonal(&[1.0, 2.0])?;
    let u = cube(2, 257, &FunctionSpec::quadratic(&q, &[0.0; 2], 0.0))?;
    let p = [0.2, -0.1];
    let rule = EpsRule::default();
    let d = density_probe(&u, 2, &p, &default_schedule(&u, &p, rule), rule)?;
    Ok(Scenario {
        name: "density",
        passed: d.relative_gap <= 0.05 && !d.singular_flag,
        value: d.relative_gap,
        detail: json!({ "h_estimate": d.h_estimate, "f_k_value": d.f_k_value }),
    })
}

fn taylor() -> Result<Scenario> {
    let h = 1.0 / 1024.0;
    let m = 2049;
    let vals = (0..m).map(|i| (-1.0 + i as f64 * h).powi(3)).collect();
    let u = GridFunction::new(vec![-1.0], h, vec![m], vals)?;
    let rep = taylor_remainder_scan(&u, 1, &[0.0], &[0.5, 0.25, 0.125])?;
    let worst = rep.radii.iter().zip(&rep.sup_ratio).map(|(r, s)| (s / r - 0.125).abs()).fold(0.0, f64::max);
    Ok(Scenario { name: "taylor", passed: worst <= 1e-4 && rep.decays, value: worst, detail: json!({ "sup_ratio": rep.sup_ratio }) })
}

pub fn demo(cfg: &RunConfig) -> Result<Outcome> {
    let p: DemoParams = cfg.params()?;
    let scenarios = vec![
        algebra(cfg.seed, p.matrices.unwrap_or(200))?,
        constructions()?,
        threshold()?,
        check(cfg.seed)?,
        density()?,
        taylor()?,
    ];
    let passed = scenarios.iter().all(|s| s.passed);
    let rows = scenarios.iter().map(|s| vec![s.name.to_string(), s.passed.to_string(), format_f64(s.value)]).collect();
    let report = json!({ "scenarios": serde_json::to_value(&scenarios).expect("scenarios serialize") });
    Ok(Outcome::new(report, passed, &["scenario", "passed", "value"], rows))
}
