//! Acceptance criteria AC-1 through AC-9, one PASS/FAIL line each.
//!
//! Run with `cargo test --test acceptance`. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use risk_submod::casestudies::{
    coverage_generate, default_obstacles, mod_gamma, mod_generate, mod_scenarios, random_obstacles, CoverageTable,
};
use risk_submod::experiments::{alpha_sweep, certificate_curvature, default_alpha_grid, ota_compare_runs, summarize, AlphaRun, OtaCompareConfig};
use risk_submod::greedy::brute_force_max_h;
use risk_submod::risk::{auxiliary_h, estimate_cvar, estimate_var, required_samples, RiskParams, ScenarioTable};
use risk_submod::rng::{stream, Domain};
use risk_submod::sets::{ElementId, ElementSet};
use risk_submod::sga::{certificate, sga_solve};
use risk_submod::streetnet::OtaMode;

const EXACT_TOL: f64 = 1e-12;
const BOUND_TOL: f64 = 1e-9;
const ALPHA_SLACK: f64 = 0.02;
const TRADEOFF_MARGIN: f64 = 0.01;
const DKW_EXTRA: f64 = 0.05;
const OTA_TIE_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(limit: Duration, started: Instant, mut o: Outcome) -> Outcome {
    let took = started.elapsed();
    if took > limit {
        o.pass = false;
        o.detail.push_str(&format!("; runtime {took:.1?} over {limit:?}"));
    } else {
        o.detail.push_str(&format!(" in {took:.1?}"));
    }
    o
}

/// Ĥ recomputed directly from scenario values.
fn h_oracle(values: &[f64], probs: Option<&[f64]>, tau: f64, alpha: f64) -> f64 {
    let n = values.len() as f64;
    let short: f64 = values
        .iter()
        .enumerate()
        .map(|(k, &f)| probs.map_or(1.0 / n, |p| p[k]) * (tau - f).max(0.0))
        .sum();
    tau - short / alpha
}

/// EXACT_TOL relative to the largest magnitude involved, and never below EXACT_TOL.
fn tol(terms: &[f64]) -> f64 {
    EXACT_TOL * terms.iter().fold(1.0f64, |m, t| m.max(t.abs()))
}

fn subset(mask: usize, n: usize) -> ElementSet {
    (0..n).filter(|i| mask >> i & 1 == 1).map(ElementId).collect()
}

/// Count invariant violations on every subset of a small table.
fn invariant_violations<T: ScenarioTable>(table: &T, gamma: f64) -> (usize, usize) {
    let n = table.ground_size();
    let vals: Vec<Vec<f64>> = (0..1usize << n).map(|m| table.values(&subset(m, n))).collect();
    let probs = table.probabilities();
    let mut bad = 0;
    let mut checks = 0;
    for alpha in [0.1, 0.3, 0.7, 1.0] {
        let steps = 16;
        let taus: Vec<f64> = (0..=steps).map(|i| gamma * i as f64 / steps as f64).collect();
        for &tau in &taus {
            let h: Vec<f64> = vals.iter().map(|v| h_oracle(v, probs, tau, alpha)).collect();
            // library agrees with the oracle
            for m in [0, (1 << n) - 1, 1] {
                checks += 1;
                if (auxiliary_h(&subset(m, n), tau, table, alpha) - h[m]).abs() > tol(&[h[m]]) {
                    bad += 1;
                }
            }
            checks += 1;
            if (h[0] - tau * (1.0 - 1.0 / alpha)).abs() > tol(&[h[0]]) {
                bad += 1;
            }
            for m in 0..1usize << n {
                for e in (0..n).filter(|e| m >> e & 1 == 0) {
                    checks += 1;
                    if h[m | 1 << e] < h[m] - tol(&[h[m]]) {
                        bad += 1;
                    }
                    for f in (e + 1..n).filter(|f| m >> f & 1 == 0) {
                        checks += 1;
                        if h[m | 1 << e] + h[m | 1 << f] < h[m | 1 << e | 1 << f] + h[m] - tol(&[h[m], h[m | 1 << e | 1 << f]]) {
                            bad += 1;
                        }
                    }
                }
            }
        }
        for v in &vals {
            let h: Vec<f64> = taus.iter().map(|&t| h_oracle(v, probs, t, alpha)).collect();
            let d = taus[1] - taus[0];
            for i in 0..steps {
                let slope = (h[i + 1] - h[i]) / d;
                let slack = tol(&[h[i], h[i + 1]]) / d;
                checks += 1;
                if slope < 1.0 - 1.0 / alpha - slack || slope > 1.0 + slack {
                    bad += 1;
                }
                if i + 1 < steps {
                    checks += 1;
                    if h[i + 2] - 2.0 * h[i + 1] + h[i] > tol(&[h[i], h[i + 1], h[i + 2]]) {
                        bad += 1;
                    }
                }
            }
        }
    }
    (bad, checks)
}

fn ac1() -> Outcome {
    let started = Instant::now();
    let mut bad = 0;
    let mut checks = 0;
    for i in 0..50u64 {
        let nd = 1 + (i % 2) as usize;
        let nv = nd + 1 + (i % 3) as usize;
        let inst = mod_generate(nd, nv, 100 + i).expect("small instance");
        let table = mod_scenarios(&inst, 20);
        let (b, c) = invariant_violations(&table, mod_gamma(&inst));
        bad += b;
        checks += c;
    }
    for i in 0..50u64 {
        let obstacles = random_obstacles(10, 10, 2, 200 + i);
        let inst = coverage_generate(10, 10, &obstacles, 4 + (i % 4) as usize, 2, 200 + i).expect("small instance");
        let table = CoverageTable::sampled(&inst, 20);
        let (b, c) = invariant_violations(&table, inst.gamma());
        bad += b;
        checks += c;
    }
    within(
        Duration::from_secs(10),
        started,
        outcome(bad == 0, format!("{bad} violations in {checks} checks over 100 instances")),
    )
}

fn ac2() -> Outcome {
    let v = [1.0, 2.0, 3.0, 4.0, 5.0];
    // α → (VaR, CVaR) enumerated by hand on the lower tail
    let expected = [(0.2, 1.0, 1.0), (0.4, 2.0, 1.5), (0.6, 3.0, 2.0), (0.8, 4.0, 2.5), (1.0, 5.0, 3.0)];
    let mut bad = Vec::new();
    for (a, var, cvar) in expected {
        let got_var = estimate_var(&v, a).unwrap();
        let got = estimate_cvar(&v, a).unwrap();
        if got_var != var || got.var != var || got.cvar != cvar {
            bad.push(format!("α={a}: got ({got_var}, {})", got.cvar));
        }
    }
    let mut rng = stream(2, Domain::Experiment, 0, 0);
    let samples: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() * 100.0).collect();
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let gap = (estimate_cvar(&samples, 1.0).unwrap().cvar - mean).abs();
    if gap > EXACT_TOL {
        bad.push(format!("CVaR at α=1 differs from mean by {gap:e}"));
    }
    outcome(bad.is_empty(), if bad.is_empty() { "5 hand cases exact, CVaR at α=1 equals mean".into() } else { bad.join("; ") })
}

fn ac3(evals: &mut Vec<(u64, u64)>) -> Outcome {
    let started = Instant::now();
    let mut violations = Vec::new();
    let mut runs = 0;
    for i in 0..20u64 {
        let obstacles = random_obstacles(10, 10, 2, 300 + i);
        let n = 5 + (i % 4) as usize;
        let budget = 2 + (i % 2) as usize;
        let inst = coverage_generate(10, 10, &obstacles, n, budget, 300 + i).expect("small instance");
        let table = CoverageTable::exact(&inst).expect("enumerable");
        let ground = inst.ground();
        let matroid = inst.matroid();
        let (k_f, _) = certificate_curvature(&table, &ground).unwrap();
        for alpha in [0.1, 0.5, 1.0] {
            let p = RiskParams::new(alpha, inst.gamma(), 1.0).unwrap();
            let res = sga_solve(&table, &matroid, &ground, &p).unwrap();
            evals.push((res.eval_count * table.n_scenarios() as u64, risk_submod::sga::eval_count_bound(&ground, &p, table.n_scenarios() as u64)));
            let best = brute_force_max_h(|s, t| auxiliary_h(s, t, &table, alpha), &matroid, &ground, &p.tau_grid()).unwrap();
            let gamma = p.gamma_cap;
            let lower = (best.value - p.delta_step) / (1.0 + k_f) - k_f / (1.0 + k_f) * gamma * (1.0 / alpha - 1.0);
            let cert = certificate(&res, k_f, &p).unwrap();
            runs += 1;
            if res.h_value < lower - BOUND_TOL || !cert.admits(best.value) {
                violations.push(format!("instance {i} α={alpha}: {} < {lower}", res.h_value));
            }
        }
    }
    within(
        Duration::from_secs(60),
        started,
        outcome(
            violations.is_empty(),
            if violations.is_empty() { format!("0 violations in {runs} runs") } else { violations.join("; ") },
        ),
    )
}

struct Studies {
    mod_runs: Vec<AlphaRun>,
    cov_runs: Vec<AlphaRun>,
    n_s: u64,
}

fn studies(evals: &mut Vec<(u64, u64)>) -> (Studies, Duration) {
    let started = Instant::now();
    let alphas = default_alpha_grid();
    let n_s = 1000;

    let inst = mod_generate(4, 6, 1).unwrap();
    let table = mod_scenarios(&inst, n_s);
    let ground = inst.ground();
    let (k, _) = certificate_curvature(&table, &ground).unwrap();
    let mod_runs = alpha_sweep(&table, &inst.matroid(), &ground, &alphas, mod_gamma(&inst), 1.0, None, k).unwrap();

    let cov = coverage_generate(20, 20, &default_obstacles(), 8, 4, 1).unwrap();
    let ctable = CoverageTable::sampled(&cov, n_s);
    let cground = cov.ground();
    let (ck, _) = certificate_curvature(&ctable, &cground).unwrap();
    let cov_runs = alpha_sweep(&ctable, &cov.matroid(), &cground, &alphas, cov.gamma(), 1.0, None, ck).unwrap();

    for r in mod_runs.iter().chain(&cov_runs) {
        evals.push((r.result.eval_count * n_s as u64, r.eval_bound));
    }
    (Studies { mod_runs, cov_runs, n_s: n_s as u64 }, started.elapsed())
}

fn nondecreasing(runs: &[AlphaRun]) -> Result<(), String> {
    for w in runs.windows(2) {
        let (a, b) = (w[0].result.h_value, w[1].result.h_value);
        if b < a - ALPHA_SLACK * a.abs() {
            return Err(format!("H drops from {a} at α={} to {b} at α={}", w[0].alpha, w[1].alpha));
        }
    }
    Ok(())
}

fn ac4(s: &Studies, took: Duration) -> Outcome {
    let errs: Vec<String> = [("assignment", &s.mod_runs), ("coverage", &s.cov_runs)]
        .into_iter()
        .filter_map(|(name, r)| nondecreasing(r).err().map(|e| format!("{name}: {e}")))
        .collect();
    let mut o = outcome(
        errs.is_empty(),
        if errs.is_empty() { format!("H nondecreasing over 11 α on both instances (n_s={})", s.n_s) } else { errs.join("; ") },
    );
    if took > Duration::from_secs(120) {
        o.pass = false;
        o.detail.push_str(&format!("; runtime {took:.1?} over 2m"));
    }
    o
}

fn ge_margin(a: f64, b: f64) -> bool {
    a >= b - TRADEOFF_MARGIN * b.abs()
}

fn ac5(s: &Studies) -> Outcome {
    let mut errs = Vec::new();
    let mut notes = Vec::new();
    for (name, runs) in [("assignment", &s.mod_runs), ("coverage", &s.cov_runs)] {
        let at = |a: f64| runs.iter().find(|r| (r.alpha - a).abs() < 1e-12).expect("α on grid");
        let (lo, hi) = (at(0.1), at(1.0));
        notes.push(format!(
            "{name}: mean {:.3} vs {:.3}, CVaR0.1 {:.3} vs {:.3}",
            hi.mean_utility, lo.mean_utility, lo.cvar_10, hi.cvar_10
        ));
        if !ge_margin(hi.mean_utility, lo.mean_utility) {
            errs.push(format!("{name}: α=1 mean below α=0.1 mean"));
        }
        if !ge_margin(lo.cvar_10, hi.cvar_10) {
            errs.push(format!("{name}: α=0.1 CVaR below α=1 CVaR"));
        }
    }
    outcome(errs.is_empty(), if errs.is_empty() { notes.join("; ") } else { errs.join("; ") })
}

fn ac6() -> Outcome {
    let (gamma, eps, delta) = (10.0, 0.5, 0.1);
    let n = required_samples(gamma, eps, delta).unwrap() as usize;
    let trials = 200;
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for alpha in [0.1, 0.5, 1.0] {
        let truth = gamma * alpha / 2.0;
        let mut misses = 0;
        for t in 0..trials {
            let mut rng = stream(6, Domain::Experiment, t, (alpha * 100.0) as u64);
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * gamma).collect();
            if (estimate_cvar(&v, alpha).unwrap().cvar - truth).abs() > eps {
                misses += 1;
            }
        }
        let freq = misses as f64 / trials as f64;
        worst = worst.max(freq);
        details.push(format!("α={alpha}: {freq:.3}"));
    }
    outcome(
        worst <= delta + DKW_EXTRA,
        format!("n={n}, deviation frequency {} (limit {})", details.join(", "), delta + DKW_EXTRA),
    )
}

fn ac7() -> Outcome {
    let started = Instant::now();
    let cfg = OtaCompareConfig {
        modes: vec![OtaMode::OtaStreet, OtaMode::Offline, OtaMode::AllStep],
        ..OtaCompareConfig::default()
    };
    let rows = match ota_compare_runs(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("simulation failed: {e}")),
    };
    let summary = summarize(&rows);
    let get = |scale, mode, gamma: Option<f64>| {
        summary
            .iter()
            .find(|(s, m, g, _, _)| *s == scale && *m == mode && *g == gamma)
            .map(|&(_, _, _, a, c)| (a, c))
            .expect("group present")
    };
    let mut errs = Vec::new();
    let mut notes = Vec::new();
    for &scale in &cfg.scales {
        let (ota_t, ota_c) = get(scale, OtaMode::OtaStreet, Some(0.5));
        let (off_t, _) = get(scale, OtaMode::Offline, None);
        let (_, all_c) = get(scale, OtaMode::AllStep, None);
        let counts: Vec<f64> = [0.3, 0.5, 0.7].iter().map(|&g| get(scale, OtaMode::OtaStreet, Some(g)).1).collect();
        let tag = format!("{}/{}", scale.vehicles, scale.demands);
        notes.push(format!(
            "{tag}: arrival {ota_t:.1}<={off_t:.1}, count {ota_c:.1}<=0.5*{all_c:.1}, γ counts {counts:?}"
        ));
        if ota_t > off_t * (1.0 + OTA_TIE_TOL) {
            errs.push(format!("{tag}: ota arrival {ota_t} > offline {off_t}"));
        }
        if ota_c > 0.5 * all_c {
            errs.push(format!("{tag}: ota count {ota_c} > half of all-step {all_c}"));
        }
        if counts.windows(2).any(|w| w[1] < w[0]) {
            errs.push(format!("{tag}: counts not nondecreasing in γ: {counts:?}"));
        }
    }
    within(
        Duration::from_secs(300),
        started,
        outcome(errs.is_empty(), if errs.is_empty() { notes.join("; ") } else { errs.join("; ") }),
    )
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn ac8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_risk-submod");
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let a = root.join("a");
    let gen = |args: &[&str], out: &Path| {
        Command::new(bin).args(args).arg("--out").arg(out).output().expect("binary runs")
    };
    // fixed inputs for solve
    let inputs = root.join("inputs");
    gen(&["gen-instance", "--kind", "mod", "--seed", "3"], &inputs.join("mod"));
    gen(&["gen-instance", "--kind", "coverage", "--seed", "3", "--candidates", "6", "--budget", "2"], &inputs.join("cov"));
    let mod_file = inputs.join("mod/instance.json");
    let cov_file = inputs.join("cov/instance.json");
    let mod_s = mod_file.to_str().unwrap();
    let cov_s = cov_file.to_str().unwrap();

    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("gen-instance-mod", vec!["gen-instance", "--kind", "mod", "--seed", "5"]),
        ("gen-instance-cov", vec!["gen-instance", "--kind", "coverage", "--seed", "5"]),
        ("gen-city", vec!["gen-city", "--seed", "7"]),
        ("mod-offline", vec!["mod-offline", "--seed", "1"]),
        ("mod-offline-dkw", vec!["mod-offline", "--seed", "2", "--eps", "1", "--delta-conf", "0.05", "--gamma-cap", "10", "--alpha-grid", "0.1,1"]),
        ("coverage", vec!["coverage", "--seed", "1", "--ns", "300"]),
        ("solve-mod", vec!["solve", mod_s, "--alpha", "0.2"]),
        ("solve-cov-exact", vec!["solve", cov_s, "--alpha", "0.5", "--exact"]),
        ("ota-compare", vec!["ota-compare", "--seeds", "2", "--scales", "3/2,6/4", "--logs"]),
    ];
    let mut errs = Vec::new();
    let mut compared = 0;
    for (name, args) in &commands {
        let first = a.join(name);
        let second = root.join("b").join(name);
        for out in [&first, &second] {
            let o = gen(args, out);
            if !o.status.success() {
                errs.push(format!("{name} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr).trim()));
            }
        }
        let (fa, fb) = (files_under(&first), files_under(&second));
        if fa.is_empty() || fa != fb {
            errs.push(format!("{name}: file lists differ or are empty"));
            continue;
        }
        for f in fa {
            compared += 1;
            if std::fs::read(first.join(&f)).unwrap() != std::fs::read(second.join(&f)).unwrap() {
                errs.push(format!("{name}: {} differs", f.display()));
            }
        }
    }
    outcome(
        errs.is_empty(),
        if errs.is_empty() { format!("{} commands, {compared} files byte-identical", commands.len()) } else { errs.join("; ") },
    )
}

fn ac9(evals: &[(u64, u64)]) -> Outcome {
    let over = evals.iter().filter(|(got, bound)| got > bound).count();
    let worst = evals.iter().map(|&(g, b)| g as f64 / b as f64).fold(0.0, f64::max);
    outcome(
        over == 0 && !evals.is_empty(),
        format!("{over} of {} runs over the bound, largest ratio {worst:.4}", evals.len()),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut evals = Vec::new();
    results.push(("AC-1", ac1()));
    results.push(("AC-2", ac2()));
    results.push(("AC-3", ac3(&mut evals)));
    let (s, took) = studies(&mut evals);
    results.push(("AC-4", ac4(&s, took)));
    results.push(("AC-5", ac5(&s)));
    results.push(("AC-6", ac6()));
    results.push(("AC-7", ac7()));
    results.push(("AC-8", ac8()));
    results.push(("AC-9", ac9(&evals)));

    let mut failed = 0;
    for (id, o) in &results {
        println!("{id} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
