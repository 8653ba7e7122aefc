//! Command-line front end for the study runners.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use risk_submod::experiments::{
    default_alpha_grid, gen_city, gen_instance, run_coverage, run_mod_offline, run_ota_compare, solve,
    CoverageStudyConfig, GenCityConfig, GenInstanceConfig, InstanceKind, ModStudyConfig, OtaCompareConfig, Scale,
    SolveConfig,
};
use risk_submod::streetnet::OtaMode;
use risk_submod::{Error, Result};

#[derive(Parser)]
#[command(name = "risk-submod", version, about = "Risk-averse submodular selection studies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Vehicle-to-demand assignment over an α grid.
    ModOffline(StudyArgs),
    /// Sensor placement with occlusions over an α grid.
    Coverage {
        #[command(flatten)]
        study: StudyArgs,
        /// Enumerate every working pattern instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// Replanning strategies on a street network.
    OtaCompare(CompareArgs),
    /// Solve one stored instance file.
    Solve(SolveArgs),
    /// Write a generated instance file.
    GenInstance(GenInstanceArgs),
    /// Write a synthetic street network file.
    GenCity(GenCityArgs),
}

#[derive(Args)]
struct Sampling {
    #[arg(long)]
    ns: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "delta-conf")]
    delta_conf: Option<f64>,
    #[arg(long = "gamma-cap")]
    gamma_cap: Option<f64>,
    #[arg(long = "delta-step", default_value_t = 1.0)]
    delta_step: f64,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated risk levels.
    #[arg(long = "alpha-grid", value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    /// Single risk level; overrides --alpha-grid.
    #[arg(long)]
    alpha: Option<f64>,
    /// Instance file instead of a generated instance.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long)]
    out: PathBuf,
}

impl StudyArgs {
    fn alphas(&self) -> Vec<f64> {
        match (self.alpha, &self.alpha_grid) {
            (Some(a), _) => vec![a],
            (None, Some(g)) => g.clone(),
            (None, None) => default_alpha_grid(),
        }
    }
}

#[derive(Args)]
struct CompareArgs {
    /// First seed; runs use `seed..seed+seeds`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long)]
    ns: Option<usize>,
    /// Simulation steps before a run is abandoned.
    #[arg(long = "max-steps")]
    max_steps: Option<usize>,
    /// Comma-separated trigger thresholds.
    #[arg(long = "gamma-trigger", value_delimiter = ',')]
    gamma_trigger: Option<Vec<f64>>,
    /// Comma-separated modes: ota-street, ota-general, offline, all-step.
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<String>>,
    /// Comma-separated `vehicles/demands` pairs.
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<String>>,
    /// Network file instead of the synthetic 5×5 city.
    #[arg(long)]
    city: Option<PathBuf>,
    /// Write one NDJSON event log per run.
    #[arg(long)]
    logs: bool,
    /// Write measured wall times to timing.csv.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenInstanceArgs {
    /// `mod` or `coverage`.
    #[arg(long, default_value = "mod")]
    kind: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    demands: usize,
    #[arg(long, default_value_t = 6)]
    vehicles: usize,
    #[arg(long, default_value_t = 8)]
    candidates: usize,
    #[arg(long, default_value_t = 4)]
    budget: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenCityArgs {
    #[arg(long, default_value_t = 5)]
    rows: usize,
    #[arg(long, default_value_t = 5)]
    cols: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    diagonal_prob: f64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_scale(s: &str) -> Result<Scale> {
    let bad = || Error::Config(format!("scale {s:?} is not of the form vehicles/demands"));
    let (v, d) = s.split_once('/').ok_or_else(bad)?;
    Ok(Scale::new(v.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::ModOffline(a) => {
            let cfg = ModStudyConfig {
                seed: a.seed,
                instance: a.instance.clone(),
                alphas: a.alphas(),
                n_s: a.sampling.ns,
                epsilon: a.sampling.eps,
                delta_conf: a.sampling.delta_conf,
                gamma_cap: a.sampling.gamma_cap,
                delta_step: a.sampling.delta_step,
                ..ModStudyConfig::default()
            };
            report(run_mod_offline(&cfg, &a.out)?);
        }
        Cmd::Coverage { study: a, exact } => {
            let cfg = CoverageStudyConfig {
                seed: a.seed,
                instance: a.instance.clone(),
                alphas: a.alphas(),
                n_s: a.sampling.ns,
                epsilon: a.sampling.eps,
                delta_conf: a.sampling.delta_conf,
                gamma_cap: a.sampling.gamma_cap,
                delta_step: a.sampling.delta_step,
                exact,
                ..CoverageStudyConfig::default()
            };
            report(run_coverage(&cfg, &a.out)?);
        }
        Cmd::OtaCompare(a) => {
            let mut cfg = OtaCompareConfig {
                city: a.city,
                seeds: (a.seed..a.seed + a.seeds).collect(),
                alpha: a.alpha,
                logs: a.logs,
                timing: a.timing,
                ..OtaCompareConfig::default()
            };
            if let Some(n) = a.ns {
                cfg.n_s = n;
            }
            if let Some(n) = a.max_steps {
                cfg.max_steps = n;
            }
            if let Some(g) = a.gamma_trigger {
                cfg.gammas = g;
            }
            if let Some(m) = a.mode {
                cfg.modes = m.iter().map(|s| s.parse::<OtaMode>()).collect::<Result<_>>()?;
            }
            if let Some(s) = a.scales {
                cfg.scales = s.iter().map(|s| parse_scale(s)).collect::<Result<_>>()?;
            }
            report(run_ota_compare(&cfg, &a.out)?);
        }
        Cmd::Solve(a) => {
            let cfg = SolveConfig {
                alpha: a.alpha,
                n_s: a.sampling.ns,
                epsilon: a.sampling.eps,
                delta_conf: a.sampling.delta_conf,
                gamma_cap: a.sampling.gamma_cap,
                delta_step: a.sampling.delta_step,
                exact: a.exact,
                ..SolveConfig::new(a.instance)
            };
            let sol = solve(&cfg, &a.out)?;
            println!(
                "selected {} tau {} h {} bound {}",
                sol.selected_labels, sol.result.tau_g, sol.result.h_value, sol.certificate.optimum_upper_bound
            );
        }
        Cmd::GenInstance(a) => {
            let kind = match a.kind.as_str() {
                "mod" => InstanceKind::Mod,
                "coverage" => InstanceKind::Coverage,
                other => return Err(Error::Config(format!("unknown instance kind {other:?}; expected mod or coverage"))),
            };
            let cfg = GenInstanceConfig {
                kind,
                seed: a.seed,
                n_demands: a.demands,
                n_vehicles: a.vehicles,
                n_candidates: a.candidates,
                budget: a.budget,
                ..GenInstanceConfig::default()
            };
            report(vec![gen_instance(&cfg, &a.out)?]);
        }
        Cmd::GenCity(a) => {
            let cfg = GenCityConfig {
                rows: a.rows,
                cols: a.cols,
                seed: a.seed,
                diagonal_prob: a.diagonal_prob,
            };
            report(vec![gen_city(&cfg, &a.out)?]);
        }
    }
    Ok(())
}

fn report(files: Vec<PathBuf>) {
    for f in files {
        println!("{}", f.display());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
