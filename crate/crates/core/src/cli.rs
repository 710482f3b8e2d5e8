//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime failures, 2 on configuration
//! errors (including bad arguments), 3 when a solver limit was hit; outputs
//! are still written in that case and their `status` column reads `timeout`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::demand::{SliceConfig, SliceSpec, SliceType};
use crate::error::{Error, Result};
use crate::eval::{
    builtin_scenario, emit_plans, emit_report, flow_violations, run_scenario, verify_by_simulation, RunOptions, Scenario, MIN_TRIALS,
};
use crate::planner::{calibrate, provision_with_models, OrderingPolicy, Variant};
use crate::probability::{find_gamma_s, psp_estimate, targets_for_gamma, StatMode};
use crate::solver::{import_solution, parse_lp, write_lp, write_solution, SolveStatus};

#[derive(Debug, Parser)]
#[command(name = "netslice", version, about = "Provision network slices under demand uncertainty")]
pub struct Cli {
    /// Worker threads (default: available cores); results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Provision a scenario and write report, per-slice, timing and plan CSVs.
    Provision {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Monte Carlo trials for the per-slice PSP check.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Compute the robustness margin of one slice and its PSP curve.
    Calibrate {
        /// Built-in slice type.
        #[arg(long, default_value = "type1", conflicts_with = "slice_file")]
        slice: SliceType,
        /// Slice description in TOML.
        #[arg(long)]
        slice_file: Option<PathBuf>,
        /// Required PSP (default: the slice's own).
        #[arg(long)]
        psp: Option<f64>,
        #[arg(long, default_value = "per_user")]
        stat_mode: StatMode,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Curve samples between 0 and twice the margin.
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Directory for `calibration.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the model of every solver call as an LP file with its solution.
    ExportLp {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "lp")]
        out: PathBuf,
    },
    /// Check plans by simulation, or check an imported solution against an LP file.
    Verify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// LP file to check `--solution` against instead of simulating.
        #[arg(long, requires = "solution")]
        lp: Option<PathBuf>,
        /// Solution file with `name value` lines.
        #[arg(long, requires = "lp")]
        solution: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Built-in scenario name or path to a TOML scenario file.
    #[arg(long, default_value = "single")]
    pub scenario: String,
    /// Variants to run (repeatable or comma separated; default: the scenario's).
    #[arg(long = "variant", value_delimiter = ',')]
    pub variants: Vec<Variant>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_impact: Option<f64>,
    #[arg(long)]
    pub ordering: Option<OrderingPolicy>,
    #[arg(long)]
    pub stat_mode: Option<StatMode>,
    /// Solver wall-clock limit per call, in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

impl ScenarioArgs {
    pub fn load(&self) -> Result<Scenario> {
        let mut s = match builtin_scenario(&self.scenario) {
            Some(s) => s,
            None if Path::new(&self.scenario).exists() => Scenario::load(Path::new(&self.scenario))?,
            None => return Err(Error::Config(format!("no built-in scenario or file named {}", self.scenario))),
        };
        if !self.variants.is_empty() {
            s.variants = self.variants.clone();
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(p) = self.max_impact {
            s.max_impact = p;
        }
        if let Some(o) = self.ordering {
            s.ordering = o;
        }
        if let Some(m) = self.stat_mode {
            s.stat_mode = m;
        }
        if let Some(t) = self.time_limit {
            s.solver.time_limit = t;
        }
        s.validate()?;
        Ok(s)
    }
}

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Failure = 1,
    Config = 2,
    Timeout = 3,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

pub fn exit_for(err: &Error) -> Exit {
    match err {
        Error::Config(_) | Error::Spec(_) | Error::Topology(_) | Error::LpParse { .. } | Error::NotPsd { .. } => Exit::Config,
        _ => Exit::Failure,
    }
}

fn status_exit(status: SolveStatus) -> Exit {
    if status == SolveStatus::Timeout {
        Exit::Timeout
    } else {
        Exit::Ok
    }
}

/// Parses `args` and runs the command, printing results to stdout and errors to stderr.
pub fn main_with_args<I, T>(args: I) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Config } else { Exit::Ok };
        }
    };
    match run(&cli) {
        Ok((text, code)) => {
            print!("{text}");
            if code == Exit::Timeout {
                eprintln!("solver limit reached; outputs with status `timeout` are not proven optimal");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

/// Runs a parsed command and returns its stdout text and exit code.
pub fn run(cli: &Cli) -> Result<(String, Exit)> {
    let opts = RunOptions { jobs: cli.jobs.unwrap_or_else(|| RunOptions::default().jobs) };
    match &cli.command {
        Command::Provision { scenario, out, trials } => cmd_provision(scenario, out, *trials, opts),
        Command::Calibrate { slice, slice_file, psp, stat_mode, seed, points, out } => {
            let spec = match slice_file {
                Some(path) => load_slice(path)?,
                None => slice.spec(),
            };
            cmd_calibrate(spec, *psp, *stat_mode, *seed, *points, out.as_deref())
        }
        Command::ExportLp { scenario, out } => cmd_export_lp(scenario, out),
        Command::Verify { scenario, trials, out, lp, solution } => match (lp, solution) {
            (Some(lp), Some(sol)) => cmd_verify_solution(lp, sol),
            _ => cmd_verify(scenario, *trials, out.as_deref(), opts),
        },
    }
}

fn load_slice(path: &Path) -> Result<SliceSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg: SliceConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    cfg.build()
}

pub fn cmd_provision(args: &ScenarioArgs, out: &Path, trials: Option<usize>, opts: RunOptions) -> Result<(String, Exit)> {
    let mut scenario = args.load()?;
    if let Some(t) = trials {
        scenario.trials = t;
    }
    let outcome = run_scenario(&scenario, opts)?;
    let mut files = emit_report(std::slice::from_ref(&outcome), out)?;
    files.push(emit_plans(&[(&scenario, &outcome)], out)?);

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<6} {:>3} {:>13} {:>10} {:>10} {:>9} {:>11} {:>6} {:>6}",
        "variant", "rep", "status", "earnings", "cost", "accepted", "max_impact", "nodes%", "links%"
    );
    for r in outcome.reports() {
        let _ = writeln!(
            text,
            "{:<6} {:>3} {:>13} {:>10.2} {:>10.2} {:>8.0}% {:>11.3e} {:>6.1} {:>6.1}",
            r.variant.name(),
            r.repetition,
            r.status,
            r.total_earnings,
            r.provisioning_cost,
            100.0 * r.acceptance_rate,
            r.max_impact_prob,
            r.node_usage_pct,
            r.link_usage_pct
        );
    }
    for f in files {
        let _ = writeln!(text, "wrote {}", f.display());
    }
    Ok((text, status_exit(outcome.worst_status())))
}

/// Margin and PSP curve of one slice; the curve spans `[0, 2γ]`.
pub fn cmd_calibrate(
    mut spec: SliceSpec,
    psp: Option<f64>,
    stat_mode: StatMode,
    seed: u64,
    points: usize,
    out: Option<&Path>,
) -> Result<(String, Exit)> {
    if let Some(p) = psp {
        spec = spec.with_required_psp(p)?;
    }
    if points < 2 {
        return Err(Error::Config("--points must be at least 2".into()));
    }
    let qmc = crate::probability::QmcConfig { seed, ..Default::default() };
    let cal = find_gamma_s(&spec, &qmc, stat_mode, 1e-3)?;
    let hi = if cal.gamma > 0.0 { 2.0 * cal.gamma } else { 1.0 };
    let mut csv_text = String::from("gamma,psp,error\n");
    for k in 0..points {
        let g = hi * k as f64 / (points - 1) as f64;
        let e = psp_estimate(&spec, &targets_for_gamma(&spec, g, stat_mode)?, &qmc)?;
        let _ = writeln!(csv_text, "{g},{},{}", e.value, e.error);
    }
    let mut text = format!(
        "slice {} required_psp {} gamma {:.6} psp {:.6} (+/- {:.1e}) evaluations {}\n",
        spec.id, spec.required_psp, cal.gamma, cal.psp, cal.psp_error, cal.evaluations
    );
    text.push_str(&csv_text);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("calibration.csv");
        std::fs::write(&path, &csv_text)?;
        let _ = writeln!(text, "wrote {}", path.display());
    }
    Ok((text, Exit::Ok))
}

/// One `.lp` and one `.sol` file per solver call of repetition 0 of each variant.
pub fn cmd_export_lp(args: &ScenarioArgs, out: &Path) -> Result<(String, Exit)> {
    let scenario = args.load()?;
    let graph = scenario.graph()?;
    let background = scenario.background_model(&graph)?;
    let specs = scenario.slice_specs()?;
    std::fs::create_dir_all(out)?;
    let mut text = String::new();
    let mut worst = Exit::Ok;
    let calibrated = calibrate(&specs, &scenario.variant_config(scenario.variants[0], 0))?;
    for &variant in &scenario.variants {
        let cfg = scenario.variant_config(variant, 0);
        let (plan, models) = provision_with_models(&specs, &calibrated, &graph, &background, &cfg)?;
        if status_exit(plan.status) == Exit::Timeout {
            worst = Exit::Timeout;
        }
        for step in models {
            let stem = format!("{}-{}-{}", scenario.name, variant.name(), step.label);
            let lp = out.join(format!("{stem}.lp"));
            let sol = out.join(format!("{stem}.sol"));
            std::fs::write(&lp, write_lp(&step.model))?;
            std::fs::write(&sol, write_solution(&step.model, &step.result))?;
            let _ = writeln!(text, "wrote {} (objective {:.6}, {})", lp.display(), step.result.objective, step.result.status.as_str());
        }
    }
    Ok((text, worst))
}

fn cmd_verify_solution(lp: &Path, sol: &Path) -> Result<(String, Exit)> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())));
    let model = parse_lp(&read(lp)?)?.to_model()?;
    let result = import_solution(&model, &read(sol)?)?;
    Ok((format!("feasible: {} objective {:.6}\n", lp.display(), result.objective), Exit::Ok))
}

#[derive(serde::Serialize)]
struct VerifyRow<'a> {
    variant: Variant,
    item: &'a str,
    kind: &'a str,
    expected: f64,
    estimate: f64,
    low: f64,
    high: f64,
}

/// Simulated PSP per accepted slice and worst overrun frequency per variant,
/// plus the exact flow-conservation check of every plan.
pub fn cmd_verify(args: &ScenarioArgs, trials: usize, out: Option<&Path>, opts: RunOptions) -> Result<(String, Exit)> {
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("--trials must be at least {MIN_TRIALS}")));
    }
    let scenario = args.load()?;
    let graph = scenario.graph()?;
    let background = scenario.background_model(&graph)?;
    let specs = scenario.slice_specs()?;
    let single = Scenario { repetitions: 1, ..scenario.clone() };
    let outcome = run_scenario(&single, opts)?;
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut violations = 0;
    for run in &outcome.runs {
        let v = verify_by_simulation(&run.plan, &specs, &graph, &background, trials, scenario.seed)?;
        for (s, p) in v.psp.iter().enumerate() {
            if let Some(p) = p {
                let _ = writeln!(
                    text,
                    "{:<5} {:<10} psp {:.5} [{:.5}, {:.5}] required {}",
                    run.variant.name(),
                    specs[s].id,
                    p.estimate,
                    p.low,
                    p.high,
                    specs[s].required_psp
                );
                rows.push((run.variant, specs[s].id.clone(), "psp", specs[s].required_psp, *p));
            }
        }
        let worst =
            v.node_impact.iter().flat_map(|a| a.iter()).chain(&v.link_impact).max_by(|a, b| a.estimate.total_cmp(&b.estimate)).copied();
        if let Some(p) = worst {
            let _ = writeln!(
                text,
                "{:<5} max overrun frequency {:.5} [{:.5}, {:.5}] analytic {:.3e}",
                run.variant.name(),
                p.estimate,
                p.low,
                p.high,
                run.report.max_impact_prob
            );
            rows.push((run.variant, "all".into(), "impact", run.report.max_impact_prob, p));
        }
        let flows = flow_violations(&run.plan, &specs, &graph);
        violations += flows.len();
        let _ = writeln!(text, "{:<5} flow conservation: {} violations", run.variant.name(), flows.len());
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("verify.csv");
        let mut w = csv::Writer::from_path(&path)?;
        for (variant, item, kind, expected, p) in &rows {
            w.serialize(VerifyRow { variant: *variant, item, kind, expected: *expected, estimate: p.estimate, low: p.low, high: p.high })?;
        }
        w.flush()?;
        let _ = writeln!(text, "wrote {}", path.display());
    }
    let code = if violations > 0 { Exit::Failure } else { status_exit(outcome.worst_status()) };
    Ok((text, code))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_variant_is_a_config_error() {
        assert_eq!(main_with_args(["netslice", "provision", "--variant", "XP"]), Exit::Config);
        assert_eq!(main_with_args(["netslice", "provision", "--scenario", "/nonexistent.toml"]), Exit::Config);
        assert_eq!(main_with_args(["netslice", "frobnicate"]), Exit::Config);
    }

    #[test]
    fn variant_lists_parse() {
        let cli = Cli::try_parse_from(["netslice", "provision", "--variant", "SP,sp-b", "--variant", "jp"]).unwrap();
        let Command::Provision { scenario, .. } = cli.command else { panic!("wrong command") };
        assert_eq!(scenario.variants, [Variant::Sp, Variant::SpB, Variant::Jp]);
    }

    #[test]
    fn scenario_overrides_apply() {
        let args = ScenarioArgs {
            scenario: "mix2".into(),
            variants: vec![Variant::SpB],
            seed: Some(9),
            max_impact: Some(0.3),
            ordering: Some(OrderingPolicy::Greedy),
            stat_mode: Some(StatMode::Aggregate),
            time_limit: Some(5.0),
        };
        let s = args.load().unwrap();
        assert_eq!((s.variants.as_slice(), s.seed, s.max_impact), ([Variant::SpB].as_slice(), 9, 0.3));
        assert_eq!((s.ordering, s.stat_mode, s.solver.time_limit), (OrderingPolicy::Greedy, StatMode::Aggregate, 5.0));
        let bad = ScenarioArgs { max_impact: Some(1.5), ..args };
        assert!(matches!(bad.load(), Err(Error::Config(_))));
    }
}
