//! Scenarios, plan metrics, Monte Carlo verification and CSV reports.
//!
//! A [`Scenario`] names an infrastructure, a background load, a slice mix and
//! the variants to compare. [`run_scenario`] calibrates, provisions and
//! measures every (variant, repetition) pair; [`emit_report`] writes:
//!
//! * `report.csv`: one row per (scenario, variant, repetition), columns as in [`ReportRow`];
//! * `slices.csv`: one row per slice of each run, columns as in [`SliceRow`];
//! * `timing.csv`: wall-clock and solver effort, kept apart so the first two
//!   files are byte-identical across runs with the same seeds.
//!
//! Link usage counts loopback links as links.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::demand::{sample_background, BackgroundConfig, BackgroundModel, LoadMap, SliceConfig, SliceSpec, SliceType};
use crate::error::{Error, Result};
use crate::planner::{calibrate, earnings, provision_calibrated, OrderingPolicy, ProvisioningPlan, Variant, VariantConfig};
use crate::probability::qmc::{derive_seed, rng_from, QmcConfig};
use crate::probability::{count_satisfied, plan_impact_probabilities, psp_estimate, StatMode};
use crate::solver::{SolveStatus, SolverConfig};
use crate::topology::{build_fat_tree, FatTreeConfig, InfrastructureGraph, ResourceType};

/// Impact thresholds swept in the cost/earnings study.
pub const IMPACT_GRID: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];
/// Required PSP values swept in the acceptance study.
pub const PSP_GRID: [f64; 3] = [0.9, 0.95, 0.99];
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;

/// Slices of one kind in a scenario: a built-in type or a custom description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceMix {
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub slice_type: Option<SliceType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<SliceConfig>,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_psp: Option<f64>,
}

impl SliceMix {
    pub fn builtin(t: SliceType, count: usize) -> Self {
        SliceMix { slice_type: Some(t), custom: None, count, required_psp: None }
    }

    pub fn with_required_psp(mut self, p: f64) -> Self {
        self.required_psp = Some(p);
        self
    }

    fn config(&self) -> Result<SliceConfig> {
        match (&self.slice_type, &self.custom) {
            (Some(t), None) => Ok(t.config()),
            (None, Some(c)) => Ok(c.clone()),
            _ => Err(Error::Config("each slice entry needs exactly one of `type` or `custom`".into())),
        }
    }
}

fn one() -> usize {
    1
}
fn default_max_impact() -> f64 {
    0.1
}
fn default_seed() -> u64 {
    1
}
fn default_trials() -> usize {
    20_000
}
fn default_gamma_tolerance() -> f64 {
    1e-3
}
fn all_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}

/// A complete experiment description; also the schema of scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub topology: FatTreeConfig,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default)]
    pub slices: Vec<SliceMix>,
    #[serde(default = "all_variants")]
    pub variants: Vec<Variant>,
    #[serde(default = "default_max_impact")]
    pub max_impact: f64,
    #[serde(default)]
    pub ordering: OrderingPolicy,
    #[serde(default)]
    pub stat_mode: StatMode,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Monte Carlo trials for the per-slice PSP check.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_gamma_tolerance")]
    pub gamma_tolerance: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub qmc: QmcConfig,
}

impl Scenario {
    pub fn new(name: impl Into<String>, slices: Vec<SliceMix>) -> Self {
        Scenario {
            name: name.into(),
            topology: FatTreeConfig::default(),
            background: BackgroundConfig::default(),
            slices,
            variants: all_variants(),
            max_impact: default_max_impact(),
            ordering: OrderingPolicy::default(),
            stat_mode: StatMode::default(),
            seed: default_seed(),
            repetitions: 1,
            trials: default_trials(),
            gamma_tolerance: default_gamma_tolerance(),
            solver: SolverConfig::default(),
            qmc: QmcConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::Config(format!("scenario {} lists no variants", self.name)));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.max_impact > 0.0 && self.max_impact < 1.0) {
            return Err(Error::Config(format!("max_impact must lie in (0,1), got {}", self.max_impact)));
        }
        for mix in &self.slices {
            mix.config()?;
            if let Some(p) = mix.required_psp {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Config(format!("required_psp must lie in (0,1), got {p}")));
                }
            }
        }
        self.variant_config(self.variants[0], 0).validate()
    }

    pub fn graph(&self) -> Result<InfrastructureGraph> {
        build_fat_tree(&self.topology)
    }

    pub fn background_model(&self, graph: &InfrastructureGraph) -> Result<BackgroundModel> {
        BackgroundModel::from_graph(graph, self.background)
    }

    /// Expanded slice list; ids are `<base>-<k>` numbered per base id.
    pub fn slice_specs(&self) -> Result<Vec<SliceSpec>> {
        let mut out: Vec<SliceSpec> = Vec::new();
        for mix in &self.slices {
            let cfg = mix.config()?;
            for _ in 0..mix.count {
                let k = out.iter().filter(|s| s.id.rsplit_once('-').map(|(b, _)| b) == Some(cfg.id.as_str())).count();
                let mut spec = cfg.build()?;
                spec.id = format!("{}-{k}", cfg.id);
                if let Some(p) = mix.required_psp {
                    spec = spec.with_required_psp(p)?;
                }
                out.push(spec);
            }
        }
        Ok(out)
    }

    /// Settings of one run; the QMC seed depends on the repetition only, so
    /// all variants of a repetition share their margins.
    pub fn variant_config(&self, variant: Variant, repetition: usize) -> VariantConfig {
        let mut cfg = VariantConfig::new(variant).with_max_impact(self.max_impact).with_ordering(self.ordering);
        cfg.stat_mode = self.stat_mode;
        cfg.solver = self.solver.clone();
        cfg.qmc = QmcConfig { seed: derive_seed(self.seed, repetition as u64), ..self.qmc.clone() };
        cfg.gamma_tolerance = self.gamma_tolerance;
        cfg
    }

    /// Sets the required PSP of every slice.
    pub fn with_required_psp(mut self, p: f64) -> Self {
        for mix in &mut self.slices {
            mix.required_psp = Some(p);
        }
        self
    }
}

/// The built-in scenarios: the single Type 1 slice, the four mixed
/// scenarios and the ten-slice Type 1 sweep.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let mut out = vec![Scenario::new("single", vec![SliceMix::builtin(SliceType::Type1, 1).with_required_psp(0.99)])];
    for (size, (a, b, c)) in [(2, (1, 1, 0)), (4, (2, 1, 1)), (6, (2, 2, 2)), (8, (3, 2, 3))] {
        let slices = [(SliceType::Type1, a), (SliceType::Type2, b), (SliceType::Type3, c)]
            .into_iter()
            .filter(|(_, n)| *n > 0)
            .map(|(t, n)| SliceMix::builtin(t, n))
            .collect();
        out.push(Scenario::new(format!("mix{size}"), slices));
    }
    let mut sweep = Scenario::new("sweep10", vec![SliceMix::builtin(SliceType::Type1, 10)]);
    sweep.variants = vec![Variant::Sp, Variant::SpB];
    out.push(sweep);
    out
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

/// Metrics of one plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanMetrics {
    /// Percentage of nodes used by at least one slice.
    pub node_usage_pct: f64,
    /// Percentage of links (loopbacks included) carrying at least one instance.
    pub link_usage_pct: f64,
    /// Mean provisioned share of node capacity, over resources with capacity.
    pub node_capacity_usage_pct: f64,
    /// Mean provisioned share of link bandwidth.
    pub link_capacity_usage_pct: f64,
    pub max_impact_prob: f64,
    pub provisioning_cost: f64,
    pub total_earnings: f64,
    pub acceptance_rate: f64,
    pub impacted_node_count: usize,
    pub impacted_link_count: usize,
}

pub fn metrics(plan: &ProvisioningPlan, graph: &InfrastructureGraph, background: &BackgroundModel, max_impact: f64) -> Result<PlanMetrics> {
    let n = graph.node_count();
    let e = graph.link_count();
    let used_nodes = (0..n).filter(|&i| plan.slices.iter().any(|s| s.node_used[i])).count();
    let used_links = (0..e).filter(|&l| plan.slices.iter().any(|s| s.link_instances[l].iter().any(|&k| k > 0))).count();
    let mut shares = Vec::new();
    for (i, node) in graph.nodes.iter().enumerate() {
        for kind in ResourceType::ALL {
            let cap = node.capacity.get(kind);
            if cap > 0.0 {
                shares.push(plan.provisioned.node[i].get(kind) / cap);
            }
        }
    }
    let link_shares: Vec<f64> =
        graph.links.iter().enumerate().filter(|(_, l)| l.bandwidth > 0.0).map(|(k, l)| plan.provisioned.link[k] / l.bandwidth).collect();
    let mean_pct = |v: &[f64]| if v.is_empty() { 0.0 } else { 100.0 * v.iter().sum::<f64>() / v.len() as f64 };
    let impact = plan_impact_probabilities(&plan.provisioned, graph, background)?;
    let impacted_node_count = impact.node.iter().filter(|v| v.to_array().iter().any(|&p| p > max_impact)).count();
    let impacted_link_count = impact.link.iter().filter(|&&p| p > max_impact).count();
    let satisfied = plan.slices.iter().filter(|s| s.satisfied).count();
    Ok(PlanMetrics {
        node_usage_pct: if n == 0 { 0.0 } else { 100.0 * used_nodes as f64 / n as f64 },
        link_usage_pct: if e == 0 { 0.0 } else { 100.0 * used_links as f64 / e as f64 },
        node_capacity_usage_pct: mean_pct(&shares),
        link_capacity_usage_pct: mean_pct(&link_shares),
        max_impact_prob: impact.max_value(),
        provisioning_cost: plan.total_cost(),
        total_earnings: earnings(plan),
        acceptance_rate: if plan.slices.is_empty() { 0.0 } else { satisfied as f64 / plan.slices.len() as f64 },
        impacted_node_count,
        impacted_link_count,
    })
}

/// A binomial proportion with its Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl Proportion {
    pub fn wilson(successes: usize, trials: usize) -> Self {
        if trials == 0 {
            return Proportion { successes, trials, estimate: 0.0, low: 0.0, high: 1.0 };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion { successes, trials, estimate: p, low: (centre - half).max(0.0), high: (centre + half).min(1.0) }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.low <= p && p <= self.high
    }
}

/// Simulated PSP per slice and reserve-overrun frequency per element.
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    /// `None` for rejected slices.
    pub psp: Vec<Option<Proportion>>,
    /// Per node, per resource type.
    pub node_impact: Vec<[Proportion; 3]>,
    pub link_impact: Vec<Proportion>,
}

pub const MIN_TRIALS: usize = 10_000;

/// Samples aggregate slice demands and background loads and counts how often
/// each accepted slice's demand fits its provisioned box and how often the
/// background exceeds the capacity left by the plan.
pub fn verify_by_simulation(
    plan: &ProvisioningPlan,
    specs: &[SliceSpec],
    graph: &InfrastructureGraph,
    background: &BackgroundModel,
    trials: usize,
    seed: u64,
) -> Result<Verification> {
    if trials < MIN_TRIALS {
        return Err(Error::Domain(format!("verification needs at least {MIN_TRIALS} trials, got {trials}")));
    }
    if specs.len() != plan.slices.len() {
        return Err(Error::Dimension { expected: plan.slices.len(), got: specs.len() });
    }
    let mut psp = Vec::with_capacity(specs.len());
    for (s, (sp, spec)) in plan.slices.iter().zip(specs).enumerate() {
        psp.push(if sp.accepted {
            let hits = count_satisfied(spec, &sp.provided_box(spec)?, trials, derive_seed(seed, s as u64))?;
            Some(Proportion::wilson(hits, trials))
        } else {
            None
        });
    }
    let mut node_hits = vec![[0usize; 3]; graph.node_count()];
    let mut link_hits = vec![0usize; graph.link_count()];
    let mut rng = rng_from(derive_seed(seed, u64::MAX));
    for _ in 0..trials {
        let load = sample_background(background, &mut rng);
        for (i, node) in graph.nodes.iter().enumerate() {
            for kind in ResourceType::ALL {
                if load.node[i].get(kind) > node.capacity.get(kind) - plan.provisioned.node[i].get(kind) {
                    node_hits[i][kind.index()] += 1;
                }
            }
        }
        for (k, link) in graph.links.iter().enumerate() {
            if load.link[k] > link.bandwidth - plan.provisioned.link[k] {
                link_hits[k] += 1;
            }
        }
    }
    Ok(Verification {
        psp,
        node_impact: node_hits.iter().map(|h| h.map(|c| Proportion::wilson(c, trials))).collect(),
        link_impact: link_hits.iter().map(|&c| Proportion::wilson(c, trials)).collect(),
    })
}

/// One line of `report.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub variant: Variant,
    pub repetition: usize,
    pub status: String,
    pub node_usage_pct: f64,
    pub link_usage_pct: f64,
    pub node_capacity_usage_pct: f64,
    pub link_capacity_usage_pct: f64,
    pub max_impact_prob: f64,
    pub provisioning_cost: f64,
    pub total_earnings: f64,
    pub acceptance_rate: f64,
    pub impacted_node_count: usize,
    pub impacted_link_count: usize,
}

impl ReportRow {
    fn new(scenario: &str, variant: Variant, repetition: usize, status: SolveStatus, m: &PlanMetrics) -> Self {
        ReportRow {
            scenario: scenario.to_string(),
            variant,
            repetition,
            status: status.as_str().to_string(),
            node_usage_pct: m.node_usage_pct,
            link_usage_pct: m.link_usage_pct,
            node_capacity_usage_pct: m.node_capacity_usage_pct,
            link_capacity_usage_pct: m.link_capacity_usage_pct,
            max_impact_prob: m.max_impact_prob,
            provisioning_cost: m.provisioning_cost,
            total_earnings: m.total_earnings,
            acceptance_rate: m.acceptance_rate,
            impacted_node_count: m.impacted_node_count,
            impacted_link_count: m.impacted_link_count,
        }
    }
}

/// One line of `slices.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub scenario: String,
    pub variant: Variant,
    pub repetition: usize,
    pub slice: String,
    pub required_psp: f64,
    pub accepted: bool,
    pub gamma: f64,
    pub psp_qmc: f64,
    pub psp_qmc_error: f64,
    pub psp_mc: f64,
    pub psp_mc_low: f64,
    pub psp_mc_high: f64,
    pub cost: f64,
}

/// One line of `timing.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub scenario: String,
    pub variant: Variant,
    pub repetition: usize,
    pub wall_time_s: f64,
    pub solver_calls: usize,
    pub solver_nodes: usize,
}

/// Everything produced by one (variant, repetition) run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub variant: Variant,
    pub repetition: usize,
    pub plan: ProvisioningPlan,
    pub report: ReportRow,
    pub slices: Vec<SliceRow>,
    pub timing: TimingRow,
}

/// Results of a scenario, ordered by repetition then by the scenario's variant order.
#[derive(Clone, Debug, Default)]
pub struct ScenarioOutcome {
    pub runs: Vec<RunOutcome>,
}

impl ScenarioOutcome {
    pub fn reports(&self) -> Vec<ReportRow> {
        self.runs.iter().map(|r| r.report.clone()).collect()
    }

    pub fn run(&self, variant: Variant, repetition: usize) -> Option<&RunOutcome> {
        self.runs.iter().find(|r| r.variant == variant && r.repetition == repetition)
    }

    /// Worst solver status over all runs.
    pub fn worst_status(&self) -> SolveStatus {
        let rank = |s: SolveStatus| match s {
            SolveStatus::Optimal => 0,
            SolveStatus::FeasibleGap => 1,
            SolveStatus::Timeout => 2,
            SolveStatus::Infeasible => 3,
        };
        self.runs.iter().map(|r| r.plan.status).max_by_key(|s| rank(*s)).unwrap_or(SolveStatus::Optimal)
    }
}

/// Execution options that do not change results.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Worker threads; results are identical for every value.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { jobs: std::thread::available_parallelism().map_or(1, |n| n.get()) }
    }
}

/// Calibrates, provisions and measures every (variant, repetition) of `scenario`.
pub fn run_scenario(scenario: &Scenario, opts: RunOptions) -> Result<ScenarioOutcome> {
    scenario.validate()?;
    let graph = scenario.graph()?;
    let background = scenario.background_model(&graph)?;
    let specs = scenario.slice_specs()?;

    let mut tasks = Vec::new();
    for rep in 0..scenario.repetitions {
        let calibrated = calibrate(&specs, &scenario.variant_config(scenario.variants[0], rep))?;
        for &variant in &scenario.variants {
            tasks.push((variant, rep, calibrated.clone()));
        }
    }
    let run_one = |(variant, rep, calibrated): &(Variant, usize, Vec<_>)| -> Result<RunOutcome> {
        let cfg = scenario.variant_config(*variant, *rep);
        let started = Instant::now();
        let plan = provision_calibrated(&specs, calibrated, &graph, &background, &cfg)?;
        let wall = started.elapsed();
        measure(scenario, &specs, &graph, &background, &cfg, *variant, *rep, plan, wall)
    };

    let jobs = opts.jobs.max(1).min(tasks.len().max(1));
    let mut results: Vec<Option<Result<RunOutcome>>> = (0..tasks.len()).map(|_| None).collect();
    if jobs <= 1 {
        for (slot, task) in results.iter_mut().zip(&tasks) {
            *slot = Some(run_one(task));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let collected = std::sync::Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if k >= tasks.len() {
                        break;
                    }
                    let r = run_one(&tasks[k]);
                    collected.lock().expect("no worker panics while holding the lock").push((k, r));
                });
            }
        });
        for (k, r) in collected.into_inner().expect("workers have finished") {
            results[k] = Some(r);
        }
    }
    let runs = results.into_iter().map(|r| r.expect("every task ran")).collect::<Result<Vec<_>>>()?;
    Ok(ScenarioOutcome { runs })
}

#[allow(clippy::too_many_arguments)]
fn measure(
    scenario: &Scenario,
    specs: &[SliceSpec],
    graph: &InfrastructureGraph,
    background: &BackgroundModel,
    cfg: &VariantConfig,
    variant: Variant,
    rep: usize,
    plan: ProvisioningPlan,
    wall: Duration,
) -> Result<RunOutcome> {
    let m = metrics(&plan, graph, background, scenario.max_impact)?;
    let report = ReportRow::new(&scenario.name, variant, rep, plan.status, &m);
    let mut slices = Vec::with_capacity(specs.len());
    for (s, (sp, spec)) in plan.slices.iter().zip(specs).enumerate() {
        let (qmc, mc) = if sp.accepted {
            let b = sp.provided_box(spec)?;
            let q = psp_estimate(spec, &b, &cfg.qmc)?;
            let seed = derive_seed(derive_seed(scenario.seed, rep as u64), s as u64);
            let hits = count_satisfied(spec, &b, scenario.trials, seed)?;
            (q, Proportion::wilson(hits, scenario.trials))
        } else {
            (crate::probability::Estimate::exact(0.0), Proportion::wilson(0, 0))
        };
        slices.push(SliceRow {
            scenario: scenario.name.clone(),
            variant,
            repetition: rep,
            slice: sp.id.clone(),
            required_psp: spec.required_psp,
            accepted: sp.accepted,
            gamma: sp.calibration.gamma,
            psp_qmc: qmc.value,
            psp_qmc_error: qmc.error,
            psp_mc: mc.estimate,
            psp_mc_low: mc.low,
            psp_mc_high: mc.high,
            cost: sp.cost,
        });
    }
    let timing = TimingRow {
        scenario: scenario.name.clone(),
        variant,
        repetition: rep,
        wall_time_s: wall.as_secs_f64(),
        solver_calls: plan.solves.len(),
        solver_nodes: plan.solves.iter().map(|s| s.node_count).sum(),
    };
    Ok(RunOutcome { variant, repetition: rep, plan, report, slices, timing })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.csv`, `slices.csv` and `timing.csv` into `dir` and returns their paths.
pub fn emit_report(outcomes: &[ScenarioOutcome], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let runs: Vec<&RunOutcome> = outcomes.iter().flat_map(|o| &o.runs).collect();
    let report: Vec<&ReportRow> = runs.iter().map(|r| &r.report).collect();
    let slices: Vec<&SliceRow> = runs.iter().flat_map(|r| &r.slices).collect();
    let timing: Vec<&TimingRow> = runs.iter().map(|r| &r.timing).collect();
    let paths = [dir.join("report.csv"), dir.join("slices.csv"), dir.join("timing.csv")];
    write_csv(&paths[0], &report)?;
    write_csv(&paths[1], &slices)?;
    write_csv(&paths[2], &timing)?;
    Ok(paths.to_vec())
}

/// One line of `plans.csv`: instances of a VNF on a node or of a virtual link on a link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub scenario: String,
    pub variant: Variant,
    pub repetition: usize,
    pub slice: String,
    /// Infrastructure node id or link label `src->dst`.
    pub element: String,
    /// VNF name or virtual link label `src->dst`.
    pub component: String,
    pub instances: u64,
}

/// Non-zero placements of every accepted slice.
pub fn plan_rows(scenario: &str, run: &RunOutcome, specs: &[SliceSpec], graph: &InfrastructureGraph) -> Vec<PlanRow> {
    let mut out = Vec::new();
    for (sp, spec) in run.plan.slices.iter().zip(specs).filter(|(sp, _)| sp.accepted) {
        let mut push = |element: String, component: String, instances: u64| {
            out.push(PlanRow {
                scenario: scenario.to_string(),
                variant: run.variant,
                repetition: run.repetition,
                slice: sp.id.clone(),
                element,
                component,
                instances,
            })
        };
        for (i, per_vnf) in sp.node_instances.iter().enumerate() {
            for (v, &k) in per_vnf.iter().enumerate().filter(|(_, k)| **k > 0) {
                push(graph.nodes[i].id.clone(), spec.sfc.vnfs[v].name.clone(), k);
            }
        }
        for (e, per_vlink) in sp.link_instances.iter().enumerate() {
            for (l, &k) in per_vlink.iter().enumerate().filter(|(_, k)| **k > 0) {
                let vl = &spec.sfc.vlinks[l];
                let label = format!("{}->{}", spec.sfc.vnfs[vl.src].name, spec.sfc.vnfs[vl.dst].name);
                push(graph.link_label(e), label, k);
            }
        }
    }
    out
}

/// Writes `plans.csv` into `dir`.
pub fn emit_plans(outcomes: &[(&Scenario, &ScenarioOutcome)], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for (scenario, outcome) in outcomes {
        let graph = scenario.graph()?;
        let specs = scenario.slice_specs()?;
        for run in &outcome.runs {
            rows.extend(plan_rows(&scenario.name, run, &specs, &graph));
        }
    }
    let path = dir.join("plans.csv");
    write_csv(&path, &rows)?;
    Ok(path)
}

/// Flow-conservation violations of a plan, checked in exact rational
/// arithmetic from its instance counts; labels are `slice/node/vnf->vnf`.
///
/// At every node and for every virtual link `vw`, outgoing minus incoming
/// routed instances (loopbacks excluded) must equal the node's share of `v`
/// instances minus its share of `w` instances, each weighted by the link's
/// fraction of the VNF's total out- or in-bandwidth.
pub fn flow_violations(plan: &ProvisioningPlan, specs: &[SliceSpec], graph: &InfrastructureGraph) -> Vec<String> {
    let q = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    let int = |k: u64| BigRational::from_integer(BigInt::from(k));
    let mut out = Vec::new();
    for (sp, spec) in plan.slices.iter().zip(specs) {
        let sfc = &spec.sfc;
        for i in 0..graph.node_count() {
            for (l, vl) in sfc.vlinks.iter().enumerate() {
                let mut net = BigRational::zero();
                for (e, link) in graph.links.iter().enumerate().filter(|(_, link)| !link.is_loopback()) {
                    if link.src == i {
                        net += int(sp.link_instances[e][l]);
                    } else if link.dst == i {
                        net -= int(sp.link_instances[e][l]);
                    }
                }
                let out_bw = q(sfc.out_bandwidth(vl.src));
                if !out_bw.is_zero() {
                    net -= q(vl.bandwidth) / out_bw * int(sp.node_instances[i][vl.src]);
                }
                let in_bw = q(sfc.in_bandwidth(vl.dst));
                if !in_bw.is_zero() {
                    net += q(vl.bandwidth) / in_bw * int(sp.node_instances[i][vl.dst]);
                }
                if !net.is_zero() {
                    out.push(format!("{}/{}/{}->{}", sp.id, graph.nodes[i].id, sfc.vnfs[vl.src].name, sfc.vnfs[vl.dst].name));
                }
            }
        }
    }
    out
}

/// Runs `scenario` once per impact threshold in `grid`.
pub fn sweep_max_impact(scenario: &Scenario, grid: &[f64], opts: RunOptions) -> Result<Vec<ScenarioOutcome>> {
    grid.iter()
        .map(|&p| {
            let mut s = scenario.clone();
            s.max_impact = p;
            s.name = format!("{}@impact={p}", scenario.name);
            run_scenario(&s, opts)
        })
        .collect()
}

/// Runs `scenario` once per required PSP in `grid`.
pub fn sweep_required_psp(scenario: &Scenario, grid: &[f64], opts: RunOptions) -> Result<Vec<ScenarioOutcome>> {
    grid.iter()
        .map(|&p| {
            let mut s = scenario.clone().with_required_psp(p);
            s.name = format!("{}@psp={p}", scenario.name);
            run_scenario(&s, opts)
        })
        .collect()
}

/// Background load that ignores every plan: the impact floor of an empty plan.
pub fn background_only(graph: &InfrastructureGraph, background: &BackgroundModel) -> Result<f64> {
    Ok(plan_impact_probabilities(&LoadMap::zeros(graph), graph, background)?.max_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::provision;

    #[test]
    fn builtin_scenario_table() {
        let all = builtin_scenarios();
        let names: Vec<&str> = all.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["single", "mix2", "mix4", "mix6", "mix8", "sweep10"]);
        let mix4 = builtin_scenario("mix4").unwrap();
        let ids: Vec<String> = mix4.slice_specs().unwrap().into_iter().map(|s| s.id).collect();
        assert_eq!(ids, ["type1-0", "type1-1", "type2-0", "type3-0"]);
        let single = builtin_scenario("single").unwrap();
        assert_eq!(single.max_impact, 0.1);
        assert_eq!(single.slice_specs().unwrap()[0].required_psp, 0.99);
        assert_eq!(single.background, BackgroundConfig { mean_fraction: 0.2, sd_fraction: 0.05 });
        assert_eq!(builtin_scenario("sweep10").unwrap().slice_specs().unwrap().len(), 10);
        assert_eq!(IMPACT_GRID.first(), Some(&0.05));
        assert_eq!(IMPACT_GRID.last(), Some(&0.4));
    }

    #[test]
    fn scenario_toml_round_trip() {
        for s in builtin_scenarios() {
            let text = s.to_toml().unwrap();
            assert_eq!(Scenario::from_toml(&text).unwrap(), s, "{text}");
        }
        let minimal = Scenario::from_toml("name = \"x\"\n[[slices]]\ntype = \"type2\"\ncount = 2\n").unwrap();
        assert_eq!(minimal.slice_specs().unwrap().len(), 2);
        assert!(Scenario::from_toml("name = \"x\"\nvariants = []\n").is_err());
        assert!(Scenario::from_toml("name = \"x\"\nvariants = [\"XP\"]\n").is_err());
        assert!(Scenario::from_toml("name = \"x\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn wilson_interval() {
        let p = Proportion::wilson(50, 100);
        assert!((p.low - 0.4038).abs() < 1e-3 && (p.high - 0.5962).abs() < 1e-3);
        let all = Proportion::wilson(10_000, 10_000);
        assert_eq!(all.high, 1.0);
        assert!(all.low > 0.999 && all.low < 1.0);
    }

    #[test]
    fn empty_plan_metrics() {
        let s = Scenario::new("empty", vec![]);
        let graph = s.graph().unwrap();
        let bg = s.background_model(&graph).unwrap();
        let plan = provision(&[], &graph, &bg, &s.variant_config(Variant::Sp, 0)).unwrap();
        let m = metrics(&plan, &graph, &bg, 0.1).unwrap();
        assert_eq!((m.node_usage_pct, m.link_usage_pct, m.impacted_node_count, m.impacted_link_count), (0.0, 0.0, 0, 0));
        assert_eq!(m.max_impact_prob, background_only(&graph, &bg).unwrap());
        assert!(m.max_impact_prob < 1e-12);
    }
}
