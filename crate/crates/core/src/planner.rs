//! Provisioning variants: margin calibration, model construction and solving,
//! slice ordering, and plan costs and earnings.
//!
//! The four variants are joint or sequential provisioning, each with or
//! without a reserve for best-effort background load:
//!
//! | variant | mode       | background reserve |
//! |---------|------------|--------------------|
//! | JP      | joint      | no                 |
//! | SP      | sequential | no                 |
//! | JP-B    | joint      | yes                |
//! | SP-B    | sequential | yes                |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::demand::{vlink_component, vnf_component, BackgroundModel, LoadMap, SliceSpec};
use crate::error::{Error, Result};
use crate::optimizer::{build_joint, build_sequential_step, MilpModel, SliceRequest, VarRole};
use crate::probability::qmc::QmcConfig;
use crate::probability::{background_targets, find_gamma_s, gamma_b, targets_for_gamma, Calibration, DemandBox, StatMode};
use crate::solver::{solve_with_hints, solve_with_start, SolveHints, SolveResult, SolveStatus, SolverConfig};
use crate::topology::{InfrastructureGraph, ResourceType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Joint,
    Sequential,
}

/// Order in which sequential provisioning considers slices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingPolicy {
    /// Decreasing income, ties by id.
    #[default]
    ByIncome,
    /// At each step the remaining slice with the best standalone earnings.
    Greedy,
    /// Input order.
    Given,
}

impl FromStr for OrderingPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "by_income" | "by-income" | "income" => Ok(OrderingPolicy::ByIncome),
            "greedy" => Ok(OrderingPolicy::Greedy),
            "given" => Ok(OrderingPolicy::Given),
            other => Err(Error::Config(format!("unknown ordering {other}"))),
        }
    }
}

impl OrderingPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderingPolicy::ByIncome => "by_income",
            OrderingPolicy::Greedy => "greedy",
            OrderingPolicy::Given => "given",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "JP")]
    Jp,
    #[serde(rename = "SP")]
    Sp,
    #[serde(rename = "JP-B")]
    JpB,
    #[serde(rename = "SP-B")]
    SpB,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Jp, Variant::Sp, Variant::JpB, Variant::SpB];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Jp => "JP",
            Variant::Sp => "SP",
            Variant::JpB => "JP-B",
            Variant::SpB => "SP-B",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Variant::Jp | Variant::JpB => Mode::Joint,
            Variant::Sp | Variant::SpB => Mode::Sequential,
        }
    }

    pub fn impact_aware(self) -> bool {
        matches!(self, Variant::JpB | Variant::SpB)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "jp" => Ok(Variant::Jp),
            "sp" => Ok(Variant::Sp),
            "jp-b" | "jpb" => Ok(Variant::JpB),
            "sp-b" | "spb" => Ok(Variant::SpB),
            _ => Err(Error::Config(format!("unknown variant {s} (expected JP, SP, JP-B or SP-B)"))),
        }
    }
}

/// Everything that parameterizes one provisioning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub mode: Mode,
    pub impact_aware: bool,
    /// Largest tolerated impact probability on background traffic.
    pub max_impact: f64,
    pub ordering: OrderingPolicy,
    pub stat_mode: StatMode,
    pub solver: SolverConfig,
    pub qmc: QmcConfig,
    /// Absolute bisection tolerance on the slice margins.
    pub gamma_tolerance: f64,
    /// Seed the joint search with the sequential plan.
    pub sequential_start: bool,
}

impl VariantConfig {
    pub fn new(variant: Variant) -> Self {
        VariantConfig {
            mode: variant.mode(),
            impact_aware: variant.impact_aware(),
            max_impact: 0.1,
            ordering: OrderingPolicy::ByIncome,
            stat_mode: StatMode::PerUser,
            solver: SolverConfig::default(),
            qmc: QmcConfig::default(),
            gamma_tolerance: 1e-3,
            sequential_start: true,
        }
    }

    pub fn with_max_impact(mut self, p: f64) -> Self {
        self.max_impact = p;
        self
    }

    pub fn with_ordering(mut self, o: OrderingPolicy) -> Self {
        self.ordering = o;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_impact > 0.0 && self.max_impact < 1.0) {
            return Err(Error::Config(format!("max_impact must lie in (0,1), got {}", self.max_impact)));
        }
        if !(self.gamma_tolerance > 0.0) {
            return Err(Error::Config("gamma_tolerance must be positive".into()));
        }
        self.solver.validate()?;
        self.qmc.validate()
    }

    pub fn variant(&self) -> Variant {
        match (self.mode, self.impact_aware) {
            (Mode::Joint, false) => Variant::Jp,
            (Mode::Sequential, false) => Variant::Sp,
            (Mode::Joint, true) => Variant::JpB,
            (Mode::Sequential, true) => Variant::SpB,
        }
    }
}

/// Provisioning decision for one slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SlicePlan {
    pub id: String,
    pub income: f64,
    pub accepted: bool,
    /// Whether the slice's agreement counts as met (accepted with a calibrated box).
    pub satisfied: bool,
    pub calibration: Calibration,
    pub target: DemandBox,
    /// `node_instances[i][v]`
    pub node_instances: Vec<Vec<u64>>,
    /// `link_instances[e][l]`
    pub link_instances: Vec<Vec<u64>>,
    pub node_used: Vec<bool>,
    pub cost: f64,
}

impl SlicePlan {
    fn empty(spec: &SliceSpec, graph: &InfrastructureGraph, calibration: Calibration, target: DemandBox) -> Self {
        SlicePlan {
            id: spec.id.clone(),
            income: spec.income,
            accepted: false,
            satisfied: false,
            calibration,
            target,
            node_instances: vec![vec![0; spec.sfc.vnfs.len()]; graph.node_count()],
            link_instances: vec![vec![0; spec.sfc.vlinks.len()]; graph.link_count()],
            node_used: vec![false; graph.node_count()],
            cost: 0.0,
        }
    }

    pub fn earnings(&self) -> f64 {
        let income = if self.satisfied { self.income } else { 0.0 };
        income - self.cost
    }

    /// Capacity provisioned for each demand component.
    pub fn provided_box(&self, spec: &SliceSpec) -> Result<DemandBox> {
        let nv = spec.sfc.vnfs.len();
        let mut upper = vec![0.0; spec.dim()];
        for (v, vnf) in spec.sfc.vnfs.iter().enumerate() {
            let count: u64 = self.node_instances.iter().map(|row| row[v]).sum();
            for kind in ResourceType::ALL {
                upper[vnf_component(v, kind)] = count as f64 * vnf.requirement.get(kind);
            }
        }
        for (l, vl) in spec.sfc.vlinks.iter().enumerate() {
            let count: u64 = self.link_instances.iter().map(|row| row[l]).sum();
            upper[vlink_component(nv, l)] = count as f64 * vl.bandwidth;
        }
        DemandBox::new(upper)
    }

    /// Resources this slice takes on every node and link.
    pub fn usage(&self, spec: &SliceSpec, graph: &InfrastructureGraph) -> LoadMap {
        let mut out = LoadMap::zeros(graph);
        for (i, row) in self.node_instances.iter().enumerate() {
            for (v, &k) in row.iter().enumerate() {
                out.node[i] += spec.sfc.vnfs[v].requirement.scale(k as f64);
            }
        }
        for (e, row) in self.link_instances.iter().enumerate() {
            out.link[e] = row.iter().zip(&spec.sfc.vlinks).map(|(&k, vl)| k as f64 * vl.bandwidth).sum();
        }
        out
    }
}

/// Summary of one solver call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub status: SolveStatus,
    pub objective: f64,
    pub gap: f64,
    pub node_count: usize,
    pub lp_iterations: usize,
    pub wall_seconds: f64,
}

impl From<&SolveResult> for SolveStats {
    fn from(r: &SolveResult) -> Self {
        SolveStats {
            status: r.status,
            objective: r.objective,
            gap: r.gap,
            node_count: r.node_count,
            lp_iterations: r.lp_iterations,
            wall_seconds: r.wall_time.as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProvisioningPlan {
    pub variant: Variant,
    /// One entry per input slice, in input order.
    pub slices: Vec<SlicePlan>,
    /// Input indices in the order they were provisioned.
    pub order: Vec<usize>,
    /// Capacity withheld for background traffic.
    pub reserves: LoadMap,
    /// Total provisioned resources per node and link.
    pub provisioned: LoadMap,
    /// Worst status over all solver calls.
    pub status: SolveStatus,
    pub solves: Vec<SolveStats>,
    pub warnings: Vec<String>,
}

impl ProvisioningPlan {
    pub fn total_cost(&self) -> f64 {
        self.slices.iter().map(|s| s.cost).sum()
    }

    pub fn accepted_count(&self) -> usize {
        self.slices.iter().filter(|s| s.accepted).count()
    }
}

/// Fixed plus per-unit cost of a slice plan.
pub fn cost(plan: &SlicePlan, spec: &SliceSpec, graph: &InfrastructureGraph) -> f64 {
    let fixed: f64 = plan.node_used.iter().zip(&graph.nodes).filter(|(u, _)| **u).map(|(_, n)| n.fixed_cost).sum();
    let nodes: f64 = plan
        .node_instances
        .iter()
        .zip(&graph.nodes)
        .flat_map(|(row, node)| {
            row.iter().zip(&spec.sfc.vnfs).map(move |(&k, vnf)| {
                let per_instance: f64 = ResourceType::ALL.iter().map(|&t| vnf.requirement.get(t) * node.unit_cost.get(t)).sum();
                k as f64 * per_instance
            })
        })
        .sum();
    let links: f64 = plan
        .link_instances
        .iter()
        .zip(&graph.links)
        .flat_map(|(row, link)| row.iter().zip(&spec.sfc.vlinks).map(move |(&k, vl)| k as f64 * vl.bandwidth * link.unit_cost))
        .sum();
    fixed + nodes + links
}

/// Total earnings `Σ_s (I_s x_s − C_s)`.
pub fn earnings(plan: &ProvisioningPlan) -> f64 {
    plan.slices.iter().map(SlicePlan::earnings).sum()
}

/// Calibrates the margin and target box of every slice.
pub fn calibrate(slices: &[SliceSpec], cfg: &VariantConfig) -> Result<Vec<(Calibration, DemandBox)>> {
    slices
        .iter()
        .map(|spec| {
            let cal = find_gamma_s(spec, &cfg.qmc, cfg.stat_mode, cfg.gamma_tolerance)?;
            let target = targets_for_gamma(spec, cal.gamma, cfg.stat_mode)?;
            Ok((cal, target))
        })
        .collect()
}

/// Background reserves for the variant: zero unless impact-aware.
pub fn reserves_for(graph: &InfrastructureGraph, background: &BackgroundModel, cfg: &VariantConfig) -> Result<LoadMap> {
    if cfg.impact_aware {
        background_targets(background, gamma_b(cfg.max_impact)?)
    } else {
        Ok(LoadMap::zeros(graph))
    }
}

/// Calibrates every slice and provisions them with the configured variant.
pub fn provision(
    slices: &[SliceSpec],
    graph: &InfrastructureGraph,
    background: &BackgroundModel,
    cfg: &VariantConfig,
) -> Result<ProvisioningPlan> {
    cfg.validate()?;
    let calibrated = calibrate(slices, cfg)?;
    provision_calibrated(slices, &calibrated, graph, background, cfg)
}

/// A model whose solution was written into the plan.
#[derive(Clone, Debug)]
pub struct StepModel {
    /// `joint`, or `step<k>-<slice id>` for the k-th sequential step.
    pub label: String,
    pub model: MilpModel,
    pub result: SolveResult,
}

/// As [`provision`] with margins computed beforehand by [`calibrate`].
pub fn provision_calibrated(
    slices: &[SliceSpec],
    calibrated: &[(Calibration, DemandBox)],
    graph: &InfrastructureGraph,
    background: &BackgroundModel,
    cfg: &VariantConfig,
) -> Result<ProvisioningPlan> {
    run(slices, calibrated, graph, background, cfg, None)
}

/// As [`provision_calibrated`], also returning every model that fed the plan.
pub fn provision_with_models(
    slices: &[SliceSpec],
    calibrated: &[(Calibration, DemandBox)],
    graph: &InfrastructureGraph,
    background: &BackgroundModel,
    cfg: &VariantConfig,
) -> Result<(ProvisioningPlan, Vec<StepModel>)> {
    let mut log = Vec::new();
    let plan = run(slices, calibrated, graph, background, cfg, Some(&mut log))?;
    Ok((plan, log))
}

fn run(
    slices: &[SliceSpec],
    calibrated: &[(Calibration, DemandBox)],
    graph: &InfrastructureGraph,
    background: &BackgroundModel,
    cfg: &VariantConfig,
    log: Option<&mut Vec<StepModel>>,
) -> Result<ProvisioningPlan> {
    cfg.validate()?;
    if let Some(v) = crate::topology::validate(graph).first() {
        return Err(Error::Topology(v.to_string()));
    }
    if calibrated.len() != slices.len() {
        return Err(Error::Dimension { expected: slices.len(), got: calibrated.len() });
    }
    let reserves = reserves_for(graph, background, cfg)?;
    let mut plan = ProvisioningPlan {
        variant: cfg.variant(),
        slices: slices
            .iter()
            .zip(calibrated)
            .map(|(spec, (cal, target))| SlicePlan::empty(spec, graph, cal.clone(), target.clone()))
            .collect(),
        order: Vec::new(),
        reserves,
        provisioned: LoadMap::zeros(graph),
        status: SolveStatus::Optimal,
        solves: Vec::new(),
        warnings: Vec::new(),
    };
    let requests: Vec<SliceRequest> =
        slices.iter().zip(calibrated).map(|(spec, (_, target))| SliceRequest { spec, target: target.clone() }).collect();

    match cfg.mode {
        Mode::Sequential => run_sequential(&mut plan, &requests, graph, cfg, log)?,
        Mode::Joint => {
            let index: Vec<usize> = (0..slices.len()).collect();
            let model = build_joint(&requests, graph, &plan.reserves)?;
            plan.warnings.extend(model.warnings.iter().cloned());
            let result = if slices.len() > 1 {
                solve_joint(&model, &plan, &requests, graph, cfg)?
            } else {
                solve_with_start(&model, &cfg.solver, None)?
            };
            record(&mut plan, &model, &result, &index)?;
            plan.order = index;
            if let Some(log) = log {
                log.push(StepModel { label: "joint".into(), model, result });
            }
        }
    }

    let mut provisioned = LoadMap::zeros(graph);
    for (sp, spec) in plan.slices.iter_mut().zip(slices) {
        sp.cost = cost(sp, spec, graph);
        sp.satisfied = sp.accepted;
        provisioned.add_assign(&sp.usage(spec, graph));
    }
    plan.provisioned = provisioned;
    Ok(plan)
}

fn slice_of(role: &VarRole) -> Option<usize> {
    match *role {
        VarRole::NodeInstances { slice, .. }
        | VarRole::LinkInstances { slice, .. }
        | VarRole::NodeUsed { slice, .. }
        | VarRole::Accept { slice } => Some(slice),
        VarRole::Free => None,
    }
}

/// Joint solve by enumerating acceptance sets.
///
/// Slices interact only through capacity rows, so the standalone optima of
/// the accepted slices bound every joint solution with that acceptance set.
/// Sets are tried in decreasing bound order, each as a MILP with acceptance
/// fixed, capped by its bound and seeded with the union of standalone plans;
/// the search stops once no remaining bound beats the incumbent.
fn solve_joint(
    model: &MilpModel,
    empty: &ProvisioningPlan,
    requests: &[SliceRequest],
    graph: &InfrastructureGraph,
    cfg: &VariantConfig,
) -> Result<SolveResult> {
    let started = std::time::Instant::now();
    let index: Vec<usize> = (0..requests.len()).collect();
    let zeros = LoadMap::zeros(graph);
    let mut alone = empty.clone();
    let mut value = Vec::with_capacity(requests.len());
    let mut proven = true;
    let (mut nodes, mut iterations) = (0, 0);
    for (s, req) in requests.iter().enumerate() {
        let (m, r) = solve_step(req, graph, &empty.reserves, &zeros, &cfg.solver)?;
        proven &= r.status == SolveStatus::Optimal;
        value.push(if r.status == SolveStatus::Optimal { r.objective } else { r.best_bound });
        nodes += r.node_count;
        iterations += r.lp_iterations;
        record(&mut alone, &m, &r, &[s])?;
    }
    let union = assignment_from_plan(model, &alone, &index);
    let mut starts = vec![union.clone()];
    if cfg.sequential_start {
        let mut seq = empty.clone();
        let by_income = VariantConfig { ordering: OrderingPolicy::ByIncome, ..cfg.clone() };
        run_sequential(&mut seq, requests, graph, &by_income, None)?;
        starts.push(assignment_from_plan(model, &seq, &index));
    }
    if !proven {
        let hints = SolveHints { starts: starts.iter().map(Vec::as_slice).collect(), upper_bound: None };
        return solve_with_hints(model, &cfg.solver, &hints);
    }

    let mut best: Option<(f64, Vec<i64>)> = None;
    for x in &starts {
        if model.check_assignment(x, 1e-6).is_ok() {
            let obj = model.objective_value(&x.iter().map(|&v| v as f64).collect::<Vec<_>>());
            if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                best = Some((obj, x.clone()));
            }
        }
    }
    // Slices without a profitable standalone plan stay rejected.
    let candidates: Vec<usize> = (0..requests.len()).filter(|&s| alone.slices[s].accepted && value[s] > 0.0).collect();
    let mut sets: Vec<(f64, u64)> = (0..1u64 << candidates.len())
        .map(|mask| {
            let bound = candidates.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &s)| value[s]).sum();
            (bound, mask)
        })
        .collect();
    sets.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));

    let tol = |v: f64| cfg.solver.gap_tolerance * v.abs().max(1.0);
    let mut status = SolveStatus::Optimal;
    let mut open_bound = f64::NEG_INFINITY;
    for &(bound, mask) in &sets {
        if let Some((b, _)) = &best {
            if bound <= b + tol(*b) {
                break;
            }
        }
        let remaining = cfg.solver.time_limit - started.elapsed().as_secs_f64();
        if remaining <= 0.0 {
            status = SolveStatus::Timeout;
            open_bound = open_bound.max(bound);
            break;
        }
        let accepted: Vec<bool> =
            (0..requests.len()).map(|s| candidates.iter().position(|&c| c == s).is_some_and(|k| mask >> k & 1 == 1)).collect();
        let mut sub = model.clone();
        for (var, role) in sub.variables.iter_mut().zip(&model.metadata) {
            if let VarRole::Accept { slice } = role {
                let v = if accepted[*slice] { 1.0 } else { 0.0 };
                var.lower = v;
                var.upper = v;
            }
        }
        let seed: Vec<i64> =
            union.iter().zip(&model.metadata).map(|(&x, role)| if slice_of(role).is_some_and(|s| !accepted[s]) { 0 } else { x }).collect();
        let mut sub_starts: Vec<&[i64]> = vec![&seed];
        sub_starts.extend(best.iter().map(|(_, x)| x.as_slice()));
        let sub_cfg = SolverConfig { time_limit: remaining, ..cfg.solver.clone() };
        let r = solve_with_hints(&sub, &sub_cfg, &SolveHints { starts: sub_starts, upper_bound: Some(bound) })?;
        nodes += r.node_count;
        iterations += r.lp_iterations;
        if !r.assignment.is_empty() && best.as_ref().is_none_or(|(b, _)| r.objective > *b) {
            best = Some((r.objective, r.assignment.clone()));
        }
        if matches!(r.status, SolveStatus::Timeout | SolveStatus::FeasibleGap) {
            status = r.status;
            open_bound = open_bound.max(r.best_bound);
        }
    }
    let (objective, assignment) = best.ok_or_else(|| Error::Solution("no feasible joint plan".into()))?;
    let best_bound = open_bound.max(objective);
    let gap = ((best_bound - objective) / objective.abs().max(1.0)).max(0.0);
    if status != SolveStatus::Optimal && gap <= cfg.solver.gap_tolerance {
        status = SolveStatus::Optimal;
    }
    Ok(SolveResult {
        status,
        objective,
        assignment,
        gap,
        root_bound: sets.first().map_or(objective, |s| s.0),
        best_bound,
        node_count: nodes,
        lp_iterations: iterations,
        wall_time: started.elapsed(),
    })
}

fn status_rank(s: SolveStatus) -> u8 {
    match s {
        SolveStatus::Optimal => 0,
        SolveStatus::FeasibleGap => 1,
        SolveStatus::Timeout => 2,
        SolveStatus::Infeasible => 3,
    }
}

/// Copies a solved model's assignment into the plan; `index[s]` maps model
/// slice positions to input indices.
fn record(plan: &mut ProvisioningPlan, model: &MilpModel, result: &SolveResult, index: &[usize]) -> Result<()> {
    if status_rank(result.status) > status_rank(plan.status) {
        plan.status = result.status;
    }
    plan.solves.push(SolveStats::from(result));
    if result.assignment.len() != model.var_count() {
        return Err(Error::Solution(format!("solver returned no assignment ({})", result.status.as_str())));
    }
    for (role, &x) in model.metadata.iter().zip(&result.assignment) {
        let x = u64::try_from(x).map_err(|_| Error::Solution("negative variable value".into()))?;
        match *role {
            VarRole::NodeInstances { slice, node, vnf } => plan.slices[index[slice]].node_instances[node][vnf] = x,
            VarRole::LinkInstances { slice, link, vlink } => plan.slices[index[slice]].link_instances[link][vlink] = x,
            VarRole::NodeUsed { slice, node } => plan.slices[index[slice]].node_used[node] = x == 1,
            VarRole::Accept { slice } => plan.slices[index[slice]].accepted = x == 1,
            VarRole::Free => {}
        }
    }
    Ok(())
}

/// The plan's values for the variables of `model`.
pub fn assignment_from_plan(model: &MilpModel, plan: &ProvisioningPlan, index: &[usize]) -> Vec<i64> {
    model
        .metadata
        .iter()
        .map(|role| match *role {
            VarRole::NodeInstances { slice, node, vnf } => plan.slices[index[slice]].node_instances[node][vnf] as i64,
            VarRole::LinkInstances { slice, link, vlink } => plan.slices[index[slice]].link_instances[link][vlink] as i64,
            VarRole::NodeUsed { slice, node } => plan.slices[index[slice]].node_used[node] as i64,
            VarRole::Accept { slice } => plan.slices[index[slice]].accepted as i64,
            VarRole::Free => 0,
        })
        .collect()
}

/// Standalone solve of one slice on the capacity left after `consumed`.
fn solve_step(
    req: &SliceRequest,
    graph: &InfrastructureGraph,
    reserves: &LoadMap,
    consumed: &LoadMap,
    solver: &SolverConfig,
) -> Result<(MilpModel, SolveResult)> {
    let model = build_sequential_step(req, graph, reserves, consumed)?;
    let result = solve_with_start(&model, solver, None)?;
    Ok((model, result))
}

fn run_sequential(
    plan: &mut ProvisioningPlan,
    requests: &[SliceRequest],
    graph: &InfrastructureGraph,
    cfg: &VariantConfig,
    mut log: Option<&mut Vec<StepModel>>,
) -> Result<()> {
    let reserves = plan.reserves.clone();
    let mut consumed = LoadMap::zeros(graph);
    let mut remaining: Vec<usize> = match cfg.ordering {
        OrderingPolicy::Greedy => (0..requests.len()).collect(),
        policy => order_by(requests, policy),
    };
    let mut order = Vec::with_capacity(requests.len());
    while !remaining.is_empty() {
        let (pos, model, result) = if cfg.ordering == OrderingPolicy::Greedy {
            let mut best: Option<(usize, MilpModel, SolveResult)> = None;
            for (pos, &s) in remaining.iter().enumerate() {
                let (model, result) = solve_step(&requests[s], graph, &reserves, &consumed, &cfg.solver)?;
                let better = match &best {
                    None => true,
                    Some((bp, _, br)) => {
                        result.objective > br.objective + 1e-9
                            || ((result.objective - br.objective).abs() <= 1e-9 && requests[s].spec.id < requests[remaining[*bp]].spec.id)
                    }
                };
                if better {
                    best = Some((pos, model, result));
                }
            }
            best.expect("remaining is non-empty")
        } else {
            let (model, result) = solve_step(&requests[remaining[0]], graph, &reserves, &consumed, &cfg.solver)?;
            (0, model, result)
        };
        let s = remaining.remove(pos);
        plan.warnings.extend(model.warnings.iter().cloned());
        record(plan, &model, &result, &[s])?;
        if plan.slices[s].accepted {
            consumed.add_assign(&plan.slices[s].usage(requests[s].spec, graph));
        }
        if let Some(log) = log.as_deref_mut() {
            log.push(StepModel { label: format!("step{}-{}", order.len(), requests[s].spec.id), model, result });
        }
        order.push(s);
    }
    plan.order = order;
    Ok(())
}

fn order_by(requests: &[SliceRequest], policy: OrderingPolicy) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..requests.len()).collect();
    if policy == OrderingPolicy::ByIncome {
        idx.sort_by(|&a, &b| {
            let (sa, sb) = (requests[a].spec, requests[b].spec);
            sb.income.total_cmp(&sa.income).then_with(|| sa.id.cmp(&sb.id)).then(a.cmp(&b))
        });
    }
    idx
}

/// Order in which `policy` would provision `slices` on the full residual
/// capacity. Greedy runs the standalone solves step by step.
pub fn order_slices(
    slices: &[SliceSpec],
    calibrated: &[(Calibration, DemandBox)],
    graph: &InfrastructureGraph,
    background: &BackgroundModel,
    cfg: &VariantConfig,
) -> Result<Vec<usize>> {
    match cfg.ordering {
        OrderingPolicy::Greedy => {
            let seq = VariantConfig { mode: Mode::Sequential, ..cfg.clone() };
            Ok(provision_calibrated(slices, calibrated, graph, background, &seq)?.order)
        }
        policy => {
            let requests: Vec<SliceRequest> =
                slices.iter().zip(calibrated).map(|(spec, (_, target))| SliceRequest { spec, target: target.clone() }).collect();
            Ok(order_by(&requests, policy))
        }
    }
}
