//! MILP formulations of joint and slice-by-slice provisioning.
//!
//! Each slice `s` contributes integer instance counts per (node, VNF) and per
//! (link, virtual link), a binary usage flag per node and a binary acceptance
//! flag. Demand rows require the provisioned totals to reach the calibrated
//! target box whenever the slice is accepted; capacity rows keep the total
//! provisioning under capacity minus background reserve and prior usage.

pub mod model;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::demand::{vlink_component, vnf_component, LoadMap, SliceSpec};
use crate::error::{Error, Result};
use crate::probability::DemandBox;
use crate::topology::{InfrastructureGraph, ResourceType, ResourceVector};

pub use model::{rational, LinearConstraint, MilpModel, MilpVariable, Relation, RowKind, VarKind, VarRole};

/// A slice together with its calibrated target box.
#[derive(Clone, Debug)]
pub struct SliceRequest<'a> {
    pub spec: &'a SliceSpec,
    pub target: DemandBox,
}

/// Variable indices of one slice inside a model.
#[derive(Clone, Debug)]
pub struct SliceVars {
    pub slice: usize,
    /// `node[i][v]`
    pub node: Vec<Vec<usize>>,
    /// `link[e][l]`
    pub link: Vec<Vec<usize>>,
    pub used: Vec<usize>,
    pub accept: usize,
}

const SNAP: f64 = 1e-9;

/// Capacity left for new provisioning: `max(0, a − reserve − consumed)`.
/// Elements whose reserve alone exceeds capacity are reported in `warnings`.
pub fn residual_capacity(
    graph: &InfrastructureGraph,
    reserves: &LoadMap,
    consumed: &LoadMap,
    warnings: &mut Vec<String>,
) -> Result<LoadMap> {
    let (n, e) = (graph.node_count(), graph.link_count());
    for map in [reserves, consumed] {
        if map.node.len() != n || map.link.len() != e {
            return Err(Error::Dimension { expected: n + e, got: map.node.len() + map.link.len() });
        }
    }
    let mut out = LoadMap::zeros(graph);
    for (i, node) in graph.nodes.iter().enumerate() {
        for kind in ResourceType::ALL {
            let a = node.capacity.get(kind);
            let reserve = reserves.node[i].get(kind);
            if a - reserve < 0.0 {
                warnings.push(format!("node {} {}: reserve {reserve} exceeds capacity {a}", node.id, kind.short()));
            }
            *out.node[i].get_mut(kind) = (a - reserve - consumed.node[i].get(kind)).max(0.0);
        }
    }
    for (j, link) in graph.links.iter().enumerate() {
        if link.bandwidth - reserves.link[j] < 0.0 {
            warnings.push(format!("link {}: reserve {} exceeds bandwidth {}", graph.link_label(j), reserves.link[j], link.bandwidth));
        }
        out.link[j] = (link.bandwidth - reserves.link[j] - consumed.link[j]).max(0.0);
    }
    Ok(out)
}

/// Instances needed to cover `target` at `per_instance` each; `None` when a
/// positive target cannot be met (zero requirement).
fn instances_needed(target: f64, per_instance: f64) -> Option<u64> {
    if target <= 0.0 {
        Some(0)
    } else if per_instance > 0.0 {
        Some((target / per_instance - SNAP).ceil().max(0.0) as u64)
    } else {
        None
    }
}

fn capacity_cap(residual: f64, per_instance: f64) -> Option<u64> {
    (per_instance > 0.0).then(|| (residual / per_instance + SNAP).floor().max(0.0) as u64)
}

/// Upper bounds on the instance variables of one slice.
///
/// In a chain every VNF ends up with the same total instance count `T`
/// (flow balance telescopes along the chain) and an optimal plan never
/// exceeds the largest per-VNF requirement, so `T` bounds every node
/// variable. A link carries at most `T` routed units plus the units that
/// only serve its own bandwidth target.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceBounds {
    pub node: Vec<Vec<u64>>,
    pub link: Vec<Vec<u64>>,
    /// Instances each VNF needs once accepted.
    pub vnf_count: Vec<u64>,
    /// Instances each virtual link needs once accepted.
    pub vlink_count: Vec<u64>,
    /// Whether every positive target can be reached by some instance type.
    pub attainable: bool,
}

pub fn instance_bounds(spec: &SliceSpec, target: &DemandBox, graph: &InfrastructureGraph, residual: &LoadMap) -> Result<InstanceBounds> {
    if target.dim() != spec.dim() {
        return Err(Error::Dimension { expected: spec.dim(), got: target.dim() });
    }
    let sfc = &spec.sfc;
    let nv = sfc.vnfs.len();
    let mut attainable = true;
    let mut vnf_need = vec![0u64; nv];
    for (v, vnf) in sfc.vnfs.iter().enumerate() {
        for kind in ResourceType::ALL {
            match instances_needed(target.upper[vnf_component(v, kind)], vnf.requirement.get(kind)) {
                Some(k) => vnf_need[v] = vnf_need[v].max(k),
                None => attainable = false,
            }
        }
    }
    let mut vlink_need = vec![0u64; sfc.vlinks.len()];
    for (l, vl) in sfc.vlinks.iter().enumerate() {
        match instances_needed(target.upper[vlink_component(nv, l)], vl.bandwidth) {
            Some(k) => vlink_need[l] = k,
            None => attainable = false,
        }
    }
    let total: u64 = if sfc.is_chain() {
        vnf_need.iter().copied().max().unwrap_or(0)
    } else {
        vnf_need.iter().sum::<u64>() + vlink_need.iter().sum::<u64>()
    };
    // Positive bandwidth on every hop ties all chain totals together.
    let vnf_count = if sfc.is_chain() && sfc.vlinks.iter().all(|vl| vl.bandwidth > 0.0) { vec![total; nv] } else { vnf_need.clone() };

    let node = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, _)| {
            sfc.vnfs
                .iter()
                .map(|vnf| {
                    ResourceType::ALL
                        .iter()
                        .filter_map(|&k| capacity_cap(residual.node[i].get(k), vnf.requirement.get(k)))
                        .fold(total, u64::min)
                })
                .collect()
        })
        .collect();
    let link = (0..graph.link_count())
        .map(|e| {
            sfc.vlinks
                .iter()
                .enumerate()
                .map(|(l, vl)| {
                    let cap = capacity_cap(residual.link[e], vl.bandwidth);
                    cap.map_or(total + vlink_need[l], |c| c.min(total + vlink_need[l]))
                })
                .collect()
        })
        .collect();
    Ok(InstanceBounds { node, link, vnf_count, vlink_count: vlink_need, attainable })
}

/// Declares the variables of one slice with their objective coefficients.
pub fn declare_slice_vars(
    model: &mut MilpModel,
    s: usize,
    spec: &SliceSpec,
    graph: &InfrastructureGraph,
    bounds: &InstanceBounds,
) -> SliceVars {
    let sfc = &spec.sfc;
    let node = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, inode)| {
            sfc.vnfs
                .iter()
                .enumerate()
                .map(|(v, vnf)| {
                    let unit_cost = dot(&vnf.requirement, &inode.unit_cost);
                    model.add_variable(
                        format!("kn_s{s}_i{i}_v{v}"),
                        VarKind::NonnegInteger,
                        bounds.node[i][v] as f64,
                        -unit_cost,
                        VarRole::NodeInstances { slice: s, node: i, vnf: v },
                    )
                })
                .collect()
        })
        .collect();
    let link = graph
        .links
        .iter()
        .enumerate()
        .map(|(e, ilink)| {
            sfc.vlinks
                .iter()
                .enumerate()
                .map(|(l, vl)| {
                    model.add_variable(
                        format!("kl_s{s}_e{e}_l{l}"),
                        VarKind::NonnegInteger,
                        bounds.link[e][l] as f64,
                        -vl.bandwidth * ilink.unit_cost,
                        VarRole::LinkInstances { slice: s, link: e, vlink: l },
                    )
                })
                .collect()
        })
        .collect();
    let used = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, inode)| {
            let any = bounds.node[i].iter().any(|&u| u > 0);
            model.add_variable(
                format!("ku_s{s}_i{i}"),
                VarKind::Binary,
                if any { 1.0 } else { 0.0 },
                -inode.fixed_cost,
                VarRole::NodeUsed { slice: s, node: i },
            )
        })
        .collect();
    let accept = model.add_variable(
        format!("d_s{s}"),
        VarKind::Binary,
        if bounds.attainable { 1.0 } else { 0.0 },
        spec.income,
        VarRole::Accept { slice: s },
    );
    SliceVars { slice: s, node, link, used, accept }
}

fn dot(a: &ResourceVector, b: &ResourceVector) -> f64 {
    a.compute * b.compute + a.memory * b.memory + a.wireless * b.wireless
}

/// Demand rows: provisioned totals reach the target box when the slice is accepted.
pub fn demand_rows(spec: &SliceSpec, target: &DemandBox, vars: &SliceVars) -> Vec<(String, LinearConstraint)> {
    let s = vars.slice;
    let sfc = &spec.sfc;
    let nv = sfc.vnfs.len();
    let mut rows = Vec::new();
    let mut push = |name: String, coef: f64, cols: Vec<usize>, goal: f64| {
        if goal <= 0.0 {
            return;
        }
        let mut terms: Vec<(BigRational, usize)> =
            if coef > 0.0 { cols.into_iter().map(|j| (rational(coef), j)).collect() } else { Vec::new() };
        terms.push((-rational(goal), vars.accept));
        rows.push((name.clone(), LinearConstraint { name, terms, relation: Relation::Ge, rhs: BigRational::zero() }));
    };
    for (v, vnf) in sfc.vnfs.iter().enumerate() {
        for kind in ResourceType::ALL {
            let cols = vars.node.iter().map(|row| row[v]).collect();
            push(format!("dem_s{s}_v{v}_{}", kind.short()), vnf.requirement.get(kind), cols, target.upper[vnf_component(v, kind)]);
        }
    }
    for (l, vl) in sfc.vlinks.iter().enumerate() {
        let cols = vars.link.iter().map(|row| row[l]).collect();
        push(format!("dem_s{s}_l{l}_b"), vl.bandwidth, cols, target.upper[vlink_component(nv, l)]);
    }
    rows
}

/// Flow conservation for every node and virtual link `vw`:
/// `Σ_j κ(ij,vw) − Σ_j κ(ji,vw) − ρ_out κ(i,v) + ρ_in κ(i,w) = 0`.
pub fn flow_constraints(spec: &SliceSpec, graph: &InfrastructureGraph, vars: &SliceVars) -> Vec<LinearConstraint> {
    let s = vars.slice;
    let sfc = &spec.sfc;
    let mut rows = Vec::new();
    for i in 0..graph.node_count() {
        for (l, vl) in sfc.vlinks.iter().enumerate() {
            let mut terms = Vec::new();
            for (e, link) in graph.links.iter().enumerate() {
                if link.is_loopback() {
                    continue;
                }
                if link.src == i {
                    terms.push((BigRational::one(), vars.link[e][l]));
                } else if link.dst == i {
                    terms.push((-BigRational::one(), vars.link[e][l]));
                }
            }
            let out_total = rational(sfc.out_bandwidth(vl.src));
            if !out_total.is_zero() {
                terms.push((-(rational(vl.bandwidth) / out_total), vars.node[i][vl.src]));
            }
            let in_total = rational(sfc.in_bandwidth(vl.dst));
            if !in_total.is_zero() {
                terms.push((rational(vl.bandwidth) / in_total, vars.node[i][vl.dst]));
            }
            terms.retain(|(c, _)| !c.is_zero());
            if terms.is_empty() {
                continue;
            }
            rows.push(LinearConstraint { name: format!("flow_s{s}_i{i}_l{l}"), terms, relation: Relation::Eq, rhs: BigRational::zero() });
        }
    }
    rows
}

/// Usage-flag rows `Σ_v κ(i,v) ≤ M_i κ̃(i)` with `M_i = Σ_v U(i,v)`, plus the
/// per-VNF rows `κ(i,v) ≤ U(i,v) κ̃(i)` that tighten the relaxation.
pub fn fixed_cost_rows(vars: &SliceVars, bounds: &InstanceBounds) -> Vec<LinearConstraint> {
    let s = vars.slice;
    let mut rows = Vec::new();
    for (i, ub) in bounds.node.iter().enumerate() {
        let big_m: u64 = ub.iter().sum();
        if big_m == 0 {
            continue;
        }
        let mut terms: Vec<(BigRational, usize)> = vars.node[i].iter().map(|&j| (BigRational::one(), j)).collect();
        terms.push((-BigRational::from_integer(big_m.into()), vars.used[i]));
        rows.push(LinearConstraint { name: format!("fix_s{s}_i{i}"), terms, relation: Relation::Le, rhs: BigRational::zero() });
        for (v, &u) in ub.iter().enumerate() {
            if u == 0 || ub.iter().filter(|&&x| x > 0).count() < 2 {
                continue;
            }
            rows.push(LinearConstraint {
                name: format!("fix_s{s}_i{i}_v{v}"),
                terms: vec![(BigRational::one(), vars.node[i][v]), (-BigRational::from_integer(u.into()), vars.used[i])],
                relation: Relation::Le,
                rhs: BigRational::zero(),
            });
        }
    }
    rows
}

/// Integer rounding of the demand rows: `Σ_i κ(i,v) ≥ n_v d` and
/// `Σ_e κ(e,l) ≥ n_l d`. Same integer solutions, tighter relaxation.
pub fn count_rows(vars: &SliceVars, bounds: &InstanceBounds) -> Vec<LinearConstraint> {
    let s = vars.slice;
    let mut rows = Vec::new();
    let mut push = |name: String, cols: Vec<usize>, need: u64| {
        if need == 0 {
            return;
        }
        let mut terms: Vec<(BigRational, usize)> = cols.into_iter().map(|j| (BigRational::one(), j)).collect();
        terms.push((-BigRational::from_integer(need.into()), vars.accept));
        rows.push(LinearConstraint { name, terms, relation: Relation::Ge, rhs: BigRational::zero() });
    };
    for (v, &need) in bounds.vnf_count.iter().enumerate() {
        push(format!("cnt_s{s}_v{v}"), vars.node.iter().map(|row| row[v]).collect(), need);
    }
    for (l, &need) in bounds.vlink_count.iter().enumerate() {
        push(format!("cnt_s{s}_l{l}"), vars.link.iter().map(|row| row[l]).collect(), need);
    }
    rows
}

/// Per-node capacity rows switched by the usage flag:
/// `Σ_v r_n(v) κ(i,v) ≤ a_n(i) κ̃(i)`, for resources shared by two or more VNFs.
pub fn usage_capacity_rows(spec: &SliceSpec, vars: &SliceVars, bounds: &InstanceBounds, residual: &LoadMap) -> Vec<LinearConstraint> {
    let s = vars.slice;
    let mut rows = Vec::new();
    for (i, ub) in bounds.node.iter().enumerate() {
        for kind in ResourceType::ALL {
            let terms: Vec<(BigRational, usize)> = spec
                .sfc
                .vnfs
                .iter()
                .enumerate()
                .filter(|(v, vnf)| ub[*v] > 0 && vnf.requirement.get(kind) > 0.0)
                .map(|(v, vnf)| (rational(vnf.requirement.get(kind)), vars.node[i][v]))
                .collect();
            if terms.len() < 2 {
                continue;
            }
            let mut terms = terms;
            terms.push((-rational(residual.node[i].get(kind)), vars.used[i]));
            rows.push(LinearConstraint {
                name: format!("fixcap_s{s}_i{i}_{}", kind.short()),
                terms,
                relation: Relation::Le,
                rhs: BigRational::zero(),
            });
        }
    }
    rows
}

fn capacity_rows(
    model: &mut MilpModel,
    graph: &InfrastructureGraph,
    slices: &[SliceRequest],
    vars: &[SliceVars],
    residual: &LoadMap,
) -> Result<()> {
    for i in 0..graph.node_count() {
        for kind in ResourceType::ALL {
            let terms: Vec<(BigRational, usize)> = slices
                .iter()
                .zip(vars)
                .flat_map(|(req, sv)| {
                    req.spec.sfc.vnfs.iter().enumerate().filter_map(move |(v, vnf)| {
                        let r = vnf.requirement.get(kind);
                        (r > 0.0).then(|| (rational(r), sv.node[i][v]))
                    })
                })
                .collect();
            if !terms.is_empty() {
                model.add_constraint(
                    format!("cap_i{i}_{}", kind.short()),
                    terms,
                    Relation::Le,
                    rational(residual.node[i].get(kind)),
                    RowKind::Capacity,
                )?;
            }
        }
    }
    for e in 0..graph.link_count() {
        let terms: Vec<(BigRational, usize)> = slices
            .iter()
            .zip(vars)
            .flat_map(|(req, sv)| {
                req.spec
                    .sfc
                    .vlinks
                    .iter()
                    .enumerate()
                    .filter(|(_, vl)| vl.bandwidth > 0.0)
                    .map(move |(l, vl)| (rational(vl.bandwidth), sv.link[e][l]))
            })
            .collect();
        if !terms.is_empty() {
            model.add_constraint(format!("cap_e{e}_b"), terms, Relation::Le, rational(residual.link[e]), RowKind::Capacity)?;
        }
    }
    Ok(())
}

fn build(slices: &[SliceRequest], graph: &InfrastructureGraph, reserves: &LoadMap, consumed: &LoadMap) -> Result<MilpModel> {
    let mut model = MilpModel::new();
    let residual = residual_capacity(graph, reserves, consumed, &mut model.warnings)?;
    let mut all_vars = Vec::with_capacity(slices.len());
    let mut all_bounds = Vec::with_capacity(slices.len());
    for (s, req) in slices.iter().enumerate() {
        req.spec.validate()?;
        let bounds = instance_bounds(req.spec, &req.target, graph, &residual)?;
        let vars = declare_slice_vars(&mut model, s, req.spec, graph, &bounds);
        model.slice_ids.push(req.spec.id.clone());
        all_vars.push(vars);
        all_bounds.push(bounds);
    }
    for ((req, vars), bounds) in slices.iter().zip(&all_vars).zip(&all_bounds) {
        for (name, row) in demand_rows(req.spec, &req.target, vars) {
            model.add_constraint(name, row.terms, row.relation, row.rhs, RowKind::Demand)?;
        }
        for row in flow_constraints(req.spec, graph, vars) {
            model.add_constraint(row.name, row.terms, row.relation, row.rhs, RowKind::Flow)?;
        }
        for row in count_rows(vars, bounds) {
            model.add_constraint(row.name, row.terms, row.relation, row.rhs, RowKind::Demand)?;
        }
        for row in fixed_cost_rows(vars, bounds).into_iter().chain(usage_capacity_rows(req.spec, vars, bounds, &residual)) {
            model.add_constraint(row.name, row.terms, row.relation, row.rhs, RowKind::FixedCost)?;
        }
    }
    capacity_rows(&mut model, graph, slices, &all_vars, &residual)?;
    model.validate()?;
    Ok(model)
}

/// Joint model over all slices. Zero reserves give the impact-unaware variant.
pub fn build_joint(slices: &[SliceRequest], graph: &InfrastructureGraph, reserves: &LoadMap) -> Result<MilpModel> {
    build(slices, graph, reserves, &LoadMap::zeros(graph))
}

/// Single-slice model on the capacity left after `consumed`.
pub fn build_sequential_step(
    slice: &SliceRequest,
    graph: &InfrastructureGraph,
    reserves: &LoadMap,
    consumed: &LoadMap,
) -> Result<MilpModel> {
    build(std::slice::from_ref(slice), graph, reserves, consumed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::SliceType;
    use crate::probability::{targets_for_gamma, StatMode};
    use crate::topology::{build_fat_tree, FatTreeConfig};

    fn graph() -> InfrastructureGraph {
        build_fat_tree(&FatTreeConfig::default()).unwrap()
    }

    #[test]
    fn variable_count_for_one_type1_slice() {
        let g = graph();
        let spec = SliceType::Type1.spec();
        let target = targets_for_gamma(&spec, 100.0, StatMode::PerUser).unwrap();
        let m = build_joint(&[SliceRequest { spec: &spec, target }], &g, &LoadMap::zeros(&g)).unwrap();
        assert_eq!(m.var_count(), 15 * 3 + 43 * 2 + 15 + 1);
        let count = |f: fn(&VarRole) -> bool| m.metadata.iter().filter(|r| f(r)).count();
        assert_eq!(count(|r| matches!(r, VarRole::NodeInstances { .. })), 45);
        assert_eq!(count(|r| matches!(r, VarRole::LinkInstances { .. })), 86);
        assert_eq!(count(|r| matches!(r, VarRole::NodeUsed { .. })), 15);
        assert_eq!(count(|r| matches!(r, VarRole::Accept { .. })), 1);
        assert_eq!(m.row_kinds.iter().filter(|k| **k == RowKind::Flow).count(), 15 * 2);
    }

    #[test]
    fn sequential_step_without_consumption_matches_joint() {
        let g = graph();
        let spec = SliceType::Type2.spec();
        let target = targets_for_gamma(&spec, 50.0, StatMode::PerUser).unwrap();
        let req = SliceRequest { spec: &spec, target };
        let zero = LoadMap::zeros(&g);
        let a = build_joint(std::slice::from_ref(&req), &g, &zero).unwrap();
        let b = build_sequential_step(&req, &g, &zero, &zero).unwrap();
        assert_eq!(a.variables, b.variables);
        assert_eq!(a.constraints, b.constraints);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn consumption_reduces_capacity_rows() {
        let g = graph();
        let spec = SliceType::Type1.spec();
        let target = targets_for_gamma(&spec, 100.0, StatMode::PerUser).unwrap();
        let req = SliceRequest { spec: &spec, target };
        let zero = LoadMap::zeros(&g);
        let mut consumed = LoadMap::zeros(&g);
        consumed.node[3].compute = 5.0;
        consumed.node[0] = g.nodes[0].capacity;
        let m = build_sequential_step(&req, &g, &zero, &consumed).unwrap();
        let rhs = |name: &str| {
            let c = m.constraints.iter().find(|c| c.name == name).unwrap();
            model::to_f64(&c.rhs)
        };
        assert_eq!(rhs("cap_i3_c"), g.nodes[3].capacity.compute - 5.0);
        assert_eq!(rhs("cap_i0_c"), 0.0);
        for v in 0..3 {
            let j = m.variable_index(&format!("kn_s0_i0_v{v}")).unwrap();
            assert_eq!(m.variables[j].upper, 0.0);
        }
    }

    #[test]
    fn chain_ratios_are_unit() {
        let g = graph();
        let spec = SliceType::Type3.spec();
        let target = targets_for_gamma(&spec, 10.0, StatMode::PerUser).unwrap();
        let m = build_joint(&[SliceRequest { spec: &spec, target }], &g, &LoadMap::zeros(&g)).unwrap();
        for (c, k) in m.constraints.iter().zip(&m.row_kinds) {
            if *k == RowKind::Flow {
                assert!(c.terms.iter().all(|(q, _)| num_traits::Signed::abs(q) == BigRational::one()));
            }
        }
    }

    #[test]
    fn over_reserved_nodes_are_clamped() {
        let g = graph();
        let spec = SliceType::Type1.spec();
        let target = targets_for_gamma(&spec, 1.0, StatMode::PerUser).unwrap();
        let mut reserves = LoadMap::zeros(&g);
        reserves.node[0].compute = g.nodes[0].capacity.compute * 2.0;
        let m = build_joint(&[SliceRequest { spec: &spec, target }], &g, &reserves).unwrap();
        assert!(!m.warnings.is_empty());
        let c = m.constraints.iter().find(|c| c.name == "cap_i0_c").unwrap();
        assert!(c.rhs.is_zero());
    }

    #[test]
    fn big_m_is_sum_of_bounds() {
        let g = graph();
        let spec = SliceType::Type1.spec();
        let target = targets_for_gamma(&spec, 100.0, StatMode::PerUser).unwrap();
        let m = build_joint(&[SliceRequest { spec: &spec, target }], &g, &LoadMap::zeros(&g)).unwrap();
        for i in 0..g.node_count() {
            let Some(row) = m.constraints.iter().find(|c| c.name == format!("fix_s0_i{i}")) else { continue };
            let used = m.variable_index(&format!("ku_s0_i{i}")).unwrap();
            let coef = row.terms.iter().find(|(_, j)| *j == used).unwrap().0.clone();
            let sum: f64 = (0..3).map(|v| m.variables[m.variable_index(&format!("kn_s0_i{i}_v{v}")).unwrap()].upper).sum();
            assert_eq!(model::to_f64(&-coef), sum);
        }
    }
}
