//! Solver-neutral mixed-integer linear model.

use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    NonnegInteger,
    Binary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpVariable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Ge => lhs >= rhs - tol,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Exact rational coefficient built from a finite float.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(BigRational, usize)>,
    pub relation: Relation,
    pub rhs: BigRational,
}

impl LinearConstraint {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, j)| to_f64(c) * x[*j]).sum()
    }

    /// Exact evaluation for an integer assignment.
    pub fn holds_exactly(&self, x: &[i64]) -> bool {
        let lhs: BigRational =
            self.terms.iter().map(|(c, j)| c * BigRational::from_integer(x[*j].into())).fold(BigRational::zero(), |a, b| a + b);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// What a variable stands for. Slice indices are positions within the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// Instances of VNF `vnf` of slice `slice` hosted on node `node`.
    NodeInstances { slice: usize, node: usize, vnf: usize },
    /// Instances of virtual link `vlink` routed over infrastructure link `link`.
    LinkInstances { slice: usize, link: usize, vlink: usize },
    /// Whether slice `slice` uses node `node`.
    NodeUsed { slice: usize, node: usize },
    /// Whether slice `slice` is accepted.
    Accept { slice: usize },
    /// Anything else (hand-built models).
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Demand,
    Capacity,
    Flow,
    FixedCost,
    Other,
}

/// Maximization problem `max cᵀx` over bounded integer variables.
#[derive(Clone, Debug, Default)]
pub struct MilpModel {
    pub variables: Vec<MilpVariable>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Vec<f64>,
    pub metadata: Vec<VarRole>,
    pub row_kinds: Vec<RowKind>,
    /// Slice identifiers, indexed by the slice positions used in `metadata`.
    pub slice_ids: Vec<String>,
    pub warnings: Vec<String>,
}

impl MilpModel {
    pub fn new() -> Self {
        MilpModel::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, kind: VarKind, upper: f64, objective: f64, role: VarRole) -> usize {
        let upper = match kind {
            VarKind::Binary => upper.clamp(0.0, 1.0),
            VarKind::NonnegInteger => upper.max(0.0).floor(),
        };
        self.variables.push(MilpVariable { name: name.into(), kind, lower: 0.0, upper });
        self.objective.push(objective);
        self.metadata.push(role);
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(BigRational, usize)>,
        relation: Relation,
        rhs: BigRational,
        kind: RowKind,
    ) -> Result<()> {
        let name = name.into();
        if terms.is_empty() {
            return Err(Error::Model(format!("constraint {name} has no terms")));
        }
        if let Some((_, j)) = terms.iter().find(|(_, j)| *j >= self.variables.len()) {
            return Err(Error::Model(format!("constraint {name} references undeclared variable {j}")));
        }
        self.constraints.push(LinearConstraint { name, terms, relation, rhs });
        self.row_kinds.push(kind);
        Ok(())
    }

    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    pub fn row_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.variables.len() || self.metadata.len() != self.variables.len() {
            return Err(Error::Model("objective or metadata length differs from variable count".into()));
        }
        for v in &self.variables {
            if !(v.lower <= v.upper) || !v.upper.is_finite() {
                return Err(Error::Model(format!("variable {} has invalid bounds", v.name)));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::Model(format!("binary variable {} has bounds outside [0,1]", v.name)));
            }
        }
        for c in &self.constraints {
            if c.terms.is_empty() || c.terms.iter().any(|(_, j)| *j >= self.variables.len()) {
                return Err(Error::Model(format!("constraint {} is malformed", c.name)));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// First violated bound, integrality or row for `x`, within `tol`.
    pub fn check_assignment(&self, x: &[i64], tol: f64) -> Result<()> {
        if x.len() != self.variables.len() {
            return Err(Error::Dimension { expected: self.variables.len(), got: x.len() });
        }
        for (v, &val) in self.variables.iter().zip(x) {
            let f = val as f64;
            if f < v.lower - tol || f > v.upper + tol {
                return Err(Error::Solution(format!("variable {} = {val} outside [{}, {}]", v.name, v.lower, v.upper)));
            }
        }
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        for c in &self.constraints {
            let lhs = c.lhs(&xf);
            if !c.relation.holds(lhs, to_f64(&c.rhs), tol) {
                return Err(Error::Solution(format!("row {} violated: {lhs} {} {}", c.name, c.relation, to_f64(&c.rhs))));
            }
        }
        Ok(())
    }

    /// Rows of the given kind that fail an exact rational check.
    pub fn exact_violations(&self, x: &[i64], kind: RowKind) -> Vec<String> {
        self.constraints
            .iter()
            .zip(&self.row_kinds)
            .filter(|(c, k)| **k == kind && !c.holds_exactly(x))
            .map(|(c, _)| c.name.clone())
            .collect()
    }
}
