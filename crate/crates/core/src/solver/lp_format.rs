//! CPLEX-style LP text format: writer, parser and solution import.
//!
//! Layout: `Maximize` objective, `Subject To` rows `name: terms rel rhs`,
//! `Bounds`, `Generals`, `Binaries`, `End`. Every variable gets a bounds line
//! so the declared variable set survives a round trip even when a variable
//! appears in no row.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::optimizer::model::to_f64;
use crate::optimizer::{rational, MilpModel, Relation, RowKind, VarKind, VarRole};
use crate::solver::{SolveResult, SolveStatus};

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut count = 0;
    for (coef, name) in terms {
        if count > 0 && count % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if coef < 0.0 { '-' } else { '+' };
        if count == 0 && sign == '+' {
            let _ = write!(out, " {} {}", coef.abs(), name);
        } else {
            let _ = write!(out, " {sign} {} {}", coef.abs(), name);
        }
        count += 1;
    }
    if count == 0 {
        out.push_str(" 0");
    }
}

/// Renders `model` as LP text.
pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ provisioning model\nMaximize\n obj:");
    write_terms(&mut out, model.objective.iter().zip(&model.variables).filter(|(c, _)| **c != 0.0).map(|(c, v)| (*c, v.name.clone())));
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, c.terms.iter().map(|(q, j)| (to_f64(q), model.variables[*j].name.clone())));
        let _ = writeln!(out, " {} {}", c.relation.symbol(), to_f64(&c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
    }
    let names = |kind: VarKind| -> Vec<&str> { model.variables.iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect() };
    for (header, kind) in [("Generals", VarKind::NonnegInteger), ("Binaries", VarKind::Binary)] {
        let _ = writeln!(out, "{header}");
        for chunk in names(kind).chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

/// Writes `model` to `path` in LP format.
pub fn export_lp(model: &MilpModel, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(write_lp(model).as_bytes())?;
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub relation: Option<Relation>,
    pub rhs: f64,
}

/// Contents of an LP file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedLp {
    pub maximize: bool,
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<ParsedRow>,
    pub bounds: HashMap<String, (f64, f64)>,
    pub generals: Vec<String>,
    pub binaries: Vec<String>,
    /// Variables in order of first appearance.
    pub variables: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "maximize" | "maximise" | "max" => Some(Section::Objective),
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "generals" | "general" | "gen" | "integers" => Some(Section::Generals),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn parse_relation(tok: &str) -> Option<Relation> {
    match tok {
        "<=" | "=<" | "<" => Some(Relation::Le),
        ">=" | "=>" | ">" => Some(Relation::Ge),
        "=" => Some(Relation::Eq),
        _ => None,
    }
}

fn parse_number(tok: &str) -> Option<f64> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().ok(),
    }
}

/// Accumulates `[sign] [coef] name` terms.
struct Expr {
    terms: Vec<(String, f64)>,
    sign: f64,
    coef: Option<f64>,
}

impl Expr {
    fn new() -> Self {
        Expr { terms: Vec::new(), sign: 1.0, coef: None }
    }

    fn push(&mut self, tok: &str, line: usize) -> Result<()> {
        match tok {
            "+" => self.sign = 1.0,
            "-" => self.sign = -self.sign,
            _ => {
                if let Some(v) = parse_number(tok) {
                    if self.coef.is_some() {
                        return Err(Error::LpParse { line, msg: format!("two coefficients in a row near {tok}") });
                    }
                    self.coef = Some(v);
                } else {
                    let c = self.sign * self.coef.unwrap_or(1.0);
                    self.terms.push((tok.to_string(), c));
                    self.sign = 1.0;
                    self.coef = None;
                }
            }
        }
        Ok(())
    }

    /// A trailing constant (such as the lone `0` of an empty objective).
    fn constant(&self) -> f64 {
        self.coef.map_or(0.0, |c| self.sign * c)
    }
}

pub fn parse_lp(text: &str) -> Result<ParsedLp> {
    let mut out = ParsedLp::default();
    let mut section = Section::None;
    let mut expr = Expr::new();
    let mut row_name: Option<String> = None;
    let mut pending_rel: Option<Relation> = None;
    let mut seen = std::collections::HashSet::new();
    let mut note = |name: &str, out: &mut ParsedLp| {
        if seen.insert(name.to_string()) {
            out.variables.push(name.to_string());
        }
    };

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            if section == Section::Objective {
                for (name, _) in &expr.terms {
                    note(name, &mut out);
                }
                out.objective = std::mem::take(&mut expr.terms);
                expr = Expr::new();
            }
            if s == Section::Objective {
                out.maximize = line.to_ascii_lowercase().starts_with("max");
            }
            section = s;
            continue;
        }
        match section {
            Section::None | Section::End => {
                return Err(Error::LpParse { line: line_no, msg: "content outside a section".into() });
            }
            Section::Objective => {
                let mut rest = line;
                if let Some((head, tail)) = line.split_once(':') {
                    rest = tail;
                    let _ = head;
                }
                for tok in rest.split_whitespace() {
                    expr.push(tok, line_no)?;
                }
            }
            Section::Constraints => {
                let mut rest = line;
                if row_name.is_none() {
                    let (name, tail) = match line.split_once(':') {
                        Some((h, t)) => (h.trim().to_string(), t),
                        None => (format!("R{}", out.rows.len() + 1), line),
                    };
                    row_name = Some(name);
                    rest = tail;
                }
                for tok in rest.split_whitespace() {
                    if let Some(rel) = pending_rel {
                        let rhs = parse_number(tok)
                            .ok_or_else(|| Error::LpParse { line: line_no, msg: format!("expected right-hand side, found {tok}") })?;
                        for (name, _) in &expr.terms {
                            note(name, &mut out);
                        }
                        out.rows.push(ParsedRow {
                            name: row_name.take().unwrap_or_default(),
                            terms: std::mem::take(&mut expr.terms),
                            relation: Some(rel),
                            rhs: rhs - expr.constant(),
                        });
                        expr = Expr::new();
                        pending_rel = None;
                        continue;
                    }
                    if let Some(rel) = parse_relation(tok) {
                        pending_rel = Some(rel);
                    } else {
                        expr.push(tok, line_no)?;
                    }
                }
            }
            Section::Bounds => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                let (name, lo, hi) = match toks.as_slice() {
                    [lo, r1, name, r2, hi] if parse_relation(r1) == Some(Relation::Le) && parse_relation(r2) == Some(Relation::Le) => {
                        let lo = parse_number(lo);
                        let hi = parse_number(hi);
                        match (lo, hi) {
                            (Some(l), Some(h)) => (name.to_string(), l, h),
                            _ => return Err(Error::LpParse { line: line_no, msg: "bad bound values".into() }),
                        }
                    }
                    [name, r, v] => {
                        let v = parse_number(v).ok_or_else(|| Error::LpParse { line: line_no, msg: "bad bound value".into() })?;
                        let cur = out.bounds.get(*name).copied().unwrap_or((0.0, f64::INFINITY));
                        match parse_relation(r) {
                            Some(Relation::Le) => (name.to_string(), cur.0, v),
                            Some(Relation::Ge) => (name.to_string(), v, cur.1),
                            Some(Relation::Eq) => (name.to_string(), v, v),
                            None => return Err(Error::LpParse { line: line_no, msg: "bad bound relation".into() }),
                        }
                    }
                    [name, free] if free.eq_ignore_ascii_case("free") => (name.to_string(), f64::NEG_INFINITY, f64::INFINITY),
                    _ => return Err(Error::LpParse { line: line_no, msg: format!("unrecognized bound: {line}") }),
                };
                note(&name, &mut out);
                out.bounds.insert(name, (lo, hi));
            }
            Section::Generals | Section::Binaries => {
                for tok in line.split_whitespace() {
                    note(tok, &mut out);
                    if section == Section::Generals {
                        out.generals.push(tok.to_string());
                    } else {
                        out.binaries.push(tok.to_string());
                    }
                }
            }
        }
    }
    if section == Section::Objective {
        out.objective = std::mem::take(&mut expr.terms);
    }
    if pending_rel.is_some() || row_name.is_some() {
        return Err(Error::LpParse { line: text.lines().count(), msg: "unterminated constraint".into() });
    }
    if section != Section::End {
        return Err(Error::LpParse { line: text.lines().count(), msg: "missing End".into() });
    }
    Ok(out)
}

impl ParsedLp {
    /// Rebuilds a model; variables keep file order, metadata is `Free`.
    pub fn to_model(&self) -> Result<MilpModel> {
        if !self.maximize {
            return Err(Error::LpParse { line: 0, msg: "only maximization models are supported".into() });
        }
        let mut model = MilpModel::new();
        let mut index = HashMap::new();
        for name in &self.variables {
            let kind = if self.binaries.contains(name) { VarKind::Binary } else { VarKind::NonnegInteger };
            let (lo, hi) = self.bounds.get(name).copied().unwrap_or((0.0, if kind == VarKind::Binary { 1.0 } else { f64::INFINITY }));
            if lo != 0.0 {
                return Err(Error::LpParse { line: 0, msg: format!("variable {name} must have lower bound 0") });
            }
            let j = model.add_variable(name.clone(), kind, hi, 0.0, VarRole::Free);
            index.insert(name.clone(), j);
        }
        for (name, c) in &self.objective {
            model.objective[index[name]] += c;
        }
        for row in &self.rows {
            let terms = row.terms.iter().map(|(n, c)| (rational(*c), index[n])).collect();
            let rel = row.relation.unwrap_or(Relation::Le);
            let kind = if row.name.starts_with("flow_") { RowKind::Flow } else { RowKind::Other };
            model.add_constraint(row.name.clone(), terms, rel, rational(row.rhs), kind)?;
        }
        model.validate()?;
        Ok(model)
    }
}

/// Writes `name value` lines for every variable.
pub fn write_solution(model: &MilpModel, result: &SolveResult) -> String {
    let mut out = String::new();
    for (v, x) in model.variables.iter().zip(&result.assignment) {
        let _ = writeln!(out, "{} {}", v.name, x);
    }
    out
}

/// Validates an externally produced assignment (`name value` per line; absent
/// variables are zero) and recomputes its objective.
pub fn import_solution(model: &MilpModel, text: &str) -> Result<SolveResult> {
    let mut x = vec![0i64; model.var_count()];
    let index: HashMap<&str, usize> = model.variables.iter().enumerate().map(|(j, v)| (v.name.as_str(), j)).collect();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value)) = (parts.next(), parts.next()) else {
            return Err(Error::LpParse { line: ln + 1, msg: format!("expected `name value`, found {line}") });
        };
        let j = *index.get(name).ok_or_else(|| Error::Solution(format!("unknown variable {name} on line {}", ln + 1)))?;
        let v: f64 = value.parse().map_err(|_| Error::LpParse { line: ln + 1, msg: format!("bad value {value}") })?;
        if (v - v.round()).abs() > 1e-6 {
            return Err(Error::Solution(format!("variable {name} = {v} is not integral")));
        }
        x[j] = v.round() as i64;
    }
    model.check_assignment(&x, 1e-6)?;
    let exact = model.exact_violations(&x, RowKind::Flow);
    if let Some(name) = exact.first() {
        return Err(Error::Solution(format!("row {name} violated under exact arithmetic")));
    }
    let objective = model.objective_value(&x.iter().map(|&v| v as f64).collect::<Vec<_>>());
    Ok(SolveResult {
        status: SolveStatus::FeasibleGap,
        objective,
        assignment: x,
        gap: f64::INFINITY,
        root_bound: f64::INFINITY,
        best_bound: f64::INFINITY,
        node_count: 0,
        lp_iterations: 0,
        wall_time: Duration::ZERO,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SolverConfig};

    fn tiny() -> MilpModel {
        let mut m = MilpModel::new();
        let d = m.add_variable("d", VarKind::Binary, 1.0, 5.0, VarRole::Free);
        let k = m.add_variable("k", VarKind::NonnegInteger, 10.0, -2.0, VarRole::Free);
        let z = m.add_variable("z", VarKind::NonnegInteger, 3.0, 0.0, VarRole::Free);
        m.add_constraint("need", vec![(rational(1.0), k), (rational(-2.0), d)], Relation::Ge, rational(0.0), RowKind::Other).unwrap();
        m.add_constraint("cap", vec![(rational(0.5), k)], Relation::Le, rational(4.25), RowKind::Other).unwrap();
        let _ = z;
        m
    }

    #[test]
    fn empty_model_round_trip() {
        let m = MilpModel::new();
        let parsed = parse_lp(&write_lp(&m)).unwrap();
        assert!(parsed.variables.is_empty() && parsed.rows.is_empty());
    }

    #[test]
    fn round_trip_preserves_matrix() {
        let m = tiny();
        let text = write_lp(&m);
        let back = parse_lp(&text).unwrap().to_model().unwrap();
        assert_eq!(back.var_count(), 3);
        assert_eq!(back.objective, m.objective);
        assert_eq!(back.constraints, m.constraints);
        for (a, b) in back.variables.iter().zip(&m.variables) {
            assert_eq!((a.kind, a.upper), (b.kind, b.upper));
        }
    }

    #[test]
    fn solution_import() {
        let m = tiny();
        let r = solve(&m, &SolverConfig::default()).unwrap();
        let back = import_solution(&m, &write_solution(&m, &r)).unwrap();
        assert!((back.objective - r.objective).abs() < 1e-9);
        let err = import_solution(&m, "d 1\nk 9\n").unwrap_err().to_string();
        assert!(err.contains("cap"), "{err}");
        assert!(import_solution(&m, "nope 1\n").is_err());
        assert!(import_solution(&m, "k 1.5\n").is_err());
    }

    #[test]
    fn long_rows_wrap_and_parse() {
        let mut m = MilpModel::new();
        let vars: Vec<usize> = (0..20).map(|k| m.add_variable(format!("x{k}"), VarKind::NonnegInteger, 2.0, 1.0, VarRole::Free)).collect();
        let terms = vars.iter().map(|&j| (rational(-0.25), j)).collect();
        m.add_constraint("long", terms, Relation::Ge, rational(-3.0), RowKind::Other).unwrap();
        let back = parse_lp(&write_lp(&m)).unwrap().to_model().unwrap();
        assert_eq!(back.constraints, m.constraints);
    }
}
