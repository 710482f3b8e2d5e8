use netslice::optimizer::{rational, MilpModel, Relation, RowKind, VarKind, VarRole};
use netslice::solver::{solve, SolveStatus, SolverConfig};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    uppers: Vec<i64>,
    objective: Vec<i64>,
    rows: Vec<(Vec<i64>, u8, i64)>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=6).prop_flat_map(|n| {
        let row = (prop::collection::vec(-3i64..=3, n), 0u8..3, -4i64..=10);
        (prop::collection::vec(1i64..=4, n), prop::collection::vec(-5i64..=8, n), prop::collection::vec(row, 1..=4))
            .prop_map(|(uppers, objective, rows)| Instance { uppers, objective, rows })
    })
}

fn relation(code: u8) -> Relation {
    match code {
        0 => Relation::Le,
        1 => Relation::Ge,
        _ => Relation::Eq,
    }
}

fn build(inst: &Instance) -> MilpModel {
    let mut m = MilpModel::new();
    for (j, (&u, &c)) in inst.uppers.iter().zip(&inst.objective).enumerate() {
        let kind = if u == 1 { VarKind::Binary } else { VarKind::NonnegInteger };
        m.add_variable(format!("x{j}"), kind, u as f64, c as f64, VarRole::Free);
    }
    for (r, (coefs, rel, rhs)) in inst.rows.iter().enumerate() {
        let terms: Vec<_> = coefs.iter().enumerate().filter(|(_, c)| **c != 0).map(|(j, c)| (rational(*c as f64), j)).collect();
        if !terms.is_empty() {
            m.add_constraint(format!("r{r}"), terms, relation(*rel), rational(*rhs as f64), RowKind::Other).unwrap();
        }
    }
    m
}

/// Best objective by exhaustive enumeration, `None` when infeasible.
fn enumerate(inst: &Instance) -> Option<i64> {
    let n = inst.uppers.len();
    let mut x = vec![0i64; n];
    let mut best = None;
    loop {
        let feasible = inst.rows.iter().filter(|(coefs, _, _)| coefs.iter().any(|c| *c != 0)).all(|(coefs, rel, rhs)| {
            let lhs: i64 = coefs.iter().zip(&x).map(|(a, b)| a * b).sum();
            match rel {
                0 => lhs <= *rhs,
                1 => lhs >= *rhs,
                _ => lhs == *rhs,
            }
        });
        if feasible {
            let obj: i64 = inst.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
            best = Some(best.map_or(obj, |b: i64| b.max(obj)));
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            if x[k] < inst.uppers[k] {
                x[k] += 1;
                break;
            }
            x[k] = 0;
            k += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn branch_and_bound_matches_enumeration(inst in instance()) {
        let model = build(&inst);
        let result = solve(&model, &SolverConfig::default()).unwrap();
        match enumerate(&inst) {
            None => prop_assert_eq!(result.status, SolveStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(result.status, SolveStatus::Optimal);
                prop_assert!((result.objective - best as f64).abs() < 1e-6, "solver {} vs {}", result.objective, best);
                prop_assert!(model.check_assignment(&result.assignment, 1e-6).is_ok());
            }
        }
    }
}
