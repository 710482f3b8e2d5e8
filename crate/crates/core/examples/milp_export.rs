//! Solves a small knapsack with the built-in branch-and-bound, writes it in
//! LP format, parses it back and re-checks the solution.

use netslice::optimizer::{rational, MilpModel, Relation, RowKind, VarKind, VarRole};
use netslice::solver::{import_solution, parse_lp, solve, write_lp, write_solution, SolverConfig};

fn main() -> netslice::error::Result<()> {
    let mut m = MilpModel::new();
    let items = [(5.0, 4.0), (4.0, 3.0), (3.0, 2.0), (7.0, 6.0)];
    let vars: Vec<usize> = items
        .iter()
        .enumerate()
        .map(|(j, &(value, _))| m.add_variable(format!("x{j}"), VarKind::NonnegInteger, 2.0, value, VarRole::Free))
        .collect();
    let terms = vars.iter().zip(&items).map(|(&j, &(_, w))| (rational(w), j)).collect();
    m.add_constraint("weight", terms, Relation::Le, rational(10.0), RowKind::Other)?;

    let result = solve(&m, &SolverConfig::default())?;
    println!("status {} objective {} assignment {:?}", result.status.as_str(), result.objective, result.assignment);

    let lp = write_lp(&m);
    print!("{lp}");
    let parsed = parse_lp(&lp)?.to_model()?;
    let again = import_solution(&parsed, &write_solution(&m, &result))?;
    println!("re-imported objective {}", again.objective);
    Ok(())
}
