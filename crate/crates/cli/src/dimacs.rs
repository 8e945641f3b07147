//! DIMACS entry point so the binary can serve as its own external solver
//! (useful for exercising the `UVLEAK_SOLVER` hand-off end to end).

use uvleak_core::logic::cnf::{Cnf, Lit};
use uvleak_core::logic::solver::{SatResult, Solver};

use super::CliError;

pub fn solve_cnf(path: &std::path::Path) -> Result<u8, CliError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let mut cnf = Cnf::new();
    for line in src.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let declared_vars: u32 = rest
                .split_whitespace()
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| CliError::usage("bad problem line"))?;
            while cnf.n_vars < declared_vars {
                cnf.fresh();
            }
            continue;
        }
        let mut clause = Vec::new();
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| CliError::usage(format!("bad literal {tok:?}")))?;
            if v == 0 {
                break;
            }
            let var = v.unsigned_abs() as u32 - 1;
            while cnf.n_vars <= var {
                cnf.fresh();
            }
            clause.push(if v > 0 { Lit::pos(var) } else { Lit::neg(var) });
        }
        cnf.add(clause);
    }
    let mut solver = Solver::new(&cnf);
    match solver.solve() {
        Ok(SatResult::Sat) => {
            println!("s SATISFIABLE");
            let mut line = String::from("v");
            for v in 0..cnf.n_vars {
                let lit = Lit::pos(v);
                let val = if solver.model_value(lit) {
                    (v + 1) as i64
                } else {
                    -((v + 1) as i64)
                };
                line.push_str(&format!(" {val}"));
            }
            line.push_str(" 0");
            println!("{line}");
            Ok(0)
        }
        Ok(SatResult::Unsat) => {
            println!("s UNSATISFIABLE");
            Ok(0)
        }
        Err(e) => Err(CliError {
            msg: e.to_string(),
            code: 3,
        }),
    }
}
