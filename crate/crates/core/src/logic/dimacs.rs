//! Hand-off to an external propositional solver via the standard DIMACS
//! clause-list format. The solver path comes from `UVLEAK_SOLVER`; it is
//! invoked as `solver <cnf-file>` and must print its verdict and model on
//! standard output (`s SATISFIABLE` / `s UNSATISFIABLE` or bare
//! `SAT`/`UNSAT`, model literals on `v` lines or bare integer lines).

use super::cnf::Cnf;
use super::LogicError;
use std::io::Write;
use std::time::{Duration, Instant};

pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut s = String::new();
    s.push_str(&format!("p cnf {} {}\n", cnf.n_vars, cnf.clauses.len()));
    for c in &cnf.clauses {
        for l in c {
            s.push_str(&l.to_dimacs().to_string());
            s.push(' ');
        }
        s.push_str("0\n");
    }
    s
}

pub enum ExternalResult {
    Sat(Vec<bool>),
    Unsat,
}

pub fn run_external(
    solver: &str,
    cnf: &Cnf,
    deadline: Option<Instant>,
) -> Result<ExternalResult, LogicError> {
    let dir = std::env::temp_dir();
    let file = dir.join(format!("uvleak-{}.cnf", std::process::id()));
    {
        let mut f = std::fs::File::create(&file)
            .map_err(|e| LogicError::ExternalSolver(format!("temp file: {e}")))?;
        f.write_all(write_dimacs(cnf).as_bytes())
            .map_err(|e| LogicError::ExternalSolver(format!("temp file: {e}")))?;
    }
    let mut child = std::process::Command::new(solver)
        .arg(&file)
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::null())
        .spawn()
        .map_err(|e| LogicError::ExternalSolver(format!("spawn {solver}: {e}")))?;

    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if let Some(dl) = deadline {
                    if Instant::now() > dl {
                        let _ = child.kill();
                        let _ = child.wait();
                        let _ = std::fs::remove_file(&file);
                        return Err(LogicError::ResourceLimit(
                            "external solver time limit".into(),
                        ));
                    }
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => {
                let _ = std::fs::remove_file(&file);
                return Err(LogicError::ExternalSolver(format!("wait: {e}")));
            }
        }
    }
    let out = {
        use std::io::Read;
        let mut buf = String::new();
        child
            .stdout
            .take()
            .map(|mut o| o.read_to_string(&mut buf))
            .transpose()
            .map_err(|e| LogicError::ExternalSolver(format!("read: {e}")))?;
        buf
    };
    let _ = std::fs::remove_file(&file);
    parse_output(&out, cnf.n_vars)
}

fn parse_output(out: &str, n_vars: u32) -> Result<ExternalResult, LogicError> {
    let mut sat: Option<bool> = None;
    let mut assign = vec![false; n_vars as usize];
    for line in out.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let body = line.strip_prefix("s ").unwrap_or(line);
        match body {
            "SATISFIABLE" | "SAT" => {
                sat = Some(true);
                continue;
            }
            "UNSATISFIABLE" | "UNSAT" => {
                sat = Some(false);
                continue;
            }
            _ => {}
        }
        let body = line.strip_prefix("v ").unwrap_or(line);
        for tok in body.split_whitespace() {
            if let Ok(v) = tok.parse::<i64>() {
                if v == 0 {
                    continue;
                }
                let var = v.unsigned_abs() as usize - 1;
                if var < assign.len() {
                    assign[var] = v > 0;
                }
            }
        }
    }
    match sat {
        Some(true) => Ok(ExternalResult::Sat(assign)),
        Some(false) => Ok(ExternalResult::Unsat),
        None => Err(LogicError::ExternalSolver(
            "no verdict on solver output".into(),
        )),
    }
}
