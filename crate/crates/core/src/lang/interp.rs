//! Reference interpreter over the AST. Used to validate counterexamples and as
//! an independent oracle for the CFG-based analyses.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::{Cond, Expr, Program, Stmt, StmtKind};
use crate::expr::EvalFailure;

/// Iteration cap for `while` loops executed natively.
pub const MAX_LOOP_ITERATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("variable `{0}` has no value")]
    Unbound(String),
    #[error("integer overflow at line {0}")]
    Overflow(u32),
    #[error("input `{0}` has no value")]
    MissingInput(String),
    #[error("`{0}` is not an input of the program")]
    UnknownInput(String),
    #[error("assumption at line {0} is violated (loop bound exceeded)")]
    GuardViolated(u32),
    #[error("loop at line {0} exceeded {MAX_LOOP_ITERATIONS} iterations")]
    LoopLimit(u32),
}

/// Final state of a concrete run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub pre_holds: bool,
    pub post_holds: bool,
    pub vars: BTreeMap<String, i64>,
}

/// Runs `p` on `inputs`. Conditions whose line is in `flip` take the opposite
/// branch from the one their value selects.
pub fn run_with_flips(
    p: &Program,
    inputs: &BTreeMap<String, i64>,
    flip: &BTreeSet<u32>,
) -> Result<Outcome, InterpError> {
    for name in inputs.keys() {
        if !p.inputs.contains(name) {
            return Err(InterpError::UnknownInput(name.clone()));
        }
    }
    let mut vars = BTreeMap::new();
    for name in &p.inputs {
        let v = inputs
            .get(name)
            .ok_or_else(|| InterpError::MissingInput(name.clone()))?;
        vars.insert(name.clone(), *v);
    }
    let pre_holds = eval_cond(&p.precondition, &vars, 0)?;
    let mut m = Machine { vars, flip };
    m.exec(&p.body)?;
    let post_holds = eval_cond(&p.postcondition, &m.vars, 0)?;
    Ok(Outcome {
        pre_holds,
        post_holds,
        vars: m.vars,
    })
}

pub fn run(p: &Program, inputs: &BTreeMap<String, i64>) -> Result<Outcome, InterpError> {
    run_with_flips(p, inputs, &BTreeSet::new())
}

struct Machine<'a> {
    vars: BTreeMap<String, i64>,
    flip: &'a BTreeSet<u32>,
}

impl Machine<'_> {
    fn exec(&mut self, stmts: &[Stmt]) -> Result<(), InterpError> {
        for s in stmts {
            match &s.kind {
                StmtKind::Assign { target, rhs, .. } => {
                    let v = eval_expr(rhs, &self.vars, s.line)?;
                    self.vars.insert(target.clone(), v);
                }
                StmtKind::IfElse {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let taken = eval_cond(cond, &self.vars, s.line)? != self.flip.contains(&s.line);
                    if taken {
                        self.exec(then_branch)?;
                    } else {
                        self.exec(else_branch)?;
                    }
                }
                StmtKind::While { cond, body } => {
                    let mut n = 0u64;
                    while eval_cond(cond, &self.vars, s.line)? {
                        n += 1;
                        if n > MAX_LOOP_ITERATIONS {
                            return Err(InterpError::LoopLimit(s.line));
                        }
                        self.exec(body)?;
                    }
                }
                StmtKind::Guard { cond } => {
                    if !eval_cond(cond, &self.vars, s.line)? {
                        return Err(InterpError::GuardViolated(s.line));
                    }
                }
            }
        }
        Ok(())
    }
}

fn lift(e: EvalFailure<String>, line: u32) -> InterpError {
    match e {
        EvalFailure::Unbound(v) => InterpError::Unbound(v),
        EvalFailure::Overflow => InterpError::Overflow(line),
    }
}

pub fn eval_expr(e: &Expr, vars: &BTreeMap<String, i64>, line: u32) -> Result<i64, InterpError> {
    e.eval_with(|v| vars.get(v).copied()).map_err(|f| lift(f, line))
}

pub fn eval_cond(c: &Cond, vars: &BTreeMap<String, i64>, line: u32) -> Result<bool, InterpError> {
    c.eval_with(&mut |v: &String| vars.get(v).copied())
        .map_err(|f| lift(f, line))
}

#[cfg(test)]
mod tests {
    use super::super::{parse, unroll};
    use super::*;

    fn inputs(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    const LOOP: &str = "prog p(int x) { pre true;\n int n = 0;\n while (x < 5) {\n x = x + 1;\n n = n + 2;\n }\n post n >= 0; }";

    #[test]
    fn loops_and_unrolled_loops_agree_within_bound() {
        let p = parse(LOOP).unwrap();
        let u = unroll(&p, 3);
        for x in 2..10 {
            let ce = inputs(&[("x", x)]);
            let native = run(&p, &ce).unwrap();
            assert_eq!(run(&u, &ce).unwrap(), native, "x = {x}");
        }
        assert_eq!(
            run(&u, &inputs(&[("x", 0)])),
            Err(InterpError::GuardViolated(3))
        );
    }

    #[test]
    fn flips_take_the_other_branch() {
        let p = parse("prog p(int x) { pre true;\n int r = 0;\n if (x > 0) {\n r = 1;\n } else {\n r = 2;\n }\n post r == 1; }").unwrap();
        let ce = inputs(&[("x", 3)]);
        assert_eq!(run(&p, &ce).unwrap().vars["r"], 1);
        let flipped = run_with_flips(&p, &ce, &BTreeSet::from([3])).unwrap();
        assert_eq!(flipped.vars["r"], 2);
        assert!(!flipped.post_holds);
    }

    #[test]
    fn input_errors() {
        let p = parse(LOOP).unwrap();
        assert_eq!(run(&p, &inputs(&[])), Err(InterpError::MissingInput("x".into())));
        assert_eq!(
            run(&p, &inputs(&[("x", 1), ("y", 2)])),
            Err(InterpError::UnknownInput("y".into()))
        );
    }
}
