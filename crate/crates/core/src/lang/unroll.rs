use super::ast::{Program, Stmt, StmtKind};
use crate::expr::BoolExpr;

/// Replaces every `while` by `bound` nested conditionals. The innermost copy
/// ends with `assume !cond`, so an execution that would need more than
/// `bound` iterations becomes infeasible instead of being silently truncated.
///
/// `bound` must be at least 1.
pub fn unroll(p: &Program, bound: u32) -> Program {
    assert!(bound >= 1, "unroll bound must be positive");
    Program {
        body: unroll_stmts(&p.body, bound),
        ..p.clone()
    }
}

fn unroll_stmts(stmts: &[Stmt], bound: u32) -> Vec<Stmt> {
    stmts.iter().map(|s| unroll_stmt(s, bound)).collect()
}

fn unroll_stmt(s: &Stmt, bound: u32) -> Stmt {
    match &s.kind {
        StmtKind::Assign { .. } | StmtKind::Guard { .. } => s.clone(),
        StmtKind::IfElse {
            cond,
            then_branch,
            else_branch,
        } => Stmt {
            kind: StmtKind::IfElse {
                cond: cond.clone(),
                then_branch: unroll_stmts(then_branch, bound),
                else_branch: unroll_stmts(else_branch, bound),
            },
            line: s.line,
        },
        StmtKind::While { cond, body } => {
            let body = unroll_stmts(body, bound);
            let mut inner = Stmt {
                kind: StmtKind::Guard {
                    cond: BoolExpr::negation(cond.clone()),
                },
                line: s.line,
            };
            for _ in 0..bound {
                let mut then_branch = body.clone();
                then_branch.push(inner);
                inner = Stmt {
                    kind: StmtKind::IfElse {
                        cond: cond.clone(),
                        then_branch,
                        else_branch: Vec::new(),
                    },
                    line: s.line,
                };
            }
            inner
        }
    }
}
