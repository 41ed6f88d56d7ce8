use std::fmt::Write;

use super::ast::{Cond, Program, Stmt, StmtKind};
use crate::expr::BoolExpr;

/// Renders a program back to source. Each statement is emitted on its
/// recorded line (as long as lines increase in program order), so parsing the
/// output yields the same AST, line numbers included.
pub fn pretty(p: &Program) -> String {
    let mut w = Writer {
        out: String::new(),
        line: 1,
    };
    let inputs: Vec<String> = p.inputs.iter().map(|i| format!("int {i}")).collect();
    write!(w.out, "prog {}({}) {{", p.name, inputs.join(", ")).unwrap();
    write!(w.out, " pre {};", cond(&p.precondition)).unwrap();
    for l in &p.locals {
        write!(w.out, " int {l};").unwrap();
    }
    w.stmts(&p.body, 1);
    write!(w.out, " post {}; }}", cond(&p.postcondition)).unwrap();
    w.out.push('\n');
    w.out
}

struct Writer {
    out: String,
    line: u32,
}

impl Writer {
    fn goto(&mut self, line: u32, depth: usize) {
        if self.line >= line {
            self.out.push(' ');
            return;
        }
        while self.line < line {
            self.out.push('\n');
            self.line += 1;
        }
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn stmts(&mut self, stmts: &[Stmt], depth: usize) {
        for s in stmts {
            self.stmt(s, depth);
        }
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        self.goto(s.line, depth);
        match &s.kind {
            StmtKind::Assign {
                target,
                rhs,
                declares,
            } => {
                let kw = if *declares { "int " } else { "" };
                write!(self.out, "{kw}{target} = {rhs};").unwrap();
            }
            StmtKind::IfElse {
                cond: c,
                then_branch,
                else_branch,
            } => {
                write!(self.out, "if ({}) {{", cond(c)).unwrap();
                self.stmts(then_branch, depth + 1);
                self.out.push_str(" }");
                if !else_branch.is_empty() {
                    self.out.push_str(" else {");
                    self.stmts(else_branch, depth + 1);
                    self.out.push_str(" }");
                }
            }
            StmtKind::While { cond: c, body } => {
                write!(self.out, "while ({}) {{", cond(c)).unwrap();
                self.stmts(body, depth + 1);
                self.out.push_str(" }");
            }
            StmtKind::Guard { cond: c } => {
                write!(self.out, "assume {};", cond(c)).unwrap();
            }
        }
    }
}

/// Renders a condition with the minimum parentheses needed to reparse it to
/// the same tree.
pub fn cond(c: &Cond) -> String {
    let mut s = String::new();
    write_cond(&mut s, c, 1);
    s
}

fn write_cond(s: &mut String, c: &Cond, min_prec: u8) {
    match c {
        BoolExpr::True => s.push_str("true"),
        BoolExpr::False => s.push_str("false"),
        BoolExpr::Cmp(cmp) => {
            write!(s, "{} {} {}", cmp.lhs, cmp.op.symbol(), cmp.rhs).unwrap();
        }
        BoolExpr::Not(inner) => {
            s.push('!');
            match **inner {
                BoolExpr::Cmp(_) => {
                    s.push('(');
                    write_cond(s, inner, 1);
                    s.push(')');
                }
                _ => write_cond(s, inner, 3),
            }
        }
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
            let (prec, op) = if matches!(c, BoolExpr::Or(..)) {
                (1, "||")
            } else {
                (2, "&&")
            };
            let paren = min_prec > prec;
            if paren {
                s.push('(');
            }
            write_cond(s, a, prec);
            write!(s, " {op} ").unwrap();
            write_cond(s, b, prec + 1);
            if paren {
                s.push(')');
            }
        }
    }
}
