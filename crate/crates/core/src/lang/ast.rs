use crate::expr::{BoolExpr, LinExpr};

/// Source-level linear expression.
pub type Expr = LinExpr<String, i64>;
/// Source-level condition.
pub type Cond = BoolExpr<String, i64>;

/// An annotated program: `{pre} body {post}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub inputs: Vec<String>,
    /// Top-level locals declared without an initializer (`int x;`).
    pub locals: Vec<String>,
    pub precondition: Cond,
    pub body: Vec<Stmt>,
    pub postcondition: Cond,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    /// `target = rhs;`, or `int target = rhs;` when `declares` is set.
    Assign {
        target: String,
        rhs: Expr,
        declares: bool,
    },
    IfElse {
        cond: Cond,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    While {
        cond: Cond,
        body: Vec<Stmt>,
    },
    /// `assume cond;` Paths on which `cond` is false are infeasible. Produced by
    /// unrolling to mark executions that exceed the loop bound.
    Guard { cond: Cond },
}

impl Stmt {
    pub fn assign(target: &str, rhs: Expr, line: u32) -> Stmt {
        Stmt {
            kind: StmtKind::Assign {
                target: target.to_string(),
                rhs,
                declares: false,
            },
            line,
        }
    }
}

impl Program {
    /// Visits every statement (pre-order), including nested ones.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        walk_stmts(&self.body, f);
    }

    pub fn has_loops(&self) -> bool {
        let mut found = false;
        self.walk(&mut |s| found |= matches!(s.kind, StmtKind::While { .. }));
        found
    }

    pub fn count(&self, pred: impl Fn(&StmtKind) -> bool) -> usize {
        let mut n = 0;
        self.walk(&mut |s| {
            if pred(&s.kind) {
                n += 1
            }
        });
        n
    }
}

pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        match &s.kind {
            StmtKind::IfElse {
                then_branch,
                else_branch,
                ..
            } => {
                walk_stmts(then_branch, f);
                walk_stmts(else_branch, f);
            }
            StmtKind::While { body, .. } => walk_stmts(body, f),
            StmtKind::Assign { .. } | StmtKind::Guard { .. } => {}
        }
    }
}
