//! Linear integer constraints over versioned variables: translation of
//! assignments and conditions, integer-exact negation, and evaluation.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{BoolExpr, EvalFailure, LinExpr, Relop};
use crate::lang::{Cond, Expr};
use crate::num::{self, Scalar};

/// A program variable together with its dynamic-single-assignment version.
/// Inputs start at version 0; every assignment creates the next version.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VersionedVar {
    pub name: String,
    pub version: u32,
}

impl VersionedVar {
    pub fn new(name: impl Into<String>, version: u32) -> Self {
        VersionedVar {
            name: name.into(),
            version,
        }
    }
}

impl fmt::Display for VersionedVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.version)
    }
}

pub type Term<S> = LinExpr<VersionedVar, S>;

/// Concrete values of versioned variables.
pub type Env<S> = BTreeMap<VersionedVar, S>;

/// Current version of each variable along one path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VersionMap {
    current: BTreeMap<String, u32>,
}

impl VersionMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn current(&self, name: &str) -> VersionedVar {
        VersionedVar::new(name, self.current.get(name).copied().unwrap_or(0))
    }

    /// Allocates the next version of `name` and makes it current.
    pub fn bump(&mut self, name: &str) -> VersionedVar {
        let v = self.current.entry(name.to_string()).or_insert(0);
        *v += 1;
        VersionedVar::new(name, *v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProvenanceKind {
    Assignment,
    Condition,
    DeviatedCondition,
    Precondition,
    Postcondition,
    CounterExample,
}

/// Where a constraint came from. Line 0 is used for facts with no source line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Provenance {
    pub line: u32,
    pub kind: ProvenanceKind,
}

impl Provenance {
    pub fn new(line: u32, kind: ProvenanceKind) -> Self {
        Provenance { line, kind }
    }
}

/// Canonical comparison operators. Strict inequalities are tightened to
/// non-strict ones on construction, which makes negation an involution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Le,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds<S: Ord>(self, lhs: S, rhs: S) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("constant {0} does not fit the scalar type")]
    ScalarRange(i64),
    #[error("arithmetic overflow while building a constraint")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable {0} is unbound")]
    UnboundVariable(VersionedVar),
    #[error("arithmetic overflow during evaluation")]
    Overflow,
}

impl From<EvalFailure<VersionedVar>> for EvalError {
    fn from(f: EvalFailure<VersionedVar>) -> Self {
        match f {
            EvalFailure::Unbound(v) => EvalError::UnboundVariable(v),
            EvalFailure::Overflow => EvalError::Overflow,
        }
    }
}

/// `expr op bound`, where `expr` has no constant part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint<S: Scalar> {
    expr: Term<S>,
    op: CmpOp,
    bound: S,
    pub label: Provenance,
}

impl<S: Scalar> Constraint<S> {
    /// Builds `lhs relop rhs`, moving variables left and constants right.
    pub fn new(lhs: &Term<S>, relop: Relop, rhs: &Term<S>, label: Provenance) -> Result<Self, ConstraintError> {
        let diff = lhs.checked_sub(rhs).ok_or(ConstraintError::Overflow)?;
        let bound = S::zero()
            .checked_sub(&diff.constant_term())
            .ok_or(ConstraintError::Overflow)?;
        let expr = Term::from_parts(diff.terms().map(|(v, c)| (v.clone(), c)), S::zero());
        let (op, bound) = match relop {
            Relop::Eq => (CmpOp::Eq, Some(bound)),
            Relop::Ne => (CmpOp::Ne, Some(bound)),
            Relop::Le => (CmpOp::Le, Some(bound)),
            Relop::Ge => (CmpOp::Ge, Some(bound)),
            Relop::Lt => (CmpOp::Le, bound.checked_sub(&S::one())),
            Relop::Gt => (CmpOp::Ge, bound.checked_add(&S::one())),
        };
        Ok(Constraint {
            expr,
            op,
            bound: bound.ok_or(ConstraintError::Overflow)?,
            label,
        })
    }

    /// Variable part (left-hand side).
    pub fn lhs(&self) -> &Term<S> {
        &self.expr
    }

    pub fn op(&self) -> CmpOp {
        self.op
    }

    /// Constant part (right-hand side).
    pub fn rhs(&self) -> S {
        self.bound
    }

    /// Integer-exact complement: `e <= k` becomes `e >= k + 1`, `=` becomes `!=`.
    pub fn negate(&self) -> Self {
        let (op, bound) = match self.op {
            CmpOp::Eq => (CmpOp::Ne, self.bound),
            CmpOp::Ne => (CmpOp::Eq, self.bound),
            CmpOp::Le => (CmpOp::Ge, self.bound.saturating_add(S::one())),
            CmpOp::Ge => (CmpOp::Le, self.bound.saturating_sub(S::one())),
        };
        Constraint {
            expr: self.expr.clone(),
            op,
            bound,
            label: self.label,
        }
    }

    pub fn with_label(mut self, label: Provenance) -> Self {
        self.label = label;
        self
    }

    pub fn eval(&self, env: &Env<S>) -> Result<bool, EvalError> {
        let v = self.expr.eval_with(|x| env.get(x).copied())?;
        Ok(self.op.holds(v, self.bound))
    }
}

impl<S: Scalar> fmt::Display for Constraint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.expr, self.op.symbol(), self.bound)
    }
}

/// A boolean combination of constraints. Conjunctive conditions are the
/// common case; disjunctions appear for `||` guards and negated `&&`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula<S: Scalar> {
    True,
    False,
    Atom(Constraint<S>),
    And(Vec<Formula<S>>),
    Or(Vec<Formula<S>>),
}

impl<S: Scalar> Formula<S> {
    pub fn negate(&self) -> Self {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(c) => Formula::Atom(c.negate()),
            Formula::And(fs) => Formula::Or(fs.iter().map(Formula::negate).collect()),
            Formula::Or(fs) => Formula::And(fs.iter().map(Formula::negate).collect()),
        }
    }

    pub fn eval(&self, env: &Env<S>) -> Result<bool, EvalError> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(c) => c.eval(env)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(env)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn atoms(&self) -> Vec<&Constraint<S>> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Constraint<S>>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(c) => out.push(c),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    pub fn vars(&self) -> Vec<&VersionedVar> {
        self.atoms().into_iter().flat_map(|c| c.lhs().vars()).collect()
    }

    /// Provenance of the first atom; all atoms of a translated statement
    /// share it.
    pub fn provenance(&self) -> Option<Provenance> {
        self.atoms().first().map(|c| c.label)
    }

    pub fn relabel(&self, label: Provenance) -> Self {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(c) => Formula::Atom(c.clone().with_label(label)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.relabel(label)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.relabel(label)).collect()),
        }
    }
}

impl<S: Scalar> fmt::Display for Formula<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, fs: &[Formula<S>], sep: &str| {
            write!(f, "(")?;
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(c) => write!(f, "{c}"),
            Formula::And(fs) => join(f, fs, "&&"),
            Formula::Or(fs) => join(f, fs, "||"),
        }
    }
}

fn scalar<S: Scalar>(v: i64) -> Result<S, ConstraintError> {
    num::from_i64(v).ok_or(ConstraintError::ScalarRange(v))
}

/// Renames a source expression to the current versions.
pub fn translate_expr<S: Scalar>(e: &Expr, versions: &VersionMap) -> Result<Term<S>, ConstraintError> {
    e.try_map(|name| Ok(versions.current(name)), scalar)
}

/// `target = rhs` as an assignment constraint.
pub fn cstr_assign<S: Scalar>(target: VersionedVar, rhs: &Term<S>, line: u32) -> Result<Constraint<S>, ConstraintError> {
    Constraint::new(
        &Term::var(target),
        Relop::Eq,
        rhs,
        Provenance::new(line, ProvenanceKind::Assignment),
    )
}

/// Translates a condition into a conjunction of formulas. Negations are
/// pushed to the atoms and top-level `&&` is flattened; what remains of `||`
/// stays as a disjunctive formula.
pub fn cstr_cond<S: Scalar>(
    cond: &Cond,
    versions: &VersionMap,
    label: Provenance,
) -> Result<Vec<Formula<S>>, ConstraintError> {
    let f = nnf(cond, false, versions, label)?;
    Ok(match f {
        Formula::True => Vec::new(),
        Formula::And(fs) => fs,
        other => vec![other],
    })
}

/// Same as [`cstr_cond`] but returns a single formula.
pub fn cond_formula<S: Scalar>(
    cond: &Cond,
    versions: &VersionMap,
    label: Provenance,
) -> Result<Formula<S>, ConstraintError> {
    nnf(cond, false, versions, label)
}

fn nnf<S: Scalar>(
    cond: &Cond,
    negated: bool,
    versions: &VersionMap,
    label: Provenance,
) -> Result<Formula<S>, ConstraintError> {
    Ok(match cond {
        BoolExpr::True => {
            if negated {
                Formula::False
            } else {
                Formula::True
            }
        }
        BoolExpr::False => {
            if negated {
                Formula::True
            } else {
                Formula::False
            }
        }
        BoolExpr::Cmp(cmp) => {
            let op = if negated { cmp.op.negate() } else { cmp.op };
            let lhs = translate_expr(&cmp.lhs, versions)?;
            let rhs = translate_expr(&cmp.rhs, versions)?;
            Formula::Atom(Constraint::new(&lhs, op, &rhs, label)?)
        }
        BoolExpr::Not(inner) => nnf(inner, !negated, versions, label)?,
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
            let conj = matches!(cond, BoolExpr::And(..)) != negated;
            let a = nnf(a, negated, versions, label)?;
            let b = nnf(b, negated, versions, label)?;
            combine(conj, a, b)
        }
    })
}

fn combine<S: Scalar>(conj: bool, a: Formula<S>, b: Formula<S>) -> Formula<S> {
    let (unit, zero) = if conj {
        (Formula::True, Formula::False)
    } else {
        (Formula::False, Formula::True)
    };
    if a == zero || b == zero {
        return zero;
    }
    if a == unit {
        return b;
    }
    if b == unit {
        return a;
    }
    let mut parts = Vec::new();
    for f in [a, b] {
        match (conj, f) {
            (true, Formula::And(fs)) | (false, Formula::Or(fs)) => parts.extend(fs),
            (_, f) => parts.push(f),
        }
    }
    if conj {
        Formula::And(parts)
    } else {
        Formula::Or(parts)
    }
}
