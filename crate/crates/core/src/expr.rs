//! Linear expressions and boolean conditions over an arbitrary variable type.
//!
//! The same representation is used by the source AST (variables are plain
//! names) and by the constraint layer (variables are versioned).

use std::collections::BTreeMap;
use std::fmt;

use crate::num::Scalar;

/// `sum(coef * var) + constant`. Zero coefficients are never stored, and the
/// term map is ordered, so two equal expressions compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr<V: Ord, S> {
    terms: BTreeMap<V, S>,
    constant: S,
}

impl<V: Ord + Clone, S: Scalar> LinExpr<V, S> {
    pub fn constant(c: S) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: V) -> Self {
        Self::term(S::one(), v)
    }

    pub fn term(coef: S, v: V) -> Self {
        let mut terms = BTreeMap::new();
        if coef != S::zero() {
            terms.insert(v, coef);
        }
        LinExpr {
            terms,
            constant: S::zero(),
        }
    }

    pub fn from_parts(terms: impl IntoIterator<Item = (V, S)>, constant: S) -> Self {
        let mut e = Self::constant(constant);
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&V, S)> + '_ {
        self.terms.iter().map(|(v, c)| (v, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, v: &V) -> S {
        self.terms.get(v).copied().unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> S {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &V> + '_ {
        self.terms.keys()
    }

    pub fn add_term(&mut self, v: V, coef: S) {
        let sum = self.terms.get(&v).copied().unwrap_or_else(S::zero) + coef;
        if sum == S::zero() {
            self.terms.remove(&v);
        } else {
            self.terms.insert(v, sum);
        }
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let mut out = self.clone();
        for (v, c) in &other.terms {
            let cur = out.terms.get(v).copied().unwrap_or_else(S::zero);
            let sum = cur.checked_add(c)?;
            if sum == S::zero() {
                out.terms.remove(v);
            } else {
                out.terms.insert(v.clone(), sum);
            }
        }
        out.constant = out.constant.checked_add(&other.constant)?;
        Some(out)
    }

    pub fn checked_scale(&self, k: S) -> Option<Self> {
        if k == S::zero() {
            return Some(Self::constant(S::zero()));
        }
        let mut terms = BTreeMap::new();
        for (v, c) in &self.terms {
            terms.insert(v.clone(), c.checked_mul(&k)?);
        }
        Some(LinExpr {
            terms,
            constant: self.constant.checked_mul(&k)?,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        self.checked_add(&other.checked_scale(-S::one())?)
    }

    /// Renames every variable; terms that collapse onto the same name are summed.
    pub fn map_vars<W: Ord + Clone>(&self, mut f: impl FnMut(&V) -> W) -> LinExpr<W, S> {
        LinExpr::from_parts(self.terms.iter().map(|(v, c)| (f(v), *c)), self.constant)
    }

    /// Like [`map_vars`](Self::map_vars) but also converts the coefficients.
    pub fn try_map<W: Ord + Clone, T: Scalar, E>(
        &self,
        mut var: impl FnMut(&V) -> Result<W, E>,
        mut scalar: impl FnMut(S) -> Result<T, E>,
    ) -> Result<LinExpr<W, T>, E> {
        let mut out = LinExpr::constant(scalar(self.constant)?);
        for (v, c) in &self.terms {
            out.add_term(var(v)?, scalar(*c)?);
        }
        Ok(out)
    }

    /// Evaluates the expression, or `None` on overflow or unbound variable.
    pub fn eval_with(&self, mut lookup: impl FnMut(&V) -> Option<S>) -> Result<S, EvalFailure<V>> {
        let mut acc = self.constant;
        for (v, c) in &self.terms {
            let x = lookup(v).ok_or_else(|| EvalFailure::Unbound(v.clone()))?;
            acc = c
                .checked_mul(&x)
                .and_then(|p| acc.checked_add(&p))
                .ok_or(EvalFailure::Overflow)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalFailure<V> {
    Unbound(V),
    Overflow,
}

impl<V: Ord + fmt::Display, S: Scalar> fmt::Display for LinExpr<V, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            let neg = *c < S::zero();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if mag == S::one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        let c = self.constant;
        if first {
            write!(f, "{c}")
        } else if c > S::zero() {
            write!(f, " + {c}")
        } else if c < S::zero() {
            write!(f, " - {}", c.abs())
        } else {
            Ok(())
        }
    }
}

/// Comparison operators of the source language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relop {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relop {
    pub fn negate(self) -> Relop {
        match self {
            Relop::Eq => Relop::Ne,
            Relop::Ne => Relop::Eq,
            Relop::Lt => Relop::Ge,
            Relop::Le => Relop::Gt,
            Relop::Gt => Relop::Le,
            Relop::Ge => Relop::Lt,
        }
    }

    pub fn holds<S: Ord>(self, a: S, b: S) -> bool {
        match self {
            Relop::Eq => a == b,
            Relop::Ne => a != b,
            Relop::Lt => a < b,
            Relop::Le => a <= b,
            Relop::Gt => a > b,
            Relop::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relop::Eq => "==",
            Relop::Ne => "!=",
            Relop::Lt => "<",
            Relop::Le => "<=",
            Relop::Gt => ">",
            Relop::Ge => ">=",
        }
    }
}

/// `lhs op rhs` as written in source.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Comparison<V: Ord, S> {
    pub lhs: LinExpr<V, S>,
    pub op: Relop,
    pub rhs: LinExpr<V, S>,
}

/// Boolean combination of linear comparisons.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr<V: Ord, S> {
    True,
    False,
    Cmp(Comparison<V, S>),
    Not(Box<BoolExpr<V, S>>),
    And(Box<BoolExpr<V, S>>, Box<BoolExpr<V, S>>),
    Or(Box<BoolExpr<V, S>>, Box<BoolExpr<V, S>>),
}

impl<V: Ord + Clone, S: Scalar> BoolExpr<V, S> {
    pub fn negation(e: Self) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: Self, b: Self) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> Vec<&V> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a V>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Cmp(c) => {
                out.extend(c.lhs.vars());
                out.extend(c.rhs.vars());
            }
            BoolExpr::Not(e) => e.collect_vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn eval_with(&self, lookup: &mut impl FnMut(&V) -> Option<S>) -> Result<bool, EvalFailure<V>> {
        Ok(match self {
            BoolExpr::True => true,
            BoolExpr::False => false,
            BoolExpr::Cmp(c) => {
                let l = c.lhs.eval_with(&mut *lookup)?;
                let r = c.rhs.eval_with(&mut *lookup)?;
                c.op.holds(l, r)
            }
            BoolExpr::Not(e) => !e.eval_with(lookup)?,
            BoolExpr::And(a, b) => a.eval_with(lookup)? && b.eval_with(lookup)?,
            BoolExpr::Or(a, b) => a.eval_with(lookup)? || b.eval_with(lookup)?,
        })
    }
}
