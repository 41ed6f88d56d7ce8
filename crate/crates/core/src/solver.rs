//! Branch-and-prune feasibility over bounded integer domains.
//!
//! Linear atoms are propagated with interval bounds reasoning. Disjunctions
//! (including `!=`, which is compiled to `e <= b-1 || e >= b+1`) are split at
//! branch points, then undecided selectors, then the widest variable domain.
//! Soft constraints carry a selector: enforced when on, dropped when off.
//! Internal arithmetic is done in `i128`, so the scalar type only bounds the
//! values a witness may take.

use std::collections::{BTreeMap, BTreeSet};

use log::debug;
use thiserror::Error;

use crate::constraints::{CmpOp, Constraint, Env, EvalError, Formula, VersionedVar};
use crate::num::Scalar;

/// Bounds-propagation rounds per search node. Some systems (`x < y && y < x`
/// over a wide domain) shave one unit per round; branching finishes them.
const MAX_ROUNDS: usize = 48;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig<S> {
    /// Interval for variables without an explicit domain.
    pub default_domain: (S, S),
    /// Maximum number of search nodes per call.
    pub budget: u64,
    /// Log every search node at debug level.
    pub trace: bool,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        let d = S::from_i64(1_000_000).unwrap_or_else(S::max_value);
        SolverConfig {
            default_domain: (S::zero() - d, d),
            budget: 1_000_000,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("search budget of {budget} nodes exhausted")]
    DomainTooLarge { budget: u64 },
    #[error("selector {0} does not exist")]
    UnknownSelector(usize),
    #[error("internal error: witness fails re-check ({0})")]
    WitnessRejected(String),
}

/// A satisfying assignment: variable values plus, for each soft constraint,
/// whether it is enforced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness<S: Scalar> {
    pub env: Env<S>,
    pub selectors: Vec<bool>,
}

impl<S: Scalar> Witness<S> {
    /// Selectors that are off, ascending.
    pub fn off_set(&self) -> Vec<usize> {
        self.selectors
            .iter()
            .enumerate()
            .filter(|(_, on)| !**on)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<S: Scalar> {
    Feasible(Witness<S>),
    Infeasible,
}

impl<S: Scalar> Verdict<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Verdict::Feasible(_))
    }

    pub fn witness(&self) -> Option<&Witness<S>> {
        match self {
            Verdict::Feasible(w) => Some(w),
            Verdict::Infeasible => None,
        }
    }
}

/// Hard constraints, selector-guarded soft constraints, an optional bound on
/// the number of disabled soft constraints, and blocking clauses.
/// Selector ids are the indices of the soft constraints, starting at 0.
#[derive(Clone, Debug)]
pub struct Store<S: Scalar> {
    pub hard: Vec<Formula<S>>,
    pub soft: Vec<Formula<S>>,
    atmost: Option<(Vec<usize>, usize)>,
    blocking: Vec<Vec<usize>>,
    domains: BTreeMap<VersionedVar, (S, S)>,
    pub config: SolverConfig<S>,
}

impl<S: Scalar> Default for Store<S> {
    fn default() -> Self {
        Self::new(SolverConfig::default())
    }
}

impl<S: Scalar> Store<S> {
    pub fn new(config: SolverConfig<S>) -> Self {
        Store {
            hard: Vec::new(),
            soft: Vec::new(),
            atmost: None,
            blocking: Vec::new(),
            domains: BTreeMap::new(),
            config,
        }
    }

    pub fn add_hard(&mut self, f: Formula<S>) {
        self.hard.push(f);
    }

    pub fn add_hard_constraint(&mut self, c: Constraint<S>) {
        self.hard.push(Formula::Atom(c));
    }

    /// Adds a soft constraint and returns its selector id.
    pub fn add_soft(&mut self, f: Formula<S>) -> usize {
        self.soft.push(f);
        self.soft.len() - 1
    }

    /// At most `k` of `selectors` may be off.
    pub fn set_atmost(&mut self, selectors: &[usize], k: usize) -> Result<(), SolverError> {
        self.check_selectors(selectors)?;
        self.atmost = Some((selectors.to_vec(), k));
        Ok(())
    }

    pub fn clear_atmost(&mut self) {
        self.atmost = None;
    }

    /// At least one of `selectors` must be on. Excludes every off-set that
    /// contains all of them.
    pub fn add_blocking_clause(&mut self, selectors: &[usize]) -> Result<(), SolverError> {
        self.check_selectors(selectors)?;
        self.blocking.push(selectors.to_vec());
        Ok(())
    }

    pub fn blocking_clauses(&self) -> &[Vec<usize>] {
        &self.blocking
    }

    pub fn atmost(&self) -> Option<(&[usize], usize)> {
        self.atmost.as_ref().map(|(s, k)| (s.as_slice(), *k))
    }

    pub fn set_domain(&mut self, v: VersionedVar, lo: S, hi: S) {
        self.domains.insert(v, (lo, hi));
    }

    pub fn domain(&self, v: &VersionedVar) -> (S, S) {
        self.domains.get(v).copied().unwrap_or(self.config.default_domain)
    }

    /// Every variable mentioned by a hard or soft constraint or given an
    /// explicit domain, in (name, version) order.
    pub fn variables(&self) -> Vec<VersionedVar> {
        let mut set: BTreeSet<VersionedVar> = self.domains.keys().cloned().collect();
        for f in self.hard.iter().chain(&self.soft) {
            set.extend(f.vars().into_iter().cloned());
        }
        set.into_iter().collect()
    }

    fn check_selectors(&self, selectors: &[usize]) -> Result<(), SolverError> {
        match selectors.iter().find(|&&s| s >= self.soft.len()) {
            Some(&s) => Err(SolverError::UnknownSelector(s)),
            None => Ok(()),
        }
    }

    /// Re-checks a witness by plain evaluation against the original formulas.
    pub fn check_witness(&self, w: &Witness<S>) -> Result<bool, EvalError> {
        if w.selectors.len() != self.soft.len() {
            return Ok(false);
        }
        for f in &self.hard {
            if !f.eval(&w.env)? {
                return Ok(false);
            }
        }
        for (f, on) in self.soft.iter().zip(&w.selectors) {
            if *on && !f.eval(&w.env)? {
                return Ok(false);
            }
        }
        if let Some((set, k)) = &self.atmost {
            if set.iter().filter(|&&s| !w.selectors[s]).count() > *k {
                return Ok(false);
            }
        }
        if self.blocking.iter().any(|c| c.iter().all(|&s| !w.selectors[s])) {
            return Ok(false);
        }
        for (v, (lo, hi)) in self.variables().iter().map(|v| (v, self.domain(v))) {
            match w.env.get(v) {
                Some(x) if *x >= lo && *x <= hi => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    pub fn is_feasible(&self) -> Result<Verdict<S>, SolverError> {
        is_feasible(self)
    }
}

/// Decides the store. Complete over the finite domains; deterministic.
pub fn is_feasible<S: Scalar>(store: &Store<S>) -> Result<Verdict<S>, SolverError> {
    let problem = Compiled::new(store);
    let mut search = Search {
        p: &problem,
        nodes: 0,
        budget: store.config.budget,
        trace: store.config.trace,
    };
    let Some(init) = problem.initial_state() else {
        return Ok(Verdict::Infeasible);
    };
    let Some(leaf) = search.run(init)? else {
        return Ok(Verdict::Infeasible);
    };
    let env: Env<S> = problem
        .vars
        .iter()
        .zip(&leaf.dom)
        .map(|(v, (lo, _))| (v.clone(), S::from_i128(*lo).expect("value lies inside a scalar domain")))
        .collect();
    let selectors = leaf.sel.iter().map(|s| *s == Sel::On).collect();
    let w = Witness { env, selectors };
    match store.check_witness(&w) {
        Ok(true) => Ok(Verdict::Feasible(w)),
        Ok(false) => Err(SolverError::WitnessRejected(format!("{:?}", w.env))),
        Err(e) => Err(SolverError::WitnessRejected(e.to_string())),
    }
}

/// `sum(coef * x) <= bound`.
#[derive(Clone, Debug)]
struct Lin {
    coefs: Vec<(usize, i128)>,
    bound: i128,
}

#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    Atom(Lin),
    And(Vec<Node>),
    Or { id: usize, items: Vec<Node>, from_ne: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tri {
    Entailed,
    Disentailed,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sel {
    Unknown,
    On,
    Off,
}

struct Conflict;

#[derive(Clone, Debug)]
struct State {
    dom: Vec<(i128, i128)>,
    sel: Vec<Sel>,
    choice: Vec<Option<usize>>,
}

struct Compiled {
    vars: Vec<VersionedVar>,
    init_dom: Vec<(i128, i128)>,
    hard: Vec<Node>,
    soft: Vec<Node>,
    atmost: Option<(Vec<usize>, usize)>,
    blocking: Vec<Vec<usize>>,
    or_count: usize,
}

impl Compiled {
    fn new<S: Scalar>(store: &Store<S>) -> Self {
        let vars = store.variables();
        let index: BTreeMap<&VersionedVar, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let init_dom = vars
            .iter()
            .map(|v| {
                let (lo, hi) = store.domain(v);
                (wide(lo), wide(hi))
            })
            .collect();
        let mut or_count = 0;
        let mut compile = |f: &Formula<S>| compile_formula(f, &index, &mut or_count);
        let hard = store.hard.iter().map(&mut compile).collect();
        let soft = store.soft.iter().map(&mut compile).collect();
        Compiled {
            vars,
            init_dom,
            hard,
            soft,
            atmost: store.atmost.clone(),
            blocking: store.blocking.clone(),
            or_count,
        }
    }

    fn initial_state(&self) -> Option<State> {
        if self.init_dom.iter().any(|(lo, hi)| lo > hi) {
            return None;
        }
        Some(State {
            dom: self.init_dom.clone(),
            sel: vec![Sel::Unknown; self.soft.len()],
            choice: vec![None; self.or_count],
        })
    }

    fn active(&self, st: &State) -> Vec<&Node> {
        self.hard
            .iter()
            .chain(
                self.soft
                    .iter()
                    .zip(&st.sel)
                    .filter(|(_, s)| **s == Sel::On)
                    .map(|(n, _)| n),
            )
            .collect()
    }
}

fn wide<S: Scalar>(v: S) -> i128 {
    v.to_i128().expect("scalar fits in i128")
}

fn compile_formula<S: Scalar>(f: &Formula<S>, index: &BTreeMap<&VersionedVar, usize>, ors: &mut usize) -> Node {
    match f {
        Formula::True => Node::True,
        Formula::False => Node::False,
        Formula::Atom(c) => compile_atom(c, index, ors),
        Formula::And(fs) => Node::And(fs.iter().map(|f| compile_formula(f, index, ors)).collect()),
        Formula::Or(fs) => {
            let items = fs.iter().map(|f| compile_formula(f, index, ors)).collect();
            *ors += 1;
            Node::Or {
                id: *ors - 1,
                items,
                from_ne: false,
            }
        }
    }
}

fn compile_atom<S: Scalar>(c: &Constraint<S>, index: &BTreeMap<&VersionedVar, usize>, ors: &mut usize) -> Node {
    let coefs: Vec<(usize, i128)> = c.lhs().terms().map(|(v, k)| (index[v], wide(k))).collect();
    let b = wide(c.rhs());
    let le = |bound: i128| Node::Atom(Lin {
        coefs: coefs.clone(),
        bound,
    });
    let ge = |bound: i128| Node::Atom(Lin {
        coefs: coefs.iter().map(|(v, k)| (*v, -k)).collect(),
        bound: -bound,
    });
    match c.op() {
        CmpOp::Le => le(b),
        CmpOp::Ge => ge(b),
        CmpOp::Eq => Node::And(vec![le(b), ge(b)]),
        CmpOp::Ne => {
            *ors += 1;
            Node::Or {
                id: *ors - 1,
                items: vec![le(b - 1), ge(b + 1)],
                from_ne: true,
            }
        }
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

fn term_min(c: i128, (lo, hi): (i128, i128)) -> i128 {
    if c > 0 {
        c.saturating_mul(lo)
    } else {
        c.saturating_mul(hi)
    }
}

fn term_max(c: i128, (lo, hi): (i128, i128)) -> i128 {
    if c > 0 {
        c.saturating_mul(hi)
    } else {
        c.saturating_mul(lo)
    }
}

impl Lin {
    fn min_sum(&self, dom: &[(i128, i128)]) -> i128 {
        self.coefs.iter().fold(0i128, |a, (v, c)| a.saturating_add(term_min(*c, dom[*v])))
    }

    fn max_sum(&self, dom: &[(i128, i128)]) -> i128 {
        self.coefs.iter().fold(0i128, |a, (v, c)| a.saturating_add(term_max(*c, dom[*v])))
    }

    fn status(&self, dom: &[(i128, i128)]) -> Tri {
        if self.max_sum(dom) <= self.bound {
            Tri::Entailed
        } else if self.min_sum(dom) > self.bound {
            Tri::Disentailed
        } else {
            Tri::Unknown
        }
    }

    fn propagate(&self, dom: &mut [(i128, i128)]) -> Result<bool, Conflict> {
        let min = self.min_sum(dom);
        if min > self.bound {
            return Err(Conflict);
        }
        let mut changed = false;
        for (v, c) in &self.coefs {
            let rest = self.bound.saturating_sub(min.saturating_sub(term_min(*c, dom[*v])));
            let (lo, hi) = dom[*v];
            let (nlo, nhi) = if *c > 0 {
                (lo, hi.min(floor_div(rest, *c)))
            } else {
                (lo.max(ceil_div(rest, *c)), hi)
            };
            if nlo > nhi {
                return Err(Conflict);
            }
            if (nlo, nhi) != (lo, hi) {
                dom[*v] = (nlo, nhi);
                changed = true;
            }
        }
        Ok(changed)
    }
}

fn status(n: &Node, dom: &[(i128, i128)]) -> Tri {
    match n {
        Node::True => Tri::Entailed,
        Node::False => Tri::Disentailed,
        Node::Atom(l) => l.status(dom),
        Node::And(items) => {
            let mut all = true;
            for i in items {
                match status(i, dom) {
                    Tri::Disentailed => return Tri::Disentailed,
                    Tri::Unknown => all = false,
                    Tri::Entailed => {}
                }
            }
            if all {
                Tri::Entailed
            } else {
                Tri::Unknown
            }
        }
        Node::Or { items, .. } => {
            let mut none = true;
            for i in items {
                match status(i, dom) {
                    Tri::Entailed => return Tri::Entailed,
                    Tri::Unknown => none = false,
                    Tri::Disentailed => {}
                }
            }
            if none {
                Tri::Disentailed
            } else {
                Tri::Unknown
            }
        }
    }
}

fn propagate_node(n: &Node, st: &mut State) -> Result<bool, Conflict> {
    match n {
        Node::True => Ok(false),
        Node::False => Err(Conflict),
        Node::Atom(l) => l.propagate(&mut st.dom),
        Node::And(items) => {
            let mut changed = false;
            for i in items {
                changed |= propagate_node(i, st)?;
            }
            Ok(changed)
        }
        Node::Or { id, items, .. } => {
            if let Some(c) = st.choice[*id] {
                return propagate_node(&items[c], st);
            }
            let mut live = None;
            let mut count = 0;
            for (k, i) in items.iter().enumerate() {
                match status(i, &st.dom) {
                    Tri::Entailed => return Ok(false),
                    Tri::Unknown => {
                        count += 1;
                        live = Some(k);
                    }
                    Tri::Disentailed => {}
                }
            }
            match (count, live) {
                (0, _) => Err(Conflict),
                (1, Some(k)) => propagate_node(&items[k], st),
                _ => Ok(false),
            }
        }
    }
}

enum Branch {
    Or { id: usize, live: Vec<usize> },
    Selector(usize),
    Split { var: usize, mid: i128 },
}

struct Search<'a> {
    p: &'a Compiled,
    nodes: u64,
    budget: u64,
    trace: bool,
}

impl Search<'_> {
    fn run(&mut self, st: State) -> Result<Option<State>, SolverError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(SolverError::DomainTooLarge { budget: self.budget });
        }
        let mut st = st;
        if self.propagate(&mut st).is_err() {
            if self.trace {
                debug!("node {}: conflict", self.nodes);
            }
            return Ok(None);
        }
        if self.trace {
            debug!("node {}: domains {:?} selectors {:?}", self.nodes, st.dom, st.sel);
        }
        let Some(branch) = self.pick(&st) else {
            return Ok(Some(st));
        };
        match branch {
            Branch::Or { id, live } => {
                for k in live {
                    let mut child = st.clone();
                    child.choice[id] = Some(k);
                    if let Some(s) = self.run(child)? {
                        return Ok(Some(s));
                    }
                }
            }
            Branch::Selector(i) => {
                for value in [Sel::On, Sel::Off] {
                    let mut child = st.clone();
                    child.sel[i] = value;
                    if let Some(s) = self.run(child)? {
                        return Ok(Some(s));
                    }
                }
            }
            Branch::Split { var, mid } => {
                let (lo, hi) = st.dom[var];
                for half in [(lo, mid), (mid + 1, hi)] {
                    let mut child = st.clone();
                    child.dom[var] = half;
                    if let Some(s) = self.run(child)? {
                        return Ok(Some(s));
                    }
                }
            }
        }
        Ok(None)
    }

    fn propagate(&self, st: &mut State) -> Result<(), Conflict> {
        let p = self.p;
        for _ in 0..MAX_ROUNDS {
            let mut changed = false;
            for (i, n) in p.soft.iter().enumerate() {
                if st.sel[i] == Sel::Unknown {
                    match status(n, &st.dom) {
                        Tri::Disentailed => {
                            st.sel[i] = Sel::Off;
                            changed = true;
                        }
                        Tri::Entailed => {
                            st.sel[i] = Sel::On;
                            changed = true;
                        }
                        Tri::Unknown => {}
                    }
                }
            }
            if let Some((set, k)) = &p.atmost {
                let off = set.iter().filter(|&&s| st.sel[s] == Sel::Off).count();
                if off > *k {
                    return Err(Conflict);
                }
                if off == *k {
                    for &s in set {
                        if st.sel[s] == Sel::Unknown {
                            st.sel[s] = Sel::On;
                            changed = true;
                        }
                    }
                }
            }
            for clause in &p.blocking {
                let mut unknown = None;
                let mut n_unknown = 0;
                let mut satisfied = false;
                for &s in clause {
                    match st.sel[s] {
                        Sel::On => satisfied = true,
                        Sel::Unknown => {
                            n_unknown += 1;
                            unknown = Some(s);
                        }
                        Sel::Off => {}
                    }
                }
                if satisfied {
                    continue;
                }
                match (n_unknown, unknown) {
                    (0, _) => return Err(Conflict),
                    (1, Some(s)) => {
                        st.sel[s] = Sel::On;
                        changed = true;
                    }
                    _ => {}
                }
            }
            let active: Vec<&Node> = p.active(st);
            for n in active {
                changed |= propagate_node(n, st)?;
            }
            if !changed {
                break;
            }
        }
        Ok(())
    }

    fn pick(&self, st: &State) -> Option<Branch> {
        let p = self.p;
        let roots: Vec<&Node> = p.active(st);
        for prefer_ne in [false, true] {
            for n in &roots {
                if let Some(b) = find_or(n, st, prefer_ne) {
                    return Some(b);
                }
            }
        }
        if let Some(i) = st.sel.iter().position(|s| *s == Sel::Unknown) {
            return Some(Branch::Selector(i));
        }
        let mut best: Option<(i128, usize)> = None;
        for n in &roots {
            if status(n, &st.dom) == Tri::Entailed {
                continue;
            }
            collect_open_vars(n, st, &mut |v| {
                let (lo, hi) = st.dom[v];
                let width = hi - lo;
                if width > 0 && best.is_none_or(|(w, b)| width > w || (width == w && v < b)) {
                    best = Some((width, v));
                }
            });
        }
        best.map(|(_, var)| {
            let (lo, hi) = st.dom[var];
            Branch::Split {
                var,
                mid: floor_div(lo + hi, 2),
            }
        })
    }
}

fn find_or(n: &Node, st: &State, want_ne: bool) -> Option<Branch> {
    match n {
        Node::True | Node::False | Node::Atom(_) => None,
        Node::And(items) => items.iter().find_map(|i| find_or(i, st, want_ne)),
        Node::Or { id, items, from_ne } => {
            if let Some(c) = st.choice[*id] {
                return find_or(&items[c], st, want_ne);
            }
            if *from_ne != want_ne || status(n, &st.dom) != Tri::Unknown {
                return None;
            }
            let live: Vec<usize> = items
                .iter()
                .enumerate()
                .filter(|(_, i)| status(i, &st.dom) != Tri::Disentailed)
                .map(|(k, _)| k)
                .collect();
            Some(Branch::Or { id: *id, live })
        }
    }
}

fn collect_open_vars(n: &Node, st: &State, f: &mut impl FnMut(usize)) {
    match n {
        Node::True | Node::False => {}
        Node::Atom(l) => l.coefs.iter().for_each(|(v, _)| f(*v)),
        Node::And(items) => items.iter().for_each(|i| collect_open_vars(i, st, f)),
        Node::Or { id, items, .. } => match st.choice[*id] {
            Some(c) => collect_open_vars(&items[c], st, f),
            None => items.iter().for_each(|i| collect_open_vars(i, st, f)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{Provenance, ProvenanceKind, Term};
    use crate::expr::Relop;

    fn v(n: &str) -> VersionedVar {
        VersionedVar::new(n, 0)
    }

    fn atom(lhs: &[(&str, i64)], op: Relop, rhs: i64) -> Formula<i64> {
        let l = Term::from_parts(lhs.iter().map(|(n, c)| (v(n), *c)), 0);
        Formula::Atom(
            Constraint::new(
                &l,
                op,
                &Term::constant(rhs),
                Provenance::new(0, ProvenanceKind::Condition),
            )
            .unwrap(),
        )
    }

    fn small() -> SolverConfig<i64> {
        SolverConfig {
            default_domain: (-10, 10),
            ..SolverConfig::default()
        }
    }

    #[test]
    fn contradiction() {
        let mut s = Store::new(small());
        s.add_hard(atom(&[("x", 1)], Relop::Eq, 0));
        s.add_hard(atom(&[("x", 1)], Relop::Eq, 1));
        assert_eq!(s.is_feasible().unwrap(), Verdict::Infeasible);
    }

    #[test]
    fn unique_solution() {
        let mut s = Store::new(small());
        s.add_hard(atom(&[("x", 1), ("y", 1)], Relop::Eq, 3));
        s.add_hard(atom(&[("x", 1), ("y", -1)], Relop::Eq, 1));
        let w = s.is_feasible().unwrap().witness().cloned().unwrap();
        assert_eq!(w.env[&v("x")], 2);
        assert_eq!(w.env[&v("y")], 1);
    }

    #[test]
    fn slow_shaving_is_finished_by_branching() {
        let mut s = Store::new(SolverConfig::default());
        s.add_hard(atom(&[("x", 1), ("y", -1)], Relop::Lt, 0));
        s.add_hard(atom(&[("y", 1), ("x", -1)], Relop::Lt, 0));
        assert_eq!(s.is_feasible().unwrap(), Verdict::Infeasible);
    }

    #[test]
    fn disequalities_and_disjunctions() {
        let mut s = Store::new(small());
        s.add_hard(atom(&[("x", 1)], Relop::Ge, 0));
        s.add_hard(atom(&[("x", 1)], Relop::Le, 1));
        s.add_hard(atom(&[("x", 1)], Relop::Ne, 0));
        s.add_hard(Formula::Or(vec![
            atom(&[("y", 1)], Relop::Eq, 5),
            atom(&[("y", 1), ("x", -1)], Relop::Eq, 7),
        ]));
        s.add_hard(atom(&[("y", 1)], Relop::Ne, 5));
        let w = s.is_feasible().unwrap().witness().cloned().unwrap();
        assert_eq!((w.env[&v("x")], w.env[&v("y")]), (1, 8));
    }

    #[test]
    fn soft_constraints_and_selectors() {
        let mut s = Store::new(small());
        s.add_hard(atom(&[("x", 1)], Relop::Ge, 5));
        let a = s.add_soft(atom(&[("x", 1)], Relop::Le, 3));
        let b = s.add_soft(atom(&[("x", 1)], Relop::Eq, 4));
        let c = s.add_soft(atom(&[("x", 1)], Relop::Ge, 0));
        s.set_atmost(&[a, b, c], 1).unwrap();
        assert_eq!(s.is_feasible().unwrap(), Verdict::Infeasible);
        s.set_atmost(&[a, b, c], 2).unwrap();
        let w = s.is_feasible().unwrap().witness().cloned().unwrap();
        assert_eq!(w.off_set(), vec![a, b]);
        s.add_blocking_clause(&[a, b]).unwrap();
        assert_eq!(s.is_feasible().unwrap(), Verdict::Infeasible);
        assert_eq!(s.add_blocking_clause(&[9]), Err(SolverError::UnknownSelector(9)));
    }

    #[test]
    fn blocking_rejects_supersets() {
        let mut s = Store::new(small());
        for k in 0..6 {
            s.add_soft(atom(&[("x", 1)], Relop::Eq, k));
        }
        s.add_blocking_clause(&[2]).unwrap();
        s.set_atmost(&[0, 1, 2, 3, 4, 5], 5).unwrap();
        let w = s.is_feasible().unwrap().witness().cloned().unwrap();
        assert!(!w.off_set().contains(&2));
        assert_eq!(w.off_set().len(), 5);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut s = Store::new(SolverConfig {
            budget: 50,
            ..SolverConfig::default()
        });
        // 2x - 2y = 1 has no integer solution; bounds reasoning cannot see it.
        s.add_hard(atom(&[("x", 2), ("y", -2)], Relop::Eq, 1));
        assert_eq!(s.is_feasible(), Err(SolverError::DomainTooLarge { budget: 50 }));
    }

    #[test]
    fn narrow_scalar_type() {
        let mut s: Store<i8> = Store::default();
        let l = Term::from_parts([(v("x"), 1i8), (v("y"), 1)], 0);
        let f = Constraint::new(&l, Relop::Eq, &Term::constant(120), Provenance::new(0, ProvenanceKind::Condition)).unwrap();
        s.add_hard_constraint(f);
        s.add_hard(Formula::Atom(
            Constraint::new(&Term::var(v("x")), Relop::Ge, &Term::constant(100), Provenance::new(0, ProvenanceKind::Condition)).unwrap(),
        ));
        let w = s.is_feasible().unwrap().witness().cloned().unwrap();
        assert_eq!(w.env[&v("x")] + w.env[&v("y")], 120);
    }

    #[test]
    fn empty_domain_is_infeasible() {
        let mut s = Store::new(small());
        s.set_domain(v("x"), 3, 2);
        assert_eq!(s.is_feasible().unwrap(), Verdict::Infeasible);
    }
}
