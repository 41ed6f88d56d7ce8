//! The localization driver: validates the counterexample, follows its path
//! through the CFG, tries flipping up to `k_max` conditions, and computes
//! correction sets for the counterexample path and for every path whose
//! deviations make the postcondition hold.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use log::debug;
use thiserror::Error;

use crate::cfg::{build_cfg, Cfg, CfgError, CfgNode, NodeId};
use crate::constraints::{
    cond_formula, cstr_assign, translate_expr, Constraint, ConstraintError, Env, EvalError, Formula, Provenance,
    ProvenanceKind, Term, VersionMap, VersionedVar,
};
use crate::expr::Relop;
use crate::lang::interp::{self, InterpError};
use crate::lang::{Cond, Program};
use crate::mcs::{mcs_enumerate, Mcs, McsError};
use crate::num::Scalar;
use crate::solver::SolverConfig;

/// Input bindings that satisfy the precondition and violate the
/// postcondition.
pub type CounterExample = BTreeMap<String, i64>;

/// Parses a JSON object mapping input names to integers.
pub fn ce_from_json(text: &str) -> Result<CounterExample, serde_json::Error> {
    serde_json::from_str(text)
}

/// Parses `name=value` pairs separated by commas, e.g. `i=0,j=-1`.
pub fn ce_from_inline(text: &str) -> Result<CounterExample, String> {
    let mut ce = CounterExample::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got `{part}`"))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("bad input name `{name}`"));
        }
        let value: i64 = value
            .trim()
            .parse()
            .map_err(|_| format!("bad value for `{name}`: `{}`", value.trim()))?;
        if ce.insert(name.to_string(), value).is_some() {
            return Err(format!("`{name}` given twice"));
        }
    }
    Ok(ce)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocConfig<S> {
    /// Maximum number of conditions flipped on one path.
    pub k_max: usize,
    /// Maximum MCS cardinality.
    pub mcs_bound: usize,
    pub solver: SolverConfig<S>,
}

impl<S: Scalar> Default for LocConfig<S> {
    fn default() -> Self {
        LocConfig {
            k_max: 3,
            mcs_bound: 3,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocError {
    #[error("the input satisfies the postcondition; it is not a counterexample")]
    NotACounterExample,
    #[error("the input violates the precondition")]
    PreconditionViolated,
    #[error("counterexample has no value for input `{0}`")]
    MissingInput(String),
    #[error("`{0}` is not an input of the program")]
    UnknownInput(String),
    #[error("the counterexample needs more loop iterations than the unroll bound (assumption at line {0})")]
    LoopBoundExceeded(u32),
    #[error("integer overflow while executing the counterexample (line {0})")]
    Overflow(u32),
    #[error("value {0} does not fit the scalar type")]
    ScalarRange(i64),
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Mcs(#[from] McsError),
}

/// One row of the report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportEntry<S: Scalar> {
    /// Lines of the flipped conditions, ascending. Empty for the
    /// counterexample path itself.
    pub deviations: Vec<u32>,
    pub mcs: Vec<Mcs<S>>,
    /// The constraint system the MCSs were computed from.
    pub hard: Vec<Formula<S>>,
    pub soft: Vec<Formula<S>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Timings {
    pub preprocess: Duration,
    pub localize: Duration,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Number of `correct` evaluations (one per deviation attempt).
    pub correct_calls: u64,
    /// Number of deviation attempts skipped by prefix pruning.
    pub pruned: u64,
    pub mcs_calls: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McsReport<S: Scalar> {
    pub counterexample: CounterExample,
    pub entries: Vec<ReportEntry<S>>,
    pub timings: Timings,
    pub stats: Stats,
}

/// A condition flipped on the current path. `taken` is the constraint that
/// holds on the branch the counterexample itself would take.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deviation<S: Scalar> {
    pub line: u32,
    pub taken: Formula<S>,
}

/// Propagation state along one path.
#[derive(Clone, Debug)]
pub struct PathState<S: Scalar> {
    pub versions: VersionMap,
    /// Concrete value of every version introduced so far.
    pub env: Env<S>,
    pub deviated: Vec<Deviation<S>>,
    pub assigns: Vec<Constraint<S>>,
    pub k_remaining: usize,
}

/// Checks that `ce` binds exactly the inputs, satisfies the precondition and
/// leads to a state violating the postcondition.
pub fn validate_ce(program: &Program, ce: &CounterExample) -> Result<(), LocError> {
    let out = interp::run(program, ce).map_err(|e| match e {
        InterpError::MissingInput(n) => LocError::MissingInput(n),
        InterpError::UnknownInput(n) => LocError::UnknownInput(n),
        InterpError::GuardViolated(l) => LocError::LoopBoundExceeded(l),
        InterpError::Overflow(l) | InterpError::LoopLimit(l) => LocError::Overflow(l),
        InterpError::Unbound(n) => LocError::MissingInput(n),
    })?;
    if !out.pre_holds {
        return Err(LocError::PreconditionViolated);
    }
    if out.post_holds {
        return Err(LocError::NotACounterExample);
    }
    Ok(())
}

/// Localizes faults in a loop-free program. First the bare counterexample
/// path is analysed, then (if `k_max > 0`) every combination of up to
/// `k_max` deviations.
pub fn locfaults<S: Scalar>(
    program: &Program,
    ce: &CounterExample,
    config: &LocConfig<S>,
) -> Result<McsReport<S>, LocError> {
    let started = Instant::now();
    validate_ce(program, ce)?;
    let cfg = build_cfg(program)?;
    let preprocess = started.elapsed();

    let started = Instant::now();
    let mut d = Driver::new(&cfg, ce, config)?;
    d.pass_k = 0;
    d.dfs(cfg.root, d.initial_state(0))?;
    if config.k_max > 0 {
        d.pass_k = config.k_max;
        d.dfs(cfg.root, d.initial_state(config.k_max))?;
    }
    let entries = finish(d.entries);
    Ok(McsReport {
        counterexample: ce.clone(),
        entries,
        timings: Timings {
            preprocess,
            localize: started.elapsed(),
        },
        stats: d.stats,
    })
}

/// True when some recorded correcting deviation list is a prefix of
/// `candidate`; such extensions are not explored.
pub fn prefix_prune(recorded: &[Vec<u32>], candidate: &[u32]) -> bool {
    recorded.iter().any(|r| candidate.starts_with(r))
}

/// Runs the program concretely from `node` with the values in `env` and
/// reports whether the postcondition holds at the end. A failing
/// `assume` makes the path infeasible, which counts as not correct.
pub fn correct<S: Scalar>(cfg: &Cfg, node: NodeId, env: &Env<S>, versions: &VersionMap) -> Result<bool, LocError> {
    let mut env = env.clone();
    let mut versions = versions.clone();
    let mut n = node;
    loop {
        n = match cfg.node(n) {
            CfgNode::Precondition { next, .. } => *next,
            CfgNode::Condition { cond, left, right, line } => {
                if eval_cond(cond, &env, &versions, *line)? {
                    *left
                } else {
                    *right
                }
            }
            CfgNode::AssignBlock { assigns, next } => {
                for a in assigns {
                    let rhs: Term<S> = translate_expr(&a.rhs, &versions)?;
                    let v = rhs
                        .eval_with(|x| env.get(x).copied())
                        .map_err(|_| LocError::Overflow(a.line))?;
                    env.insert(versions.bump(&a.target), v);
                }
                *next
            }
            CfgNode::Guard { cond, line, next } => {
                if !eval_cond(cond, &env, &versions, *line)? {
                    return Ok(false);
                }
                *next
            }
            CfgNode::Postcondition { cond } => return eval_cond(cond, &env, &versions, 0),
        }
    }
}

fn eval_cond<S: Scalar>(cond: &Cond, env: &Env<S>, versions: &VersionMap, line: u32) -> Result<bool, LocError> {
    let f: Formula<S> = cond_formula(cond, versions, Provenance::new(line, ProvenanceKind::Condition))?;
    Ok(f.eval(env)?)
}

struct Driver<'a, S: Scalar> {
    cfg: &'a Cfg,
    config: &'a LocConfig<S>,
    ce_facts: Vec<Formula<S>>,
    ce_env: Env<S>,
    pre: Formula<S>,
    pass_k: usize,
    entries: Vec<ReportEntry<S>>,
    /// Correcting deviation lists, in path order.
    corrections: Vec<Vec<u32>>,
    stats: Stats,
}

impl<'a, S: Scalar> Driver<'a, S> {
    fn new(cfg: &'a Cfg, ce: &CounterExample, config: &'a LocConfig<S>) -> Result<Self, LocError> {
        let mut ce_facts = Vec::new();
        let mut ce_env = Env::new();
        for name in &cfg.inputs {
            let raw = ce[name];
            let value: S = S::from_i64(raw).ok_or(LocError::ScalarRange(raw))?;
            let v = VersionedVar::new(name.as_str(), 0);
            ce_env.insert(v.clone(), value);
            ce_facts.push(Formula::Atom(Constraint::new(
                &Term::var(v),
                Relop::Eq,
                &Term::constant(value),
                Provenance::new(0, ProvenanceKind::CounterExample),
            )?));
        }
        let pre = cond_formula(
            cfg.precondition(),
            &VersionMap::new(),
            Provenance::new(0, ProvenanceKind::Precondition),
        )?;
        Ok(Driver {
            cfg,
            config,
            ce_facts,
            ce_env,
            pre,
            pass_k: 0,
            entries: Vec::new(),
            corrections: Vec::new(),
            stats: Stats::default(),
        })
    }

    fn initial_state(&self, k: usize) -> PathState<S> {
        PathState {
            versions: VersionMap::new(),
            env: self.ce_env.clone(),
            deviated: Vec::new(),
            assigns: Vec::new(),
            k_remaining: k,
        }
    }

    fn base_hard(&self) -> Vec<Formula<S>> {
        let mut hard = self.ce_facts.clone();
        if self.pre != Formula::True {
            hard.push(self.pre.clone());
        }
        hard
    }

    fn record(&mut self, deviations: Vec<u32>, hard: Vec<Formula<S>>, st: &PathState<S>) -> Result<(), LocError> {
        let soft: Vec<Formula<S>> = st.assigns.iter().cloned().map(Formula::Atom).collect();
        self.stats.mcs_calls += 1;
        let mcs = mcs_enumerate(&hard, &soft, self.config.mcs_bound, &self.config.solver)?;
        debug!("entry {deviations:?}: {} mcs", mcs.len());
        self.entries.push(ReportEntry {
            deviations,
            mcs,
            hard,
            soft,
        });
        Ok(())
    }

    fn dfs(&mut self, node: NodeId, mut st: PathState<S>) -> Result<(), LocError> {
        match self.cfg.node(node) {
            CfgNode::Precondition { next, .. } => self.dfs(*next, st),
            CfgNode::AssignBlock { assigns, next } => {
                for a in assigns {
                    let rhs: Term<S> = translate_expr(&a.rhs, &st.versions)?;
                    let value = rhs
                        .eval_with(|x| st.env.get(x).copied())
                        .map_err(|_| LocError::Overflow(a.line))?;
                    let target = st.versions.bump(&a.target);
                    st.env.insert(target.clone(), value);
                    st.assigns.push(cstr_assign(target, &rhs, a.line)?);
                }
                self.dfs(*next, st)
            }
            CfgNode::Guard { cond, line, next } => {
                if eval_cond(cond, &st.env, &st.versions, *line)? {
                    self.dfs(*next, st)
                } else if st.deviated.is_empty() {
                    Err(LocError::LoopBoundExceeded(*line))
                } else {
                    Ok(())
                }
            }
            CfgNode::Postcondition { cond } => {
                if st.deviated.is_empty() && self.pass_k == 0 {
                    let post = cond_formula(
                        cond,
                        &st.versions,
                        Provenance::new(0, ProvenanceKind::Postcondition),
                    )?;
                    let mut hard = self.base_hard();
                    hard.push(post);
                    self.record(Vec::new(), hard, &st)?;
                }
                Ok(())
            }
            CfgNode::Condition { cond, left, right, line } => {
                let label = Provenance::new(*line, ProvenanceKind::Condition);
                let f: Formula<S> = cond_formula(cond, &st.versions, label)?;
                let value = f.eval(&st.env)?;
                let (next, devie) = if value { (*left, *right) } else { (*right, *left) };
                let taken = if value { f } else { f.negate() };
                if st.k_remaining > 0 {
                    self.try_deviation(devie, *line, taken.clone(), &st)?;
                }
                self.dfs(next, st)
            }
        }
    }

    fn try_deviation(&mut self, devie: NodeId, line: u32, taken: Formula<S>, st: &PathState<S>) -> Result<(), LocError> {
        let mut lines: Vec<u32> = st.deviated.iter().map(|d| d.line).collect();
        lines.push(line);
        if prefix_prune(&self.corrections, &lines) {
            self.stats.pruned += 1;
            return Ok(());
        }
        self.stats.correct_calls += 1;
        let mut child = st.clone();
        child.deviated.push(Deviation { line, taken });
        child.k_remaining -= 1;
        if correct(self.cfg, devie, &child.env, &child.versions)? {
            let mut hard = self.base_hard();
            for d in &child.deviated {
                hard.push(d.taken.negate().relabel(Provenance::new(d.line, ProvenanceKind::DeviatedCondition)));
            }
            let set: BTreeSet<u32> = lines.iter().copied().collect();
            self.record(set.into_iter().collect(), hard, &child)?;
            self.corrections.push(lines);
        } else if child.k_remaining > 0 {
            self.dfs(devie, child)?;
        }
        Ok(())
    }
}

/// Deduplicates entries and orders them: the counterexample path first, then
/// by number of deviations, deviation lines, and MCS lines.
fn finish<S: Scalar>(entries: Vec<ReportEntry<S>>) -> Vec<ReportEntry<S>> {
    let key = |e: &ReportEntry<S>| {
        (
            e.deviations.len(),
            e.deviations.clone(),
            e.mcs.iter().map(|m| m.lines.clone()).collect::<Vec<_>>(),
        )
    };
    let mut out: Vec<ReportEntry<S>> = Vec::new();
    for e in entries {
        if !out.iter().any(|o| key(o) == key(&e)) {
            out.push(e);
        }
    }
    out.sort_by_key(key);
    out
}
