//! Exhaustive reference procedures. They share no code with the solver and
//! exist to check it: grid enumeration for feasibility, subset enumeration
//! for correction sets and unsatisfiable cores.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::constraints::{CmpOp, Env, EvalError, Formula, VersionedVar};
use crate::num::Scalar;
use crate::solver::{Store, Verdict, Witness};

/// Largest grid the oracles will enumerate.
pub const MAX_GRID: u128 = 10_000_000;
/// Largest soft-constraint count for subset enumeration.
pub const MAX_SOFT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space of {0} points exceeds the oracle limit")]
    OracleTooLarge(u128),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A set of soft-constraint indices.
pub type IndexSet = BTreeSet<usize>;

fn grid_size(doms: &[(i128, i128)]) -> u128 {
    doms.iter().fold(1u128, |acc, (lo, hi)| {
        let w = if hi < lo { 0 } else { (hi - lo + 1) as u128 };
        acc.saturating_mul(w)
    })
}

/// Calls `f` on every point of the box until it returns `false`.
fn for_each_point<S: Scalar>(
    vars: &[VersionedVar],
    doms: &[(i128, i128)],
    mut f: impl FnMut(&Env<S>) -> Result<bool, OracleError>,
) -> Result<(), OracleError> {
    let size = grid_size(doms);
    if size > MAX_GRID {
        return Err(OracleError::OracleTooLarge(size));
    }
    if size == 0 {
        return Ok(());
    }
    let mut cur: Vec<i128> = doms.iter().map(|d| d.0).collect();
    let to_env = |cur: &[i128]| -> Env<S> {
        vars.iter()
            .zip(cur)
            .map(|(v, x)| (v.clone(), S::from_i128(*x).expect("grid value fits")))
            .collect()
    };
    loop {
        if !f(&to_env(&cur))? {
            return Ok(());
        }
        let mut i = 0;
        loop {
            if i == cur.len() {
                return Ok(());
            }
            if cur[i] < doms[i].1 {
                cur[i] += 1;
                break;
            }
            cur[i] = doms[i].0;
            i += 1;
        }
    }
}

fn all_hold<S: Scalar>(fs: &[Formula<S>], env: &Env<S>) -> Result<bool, OracleError> {
    for f in fs {
        if !f.eval(env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Ground-truth verdict by enumerating every point of the domain box. At each
/// point the satisfied soft constraints are switched on, which is the most
/// permissive selector choice for both the cardinality bound and the
/// blocking clauses.
pub fn brute_force_feasible<S: Scalar>(store: &Store<S>) -> Result<Verdict<S>, OracleError> {
    let vars = store.variables();
    let doms: Vec<(i128, i128)> = vars
        .iter()
        .map(|v| {
            let (lo, hi) = store.domain(v);
            (lo.to_i128().unwrap(), hi.to_i128().unwrap())
        })
        .collect();
    let mut found = None;
    for_each_point(&vars, &doms, |env| {
        if !all_hold(&store.hard, env)? {
            return Ok(true);
        }
        let mut selectors = Vec::with_capacity(store.soft.len());
        for f in &store.soft {
            selectors.push(f.eval(env)?);
        }
        if let Some((set, k)) = store.atmost() {
            if set.iter().filter(|&&s| !selectors[s]).count() > k {
                return Ok(true);
            }
        }
        if store
            .blocking_clauses()
            .iter()
            .any(|c| c.iter().all(|&s| !selectors[s]))
        {
            return Ok(true);
        }
        found = Some(Witness {
            env: env.clone(),
            selectors,
        });
        Ok(false)
    })?;
    Ok(match found {
        Some(w) => Verdict::Feasible(w),
        None => Verdict::Infeasible,
    })
}

/// Feasibility of every subset of the soft constraints (together with the
/// hard ones), indexed by bitmask.
pub struct SubsetTable {
    n: usize,
    feasible: Vec<bool>,
}

impl SubsetTable {
    pub fn build<S: Scalar>(
        hard: &[Formula<S>],
        soft: &[Formula<S>],
        domain: (S, S),
    ) -> Result<Self, OracleError> {
        let n = soft.len();
        if n > MAX_SOFT {
            return Err(OracleError::OracleTooLarge(1u128 << n));
        }
        let mut vars: BTreeSet<VersionedVar> = BTreeSet::new();
        for f in hard.iter().chain(soft) {
            vars.extend(f.vars().into_iter().cloned());
        }
        let vars: Vec<VersionedVar> = vars.into_iter().collect();
        let d = (domain.0.to_i128().unwrap(), domain.1.to_i128().unwrap());
        let doms = vec![d; vars.len()];
        let mut feasible = vec![false; 1 << n];
        for_each_point(&vars, &doms, |env| {
            if all_hold(hard, env)? {
                let mut mask = 0usize;
                for (i, f) in soft.iter().enumerate() {
                    if f.eval(env)? {
                        mask |= 1 << i;
                    }
                }
                feasible[mask] = true;
            }
            Ok(true)
        })?;
        // A subset is feasible iff some satisfied-set contains it.
        for bit in 0..n {
            for mask in (0..1usize << n).rev() {
                if mask & (1 << bit) == 0 && feasible[mask | (1 << bit)] {
                    feasible[mask] = true;
                }
            }
        }
        Ok(SubsetTable { n, feasible })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Is `hard` together with the soft constraints in `kept` feasible?
    pub fn feasible(&self, kept: &IndexSet) -> bool {
        self.feasible[to_mask(kept)]
    }

    fn full(&self) -> usize {
        (1 << self.n) - 1
    }

    /// All minimal correction sets of size at most `bound`, ordered by size
    /// then lexicographically.
    pub fn mcs_family(&self, bound: usize) -> Vec<IndexSet> {
        let mut out = Vec::new();
        if !self.feasible[0] {
            return out;
        }
        for m in 0..1usize << self.n {
            if (m.count_ones() as usize) > bound {
                continue;
            }
            let kept = self.full() & !m;
            if !self.feasible[kept] {
                continue;
            }
            let minimal = bits(m).all(|c| !self.feasible[kept | (1 << c)]);
            if minimal {
                out.push(from_mask(m));
            }
        }
        sort_family(&mut out);
        out
    }

    /// All minimal infeasible subsets.
    pub fn mus_family(&self) -> Vec<IndexSet> {
        let mut out = Vec::new();
        for u in 0..1usize << self.n {
            if self.feasible[u] {
                continue;
            }
            if bits(u).all(|c| self.feasible[u & !(1 << c)]) {
                out.push(from_mask(u));
            }
        }
        sort_family(&mut out);
        out
    }
}

fn bits(m: usize) -> impl Iterator<Item = usize> {
    (0..usize::BITS as usize).filter(move |b| m & (1 << b) != 0)
}

fn to_mask(s: &IndexSet) -> usize {
    s.iter().fold(0, |m, i| m | (1 << i))
}

fn from_mask(m: usize) -> IndexSet {
    bits(m).collect()
}

pub fn sort_family(f: &mut [IndexSet]) {
    f.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
}

/// MCSs of size at most `bound` by subset enumeration.
pub fn mcs_brute_force<S: Scalar>(
    hard: &[Formula<S>],
    soft: &[Formula<S>],
    bound: usize,
    domain: (S, S),
) -> Result<Vec<IndexSet>, OracleError> {
    Ok(SubsetTable::build(hard, soft, domain)?.mcs_family(bound))
}

/// MUSs by subset enumeration.
pub fn mus_brute_force<S: Scalar>(
    hard: &[Formula<S>],
    soft: &[Formula<S>],
    domain: (S, S),
) -> Result<Vec<IndexSet>, OracleError> {
    Ok(SubsetTable::build(hard, soft, domain)?.mus_family())
}

/// Is `candidate` a hitting set of `family` from which no element can be
/// removed?
pub fn mus_hitting_check(family: &[IndexSet], candidate: &IndexSet) -> bool {
    let hits = |c: &IndexSet| family.iter().all(|s| !s.is_disjoint(c));
    let union: IndexSet = family.iter().flatten().copied().collect();
    if !candidate.is_subset(&union) || !hits(candidate) {
        return false;
    }
    candidate.iter().all(|e| {
        let mut smaller = candidate.clone();
        smaller.remove(e);
        !hits(&smaller)
    })
}

/// Every irreducible hitting set of `family` drawn from `0..universe`.
pub fn irreducible_hitting_sets(family: &[IndexSet], universe: usize) -> Vec<IndexSet> {
    let mut out: Vec<IndexSet> = (0..1usize << universe)
        .map(from_mask)
        .filter(|c| mus_hitting_check(family, c))
        .collect();
    sort_family(&mut out);
    out
}

/// Feasibility of a conjunction dominated by equalities, as produced along a
/// single program path. Equalities with one unknown variable are solved
/// exactly (repeatedly); the variables left over are enumerated over
/// `free_range`. Returns a satisfying environment, or `None`.
pub fn substitution_feasible<S: Scalar>(
    formulas: &[Formula<S>],
    free_range: (i64, i64),
) -> Result<Option<Env<S>>, OracleError> {
    let mut atoms = Vec::new();
    for f in formulas {
        flatten(f, &mut atoms);
    }
    let mut known: BTreeMap<VersionedVar, i128> = BTreeMap::new();
    loop {
        let mut progress = false;
        for c in atoms.iter().filter_map(|f| match f {
            Formula::Atom(c) if c.op() == CmpOp::Eq => Some(c),
            _ => None,
        }) {
            let unknown: Vec<(&VersionedVar, i128)> = c
                .lhs()
                .terms()
                .filter(|(v, _)| !known.contains_key(*v))
                .map(|(v, k)| (v, k.to_i128().unwrap()))
                .collect();
            if unknown.len() != 1 {
                continue;
            }
            let (v, coef) = unknown[0];
            let rest: i128 = c
                .lhs()
                .terms()
                .filter(|(w, _)| known.contains_key(*w))
                .map(|(w, k)| k.to_i128().unwrap() * known[w])
                .sum();
            let rhs = c.rhs().to_i128().unwrap() - rest;
            if rhs % coef != 0 {
                return Ok(None);
            }
            known.insert(v.clone(), rhs / coef);
            progress = true;
        }
        if !progress {
            break;
        }
    }
    let mut all_vars: BTreeSet<VersionedVar> = BTreeSet::new();
    for f in formulas {
        all_vars.extend(f.vars().into_iter().cloned());
    }
    let free: Vec<VersionedVar> = all_vars.into_iter().filter(|v| !known.contains_key(v)).collect();
    let mut base: Env<S> = Env::new();
    for (v, x) in &known {
        match S::from_i128(*x) {
            Some(s) => {
                base.insert(v.clone(), s);
            }
            None => return Ok(None),
        }
    }
    let doms = vec![(i128::from(free_range.0), i128::from(free_range.1)); free.len()];
    let mut found = None;
    for_each_point::<S>(&free, &doms, |point| {
        let mut env = base.clone();
        env.extend(point.iter().map(|(k, v)| (k.clone(), *v)));
        if all_hold(formulas, &env)? {
            found = Some(env);
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(found)
}

fn flatten<'a, S: Scalar>(f: &'a Formula<S>, out: &mut Vec<&'a Formula<S>>) {
    match f {
        Formula::And(fs) => fs.iter().for_each(|g| flatten(g, out)),
        other => out.push(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{Constraint, Provenance, ProvenanceKind, Term};
    use crate::expr::Relop;
    use crate::solver::SolverConfig;

    fn x() -> VersionedVar {
        VersionedVar::new("x", 0)
    }

    fn cx(op: Relop, k: i64) -> Formula<i64> {
        Formula::Atom(
            Constraint::new(
                &Term::var(x()),
                op,
                &Term::constant(k),
                Provenance::new(0, ProvenanceKind::Assignment),
            )
            .unwrap(),
        )
    }

    fn set(xs: &[usize]) -> IndexSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn two_singletons() {
        let soft = [cx(Relop::Eq, 0), cx(Relop::Eq, 1)];
        let f = mcs_brute_force(&[], &soft, 3, (-10, 10)).unwrap();
        assert_eq!(f, vec![set(&[0]), set(&[1])]);
    }

    #[test]
    fn hard_lower_bound_example() {
        let hard = [cx(Relop::Ge, 5)];
        let soft = [cx(Relop::Le, 3), cx(Relop::Eq, 4), cx(Relop::Ge, 0)];
        let t = SubsetTable::build(&hard, &soft, (-20, 20)).unwrap();
        assert_eq!(t.mcs_family(3), vec![set(&[0, 1])]);
        assert_eq!(t.mus_family(), vec![set(&[0]), set(&[1])]);
    }

    #[test]
    fn hitting_sets() {
        assert!(mus_hitting_check(&[set(&[0]), set(&[1])], &set(&[0, 1])));
        assert!(mus_hitting_check(&[set(&[0, 1])], &set(&[0])));
        assert!(!mus_hitting_check(&[set(&[0, 1])], &set(&[0, 1])));
        assert!(!mus_hitting_check(&[set(&[0]), set(&[1])], &set(&[0])));
        assert_eq!(
            irreducible_hitting_sets(&[set(&[0, 1]), set(&[1, 2])], 3),
            vec![set(&[1]), set(&[0, 2])]
        );
    }

    #[test]
    fn grid_verdicts() {
        let mut s = Store::new(SolverConfig {
            default_domain: (-10, 10),
            ..SolverConfig::default()
        });
        s.add_hard(cx(Relop::Eq, 0));
        s.add_hard(cx(Relop::Eq, 1));
        assert_eq!(brute_force_feasible(&s).unwrap(), Verdict::Infeasible);

        let mut big = Store::<i64>::default();
        big.add_hard(cx(Relop::Eq, 0));
        big.set_domain(VersionedVar::new("y", 0), -1_000_000, 1_000_000);
        big.set_domain(VersionedVar::new("z", 0), -1_000_000, 1_000_000);
        assert!(matches!(brute_force_feasible(&big), Err(OracleError::OracleTooLarge(_))));
    }

    #[test]
    fn substitution_chains() {
        let v = |n: &str, k| VersionedVar::new(n, k);
        let eq = |lhs: Term<i64>, rhs: Term<i64>| {
            Formula::Atom(Constraint::new(&lhs, Relop::Eq, &rhs, Provenance::new(0, ProvenanceKind::Assignment)).unwrap())
        };
        let f = vec![
            eq(Term::var(v("i", 0)), Term::constant(3)),
            eq(Term::var(v("k", 1)), Term::from_parts([(v("i", 0), 2)], 1)),
            eq(Term::var(v("k", 1)), Term::constant(7)),
        ];
        let env = substitution_feasible(&f, (-5, 5)).unwrap().unwrap();
        assert_eq!(env[&v("k", 1)], 7);
        let mut g = f.clone();
        g[2] = eq(Term::var(v("k", 1)), Term::constant(8));
        assert_eq!(substitution_feasible(&g, (-5, 5)).unwrap(), None);
        let h = vec![eq(Term::from_parts([(v("a", 0), 2)], 0), Term::constant(3))];
        assert_eq!(substitution_feasible(&h, (-5, 5)).unwrap(), None);
    }
}
