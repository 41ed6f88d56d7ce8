//! Enumeration of minimal correction sets by increasing cardinality, with
//! blocking clauses to exclude supersets of sets already found.

use std::collections::BTreeSet;

use log::debug;
use thiserror::Error;

use crate::constraints::Formula;
use crate::num::Scalar;
use crate::solver::{SolverConfig, SolverError, Store, Verdict};

/// A minimal correction set: removing `members` from the soft constraints
/// makes the system feasible, and putting any one of them back does not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mcs<S: Scalar> {
    /// Positions in the soft list, ascending.
    pub indices: Vec<usize>,
    pub members: Vec<Formula<S>>,
    /// Source lines of the members, ascending and deduplicated.
    pub lines: Vec<u32>,
}

impl<S: Scalar> Mcs<S> {
    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }

    fn new(indices: Vec<usize>, soft: &[Formula<S>]) -> Self {
        let members: Vec<Formula<S>> = indices.iter().map(|&i| soft[i].clone()).collect();
        let lines: BTreeSet<u32> = members.iter().filter_map(|m| m.provenance()).map(|p| p.line).collect();
        Mcs {
            indices,
            members,
            lines: lines.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McsError {
    #[error("the constraint system is feasible; there is nothing to correct")]
    NotInfeasible,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn feasible_with<S: Scalar>(
    hard: &[Formula<S>],
    soft: &[Formula<S>],
    keep: impl Fn(usize) -> bool,
    config: &SolverConfig<S>,
) -> Result<bool, SolverError> {
    let mut s = Store::new(config.clone());
    s.hard.extend(hard.iter().cloned());
    s.hard
        .extend(soft.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, f)| f.clone()));
    Ok(s.is_feasible()?.is_feasible())
}

/// Is `removed` a correction set that stays one with no element put back?
pub fn is_minimal_correction<S: Scalar>(
    hard: &[Formula<S>],
    soft: &[Formula<S>],
    removed: &BTreeSet<usize>,
    config: &SolverConfig<S>,
) -> Result<bool, SolverError> {
    if !feasible_with(hard, soft, |i| !removed.contains(&i), config)? {
        return Ok(false);
    }
    for &c in removed {
        if feasible_with(hard, soft, |i| i == c || !removed.contains(&i), config)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Drops members whose return keeps the system feasible, until minimal.
fn shrink<S: Scalar>(
    hard: &[Formula<S>],
    soft: &[Formula<S>],
    removed: &mut BTreeSet<usize>,
    config: &SolverConfig<S>,
) -> Result<(), SolverError> {
    for c in removed.clone() {
        let without: BTreeSet<usize> = removed.iter().copied().filter(|&i| i != c).collect();
        if feasible_with(hard, soft, |i| !without.contains(&i), config)? {
            *removed = without;
        }
    }
    Ok(())
}

/// All MCSs of `soft` relative to `hard` with at most `bound` members.
///
/// Returns an empty list when `hard` alone is infeasible, and
/// [`McsError::NotInfeasible`] when `hard` and `soft` together are feasible.
/// Output is ordered by cardinality, then source lines, then indices.
pub fn mcs_enumerate<S: Scalar>(
    hard: &[Formula<S>],
    soft: &[Formula<S>],
    bound: usize,
    config: &SolverConfig<S>,
) -> Result<Vec<Mcs<S>>, McsError> {
    if feasible_with(hard, soft, |_| true, config)? {
        return Err(McsError::NotInfeasible);
    }
    if !feasible_with(hard, soft, |_| false, config)? {
        return Ok(Vec::new());
    }
    let mut store = Store::new(config.clone());
    store.hard.extend(hard.iter().cloned());
    for f in soft {
        store.add_soft(f.clone());
    }
    let all: Vec<usize> = (0..soft.len()).collect();
    let mut found: Vec<Mcs<S>> = Vec::new();
    'layers: for k in 1..=bound.min(soft.len()) {
        loop {
            store.clear_atmost();
            if !store.is_feasible()?.is_feasible() {
                break 'layers;
            }
            store.set_atmost(&all, k)?;
            let Verdict::Feasible(w) = store.is_feasible()? else {
                break;
            };
            let mut removed: BTreeSet<usize> = w.off_set().into_iter().collect();
            if !is_minimal_correction(hard, soft, &removed, config)? {
                debug!("non-minimal candidate {removed:?} at layer {k}");
                shrink(hard, soft, &mut removed, config)?;
            }
            let indices: Vec<usize> = removed.into_iter().collect();
            store.add_blocking_clause(&indices)?;
            if indices.len() <= bound && !found.iter().any(|m| m.indices == indices) {
                found.push(Mcs::new(indices, soft));
            }
        }
    }
    found.sort_by(|a, b| {
        a.cardinality()
            .cmp(&b.cardinality())
            .then_with(|| a.lines.cmp(&b.lines))
            .then_with(|| a.indices.cmp(&b.indices))
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{Constraint, Provenance, ProvenanceKind, Term, VersionedVar};
    use crate::expr::Relop;

    fn cx(op: Relop, k: i64, line: u32) -> Formula<i64> {
        Formula::Atom(
            Constraint::new(
                &Term::var(VersionedVar::new("x", 0)),
                op,
                &Term::constant(k),
                Provenance::new(line, ProvenanceKind::Assignment),
            )
            .unwrap(),
        )
    }

    fn cfg() -> SolverConfig<i64> {
        SolverConfig {
            default_domain: (-20, 20),
            ..SolverConfig::default()
        }
    }

    #[test]
    fn two_singletons() {
        let soft = [cx(Relop::Eq, 0, 1), cx(Relop::Eq, 1, 2)];
        let got = mcs_enumerate(&[], &soft, 3, &cfg()).unwrap();
        assert_eq!(got.iter().map(|m| m.lines.clone()).collect::<Vec<_>>(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn only_the_pair_is_minimal() {
        let hard = [cx(Relop::Ge, 5, 0)];
        let soft = [cx(Relop::Le, 3, 1), cx(Relop::Eq, 4, 2), cx(Relop::Ge, 0, 3)];
        let got = mcs_enumerate(&hard, &soft, 3, &cfg()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].indices, vec![0, 1]);
        assert_eq!(got[0].cardinality(), 2);
        assert!(mcs_enumerate(&hard, &soft, 1, &cfg()).unwrap().is_empty());
    }

    #[test]
    fn error_and_degenerate_cases() {
        let soft = [cx(Relop::Eq, 0, 1)];
        assert_eq!(mcs_enumerate(&[], &soft, 2, &cfg()), Err(McsError::NotInfeasible));
        let hard = [cx(Relop::Eq, 0, 0), cx(Relop::Eq, 1, 0)];
        assert_eq!(mcs_enumerate(&hard, &soft, 2, &cfg()), Ok(Vec::new()));
    }
}
