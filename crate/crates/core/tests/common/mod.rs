#![allow(dead_code)]

use locfaults::constraints::{Constraint, Formula, Provenance, ProvenanceKind, Term, VersionedVar};
use locfaults::expr::Relop;
use locfaults::oracle::SubsetTable;
use rand::Rng;

pub const DOMAIN: (i64, i64) = (-20, 20);
pub const VARS: [&str; 3] = ["x", "y", "z"];
const RELOPS: [Relop; 6] = [Relop::Eq, Relop::Ne, Relop::Lt, Relop::Le, Relop::Gt, Relop::Ge];

/// A hard/soft split over three variables.
#[derive(Clone, Debug)]
pub struct Instance {
    pub hard: Vec<Formula<i64>>,
    pub soft: Vec<Formula<i64>>,
}

pub fn random_atom<R: Rng>(rng: &mut R, line: u32, kind: ProvenanceKind) -> Formula<i64> {
    loop {
        let terms: Vec<(VersionedVar, i64)> = VARS
            .iter()
            .map(|v| (VersionedVar::new(*v, 0), rng.gen_range(-3..=3)))
            .filter(|(_, k)| *k != 0)
            .collect();
        if terms.is_empty() {
            continue;
        }
        let lhs = Term::from_parts(terms, 0);
        let rhs = Term::constant(rng.gen_range(-20..=20));
        let op = RELOPS[rng.gen_range(0..RELOPS.len())];
        let c = Constraint::new(&lhs, op, &rhs, Provenance::new(line, kind)).expect("small coefficients");
        return Formula::Atom(c);
    }
}

/// Draws instances until one has feasible hard constraints and an
/// infeasible whole. Returns the instance with its subset table.
pub fn infeasible_instance<R: Rng>(rng: &mut R, max_soft: usize) -> (Instance, SubsetTable) {
    loop {
        let n_hard = rng.gen_range(0..=1);
        let n_soft = rng.gen_range(2..=max_soft);
        let hard: Vec<_> = (0..n_hard)
            .map(|_| random_atom(rng, 0, ProvenanceKind::Precondition))
            .collect();
        let soft: Vec<_> = (0..n_soft)
            .map(|i| random_atom(rng, i as u32 + 1, ProvenanceKind::Assignment))
            .collect();
        let table = SubsetTable::build(&hard, &soft, DOMAIN).expect("grid fits");
        let all = (0..n_soft).collect();
        if table.feasible(&Default::default()) && !table.feasible(&all) {
            return (Instance { hard, soft }, table);
        }
    }
}
