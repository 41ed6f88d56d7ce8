mod common;

use std::collections::{BTreeMap, BTreeSet};

use locfaults::constraints::ProvenanceKind;
use locfaults::lang::interp::{run, InterpError};
use locfaults::lang::{parse, pretty, unroll};
use locfaults::mcs::mcs_enumerate;
use locfaults::oracle::{brute_force_feasible, sort_family, IndexSet};
use locfaults::solver::{SolverConfig, Store};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{infeasible_instance, random_atom, DOMAIN};

fn store() -> Store<i64> {
    Store::new(SolverConfig {
        default_domain: DOMAIN,
        ..SolverConfig::default()
    })
}

fn random_store(seed: u64, max_atoms: usize) -> Store<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = store();
    for _ in 0..rng.gen_range(1..=max_atoms) {
        s.add_hard(random_atom(&mut rng, 1, ProvenanceKind::Assignment));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn solver_agrees_with_grid(seed in any::<u64>()) {
        let s = random_store(seed, 5);
        let got = s.is_feasible().unwrap();
        let want = brute_force_feasible(&s).unwrap();
        prop_assert_eq!(got.is_feasible(), want.is_feasible());
        if let Some(w) = got.witness() {
            prop_assert!(s.check_witness(w).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn adding_constraints_is_monotone(seed in any::<u64>()) {
        let mut s = random_store(seed, 4);
        let before = s.is_feasible().unwrap().is_feasible();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        s.add_hard(random_atom(&mut rng, 2, ProvenanceKind::Assignment));
        let after = s.is_feasible().unwrap().is_feasible();
        prop_assert!(before || !after);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounded_mcs_matches_oracle(seed in any::<u64>(), bound in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (inst, table) = infeasible_instance(&mut rng, 7);
        let config = SolverConfig { default_domain: DOMAIN, ..SolverConfig::default() };
        let got = mcs_enumerate(&inst.hard, &inst.soft, bound, &config).unwrap();
        let mut got: Vec<IndexSet> = got.iter().map(|m| m.indices.iter().copied().collect()).collect();
        sort_family(&mut got);
        prop_assert_eq!(got, table.mcs_family(bound));
    }
}

/// Emits an `.imp` program with one statement per line.
fn random_program(rng: &mut ChaCha8Rng) -> String {
    fn expr(rng: &mut ChaCha8Rng) -> String {
        let vars = ["a", "b", "r"];
        let mut e = vars[rng.gen_range(0..3)].to_string();
        for _ in 0..rng.gen_range(0..3) {
            let op = ["+", "-"][rng.gen_range(0..2)];
            if rng.gen_bool(0.5) {
                e = format!("{e} {op} {}", rng.gen_range(0..5));
            } else {
                e = format!("{e} {op} {} * {}", rng.gen_range(1..4), vars[rng.gen_range(0..3)]);
            }
        }
        e
    }
    fn cond(rng: &mut ChaCha8Rng) -> String {
        let ops = ["==", "!=", "<", "<=", ">", ">="];
        let c = format!("{} {} {}", expr(rng), ops[rng.gen_range(0..6)], expr(rng));
        match rng.gen_range(0..4) {
            0 => format!("!({c})"),
            1 => format!("{c} && {}", expr(rng) + " > 0"),
            2 => format!("{c} || r == 1"),
            _ => c,
        }
    }
    fn block(rng: &mut ChaCha8Rng, depth: u32, out: &mut Vec<String>) {
        for _ in 0..rng.gen_range(1..4) {
            let pad = "  ".repeat(depth as usize + 1);
            if depth < 2 && rng.gen_bool(0.35) {
                out.push(format!("{pad}if ({}) {{", cond(rng)));
                block(rng, depth + 1, out);
                out.push(format!("{pad}}}"));
                out.push(format!("{pad}else {{"));
                block(rng, depth + 1, out);
                out.push(format!("{pad}}}"));
            } else {
                out.push(format!("{pad}r = {};", expr(rng)));
            }
        }
    }
    let mut lines = vec![
        "prog Rand(int a, int b) {".to_string(),
        "  pre a >= -5 && b <= 5;".to_string(),
        "  int r = 0;".to_string(),
    ];
    block(rng, 0, &mut lines);
    lines.push(format!("  post {};", cond(rng)));
    lines.push("}".to_string());
    lines.join("\n")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pretty_printing_round_trips(seed in any::<u64>()) {
        let src = random_program(&mut ChaCha8Rng::seed_from_u64(seed));
        let p = parse(&src).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        let printed = pretty(&p);
        let q = parse(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(pretty(&q), printed);
    }

    #[test]
    fn unrolling_agrees_within_bound(n in -3i64..12, step in 1i64..4, bound in 1u32..8) {
        let src = "prog Count(int n, int s) {\n  pre s > 0;\n  int i = 0;\n  int t = 0;\n  while (i < n) {\n    t = t + i;\n    i = i + s;\n  }\n  post t >= 0;\n}";
        let p = parse(src).unwrap();
        let u = unroll(&p, bound);
        let inputs: BTreeMap<String, i64> = [("n".to_string(), n), ("s".to_string(), step)].into();
        let full = run(&p, &inputs).unwrap();
        let iterations = if n > 0 { (n + step - 1) / step } else { 0 };
        match run(&u, &inputs) {
            Ok(o) => {
                prop_assert!(iterations <= i64::from(bound));
                prop_assert_eq!(o, full);
            }
            Err(InterpError::GuardViolated(_)) => prop_assert!(iterations > i64::from(bound)),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for e in locfaults::corpus::programs() {
        let p = parse(&e.source).unwrap();
        assert_eq!(parse(&pretty(&p)).unwrap(), p, "{}", e.name);
    }
}

#[test]
fn flipped_runs_only_change_flipped_branches() {
    let e = locfaults::corpus::get("AbsMinusKO").unwrap();
    let p = parse(&e.source).unwrap();
    let ce = e.counterexample().unwrap();
    let plain = locfaults::lang::interp::run_with_flips(&p, &ce, &BTreeSet::new()).unwrap();
    assert_eq!(plain, run(&p, &ce).unwrap());
}
