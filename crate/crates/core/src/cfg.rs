//! Control-flow graph of a loop-free program.
//!
//! Nodes keep source-level variable names. Versions are assigned lazily by
//! whoever walks a path, which keeps the graph free of join machinery.

use std::collections::HashMap;
use std::fmt::Write;

use thiserror::Error;

use crate::lang::{pretty, Cond, Expr, Program, Stmt, StmtKind};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assign {
    pub target: String,
    pub rhs: Expr,
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CfgNode {
    Precondition {
        cond: Cond,
        next: NodeId,
    },
    /// `left` is taken when `cond` holds, `right` otherwise.
    Condition {
        cond: Cond,
        left: NodeId,
        right: NodeId,
        line: u32,
    },
    AssignBlock {
        assigns: Vec<Assign>,
        next: NodeId,
    },
    /// `assume cond`: paths where `cond` is false are infeasible.
    Guard {
        cond: Cond,
        line: u32,
        next: NodeId,
    },
    Postcondition {
        cond: Cond,
    },
}

impl CfgNode {
    pub fn successors(&self) -> Vec<NodeId> {
        match self {
            CfgNode::Precondition { next, .. }
            | CfgNode::AssignBlock { next, .. }
            | CfgNode::Guard { next, .. } => vec![*next],
            CfgNode::Condition { left, right, .. } => vec![*left, *right],
            CfgNode::Postcondition { .. } => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub root: NodeId,
    pub sink: NodeId,
    pub nodes: Vec<CfgNode>,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfgError {
    #[error("loop at line {0} must be unrolled before building the CFG")]
    ContainsLoop(u32),
}

/// Builds the CFG. Node ids are assigned in depth-first pre-order from the
/// root (true branch first), so the root is always 0.
pub fn build_cfg(p: &Program) -> Result<Cfg, CfgError> {
    let mut b = Builder { nodes: Vec::new() };
    let sink = b.push(CfgNode::Postcondition {
        cond: p.postcondition.clone(),
    });
    let first = b.stmts(&p.body, sink)?;
    let root = b.push(CfgNode::Precondition {
        cond: p.precondition.clone(),
        next: first,
    });
    Ok(renumber(b.nodes, root, p.inputs.clone()))
}

struct Builder {
    nodes: Vec<CfgNode>,
}

impl Builder {
    fn push(&mut self, n: CfgNode) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    /// Builds `stmts` in front of `next`, back to front.
    fn stmts(&mut self, stmts: &[Stmt], next: NodeId) -> Result<NodeId, CfgError> {
        let mut next = next;
        let mut pending: Vec<Assign> = Vec::new();
        for s in stmts.iter().rev() {
            if let StmtKind::Assign { target, rhs, .. } = &s.kind {
                pending.push(Assign {
                    target: target.clone(),
                    rhs: rhs.clone(),
                    line: s.line,
                });
                continue;
            }
            next = self.flush(&mut pending, next);
            next = match &s.kind {
                StmtKind::IfElse {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let left = self.stmts(then_branch, next)?;
                    let right = self.stmts(else_branch, next)?;
                    self.push(CfgNode::Condition {
                        cond: cond.clone(),
                        left,
                        right,
                        line: s.line,
                    })
                }
                StmtKind::Guard { cond } => self.push(CfgNode::Guard {
                    cond: cond.clone(),
                    line: s.line,
                    next,
                }),
                StmtKind::While { .. } => return Err(CfgError::ContainsLoop(s.line)),
                StmtKind::Assign { .. } => unreachable!(),
            };
        }
        Ok(self.flush(&mut pending, next))
    }

    fn flush(&mut self, pending: &mut Vec<Assign>, next: NodeId) -> NodeId {
        if pending.is_empty() {
            return next;
        }
        let mut assigns = std::mem::take(pending);
        assigns.reverse();
        self.push(CfgNode::AssignBlock { assigns, next })
    }
}

fn renumber(nodes: Vec<CfgNode>, root: NodeId, inputs: Vec<String>) -> Cfg {
    let mut order = Vec::new();
    let mut map = HashMap::new();
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        if map.contains_key(&n) {
            continue;
        }
        map.insert(n, order.len());
        order.push(n);
        for s in nodes[n].successors().into_iter().rev() {
            if !map.contains_key(&s) {
                stack.push(s);
            }
        }
    }
    let id = |n: &NodeId| map[n];
    let new_nodes = order
        .iter()
        .map(|&old| match &nodes[old] {
            CfgNode::Precondition { cond, next } => CfgNode::Precondition {
                cond: cond.clone(),
                next: id(next),
            },
            CfgNode::Condition {
                cond,
                left,
                right,
                line,
            } => CfgNode::Condition {
                cond: cond.clone(),
                left: id(left),
                right: id(right),
                line: *line,
            },
            CfgNode::AssignBlock { assigns, next } => CfgNode::AssignBlock {
                assigns: assigns.clone(),
                next: id(next),
            },
            CfgNode::Guard { cond, line, next } => CfgNode::Guard {
                cond: cond.clone(),
                line: *line,
                next: id(next),
            },
            CfgNode::Postcondition { cond } => CfgNode::Postcondition { cond: cond.clone() },
        })
        .collect::<Vec<_>>();
    let sink = new_nodes
        .iter()
        .position(|n| matches!(n, CfgNode::Postcondition { .. }))
        .expect("sink is reachable");
    Cfg {
        root: 0,
        sink,
        nodes: new_nodes,
        inputs,
    }
}

impl Cfg {
    pub fn node(&self, id: NodeId) -> &CfgNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn precondition(&self) -> &Cond {
        match &self.nodes[self.root] {
            CfgNode::Precondition { cond, .. } => cond,
            _ => unreachable!("root is the precondition node"),
        }
    }

    pub fn postcondition(&self) -> &Cond {
        match &self.nodes[self.sink] {
            CfgNode::Postcondition { cond } => cond,
            _ => unreachable!("sink is the postcondition node"),
        }
    }

    pub fn condition_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, CfgNode::Condition { .. }))
            .count()
    }

    /// Number of root-to-sink paths (saturating).
    pub fn paths_count(&self) -> u128 {
        self.fold_paths(1, |_, succ| succ.iter().fold(0u128, |a, b| a.saturating_add(*b)))
    }

    /// Largest number of condition nodes on a single root-to-sink path.
    pub fn max_conditions_on_path(&self) -> u128 {
        self.fold_paths(0, |n, succ| {
            let here = u128::from(matches!(n, CfgNode::Condition { .. }));
            here + succ.iter().copied().max().unwrap_or(0)
        })
    }

    fn fold_paths(&self, at_sink: u128, combine: impl Fn(&CfgNode, &[u128]) -> u128) -> u128 {
        let mut memo: Vec<Option<u128>> = vec![None; self.nodes.len()];
        memo[self.sink] = Some(at_sink);
        let mut stack = vec![(self.root, false)];
        while let Some((n, expanded)) = stack.pop() {
            if memo[n].is_some() {
                continue;
            }
            let succ = self.nodes[n].successors();
            if expanded {
                let vals: Vec<u128> = succ.iter().map(|s| memo[*s].expect("child done")).collect();
                memo[n] = Some(combine(&self.nodes[n], &vals));
            } else {
                stack.push((n, true));
                for s in succ {
                    if memo[s].is_none() {
                        stack.push((s, false));
                    }
                }
            }
        }
        memo[self.root].unwrap_or(0)
    }

    /// Graphviz rendering; labels show line numbers and node kinds.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph cfg {\n  node [shape=box, fontname=monospace];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let label = match n {
                CfgNode::Precondition { cond, .. } => format!("pre {}", pretty::cond(cond)),
                CfgNode::Condition { cond, line, .. } => format!("{line}: if {}", pretty::cond(cond)),
                CfgNode::AssignBlock { assigns, .. } => assigns
                    .iter()
                    .map(|a| format!("{}: {} = {}", a.line, a.target, a.rhs))
                    .collect::<Vec<_>>()
                    .join("\\l"),
                CfgNode::Guard { cond, line, .. } => format!("{line}: assume {}", pretty::cond(cond)),
                CfgNode::Postcondition { cond } => format!("post {}", pretty::cond(cond)),
            };
            let label = label.replace('"', "\\\"");
            writeln!(out, "  n{i} [label=\"{label}\"];").unwrap();
            match n {
                CfgNode::Condition { left, right, .. } => {
                    writeln!(out, "  n{i} -> n{left} [label=T];").unwrap();
                    writeln!(out, "  n{i} -> n{right} [label=F];").unwrap();
                }
                _ => {
                    for s in n.successors() {
                        writeln!(out, "  n{i} -> n{s};").unwrap();
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, HashSet};

    use super::*;
    use crate::lang::interp::{self, eval_cond, eval_expr};
    use crate::lang::{parse, unroll};

    fn reference_paths(cfg: &Cfg, n: NodeId) -> u128 {
        match &cfg.nodes[n] {
            CfgNode::Postcondition { .. } => 1,
            other => other.successors().iter().map(|s| reference_paths(cfg, *s)).sum(),
        }
    }

    /// Follows the concretely selected path; `None` if a guard fails.
    fn run_cfg(cfg: &Cfg, inputs: &BTreeMap<String, i64>) -> Option<BTreeMap<String, i64>> {
        let mut vars = inputs.clone();
        let mut n = cfg.root;
        loop {
            n = match &cfg.nodes[n] {
                CfgNode::Precondition { next, .. } => *next,
                CfgNode::Condition { cond, left, right, line } => {
                    if eval_cond(cond, &vars, *line).unwrap() {
                        *left
                    } else {
                        *right
                    }
                }
                CfgNode::AssignBlock { assigns, next } => {
                    for a in assigns {
                        let v = eval_expr(&a.rhs, &vars, a.line).unwrap();
                        vars.insert(a.target.clone(), v);
                    }
                    *next
                }
                CfgNode::Guard { cond, line, next } => {
                    if !eval_cond(cond, &vars, *line).unwrap() {
                        return None;
                    }
                    *next
                }
                CfgNode::Postcondition { .. } => return Some(vars),
            }
        }
    }

    #[test]
    fn straight_line() {
        let p = parse("prog p(int x) { pre true;\n x = x + 1;\n x = x + 2;\n int y = x;\n post true; }").unwrap();
        let cfg = build_cfg(&p).unwrap();
        assert_eq!(cfg.len(), 3);
        assert_eq!(cfg.paths_count(), 1);
        match cfg.node(1) {
            CfgNode::AssignBlock { assigns, next } => {
                assert_eq!(assigns.iter().map(|a| a.line).collect::<Vec<_>>(), vec![2, 3, 4]);
                assert_eq!(*next, cfg.sink);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_branch() {
        let p = parse("prog p(int x) { pre true;\n if (x > 0) {\n x = 1;\n } else {\n x = 2;\n }\n post true; }").unwrap();
        let cfg = build_cfg(&p).unwrap();
        assert_eq!(cfg.len(), 5);
        assert_eq!(cfg.paths_count(), 2);
        assert_eq!(cfg.condition_count(), 1);
        match cfg.node(1) {
            CfgNode::Condition { left, right, line, .. } => {
                assert_eq!(*line, 2);
                assert!(matches!(cfg.node(*left), CfgNode::AssignBlock { assigns, .. } if assigns[0].line == 3));
                assert!(matches!(cfg.node(*right), CfgNode::AssignBlock { assigns, .. } if assigns[0].line == 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_loops() {
        let p = parse("prog p(int x) { pre true;\n while (x < 3) {\n x = x + 1;\n }\n post true; }").unwrap();
        assert_eq!(build_cfg(&p), Err(CfgError::ContainsLoop(2)));
        assert!(build_cfg(&unroll(&p, 2)).is_ok());
    }

    #[test]
    fn tritype_path_count_matches_reference_dfs() {
        let p = parse(&crate::corpus::get("TritypeKO").unwrap().source).unwrap();
        let cfg = build_cfg(&p).unwrap();
        assert_eq!(cfg.paths_count(), reference_paths(&cfg, cfg.root));
        assert!(cfg.condition_count() >= 8);
    }

    #[test]
    fn corpus_paths_and_sharing() {
        for entry in crate::corpus::programs() {
            let p = unroll(&parse(&entry.source).unwrap(), 3);
            let cfg = build_cfg(&p).unwrap();
            assert_eq!(cfg.paths_count(), reference_paths(&cfg, cfg.root), "{}", entry.name);
            assert_eq!(cfg.root, 0);
            assert!(matches!(cfg.node(cfg.sink), CfgNode::Postcondition { .. }));
        }
    }

    #[test]
    fn assignment_lines_are_unique_on_every_path() {
        // Each path assigns every statement once, so lazy versioning gives
        // distinct versions per target.
        let p = parse(&crate::corpus::get("TritypeKO").unwrap().source).unwrap();
        let cfg = build_cfg(&p).unwrap();
        fn walk(cfg: &Cfg, n: NodeId, seen: &mut Vec<u32>) {
            match &cfg.nodes[n] {
                CfgNode::Postcondition { .. } => {
                    let set: HashSet<_> = seen.iter().collect();
                    assert_eq!(set.len(), seen.len());
                }
                CfgNode::AssignBlock { assigns, next } => {
                    let before = seen.len();
                    seen.extend(assigns.iter().map(|a| a.line));
                    walk(cfg, *next, seen);
                    seen.truncate(before);
                }
                other => {
                    for s in other.successors() {
                        walk(cfg, s, seen);
                    }
                }
            }
        }
        walk(&cfg, cfg.root, &mut Vec::new());
    }

    #[test]
    fn dot_export_mentions_lines() {
        let p = parse("prog p(int x) { pre true;\n if (x > 0) {\n x = 1;\n }\n post x >= 0; }").unwrap();
        let dot = build_cfg(&p).unwrap().to_dot();
        assert!(dot.starts_with("digraph cfg {"));
        assert!(dot.contains("2: if x > 0"));
        assert!(dot.contains("3: x = 1"));
        assert!(dot.contains("[label=T]"));
    }

    #[test]
    fn path_semantics_match_interpreter() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for entry in crate::corpus::programs() {
            let p = parse(&entry.source).unwrap();
            let u = unroll(&p, 4);
            let cfg = build_cfg(&u).unwrap();
            for _ in 0..50 {
                let inputs: BTreeMap<String, i64> =
                    p.inputs.iter().map(|i| (i.clone(), rng.gen_range(-6..=6))).collect();
                let expected = interp::run(&u, &inputs).ok().map(|o| o.vars);
                assert_eq!(run_cfg(&cfg, &inputs), expected, "{} {inputs:?}", entry.name);
            }
        }
    }
}
