use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;

use super::program::{AtomId, GroundProgram};

/// Atom levels `ρ` with `ρ(head) >= ρ(b)` for positive and `ρ(head) > ρ(b)`
/// for negated body atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    levels: Vec<u32>,
}

/// A clause whose levels break one of the two inequalities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrataViolation {
    pub clause: usize,
    pub head: AtomId,
    pub body_atom: AtomId,
    pub negated: bool,
}

impl Stratification {
    pub fn new(program: &GroundProgram, levels: Vec<u32>) -> Result<Self, StrataViolation> {
        assert_eq!(levels.len(), program.atom_count(), "one level per atom");
        for (k, c) in program.clauses().iter().enumerate() {
            for l in &c.body {
                let (h, b) = (levels[c.head], levels[l.atom]);
                if (l.negated && h <= b) || (!l.negated && h < b) {
                    return Err(StrataViolation {
                        clause: k,
                        head: c.head,
                        body_atom: l.atom,
                        negated: l.negated,
                    });
                }
            }
        }
        Ok(Self { levels })
    }

    pub fn level(&self, atom: AtomId) -> u32 {
        self.levels[atom]
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }
}

/// Why no stratification exists: a dependency cycle through a negation,
/// listed as atoms `a_0 -> a_1 -> ... -> a_0` where `a_0` occurs negated in
/// the body of a clause for `a_1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeCycle {
    pub atoms: Vec<AtomId>,
}

/// Minimal stratification by longest-path layering over the strongly
/// connected components of the dependency graph, where a negative edge
/// costs one level and a positive edge none.
pub fn find_stratification(program: &GroundProgram) -> Result<Stratification, NegativeCycle> {
    let n = program.atom_count();
    let mut graph: DiGraph<AtomId, bool> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<NodeIndex> = (0..n).map(|a| graph.add_node(a)).collect();
    for c in program.clauses() {
        for l in &c.body {
            graph.add_edge(nodes[l.atom], nodes[c.head], l.negated);
        }
    }
    // tarjan_scc yields components in reverse topological order.
    let mut sccs = tarjan_scc(&graph);
    sccs.reverse();
    let mut component = vec![0usize; n];
    for (k, scc) in sccs.iter().enumerate() {
        for &v in scc {
            component[graph[v]] = k;
        }
    }
    for e in graph.edge_references() {
        let (from, to) = (graph[e.source()], graph[e.target()]);
        if *e.weight() && component[from] == component[to] {
            return Err(NegativeCycle {
                atoms: close_cycle(&graph, &nodes, from, to, &component),
            });
        }
    }
    let mut scc_level = vec![0u32; sccs.len()];
    for (k, scc) in sccs.iter().enumerate() {
        let mut level = 0;
        for &v in scc {
            for e in graph.edges_directed(v, petgraph::Direction::Incoming) {
                let src = component[graph[e.source()]];
                if src != k {
                    level = level.max(scc_level[src] + u32::from(*e.weight()));
                }
            }
        }
        scc_level[k] = level;
    }
    let levels = (0..n).map(|a| scc_level[component[a]]).collect();
    Ok(Stratification { levels })
}

/// Cycle `from -> to -> ... -> from` inside one component.
fn close_cycle(
    graph: &DiGraph<AtomId, bool>,
    nodes: &[NodeIndex],
    from: AtomId,
    to: AtomId,
    component: &[usize],
) -> Vec<AtomId> {
    let mut prev = vec![usize::MAX; nodes.len()];
    prev[to] = to;
    let mut queue = VecDeque::from([to]);
    while let Some(u) = queue.pop_front() {
        if u == from {
            break;
        }
        for w in graph.neighbors(nodes[u]) {
            let w = graph[w];
            if prev[w] == usize::MAX && component[w] == component[from] {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    let mut back = vec![from];
    let mut v = from;
    while v != to {
        v = prev[v];
        back.push(v);
    }
    back.reverse();
    let mut cycle = vec![from];
    cycle.extend(back);
    cycle
}
