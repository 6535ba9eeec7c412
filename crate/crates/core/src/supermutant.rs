//! Supermutants: higher-order mutants whose mutations no single input is
//! expected to reach together, so one campaign can evaluate all of them.
//!
//! Independence is approximated by co-coverage of the mutated nodes under
//! the coverage seed. The approximation is checked on every execution:
//! an input reaching two grouped mutations is an independence violation, its
//! outcome is not attributed, and the group is split.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

use crate::minilang::{kills, ExecutionResult, MutationId, NodeId, OracleMode, Program, TestInput};
use crate::mutation::{apply_mutations, structurally_conflict, Mutant, Mutation, MutationError};

pub const DEFAULT_MAX_GROUP_SIZE: usize = 16;

/// The nodes one input evaluated on the original program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub input: TestInput,
    pub nodes: BTreeSet<NodeId>,
}

/// Undirected graph over mutation ids; an edge means the two mutations may
/// not share a supermutant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictGraph {
    adjacency: BTreeMap<MutationId, BTreeSet<MutationId>>,
    /// False when built without any profile, in which case grouping is
    /// unsound until runtime adjudication catches violations.
    pub profiled: bool,
}

impl ConflictGraph {
    pub fn with_vertices(vertices: impl IntoIterator<Item = MutationId>) -> Self {
        ConflictGraph { adjacency: vertices.into_iter().map(|v| (v, BTreeSet::new())).collect(), profiled: false }
    }

    pub fn vertices(&self) -> impl Iterator<Item = MutationId> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds an edge; self-loops are ignored.
    pub fn add_edge(&mut self, a: MutationId, b: MutationId) {
        if a == b {
            return;
        }
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
    }

    pub fn has_edge(&self, a: MutationId, b: MutationId) -> bool {
        self.adjacency.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn degree(&self, v: MutationId) -> usize {
        self.adjacency.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn neighbors(&self, v: MutationId) -> impl Iterator<Item = MutationId> + '_ {
        self.adjacency.get(&v).into_iter().flatten().copied()
    }

    /// Edges as ordered pairs `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> Vec<(MutationId, MutationId)> {
        self.adjacency
            .iter()
            .flat_map(|(&a, ns)| ns.range(a + 1..).map(move |&b| (a, b)))
            .collect()
    }

    pub fn is_independent(&self, set: &[MutationId]) -> bool {
        set.iter().enumerate().all(|(i, &a)| set[i + 1..].iter().all(|&b| !self.has_edge(a, b)))
    }
}

/// Connects every pair of mutations whose nodes some profile covers
/// together, plus pairs that cannot be applied together at all.
pub fn build_conflict_graph(program: &Program, mutations: &[Mutation], profiles: &[Profile]) -> ConflictGraph {
    let mut graph = ConflictGraph::with_vertices(mutations.iter().map(|m| m.mutation_id));
    graph.profiled = !profiles.is_empty();

    let mut by_node: BTreeMap<NodeId, Vec<MutationId>> = BTreeMap::new();
    for m in mutations {
        by_node.entry(m.node_id).or_default().push(m.mutation_id);
    }
    for p in profiles {
        let hit: Vec<MutationId> = by_node
            .iter()
            .filter(|(node, _)| p.nodes.contains(node))
            .flat_map(|(_, ms)| ms.iter().copied())
            .collect();
        for (i, &a) in hit.iter().enumerate() {
            for &b in &hit[i + 1..] {
                graph.add_edge(a, b);
            }
        }
    }

    let ends = program.subtree_ends();
    for (i, a) in mutations.iter().enumerate() {
        for b in &mutations[i + 1..] {
            if structurally_conflict(a, b, &ends) {
                graph.add_edge(a.mutation_id, b.mutation_id);
            }
        }
    }
    graph
}

/// Greedy coloring in descending-degree order (ties by id); each color class
/// is split into chunks of at most `max_group_size`. Groups are returned
/// sorted internally and ordered by their smallest member.
pub fn group_supermutants(graph: &ConflictGraph, max_group_size: usize) -> Vec<Vec<MutationId>> {
    assert!(max_group_size >= 1, "max_group_size must be at least 1");
    let mut order: Vec<MutationId> = graph.vertices().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));

    let mut color: HashMap<MutationId, usize> = HashMap::new();
    let mut classes: Vec<Vec<MutationId>> = Vec::new();
    for v in order {
        let used: BTreeSet<usize> = graph.neighbors(v).filter_map(|n| color.get(&n).copied()).collect();
        let c = (0..).find(|c| !used.contains(c)).unwrap();
        color.insert(v, c);
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(v);
    }

    let mut groups: Vec<Vec<MutationId>> = classes
        .into_iter()
        .flat_map(|mut class| {
            class.sort_unstable();
            class.chunks(max_group_size).map(<[MutationId]>::to_vec).collect::<Vec<_>>()
        })
        .collect();
    groups.sort_by_key(|g| g[0]);
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationStatus {
    Alive,
    Killed { vtime: u64 },
    Violated,
}

#[derive(Debug, Clone)]
pub struct Supermutant {
    pub id: String,
    pub group: Vec<MutationId>,
    pub mutant: Mutant,
    pub status: BTreeMap<MutationId, MutationStatus>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupermutantError {
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error("mutation {0} is not in the mutation table")]
    UnknownMutation(MutationId),
    #[error("violation set {violating:?} is not a subset of group {group:?} with at least two members")]
    InvalidViolation { violating: Vec<MutationId>, group: Vec<MutationId> },
}

impl Supermutant {
    /// Applies every mutation in `group` (looked up in `table`) to `program`.
    pub fn build(id: impl Into<String>, program: &Program, table: &[Mutation], group: &[MutationId]) -> Result<Self, SupermutantError> {
        let mut group = group.to_vec();
        group.sort_unstable();
        group.dedup();
        let mutations = lookup(table, &group)?;
        let mutant = apply_mutations(program, &mutations)?;
        let status = group.iter().map(|&m| (m, MutationStatus::Alive)).collect();
        Ok(Supermutant { id: id.into(), group, mutant, status })
    }

    pub fn alive(&self) -> Vec<MutationId> {
        self.status.iter().filter(|(_, s)| **s == MutationStatus::Alive).map(|(&m, _)| m).collect()
    }

    /// Records a verdict at `vtime`.
    pub fn apply(&mut self, verdict: &Verdict, vtime: u64) {
        match verdict {
            Verdict::Killed(m) => {
                self.status.insert(*m, MutationStatus::Killed { vtime });
            }
            Verdict::IndependenceViolation(ms) => {
                for m in ms {
                    self.status.insert(*m, MutationStatus::Violated);
                }
            }
            Verdict::NoEffect | Verdict::HarnessDefect => {}
        }
    }
}

pub(crate) fn lookup(table: &[Mutation], ids: &[MutationId]) -> Result<Vec<Mutation>, SupermutantError> {
    ids.iter()
        .map(|&id| {
            table
                .binary_search_by_key(&id, |m| m.mutation_id)
                .map(|i| table[i].clone())
                .map_err(|_| SupermutantError::UnknownMutation(id))
        })
        .collect()
}

/// Outcome of adjudicating one supermutant execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Exactly one grouped mutation ran and the oracle saw a difference.
    Killed(MutationId),
    /// Two or more grouped mutations ran on one input; nothing is attributed.
    IndependenceViolation(Vec<MutationId>),
    NoEffect,
    /// Behavior differed although no grouped mutation ran.
    HarnessDefect,
}

/// Attributes a supermutant execution to at most one mutation.
///
/// `group` and `alive` must be sorted. A difference observed on an input
/// that reached exactly one grouped mutation kills that mutation, if it is
/// still alive. The crash site is not consulted: any observable difference
/// counts against the covered mutation.
pub fn adjudicate(
    group: &[MutationId],
    alive: &[MutationId],
    result: &ExecutionResult,
    baseline: &ExecutionResult,
    oracle: OracleMode,
) -> Verdict {
    let reached: Vec<MutationId> =
        result.mutations_covered.iter().copied().filter(|m| group.binary_search(m).is_ok()).collect();
    match reached.as_slice() {
        [] if kills(baseline, result, oracle) => Verdict::HarnessDefect,
        [] => Verdict::NoEffect,
        [m] if alive.binary_search(m).is_ok() && kills(baseline, result, oracle) => Verdict::Killed(*m),
        [_] => Verdict::NoEffect,
        _ => Verdict::IndependenceViolation(reached),
    }
}

pub fn adjudicate_execution(
    sm: &Supermutant,
    result: &ExecutionResult,
    baseline_result: &ExecutionResult,
    oracle: OracleMode,
) -> Verdict {
    adjudicate(&sm.group, &sm.alive(), result, baseline_result, oracle)
}

/// Keeps the lowest violating mutation (plus all non-violating ones) in a
/// rebuilt `sm` and moves every other violating mutation into a fresh
/// singleton. Statuses restart; the violating pairs become graph edges.
///
/// Ids are derived from the parent: the kept group becomes `<id>.0` and the
/// singletons `<id>.1`, `<id>.2`, … in mutation id order.
pub fn split_on_violation(
    sm: &Supermutant,
    violating: &[MutationId],
    program: &Program,
    table: &[Mutation],
    graph: &mut ConflictGraph,
) -> Result<Vec<Supermutant>, SupermutantError> {
    let mut violating = violating.to_vec();
    violating.sort_unstable();
    violating.dedup();
    if violating.len() < 2 || !violating.iter().all(|m| sm.group.binary_search(m).is_ok()) {
        return Err(SupermutantError::InvalidViolation { violating, group: sm.group.clone() });
    }
    for (i, &a) in violating.iter().enumerate() {
        for &b in &violating[i + 1..] {
            graph.add_edge(a, b);
        }
    }
    let moved = &violating[1..];
    let kept: Vec<MutationId> = sm.group.iter().copied().filter(|m| !moved.contains(m)).collect();
    let mut out = vec![Supermutant::build(format!("{}.0", sm.id), program, table, &kept)?];
    for (k, &m) in moved.iter().enumerate() {
        out.push(Supermutant::build(format!("{}.{}", sm.id, k + 1), program, table, &[m])?);
    }
    Ok(out)
}

/// Supermutant manifest: id to sorted mutation ids.
pub fn manifest(supermutants: &[Supermutant]) -> BTreeMap<String, Vec<MutationId>> {
    supermutants.iter().map(|s| (s.id.clone(), s.group.clone())).collect()
}
