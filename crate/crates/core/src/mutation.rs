//! First-order mutation enumeration, sampling, and AST patching.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::minilang::{
    expr_to_string, stmt_to_string, BinOp, Block, Expr, ExprKind, FunctionDef, MutationId, NodeId,
    Program, Stmt, StmtKind, UnOp,
};
use crate::rng::SplitMix64;

/// Literals with a larger magnitude are not mutated by [`MutationOperator::Const`].
pub const CONST_LITERAL_CAP: i64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationOperator {
    /// Arithmetic operator replacement.
    #[serde(rename = "AOR")]
    Aor,
    /// Relational operator replacement.
    #[serde(rename = "ROR")]
    Ror,
    /// Logical connector replacement.
    #[serde(rename = "LCR")]
    Lcr,
    /// Constant replacement: `c` becomes `c+1`, `c-1` or `0`.
    #[serde(rename = "CONST")]
    Const,
    /// Statement deletion.
    #[serde(rename = "SDL")]
    Sdl,
    /// Negation of an `if`/`while` condition.
    #[serde(rename = "UNEG")]
    Uneg,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 6] = [
        MutationOperator::Aor,
        MutationOperator::Ror,
        MutationOperator::Lcr,
        MutationOperator::Const,
        MutationOperator::Sdl,
        MutationOperator::Uneg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::Aor => "AOR",
            MutationOperator::Ror => "ROR",
            MutationOperator::Lcr => "LCR",
            MutationOperator::Const => "CONST",
            MutationOperator::Sdl => "SDL",
            MutationOperator::Uneg => "UNEG",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            MutationOperator::Aor => "swap among + - * / %",
            MutationOperator::Ror => "swap among < <= > >= == !=",
            MutationOperator::Lcr => "swap && and ||",
            MutationOperator::Const => "replace literal c with c+1, c-1 or 0",
            MutationOperator::Sdl => "delete a statement",
            MutationOperator::Uneg => "negate an if/while condition",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationOperator {
    type Err = MutationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| MutationError::UnknownOperator(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mutation {
    pub mutation_id: MutationId,
    pub operator: MutationOperator,
    pub node_id: NodeId,
    pub line: u32,
    pub col: u32,
    pub original: String,
    pub replacement: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("unknown mutation operator `{0}` (known: AOR, ROR, LCR, CONST, SDL, UNEG)")]
    UnknownOperator(String),
    #[error("mutations {first} and {second} both target node {node_id}")]
    OverlappingMutations { node_id: NodeId, first: MutationId, second: MutationId },
    #[error("mutation {mutation_id} expects `{expected}` at node {node_id} but found `{found}`")]
    StaleMutation { mutation_id: MutationId, node_id: NodeId, expected: String, found: String },
    #[error("mutation {mutation_id} targets node {node_id}, which does not exist or cannot take it")]
    UnknownNode { mutation_id: MutationId, node_id: NodeId },
    #[error("mutation {mutation_id} has invalid replacement `{replacement}`")]
    InvalidReplacement { mutation_id: MutationId, replacement: String },
    #[error("a mutant needs at least one mutation")]
    EmptyMutant,
    #[error("cannot sample {requested} of {available} mutations")]
    SampleTooLarge { requested: usize, available: usize },
}

/// A program with one or more mutations applied.
#[derive(Debug, Clone)]
pub struct Mutant {
    pub mutations: Vec<Mutation>,
    pub program: Program,
}

impl Mutant {
    pub fn ids(&self) -> Vec<MutationId> {
        self.mutations.iter().map(|m| m.mutation_id).collect()
    }

    pub fn is_first_order(&self) -> bool {
        self.mutations.len() == 1
    }
}

struct Candidate {
    operator: MutationOperator,
    node_id: NodeId,
    original: String,
    replacement: String,
}

/// Lists every first-order mutation the enabled operators admit.
///
/// Ordered by node id, then operator, then replacement (operators in
/// catalog order, constants ascending); ids are assigned densely in that
/// order.
pub fn enumerate_mutations(program: &Program, operators: &[MutationOperator]) -> Vec<Mutation> {
    let mut candidates = Vec::new();
    for f in &program.functions {
        enum_block(&f.body, &mut candidates);
    }
    // Preorder traversal already yields ascending node ids; sort to be sure
    // the contract holds regardless of traversal details.
    candidates.sort_by_key(|c| (c.node_id, c.operator));
    candidates
        .into_iter()
        .filter(|c| operators.contains(&c.operator))
        .enumerate()
        .map(|(i, c)| {
            let info = program.nodes[c.node_id as usize];
            Mutation {
                mutation_id: i as MutationId,
                operator: c.operator,
                node_id: c.node_id,
                line: info.line,
                col: info.col,
                original: c.original,
                replacement: c.replacement,
            }
        })
        .collect()
}

fn enum_block(b: &Block, out: &mut Vec<Candidate>) {
    for s in &b.stmts {
        enum_stmt(s, out);
    }
}

fn deletable(s: &Stmt) -> bool {
    !matches!(s.kind, StmtKind::ArrDecl { .. } | StmtKind::Return(Some(_)) | StmtKind::Skip)
}

fn enum_stmt(s: &Stmt, out: &mut Vec<Candidate>) {
    if deletable(s) {
        out.push(Candidate {
            operator: MutationOperator::Sdl,
            node_id: s.id,
            original: stmt_to_string(s),
            replacement: String::new(),
        });
    }
    match &s.kind {
        StmtKind::ArrDecl { .. } | StmtKind::Skip | StmtKind::Return(None) => {}
        StmtKind::Assign { value, .. } => enum_expr(value, out),
        StmtKind::IndexAssign { index, value, .. } => {
            enum_expr(index, out);
            enum_expr(value, out);
        }
        StmtKind::If { cond, then_block, else_block } => {
            enum_cond(cond, out);
            enum_block(then_block, out);
            if let Some(b) = else_block {
                enum_block(b, out);
            }
        }
        StmtKind::While { cond, body } => {
            enum_cond(cond, out);
            enum_block(body, out);
        }
        StmtKind::Return(Some(e)) | StmtKind::Assert(e) | StmtKind::Print(e) | StmtKind::Expr(e) => {
            enum_expr(e, out)
        }
    }
}

fn enum_cond(cond: &Expr, out: &mut Vec<Candidate>) {
    let text = expr_to_string(cond);
    out.push(Candidate {
        operator: MutationOperator::Uneg,
        node_id: cond.id,
        replacement: format!("!({text})"),
        original: text,
    });
    enum_expr(cond, out);
}

fn const_alternatives(c: i64) -> Vec<i64> {
    if c.unsigned_abs() > CONST_LITERAL_CAP as u64 {
        return Vec::new();
    }
    let mut alts = vec![c - 1, 0, c + 1];
    alts.retain(|&v| v != c);
    alts.sort_unstable();
    alts.dedup();
    alts
}

fn enum_expr(e: &Expr, out: &mut Vec<Candidate>) {
    match &e.kind {
        ExprKind::Int(c) => {
            for alt in const_alternatives(*c) {
                out.push(Candidate {
                    operator: MutationOperator::Const,
                    node_id: e.id,
                    original: c.to_string(),
                    replacement: alt.to_string(),
                });
            }
        }
        ExprKind::Var { .. } | ExprKind::ReadByte | ExprKind::ReadInt => {}
        ExprKind::Index { index, .. } => enum_expr(index, out),
        ExprKind::Call { args, .. } => args.iter().for_each(|a| enum_expr(a, out)),
        ExprKind::Unary(_, x) => enum_expr(x, out),
        ExprKind::Binary(op, l, r) => {
            let (operator, family): (_, &[BinOp]) = if BinOp::ARITHMETIC.contains(op) {
                (MutationOperator::Aor, &BinOp::ARITHMETIC)
            } else if BinOp::RELATIONAL.contains(op) {
                (MutationOperator::Ror, &BinOp::RELATIONAL)
            } else {
                (MutationOperator::Lcr, &BinOp::LOGICAL)
            };
            for alt in family.iter().filter(|&alt| alt != op) {
                out.push(Candidate {
                    operator,
                    node_id: e.id,
                    original: op.symbol().to_string(),
                    replacement: alt.symbol().to_string(),
                });
            }
            enum_expr(l, out);
            enum_expr(r, out);
        }
    }
}

/// Mutation sampling strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum SamplingStrategy {
    #[default]
    All,
    Uniform { n: usize, seed: u64 },
    StrataByOperator { n: usize, seed: u64 },
}

/// Picks a subset of `mutations`. Sampled mutations keep their ids and
/// their relative order.
pub fn sample_mutations(mutations: &[Mutation], strategy: &SamplingStrategy) -> Result<Vec<Mutation>, MutationError> {
    let (n, seed) = match *strategy {
        SamplingStrategy::All => return Ok(mutations.to_vec()),
        SamplingStrategy::Uniform { n, seed } | SamplingStrategy::StrataByOperator { n, seed } => (n, seed),
    };
    if n > mutations.len() {
        return Err(MutationError::SampleTooLarge { requested: n, available: mutations.len() });
    }
    let mut rng = SplitMix64::new(seed);
    let mut chosen: Vec<usize> = match strategy {
        SamplingStrategy::Uniform { .. } => {
            let all: Vec<usize> = (0..mutations.len()).collect();
            choose(&mut rng, all, n)
        }
        _ => {
            let mut strata: BTreeMap<MutationOperator, Vec<usize>> = BTreeMap::new();
            for (i, m) in mutations.iter().enumerate() {
                strata.entry(m.operator).or_default().push(i);
            }
            let quotas = largest_remainder(
                n,
                &strata.values().map(Vec::len).collect::<Vec<_>>(),
            );
            strata
                .into_values()
                .zip(quotas)
                .flat_map(|(members, q)| choose(&mut rng, members, q))
                .collect()
        }
    };
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| mutations[i].clone()).collect())
}

/// Partial Fisher-Yates: the first `k` slots after `k` swaps.
fn choose(rng: &mut SplitMix64, mut items: Vec<usize>, k: usize) -> Vec<usize> {
    for i in 0..k {
        let j = i + rng.index(items.len() - i);
        items.swap(i, j);
    }
    items.truncate(k);
    items
}

/// Hamilton apportionment of `n` seats over strata of the given sizes.
/// Remainder ties go to the earlier stratum.
pub(crate) fn largest_remainder(n: usize, sizes: &[usize]) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| n * s / total).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(n * sizes[i] % total), i));
    let left = n - quotas.iter().sum::<usize>();
    for &i in order.iter().take(left) {
        quotas[i] += 1;
    }
    quotas
}

/// Builds a mutant by patching a copy of `program` at each mutation's node.
///
/// Every patched node is tagged with its mutation id so executions report
/// it in `mutations_covered`. Node ids of untouched nodes are preserved.
pub fn apply_mutations(program: &Program, mutations: &[Mutation]) -> Result<Mutant, MutationError> {
    if mutations.is_empty() {
        return Err(MutationError::EmptyMutant);
    }
    let mut by_node: HashMap<NodeId, &Mutation> = HashMap::new();
    for m in mutations {
        if let Some(prev) = by_node.insert(m.node_id, m) {
            return Err(MutationError::OverlappingMutations {
                node_id: m.node_id,
                first: prev.mutation_id.min(m.mutation_id),
                second: prev.mutation_id.max(m.mutation_id),
            });
        }
    }
    let mut patched = program.clone();
    let mut patcher = Patcher { pending: by_node, ends: program.subtree_ends(), error: None };
    for f in &mut patched.functions {
        patcher.function(f);
    }
    if let Some(e) = patcher.error {
        return Err(e);
    }
    if let Some(m) = patcher.pending.values().min_by_key(|m| m.mutation_id) {
        return Err(MutationError::UnknownNode { mutation_id: m.mutation_id, node_id: m.node_id });
    }
    let mut mutations = mutations.to_vec();
    mutations.sort_by_key(|m| m.mutation_id);
    Ok(Mutant { mutations, program: patched })
}

struct Patcher<'a> {
    pending: HashMap<NodeId, &'a Mutation>,
    ends: Vec<NodeId>,
    error: Option<MutationError>,
}

impl Patcher<'_> {
    fn fail(&mut self, e: MutationError) {
        self.error.get_or_insert(e);
    }

    fn stale(&mut self, m: &Mutation, found: String) {
        self.fail(MutationError::StaleMutation {
            mutation_id: m.mutation_id,
            node_id: m.node_id,
            expected: m.original.clone(),
            found,
        });
    }

    fn function(&mut self, f: &mut FunctionDef) {
        self.block(&mut f.body);
    }

    fn block(&mut self, b: &mut Block) {
        for s in &mut b.stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &mut Stmt) {
        if let Some(m) = self.pending.remove(&s.id) {
            let found = stmt_to_string(s);
            if m.operator != MutationOperator::Sdl || !deletable(s) {
                self.fail(MutationError::UnknownNode { mutation_id: m.mutation_id, node_id: m.node_id });
            } else if found != m.original {
                self.stale(m, found);
            } else {
                let end = self.ends[s.id as usize];
                if let Some(inner) = self.pending.values().filter(|p| p.node_id > s.id && p.node_id < end).min_by_key(|p| p.mutation_id) {
                    return self.fail(MutationError::OverlappingMutations {
                        node_id: s.id,
                        first: m.mutation_id.min(inner.mutation_id),
                        second: m.mutation_id.max(inner.mutation_id),
                    });
                }
                s.kind = StmtKind::Skip;
                s.mutation = Some(m.mutation_id);
                return;
            }
        }
        match &mut s.kind {
            StmtKind::ArrDecl { .. } | StmtKind::Skip | StmtKind::Return(None) => {}
            StmtKind::Assign { value, .. } => self.expr(value, false),
            StmtKind::IndexAssign { index, value, .. } => {
                self.expr(index, false);
                self.expr(value, false);
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.expr(cond, true);
                self.block(then_block);
                if let Some(b) = else_block {
                    self.block(b);
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond, true);
                self.block(body);
            }
            StmtKind::Return(Some(e)) | StmtKind::Assert(e) | StmtKind::Print(e) | StmtKind::Expr(e) => {
                self.expr(e, false)
            }
        }
    }

    fn expr(&mut self, e: &mut Expr, is_cond: bool) {
        // UNEG is checked against the text before any nested patch lands.
        let before = match self.pending.get(&e.id) {
            Some(m) if m.operator == MutationOperator::Uneg => Some(expr_to_string(e)),
            _ => None,
        };
        // Children first: a patch may wrap this node.
        match &mut e.kind {
            ExprKind::Int(_) | ExprKind::Var { .. } | ExprKind::ReadByte | ExprKind::ReadInt => {}
            ExprKind::Index { index, .. } => self.expr(index, false),
            ExprKind::Call { args, .. } => args.iter_mut().for_each(|a| self.expr(a, false)),
            ExprKind::Unary(_, x) => self.expr(x, false),
            ExprKind::Binary(_, l, r) => {
                self.expr(l, false);
                self.expr(r, false);
            }
        }
        let Some(m) = self.pending.remove(&e.id) else { return };
        let bad_node = MutationError::UnknownNode { mutation_id: m.mutation_id, node_id: m.node_id };
        let bad_repl = MutationError::InvalidReplacement { mutation_id: m.mutation_id, replacement: m.replacement.clone() };
        match (m.operator, &mut e.kind) {
            (MutationOperator::Aor | MutationOperator::Ror | MutationOperator::Lcr, ExprKind::Binary(op, ..)) => {
                if op.symbol() != m.original {
                    return self.stale(m, op.symbol().to_string());
                }
                let family: &[BinOp] = match m.operator {
                    MutationOperator::Aor => &BinOp::ARITHMETIC,
                    MutationOperator::Ror => &BinOp::RELATIONAL,
                    _ => &BinOp::LOGICAL,
                };
                if !family.contains(op) {
                    return self.fail(bad_node);
                }
                match BinOp::from_symbol(&m.replacement).filter(|r| family.contains(r) && r != op) {
                    Some(r) => *op = r,
                    None => return self.fail(bad_repl),
                }
            }
            (MutationOperator::Const, ExprKind::Int(c)) => {
                if c.to_string() != m.original {
                    return self.stale(m, c.to_string());
                }
                match m.replacement.parse::<i64>() {
                    Ok(v) if v != *c => *c = v,
                    _ => return self.fail(bad_repl),
                }
            }
            (MutationOperator::Uneg, _) if is_cond => {
                let found = before.unwrap_or_default();
                if found != m.original {
                    return self.stale(m, found);
                }
                let inner = std::mem::replace(e, Expr { id: e.id, kind: ExprKind::Int(0), mutation: None });
                e.kind = ExprKind::Unary(UnOp::Not, Box::new(inner));
            }
            _ => return self.fail(bad_node),
        }
        e.mutation = Some(m.mutation_id);
    }
}

/// True when `a` and `b` can never be applied together: they target the same
/// node, or one deletes a statement enclosing the other's node.
pub fn structurally_conflict(a: &Mutation, b: &Mutation, ends: &[NodeId]) -> bool {
    let encloses = |outer: &Mutation, inner: &Mutation| {
        outer.operator == MutationOperator::Sdl
            && inner.node_id > outer.node_id
            && inner.node_id < ends[outer.node_id as usize]
    };
    a.node_id == b.node_id || encloses(a, b) || encloses(b, a)
}

/// Serializes a mutation list as the JSON array used in run directories.
pub fn mutations_to_json(mutations: &[Mutation]) -> String {
    serde_json::to_string_pretty(mutations).expect("mutations serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::{execute, kills, parse, pretty_print, OracleMode, Outcome, TestInput};

    fn ops(list: &[MutationOperator]) -> Vec<MutationOperator> {
        list.to_vec()
    }

    #[test]
    fn aor_site_yields_four() {
        let p = parse("fn main(){ a = 1; b = 2; print(a + b); }").unwrap();
        let ms = enumerate_mutations(&p, &ops(&[MutationOperator::Aor]));
        let repl: Vec<_> = ms.iter().map(|m| m.replacement.as_str()).collect();
        assert_eq!(repl, ["-", "*", "/", "%"]);
    }

    #[test]
    fn ror_site_yields_five() {
        let p = parse("fn main(){ x = read_byte(); if (x < 10) { print(1); } }").unwrap();
        let ms = enumerate_mutations(&p, &ops(&[MutationOperator::Ror]));
        assert_eq!(ms.len(), 5);
        assert!(ms.iter().all(|m| m.original == "<"));
    }

    #[test]
    fn empty_main_has_no_mutations() {
        let p = parse("fn main(){}").unwrap();
        assert!(enumerate_mutations(&p, &MutationOperator::ALL).is_empty());
    }

    #[test]
    fn const_alternatives_exclude_identity_and_duplicates() {
        assert_eq!(const_alternatives(5), [0, 4, 6]);
        assert_eq!(const_alternatives(0), [-1, 1]);
        assert_eq!(const_alternatives(1), [0, 2]);
        assert_eq!(const_alternatives(-1), [-2, 0]);
        assert!(const_alternatives(i64::MAX).is_empty());
        assert!(const_alternatives(i64::MIN).is_empty());
        assert_eq!(const_alternatives(CONST_LITERAL_CAP).len(), 3);
    }

    #[test]
    fn count_matches_hand_computation() {
        // stmts: x = read_byte();  if (x > 2 && x != 7) {...}  print(x * 3);  return;
        let src = "fn main(){ x = read_byte(); if (x > 2 && x != 7) { print(x * 3); return; } }";
        let p = parse(src).unwrap();
        let ms = enumerate_mutations(&p, &MutationOperator::ALL);
        let count = |op| ms.iter().filter(|m| m.operator == op).count();
        assert_eq!(count(MutationOperator::Aor), 4);
        assert_eq!(count(MutationOperator::Ror), 10);
        assert_eq!(count(MutationOperator::Lcr), 1);
        // literals 2, 7, 3 each give three alternatives
        assert_eq!(count(MutationOperator::Const), 9);
        // assign, if, print, return
        assert_eq!(count(MutationOperator::Sdl), 4);
        assert_eq!(count(MutationOperator::Uneg), 1);
        let ids: Vec<_> = ms.iter().map(|m| m.mutation_id).collect();
        assert_eq!(ids, (0..ms.len() as u32).collect::<Vec<_>>());
        assert!(ms.windows(2).all(|w| (w[0].node_id, w[0].operator) <= (w[1].node_id, w[1].operator)));
    }

    #[test]
    fn sdl_skips_declarations_and_value_returns() {
        let p = parse("fn f(){ return 1; } fn g(){ return; } fn main(){ arr a[2]; print(f()); }").unwrap();
        let sdl: Vec<_> = enumerate_mutations(&p, &[MutationOperator::Sdl]).into_iter().map(|m| m.original).collect();
        assert_eq!(sdl, ["return;", "print(f());"]);
    }

    #[test]
    fn ror_boundary_mutant() {
        let p = parse("fn main(){ x = read_byte(); if (x < 10) { print(0); } else { print(1); } }").unwrap();
        let ms = enumerate_mutations(&p, &[MutationOperator::Ror]);
        let le = ms.iter().find(|m| m.replacement == "<=").unwrap();
        let mutant = apply_mutations(&p, std::slice::from_ref(le)).unwrap();
        let input = TestInput::new(vec![10]);
        let o = execute(&p, &input, 1000);
        let m = execute(&mutant.program, &input, 1000);
        assert_eq!(o.output_str(), "1\n");
        assert_eq!(m.output_str(), "0\n");
        assert_eq!(m.mutations_covered, [le.mutation_id]);
        assert!(kills(&o, &m, OracleMode::DIFFERENTIAL));
        assert!(!kills(&o, &m, OracleMode::CRASH));
    }

    #[test]
    fn overlapping_and_stale_mutations_are_rejected() {
        let p = parse("fn main(){ x = read_byte(); if (x < 10) { print(0); } }").unwrap();
        let ms = enumerate_mutations(&p, &[MutationOperator::Ror]);
        assert!(matches!(
            apply_mutations(&p, &ms[0..2]),
            Err(MutationError::OverlappingMutations { first: 0, second: 1, .. })
        ));
        let mut stale = ms[0].clone();
        stale.original = ">".into();
        assert!(matches!(apply_mutations(&p, &[stale]), Err(MutationError::StaleMutation { .. })));
        let mut wrong_node = ms[0].clone();
        wrong_node.node_id = 0;
        assert!(matches!(apply_mutations(&p, &[wrong_node]), Err(MutationError::UnknownNode { .. })));
        let mut bad = ms[0].clone();
        bad.replacement = "+".into();
        assert!(matches!(apply_mutations(&p, &[bad]), Err(MutationError::InvalidReplacement { .. })));
        assert!(matches!(apply_mutations(&p, &[]), Err(MutationError::EmptyMutant)));
    }

    #[test]
    fn deleting_a_statement_conflicts_with_mutations_inside_it() {
        let p = parse("fn main(){ x = read_byte(); if (x < 10) { print(x + 1); } print(2); }").unwrap();
        let ms = enumerate_mutations(&p, &MutationOperator::ALL);
        let ends = p.subtree_ends();
        let sdl_if = ms.iter().find(|m| m.operator == MutationOperator::Sdl && m.original.starts_with("if")).unwrap();
        let aor = ms.iter().find(|m| m.operator == MutationOperator::Aor).unwrap();
        let sdl_print2 = ms.iter().find(|m| m.operator == MutationOperator::Sdl && m.original == "print(2);").unwrap();
        assert!(structurally_conflict(sdl_if, aor, &ends));
        assert!(structurally_conflict(aor, sdl_if, &ends));
        assert!(!structurally_conflict(sdl_print2, aor, &ends));
        assert!(matches!(
            apply_mutations(&p, &[sdl_if.clone(), aor.clone()]),
            Err(MutationError::OverlappingMutations { .. })
        ));
        assert!(apply_mutations(&p, &[sdl_print2.clone(), aor.clone()]).is_ok());
    }

    #[test]
    fn pretty_print_of_mutant_differs_only_at_the_site() {
        let p = parse("fn main(){ x = read_byte(); y = x + 1; print(y); while (x > 0) { x = x - 1; } }").unwrap();
        let base = pretty_print(&p);
        for m in enumerate_mutations(&p, &MutationOperator::ALL) {
            let mutant = apply_mutations(&p, std::slice::from_ref(&m)).unwrap();
            let text = pretty_print(&mutant.program);
            let a: Vec<_> = base.lines().collect();
            let b: Vec<_> = text.lines().collect();
            if m.operator == MutationOperator::Sdl {
                let removed = m.original.lines().count().max(1);
                assert!(a.len() > b.len(), "{m:?}");
                assert!(a.len() - b.len() <= removed + 2);
            } else {
                assert_eq!(a.len(), b.len());
                let diff: Vec<_> = a.iter().zip(&b).filter(|(x, y)| x != y).collect();
                assert_eq!(diff.len(), 1, "{m:?}");
                assert!(diff[0].1.contains(&m.replacement), "{m:?}: {:?}", diff[0]);
            }
        }
    }

    #[test]
    fn uneg_negates_condition() {
        let p = parse("fn main(){ x = read_byte(); while (x > 0) { print(x); x = x - 1; } }").unwrap();
        let ms = enumerate_mutations(&p, &[MutationOperator::Uneg]);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].original, "x > 0");
        assert_eq!(ms[0].replacement, "!(x > 0)");
        let mutant = apply_mutations(&p, &ms).unwrap();
        assert!(pretty_print(&mutant.program).contains("while (!(x > 0))"));
        let r = execute(&mutant.program, &TestInput::new(vec![2]), 1000);
        assert_eq!(r.output_str(), "");
        assert_eq!(r.outcome, Outcome::Exit);
        assert_eq!(r.mutations_covered, [0]);
    }

    #[test]
    fn mutation_coverage_tracks_evaluation() {
        let p = parse("fn main(){ x = read_byte(); if (x == 3) { print(x / 1); } }").unwrap();
        for m in enumerate_mutations(&p, &MutationOperator::ALL) {
            let mutant = apply_mutations(&p, std::slice::from_ref(&m)).unwrap();
            for b in [0u8, 3] {
                let input = TestInput::new(vec![b]);
                let r = execute(&mutant.program, &input, 1000);
                let orig = execute(&p, &input, 1000);
                assert!(r.mutations_covered.iter().all(|&id| id == m.mutation_id));
                assert_eq!(!r.mutations_covered.is_empty(), orig.nodes.contains(m.node_id), "{m:?} on {b}");
            }
        }
    }

    #[test]
    fn strata_allocation_is_proportional() {
        let mk = |i: u32, op| Mutation {
            mutation_id: i,
            operator: op,
            node_id: i,
            line: 1,
            col: 1,
            original: String::new(),
            replacement: String::new(),
        };
        let pool: Vec<_> = (0..10).map(|i| mk(i, if i < 8 { MutationOperator::Aor } else { MutationOperator::Ror })).collect();
        let s = sample_mutations(&pool, &SamplingStrategy::StrataByOperator { n: 5, seed: 9 }).unwrap();
        assert_eq!(s.iter().filter(|m| m.operator == MutationOperator::Aor).count(), 4);
        assert_eq!(s.iter().filter(|m| m.operator == MutationOperator::Ror).count(), 1);
        assert_eq!(s, sample_mutations(&pool, &SamplingStrategy::StrataByOperator { n: 5, seed: 9 }).unwrap());

        assert_eq!(sample_mutations(&pool, &SamplingStrategy::All).unwrap(), pool);
        assert!(sample_mutations(&pool, &SamplingStrategy::Uniform { n: 0, seed: 1 }).unwrap().is_empty());
        let u = sample_mutations(&pool, &SamplingStrategy::Uniform { n: 6, seed: 1 }).unwrap();
        assert_eq!(u.len(), 6);
        assert!(u.windows(2).all(|w| w[0].mutation_id < w[1].mutation_id));
        assert_eq!(
            sample_mutations(&pool, &SamplingStrategy::Uniform { n: 11, seed: 1 }),
            Err(MutationError::SampleTooLarge { requested: 11, available: 10 })
        );
    }

    #[test]
    fn largest_remainder_rounding() {
        assert_eq!(largest_remainder(5, &[8, 2]), [4, 1]);
        assert_eq!(largest_remainder(3, &[1, 1, 1]), [1, 1, 1]);
        assert_eq!(largest_remainder(2, &[1, 1, 1]), [1, 1, 0]);
        assert_eq!(largest_remainder(4, &[5, 3, 2]), [2, 1, 1]);
    }

    #[test]
    fn json_export_field_order() {
        let p = parse("fn main(){ print(1 + 2); }").unwrap();
        let ms = enumerate_mutations(&p, &[MutationOperator::Aor]);
        let json = serde_json::to_string(&ms[0]).unwrap();
        assert_eq!(
            json,
            r#"{"mutation_id":0,"operator":"AOR","node_id":3,"line":1,"col":20,"original":"+","replacement":"-"}"#
        );
        let back: Vec<Mutation> = serde_json::from_str(&mutations_to_json(&ms)).unwrap();
        assert_eq!(back, ms);
    }

    #[test]
    fn operator_names_parse() {
        assert_eq!("ror".parse::<MutationOperator>().unwrap(), MutationOperator::Ror);
        assert!(matches!("XYZ".parse::<MutationOperator>(), Err(MutationError::UnknownOperator(_))));
    }

    #[test]
    fn negation_composes_with_a_nested_constant() {
        let p = parse("fn main() { x = read_byte(); if (x == 7) { print(1); } }").unwrap();
        let ms = enumerate_mutations(&p, &MutationOperator::ALL);
        let uneg = ms.iter().find(|m| m.operator == MutationOperator::Uneg).unwrap();
        let konst = ms.iter().find(|m| m.operator == MutationOperator::Const && m.replacement == "0").unwrap();
        let mutant = apply_mutations(&p, &[uneg.clone(), konst.clone()]).unwrap();
        assert!(pretty_print(&mutant.program).contains("!(x == 0)"));
    }
}
