//! Instrumented tree-walking interpreter.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::ast::*;

/// Calls nested deeper than this are treated like running out of fuel.
pub const MAX_CALL_DEPTH: u32 = 200;

/// Default upper bound on fuzzer-generated input length.
pub const DEFAULT_MAX_INPUT_LEN: usize = 1024;

/// A byte-string program input.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TestInput(pub Vec<u8>);

impl TestInput {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        TestInput(bytes.into())
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
        hex::decode(s).map(TestInput)
    }

    /// Little-endian encoding of a 32-bit integer, as consumed by `read_int()`.
    pub fn from_i32(v: i32) -> Self {
        TestInput(v.to_le_bytes().to_vec())
    }
}

impl Serialize for TestInput {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for TestInput {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TestInput::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrashKind {
    DivByZero,
    ModByZero,
    IndexOutOfBounds,
    AssertFail,
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Exit,
    Crash { kind: CrashKind, node: NodeId },
    FuelExhausted,
}

impl Outcome {
    pub fn is_crash(&self) -> bool {
        matches!(self, Outcome::Crash { .. })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Exit => f.write_str("exit"),
            Outcome::Crash { kind, node } => write!(f, "crash({kind:?} at node {node})"),
            Outcome::FuelExhausted => f.write_str("fuel exhausted"),
        }
    }
}

/// A statement execution or a branch outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoverageElement {
    Stmt(NodeId),
    Branch(NodeId, bool),
}

impl CoverageElement {
    fn index(self) -> usize {
        match self {
            CoverageElement::Stmt(n) => 3 * n as usize,
            CoverageElement::Branch(n, taken) => 3 * n as usize + 1 + taken as usize,
        }
    }

    fn from_index(i: usize) -> Self {
        let node = (i / 3) as NodeId;
        match i % 3 {
            0 => CoverageElement::Stmt(node),
            r => CoverageElement::Branch(node, r == 2),
        }
    }
}

/// Set of coverage elements hit by one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage(FixedBitSet);

impl Coverage {
    fn with_nodes(nodes: usize) -> Self {
        Coverage(FixedBitSet::with_capacity(3 * nodes))
    }

    fn insert(&mut self, e: CoverageElement) {
        self.0.insert(e.index());
    }

    pub fn contains(&self, e: CoverageElement) -> bool {
        self.0.contains(e.index())
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = CoverageElement> + '_ {
        self.0.ones().map(CoverageElement::from_index)
    }
}

/// Set of node ids evaluated by one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet(FixedBitSet);

impl NodeSet {
    pub fn contains(&self, node: NodeId) -> bool {
        self.0.contains(node as usize)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.ones().map(|i| i as NodeId)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    pub outcome: Outcome,
    pub output: Vec<u8>,
    pub coverage: Coverage,
    /// Every node entered during execution, statements and expressions alike.
    pub nodes: NodeSet,
    /// Sorted ids of mutated nodes that were entered.
    pub mutations_covered: Vec<MutationId>,
    pub fuel_used: u64,
}

impl ExecutionResult {
    pub fn output_str(&self) -> String {
        String::from_utf8_lossy(&self.output).into_owned()
    }
}

/// Runs `program` on `input` with a budget of `fuel` interpreter steps.
///
/// Each statement and each expression evaluation costs one step. The step
/// that would bring usage to `fuel` stops the run, so `FuelExhausted` is
/// reported exactly when `fuel_used == fuel`.
pub fn execute(program: &Program, input: &TestInput, fuel: u64) -> ExecutionResult {
    assert!(fuel > 0, "fuel must be positive");
    let n = program.node_count();
    let mut m = Machine {
        program,
        input: input.bytes(),
        pos: 0,
        fuel,
        used: 0,
        depth: 0,
        output: Vec::new(),
        coverage: Coverage::with_nodes(n),
        nodes: FixedBitSet::with_capacity(n),
        mutations: Vec::new(),
    };
    let outcome = match m.call(program.main, Vec::new()) {
        Ok(_) => Outcome::Exit,
        Err(Halt::Crash(kind, node)) => Outcome::Crash { kind, node },
        Err(Halt::Fuel) => {
            m.used = fuel;
            Outcome::FuelExhausted
        }
    };
    let mut mutations_covered = m.mutations;
    mutations_covered.sort_unstable();
    mutations_covered.dedup();
    ExecutionResult {
        outcome,
        output: m.output,
        coverage: m.coverage,
        nodes: NodeSet(m.nodes),
        mutations_covered,
        fuel_used: m.used,
    }
}

enum Halt {
    Crash(CrashKind, NodeId),
    Fuel,
}

enum Flow {
    Next,
    Return(i64),
}

struct Frame {
    scalars: Vec<i64>,
    arrays: Vec<Vec<i64>>,
}

struct Machine<'a> {
    program: &'a Program,
    input: &'a [u8],
    pos: usize,
    fuel: u64,
    used: u64,
    depth: u32,
    output: Vec<u8>,
    coverage: Coverage,
    nodes: FixedBitSet,
    mutations: Vec<MutationId>,
}

type Step<T> = Result<T, Halt>;

impl Machine<'_> {
    #[inline]
    fn enter(&mut self, id: NodeId, mutation: Option<MutationId>) -> Step<()> {
        self.used += 1;
        if self.used >= self.fuel {
            return Err(Halt::Fuel);
        }
        self.nodes.insert(id as usize);
        if let Some(m) = mutation {
            self.mutations.push(m);
        }
        Ok(())
    }

    fn call(&mut self, func: u32, args: Vec<i64>) -> Step<i64> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Halt::Fuel);
        }
        let f = &self.program.functions[func as usize];
        let mut scalars = args;
        scalars.resize(f.scalar_slots as usize, 0);
        let mut frame = Frame { scalars, arrays: vec![Vec::new(); f.array_slots as usize] };
        self.nodes.insert(f.id as usize);
        self.depth += 1;
        let r = self.block(&f.body, &mut frame);
        self.depth -= 1;
        match r? {
            Flow::Next => Ok(0),
            Flow::Return(v) => Ok(v),
        }
    }

    fn block(&mut self, b: &Block, frame: &mut Frame) -> Step<Flow> {
        self.nodes.insert(b.id as usize);
        for s in &b.stmts {
            if let Flow::Return(v) = self.stmt(s, frame)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn branch(&mut self, cond: &Expr, frame: &mut Frame) -> Step<bool> {
        let taken = self.eval(cond, frame)? != 0;
        self.coverage.insert(CoverageElement::Branch(cond.id, taken));
        Ok(taken)
    }

    fn stmt(&mut self, s: &Stmt, frame: &mut Frame) -> Step<Flow> {
        self.enter(s.id, s.mutation)?;
        self.coverage.insert(CoverageElement::Stmt(s.id));
        match &s.kind {
            StmtKind::ArrDecl { slot, len, .. } => {
                frame.arrays[*slot as usize] = vec![0; *len as usize];
            }
            StmtKind::Assign { slot, value, .. } => {
                let v = self.eval(value, frame)?;
                frame.scalars[*slot as usize] = v;
            }
            StmtKind::IndexAssign { slot, index, value, .. } => {
                let i = self.eval(index, frame)?;
                let v = self.eval(value, frame)?;
                let arr = &mut frame.arrays[*slot as usize];
                match usize::try_from(i).ok().filter(|&i| i < arr.len()) {
                    Some(i) => arr[i] = v,
                    None => return Err(Halt::Crash(CrashKind::IndexOutOfBounds, s.id)),
                }
            }
            StmtKind::If { cond, then_block, else_block } => {
                if self.branch(cond, frame)? {
                    return self.block(then_block, frame);
                } else if let Some(b) = else_block {
                    return self.block(b, frame);
                }
            }
            StmtKind::While { cond, body } => {
                while self.branch(cond, frame)? {
                    if let Flow::Return(v) = self.block(body, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e, frame)?,
                    None => 0,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Assert(e) => {
                if self.eval(e, frame)? == 0 {
                    return Err(Halt::Crash(CrashKind::AssertFail, s.id));
                }
            }
            StmtKind::Print(e) => {
                let v = self.eval(e, frame)?;
                self.output.extend_from_slice(v.to_string().as_bytes());
                self.output.push(b'\n');
            }
            StmtKind::Expr(e) => {
                self.eval(e, frame)?;
            }
            StmtKind::Skip => {}
        }
        Ok(Flow::Next)
    }

    fn eval(&mut self, e: &Expr, frame: &mut Frame) -> Step<i64> {
        self.enter(e.id, e.mutation)?;
        let overflow = Halt::Crash(CrashKind::Overflow, e.id);
        Ok(match &e.kind {
            ExprKind::Int(v) => *v,
            ExprKind::Var { slot, .. } => frame.scalars[*slot as usize],
            ExprKind::Index { slot, index, .. } => {
                let i = self.eval(index, frame)?;
                let arr = &frame.arrays[*slot as usize];
                match usize::try_from(i).ok().and_then(|i| arr.get(i)) {
                    Some(v) => *v,
                    None => return Err(Halt::Crash(CrashKind::IndexOutOfBounds, e.id)),
                }
            }
            ExprKind::Call { func, args, .. } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame)?);
                }
                self.call(*func, vals)?
            }
            ExprKind::ReadByte => match self.input.get(self.pos) {
                Some(&b) => {
                    self.pos += 1;
                    b as i64
                }
                None => -1,
            },
            ExprKind::ReadInt => {
                let mut buf = [0u8; 4];
                for b in &mut buf {
                    if let Some(&x) = self.input.get(self.pos) {
                        *b = x;
                        self.pos += 1;
                    }
                }
                i32::from_le_bytes(buf) as i64
            }
            ExprKind::Unary(UnOp::Neg, x) => self.eval(x, frame)?.checked_neg().ok_or(overflow)?,
            ExprKind::Unary(UnOp::Not, x) => (self.eval(x, frame)? == 0) as i64,
            ExprKind::Binary(BinOp::And, l, r) => {
                (self.eval(l, frame)? != 0 && self.eval(r, frame)? != 0) as i64
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                (self.eval(l, frame)? != 0 || self.eval(r, frame)? != 0) as i64
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l, frame)?;
                let b = self.eval(r, frame)?;
                match op {
                    BinOp::Add => a.checked_add(b).ok_or(overflow)?,
                    BinOp::Sub => a.checked_sub(b).ok_or(overflow)?,
                    BinOp::Mul => a.checked_mul(b).ok_or(overflow)?,
                    BinOp::Div if b == 0 => return Err(Halt::Crash(CrashKind::DivByZero, e.id)),
                    BinOp::Div => a.checked_div(b).ok_or(overflow)?,
                    BinOp::Rem if b == 0 => return Err(Halt::Crash(CrashKind::ModByZero, e.id)),
                    BinOp::Rem => a.checked_rem(b).ok_or(overflow)?,
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::Gt => (a > b) as i64,
                    BinOp::Ge => (a >= b) as i64,
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
        })
    }
}
