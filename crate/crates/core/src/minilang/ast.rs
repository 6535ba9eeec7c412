//! Syntax tree for MiniLang programs.
//!
//! Every function, block, statement and expression carries a [`NodeId`]
//! equal to its preorder position in the tree. Mutated nodes additionally
//! carry the id of the mutation applied to them so the interpreter can
//! report which mutations an execution reached.

use serde::{Deserialize, Serialize};
use std::fmt;

pub type NodeId = u32;
pub type MutationId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub const ARITHMETIC: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Rem];
    pub const RELATIONAL: [BinOp; 6] =
        [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne];
    pub const LOGICAL: [BinOp; 2] = [BinOp::And, BinOp::Or];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Self::ARITHMETIC
            .iter()
            .chain(Self::RELATIONAL.iter())
            .chain(Self::LOGICAL.iter())
            .copied()
            .find(|op| op.symbol() == s)
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 5,
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub id: NodeId,
    pub kind: ExprKind,
    pub mutation: Option<MutationId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Var { name: String, slot: u32 },
    Index { array: String, slot: u32, index: Box<Expr> },
    Call { name: String, func: u32, args: Vec<Expr> },
    ReadByte,
    ReadInt,
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub id: NodeId,
    pub kind: StmtKind,
    pub mutation: Option<MutationId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    ArrDecl { name: String, slot: u32, len: u32 },
    Assign { name: String, slot: u32, value: Expr },
    IndexAssign { array: String, slot: u32, index: Expr, value: Expr },
    If { cond: Expr, then_block: Block, else_block: Option<Block> },
    While { cond: Expr, body: Block },
    Return(Option<Expr>),
    Assert(Expr),
    Print(Expr),
    Expr(Expr),
    /// A statement removed by statement deletion. Executes as a no-op.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub id: NodeId,
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub id: NodeId,
    pub name: String,
    pub params: Vec<String>,
    pub body: Block,
    /// Number of scalar slots; parameters occupy the first `params.len()`.
    pub scalar_slots: u32,
    /// Number of array slots.
    pub array_slots: u32,
}

/// Coarse classification of a node, recorded in the node table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Function,
    Block,
    ArrDecl,
    Assign,
    IndexAssign,
    If,
    While,
    Return,
    Assert,
    Print,
    ExprStmt,
    Int,
    Var,
    Index,
    Call,
    ReadByte,
    ReadInt,
    Unary,
    Binary,
}

impl NodeKind {
    pub fn is_stmt(self) -> bool {
        matches!(
            self,
            NodeKind::ArrDecl
                | NodeKind::Assign
                | NodeKind::IndexAssign
                | NodeKind::If
                | NodeKind::While
                | NodeKind::Return
                | NodeKind::Assert
                | NodeKind::Print
                | NodeKind::ExprStmt
        )
    }

    pub fn is_expr(self) -> bool {
        !self.is_stmt() && !matches!(self, NodeKind::Function | NodeKind::Block)
    }
}

/// One row of the node table: what a node is and where it came from.
///
/// For binary expressions the position is that of the operator token, which
/// is where operator-replacing mutations apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeInfo {
    pub kind: NodeKind,
    pub line: u32,
    pub col: u32,
}

/// A parsed MiniLang program.
///
/// Immutable after parsing; mutants are produced by cloning and patching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub functions: Vec<FunctionDef>,
    pub nodes: Vec<NodeInfo>,
    pub source_name: String,
    pub(crate) main: u32,
}

impl Program {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeInfo> {
        self.nodes.get(id as usize)
    }

    pub fn main(&self) -> &FunctionDef {
        &self.functions[self.main as usize]
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Visits every node in preorder.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(NodeRef<'a>)) {
        for f in &self.functions {
            visit(NodeRef::Function(f));
            walk_block(&f.body, visit);
        }
    }

    /// For each node, one past the largest node id in its subtree. With
    /// preorder ids, node `m` lies under node `n` iff `n <= m < ends[n]`.
    pub fn subtree_ends(&self) -> Vec<NodeId> {
        let mut ends = vec![0; self.node_count()];
        for f in &self.functions {
            ends[f.id as usize] = end_block(&f.body, &mut ends);
        }
        ends
    }

    /// True when no node carries a mutation.
    pub fn is_pristine(&self) -> bool {
        let mut pristine = true;
        self.walk(&mut |n| {
            pristine &= match n {
                NodeRef::Stmt(s) => s.mutation.is_none(),
                NodeRef::Expr(e) => e.mutation.is_none(),
                _ => true,
            }
        });
        pristine
    }
}

/// A borrowed view of any node, used by traversals.
#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Function(&'a FunctionDef),
    Block(&'a Block),
    Stmt(&'a Stmt),
    Expr(&'a Expr),
}

impl NodeRef<'_> {
    pub fn id(&self) -> NodeId {
        match self {
            NodeRef::Function(f) => f.id,
            NodeRef::Block(b) => b.id,
            NodeRef::Stmt(s) => s.id,
            NodeRef::Expr(e) => e.id,
        }
    }
}

fn end_block(b: &Block, ends: &mut [NodeId]) -> NodeId {
    let mut end = b.id + 1;
    for s in &b.stmts {
        end = end.max(end_stmt(s, ends));
    }
    ends[b.id as usize] = end;
    end
}

fn end_stmt(s: &Stmt, ends: &mut [NodeId]) -> NodeId {
    let mut end = s.id + 1;
    let mut sub = |e: NodeId| end = end.max(e);
    match &s.kind {
        StmtKind::ArrDecl { .. } | StmtKind::Skip | StmtKind::Return(None) => {}
        StmtKind::Assign { value, .. } => sub(end_expr(value, ends)),
        StmtKind::IndexAssign { index, value, .. } => {
            sub(end_expr(index, ends));
            sub(end_expr(value, ends));
        }
        StmtKind::If { cond, then_block, else_block } => {
            sub(end_expr(cond, ends));
            sub(end_block(then_block, ends));
            if let Some(b) = else_block {
                sub(end_block(b, ends));
            }
        }
        StmtKind::While { cond, body } => {
            sub(end_expr(cond, ends));
            sub(end_block(body, ends));
        }
        StmtKind::Return(Some(e)) | StmtKind::Assert(e) | StmtKind::Print(e) | StmtKind::Expr(e) => {
            sub(end_expr(e, ends))
        }
    }
    ends[s.id as usize] = end;
    end
}

fn end_expr(e: &Expr, ends: &mut [NodeId]) -> NodeId {
    let mut end = e.id + 1;
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Var { .. } | ExprKind::ReadByte | ExprKind::ReadInt => {}
        ExprKind::Index { index, .. } => end = end.max(end_expr(index, ends)),
        ExprKind::Call { args, .. } => {
            for a in args {
                end = end.max(end_expr(a, ends));
            }
        }
        ExprKind::Unary(_, x) => end = end.max(end_expr(x, ends)),
        ExprKind::Binary(_, l, r) => {
            end = end.max(end_expr(l, ends));
            end = end.max(end_expr(r, ends));
        }
    }
    ends[e.id as usize] = end;
    end
}

fn walk_block<'a>(b: &'a Block, visit: &mut dyn FnMut(NodeRef<'a>)) {
    visit(NodeRef::Block(b));
    for s in &b.stmts {
        walk_stmt(s, visit);
    }
}

fn walk_stmt<'a>(s: &'a Stmt, visit: &mut dyn FnMut(NodeRef<'a>)) {
    visit(NodeRef::Stmt(s));
    match &s.kind {
        StmtKind::ArrDecl { .. } | StmtKind::Skip | StmtKind::Return(None) => {}
        StmtKind::Assign { value, .. } => walk_expr(value, visit),
        StmtKind::IndexAssign { index, value, .. } => {
            walk_expr(index, visit);
            walk_expr(value, visit);
        }
        StmtKind::If { cond, then_block, else_block } => {
            walk_expr(cond, visit);
            walk_block(then_block, visit);
            if let Some(b) = else_block {
                walk_block(b, visit);
            }
        }
        StmtKind::While { cond, body } => {
            walk_expr(cond, visit);
            walk_block(body, visit);
        }
        StmtKind::Return(Some(e)) | StmtKind::Assert(e) | StmtKind::Print(e) | StmtKind::Expr(e) => {
            walk_expr(e, visit)
        }
    }
}

fn walk_expr<'a>(e: &'a Expr, visit: &mut dyn FnMut(NodeRef<'a>)) {
    visit(NodeRef::Expr(e));
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Var { .. } | ExprKind::ReadByte | ExprKind::ReadInt => {}
        ExprKind::Index { index, .. } => walk_expr(index, visit),
        ExprKind::Call { args, .. } => {
            for a in args {
                walk_expr(a, visit);
            }
        }
        ExprKind::Unary(_, x) => walk_expr(x, visit),
        ExprKind::Binary(_, l, r) => {
            walk_expr(l, visit);
            walk_expr(r, visit);
        }
    }
}
