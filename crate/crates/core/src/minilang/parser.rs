use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Largest array a program may declare.
pub const MAX_ARRAY_LEN: u32 = 1 << 16;

pub fn parse(source: &str) -> Result<Program, ParseError> {
    parse_named(source, "<input>")
}

pub fn parse_named(source: &str, source_name: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0, spans: Vec::new() };
    let mut functions = Vec::new();
    let mut fn_positions = Vec::new();
    while p.peek() != &Tok::Eof {
        let (line, col) = p.here();
        functions.push(p.function()?);
        fn_positions.push((line, col));
    }

    let mut index: HashMap<String, u32> = HashMap::new();
    for (i, f) in functions.iter().enumerate() {
        if index.insert(f.name.clone(), i as u32).is_some() {
            let (line, col) = fn_positions[i];
            return Err(ParseError::DuplicateFunction { name: f.name.clone(), line, col });
        }
    }
    let main = *index.get("main").ok_or(ParseError::MissingMain)?;
    if !functions[main as usize].params.is_empty() {
        let (line, col) = fn_positions[main as usize];
        return Err(ParseError::Syntax { line, col, message: "`main` must take no parameters".into() });
    }

    let arities: Vec<usize> = functions.iter().map(|f| f.params.len()).collect();
    let mut numbering = Numbering { spans: &p.spans, nodes: Vec::new(), index: &index, arities: &arities };
    for f in &mut functions {
        numbering.function(f)?;
    }
    let nodes = numbering.nodes;
    Ok(Program { functions, nodes, source_name: source_name.to_string(), main })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Provisional node ids index into this table until renumbering.
    spans: Vec<NodeInfo>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.unexpected(wanted)
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn node(&mut self, kind: NodeKind, line: u32, col: u32) -> NodeId {
        self.spans.push(NodeInfo { kind, line, col });
        (self.spans.len() - 1) as NodeId
    }

    fn function(&mut self) -> Result<FunctionDef, ParseError> {
        let (line, col) = self.here();
        self.expect(Tok::Fn, "`fn`")?;
        let id = self.node(NodeKind::Function, line, col);
        let name = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (pl, pc) = self.here();
                let p = self.ident()?;
                if params.contains(&p) {
                    return Err(ParseError::Syntax { line: pl, col: pc, message: format!("duplicate parameter `{p}`") });
                }
                params.push(p);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let body = self.block()?;
        Ok(FunctionDef { id, name, params, body, scalar_slots: 0, array_slots: 0 })
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        let (line, col) = self.here();
        self.expect(Tok::LBrace, "`{`")?;
        let id = self.node(NodeKind::Block, line, col);
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(Block { id, stmts })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let (line, col) = self.here();
        let stmt = |id, kind| Stmt { id, kind, mutation: None };
        match self.peek().clone() {
            Tok::Arr => {
                self.bump();
                let id = self.node(NodeKind::ArrDecl, line, col);
                let name = self.ident()?;
                self.expect(Tok::LBracket, "`[`")?;
                let len = match self.peek().clone() {
                    Tok::Int(v) if v >= 1 && v <= MAX_ARRAY_LEN as u64 => {
                        self.bump();
                        v as u32
                    }
                    Tok::Int(_) => return self.error(format!("array length must be in 1..={MAX_ARRAY_LEN}")),
                    _ => return self.unexpected("array length"),
                };
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(stmt(id, StmtKind::ArrDecl { name, slot: 0, len }))
            }
            Tok::If => self.if_stmt(),
            Tok::While => {
                self.bump();
                let id = self.node(NodeKind::While, line, col);
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.block()?;
                Ok(stmt(id, StmtKind::While { cond, body }))
            }
            Tok::Return => {
                self.bump();
                let id = self.node(NodeKind::Return, line, col);
                let value = if *self.peek() == Tok::Semi { None } else { Some(self.expr()?) };
                self.expect(Tok::Semi, "`;`")?;
                Ok(stmt(id, StmtKind::Return(value)))
            }
            Tok::Assert | Tok::Print => {
                let is_assert = *self.peek() == Tok::Assert;
                self.bump();
                let kind = if is_assert { NodeKind::Assert } else { NodeKind::Print };
                let id = self.node(kind, line, col);
                self.expect(Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(stmt(id, if is_assert { StmtKind::Assert(e) } else { StmtKind::Print(e) }))
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::Assign => {
                self.bump();
                self.bump();
                let id = self.node(NodeKind::Assign, line, col);
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(stmt(id, StmtKind::Assign { name, slot: 0, value }))
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LBracket && self.is_index_assign() => {
                self.bump();
                self.bump();
                let id = self.node(NodeKind::IndexAssign, line, col);
                let index = self.expr()?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::Assign, "`=`")?;
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(stmt(id, StmtKind::IndexAssign { array: name, slot: 0, index, value }))
            }
            _ => {
                let id = self.node(NodeKind::ExprStmt, line, col);
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(stmt(id, StmtKind::Expr(e)))
            }
        }
    }

    /// Looks past a balanced `[...]` for `=` to tell `a[i] = v;` from `a[i];`.
    fn is_index_assign(&self) -> bool {
        let mut depth = 0usize;
        let mut k = 1;
        loop {
            match self.peek_at(k) {
                Tok::LBracket => depth += 1,
                Tok::RBracket => {
                    depth -= 1;
                    if depth == 0 {
                        return *self.peek_at(k + 1) == Tok::Assign;
                    }
                }
                Tok::Eof | Tok::Semi => return false,
                _ => {}
            }
            k += 1;
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let (line, col) = self.here();
        self.expect(Tok::If, "`if`")?;
        let id = self.node(NodeKind::If, line, col);
        self.expect(Tok::LParen, "`(`")?;
        let cond = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        let then_block = self.block()?;
        let else_block = if *self.peek() == Tok::Else {
            self.bump();
            if *self.peek() == Tok::If {
                // `else if` is sugar for an else block holding a single `if`.
                let (bl, bc) = self.here();
                let bid = self.node(NodeKind::Block, bl, bc);
                let inner = self.if_stmt()?;
                Some(Block { id: bid, stmts: vec![inner] })
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt { id, kind: StmtKind::If { cond, then_block, else_block }, mutation: None })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min_prec {
                break;
            }
            let (line, col) = self.here();
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            let id = self.node(NodeKind::Binary, line, col);
            lhs = Expr { id, kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), mutation: None };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                // `-` directly followed by a literal is a negative literal.
                if let Tok::Int(v) = *self.peek() {
                    self.bump();
                    if v > i64::MAX as u64 + 1 {
                        return Err(ParseError::Syntax { line, col, message: "integer literal out of range".into() });
                    }
                    let id = self.node(NodeKind::Int, line, col);
                    return Ok(Expr { id, kind: ExprKind::Int((v as i64).wrapping_neg()), mutation: None });
                }
                let id = self.node(NodeKind::Unary, line, col);
                let inner = self.unary()?;
                Ok(Expr { id, kind: ExprKind::Unary(UnOp::Neg, Box::new(inner)), mutation: None })
            }
            Tok::Bang => {
                self.bump();
                let id = self.node(NodeKind::Unary, line, col);
                let inner = self.unary()?;
                Ok(Expr { id, kind: ExprKind::Unary(UnOp::Not, Box::new(inner)), mutation: None })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = self.here();
        let expr = |id, kind| Expr { id, kind, mutation: None };
        match self.peek().clone() {
            Tok::Int(v) => {
                if v > i64::MAX as u64 {
                    return self.error("integer literal out of range");
                }
                self.bump();
                let id = self.node(NodeKind::Int, line, col);
                Ok(expr(id, ExprKind::Int(v as i64)))
            }
            Tok::ReadByte | Tok::ReadInt => {
                let byte = *self.peek() == Tok::ReadByte;
                self.bump();
                let id = self.node(if byte { NodeKind::ReadByte } else { NodeKind::ReadInt }, line, col);
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(expr(id, if byte { ExprKind::ReadByte } else { ExprKind::ReadInt }))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match self.peek() {
                    Tok::LParen => {
                        self.bump();
                        let id = self.node(NodeKind::Call, line, col);
                        let mut args = Vec::new();
                        if *self.peek() != Tok::RParen {
                            loop {
                                args.push(self.expr()?);
                                if *self.peek() == Tok::Comma {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(expr(id, ExprKind::Call { name, func: 0, args }))
                    }
                    Tok::LBracket => {
                        self.bump();
                        let id = self.node(NodeKind::Index, line, col);
                        let index = self.expr()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        Ok(expr(id, ExprKind::Index { array: name, slot: 0, index: Box::new(index) }))
                    }
                    _ => {
                        let id = self.node(NodeKind::Var, line, col);
                        Ok(expr(id, ExprKind::Var { name, slot: 0 }))
                    }
                }
            }
            _ => self.unexpected("expression"),
        }
    }
}

/// Second pass: preorder renumbering plus name resolution.
struct Numbering<'a> {
    spans: &'a [NodeInfo],
    nodes: Vec<NodeInfo>,
    index: &'a HashMap<String, u32>,
    arities: &'a [usize],
}

struct Scope {
    scalars: HashMap<String, u32>,
    arrays: HashMap<String, u32>,
}

impl Numbering<'_> {
    fn renumber(&mut self, id: &mut NodeId) -> NodeInfo {
        let info = self.spans[*id as usize];
        *id = self.nodes.len() as NodeId;
        self.nodes.push(info);
        info
    }

    fn err<T>(info: NodeInfo, message: String) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: info.line, col: info.col, message })
    }

    fn function(&mut self, f: &mut FunctionDef) -> Result<(), ParseError> {
        let mut scope = Scope { scalars: HashMap::new(), arrays: HashMap::new() };
        for p in &f.params {
            let n = scope.scalars.len() as u32;
            scope.scalars.insert(p.clone(), n);
        }
        self.declare_arrays(&f.body, &mut scope)?;
        self.renumber(&mut f.id);
        self.block(&mut f.body, &mut scope)?;
        f.scalar_slots = scope.scalars.len() as u32;
        f.array_slots = scope.arrays.len() as u32;
        Ok(())
    }

    fn declare_arrays(&self, b: &Block, scope: &mut Scope) -> Result<(), ParseError> {
        for s in &b.stmts {
            match &s.kind {
                StmtKind::ArrDecl { name, .. } => {
                    let info = self.spans[s.id as usize];
                    if scope.arrays.contains_key(name) {
                        return Self::err(info, format!("array `{name}` declared twice"));
                    }
                    let n = scope.arrays.len() as u32;
                    scope.arrays.insert(name.clone(), n);
                }
                StmtKind::If { then_block, else_block, .. } => {
                    self.declare_arrays(then_block, scope)?;
                    if let Some(e) = else_block {
                        self.declare_arrays(e, scope)?;
                    }
                }
                StmtKind::While { body, .. } => self.declare_arrays(body, scope)?,
                _ => {}
            }
        }
        Ok(())
    }

    fn block(&mut self, b: &mut Block, scope: &mut Scope) -> Result<(), ParseError> {
        self.renumber(&mut b.id);
        for s in &mut b.stmts {
            self.stmt(s, scope)?;
        }
        Ok(())
    }

    fn scalar(scope: &mut Scope, name: &str, info: NodeInfo) -> Result<u32, ParseError> {
        if scope.arrays.contains_key(name) {
            return Self::err(info, format!("`{name}` is an array"));
        }
        let n = scope.scalars.len() as u32;
        Ok(*scope.scalars.entry(name.to_string()).or_insert(n))
    }

    fn array(scope: &Scope, name: &str, info: NodeInfo) -> Result<u32, ParseError> {
        match scope.arrays.get(name) {
            Some(&slot) => Ok(slot),
            None => Self::err(info, format!("undeclared array `{name}`")),
        }
    }

    fn stmt(&mut self, s: &mut Stmt, scope: &mut Scope) -> Result<(), ParseError> {
        let info = self.renumber(&mut s.id);
        match &mut s.kind {
            StmtKind::ArrDecl { name, slot, .. } => {
                if scope.scalars.contains_key(name.as_str()) {
                    return Self::err(info, format!("`{name}` is already a scalar"));
                }
                *slot = Self::array(scope, name, info)?;
            }
            StmtKind::Assign { name, slot, value } => {
                *slot = Self::scalar(scope, name, info)?;
                self.expr(value, scope)?;
            }
            StmtKind::IndexAssign { array, slot, index, value } => {
                *slot = Self::array(scope, array, info)?;
                self.expr(index, scope)?;
                self.expr(value, scope)?;
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.expr(cond, scope)?;
                self.block(then_block, scope)?;
                if let Some(b) = else_block {
                    self.block(b, scope)?;
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond, scope)?;
                self.block(body, scope)?;
            }
            StmtKind::Return(None) | StmtKind::Skip => {}
            StmtKind::Return(Some(e)) | StmtKind::Assert(e) | StmtKind::Print(e) | StmtKind::Expr(e) => {
                self.expr(e, scope)?;
            }
        }
        Ok(())
    }

    fn expr(&mut self, e: &mut Expr, scope: &mut Scope) -> Result<(), ParseError> {
        let info = self.renumber(&mut e.id);
        match &mut e.kind {
            ExprKind::Int(_) | ExprKind::ReadByte | ExprKind::ReadInt => {}
            ExprKind::Var { name, slot } => *slot = Self::scalar(scope, name, info)?,
            ExprKind::Index { array, slot, index } => {
                *slot = Self::array(scope, array, info)?;
                self.expr(index, scope)?;
            }
            ExprKind::Call { name, func, args } => {
                let Some(&target) = self.index.get(name.as_str()) else {
                    return Self::err(info, format!("call to undefined function `{name}`"));
                };
                let arity = self.arities[target as usize];
                if arity != args.len() {
                    return Self::err(info, format!("`{name}` takes {arity} argument(s), {} given", args.len()));
                }
                *func = target;
                for a in args {
                    self.expr(a, scope)?;
                }
            }
            ExprKind::Unary(_, x) => self.expr(x, scope)?,
            ExprKind::Binary(_, l, r) => {
                self.expr(l, scope)?;
                self.expr(r, scope)?;
            }
        }
        Ok(())
    }
}
