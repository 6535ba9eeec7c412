use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

/// Renders a program in canonical form: four-space indentation, one
/// statement per line and only the parentheses precedence requires.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, f) in program.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(out, "fn {}({}) ", f.name, f.params.join(", "));
        block(&mut out, &f.body, 0);
        out.push('\n');
    }
    out
}

/// Single-line rendering of an expression.
pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e);
    s
}

/// Single-line rendering of a statement, nested blocks included.
pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    stmt_inline(&mut out, s);
    out
}

fn block(out: &mut String, b: &Block, depth: usize) {
    out.push_str("{\n");
    for s in &b.stmts {
        if matches!(s.kind, StmtKind::Skip) {
            continue;
        }
        out.push_str(&INDENT.repeat(depth + 1));
        stmt(out, s, depth + 1);
        out.push('\n');
    }
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

fn is_else_if(b: &Block) -> bool {
    b.stmts.len() == 1 && matches!(b.stmts[0].kind, StmtKind::If { .. })
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    match &s.kind {
        StmtKind::If { cond, then_block, else_block } => {
            out.push_str("if (");
            expr(out, cond);
            out.push_str(") ");
            block(out, then_block, depth);
            if let Some(b) = else_block {
                out.push_str(" else ");
                if is_else_if(b) {
                    stmt(out, &b.stmts[0], depth);
                } else {
                    block(out, b, depth);
                }
            }
        }
        StmtKind::While { cond, body } => {
            out.push_str("while (");
            expr(out, cond);
            out.push_str(") ");
            block(out, body, depth);
        }
        _ => simple_stmt(out, s),
    }
}

fn stmt_inline(out: &mut String, s: &Stmt) {
    let inline_block = |out: &mut String, b: &Block| {
        out.push('{');
        for s in b.stmts.iter().filter(|s| !matches!(s.kind, StmtKind::Skip)) {
            out.push(' ');
            stmt_inline(out, s);
        }
        out.push_str(" }");
    };
    match &s.kind {
        StmtKind::If { cond, then_block, else_block } => {
            out.push_str("if (");
            expr(out, cond);
            out.push_str(") ");
            inline_block(out, then_block);
            if let Some(b) = else_block {
                out.push_str(" else ");
                inline_block(out, b);
            }
        }
        StmtKind::While { cond, body } => {
            out.push_str("while (");
            expr(out, cond);
            out.push_str(") ");
            inline_block(out, body);
        }
        _ => simple_stmt(out, s),
    }
}

fn simple_stmt(out: &mut String, s: &Stmt) {
    match &s.kind {
        StmtKind::ArrDecl { name, len, .. } => {
            let _ = write!(out, "arr {name}[{len}];");
        }
        StmtKind::Assign { name, value, .. } => {
            let _ = write!(out, "{name} = ");
            expr(out, value);
            out.push(';');
        }
        StmtKind::IndexAssign { array, index, value, .. } => {
            let _ = write!(out, "{array}[");
            expr(out, index);
            out.push_str("] = ");
            expr(out, value);
            out.push(';');
        }
        StmtKind::Return(None) => out.push_str("return;"),
        StmtKind::Return(Some(e)) => {
            out.push_str("return ");
            expr(out, e);
            out.push(';');
        }
        StmtKind::Assert(e) | StmtKind::Print(e) => {
            out.push_str(if matches!(s.kind, StmtKind::Assert(_)) { "assert(" } else { "print(" });
            expr(out, e);
            out.push_str(");");
        }
        StmtKind::Expr(e) => {
            expr(out, e);
            out.push(';');
        }
        StmtKind::Skip => {}
        StmtKind::If { .. } | StmtKind::While { .. } => unreachable!("compound statement"),
    }
}

fn expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Var { name, .. } => out.push_str(name),
        ExprKind::Index { array, index, .. } => {
            let _ = write!(out, "{array}[");
            expr(out, index);
            out.push(']');
        }
        ExprKind::Call { name, args, .. } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(out, a);
            }
            out.push(')');
        }
        ExprKind::ReadByte => out.push_str("read_byte()"),
        ExprKind::ReadInt => out.push_str("read_int()"),
        ExprKind::Unary(op, x) => {
            out.push(if *op == UnOp::Neg { '-' } else { '!' });
            // `-5` would re-parse as a literal, so a negated literal keeps parens.
            let wrap = matches!(x.kind, ExprKind::Binary(..)) || matches!(x.kind, ExprKind::Int(_));
            operand(out, x, wrap);
        }
        ExprKind::Binary(op, l, r) => {
            let prec = op.precedence();
            operand(out, l, binary_prec(l).is_some_and(|p| p < prec));
            let _ = write!(out, " {op} ");
            operand(out, r, binary_prec(r).is_some_and(|p| p <= prec));
        }
    }
}

fn binary_prec(e: &Expr) -> Option<u8> {
    match &e.kind {
        ExprKind::Binary(op, ..) => Some(op.precedence()),
        _ => None,
    }
}

fn operand(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        expr(out, e);
        out.push(')');
    } else {
        expr(out, e);
    }
}
