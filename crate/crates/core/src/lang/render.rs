//! Canonical source printer. `parse(render(m))` is structurally equal to `m`.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn render_module(m: &AstModule) -> String {
    let mut out = String::new();
    let mut prev_was_use = false;
    for (i, item) in m.items.iter().enumerate() {
        let is_use = matches!(item, Item::Use(_));
        if i > 0 && !(is_use && prev_was_use) {
            out.push('\n');
        }
        match item {
            Item::Use(u) => {
                out.push_str("use ");
                out.push_str(&u.module);
                if let Some(alias) = &u.alias {
                    out.push_str(" as ");
                    out.push_str(alias);
                }
                out.push('\n');
            }
            Item::Function(f) => render_function(&mut out, f, 0),
            Item::Class(c) => {
                writeln!(out, "class {}:", c.name).unwrap();
                if c.methods.is_empty() {
                    writeln!(out, "{INDENT}pass").unwrap();
                }
                for (j, m) in c.methods.iter().enumerate() {
                    if j > 0 {
                        out.push('\n');
                    }
                    render_function(&mut out, m, 1);
                }
            }
        }
        prev_was_use = is_use;
    }
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str(INDENT);
    }
}

fn render_function(out: &mut String, f: &FunctionDef, level: usize) {
    indent(out, level);
    out.push_str("def ");
    out.push_str(&f.name);
    out.push('(');
    for (i, p) in f.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&p.name);
        if let Some(a) = &p.annotation {
            write!(out, ": {a}").unwrap();
        }
    }
    out.push(')');
    if let Some(a) = &f.return_annotation {
        write!(out, " -> {a}").unwrap();
    }
    out.push_str(":\n");
    render_block(out, &f.body, level + 1);
}

fn render_block(out: &mut String, body: &[Stmt], level: usize) {
    for s in body {
        render_stmt(out, s, level);
    }
}

pub fn render_stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            writeln!(out, "{} = {}", render_expr(target), render_expr(value)).unwrap();
        }
        StmtKind::If {
            cond,
            then_body,
            elifs,
            else_body,
            ..
        } => {
            writeln!(out, "if {}:", render_expr(cond)).unwrap();
            render_block(out, then_body, level + 1);
            for elif in elifs {
                indent(out, level);
                writeln!(out, "elif {}:", render_expr(&elif.cond)).unwrap();
                render_block(out, &elif.body, level + 1);
            }
            if !else_body.is_empty() {
                indent(out, level);
                out.push_str("else:\n");
                render_block(out, else_body, level + 1);
            }
        }
        StmtKind::While { cond, body, .. } => {
            writeln!(out, "while {}:", render_expr(cond)).unwrap();
            render_block(out, body, level + 1);
        }
        StmtKind::Return(None) => out.push_str("return\n"),
        StmtKind::Return(Some(e)) => writeln!(out, "return {}", render_expr(e)).unwrap(),
        StmtKind::Expr(e) => writeln!(out, "{}", render_expr(e)).unwrap(),
        StmtKind::Assert(e) => writeln!(out, "assert {}", render_expr(e)).unwrap(),
        StmtKind::Pass => out.push_str("pass\n"),
    }
}

// binding strength, loosest first
const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_NOT: u8 = 3;
const P_CMP: u8 = 4;
const P_ADD: u8 = 5;
const P_MUL: u8 = 6;
const P_NEG: u8 = 7;
const P_POSTFIX: u8 = 8;
const P_ATOM: u8 = 9;

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Logical { op: LogicOp::Or, .. } => P_OR,
        ExprKind::Logical { op: LogicOp::And, .. } => P_AND,
        ExprKind::Unary { op: UnaryOp::Not, .. } => P_NOT,
        ExprKind::Compare { .. } => P_CMP,
        ExprKind::Binary { op: BinOp::Add | BinOp::Sub, .. } => P_ADD,
        ExprKind::Binary { .. } => P_MUL,
        ExprKind::Unary { op: UnaryOp::Neg, .. } => P_NEG,
        ExprKind::Int(v) if *v < 0 => P_NEG,
        ExprKind::Float(v) if v.is_sign_negative() => P_NEG,
        ExprKind::Call { .. } | ExprKind::Attribute { .. } | ExprKind::Index { .. } => P_POSTFIX,
        _ => P_ATOM,
    }
}

pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let prec = precedence(e);
    let paren = prec < min_prec;
    if paren {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Float(v) => out.push_str(&format_float(*v)),
        ExprKind::Str(s) => out.push_str(&quote_str(s)),
        ExprKind::Bool(true) => out.push_str("True"),
        ExprKind::Bool(false) => out.push_str("False"),
        ExprKind::None => out.push_str("None"),
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item, 0);
            }
            out.push(']');
        }
        ExprKind::Binary { op, lhs, rhs } => {
            write_expr(out, lhs, prec);
            write!(out, " {} ", op.token()).unwrap();
            write_expr(out, rhs, prec + 1);
        }
        ExprKind::Logical { op, lhs, rhs } => {
            write_expr(out, lhs, prec);
            write!(out, " {} ", op.token()).unwrap();
            write_expr(out, rhs, prec + 1);
        }
        ExprKind::Compare { first, rest } => {
            write_expr(out, first, P_CMP + 1);
            for (op, operand) in rest {
                write!(out, " {} ", op.token()).unwrap();
                write_expr(out, operand, P_CMP + 1);
            }
        }
        ExprKind::Unary { op: UnaryOp::Not, operand } => {
            out.push_str("not ");
            write_expr(out, operand, P_NOT);
        }
        ExprKind::Unary { op: UnaryOp::Neg, operand } => {
            out.push('-');
            // `- -5` must not collapse into `--5`
            if precedence(operand) == P_NEG {
                out.push('(');
                write_expr(out, operand, 0);
                out.push(')');
            } else {
                write_expr(out, operand, P_NEG);
            }
        }
        ExprKind::Call { func, args } => {
            write_expr(out, func, P_POSTFIX);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        ExprKind::Attribute { value, attr } => {
            write_expr(out, value, P_POSTFIX);
            out.push('.');
            out.push_str(attr);
        }
        ExprKind::Index { value, index } => {
            write_expr(out, value, P_POSTFIX);
            out.push('[');
            write_expr(out, index, 0);
            out.push(']');
        }
    }
    if paren {
        out.push(')');
    }
}

/// Shortest representation that reads back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

pub fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => write!(out, "\\x{:02x}", c as u32).unwrap(),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
