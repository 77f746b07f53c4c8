use std::fmt;
use std::sync::Arc;

use crate::lang::{walk_stmt, walk_stmt_mut, AstModule, BinOp, CmpOp, Expr, ExprKind, Item, LogicOp, NodeId, Span, Stmt, UnaryOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationOperator {
    /// Arithmetic operator replacement.
    Aor,
    /// Relational operator replacement.
    Ror,
    /// `and` / `or` swap.
    Cor,
    /// Integer constant replacement.
    Crp,
    /// `not x` becomes `x`.
    NotRemoval,
}

impl MutationOperator {
    pub fn tag(self) -> &'static str {
        match self {
            MutationOperator::Aor => "AOR",
            MutationOperator::Ror => "ROR",
            MutationOperator::Cor => "COR",
            MutationOperator::Crp => "CRP",
            MutationOperator::NotRemoval => "NOT",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Replacement {
    Bin(BinOp),
    /// Operator at a position of a comparison chain.
    Cmp(usize, CmpOp),
    Logic(LogicOp),
    Int(i64),
    DropNot,
}

/// A copy of the module changed at a single syntax node.
#[derive(Debug, Clone)]
pub struct Mutant {
    pub id: usize,
    pub operator: MutationOperator,
    pub location: NodeId,
    pub line: u32,
    /// Human-readable change, e.g. `== -> !=`.
    pub description: String,
    pub module: Arc<AstModule>,
}

struct Site {
    node: NodeId,
    line: u32,
    operator: MutationOperator,
    replacement: Replacement,
    description: String,
}

fn crp_values(c: i64) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::new();
    for v in [0, 1, c.saturating_add(1), c.saturating_neg()] {
        if v != c && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn sites_of(e: &Expr, out: &mut Vec<Site>) {
    let mut site = |operator, replacement, description: String| {
        out.push(Site {
            node: e.id,
            line: e.span.line,
            operator,
            replacement,
            description,
        })
    };
    match &e.kind {
        ExprKind::Binary { op, .. } => {
            for other in BinOp::ALL.into_iter().filter(|o| o != op) {
                site(
                    MutationOperator::Aor,
                    Replacement::Bin(other),
                    format!("{} -> {}", op.token(), other.token()),
                );
            }
        }
        ExprKind::Compare { rest, .. } => {
            for (k, (op, _)) in rest.iter().enumerate() {
                for other in CmpOp::ALL.into_iter().filter(|o| o != op) {
                    site(
                        MutationOperator::Ror,
                        Replacement::Cmp(k, other),
                        format!("{} -> {}", op.token(), other.token()),
                    );
                }
            }
        }
        ExprKind::Logical { op, .. } => {
            let other = match op {
                LogicOp::And => LogicOp::Or,
                LogicOp::Or => LogicOp::And,
            };
            site(
                MutationOperator::Cor,
                Replacement::Logic(other),
                format!("{} -> {}", op.token(), other.token()),
            );
        }
        ExprKind::Int(c) => {
            for v in crp_values(*c) {
                site(MutationOperator::Crp, Replacement::Int(v), format!("{c} -> {v}"));
            }
        }
        ExprKind::Unary { op: UnaryOp::Not, .. } => {
            site(MutationOperator::NotRemoval, Replacement::DropNot, "not x -> x".to_string());
        }
        _ => {}
    }
}

fn apply(module: &AstModule, node: NodeId, r: Replacement) -> AstModule {
    let mut m = module.clone();
    let mut edit = |e: &mut Expr| {
        if e.id != node {
            return;
        }
        match (&mut e.kind, r) {
            (ExprKind::Binary { op, .. }, Replacement::Bin(new)) => *op = new,
            (ExprKind::Compare { rest, .. }, Replacement::Cmp(k, new)) => rest[k].0 = new,
            (ExprKind::Logical { op, .. }, Replacement::Logic(new)) => *op = new,
            (ExprKind::Int(c), Replacement::Int(new)) => *c = new,
            (ExprKind::Unary { operand, .. }, Replacement::DropNot) => {
                let inner = std::mem::replace(&mut **operand, Expr {
                    id: NodeId::default(),
                    span: Span::default(),
                    kind: ExprKind::None,
                });
                *e = inner;
            }
            _ => unreachable!("mutation site changed shape"),
        }
    };
    for item in &mut m.items {
        let bodies: Vec<&mut Vec<Stmt>> = match item {
            Item::Function(f) => vec![&mut f.body],
            Item::Class(c) => c.methods.iter_mut().map(|f| &mut f.body).collect(),
            Item::Use(_) => continue,
        };
        for body in bodies {
            for s in body.iter_mut() {
                walk_stmt_mut(s, &mut |_| {}, &mut edit);
            }
        }
    }
    m
}

/// Every first-order mutant of `module`, sites in preorder and replacements
/// in operator-table order. Ids count from 0.
pub fn generate_mutants(module: &AstModule) -> Vec<Mutant> {
    let mut sites = Vec::new();
    for (_, f) in module.code_objects() {
        for s in &f.body {
            walk_stmt(s, &mut |_| {}, &mut |e| sites_of(e, &mut sites));
        }
    }
    sites
        .into_iter()
        .enumerate()
        .map(|(id, s)| Mutant {
            id,
            operator: s.operator,
            location: s.node,
            line: s.line,
            description: s.description,
            module: Arc::new(apply(module, s.node, s.replacement)),
        })
        .collect()
}
