//! MiniDyn: the small indentation-based, dynamically typed language that
//! modules under test are written in.
//!
//! The grammar covers functions with optional annotations, classes with
//! methods and attributes, `if`/`elif`/`else`, `while`, `return`, `assert`,
//! flat `use` directives and the usual arithmetic, comparison and boolean
//! operators.

pub mod ast;
mod lexer;
mod parser;
mod render;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ast::*;
pub use render::{format_float, quote_str, render_expr};

/// File extension of MiniDyn sources.
pub const EXTENSION: &str = "mdyn";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        SyntaxError {
            line,
            col,
            message: message.into(),
        }
    }
}

pub fn parse_module(src: &SourceModule) -> Result<AstModule, SyntaxError> {
    parser::parse_source(&src.text)
}

pub fn parse_str(text: &str) -> Result<AstModule, SyntaxError> {
    parser::parse_source(text)
}

pub fn render_source(m: &AstModule) -> String {
    render::render_module(m)
}

/// All branch predicates in preorder.
pub fn collect_predicates(m: &AstModule) -> Vec<PredicateId> {
    let mut out = Vec::new();
    for (_, f) in m.code_objects() {
        for s in &f.body {
            walk_stmt(
                s,
                &mut |s| match &s.kind {
                    StmtKind::If { predicate, elifs, .. } => {
                        out.push(*predicate);
                        // elif predicates are numbered right after the then-branch;
                        // sorted below
                        out.extend(elifs.iter().map(|e| e.predicate));
                    }
                    StmtKind::While { predicate, .. } => out.push(*predicate),
                    _ => {}
                },
                &mut |_| {},
            );
        }
    }
    out.sort();
    out
}

/// Lines holding at least one executable statement (or `elif` header).
pub fn collect_lines(m: &AstModule) -> BTreeSet<LineNo> {
    control_dependence(m).line_parent.keys().copied().collect()
}

/// Branch outcome a statement depends on: predicate plus required polarity.
pub type BranchRef = (PredicateId, bool);

/// Structural control dependence derived from block nesting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControlDependence {
    /// Innermost enclosing branch of every predicate.
    pub predicate_parent: BTreeMap<PredicateId, Option<BranchRef>>,
    /// Innermost enclosing branch of every executable line. When several
    /// statements share a line the outermost one wins.
    pub line_parent: BTreeMap<LineNo, Option<BranchRef>>,
    /// Qualified name of the code object each predicate lives in.
    pub predicate_owner: BTreeMap<PredicateId, String>,
    pub predicate_line: BTreeMap<PredicateId, LineNo>,
}

impl ControlDependence {
    /// Chain of enclosing branches, innermost first.
    pub fn predicate_ancestors(&self, p: PredicateId) -> Vec<BranchRef> {
        let mut out = Vec::new();
        let mut cur = self.predicate_parent.get(&p).copied().flatten();
        while let Some(b) = cur {
            out.push(b);
            cur = self.predicate_parent.get(&b.0).copied().flatten();
        }
        out
    }

    pub fn line_ancestors(&self, line: LineNo) -> Vec<BranchRef> {
        let mut out = Vec::new();
        let mut cur = self.line_parent.get(&line).copied().flatten();
        while let Some(b) = cur {
            out.push(b);
            cur = self.predicate_parent.get(&b.0).copied().flatten();
        }
        out
    }
}

pub fn control_dependence(m: &AstModule) -> ControlDependence {
    let mut cd = ControlDependence::default();
    for (qualname, f) in m.code_objects() {
        dependence_in_block(&f.body, None, &qualname, &mut cd);
    }
    cd
}

fn dependence_in_block(body: &[Stmt], parent: Option<BranchRef>, owner: &str, cd: &mut ControlDependence) {
    for s in body {
        cd.line_parent.entry(s.span.line).or_insert(parent);
        match &s.kind {
            StmtKind::If {
                predicate,
                then_body,
                elifs,
                else_body,
                ..
            } => {
                cd.predicate_parent.insert(*predicate, parent);
                cd.predicate_owner.insert(*predicate, owner.to_string());
                cd.predicate_line.insert(*predicate, s.span.line);
                dependence_in_block(then_body, Some((*predicate, true)), owner, cd);
                let mut previous = *predicate;
                for elif in elifs {
                    let elif_parent = Some((previous, false));
                    cd.line_parent.entry(elif.span.line).or_insert(elif_parent);
                    cd.predicate_parent.insert(elif.predicate, elif_parent);
                    cd.predicate_owner.insert(elif.predicate, owner.to_string());
                    cd.predicate_line.insert(elif.predicate, elif.span.line);
                    dependence_in_block(&elif.body, Some((elif.predicate, true)), owner, cd);
                    previous = elif.predicate;
                }
                dependence_in_block(else_body, Some((previous, false)), owner, cd);
            }
            StmtKind::While { predicate, body, .. } => {
                cd.predicate_parent.insert(*predicate, parent);
                cd.predicate_owner.insert(*predicate, owner.to_string());
                cd.predicate_line.insert(*predicate, s.span.line);
                dependence_in_block(body, Some((*predicate, true)), owner, cd);
            }
            _ => {}
        }
    }
}
