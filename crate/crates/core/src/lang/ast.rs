//! Syntax tree for MiniDyn modules.
//!
//! Every statement and expression carries a [`NodeId`] assigned by a preorder
//! walk over the module, and every `if`/`elif`/`while` condition carries a
//! [`PredicateId`] assigned the same way. Both are a pure function of the
//! parsed structure, so they survive re-rendering and reparsing.

use std::fmt;

/// Identifier of a syntax node, unique within one module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

/// Identifier of a branch predicate (`if`, `elif` or `while` condition).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PredicateId(pub u32);

impl fmt::Display for PredicateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// 1-based source line.
pub type LineNo = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32, end_line: u32, end_col: u32) -> Self {
        Span {
            line,
            col,
            end_line,
            end_col,
        }
    }

    pub fn to(self, end: Span) -> Span {
        Span {
            line: self.line,
            col: self.col,
            end_line: end.end_line,
            end_col: end.end_col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A module as it sits on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceModule {
    pub name: String,
    pub path: std::path::PathBuf,
    pub text: String,
}

impl SourceModule {
    pub fn new(name: impl Into<String>, path: impl Into<std::path::PathBuf>, text: impl Into<String>) -> Self {
        SourceModule {
            name: name.into(),
            path: path.into(),
            text: text.into(),
        }
    }

    /// Wraps in-memory text, mostly for tests.
    pub fn from_text(name: impl Into<String>, text: impl Into<String>) -> Self {
        let name = name.into();
        let path = std::path::PathBuf::from(format!("{name}.mdyn"));
        SourceModule {
            name,
            path,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AstModule {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Use(UseDecl),
    Function(FunctionDef),
    Class(ClassDef),
}

/// `use <module>` imports every name of the module flat; `use <module> as
/// <alias>` binds the module itself under the alias.
#[derive(Debug, Clone, PartialEq)]
pub struct UseDecl {
    pub module: String,
    pub alias: Option<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub id: NodeId,
    pub name: String,
    pub params: Vec<Param>,
    pub return_annotation: Option<TypeAnnotation>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub annotation: Option<TypeAnnotation>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub id: NodeId,
    pub name: String,
    pub methods: Vec<FunctionDef>,
    pub span: Span,
}

impl ClassDef {
    pub fn method(&self, name: &str) -> Option<&FunctionDef> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeAnnotation {
    Int,
    Float,
    Str,
    Bool,
    None,
    List(Option<Box<TypeAnnotation>>),
    Class(String),
}

impl fmt::Display for TypeAnnotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeAnnotation::Int => f.write_str("int"),
            TypeAnnotation::Float => f.write_str("float"),
            TypeAnnotation::Str => f.write_str("str"),
            TypeAnnotation::Bool => f.write_str("bool"),
            TypeAnnotation::None => f.write_str("None"),
            TypeAnnotation::List(None) => f.write_str("list"),
            TypeAnnotation::List(Some(inner)) => write!(f, "list[{inner}]"),
            TypeAnnotation::Class(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: NodeId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    /// Target is a name, attribute or index expression.
    Assign { target: Expr, value: Expr },
    If {
        predicate: PredicateId,
        cond: Expr,
        then_body: Vec<Stmt>,
        elifs: Vec<ElifClause>,
        else_body: Vec<Stmt>,
    },
    While {
        predicate: PredicateId,
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Expr(Expr),
    Assert(Expr),
    Pass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElifClause {
    pub id: NodeId,
    pub predicate: PredicateId,
    pub cond: Expr,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: NodeId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    None,
    List(Vec<Expr>),
    Name(String),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// `a < b` has one entry in `rest`; `a == b == c` has two.
    Compare {
        first: Box<Expr>,
        rest: Vec<(CmpOp, Expr)>,
    },
    Logical {
        op: LogicOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Call {
        func: Box<Expr>,
        args: Vec<Expr>,
    },
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Index {
        value: Box<Expr>,
        index: Box<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub const ALL: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod];

    pub fn token(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [
        CmpOp::Eq,
        CmpOp::NotEq,
        CmpOp::Lt,
        CmpOp::LtE,
        CmpOp::Gt,
        CmpOp::GtE,
    ];

    pub fn token(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::NotEq => "!=",
            CmpOp::Lt => "<",
            CmpOp::LtE => "<=",
            CmpOp::Gt => ">",
            CmpOp::GtE => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicOp {
    And,
    Or,
}

impl LogicOp {
    pub fn token(self) -> &'static str {
        match self {
            LogicOp::And => "and",
            LogicOp::Or => "or",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Not,
    Neg,
}

impl AstModule {
    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.items.iter().filter_map(|item| match item {
            Item::Function(f) => Some(f),
            _ => None,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDef> {
        self.items.iter().filter_map(|item| match item {
            Item::Class(c) => Some(c),
            _ => None,
        })
    }

    pub fn uses(&self) -> impl Iterator<Item = &UseDecl> {
        self.items.iter().filter_map(|item| match item {
            Item::Use(u) => Some(u),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions().find(|f| f.name == name)
    }

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes().find(|c| c.name == name)
    }

    /// Every function body in source order, paired with its qualified name
    /// (`f` or `Class.method`).
    pub fn code_objects(&self) -> Vec<(String, &FunctionDef)> {
        let mut out = Vec::new();
        for item in &self.items {
            match item {
                Item::Function(f) => out.push((f.name.clone(), f)),
                Item::Class(c) => {
                    for m in &c.methods {
                        out.push((format!("{}.{}", c.name, m.name), m));
                    }
                }
                Item::Use(_) => {}
            }
        }
        out
    }

    /// Copy of the module with all spans zeroed, for structural comparison.
    pub fn without_spans(&self) -> AstModule {
        let mut copy = self.clone();
        for item in &mut copy.items {
            match item {
                Item::Use(u) => u.span = Span::default(),
                Item::Function(f) => clear_function_spans(f),
                Item::Class(c) => {
                    c.span = Span::default();
                    c.methods.iter_mut().for_each(clear_function_spans);
                }
            }
        }
        copy
    }

    /// Structural equality: same tree shape, names, literals and ids,
    /// regardless of source positions.
    pub fn structurally_eq(&self, other: &AstModule) -> bool {
        self.without_spans() == other.without_spans()
    }
}

fn clear_function_spans(f: &mut FunctionDef) {
    f.span = Span::default();
    for p in &mut f.params {
        p.span = Span::default();
    }
    for s in &mut f.body {
        walk_stmt_mut(
            s,
            &mut |s| {
                s.span = Span::default();
                if let StmtKind::If { elifs, .. } = &mut s.kind {
                    elifs.iter_mut().for_each(|e| e.span = Span::default());
                }
            },
            &mut |e| e.span = Span::default(),
        );
    }
}

/// Preorder walk over a statement and everything below it.
pub fn walk_stmt<'a>(
    stmt: &'a Stmt,
    on_stmt: &mut dyn FnMut(&'a Stmt),
    on_expr: &mut dyn FnMut(&'a Expr),
) {
    on_stmt(stmt);
    match &stmt.kind {
        StmtKind::Assign { target, value } => {
            walk_expr(target, on_expr);
            walk_expr(value, on_expr);
        }
        StmtKind::If {
            cond,
            then_body,
            elifs,
            else_body,
            ..
        } => {
            walk_expr(cond, on_expr);
            for s in then_body {
                walk_stmt(s, on_stmt, on_expr);
            }
            for elif in elifs {
                walk_expr(&elif.cond, on_expr);
                for s in &elif.body {
                    walk_stmt(s, on_stmt, on_expr);
                }
            }
            for s in else_body {
                walk_stmt(s, on_stmt, on_expr);
            }
        }
        StmtKind::While { cond, body, .. } => {
            walk_expr(cond, on_expr);
            for s in body {
                walk_stmt(s, on_stmt, on_expr);
            }
        }
        StmtKind::Return(Some(e)) | StmtKind::Expr(e) | StmtKind::Assert(e) => walk_expr(e, on_expr),
        StmtKind::Return(None) | StmtKind::Pass => {}
    }
}

pub fn walk_expr<'a>(expr: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
    f(expr);
    match &expr.kind {
        ExprKind::List(items) => items.iter().for_each(|e| walk_expr(e, f)),
        ExprKind::Binary { lhs, rhs, .. } | ExprKind::Logical { lhs, rhs, .. } => {
            walk_expr(lhs, f);
            walk_expr(rhs, f);
        }
        ExprKind::Compare { first, rest } => {
            walk_expr(first, f);
            rest.iter().for_each(|(_, e)| walk_expr(e, f));
        }
        ExprKind::Unary { operand, .. } => walk_expr(operand, f),
        ExprKind::Call { func, args } => {
            walk_expr(func, f);
            args.iter().for_each(|e| walk_expr(e, f));
        }
        ExprKind::Attribute { value, .. } => walk_expr(value, f),
        ExprKind::Index { value, index } => {
            walk_expr(value, f);
            walk_expr(index, f);
        }
        ExprKind::Int(_)
        | ExprKind::Float(_)
        | ExprKind::Str(_)
        | ExprKind::Bool(_)
        | ExprKind::None
        | ExprKind::Name(_) => {}
    }
}

pub fn walk_stmt_mut(stmt: &mut Stmt, on_stmt: &mut dyn FnMut(&mut Stmt), on_expr: &mut dyn FnMut(&mut Expr)) {
    on_stmt(stmt);
    match &mut stmt.kind {
        StmtKind::Assign { target, value } => {
            walk_expr_mut(target, on_expr);
            walk_expr_mut(value, on_expr);
        }
        StmtKind::If {
            cond,
            then_body,
            elifs,
            else_body,
            ..
        } => {
            walk_expr_mut(cond, on_expr);
            for s in then_body {
                walk_stmt_mut(s, on_stmt, on_expr);
            }
            for elif in elifs {
                walk_expr_mut(&mut elif.cond, on_expr);
                for s in &mut elif.body {
                    walk_stmt_mut(s, on_stmt, on_expr);
                }
            }
            for s in else_body {
                walk_stmt_mut(s, on_stmt, on_expr);
            }
        }
        StmtKind::While { cond, body, .. } => {
            walk_expr_mut(cond, on_expr);
            for s in body {
                walk_stmt_mut(s, on_stmt, on_expr);
            }
        }
        StmtKind::Return(Some(e)) | StmtKind::Expr(e) | StmtKind::Assert(e) => walk_expr_mut(e, on_expr),
        StmtKind::Return(None) | StmtKind::Pass => {}
    }
}

pub fn walk_expr_mut(expr: &mut Expr, f: &mut dyn FnMut(&mut Expr)) {
    f(expr);
    match &mut expr.kind {
        ExprKind::List(items) => items.iter_mut().for_each(|e| walk_expr_mut(e, f)),
        ExprKind::Binary { lhs, rhs, .. } | ExprKind::Logical { lhs, rhs, .. } => {
            walk_expr_mut(lhs, f);
            walk_expr_mut(rhs, f);
        }
        ExprKind::Compare { first, rest } => {
            walk_expr_mut(first, f);
            rest.iter_mut().for_each(|(_, e)| walk_expr_mut(e, f));
        }
        ExprKind::Unary { operand, .. } => walk_expr_mut(operand, f),
        ExprKind::Call { func, args } => {
            walk_expr_mut(func, f);
            args.iter_mut().for_each(|e| walk_expr_mut(e, f));
        }
        ExprKind::Attribute { value, .. } => walk_expr_mut(value, f),
        ExprKind::Index { value, index } => {
            walk_expr_mut(value, f);
            walk_expr_mut(index, f);
        }
        ExprKind::Int(_)
        | ExprKind::Float(_)
        | ExprKind::Str(_)
        | ExprKind::Bool(_)
        | ExprKind::None
        | ExprKind::Name(_) => {}
    }
}
