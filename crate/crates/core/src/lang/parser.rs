//! Recursive-descent parser for MiniDyn.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

type PResult<T> = Result<T, SyntaxError>;

pub fn parse_source(text: &str) -> PResult<AstModule> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut module = parser.module()?;
    number_nodes(&mut module);
    Ok(module)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos.min(self.tokens.len() - 1)].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        let span = self.span();
        SyntaxError::new(
            span.line,
            span.col,
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Span> {
        if self.at(&tok) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn name(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Name(n) => {
                let span = self.advance().span;
                Ok((n, span))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn module(&mut self) -> PResult<AstModule> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Newline => {
                    self.advance();
                }
                Tok::Use => items.push(Item::Use(self.use_decl()?)),
                Tok::Def => items.push(Item::Function(self.function()?)),
                Tok::Class => items.push(Item::Class(self.class()?)),
                _ => return Err(self.unexpected("`def`, `class` or `use` at module level")),
            }
        }
        Ok(AstModule { items })
    }

    fn use_decl(&mut self) -> PResult<UseDecl> {
        let start = self.expect(Tok::Use, "`use`")?;
        let (module, _) = self.name()?;
        let alias = if self.eat(&Tok::As) { Some(self.name()?.0) } else { None };
        let span = start.to(self.prev_span());
        self.expect(Tok::Newline, "end of line")?;
        Ok(UseDecl { module, alias, span })
    }

    fn function(&mut self) -> PResult<FunctionDef> {
        let start = self.expect(Tok::Def, "`def`")?;
        let (name, _) = self.name()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params: Vec<Param> = Vec::new();
        while !self.at(&Tok::RParen) {
            let (pname, pspan) = self.name()?;
            if params.iter().any(|p| p.name == pname) {
                return Err(SyntaxError::new(
                    pspan.line,
                    pspan.col,
                    format!("duplicate parameter `{pname}`"),
                ));
            }
            let annotation = if self.eat(&Tok::Colon) {
                Some(self.annotation()?)
            } else {
                None
            };
            params.push(Param {
                name: pname,
                annotation,
                span: pspan.to(self.prev_span()),
            });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let return_annotation = if self.eat(&Tok::Arrow) {
            Some(self.annotation()?)
        } else {
            None
        };
        self.expect(Tok::Colon, "`:`")?;
        let body = self.block()?;
        Ok(FunctionDef {
            id: NodeId::default(),
            name,
            params,
            return_annotation,
            body,
            span: start.to(self.prev_span()),
        })
    }

    fn annotation(&mut self) -> PResult<TypeAnnotation> {
        if self.eat(&Tok::None) {
            return Ok(TypeAnnotation::None);
        }
        let (name, _) = self.name()?;
        Ok(match name.as_str() {
            "int" => TypeAnnotation::Int,
            "float" => TypeAnnotation::Float,
            "str" => TypeAnnotation::Str,
            "bool" => TypeAnnotation::Bool,
            "list" => {
                if self.eat(&Tok::LBracket) {
                    let inner = self.annotation()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    TypeAnnotation::List(Some(Box::new(inner)))
                } else {
                    TypeAnnotation::List(None)
                }
            }
            _ => TypeAnnotation::Class(name),
        })
    }

    fn class(&mut self) -> PResult<ClassDef> {
        let start = self.expect(Tok::Class, "`class`")?;
        let (name, _) = self.name()?;
        if self.eat(&Tok::LParen) {
            self.expect(Tok::RParen, "`)` (base classes are not supported)")?;
        }
        self.expect(Tok::Colon, "`:`")?;
        self.expect(Tok::Newline, "end of line")?;
        self.expect(Tok::Indent, "indented class body")?;
        let mut methods: Vec<FunctionDef> = Vec::new();
        loop {
            match self.peek() {
                Tok::Dedent => {
                    self.advance();
                    break;
                }
                Tok::Eof => break,
                Tok::Newline => {
                    self.advance();
                }
                Tok::Pass => {
                    self.advance();
                    self.expect(Tok::Newline, "end of line")?;
                }
                Tok::Def => {
                    let m = self.function()?;
                    if methods.iter().any(|other| other.name == m.name) {
                        return Err(SyntaxError::new(
                            m.span.line,
                            m.span.col,
                            format!("duplicate method `{}`", m.name),
                        ));
                    }
                    methods.push(m);
                }
                _ => return Err(self.unexpected("method definition or `pass` in class body")),
            }
        }
        Ok(ClassDef {
            id: NodeId::default(),
            name,
            methods,
            span: start.to(self.prev_span()),
        })
    }

    /// Either an indented suite or a single simple statement on the same line.
    fn block(&mut self) -> PResult<Vec<Stmt>> {
        if self.eat(&Tok::Newline) {
            self.expect(Tok::Indent, "indented block")?;
            let mut body = Vec::new();
            loop {
                match self.peek() {
                    Tok::Dedent => {
                        self.advance();
                        break;
                    }
                    Tok::Eof => break,
                    Tok::Newline => {
                        self.advance();
                    }
                    _ => body.push(self.statement()?),
                }
            }
            if body.is_empty() {
                return Err(self.unexpected("statement"));
            }
            Ok(body)
        } else {
            let stmt = self.simple_statement()?;
            Ok(vec![stmt])
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        match self.peek() {
            Tok::If => self.if_statement(),
            Tok::While => {
                let start = self.advance().span;
                let cond = self.expr()?;
                self.expect(Tok::Colon, "`:`")?;
                let header = start.to(self.prev_span());
                let body = self.block()?;
                Ok(Stmt {
                    id: NodeId::default(),
                    span: header,
                    kind: StmtKind::While {
                        predicate: PredicateId::default(),
                        cond,
                        body,
                    },
                })
            }
            Tok::Def | Tok::Class => Err(self.unexpected("statement (nested definitions are not supported)")),
            _ => self.simple_statement(),
        }
    }

    fn if_statement(&mut self) -> PResult<Stmt> {
        let start = self.expect(Tok::If, "`if`")?;
        let cond = self.expr()?;
        self.expect(Tok::Colon, "`:`")?;
        let header = start.to(self.prev_span());
        let then_body = self.block()?;
        let mut elifs = Vec::new();
        let mut else_body = Vec::new();
        loop {
            if self.at(&Tok::Elif) {
                let estart = self.advance().span;
                let econd = self.expr()?;
                self.expect(Tok::Colon, "`:`")?;
                let espan = estart.to(self.prev_span());
                let body = self.block()?;
                elifs.push(ElifClause {
                    id: NodeId::default(),
                    predicate: PredicateId::default(),
                    cond: econd,
                    body,
                    span: espan,
                });
            } else if self.at(&Tok::Else) {
                self.advance();
                self.expect(Tok::Colon, "`:`")?;
                else_body = self.block()?;
                break;
            } else {
                break;
            }
        }
        Ok(Stmt {
            id: NodeId::default(),
            span: header,
            kind: StmtKind::If {
                predicate: PredicateId::default(),
                cond,
                then_body,
                elifs,
                else_body,
            },
        })
    }

    fn simple_statement(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek() {
            Tok::Return => {
                self.advance();
                if self.at(&Tok::Newline) {
                    StmtKind::Return(None)
                } else {
                    StmtKind::Return(Some(self.expr()?))
                }
            }
            Tok::Pass => {
                self.advance();
                StmtKind::Pass
            }
            Tok::Assert => {
                self.advance();
                StmtKind::Assert(self.expr()?)
            }
            _ => {
                let lhs = self.expr()?;
                let aug = match self.peek() {
                    Tok::Assign => None,
                    Tok::PlusAssign => Some(BinOp::Add),
                    Tok::MinusAssign => Some(BinOp::Sub),
                    Tok::StarAssign => Some(BinOp::Mul),
                    _ => {
                        let span = start.to(self.prev_span());
                        self.expect(Tok::Newline, "end of line")?;
                        return Ok(Stmt {
                            id: NodeId::default(),
                            span,
                            kind: StmtKind::Expr(lhs),
                        });
                    }
                };
                let op_span = self.advance().span;
                if !matches!(
                    lhs.kind,
                    ExprKind::Name(_) | ExprKind::Attribute { .. } | ExprKind::Index { .. }
                ) {
                    return Err(SyntaxError::new(op_span.line, op_span.col, "cannot assign to expression"));
                }
                let rhs = self.expr()?;
                let value = match aug {
                    None => rhs,
                    // `x += e` is sugar for `x = x + e`
                    Some(op) => {
                        let span = lhs.span.to(rhs.span);
                        Expr {
                            id: NodeId::default(),
                            span,
                            kind: ExprKind::Binary {
                                op,
                                lhs: Box::new(lhs.clone()),
                                rhs: Box::new(rhs),
                            },
                        }
                    }
                };
                StmtKind::Assign { target: lhs, value }
            }
        };
        let span = start.to(self.prev_span());
        self.expect(Tok::Newline, "end of line")?;
        Ok(Stmt {
            id: NodeId::default(),
            span,
            kind,
        })
    }

    fn mk(&self, start: Span, kind: ExprKind) -> Expr {
        Expr {
            id: NodeId::default(),
            span: start.to(self.prev_span()),
            kind,
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.and_expr()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and_expr()?;
            lhs = self.mk(
                start,
                ExprKind::Logical {
                    op: LogicOp::Or,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.not_expr()?;
        while self.eat(&Tok::And) {
            let rhs = self.not_expr()?;
            lhs = self.mk(
                start,
                ExprKind::Logical {
                    op: LogicOp::And,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.eat(&Tok::Not) {
            let operand = self.not_expr()?;
            return Ok(self.mk(
                start,
                ExprKind::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
            ));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let start = self.span();
        let first = self.arith()?;
        let mut rest = Vec::new();
        loop {
            let op = match self.peek() {
                Tok::EqEq => CmpOp::Eq,
                Tok::NotEq => CmpOp::NotEq,
                Tok::Lt => CmpOp::Lt,
                Tok::LtE => CmpOp::LtE,
                Tok::Gt => CmpOp::Gt,
                Tok::GtE => CmpOp::GtE,
                _ => break,
            };
            self.advance();
            rest.push((op, self.arith()?));
        }
        if rest.is_empty() {
            Ok(first)
        } else {
            Ok(self.mk(
                start,
                ExprKind::Compare {
                    first: Box::new(first),
                    rest,
                },
            ))
        }
    }

    fn arith(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.term()?;
            lhs = self.mk(
                start,
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn term(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => break,
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = self.mk(
                start,
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.eat(&Tok::Minus) {
            let operand = self.unary()?;
            // negative numeric literals are folded into the literal itself
            let folded = match operand.kind {
                ExprKind::Int(v) => v.checked_neg().map(ExprKind::Int),
                ExprKind::Float(v) => Some(ExprKind::Float(-v)),
                _ => None,
            };
            return Ok(match folded {
                Some(kind) => self.mk(start, kind),
                None => self.mk(
                    start,
                    ExprKind::Unary {
                        op: UnaryOp::Neg,
                        operand: Box::new(operand),
                    },
                ),
            });
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut expr = self.atom()?;
        loop {
            match self.peek() {
                Tok::LParen => {
                    self.advance();
                    let mut args = Vec::new();
                    while !self.at(&Tok::RParen) {
                        args.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    expr = self.mk(
                        start,
                        ExprKind::Call {
                            func: Box::new(expr),
                            args,
                        },
                    );
                }
                Tok::Dot => {
                    self.advance();
                    let (attr, _) = self.name()?;
                    expr = self.mk(
                        start,
                        ExprKind::Attribute {
                            value: Box::new(expr),
                            attr,
                        },
                    );
                }
                Tok::LBracket => {
                    self.advance();
                    let index = self.expr()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    expr = self.mk(
                        start,
                        ExprKind::Index {
                            value: Box::new(expr),
                            index: Box::new(index),
                        },
                    );
                }
                _ => break,
            }
        }
        Ok(expr)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                ExprKind::Int(v)
            }
            Tok::Float(v) => {
                self.advance();
                ExprKind::Float(v)
            }
            Tok::Str(s) => {
                self.advance();
                ExprKind::Str(s)
            }
            Tok::True => {
                self.advance();
                ExprKind::Bool(true)
            }
            Tok::False => {
                self.advance();
                ExprKind::Bool(false)
            }
            Tok::None => {
                self.advance();
                ExprKind::None
            }
            Tok::Name(n) => {
                self.advance();
                ExprKind::Name(n)
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(inner);
            }
            Tok::LBracket => {
                self.advance();
                let mut items = Vec::new();
                while !self.at(&Tok::RBracket) {
                    items.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                ExprKind::List(items)
            }
            _ => return Err(self.unexpected("expression")),
        };
        Ok(self.mk(start, kind))
    }
}

/// Assigns node and predicate ids in preorder.
pub(crate) fn number_nodes(module: &mut AstModule) {
    let mut counter = Counter::default();
    for item in &mut module.items {
        match item {
            Item::Use(_) => {}
            Item::Function(f) => number_function(f, &mut counter),
            Item::Class(c) => {
                c.id = counter.node();
                for m in &mut c.methods {
                    number_function(m, &mut counter);
                }
            }
        }
    }
}

#[derive(Default)]
struct Counter {
    nodes: u32,
    predicates: u32,
}

impl Counter {
    fn node(&mut self) -> NodeId {
        let id = NodeId(self.nodes);
        self.nodes += 1;
        id
    }

    fn predicate(&mut self) -> PredicateId {
        let id = PredicateId(self.predicates);
        self.predicates += 1;
        id
    }
}

fn number_function(f: &mut FunctionDef, c: &mut Counter) {
    f.id = c.node();
    for s in &mut f.body {
        number_stmt(s, c);
    }
}

fn number_stmt(s: &mut Stmt, c: &mut Counter) {
    s.id = c.node();
    match &mut s.kind {
        StmtKind::Assign { target, value } => {
            number_expr(target, c);
            number_expr(value, c);
        }
        StmtKind::If {
            predicate,
            cond,
            then_body,
            elifs,
            else_body,
        } => {
            *predicate = c.predicate();
            number_expr(cond, c);
            then_body.iter_mut().for_each(|s| number_stmt(s, c));
            for elif in elifs {
                elif.id = c.node();
                elif.predicate = c.predicate();
                number_expr(&mut elif.cond, c);
                elif.body.iter_mut().for_each(|s| number_stmt(s, c));
            }
            else_body.iter_mut().for_each(|s| number_stmt(s, c));
        }
        StmtKind::While { predicate, cond, body } => {
            *predicate = c.predicate();
            number_expr(cond, c);
            body.iter_mut().for_each(|s| number_stmt(s, c));
        }
        StmtKind::Return(Some(e)) | StmtKind::Expr(e) | StmtKind::Assert(e) => number_expr(e, c),
        StmtKind::Return(None) | StmtKind::Pass => {}
    }
}

fn number_expr(e: &mut Expr, c: &mut Counter) {
    walk_expr_mut(e, &mut |e| e.id = c.node());
}
