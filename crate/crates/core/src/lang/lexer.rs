//! Indentation-aware tokenizer.

use super::ast::Span;
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    // keywords
    Def,
    Class,
    If,
    Elif,
    Else,
    While,
    Return,
    And,
    Or,
    Not,
    True,
    False,
    None,
    Use,
    As,
    Assert,
    Pass,
    // punctuation
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Arrow,
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Float(v) => format!("float `{v}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Newline => "end of line".to_string(),
            Tok::Indent => "indent".to_string(),
            Tok::Dedent => "dedent".to_string(),
            Tok::Eof => "end of file".to_string(),
            other => format!("`{}`", punct_text(other)),
        }
    }
}

fn punct_text(tok: &Tok) -> &'static str {
    match tok {
        Tok::Def => "def",
        Tok::Class => "class",
        Tok::If => "if",
        Tok::Elif => "elif",
        Tok::Else => "else",
        Tok::While => "while",
        Tok::Return => "return",
        Tok::And => "and",
        Tok::Or => "or",
        Tok::Not => "not",
        Tok::True => "True",
        Tok::False => "False",
        Tok::None => "None",
        Tok::Use => "use",
        Tok::As => "as",
        Tok::Assert => "assert",
        Tok::Pass => "pass",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Percent => "%",
        Tok::EqEq => "==",
        Tok::NotEq => "!=",
        Tok::Lt => "<",
        Tok::LtE => "<=",
        Tok::Gt => ">",
        Tok::GtE => ">=",
        Tok::Assign => "=",
        Tok::PlusAssign => "+=",
        Tok::MinusAssign => "-=",
        Tok::StarAssign => "*=",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Comma => ",",
        Tok::Colon => ":",
        Tok::Dot => ".",
        Tok::Arrow => "->",
        _ => "?",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "def" => Tok::Def,
        "class" => Tok::Class,
        "if" => Tok::If,
        "elif" => Tok::Elif,
        "else" => Tok::Else,
        "while" => Tok::While,
        "return" => Tok::Return,
        "and" => Tok::And,
        "or" => Tok::Or,
        "not" => Tok::Not,
        "True" => Tok::True,
        "False" => Tok::False,
        "None" => Tok::None,
        "use" => Tok::Use,
        "as" => Tok::As,
        "assert" => Tok::Assert,
        "pass" => Tok::Pass,
        _ => return None,
    })
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    indents: Vec<u32>,
    depth: u32,
    /// Where each still-open bracket starts.
    open: Vec<(u32, u32, char)>,
    out: Vec<Token>,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        indents: vec![0],
        depth: 0,
        open: Vec::new(),
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.line, self.col, message)
    }

    fn push(&mut self, tok: Tok, line: u32, col: u32) {
        let span = Span::new(line, col, self.line, self.col);
        self.out.push(Token { tok, span });
    }

    fn last_is_line_end(&self) -> bool {
        matches!(
            self.out.last().map(|t| &t.tok),
            None | Some(Tok::Newline) | Some(Tok::Indent) | Some(Tok::Dedent)
        )
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        let mut at_line_start = true;
        loop {
            if at_line_start && self.depth == 0 {
                // measure indentation of the next non-blank line
                let mut width = 0u32;
                while let Some(c) = self.peek() {
                    match c {
                        ' ' => {
                            width += 1;
                            self.bump();
                        }
                        '\t' => return Err(self.err("tab characters are not allowed in indentation")),
                        _ => break,
                    }
                }
                match self.peek() {
                    None => break,
                    Some('\n') => {
                        self.bump();
                        continue;
                    }
                    Some('\r') if self.peek_at(1) == Some('\n') => {
                        self.bump();
                        self.bump();
                        continue;
                    }
                    Some('#') => {
                        while let Some(c) = self.peek() {
                            if c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                        continue;
                    }
                    Some(_) => {}
                }
                let current = *self.indents.last().unwrap_or(&0);
                if width > current {
                    self.indents.push(width);
                    self.push(Tok::Indent, self.line, 1);
                } else if width < current {
                    while width < *self.indents.last().unwrap_or(&0) {
                        self.indents.pop();
                        self.push(Tok::Dedent, self.line, 1);
                    }
                    if width != *self.indents.last().unwrap_or(&0) {
                        return Err(self.err("unindent does not match any outer indentation level"));
                    }
                }
                at_line_start = false;
            }

            let Some(c) = self.peek() else { break };
            let (line, col) = (self.line, self.col);
            match c {
                '\n' => {
                    self.bump();
                    if self.depth == 0 {
                        if !self.last_is_line_end() {
                            self.push(Tok::Newline, line, col);
                        }
                        at_line_start = true;
                    }
                }
                '\r' => {
                    self.bump();
                }
                ' ' | '\t' => {
                    self.bump();
                }
                '#' => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '"' | '\'' => {
                    let s = self.string(c)?;
                    self.push(Tok::Str(s), line, col);
                }
                c if c.is_ascii_digit() => {
                    let tok = self.number()?;
                    self.push(tok, line, col);
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut word = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            word.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let tok = keyword(&word).unwrap_or(Tok::Name(word));
                    self.push(tok, line, col);
                }
                _ => {
                    let tok = self.punct()?;
                    self.push(tok, line, col);
                }
            }
        }
        if let Some(&(line, col, c)) = self.open.last() {
            return Err(SyntaxError::new(line, col, format!("`{c}` was never closed")));
        }
        if !self.last_is_line_end() {
            self.push(Tok::Newline, self.line, self.col);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent, self.line, self.col);
        }
        self.push(Tok::Eof, self.line, self.col);
        Ok(())
    }

    fn punct(&mut self) -> Result<Tok, SyntaxError> {
        let c = self.bump().unwrap_or('\0');
        let next = self.peek();
        let two = |lx: &mut Self, t: Tok| {
            lx.bump();
            t
        };
        Ok(match (c, next) {
            ('=', Some('=')) => two(self, Tok::EqEq),
            ('!', Some('=')) => two(self, Tok::NotEq),
            ('<', Some('=')) => two(self, Tok::LtE),
            ('>', Some('=')) => two(self, Tok::GtE),
            ('-', Some('>')) => two(self, Tok::Arrow),
            ('+', Some('=')) => two(self, Tok::PlusAssign),
            ('-', Some('=')) => two(self, Tok::MinusAssign),
            ('*', Some('=')) => two(self, Tok::StarAssign),
            ('=', _) => Tok::Assign,
            ('<', _) => Tok::Lt,
            ('>', _) => Tok::Gt,
            ('+', _) => Tok::Plus,
            ('-', _) => Tok::Minus,
            ('*', _) => Tok::Star,
            ('/', _) => Tok::Slash,
            ('%', _) => Tok::Percent,
            ('(', _) => {
                self.depth += 1;
                self.open.push((self.line, self.col - 1, c));
                Tok::LParen
            }
            ('[', _) => {
                self.depth += 1;
                self.open.push((self.line, self.col - 1, c));
                Tok::LBracket
            }
            (')', _) | (']', _) => {
                if self.depth == 0 {
                    return Err(SyntaxError::new(self.line, self.col - 1, format!("unmatched `{c}`")));
                }
                self.depth -= 1;
                self.open.pop();
                if c == ')' {
                    Tok::RParen
                } else {
                    Tok::RBracket
                }
            }
            (',', _) => Tok::Comma,
            (':', _) => Tok::Colon,
            ('.', _) => Tok::Dot,
            _ => {
                return Err(SyntaxError::new(
                    self.line,
                    self.col - 1,
                    format!("unexpected character `{c}`"),
                ))
            }
        })
    }

    fn number(&mut self) -> Result<Tok, SyntaxError> {
        let (line, col) = (self.line, self.col);
        let mut text = String::new();
        let mut is_float = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '_' {
                if c != '_' {
                    text.push(c);
                }
                self.bump();
            } else {
                break;
            }
        }
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            text.push('.');
            self.bump();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let sign = matches!(self.peek_at(1), Some('+') | Some('-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                text.push('e');
                self.bump();
                if sign {
                    text.push(self.bump().unwrap_or('+'));
                }
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
        }
        if is_float {
            text.parse::<f64>()
                .map(Tok::Float)
                .map_err(|_| SyntaxError::new(line, col, format!("invalid float literal `{text}`")))
        } else {
            text.parse::<i64>()
                .map(Tok::Int)
                .map_err(|_| SyntaxError::new(line, col, format!("integer literal `{text}` is too large")))
        }
    }

    fn string(&mut self, quote: char) -> Result<String, SyntaxError> {
        let (line, col) = (self.line, self.col);
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(SyntaxError::new(line, col, "unterminated string literal")),
                Some(c) if c == quote => break,
                Some('\\') => {
                    let esc = self
                        .bump()
                        .ok_or_else(|| SyntaxError::new(line, col, "unterminated string literal"))?;
                    match esc {
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        '0' => out.push('\0'),
                        '\\' => out.push('\\'),
                        '"' => out.push('"'),
                        '\'' => out.push('\''),
                        'x' => {
                            let hi = self.bump().and_then(|c| c.to_digit(16));
                            let lo = self.bump().and_then(|c| c.to_digit(16));
                            match (hi, lo) {
                                (Some(hi), Some(lo)) => out.push(char::from_u32(hi * 16 + lo).unwrap_or('?')),
                                _ => return Err(self.err("invalid \\x escape")),
                            }
                        }
                        other => return Err(self.err(format!("unknown escape `\\{other}`"))),
                    }
                }
                Some(c) => out.push(c),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn indentation_produces_indent_and_dedent() {
        let toks = kinds("def f():\n    return 1\n");
        assert!(toks.contains(&Tok::Indent));
        assert!(toks.contains(&Tok::Dedent));
        assert_eq!(toks.last(), Some(&Tok::Eof));
    }

    #[test]
    fn brackets_join_lines() {
        let toks = kinds("x = [1,\n  2]\n");
        let newlines = toks.iter().filter(|t| **t == Tok::Newline).count();
        assert_eq!(newlines, 1);
    }

    #[test]
    fn numbers_and_floats() {
        assert_eq!(kinds("1e-6")[0], Tok::Float(1e-6));
        assert_eq!(kinds("2.5")[0], Tok::Float(2.5));
        assert_eq!(kinds("42")[0], Tok::Int(42));
        assert!(tokenize("99999999999999999999").is_err());
    }

    #[test]
    fn string_escapes() {
        assert_eq!(kinds(r#""a\"b\n""#)[0], Tok::Str("a\"b\n".into()));
        assert_eq!(kinds("'x'")[0], Tok::Str("x".into()));
        assert!(tokenize("\"open").is_err());
    }

    #[test]
    fn bad_dedent_is_located() {
        let err = tokenize("def f():\n    x = 1\n  y = 2\n").unwrap_err();
        assert_eq!(err.line, 3);
    }
}
