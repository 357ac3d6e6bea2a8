use std::fmt;

use super::error::{CypherError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Backquoted identifier; never a keyword.
    QuotedIdent(String),
    Str(String),
    Int(i64),
    Float(f64),
    Param(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Dot,
    DotDot,
    Star,
    Minus,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    Semicolon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::QuotedIdent(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "'{s}'"),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Float(x) => write!(f, "{x}"),
            Tok::Param(p) => write!(f, "${p}"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBracket => f.write_str("'['"),
            Tok::RBracket => f.write_str("']'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Colon => f.write_str("':'"),
            Tok::Comma => f.write_str("','"),
            Tok::Dot => f.write_str("'.'"),
            Tok::DotDot => f.write_str("'..'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Lt => f.write_str("'<'"),
            Tok::Gt => f.write_str("'>'"),
            Tok::Le => f.write_str("'<='"),
            Tok::Ge => f.write_str("'>='"),
            Tok::Eq => f.write_str("'='"),
            Tok::Ne => f.write_str("'<>'"),
            Tok::Semicolon => f.write_str("';'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }
}

fn lex_error(pos: Pos, message: impl Into<String>) -> CypherError {
    CypherError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
        expected: Vec::new(),
    }
}

/// Splits query text into tokens. `--` and `//` start line comments.
pub fn tokenize(text: &str) -> Result<Vec<Token>, CypherError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if (c == '-' && cur.peek2() == Some('-')) || (c == '/' && cur.peek2() == Some('/')) {
            cur.skip_line();
            continue;
        }
        let pos = cur.pos();
        let tok = match c {
            '(' | ')' | '[' | ']' | '{' | '}' | ':' | ',' | '*' | '-' | '=' | ';' => {
                cur.bump();
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    '*' => Tok::Star,
                    '-' => Tok::Minus,
                    '=' => Tok::Eq,
                    _ => Tok::Semicolon,
                }
            }
            '.' => {
                cur.bump();
                if cur.peek() == Some('.') {
                    cur.bump();
                    Tok::DotDot
                } else {
                    Tok::Dot
                }
            }
            '<' => {
                cur.bump();
                match cur.peek() {
                    Some('=') => {
                        cur.bump();
                        Tok::Le
                    }
                    Some('>') => {
                        cur.bump();
                        Tok::Ne
                    }
                    _ => Tok::Lt,
                }
            }
            '>' => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '\'' => {
                cur.bump();
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        None => return Err(lex_error(pos, "unterminated string literal")),
                        Some('\'') => break,
                        Some('\\') => match cur.bump() {
                            Some('\'') => s.push('\''),
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(other) => {
                                return Err(lex_error(cur.pos(), format!("unknown escape `\\{other}`")))
                            }
                            None => return Err(lex_error(pos, "unterminated string literal")),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                Tok::Str(s)
            }
            '$' => {
                cur.bump();
                let name = take_ident(&mut cur);
                if name.is_empty() {
                    return Err(lex_error(pos, "expected a parameter name after `$`"));
                }
                Tok::Param(name)
            }
            c if c.is_ascii_digit() => lex_number(&mut cur, pos)?,
            c if c.is_alphabetic() || c == '_' => Tok::Ident(take_ident(&mut cur)),
            '`' => {
                cur.bump();
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        None => return Err(lex_error(pos, "unterminated quoted identifier")),
                        Some('`') => break,
                        Some(ch) => s.push(ch),
                    }
                }
                Tok::QuotedIdent(s)
            }
            other => return Err(lex_error(pos, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: cur.pos(),
    });
    Ok(out)
}

fn take_ident(cur: &mut Cursor<'_>) -> String {
    let mut s = String::new();
    while let Some(c) = cur.peek() {
        if c.is_alphanumeric() || c == '_' {
            s.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    s
}

fn lex_number(cur: &mut Cursor<'_>, pos: Pos) -> Result<Tok, CypherError> {
    let mut s = String::new();
    while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
        s.push(c);
        cur.bump();
    }
    let mut is_float = false;
    if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
        is_float = true;
        s.push('.');
        cur.bump();
        while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
            s.push(c);
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let mut look = cur.chars.clone();
        look.next();
        let mut next = look.next();
        if matches!(next, Some('+' | '-')) {
            next = look.next();
        }
        if next.is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            s.push('e');
            cur.bump();
            if let Some(sign @ ('+' | '-')) = cur.peek() {
                s.push(sign);
                cur.bump();
            }
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                s.push(c);
                cur.bump();
            }
        }
    }
    if is_float {
        s.parse::<f64>()
            .map(Tok::Float)
            .map_err(|_| lex_error(pos, format!("invalid number `{s}`")))
    } else {
        s.parse::<i64>()
            .map(Tok::Int)
            .map_err(|_| lex_error(pos, format!("integer `{s}` out of range")))
    }
}
