//! Tokenizer for session files and inline expression arguments.
//!
//! Tokens carry their 1-based line and column so every diagnostic can point
//! at the offending source position.  `#` starts a comment running to the
//! end of the line.  Identifiers are ASCII alphanumeric with `_` allowed
//! only as the jet separator (`u_3`).

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Arrow,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.pos];
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, CliError> {
    let mut lx = Lexer { chars: text.chars().collect(), pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(c) = lx.peek() {
        let (line, col) = (lx.line, lx.col);
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                lx.bump();
            }
            '#' => {
                while lx.peek().is_some_and(|c| c != '\n') {
                    lx.bump();
                }
            }
            '0'..='9' => {
                let mut s = String::new();
                while lx.peek().is_some_and(|c| c.is_ascii_digit()) {
                    s.push(lx.bump());
                }
                out.push(Token { tok: Tok::Number(s), line, col });
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while lx.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    s.push(lx.bump());
                }
                out.push(Token { tok: Tok::Ident(s), line, col });
            }
            '-' => {
                lx.bump();
                if lx.peek() == Some('>') {
                    lx.bump();
                    out.push(Token { tok: Tok::Arrow, line, col });
                } else {
                    out.push(Token { tok: Tok::Minus, line, col });
                }
            }
            _ => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    '=' => Tok::Eq,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    other => {
                        return Err(CliError::syntax(
                            line,
                            col,
                            format!("unexpected character `{other}`"),
                        ))
                    }
                };
                lx.bump();
                out.push(Token { tok, line, col });
            }
        }
    }
    Ok(out)
}
