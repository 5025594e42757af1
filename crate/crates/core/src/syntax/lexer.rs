use std::fmt;

use super::ast::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // keywords
    Global,
    Meth,
    Provided,
    If,
    Else,
    While,
    Run,
    Return,
    Synch,
    High,
    Medium,
    Low,
    And,
    Or,
    // punctuation
    Assign,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Bang,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

pub const KEYWORDS: &[&str] = &[
    "global", "meth", "provided", "if", "else", "while", "run", "return", "synch", "high",
    "medium", "low", "and", "or",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "global" => Tok::Global,
        "meth" => Tok::Meth,
        "provided" => Tok::Provided,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "run" => Tok::Run,
        "return" => Tok::Return,
        "synch" => Tok::Synch,
        "high" => Tok::High,
        "medium" => Tok::Medium,
        "low" => Tok::Low,
        "and" => Tok::And,
        "or" => Tok::Or,
        _ => return None,
    })
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier '{name}'"),
            Tok::Int(v) => return write!(f, "integer '{v}'"),
            Tok::Eof => return f.write_str("end of input"),
            Tok::Global => "global",
            Tok::Meth => "meth",
            Tok::Provided => "provided",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Run => "run",
            Tok::Return => "return",
            Tok::Synch => "synch",
            Tok::High => "high",
            Tok::Medium => "medium",
            Tok::Low => "low",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Assign => ":=",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Bang => "!",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
        };
        write!(f, "'{s}'")
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits the whole source into tokens, ending with `Tok::Eof`.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lexer = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let token = lexer.next_token()?;
        let done = token.tok == Tok::Eof;
        out.push(token);
        if done {
            return Ok(out);
        }
    }
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

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek2() == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        self.skip_trivia();
        let span = Span::new(self.line, self.col);
        let Some(c) = self.bump() else {
            return Ok(Token {
                tok: Tok::Eof,
                span,
            });
        };
        let tok = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            ':' if self.peek() == Some('=') => {
                self.bump();
                Tok::Assign
            }
            '!' if self.peek() == Some('=') => {
                self.bump();
                Tok::NotEq
            }
            '!' => Tok::Bang,
            '=' if self.peek() == Some('=') => {
                self.bump();
                Tok::EqEq
            }
            '<' if self.peek() == Some('=') => {
                self.bump();
                Tok::Le
            }
            '<' => Tok::Lt,
            '>' if self.peek() == Some('=') => {
                self.bump();
                Tok::Ge
            }
            '>' => Tok::Gt,
            c if c.is_ascii_digit() => {
                let mut text = String::from(c);
                while let Some(d) = self.peek().filter(char::is_ascii_digit) {
                    text.push(d);
                    self.bump();
                }
                let value = text.parse::<i64>().map_err(|_| ParseError {
                    span,
                    expected: vec!["integer literal within 64-bit range".into()],
                    found: format!("'{text}'"),
                })?;
                Tok::Int(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::from(c);
                while let Some(d) = self
                    .peek()
                    .filter(|d| d.is_ascii_alphanumeric() || *d == '_')
                {
                    text.push(d);
                    self.bump();
                }
                keyword(&text).unwrap_or(Tok::Ident(text))
            }
            other => {
                return Err(ParseError {
                    span,
                    expected: vec!["a token".into()],
                    found: format!("character {other:?}"),
                })
            }
        };
        Ok(Token { tok, span })
    }
}
