use std::fmt;

use super::ast::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Eq,
    Le,
    Star,
    Caret,
    At,
    DashDash,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer {n}"),
            Tok::Str(_) => f.write_str("string literal"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::At => f.write_str("`@`"),
            Tok::DashDash => f.write_str("`--`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
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

    fn span(&self) -> Span {
        Span { line: self.line, column: self.column }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '/' {
                let span = cur.span();
                cur.bump();
                if cur.peek() != Some('/') {
                    return Err(LexError { span, message: "unexpected character `/` (comments start with `//`)".into() });
                }
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let span = cur.span();
        let Some(c) = cur.bump() else {
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '@' => Tok::At,
            '<' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Le
                } else {
                    return Err(LexError { span, message: "unexpected `<` (did you mean `<=`?)".into() });
                }
            }
            '-' => match cur.peek() {
                Some('-') => {
                    cur.bump();
                    Tok::DashDash
                }
                Some('>') => {
                    cur.bump();
                    Tok::Arrow
                }
                _ => return Err(LexError { span, message: "unexpected `-` (expected `--` or `->`)".into() }),
            },
            '"' => {
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        None => return Err(LexError { span, message: "unterminated string literal".into() }),
                        Some('"') => break,
                        Some('\\') => match cur.bump() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            _ => {
                                return Err(LexError { span: cur.span(), message: "invalid escape in string literal".into() })
                            }
                        },
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    digits.push(d);
                    cur.bump();
                }
                if cur.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
                    return Err(LexError { span, message: format!("malformed number `{digits}...`") });
                }
                match digits.parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => return Err(LexError { span, message: format!("integer {digits} is too large") }),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(d) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    s.push(d);
                    cur.bump();
                }
                Tok::Ident(s)
            }
            other => {
                return Err(LexError { span, message: format!("unexpected character {other:?}") });
            }
        };
        out.push(Token { tok, span });
    }
}
