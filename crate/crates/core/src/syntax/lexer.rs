//! Tokenizer for `.ospec` source text.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(i64),
    /// `name?`, stored without the question mark.
    Var(String),
    Anonymous,
    // keywords
    Package,
    Import,
    New,
    Exe,
    Return,
    Not,
    Minimize,
    // punctuation
    If,
    Dot,
    Comma,
    Colon,
    Semicolon,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Star,
    // operators
    EqEq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    Assign,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Token::Ident(s) => return write!(f, "identifier `{s}`"),
            Token::Int(n) => return write!(f, "integer `{n}`"),
            Token::Var(v) => return write!(f, "variable `{v}?`"),
            Token::Anonymous => "_",
            Token::Package => "package",
            Token::Import => "import",
            Token::New => "new",
            Token::Exe => "exe",
            Token::Return => "return",
            Token::Not => "not",
            Token::Minimize => "#minimize",
            Token::If => ":-",
            Token::Dot => ".",
            Token::Comma => ",",
            Token::Colon => ":",
            Token::Semicolon => ";",
            Token::LBrace => "{",
            Token::RBrace => "}",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::LBracket => "[",
            Token::RBracket => "]",
            Token::Star => "*",
            Token::EqEq => "==",
            Token::Ne => "!=",
            Token::Lt => "<",
            Token::Gt => ">",
            Token::Le => "<=",
            Token::Ge => ">=",
            Token::Plus => "+",
            Token::Minus => "-",
            Token::Assign => "=",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub token: Token,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lexical error at {pos}: {message}")]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

fn keyword(word: &str) -> Option<Token> {
    Some(match word {
        "package" => Token::Package,
        "import" => Token::Import,
        "new" => Token::New,
        "exe" => Token::Exe,
        "return" => Token::Return,
        "not" => Token::Not,
        _ => return None,
    })
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source text into tokens. `%` starts a comment running to end of line.
pub fn tokenize(source: &str) -> Result<Vec<Spanned>, LexError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let (token, len) = if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_continue(chars[j]) {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            if chars.get(j) == Some(&'?') {
                (Token::Var(word), j - i + 1)
            } else if let Some(kw) = keyword(&word) {
                (kw, j - i)
            } else {
                (Token::Ident(word), j - i)
            }
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            let value = digits.parse::<i64>().map_err(|_| LexError {
                pos,
                message: format!("integer literal `{digits}` out of range"),
            })?;
            (Token::Int(value), j - i)
        } else if c == '_' {
            if peek.is_some_and(is_ident_continue) {
                return Err(LexError {
                    pos,
                    message: "identifiers may not start with `_`".into(),
                });
            }
            (Token::Anonymous, 1)
        } else if c == '#' {
            let rest: String = chars[i..].iter().take(9).collect();
            if rest == "#minimize" && !chars.get(i + 9).copied().is_some_and(is_ident_continue) {
                (Token::Minimize, 9)
            } else {
                return Err(LexError {
                    pos,
                    message: "unknown directive; only `#minimize` is supported".into(),
                });
            }
        } else {
            match (c, peek) {
                (':', Some('-')) => (Token::If, 2),
                ('=', Some('=')) => (Token::EqEq, 2),
                ('!', Some('=')) => (Token::Ne, 2),
                ('<', Some('=')) => (Token::Le, 2),
                ('>', Some('=')) => (Token::Ge, 2),
                ('.', _) => (Token::Dot, 1),
                (',', _) => (Token::Comma, 1),
                (':', _) => (Token::Colon, 1),
                (';', _) => (Token::Semicolon, 1),
                ('{', _) => (Token::LBrace, 1),
                ('}', _) => (Token::RBrace, 1),
                ('(', _) => (Token::LParen, 1),
                (')', _) => (Token::RParen, 1),
                ('[', _) => (Token::LBracket, 1),
                (']', _) => (Token::RBracket, 1),
                ('*', _) => (Token::Star, 1),
                ('<', _) => (Token::Lt, 1),
                ('>', _) => (Token::Gt, 1),
                ('+', _) => (Token::Plus, 1),
                ('-', _) => (Token::Minus, 1),
                ('=', _) => (Token::Assign, 1),
                _ => {
                    return Err(LexError {
                        pos,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        tokens.push(Spanned { token, pos });
        advance!(len);
    }
    Ok(tokens)
}
