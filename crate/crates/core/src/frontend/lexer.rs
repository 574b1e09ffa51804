use std::fmt;

use crate::error::CompileError;

/// Source location of a token or node. `start..end` is a byte range into the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// Smallest span covering both `self` and `other`; line/column come from the earlier one.
    pub fn to(self, other: Span) -> Span {
        let (first, _) = if self.start <= other.start {
            (self, other)
        } else {
            (other, self)
        };
        Span {
            line: first.line,
            column: first.column,
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Class,
    Enum,
    Def,
    Sem,
    Let,
    By,
    True,
    False,
    None,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Keyword> {
        Some(match s {
            "class" => Keyword::Class,
            "enum" => Keyword::Enum,
            "def" => Keyword::Def,
            "sem" => Keyword::Sem,
            "let" => Keyword::Let,
            "by" => Keyword::By,
            "true" => Keyword::True,
            "false" => Keyword::False,
            "None" => Keyword::None,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Class => "class",
            Keyword::Enum => "enum",
            Keyword::Def => "def",
            Keyword::Sem => "sem",
            Keyword::Let => "let",
            Keyword::By => "by",
            Keyword::True => "true",
            Keyword::False => "false",
            Keyword::None => "None",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Punct {
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Eq,
    Dot,
    Arrow,
    /// Operator characters with no meaning at declaration level; only
    /// legal inside opaque function bodies.
    Other(char),
}

impl Punct {
    pub fn as_str(self) -> String {
        match self {
            Punct::LBrace => "{".into(),
            Punct::RBrace => "}".into(),
            Punct::LParen => "(".into(),
            Punct::RParen => ")".into(),
            Punct::LBracket => "[".into(),
            Punct::RBracket => "]".into(),
            Punct::Comma => ",".into(),
            Punct::Colon => ":".into(),
            Punct::Semi => ";".into(),
            Punct::Eq => "=".into(),
            Punct::Dot => ".".into(),
            Punct::Arrow => "->".into(),
            Punct::Other(c) => c.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident,
    /// Unescaped payload; the raw slice (with quotes and escapes) is in `Token::text`.
    Str(String),
    Int(i64),
    Float(f64),
    Punct(Punct),
    Eoi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Eoi => "end of input".to_string(),
            TokenKind::Str(_) => "string literal".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

const OPERATOR_CHARS: &str = "+-*/%<>!&|^~?@";

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn mark(&self) -> Span {
        Span {
            line: self.line,
            column: self.column,
            start: self.pos,
            end: self.pos,
        }
    }

    fn finish(&self, mut start: Span) -> Span {
        start.end = self.pos;
        start
    }
}

/// Tokenizes MTL source. The returned stream always ends with an `Eoi` token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, CompileError> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }

        let start = cur.mark();
        let kind = if c == '"' {
            lex_string(&mut cur, start)?
        } else if c.is_ascii_digit()
            || (c == '-' && cur.peek_second().is_some_and(|d| d.is_ascii_digit()))
        {
            lex_number(&mut cur, start)?
        } else if c.is_alphabetic() || c == '_' {
            while cur.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                cur.bump();
            }
            let word = &source[start.start..cur.pos];
            match Keyword::from_ident(word) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident,
            }
        } else {
            cur.bump();
            let punct = match c {
                '{' => Punct::LBrace,
                '}' => Punct::RBrace,
                '(' => Punct::LParen,
                ')' => Punct::RParen,
                '[' => Punct::LBracket,
                ']' => Punct::RBracket,
                ',' => Punct::Comma,
                ':' => Punct::Colon,
                ';' => Punct::Semi,
                '=' => Punct::Eq,
                '.' => Punct::Dot,
                '-' if cur.peek() == Some('>') => {
                    cur.bump();
                    Punct::Arrow
                }
                c if OPERATOR_CHARS.contains(c) => Punct::Other(c),
                c => {
                    return Err(CompileError::Lex {
                        message: format!("illegal character {c:?}"),
                        span: cur.finish(start),
                    })
                }
            };
            TokenKind::Punct(punct)
        };
        let span = cur.finish(start);
        tokens.push(Token {
            kind,
            text: source[span.start..span.end].to_string(),
            span,
        });
    }

    let end = cur.mark();
    tokens.push(Token {
        kind: TokenKind::Eoi,
        text: String::new(),
        span: end,
    });
    Ok(tokens)
}

fn lex_string(cur: &mut Cursor<'_>, start: Span) -> Result<TokenKind, CompileError> {
    cur.bump();
    let mut value = String::new();
    loop {
        let Some(c) = cur.bump() else {
            return Err(CompileError::Lex {
                message: "unterminated string literal".into(),
                span: cur.finish(start),
            });
        };
        match c {
            '"' => return Ok(TokenKind::Str(value)),
            '\\' => {
                let esc = cur.bump();
                match esc {
                    Some('"') => value.push('"'),
                    Some('\\') => value.push('\\'),
                    Some('n') => value.push('\n'),
                    Some('t') => value.push('\t'),
                    Some(other) => {
                        return Err(CompileError::Lex {
                            message: format!("unsupported escape sequence `\\{other}`"),
                            span: cur.finish(start),
                        })
                    }
                    None => {
                        return Err(CompileError::Lex {
                            message: "unterminated string literal".into(),
                            span: cur.finish(start),
                        })
                    }
                }
            }
            c => value.push(c),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>, start: Span) -> Result<TokenKind, CompileError> {
    if cur.peek() == Some('-') {
        cur.bump();
    }
    let digits = |cur: &mut Cursor<'_>| {
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
        }
    };
    digits(cur);
    let mut is_float = false;
    if cur.peek() == Some('.') && cur.peek_second().is_some_and(|c| c.is_ascii_digit()) {
        is_float = true;
        cur.bump();
        digits(cur);
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let save = (cur.pos, cur.line, cur.column);
        cur.bump();
        if matches!(cur.peek(), Some('+' | '-')) {
            cur.bump();
        }
        if cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            digits(cur);
        } else {
            (cur.pos, cur.line, cur.column) = save;
        }
    }
    let span = cur.finish(start);
    let text = &cur.src[span.start..span.end];
    let bad = |what: &str| CompileError::Lex {
        message: format!("invalid {what} literal `{text}`"),
        span,
    };
    if is_float {
        text.parse::<f64>()
            .map(TokenKind::Float)
            .map_err(|_| bad("float"))
    } else {
        text.parse::<i64>()
            .map(TokenKind::Int)
            .map_err(|_| bad("integer"))
    }
}
