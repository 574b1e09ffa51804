//! Parsing model output back into typed values.

use std::collections::BTreeMap;

use thiserror::Error;

use super::value::{conform, RuntimeValue, TypeError};
use crate::frontend::TypeExpr;
use crate::mtir::MtIrStar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at offset {offset}: {message}")]
pub struct ParseError {
    pub message: String,
    /// Byte offset into the response after framing was stripped.
    pub offset: usize,
}

/// Malformed text and well-formed-but-mistyped values are kept apart so a
/// driver can word its retry accordingly.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResponseError {
    #[error("malformed response {0}")]
    Parse(#[from] ParseError),
    #[error("response has wrong type at {0}")]
    Type(#[from] TypeError),
}

/// Removes surrounding whitespace, code fences and echoed `[Output]` / `<result>` markers.
pub fn strip_framing(text: &str) -> &str {
    let mut s = text.trim();
    loop {
        let before = s;
        if let Some(rest) = s.strip_prefix("```") {
            // Drop the info string (```python) along with the fence.
            s = match rest.find('\n') {
                Some(nl) => &rest[nl + 1..],
                None => rest,
            };
            s = s.trim_end();
            s = s.strip_suffix("```").unwrap_or(s);
        }
        s = s.trim();
        for marker in ["[Output]", "<result>"] {
            s = s.strip_prefix(marker).unwrap_or(s).trim();
        }
        s = s.strip_suffix("</result>").unwrap_or(s).trim();
        if s == before {
            return s;
        }
    }
}

/// Parses a value literal without type information.
pub fn parse_value(text: &str) -> Result<RuntimeValue, ParseError> {
    let mut p = LiteralParser { src: text, pos: 0 };
    p.skip_ws();
    let v = p.value(0)?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("trailing characters after value"));
    }
    Ok(v)
}

/// Strips framing, parses the literal and checks it against `expected`.
pub fn parse_response(
    text: &str,
    expected: &TypeExpr,
    ir: &MtIrStar,
) -> Result<RuntimeValue, ResponseError> {
    let value = parse_value(strip_framing(text))?;
    Ok(conform(value, expected, ir, "")?)
}

const MAX_DEPTH: usize = 128;

struct LiteralParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> LiteralParser<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            message: message.into(),
            offset: self.pos,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    /// Comma-separated items up to `close`, allowing a trailing comma.
    fn sequence(
        &mut self,
        close: char,
        mut item: impl FnMut(&mut Self) -> Result<(), ParseError>,
    ) -> Result<(), ParseError> {
        if self.eat(close) {
            return Ok(());
        }
        loop {
            item(self)?;
            if self.eat(close) {
                return Ok(());
            }
            self.expect(',')?;
            if self.eat(close) {
                return Ok(());
            }
        }
    }

    fn value(&mut self, depth: usize) -> Result<RuntimeValue, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.error("value nested too deeply"));
        }
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("expected a value, found end of input")),
            Some('\'' | '"') => self.string().map(RuntimeValue::Str),
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                self.sequence(']', |p| {
                    items.push(p.value(depth + 1)?);
                    Ok(())
                })?;
                Ok(RuntimeValue::List(items))
            }
            Some('{') => {
                self.pos += 1;
                let mut map = BTreeMap::new();
                self.sequence('}', |p| {
                    p.skip_ws();
                    let at = p.pos;
                    if !matches!(p.peek(), Some('\'' | '"')) {
                        return Err(p.error("dict keys must be strings"));
                    }
                    let key = p.string()?;
                    p.expect(':')?;
                    let v = p.value(depth + 1)?;
                    if map.insert(key.clone(), v).is_some() {
                        return Err(ParseError {
                            message: format!("duplicate dict key {key:?}"),
                            offset: at,
                        });
                    }
                    Ok(())
                })?;
                Ok(RuntimeValue::Dict(map))
            }
            Some(c) if c == '-' || c == '+' || c.is_ascii_digit() => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => self.word(depth),
            Some(c) => Err(self.error(format!("unexpected character {c:?}"))),
        }
    }

    fn ident(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 || rest.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(self.error("expected an identifier"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn word(&mut self, depth: usize) -> Result<RuntimeValue, ParseError> {
        let start = self.pos;
        let name = self.ident()?;
        // Only `(` or `.` directly after the name continue it.
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let mut fields: Vec<(String, RuntimeValue)> = Vec::new();
                self.sequence(')', |p| {
                    let at = p.pos;
                    let field = p.ident()?.to_string();
                    p.expect('=')?;
                    let v = p.value(depth + 1)?;
                    if fields.iter().any(|(k, _)| *k == field) {
                        return Err(ParseError {
                            message: format!("duplicate field `{field}`"),
                            offset: at,
                        });
                    }
                    fields.push((field, v));
                    Ok(())
                })?;
                Ok(RuntimeValue::Object {
                    class: name.to_string(),
                    fields,
                })
            }
            Some('.') => {
                self.pos += 1;
                let variant = self.ident()?;
                Ok(RuntimeValue::EnumVariant {
                    enum_name: name.to_string(),
                    variant: variant.to_string(),
                })
            }
            _ => match name {
                "True" | "true" => Ok(RuntimeValue::Bool(true)),
                "False" | "false" => Ok(RuntimeValue::Bool(false)),
                "None" | "null" => Ok(RuntimeValue::None),
                "inf" => Ok(RuntimeValue::Float(f64::INFINITY)),
                "nan" => Ok(RuntimeValue::Float(f64::NAN)),
                _ => Err(ParseError {
                    message: format!("bare identifier `{name}` is not a value"),
                    offset: start,
                }),
            },
        }
    }

    fn number(&mut self) -> Result<RuntimeValue, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        if matches!(bytes.get(i), Some(b'-' | b'+')) {
            i += 1;
        }
        if self.src[i..].starts_with("inf") {
            self.pos = i + 3;
            let neg = bytes[start] == b'-';
            return Ok(RuntimeValue::Float(if neg {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }));
        }
        let digits_from = i;
        while bytes.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        if i == digits_from {
            self.pos = start;
            return Err(self.error("expected digits"));
        }
        let mut is_float = false;
        if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
            is_float = true;
            i += 1;
            while bytes.get(i).is_some_and(u8::is_ascii_digit) {
                i += 1;
            }
        }
        if matches!(bytes.get(i), Some(b'e' | b'E')) {
            let mut j = i + 1;
            if matches!(bytes.get(j), Some(b'-' | b'+')) {
                j += 1;
            }
            if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                is_float = true;
                i = j;
                while bytes.get(i).is_some_and(u8::is_ascii_digit) {
                    i += 1;
                }
            }
        }
        let text = &self.src[start..i];
        self.pos = i;
        if is_float {
            text.parse::<f64>()
                .map(RuntimeValue::Float)
                .map_err(|_| ParseError {
                    message: format!("invalid float `{text}`"),
                    offset: start,
                })
        } else {
            text.parse::<i64>()
                .map(RuntimeValue::Int)
                .map_err(|_| ParseError {
                    message: format!("integer `{text}` out of range"),
                    offset: start,
                })
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        let quote = self.peek().expect("caller checked the quote");
        self.pos += 1;
        let mut out = String::new();
        let unterminated = ParseError {
            message: "unterminated string".into(),
            offset: start,
        };
        loop {
            let c = self.peek().ok_or_else(|| unterminated.clone())?;
            self.pos += c.len_utf8();
            match c {
                c if c == quote => return Ok(out),
                '\\' => {
                    let e = self.peek().ok_or_else(|| unterminated.clone())?;
                    self.pos += e.len_utf8();
                    match e {
                        '\\' => out.push('\\'),
                        '\'' => out.push('\''),
                        '"' => out.push('"'),
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        '0' => out.push('\0'),
                        'x' => out.push(self.hex_escape(2)?),
                        'u' => out.push(self.hex_escape(4)?),
                        other => return Err(self.error(format!("unknown escape `\\{other}`"))),
                    }
                }
                c => out.push(c),
            }
        }
    }

    fn hex_escape(&mut self, len: usize) -> Result<char, ParseError> {
        let digits = self
            .rest()
            .get(..len)
            .ok_or_else(|| self.error("truncated escape"))?;
        let code = u32::from_str_radix(digits, 16).map_err(|_| self.error("bad hex escape"))?;
        let c = char::from_u32(code).ok_or_else(|| self.error("escape is not a character"))?;
        self.pos += len;
        Ok(c)
    }
}
