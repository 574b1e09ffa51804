//! Recursive-descent parser for MTL.
//!
//! The first syntax error aborts the parse; there is no recovery.

use super::ast::*;
use super::lexer::{Keyword, Punct, Token, TokenKind};
use super::Span;
use crate::error::CompileError;

/// Parses a token stream produced by [`tokenize`](super::tokenize).
pub fn parse_program(tokens: &[Token]) -> Result<SourceProgram, CompileError> {
    if tokens.last().map(|t| &t.kind) != Some(&TokenKind::Eoi) {
        return Err(CompileError::Invalid {
            message: "token stream is not terminated by end of input".into(),
            span: tokens.last().map(|t| t.span).unwrap_or_default(),
        });
    }
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Vec::new();
    loop {
        let tok = p.peek();
        let decl = match &tok.kind {
            TokenKind::Eoi => break,
            TokenKind::Keyword(Keyword::Class) => Decl::Class(p.class_decl()?),
            TokenKind::Keyword(Keyword::Enum) => Decl::Enum(p.enum_decl()?),
            TokenKind::Keyword(Keyword::Def) => Decl::Func(p.func_decl()?),
            TokenKind::Keyword(Keyword::Sem) => Decl::Sem(p.sem_decl()?),
            TokenKind::Keyword(Keyword::Let) => Decl::Global(p.global_decl()?),
            _ => return Err(p.unexpected(&["class", "enum", "def", "sem", "let"])),
        };
        decls.push(decl);
    }
    let end = p.peek().span;
    Ok(SourceProgram {
        decls,
        span: Span {
            line: 1,
            column: 1,
            start: 0,
            end: end.end,
        },
    })
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> &'t Token {
        let tok = &self.tokens[self.pos];
        if tok.kind != TokenKind::Eoi {
            self.pos += 1;
        }
        tok
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn unexpected(&self, expected: &[&str]) -> CompileError {
        let tok = self.peek();
        CompileError::Syntax {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
            span: tok.span,
        }
    }

    fn at_punct(&self, p: Punct) -> bool {
        self.peek().kind == TokenKind::Punct(p)
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.at_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: Punct) -> Result<Span, CompileError> {
        if self.at_punct(p) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&[&format!("`{}`", p.as_str())]))
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> Result<Span, CompileError> {
        if self.peek().kind == TokenKind::Keyword(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&[&format!("`{}`", kw.as_str())]))
        }
    }

    fn ident(&mut self) -> Result<Ident, CompileError> {
        let tok = self.peek();
        if tok.kind == TokenKind::Ident {
            self.advance();
            Ok(Ident {
                name: tok.text.clone(),
                span: tok.span,
            })
        } else {
            Err(self.unexpected(&["identifier"]))
        }
    }

    fn opt_string(&mut self) -> Option<(String, Span)> {
        let tok = self.peek();
        if let TokenKind::Str(s) = &tok.kind {
            self.advance();
            Some((s.clone(), tok.span))
        } else {
            None
        }
    }

    fn opt_docstring(&mut self) -> Option<Docstring> {
        self.opt_string()
            .map(|(text, span)| Docstring { text, span })
    }

    fn class_decl(&mut self) -> Result<ClassDecl, CompileError> {
        let start = self.expect_keyword(Keyword::Class)?;
        let name = self.ident()?;
        self.expect_punct(Punct::LBrace)?;
        let docstring = self.opt_docstring();
        let mut attrs = Vec::new();
        let mut methods = Vec::new();
        loop {
            match &self.peek().kind {
                TokenKind::Punct(Punct::RBrace) => break,
                TokenKind::Keyword(Keyword::Def) => methods.push(self.func_decl()?),
                TokenKind::Ident => attrs.push(self.attr_decl()?),
                _ => return Err(self.unexpected(&["identifier", "def", "`}`"])),
            }
        }
        let end = self.expect_punct(Punct::RBrace)?;
        Ok(ClassDecl {
            name,
            docstring,
            attrs,
            methods,
            span: start.to(end),
        })
    }

    fn attr_decl(&mut self) -> Result<AttrDecl, CompileError> {
        let name = self.ident()?;
        self.expect_punct(Punct::Colon)?;
        let ty = self.type_expr()?;
        let default = if self.eat_punct(Punct::Eq) {
            Some(self.literal()?)
        } else {
            None
        };
        let end = self.expect_punct(Punct::Semi)?;
        Ok(AttrDecl {
            span: name.span.to(end),
            name,
            ty,
            default,
        })
    }

    fn enum_decl(&mut self) -> Result<EnumDecl, CompileError> {
        let start = self.expect_keyword(Keyword::Enum)?;
        let name = self.ident()?;
        self.expect_punct(Punct::LBrace)?;
        let docstring = self.opt_docstring();
        let mut variants = vec![self.ident()?];
        while self.eat_punct(Punct::Comma) {
            if self.at_punct(Punct::RBrace) {
                break;
            }
            variants.push(self.ident()?);
        }
        let end = self.expect_punct(Punct::RBrace)?;
        Ok(EnumDecl {
            name,
            docstring,
            variants,
            span: start.to(end),
        })
    }

    fn func_decl(&mut self) -> Result<FuncDecl, CompileError> {
        let start = self.expect_keyword(Keyword::Def)?;
        let name = self.ident()?;
        self.expect_punct(Punct::LParen)?;
        let mut params = Vec::new();
        if !self.at_punct(Punct::RParen) {
            params.push(self.param()?);
            while self.eat_punct(Punct::Comma) {
                params.push(self.param()?);
            }
        }
        self.expect_punct(Punct::RParen)?;
        if !self.at_punct(Punct::Arrow) {
            return Err(self.unexpected(&["`->` (return type is required)"]));
        }
        self.advance();
        let return_type = self.type_expr()?;

        let (body, docstring) = match &self.peek().kind {
            TokenKind::Keyword(Keyword::By) => {
                self.advance();
                let llm = self.peek();
                if !(llm.kind == TokenKind::Ident && llm.text == "llm") {
                    return Err(self.unexpected(&["`llm`"]));
                }
                self.advance();
                let doc = self.opt_docstring();
                self.expect_punct(Punct::Semi)?;
                (FuncBody::ByLlm, doc)
            }
            TokenKind::Punct(Punct::LBrace) => {
                self.opaque_block()?;
                (FuncBody::Opaque, None)
            }
            _ => return Err(self.unexpected(&["`by`", "`{`"])),
        };
        Ok(FuncDecl {
            name,
            docstring,
            params,
            return_type,
            body,
            span: start.to(self.prev_span()),
        })
    }

    fn opaque_block(&mut self) -> Result<(), CompileError> {
        self.expect_punct(Punct::LBrace)?;
        let mut depth = 1usize;
        while depth > 0 {
            match &self.peek().kind {
                TokenKind::Eoi => return Err(self.unexpected(&["`}`"])),
                TokenKind::Punct(Punct::LBrace) => depth += 1,
                TokenKind::Punct(Punct::RBrace) => depth -= 1,
                _ => {}
            }
            self.advance();
        }
        Ok(())
    }

    fn param(&mut self) -> Result<Param, CompileError> {
        let name = self.ident()?;
        self.expect_punct(Punct::Colon)?;
        let ty = self.type_expr()?;
        let default = if self.eat_punct(Punct::Eq) {
            Some(self.literal()?)
        } else {
            None
        };
        Ok(Param {
            span: name.span.to(self.prev_span()),
            name,
            ty,
            default,
        })
    }

    fn sem_decl(&mut self) -> Result<SemDecl, CompileError> {
        let start = self.expect_keyword(Keyword::Sem)?;
        let mut target = vec![self.ident()?];
        while self.eat_punct(Punct::Dot) {
            target.push(self.ident()?);
        }
        self.expect_punct(Punct::Eq)?;
        let Some((text, text_span)) = self.opt_string() else {
            return Err(self.unexpected(&["string literal"]));
        };
        if text.trim().is_empty() {
            return Err(CompileError::Invalid {
                message: "sem text must not be empty".into(),
                span: text_span,
            });
        }
        let end = self.expect_punct(Punct::Semi)?;
        Ok(SemDecl {
            target,
            text,
            span: start.to(end),
        })
    }

    fn global_decl(&mut self) -> Result<GlobalDecl, CompileError> {
        let start = self.expect_keyword(Keyword::Let)?;
        let name = self.ident()?;
        self.expect_punct(Punct::Colon)?;
        let ty = self.type_expr()?;
        let end = self.expect_punct(Punct::Semi)?;
        Ok(GlobalDecl {
            name,
            ty,
            span: start.to(end),
        })
    }

    fn type_expr(&mut self) -> Result<TypeExpr, CompileError> {
        // `None` lexes as a keyword but is not a type name in MTL.
        let name = self.ident()?.name;
        if !self.eat_punct(Punct::LBracket) {
            return Ok(TypeExpr::Named(name));
        }
        let mut args = vec![self.type_expr()?];
        while self.eat_punct(Punct::Comma) {
            args.push(self.type_expr()?);
        }
        self.expect_punct(Punct::RBracket)?;
        Ok(TypeExpr::Generic(name, args))
    }

    fn literal(&mut self) -> Result<Literal, CompileError> {
        let tok = self.peek();
        let lit = match &tok.kind {
            TokenKind::Str(s) => Literal::Str(s.clone()),
            TokenKind::Int(i) => Literal::Int(*i),
            TokenKind::Float(x) => Literal::Float(*x),
            TokenKind::Keyword(Keyword::True) => Literal::Bool(true),
            TokenKind::Keyword(Keyword::False) => Literal::Bool(false),
            TokenKind::Keyword(Keyword::None) => Literal::None,
            TokenKind::Punct(Punct::LBracket) => {
                self.advance();
                self.expect_punct(Punct::RBracket)?;
                return Ok(Literal::EmptyList);
            }
            _ => {
                return Err(self.unexpected(&[
                    "string literal",
                    "number",
                    "true",
                    "false",
                    "None",
                    "`[]`",
                ]))
            }
        };
        self.advance();
        Ok(lit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_source, tokenize};

    #[test]
    fn minimal_by_llm_function() {
        let prog = parse_source("def f() -> int by llm;").unwrap();
        let Decl::Func(f) = &prog.decls[0] else {
            panic!()
        };
        assert_eq!(f.name.name, "f");
        assert!(f.params.is_empty());
        assert_eq!(f.return_type, TypeExpr::named("int"));
        assert_eq!(f.body, FuncBody::ByLlm);
    }

    #[test]
    fn sem_with_dotted_target() {
        let prog = parse_source(
            r#"sem Plan.priority = "Priority Order 1 (main), 2-3 (suppportive), 4(misc)";"#,
        )
        .unwrap();
        let Decl::Sem(s) = &prog.decls[0] else {
            panic!()
        };
        assert_eq!(s.target_path(), "Plan.priority");
        assert_eq!(s.target.len(), 2);
    }

    #[test]
    fn missing_return_type_is_rejected() {
        let err = parse_source("def f() by llm;").unwrap_err();
        assert!(matches!(err, CompileError::Syntax { .. }), "{err}");
    }

    #[test]
    fn empty_sem_text_is_rejected() {
        assert!(parse_source(r#"sem A = "   ";"#).is_err());
    }

    #[test]
    fn syntax_error_reports_expected_set() {
        let err = parse_source("class A { 1 }").unwrap_err();
        match err {
            CompileError::Syntax { expected, span, .. } => {
                assert!(expected.contains(&"def".to_string()));
                assert_eq!(span.column, 11);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn opaque_body_is_skipped() {
        let prog = parse_source(
            "def add(a: int, b: int) -> int { return a + b; { nested } }\nlet g: int;",
        )
        .unwrap();
        assert_eq!(prog.decls.len(), 2);
        let Decl::Func(f) = &prog.decls[0] else {
            panic!()
        };
        assert_eq!(f.body, FuncBody::Opaque);
        assert!(parse_source("def f() -> int { ").is_err());
    }

    #[test]
    fn docstrings_on_class_enum_and_function() {
        let prog = parse_source(
            r#"class A { "doc a" x: int; }
               enum E { "doc e" X, Y }
               def f() -> A by llm "doc f";"#,
        )
        .unwrap();
        assert_eq!(
            prog.classes()
                .next()
                .unwrap()
                .docstring
                .as_ref()
                .unwrap()
                .text,
            "doc a"
        );
        assert_eq!(
            prog.enums()
                .next()
                .unwrap()
                .docstring
                .as_ref()
                .unwrap()
                .text,
            "doc e"
        );
        assert_eq!(
            prog.functions()[0].1.docstring.as_ref().unwrap().text,
            "doc f"
        );
    }

    #[test]
    fn parse_is_pure() {
        let toks = tokenize("class A { x: list[int] = []; } def f(a: A) -> int by llm;").unwrap();
        assert_eq!(parse_program(&toks).unwrap(), parse_program(&toks).unwrap());
    }
}
