use std::fmt;

use super::Span;

/// A parsed compilation unit: module-level declarations in source order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceProgram {
    pub decls: Vec<Decl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Class(ClassDecl),
    Enum(EnumDecl),
    Func(FuncDecl),
    Sem(SemDecl),
    Global(GlobalDecl),
}

impl Decl {
    pub fn span(&self) -> Span {
        match self {
            Decl::Class(d) => d.span,
            Decl::Enum(d) => d.span,
            Decl::Func(d) => d.span,
            Decl::Sem(d) => d.span,
            Decl::Global(d) => d.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Ident {
        Ident {
            name: name.into(),
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Docstring {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: Ident,
    pub docstring: Option<Docstring>,
    pub attrs: Vec<AttrDecl>,
    pub methods: Vec<FuncDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrDecl {
    pub name: Ident,
    pub ty: TypeExpr,
    pub default: Option<Literal>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumDecl {
    pub name: Ident,
    pub docstring: Option<Docstring>,
    pub variants: Vec<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuncDecl {
    pub name: Ident,
    pub docstring: Option<Docstring>,
    pub params: Vec<Param>,
    pub return_type: TypeExpr,
    pub body: FuncBody,
    pub span: Span,
}

impl FuncDecl {
    pub fn is_by_llm(&self) -> bool {
        self.body == FuncBody::ByLlm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeExpr,
    pub default: Option<Literal>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuncBody {
    ByLlm,
    /// A skipped `{ ... }` block.
    Opaque,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemDecl {
    pub target: Vec<Ident>,
    pub text: String,
    pub span: Span,
}

impl SemDecl {
    pub fn target_path(&self) -> String {
        self.target
            .iter()
            .map(|i| i.name.as_str())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDecl {
    pub name: Ident,
    pub ty: TypeExpr,
    pub span: Span,
}

/// A type as written in a signature. Spans live on the enclosing declaration,
/// so type expressions compare and hash structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Named(String),
    Generic(String, Vec<TypeExpr>),
}

pub const PRIMITIVES: [&str; 4] = ["str", "int", "float", "bool"];

/// Builtin generic constructors and their arities.
pub const GENERICS: [(&str, usize); 3] = [("list", 1), ("dict", 2), ("Optional", 1)];

impl TypeExpr {
    pub fn named(name: impl Into<String>) -> TypeExpr {
        TypeExpr::Named(name.into())
    }

    pub fn generic(name: impl Into<String>, args: Vec<TypeExpr>) -> TypeExpr {
        TypeExpr::Generic(name.into(), args)
    }

    pub fn head(&self) -> &str {
        match self {
            TypeExpr::Named(n) | TypeExpr::Generic(n, _) => n,
        }
    }

    pub fn is_primitive(&self) -> bool {
        matches!(self, TypeExpr::Named(n) if PRIMITIVES.contains(&n.as_str()))
    }

    pub fn args(&self) -> &[TypeExpr] {
        match self {
            TypeExpr::Named(_) => &[],
            TypeExpr::Generic(_, args) => args,
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Named(n) => f.write_str(n),
            TypeExpr::Generic(n, args) => {
                write!(f, "{n}[")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    None,
    EmptyList,
}

/// MTL source form of a literal.
impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => f.write_str(&quote_mtl_string(s)),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Float(x) => write!(f, "{x:?}"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::None => f.write_str("None"),
            Literal::EmptyList => f.write_str("[]"),
        }
    }
}

/// Quotes a string using the MTL escape set (`\"`, `\\`, `\n`, `\t`).
pub fn quote_mtl_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl SourceProgram {
    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Class(c) => Some(c),
            _ => None,
        })
    }

    pub fn enums(&self) -> impl Iterator<Item = &EnumDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Enum(e) => Some(e),
            _ => None,
        })
    }

    pub fn sems(&self) -> impl Iterator<Item = &SemDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Sem(s) => Some(s),
            _ => None,
        })
    }

    /// All functions with their dotted paths: module functions and class methods.
    pub fn functions(&self) -> Vec<(String, &FuncDecl)> {
        let mut out = Vec::new();
        for d in &self.decls {
            match d {
                Decl::Func(f) => out.push((f.name.name.clone(), f)),
                Decl::Class(c) => {
                    for m in &c.methods {
                        out.push((format!("{}.{}", c.name.name, m.name.name), m));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// A copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> SourceProgram {
        let z = Span::default();
        let id = |i: &Ident| Ident {
            name: i.name.clone(),
            span: z,
        };
        let doc = |d: &Option<Docstring>| {
            d.as_ref().map(|d| Docstring {
                text: d.text.clone(),
                span: z,
            })
        };
        let func = |f: &FuncDecl| FuncDecl {
            name: id(&f.name),
            docstring: doc(&f.docstring),
            params: f
                .params
                .iter()
                .map(|p| Param {
                    name: id(&p.name),
                    ty: p.ty.clone(),
                    default: p.default.clone(),
                    span: z,
                })
                .collect(),
            return_type: f.return_type.clone(),
            body: f.body,
            span: z,
        };
        let decls = self
            .decls
            .iter()
            .map(|d| match d {
                Decl::Class(c) => Decl::Class(ClassDecl {
                    name: id(&c.name),
                    docstring: doc(&c.docstring),
                    attrs: c
                        .attrs
                        .iter()
                        .map(|a| AttrDecl {
                            name: id(&a.name),
                            ty: a.ty.clone(),
                            default: a.default.clone(),
                            span: z,
                        })
                        .collect(),
                    methods: c.methods.iter().map(func).collect(),
                    span: z,
                }),
                Decl::Enum(e) => Decl::Enum(EnumDecl {
                    name: id(&e.name),
                    docstring: doc(&e.docstring),
                    variants: e.variants.iter().map(id).collect(),
                    span: z,
                }),
                Decl::Func(f) => Decl::Func(func(f)),
                Decl::Sem(s) => Decl::Sem(SemDecl {
                    target: s.target.iter().map(id).collect(),
                    text: s.text.clone(),
                    span: z,
                }),
                Decl::Global(g) => Decl::Global(GlobalDecl {
                    name: id(&g.name),
                    ty: g.ty.clone(),
                    span: z,
                }),
            })
            .collect();
        SourceProgram { decls, span: z }
    }
}
