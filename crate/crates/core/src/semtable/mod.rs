//! Symbol table construction and the SemTable build pass.
//!
//! [`build_symbol_table`] records every named entity of a program. [`build_semtable`]
//! then copies that table and attaches each `sem` declaration's text to the entry
//! its target path resolves to.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::CompileError;
use crate::frontend::{
    clean_docstring, FuncDecl, Literal, SourceProgram, Span, TypeExpr, GENERICS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(u32);

impl SymbolId {
    pub const ROOT: SymbolId = SymbolId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Module,
    Class,
    Enum,
    EnumVariant,
    Function,
    Method,
    Param,
    Attribute,
    Global,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SymbolKind::Module => "module",
            SymbolKind::Class => "class",
            SymbolKind::Enum => "enum",
            SymbolKind::EnumVariant => "enum-variant",
            SymbolKind::Function => "function",
            SymbolKind::Method => "method",
            SymbolKind::Param => "param",
            SymbolKind::Attribute => "attribute",
            SymbolKind::Global => "global",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemTableEntry {
    pub id: SymbolId,
    pub name: String,
    /// Canonical dotted path, e.g. `Plan.priority`. Empty for the module root.
    pub path: String,
    pub kind: SymbolKind,
    /// Declared type; present exactly for params, attributes and globals.
    pub ty: Option<TypeExpr>,
    /// Declared default value of a param or attribute.
    pub default: Option<Literal>,
    /// Enclosing scope; `None` only for the module root.
    pub scope: Option<SymbolId>,
    /// Child entities in declaration order.
    pub members: Vec<SymbolId>,
    pub semtext: Option<String>,
    pub docstring: Option<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemTable {
    entries: Vec<SemTableEntry>,
    by_path: HashMap<String, SymbolId>,
}

impl SemTable {
    fn new() -> SemTable {
        let root = SemTableEntry {
            id: SymbolId::ROOT,
            name: String::new(),
            path: String::new(),
            kind: SymbolKind::Module,
            ty: None,
            default: None,
            scope: None,
            members: Vec::new(),
            semtext: None,
            docstring: None,
            span: Span::default(),
        };
        SemTable {
            entries: vec![root],
            by_path: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.len() <= 1
    }

    pub fn entries(&self) -> impl Iterator<Item = &SemTableEntry> {
        self.entries.iter()
    }

    pub fn get(&self, id: SymbolId) -> &SemTableEntry {
        &self.entries[id.index()]
    }

    pub fn by_path(&self, path: &str) -> Option<&SemTableEntry> {
        self.by_path.get(path).map(|id| self.get(*id))
    }

    pub fn root(&self) -> &SemTableEntry {
        &self.entries[0]
    }

    pub fn members(&self, id: SymbolId) -> impl Iterator<Item = &SemTableEntry> {
        self.get(id).members.iter().map(|m| self.get(*m))
    }

    fn member_named(&self, id: SymbolId, name: &str) -> Option<&SemTableEntry> {
        self.members(id).find(|e| e.name == name)
    }

    /// The class or enum entry a named type refers to, if any.
    pub fn type_entry(&self, ty: &TypeExpr) -> Option<&SemTableEntry> {
        match ty {
            TypeExpr::Named(name) => self
                .member_named(SymbolId::ROOT, name)
                .filter(|e| matches!(e.kind, SymbolKind::Class | SymbolKind::Enum)),
            TypeExpr::Generic(..) => None,
        }
    }

    /// Resolves a target path: the first segment in `scope` and then outward to
    /// the module, the remaining segments through members.
    pub fn lookup<S: AsRef<str>>(
        &self,
        target_path: &[S],
        scope: SymbolId,
    ) -> Result<&SemTableEntry, CompileError> {
        let path = target_path
            .iter()
            .map(|s| s.as_ref())
            .collect::<Vec<_>>()
            .join(".");
        let Some(first) = target_path.first() else {
            return Err(CompileError::Unresolved {
                path,
                index: 0,
                segment: String::new(),
                candidates: vec![],
                span: Span::default(),
            });
        };
        let mut scope_cursor = Some(scope);
        let mut current = None;
        while let Some(s) = scope_cursor {
            if let Some(e) = self.member_named(s, first.as_ref()) {
                current = Some(e);
                break;
            }
            scope_cursor = self.get(s).scope;
        }
        let unresolved = |index: usize, segment: &str, within: SymbolId| {
            let mut candidates: Vec<String> =
                self.members(within).map(|e| e.name.clone()).collect();
            candidates.sort();
            CompileError::Unresolved {
                path: path.clone(),
                index,
                segment: segment.to_string(),
                candidates,
                span: Span::default(),
            }
        };
        let mut current = current.ok_or_else(|| unresolved(1, first.as_ref(), scope))?;
        for (i, seg) in target_path.iter().enumerate().skip(1) {
            current = self
                .member_named(current.id, seg.as_ref())
                .ok_or_else(|| unresolved(i + 1, seg.as_ref(), current.id))?;
        }
        Ok(current)
    }

    /// Records for `dump-symbols`, sorted by path; the module root is omitted.
    pub fn symbol_records(&self) -> Vec<SymbolRecord> {
        let mut out: Vec<SymbolRecord> = self
            .entries
            .iter()
            .skip(1)
            .map(|e| SymbolRecord {
                path: e.path.clone(),
                kind: e.kind,
                ty: e.ty.as_ref().map(|t| t.to_string()),
                semtext: e.semtext.clone(),
                docstring: e.docstring.clone(),
            })
            .collect();
        out.sort_by(|a, b| a.path.cmp(&b.path));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.symbol_records()).expect("symbol records serialize")
    }

    fn insert(
        &mut self,
        scope: SymbolId,
        name: &str,
        kind: SymbolKind,
        span: Span,
    ) -> Result<SymbolId, CompileError> {
        if let Some(existing) = self.member_named(scope, name) {
            return Err(CompileError::DuplicateName {
                name: name.to_string(),
                first: existing.span,
                second: span,
            });
        }
        let parent = self.get(scope);
        let path = if parent.path.is_empty() {
            name.to_string()
        } else {
            format!("{}.{}", parent.path, name)
        };
        let id = SymbolId(self.entries.len() as u32);
        self.entries.push(SemTableEntry {
            id,
            name: name.to_string(),
            path: path.clone(),
            kind,
            ty: None,
            default: None,
            scope: Some(scope),
            members: Vec::new(),
            semtext: None,
            docstring: None,
            span,
        });
        self.entries[scope.index()].members.push(id);
        self.by_path.insert(path, id);
        Ok(id)
    }

    fn entry_mut(&mut self, id: SymbolId) -> &mut SemTableEntry {
        &mut self.entries[id.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolRecord {
    pub path: String,
    pub kind: SymbolKind,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub ty: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semtext: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub docstring: Option<String>,
}

/// Builds the plain symbol table: one entry per named entity, all semtexts absent.
pub fn build_symbol_table(program: &SourceProgram) -> Result<SemTable, CompileError> {
    use crate::frontend::Decl;

    let mut table = SemTable::new();
    let root = SymbolId::ROOT;

    fn add_function(
        table: &mut SemTable,
        scope: SymbolId,
        f: &FuncDecl,
        kind: SymbolKind,
    ) -> Result<(), CompileError> {
        let id = table.insert(scope, &f.name.name, kind, f.span)?;
        table.entry_mut(id).docstring = f.docstring.as_ref().and_then(|d| clean_docstring(&d.text));
        for p in &f.params {
            let pid = table.insert(id, &p.name.name, SymbolKind::Param, p.span)?;
            let e = table.entry_mut(pid);
            e.ty = Some(p.ty.clone());
            e.default = p.default.clone();
        }
        Ok(())
    }

    for decl in &program.decls {
        match decl {
            Decl::Class(c) => {
                let id = table.insert(root, &c.name.name, SymbolKind::Class, c.span)?;
                table.entry_mut(id).docstring =
                    c.docstring.as_ref().and_then(|d| clean_docstring(&d.text));
                for a in &c.attrs {
                    let aid = table.insert(id, &a.name.name, SymbolKind::Attribute, a.span)?;
                    let e = table.entry_mut(aid);
                    e.ty = Some(a.ty.clone());
                    e.default = a.default.clone();
                }
                for m in &c.methods {
                    add_function(&mut table, id, m, SymbolKind::Method)?;
                }
            }
            Decl::Enum(en) => {
                let id = table.insert(root, &en.name.name, SymbolKind::Enum, en.span)?;
                table.entry_mut(id).docstring =
                    en.docstring.as_ref().and_then(|d| clean_docstring(&d.text));
                for v in &en.variants {
                    table.insert(id, &v.name, SymbolKind::EnumVariant, v.span)?;
                }
            }
            Decl::Func(f) => add_function(&mut table, root, f, SymbolKind::Function)?,
            Decl::Global(g) => {
                let id = table.insert(root, &g.name.name, SymbolKind::Global, g.span)?;
                table.entry_mut(id).ty = Some(g.ty.clone());
            }
            Decl::Sem(_) => {}
        }
    }

    // Types are checked once every declaration is known, so signatures may
    // reference classes declared later in the file.
    for decl in &program.decls {
        match decl {
            Decl::Class(c) => {
                for a in &c.attrs {
                    check_type(&table, &a.ty, a.span)?;
                }
                for m in &c.methods {
                    check_signature(&table, m)?;
                }
            }
            Decl::Func(f) => check_signature(&table, f)?,
            Decl::Global(g) => check_type(&table, &g.ty, g.span)?,
            Decl::Enum(_) | Decl::Sem(_) => {}
        }
    }
    Ok(table)
}

fn check_signature(table: &SemTable, f: &FuncDecl) -> Result<(), CompileError> {
    for p in &f.params {
        check_type(table, &p.ty, p.span)?;
    }
    check_type(table, &f.return_type, f.span)
}

fn check_type(table: &SemTable, ty: &TypeExpr, span: Span) -> Result<(), CompileError> {
    let builtin_arity = |name: &str| GENERICS.iter().find(|(n, _)| *n == name).map(|(_, a)| *a);
    match ty {
        TypeExpr::Named(name) => {
            if ty.is_primitive() || table.type_entry(ty).is_some() {
                Ok(())
            } else if let Some(arity) = builtin_arity(name) {
                Err(CompileError::TypeArity {
                    name: name.clone(),
                    expected: arity,
                    found: 0,
                    span,
                })
            } else {
                Err(CompileError::UndeclaredType {
                    name: name.clone(),
                    span,
                })
            }
        }
        TypeExpr::Generic(name, args) => {
            let Some(arity) = builtin_arity(name) else {
                let known = ty.is_primitive()
                    || crate::frontend::PRIMITIVES.contains(&name.as_str())
                    || table.type_entry(&TypeExpr::Named(name.clone())).is_some();
                return Err(if known {
                    CompileError::TypeArity {
                        name: name.clone(),
                        expected: 0,
                        found: args.len(),
                        span,
                    }
                } else {
                    CompileError::UndeclaredType {
                        name: name.clone(),
                        span,
                    }
                });
            };
            if args.len() != arity {
                return Err(CompileError::TypeArity {
                    name: name.clone(),
                    expected: arity,
                    found: args.len(),
                    span,
                });
            }
            if name == "dict" && args[0] != TypeExpr::named("str") {
                return Err(CompileError::Invalid {
                    message: format!("dict keys must be `str`, found `{}`", args[0]),
                    span,
                });
            }
            args.iter().try_for_each(|a| check_type(table, a, span))
        }
    }
}

/// The SemTable build pass: copies `symtable` and attaches each `sem`
/// declaration's text to the entry its target resolves to, in AST order.
///
/// A second `sem` for an already annotated target is rejected, which makes the
/// result independent of declaration order.
pub fn build_semtable(
    program: &SourceProgram,
    symtable: &SemTable,
) -> Result<SemTable, CompileError> {
    let mut sigma = symtable.clone();
    let mut attached: HashMap<SymbolId, Span> = HashMap::new();
    for sem in program.sems() {
        // v1 sems are module-level, so their lexical scope is the module root.
        let scope = SymbolId::ROOT;
        let names: Vec<&str> = sem.target.iter().map(|i| i.name.as_str()).collect();
        let target = sigma.lookup(&names, scope).map_err(|e| match e {
            CompileError::Unresolved {
                path,
                index,
                segment,
                candidates,
                ..
            } => CompileError::Unresolved {
                span: sem
                    .target
                    .get(index.saturating_sub(1))
                    .map(|i| i.span)
                    .unwrap_or(sem.span),
                path,
                index,
                segment,
                candidates,
            },
            other => other,
        })?;
        let id = target.id;
        if let Some(first) = attached.get(&id) {
            return Err(CompileError::DuplicateSem {
                target: sigma.get(id).path.clone(),
                first: *first,
                second: sem.span,
            });
        }
        attached.insert(id, sem.span);
        sigma.entry_mut(id).semtext = Some(sem.text.clone());
    }
    Ok(sigma)
}
