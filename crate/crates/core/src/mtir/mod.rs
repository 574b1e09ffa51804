//! Meaning-typed IR for `by llm` call-sites.
//!
//! [`build_base_mtir`] extracts the signature and expands every reachable
//! non-primitive type with a FIFO worklist. [`enrich_mtir`] pairs each entity
//! slot with its semantic text from the SemTable.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::CompileError;
use crate::frontend::{FuncDecl, Literal, SourceProgram, TypeExpr};
use crate::semtable::{SemTable, SemTableEntry, SymbolKind};

/// A named, typed slot: a parameter or a class attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub name: String,
    pub ty: TypeExpr,
    pub default: Option<Literal>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expansion {
    Class(Vec<Field>),
    Enum(Vec<String>),
    Generic(Vec<TypeExpr>),
}

impl Expansion {
    pub fn kind(&self) -> &'static str {
        match self {
            Expansion::Class(_) => "class",
            Expansion::Enum(_) => "enum",
            Expansion::Generic(_) => "generic",
        }
    }
}

/// Base IR: function name, typed inputs, output type and hierarchy map.
#[derive(Debug, Clone, PartialEq)]
pub struct MtIr {
    /// Dotted path of the call-site (`Supervisor.call_next_agent`).
    pub path: String,
    pub name: String,
    pub inputs: Vec<Field>,
    pub output: TypeExpr,
    /// Expansions keyed by type, in first-visit order.
    pub hierarchy: IndexMap<TypeExpr, Expansion>,
}

/// A value paired with its semantic text, `None` when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotated<T> {
    pub item: T,
    pub semtext: Option<String>,
}

impl<T> Annotated<T> {
    pub fn new(item: T, semtext: Option<String>) -> Annotated<T> {
        Annotated { item, semtext }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpansionStar {
    Class(Vec<Annotated<Field>>),
    Enum(Vec<Annotated<String>>),
    Generic(Vec<Annotated<TypeExpr>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyEntry {
    pub ty: Annotated<TypeExpr>,
    pub expansion: ExpansionStar,
}

/// The enriched IR: the base IR with every entity slot annotated.
#[derive(Debug, Clone, PartialEq)]
pub struct MtIrStar {
    pub path: String,
    pub name: Annotated<String>,
    pub inputs: Vec<Annotated<Field>>,
    pub output: Annotated<TypeExpr>,
    pub hierarchy: Vec<HierarchyEntry>,
}

impl MtIrStar {
    pub fn entry(&self, ty: &TypeExpr) -> Option<&HierarchyEntry> {
        self.hierarchy.iter().find(|h| &h.ty.item == ty)
    }

    /// Attributes of a class reachable from this call-site.
    pub fn class_fields(&self, name: &str) -> Option<&[Annotated<Field>]> {
        match &self.entry(&TypeExpr::named(name))?.expansion {
            ExpansionStar::Class(fields) => Some(fields),
            _ => None,
        }
    }

    pub fn enum_variants(&self, name: &str) -> Option<&[Annotated<String>]> {
        match &self.entry(&TypeExpr::named(name))?.expansion {
            ExpansionStar::Enum(v) => Some(v),
            _ => None,
        }
    }

    /// Every semantic text carried by the IR, in slot order.
    pub fn semtexts(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        out.extend(self.name.semtext.as_deref());
        out.extend(self.inputs.iter().filter_map(|i| i.semtext.as_deref()));
        out.extend(self.output.semtext.as_deref());
        for h in &self.hierarchy {
            out.extend(h.ty.semtext.as_deref());
            match &h.expansion {
                ExpansionStar::Class(f) => {
                    out.extend(f.iter().filter_map(|a| a.semtext.as_deref()))
                }
                ExpansionStar::Enum(v) => out.extend(v.iter().filter_map(|a| a.semtext.as_deref())),
                ExpansionStar::Generic(t) => {
                    out.extend(t.iter().filter_map(|a| a.semtext.as_deref()))
                }
            }
        }
        out
    }
}

/// Which annotation sources feed the enriched IR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SemanticsMode {
    /// `sem` declarations only.
    #[default]
    Sem,
    /// Docstrings only.
    Docstring,
    /// `sem` declarations, falling back to the docstring per entity.
    Both,
}

impl SemanticsMode {
    fn pick(self, entry: Option<&SemTableEntry>) -> Option<String> {
        let entry = entry?;
        match self {
            SemanticsMode::Sem => entry.semtext.clone(),
            SemanticsMode::Docstring => entry.docstring.clone(),
            SemanticsMode::Both => entry.semtext.clone().or_else(|| entry.docstring.clone()),
        }
    }
}

impl FromStr for SemanticsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sem" => Ok(SemanticsMode::Sem),
            "docstring" => Ok(SemanticsMode::Docstring),
            "both" => Ok(SemanticsMode::Both),
            other => Err(format!(
                "unknown semantics mode `{other}` (expected sem, docstring or both)"
            )),
        }
    }
}

impl fmt::Display for SemanticsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemanticsMode::Sem => "sem",
            SemanticsMode::Docstring => "docstring",
            SemanticsMode::Both => "both",
        })
    }
}

/// A `by llm` function together with its dotted path.
#[derive(Debug, Clone, Copy)]
pub struct Callsite<'a> {
    pub path: &'a str,
    pub decl: &'a FuncDecl,
}

/// Every `by llm` function and method in the program, with dotted paths.
pub fn callsites(program: &SourceProgram) -> Vec<(String, &FuncDecl)> {
    program
        .functions()
        .into_iter()
        .filter(|(_, f)| f.is_by_llm())
        .collect()
}

/// Finds a `by llm` call-site by dotted path, or by bare name when that is unambiguous.
pub fn find_callsite<'a>(
    sites: &'a [(String, &'a FuncDecl)],
    name: &str,
) -> Result<Callsite<'a>, CompileError> {
    let exact = sites.iter().find(|(p, _)| p == name);
    let by_name: Vec<_> = sites.iter().filter(|(_, f)| f.name.name == name).collect();
    let hit = match (exact, by_name.as_slice()) {
        (Some(hit), _) => Some(hit),
        (None, [only]) => Some(*only),
        _ => None,
    };
    match hit {
        Some((path, decl)) => Ok(Callsite { path, decl }),
        None => Err(CompileError::UnknownCallsite {
            name: name.to_string(),
            candidates: sites.iter().map(|(p, _)| p.clone()).collect(),
        }),
    }
}

/// Builds the base IR for one call-site.
pub fn build_base_mtir(callsite: Callsite<'_>, table: &SemTable) -> Result<MtIr, CompileError> {
    let f = callsite.decl;
    let inputs: Vec<Field> = f
        .params
        .iter()
        .map(|p| Field {
            name: p.name.name.clone(),
            ty: p.ty.clone(),
            default: p.default.clone(),
        })
        .collect();
    let output = f.return_type.clone();

    let mut hierarchy = IndexMap::new();
    let mut visited: HashSet<TypeExpr> = HashSet::new();
    let mut worklist: VecDeque<TypeExpr> = inputs.iter().map(|i| i.ty.clone()).collect();
    worklist.push_back(output.clone());

    while let Some(ty) = worklist.pop_front() {
        if ty.is_primitive() || visited.contains(&ty) {
            continue;
        }
        visited.insert(ty.clone());
        let expansion = match &ty {
            TypeExpr::Generic(_, args) => {
                worklist.extend(args.iter().cloned());
                Expansion::Generic(args.clone())
            }
            TypeExpr::Named(name) => {
                let entry = table
                    .type_entry(&ty)
                    .ok_or_else(|| CompileError::UndeclaredType {
                        name: name.clone(),
                        span: f.span,
                    })?;
                match entry.kind {
                    SymbolKind::Class => {
                        let fields: Vec<Field> = table
                            .members(entry.id)
                            .filter(|m| m.kind == SymbolKind::Attribute)
                            .map(|m| Field {
                                name: m.name.clone(),
                                ty: m.ty.clone().expect("attributes carry a type"),
                                default: m.default.clone(),
                            })
                            .collect();
                        worklist.extend(fields.iter().map(|a| a.ty.clone()));
                        Expansion::Class(fields)
                    }
                    _ => Expansion::Enum(table.members(entry.id).map(|m| m.name.clone()).collect()),
                }
            }
        };
        hierarchy.insert(ty, expansion);
    }

    Ok(MtIr {
        path: callsite.path.to_string(),
        name: f.name.name.clone(),
        inputs,
        output,
        hierarchy,
    })
}

/// Pairs every slot of `base` with its semantic text under `mode`.
///
/// A parameter slot carries the parameter's own text; a type's text lives on
/// its hierarchy key.
pub fn enrich_mtir(base: &MtIr, table: &SemTable, mode: SemanticsMode) -> MtIrStar {
    let at = |path: String| mode.pick(table.by_path(&path));
    let of_type = |ty: &TypeExpr| mode.pick(table.type_entry(ty));

    let hierarchy = base
        .hierarchy
        .iter()
        .map(|(ty, exp)| {
            let expansion = match exp {
                Expansion::Class(fields) => ExpansionStar::Class(
                    fields
                        .iter()
                        .map(|a| Annotated::new(a.clone(), at(format!("{ty}.{}", a.name))))
                        .collect(),
                ),
                Expansion::Enum(variants) => ExpansionStar::Enum(
                    variants
                        .iter()
                        .map(|v| Annotated::new(v.clone(), at(format!("{ty}.{v}"))))
                        .collect(),
                ),
                Expansion::Generic(args) => ExpansionStar::Generic(
                    args.iter()
                        .map(|t| Annotated::new(t.clone(), of_type(t)))
                        .collect(),
                ),
            };
            HierarchyEntry {
                ty: Annotated::new(ty.clone(), of_type(ty)),
                expansion,
            }
        })
        .collect();

    MtIrStar {
        path: base.path.clone(),
        name: Annotated::new(base.name.clone(), at(base.path.clone())),
        inputs: base
            .inputs
            .iter()
            .map(|i| Annotated::new(i.clone(), at(format!("{}.{}", base.path, i.name))))
            .collect(),
        output: Annotated::new(base.output.clone(), of_type(&base.output)),
        hierarchy,
    }
}

/// Drops every semantic text, recovering the base IR.
pub fn project_base(star: &MtIrStar) -> MtIr {
    MtIr {
        path: star.path.clone(),
        name: star.name.item.clone(),
        inputs: star.inputs.iter().map(|i| i.item.clone()).collect(),
        output: star.output.item.clone(),
        hierarchy: star
            .hierarchy
            .iter()
            .map(|h| {
                let exp = match &h.expansion {
                    ExpansionStar::Class(f) => {
                        Expansion::Class(f.iter().map(|a| a.item.clone()).collect())
                    }
                    ExpansionStar::Enum(v) => {
                        Expansion::Enum(v.iter().map(|a| a.item.clone()).collect())
                    }
                    ExpansionStar::Generic(t) => {
                        Expansion::Generic(t.iter().map(|a| a.item.clone()).collect())
                    }
                };
                (h.ty.item.clone(), exp)
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct IrJson {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    semtext: Option<String>,
    inputs: Vec<MemberJson>,
    output: MemberJson,
    hierarchy: Vec<HierarchyJson>,
}

#[derive(Serialize)]
struct HierarchyJson {
    #[serde(rename = "type")]
    ty: String,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    semtext: Option<String>,
    members: Vec<MemberJson>,
}

#[derive(Serialize)]
struct MemberJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    ty: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    semtext: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    default: Option<String>,
}

impl MemberJson {
    fn field(a: &Annotated<Field>) -> MemberJson {
        MemberJson {
            name: Some(a.item.name.clone()),
            ty: Some(a.item.ty.to_string()),
            semtext: a.semtext.clone(),
            default: a.item.default.as_ref().map(|d| d.to_string()),
        }
    }
}

/// Canonical compact JSON for an enriched IR. Byte-deterministic.
pub fn serialize_mtir(ir: &MtIrStar) -> String {
    let json = IrJson {
        name: ir.name.item.clone(),
        semtext: ir.name.semtext.clone(),
        inputs: ir.inputs.iter().map(MemberJson::field).collect(),
        output: MemberJson {
            name: None,
            ty: Some(ir.output.item.to_string()),
            semtext: ir.output.semtext.clone(),
            default: None,
        },
        hierarchy: ir
            .hierarchy
            .iter()
            .map(|h| {
                let (kind, members) = match &h.expansion {
                    ExpansionStar::Class(f) => ("class", f.iter().map(MemberJson::field).collect()),
                    ExpansionStar::Enum(v) => (
                        "enum",
                        v.iter()
                            .map(|a| MemberJson {
                                name: Some(a.item.clone()),
                                ty: None,
                                semtext: a.semtext.clone(),
                                default: None,
                            })
                            .collect(),
                    ),
                    ExpansionStar::Generic(t) => (
                        "generic",
                        t.iter()
                            .map(|a| MemberJson {
                                name: None,
                                ty: Some(a.item.to_string()),
                                semtext: a.semtext.clone(),
                                default: None,
                            })
                            .collect(),
                    ),
                };
                HierarchyJson {
                    ty: h.ty.item.to_string(),
                    kind,
                    semtext: h.ty.semtext.clone(),
                    members,
                }
            })
            .collect(),
    };
    serde_json::to_string(&json).expect("IR serializes")
}

#[cfg(test)]
mod tests;
