//! Compiler and prompt runtime for MTL, a small typed language whose `by llm`
//! functions are delegated to a language model.
//!
//! The pipeline is: [`frontend`] (tokens, AST) → [`semtable`] (symbols, then
//! `sem` texts attached) → [`mtir`] (per call-site meaning-typed IR, base and
//! enriched) → [`promptgen`] (argument binding, prompt assembly, response parsing).

pub mod error;
pub mod frontend;
pub mod mtir;
pub mod promptgen;
pub mod semtable;

#[cfg(feature = "testing")]
pub mod testing;

pub use error::CompileError;
pub use frontend::{SourceProgram, Span, TypeExpr};
pub use mtir::{MtIr, MtIrStar, SemanticsMode};
pub use promptgen::{PromptDocument, PromptOptions, RuntimeValue};
pub use semtable::{SemTable, SemTableEntry, SymbolId, SymbolKind};

/// A fully analyzed compilation unit.
#[derive(Debug, Clone)]
pub struct Compilation {
    pub program: SourceProgram,
    /// Symbol table before the SemTable pass.
    pub symbols: SemTable,
    pub semtable: SemTable,
}

/// Runs the front-end, symbol-table construction and the SemTable pass.
pub fn compile(source: &str) -> Result<Compilation, CompileError> {
    let program = frontend::parse_source(source)?;
    let symbols = semtable::build_symbol_table(&program)?;
    let semtable = semtable::build_semtable(&program, &symbols)?;
    Ok(Compilation {
        program,
        symbols,
        semtable,
    })
}

impl Compilation {
    /// Dotted paths of every `by llm` call-site.
    pub fn callsite_paths(&self) -> Vec<String> {
        mtir::callsites(&self.program)
            .into_iter()
            .map(|(p, _)| p)
            .collect()
    }

    pub fn base_mtir(&self, callsite: &str) -> Result<MtIr, CompileError> {
        let sites = mtir::callsites(&self.program);
        let site = mtir::find_callsite(&sites, callsite)?;
        mtir::build_base_mtir(site, &self.semtable)
    }

    pub fn mtir_star(&self, callsite: &str, mode: SemanticsMode) -> Result<MtIrStar, CompileError> {
        let base = self.base_mtir(callsite)?;
        Ok(mtir::enrich_mtir(&base, &self.semtable, mode))
    }
}
