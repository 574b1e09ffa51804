use std::fmt::Write;

use super::ast::*;

/// Renders a program back to MTL source. Attributes are printed before methods.
pub fn pretty_print(program: &SourceProgram) -> String {
    let mut out = String::new();
    for (i, decl) in program.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match decl {
            Decl::Class(c) => {
                let _ = writeln!(out, "class {} {{", c.name.name);
                if let Some(doc) = &c.docstring {
                    let _ = writeln!(out, "    {}", quote_mtl_string(&doc.text));
                }
                for a in &c.attrs {
                    let _ = write!(out, "    {}: {}", a.name.name, a.ty);
                    if let Some(d) = &a.default {
                        let _ = write!(out, " = {d}");
                    }
                    out.push_str(";\n");
                }
                for m in &c.methods {
                    out.push_str("    ");
                    write_func(&mut out, m);
                }
                out.push_str("}\n");
            }
            Decl::Enum(e) => {
                let _ = write!(out, "enum {} {{ ", e.name.name);
                if let Some(doc) = &e.docstring {
                    let _ = write!(out, "{} ", quote_mtl_string(&doc.text));
                }
                let names: Vec<&str> = e.variants.iter().map(|v| v.name.as_str()).collect();
                let _ = writeln!(out, "{} }}", names.join(", "));
            }
            Decl::Func(f) => write_func(&mut out, f),
            Decl::Sem(s) => {
                let _ = writeln!(
                    out,
                    "sem {} = {};",
                    s.target_path(),
                    quote_mtl_string(&s.text)
                );
            }
            Decl::Global(g) => {
                let _ = writeln!(out, "let {}: {};", g.name.name, g.ty);
            }
        }
    }
    out
}

fn write_func(out: &mut String, f: &FuncDecl) {
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| match &p.default {
            Some(d) => format!("{}: {} = {d}", p.name.name, p.ty),
            None => format!("{}: {}", p.name.name, p.ty),
        })
        .collect();
    let _ = write!(
        out,
        "def {}({}) -> {}",
        f.name.name,
        params.join(", "),
        f.return_type
    );
    match f.body {
        FuncBody::ByLlm => {
            out.push_str(" by llm");
            if let Some(doc) = &f.docstring {
                let _ = write!(out, " {}", quote_mtl_string(&doc.text));
            }
            out.push_str(";\n");
        }
        FuncBody::Opaque => out.push_str(" { }\n"),
    }
}
