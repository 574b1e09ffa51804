use std::collections::BTreeSet;

use super::*;
use crate::compile;
use crate::frontend::{Decl, TypeExpr};

const PLAN: &str = include_str!("../../../../corpus/plan.mtl");
const PLAN_SEM: &str = include_str!("../../../../corpus/plan_sem.mtl");
const CONTENT_DOC: &str = include_str!("../../../../corpus/content_creator_docstring.mtl");
const CONTENT_SEM: &str = include_str!("../../../../corpus/content_creator_sem.mtl");

fn t(s: &str) -> TypeExpr {
    crate::frontend::parse_source(&format!("let x: {s};"))
        .map(|p| match &p.decls[0] {
            Decl::Global(g) => g.ty.clone(),
            _ => unreachable!(),
        })
        .unwrap()
}

/// Reachable non-primitive types via plain recursive DFS over the AST, with
/// an explicit seen-set marking cycles.
fn dfs_keys(program: &crate::SourceProgram, roots: &[TypeExpr]) -> BTreeSet<TypeExpr> {
    fn visit(p: &crate::SourceProgram, ty: &TypeExpr, seen: &mut BTreeSet<TypeExpr>) {
        if ty.is_primitive() || seen.contains(ty) {
            return;
        }
        seen.insert(ty.clone());
        match ty {
            TypeExpr::Generic(_, args) => args.iter().for_each(|a| visit(p, a, seen)),
            TypeExpr::Named(n) => {
                if let Some(c) = p.classes().find(|c| &c.name.name == n) {
                    for a in &c.attrs {
                        visit(p, &a.ty, seen);
                    }
                }
            }
        }
    }
    let mut seen = BTreeSet::new();
    for r in roots {
        visit(program, r, &mut seen);
    }
    seen
}

#[test]
fn generate_plan_base_ir() {
    let c = compile(PLAN).unwrap();
    let ir = c.base_mtir("generate_plan").unwrap();
    assert_eq!(ir.name, "generate_plan");
    let inputs: Vec<_> = ir
        .inputs
        .iter()
        .map(|i| (i.name.as_str(), i.ty.clone()))
        .collect();
    assert_eq!(inputs, [("goal", t("str")), ("repo_state", t("RepoState"))]);
    assert_eq!(ir.output, t("list[Plan]"));
    // FIFO: inputs first (str skipped, RepoState), then the output.
    let keys: Vec<String> = ir.hierarchy.keys().map(|k| k.to_string()).collect();
    assert_eq!(
        keys,
        [
            "RepoState",
            "list[Plan]",
            "list[str]",
            "Plan",
            "Optional[str]"
        ]
    );
    match &ir.hierarchy[&t("Plan")] {
        Expansion::Class(f) => {
            let names: Vec<_> = f.iter().map(|a| a.name.as_str()).collect();
            assert_eq!(
                names,
                [
                    "action",
                    "category",
                    "description",
                    "file",
                    "effort",
                    "priority"
                ]
            );
            assert_eq!(
                f[4].default,
                Some(crate::frontend::Literal::Str("medium".into()))
            );
        }
        other => panic!("{other:?}"),
    }
    match &ir.hierarchy[&t("RepoState")] {
        Expansion::Class(f) => assert_eq!(f.len(), 4),
        other => panic!("{other:?}"),
    }
    assert_eq!(
        ir.hierarchy[&t("list[Plan]")],
        Expansion::Generic(vec![t("Plan")])
    );
    assert_eq!(
        ir.hierarchy[&t("Optional[str]")],
        Expansion::Generic(vec![t("str")])
    );
}

#[test]
fn primitive_signature_has_empty_hierarchy() {
    let c = compile("def g() -> int by llm;").unwrap();
    let ir = c.base_mtir("g").unwrap();
    assert!(ir.inputs.is_empty());
    assert!(ir.hierarchy.is_empty());
    let star = enrich_mtir(&ir, &c.semtable, SemanticsMode::Sem);
    assert_eq!(
        serialize_mtir(&star),
        r#"{"name":"g","inputs":[],"output":{"type":"int"},"hierarchy":[]}"#
    );
}

#[test]
fn self_referential_class_terminates() {
    let src = "class Node { v: int; next: Optional[Node]; }\ndef h(n: Node) -> int by llm;";
    let c = compile(src).unwrap();
    let ir = c.base_mtir("h").unwrap();
    let keys: BTreeSet<TypeExpr> = ir.hierarchy.keys().cloned().collect();
    let oracle = dfs_keys(&c.program, &[t("Node"), t("int")]);
    assert_eq!(keys, oracle);
    assert_eq!(keys, BTreeSet::from([t("Node"), t("Optional[Node]")]));
    assert_eq!(ir.hierarchy.len(), 2);
}

#[test]
fn mutual_recursion_and_nested_generics() {
    let src =
        "class A { b: list[B]; } class B { a: dict[str, Optional[A]]; e: E; } enum E { X, Y }\n\
               def f(x: A) -> list[list[B]] by llm;";
    let c = compile(src).unwrap();
    let ir = c.base_mtir("f").unwrap();
    let keys: BTreeSet<TypeExpr> = ir.hierarchy.keys().cloned().collect();
    assert_eq!(keys, dfs_keys(&c.program, &[t("A"), t("list[list[B]]")]));
    assert_eq!(
        ir.hierarchy[&t("E")],
        Expansion::Enum(vec!["X".into(), "Y".into()])
    );
}

#[test]
fn unknown_callsite_lists_candidates() {
    let c = compile(PLAN).unwrap();
    match c.base_mtir("nope").unwrap_err() {
        CompileError::UnknownCallsite { candidates, .. } => {
            assert_eq!(candidates, ["generate_plan"])
        }
        other => panic!("{other:?}"),
    }
    let c = compile("def f() -> int { }").unwrap();
    assert!(
        c.base_mtir("f").is_err(),
        "opaque functions are not call-sites"
    );
}

#[test]
fn method_callsites_resolve_by_path_or_bare_name() {
    let c = compile(CONTENT_SEM).unwrap();
    let a = c.base_mtir("Supervisor.call_next_agent").unwrap();
    let b = c.base_mtir("call_next_agent").unwrap();
    assert_eq!(a, b);
    assert_eq!(a.path, "Supervisor.call_next_agent");
    let keys: Vec<String> = a.hierarchy.keys().map(|k| k.to_string()).collect();
    assert_eq!(keys, ["WorkflowStage", "AgentTypes"]);
}

#[test]
fn enrichment_with_two_sems() {
    let c = compile(PLAN_SEM).unwrap();
    let star = c.mtir_star("generate_plan", SemanticsMode::Sem).unwrap();
    let plan = star.entry(&t("Plan")).unwrap();
    assert_eq!(
        plan.ty.semtext.as_deref(),
        Some("A structured execution plan for code modifications")
    );
    let fields = star.class_fields("Plan").unwrap();
    assert_eq!(
        fields[5].semtext.as_deref(),
        Some("Priority Order 1 (main), 2-3 (suppportive), 4(misc)")
    );
    assert!(fields[..5].iter().all(|f| f.semtext.is_none()));
    assert!(star.name.semtext.is_none());
    assert!(star.inputs.iter().all(|i| i.semtext.is_none()));
    assert!(star.output.semtext.is_none());
    assert!(star.entry(&t("RepoState")).unwrap().ty.semtext.is_none());
}

#[test]
fn no_sems_means_all_absent_and_overlay_holds() {
    let c = compile(PLAN).unwrap();
    let base = c.base_mtir("generate_plan").unwrap();
    let star = enrich_mtir(&base, &c.semtable, SemanticsMode::Sem);
    assert!(star.semtexts().is_empty());
    assert_eq!(project_base(&star), base);
    let c = compile(PLAN_SEM).unwrap();
    let base = c.base_mtir("generate_plan").unwrap();
    assert_eq!(
        project_base(&enrich_mtir(&base, &c.semtable, SemanticsMode::Both)),
        base
    );
}

#[test]
fn docstring_mode_attaches_one_block_to_enum() {
    let c = compile(CONTENT_DOC).unwrap();
    let star = c
        .mtir_star("call_next_agent", SemanticsMode::Docstring)
        .unwrap();
    let entry = star.entry(&t("AgentTypes")).unwrap();
    let doc = entry.ty.semtext.as_deref().unwrap();
    assert!(doc.starts_with("In this Enum:\nPLANNER_AGENT : Agent responsible"));
    assert_eq!(doc.lines().count(), 5);
    assert!(star
        .enum_variants("AgentTypes")
        .unwrap()
        .iter()
        .all(|v| v.semtext.is_none()));
    // Sem mode ignores docstrings entirely.
    let star = c.mtir_star("call_next_agent", SemanticsMode::Sem).unwrap();
    assert!(star.semtexts().is_empty());
}

#[test]
fn both_mode_prefers_sem_over_docstring() {
    let src = "class A { \"doc\" x: int; }\nsem A = \"sem text\";\nclass B { \"b doc\" y: int; }\n\
               def f(a: A, b: B) -> int by llm \"fn doc\";";
    let c = compile(src).unwrap();
    let star = c.mtir_star("f", SemanticsMode::Both).unwrap();
    assert_eq!(
        star.entry(&t("A")).unwrap().ty.semtext.as_deref(),
        Some("sem text")
    );
    assert_eq!(
        star.entry(&t("B")).unwrap().ty.semtext.as_deref(),
        Some("b doc")
    );
    assert_eq!(star.name.semtext.as_deref(), Some("fn doc"));
    let star = c.mtir_star("f", SemanticsMode::Docstring).unwrap();
    assert_eq!(
        star.entry(&t("A")).unwrap().ty.semtext.as_deref(),
        Some("doc")
    );
}

#[test]
fn param_and_function_semtexts_land_on_their_slots() {
    let src = "class A { x: int; }\ndef f(a: A, n: int) -> A by llm;\n\
               sem f = \"fn\";\nsem f.a = \"param a\";\nsem A = \"type A\";";
    let c = compile(src).unwrap();
    let star = c.mtir_star("f", SemanticsMode::Sem).unwrap();
    assert_eq!(star.name.semtext.as_deref(), Some("fn"));
    assert_eq!(star.inputs[0].semtext.as_deref(), Some("param a"));
    assert_eq!(star.inputs[1].semtext, None);
    assert_eq!(star.output.semtext.as_deref(), Some("type A"));
    assert_eq!(
        star.entry(&t("A")).unwrap().ty.semtext.as_deref(),
        Some("type A")
    );
}

#[test]
fn enrichment_locality() {
    let base_src = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../corpus/plan_sem.mtl"
    ))
    .unwrap();
    let changed_src = base_src.replace("4(misc)", "4 (misc, changed)");
    let a = compile(&base_src)
        .unwrap()
        .mtir_star("generate_plan", SemanticsMode::Sem)
        .unwrap();
    let b = compile(&changed_src)
        .unwrap()
        .mtir_star("generate_plan", SemanticsMode::Sem)
        .unwrap();
    let (sa, sb) = (a.semtexts(), b.semtexts());
    assert_eq!(sa.len(), sb.len());
    let diffs = sa.iter().zip(&sb).filter(|(x, y)| x != y).count();
    assert_eq!(diffs, 1);
}

#[test]
fn serialization_order_and_determinism() {
    let c = compile(PLAN_SEM).unwrap();
    let star = c.mtir_star("generate_plan", SemanticsMode::Sem).unwrap();
    let json = serialize_mtir(&star);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let order: Vec<&str> = v["hierarchy"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["type"].as_str().unwrap())
        .collect();
    let pos = |k: &str| order.iter().position(|x| *x == k).unwrap();
    assert!(pos("list[Plan]") < pos("Plan"));
    assert_eq!(v["hierarchy"][pos("Plan")]["kind"], "class");
    assert_eq!(
        v["hierarchy"][pos("Plan")]["semtext"],
        "A structured execution plan for code modifications"
    );
    let again = compile(PLAN_SEM)
        .unwrap()
        .mtir_star("generate_plan", SemanticsMode::Sem)
        .unwrap();
    assert_eq!(json, serialize_mtir(&again));
}

#[test]
fn semantics_mode_parsing() {
    assert_eq!(
        "docstring".parse::<SemanticsMode>().unwrap(),
        SemanticsMode::Docstring
    );
    assert!("prompt".parse::<SemanticsMode>().is_err());
    assert_eq!(SemanticsMode::Both.to_string(), "both");
}
