use mtsem_core::frontend::parse_source;
use mtsem_core::semtable::{build_semtable, build_symbol_table};
use mtsem_core::testing::{random_program, rng, GenConfig};
use mtsem_core::{compile, CompileError};
use proptest::prelude::*;

const BASE: &str = r#"
enum Stage { PLANNING, WRITING }
class Plan {
    action: str;
    priority: int = 1;
    def refine(note: str) -> Plan by llm;
}
def generate_plan(goal: str, stage: Stage) -> list[Plan] by llm;
let budget: int;
"#;

const TARGETS: &[&str] = &[
    "Plan",
    "Plan.priority",
    "Stage.WRITING",
    "generate_plan.goal",
    "Plan.refine.note",
    "generate_plan",
    "budget",
];

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

fn with_sems(order: &[usize]) -> String {
    let mut src = BASE.to_string();
    for &i in order {
        src.push_str(&format!(
            "sem {} = \"meaning of {}\";\n",
            TARGETS[i], TARGETS[i]
        ));
    }
    src
}

#[test]
fn sem_order_does_not_matter() {
    // Every choice of up to four distinct targets, in every order.
    let n = TARGETS.len();
    for mask in 0u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if chosen.len() > 4 {
            continue;
        }
        let perms = permutations(&chosen);
        let reference = compile(&with_sems(&perms[0])).unwrap().semtable;
        for p in &perms[1..] {
            assert_eq!(compile(&with_sems(p)).unwrap().semtable, reference, "{p:?}");
        }
        assert_eq!(
            reference.entries().filter(|e| e.semtext.is_some()).count(),
            chosen.len()
        );
    }
}

#[test]
fn duplicate_sem_is_rejected_in_any_order() {
    let src = format!("{BASE}sem Plan = \"a\";\nsem Plan.priority = \"p\";\nsem Plan = \"b\";\n");
    match compile(&src).unwrap_err() {
        CompileError::DuplicateSem {
            target,
            first,
            second,
        } => {
            assert_eq!(target, "Plan");
            assert!(first < second);
        }
        other => panic!("{other}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn semtable_complete_and_idempotent(seed in any::<u64>()) {
        let prog = random_program(&mut rng(seed), &GenConfig::default());
        let ast = parse_source(&prog.source).unwrap();
        let symbols = build_symbol_table(&ast).unwrap();
        let sigma = build_semtable(&ast, &symbols).unwrap();

        // Completeness: exactly the targeted entries carry text, and the right text.
        for e in sigma.entries() {
            let pos = prog.sem_targets.iter().position(|t| *t == e.path);
            let expected = pos.map(|k| format!("text {k} for {}", e.path));
            prop_assert_eq!(&e.semtext, &expected);
        }
        // The pass only touches semtexts.
        for (a, b) in symbols.entries().zip(sigma.entries()) {
            let mut b = b.clone();
            b.semtext = None;
            prop_assert_eq!(a, &b);
        }
        prop_assert_eq!(symbols.len(), sigma.len());
        // Idempotence: running the pass over its own output changes nothing.
        prop_assert_eq!(build_semtable(&ast, &sigma).unwrap(), sigma);
    }
}
