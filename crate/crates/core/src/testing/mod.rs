//! Seeded generators for property tests: random MTL programs and well-typed
//! runtime values.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frontend::TypeExpr;
use crate::mtir::MtIrStar;
use crate::promptgen::RuntimeValue;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_types: usize,
    pub max_generic_depth: usize,
    pub max_attrs: usize,
    pub max_functions: usize,
    /// Chance that any annotatable entity gets a `sem`.
    pub sem_rate: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_types: 6,
            max_generic_depth: 3,
            max_attrs: 4,
            max_functions: 3,
            sem_rate: 0.4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedProgram {
    pub source: String,
    /// Dotted paths of the `by llm` functions.
    pub callsites: Vec<String>,
    /// Target paths of the generated `sem` declarations, in source order.
    pub sem_targets: Vec<String>,
}

struct TypeDef {
    name: String,
    is_enum: bool,
    docstring: Option<String>,
    attrs: Vec<(String, TypeExpr, Option<&'static str>)>,
    variants: Vec<String>,
}

fn random_type(rng: &mut impl Rng, names: &[String], depth: usize) -> TypeExpr {
    let roll = rng.random_range(0..10);
    if depth > 0 && roll < 3 {
        return match rng.random_range(0..3) {
            0 => TypeExpr::generic("list", vec![random_type(rng, names, depth - 1)]),
            1 => TypeExpr::generic("Optional", vec![random_type(rng, names, depth - 1)]),
            _ => TypeExpr::generic(
                "dict",
                vec![TypeExpr::named("str"), random_type(rng, names, depth - 1)],
            ),
        };
    }
    if roll < 7 && !names.is_empty() {
        return TypeExpr::named(names.choose(rng).unwrap().as_str());
    }
    TypeExpr::named(*["str", "int", "float", "bool"].choose(rng).unwrap())
}

/// A random well-formed program: up to `max_types` classes and enums with
/// arbitrary (possibly cyclic) references, nested generics, `by llm`
/// functions and methods, and `sem` declarations in random order.
pub fn random_program(rng: &mut impl Rng, cfg: &GenConfig) -> GeneratedProgram {
    let n = rng.random_range(1..=cfg.max_types);
    let names: Vec<String> = (0..n)
        .map(|i| {
            if rng.random_bool(0.3) {
                format!("E{i}")
            } else {
                format!("C{i}")
            }
        })
        .collect();
    let class_names: Vec<String> = names
        .iter()
        .filter(|n| n.starts_with('C'))
        .cloned()
        .collect();

    let mut defs: Vec<TypeDef> = Vec::new();
    for name in &names {
        let is_enum = name.starts_with('E');
        let docstring = rng.random_bool(0.3).then(|| format!("doc of {name}"));
        let (mut attrs, mut variants) = (Vec::new(), Vec::new());
        if is_enum {
            for v in 0..rng.random_range(1..=4) {
                variants.push(format!("V{v}"));
            }
        } else {
            for a in 0..rng.random_range(0..=cfg.max_attrs) {
                let ty = random_type(rng, &names, cfg.max_generic_depth);
                let default = match ty.head() {
                    "Optional" if rng.random_bool(0.5) => Some("None"),
                    "int" if rng.random_bool(0.3) => Some("3"),
                    "str" if rng.random_bool(0.3) => Some("\"x\""),
                    "list" if rng.random_bool(0.3) => Some("[]"),
                    _ => None,
                };
                attrs.push((format!("a{a}"), ty, default));
            }
        }
        defs.push(TypeDef {
            name: name.clone(),
            is_enum,
            docstring,
            attrs,
            variants,
        });
    }

    let mut sem_targets: Vec<String> = Vec::new();
    let mut consider = |rng: &mut dyn RngCore, path: String| {
        if rng.random_bool(cfg.sem_rate) {
            sem_targets.push(path);
        }
    };
    for d in &defs {
        consider(rng, d.name.clone());
        for (a, _, _) in &d.attrs {
            consider(rng, format!("{}.{a}", d.name));
        }
        for v in &d.variants {
            consider(rng, format!("{}.{v}", d.name));
        }
    }

    // Functions: (owner class, signature text, params).
    let mut functions: Vec<(Option<String>, String)> = Vec::new();
    let mut callsites = Vec::new();
    for i in 0..rng.random_range(1..=cfg.max_functions) {
        let owner = if !class_names.is_empty() && rng.random_bool(0.3) {
            Some(class_names.choose(rng).unwrap().clone())
        } else {
            None
        };
        let fname = format!("f{i}");
        let path = match &owner {
            Some(c) => format!("{c}.{fname}"),
            None => fname.clone(),
        };
        let params: Vec<String> = (0..rng.random_range(0..=3))
            .map(|p| {
                let ty = random_type(rng, &names, cfg.max_generic_depth);
                consider(rng, format!("{path}.p{p}"));
                format!("p{p}: {ty}")
            })
            .collect();
        let ret = random_type(rng, &names, cfg.max_generic_depth);
        consider(rng, path.clone());
        let by_llm = rng.random_bool(0.85);
        let body = if by_llm {
            callsites.push(path.clone());
            " by llm;".to_string()
        } else {
            " { return x + 1; }".to_string()
        };
        functions.push((
            owner,
            format!("def {fname}({}) -> {ret}{body}", params.join(", ")),
        ));
    }
    if callsites.is_empty() {
        callsites.push("fz".to_string());
        functions.push((None, "def fz() -> int by llm;".to_string()));
    }

    let mut src = String::from("# generated\n");
    for d in &defs {
        if d.is_enum {
            src.push_str(&format!("enum {} {{\n", d.name));
        } else {
            src.push_str(&format!("class {} {{\n", d.name));
        }
        if let Some(doc) = &d.docstring {
            src.push_str(&format!("    \"{doc}\"\n"));
        }
        if d.is_enum {
            src.push_str(&format!("    {}\n", d.variants.join(", ")));
        }
        for (a, ty, default) in &d.attrs {
            match default {
                Some(lit) => src.push_str(&format!("    {a}: {ty} = {lit};\n")),
                None => src.push_str(&format!("    {a}: {ty};\n")),
            }
        }
        for (owner, f) in &functions {
            if owner.as_deref() == Some(d.name.as_str()) {
                src.push_str(&format!("    {f}\n"));
            }
        }
        src.push_str("}\n");
    }
    for (owner, f) in &functions {
        if owner.is_none() {
            src.push_str(f);
            src.push('\n');
        }
    }

    // Sems may precede their targets in declaration order; shuffle them.
    use rand::seq::SliceRandom;
    sem_targets.shuffle(rng);
    for (k, t) in sem_targets.iter().enumerate() {
        src.push_str(&format!("sem {t} = \"text {k} for {t}\";\n"));
    }

    GeneratedProgram {
        source: src,
        callsites,
        sem_targets,
    }
}

fn random_string(rng: &mut impl Rng) -> String {
    const POOL: &[char] = &[
        'a', 'b', 'z', 'Q', '0', '9', ' ', '_', '\'', '"', '\\', '\n', '\t', '\r', '(', ')', '[',
        ']', ',', '=', '.', 'é', 'λ', '日', '🦀', '\u{1}', '\u{7f}',
    ];
    (0..rng.random_range(0..12))
        .map(|_| *POOL.choose(rng).unwrap())
        .collect()
}

fn random_float(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..6) {
        0 => 0.0,
        1 => rng.random_range(-1000..1000) as f64,
        2 => f64::from_bits(rng.random::<u64>()),
        3 => f64::INFINITY,
        _ => rng.random_range(-1.0e6..1.0e6),
    }
}

/// A random value of type `ty`, using the IR's hierarchy for classes and
/// enums. Objects carry every field in declaration order, so the result is
/// already in the normal form `conform` produces. NaN is never generated.
pub fn random_value(
    rng: &mut impl Rng,
    ty: &TypeExpr,
    ir: &MtIrStar,
    depth: usize,
) -> RuntimeValue {
    match ty {
        TypeExpr::Named(n) => match n.as_str() {
            "str" => RuntimeValue::Str(random_string(rng)),
            "int" => RuntimeValue::Int(match rng.random_range(0..4) {
                0 => rng.random(),
                1 => i64::MIN,
                _ => rng.random_range(-100..100),
            }),
            "float" => {
                let mut x = random_float(rng);
                while x.is_nan() {
                    x = random_float(rng);
                }
                RuntimeValue::Float(x)
            }
            "bool" => RuntimeValue::Bool(rng.random()),
            name => {
                if let Some(variants) = ir.enum_variants(name) {
                    return RuntimeValue::EnumVariant {
                        enum_name: name.to_string(),
                        variant: variants.choose(rng).unwrap().item.clone(),
                    };
                }
                let fields = ir.class_fields(name).expect("type reachable from the IR");
                RuntimeValue::Object {
                    class: name.to_string(),
                    fields: fields
                        .iter()
                        .map(|f| {
                            let d = depth.saturating_sub(1);
                            (f.item.name.clone(), random_value(rng, &f.item.ty, ir, d))
                        })
                        .collect(),
                }
            }
        },
        TypeExpr::Generic(head, args) => {
            let len = if depth == 0 {
                0
            } else {
                rng.random_range(0..4)
            };
            match head.as_str() {
                "Optional" if depth == 0 || rng.random_bool(0.3) => RuntimeValue::None,
                "Optional" => random_value(rng, &args[0], ir, depth - 1),
                "list" => RuntimeValue::List(
                    (0..len)
                        .map(|_| random_value(rng, &args[0], ir, depth - 1))
                        .collect(),
                ),
                _ => RuntimeValue::Dict(
                    (0..len)
                        .map(|_| {
                            (
                                random_string(rng),
                                random_value(rng, &args[1], ir, depth - 1),
                            )
                        })
                        .collect::<BTreeMap<_, _>>(),
                ),
            }
        }
    }
}
