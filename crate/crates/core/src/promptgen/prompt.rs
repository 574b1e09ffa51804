use std::fmt;

use super::bind::BoundArguments;
use super::value::render_value;
use crate::mtir::{ExpansionStar, MtIrStar};

pub const SYSTEM_LINES: [&str; 3] = [
    "This is an operation you must perform and return the output values.",
    "Follow the provided Input, Output, and Type information.",
    "Do not explain. Do not add commentary. Return only the output value(s).",
];

pub const OUTPUT_INSTRUCTION: &str =
    "Generate and return the output result(s) only, adhering to the provided Type in the following format";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PromptOptions {
    /// Render attribute defaults in class explanations.
    pub show_defaults: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SectionKind {
    SystemPrompt,
    InputsInformation,
    OutputInformation,
    TypeExplanations,
    Action,
    OutputMarker,
}

impl SectionKind {
    pub const ALL: [SectionKind; 6] = [
        SectionKind::SystemPrompt,
        SectionKind::InputsInformation,
        SectionKind::OutputInformation,
        SectionKind::TypeExplanations,
        SectionKind::Action,
        SectionKind::OutputMarker,
    ];

    pub fn header(self) -> Option<&'static str> {
        match self {
            SectionKind::SystemPrompt => Some("[System Prompt]"),
            SectionKind::InputsInformation => Some("[Inputs_Information]"),
            SectionKind::OutputInformation => Some("[Output_Information]"),
            SectionKind::TypeExplanations => Some("[Type_Explanations]"),
            SectionKind::Action => Some("[Action]"),
            SectionKind::OutputMarker => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub kind: SectionKind,
    /// Body lines, header excluded.
    pub lines: Vec<String>,
}

/// A rendered prompt, kept as sections until [`render`](Self::render).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptDocument {
    sections: Vec<Section>,
}

impl PromptDocument {
    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn section(&self, kind: SectionKind) -> &Section {
        self.sections
            .iter()
            .find(|s| s.kind == kind)
            .expect("every section kind is present")
    }

    /// Sections separated by one blank line, `\n` line endings, trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            if let Some(h) = s.kind.header() {
                out.push_str(h);
                out.push('\n');
            }
            for line in &s.lines {
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

impl fmt::Display for PromptDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn suffix(semtext: &Option<String>) -> String {
    match semtext {
        Some(t) => format!(" -- \"{t}\""),
        None => String::new(),
    }
}

fn comma(i: usize, len: usize) -> &'static str {
    if i + 1 < len {
        ","
    } else {
        ""
    }
}

/// Renders the prompt for one invocation. Each semantic text is placed as a
/// suffix on the line that names its entity.
pub fn assemble_prompt(
    ir: &MtIrStar,
    bound: &BoundArguments,
    options: PromptOptions,
) -> PromptDocument {
    let inputs = ir
        .inputs
        .iter()
        .map(|slot| {
            let f = &slot.item;
            let value = bound
                .get(&f.name)
                .map(|v| format!(" = {}", render_value(v)))
                .unwrap_or_default();
            format!("({}) ({}){value}{}", f.name, f.ty, suffix(&slot.semtext))
        })
        .collect();

    // A type with its own explanation block carries its text there, once.
    let explained = ir
        .entry(&ir.output.item)
        .is_some_and(|h| !matches!(h.expansion, ExpansionStar::Generic(_)));
    let output_sem = if explained {
        None
    } else {
        ir.output.semtext.clone()
    };
    let output = vec![format!("({}){}", ir.output.item, suffix(&output_sem))];

    let mut types: Vec<String> = Vec::new();
    for h in &ir.hierarchy {
        let name = &h.ty.item;
        let head_sem = suffix(&h.ty.semtext);
        match &h.expansion {
            ExpansionStar::Generic(_) => continue,
            ExpansionStar::Class(fields) if fields.is_empty() => {
                if !types.is_empty() {
                    types.push(String::new());
                }
                types.push(format!("({name}) (obj) eg: {name}(){head_sem}"));
            }
            ExpansionStar::Class(fields) => {
                if !types.is_empty() {
                    types.push(String::new());
                }
                types.push(format!("({name}) (obj) eg: {name}({head_sem}"));
                for (i, a) in fields.iter().enumerate() {
                    let f = &a.item;
                    let default = match (&f.default, options.show_defaults) {
                        (Some(d), true) => format!(
                            " (default: {})",
                            render_value(&super::RuntimeValue::from_literal(d))
                        ),
                        _ => String::new(),
                    };
                    types.push(format!(
                        "  {} = {}{default}{}{}",
                        f.name,
                        f.ty,
                        comma(i, fields.len()),
                        suffix(&a.semtext)
                    ));
                }
                types.push(")".to_string());
            }
            ExpansionStar::Enum(variants) => {
                if !types.is_empty() {
                    types.push(String::new());
                }
                types.push(format!("({name}) (enum) variants:{head_sem}"));
                for (i, v) in variants.iter().enumerate() {
                    types.push(format!(
                        "  {name}.{}{}{}",
                        v.item,
                        comma(i, variants.len()),
                        suffix(&v.semtext)
                    ));
                }
            }
        }
    }

    let sections = vec![
        Section {
            kind: SectionKind::SystemPrompt,
            lines: SYSTEM_LINES.iter().map(|s| s.to_string()).collect(),
        },
        Section {
            kind: SectionKind::InputsInformation,
            lines: inputs,
        },
        Section {
            kind: SectionKind::OutputInformation,
            lines: output,
        },
        Section {
            kind: SectionKind::TypeExplanations,
            lines: types,
        },
        Section {
            kind: SectionKind::Action,
            lines: vec![format!("{}{}", ir.name.item, suffix(&ir.name.semtext))],
        },
        Section {
            kind: SectionKind::OutputMarker,
            lines: vec![
                OUTPUT_INSTRUCTION.to_string(),
                String::new(),
                "[Output]".to_string(),
                "<result>".to_string(),
            ],
        },
    ];
    PromptDocument { sections }
}
