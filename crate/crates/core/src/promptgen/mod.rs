//! The runtime side: binding arguments, assembling prompts and reading typed
//! values back out of model replies.

mod bind;
mod prompt;
mod response;
mod value;

pub use bind::{args_from_json, bind_arguments, BindError, BoundArguments};
pub use prompt::{
    assemble_prompt, PromptDocument, PromptOptions, Section, SectionKind, OUTPUT_INSTRUCTION,
    SYSTEM_LINES,
};
pub use response::{parse_response, parse_value, strip_framing, ParseError, ResponseError};
pub use value::{conform, render_value, RuntimeValue, TypeError};
