//! Prints the messages that open a conversation for a process description.
//!
//! cargo run -p promodel --example prompt_preview -- ../../fixtures/replay/hotel/description.txt [template-dir]

use std::process::ExitCode;

use promodel::prompting::{build_generation_prompt, PromptTemplate};

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: prompt_preview <description> [template-dir]");
        return ExitCode::from(2);
    };
    let template = match args.next() {
        Some(dir) => match PromptTemplate::load_dir(dir.as_ref()) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::FAILURE;
            }
        },
        None => PromptTemplate::builtin(),
    };
    if let Err(e) = template.check() {
        eprintln!("template: {e}");
        return ExitCode::FAILURE;
    }
    let description = match std::fs::read_to_string(&path) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::from(2);
        }
    };
    match build_generation_prompt(&description, &template) {
        Ok(messages) => {
            for m in messages {
                println!("===== {:?} ({} chars)\n{}\n", m.author, m.content.len(), m.content);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
