//! Compiles a model program (or an LLM response containing one) into POWL
//! JSON.
//!
//! cargo run -p promodel --example compile_program -- templates/examples/01-code.txt

use std::process::ExitCode;

use promodel::dsl;
use promodel::powl::{to_json_pretty, validate};

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: compile_program <file>");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::from(2);
        }
    };
    let code = match dsl::extract_code_block(&text) {
        Ok(c) => c.code,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    match dsl::compile(&code) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: line {}: {}", w.line, w.message);
            }
            for v in validate(&out.model) {
                eprintln!("invalid: {v}");
            }
            println!("{}", to_json_pretty(&out.model));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            if let Some(ctx) = e.line().and_then(|l| dsl::line_context(&code, l)) {
                eprintln!("{ctx}");
            }
            ExitCode::FAILURE
        }
    }
}
