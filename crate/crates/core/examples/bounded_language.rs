//! Enumerates the traces of a model program up to a loop bound and length.
//!
//! cargo run -p promodel --example bounded_language -- templates/examples/01-code.txt 1 12

use std::process::ExitCode;

use promodel::dsl;
use promodel::semantics::bounded_language;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (Some(path), max_loop, max_len) = (
        args.first(),
        args.get(1).and_then(|a| a.parse().ok()).unwrap_or(1),
        args.get(2).and_then(|a| a.parse().ok()).unwrap_or(10),
    ) else {
        eprintln!("usage: bounded_language <program> [max_loop] [max_len]");
        return ExitCode::from(2);
    };
    let model = match std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|c| {
        dsl::compile(&c).map(|o| o.model).map_err(|e| e.to_string())
    }) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::FAILURE;
        }
    };
    match bounded_language(&model, max_loop, max_len) {
        Ok(lang) => {
            for t in &lang {
                println!("{t}");
            }
            eprintln!("{} traces", lang.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
