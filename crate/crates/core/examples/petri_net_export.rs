//! Translates a model program into a workflow net and writes PNML.
//!
//! cargo run -p promodel --example petri_net_export -- templates/examples/02-code.txt > claim.pnml

use std::process::ExitCode;

use promodel::conversion::{export_pnml, to_petri_net};
use promodel::dsl;

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: petri_net_export <program>");
        return ExitCode::from(2);
    };
    let code = match std::fs::read_to_string(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::from(2);
        }
    };
    let result = dsl::compile(&code)
        .map_err(|e| e.to_string())
        .and_then(|out| to_petri_net(&out.model).map_err(|e| e.to_string()))
        .and_then(|net| {
            eprintln!(
                "{} places, {} transitions ({} silent), {} arcs",
                net.places().len(),
                net.transitions().len(),
                net.transitions().iter().filter(|t| t.is_silent()).count(),
                net.arcs().len()
            );
            export_pnml(&net).map_err(|e| e.to_string())
        });
    match result {
        Ok(xml) => {
            print!("{xml}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
