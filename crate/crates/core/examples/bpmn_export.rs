//! Derives a BPMN process from a model program and writes BPMN 2.0 XML.
//!
//! cargo run -p promodel --example bpmn_export -- templates/examples/01-code.txt > bicycle.bpmn

use std::process::ExitCode;

use promodel::conversion::{export_bpmn_xml, to_bpmn};
use promodel::dsl;

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: bpmn_export <program>");
        return ExitCode::from(2);
    };
    let model = match std::fs::read_to_string(&path)
        .map_err(|e| e.to_string())
        .and_then(|c| dsl::compile(&c).map_err(|e| e.to_string()))
    {
        Ok(out) => out.model,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::FAILURE;
        }
    };
    let bpmn = match to_bpmn(&model) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    for problem in bpmn.integrity_problems() {
        eprintln!("integrity: {problem}");
    }
    eprintln!("{} nodes, {} flows", bpmn.nodes.len(), bpmn.flows.len());
    match export_bpmn_xml(&bpmn) {
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
