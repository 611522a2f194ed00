//! Audits model programs without running them and lists every finding.
//!
//! cargo run -p promodel --example security_audit -- ../../fixtures/adversarial/*.py

use std::process::ExitCode;

use promodel::dsl::{audit, line_context, parse};

fn main() -> ExitCode {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    if paths.is_empty() {
        eprintln!("usage: security_audit <program>...");
        return ExitCode::from(2);
    }
    let mut clean = 0;
    for path in &paths {
        let code = match std::fs::read_to_string(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{path}: {e}");
                continue;
            }
        };
        let findings = match parse(&code) {
            Err(v) => vec![v],
            Ok(program) => audit(&program),
        };
        if findings.is_empty() {
            clean += 1;
            println!("{path}: ok");
            continue;
        }
        println!("{path}:");
        for f in findings {
            println!("  {f}");
            if let Some(ctx) = line_context(&code, f.line) {
                println!("  {ctx}");
            }
        }
    }
    eprintln!("{clean} of {} program(s) passed", paths.len());
    ExitCode::SUCCESS
}
