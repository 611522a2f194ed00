//! Runs a whole conversation against recorded LLM responses: the initial
//! description, then one refinement per line of `feedback.txt`.
//!
//! cargo run -p promodel --example replay_generation -- ../../fixtures/replay/online_shop

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use promodel::orchestrator::{Conversation, LoopConfig, Orchestrator, ReplayProvider};

fn summary(conv: &Conversation) {
    let turn = conv.last_turn().unwrap();
    println!(
        "{:?} turn: {:?}, {} call(s), {} critical / {} adjustable repair(s)",
        turn.kind, turn.status, turn.llm_calls, turn.critical_rounds, turn.adjustable_rounds
    );
    for d in &turn.diagnostics {
        let auto = if d.resolved_automatically { " (resolved automatically)" } else { "" };
        println!("  {:?} {:?} at {:?}: {}{auto}", d.category, d.source, d.stage, d.message.lines().next().unwrap_or(""));
    }
    if let Some(v) = conv.current() {
        println!("  model v{}: {}", conv.versions.len(), v.model);
    }
}

fn main() -> ExitCode {
    let Some(dir) = std::env::args().nth(1).map(PathBuf::from) else {
        eprintln!("usage: replay_generation <fixture-dir>");
        return ExitCode::from(2);
    };
    let description = match std::fs::read_to_string(dir.join("description.txt")) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{}: {e}", dir.display());
            return ExitCode::from(2);
        }
    };
    let provider = match ReplayProvider::new(&dir) {
        Ok(p) => Arc::new(p),
        Err(e) => {
            eprintln!("{}: {e}", dir.display());
            return ExitCode::from(2);
        }
    };
    let orch = Orchestrator::new(provider, LoopConfig::default());
    let mut conv = match orch.generate(&description) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    summary(&conv);
    let feedback = std::fs::read_to_string(dir.join("feedback.txt")).unwrap_or_default();
    for line in feedback.lines().filter(|l| !l.trim().is_empty()) {
        println!("feedback: {line}");
        if let Err(e) = orch.refine(&mut conv, line) {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
        summary(&conv);
    }
    println!("{:?} with {} version(s)", conv.status, conv.versions.len());
    ExitCode::SUCCESS
}
