//! Sound business process models from natural-language descriptions.
//!
//! An LLM is prompted to write a short program against a four-function model
//! builder. The program is parsed and audited by a purpose-built interpreter
//! (nothing is handed to a general runtime), turned into a [`powl::PowlModel`],
//! checked, converted to a workflow Petri net and a BPMN process, and exported
//! as PNML or BPMN 2.0 XML. Errors go back to the LLM for repair; some are
//! fixed automatically once the repair budget is used up.
//!
//! Run `cargo run -p promodel --example <name>` for a tour; see the
//! `examples/` directory of this crate.

pub mod powl;
pub mod semantics;
pub mod conversion;
pub mod dsl;
pub mod orchestrator;
pub mod prompting;
