//! POWL → workflow Petri net and BPMN, soundness checking, and PNML / BPMN
//! XML export.

mod bpmn;
mod net_language;
mod petri;
mod reduction;
mod soundness;
mod xml;

use thiserror::Error;

use crate::powl::Violation;

pub use bpmn::{to_bpmn, BpmnModel, BpmnNode, BpmnNodeKind, SequenceFlow};
pub use net_language::{bounded_net_language, bounded_net_language_with_loops};
pub use petri::{
    to_petri_net, Arc, LoopRole, Marking, PetriNet, Place, PlaceId, Transition, TransitionId,
};
pub use soundness::{
    check_soundness, SoundnessReport, SoundnessViolation, SoundnessViolationKind,
    DEFAULT_STATE_CAP,
};
pub use xml::{export_bpmn_xml, export_pnml};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConversionError {
    #[error("model is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    ValidationFailed(Vec<Violation>),
    #[error("state space exceeds {cap} states")]
    StateCapExceeded { cap: usize },
    #[error("malformed input: {0}")]
    InvariantViolated(String),
}
