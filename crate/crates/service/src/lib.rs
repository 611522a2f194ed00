//! HTTP service and command-line front end for process model generation.
//!
//! The [`api`] router exposes conversations over REST, [`store`] keeps them,
//! [`config`] reads the shared TOML configuration and [`cli`] implements the
//! `promodel` binary.

pub mod api;
pub mod cli;
pub mod config;
pub mod store;

use promodel::conversion::{export_bpmn_xml, export_pnml, to_bpmn, to_petri_net, ConversionError};
use promodel::powl::{to_json_pretty, PowlModel};

/// Output document formats for models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[value(name = "powl-json")]
    PowlJson,
    Pnml,
    Bpmn,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "powl-json" | "json" => Some(Format::PowlJson),
            "pnml" => Some(Format::Pnml),
            "bpmn" => Some(Format::Bpmn),
            _ => None,
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            Format::PowlJson => "application/json",
            Format::Pnml | Format::Bpmn => "application/xml",
        }
    }

    pub fn render(self, model: &PowlModel) -> Result<String, ConversionError> {
        match self {
            Format::PowlJson => Ok(to_json_pretty(model)),
            Format::Pnml => export_pnml(&to_petri_net(model)?),
            Format::Bpmn => export_bpmn_xml(&to_bpmn(model)?),
        }
    }
}
