//! PNML and BPMN 2.0 XML writers. Output is deterministic: same input, same
//! bytes.

use std::fmt::Write;

use super::bpmn::{BpmnModel, BpmnNodeKind};
use super::petri::{Arc, PetriNet};
use super::ConversionError;

const PTNET: &str = "http://www.pnml.org/version-2009/grammar/ptnet";
const BPMN_NS: &str = "http://www.omg.org/spec/BPMN/20100524/MODEL";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// PNML for a place/transition net. Silent transitions carry the
/// `$invisible$` tool-specific marker understood by common process mining
/// tools; the final marking goes into a `finalmarkings` element.
pub fn export_pnml(net: &PetriNet) -> Result<String, ConversionError> {
    net.check_references()?;
    let mut x = String::new();
    x.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
    let _ = writeln!(x, "  <net id=\"net\" type=\"{PTNET}\">");
    let _ = writeln!(x, "    <name><text>{}</text></name>", escape(&net.name));
    x.push_str("    <page id=\"page\">\n");
    for (i, place) in net.places().iter().enumerate() {
        let id = escape(&place.id);
        let _ = writeln!(x, "      <place id=\"{id}\">");
        let _ = writeln!(x, "        <name><text>{id}</text></name>");
        if let Some(n) = net.initial_marking.get(&super::PlaceId(i)) {
            let _ = writeln!(x, "        <initialMarking><text>{n}</text></initialMarking>");
        }
        x.push_str("      </place>\n");
    }
    for t in net.transitions() {
        let id = escape(&t.id);
        let _ = writeln!(x, "      <transition id=\"{id}\">");
        match &t.label {
            Some(label) => {
                let _ = writeln!(x, "        <name><text>{}</text></name>", escape(label));
            }
            None => {
                let _ = writeln!(x, "        <name><text>tau</text></name>");
                let _ = writeln!(
                    x,
                    "        <toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\" localNodeID=\"{id}\"/>"
                );
            }
        }
        x.push_str("      </transition>\n");
    }
    for (i, arc) in net.arcs().iter().enumerate() {
        let (source, target) = match *arc {
            Arc::PlaceToTransition(p, t) => (&net.place(p).id, &net.transition(t).id),
            Arc::TransitionToPlace(t, p) => (&net.transition(t).id, &net.place(p).id),
        };
        let _ = writeln!(
            x,
            "      <arc id=\"a{}\" source=\"{}\" target=\"{}\"/>",
            i + 1,
            escape(source),
            escape(target)
        );
    }
    x.push_str("    </page>\n    <finalmarkings>\n      <marking>\n");
    for (p, n) in &net.final_marking {
        let _ = writeln!(
            x,
            "        <place idref=\"{}\"><text>{n}</text></place>",
            escape(&net.place(*p).id)
        );
    }
    x.push_str("      </marking>\n    </finalmarkings>\n  </net>\n</pnml>\n");
    Ok(x)
}

/// BPMN 2.0 semantic XML (no diagram interchange section).
pub fn export_bpmn_xml(bpmn: &BpmnModel) -> Result<String, ConversionError> {
    let problems = bpmn.integrity_problems();
    if !problems.is_empty() {
        return Err(ConversionError::InvariantViolated(problems.join("; ")));
    }
    let mut x = String::new();
    x.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        x,
        "<definitions xmlns=\"{BPMN_NS}\" id=\"definitions\" targetNamespace=\"http://bpmn.io/schema/bpmn\">"
    );
    let _ = writeln!(
        x,
        "  <process id=\"process\" name=\"{}\" isExecutable=\"false\">",
        escape(&bpmn.name)
    );
    for node in &bpmn.nodes {
        let ins = bpmn.incoming(&node.id);
        let outs = bpmn.outgoing(&node.id);
        let (tag, extra) = match &node.kind {
            BpmnNodeKind::Task { label } => ("task", format!(" name=\"{}\"", escape(label))),
            BpmnNodeKind::StartEvent => ("startEvent", String::new()),
            BpmnNodeKind::EndEvent => ("endEvent", String::new()),
            BpmnNodeKind::ExclusiveGateway | BpmnNodeKind::ParallelGateway => {
                let tag = if node.kind == BpmnNodeKind::ExclusiveGateway {
                    "exclusiveGateway"
                } else {
                    "parallelGateway"
                };
                let direction = match (ins.len() > 1, outs.len() > 1) {
                    (true, true) => "Mixed",
                    (true, false) => "Converging",
                    _ => "Diverging",
                };
                (tag, format!(" gatewayDirection=\"{direction}\""))
            }
        };
        let _ = writeln!(x, "    <{tag} id=\"{}\"{extra}>", escape(&node.id));
        for f in ins {
            let _ = writeln!(x, "      <incoming>{}</incoming>", escape(&f.id));
        }
        for f in outs {
            let _ = writeln!(x, "      <outgoing>{}</outgoing>", escape(&f.id));
        }
        let _ = writeln!(x, "    </{tag}>");
    }
    for f in &bpmn.flows {
        let _ = writeln!(
            x,
            "    <sequenceFlow id=\"{}\" sourceRef=\"{}\" targetRef=\"{}\"/>",
            escape(&f.id),
            escape(&f.source),
            escape(&f.target)
        );
    }
    x.push_str("  </process>\n</definitions>\n");
    Ok(x)
}
