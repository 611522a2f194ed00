//! BPMN process graphs derived from POWL structure.
//!
//! Operators map to block gateways: xor to an exclusive split/join pair, loop
//! to an exclusive join before the body and an exclusive split after it, and
//! partial orders to parallel gateways wherever a node has several
//! predecessors or successors in the transitive reduction. Silent nodes turn
//! into plain flows. Gateways left with one incoming and one outgoing flow
//! are removed at the end.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::powl::{transitive_closure, transitive_reduction, validate, Node, PowlModel};

use super::ConversionError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BpmnNodeKind {
    Task { label: String },
    StartEvent,
    EndEvent,
    ExclusiveGateway,
    ParallelGateway,
}

impl BpmnNodeKind {
    pub fn is_gateway(&self) -> bool {
        matches!(self, BpmnNodeKind::ExclusiveGateway | BpmnNodeKind::ParallelGateway)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpmnNode {
    pub id: String,
    pub kind: BpmnNodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SequenceFlow {
    pub id: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpmnModel {
    pub name: String,
    pub nodes: Vec<BpmnNode>,
    pub flows: Vec<SequenceFlow>,
}

impl BpmnModel {
    pub fn node(&self, id: &str) -> Option<&BpmnNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn count(&self, pred: impl Fn(&BpmnNodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }

    pub fn incoming(&self, id: &str) -> Vec<&SequenceFlow> {
        self.flows.iter().filter(|f| f.target == id).collect()
    }

    pub fn outgoing(&self, id: &str) -> Vec<&SequenceFlow> {
        self.flows.iter().filter(|f| f.source == id).collect()
    }

    pub fn task_labels(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter_map(|n| match &n.kind {
                BpmnNodeKind::Task { label } => Some(label.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Referential-integrity problems; empty when the model is well formed.
    ///
    /// Checks unique ids, existing flow endpoints, exactly one start and one
    /// end event, reachability from the start and to the end for every node,
    /// gateway degrees, and single in/out flows on tasks and events.
    pub fn integrity_problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                problems.push(format!("duplicate node id {}", n.id));
            }
        }
        let mut flow_ids = BTreeSet::new();
        for f in &self.flows {
            if !flow_ids.insert(f.id.as_str()) || ids.contains(f.id.as_str()) {
                problems.push(format!("duplicate flow id {}", f.id));
            }
            for end in [&f.source, &f.target] {
                if !ids.contains(end.as_str()) {
                    problems.push(format!("flow {} refers to missing node {end}", f.id));
                }
            }
        }
        let starts: Vec<&BpmnNode> =
            self.nodes.iter().filter(|n| n.kind == BpmnNodeKind::StartEvent).collect();
        let ends: Vec<&BpmnNode> =
            self.nodes.iter().filter(|n| n.kind == BpmnNodeKind::EndEvent).collect();
        if starts.len() != 1 {
            problems.push(format!("expected one start event, found {}", starts.len()));
        }
        if ends.len() != 1 {
            problems.push(format!("expected one end event, found {}", ends.len()));
        }
        for n in &self.nodes {
            let (ins, outs) = (self.incoming(&n.id).len(), self.outgoing(&n.id).len());
            let ok = match n.kind {
                BpmnNodeKind::StartEvent => ins == 0 && outs == 1,
                BpmnNodeKind::EndEvent => ins == 1 && outs == 0,
                BpmnNodeKind::Task { .. } => ins == 1 && outs == 1,
                _ => ins >= 1 && outs >= 1 && (ins >= 2 || outs >= 2),
            };
            if !ok {
                problems.push(format!("node {} has {ins} incoming and {outs} outgoing flows", n.id));
            }
        }
        if let ([start], [end]) = (&starts[..], &ends[..]) {
            let fwd = self.reachable(&start.id, true);
            let bwd = self.reachable(&end.id, false);
            for n in &self.nodes {
                if !fwd.contains(n.id.as_str()) {
                    problems.push(format!("node {} is not reachable from the start event", n.id));
                }
                if !bwd.contains(n.id.as_str()) {
                    problems.push(format!("end event is not reachable from node {}", n.id));
                }
            }
        }
        problems
    }

    fn reachable<'a>(&'a self, from: &'a str, forward: bool) -> BTreeSet<&'a str> {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for f in &self.flows {
                let (a, b) = if forward {
                    (f.source.as_str(), f.target.as_str())
                } else {
                    (f.target.as_str(), f.source.as_str())
                };
                if a == x && seen.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        seen
    }
}

enum Fragment {
    Empty,
    Block { entry: usize, exit: usize },
}

#[derive(Default)]
struct Builder {
    nodes: Vec<BpmnNode>,
    flows: BTreeSet<(usize, usize)>,
}

fn path_id(path: &[usize]) -> String {
    let mut s = "r".to_string();
    for i in path {
        s.push('_');
        s.push_str(&i.to_string());
    }
    s
}

impl Builder {
    fn add(&mut self, id: String, kind: BpmnNodeKind) -> usize {
        self.nodes.push(BpmnNode { id, kind });
        self.nodes.len() - 1
    }

    fn flow(&mut self, a: usize, b: usize) {
        self.flows.insert((a, b));
    }

    fn build(&mut self, model: &PowlModel, path: &mut Vec<usize>) -> Result<Fragment, ConversionError> {
        let here = path_id(path);
        Ok(match model.node() {
            Node::Activity { label } => {
                let t = self.add(format!("Task_{here}"), BpmnNodeKind::Task { label: label.clone() });
                Fragment::Block { entry: t, exit: t }
            }
            Node::Silent => Fragment::Empty,
            Node::Xor { children } => {
                let split = self.add(format!("XorSplit_{here}"), BpmnNodeKind::ExclusiveGateway);
                let join = self.add(format!("XorJoin_{here}"), BpmnNodeKind::ExclusiveGateway);
                for (i, child) in children.iter().enumerate() {
                    path.push(i);
                    let frag = self.build(child, path)?;
                    path.pop();
                    match frag {
                        Fragment::Empty => self.flow(split, join),
                        Fragment::Block { entry, exit } => {
                            self.flow(split, entry);
                            self.flow(exit, join);
                        }
                    }
                }
                Fragment::Block {
                    entry: split,
                    exit: join,
                }
            }
            Node::Loop { body, redo } => {
                let join = self.add(format!("LoopJoin_{here}"), BpmnNodeKind::ExclusiveGateway);
                let split = self.add(format!("LoopSplit_{here}"), BpmnNodeKind::ExclusiveGateway);
                path.push(0);
                let body = self.build(body, path)?;
                path.pop();
                path.push(1);
                let redo = self.build(redo, path)?;
                path.pop();
                for (frag, from, to) in [(body, join, split), (redo, split, join)] {
                    match frag {
                        Fragment::Empty => self.flow(from, to),
                        Fragment::Block { entry, exit } => {
                            self.flow(from, entry);
                            self.flow(exit, to);
                        }
                    }
                }
                Fragment::Block {
                    entry: join,
                    exit: split,
                }
            }
            Node::PartialOrder(po) => {
                let n = po.nodes().len();
                let mut frags = Vec::with_capacity(n);
                for (i, child) in po.nodes().iter().enumerate() {
                    path.push(i);
                    frags.push(self.build(child, path)?);
                    path.pop();
                }
                // Order among the non-silent nodes, bridged through silent ones.
                let keep: Vec<usize> = (0..n)
                    .filter(|&i| matches!(frags[i], Fragment::Block { .. }))
                    .collect();
                if keep.is_empty() {
                    return Ok(Fragment::Empty);
                }
                let closure = transitive_closure(po.edges(), n);
                let local: BTreeMap<usize, usize> =
                    keep.iter().enumerate().map(|(k, &i)| (i, k)).collect();
                let restricted: BTreeSet<(usize, usize)> = closure
                    .iter()
                    .filter_map(|(a, b)| Some((*local.get(a)?, *local.get(b)?)))
                    .collect();
                let reduced = transitive_reduction(&restricted, keep.len())
                    .map_err(|_| ConversionError::ValidationFailed(validate(model)))?;
                let mut in_port = Vec::with_capacity(keep.len());
                let mut out_port = Vec::with_capacity(keep.len());
                for (k, &i) in keep.iter().enumerate() {
                    let Fragment::Block { entry, exit } = frags[i] else {
                        unreachable!()
                    };
                    let preds = reduced.iter().filter(|(_, b)| *b == k).count();
                    let succs = reduced.iter().filter(|(a, _)| *a == k).count();
                    let node_path = format!("{here}_{i}");
                    in_port.push(if preds >= 2 {
                        let j = self.add(format!("AndJoinBefore_{node_path}"), BpmnNodeKind::ParallelGateway);
                        self.flow(j, entry);
                        j
                    } else {
                        entry
                    });
                    out_port.push(if succs >= 2 {
                        let s = self.add(format!("AndSplitAfter_{node_path}"), BpmnNodeKind::ParallelGateway);
                        self.flow(exit, s);
                        s
                    } else {
                        exit
                    });
                }
                for &(a, b) in &reduced {
                    self.flow(out_port[a], in_port[b]);
                }
                let sources: Vec<usize> =
                    (0..keep.len()).filter(|&k| !reduced.iter().any(|(_, b)| *b == k)).collect();
                let sinks: Vec<usize> =
                    (0..keep.len()).filter(|&k| !reduced.iter().any(|(a, _)| *a == k)).collect();
                let entry = if let [only] = sources[..] {
                    in_port[only]
                } else {
                    let s = self.add(format!("AndSplit_{here}"), BpmnNodeKind::ParallelGateway);
                    for &k in &sources {
                        self.flow(s, in_port[k]);
                    }
                    s
                };
                let exit = if let [only] = sinks[..] {
                    out_port[only]
                } else {
                    let j = self.add(format!("AndJoin_{here}"), BpmnNodeKind::ParallelGateway);
                    for &k in &sinks {
                        self.flow(out_port[k], j);
                    }
                    j
                };
                Fragment::Block { entry, exit }
            }
        })
    }

    /// Drops gateways with exactly one incoming and one outgoing flow.
    fn prune(&mut self) {
        loop {
            let victim = (0..self.nodes.len()).find(|&g| {
                self.nodes[g].kind.is_gateway()
                    && self.flows.iter().filter(|(_, b)| *b == g).count() == 1
                    && self.flows.iter().filter(|(a, _)| *a == g).count() == 1
            });
            let Some(g) = victim else {
                break;
            };
            let pred = self.flows.iter().find(|(_, b)| *b == g).unwrap().0;
            let succ = self.flows.iter().find(|(a, _)| *a == g).unwrap().1;
            self.flows.remove(&(pred, g));
            self.flows.remove(&(g, succ));
            self.flows.insert((pred, succ));
            // Detach; removed below.
            self.nodes[g].id.clear();
        }
        let alive: Vec<usize> = (0..self.nodes.len()).filter(|&i| !self.nodes[i].id.is_empty()).collect();
        let remap: BTreeMap<usize, usize> = alive.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        self.nodes = alive.iter().map(|&i| self.nodes[i].clone()).collect();
        self.flows = self.flows.iter().map(|(a, b)| (remap[a], remap[b])).collect();
    }
}

/// Derives a BPMN process from a valid POWL model.
pub fn to_bpmn(model: &PowlModel) -> Result<BpmnModel, ConversionError> {
    let violations = validate(model);
    if !violations.is_empty() {
        return Err(ConversionError::ValidationFailed(violations));
    }
    let mut b = Builder::default();
    let start = b.add("StartEvent".to_string(), BpmnNodeKind::StartEvent);
    let end = b.add("EndEvent".to_string(), BpmnNodeKind::EndEvent);
    match b.build(model, &mut Vec::new())? {
        Fragment::Empty => b.flow(start, end),
        Fragment::Block { entry, exit } => {
            b.flow(start, entry);
            b.flow(exit, end);
        }
    }
    b.prune();
    let mut flows: Vec<(String, String)> = b
        .flows
        .iter()
        .map(|&(x, y)| (b.nodes[x].id.clone(), b.nodes[y].id.clone()))
        .collect();
    flows.sort();
    let flows = flows
        .into_iter()
        .enumerate()
        .map(|(i, (source, target))| SequenceFlow {
            id: format!("Flow_{}", i + 1),
            source,
            target,
        })
        .collect();
    Ok(BpmnModel {
        name: "process".to_string(),
        nodes: b.nodes,
        flows,
    })
}
