//! Place/transition nets and the POWL → workflow net translation.

use std::collections::{BTreeMap, BTreeSet};

use crate::powl::{validate, Node, PowlModel};

use super::ConversionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub id: String,
}

/// Marks the silent transitions that bracket a loop so that analyses can
/// bound the number of redo rounds. Plain for everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoopRole {
    Plain,
    Enter(usize),
    Redo(usize),
    Exit(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    /// `None` for silent transitions.
    pub label: Option<String>,
    pub role: LoopRole,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arc {
    PlaceToTransition(PlaceId, TransitionId),
    TransitionToPlace(TransitionId, PlaceId),
}

/// Token counts per place; absent places hold no tokens.
pub type Marking = BTreeMap<PlaceId, u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    pub name: String,
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: BTreeSet<Arc>,
    pub initial_marking: Marking,
    pub final_marking: Marking,
}

impl PetriNet {
    pub fn new(name: impl Into<String>) -> Self {
        PetriNet {
            name: name.into(),
            places: Vec::new(),
            transitions: Vec::new(),
            arcs: BTreeSet::new(),
            initial_marking: Marking::new(),
            final_marking: Marking::new(),
        }
    }

    pub fn add_place(&mut self, id: impl Into<String>) -> PlaceId {
        self.places.push(Place { id: id.into() });
        PlaceId(self.places.len() - 1)
    }

    pub fn add_transition(&mut self, id: impl Into<String>, label: Option<String>) -> TransitionId {
        self.add_transition_with_role(id, label, LoopRole::Plain)
    }

    pub fn add_transition_with_role(
        &mut self,
        id: impl Into<String>,
        label: Option<String>,
        role: LoopRole,
    ) -> TransitionId {
        self.transitions.push(Transition {
            id: id.into(),
            label,
            role,
        });
        TransitionId(self.transitions.len() - 1)
    }

    pub fn add_input(&mut self, place: PlaceId, transition: TransitionId) {
        self.arcs.insert(Arc::PlaceToTransition(place, transition));
    }

    pub fn add_output(&mut self, transition: TransitionId, place: PlaceId) {
        self.arcs.insert(Arc::TransitionToPlace(transition, place));
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn arcs(&self) -> &BTreeSet<Arc> {
        &self.arcs
    }

    pub fn place(&self, id: PlaceId) -> &Place {
        &self.places[id.0]
    }

    pub fn transition(&self, id: TransitionId) -> &Transition {
        &self.transitions[id.0]
    }

    /// Input places of every transition.
    pub fn presets(&self) -> Vec<Vec<PlaceId>> {
        let mut out = vec![Vec::new(); self.transitions.len()];
        for arc in &self.arcs {
            if let Arc::PlaceToTransition(p, t) = *arc {
                out[t.0].push(p);
            }
        }
        out
    }

    /// Output places of every transition.
    pub fn postsets(&self) -> Vec<Vec<PlaceId>> {
        let mut out = vec![Vec::new(); self.transitions.len()];
        for arc in &self.arcs {
            if let Arc::TransitionToPlace(t, p) = *arc {
                out[t.0].push(p);
            }
        }
        out
    }

    /// Transitions producing into / consuming from every place.
    pub fn place_neighbours(&self) -> (Vec<Vec<TransitionId>>, Vec<Vec<TransitionId>>) {
        let mut producers = vec![Vec::new(); self.places.len()];
        let mut consumers = vec![Vec::new(); self.places.len()];
        for arc in &self.arcs {
            match *arc {
                Arc::TransitionToPlace(t, p) => producers[p.0].push(t),
                Arc::PlaceToTransition(p, t) => consumers[p.0].push(t),
            }
        }
        (producers, consumers)
    }

    /// Checks that every arc and marking refers to an existing node and that
    /// ids are unique.
    pub fn check_references(&self) -> Result<(), ConversionError> {
        let mut ids = BTreeSet::new();
        for id in self
            .places
            .iter()
            .map(|p| &p.id)
            .chain(self.transitions.iter().map(|t| &t.id))
        {
            if !ids.insert(id) {
                return Err(ConversionError::InvariantViolated(format!("duplicate id {id}")));
            }
        }
        for arc in &self.arcs {
            let (p, t) = match *arc {
                Arc::PlaceToTransition(p, t) | Arc::TransitionToPlace(t, p) => (p, t),
            };
            if p.0 >= self.places.len() || t.0 >= self.transitions.len() {
                return Err(ConversionError::InvariantViolated(format!(
                    "arc {arc:?} refers to a missing node"
                )));
            }
        }
        for p in self.initial_marking.keys().chain(self.final_marking.keys()) {
            if p.0 >= self.places.len() {
                return Err(ConversionError::InvariantViolated(format!(
                    "marking refers to missing place {}",
                    p.0
                )));
            }
        }
        Ok(())
    }

    /// Fuses series places around plain silent transitions: a silent `t` with
    /// exactly one input `p` and one output `q`, where `t` is the only
    /// consumer of `p` and the only producer of `q`, is removed and `q` is
    /// merged into `p`. Weak language and soundness are unchanged.
    pub fn reduce_silent(&self) -> PetriNet {
        let mut net = self.clone();
        loop {
            let presets = net.presets();
            let postsets = net.postsets();
            let (producers, consumers) = net.place_neighbours();
            let candidate = (0..net.transitions.len()).find(|&t| {
                let tr = &net.transitions[t];
                if !tr.is_silent() || tr.role != LoopRole::Plain {
                    return false;
                }
                let (pre, post) = (&presets[t], &postsets[t]);
                if pre.len() != 1 || post.len() != 1 || pre[0] == post[0] {
                    return false;
                }
                consumers[pre[0].0] == [TransitionId(t)] && producers[post[0].0] == [TransitionId(t)]
            });
            let Some(t) = candidate else {
                break;
            };
            let keep = presets[t][0];
            let gone = postsets[t][0];
            net = net.fuse(TransitionId(t), keep, gone);
        }
        net
    }

    /// Removes `t` and place `gone`, moving `gone`'s arcs and tokens to `keep`.
    fn fuse(&self, t: TransitionId, keep: PlaceId, gone: PlaceId) -> PetriNet {
        let place_map = |p: PlaceId| {
            let p = if p == gone { keep } else { p };
            PlaceId(if p.0 > gone.0 { p.0 - 1 } else { p.0 })
        };
        let trans_map = |x: TransitionId| TransitionId(if x.0 > t.0 { x.0 - 1 } else { x.0 });
        let mut out = PetriNet::new(self.name.clone());
        out.places = self
            .places
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != gone.0)
            .map(|(_, p)| p.clone())
            .collect();
        out.transitions = self
            .transitions
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != t.0)
            .map(|(_, x)| x.clone())
            .collect();
        for arc in &self.arcs {
            match *arc {
                Arc::PlaceToTransition(_, x) | Arc::TransitionToPlace(x, _) if x == t => {}
                Arc::PlaceToTransition(p, x) => {
                    out.arcs.insert(Arc::PlaceToTransition(place_map(p), trans_map(x)));
                }
                Arc::TransitionToPlace(x, p) => {
                    out.arcs.insert(Arc::TransitionToPlace(trans_map(x), place_map(p)));
                }
            }
        }
        let remap = |m: &Marking| {
            let mut r = Marking::new();
            for (&p, &n) in m {
                *r.entry(place_map(p)).or_default() += n;
            }
            r
        };
        out.initial_marking = remap(&self.initial_marking);
        out.final_marking = remap(&self.final_marking);
        out
    }
}

struct NetBuilder {
    net: PetriNet,
    places: usize,
    transitions: usize,
    loops: usize,
}

impl NetBuilder {
    fn place(&mut self) -> PlaceId {
        self.places += 1;
        self.net.add_place(format!("p{}", self.places))
    }

    fn transition(&mut self, label: Option<String>, role: LoopRole) -> TransitionId {
        self.transitions += 1;
        let id = format!("t{}", self.transitions);
        self.net.add_transition_with_role(id, label, role)
    }

    fn tau(&mut self, from: &[PlaceId], to: &[PlaceId], role: LoopRole) -> TransitionId {
        let t = self.transition(None, role);
        for &p in from {
            self.net.add_input(p, t);
        }
        for &p in to {
            self.net.add_output(t, p);
        }
        t
    }

    /// Adds the fragment for `model`, consuming from `entry` and producing
    /// into `exit`.
    fn build(&mut self, model: &PowlModel, entry: PlaceId, exit: PlaceId) -> Result<(), ConversionError> {
        match model.node() {
            Node::Activity { label } => {
                let t = self.transition(Some(label.clone()), LoopRole::Plain);
                self.net.add_input(entry, t);
                self.net.add_output(t, exit);
            }
            Node::Silent => {
                self.tau(&[entry], &[exit], LoopRole::Plain);
            }
            Node::Xor { children } => {
                for child in children {
                    let inner_in = self.place();
                    let inner_out = self.place();
                    self.tau(&[entry], &[inner_in], LoopRole::Plain);
                    self.build(child, inner_in, inner_out)?;
                    self.tau(&[inner_out], &[exit], LoopRole::Plain);
                }
            }
            Node::Loop { body, redo } => {
                let id = self.loops;
                self.loops += 1;
                let do_in = self.place();
                let do_out = self.place();
                let redo_in = self.place();
                let redo_out = self.place();
                self.tau(&[entry], &[do_in], LoopRole::Enter(id));
                self.build(body, do_in, do_out)?;
                self.tau(&[do_out], &[exit], LoopRole::Exit(id));
                self.tau(&[do_out], &[redo_in], LoopRole::Redo(id));
                self.build(redo, redo_in, redo_out)?;
                self.tau(&[redo_out], &[do_in], LoopRole::Plain);
            }
            Node::PartialOrder(po) => {
                let reduction = po.reduction().map_err(|_| {
                    ConversionError::ValidationFailed(validate(model))
                })?;
                let n = po.nodes().len();
                let ready: Vec<PlaceId> = (0..n).map(|_| self.place()).collect();
                let done: Vec<PlaceId> = (0..n).map(|_| self.place()).collect();
                let edge_places: BTreeMap<(usize, usize), PlaceId> =
                    reduction.iter().map(|&e| (e, self.place())).collect();
                self.tau(&[entry], &ready, LoopRole::Plain);
                for (i, child) in po.nodes().iter().enumerate() {
                    let child_in = self.place();
                    let child_out = self.place();
                    let mut before = vec![ready[i]];
                    before.extend(
                        edge_places
                            .iter()
                            .filter(|((_, t), _)| *t == i)
                            .map(|(_, &p)| p),
                    );
                    let mut after = vec![done[i]];
                    after.extend(
                        edge_places
                            .iter()
                            .filter(|((s, _), _)| *s == i)
                            .map(|(_, &p)| p),
                    );
                    self.tau(&before, &[child_in], LoopRole::Plain);
                    self.build(child, child_in, child_out)?;
                    self.tau(&[child_out], &after, LoopRole::Plain);
                }
                self.tau(&done, &[exit], LoopRole::Plain);
            }
        }
        Ok(())
    }
}

/// Translates a valid POWL model into a workflow net with one source place
/// (initially marked) and one sink place (finally marked).
///
/// Every operator is composed through explicit silent transitions. Partial
/// orders get one place per edge of the transitive reduction. Loop bracket
/// transitions carry a [`LoopRole`].
pub fn to_petri_net(model: &PowlModel) -> Result<PetriNet, ConversionError> {
    let violations = validate(model);
    if !violations.is_empty() {
        return Err(ConversionError::ValidationFailed(violations));
    }
    let mut b = NetBuilder {
        net: PetriNet::new("net"),
        places: 0,
        transitions: 0,
        loops: 0,
    };
    let source = b.net.add_place("source");
    let sink = b.net.add_place("sink");
    b.build(model, source, sink)?;
    b.net.initial_marking.insert(source, 1);
    b.net.final_marking.insert(sink, 1);
    Ok(b.net)
}
