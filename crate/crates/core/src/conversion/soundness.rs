//! Classical workflow-net soundness by explicit reachability analysis.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::petri::{Marking, PetriNet, PlaceId};
use super::reduction;

pub const DEFAULT_STATE_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SoundnessViolationKind {
    NotWorkflowShape,
    DeadTransition,
    ImproperCompletion,
    CannotComplete,
    StateCapExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessViolation {
    pub kind: SoundnessViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub sound: bool,
    pub violations: Vec<SoundnessViolation>,
    pub explored_states: usize,
}

impl SoundnessReport {
    pub fn has(&self, kind: SoundnessViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

pub(crate) type Dense = Box<[u32]>;

pub(crate) fn dense(net: &PetriNet, m: &Marking) -> Dense {
    let mut v = vec![0u32; net.places().len()];
    for (&p, &n) in m {
        v[p.0] = n;
    }
    v.into_boxed_slice()
}

pub(crate) fn describe_marking(net: &PetriNet, m: &[u32]) -> String {
    let parts: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(i, &n)| {
            let id = &net.place(PlaceId(i)).id;
            if n == 1 {
                id.clone()
            } else {
                format!("{n}×{id}")
            }
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn structural_problems(net: &PetriNet) -> Vec<String> {
    let mut problems = Vec::new();
    let (producers, consumers) = net.place_neighbours();
    let sources: Vec<usize> = (0..net.places().len()).filter(|&p| producers[p].is_empty()).collect();
    let sinks: Vec<usize> = (0..net.places().len()).filter(|&p| consumers[p].is_empty()).collect();
    let names = |ps: &[usize]| {
        ps.iter()
            .map(|&p| net.place(PlaceId(p)).id.clone())
            .collect::<Vec<_>>()
            .join(", ")
    };
    if sources.len() != 1 {
        problems.push(format!(
            "expected one source place, found {} [{}]",
            sources.len(),
            names(&sources)
        ));
    }
    if sinks.len() != 1 {
        problems.push(format!(
            "expected one sink place, found {} [{}]",
            sinks.len(),
            names(&sinks)
        ));
    }
    if let [source] = sources[..] {
        let expected = Marking::from([(PlaceId(source), 1)]);
        if net.initial_marking != expected {
            problems.push("initial marking is not one token on the source place".to_string());
        }
    }
    if let [sink] = sinks[..] {
        let expected = Marking::from([(PlaceId(sink), 1)]);
        if net.final_marking != expected {
            problems.push("final marking is not one token on the sink place".to_string());
        }
    }
    if let ([source], [sink]) = (&sources[..], &sinks[..]) {
        // Graph over places (0..P) and transitions (P..P+T).
        let np = net.places().len();
        let nt = net.transitions().len();
        let mut fwd = vec![Vec::new(); np + nt];
        let mut bwd = vec![Vec::new(); np + nt];
        for arc in net.arcs() {
            let (a, b) = match *arc {
                super::petri::Arc::PlaceToTransition(p, t) => (p.0, np + t.0),
                super::petri::Arc::TransitionToPlace(t, p) => (np + t.0, p.0),
            };
            fwd[a].push(b);
            bwd[b].push(a);
        }
        let from_source = reach(&fwd, *source);
        let to_sink = reach(&bwd, *sink);
        let off_path: Vec<String> = (0..np + nt)
            .filter(|&x| !(from_source[x] && to_sink[x]))
            .map(|x| {
                if x < np {
                    net.place(PlaceId(x)).id.clone()
                } else {
                    net.transitions()[x - np].id.clone()
                }
            })
            .collect();
        if !off_path.is_empty() {
            problems.push(format!(
                "nodes not on a path from source to sink: {}",
                off_path.join(", ")
            ));
        }
    }
    problems
}

fn reach(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

/// Checks option to complete, proper completion and absence of dead
/// transitions, plus workflow-net shape. Exploring more than `state_cap`
/// markings makes the result inconclusive (`sound == false` with a
/// `StateCapExceeded` violation).
///
/// Well-shaped nets are first tried against structural reductions; when
/// those prove soundness no markings are explored and `explored_states` is
/// zero.
pub fn check_soundness(net: &PetriNet, state_cap: usize) -> SoundnessReport {
    let mut violations: Vec<SoundnessViolation> = structural_problems(net)
        .into_iter()
        .map(|detail| SoundnessViolation {
            kind: SoundnessViolationKind::NotWorkflowShape,
            detail,
        })
        .collect();
    if violations.is_empty() && reduction::proves_sound(net) {
        return SoundnessReport {
            sound: true,
            violations,
            explored_states: 0,
        };
    }

    let presets = net.presets();
    let postsets = net.postsets();
    let initial = dense(net, &net.initial_marking);
    let target = dense(net, &net.final_marking);

    let mut index: HashMap<Dense, usize> = HashMap::new();
    let mut states: Vec<Dense> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut fired = vec![false; net.transitions().len()];
    let mut queue = VecDeque::new();
    index.insert(initial.clone(), 0);
    states.push(initial);
    succ.push(Vec::new());
    queue.push_back(0);
    let mut capped = false;

    while let Some(s) = queue.pop_front() {
        for t in 0..net.transitions().len() {
            let current = &states[s];
            if !presets[t].iter().all(|p| current[p.0] > 0) {
                continue;
            }
            fired[t] = true;
            let mut next = current.clone();
            for p in &presets[t] {
                next[p.0] -= 1;
            }
            for p in &postsets[t] {
                next[p.0] += 1;
            }
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= state_cap {
                        capped = true;
                        break;
                    }
                    let id = states.len();
                    index.insert(next.clone(), id);
                    states.push(next);
                    succ.push(Vec::new());
                    queue.push_back(id);
                    id
                }
            };
            succ[s].push(id);
        }
        if capped {
            break;
        }
    }

    let explored_states = states.len();
    if capped {
        violations.push(SoundnessViolation {
            kind: SoundnessViolationKind::StateCapExceeded,
            detail: format!("more than {state_cap} reachable markings; result is inconclusive"),
        });
        return SoundnessReport {
            sound: false,
            violations,
            explored_states,
        };
    }

    let dead: Vec<&str> = (0..net.transitions().len())
        .filter(|&t| !fired[t])
        .map(|t| net.transitions()[t].id.as_str())
        .collect();
    for id in dead {
        let t = net.transitions().iter().find(|t| t.id == id).unwrap();
        let what = t.label.as_deref().map(|l| format!(" ('{l}')")).unwrap_or_default();
        violations.push(SoundnessViolation {
            kind: SoundnessViolationKind::DeadTransition,
            detail: format!("transition {id}{what} can never fire"),
        });
    }

    let improper: Vec<&Dense> = states
        .iter()
        .filter(|m| **m != target && m.iter().zip(target.iter()).all(|(a, b)| a >= b))
        .collect();
    if let Some(first) = improper.first() {
        violations.push(SoundnessViolation {
            kind: SoundnessViolationKind::ImproperCompletion,
            detail: format!(
                "{} reachable marking(s) strictly cover the final marking, e.g. {}",
                improper.len(),
                describe_marking(net, first)
            ),
        });
    }

    let mut pred = vec![Vec::new(); states.len()];
    for (s, next) in succ.iter().enumerate() {
        for &t in next {
            pred[t].push(s);
        }
    }
    let mut can_finish = vec![false; states.len()];
    if let Some(&f) = index.get(&target) {
        can_finish[f] = true;
        let mut stack = vec![f];
        while let Some(x) = stack.pop() {
            for &y in &pred[x] {
                if !can_finish[y] {
                    can_finish[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    let stuck: Vec<usize> = (0..states.len()).filter(|&s| !can_finish[s]).collect();
    if let Some(&first) = stuck.first() {
        violations.push(SoundnessViolation {
            kind: SoundnessViolationKind::CannotComplete,
            detail: format!(
                "{} reachable marking(s) cannot reach the final marking, e.g. {}",
                stuck.len(),
                describe_marking(net, &states[first])
            ),
        });
    }

    SoundnessReport {
        sound: violations.is_empty(),
        violations,
        explored_states,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversion::to_petri_net;
    use crate::powl::PowlModel;

    #[test]
    fn activity_net_is_sound() {
        let net = to_petri_net(&PowlModel::activity("a").unwrap()).unwrap();
        let r = check_soundness(&net, DEFAULT_STATE_CAP);
        assert!(r.sound, "{r:?}");
        assert_eq!(r.explored_states, 0);
    }

    #[test]
    fn isolated_transition_is_dead() {
        let mut net = PetriNet::new("n");
        let i = net.add_place("i");
        let o = net.add_place("o");
        let a = net.add_transition("a", Some("a".into()));
        net.add_input(i, a);
        net.add_output(a, o);
        let x = net.add_transition("x", Some("x".into()));
        let unmarked = net.add_place("u");
        net.add_input(unmarked, x);
        net.add_output(x, o);
        net.initial_marking.insert(i, 1);
        net.final_marking.insert(o, 1);
        let r = check_soundness(&net, 100);
        assert!(!r.sound);
        assert!(r.has(SoundnessViolationKind::DeadTransition));
        assert!(r.has(SoundnessViolationKind::NotWorkflowShape));
    }

    #[test]
    fn extra_token_is_improper_completion() {
        // i -> t -> (o, o2) where o2 -> u -> o: two tokens can end up on o.
        let mut net = PetriNet::new("n");
        let i = net.add_place("i");
        let o = net.add_place("o");
        let mid = net.add_place("mid");
        let t = net.add_transition("t", Some("t".into()));
        let u = net.add_transition("u", Some("u".into()));
        net.add_input(i, t);
        net.add_output(t, o);
        net.add_output(t, mid);
        net.add_input(mid, u);
        net.add_output(u, o);
        net.initial_marking.insert(i, 1);
        net.final_marking.insert(o, 1);
        let r = check_soundness(&net, 100);
        assert!(r.has(SoundnessViolationKind::ImproperCompletion));
        assert!(r.has(SoundnessViolationKind::CannotComplete));
    }

    #[test]
    fn unbounded_net_hits_cap() {
        let mut net = PetriNet::new("n");
        let i = net.add_place("i");
        let o = net.add_place("o");
        let t = net.add_transition("t", Some("t".into()));
        net.add_input(i, t);
        net.add_output(t, i);
        net.add_output(t, o);
        net.initial_marking.insert(i, 1);
        net.final_marking.insert(o, 1);
        let r = check_soundness(&net, 50);
        assert!(!r.sound);
        assert!(r.has(SoundnessViolationKind::StateCapExceeded));
        assert_eq!(r.explored_states, 50);
    }
}
