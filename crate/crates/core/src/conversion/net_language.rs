//! Visible language of a net, for checking the conversion against the direct
//! semantics.
//!
//! The states reachable within `max_len` visible steps are explored once,
//! together with each state's visible distance to the final marking. Traces
//! are then read off by a lazy subset construction: after each visible prefix
//! we keep the set of states reachable through silent moves that can still
//! finish within the length budget, and extend the prefix label by label.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::petri::{LoopRole, PetriNet};
use super::soundness::{dense, Dense};
use super::ConversionError;
use crate::semantics::{Language, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct State {
    marking: Dense,
    rounds: Box<[u32]>,
}

const FAR: usize = usize::MAX;

struct Explorer<'a> {
    net: &'a PetriNet,
    presets: Vec<Vec<usize>>,
    postsets: Vec<Vec<usize>>,
    max_loop: Option<u32>,
    states: Vec<State>,
    /// Outgoing `(transition, state)` pairs.
    succ: Vec<Vec<(usize, usize)>>,
    /// Fewest visible steps from a state to the final marking.
    to_end: Vec<usize>,
    is_end: Vec<bool>,
    closures: HashMap<usize, Vec<usize>>,
}

impl<'a> Explorer<'a> {
    fn fire(&self, s: &State, t: usize) -> Option<State> {
        if !self.presets[t].iter().all(|&p| s.marking[p] > 0) {
            return None;
        }
        let mut rounds = s.rounds.clone();
        match self.net.transitions()[t].role {
            LoopRole::Plain => {}
            LoopRole::Enter(l) | LoopRole::Exit(l) => rounds[l] = 0,
            LoopRole::Redo(l) => {
                if let Some(max) = self.max_loop {
                    if rounds[l] >= max {
                        return None;
                    }
                    rounds[l] += 1;
                }
            }
        }
        let mut marking = s.marking.clone();
        for &p in &self.presets[t] {
            marking[p] -= 1;
        }
        for &p in &self.postsets[t] {
            marking[p] += 1;
        }
        Some(State { marking, rounds })
    }

    /// Silent plain transitions that are the only consumer of each of their
    /// inputs, none of which is marked at the end. Once enabled such a
    /// transition stays enabled and commutes with everything else, so firing
    /// it first loses no visible behaviour.
    fn private_silent(&self, target: &Dense) -> Vec<bool> {
        let mut consumers = vec![0usize; target.len()];
        for pre in &self.presets {
            for &p in pre {
                consumers[p] += 1;
            }
        }
        self.net
            .transitions()
            .iter()
            .enumerate()
            .map(|(t, tr)| {
                tr.is_silent()
                    && tr.role == LoopRole::Plain
                    && !self.presets[t].is_empty()
                    && self.presets[t].iter().all(|&p| consumers[p] == 1 && target[p] == 0)
            })
            .collect()
    }

    /// Explores every state within `max_len` visible steps of `start`.
    fn build(&mut self, start: State, max_len: usize, cap: usize, target: &Dense) -> Result<(), ConversionError> {
        let silent: Vec<bool> = self.net.transitions().iter().map(|t| t.is_silent()).collect();
        let private = self.private_silent(target);
        let mut index: HashMap<State, usize> = HashMap::from([(start.clone(), 0)]);
        self.states.push(start);
        self.succ.push(Vec::new());
        let mut depth = vec![0usize];
        let mut queue = VecDeque::from([0usize]);
        let mut expanded = vec![false];
        while let Some(s) = queue.pop_front() {
            if expanded[s] {
                continue;
            }
            expanded[s] = true;
            self.succ[s].clear();
            let eager = (0..silent.len())
                .find(|&t| private[t] && self.presets[t].iter().all(|&p| self.states[s].marking[p] > 0));
            for (t, &is_silent) in silent.iter().enumerate() {
                if eager.is_some_and(|e| e != t) {
                    continue;
                }
                let step = usize::from(!is_silent);
                let d = depth[s] + step;
                if d > max_len {
                    continue;
                }
                let Some(next) = self.fire(&self.states[s], t) else { continue };
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if self.states.len() >= cap {
                            return Err(ConversionError::StateCapExceeded { cap });
                        }
                        let id = self.states.len();
                        index.insert(next.clone(), id);
                        self.states.push(next);
                        self.succ.push(Vec::new());
                        depth.push(FAR);
                        expanded.push(false);
                        id
                    }
                };
                self.succ[s].push((t, id));
                if d < depth[id] {
                    depth[id] = d;
                    expanded[id] = false;
                    if step == 0 {
                        queue.push_front(id);
                    } else {
                        queue.push_back(id);
                    }
                }
            }
        }

        let n = self.states.len();
        self.is_end = self.states.iter().map(|s| s.marking == *target).collect();
        let mut pred: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (s, out) in self.succ.iter().enumerate() {
            for &(t, next) in out {
                pred[next].push((usize::from(!silent[t]), s));
            }
        }
        self.to_end = vec![FAR; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if self.is_end[s] {
                self.to_end[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &(w, p) in &pred[s] {
                let d = self.to_end[s] + w;
                if d < self.to_end[p] {
                    self.to_end[p] = d;
                    if w == 0 {
                        queue.push_front(p);
                    } else {
                        queue.push_back(p);
                    }
                }
            }
        }
        Ok(())
    }

    fn silent_closure(&mut self, start: usize) -> Vec<usize> {
        if let Some(c) = self.closures.get(&start) {
            return c.clone();
        }
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            for &(t, next) in &self.succ[s] {
                if self.net.transitions()[t].is_silent() && self.to_end[next] != FAR && seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        let c: Vec<usize> = seen.into_iter().collect();
        self.closures.insert(start, c.clone());
        c
    }

    fn explore(&mut self, set: BTreeSet<usize>, prefix: &mut Vec<String>, max_len: usize, out: &mut Language) {
        if set.iter().any(|&s| self.is_end[s]) {
            out.insert(Trace(prefix.clone()));
        }
        let left = max_len - prefix.len();
        if left == 0 {
            return;
        }
        let mut moves: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
        for &s in &set {
            for &(t, next) in &self.succ[s] {
                let Some(label) = self.net.transitions()[t].label.as_deref() else { continue };
                if self.to_end[next] < left {
                    moves.entry(label).or_default().insert(next);
                }
            }
        }
        for (label, targets) in moves {
            let mut closed = BTreeSet::new();
            for s in targets {
                closed.extend(self.silent_closure(s).into_iter().filter(|&c| self.to_end[c] < left));
            }
            prefix.push(label.to_string());
            self.explore(closed, prefix, max_len, out);
            prefix.pop();
        }
    }
}

/// Visible traces from the initial to the final marking with at most
/// `max_len` events. Loops are unbounded; only length limits the result.
pub fn bounded_net_language(
    net: &PetriNet,
    max_len: usize,
    state_cap: usize,
) -> Result<Language, ConversionError> {
    language(net, max_len, None, state_cap)
}

/// Like [`bounded_net_language`], but a loop may take at most `max_loop`
/// redo rounds per entry. Loop rounds are tracked through the [`LoopRole`]
/// tags on the loop's bracket transitions, so this only bounds nets produced
/// by [`super::to_petri_net`]; other nets behave as in the unbounded case.
pub fn bounded_net_language_with_loops(
    net: &PetriNet,
    max_len: usize,
    max_loop: usize,
    state_cap: usize,
) -> Result<Language, ConversionError> {
    language(net, max_len, Some(max_loop as u32), state_cap)
}

fn language(
    net: &PetriNet,
    max_len: usize,
    max_loop: Option<u32>,
    cap: usize,
) -> Result<Language, ConversionError> {
    let loops = net
        .transitions()
        .iter()
        .filter_map(|t| match t.role {
            LoopRole::Enter(l) | LoopRole::Redo(l) | LoopRole::Exit(l) => Some(l + 1),
            LoopRole::Plain => None,
        })
        .max()
        .unwrap_or(0);
    let mut ex = Explorer {
        net,
        presets: net.presets().into_iter().map(|ps| ps.into_iter().map(|p| p.0).collect()).collect(),
        postsets: net.postsets().into_iter().map(|ps| ps.into_iter().map(|p| p.0).collect()).collect(),
        max_loop,
        states: Vec::new(),
        succ: Vec::new(),
        to_end: Vec::new(),
        is_end: Vec::new(),
        closures: HashMap::new(),
    };
    let start = State {
        marking: dense(net, &net.initial_marking),
        rounds: vec![0; loops].into_boxed_slice(),
    };
    ex.build(start, max_len, cap, &dense(net, &net.final_marking))?;
    let mut out = Language::new();
    if ex.to_end[0] <= max_len {
        let set: BTreeSet<usize> = ex.silent_closure(0).into_iter().filter(|&c| ex.to_end[c] <= max_len).collect();
        ex.explore(set, &mut Vec::new(), max_len, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversion::to_petri_net;
    use crate::powl::{Dependency, PowlModel};

    fn act(label: &str) -> PowlModel {
        PowlModel::activity(label).unwrap()
    }

    fn lang(traces: &[&[&str]]) -> Language {
        traces.iter().map(|t| Trace::new(t.iter().copied())).collect()
    }

    #[test]
    fn single_activity() {
        let net = to_petri_net(&act("a")).unwrap();
        assert_eq!(bounded_net_language(&net, 5, 1000).unwrap(), lang(&[&["a"]]));
    }

    #[test]
    fn xor_net_language() {
        let net = to_petri_net(&PowlModel::xor(vec![Some(act("a")), Some(act("b"))]).unwrap())
            .unwrap();
        assert_eq!(
            bounded_net_language(&net, 5, 1000).unwrap(),
            lang(&[&["a"], &["b"]])
        );
    }

    #[test]
    fn loop_with_silent_redo() {
        let net = to_petri_net(&PowlModel::loop_(Some(act("a")), None).unwrap()).unwrap();
        assert_eq!(
            bounded_net_language(&net, 2, 1000).unwrap(),
            lang(&[&["a"], &["a", "a"]])
        );
        assert_eq!(
            bounded_net_language_with_loops(&net, 5, 1, 1000).unwrap(),
            lang(&[&["a"], &["a", "a"]])
        );
    }

    #[test]
    fn concurrent_pair() {
        let m = PowlModel::partial_order(vec![
            Dependency::Single(act("a")),
            Dependency::Single(act("b")),
        ])
        .unwrap();
        let net = to_petri_net(&m).unwrap();
        assert_eq!(
            bounded_net_language(&net, 2, 1000).unwrap(),
            lang(&[&["a", "b"], &["b", "a"]])
        );
    }

    #[test]
    fn cap_is_reported() {
        let nodes: Vec<Dependency> = (0..6).map(|i| Dependency::Single(act(&format!("a{i}")))).collect();
        let net = to_petri_net(&PowlModel::partial_order(nodes).unwrap()).unwrap();
        assert_eq!(
            bounded_net_language(&net, 6, 10),
            Err(ConversionError::StateCapExceeded { cap: 10 })
        );
    }
}
