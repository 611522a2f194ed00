//! Structural reductions that preserve liveness and boundedness.
//!
//! A workflow net is sound exactly when its short-circuited net (an extra
//! transition from sink back to source) is live and bounded. If the rules
//! below shrink the short-circuited net to one marked place with a single
//! self-loop transition, the original net is sound without exploring its
//! state space. When they get stuck nothing is concluded.

use std::collections::{BTreeSet, VecDeque};

use super::petri::PetriNet;

#[derive(Debug, Clone)]
struct Net {
    place_alive: Vec<bool>,
    marking: Vec<u32>,
    pre: Vec<BTreeSet<usize>>,
    post: Vec<BTreeSet<usize>>,
    trans_alive: Vec<bool>,
}

impl Net {
    fn producers(&self, p: usize) -> BTreeSet<usize> {
        self.live_transitions().filter(|&t| self.post[t].contains(&p)).collect()
    }

    fn consumers(&self, p: usize) -> BTreeSet<usize> {
        self.live_transitions().filter(|&t| self.pre[t].contains(&p)).collect()
    }

    fn live_transitions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.pre.len()).filter(|&t| self.trans_alive[t])
    }

    fn live_places(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.marking.len()).filter(|&p| self.place_alive[p])
    }

    fn remove_place(&mut self, p: usize) {
        self.place_alive[p] = false;
        for t in 0..self.pre.len() {
            self.pre[t].remove(&p);
            self.post[t].remove(&p);
        }
    }

    fn remove_transition(&mut self, t: usize) {
        self.trans_alive[t] = false;
        self.pre[t].clear();
        self.post[t].clear();
    }

    fn is_trivial(&self) -> bool {
        let places: Vec<usize> = self.live_places().collect();
        let trans: Vec<usize> = self.live_transitions().collect();
        match (places.as_slice(), trans.as_slice()) {
            ([p], [t]) => {
                self.marking[*p] == 1
                    && self.pre[*t].len() == 1
                    && self.pre[*t].contains(p)
                    && self.post[*t] == self.pre[*t]
            }
            _ => false,
        }
    }

    /// Two transitions with equal pre- and postsets: drop one.
    fn parallel_transitions(&mut self) -> bool {
        let ts: Vec<usize> = self.live_transitions().collect();
        for (i, &a) in ts.iter().enumerate() {
            for &b in &ts[i + 1..] {
                if self.pre[a] == self.pre[b] && self.post[a] == self.post[b] {
                    self.remove_transition(b);
                    return true;
                }
            }
        }
        false
    }

    /// Two places with equal producers, consumers and marking: drop one.
    fn parallel_places(&mut self) -> bool {
        let ps: Vec<usize> = self.live_places().collect();
        let sig: Vec<_> = ps.iter().map(|&p| (self.producers(p), self.consumers(p), self.marking[p])).collect();
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                if sig[i] == sig[j] {
                    self.remove_place(ps[j]);
                    return true;
                }
            }
        }
        false
    }

    /// A transition whose only input and only output is the same place,
    /// where that place is also fed by something else.
    fn self_loop_transitions(&mut self) -> bool {
        let ts: Vec<usize> = self.live_transitions().collect();
        for t in ts {
            if self.pre[t].len() == 1 && self.pre[t] == self.post[t] {
                let p = *self.pre[t].first().unwrap();
                if self.producers(p).len() > 1 {
                    self.remove_transition(t);
                    return true;
                }
            }
        }
        false
    }

    /// A marked place that is only read and written back by one transition
    /// which has other inputs.
    fn self_loop_places(&mut self) -> bool {
        let ps: Vec<usize> = self.live_places().collect();
        for p in ps {
            if self.marking[p] == 0 {
                continue;
            }
            let prod = self.producers(p);
            if prod.len() == 1 && prod == self.consumers(p) {
                let t = *prod.first().unwrap();
                if self.pre[t].len() > 1 {
                    self.remove_place(p);
                    return true;
                }
            }
        }
        false
    }

    /// `p1 -> t -> p2` where `t` is the only way out of `p1` and only needs
    /// `p1`: merge `p1` into `p2`.
    fn series_places(&mut self) -> bool {
        let ts: Vec<usize> = self.live_transitions().collect();
        for t in ts {
            if self.pre[t].len() != 1 || self.post[t].len() != 1 {
                continue;
            }
            let p1 = *self.pre[t].first().unwrap();
            let p2 = *self.post[t].first().unwrap();
            if p1 == p2 || self.consumers(p1).len() != 1 {
                continue;
            }
            let into_p1 = self.producers(p1);
            if into_p1.is_empty() || !into_p1.is_disjoint(&self.producers(p2)) {
                continue;
            }
            for u in into_p1 {
                self.post[u].insert(p2);
            }
            self.marking[p2] += self.marking[p1];
            self.remove_transition(t);
            self.remove_place(p1);
            return true;
        }
        false
    }

    /// `t1 -> p -> t2` where `p` only links them and `t2` only needs `p`:
    /// fold `t2` into `t1`.
    fn series_transitions(&mut self) -> bool {
        let ps: Vec<usize> = self.live_places().collect();
        for p in ps {
            if self.marking[p] != 0 {
                continue;
            }
            let prod = self.producers(p);
            let cons = self.consumers(p);
            if prod.len() != 1 || cons.len() != 1 {
                continue;
            }
            let t1 = *prod.first().unwrap();
            let t2 = *cons.first().unwrap();
            if t1 == t2 || self.pre[t2].len() != 1 {
                continue;
            }
            let mut out: BTreeSet<usize> = self.post[t1].clone();
            out.remove(&p);
            if !out.is_disjoint(&self.post[t2]) {
                continue;
            }
            out.extend(self.post[t2].iter().copied());
            self.post[t1] = out;
            self.remove_transition(t2);
            self.remove_place(p);
            return true;
        }
        false
    }

    /// An unmarked place `t -> p -> u` is redundant when another chain of
    /// unmarked single-in single-out places already leads from `t` to `u`:
    /// `u` can never fire more often than `t` along that chain.
    fn implicit_places(&mut self) -> bool {
        let ps: Vec<usize> = self.live_places().collect();
        let simple: Vec<Option<(usize, usize)>> = (0..self.marking.len())
            .map(|q| {
                if !self.place_alive[q] || self.marking[q] != 0 {
                    return None;
                }
                let prod = self.producers(q);
                let cons = self.consumers(q);
                (prod.len() == 1 && cons.len() == 1).then(|| (*prod.first().unwrap(), *cons.first().unwrap()))
            })
            .collect();
        for p in ps {
            let Some((t, u)) = simple[p] else { continue };
            if t == u {
                continue;
            }
            let mut seen = vec![false; self.pre.len()];
            seen[t] = true;
            let mut queue = VecDeque::from([t]);
            let mut found = false;
            'search: while let Some(x) = queue.pop_front() {
                for &q in &self.post[x] {
                    if q == p {
                        continue;
                    }
                    if let Some((_, next)) = simple[q] {
                        if next == u {
                            found = true;
                            break 'search;
                        }
                        if !seen[next] {
                            seen[next] = true;
                            queue.push_back(next);
                        }
                    }
                }
            }
            if found {
                self.remove_place(p);
                return true;
            }
        }
        false
    }
}

/// True when the reductions prove `net` sound. Assumes the workflow shape
/// (one source, one sink, everything on a path between them) was checked
/// separately.
pub(crate) fn proves_sound(net: &PetriNet) -> bool {
    let (producers, consumers) = net.place_neighbours();
    let sources: Vec<usize> = (0..net.places().len()).filter(|&p| producers[p].is_empty()).collect();
    let sinks: Vec<usize> = (0..net.places().len()).filter(|&p| consumers[p].is_empty()).collect();
    let ([source], [sink]) = (sources.as_slice(), sinks.as_slice()) else {
        return false;
    };
    if net.initial_marking.iter().any(|(p, &n)| n != u32::from(p.0 == *source))
        || net.initial_marking.get(&super::PlaceId(*source)) != Some(&1)
        || net.final_marking.iter().any(|(p, &n)| n != u32::from(p.0 == *sink))
        || net.final_marking.get(&super::PlaceId(*sink)) != Some(&1)
    {
        return false;
    }

    let np = net.places().len();
    let mut marking = vec![0u32; np];
    marking[*source] = 1;
    let mut pre: Vec<BTreeSet<usize>> = net.presets().into_iter().map(|v| v.into_iter().map(|p| p.0).collect()).collect();
    let mut post: Vec<BTreeSet<usize>> =
        net.postsets().into_iter().map(|v| v.into_iter().map(|p| p.0).collect()).collect();
    pre.push(BTreeSet::from([*sink]));
    post.push(BTreeSet::from([*source]));
    let nt = pre.len();
    let mut n = Net {
        place_alive: vec![true; np],
        marking,
        pre,
        post,
        trans_alive: vec![true; nt],
    };
    loop {
        if n.is_trivial() {
            return true;
        }
        let progressed = n.parallel_transitions()
            || n.self_loop_transitions()
            || n.series_transitions()
            || n.series_places()
            || n.parallel_places()
            || n.self_loop_places()
            || n.implicit_places();
        if !progressed {
            return false;
        }
    }
}
