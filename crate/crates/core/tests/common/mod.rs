#![allow(dead_code)]

use std::path::PathBuf;

use promodel::conversion::{PetriNet, PlaceId};
use promodel::powl::{Dependency, PowlModel};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(rel: &str) -> String {
    std::fs::read_to_string(fixtures().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn listing2_code() -> String {
    std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("templates/examples/01-code.txt")).unwrap()
}

/// Shape limits for random models.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_depth: usize,
    pub max_order_nodes: usize,
    pub max_xor_branches: usize,
    pub edge_probability: f64,
}

impl Shape {
    /// Depth up to 5, up to 12 nodes per partial order, up to 4 xor branches.
    pub const FULL: Shape = Shape { max_depth: 5, max_order_nodes: 12, max_xor_branches: 4, edge_probability: 0.35 };
    /// Smaller orders, so that bounded languages stay enumerable.
    pub const LANGUAGE: Shape = Shape { max_depth: 4, max_order_nodes: 5, max_xor_branches: 3, edge_probability: 0.6 };
}

pub struct ModelGen<'r, R: Rng> {
    rng: &'r mut R,
    shape: Shape,
    next_label: usize,
}

impl<'r, R: Rng> ModelGen<'r, R> {
    pub fn new(rng: &'r mut R, shape: Shape) -> Self {
        ModelGen { rng, shape, next_label: 0 }
    }

    pub fn model(&mut self) -> PowlModel {
        self.node(0)
    }

    fn label(&mut self) -> String {
        let n = self.next_label;
        self.next_label += 1;
        if self.rng.gen_bool(0.1) && n > 0 {
            format!("t{}", self.rng.gen_range(0..n))
        } else {
            format!("t{n}")
        }
    }

    fn leaf(&mut self, allow_silent: bool) -> PowlModel {
        if allow_silent && self.rng.gen_bool(0.1) {
            PowlModel::silent()
        } else {
            let l = self.label();
            PowlModel::activity(l).unwrap()
        }
    }

    fn node(&mut self, depth: usize) -> PowlModel {
        let leaf_p = (0.25 + 0.18 * depth as f64).min(1.0);
        if depth >= self.shape.max_depth || self.rng.gen_bool(leaf_p) {
            return self.leaf(depth > 0);
        }
        match self.rng.gen_range(0..3) {
            0 => {
                let n = self.rng.gen_range(2..=self.shape.max_xor_branches);
                let mut children: Vec<Option<PowlModel>> = (0..n).map(|_| Some(self.node(depth + 1))).collect();
                if self.rng.gen_bool(0.2) {
                    children[0] = None;
                }
                PowlModel::xor(children).unwrap()
            }
            1 => {
                let body = self.node(depth + 1);
                let redo = if self.rng.gen_bool(0.4) { None } else { Some(self.node(depth + 1)) };
                match PowlModel::loop_(Some(body), redo) {
                    Ok(m) => m,
                    Err(_) => {
                        let a = self.leaf(false);
                        PowlModel::loop_(Some(a), None).unwrap()
                    }
                }
            }
            _ => {
                let cap = if depth == 0 { self.shape.max_order_nodes } else { self.shape.max_order_nodes.min(4) };
                let n = self.rng.gen_range(2..=cap.max(2));
                let nodes: Vec<PowlModel> = (0..n).map(|_| self.node(depth + 1)).collect();
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(self.rng);
                let mut deps = Vec::new();
                let mut mentioned = vec![false; n];
                for i in 0..n {
                    for j in i + 1..n {
                        if self.rng.gen_bool(self.shape.edge_probability) {
                            let (a, b) = (order[i], order[j]);
                            deps.push(Dependency::Edge(nodes[a].clone(), nodes[b].clone()));
                            mentioned[a] = true;
                            mentioned[b] = true;
                        }
                    }
                }
                for (i, m) in mentioned.iter().enumerate() {
                    if !m {
                        deps.push(Dependency::Single(nodes[i].clone()));
                    }
                }
                deps.shuffle(self.rng);
                PowlModel::partial_order(deps).unwrap()
            }
        }
    }
}

/// Fig. 2c-style defect: after login and item selection the user either
/// pays or completes an installment agreement, but the two branches are
/// joined by a synchronising transition that needs both.
///
/// ```text
/// i -> login -> p0 -> select -> p1 -> {pay -> p2 | installment -> p3}
/// {p2, p3} -> deliver (AND-join) -> o
/// ```
pub fn xor_split_and_join_net() -> PetriNet {
    let mut net = PetriNet::new("xor-split/and-join");
    let i = net.add_place("i");
    let p0 = net.add_place("p0");
    let p1 = net.add_place("p1");
    let p2 = net.add_place("p2");
    let p3 = net.add_place("p3");
    let o = net.add_place("o");
    let login = net.add_transition("login", Some("Log in".into()));
    let select = net.add_transition("select", Some("Select items".into()));
    let pay = net.add_transition("pay", Some("Pay".into()));
    let inst = net.add_transition("installment", Some("Complete installment agreement".into()));
    let deliver = net.add_transition("deliver", Some("Deliver items".into()));
    net.add_input(i, login);
    net.add_output(login, p0);
    net.add_input(p0, select);
    net.add_output(select, p1);
    net.add_input(p1, pay);
    net.add_output(pay, p2);
    net.add_input(p1, inst);
    net.add_output(inst, p3);
    net.add_input(p2, deliver);
    net.add_input(p3, deliver);
    net.add_output(deliver, o);
    net.initial_marking.insert(i, 1);
    net.final_marking.insert(o, 1);
    net
}

/// Fig. 3c-style defect: the end event is not reachable. A loop back from
/// the last activity consumes the token that the end place would need; the
/// only transition producing into the sink also needs a token from a place
/// that is never marked.
///
/// ```text
/// i -> order -> p0 -> prepare -> p1 -> deliver -> p0   (cycle, no exit)
/// {p1, q} -> finish -> o, with q never marked
/// ```
pub fn unreachable_end_net() -> PetriNet {
    let mut net = PetriNet::new("unreachable end");
    let i = net.add_place("i");
    let p0 = net.add_place("p0");
    let p1 = net.add_place("p1");
    let q = net.add_place("q");
    let o = net.add_place("o");
    let order = net.add_transition("order", Some("Take order".into()));
    let prepare = net.add_transition("prepare", Some("Prepare food".into()));
    let deliver = net.add_transition("deliver", Some("Deliver".into()));
    let finish = net.add_transition("finish", Some("Debit account".into()));
    let tip = net.add_transition("tip", Some("Tip waiter".into()));
    net.add_input(i, order);
    net.add_output(order, p0);
    net.add_input(p0, prepare);
    net.add_output(prepare, p1);
    net.add_input(p1, deliver);
    net.add_output(deliver, p0);
    net.add_input(p1, tip);
    net.add_output(tip, q);
    net.add_input(q, finish);
    net.add_input(p1, finish);
    net.add_output(finish, o);
    net.initial_marking.insert(i, 1);
    net.final_marking.insert(o, 1);
    net
}

pub fn place(net: &PetriNet, id: &str) -> PlaceId {
    PlaceId(net.places().iter().position(|p| p.id == id).unwrap())
}
