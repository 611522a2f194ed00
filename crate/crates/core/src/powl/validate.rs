use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{has_cycle, Node, NodeId, PowlModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    CycleInPartialOrder,
    XorArityTooSmall,
    SharedSubmodel,
    EmptyLabel,
}

/// A structural problem found by [`validate`]. `location` is the path of child
/// indices from the root (loop children are `0` = do, `1` = redo).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.kind, format_path(&self.location), self.message)
    }
}

pub(crate) fn format_path(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        format!(
            "root/{}",
            path.iter().map(usize::to_string).collect::<Vec<_>>().join("/")
        )
    }
}

/// Checks every model invariant. Returns one violation per problem, ordered
/// by location; an empty list means the model is valid.
///
/// A node instance that occurs a second time is reported once as
/// `SharedSubmodel`, and its subtree is not inspected again.
pub fn validate(model: &PowlModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut path = Vec::new();
    visit(model, &mut path, &mut seen, &mut out);
    out.sort_by(|a, b| a.location.cmp(&b.location));
    out
}

fn visit(
    model: &PowlModel,
    path: &mut Vec<usize>,
    seen: &mut HashSet<NodeId>,
    out: &mut Vec<Violation>,
) {
    if !seen.insert(model.id()) {
        out.push(Violation {
            kind: ViolationKind::SharedSubmodel,
            location: path.clone(),
            message: format!(
                "submodel {} is used more than once; each occurrence needs its own instance",
                model.describe()
            ),
        });
        return;
    }
    match model.node() {
        Node::Activity { label } => {
            if label.trim().is_empty() {
                out.push(Violation {
                    kind: ViolationKind::EmptyLabel,
                    location: path.clone(),
                    message: "activity label is empty".to_string(),
                });
            }
        }
        Node::Silent => {}
        Node::Xor { children } => {
            if children.len() < 2 {
                out.push(Violation {
                    kind: ViolationKind::XorArityTooSmall,
                    location: path.clone(),
                    message: format!("xor has {} submodel(s), needs at least 2", children.len()),
                });
            }
        }
        Node::Loop { .. } => {}
        Node::PartialOrder(po) => {
            let n = po.nodes().len();
            if has_cycle(po.edges(), n) {
                let closure = po.closure();
                let on_cycle: Vec<String> = (0..n)
                    .filter(|i| closure.contains(&(*i, *i)))
                    .map(|i| po.nodes()[i].describe())
                    .collect();
                out.push(Violation {
                    kind: ViolationKind::CycleInPartialOrder,
                    location: path.clone(),
                    message: format!(
                        "partial order is not irreflexive: {} must each precede themselves",
                        on_cycle.join(", ")
                    ),
                });
            }
        }
    }
    for (i, child) in model.children().into_iter().enumerate() {
        path.push(i);
        visit(child, path, seen, out);
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powl::Dependency;

    fn act(label: &str) -> PowlModel {
        PowlModel::activity(label).unwrap()
    }

    #[test]
    fn two_node_cycle_is_reported() {
        let a = act("a");
        let b = act("b");
        let m = PowlModel::partial_order(vec![
            Dependency::Edge(a.clone(), b.clone()),
            Dependency::Edge(b, a),
        ])
        .unwrap();
        let v = validate(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::CycleInPartialOrder);
        assert!(v[0].message.contains("'a'") && v[0].message.contains("'b'"));
    }

    #[test]
    fn self_dependency_is_a_cycle() {
        let a = act("a");
        let m = PowlModel::partial_order(vec![Dependency::Edge(a.clone(), a)]).unwrap();
        assert_eq!(validate(&m)[0].kind, ViolationKind::CycleInPartialOrder);
    }

    #[test]
    fn shared_instance_under_two_parents() {
        let x = act("x");
        let left = PowlModel::xor(vec![Some(x.clone()), Some(act("b"))]).unwrap();
        let right = PowlModel::loop_(Some(x), None).unwrap();
        let m = PowlModel::partial_order(vec![Dependency::Edge(left, right)]).unwrap();
        let v = validate(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::SharedSubmodel);
        assert_eq!(v[0].location, vec![1, 0]);
        assert!(m.at_path(&v[0].location).is_some());
    }

    #[test]
    fn raw_shapes_are_caught() {
        let bad = PowlModel::from_node(Node::Xor {
            children: vec![PowlModel::from_node(Node::Activity { label: " ".into() })],
        });
        let kinds: Vec<_> = validate(&bad).into_iter().map(|v| (v.kind, v.location)).collect();
        assert_eq!(
            kinds,
            vec![
                (ViolationKind::XorArityTooSmall, vec![]),
                (ViolationKind::EmptyLabel, vec![0]),
            ]
        );
    }

    #[test]
    fn valid_model_has_no_violations() {
        let m = PowlModel::xor(vec![Some(act("a")), None]).unwrap();
        assert!(validate(&m).is_empty());
    }
}
