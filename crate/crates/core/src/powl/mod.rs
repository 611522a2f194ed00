//! POWL models: activities, silent steps, exclusive choice, loops and
//! partial orders over submodels.
//!
//! Every node instance carries a [`NodeId`]. Cloning a [`PowlModel`] keeps the
//! id, so a clone stands for the *same* instance placed somewhere else in a
//! tree; [`PowlModel::deep_copy`] produces a fresh instance. Validation uses
//! the ids to find submodels that were reused in more than one place.

mod json;
mod order;
mod validate;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

pub use json::{from_json, to_json, to_json_pretty};
pub use order::{has_cycle, transitive_closure, transitive_reduction};
pub use validate::{validate, Violation, ViolationKind};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Identity of a node instance. Two structurally equal nodes may have
/// different ids; a cloned node keeps its id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u64);

impl NodeId {
    fn fresh() -> Self {
        NodeId(NEXT_ID.fetch_add(1, Ordering::Relaxed))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PowlError {
    #[error("activity label must not be empty")]
    EmptyLabel,
    #[error("xor takes at least 2 submodels, got {found}")]
    XorArityTooSmall { found: usize },
    #[error("xor accepts at most one None (skip) branch, got {found}")]
    TooManySkips { found: usize },
    #[error("loop needs a do or a redo part; both were None")]
    DegenerateLoop,
    #[error("partial_order needs at least one dependency")]
    EmptyPartialOrder,
    #[error("edge set contains a cycle")]
    CycleInPartialOrder,
    #[error("schema error at {context}: {message}")]
    Schema { context: String, message: String },
    #[error("model is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    ValidationFailed(Vec<Violation>),
}

/// A POWL model node together with its instance id.
#[derive(Debug, Clone)]
pub struct PowlModel {
    id: NodeId,
    node: Node,
}

#[derive(Debug, Clone)]
pub enum Node {
    Activity { label: String },
    Silent,
    Xor { children: Vec<PowlModel> },
    Loop { body: Box<PowlModel>, redo: Box<PowlModel> },
    PartialOrder(PartialOrder),
}

/// Submodels plus a precedence relation given as index pairs into `nodes`.
///
/// Edges are kept exactly as they were supplied; use [`PartialOrder::closure`]
/// or [`PartialOrder::reduction`] for the derived relations.
#[derive(Debug, Clone)]
pub struct PartialOrder {
    nodes: Vec<PowlModel>,
    edges: BTreeSet<(usize, usize)>,
}

impl PartialOrder {
    pub fn nodes(&self) -> &[PowlModel] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn closure(&self) -> BTreeSet<(usize, usize)> {
        transitive_closure(&self.edges, self.nodes.len())
    }

    pub fn reduction(&self) -> Result<BTreeSet<(usize, usize)>, PowlError> {
        transitive_reduction(&self.edges, self.nodes.len())
    }
}

/// One entry of the `partial_order` dependency list.
#[derive(Debug, Clone)]
pub enum Dependency {
    /// `(source, target)`: source completes before target starts.
    Edge(PowlModel, PowlModel),
    /// `(node,)`: a node with no ordering of its own.
    Single(PowlModel),
}

impl PowlModel {
    fn new(node: Node) -> Self {
        PowlModel {
            id: NodeId::fresh(),
            node,
        }
    }

    /// Wraps `node` without the eager checks the `make_*` constructors apply.
    /// Invalid shapes built this way are reported by [`validate`].
    pub fn from_node(node: Node) -> Self {
        Self::new(node)
    }

    pub fn activity(label: impl Into<String>) -> Result<Self, PowlError> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(PowlError::EmptyLabel);
        }
        Ok(Self::new(Node::Activity { label }))
    }

    pub fn silent() -> Self {
        Self::new(Node::Silent)
    }

    /// Exclusive choice. `None` entries stand for skipping and become silent
    /// nodes.
    pub fn xor(children: Vec<Option<PowlModel>>) -> Result<Self, PowlError> {
        if children.len() < 2 {
            return Err(PowlError::XorArityTooSmall {
                found: children.len(),
            });
        }
        let skips = children.iter().filter(|c| c.is_none()).count();
        if skips > 1 {
            return Err(PowlError::TooManySkips { found: skips });
        }
        let children = children
            .into_iter()
            .map(|c| c.unwrap_or_else(PowlModel::silent))
            .collect();
        Ok(Self::new(Node::Xor { children }))
    }

    /// `body` runs first, then zero or more rounds of `redo` followed by
    /// `body`. `None` on either side becomes a silent node.
    /// A loop whose parts are both silent is rejected as degenerate.
    pub fn loop_(body: Option<PowlModel>, redo: Option<PowlModel>) -> Result<Self, PowlError> {
        let body = body.unwrap_or_else(PowlModel::silent);
        let redo = redo.unwrap_or_else(PowlModel::silent);
        if matches!(body.node, Node::Silent) && matches!(redo.node, Node::Silent) {
            return Err(PowlError::DegenerateLoop);
        }
        Ok(Self::new(Node::Loop {
            body: Box::new(body),
            redo: Box::new(redo),
        }))
    }

    /// Builds a partial order from dependency pairs and singletons.
    ///
    /// Nodes are collected by instance id in order of first appearance, so a
    /// node mentioned in several pairs is one node. Duplicate pairs collapse.
    /// Cycles are accepted here and reported by [`validate`].
    pub fn partial_order(dependencies: Vec<Dependency>) -> Result<Self, PowlError> {
        if dependencies.is_empty() {
            return Err(PowlError::EmptyPartialOrder);
        }
        let mut nodes: Vec<PowlModel> = Vec::new();
        let mut edges = BTreeSet::new();
        let index_of = |m: PowlModel, nodes: &mut Vec<PowlModel>| -> usize {
            match nodes.iter().position(|n| n.id == m.id) {
                Some(i) => i,
                None => {
                    nodes.push(m);
                    nodes.len() - 1
                }
            }
        };
        for dep in dependencies {
            match dep {
                Dependency::Edge(source, target) => {
                    let s = index_of(source, &mut nodes);
                    let t = index_of(target, &mut nodes);
                    edges.insert((s, t));
                }
                Dependency::Single(node) => {
                    index_of(node, &mut nodes);
                }
            }
        }
        Ok(Self::new(Node::PartialOrder(PartialOrder { nodes, edges })))
    }

    /// Partial order from explicit nodes and index edges. Endpoints must be in
    /// range; cycles are left for [`validate`].
    pub fn partial_order_from_parts(
        nodes: Vec<PowlModel>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PowlError> {
        if nodes.is_empty() {
            return Err(PowlError::EmptyPartialOrder);
        }
        let n = nodes.len();
        let mut set = BTreeSet::new();
        for (s, t) in edges {
            if s >= n || t >= n {
                return Err(PowlError::Schema {
                    context: format!("edge [{s},{t}]"),
                    message: format!("endpoint out of range for {n} nodes"),
                });
            }
            set.insert((s, t));
        }
        Ok(Self::new(Node::PartialOrder(PartialOrder { nodes, edges: set })))
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    /// Same structure, every node with a fresh id.
    pub fn deep_copy(&self) -> Self {
        let node = match &self.node {
            Node::Activity { label } => Node::Activity {
                label: label.clone(),
            },
            Node::Silent => Node::Silent,
            Node::Xor { children } => Node::Xor {
                children: children.iter().map(PowlModel::deep_copy).collect(),
            },
            Node::Loop { body, redo } => Node::Loop {
                body: Box::new(body.deep_copy()),
                redo: Box::new(redo.deep_copy()),
            },
            Node::PartialOrder(po) => Node::PartialOrder(PartialOrder {
                nodes: po.nodes.iter().map(PowlModel::deep_copy).collect(),
                edges: po.edges.clone(),
            }),
        };
        Self::new(node)
    }

    /// Replaces the second and later occurrences of every shared instance by
    /// deep copies, so each id appears once.
    pub fn repair_shared_submodels(&self) -> Self {
        let mut seen = HashSet::new();
        self.repair_with(&mut seen)
    }

    fn repair_with(&self, seen: &mut HashSet<NodeId>) -> Self {
        if !seen.insert(self.id) {
            let copy = self.deep_copy();
            copy.collect_ids(seen);
            return copy;
        }
        let node = match &self.node {
            Node::Activity { .. } | Node::Silent => self.node.clone(),
            Node::Xor { children } => Node::Xor {
                children: children.iter().map(|c| c.repair_with(seen)).collect(),
            },
            Node::Loop { body, redo } => Node::Loop {
                body: Box::new(body.repair_with(seen)),
                redo: Box::new(redo.repair_with(seen)),
            },
            Node::PartialOrder(po) => Node::PartialOrder(PartialOrder {
                nodes: po.nodes.iter().map(|c| c.repair_with(seen)).collect(),
                edges: po.edges.clone(),
            }),
        };
        PowlModel { id: self.id, node }
    }

    fn collect_ids(&self, out: &mut HashSet<NodeId>) {
        out.insert(self.id);
        for child in self.children() {
            child.collect_ids(out);
        }
    }

    /// Returns a model with every activity label trimmed. Ids are kept.
    pub fn trim_labels(&self) -> Self {
        let node = match &self.node {
            Node::Activity { label } => Node::Activity {
                label: label.trim().to_string(),
            },
            Node::Silent => Node::Silent,
            Node::Xor { children } => Node::Xor {
                children: children.iter().map(PowlModel::trim_labels).collect(),
            },
            Node::Loop { body, redo } => Node::Loop {
                body: Box::new(body.trim_labels()),
                redo: Box::new(redo.trim_labels()),
            },
            Node::PartialOrder(po) => Node::PartialOrder(PartialOrder {
                nodes: po.nodes.iter().map(PowlModel::trim_labels).collect(),
                edges: po.edges.clone(),
            }),
        };
        PowlModel { id: self.id, node }
    }

    /// Direct children in positional order (loop: body then redo).
    pub fn children(&self) -> Vec<&PowlModel> {
        match &self.node {
            Node::Activity { .. } | Node::Silent => Vec::new(),
            Node::Xor { children } => children.iter().collect(),
            Node::Loop { body, redo } => vec![body.as_ref(), redo.as_ref()],
            Node::PartialOrder(po) => po.nodes.iter().collect(),
        }
    }

    /// Resolves a path of child indices from this node.
    pub fn at_path(&self, path: &[usize]) -> Option<&PowlModel> {
        let mut current = self;
        for &i in path {
            current = *current.children().get(i)?;
        }
        Some(current)
    }

    /// Activity labels in depth-first order, duplicates included.
    pub fn activity_labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |m| {
            if let Node::Activity { label } = &m.node {
                out.push(label.as_str());
            }
        });
        out
    }

    pub fn activity_count(&self) -> usize {
        self.activity_labels().len()
    }

    /// Total number of nodes in the tree, counting shared instances once per
    /// occurrence.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn contains_loop(&self) -> bool {
        let mut found = false;
        self.walk(&mut |m| found |= matches!(m.node, Node::Loop { .. }));
        found
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a PowlModel)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    /// Short human-readable description used in diagnostics.
    pub fn describe(&self) -> String {
        match &self.node {
            Node::Activity { label } => format!("'{label}'"),
            Node::Silent => "silent step".to_string(),
            Node::Xor { children } => format!(
                "xor({})",
                children.iter().map(|c| c.describe()).collect::<Vec<_>>().join(", ")
            ),
            Node::Loop { body, redo } => {
                format!("loop(do={}, redo={})", body.describe(), redo.describe())
            }
            Node::PartialOrder(po) => format!(
                "partial_order({})",
                po.nodes.iter().map(|c| c.describe()).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

/// Structural equality; instance ids are ignored.
impl PartialEq for PowlModel {
    fn eq(&self, other: &Self) -> bool {
        match (&self.node, &other.node) {
            (Node::Activity { label: a }, Node::Activity { label: b }) => a == b,
            (Node::Silent, Node::Silent) => true,
            (Node::Xor { children: a }, Node::Xor { children: b }) => a == b,
            (
                Node::Loop { body: b1, redo: r1 },
                Node::Loop { body: b2, redo: r2 },
            ) => b1 == b2 && r1 == r2,
            (Node::PartialOrder(a), Node::PartialOrder(b)) => {
                a.nodes == b.nodes && a.edges == b.edges
            }
            _ => false,
        }
    }
}

impl Eq for PowlModel {}

impl fmt::Display for PowlModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(label: &str) -> PowlModel {
        PowlModel::activity(label).unwrap()
    }

    #[test]
    fn activity_keeps_label() {
        let m = act("Ship bicycle");
        assert!(matches!(m.node(), Node::Activity { label } if label == "Ship bicycle"));
        assert!(matches!(act("a").node(), Node::Activity { label } if label == "a"));
    }

    #[test]
    fn blank_label_is_rejected() {
        assert_eq!(PowlModel::activity("   "), Err(PowlError::EmptyLabel));
        assert_eq!(PowlModel::activity(""), Err(PowlError::EmptyLabel));
    }

    #[test]
    fn xor_of_two_parts() {
        let m = PowlModel::xor(vec![Some(act("Reserve part")), Some(act("Back-order part"))])
            .unwrap();
        match m.node() {
            Node::Xor { children } => assert_eq!(children.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn xor_arity_and_skip() {
        assert_eq!(
            PowlModel::xor(vec![Some(act("a"))]),
            Err(PowlError::XorArityTooSmall { found: 1 })
        );
        let m = PowlModel::xor(vec![Some(act("a")), None]).unwrap();
        let expected = PowlModel::from_node(Node::Xor {
            children: vec![act("a"), PowlModel::silent()],
        });
        assert_eq!(m, expected);
        assert_eq!(
            PowlModel::xor(vec![Some(act("a")), None, None]),
            Err(PowlError::TooManySkips { found: 2 })
        );
    }

    #[test]
    fn loop_none_becomes_silent() {
        let m = PowlModel::loop_(Some(act("a")), None).unwrap();
        match m.node() {
            Node::Loop { redo, .. } => assert!(matches!(redo.node(), Node::Silent)),
            other => panic!("unexpected {other:?}"),
        }
        let m = PowlModel::loop_(Some(act("a")), Some(act("b"))).unwrap();
        assert_eq!(m.activity_labels(), vec!["a", "b"]);
        assert_eq!(PowlModel::loop_(None, None), Err(PowlError::DegenerateLoop));
    }

    #[test]
    fn partial_order_dedups_nodes_by_identity() {
        let a = act("a");
        let b = act("b");
        let c = act("c");
        let m = PowlModel::partial_order(vec![
            Dependency::Edge(a.clone(), b.clone()),
            Dependency::Edge(b.clone(), c.clone()),
            Dependency::Edge(a.clone(), b.clone()),
        ])
        .unwrap();
        let Node::PartialOrder(po) = m.node() else {
            panic!()
        };
        assert_eq!(po.nodes().len(), 3);
        assert_eq!(po.edges().iter().copied().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);

        let single = PowlModel::partial_order(vec![Dependency::Single(act("a"))]).unwrap();
        let Node::PartialOrder(po) = single.node() else {
            panic!()
        };
        assert_eq!((po.nodes().len(), po.edges().len()), (1, 0));
        assert_eq!(
            PowlModel::partial_order(vec![]),
            Err(PowlError::EmptyPartialOrder)
        );
    }

    #[test]
    fn equal_labels_distinct_instances_are_two_nodes() {
        let m = PowlModel::partial_order(vec![
            Dependency::Single(act("a")),
            Dependency::Single(act("a")),
        ])
        .unwrap();
        let Node::PartialOrder(po) = m.node() else {
            panic!()
        };
        assert_eq!(po.nodes().len(), 2);
    }

    #[test]
    fn deep_copy_is_structurally_equal_with_fresh_ids() {
        let a = act("a");
        let copy = a.deep_copy();
        assert_eq!(a, copy);
        assert_ne!(a.id(), copy.id());
        let s = PowlModel::silent();
        assert_eq!(s.deep_copy(), s);
    }

    #[test]
    fn repair_copies_second_occurrence() {
        let x = act("x");
        let m = PowlModel::xor(vec![Some(x.clone()), Some(x.clone())]).unwrap();
        let repaired = m.repair_shared_submodels();
        assert_eq!(repaired, m);
        let Node::Xor { children } = repaired.node() else {
            panic!()
        };
        assert_eq!(children[0].id(), x.id());
        assert_ne!(children[1].id(), x.id());
        assert!(validate(&repaired).is_empty());
    }

    #[test]
    fn repair_without_sharing_keeps_ids() {
        let m = PowlModel::xor(vec![Some(act("a")), Some(act("b"))]).unwrap();
        let repaired = m.repair_shared_submodels();
        assert_eq!(repaired, m);
        assert_eq!(repaired.id(), m.id());
        let ids: Vec<_> = repaired.children().iter().map(|c| c.id()).collect();
        let orig: Vec<_> = m.children().iter().map(|c| c.id()).collect();
        assert_eq!(ids, orig);
    }

    #[test]
    fn at_path_resolves_children() {
        let m = PowlModel::loop_(Some(act("a")), Some(act("b"))).unwrap();
        assert_eq!(m.at_path(&[1]).unwrap().describe(), "'b'");
        assert!(m.at_path(&[2]).is_none());
    }
}
