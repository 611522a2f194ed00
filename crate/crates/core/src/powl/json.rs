//! POWL JSON documents.
//!
//! ```text
//! {"type":"activity","label":"a"}
//! {"type":"silent"}
//! {"type":"xor","children":[...]}
//! {"type":"loop","do":{...},"redo":{...}}
//! {"type":"partial_order","nodes":[...],"edges":[[0,1],...]}
//! ```
//!
//! Field order is fixed by the serializer, so equal models produce
//! byte-identical documents.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Node, PowlError, PowlModel};
use crate::powl::validate::format_path;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum Doc {
    Activity {
        label: String,
    },
    Silent,
    Xor {
        children: Vec<Doc>,
    },
    Loop {
        #[serde(rename = "do")]
        body: Box<Doc>,
        redo: Box<Doc>,
    },
    PartialOrder {
        nodes: Vec<Doc>,
        edges: Vec<[usize; 2]>,
    },
}

fn to_doc(model: &PowlModel) -> Doc {
    match model.node() {
        Node::Activity { label } => Doc::Activity {
            label: label.clone(),
        },
        Node::Silent => Doc::Silent,
        Node::Xor { children } => Doc::Xor {
            children: children.iter().map(to_doc).collect(),
        },
        Node::Loop { body, redo } => Doc::Loop {
            body: Box::new(to_doc(body)),
            redo: Box::new(to_doc(redo)),
        },
        Node::PartialOrder(po) => Doc::PartialOrder {
            nodes: po.nodes().iter().map(to_doc).collect(),
            edges: po.edges().iter().map(|&(s, t)| [s, t]).collect(),
        },
    }
}

fn from_doc(doc: Doc, path: &mut Vec<usize>) -> Result<PowlModel, PowlError> {
    let context = |path: &[usize], e: PowlError| match e {
        PowlError::Schema { context, message } => PowlError::Schema {
            context: format!("{} {context}", format_path(path)),
            message,
        },
        other => PowlError::Schema {
            context: format_path(path),
            message: other.to_string(),
        },
    };
    let children_of = |docs: Vec<Doc>, path: &mut Vec<usize>| {
        docs.into_iter()
            .enumerate()
            .map(|(i, d)| {
                path.push(i);
                let r = from_doc(d, path);
                path.pop();
                r
            })
            .collect::<Result<Vec<_>, _>>()
    };
    match doc {
        Doc::Activity { label } => PowlModel::activity(label).map_err(|e| context(path, e)),
        Doc::Silent => Ok(PowlModel::silent()),
        Doc::Xor { children } => {
            let children = children_of(children, path)?;
            PowlModel::xor(children.into_iter().map(Some).collect()).map_err(|e| context(path, e))
        }
        Doc::Loop { body, redo } => {
            let mut parts = children_of(vec![*body, *redo], path)?;
            let redo = parts.pop();
            let body = parts.pop();
            PowlModel::loop_(body, redo).map_err(|e| context(path, e))
        }
        Doc::PartialOrder { nodes, edges } => {
            let nodes = children_of(nodes, path)?;
            PowlModel::partial_order_from_parts(nodes, edges.into_iter().map(|[s, t]| (s, t)))
                .map_err(|e| context(path, e))
        }
    }
}

/// Compact single-line document.
pub fn to_json(model: &PowlModel) -> String {
    serde_json::to_string(&to_doc(model)).expect("POWL documents always serialize")
}

pub fn to_json_pretty(model: &PowlModel) -> String {
    serde_json::to_string_pretty(&to_doc(model)).expect("POWL documents always serialize")
}

/// Parses a document; every node gets a fresh id.
pub fn from_json(text: &str) -> Result<PowlModel, PowlError> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| PowlError::Schema {
        context: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    from_doc(doc, &mut Vec::new())
}

impl Serialize for PowlModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        to_doc(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PowlModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = Doc::deserialize(deserializer)?;
        from_doc(doc, &mut Vec::new()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activity_document() {
        let m = PowlModel::activity("a").unwrap();
        assert_eq!(to_json(&m), r#"{"type":"activity","label":"a"}"#);
    }

    #[test]
    fn loop_uses_do_and_redo_keys() {
        let m = PowlModel::loop_(Some(PowlModel::activity("a").unwrap()), None).unwrap();
        assert_eq!(
            to_json(&m),
            r#"{"type":"loop","do":{"type":"activity","label":"a"},"redo":{"type":"silent"}}"#
        );
    }

    #[test]
    fn malformed_text_is_a_schema_error() {
        assert!(matches!(from_json("{"), Err(PowlError::Schema { .. })));
        assert!(matches!(
            from_json(r#"{"type":"gateway"}"#),
            Err(PowlError::Schema { .. })
        ));
    }

    #[test]
    fn semantic_errors_carry_the_path() {
        let err = from_json(
            r#"{"type":"xor","children":[{"type":"activity","label":"a"},{"type":"xor","children":[{"type":"silent"}]}]}"#,
        )
        .unwrap_err();
        match err {
            PowlError::Schema { context, message } => {
                assert!(context.contains("root/1"), "{context}");
                assert!(message.contains("at least 2"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = from_json(
            r#"{"type":"partial_order","nodes":[{"type":"silent"}],"edges":[[0,3]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn cyclic_order_loads_and_is_left_to_validation() {
        let m = from_json(
            r#"{"type":"partial_order","nodes":[{"type":"activity","label":"a"},{"type":"activity","label":"b"}],"edges":[[0,1],[1,0]]}"#,
        )
        .unwrap();
        assert_eq!(crate::powl::validate(&m).len(), 1);
    }
}
