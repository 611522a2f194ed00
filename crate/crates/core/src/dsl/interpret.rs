use std::collections::{HashMap, HashSet};

use crate::powl::{Dependency, NodeId, PowlModel};

use super::ast::{Expr, Program, StatementKind};
use super::{audit, DslError, FINAL_MODEL};

/// A harmless oddity noticed while interpreting, such as a dependency listed
/// twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Interpretation {
    pub model: PowlModel,
    pub warnings: Vec<Warning>,
}

#[derive(Clone)]
enum Value {
    Generator,
    Model(PowlModel),
    Str(String),
    None,
    Deps(Vec<Dependency>),
}

struct Env {
    vars: HashMap<String, Value>,
    line: usize,
    warnings: Vec<Warning>,
}

/// Runs an audited program in a fresh environment and returns `final_model`.
///
/// Variables hold node instances, so using a name twice shares the instance;
/// `.copy()` makes a fresh one. The program is audited first and refused if
/// the audit finds anything.
pub fn interpret(program: &Program) -> Result<Interpretation, DslError> {
    let violations = audit(program);
    if !violations.is_empty() {
        return Err(DslError::Rejected(violations));
    }
    let mut env = Env { vars: HashMap::new(), line: 1, warnings: Vec::new() };
    for stmt in &program.statements {
        env.line = stmt.line;
        if let StatementKind::Assign { target, expr } = &stmt.kind {
            let v = env.eval(expr)?;
            env.vars.insert(target.clone(), v);
        }
    }
    match env.vars.remove(FINAL_MODEL) {
        Some(Value::Model(model)) => Ok(Interpretation { model, warnings: env.warnings }),
        _ => unreachable!("audit guarantees final_model is a submodel"),
    }
}

impl Env {
    fn err(&self, source: crate::powl::PowlError) -> DslError {
        DslError::Interpretation { line: self.line, source }
    }

    fn model_or_none(&self, v: Value) -> Option<PowlModel> {
        match v {
            Value::Model(m) => Some(m),
            _ => None,
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, DslError> {
        Ok(match e {
            Expr::Ident(name) => self.vars[name].clone(),
            Expr::Str(s) => Value::Str(s.clone()),
            Expr::None => Value::None,
            Expr::Copy { receiver } => match self.eval(receiver)? {
                Value::Model(m) => Value::Model(m.deep_copy()),
                _ => unreachable!("audited"),
            },
            Expr::List(items) => {
                let mut deps = Vec::with_capacity(items.len());
                let mut seen: HashSet<(NodeId, Option<NodeId>)> = HashSet::new();
                for item in items {
                    let Expr::Tuple(parts) = item else { unreachable!("audited") };
                    let mut models = Vec::with_capacity(parts.len());
                    for p in parts {
                        match self.eval(p)? {
                            Value::Model(m) => models.push(m),
                            _ => unreachable!("audited"),
                        }
                    }
                    let key = (models[0].id(), models.get(1).map(PowlModel::id));
                    if !seen.insert(key) {
                        self.warnings.push(Warning {
                            line: self.line,
                            message: format!("dependency {} is listed more than once", item.render()),
                        });
                    }
                    let mut it = models.into_iter();
                    let first = it.next().unwrap();
                    deps.push(match it.next() {
                        Some(second) => Dependency::Edge(first, second),
                        None => Dependency::Single(first),
                    });
                }
                Value::Deps(deps)
            }
            Expr::Tuple(_) => unreachable!("audited"),
            Expr::Call { receiver: None, .. } => Value::Generator,
            Expr::Call { receiver: Some(_), method, args, kwargs } => {
                let mut positional = Vec::with_capacity(args.len());
                for a in args {
                    positional.push(self.eval(a)?);
                }
                let mut named = HashMap::new();
                for (k, v) in kwargs {
                    named.insert(k.as_str(), self.eval(v)?);
                }
                let mut arg = |i: usize, name: &str| -> Value {
                    if i < positional.len() {
                        positional[i].clone()
                    } else {
                        named.remove(name).expect("audited")
                    }
                };
                let model = match method.as_str() {
                    "activity" => {
                        let Value::Str(label) = arg(0, "label") else { unreachable!("audited") };
                        PowlModel::activity(label)
                    }
                    "xor" => PowlModel::xor(positional.iter().cloned().map(|v| self.model_or_none(v)).collect()),
                    "loop" => {
                        let body = arg(0, "do");
                        let redo = arg(1, "redo");
                        PowlModel::loop_(self.model_or_none(body), self.model_or_none(redo))
                    }
                    "partial_order" => {
                        let Value::Deps(deps) = arg(0, "dependencies") else { unreachable!("audited") };
                        PowlModel::partial_order(deps)
                    }
                    _ => unreachable!("audited"),
                };
                Value::Model(model.map_err(|e| self.err(e))?)
            }
        })
    }
}
