use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub statements: Vec<Statement>,
}

impl Program {
    /// Statement kinds without positions, for comparing programs that differ
    /// only in layout.
    pub fn kinds(&self) -> Vec<&StatementKind> {
        self.statements.iter().map(|s| &s.kind).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub line: usize,
    pub kind: StatementKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    /// `from <module> import <name>`
    Import { module: String, name: String },
    Assign { target: String, expr: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// `receiver.method(args, key=value)`, or `method(...)` without a receiver.
    Call {
        receiver: Option<String>,
        method: String,
        args: Vec<Expr>,
        kwargs: Vec<(String, Expr)>,
    },
    Ident(String),
    Str(String),
    None,
    List(Vec<Expr>),
    Tuple(Vec<Expr>),
    /// `expr.copy()`
    Copy { receiver: Box<Expr> },
}

fn quote(s: &str) -> String {
    let mut out = String::from("'");
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

impl Expr {
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn write(&self, out: &mut String) {
        match self {
            Expr::Call { receiver, method, args, kwargs } => {
                if let Some(r) = receiver {
                    out.push_str(r);
                    out.push('.');
                }
                out.push_str(method);
                out.push('(');
                let mut first = true;
                for a in args {
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    a.write(out);
                }
                for (k, v) in kwargs {
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    out.push_str(k);
                    out.push('=');
                    v.write(out);
                }
                out.push(')');
            }
            Expr::Ident(name) => out.push_str(name),
            Expr::Str(s) => out.push_str(&quote(s)),
            Expr::None => out.push_str("None"),
            Expr::List(items) => {
                out.push('[');
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    e.write(out);
                }
                out.push(']');
            }
            Expr::Tuple(items) => {
                out.push('(');
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    e.write(out);
                }
                if items.len() == 1 {
                    out.push(',');
                }
                out.push(')');
            }
            Expr::Copy { receiver } => {
                receiver.write(out);
                out.push_str(".copy()");
            }
        }
    }
}

/// Source text for `program`, one statement per line.
pub fn render(program: &Program) -> String {
    let mut out = String::new();
    for s in &program.statements {
        match &s.kind {
            StatementKind::Import { module, name } => {
                let _ = writeln!(out, "from {module} import {name}");
            }
            StatementKind::Assign { target, expr } => {
                let _ = writeln!(out, "{target} = {}", expr.render());
            }
        }
    }
    out
}
