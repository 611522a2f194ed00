use std::collections::HashMap;

use super::ast::{Expr, Program, StatementKind};
use super::SecurityViolationKind as K;
use super::{SecurityViolation, ALLOWED_MODULES, FINAL_MODEL, GENERATOR_CLASS};

/// The calling contract of each builder, quoted in arity errors.
pub fn rules(method: &str) -> Option<&'static str> {
    Some(match method {
        "activity" => "activity(label) generates an activity. It takes 1 string argument, which is the label of the activity.",
        "xor" => "xor(*args) takes n >= 2 arguments, which are the submodels. Use None as one argument to make the choice skippable.",
        "loop" => "loop(do, redo) takes 2 arguments, which are the do and redo parts. One of them may be None, but not both.",
        "partial_order" => "partial_order(dependencies) takes 1 argument, which is a list of tuples of submodels: (a, b) means a must finish before b starts, (a,) adds a with no ordering.",
        "copy" => "copy() takes no arguments and returns a fresh copy of a submodel.",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Generator,
    Model,
    Str,
    None,
    DepList,
    /// Result of an expression that already produced a violation.
    Unknown,
}

fn ty_name(t: Ty) -> &'static str {
    match t {
        Ty::Generator => "the model generator",
        Ty::Model => "a submodel",
        Ty::Str => "a string",
        Ty::None => "None",
        Ty::DepList => "a dependency list",
        Ty::Unknown => "an invalid value",
    }
}

struct Auditor {
    env: HashMap<String, Ty>,
    line: usize,
    out: Vec<SecurityViolation>,
}

/// Checks a parsed program against the builder API. An empty result means the
/// program may be interpreted.
pub fn audit(program: &Program) -> Vec<SecurityViolation> {
    let mut a = Auditor { env: HashMap::new(), line: 1, out: Vec::new() };
    let mut final_seen = false;
    for stmt in &program.statements {
        a.line = stmt.line;
        match &stmt.kind {
            StatementKind::Import { module, name } => {
                if !ALLOWED_MODULES.contains(&module.as_str()) || name != GENERATOR_CLASS {
                    a.report(K::ForbiddenImport, format!("import of '{name}' from '{module}' is not allowed"));
                }
            }
            StatementKind::Assign { target, expr } => {
                if target == GENERATOR_CLASS || target.starts_with("__") {
                    a.report(K::ForbiddenSyntax, format!("'{target}' cannot be assigned"));
                }
                let t = a.expr(expr, false);
                if target == FINAL_MODEL {
                    final_seen = true;
                    if !matches!(t, Ty::Model | Ty::Unknown) {
                        a.report(
                            K::BadArgumentType,
                            format!("final_model must be a submodel, got {}", ty_name(t)),
                        );
                    }
                }
                a.env.insert(target.clone(), t);
            }
        }
    }
    if !final_seen {
        let line = program.statements.last().map_or(1, |s| s.line);
        a.out.push(SecurityViolation::new(
            K::MissingFinalModel,
            line,
            None,
            "the program never assigns final_model",
        ));
    }
    a.out
}

impl Auditor {
    fn report(&mut self, kind: K, message: impl Into<String>) {
        self.out.push(SecurityViolation::new(kind, self.line, None, message));
    }

    fn lookup(&mut self, name: &str) -> Ty {
        match self.env.get(name) {
            Some(t) => *t,
            None => {
                self.report(K::UndefinedVariable, format!("'{name}' is used before it is assigned"));
                Ty::Unknown
            }
        }
    }

    fn expr(&mut self, e: &Expr, in_dependencies: bool) -> Ty {
        match e {
            Expr::Ident(name) => self.lookup(name),
            Expr::Str(_) => Ty::Str,
            Expr::None => Ty::None,
            Expr::Copy { receiver } => {
                let t = self.expr(receiver, false);
                match t {
                    Ty::Model => Ty::Model,
                    Ty::Unknown => Ty::Unknown,
                    other => {
                        self.report(K::BadArgumentType, format!("copy() needs a submodel, got {}", ty_name(other)));
                        Ty::Unknown
                    }
                }
            }
            Expr::List(items) => self.dependency_list(items),
            Expr::Tuple(_) if in_dependencies => Ty::Unknown,
            Expr::Tuple(_) => {
                self.report(K::BadArgumentType, "tuples may only appear inside a partial_order dependency list");
                Ty::Unknown
            }
            Expr::Call { receiver: None, method, args, kwargs } => {
                if method == GENERATOR_CLASS {
                    if !args.is_empty() || !kwargs.is_empty() {
                        self.report(K::BadArity, "ModelGenerator() takes no arguments");
                    }
                    Ty::Generator
                } else {
                    self.report(
                        K::UnknownFunction,
                        format!("'{method}' is not available; only the ModelGenerator functions activity, xor, loop, partial_order and .copy() may be called"),
                    );
                    Ty::Unknown
                }
            }
            Expr::Call { receiver: Some(r), method, args, kwargs } => {
                let rt = self.lookup(r);
                if rt != Ty::Generator && rt != Ty::Unknown {
                    self.report(
                        K::UnknownFunction,
                        format!("'{r}.{method}' is not available; builders must be called on the ModelGenerator instance"),
                    );
                    return Ty::Unknown;
                }
                self.builder(method, args, kwargs)
            }
        }
    }

    fn dependency_list(&mut self, items: &[Expr]) -> Ty {
        let mut ok = true;
        for item in items {
            let Expr::Tuple(parts) = item else {
                self.report(
                    K::BadArgumentType,
                    format!("dependency list entries must be tuples (a, b) or (a,), got `{}`", item.render()),
                );
                ok = false;
                continue;
            };
            if parts.len() > 2 {
                self.report(
                    K::BadArgumentType,
                    format!("dependency `{}` has {} elements; use (a, b) or (a,)", item.render(), parts.len()),
                );
                ok = false;
            }
            for p in parts {
                match self.expr(p, true) {
                    Ty::Model => {}
                    Ty::Unknown => ok = false,
                    other => {
                        self.report(
                            K::BadArgumentType,
                            format!("dependency `{}` contains {}, expected submodels only", item.render(), ty_name(other)),
                        );
                        ok = false;
                    }
                }
            }
        }
        if ok {
            Ty::DepList
        } else {
            Ty::Unknown
        }
    }

    /// Binds positional and keyword arguments to `params`. Reports and returns
    /// `None` when the shape does not fit.
    fn bind<'e>(
        &mut self,
        method: &str,
        params: &[&str],
        args: &'e [Expr],
        kwargs: &'e [(String, Expr)],
    ) -> Option<Vec<&'e Expr>> {
        let arity_error = |a: &mut Self, detail: String| {
            a.report(K::BadArity, format!("{detail}. Rule: {}", rules(method).unwrap_or_default()));
        };
        if args.len() > params.len() {
            arity_error(self, format!("{method}() got {} positional arguments", args.len()));
            return None;
        }
        let mut bound: Vec<Option<&Expr>> = args.iter().map(Some).collect();
        bound.resize(params.len(), None);
        for (k, v) in kwargs {
            match params.iter().position(|p| p == k) {
                Some(i) if bound[i].is_none() => bound[i] = Some(v),
                Some(_) => {
                    arity_error(self, format!("{method}() got argument '{k}' twice"));
                    return None;
                }
                None => {
                    arity_error(self, format!("{method}() has no parameter '{k}'"));
                    return None;
                }
            }
        }
        let given = bound.iter().filter(|b| b.is_some()).count();
        if given != params.len() {
            arity_error(self, format!("{method}() got {given} of {} arguments", params.len()));
            return None;
        }
        Some(bound.into_iter().map(Option::unwrap).collect())
    }

    fn builder(&mut self, method: &str, args: &[Expr], kwargs: &[(String, Expr)]) -> Ty {
        match method {
            "activity" => {
                let Some(bound) = self.bind(method, &["label"], args, kwargs) else { return Ty::Unknown };
                match self.expr(bound[0], false) {
                    Ty::Str => Ty::Model,
                    Ty::Unknown => Ty::Unknown,
                    other => {
                        self.report(K::BadArgumentType, format!("activity() needs a string label, got {}", ty_name(other)));
                        Ty::Unknown
                    }
                }
            }
            "xor" => {
                if !kwargs.is_empty() {
                    self.report(
                        K::BadArity,
                        format!("xor() takes no keyword arguments. Rule: {}", rules("xor").unwrap_or_default()),
                    );
                    return Ty::Unknown;
                }
                if args.len() < 2 {
                    self.report(
                        K::BadArity,
                        format!("xor() got {} argument(s). Rule: {}", args.len(), rules("xor").unwrap_or_default()),
                    );
                    return Ty::Unknown;
                }
                let mut ok = true;
                let mut nones = 0;
                for a in args {
                    match self.expr(a, false) {
                        Ty::Model => {}
                        Ty::None => nones += 1,
                        Ty::Unknown => ok = false,
                        other => {
                            self.report(K::BadArgumentType, format!("xor() arguments must be submodels or None, got {}", ty_name(other)));
                            ok = false;
                        }
                    }
                }
                if nones > 1 {
                    self.report(K::BadArgumentType, format!("xor() accepts at most one None, got {nones}"));
                    ok = false;
                }
                if ok {
                    Ty::Model
                } else {
                    Ty::Unknown
                }
            }
            "loop" => {
                let Some(bound) = self.bind(method, &["do", "redo"], args, kwargs) else { return Ty::Unknown };
                let mut ok = true;
                for (name, a) in ["do", "redo"].iter().zip(bound) {
                    match self.expr(a, false) {
                        Ty::Model | Ty::None => {}
                        Ty::Unknown => ok = false,
                        other => {
                            self.report(K::BadArgumentType, format!("loop() argument '{name}' must be a submodel or None, got {}", ty_name(other)));
                            ok = false;
                        }
                    }
                }
                if ok {
                    Ty::Model
                } else {
                    Ty::Unknown
                }
            }
            "partial_order" => {
                let Some(bound) = self.bind(method, &["dependencies"], args, kwargs) else { return Ty::Unknown };
                match self.expr(bound[0], false) {
                    Ty::DepList => Ty::Model,
                    Ty::Unknown => Ty::Unknown,
                    other => {
                        self.report(K::BadArgumentType, format!("partial_order() needs a list of tuples, got {}", ty_name(other)));
                        Ty::Unknown
                    }
                }
            }
            other => {
                self.report(
                    K::UnknownFunction,
                    format!("ModelGenerator has no function '{other}'; use activity, xor, loop or partial_order"),
                );
                Ty::Unknown
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn kinds(src: &str) -> Vec<K> {
        audit(&parse(src).unwrap()).into_iter().map(|v| v.kind).collect()
    }

    const HEAD: &str = "gen = ModelGenerator()\na = gen.activity('a')\nb = gen.activity('b')\n";

    #[test]
    fn clean_program() {
        let src = format!("{HEAD}final_model = gen.partial_order(dependencies=[(a, b)])\n");
        assert!(kinds(&src).is_empty());
    }

    #[test]
    fn unknown_function() {
        assert_eq!(kinds(&format!("{HEAD}final_model = gen.sequence(a, b)")), vec![K::UnknownFunction]);
        assert_eq!(kinds("final_model = open('x')"), vec![K::UnknownFunction]);
        assert_eq!(kinds(&format!("{HEAD}final_model = a.activity('x')")), vec![K::UnknownFunction]);
    }

    #[test]
    fn xor_arity_quotes_the_rule() {
        let v = audit(&parse(&format!("{HEAD}final_model = gen.xor(a)")).unwrap());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, K::BadArity);
        assert_eq!(v[0].line, 4);
        assert!(v[0].message.contains("takes n >= 2 arguments"), "{}", v[0].message);
    }

    #[test]
    fn keyword_and_positional_loop() {
        assert!(kinds(&format!("{HEAD}final_model = gen.loop(do=a, redo=None)")).is_empty());
        assert!(kinds(&format!("{HEAD}final_model = gen.loop(a, b)")).is_empty());
        assert_eq!(kinds(&format!("{HEAD}final_model = gen.loop(do=a)")), vec![K::BadArity]);
        assert_eq!(kinds(&format!("{HEAD}final_model = gen.loop(a, do=b)")), vec![K::BadArity]);
    }

    #[test]
    fn types_and_scoping() {
        assert_eq!(kinds("gen = ModelGenerator()\nfinal_model = gen.activity(x)"), vec![K::UndefinedVariable]);
        assert_eq!(kinds(&format!("{HEAD}final_model = gen.activity(a)")), vec![K::BadArgumentType]);
        assert_eq!(kinds(&format!("{HEAD}final_model = gen.xor(a, 'b')")), vec![K::BadArgumentType]);
        assert_eq!(kinds(&format!("{HEAD}final_model = 'done'")), vec![K::BadArgumentType]);
        assert_eq!(
            kinds(&format!("{HEAD}final_model = gen.partial_order(dependencies=[(a, None)])")),
            vec![K::BadArgumentType]
        );
        assert_eq!(kinds(&format!("{HEAD}x = (a, b)\nfinal_model = a")), vec![K::BadArgumentType]);
    }

    #[test]
    fn missing_final_model() {
        assert_eq!(kinds(HEAD), vec![K::MissingFinalModel]);
    }

    #[test]
    fn dependency_list_via_variable() {
        let src = format!("{HEAD}deps = [(a, b)]\nfinal_model = gen.partial_order(deps)\n");
        assert!(kinds(&src).is_empty());
    }

    #[test]
    fn any_generator_name_works() {
        assert!(kinds("m = ModelGenerator()\nfinal_model = m.activity('x')").is_empty());
    }
}
