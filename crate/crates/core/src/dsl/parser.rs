use super::ast::{Expr, Program, Statement, StatementKind};
use super::lexer::{tokenize, Tok, Token};
use super::{SecurityViolation, SecurityViolationKind, ALLOWED_MODULES, GENERATOR_CLASS};

const MAX_DEPTH: usize = 64;

const KEYWORDS: [&str; 35] = [
    "False", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield", "None",
];

fn is_keyword(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

fn forbidden(t: &Token, message: impl Into<String>) -> SecurityViolation {
    SecurityViolation::new(SecurityViolationKind::ForbiddenSyntax, t.line, Some(t.column), message)
}

fn show(tok: &Tok) -> String {
    match tok {
        Tok::Name(n) => format!("'{n}'"),
        Tok::Str(_) => "a string".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::Comma => "','".into(),
        Tok::Dot => "'.'".into(),
        Tok::Assign => "'='".into(),
        Tok::Semi => "';'".into(),
        Tok::Newline => "end of line".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses the restricted language. Anything outside the grammar is a
/// `ForbiddenSyntax` violation; imports other than the generator module are
/// `ForbiddenImport`.
pub fn parse(code: &str) -> Result<Program, SecurityViolation> {
    let toks = tokenize(code)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let mut statements = Vec::new();
    loop {
        while matches!(p.peek().tok, Tok::Newline | Tok::Semi) {
            p.pos += 1;
        }
        if p.peek().tok == Tok::Eof {
            break;
        }
        statements.push(p.statement()?);
        let t = p.peek().clone();
        match t.tok {
            Tok::Newline | Tok::Semi | Tok::Eof => {}
            _ => return Err(forbidden(&t, format!("unexpected {} after statement", show(&t.tok)))),
        }
    }
    Ok(Program { statements })
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        &self.toks[(self.pos + ahead).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, context: &str) -> Result<Token, SecurityViolation> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(forbidden(&t, format!("expected {} {context}, found {}", show(&want), show(&t.tok))))
        }
    }

    fn name(&mut self, context: &str) -> Result<(String, Token), SecurityViolation> {
        let t = self.next();
        match &t.tok {
            Tok::Name(n) => Ok((n.clone(), t.clone())),
            other => Err(forbidden(&t, format!("expected a name {context}, found {}", show(other)))),
        }
    }

    fn dotted(&mut self) -> Result<String, SecurityViolation> {
        let (mut path, _) = self.name("after import keyword")?;
        while self.peek().tok == Tok::Dot {
            self.pos += 1;
            let (part, _) = self.name("in module path")?;
            path.push('.');
            path.push_str(&part);
        }
        Ok(path)
    }

    fn statement(&mut self) -> Result<Statement, SecurityViolation> {
        let first = self.peek().clone();
        let line = first.line;
        let Tok::Name(word) = &first.tok else {
            return Err(forbidden(&first, "a statement must be an assignment or the generator import"));
        };
        match word.as_str() {
            "import" => {
                self.pos += 1;
                let module = self.dotted().unwrap_or_else(|_| "?".into());
                return Err(SecurityViolation::new(
                    SecurityViolationKind::ForbiddenImport,
                    line,
                    Some(first.column),
                    format!("import of '{module}' is not allowed; only `from utils.model_generation import ModelGenerator` is"),
                ));
            }
            "from" => {
                self.pos += 1;
                let module = self.dotted()?;
                let kw = self.name("in import statement")?;
                if kw.0 != "import" {
                    return Err(forbidden(&kw.1, "expected 'import'"));
                }
                let (name, name_tok) = self.name("to import")?;
                if !ALLOWED_MODULES.contains(&module.as_str()) || name != GENERATOR_CLASS {
                    return Err(SecurityViolation::new(
                        SecurityViolationKind::ForbiddenImport,
                        line,
                        Some(first.column),
                        format!("import of '{name}' from '{module}' is not allowed; only `from utils.model_generation import ModelGenerator` is"),
                    ));
                }
                if !matches!(self.peek().tok, Tok::Newline | Tok::Semi | Tok::Eof) {
                    return Err(forbidden(&name_tok, "only a single name may be imported, without aliases"));
                }
                return Ok(Statement { line, kind: StatementKind::Import { module, name } });
            }
            w if is_keyword(w) => {
                return Err(forbidden(&first, format!("'{w}' statements are not allowed")));
            }
            _ => {}
        }
        let target = word.clone();
        self.pos += 1;
        let t = self.peek().clone();
        match t.tok {
            Tok::Assign => {
                self.pos += 1;
            }
            Tok::Comma => return Err(forbidden(&t, "tuple assignment is not allowed")),
            _ => {
                return Err(forbidden(&first, "a statement must be an assignment `name = ...` or the generator import"));
            }
        }
        let expr = self.expr()?;
        if self.peek().tok == Tok::Assign {
            return Err(forbidden(self.peek(), "chained assignment is not allowed"));
        }
        Ok(Statement { line, kind: StatementKind::Assign { target, expr } })
    }

    fn expr(&mut self) -> Result<Expr, SecurityViolation> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(forbidden(self.peek(), "expression is nested too deeply"));
        }
        let r = self.postfix();
        self.depth -= 1;
        r
    }

    fn postfix(&mut self) -> Result<Expr, SecurityViolation> {
        let mut e = self.primary()?;
        loop {
            let t = self.peek().clone();
            match t.tok {
                Tok::Dot => {
                    self.pos += 1;
                    let (attr, attr_tok) = self.name("after '.'")?;
                    if self.peek().tok != Tok::LParen {
                        return Err(forbidden(&attr_tok, format!("attribute access '.{attr}' is not allowed")));
                    }
                    if attr == "copy" {
                        self.pos += 1;
                        self.expect(Tok::RParen, "(copy() takes no arguments)")?;
                        e = Expr::Copy { receiver: Box::new(e) };
                        continue;
                    }
                    let Expr::Ident(receiver) = e else {
                        return Err(forbidden(&attr_tok, format!("method chain '.{attr}(...)' is not allowed; only .copy() may follow an expression")));
                    };
                    if attr.starts_with("__") {
                        return Err(forbidden(&attr_tok, format!("dunder attribute '{attr}' is not allowed")));
                    }
                    let (args, kwargs) = self.arguments()?;
                    e = Expr::Call { receiver: Some(receiver), method: attr, args, kwargs };
                }
                Tok::LParen => {
                    let Expr::Ident(name) = e else {
                        return Err(forbidden(&t, "only names and generator methods can be called"));
                    };
                    let (args, kwargs) = self.arguments()?;
                    e = Expr::Call { receiver: None, method: name, args, kwargs };
                }
                Tok::LBracket => return Err(forbidden(&t, "indexing and slicing are not allowed")),
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, SecurityViolation> {
        let t = self.next();
        match &t.tok {
            Tok::Name(n) if n == "None" => Ok(Expr::None),
            Tok::Name(n) if is_keyword(n) => Err(forbidden(&t, format!("'{n}' is not allowed in expressions"))),
            Tok::Name(n) => Ok(Expr::Ident(n.clone())),
            Tok::Str(s) => Ok(Expr::Str(s.clone())),
            Tok::LBracket => {
                let items = self.sequence(Tok::RBracket)?;
                Ok(Expr::List(items.0))
            }
            Tok::LParen => {
                let (items, trailing) = self.sequence(Tok::RParen)?;
                match items.len() {
                    0 => Err(forbidden(&t, "empty tuples are not allowed")),
                    1 if !trailing => Ok(items.into_iter().next().unwrap()),
                    _ => Ok(Expr::Tuple(items)),
                }
            }
            other => Err(forbidden(&t, format!("unexpected {}", show(other)))),
        }
    }

    /// Comma-separated expressions up to `close`. Also reports whether the
    /// last item had a trailing comma.
    fn sequence(&mut self, close: Tok) -> Result<(Vec<Expr>, bool), SecurityViolation> {
        let mut items = Vec::new();
        let mut trailing = false;
        loop {
            if self.peek().tok == close {
                self.pos += 1;
                return Ok((items, trailing));
            }
            items.push(self.expr()?);
            let t = self.next();
            match &t.tok {
                Tok::Comma => trailing = true,
                tok if *tok == close => return Ok((items, false)),
                Tok::Name(n) if n == "for" => {
                    return Err(forbidden(&t, "comprehensions are not allowed"));
                }
                other => {
                    return Err(forbidden(&t, format!("expected ',' or {}, found {}", show(&close), show(other))));
                }
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn arguments(&mut self) -> Result<(Vec<Expr>, Vec<(String, Expr)>), SecurityViolation> {
        self.expect(Tok::LParen, "to open the argument list")?;
        let mut args = Vec::new();
        let mut kwargs: Vec<(String, Expr)> = Vec::new();
        loop {
            if self.peek().tok == Tok::RParen {
                self.pos += 1;
                return Ok((args, kwargs));
            }
            let is_kw = matches!(self.peek().tok, Tok::Name(_)) && *self.peek_at(1) == Tok::Assign;
            if is_kw {
                let (key, key_tok) = self.name("as keyword")?;
                if is_keyword(&key) {
                    return Err(forbidden(&key_tok, format!("'{key}' cannot be a keyword argument")));
                }
                if kwargs.iter().any(|(k, _)| *k == key) {
                    return Err(forbidden(&key_tok, format!("keyword argument '{key}' given twice")));
                }
                self.pos += 1;
                let value = self.expr()?;
                kwargs.push((key, value));
            } else {
                if !kwargs.is_empty() {
                    return Err(forbidden(self.peek(), "positional argument after keyword argument"));
                }
                args.push(self.expr()?);
            }
            let t = self.next();
            match &t.tok {
                Tok::Comma => {}
                Tok::RParen => return Ok((args, kwargs)),
                Tok::Name(n) if n == "for" => return Err(forbidden(&t, "generator expressions are not allowed")),
                other => return Err(forbidden(&t, format!("expected ',' or ')', found {}", show(other)))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::render;

    fn kind_of(src: &str) -> SecurityViolationKind {
        parse(src).unwrap_err().kind
    }

    #[test]
    fn assignment_forms() {
        let p = parse(
            "from utils.model_generation import ModelGenerator\n\
             gen = ModelGenerator()\n\
             a = gen.activity('a')\n\
             b = a.copy()\n\
             l = gen.loop(do=a, redo=None)\n\
             po = gen.partial_order(dependencies=[(a, b), (l,)])\n",
        )
        .unwrap();
        assert_eq!(p.statements.len(), 6);
        assert_eq!(p.statements[5].line, 6);
        let StatementKind::Assign { expr, .. } = &p.statements[5].kind else { panic!() };
        assert_eq!(expr.render(), "gen.partial_order(dependencies=[(a, b), (l,)])");
    }

    #[test]
    fn grouping_parentheses_collapse() {
        let p = parse("x = (a)\ny = (a,)").unwrap();
        assert_eq!(render(&p), "x = a\ny = (a,)\n");
    }

    #[test]
    fn imports_other_than_the_generator_are_refused() {
        assert_eq!(kind_of("import os"), SecurityViolationKind::ForbiddenImport);
        assert_eq!(kind_of("from os import system"), SecurityViolationKind::ForbiddenImport);
        assert_eq!(
            kind_of("from utils.model_generation import ModelGenerator as M"),
            SecurityViolationKind::ForbiddenSyntax
        );
    }

    #[test]
    fn forbidden_constructs() {
        for src in [
            "x = 1 + 2",
            "for x in y:\n    pass",
            "if a:\n    b = c",
            "print('x')",
            "x = a.b",
            "x = gen.activity('a').label",
            "x = gen.xor(a, b).activity('c')",
            "x = [a for a in b]",
            "x = a[0]",
            "x = lambda: 0",
            "a, b = c",
            "a = b = c",
            "x = f(a=1)",
            "x = f(a=b, c)",
            "def f():\n    pass",
            "x = a.__class__()",
        ] {
            assert_eq!(kind_of(src), SecurityViolationKind::ForbiddenSyntax, "{src}");
        }
    }

    #[test]
    fn deep_nesting_is_refused_not_overflowed() {
        let src = format!("x = {}a{}", "(".repeat(5000), ")".repeat(5000));
        assert_eq!(kind_of(&src), SecurityViolationKind::ForbiddenSyntax);
    }

    #[test]
    fn errors_point_at_the_line() {
        let err = parse("a = gen.activity('a')\n\nb = a + a\n").unwrap_err();
        assert_eq!(err.line, 3);
    }
}
