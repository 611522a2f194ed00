use super::{SecurityViolation, SecurityViolationKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Name(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Assign,
    Semi,
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

fn forbidden(line: usize, column: usize, message: impl Into<String>) -> SecurityViolation {
    SecurityViolation::new(SecurityViolationKind::ForbiddenSyntax, line, Some(column), message)
}

fn describe_char(c: char) -> String {
    match c {
        '0'..='9' => "numeric literals are not allowed".into(),
        '+' | '-' | '*' | '/' | '%' | '@' | '&' | '|' | '^' | '~' | '<' | '>' | '!' => {
            format!("operator '{c}' is not allowed")
        }
        ':' => "':' is not allowed (no blocks, slices, lambdas or annotations)".into(),
        '{' | '}' => "dict and set literals are not allowed".into(),
        '\\' => "line continuation with '\\' is not allowed".into(),
        '`' => "backticks are not allowed".into(),
        c => format!("character {c:?} is not allowed"),
    }
}

/// Splits source text into tokens. Newlines inside brackets are ignored, as
/// are comments and blank lines. A statement may not be indented.
pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, SecurityViolation> {
    let chars: Vec<char> = src.chars().collect();
    let mut out: Vec<Token> = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut depth = 0usize;
    let mut at_line_start = true;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            if depth == 0 && matches!(out.last(), Some(t) if t.tok != Tok::Newline) {
                out.push(Token { tok: Tok::Newline, line, column: col });
            }
            i += 1;
            line += 1;
            col = 1;
            at_line_start = true;
            continue;
        }
        if c == ' ' || c == '\t' || c == '\r' || c == '\u{feff}' {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if at_line_start && depth == 0 && col > 1 {
            return Err(forbidden(line, col, "unexpected indentation (blocks are not allowed)"));
        }
        at_line_start = false;
        let (start_line, start_col) = (line, col);
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            ';' => Some(Tok::Semi),
            '=' => {
                if chars.get(i + 1) == Some(&'=') {
                    return Err(forbidden(line, col, "comparison '==' is not allowed"));
                }
                Some(Tok::Assign)
            }
            _ => None,
        };
        if let Some(tok) = simple {
            match tok {
                Tok::LParen | Tok::LBracket => depth += 1,
                Tok::RParen | Tok::RBracket => {
                    if depth == 0 {
                        return Err(forbidden(line, col, "unbalanced closing bracket"));
                    }
                    depth -= 1;
                }
                _ => {}
            }
            out.push(Token { tok, line: start_line, column: start_col });
            i += 1;
            col += 1;
            continue;
        }
        if c == '\'' || c == '"' {
            let (s, used) = string_literal(&chars[i..], line, col)?;
            out.push(Token { tok: Tok::Str(s), line: start_line, column: start_col });
            i += used;
            col += used;
            continue;
        }
        if c == '_' || c.is_alphabetic() {
            let mut name = String::new();
            while i < chars.len() && (chars[i] == '_' || chars[i].is_alphanumeric()) {
                name.push(chars[i]);
                i += 1;
                col += 1;
            }
            if matches!(chars.get(i), Some('\'' | '"')) {
                return Err(forbidden(start_line, start_col, format!("string prefix '{name}' is not allowed")));
            }
            out.push(Token { tok: Tok::Name(name), line: start_line, column: start_col });
            continue;
        }
        return Err(forbidden(line, col, describe_char(c)));
    }
    if depth > 0 {
        return Err(forbidden(line, col, "unclosed bracket at end of input"));
    }
    if matches!(out.last(), Some(t) if t.tok != Tok::Newline) {
        out.push(Token { tok: Tok::Newline, line, column: col });
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Reads one quoted string starting at `chars[0]`; returns the value and the
/// number of characters consumed.
fn string_literal(chars: &[char], line: usize, col: usize) -> Result<(String, usize), SecurityViolation> {
    let quote = chars[0];
    if chars.get(1) == Some(&quote) && chars.get(2) == Some(&quote) {
        return Err(forbidden(line, col, "triple-quoted strings are not allowed"));
    }
    let mut value = String::new();
    let mut i = 1;
    loop {
        match chars.get(i) {
            None | Some('\n') => return Err(forbidden(line, col, "unterminated string literal")),
            Some(&c) if c == quote => return Ok((value, i + 1)),
            Some('\\') => {
                let escaped = match chars.get(i + 1) {
                    Some('\\') => '\\',
                    Some('\'') => '\'',
                    Some('"') => '"',
                    Some('n') => '\n',
                    Some('t') => '\t',
                    _ => {
                        return Err(forbidden(line, col + i, "unsupported escape sequence in string"));
                    }
                };
                value.push(escaped);
                i += 2;
            }
            Some(&c) => {
                value.push(c);
                i += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn newlines_inside_brackets_are_joined() {
        let t = toks("x = f(\n  a,\n  b)\n\n# note\n");
        assert_eq!(t.iter().filter(|t| **t == Tok::Newline).count(), 1);
    }

    #[test]
    fn string_escapes() {
        assert_eq!(toks(r#"'it\'s'"#)[0], Tok::Str("it's".into()));
        assert_eq!(toks(r#""a\"b""#)[0], Tok::Str("a\"b".into()));
    }

    #[test]
    fn rejects_what_the_grammar_lacks() {
        for src in ["x = 1", "x = a + b", "  x = a", "x = f'{a}'", "x = '''a'''", "x = {}", "x = a\\\n"] {
            let err = tokenize(src).unwrap_err();
            assert_eq!(err.kind, SecurityViolationKind::ForbiddenSyntax, "{src}");
        }
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("a = b\nc = 'x'").unwrap();
        let last_str = t.iter().find(|t| matches!(t.tok, Tok::Str(_))).unwrap();
        assert_eq!((last_str.line, last_str.column), (2, 5));
    }
}
