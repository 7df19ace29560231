//! S-expression reader for SMT-LIB scripts.

use std::fmt;

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    /// Symbol or keyword; quoted symbols are stored without the bars.
    Symbol(String),
    /// Numeral or decimal literal.
    Number(String),
    Str(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(l) => Some(l),
            _ => None,
        }
    }

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|l| l.first())
            .and_then(SExpr::as_symbol)
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Symbol(s) => {
                if s.is_empty() || s.chars().any(|c| c.is_whitespace() || "()|;\"".contains(c)) {
                    write!(f, "|{s}|")
                } else {
                    f.write_str(s)
                }
            }
            SExpr::Number(n) => f.write_str(n),
            SExpr::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads every top-level expression. Nesting deeper than `max_depth` is rejected.
pub fn read_all(text: &str, max_depth: usize) -> Result<Vec<SExpr>, ParseError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let mut i = 0;
    let mut line = 1;
    let syntax = |line: usize, msg: &str| ParseError::Syntax {
        line,
        msg: msg.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                if stack.len() > max_depth {
                    return Err(ParseError::Limit("nesting depth"));
                }
                stack.push(Vec::new());
                i += 1;
            }
            b')' => {
                if stack.len() == 1 {
                    return Err(syntax(line, "unbalanced `)`"));
                }
                let items = stack.pop().unwrap();
                stack.last_mut().unwrap().push(SExpr::List(items));
                i += 1;
            }
            b'"' => {
                let mut s = Vec::new();
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err(syntax(line, "unterminated string")),
                        Some(b'"') if bytes.get(i + 1) == Some(&b'"') => {
                            s.push(b'"');
                            i += 2;
                        }
                        Some(b'"') => {
                            i += 1;
                            break;
                        }
                        Some(&b) => {
                            if b == b'\n' {
                                line += 1;
                            }
                            s.push(b);
                            i += 1;
                        }
                    }
                }
                stack
                    .last_mut()
                    .unwrap()
                    .push(SExpr::Str(String::from_utf8_lossy(&s).into_owned()));
            }
            b'|' => {
                let start = i + 1;
                let end = bytes[start..]
                    .iter()
                    .position(|&b| b == b'|')
                    .map(|p| start + p)
                    .ok_or_else(|| syntax(line, "unterminated quoted symbol"))?;
                let s = &text[start..end];
                line += s.matches('\n').count();
                stack.last_mut().unwrap().push(SExpr::Symbol(s.to_string()));
                i = end + 1;
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !b"()|;\"".contains(&bytes[i])
                {
                    i += 1;
                }
                let tok = &text[start..i];
                let atom = if tok.as_bytes()[0].is_ascii_digit() {
                    if !is_number(tok) {
                        return Err(syntax(line, &format!("malformed numeral `{tok}`")));
                    }
                    SExpr::Number(tok.to_string())
                } else {
                    SExpr::Symbol(tok.to_string())
                };
                stack.last_mut().unwrap().push(atom);
            }
        }
    }
    if stack.len() != 1 {
        return Err(syntax(line, "unbalanced `(`"));
    }
    Ok(stack.pop().unwrap())
}

fn is_number(tok: &str) -> bool {
    let (int, frac) = match tok.split_once('.') {
        Some((a, b)) => (a, Some(b)),
        None => (tok, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists() {
        let es = read_all("(assert (<= x 1.5)) ; done\n(check-sat)", 64).unwrap();
        assert_eq!(es.len(), 2);
        assert_eq!(es[0].head(), Some("assert"));
        assert_eq!(es[0].to_string(), "(assert (<= x 1.5))");
    }

    #[test]
    fn strings_and_quoted_symbols() {
        let es = read_all("(set-info :source \"a \"\"b\"\" (c)\") |x y|", 8).unwrap();
        assert_eq!(
            es[0].as_list().unwrap()[2],
            SExpr::Str("a \"b\" (c)".into())
        );
        assert_eq!(es[1], SExpr::Symbol("x y".into()));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_all("(a", 8).is_err());
        assert!(read_all("a)", 8).is_err());
        assert!(read_all("1.2.3", 8).is_err());
        assert!(read_all("((((", 2).is_err());
    }
}
