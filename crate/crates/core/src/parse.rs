//! Concrete syntax: `.mtl` programs and `.mts` schemas.
//!
//! ```text
//! expr   := "let" IDENT "=" expr "in" expr
//!         | "let" "(" IDENT "," IDENT ")" "=" "eigen" "(" expr ")" "in" expr
//!         | term
//! term   := factor { "." factor }
//! factor := base { "^*" }
//! base   := IDENT | "ones" "(" expr ")" | "diag" "(" expr ")"
//!         | "inv" "(" expr ")" | "eigen" "(" expr ")"
//!         | "apply" "[" FNNAME "]" "(" expr { "," expr } ")"
//!         | "(" expr ")"
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use crate::ast::{Expr, MatrixType, Schema, SizeTerm};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}: duplicate variable `{name}` in schema")]
    DuplicateVariable { line: usize, name: String },
    #[error("schema declares no variables")]
    EmptySchema,
}

const KEYWORDS: &[&str] = &["let", "in", "ones", "diag", "inv", "eigen", "apply"];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Keyword(&'static str),
    FnName(String),
    Eq,
    LParen,
    RParen,
    LBracket,
    Comma,
    Dot,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Keyword(k) => write!(f, "`{k}`"),
            Tok::FnName(s) => write!(f, "function name `{s}`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Star => f.write_str("`^*`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, expected: &str, found: String| ParseError::Syntax {
        line,
        col,
        expected: vec![expected.to_owned()],
        found,
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }
        let tok = match c {
            '=' => Tok::Eq,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '^' => {
                if chars.get(i + 1) == Some(&'*') {
                    i += 1;
                    col += 1;
                    Tok::Star
                } else {
                    let found = chars.get(i + 1).map_or("end of input".into(), |c| format!("`{c}`"));
                    return Err(err(tl, tc + 1, "`*` after `^`", found));
                }
            }
            '[' => {
                // The function name is everything up to the closing bracket.
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j] != ']' && chars[j] != '\n' {
                    j += 1;
                }
                if j >= chars.len() || chars[j] != ']' {
                    return Err(err(line, col + (j - i), "`]`", "end of line".into()));
                }
                let name: String = chars[start..j].iter().collect::<String>().trim().to_owned();
                if name.is_empty() {
                    return Err(err(tl, tc + 1, "function name", "`]`".into()));
                }
                out.push(Spanned {
                    tok: Tok::LBracket,
                    line: tl,
                    col: tc,
                });
                out.push(Spanned {
                    tok: Tok::FnName(name),
                    line: tl,
                    col: tc + 1,
                });
                col += j + 1 - i;
                i = j + 1;
                continue;
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                col += j - i;
                i = j;
                let tok = match KEYWORDS.iter().find(|k| **k == word) {
                    Some(k) => Tok::Keyword(k),
                    None => Tok::Ident(word),
                };
                out.push(Spanned {
                    tok,
                    line: tl,
                    col: tc,
                });
                continue;
            }
            other => return Err(err(tl, tc, "an expression", format!("`{other}`"))),
        };
        out.push(Spanned {
            tok,
            line: tl,
            col: tc,
        });
        i += 1;
        col += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError::Syntax {
            line: s.line,
            col: s.col,
            expected: expected.iter().map(|e| (*e).to_owned()).collect(),
            found: s.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, desc: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[desc]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() != Tok::Keyword("let") {
            return self.term();
        }
        self.bump();
        if *self.peek() == Tok::LParen {
            self.bump();
            let basis = self.ident()?;
            self.expect(Tok::Comma, "`,`")?;
            let values = self.ident()?;
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Eq, "`=`")?;
            self.expect(Tok::Keyword("eigen"), "`eigen`")?;
            self.expect(Tok::LParen, "`(`")?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Keyword("in"), "`in`")?;
            let body = self.expr()?;
            return Ok(Expr::eigen_pair(basis, values, arg, body));
        }
        let name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                s
            }
            _ => return Err(self.error(&["identifier", "`(`"])),
        };
        self.expect(Tok::Eq, "`=`")?;
        let bound = self.expr()?;
        self.expect(Tok::Keyword("in"), "`in`")?;
        let body = self.expr()?;
        Ok(Expr::let_in(name, bound, body))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let rhs = self.factor()?;
            lhs = lhs.mul(rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.base()?;
        while *self.peek() == Tok::Star {
            self.bump();
            e = e.transpose();
        }
        Ok(e)
    }

    fn parenthesized(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            Tok::LParen => self.parenthesized(),
            Tok::Keyword(k @ ("ones" | "diag" | "inv" | "eigen")) => {
                self.bump();
                let inner = self.parenthesized()?;
                Ok(match k {
                    "ones" => inner.ones(),
                    "diag" => inner.diag(),
                    "inv" => inner.inv(),
                    _ => inner.eigen(),
                })
            }
            Tok::Keyword("apply") => {
                self.bump();
                self.expect(Tok::LBracket, "`[`")?;
                let name = match self.bump() {
                    Tok::FnName(n) => n,
                    _ => unreachable!("lexer always emits a name after `[`"),
                };
                self.expect(Tok::LParen, "`(`")?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)` or `,`")?;
                Ok(Expr::Apply(name, args))
            }
            _ => Err(self.error(&[
                "identifier",
                "`(`",
                "`ones`",
                "`diag`",
                "`inv`",
                "`eigen`",
                "`apply`",
            ])),
        }
    }
}

/// Parses a program.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["`.`", "`^*`", "end of input"]));
    }
    Ok(e)
}

/// Parses a schema file: one `NAME : s x s` declaration per line.
pub fn parse_schema(src: &str) -> Result<Schema, ParseError> {
    let mut schema = Schema::new();
    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let syntax = |col: usize, expected: &str, found: &str| ParseError::Syntax {
            line: line_no,
            col,
            expected: vec![expected.to_owned()],
            found: found.to_owned(),
        };
        let Some(colon) = line.find(':') else {
            return Err(syntax(line.len() + 1, "`:`", "end of line"));
        };
        let name = line[..colon].trim();
        if name.is_empty() || !name.starts_with(is_ident_start) || !name.chars().all(is_ident_char)
        {
            return Err(syntax(1, "identifier", name));
        }
        if KEYWORDS.contains(&name) {
            return Err(syntax(1, "identifier", name));
        }
        let rest = &line[colon + 1..];
        let words: Vec<&str> = rest.split_whitespace().collect();
        let ty_col = colon + 2;
        let parse_term = |w: &str| -> Result<SizeTerm, ParseError> {
            if w == "1" {
                Ok(SizeTerm::One)
            } else if w.starts_with(is_ident_start) && w.chars().all(is_ident_char) {
                Ok(SizeTerm::sym(w))
            } else {
                Err(syntax(ty_col, "size symbol or `1`", w))
            }
        };
        let ty = match words.as_slice() {
            [r, x, c] if *x == "x" || *x == "×" => MatrixType::new(parse_term(r)?, parse_term(c)?),
            [_, other, _] => return Err(syntax(ty_col, "`x`", other)),
            _ => return Err(syntax(ty_col, "`sizeterm x sizeterm`", rest.trim())),
        };
        if schema.insert(name, ty).is_some() {
            return Err(ParseError::DuplicateVariable {
                line: line_no,
                name: name.to_owned(),
            });
        }
    }
    if schema.is_empty() {
        return Err(ParseError::EmptySchema);
    }
    Ok(schema)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_let_with_constant() {
        let e = parse("let N = (ones(M))^* in apply[c](ones(N))").unwrap();
        let want = Expr::let_in(
            "N",
            Expr::var("M").ones().transpose(),
            Expr::apply("c", vec![Expr::var("N").ones()]),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn parses_single_variable() {
        assert_eq!(parse("M").unwrap(), Expr::var("M"));
    }

    #[test]
    fn parses_inv_of_product() {
        let e = parse("inv(eigen(A) . A)").unwrap();
        assert_eq!(e, Expr::var("A").eigen().mul(Expr::var("A")).inv());
    }

    #[test]
    fn product_is_left_associative_and_binds_looser_than_star() {
        let e = parse("A . B . C^*^*").unwrap();
        let want = Expr::var("A")
            .mul(Expr::var("B"))
            .mul(Expr::var("C").transpose().transpose());
        assert_eq!(e, want);
    }

    #[test]
    fn parses_eigen_pair_and_constants() {
        let e = parse("let (B, L) = eigen(A) in apply[const:-3/4+1/2i](L, B) # trailing").unwrap();
        assert_eq!(
            e,
            Expr::eigen_pair(
                "B",
                "L",
                Expr::var("A"),
                Expr::apply("const:-3/4+1/2i", vec![Expr::var("L"), Expr::var("B")])
            )
        );
    }

    #[test]
    fn reports_position_of_errors() {
        match parse("let X = M\n in M . ") {
            Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 9)),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(parse("M N"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("apply[f]()"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("let in = M in M"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("M ^ N"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn schema_files() {
        let s = parse_schema("# graph\nM : a x b\nR : a x a\nv : a x 1\n").unwrap();
        assert_eq!(s.get("M"), Some(&MatrixType::of("a", "b")));
        assert_eq!(s.get("R"), Some(&MatrixType::of("a", "a")));
        assert_eq!(s.get("v"), Some(&MatrixType::of("a", "1")));
        assert!(matches!(
            parse_schema("M : a x b\nM : a x a"),
            Err(ParseError::DuplicateVariable { line: 2, .. })
        ));
        assert!(matches!(parse_schema("M : a b"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_schema("# nothing\n"), Err(ParseError::EmptySchema)));
    }
}
