//! SMT-LIB 2 output and a reader for the same fragment.

use super::formula::{Formula, RealFormula, Term, Witness};
use crate::scalar::parse_rational;
use num::rational::BigRational;
use num::{Signed, Zero};
use std::fmt::Write;
use thiserror::Error;

fn term_smt(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Const(c) => {
            let neg = c.is_negative();
            let a = c.abs();
            let body = if a.is_integer() {
                a.numer().to_string()
            } else {
                format!("(/ {} {})", a.numer(), a.denom())
            };
            if neg {
                let _ = write!(out, "(- {body})");
            } else {
                out.push_str(&body);
            }
        }
        Term::Neg(a) => {
            out.push_str("(- ");
            term_smt(a, out);
            out.push(')');
        }
        Term::Add(ts) | Term::Mul(ts) => {
            out.push_str(if matches!(t, Term::Add(_)) { "(+" } else { "(*" });
            for x in ts {
                out.push(' ');
                term_smt(x, out);
            }
            out.push(')');
        }
    }
}

fn formula_smt(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Eq(a, b) | Formula::Lt(a, b) => {
            out.push_str(if matches!(f, Formula::Eq(..)) { "(= " } else { "(< " });
            term_smt(a, out);
            out.push(' ');
            term_smt(b, out);
            out.push(')');
        }
        Formula::And(fs) | Formula::Or(fs) => {
            out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
            for x in fs {
                out.push(' ');
                formula_smt(x, out);
            }
            out.push(')');
        }
        Formula::Exists { vars, body, .. } => {
            out.push_str("(exists (");
            let decls: Vec<String> = vars.iter().map(|v| format!("({v} Real)")).collect();
            out.push_str(&decls.join(" "));
            out.push_str(") ");
            formula_smt(body, out);
            out.push(')');
        }
    }
}

/// One formula in SMT-LIB syntax, keeping its quantifiers.
pub fn formula_to_smtlib(f: &Formula) -> String {
    let mut s = String::new();
    formula_smt(f, &mut s);
    s
}

/// A script over NRA: free and existential variables become declared
/// constants and each top-level conjunct becomes one assertion.
pub fn serialize_smtlib(f: &RealFormula) -> String {
    let mut out = String::from("(set-logic NRA)\n");
    for v in f.free.iter().chain(&f.body.bound_vars()) {
        let _ = writeln!(out, "(declare-const {v} Real)");
    }
    let body = f.body.skolemized();
    let conjuncts = match body {
        Formula::And(fs) => fs,
        Formula::True => Vec::new(),
        other => vec![other],
    };
    for c in &conjuncts {
        out.push_str("(assert ");
        formula_smt(c, &mut out);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("SMT-LIB: {message}")]
pub struct SmtParseError {
    pub message: String,
}

fn err<T>(message: impl Into<String>) -> Result<T, SmtParseError> {
    Err(SmtParseError {
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
            }
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    toks
}

fn read_all(text: &str) -> Result<Vec<SExpr>, SmtParseError> {
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    for t in tokenize(text) {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                if stack.len() < 2 {
                    return err("unbalanced `)`");
                }
                let list = stack.pop().expect("checked depth");
                stack.last_mut().expect("outer level").push(SExpr::List(list));
            }
            _ => stack.last_mut().expect("outer level").push(SExpr::Atom(t)),
        }
    }
    if stack.len() != 1 {
        return err("unbalanced `(`");
    }
    Ok(stack.pop().expect("outer level"))
}

fn parse_term(s: &SExpr) -> Result<Term, SmtParseError> {
    match s {
        SExpr::Atom(a) => {
            if a.starts_with(|c: char| c.is_ascii_digit()) {
                parse_rational(a)
                    .map(Term::Const)
                    .ok_or_else(|| SmtParseError {
                        message: format!("bad numeral `{a}`"),
                    })
            } else {
                Ok(Term::var(a.clone()))
            }
        }
        SExpr::List(items) => {
            let (head, args) = match items.split_first() {
                Some((SExpr::Atom(h), rest)) => (h.as_str(), rest),
                _ => return err("term must start with an operator"),
            };
            let ts = args.iter().map(parse_term).collect::<Result<Vec<_>, _>>()?;
            match (head, ts.len()) {
                ("+", n) if n >= 1 => Ok(Term::sum(ts)),
                ("*", n) if n >= 1 => Ok(Term::product(ts)),
                ("-", 1) => Ok(ts.into_iter().next().expect("one").neg()),
                ("-", n) if n >= 2 => {
                    let mut it = ts.into_iter();
                    let first = it.next().expect("first");
                    Ok(Term::sum(std::iter::once(first).chain(it.map(Term::neg)).collect()))
                }
                ("/", 2) => match &ts[1] {
                    Term::Const(q) if !q.is_zero() => {
                        let inv = BigRational::from_integer(1.into()) / q;
                        Ok(ts[0].clone().mul(Term::Const(inv)))
                    }
                    _ => err("division is only supported by a nonzero constant"),
                },
                _ => err(format!("unsupported term operator `{head}` with {} arguments", ts.len())),
            }
        }
    }
}

/// The negation of a quantifier-free formula, pushed to the atoms.
fn negate(f: Formula) -> Result<Formula, SmtParseError> {
    Ok(match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Eq(a, b) => Formula::neq(a, b),
        Formula::Lt(a, b) => Formula::le(b, a),
        Formula::And(fs) => Formula::or(fs.into_iter().map(negate).collect::<Result<_, _>>()?),
        Formula::Or(fs) => Formula::and(fs.into_iter().map(negate).collect::<Result<_, _>>()?),
        Formula::Exists { .. } => return err("negated quantifier leaves the existential fragment"),
    })
}

fn chain(ts: Vec<Term>, rel: impl Fn(Term, Term) -> Formula) -> Result<Formula, SmtParseError> {
    if ts.len() < 2 {
        return err("comparison needs two arguments");
    }
    Ok(Formula::and(ts.windows(2).map(|w| rel(w[0].clone(), w[1].clone())).collect()))
}

fn parse_formula(s: &SExpr) -> Result<Formula, SmtParseError> {
    match s {
        SExpr::Atom(a) => match a.as_str() {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            other => err(format!("expected a formula, found `{other}`")),
        },
        SExpr::List(items) => {
            let (head, args) = match items.split_first() {
                Some((SExpr::Atom(h), rest)) => (h.as_str(), rest),
                _ => return err("formula must start with an operator"),
            };
            let terms = || args.iter().map(parse_term).collect::<Result<Vec<_>, _>>();
            let subs = || args.iter().map(parse_formula).collect::<Result<Vec<_>, _>>();
            match head {
                "and" => Ok(Formula::and(subs()?)),
                "or" => Ok(Formula::or(subs()?)),
                "not" if args.len() == 1 => negate(parse_formula(&args[0])?),
                "=>" if args.len() == 2 => {
                    let f = subs()?;
                    Ok(Formula::or(vec![negate(f[0].clone())?, f[1].clone()]))
                }
                "=" => chain(terms()?, Formula::eq),
                "<" => chain(terms()?, Formula::lt),
                ">" => chain(terms()?, |a, b| Formula::lt(b, a)),
                "<=" => chain(terms()?, Formula::le),
                ">=" => chain(terms()?, |a, b| Formula::le(b, a)),
                "distinct" if args.len() == 2 => chain(terms()?, Formula::neq),
                "exists" if args.len() == 2 => {
                    let SExpr::List(decls) = &args[0] else {
                        return err("exists needs a variable list");
                    };
                    let mut vars = Vec::new();
                    for d in decls {
                        match d {
                            SExpr::List(p) if p.len() == 2 && p[1] == SExpr::Atom("Real".into()) => {
                                match &p[0] {
                                    SExpr::Atom(v) => vars.push(v.clone()),
                                    _ => return err("bad variable declaration"),
                                }
                            }
                            _ => return err("bad variable declaration"),
                        }
                    }
                    Ok(Formula::exists(vars, Witness::None, parse_formula(&args[1])?))
                }
                other => err(format!("unsupported formula operator `{other}`")),
            }
        }
    }
}

/// The commands of a parsed script.
#[derive(Clone, Debug, PartialEq)]
pub struct Script {
    pub logic: Option<String>,
    pub declared: Vec<String>,
    pub asserts: Vec<Formula>,
    pub check_sat: bool,
}

impl Script {
    pub fn conjunction(&self) -> Formula {
        Formula::and(self.asserts.clone())
    }
}

fn command_name(s: &SExpr) -> Option<&str> {
    match s {
        SExpr::List(items) => match items.first() {
            Some(SExpr::Atom(h)) => Some(h.as_str()),
            _ => None,
        },
        _ => None,
    }
}

/// Parses a script made of `set-logic`, `declare-const`, `assert`,
/// `check-sat` and `exit` commands.
pub fn parse_script(text: &str) -> Result<Script, SmtParseError> {
    let mut script = Script {
        logic: None,
        declared: Vec::new(),
        asserts: Vec::new(),
        check_sat: false,
    };
    for cmd in read_all(text)? {
        let SExpr::List(items) = &cmd else {
            return err("expected a command");
        };
        match (command_name(&cmd), &items[1..]) {
            (Some("set-logic"), [SExpr::Atom(l)]) => script.logic = Some(l.clone()),
            (Some("declare-const"), [SExpr::Atom(v), SExpr::Atom(sort)]) if sort == "Real" => {
                script.declared.push(v.clone())
            }
            (Some("declare-fun"), [SExpr::Atom(v), SExpr::List(a), SExpr::Atom(sort)])
                if a.is_empty() && sort == "Real" =>
            {
                script.declared.push(v.clone())
            }
            (Some("assert"), [f]) => script.asserts.push(parse_formula(f)?),
            (Some("check-sat"), []) => script.check_sat = true,
            (Some("exit"), []) | (Some("set-option") | Some("set-info"), _) => {}
            (Some(other), _) => return err(format!("unsupported command `{other}`")),
            (None, _) => return err("expected a command"),
        }
    }
    Ok(script)
}

/// Parses a constraint: either a single formula or a script whose
/// assertions are conjoined.
pub fn parse_constraint(text: &str) -> Result<Formula, SmtParseError> {
    let items = read_all(text)?;
    let is_script = items.iter().any(|s| {
        matches!(
            command_name(s),
            Some("assert" | "declare-const" | "declare-fun" | "set-logic" | "check-sat")
        )
    });
    if is_script {
        return Ok(parse_script(text)?.conjunction());
    }
    match items.as_slice() {
        [one] => parse_formula(one),
        [] => Ok(Formula::True),
        _ => Ok(Formula::and(items.iter().map(parse_formula).collect::<Result<_, _>>()?)),
    }
}
