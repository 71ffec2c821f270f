//! Printing expressions back to the concrete syntax accepted by
//! [`crate::parse::parse`].

use crate::ast::Expr;
use std::fmt::{self, Write};

/// Renders `e` so that `parse(&pretty_print(e)) == Ok(e.clone())`.
pub fn pretty_print(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e).expect("writing to a String cannot fail");
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

fn write_expr<W: Write>(w: &mut W, e: &Expr) -> fmt::Result {
    match e {
        Expr::Let(name, bound, body) => {
            write!(w, "let {name} = ")?;
            write_expr(w, bound)?;
            w.write_str(" in ")?;
            write_expr(w, body)
        }
        Expr::EigenPair {
            basis,
            values,
            arg,
            body,
        } => {
            write!(w, "let ({basis}, {values}) = eigen(")?;
            write_expr(w, arg)?;
            w.write_str(") in ")?;
            write_expr(w, body)
        }
        _ => write_term(w, e),
    }
}

fn write_term<W: Write>(w: &mut W, e: &Expr) -> fmt::Result {
    match e {
        Expr::MatMul(l, r) => {
            write_term(w, l)?;
            w.write_str(" . ")?;
            write_factor(w, r)
        }
        _ => write_factor(w, e),
    }
}

fn write_factor<W: Write>(w: &mut W, e: &Expr) -> fmt::Result {
    match e {
        Expr::Transpose(inner) => {
            write_factor(w, inner)?;
            w.write_str("^*")
        }
        _ => write_base(w, e),
    }
}

fn write_base<W: Write>(w: &mut W, e: &Expr) -> fmt::Result {
    let call = |w: &mut W, kw: &str, inner: &Expr| -> fmt::Result {
        write!(w, "{kw}(")?;
        write_expr(w, inner)?;
        w.write_char(')')
    };
    match e {
        Expr::Var(v) => w.write_str(v),
        Expr::Ones(a) => call(w, "ones", a),
        Expr::Diag(a) => call(w, "diag", a),
        Expr::Inv(a) => call(w, "inv", a),
        Expr::Eigen(a) => call(w, "eigen", a),
        Expr::Apply(f, args) => {
            write!(w, "apply[{f}](")?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    w.write_str(", ")?;
                }
                write_expr(w, a)?;
            }
            w.write_char(')')
        }
        _ => {
            w.write_char('(')?;
            write_expr(w, e)?;
            w.write_char(')')
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn simple_forms() {
        assert_eq!(pretty_print(&Expr::var("M")), "M");
        assert_eq!(pretty_print(&Expr::var("M").transpose()), "M^*");
    }

    #[test]
    fn parenthesizes_where_needed() {
        let e = Expr::var("A").mul(Expr::var("B").mul(Expr::var("C")));
        assert_eq!(pretty_print(&e), "A . (B . C)");
        let e = Expr::var("A").mul(Expr::var("B")).transpose();
        assert_eq!(pretty_print(&e), "(A . B)^*");
        let e = Expr::var("A").mul(Expr::let_in("X", Expr::var("B"), Expr::var("X")));
        assert_eq!(parse(&pretty_print(&e)).unwrap(), e);
    }

    #[test]
    fn example_program_round_trips() {
        let e = parse("let N = (ones(M))^* in apply[c](ones(N))").unwrap();
        assert_eq!(pretty_print(&e), "let N = ones(M)^* in apply[c](ones(N))");
        assert_eq!(parse(&pretty_print(&e)).unwrap(), e);
    }
}
