//! The algebra of binary relations and its compilation into MATLANG over
//! adjacency matrices.
//!
//! Text syntax: `all`, `id`, relation names, `e + e` (union), `e - e`
//! (difference), `e^` (converse) and `e ; e` (composition). Converse binds
//! tightest, then composition, then union and difference, which associate
//! to the left.

use crate::ast::{Expr, MatrixType, Schema};
use crate::matrix::{Instance, Matrix};
use crate::scalar::Scalar;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BinRelExpr {
    Var(String),
    All,
    Identity,
    Union(Box<BinRelExpr>, Box<BinRelExpr>),
    Difference(Box<BinRelExpr>, Box<BinRelExpr>),
    Converse(Box<BinRelExpr>),
    Compose(Box<BinRelExpr>, Box<BinRelExpr>),
}

impl BinRelExpr {
    pub fn var(name: impl Into<String>) -> Self {
        BinRelExpr::Var(name.into())
    }

    pub fn union(self, o: BinRelExpr) -> Self {
        BinRelExpr::Union(Box::new(self), Box::new(o))
    }

    pub fn minus(self, o: BinRelExpr) -> Self {
        BinRelExpr::Difference(Box::new(self), Box::new(o))
    }

    pub fn converse(self) -> Self {
        BinRelExpr::Converse(Box::new(self))
    }

    pub fn compose(self, o: BinRelExpr) -> Self {
        BinRelExpr::Compose(Box::new(self), Box::new(o))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            BinRelExpr::Var(v) => {
                out.insert(v.clone());
            }
            BinRelExpr::All | BinRelExpr::Identity => {}
            BinRelExpr::Converse(a) => a.collect_vars(out),
            BinRelExpr::Union(a, b) | BinRelExpr::Difference(a, b) | BinRelExpr::Compose(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BinRelExpr::Var(_) | BinRelExpr::All | BinRelExpr::Identity => 1,
            BinRelExpr::Converse(a) => 1 + a.depth(),
            BinRelExpr::Union(a, b) | BinRelExpr::Difference(a, b) | BinRelExpr::Compose(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

impl fmt::Display for BinRelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Levels: 0 = sum, 1 = composition, 2 = postfix/atom.
        fn go(e: &BinRelExpr, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let open = match e {
                BinRelExpr::Union(..) | BinRelExpr::Difference(..) => level > 0,
                BinRelExpr::Compose(..) => level > 1,
                _ => false,
            };
            if open {
                f.write_str("(")?;
            }
            match e {
                BinRelExpr::Var(v) => f.write_str(v)?,
                BinRelExpr::All => f.write_str("all")?,
                BinRelExpr::Identity => f.write_str("id")?,
                BinRelExpr::Union(a, b) => {
                    go(a, 0, f)?;
                    f.write_str(" + ")?;
                    go(b, 1, f)?;
                }
                BinRelExpr::Difference(a, b) => {
                    go(a, 0, f)?;
                    f.write_str(" - ")?;
                    go(b, 1, f)?;
                }
                BinRelExpr::Compose(a, b) => {
                    go(a, 1, f)?;
                    f.write_str(" ; ")?;
                    go(b, 2, f)?;
                }
                BinRelExpr::Converse(a) => {
                    let atomic = matches!(
                        **a,
                        BinRelExpr::Var(_)
                            | BinRelExpr::All
                            | BinRelExpr::Identity
                            | BinRelExpr::Converse(_)
                    );
                    if atomic {
                        go(a, 2, f)?;
                    } else {
                        f.write_str("(")?;
                        go(a, 0, f)?;
                        f.write_str(")")?;
                    }
                    f.write_str("^")?;
                }
            }
            if open {
                f.write_str(")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BinRelError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("no relation variable available to express `all` or `id`")]
    EmptySchema,
    #[error("adjacency matrix must be square, got {0}x{1}")]
    NonSquare(usize, usize),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, BinRelError> {
        Err(BinRelError::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn sum(&mut self) -> Result<BinRelExpr, BinRelError> {
        let mut acc = self.compose()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.union(self.compose()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.minus(self.compose()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn compose(&mut self) -> Result<BinRelExpr, BinRelError> {
        let mut acc = self.postfix()?;
        while self.peek() == Some(';') {
            self.pos += 1;
            acc = acc.compose(self.postfix()?);
        }
        Ok(acc)
    }

    fn postfix(&mut self) -> Result<BinRelExpr, BinRelError> {
        let mut acc = self.atom()?;
        while self.peek() == Some('^') {
            self.pos += 1;
            acc = acc.converse();
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<BinRelExpr, BinRelError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.src[self.pos..].starts_with(|c: char| c.is_alphanumeric() || c == '_') {
                    self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
                }
                Ok(match &self.src[start..self.pos] {
                    "all" => BinRelExpr::All,
                    "id" => BinRelExpr::Identity,
                    name => BinRelExpr::var(name),
                })
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse_binrel(src: &str) -> Result<BinRelExpr, BinRelError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.sum()?;
    if let Some(c) = p.peek() {
        return p.err(format!("unexpected `{c}`"));
    }
    Ok(e)
}

/// The graph schema giving every name type `symbol x symbol`.
pub fn graph_schema<'a>(names: impl IntoIterator<Item = &'a str>, symbol: &str) -> Schema {
    Schema::from_pairs(names.into_iter().map(|n| (n, MatrixType::of(symbol, symbol))))
}

/// Compiles `e` into MATLANG over adjacency matrices. `all` and `id` are
/// expressed through the lexicographically first variable of `schema`.
pub fn compile(schema: &Schema, e: &BinRelExpr) -> Result<Expr, BinRelError> {
    let pivot = schema.names().next().cloned();
    let pivot = || pivot.clone().map(Expr::var).ok_or(BinRelError::EmptySchema);
    Ok(match e {
        BinRelExpr::Var(v) => Expr::var(v.clone()),
        BinRelExpr::All => pivot()?.ones().mul(pivot()?.ones().transpose()),
        BinRelExpr::Identity => pivot()?.ones().diag(),
        BinRelExpr::Union(a, b) => Expr::apply("or", vec![compile(schema, a)?, compile(schema, b)?]),
        BinRelExpr::Difference(a, b) => {
            Expr::apply("andnot", vec![compile(schema, a)?, compile(schema, b)?])
        }
        BinRelExpr::Converse(a) => compile(schema, a)?.transpose(),
        BinRelExpr::Compose(a, b) => {
            Expr::apply("gt0", vec![compile(schema, a)?.mul(compile(schema, b)?)])
        }
    })
}

/// A graph instance: binary relations over the domain `{1..n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInstance {
    pub n: usize,
    pub rels: BTreeMap<String, BTreeSet<(usize, usize)>>,
}

impl GraphInstance {
    /// Panics if `n` is zero or an edge leaves `{1..n}`.
    pub fn new(n: usize, rels: BTreeMap<String, BTreeSet<(usize, usize)>>) -> Self {
        assert!(n >= 1, "graph instances have a nonempty domain");
        for r in rels.values() {
            assert!(
                r.iter().all(|&(a, b)| (1..=n).contains(&a) && (1..=n).contains(&b)),
                "edge outside the domain"
            );
        }
        GraphInstance { n, rels }
    }
}

/// The adjacency matrix of a relation over `{1..n}`.
pub fn adjacency<T: Scalar>(n: usize, r: &BTreeSet<(usize, usize)>) -> Matrix<T> {
    Matrix::from_fn(n, n, |i, j| {
        if r.contains(&(i + 1, j + 1)) {
            T::one()
        } else {
            T::zero()
        }
    })
}

pub fn adj_encode<T: Scalar>(gi: &GraphInstance) -> Instance<T> {
    Instance::from_pairs(gi.rels.iter().map(|(k, r)| (k.clone(), adjacency(gi.n, r))))
}

/// Pairs `(i, j)` whose entry is nonzero up to `eps`.
pub fn adj_decode<T: Scalar>(m: &Matrix<T>, eps: f64) -> Result<BTreeSet<(usize, usize)>, BinRelError> {
    if !m.is_square() {
        return Err(BinRelError::NonSquare(m.rows(), m.cols()));
    }
    let n = m.rows();
    Ok((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !m[(i, j)].is_zero_tol(eps))
        .map(|(i, j)| (i + 1, j + 1))
        .collect())
}
