//! Terms and existential formulas over the reals.

use crate::ast::Expr;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A polynomial term with rational constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(BigRational),
    Add(Vec<Term>),
    Mul(Vec<Term>),
    Neg(Box<Term>),
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Term {
        Term::int(0)
    }

    pub fn one() -> Term {
        Term::int(1)
    }

    fn as_const(&self) -> Option<&BigRational> {
        match self {
            Term::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn add(self, o: Term) -> Term {
        Term::sum(vec![self, o])
    }

    pub fn sub(self, o: Term) -> Term {
        Term::sum(vec![self, o.neg()])
    }

    pub fn mul(self, o: Term) -> Term {
        Term::product(vec![self, o])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Term {
        match self {
            Term::Const(c) => Term::Const(-c),
            Term::Neg(t) => *t,
            t => Term::Neg(Box::new(t)),
        }
    }

    /// Sum with constant folding and flattening.
    pub fn sum(parts: Vec<Term>) -> Term {
        let mut c = BigRational::zero();
        let mut rest = Vec::new();
        for p in parts {
            match p {
                Term::Const(k) => c += k,
                Term::Add(inner) => {
                    for q in inner {
                        match q {
                            Term::Const(k) => c += k,
                            q => rest.push(q),
                        }
                    }
                }
                p => rest.push(p),
            }
        }
        if !c.is_zero() {
            rest.push(Term::Const(c));
        }
        match rest.len() {
            0 => Term::zero(),
            1 => rest.pop().expect("one element"),
            _ => Term::Add(rest),
        }
    }

    /// Product with constant folding and flattening.
    pub fn product(parts: Vec<Term>) -> Term {
        let mut c = BigRational::one();
        let mut rest = Vec::new();
        for p in parts {
            match p {
                Term::Const(k) => c *= k,
                Term::Mul(inner) => {
                    for q in inner {
                        match q {
                            Term::Const(k) => c *= k,
                            q => rest.push(q),
                        }
                    }
                }
                p => rest.push(p),
            }
        }
        if c.is_zero() {
            return Term::zero();
        }
        let negate = c.is_negative();
        let c = c.abs();
        if !c.is_one() {
            rest.insert(0, Term::Const(c));
        }
        let t = match rest.len() {
            0 => Term::one(),
            1 => rest.pop().expect("one element"),
            _ => Term::Mul(rest),
        };
        if negate {
            t.neg()
        } else {
            t
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::Neg(t) => 1 + t.node_count(),
            Term::Add(ts) | Term::Mul(ts) => 1 + ts.iter().map(Term::node_count).sum::<usize>(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Neg(t) => t.collect_vars(out),
            Term::Add(ts) | Term::Mul(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
            Term::Neg(t) => t.substitute(map).neg(),
            Term::Add(ts) => Term::sum(ts.iter().map(|t| t.substitute(map)).collect()),
            Term::Mul(ts) => Term::product(ts.iter().map(|t| t.substitute(map)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
            Term::Neg(t) => write!(f, "-({t})"),
            Term::Add(ts) | Term::Mul(ts) => {
                let sep = if matches!(self, Term::Add(_)) { " + " } else { "*" };
                f.write_str("(")?;
                for (k, t) in ts.iter().enumerate() {
                    if k > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A complex quantity as a pair of real terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CTerm {
    pub re: Term,
    pub im: Term,
}

impl CTerm {
    pub fn new(re: Term, im: Term) -> CTerm {
        CTerm { re, im }
    }

    pub fn real(re: Term) -> CTerm {
        CTerm::new(re, Term::zero())
    }

    /// The pair `<stem>_re`, `<stem>_im`.
    pub fn vars(stem: &str) -> CTerm {
        CTerm::new(Term::var(format!("{stem}_re")), Term::var(format!("{stem}_im")))
    }

    pub fn zero() -> CTerm {
        CTerm::real(Term::zero())
    }

    pub fn one() -> CTerm {
        CTerm::real(Term::one())
    }

    pub fn add(&self, o: &CTerm) -> CTerm {
        CTerm::new(self.re.clone().add(o.re.clone()), self.im.clone().add(o.im.clone()))
    }

    pub fn sub(&self, o: &CTerm) -> CTerm {
        CTerm::new(self.re.clone().sub(o.re.clone()), self.im.clone().sub(o.im.clone()))
    }

    pub fn mul(&self, o: &CTerm) -> CTerm {
        let (a, b, c, d) = (&self.re, &self.im, &o.re, &o.im);
        CTerm::new(
            Term::sum(vec![a.clone().mul(c.clone()), b.clone().mul(d.clone()).neg()]),
            Term::sum(vec![a.clone().mul(d.clone()), b.clone().mul(c.clone())]),
        )
    }

    pub fn conj(&self) -> CTerm {
        CTerm::new(self.re.clone(), self.im.clone().neg())
    }

    pub fn sum(parts: impl IntoIterator<Item = CTerm>) -> CTerm {
        let (re, im): (Vec<Term>, Vec<Term>) = parts.into_iter().map(|c| (c.re, c.im)).unzip();
        CTerm::new(Term::sum(re), Term::sum(im))
    }

    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> CTerm {
        CTerm::new(self.re.substitute(map), self.im.substitute(map))
    }
}

/// A matrix of complex terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CTerm>,
}

impl Grid {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CTerm) -> Grid {
        let mut cells = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                cells.push(f(i, j));
            }
        }
        Grid { rows, cols, cells }
    }

    /// Cells named `<stem>_<i>_<j>` with 1-based indices.
    pub fn vars(stem: &str, rows: usize, cols: usize) -> Grid {
        Grid::from_fn(rows, cols, |i, j| CTerm::vars(&format!("{stem}_{}_{}", i + 1, j + 1)))
    }

    pub fn at(&self, i: usize, j: usize) -> &CTerm {
        &self.cells[i * self.cols + j]
    }

    /// The variable names of a grid built by [`Grid::vars`], in witness
    /// order: row-major, real part before imaginary part.
    pub fn var_names(&self) -> Vec<String> {
        self.cells
            .iter()
            .flat_map(|c| [&c.re, &c.im])
            .map(|t| match t {
                Term::Var(v) => v.clone(),
                other => panic!("grid cell `{other}` is not a variable"),
            })
            .collect()
    }

    pub fn mul(&self, o: &Grid) -> Grid {
        assert_eq!(self.cols, o.rows, "inner dimensions must agree");
        Grid::from_fn(self.rows, o.cols, |i, j| {
            CTerm::sum((0..self.cols).map(|k| self.at(i, k).mul(o.at(k, j))))
        })
    }

    pub fn identity(n: usize) -> Grid {
        Grid::from_fn(n, n, |i, j| if i == j { CTerm::one() } else { CTerm::zero() })
    }
}

/// How the ground checker instantiates an existential block from the
/// current assignment. Values are produced in the order of the block's
/// variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// No recipe; ground checking fails with a missing-witness error.
    None,
    /// The value of a MATLANG operation on the given argument grids.
    Node { op: NodeOp, args: Vec<Grid> },
    /// The inverse of a grid's value (zero if singular).
    Inverse(Grid),
    /// A nonzero null vector of a grid's value, or zero if none exists.
    NullVector(Grid),
    /// `P = A B` followed by one eigenvalue per column of `B`.
    EigenColumns { a: Grid, b: Grid },
    /// A Jordan decomposition `Z A = J Z`: values of `Z`, `W = Z^-1`, the
    /// diagonal of `J` and its superdiagonal.
    Jordan(Grid),
    /// The inputs pinned by a constraint (unpinned entries are 0) and the
    /// output of `expr` on them.
    Pinned {
        pins: BTreeMap<String, BigRational>,
        inputs: Vec<(String, usize, usize)>,
        expr: Expr,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeOp {
    MatMul,
    Apply(String),
    Inv,
    Eigen,
}

/// An existential formula. Negation only occurs through `<` and the
/// desugarings in the helper constructors.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Lt(Term, Term),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists {
        vars: Vec<String>,
        witness: Witness,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Lt(a, b)
    }

    /// `a != b` as `a < b or b < a`.
    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::or(vec![Formula::lt(a.clone(), b.clone()), Formula::lt(b, a)])
    }

    /// `a <= b` as `a < b or a = b`.
    pub fn le(a: Term, b: Term) -> Formula {
        Formula::or(vec![Formula::lt(a.clone(), b.clone()), Formula::eq(a, b)])
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().expect("one element"),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().expect("one element"),
            _ => Formula::Or(out),
        }
    }

    pub fn exists(vars: Vec<String>, witness: Witness, body: Formula) -> Formula {
        if vars.is_empty() {
            return body;
        }
        Formula::Exists {
            vars,
            witness,
            body: Box::new(body),
        }
    }

    /// Complex equality.
    pub fn ceq(a: &CTerm, b: &CTerm) -> Formula {
        Formula::and(vec![
            Formula::eq(a.re.clone(), b.re.clone()),
            Formula::eq(a.im.clone(), b.im.clone()),
        ])
    }

    /// Complex disequality.
    pub fn cneq(a: &CTerm, b: &CTerm) -> Formula {
        Formula::or(vec![
            Formula::neq(a.re.clone(), b.re.clone()),
            Formula::neq(a.im.clone(), b.im.clone()),
        ])
    }

    pub fn grid_eq(a: &Grid, b: &Grid) -> Formula {
        Formula::and(a.cells.iter().zip(&b.cells).map(|(x, y)| Formula::ceq(x, y)).collect())
    }

    pub fn node_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::Eq(a, b) | Formula::Lt(a, b) => 1 + a.node_count() + b.node_count(),
            Formula::And(fs) | Formula::Or(fs) => {
                1 + fs.iter().map(Formula::node_count).sum::<usize>()
            }
            Formula::Exists { vars, body, .. } => 1 + vars.len() + body.node_count(),
        }
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>, bound: &mut Vec<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) | Formula::Lt(a, b) => {
                let mut vs = BTreeSet::new();
                a.collect_vars(&mut vs);
                b.collect_vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_free(out, bound));
            }
            Formula::Exists { vars, body, .. } => {
                let n = bound.len();
                bound.extend(vars.iter().cloned());
                body.collect_free(out, bound);
                bound.truncate(n);
            }
        }
    }

    /// Variables bound by some existential, in order of appearance.
    pub fn bound_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut Vec<String>) {
        match self {
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_bound(out)),
            Formula::Exists { vars, body, .. } => {
                out.extend(vars.iter().cloned());
                body.collect_bound(out);
            }
            _ => {}
        }
    }

    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::eq(a.substitute(map), b.substitute(map)),
            Formula::Lt(a, b) => Formula::lt(a.substitute(map), b.substitute(map)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Exists {
                vars,
                witness,
                body,
            } => Formula::exists(vars.clone(), witness.clone(), body.substitute(map)),
        }
    }

    /// The formula with every existential removed, keeping its body.
    pub fn skolemized(&self) -> Formula {
        match self {
            Formula::And(fs) => Formula::and(fs.iter().map(Formula::skolemized).collect()),
            Formula::Or(fs) => Formula::or(fs.iter().map(Formula::skolemized).collect()),
            Formula::Exists { body, .. } => body.skolemized(),
            f => f.clone(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (k, x) in fs.iter().enumerate() {
                if k > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Lt(a, b) => write!(f, "{a} < {b}"),
            Formula::And(fs) => join(f, fs, " ∧ "),
            Formula::Or(fs) => join(f, fs, " ∨ "),
            Formula::Exists { vars, body, .. } => write!(f, "∃{}. {body}", vars.join(",")),
        }
    }
}

/// An existential formula together with its declared free variables.
#[derive(Clone, Debug, PartialEq)]
pub struct RealFormula {
    pub free: Vec<String>,
    pub body: Formula,
}

impl RealFormula {
    pub fn node_count(&self) -> usize {
        self.body.node_count()
    }
}
